use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use super::mock::{MockEngine, MockTable};
use super::{EngineCommand, EngineError, EngineRole, EngineSpec, Format};

/// Loads an engine registry file.
///
/// ```text
/// # name  role      input           output          argv
/// engine gringo grounder nonground-text ground-numeric /usr/bin/gringo {input}
/// engine clasp  solver   ground-numeric answer-sets    /usr/bin/clasp {input}
/// engine dlv    both     nonground-text ground-text    /usr/bin/dlv {mode} {input}
/// engine fake   solver   ground-numeric answer-sets    @mock runtimes.csv
/// ```
///
/// `@mock <table.csv>` declares an in-process mock engine replaying the rows
/// of that runtime table whose `engine` column equals the engine name. A
/// relative table path is resolved against the registry's directory.
pub fn registry_load(path: impl AsRef<Path>) -> Result<Vec<EngineSpec>, EngineError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_registry(&text, path.parent())
}

pub fn parse_registry(text: &str, base: Option<&Path>) -> Result<Vec<EngineSpec>, EngineError> {
    let mut specs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| EngineError::Registry { line: line_no, msg };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0] != "engine" {
            return Err(err(format!("expected `engine`, found `{}`", toks[0])));
        }
        if toks.len() < 6 {
            return Err(err(
                "expected `engine <name> <role> <input-fmt> <output-fmt> <argv...>`".into(),
            ));
        }
        let name = toks[1];
        if !name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_-.+".contains(c))
        {
            return Err(err(format!("invalid engine name `{name}`")));
        }
        let role: EngineRole = toks[2].parse().map_err(err)?;
        let input_format: Format = toks[3].parse().map_err(err)?;
        let output_format: Format = toks[4].parse().map_err(err)?;
        let argv: Vec<String> = toks[5..].iter().map(|s| s.to_string()).collect();
        let command = if argv[0] == "@mock" {
            let [_, table] = argv.as_slice() else {
                return Err(err("`@mock` takes exactly one table path".into()));
            };
            let table_path = match base {
                Some(b) if Path::new(table).is_relative() => b.join(table),
                _ => Path::new(table).to_path_buf(),
            };
            let table =
                MockTable::from_csv(&table_path, Some(name)).map_err(|e| err(e.to_string()))?;
            EngineCommand::Mock(Arc::new(MockEngine { table }))
        } else {
            EngineCommand::External(argv)
        };
        let spec = EngineSpec {
            name: name.to_string(),
            role,
            command,
            input_format,
            output_format,
        };
        spec.validate().map_err(err)?;
        if !seen.insert(name.to_string()) {
            return Err(EngineError::Duplicate(name.to_string()));
        }
        specs.push(spec);
    }
    Ok(specs)
}
