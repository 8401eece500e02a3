use std::path::Path;
use std::time::Instant;

use super::mock::{ground_source, mock_answer_output};
use super::{
    digest, instance_id_of, EngineCommand, EngineError, EngineRole, EngineSpec, Format, Limits,
    RunRecord, RunStatus,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Ground,
    Solve,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Ground => "ground",
            RunMode::Solve => "solve",
        }
    }
}

/// A run record together with what the engine printed.
#[derive(Clone, Debug)]
pub struct EngineOutcome {
    pub record: RunRecord,
    /// Contents of `{output}` when the template names it, stdout otherwise.
    pub output: Vec<u8>,
    pub stderr: String,
}

/// Fails when CPU-time and address-space limits cannot be enforced here.
pub fn check_limits_supported() -> Result<(), EngineError> {
    #[cfg(unix)]
    {
        let mut lim = libc::rlimit {
            rlim_cur: 0,
            rlim_max: 0,
        };
        // SAFETY: getrlimit only writes into the struct we pass.
        let ok = unsafe {
            libc::getrlimit(libc::RLIMIT_CPU, &mut lim) == 0
                && libc::getrlimit(libc::RLIMIT_AS, &mut lim) == 0
        };
        if ok {
            return Ok(());
        }
    }
    Err(EngineError::LimitsUnsupported)
}

/// Runs `spec` on `input` in its natural mode: grounding for grounders,
/// solving otherwise.
pub fn run_engine(spec: &EngineSpec, input: &Path, limits: Limits) -> RunRecord {
    let mode = if spec.role == EngineRole::Grounder {
        RunMode::Ground
    } else {
        RunMode::Solve
    };
    run_engine_captured(spec, input, limits, mode).record
}

pub fn run_engine_captured(
    spec: &EngineSpec,
    input: &Path,
    limits: Limits,
    mode: RunMode,
) -> EngineOutcome {
    let instance = instance_id_of(input);
    let out_fmt = match mode {
        RunMode::Ground => spec.output_format,
        RunMode::Solve => Format::AnswerSets,
    };
    let bad_mode = match mode {
        RunMode::Ground => !spec.role.can_ground(),
        RunMode::Solve => !spec.role.can_solve(),
    };
    if bad_mode {
        return EngineOutcome {
            record: RunRecord::error(
                &instance,
                &spec.name,
                format!("{} cannot {}", spec.name, mode.as_str()),
            ),
            output: Vec::new(),
            stderr: String::new(),
        };
    }
    match &spec.command {
        EngineCommand::Mock(m) => {
            let mut record = m.replay(&spec.name, &instance, limits.cpu_seconds);
            let mut output = Vec::new();
            if record.status.is_solved() {
                match mode {
                    RunMode::Ground => match std::fs::read(input)
                        .map_err(|e| e.to_string())
                        .and_then(|src| ground_source(&src, out_fmt))
                    {
                        Ok(o) => {
                            record.status = RunStatus::SolvedSat;
                            output = o;
                        }
                        Err(e) => {
                            record.status = RunStatus::Error;
                            record.diagnostic = Some(e);
                        }
                    },
                    RunMode::Solve => {
                        let text = mock_answer_output(&instance, record.status);
                        record.answer_digest = scan_answers(&text).1;
                        output = text.into_bytes();
                    }
                }
            }
            EngineOutcome {
                record,
                output,
                stderr: String::new(),
            }
        }
        EngineCommand::External(template) => run_external(
            &spec.name, &instance, template, input, limits, mode, out_fmt,
        ),
    }
}

/// Scans solver output for a result token and the first answer set.
fn scan_answers(out: &str) -> (Option<RunStatus>, Option<String>) {
    let mut status = None;
    let mut answer: Option<String> = None;
    let mut want_answer = false;
    for line in out.lines().map(str::trim) {
        if want_answer && !line.is_empty() {
            answer.get_or_insert_with(|| line.to_string());
            want_answer = false;
            continue;
        }
        match line {
            "UNSATISFIABLE" | "INCONSISTENT" => {
                status.get_or_insert(RunStatus::SolvedUnsat);
            }
            "SATISFIABLE" | "OPTIMUM FOUND" => {
                status.get_or_insert(RunStatus::SolvedSat);
            }
            l if l.starts_with("Answer:") => want_answer = answer.is_none(),
            l if l.starts_with('{') && l.ends_with('}') => {
                answer.get_or_insert_with(|| l.to_string());
                status.get_or_insert(RunStatus::SolvedSat);
            }
            _ => {}
        }
    }
    (status, answer.map(|a| digest(&a)))
}

const MEMOUT_MARKERS: [&str; 5] = [
    "memory allocation of",
    "bad_alloc",
    "out of memory",
    "Cannot allocate memory",
    "MemoryError",
];

struct RawExit {
    exit_code: Option<i32>,
    signal: Option<i32>,
    cpu: f64,
    wall: f64,
    max_rss_bytes: u64,
    wall_killed: bool,
}

fn classify(
    raw: &RawExit,
    stdout: &[u8],
    stderr: &str,
    limits: Limits,
    out_fmt: Format,
) -> (RunStatus, Option<String>, Option<String>) {
    let failed = raw.exit_code != Some(0);
    if (failed && MEMOUT_MARKERS.iter().any(|m| stderr.contains(m)))
        || raw.max_rss_bytes >= limits.memory_bytes
    {
        return (
            RunStatus::Memout,
            None,
            Some("memory limit exceeded".into()),
        );
    }
    #[cfg(unix)]
    let xcpu = raw.signal == Some(libc::SIGXCPU);
    #[cfg(not(unix))]
    let xcpu = false;
    if xcpu || raw.wall_killed || raw.cpu >= limits.cpu_seconds {
        return (RunStatus::Timeout, None, None);
    }
    if let Some(sig) = raw.signal {
        return (
            RunStatus::Error,
            None,
            Some(format!("killed by signal {sig}")),
        );
    }
    let code = raw.exit_code.unwrap_or(-1);
    if out_fmt == Format::AnswerSets {
        if !matches!(code, 0 | 10 | 20 | 30) {
            return (
                RunStatus::Error,
                None,
                Some(format!("exit code {code}: {}", last_line(stderr))),
            );
        }
        match scan_answers(&String::from_utf8_lossy(stdout)) {
            (Some(s), d) => (s, d, None),
            (None, _) => (
                RunStatus::Error,
                None,
                Some("no result token in output".into()),
            ),
        }
    } else if code != 0 {
        (
            RunStatus::Error,
            None,
            Some(format!("exit code {code}: {}", last_line(stderr))),
        )
    } else if stdout.iter().all(u8::is_ascii_whitespace) {
        (RunStatus::Error, None, Some("empty ground output".into()))
    } else {
        (RunStatus::SolvedSat, None, None)
    }
}

fn last_line(s: &str) -> &str {
    s.lines()
        .rev()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("")
        .trim()
}

#[cfg(not(unix))]
fn run_external(
    name: &str,
    instance: &str,
    _: &[String],
    _: &Path,
    _: Limits,
    _: RunMode,
    _: Format,
) -> EngineOutcome {
    EngineOutcome {
        record: RunRecord::error(instance, name, EngineError::LimitsUnsupported.to_string()),
        output: Vec::new(),
        stderr: String::new(),
    }
}

#[cfg(unix)]
fn run_external(
    name: &str,
    instance: &str,
    template: &[String],
    input: &Path,
    limits: Limits,
    mode: RunMode,
    out_fmt: Format,
) -> EngineOutcome {
    use std::io::Read;
    use std::os::unix::process::CommandExt;
    use std::process::{Command, Stdio};
    use std::time::Duration;

    let fail = |msg: String| EngineOutcome {
        record: RunRecord::error(instance, name, msg),
        output: Vec::new(),
        stderr: String::new(),
    };

    let out_dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return fail(format!("cannot create scratch directory: {e}")),
    };
    let out_path = out_dir.path().join("output");
    let uses_output = template.iter().any(|a| a.contains("{output}"));
    let argv: Vec<String> = template
        .iter()
        .map(|a| {
            a.replace("{input}", &input.to_string_lossy())
                .replace("{output}", &out_path.to_string_lossy())
                .replace("{mode}", mode.as_str())
        })
        .collect();

    let cpu_soft = limits.cpu_seconds.ceil().max(1.0) as libc::rlim_t;
    let mem = limits.memory_bytes as libc::rlim_t;
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    // SAFETY: the closure only calls async-signal-safe libc functions.
    unsafe {
        cmd.pre_exec(move || {
            if libc::setpgid(0, 0) != 0 {
                return Err(std::io::Error::last_os_error());
            }
            let cpu = libc::rlimit {
                rlim_cur: cpu_soft,
                rlim_max: cpu_soft + 1,
            };
            let as_ = libc::rlimit {
                rlim_cur: mem,
                rlim_max: mem,
            };
            if libc::setrlimit(libc::RLIMIT_CPU, &cpu) != 0
                || libc::setrlimit(libc::RLIMIT_AS, &as_) != 0
            {
                return Err(std::io::Error::last_os_error());
            }
            Ok(())
        });
    }

    let start = Instant::now();
    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) => return fail(format!("cannot start `{}`: {e}", argv[0])),
    };
    let pid = child.id() as libc::pid_t;
    let mut out_pipe = child.stdout.take().expect("piped stdout");
    let mut err_pipe = child.stderr.take().expect("piped stderr");
    let out_reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = out_pipe.read_to_end(&mut buf);
        buf
    });
    let err_reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = err_pipe.read_to_end(&mut buf);
        buf
    });

    let wall_limit = Duration::from_secs_f64(2.0 * limits.cpu_seconds.max(0.001));
    let mut status: libc::c_int = 0;
    // SAFETY: rusage is plain old data, zeroed is a valid value.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let mut wall_killed = false;
    let mut nap = Duration::from_millis(1);
    loop {
        // SAFETY: pid is our own child; status and usage are valid out-pointers.
        let r = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut usage) };
        if r == pid {
            break;
        }
        if r < 0 {
            let e = std::io::Error::last_os_error();
            if e.kind() == std::io::ErrorKind::Interrupted {
                continue;
            }
            return fail(format!("wait failed: {e}"));
        }
        if !wall_killed && start.elapsed() >= wall_limit {
            // SAFETY: signalling our own process group.
            unsafe { libc::killpg(pid, libc::SIGKILL) };
            wall_killed = true;
        }
        std::thread::sleep(nap);
        nap = (nap * 2).min(Duration::from_millis(20));
    }
    let wall = start.elapsed().as_secs_f64();
    // Reap stragglers that still hold the pipes open.
    // SAFETY: the group id is the child's pid, which we created.
    unsafe { libc::killpg(pid, libc::SIGKILL) };
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = String::from_utf8_lossy(&err_reader.join().unwrap_or_default()).into_owned();

    let tv = |t: libc::timeval| t.tv_sec as f64 + t.tv_usec as f64 / 1e6;
    let raw = RawExit {
        exit_code: libc::WIFEXITED(status).then(|| libc::WEXITSTATUS(status)),
        signal: libc::WIFSIGNALED(status).then(|| libc::WTERMSIG(status)),
        cpu: tv(usage.ru_utime) + tv(usage.ru_stime),
        wall,
        max_rss_bytes: (usage.ru_maxrss.max(0) as u64).saturating_mul(1024),
        wall_killed,
    };
    let output = if uses_output {
        std::fs::read(&out_path).unwrap_or_default()
    } else {
        stdout
    };
    let (st, answer_digest, diagnostic) = classify(&raw, &output, &stderr, limits, out_fmt);
    let cpu_seconds = if st == RunStatus::Timeout {
        raw.cpu.max(limits.cpu_seconds)
    } else {
        raw.cpu
    };
    EngineOutcome {
        record: RunRecord {
            instance_id: instance.to_string(),
            engine_name: name.to_string(),
            status: st,
            cpu_seconds,
            wall_seconds: raw.wall,
            answer_digest,
            diagnostic,
        },
        output,
        stderr,
    }
}
