//! Subprocess mock engine.
//!
//! ```text
//! measp-mock --table runtimes.csv --engine NAME [--mode ground|solve]
//!            [--format ground-numeric|ground-text] [--time-scale F] INPUT
//! ```
//!
//! Looks up the input's file stem in the runtime table, burns the recorded
//! CPU time (scaled by `--time-scale`), then behaves per the recorded status:
//! prints a result or a grounding, spins forever (timeout), allocates until
//! the address-space limit aborts it (memout), or exits 1 (error).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use measp::engines::mock::{ground_source, mock_answer_output};
use measp::engines::{instance_id_of, Format, MockTable, RunStatus};

struct Args {
    table: PathBuf,
    engine: Option<String>,
    ground: bool,
    format: Format,
    scale: f64,
    input: PathBuf,
}

fn parse_args() -> Result<Args, String> {
    let mut it = std::env::args().skip(1);
    let mut table = None;
    let mut engine = None;
    let mut ground = false;
    let mut format = Format::GroundNumeric;
    let mut scale = 1.0;
    let mut input = None;
    while let Some(a) = it.next() {
        let mut val = || it.next().ok_or_else(|| format!("{a} needs a value"));
        match a.as_str() {
            "--table" => table = Some(PathBuf::from(val()?)),
            "--engine" => engine = Some(val()?),
            "--mode" => {
                ground = match val()?.as_str() {
                    "ground" => true,
                    "solve" => false,
                    m => return Err(format!("unknown mode `{m}`")),
                }
            }
            "--format" => format = val()?.parse()?,
            "--time-scale" => scale = val()?.parse().map_err(|_| "bad --time-scale".to_string())?,
            _ if a.starts_with("--") => return Err(format!("unknown option {a}")),
            _ => input = Some(PathBuf::from(a)),
        }
    }
    Ok(Args {
        table: table.ok_or("missing --table")?,
        engine,
        ground,
        format,
        scale,
        input: input.ok_or("missing input file")?,
    })
}

fn cpu_now() -> f64 {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: clock_gettime writes into the timespec we pass.
    unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    ts.tv_sec as f64 + ts.tv_nsec as f64 / 1e9
}

fn burn(seconds: f64) {
    let end = cpu_now() + seconds;
    let mut x = 0u64;
    while cpu_now() < end {
        for i in 0..10_000u64 {
            x = std::hint::black_box(x.wrapping_mul(6364136223846793005).wrapping_add(i));
        }
    }
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("measp-mock: {e}");
            return ExitCode::from(2);
        }
    };
    let table = match MockTable::from_csv(&args.table, args.engine.as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("measp-mock: {e}");
            return ExitCode::from(2);
        }
    };
    let instance = instance_id_of(&args.input);
    let Some((status, cpu)) = table.get(&instance) else {
        eprintln!("measp-mock: instance `{instance}` not in table");
        return ExitCode::from(1);
    };
    burn(cpu * args.scale);
    match status {
        RunStatus::SolvedSat | RunStatus::SolvedUnsat => {
            if args.ground {
                let src = match std::fs::read(&args.input) {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("measp-mock: {e}");
                        return ExitCode::from(1);
                    }
                };
                match ground_source(&src, args.format) {
                    Ok(out) => print!("{}", String::from_utf8_lossy(&out)),
                    Err(e) => {
                        eprintln!("measp-mock: {e}");
                        return ExitCode::from(1);
                    }
                }
                ExitCode::SUCCESS
            } else {
                print!("{}", mock_answer_output(&instance, status));
                ExitCode::from(if status == RunStatus::SolvedSat {
                    10
                } else {
                    20
                })
            }
        }
        RunStatus::Timeout => loop {
            burn(3600.0);
        },
        RunStatus::Memout => {
            let mut hoard: Vec<Vec<u8>> = Vec::new();
            for _ in 0..1024 {
                hoard.push(vec![1u8; 64 << 20]);
                std::thread::sleep(Duration::from_millis(1));
            }
            eprintln!("measp-mock: out of memory");
            ExitCode::from(1)
        }
        RunStatus::Error => {
            eprintln!("measp-mock: scripted failure");
            ExitCode::from(1)
        }
    }
}
