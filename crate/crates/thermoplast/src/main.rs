use std::path::PathBuf;
use std::process::ExitCode;
use thermoplast::cli::{cmd_mms, cmd_run, cmd_sweep, cmd_verify, Command, RunManifest, EXIT_CONFIG};

const USAGE: &str = "\
thermoplast — quasi-static thermo-elasto-plasticity on structured grids

USAGE:
    thermoplast <COMMAND> [OPTIONS]

COMMANDS:
    run       simulate one configuration, writing snapshots and diagnostics
    sweep     run the same scenario for a descending list of lambda values
              and tabulate the stress Cauchy metrics between neighbours
    verify    run the seeded property suites (the CI gate)
    mms       manufactured-solution convergence studies (h, h/2, h/4)

OPTIONS:
    --config <FILE>        configuration file (defaults apply when omitted)
    --out <DIR>            output directory (overrides output.dir)
    --snapshot-every <N>   snapshot cadence in steps (overrides config)
    --lambdas <LIST>       comma-separated descending lambdas (sweep only;
                           default 0.1,0.05,0.02,0.01)
    --resolutions <LIST>   comma-separated cells-per-side (mms only;
                           default 16,32,64)
    --seed <N>             seed for the sampling suites (default 42)

EXIT CODES:
    0 success, 1 configuration error, 2 solver failure, 3 verification failure
";

struct Args {
    command: String,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    snapshot_every: Option<usize>,
    lambdas: Vec<f64>,
    resolutions: Vec<usize>,
    seed: u64,
}

fn parse_args() -> Result<Args, String> {
    let mut argv = std::env::args().skip(1);
    let command = argv.next().ok_or_else(|| USAGE.to_string())?;
    let mut args = Args {
        command,
        config: None,
        out: None,
        snapshot_every: None,
        lambdas: vec![0.1, 0.05, 0.02, 0.01],
        resolutions: vec![16, 32, 64],
        seed: 42,
    };
    while let Some(flag) = argv.next() {
        let mut value = || {
            argv.next()
                .ok_or_else(|| format!("flag {flag} needs a value"))
        };
        match flag.as_str() {
            "--config" => args.config = Some(PathBuf::from(value()?)),
            "--out" => args.out = Some(PathBuf::from(value()?)),
            "--snapshot-every" => {
                args.snapshot_every = Some(
                    value()?
                        .parse()
                        .map_err(|_| "snapshot cadence must be an integer".to_string())?,
                )
            }
            "--lambdas" => {
                args.lambdas = value()?
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| "lambdas must be numbers".to_string())?;
            }
            "--resolutions" => {
                args.resolutions = value()?
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| "resolutions must be integers".to_string())?;
            }
            "--seed" => {
                args.seed = value()?
                    .parse()
                    .map_err(|_| "seed must be an integer".to_string())?
            }
            "--help" | "-h" => return Err(USAGE.to_string()),
            other => return Err(format!("unknown flag {other}\n\n{USAGE}")),
        }
    }
    Ok(args)
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let command = match args.command.as_str() {
        "run" => Command::Run,
        "sweep" => Command::Sweep,
        "verify" => Command::Verify,
        "mms" => Command::Mms,
        other => {
            eprintln!("unknown command {other}\n\n{USAGE}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let code = match command {
        Command::Mms => cmd_mms(&args.resolutions),
        _ => {
            match RunManifest::from_sources(
                command,
                args.config,
                args.out,
                args.snapshot_every,
                args.seed,
            ) {
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
                Ok(manifest) => match command {
                    Command::Run => cmd_run(&manifest),
                    Command::Sweep => cmd_sweep(&manifest, &args.lambdas),
                    _ => cmd_verify(&manifest),
                },
            }
        }
    };
    ExitCode::from(code as u8)
}
