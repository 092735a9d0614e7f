use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kerrloss_cli::config::linspace;
use kerrloss_cli::output::QUADRATURE_CONVENTION;
use kerrloss_cli::{run, CliError, Entries, RunManifest, Scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "kerrloss", version, about = "Two-mode cross-Kerr scenarios with loss and dephasing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Expand into sequential runs, e.g. `t=0.1:1.0:10`.
        #[arg(long)]
        sweep: Option<String>,
        /// Override `cutoff`.
        #[arg(long)]
        cutoff: Option<usize>,
        /// Override the integrator tolerance `tol`.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Parse and check a config file without running it.
    Validate { config: PathBuf },
    /// List the available scenarios.
    ListScenarios,
}

struct Sweep {
    key: String,
    values: Vec<f64>,
}

fn parse_sweep(s: &str) -> Result<Sweep, CliError> {
    let bad = |m: &str| CliError::Config(vec![format!("--sweep '{s}': {m}")]);
    let (key, range) = s.split_once('=').ok_or_else(|| bad("expected key=start:stop:n"))?;
    let parts: Vec<&str> = range.split(':').collect();
    let [start, stop, n] = parts[..] else {
        return Err(bad("expected key=start:stop:n"));
    };
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad(&format!("'{v}' is not a number")));
    let n: usize = n.trim().parse().map_err(|_| bad(&format!("'{n}' is not a count")))?;
    let values = linspace(num(start)?, num(stop)?, n).map_err(|e| bad(&e))?;
    Ok(Sweep {
        key: key.trim().to_string(),
        values,
    })
}

fn configure_threads() {
    let n = std::env::var("KERRLOSS_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    if let Some(n) = n.filter(|&n| n > 0) {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn error_record(e: &CliError) -> String {
    let mut m = RunManifest::new(None, Default::default());
    m.fail(e);
    serde_json::json!({ "status": "error", "error": m.error }).to_string()
}

fn read_entries(path: &Path) -> Result<Entries, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Entries::parse(&text).map_err(CliError::Config)
}

fn run_one(entries: Entries, out_dir: Option<&Path>) -> Result<(), CliError> {
    let cfg = match ScenarioConfig::from_entries(entries) {
        Ok(cfg) => cfg,
        Err(errors) => {
            let e = CliError::Config(errors);
            if let Some(dir) = out_dir {
                let mut m = RunManifest::new(None, Default::default());
                m.fail(&e);
                if std::fs::create_dir_all(dir).is_ok() {
                    let _ = m.write(dir);
                }
            }
            return Err(e);
        }
    };
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("kerrloss-out").join(cfg.scenario.name()));
    println!("running {} -> {}", cfg.scenario, dir.display());
    println!("quadrature convention: {QUADRATURE_CONVENTION}");
    let (manifest, result) = run(&cfg, &dir);
    println!("{} in {:.2} s", manifest.status, manifest.duration_seconds);
    result
}

fn run_command(
    config: &Path,
    out_dir: Option<PathBuf>,
    sweep: Option<String>,
    cutoff: Option<usize>,
    tol: Option<f64>,
) -> Result<(), CliError> {
    let mut entries = read_entries(config)?;
    if let Some(n) = cutoff {
        entries.set("cutoff", n.to_string());
    }
    if let Some(t) = tol {
        entries.set("tol", t.to_string());
    }
    let Some(sweep) = sweep else {
        return run_one(entries, out_dir.as_deref());
    };
    let sweep = parse_sweep(&sweep)?;
    let base = out_dir
        .or_else(|| entries.get("out_dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("kerrloss-out").join("sweep"));
    let mut first_error = None;
    for (i, v) in sweep.values.iter().enumerate() {
        let mut e = entries.clone();
        e.set(&sweep.key, v.to_string());
        if let Err(err) = run_one(e, Some(&base.join(format!("sweep_{i:03}")))) {
            eprintln!("{}", error_record(&err));
            first_error.get_or_insert(err);
        }
    }
    first_error.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Run {
            config,
            out_dir,
            sweep,
            cutoff,
            tol,
        } => run_command(&config, out_dir, sweep, cutoff, tol),
        Command::Validate { config } => ScenarioConfig::load(&config).map(|cfg| {
            let echo: serde_json::Map<_, _> =
                cfg.entries.0.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
            println!("{}", serde_json::json!({ "status": "ok", "scenario": cfg.scenario.name(), "config": echo }));
        }),
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<32} {}", s.name(), s.description());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
