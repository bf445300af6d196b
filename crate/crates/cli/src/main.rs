use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcord_cli::{build_scenario, builtin, run_scenario, Format, Overrides};

#[derive(Parser)]
#[command(name = "qcord", version, about = "Quantum cords: exact jet calculus, holonomy and secondary classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task in the scenario
    Verify(Common),
    /// Run only the holonomy tasks
    Holonomy(Common),
    /// Run only the gv tasks
    Gv(Common),
    /// Run only the cohomology tasks
    Cohomology(Common),
    /// Run only the cech tasks
    Cech(Common),
    /// Run only the concord tasks
    Concord(Common),
    /// List the built-in scenarios
    Builtins,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Text,
}

#[derive(Args)]
struct Common {
    /// scenario file, or builtin:NAME
    scenario: String,
    /// jet order N
    #[arg(long)]
    order: Option<u32>,
    /// Fourier cutoff for the Bott complex
    #[arg(long)]
    cutoff: Option<u32>,
    /// transport step size
    #[arg(long)]
    step: Option<f64>,
    /// numerical tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutFormat,
    /// report zero seconds for every task, so output is byte-identical across runs
    #[arg(long)]
    no_timing: bool,
}

fn load(source: &str) -> Result<String, String> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return builtin::lookup(name).map(str::to_string).ok_or_else(|| {
            let names: Vec<&str> = builtin::BUILTINS.iter().map(|(n, _)| *n).collect();
            format!("no builtin scenario '{name}' (have: {})", names.join(", "))
        });
    }
    let path = PathBuf::from(source);
    std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))
}

fn configure_workers() -> Result<(), String> {
    let Ok(v) = std::env::var("QCORD_WORKERS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("QCORD_WORKERS must be a positive integer, got '{v}'"))?;
    if n == 0 {
        return Err("QCORD_WORKERS must be a positive integer, got '0'".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // task panics are caught and reported; keep them off stderr
    std::panic::set_hook(Box::new(|_| {}));
    if let Err(e) = configure_workers() {
        eprintln!("qcord: {e}");
        return ExitCode::from(2);
    }
    let (only, c) = match cli.command {
        Command::Builtins => {
            for (name, _) in builtin::BUILTINS {
                println!("builtin:{name}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Verify(c) => (None, c),
        Command::Holonomy(c) => (Some("holonomy"), c),
        Command::Gv(c) => (Some("gv"), c),
        Command::Cohomology(c) => (Some("cohomology"), c),
        Command::Cech(c) => (Some("cech"), c),
        Command::Concord(c) => (Some("concord"), c),
    };
    let text = match load(&c.scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("qcord: {e}");
            return ExitCode::from(2);
        }
    };
    let overrides = Overrides { order: c.order, cutoff: c.cutoff, step: c.step, tol: c.tol, seed: c.seed };
    let scenario = match build_scenario(&text, &overrides) {
        Ok(s) => s,
        Err(d) => {
            eprintln!("{}: {d}", c.scenario);
            return ExitCode::from(2);
        }
    };
    let report = run_scenario(&scenario, only, !c.no_timing);
    if report.tasks.is_empty() {
        eprintln!("qcord: scenario has no {} tasks", only.unwrap_or("runnable"));
    }
    let format = match c.format {
        OutFormat::Json => Format::Json,
        OutFormat::Text => Format::Text,
    };
    let mut out = std::io::stdout().lock();
    if out.write_all(&report.emit(format)).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(2);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
