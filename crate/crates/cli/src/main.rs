use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mongelab_cli::commands::{cmd_breaktime, cmd_evolve, cmd_front_face, cmd_shock};
use mongelab_cli::verify::{report, run_all, VerifyOptions};
use mongelab_cli::{emit, CliError, Format, Overrides, RunConfig, Solver, Table};

#[derive(Parser)]
#[command(name = "mongelab", version, about = "Solvers and cross-checks for u_t = u u_x + g")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate u(x, t) from one solver or all of them.
    Evolve(Flags),
    /// Closed-form and ratio-test break times along x.
    Breaktime(Flags),
    /// Position of the vertical face of exponential data.
    FrontFace(Flags),
    /// Equal-area shock fits at each time.
    Shock(Flags),
    /// Run the invariant suites and report measured values against bounds.
    Verify(Flags),
}

#[derive(Args, Clone)]
struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// zero | segment:α,β | exponential:A,L | triangle:xl,xp,xr,h | JSON
    #[arg(long)]
    profile: Option<String>,
    /// none | constant:k | linear:k | polyx:c0,c1,… | timeonly:c0,c1,… | JSON
    #[arg(long)]
    pressure: Option<String>,
    /// Comma list or start:stop:step.
    #[arg(long = "times", visible_alias = "t", allow_hyphen_values = true)]
    times: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    /// Number of x samples.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, value_enum)]
    solver: Option<Solver>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write an SVG polyline rendering (evolve only).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Multiplier on every verification bound.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, hide = true)]
    inject_g_flip: bool,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            profile: self.profile.clone(),
            pressure: self.pressure.clone(),
            times: self.times.clone(),
            x_min: self.x_min,
            x_max: self.x_max,
            n: self.n,
            order: self.order,
            solver: self.solver,
            out: self.out.clone(),
            format: self.format,
            svg: self.svg.clone(),
            tol: self.tol,
            inject_g_flip: self.inject_g_flip,
        }
    }
}

fn finish(cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    if let Some(text) = emit(cfg, &table.render(cfg.format))? {
        print!("{text}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (Command::Evolve(f) | Command::Breaktime(f) | Command::FrontFace(f) | Command::Shock(f) | Command::Verify(f)) =
        &cli.command;
    let cfg = RunConfig::resolve(f.config.as_deref(), &f.overrides())?;
    match cli.command {
        Command::Evolve(_) => {
            let table = cmd_evolve(&cfg)?;
            if let Some(path) = &cfg.svg {
                std::fs::write(path, table.to_svg().unwrap_or_default())?;
            }
            finish(&cfg, &table)
        }
        Command::Breaktime(_) => finish(&cfg, &cmd_breaktime(&cfg)?),
        Command::FrontFace(_) => finish(&cfg, &cmd_front_face(&cfg)?),
        Command::Shock(_) => finish(&cfg, &cmd_shock(&cfg)?),
        Command::Verify(_) => {
            let opts = VerifyOptions { tol: cfg.tol, inject_g_flip: cfg.inject_g_flip };
            let checks = mongelab_cli::commands::pool().install(|| run_all(&opts));
            finish(&cfg, &report(&checks, cfg.tol))?;
            let failed = checks.iter().filter(|c| !c.passed(cfg.tol)).count();
            if failed > 0 {
                return Err(CliError::Verification(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mongelab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
