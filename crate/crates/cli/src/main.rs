use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use urban_coverage::engine::{run, Algorithm, EnvSource, Seeds, Spacing};
use urban_coverage::{generate_environment, Environment, EnvSpec, GroundGrid, Trajectory};
use urban_coverage_cli::config::{build_run, read_toml, resolve_env, ExperimentGrid, RunFile, RunOverrides, SimParams};
use urban_coverage_cli::grid::run_grid;
use urban_coverage_cli::output::write_run;
use urban_coverage_cli::render::{render_svg, Labels};
use urban_coverage_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "urbancover", version, about = "Multi-agent coverage simulations over urban worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one team and write its artifacts.
    Run(RunArgs),
    /// Run an experiment grid from a TOML file.
    Grid {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out` in the grid file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a world and write it as JSON.
    GenEnv {
        /// Family name or `emptyN`.
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a world and trajectory CSVs as SVG.
    Render {
        /// Environment JSON file.
        #[arg(long)]
        env: PathBuf,
        /// Trajectory CSVs, one per agent.
        #[arg(long = "traj")]
        trajs: Vec<PathBuf>,
        /// Row-major partition labels with a `label` header.
        #[arg(long, requires = "cell_size")]
        labels: Option<PathBuf>,
        #[arg(long)]
        cell_size: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Family name, `emptyN` or environment JSON path.
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    alg: Option<Algorithm>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    umax: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    spacing: Option<Spacing>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_text(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.clone(),
        source,
    })
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let file: RunFile = match &a.config {
        Some(p) => read_toml(p)?,
        None => RunFile::default(),
    };
    let flags = RunOverrides {
        env: a.env,
        algorithm: a.alg,
        agents: a.agents,
        seed: a.seed,
        out: a.out,
        sim: SimParams {
            steps: a.steps,
            dt: a.dt,
            u_max: a.umax,
            spacing: a.spacing,
            ..SimParams::default()
        },
    };
    let (config, _, out) = build_run(&file, &flags)?;
    let result = run(&config)?;
    write_run(&out, &result)?;
    let f = result.final_report;
    println!(
        "{} on {} with {} agents: coverage {:.2}%, revisit {:.2}, time spent {:.2} ({:.2?})",
        config.algorithm,
        config.env_label(),
        config.agents,
        f.percent_coverage,
        f.revisit.mean,
        f.time_spent.mean,
        result.wall_clock
    );
    Ok(())
}

fn cmd_grid(config: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let grid: ExperimentGrid = read_toml(&config)?;
    let out = out
        .or_else(|| grid.out.clone())
        .ok_or_else(|| CliError::Usage("no output directory given (--out)".into()))?;
    let o = run_grid(&grid, &out)?;
    println!("{} runs, {} groups written to {}", o.records.len(), o.aggregate.len(), out.display());
    Ok(())
}

fn cmd_gen_env(env: String, seed: u64, out: PathBuf) -> Result<()> {
    let world = match resolve_env(&env)? {
        EnvSource::Spec(s) => generate_environment(&EnvSpec {
            seed: Seeds::from_base(seed).env,
            ..s
        })?,
        EnvSource::World(w) => w,
    };
    for w in world.warnings() {
        eprintln!("warning: {w}");
    }
    std::fs::write(&out, world.to_json() + "\n").map_err(|source| CliError::Write { path: out, source })
}

fn cmd_render(env: PathBuf, trajs: Vec<PathBuf>, labels: Option<PathBuf>, cell: Option<f64>, out: PathBuf) -> Result<()> {
    let world = Environment::from_json(&read_text(&env)?).map_err(|e| CliError::Usage(format!("{}: {e}", env.display())))?;
    let mut paths = Vec::with_capacity(trajs.len());
    for (i, p) in trajs.iter().enumerate() {
        let text = read_text(p)?;
        let tr = Trajectory::read_csv(i, world.optimal_altitude, text.as_bytes())
            .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
        paths.push(tr);
    }
    let parsed = match (labels, cell) {
        (Some(path), Some(c)) => {
            if !(c > 0.0) {
                return Err(CliError::Usage("--cell-size must be positive".into()));
            }
            let grid = GroundGrid::new(world.extent, c);
            let text = read_text(&path)?;
            let mut rd = csv::Reader::from_reader(text.as_bytes());
            let mut v = Vec::with_capacity(grid.len());
            for rec in rd.deserialize::<usize>() {
                v.push(rec.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?);
            }
            if v.len() != grid.len() {
                return Err(CliError::Usage(format!(
                    "{} has {} labels, the grid has {} cells",
                    path.display(),
                    v.len(),
                    grid.len()
                )));
            }
            Some((grid, v))
        }
        _ => None,
    };
    let svg = render_svg(
        &world,
        &paths,
        parsed.as_ref().map(|(grid, labels)| Labels { grid: *grid, labels }),
    );
    std::fs::write(&out, svg).map_err(|source| CliError::Write { path: out, source })
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Grid { config, out } => cmd_grid(config, out),
        Command::GenEnv { env, seed, out } => cmd_gen_env(env, seed, out),
        Command::Render {
            env,
            trajs,
            labels,
            cell_size,
            out,
        } => cmd_render(env, trajs, labels, cell_size, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
