use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rough_mild::cli::{
    cmd_fbm, cmd_norms, cmd_simulate, cmd_verify, exit_code, output_dir, resolve_config, Overrides, Status, OUT_ENV,
};
use rough_mild::config::ModelKind;
use rough_mild::verify::Suite;
use rough_mild::Result;

#[derive(Parser)]
#[command(name = "rough-mild", version, about = "Mild solutions of parabolic equations driven by Hölder rough paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; takes precedence over ROUGH_MILD_OUT and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// heat, ns2d or ns3d.
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    hurst: Option<f64>,
    /// Grid cells.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            config: self.config.clone(),
            seed: self.seed,
            model: self.model,
            hurst: self.hurst,
            n: self.n,
            tol: self.tol,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured model and write trajectory, reports and manifest.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Check the trajectory against the free evolution (needs noise_amp = 0, disable_q).
        #[arg(long)]
        self_test: bool,
    },
    /// Write an fBM sample path and print its Hölder norms.
    Fbm {
        #[command(flatten)]
        common: Common,
        /// Hölder exponents to report, comma separated (default: the configured alpha).
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
    },
    /// Hölder norm, p-variation and the variation embedding of a path CSV.
    Norms {
        file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Run an invariant suite: spectral, young, convolve, mild, models or all.
    Verify {
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<Status> {
    let mut log = std::io::stdout().lock();
    let env = std::env::var(OUT_ENV).ok();
    match cli.command {
        Command::Simulate { common, self_test } => {
            let mut config = resolve_config(&common.overrides())?;
            config.self_test |= self_test;
            let out = output_dir(common.out.as_deref(), env.as_deref(), &config);
            cmd_simulate(&config, &out, &mut log)
        }
        Command::Fbm { common, alpha } => {
            let config = resolve_config(&common.overrides())?;
            let out = output_dir(common.out.as_deref(), env.as_deref(), &config);
            let alphas = if alpha.is_empty() { vec![config.alpha] } else { alpha };
            cmd_fbm(&config, &out, &alphas, &mut log)
        }
        Command::Norms { file, alpha, p } => cmd_norms(&file, alpha, p, &mut log),
        Command::Verify { suite, common } => {
            let config = resolve_config(&common.overrides())?;
            cmd_verify(suite, &config, &mut log)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::NumericalFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("rough-mild: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
