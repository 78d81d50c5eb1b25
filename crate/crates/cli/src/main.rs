use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use ste_core::experiments::{
    simulate, sweep, write_run, write_sweep, write_trajectory, Format, RunConfig, DEFAULT_OUTDIR, PRESETS,
};
use ste_core::{Result, SteError};

#[derive(Parser)]
#[command(name = "ste", version, about = "Shortcut-to-equilibrium protocols for a driven qubit in a thermal bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize, simulate and account one protocol.
    Run(Common),
    /// Repeat a run over a list of durations.
    Sweep(Common),
    /// Write the Schrödinger-picture Bloch-vector trajectory.
    Trajectory(Common),
    /// List the preset transformations.
    Presets {
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
}

#[derive(Args)]
struct Common {
    /// Preset name (pe, pc, pe1, pe2, pec).
    #[arg(long)]
    preset: Option<String>,
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Protocol duration (a.u.).
    #[arg(long)]
    tf: Option<f64>,
    /// Comma-separated durations for a sweep.
    #[arg(long, value_delimiter = ',')]
    tf_list: Option<Vec<f64>>,
    /// Cross-check against direct Liouville-space integration.
    #[arg(long)]
    verify: bool,
    /// Output directory.
    #[arg(long, env = "STE_OUTDIR")]
    outdir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

impl Common {
    /// Merge the config file with command-line overrides; returns the config and output directory.
    fn load(&self) -> Result<(RunConfig, PathBuf)> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.preset {
            cfg.preset = Some(p.clone());
        }
        if cfg.preset.is_none() && self.config.is_none() {
            return Err(SteError::Config("either --preset or --config is required".into()));
        }
        if self.tf.is_some() {
            cfg.tf = self.tf;
        }
        if self.tf_list.is_some() {
            cfg.tf_list = self.tf_list.clone();
        }
        if self.verify {
            cfg.verify = Some(true);
        }
        let outdir = self
            .outdir
            .clone()
            .or_else(|| cfg.outdir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTDIR));
        Ok((cfg, outdir))
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let (cfg, outdir) = args.load()?;
            let resolved = cfg.resolve(None)?;
            let outcome = simulate(&resolved)?;
            let report = write_run(&outcome, &outdir, args.format.into())?;
            if report.inertial.violated {
                log::warn!("inertial condition violated (max ratio {:.3})", report.inertial.max_ratio);
            }
            println!(
                "{}: fidelity {:.9} accuracy {:.3} (quench {:.3}) W {:.6} T_eff(tf) {:.6}",
                report.label, report.fidelity, report.accuracy, report.accuracy_quench, report.work, report.t_eff_final
            );
            for f in &report.files {
                println!("wrote {f}");
            }
        }
        Command::Sweep(args) => {
            let (cfg, outdir) = args.load()?;
            let list = cfg
                .tf_list
                .clone()
                .ok_or_else(|| SteError::Config("sweep needs --tf-list or tf_list in the config".into()))?;
            let label = cfg.resolve(None)?.label;
            let rows = sweep(&cfg, &list)?;
            for r in rows.iter().filter(|r| r.status != "ok") {
                log::warn!("t_f = {}: {}", r.tf, r.error.as_deref().unwrap_or("failed"));
            }
            let path = write_sweep(&rows, &label, &outdir, args.format.into())?;
            println!("wrote {}", path.display());
        }
        Command::Trajectory(args) => {
            let (cfg, outdir) = args.load()?;
            let resolved = cfg.resolve(None)?;
            let outcome = simulate(&resolved)?;
            let path = write_trajectory(&outcome.spin_trajectory(), &resolved.label, &outdir, args.format.into())?;
            println!("wrote {}", path.display());
        }
        Command::Presets { format } => match format {
            OutFormat::Json => {
                println!("{}", serde_json::to_string_pretty(&PRESETS).map_err(|e| SteError::Io(e.to_string()))?)
            }
            OutFormat::Csv => {
                println!("name,label,rabi_i,rabi_f,temp_i,temp_f");
                for p in &PRESETS {
                    let (ri, rf) = p.frequencies(false);
                    println!("{},{},{},{},{},{}", p.name, p.label, ri, rf, p.temp_i, p.temp_f);
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
