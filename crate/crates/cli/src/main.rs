//! `bistab`: command-line driver for the bistab-core pipelines.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bistab_core::config::RunConfig;
use bistab_core::response::MapMode;
use bistab_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "bistab", version, about = "Dressed-state crossings and semiclassical bistability of a driven transmon-cavity system")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Built-in parameter preset; used when no config file is given.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,

    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for map evaluation (overrides `threads`; 0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Which model fills the response map.
    #[arg(long, global = true, value_enum, default_value = "ode")]
    mode: Mode,

    /// Extra `key=value` config entries applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Paper,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Ode,
    Fixedpoint,
    Both,
}

impl From<Mode> for MapMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Ode => MapMode::Ode,
            Mode::Fixedpoint => MapMode::FixedPoint,
            Mode::Both => MapMode::Both,
        }
    }
}

/// Transmon level: `g`, `e`, `f` or a non-negative integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level(pub usize);

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "g" => Ok(Level(0)),
            "e" => Ok(Level(1)),
            "f" => Ok(Level(2)),
            _ => s.parse().map(Level).map_err(|_| format!("expected g, e, f or an integer, got `{s}`")),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Transmon level.
    #[arg(long, default_value = "g")]
    pub level: Level,
    /// Drive detuning `(ω_M - ω_r)/2π` in MHz.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub detuning_mhz: f64,
    /// Resonant photon number `(𝓔/κ)²`; replaces the configured drive amplitude.
    #[arg(long)]
    pub photons: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Labeled dressed energies of every level and photon number.
    Spectrum,
    /// Relative energies `ω̄_k(N)` for the fan diagram.
    Fan {
        /// Comma-separated levels.
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7,8,9")]
        levels: Vec<usize>,
    },
    /// Photon numbers where `|k, N+1>` crosses `|j, N>`.
    Crossings {
        /// Initial level k.
        #[arg(long, default_value = "g")]
        level: Level,
        /// Target level j.
        #[arg(long, default_value_t = 7)]
        target: usize,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        /// Defaults to `n_max - 1`.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Effective cavity resonance `ω_i(n)` per level.
    Effres {
        #[arg(long, value_delimiter = ',', default_value = "g,e,f")]
        levels: Vec<Level>,
    },
    /// Cavity amplitude over the measurement window from vacuum.
    Trajectory {
        #[command(flatten)]
        point: PointArgs,
    },
    /// `log10|dα/dt|` and flow direction on a phase-space grid.
    Landscape {
        #[command(flatten)]
        point: PointArgs,
        /// Half width of the square grid, in units of `𝓔/κ`.
        #[arg(long, default_value_t = 1.2)]
        extent: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Steady states and region labels at one or more detunings.
    Roots {
        #[arg(long, default_value = "g")]
        level: Level,
        /// Comma-separated detunings `(ω_M - ω_r)/2π` in MHz.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        detuning_mhz: Vec<f64>,
        /// Comma-separated photon numbers; defaults to the configured drive.
        #[arg(long, value_delimiter = ',')]
        photons: Vec<f64>,
    },
    /// Drive × detuning response map.
    Map {
        #[arg(long, default_value = "g")]
        level: Level,
        /// Also write an SVG heatmap.
        #[arg(long)]
        svg: bool,
    },
    /// Critical photon number from an ODE map of one level.
    Critical {
        #[arg(long, default_value = "g")]
        level: Level,
    },
    /// Critical photon numbers of g, e and f next to the crossing predictions.
    Summary,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = Vec::new();
    if matches!(cli.preset, Some(Preset::Paper)) || cli.config.is_none() {
        overrides.push("preset = paper".to_string());
    }
    overrides.extend(cli.overrides.iter().cloned());
    let mut config = RunConfig::parse_with_overrides(&text, &overrides)?;
    if let Some(out) = &cli.out {
        config.output_dir = out.display().to_string();
    }
    if let Some(t) = cli.threads {
        config.threads = t;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<serde_json::Value> {
    let config = load_config(cli)?;
    if config.threads > 0 {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(config.threads).build_global();
    }
    let ctx = commands::Context::new(config, cli.mode.into())?;
    ctx.write_provenance(&cli.command)?;
    commands::dispatch(&ctx, &cli.command)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("{}", serde_json::json!({ "status": "error", "code": e.exit_code(), "message": e.to_string() }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_names() {
        assert_eq!("g".parse::<Level>(), Ok(Level(0)));
        assert_eq!("f".parse::<Level>(), Ok(Level(2)));
        assert_eq!("11".parse::<Level>(), Ok(Level(11)));
        assert!("h".parse::<Level>().is_err());
        assert!("-1".parse::<Level>().is_err());
    }

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["bistab", "map", "--level", "e", "--mode", "both", "--set", "n_max=700"]).unwrap();
        assert!(matches!(cli.command, Command::Map { level: Level(1), svg: false }));
        assert_eq!(MapMode::from(cli.mode), MapMode::Both);
        assert_eq!(cli.overrides, vec!["n_max=700".to_string()]);
    }

    #[test]
    fn missing_config_falls_back_to_preset() {
        let cli = Cli::try_parse_from(["bistab", "--set", "g_MHz=0", "spectrum"]).unwrap();
        let c = load_config(&cli).unwrap();
        assert_eq!(c.g.value, 0.0);
        assert_eq!(c.omega_r.value, 5.078);
    }
}
