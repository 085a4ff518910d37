use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tunnelbox::analytics::commensurate_positions;
use tunnelbox::export::{degeneracy_csv, density_csv, divergence_csv, entropy_scan_csv, series_csv, spectrum_csv};
use tunnelbox::observables::uniform_grid;
use tunnelbox::{
    degeneracy_scan, divergence_series, entropy_vs_position, solve_spectrum, ClassicalPacket,
    Preset, SeriesPlan, WaveField,
};
use tunnelbox_cli::{describe, exit, load_config, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "tunnelbox", version, about = "Wave packets tunneling through a square barrier in a box")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Number of levels (overrides the config).
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Unit preset (overrides the config).
    #[arg(long, global = true, value_enum)]
    preset: Option<PresetArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Natural,
    Paper,
}

#[derive(Subcommand)]
enum Command {
    /// Bound-state spectrum -> spectrum.csv
    Solve(Common),
    /// Density profiles at evenly spaced times -> density.csv
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Number of time slices across the window.
        #[arg(long, default_value_t = 5)]
        frames: usize,
        /// Spatial samples per slice.
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// RHS probability, entropy, mean and variance -> series.csv
    Observe(Common),
    /// Quantum vs classical variance -> divergence.csv
    Diverge(Common),
    /// Near-degeneracy and entropy vs barrier position -> degeneracy.csv, entropy_scan.csv
    Scan(Common),
    /// Print the resolved config, a spectrum preview and warnings
    Describe(Common),
    /// Full pipeline with sweeps -> per-point CSVs and manifest.json
    Run(Common),
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<tunnelbox::Error> for Failure {
    fn from(e: tunnelbox::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn resolve(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut config = match &common.config {
        Some(path) => load_config(path).map_err(|e| Failure::Config(e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = common.levels {
        if n == 0 {
            return Err(Failure::Config("--levels must be at least 1".into()));
        }
        config.n_levels = n;
    }
    if let Some(p) = common.preset {
        let preset = match p {
            PresetArg::Natural => Preset::Natural,
            PresetArg::Paper => Preset::Paper,
        };
        // Keep an explicitly configured window; otherwise follow the preset.
        if preset != config.preset && common.config.is_none() {
            config.time.end = match preset {
                Preset::Natural => 400.0,
                Preset::Paper => 2e-13,
            };
        }
        config.preset = preset;
    }
    Ok(config)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Numerical(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Failure::Numerical(format!("{}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn field(config: &ExperimentConfig) -> Result<WaveField, Failure> {
    let spectrum = solve_spectrum(&config.geometry, &config.constants(), config.n_levels)?;
    let field = WaveField::from_packet(spectrum, &config.packet)?;
    for w in field.expansion().warnings() {
        eprintln!("warning: {w}");
    }
    Ok(field)
}

fn execute(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Solve(common) => {
            let config = resolve(&common)?;
            let spectrum = solve_spectrum(&config.geometry, &config.constants(), config.n_levels)?;
            write_file(&common.out, "spectrum.csv", &spectrum_csv(&spectrum))?;
        }
        Command::Evolve { common, frames, points } => {
            let config = resolve(&common)?;
            if frames == 0 || points < 2 {
                return Err(Failure::Config("--frames must be >= 1 and --points >= 2".into()));
            }
            let field = field(&config)?;
            let xs = uniform_grid(0.0, config.geometry.total_length(), points);
            let times = uniform_grid(config.time.start, config.time.end, frames);
            let profiles = times
                .iter()
                .map(|&t| field.wavefunction_profile(&xs, t))
                .collect::<tunnelbox::Result<Vec<_>>>()?;
            let slices = times.iter().zip(&profiles).map(|(&t, p)| (t, xs.as_slice(), p.as_slice()));
            write_file(&common.out, "density.csv", &density_csv(slices))?;
        }
        Command::Observe(common) => {
            let config = resolve(&common)?;
            let field = field(&config)?;
            let plan = SeriesPlan::new(
                field.spectrum(),
                config.rhs_region_for(&config.geometry),
                config.entropy_resolution,
            )?;
            let series = plan.evaluate(&field, &config.time.grid())?;
            write_file(&common.out, "series.csv", &series_csv(&series))?;
        }
        Command::Diverge(common) => {
            let config = resolve(&common)?;
            if config.time.start != 0.0 {
                return Err(Failure::Config("divergence needs time.start = 0".into()));
            }
            let field = field(&config)?;
            let packet = ClassicalPacket::from_packet(
                &config.packet,
                &config.geometry,
                &config.constants(),
                config.image_mode,
            )?;
            let series = divergence_series(&field, &packet, &config.time.grid(), config.metric)?;
            let outcome = series.crossing(config.threshold);
            match outcome.time() {
                Some(t) => eprintln!("t* = {t:e} (threshold {})", config.threshold),
                None => eprintln!("t* not reached within the window (threshold {})", config.threshold),
            }
            write_file(&common.out, "divergence.csv", &divergence_csv(&series, outcome))?;
        }
        Command::Scan(common) => {
            let config = resolve(&common)?;
            let positions = match &config.positions {
                Some(p) => p.clone(),
                None => commensurate_positions(&config.geometry)?,
            };
            let c = config.constants();
            let scan = degeneracy_scan(&config.geometry, &c, &positions, config.n_levels, config.degeneracy_ratio);
            let traces = entropy_vs_position(
                &config.geometry,
                &c,
                &config.packet,
                &positions,
                &config.time.grid(),
                config.n_levels,
            );
            let mut failures = 0;
            for (pos, (d, e)) in positions.iter().zip(scan.results.iter().zip(&traces)) {
                if let Err(err) = d {
                    eprintln!("degeneracy scan failed at {pos}: {err}");
                    failures += 1;
                } else if let Err(err) = e {
                    eprintln!("entropy trace failed at {pos}: {err}");
                    failures += 1;
                }
            }
            write_file(&common.out, "degeneracy.csv", &degeneracy_csv(&scan))?;
            write_file(&common.out, "entropy_scan.csv", &entropy_scan_csv(traces.iter().flatten()))?;
            if failures == positions.len() {
                return Ok(exit::NUMERICAL);
            } else if failures > 0 {
                return Ok(exit::PARTIAL);
            }
        }
        Command::Describe(common) => {
            let config = resolve(&common)?;
            print!("{}", describe(&config));
        }
        Command::Run(common) => {
            let config = resolve(&common)?;
            let manifest = run_experiment(&config, &common.out).map_err(|e| Failure::Numerical(e.to_string()))?;
            for p in &manifest.points {
                if let Some(err) = &p.error {
                    eprintln!("point {} failed: {err}", p.index);
                }
            }
            eprintln!(
                "{} of {} points ok; outputs in {}",
                manifest.points.len() - manifest.failed(),
                manifest.points.len(),
                common.out.display()
            );
            return Ok(manifest.exit_code());
        }
    }
    Ok(exit::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            exit::CONFIG
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            exit::NUMERICAL
        }
    };
    ExitCode::from(code as u8)
}
