//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::array::{draw_rcs, synthesize, ArrayConfig, TargetScene};
use crate::doa::{AngleGrid, MusicEstimator};
use crate::harness::{self, keys_help, ExperimentConfig, Layout};
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    /// Generate training sets, test trials and truth files.
    GenData,
    /// Train one emulator per (angle range, training set).
    Train,
    /// Evaluate the configured cases into sweep.csv.
    Eval,
    /// Run everything: gen-data, train, then all result tables.
    Sweep,
    /// Train-SNR x test-SNR table of the single-SNR models.
    Grid,
    /// R_e / R_offset of the M2 and matched-SNR models.
    Denoise,
    /// Trial-averaged CRBs of both arrays.
    Crb,
    /// Noiseless two-target MUSIC example.
    Demo,
}

#[derive(Debug, Parser)]
#[command(name = "arrayemu", version, about = "MIMO array emulation and DOA experiments")]
#[command(after_help = keys_help())]
pub struct Command {
    #[arg(value_enum)]
    pub verb: Verb,
    /// Config file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Run seed; same as `--set seed=..`.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, value_name = "INT")]
    pub workers: Option<usize>,
    /// Output directory; same as `--set out=..`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Usage problem (exit 2) or runtime failure (exit 1).
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl Command {
    /// Defaults, then the config file, then `--set`, then the dedicated flags.
    pub fn resolve_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            cfg.set(k.trim(), v)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn config_failure(e: Error) -> Failure {
    match e {
        Error::Config(_) | Error::Domain(_) => Failure::Usage(e.to_string()),
        other => Failure::Runtime(other),
    }
}

/// Noiseless MUSIC on a 4x4 array; returns `(truth, estimates)` in degrees.
pub fn demo() -> Result<(Vec<f64>, Vec<f64>)> {
    let truth_deg = [-12.5, 17.3];
    let array = ArrayConfig::new(4, 4)?;
    let angles: Vec<f64> = truth_deg.iter().map(|d: &f64| d.to_radians()).collect();
    let scene = TargetScene::new(angles, draw_rcs(2, 150, &mut seeded(7))?)?;
    let block = synthesize(&scene, &array, f64::INFINITY, &mut seeded(8))?;
    let music = MusicEstimator::new(array, AngleGrid::new(-30.0, 30.0, 0.1)?, 2)?;
    let pick = music.estimate(&block.covariance(0..150)?)?;
    Ok((truth_deg.to_vec(), pick.angles_deg))
}

fn wrote(cfg: &ExperimentConfig, names: &[&str]) {
    let layout = Layout::new(&cfg.out_dir);
    for n in names {
        println!("wrote {}", layout.table(n).display());
    }
}

fn dispatch(cmd: &Command) -> std::result::Result<(), Failure> {
    if cmd.verb == Verb::Demo {
        let (truth, est) = demo().map_err(Failure::Runtime)?;
        let show = |v: &[f64]| v.iter().map(|a| format!("{a:.2}")).collect::<Vec<_>>().join(", ");
        println!("true angles (deg):      {}", show(&truth));
        println!("recovered angles (deg): {}", show(&est));
        if truth.iter().zip(&est).any(|(t, e)| (t - e).abs() > 0.1 + 1e-9) {
            return Err(Failure::Runtime(Error::Domain(
                "demo estimates missed the truth".into(),
            )));
        }
        return Ok(());
    }
    let cfg = cmd.resolve_config().map_err(config_failure)?;
    let run = || -> Result<()> {
        match cmd.verb {
            Verb::GenData => {
                harness::build_datasets(&cfg)?;
                println!("wrote datasets under {}", cfg.out_dir.join("datasets").display());
            }
            Verb::Train => {
                for r in harness::train_models(&cfg)? {
                    println!(
                        "{} {}: {} output, best epoch {}, val mse {:.4e}",
                        r.angle_range, r.train_set_id, r.output_activation, r.best_epoch, r.best_val_mse
                    );
                }
                wrote(&cfg, &["training.csv"]);
            }
            Verb::Eval => {
                harness::evaluate_cases(&cfg)?;
                wrote(&cfg, &["sweep.csv"]);
            }
            Verb::Sweep => {
                harness::run_pipeline(&cfg)?;
                wrote(
                    &cfg,
                    &[
                        "training.csv",
                        "sweep.csv",
                        "grid.csv",
                        "grid_cumulative.csv",
                        "denoise.csv",
                        "crb.csv",
                    ],
                );
            }
            Verb::Grid => {
                let (grid, summary) = harness::best_train_snr_grid(&cfg)?;
                let layout = Layout::new(&cfg.out_dir);
                harness::write_table(&layout.table("grid.csv"), &grid)?;
                harness::write_table(&layout.table("grid_cumulative.csv"), &summary)?;
                wrote(&cfg, &["grid.csv", "grid_cumulative.csv"]);
            }
            Verb::Denoise => {
                let rows = harness::denoise_analysis(&cfg, &cfg.denoise_offsets_db)?;
                harness::write_table(&Layout::new(&cfg.out_dir).table("denoise.csv"), &rows)?;
                wrote(&cfg, &["denoise.csv"]);
            }
            Verb::Crb => {
                let rows = harness::crb_table(&cfg)?;
                harness::write_table(&Layout::new(&cfg.out_dir).table("crb.csv"), &rows)?;
                wrote(&cfg, &["crb.csv"]);
            }
            Verb::Demo => unreachable!(),
        }
        Ok(())
    };
    run().map_err(Failure::Runtime)
}

/// Parse `argv` (including the program name), run the verb and return the
/// process exit status: 0 on success, 1 on runtime failure, 2 on usage errors.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cmd = match Command::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cmd) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `arrayemu --help` for usage and config keys");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}
