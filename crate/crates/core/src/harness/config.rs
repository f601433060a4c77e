//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` are comments. Every key has a default (the desk
//! scale below); unknown keys are rejected. The same keys are accepted as
//! `--set key=value` overrides on the command line.

use std::path::{Path, PathBuf};

use crate::array::ArrayConfig;
use crate::nn::{Activation, TrainConfig};
use crate::{Error, Result};

/// `(key, default, description)` for every accepted configuration key.
pub const CONFIG_KEYS: &[(&str, &str, &str)] = &[
    ("low.tx", "4", "TX antennas of the small (low) setup"),
    ("low.rx", "4", "RX antennas of the small (low) setup"),
    ("high.tx", "8", "TX antennas of the emulated (high) setup"),
    ("high.rx", "8", "RX antennas of the emulated (high) setup"),
    ("spacing", "0.5", "element spacing d/lambda for both setups"),
    (
        "ranges",
        "0:25,20:45,40:65",
        "target angle ranges in degrees, lo:hi comma list",
    ),
    ("targets", "4", "targets per scene (K)"),
    ("min_sep_deg", "5", "minimum pairwise target separation in degrees"),
    (
        "snr_train",
        "-16:10:2",
        "training SNRs in dB, start:stop:step or comma list",
    ),
    (
        "snr_test",
        "-16:10:2",
        "testing SNRs in dB, start:stop:step or comma list",
    ),
    ("samples", "8000", "samples in each single-SNR training set"),
    ("mixed.m1", "112000", "samples in the large mixed-SNR set M1"),
    ("mixed.m2", "8000", "samples in the small mixed-SNR set M2"),
    (
        "test_samples",
        "3000",
        "test samples per test SNR (multiple of snapshots)",
    ),
    ("snapshots", "150", "snapshots per covariance estimate / trial (N_s)"),
    ("grid.step_deg", "0.1", "MUSIC search grid step in degrees"),
    (
        "grid.pad_deg",
        "5",
        "MUSIC search grid padding around each range in degrees",
    ),
    (
        "sweep.offset_db",
        "8",
        "SNR offset used for the r_offset column of sweep rows",
    ),
    ("denoise.offsets_db", "8,12", "SNR offsets for the denoising analysis"),
    (
        "cases",
        "mixed_m1,matched_snr,best_of_all,raw_low,raw_high",
        "cases evaluated by eval/sweep",
    ),
    ("train.epochs", "150", "training epochs"),
    ("train.batch", "120", "minibatch size"),
    ("train.lr", "0.001", "Adam learning rate"),
    ("train.beta1", "0.9", "Adam first-moment decay"),
    ("train.beta2", "0.999", "Adam second-moment decay"),
    ("train.eps", "1e-8", "Adam epsilon"),
    ("train.split", "0.6,0.2,0.2", "train,val,test fractions of each dataset"),
    (
        "train.output_activation",
        "both",
        "linear, relu, or both (keep the lower validation loss)",
    ),
    ("train.patience", "0", "early-stop patience in epochs, 0 disables"),
    ("seed", "1", "run seed; all task seeds derive from it"),
    (
        "workers",
        "1",
        "worker threads for dataset generation, training and evaluation",
    ),
    ("out", "results", "output directory"),
];

/// One of the evaluated cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// Emulator trained on the large mixed-SNR set.
    MixedM1,
    /// Emulator trained at the test SNR.
    MatchedSnr,
    /// Lowest MSE over every trained set, per test SNR.
    BestOfAll,
    /// MUSIC directly on the low setup.
    RawLow,
    /// MUSIC directly on the high setup.
    RawHigh,
}

impl Case {
    pub const ALL: [Case; 5] = [
        Case::MixedM1,
        Case::MatchedSnr,
        Case::BestOfAll,
        Case::RawLow,
        Case::RawHigh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Case::MixedM1 => "mixed_m1",
            Case::MatchedSnr => "matched_snr",
            Case::BestOfAll => "best_of_all",
            Case::RawLow => "raw_low",
            Case::RawHigh => "raw_high",
        }
    }
}

impl std::str::FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Case::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown case '{s}'")))
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub low: ArrayConfig,
    pub high: ArrayConfig,
    pub ranges_deg: Vec<(f64, f64)>,
    pub targets: usize,
    pub min_sep_deg: f64,
    pub snr_train: Vec<f64>,
    pub snr_test: Vec<f64>,
    pub samples: usize,
    pub m1_samples: usize,
    pub m2_samples: usize,
    pub test_samples: usize,
    pub snapshots: usize,
    pub grid_step_deg: f64,
    pub grid_pad_deg: f64,
    pub sweep_offset_db: f64,
    pub denoise_offsets_db: Vec<f64>,
    pub cases: Vec<Case>,
    pub train: TrainConfig,
    /// Candidate output activations; the lower validation loss wins.
    pub output_activations: Vec<Activation>,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut cfg = ExperimentConfig {
            low: ArrayConfig::new(4, 4).unwrap(),
            high: ArrayConfig::new(8, 8).unwrap(),
            ranges_deg: vec![],
            targets: 0,
            min_sep_deg: 0.0,
            snr_train: vec![],
            snr_test: vec![],
            samples: 0,
            m1_samples: 0,
            m2_samples: 0,
            test_samples: 0,
            snapshots: 0,
            grid_step_deg: 0.0,
            grid_pad_deg: 0.0,
            sweep_offset_db: 0.0,
            denoise_offsets_db: vec![],
            cases: vec![],
            train: TrainConfig::default(),
            output_activations: vec![],
            seed: 0,
            workers: 1,
            out_dir: PathBuf::new(),
        };
        for (key, value, _) in CONFIG_KEYS {
            cfg.set(key, value).expect("built-in defaults parse");
        }
        cfg
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// `start:stop:step` (inclusive) or a comma list.
fn parse_snr_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 3 {
        let (start, stop, step): (f64, f64, f64) =
            (parse(key, parts[0])?, parse(key, parts[1])?, parse(key, parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(Error::Config(format!("{key}: invalid range '{value}'")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..n).map(|i| start + i as f64 * step).collect());
    }
    parse_list(key, value)
}

fn parse_ranges(key: &str, value: &str) -> Result<Vec<(f64, f64)>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|r| {
            let (lo, hi) = r
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("{key}: range '{r}' is not lo:hi")))?;
            Ok((parse(key, lo)?, parse(key, hi)?))
        })
        .collect()
}

impl ExperimentConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "low.tx" => self.low.tx_count = parse(key, v)?,
            "low.rx" => self.low.rx_count = parse(key, v)?,
            "high.tx" => self.high.tx_count = parse(key, v)?,
            "high.rx" => self.high.rx_count = parse(key, v)?,
            "spacing" => {
                let d = parse(key, v)?;
                self.low.spacing_wavelengths = d;
                self.high.spacing_wavelengths = d;
            }
            "ranges" => self.ranges_deg = parse_ranges(key, v)?,
            "targets" => self.targets = parse(key, v)?,
            "min_sep_deg" => self.min_sep_deg = parse(key, v)?,
            "snr_train" => self.snr_train = parse_snr_list(key, v)?,
            "snr_test" => self.snr_test = parse_snr_list(key, v)?,
            "samples" => self.samples = parse(key, v)?,
            "mixed.m1" => self.m1_samples = parse(key, v)?,
            "mixed.m2" => self.m2_samples = parse(key, v)?,
            "test_samples" => self.test_samples = parse(key, v)?,
            "snapshots" => self.snapshots = parse(key, v)?,
            "grid.step_deg" => self.grid_step_deg = parse(key, v)?,
            "grid.pad_deg" => self.grid_pad_deg = parse(key, v)?,
            "sweep.offset_db" => self.sweep_offset_db = parse(key, v)?,
            "denoise.offsets_db" => self.denoise_offsets_db = parse_list(key, v)?,
            "cases" => self.cases = parse_list(key, v)?,
            "train.epochs" => self.train.epochs = parse(key, v)?,
            "train.batch" => self.train.batch_size = parse(key, v)?,
            "train.lr" => self.train.adam.lr = parse(key, v)?,
            "train.beta1" => self.train.adam.beta1 = parse(key, v)?,
            "train.beta2" => self.train.adam.beta2 = parse(key, v)?,
            "train.eps" => self.train.adam.eps = parse(key, v)?,
            "train.split" => {
                let f: Vec<f64> = parse_list(key, v)?;
                if f.len() != 3 {
                    return Err(Error::Config(format!("{key}: expected three fractions")));
                }
                self.train.split = (f[0], f[1], f[2]);
            }
            "train.output_activation" => {
                self.output_activations = match v {
                    "both" => vec![Activation::Linear, Activation::Relu],
                    other => vec![other.parse()?],
                };
            }
            "train.patience" => self.train.patience = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "workers" => self.workers = parse(key, v)?,
            "out" => self.out_dir = PathBuf::from(v),
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Parse config text on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.low.validate()?;
        self.high.validate()?;
        if self.low.virtual_size() >= self.high.virtual_size() {
            return Err(Error::Config(format!(
                "low setup {} must have fewer virtual elements than high setup {}",
                self.low, self.high
            )));
        }
        self.low.check_target_count(self.targets)?;
        self.high.check_target_count(self.targets)?;
        if self.ranges_deg.is_empty() || self.snr_train.is_empty() || self.snr_test.is_empty() {
            return Err(Error::Config("ranges, snr_train and snr_test must be non-empty".into()));
        }
        if self.targets == 0 || self.snapshots == 0 {
            return Err(Error::Config("targets and snapshots must be at least 1".into()));
        }
        if self.test_samples == 0 || !self.test_samples.is_multiple_of(self.snapshots) {
            return Err(Error::Config(format!(
                "test_samples ({}) must be a positive multiple of snapshots ({})",
                self.test_samples, self.snapshots
            )));
        }
        for &(lo, hi) in &self.ranges_deg {
            if !(lo < hi) || lo <= -90.0 || hi >= 90.0 {
                return Err(Error::Config(format!("invalid angle range {lo}:{hi}")));
            }
            if hi - lo < (self.targets - 1) as f64 * self.min_sep_deg {
                return Err(Error::Config(format!(
                    "range {lo}:{hi} cannot hold {} targets {}° apart",
                    self.targets, self.min_sep_deg
                )));
            }
        }
        if !(self.grid_step_deg > 0.0) || self.grid_pad_deg < 0.0 {
            return Err(Error::Config(
                "grid step must be positive and padding non-negative".into(),
            ));
        }
        if self.output_activations.is_empty() {
            return Err(Error::Config("no output activation selected".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.train.validate()
    }

    /// Number of trials per test SNR, `Q = test_samples / N_s`.
    pub fn trials(&self) -> usize {
        self.test_samples / self.snapshots
    }
}

/// Help text listing every key with its default.
pub fn keys_help() -> String {
    let width = CONFIG_KEYS.iter().map(|(k, _, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("Config keys (file lines `key = value`, or --set key=value):\n");
    for (k, d, desc) in CONFIG_KEYS {
        s.push_str(&format!("  {k:<width$}  {desc} [default: {d}]\n"));
    }
    s
}
