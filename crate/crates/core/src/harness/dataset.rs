//! Training/test set construction and the binary dataset file format.
//!
//! File layout, all little-endian: magic `AEMUDAT\0`, `u32` version,
//! `u64` sample count, `u64` input width (2L), `u64` target width (2H),
//! one `f32` SNR label per sample, then the inputs block and the targets
//! block as `f64`, each stored one sample per row.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{concatenate, Array2, Axis};
use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::array::{draw_scene, synthesize_pair, ArrayConfig, SnapshotBlock, TargetScene};
use crate::nn::{stack_real_imag, PairDataset};
use crate::rng::{derive_seed, seeded, tag};
use crate::{Error, Result};

pub const DATASET_MAGIC: &[u8; 8] = b"AEMUDAT\0";
pub const DATASET_VERSION: u32 = 1;

/// Identifier of one training set of an angle range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SetId {
    /// All samples at one SNR (dB).
    Single(f64),
    /// Large mixed-SNR set.
    M1,
    /// Small mixed-SNR set.
    M2,
}

impl SetId {
    /// File stem, e.g. `snr-16`, `snr4`, `M1`.
    pub fn name(&self) -> String {
        match self {
            SetId::Single(snr) => format!("snr{snr}"),
            SetId::M1 => "M1".into(),
            SetId::M2 => "M2".into(),
        }
    }

    fn seed_tag(&self) -> u64 {
        match self {
            SetId::Single(snr) => snr.to_bits(),
            SetId::M1 => tag("M1"),
            SetId::M2 => tag("M2"),
        }
    }

    /// Every set of a configuration: the single-SNR sets, then M1 and M2.
    pub fn all(cfg: &ExperimentConfig) -> Vec<SetId> {
        let mut ids: Vec<SetId> = cfg.snr_train.iter().map(|&s| SetId::Single(s)).collect();
        ids.push(SetId::M1);
        ids.push(SetId::M2);
        ids
    }

    pub fn sample_count(&self, cfg: &ExperimentConfig) -> usize {
        match self {
            SetId::Single(_) => cfg.samples,
            SetId::M1 => cfg.m1_samples,
            SetId::M2 => cfg.m2_samples,
        }
    }
}

impl std::fmt::Display for SetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl std::str::FromStr for SetId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M1" => Ok(SetId::M1),
            "M2" => Ok(SetId::M2),
            _ => s
                .strip_prefix("snr")
                .and_then(|v| v.parse().ok())
                .map(SetId::Single)
                .ok_or_else(|| Error::Config(format!("unknown training set '{s}'"))),
        }
    }
}

/// Directory name of an angle range, e.g. `range_40_65`.
pub fn range_dir(range_deg: (f64, f64)) -> String {
    format!("range_{}_{}", range_deg.0, range_deg.1)
}

/// Label used in result tables, e.g. `40:65`.
pub fn range_label(range_deg: (f64, f64)) -> String {
    format!("{}:{}", range_deg.0, range_deg.1)
}

fn range_seed(seed: u64, purpose: &str, range_deg: (f64, f64)) -> u64 {
    derive_seed(seed, &[tag(purpose), range_deg.0.to_bits(), range_deg.1.to_bits()])
}

/// Per-sample counts of each SNR in a mixed set of `total` samples: equal
/// shares, the remainder going one each to the lowest SNRs.
pub fn mixed_counts(total: usize, snr_count: usize) -> Vec<usize> {
    let base = total / snr_count;
    let extra = total % snr_count;
    (0..snr_count).map(|i| base + usize::from(i < extra)).collect()
}

struct Chunk {
    inputs: Array2<f64>,
    targets: Array2<f64>,
}

fn pair_chunk(
    cfg: &ExperimentConfig,
    range_deg: (f64, f64),
    pulses: usize,
    snr_db: f64,
    seed: u64,
) -> Result<(TargetScene, SnapshotBlock, SnapshotBlock)> {
    let mut rng = seeded(seed);
    let scene = draw_scene(range_deg, cfg.targets, cfg.min_sep_deg, pulses, &mut rng)?;
    let (low, high) = synthesize_pair(&scene, &cfg.low, &cfg.high, snr_db, &mut rng)?;
    Ok((scene, low, high))
}

/// `count` samples at one SNR, one scene per `N_s` pulses.
fn generate_segment(
    cfg: &ExperimentConfig,
    range_deg: (f64, f64),
    snr_db: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Chunk>> {
    let n_s = cfg.snapshots;
    let scenes = count.div_ceil(n_s);
    (0..scenes)
        .into_par_iter()
        .map(|i| {
            let pulses = n_s.min(count - i * n_s);
            let (_, low, high) = pair_chunk(cfg, range_deg, pulses, snr_db, derive_seed(seed, &[i as u64]))?;
            Ok(Chunk {
                inputs: stack_real_imag(low.data.view()),
                targets: stack_real_imag(high.data.view()),
            })
        })
        .collect()
}

fn assemble(chunks: &[Chunk], labels: Vec<f32>) -> Result<PairDataset> {
    let ins: Vec<_> = chunks.iter().map(|c| c.inputs.view()).collect();
    let outs: Vec<_> = chunks.iter().map(|c| c.targets.view()).collect();
    let inputs = concatenate(Axis(1), &ins).map_err(|e| Error::dim(e.to_string()))?;
    let targets = concatenate(Axis(1), &outs).map_err(|e| Error::dim(e.to_string()))?;
    PairDataset::new(inputs, targets, labels)
}

/// Generate one training set of an angle range. Deterministic in the run seed,
/// the range and the set id, independent of the worker count.
pub fn generate_set(cfg: &ExperimentConfig, range_deg: (f64, f64), set: SetId) -> Result<PairDataset> {
    let total = set.sample_count(cfg);
    if total == 0 {
        return Err(Error::Config(format!("training set {set} has no samples")));
    }
    let set_seed = derive_seed(range_seed(cfg.seed, "train", range_deg), &[set.seed_tag()]);
    let plan: Vec<(f64, usize)> = match set {
        SetId::Single(snr) => vec![(snr, total)],
        SetId::M1 | SetId::M2 => cfg
            .snr_train
            .iter()
            .copied()
            .zip(mixed_counts(total, cfg.snr_train.len()))
            .collect(),
    };
    let mut chunks = Vec::new();
    let mut labels = Vec::with_capacity(total);
    for (j, &(snr, count)) in plan.iter().enumerate() {
        if count == 0 {
            continue;
        }
        chunks.extend(generate_segment(
            cfg,
            range_deg,
            snr,
            count,
            derive_seed(set_seed, &[j as u64]),
        )?);
        labels.extend(std::iter::repeat_n(snr as f32, count));
    }
    assemble(&chunks, labels)
}

/// Test data of one angle range at one SNR: `Q` trials of `N_s` pulses.
#[derive(Debug, Clone)]
pub struct TestTrials {
    pub snr_db: f64,
    pub low: Vec<SnapshotBlock>,
    pub high: Vec<SnapshotBlock>,
}

/// Ground truth shared by every test SNR of an angle range.
#[derive(Debug, Clone, PartialEq)]
pub struct TestTruth {
    /// Sorted true angles per trial, degrees.
    pub angles_deg: Vec<Vec<f64>>,
    /// Mean CRB diagonal per trial at unit noise variance, rad²; scales linearly in σ².
    pub crb_low_unit: Vec<f64>,
    pub crb_high_unit: Vec<f64>,
}

fn trial_seed(cfg: &ExperimentConfig, range_deg: (f64, f64), q: usize) -> u64 {
    derive_seed(range_seed(cfg.seed, "test", range_deg), &[q as u64])
}

/// Generate test trials. Trial `q` uses the same scene, reflection
/// coefficients and unit-variance noise at every SNR; only the noise scale
/// differs between SNRs.
pub fn generate_test(cfg: &ExperimentConfig, range_deg: (f64, f64), snr_db: f64) -> Result<TestTrials> {
    let (low, high): (Vec<_>, Vec<_>) = (0..cfg.trials())
        .into_par_iter()
        .map(|q| {
            let (_, l, h) = pair_chunk(cfg, range_deg, cfg.snapshots, snr_db, trial_seed(cfg, range_deg, q))?;
            Ok((l, h))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(TestTrials { snr_db, low, high })
}

/// High-array test blocks at `snr_db` only, e.g. for offset references.
pub fn generate_test_high(cfg: &ExperimentConfig, range_deg: (f64, f64), snr_db: f64) -> Result<Vec<SnapshotBlock>> {
    Ok(generate_test(cfg, range_deg, snr_db)?.high)
}

/// Truth angles and unit-variance CRBs of the test trials.
pub fn generate_truth(cfg: &ExperimentConfig, range_deg: (f64, f64)) -> Result<TestTruth> {
    let rows = (0..cfg.trials())
        .into_par_iter()
        .map(|q| {
            let mut rng = seeded(trial_seed(cfg, range_deg, q));
            let scene = draw_scene(range_deg, cfg.targets, cfg.min_sep_deg, cfg.snapshots, &mut rng)?;
            let unit =
                |a: &ArrayConfig| crate::metrics::crb(&scene.angles_rad, &scene.rcs, 1.0, a).map(|c| c.mean_rad2());
            Ok((scene.angles_deg(), unit(&cfg.low)?, unit(&cfg.high)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut truth = TestTruth {
        angles_deg: vec![],
        crb_low_unit: vec![],
        crb_high_unit: vec![],
    };
    for (a, l, h) in rows {
        truth.angles_deg.push(a);
        truth.crb_low_unit.push(l);
        truth.crb_high_unit.push(h);
    }
    Ok(truth)
}

impl TestTrials {
    /// Flatten into a dataset (trial-major pulses) for persistence.
    pub fn to_dataset(&self) -> Result<PairDataset> {
        let chunks: Vec<Chunk> = self
            .low
            .iter()
            .zip(&self.high)
            .map(|(l, h)| Chunk {
                inputs: stack_real_imag(l.data.view()),
                targets: stack_real_imag(h.data.view()),
            })
            .collect();
        let n: usize = self.low.iter().map(|b| b.pulse_count()).sum();
        assemble(&chunks, vec![self.snr_db as f32; n])
    }

    /// Rebuild trials from a persisted dataset.
    pub fn from_dataset(
        data: &PairDataset,
        snr_db: f64,
        low_cfg: &ArrayConfig,
        high_cfg: &ArrayConfig,
        snapshots: usize,
    ) -> Result<Self> {
        if 2 * low_cfg.virtual_size() != data.input_dim() || 2 * high_cfg.virtual_size() != data.output_dim() {
            return Err(Error::dim("test set widths do not match the configured arrays"));
        }
        if snapshots == 0 || !data.len().is_multiple_of(snapshots) {
            return Err(Error::dim(format!(
                "test set of {} pulses is not a whole number of {snapshots}-pulse trials",
                data.len()
            )));
        }
        let mut trials = TestTrials {
            snr_db,
            low: vec![],
            high: vec![],
        };
        for q in 0..data.len() / snapshots {
            let cols = q * snapshots..(q + 1) * snapshots;
            let l = crate::nn::unstack_real_imag(data.inputs.slice(ndarray::s![.., cols.clone()]))?;
            let h = crate::nn::unstack_real_imag(data.targets.slice(ndarray::s![.., cols]))?;
            trials.low.push(SnapshotBlock::new(l, snr_db, *low_cfg)?);
            trials.high.push(SnapshotBlock::new(h, snr_db, *high_cfg)?);
        }
        Ok(trials)
    }
}

/// Write a dataset file.
pub fn write_dataset(path: &Path, data: &PairDataset) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(DATASET_MAGIC)?;
    put(&DATASET_VERSION.to_le_bytes())?;
    for n in [data.len(), data.input_dim(), data.output_dim()] {
        put(&(n as u64).to_le_bytes())?;
    }
    for s in &data.snr_db {
        put(&s.to_le_bytes())?;
    }
    for block in [&data.inputs, &data.targets] {
        // Stored samples-major: iterate columns of the features × samples matrix.
        for col in block.columns() {
            for v in col {
                put(&v.to_le_bytes())?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a dataset file written by [`write_dataset`].
pub fn read_dataset(path: &Path) -> Result<PairDataset> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::Format {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    };
    let header = 8 + 4 + 3 * 8;
    if bytes.len() < header || &bytes[..8] != DATASET_MAGIC {
        return Err(bad("not a dataset file"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != DATASET_VERSION {
        return Err(bad(&format!("unsupported dataset version {version}")));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[12 + 8 * i..20 + 8 * i].try_into().unwrap()) as usize;
    let (n, din, dout) = (word(0), word(1), word(2));
    let expected = n
        .checked_mul(4 + 8 * (din + dout))
        .and_then(|b| b.checked_add(header))
        .ok_or_else(|| bad("header counts overflow"))?;
    if bytes.len() != expected {
        return Err(bad(&format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let mut pos = header;
    let snr_db: Vec<f32> = (0..n)
        .map(|i| f32::from_le_bytes(bytes[pos + 4 * i..pos + 4 * i + 4].try_into().unwrap()))
        .collect();
    pos += 4 * n;
    let mut block = |width: usize| {
        let vals: Vec<f64> = bytes[pos..pos + 8 * n * width]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        pos += 8 * n * width;
        Array2::from_shape_vec((n, width), vals).map(|m| m.reversed_axes().as_standard_layout().to_owned())
    };
    let inputs = block(din).map_err(|e| bad(&e.to_string()))?;
    let targets = block(dout).map_err(|e| bad(&e.to_string()))?;
    PairDataset::new(inputs, targets, snr_db)
}
