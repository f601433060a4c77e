use ndarray::{s, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;

use super::{adam_step, Activation, AdamConfig, MinMaxStats, Mlp, OptimizerState};
use crate::rng::{derive_seed, seeded};
use crate::{Error, Result};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// `(train, val, test)` fractions, summing to one.
    pub split: (f64, f64, f64),
    pub seed: u64,
    pub output_activation: Activation,
    /// Stop after this many epochs without a validation improvement; 0 disables.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 150,
            batch_size: 120,
            adam: AdamConfig::default(),
            split: (0.6, 0.2, 0.2),
            seed: 0,
            output_activation: Activation::Linear,
            patience: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = self.split;
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be at least 1".into()));
        }
        if a <= 0.0 || b < 0.0 || c < 0.0 || ((a + b + c) - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions ({a}, {b}, {c}) must be non-negative, with a positive train share, and sum to 1"
            )));
        }
        let h = &self.adam;
        if !(h.lr > 0.0) || !(0.0..1.0).contains(&h.beta1) || !(0.0..1.0).contains(&h.beta2) || !(h.eps > 0.0) {
            return Err(Error::Config(format!("invalid Adam hyperparameters {h:?}")));
        }
        Ok(())
    }
}

/// Paired stacked snapshots: column `i` of `inputs` maps to column `i` of `targets`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDataset {
    pub inputs: Array2<f64>,
    pub targets: Array2<f64>,
    /// SNR label of each sample.
    pub snr_db: Vec<f32>,
}

impl PairDataset {
    pub fn new(inputs: Array2<f64>, targets: Array2<f64>, snr_db: Vec<f32>) -> Result<Self> {
        if inputs.ncols() != targets.ncols() || inputs.ncols() != snr_db.len() {
            return Err(Error::dim(format!(
                "{} inputs, {} targets, {} labels",
                inputs.ncols(),
                targets.ncols(),
                snr_db.len()
            )));
        }
        Ok(PairDataset {
            inputs,
            targets,
            snr_db,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.targets.nrows()
    }

    /// Concatenate datasets sample-wise.
    pub fn concat(parts: &[PairDataset]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::domain("nothing to concatenate"))?;
        if parts
            .iter()
            .any(|p| p.input_dim() != first.input_dim() || p.output_dim() != first.output_dim())
        {
            return Err(Error::dim("datasets have different feature widths"));
        }
        let ins: Vec<_> = parts.iter().map(|p| p.inputs.view()).collect();
        let outs: Vec<_> = parts.iter().map(|p| p.targets.view()).collect();
        let inputs = ndarray::concatenate(Axis(1), &ins).map_err(|e| Error::dim(e.to_string()))?;
        let targets = ndarray::concatenate(Axis(1), &outs).map_err(|e| Error::dim(e.to_string()))?;
        let snr_db = parts.iter().flat_map(|p| p.snr_db.iter().copied()).collect();
        PairDataset::new(inputs, targets, snr_db)
    }
}

/// Index partition of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle of `0..n` cut into train/val/test by the configured fractions.
pub fn split_indices(n: usize, cfg: &TrainConfig) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(derive_seed(cfg.seed, &[0x5917])));
    let n_train = ((n as f64 * cfg.split.0).floor() as usize).max(1).min(n);
    let n_val = ((n as f64 * cfg.split.1).floor() as usize).min(n - n_train);
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    Split { train: idx, val, test }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    /// Mean of the minibatch MSEs seen during the epoch.
    pub train: f64,
    pub val: f64,
}

/// Loss history and the selected epoch. MSE values are in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub output_activation: Activation,
    pub initial_train_mse: f64,
    pub initial_val_mse: f64,
    pub history: Vec<EpochLoss>,
    /// Epoch (1-based) whose weights were kept; 0 means the initial weights.
    pub best_epoch: usize,
    pub best_val_mse: f64,
    /// MSE on the held-out test share, when the split leaves one.
    pub test_mse: Option<f64>,
}

const EVAL_CHUNK: usize = 4096;

fn chunked_mse(model: &Mlp, x: ArrayView2<'_, f64>, t: ArrayView2<'_, f64>) -> Result<f64> {
    let n = x.ncols();
    if n == 0 {
        return Ok(f64::NAN);
    }
    let mut total = 0.0;
    let mut start = 0;
    while start < n {
        let end = (start + EVAL_CHUNK).min(n);
        let part = model.mse(x.slice(s![.., start..end]), t.slice(s![.., start..end]))?;
        total += part * (end - start) as f64;
        start = end;
    }
    Ok(total / n as f64)
}

/// Train an emulator-shaped network on `data`.
///
/// Normalization is fitted on the training share only. Weights from the
/// epoch with the lowest validation MSE are returned.
pub fn train(data: &PairDataset, cfg: &TrainConfig) -> Result<(Mlp, TrainReport)> {
    cfg.validate()?;
    if data.len() < cfg.batch_size {
        return Err(Error::domain(format!(
            "dataset has {} samples, fewer than one batch of {}",
            data.len(),
            cfg.batch_size
        )));
    }
    if !data.input_dim().is_multiple_of(2) || !data.output_dim().is_multiple_of(2) {
        return Err(Error::dim("stacked real/imaginary widths must be even"));
    }
    let split = split_indices(data.len(), cfg);
    let pick = |m: &Array2<f64>, idx: &[usize]| m.select(Axis(1), idx);

    let norm_in = MinMaxStats::fit(pick(&data.inputs, &split.train).view())?;
    let norm_out = MinMaxStats::fit(pick(&data.targets, &split.train).view())?;
    let x_all = norm_in.apply(data.inputs.view())?;
    let t_all = norm_out.apply(data.targets.view())?;
    let (x_train, t_train) = (pick(&x_all, &split.train), pick(&t_all, &split.train));
    let (x_val, t_val) = (pick(&x_all, &split.val), pick(&t_all, &split.val));

    let mut init_rng = seeded(derive_seed(cfg.seed, &[0x1417]));
    let mut model = Mlp::emulator(
        data.input_dim() / 2,
        data.output_dim() / 2,
        cfg.output_activation,
        &mut init_rng,
    )?;
    model.norm_in = norm_in;
    model.norm_out = norm_out;

    let initial_train_mse = chunked_mse(&model, x_train.view(), t_train.view())?;
    let initial_val_mse = chunked_mse(&model, x_val.view(), t_val.view())?;
    // Without a validation share, selection falls back to the running train loss.
    let has_val = !split.val.is_empty();
    let mut best = model.clone();
    let mut best_epoch = 0;
    let mut best_score = if has_val { initial_val_mse } else { initial_train_mse };

    let mut state = OptimizerState::new(&model);
    let mut order: Vec<usize> = (0..x_train.ncols()).collect();
    let mut shuffle_rng = seeded(derive_seed(cfg.seed, &[0x5_4ff1e]));
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut since_best = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let xb = x_train.select(Axis(1), batch);
            let tb = t_train.select(Axis(1), batch);
            let (grads, mse) = model.backward_batch(xb.view(), tb.view())?;
            if !mse.is_finite() {
                return Err(Error::Training(format!("loss became {mse} in epoch {epoch}")));
            }
            adam_step(&mut state, &mut model, &grads, &cfg.adam)?;
            loss_sum += mse * batch.len() as f64;
            seen += batch.len();
        }
        let train_mse = loss_sum / seen as f64;
        let val_mse = chunked_mse(&model, x_val.view(), t_val.view())?;
        if has_val && !val_mse.is_finite() {
            return Err(Error::Training(format!(
                "validation loss became {val_mse} in epoch {epoch}"
            )));
        }
        history.push(EpochLoss {
            train: train_mse,
            val: val_mse,
        });
        let score = if has_val { val_mse } else { train_mse };
        if score < best_score {
            best_score = score;
            best_epoch = epoch;
            best = model.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience > 0 && since_best >= cfg.patience {
                break;
            }
        }
    }

    let test_mse = if split.test.is_empty() {
        None
    } else {
        let xt = pick(&x_all, &split.test);
        let tt = pick(&t_all, &split.test);
        Some(chunked_mse(&best, xt.view(), tt.view())?)
    };
    Ok((
        best,
        TrainReport {
            output_activation: cfg.output_activation,
            initial_train_mse,
            initial_val_mse,
            history,
            best_epoch,
            best_val_mse: best_score,
            test_mse,
        },
    ))
}

/// Train once per candidate output activation and keep the lowest validation MSE.
pub fn train_select(data: &PairDataset, cfg: &TrainConfig, candidates: &[Activation]) -> Result<(Mlp, TrainReport)> {
    let mut best: Option<(Mlp, TrainReport)> = None;
    for &act in candidates {
        let run_cfg = TrainConfig {
            output_activation: act,
            ..cfg.clone()
        };
        let (model, report) = train(data, &run_cfg)?;
        if best.as_ref().is_none_or(|(_, r)| report.best_val_mse < r.best_val_mse) {
            best = Some((model, report));
        }
    }
    best.ok_or_else(|| Error::Config("no output activation candidates".into()))
}
