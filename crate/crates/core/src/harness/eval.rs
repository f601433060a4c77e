//! Per-range evaluation of raw arrays and trained emulators on test trials.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::dataset::{generate_test_high, TestTrials, TestTruth};
use crate::array::snr_to_noise_var;
use crate::doa::{doa_mse, AngleGrid, CovarianceEstimate, MusicEstimator};
use crate::metrics::{cov_error, cov_error_offset};
use crate::nn::{predict, Mlp};
use crate::{Error, Result};

/// Raw-array results and CRBs at one test SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub test_snr_db: f64,
    pub crb_low: f64,
    pub crb_high: f64,
    pub mse_low: f64,
    pub mse_high: f64,
}

/// Emulator results at one test SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelScore {
    pub test_snr_db: f64,
    pub doa_mse: f64,
    /// Trial mean of `R_e` against the high-array test signal.
    pub r_e: f64,
    /// Trial mean of `R_offset`, one entry per evaluator offset.
    pub r_offset: Vec<f64>,
}

struct SnrData {
    trials: TestTrials,
    high_cov: Vec<CovarianceEstimate>,
    /// `[offset][trial]` high-array covariances at `snr + offset`.
    offset_cov: Vec<Vec<CovarianceEstimate>>,
}

/// Test data of one angle range with cached reference covariances.
pub struct RangeEvaluator {
    pub range_deg: (f64, f64),
    pub offsets_db: Vec<f64>,
    truth: TestTruth,
    music_low: MusicEstimator,
    music_high: MusicEstimator,
    snrs: Vec<SnrData>,
    high: crate::array::ArrayConfig,
    window: usize,
}

fn covariances(blocks: &[crate::array::SnapshotBlock], window: usize) -> Result<Vec<CovarianceEstimate>> {
    blocks.par_iter().map(|b| b.covariance(0..window)).collect()
}

impl RangeEvaluator {
    /// `tests` holds one entry per test SNR. Offset references are generated
    /// from the same trial seeds at `snr + offset`.
    pub fn new(
        cfg: &ExperimentConfig,
        range_deg: (f64, f64),
        truth: TestTruth,
        tests: Vec<TestTrials>,
        offsets_db: &[f64],
    ) -> Result<Self> {
        if cfg.trials() == 0 {
            return Err(Error::Config("evaluation needs at least one test trial".into()));
        }
        if tests.iter().any(|t| t.low.len() != truth.angles_deg.len()) {
            return Err(Error::dim("test trials and truth disagree on the trial count"));
        }
        let grid = AngleGrid::padded(range_deg, cfg.grid_pad_deg, cfg.grid_step_deg)?;
        let music_low = MusicEstimator::new(cfg.low, grid, cfg.targets)?;
        let music_high = MusicEstimator::new(cfg.high, grid, cfg.targets)?;
        let mut snrs = Vec::with_capacity(tests.len());
        for trials in tests {
            let high_cov = covariances(&trials.high, cfg.snapshots)?;
            let offset_cov = offsets_db
                .iter()
                .map(|off| covariances(&generate_test_high(cfg, range_deg, trials.snr_db + off)?, cfg.snapshots))
                .collect::<Result<_>>()?;
            snrs.push(SnrData {
                trials,
                high_cov,
                offset_cov,
            });
        }
        Ok(RangeEvaluator {
            range_deg,
            offsets_db: offsets_db.to_vec(),
            truth,
            music_low,
            music_high,
            snrs,
            high: cfg.high,
            window: cfg.snapshots,
        })
    }

    pub fn test_snrs(&self) -> Vec<f64> {
        self.snrs.iter().map(|s| s.trials.snr_db).collect()
    }

    pub fn truth(&self) -> &TestTruth {
        &self.truth
    }

    fn mse_of(&self, music: &MusicEstimator, covs: &[CovarianceEstimate]) -> Result<f64> {
        let est = covs
            .par_iter()
            .map(|c| music.estimate(c).map(|p| p.angles_deg))
            .collect::<Result<Vec<_>>>()?;
        doa_mse(&est, &self.truth.angles_deg)
    }

    /// MUSIC on the raw low and high test signals, plus trial-mean CRBs.
    pub fn baselines(&self) -> Result<Vec<Baseline>> {
        let q = self.truth.angles_deg.len() as f64;
        let mean_low = self.truth.crb_low_unit.iter().sum::<f64>() / q;
        let mean_high = self.truth.crb_high_unit.iter().sum::<f64>() / q;
        self.snrs
            .iter()
            .map(|s| {
                let sigma2 = snr_to_noise_var(s.trials.snr_db);
                let low_cov = covariances(&s.trials.low, self.window)?;
                Ok(Baseline {
                    test_snr_db: s.trials.snr_db,
                    crb_low: mean_low * sigma2,
                    crb_high: mean_high * sigma2,
                    mse_low: self.mse_of(&self.music_low, &low_cov)?,
                    mse_high: self.mse_of(&self.music_high, &s.high_cov)?,
                })
            })
            .collect()
    }

    /// Emulate every test trial with `model` and score the predictions.
    pub fn score_model(&self, model: &Mlp) -> Result<Vec<ModelScore>> {
        self.snrs
            .iter()
            .map(|s| {
                let pred = s
                    .trials
                    .low
                    .par_iter()
                    .map(|b| predict(model, b, &self.high)?.covariance(0..self.window))
                    .collect::<Result<Vec<_>>>()?;
                let q = pred.len() as f64;
                let mut r_e = 0.0;
                for (h, p) in s.high_cov.iter().zip(&pred) {
                    r_e += cov_error(h, p)?;
                }
                let r_offset = s
                    .offset_cov
                    .iter()
                    .map(|refs| {
                        let mut acc = 0.0;
                        for (h, p) in refs.iter().zip(&pred) {
                            acc += cov_error_offset(h, p)?;
                        }
                        Ok(acc / q)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ModelScore {
                    test_snr_db: s.trials.snr_db,
                    doa_mse: self.mse_of(&self.music_high, &pred)?,
                    r_e: r_e / q,
                    r_offset,
                })
            })
            .collect()
    }
}
