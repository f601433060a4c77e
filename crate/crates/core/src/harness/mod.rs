//! Experiment pipeline: dataset construction, training, case sweeps, the
//! train/test SNR grid and the denoising analysis.
//!
//! Output layout under the configured directory:
//!
//! ```text
//! datasets/range_<lo>_<hi>/<set>.bin        training sets (snr-16 … snr10, M1, M2)
//! datasets/range_<lo>_<hi>/test/<snr>.bin   test trials per test SNR
//! datasets/range_<lo>_<hi>/test/truth.csv   true angles and unit-variance CRBs
//! models/range_<lo>_<hi>/<set>.bin          trained emulators
//! models/range_<lo>_<hi>/<set>.loss.csv     per-epoch loss history
//! training.csv sweep.csv grid.csv grid_cumulative.csv denoise.csv crb.csv
//! ```

mod config;
mod dataset;
mod eval;
mod results;

pub use config::{keys_help, Case, ExperimentConfig, CONFIG_KEYS};
pub use dataset::{
    generate_set, generate_test, generate_test_high, generate_truth, mixed_counts, range_dir, range_label,
    read_dataset, write_dataset, SetId, TestTrials, TestTruth, DATASET_MAGIC, DATASET_VERSION,
};
pub use eval::{Baseline, ModelScore, RangeEvaluator};
pub use results::{
    read_table, write_results, write_table, CrbRow, CumulativeRow, DenoiseRow, GridRow, LossRow, SweepRow, Table,
    TrainRow, TruthRow,
};

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::nn::{train_select, Mlp, TrainConfig};
use crate::rng::{derive_seed, tag};
use crate::{Error, Result};

/// File locations under an output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    fn data_dir(&self, range: (f64, f64)) -> PathBuf {
        self.root.join("datasets").join(range_dir(range))
    }

    pub fn dataset(&self, range: (f64, f64), set: SetId) -> PathBuf {
        self.data_dir(range).join(format!("{set}.bin"))
    }

    pub fn test_set(&self, range: (f64, f64), snr_db: f64) -> PathBuf {
        self.data_dir(range)
            .join("test")
            .join(format!("{}.bin", SetId::Single(snr_db)))
    }

    pub fn truth(&self, range: (f64, f64)) -> PathBuf {
        self.data_dir(range).join("test").join("truth.csv")
    }

    pub fn model(&self, range: (f64, f64), set: SetId) -> PathBuf {
        self.root
            .join("models")
            .join(range_dir(range))
            .join(format!("{set}.bin"))
    }

    pub fn loss_log(&self, range: (f64, f64), set: SetId) -> PathBuf {
        self.root
            .join("models")
            .join(range_dir(range))
            .join(format!("{set}.loss.csv"))
    }

    pub fn table(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

/// Run `f` on a thread pool sized by `cfg.workers`.
pub fn with_workers<T: Send>(cfg: &ExperimentConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    pool.install(f)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Generate and write every training set, the test trials and their truth.
pub fn build_datasets(cfg: &ExperimentConfig) -> Result<()> {
    cfg.validate()?;
    let layout = Layout::new(&cfg.out_dir);
    with_workers(cfg, || {
        for &range in &cfg.ranges_deg {
            for set in SetId::all(cfg) {
                write_dataset(&layout.dataset(range, set), &generate_set(cfg, range, set)?)?;
            }
            build_test_sets(cfg, range)?;
        }
        Ok(())
    })
}

fn build_test_sets(cfg: &ExperimentConfig, range: (f64, f64)) -> Result<()> {
    let layout = Layout::new(&cfg.out_dir);
    for &snr in &cfg.snr_test {
        write_dataset(
            &layout.test_set(range, snr),
            &generate_test(cfg, range, snr)?.to_dataset()?,
        )?;
    }
    let truth = generate_truth(cfg, range)?;
    let rows: Vec<TruthRow> = (0..truth.angles_deg.len())
        .map(|q| TruthRow {
            trial: q,
            angles_deg: truth.angles_deg[q]
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            crb_low_unit: truth.crb_low_unit[q],
            crb_high_unit: truth.crb_high_unit[q],
        })
        .collect();
    write_table(&layout.truth(range), &rows)
}

fn train_config(cfg: &ExperimentConfig, range: (f64, f64), set: SetId) -> TrainConfig {
    TrainConfig {
        seed: derive_seed(
            cfg.seed,
            &[tag("fit"), range.0.to_bits(), range.1.to_bits(), tag(&set.name())],
        ),
        ..cfg.train.clone()
    }
}

/// Train one set from its dataset file and persist the model and loss log.
pub fn train_set(cfg: &ExperimentConfig, range: (f64, f64), set: SetId) -> Result<TrainRow> {
    let layout = Layout::new(&cfg.out_dir);
    let data = read_dataset(&layout.dataset(range, set))?;
    let (model, report) = train_select(&data, &train_config(cfg, range, set), &cfg.output_activations)?;
    drop(data);
    let path = layout.model(range, set);
    create_dir(path.parent().expect("model path has a parent"))?;
    model.save(&path)?;
    let losses: Vec<LossRow> = report
        .history
        .iter()
        .enumerate()
        .map(|(i, l)| LossRow {
            epoch: i + 1,
            train_mse: l.train,
            val_mse: l.val,
        })
        .collect();
    write_table(&layout.loss_log(range, set), &losses)?;
    Ok(TrainRow {
        angle_range: range_label(range),
        train_set_id: set.name(),
        output_activation: report.output_activation.name().to_string(),
        best_epoch: report.best_epoch,
        best_val_mse: report.best_val_mse,
        test_mse: report.test_mse,
    })
}

/// Train every set of every range; writes `training.csv`.
pub fn train_models(cfg: &ExperimentConfig) -> Result<Vec<TrainRow>> {
    cfg.validate()?;
    let jobs: Vec<((f64, f64), SetId)> = cfg
        .ranges_deg
        .iter()
        .flat_map(|&r| SetId::all(cfg).into_iter().map(move |s| (r, s)))
        .collect();
    let rows = with_workers(cfg, || {
        jobs.par_iter()
            .map(|&(range, set)| train_set(cfg, range, set))
            .collect::<Result<Vec<_>>>()
    })?;
    write_table(&Layout::new(&cfg.out_dir).table("training.csv"), &rows)?;
    Ok(rows)
}

/// Load the model of one training set, naming the set if it is missing.
pub fn load_model(cfg: &ExperimentConfig, range: (f64, f64), set: SetId) -> Result<Mlp> {
    let path = Layout::new(&cfg.out_dir).model(range, set);
    match Mlp::load(&path) {
        Err(Error::MissingFile(path)) => Err(Error::MissingModel {
            set: set.name(),
            range: range_label(range),
            path,
        }),
        other => other,
    }
}

/// Read the persisted test trials and truth of a range.
pub fn load_test_data(cfg: &ExperimentConfig, range: (f64, f64)) -> Result<(TestTruth, Vec<TestTrials>)> {
    let layout = Layout::new(&cfg.out_dir);
    let truth_path = layout.truth(range);
    let rows: Vec<TruthRow> = read_table(&truth_path)?;
    let mut truth = TestTruth {
        angles_deg: vec![],
        crb_low_unit: vec![],
        crb_high_unit: vec![],
    };
    for row in rows {
        let angles = row
            .angles_deg
            .split(';')
            .map(|a| a.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format {
                path: truth_path.clone(),
                msg: format!("trial {}: {e}", row.trial),
            })?;
        truth.angles_deg.push(angles);
        truth.crb_low_unit.push(row.crb_low_unit);
        truth.crb_high_unit.push(row.crb_high_unit);
    }
    if truth.angles_deg.len() != cfg.trials() {
        return Err(Error::Format {
            path: truth_path,
            msg: format!(
                "{} trials stored, config expects {}",
                truth.angles_deg.len(),
                cfg.trials()
            ),
        });
    }
    let tests = cfg
        .snr_test
        .iter()
        .map(|&snr| {
            let data = read_dataset(&layout.test_set(range, snr))?;
            TestTrials::from_dataset(&data, snr, &cfg.low, &cfg.high, cfg.snapshots)
        })
        .collect::<Result<_>>()?;
    Ok((truth, tests))
}

/// Baselines and model scores of one range.
#[derive(Debug, Clone)]
pub struct RangeEvaluation {
    pub range_deg: (f64, f64),
    /// Offsets of every `ModelScore::r_offset`; the first is the sweep offset.
    pub offsets_db: Vec<f64>,
    pub baselines: Vec<Baseline>,
    pub models: Vec<(SetId, Vec<ModelScore>)>,
}

impl RangeEvaluation {
    pub fn scores(&self, set: SetId) -> Option<&[ModelScore]> {
        self.models.iter().find(|(s, _)| *s == set).map(|(_, v)| v.as_slice())
    }
}

fn offsets_with(cfg: &ExperimentConfig, extra: &[f64]) -> Vec<f64> {
    let mut out = vec![cfg.sweep_offset_db];
    for &o in extra {
        if !out.contains(&o) {
            out.push(o);
        }
    }
    out
}

/// Evaluate the raw arrays and the models of `sets` on the persisted test
/// trials of `range`.
pub fn evaluate_range(
    cfg: &ExperimentConfig,
    range: (f64, f64),
    sets: &[SetId],
    extra_offsets_db: &[f64],
) -> Result<RangeEvaluation> {
    let models = sets
        .iter()
        .map(|&s| load_model(cfg, range, s).map(|m| (s, m)))
        .collect::<Result<Vec<_>>>()?;
    let (truth, tests) = load_test_data(cfg, range)?;
    let offsets_db = offsets_with(cfg, extra_offsets_db);
    let ev = RangeEvaluator::new(cfg, range, truth, tests, &offsets_db)?;
    let baselines = ev.baselines()?;
    let models = models
        .iter()
        .map(|(s, m)| Ok((*s, ev.score_model(m)?)))
        .collect::<Result<_>>()?;
    Ok(RangeEvaluation {
        range_deg: range,
        offsets_db,
        baselines,
        models,
    })
}

fn matched_set(cfg: &ExperimentConfig, snr: f64) -> Result<SetId> {
    if cfg.snr_train.contains(&snr) {
        Ok(SetId::Single(snr))
    } else {
        Err(Error::Config(format!(
            "matched_snr needs a single-SNR training set at the test SNR {snr} dB"
        )))
    }
}

/// Training sets a case needs.
pub fn sets_for_case(cfg: &ExperimentConfig, case: Case) -> Result<Vec<SetId>> {
    match case {
        Case::MixedM1 => Ok(vec![SetId::M1]),
        Case::MatchedSnr => cfg.snr_test.iter().map(|&s| matched_set(cfg, s)).collect(),
        Case::BestOfAll => Ok(SetId::all(cfg)),
        Case::RawLow | Case::RawHigh => Ok(vec![]),
    }
}

fn missing_scores(set: SetId, range: (f64, f64)) -> Error {
    Error::Config(format!("set {set} of range {} was not evaluated", range_label(range)))
}

/// Sweep rows of one case from an evaluation that covers the case's sets.
pub fn case_rows(cfg: &ExperimentConfig, ev: &RangeEvaluation, case: Case) -> Result<Vec<SweepRow>> {
    let label = range_label(ev.range_deg);
    let mut rows = Vec::with_capacity(ev.baselines.len());
    for (i, b) in ev.baselines.iter().enumerate() {
        let mut row = SweepRow {
            angle_range: label.clone(),
            train_set_id: String::new(),
            test_snr_db: b.test_snr_db,
            doa_mse_rad2: 0.0,
            crb_low: b.crb_low,
            crb_high: b.crb_high,
            mse_low_array: b.mse_low,
            mse_high_array: b.mse_high,
            r_e: None,
            r_offset: None,
        };
        let chosen = match case {
            Case::RawLow | Case::RawHigh => {
                row.train_set_id = format!("{}/-", case.name());
                row.doa_mse_rad2 = if case == Case::RawLow { b.mse_low } else { b.mse_high };
                rows.push(row);
                continue;
            }
            Case::MixedM1 => SetId::M1,
            Case::MatchedSnr => matched_set(cfg, b.test_snr_db)?,
            Case::BestOfAll => {
                let mut best: Option<(SetId, f64)> = None;
                for (s, scores) in &ev.models {
                    let m = scores[i].doa_mse;
                    if best.is_none_or(|(_, v)| m < v) {
                        best = Some((*s, m));
                    }
                }
                best.ok_or_else(|| Error::Config("best_of_all needs evaluated models".into()))?
                    .0
            }
        };
        let score = &ev.scores(chosen).ok_or_else(|| missing_scores(chosen, ev.range_deg))?[i];
        row.train_set_id = format!("{}/{chosen}", case.name());
        row.doa_mse_rad2 = score.doa_mse;
        row.r_e = Some(score.r_e);
        row.r_offset = Some(score.r_offset[0]);
        rows.push(row);
    }
    Ok(rows)
}

/// Evaluate one case over every angle range.
pub fn run_case_sweep(cfg: &ExperimentConfig, case: Case) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let sets = sets_for_case(cfg, case)?;
    with_workers(cfg, || {
        let mut rows = Vec::new();
        for &range in &cfg.ranges_deg {
            rows.extend(case_rows(cfg, &evaluate_range(cfg, range, &sets, &[])?, case)?);
        }
        Ok(rows)
    })
}

/// Evaluate the configured cases, sharing one evaluation per range; writes `sweep.csv`.
pub fn evaluate_cases(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut sets: Vec<SetId> = Vec::new();
    for &case in &cfg.cases {
        for s in sets_for_case(cfg, case)? {
            if !sets.contains(&s) {
                sets.push(s);
            }
        }
    }
    let rows = with_workers(cfg, || {
        let mut rows = Vec::new();
        for &range in &cfg.ranges_deg {
            let ev = evaluate_range(cfg, range, &sets, &[])?;
            for &case in &cfg.cases {
                rows.extend(case_rows(cfg, &ev, case)?);
            }
        }
        Ok(rows)
    })?;
    write_results(&rows, &Layout::new(&cfg.out_dir).table("sweep.csv"))?;
    Ok(rows)
}

fn pick_two(values: &[f64]) -> (Option<usize>, Option<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Stable sort: ties keep the lower training SNR first.
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    (order.first().copied(), order.get(1).copied())
}

/// Grid cells and cumulative MSEs from an evaluation covering every set.
pub fn grid_rows(cfg: &ExperimentConfig, ev: &RangeEvaluation) -> Result<(Vec<GridRow>, Vec<CumulativeRow>)> {
    let label = range_label(ev.range_deg);
    let singles = cfg
        .snr_train
        .iter()
        .map(|&s| {
            ev.scores(SetId::Single(s))
                .map(|v| (s, v))
                .ok_or_else(|| missing_scores(SetId::Single(s), ev.range_deg))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut grid = Vec::new();
    for (i, b) in ev.baselines.iter().enumerate() {
        let mses: Vec<f64> = singles.iter().map(|(_, v)| v[i].doa_mse).collect();
        let (best, second) = pick_two(&mses);
        let best_mse = best.map(|j| mses[j]).unwrap_or(f64::NAN);
        for (j, (train_snr, _)) in singles.iter().enumerate() {
            grid.push(GridRow {
                angle_range: label.clone(),
                test_snr_db: b.test_snr_db,
                train_snr_db: *train_snr,
                doa_mse_rad2: mses[j],
                best: best == Some(j),
                second_best: second == Some(j),
                within_10pct: mses[j] <= 1.1 * best_mse,
            });
        }
    }
    let cumulative: Vec<(SetId, f64)> = ev
        .models
        .iter()
        .map(|(s, v)| (*s, v.iter().map(|m| m.doa_mse).sum()))
        .collect();
    let single_cum: Vec<f64> = cumulative
        .iter()
        .map(|(s, c)| {
            if matches!(s, SetId::Single(_)) {
                *c
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let (best_cum, _) = pick_two(&single_cum);
    let summary = cumulative
        .iter()
        .enumerate()
        .map(|(j, (s, c))| CumulativeRow {
            angle_range: label.clone(),
            train_set_id: s.name(),
            cumulative_mse_rad2: *c,
            best_single_snr: best_cum == Some(j),
        })
        .collect();
    Ok((grid, summary))
}

/// Train-SNR × test-SNR grid over every range.
pub fn best_train_snr_grid(cfg: &ExperimentConfig) -> Result<(Vec<GridRow>, Vec<CumulativeRow>)> {
    cfg.validate()?;
    with_workers(cfg, || {
        let (mut grid, mut summary) = (Vec::new(), Vec::new());
        for &range in &cfg.ranges_deg {
            let (g, s) = grid_rows(cfg, &evaluate_range(cfg, range, &SetId::all(cfg), &[])?)?;
            grid.extend(g);
            summary.extend(s);
        }
        Ok((grid, summary))
    })
}

/// `R_e` and `R_offset` of the M2 and matched-SNR models for each offset.
pub fn denoise_rows(cfg: &ExperimentConfig, ev: &RangeEvaluation, offsets_db: &[f64]) -> Result<Vec<DenoiseRow>> {
    let label = range_label(ev.range_deg);
    let mut rows = Vec::new();
    for &offset in offsets_db {
        let k = ev
            .offsets_db
            .iter()
            .position(|&o| o == offset)
            .ok_or_else(|| Error::Config(format!("offset {offset} dB was not evaluated")))?;
        for (i, b) in ev.baselines.iter().enumerate() {
            for (name, set) in [("M2", SetId::M2), ("matched_snr", matched_set(cfg, b.test_snr_db)?)] {
                let score = &ev.scores(set).ok_or_else(|| missing_scores(set, ev.range_deg))?[i];
                rows.push(DenoiseRow {
                    angle_range: label.clone(),
                    train_set_id: if name == "M2" {
                        "M2".into()
                    } else {
                        format!("{name}/{set}")
                    },
                    test_snr_db: b.test_snr_db,
                    offset_db: offset,
                    r_e: score.r_e,
                    r_offset: score.r_offset[k],
                });
            }
        }
    }
    Ok(rows)
}

fn denoise_sets(cfg: &ExperimentConfig) -> Result<Vec<SetId>> {
    let mut sets = vec![SetId::M2];
    sets.extend(sets_for_case(cfg, Case::MatchedSnr)?);
    Ok(sets)
}

/// Denoising analysis over every range.
pub fn denoise_analysis(cfg: &ExperimentConfig, offsets_db: &[f64]) -> Result<Vec<DenoiseRow>> {
    cfg.validate()?;
    let sets = denoise_sets(cfg)?;
    with_workers(cfg, || {
        let mut rows = Vec::new();
        for &range in &cfg.ranges_deg {
            let ev = evaluate_range(cfg, range, &sets, offsets_db)?;
            rows.extend(denoise_rows(cfg, &ev, offsets_db)?);
        }
        Ok(rows)
    })
}

/// Trial-averaged CRBs of both arrays per range and test SNR. Needs no files.
pub fn crb_table(cfg: &ExperimentConfig) -> Result<Vec<CrbRow>> {
    cfg.validate()?;
    with_workers(cfg, || {
        let mut rows = Vec::new();
        for &range in &cfg.ranges_deg {
            let truth = generate_truth(cfg, range)?;
            let q = truth.angles_deg.len() as f64;
            let low = truth.crb_low_unit.iter().sum::<f64>() / q;
            let high = truth.crb_high_unit.iter().sum::<f64>() / q;
            for &snr in &cfg.snr_test {
                let sigma2 = crate::array::snr_to_noise_var(snr);
                rows.push(CrbRow {
                    angle_range: range_label(range),
                    test_snr_db: snr,
                    crb_low: low * sigma2,
                    crb_high: high * sigma2,
                });
            }
        }
        Ok(rows)
    })
}

/// Every table produced by [`run_pipeline`].
#[derive(Debug, Clone, Default)]
pub struct PipelineOutput {
    pub training: Vec<TrainRow>,
    pub sweep: Vec<SweepRow>,
    pub grid: Vec<GridRow>,
    pub cumulative: Vec<CumulativeRow>,
    pub denoise: Vec<DenoiseRow>,
    pub crb: Vec<CrbRow>,
}

/// Evaluate every configured case plus grid and denoising tables, reusing
/// one evaluation of all models per range. Writes the result tables.
pub fn evaluate_all(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let mut out = PipelineOutput {
        crb: crb_table(cfg)?,
        ..PipelineOutput::default()
    };
    with_workers(cfg, || {
        for &range in &cfg.ranges_deg {
            let ev = evaluate_range(cfg, range, &SetId::all(cfg), &cfg.denoise_offsets_db)?;
            for &case in &cfg.cases {
                out.sweep.extend(case_rows(cfg, &ev, case)?);
            }
            let (g, s) = grid_rows(cfg, &ev)?;
            out.grid.extend(g);
            out.cumulative.extend(s);
            out.denoise.extend(denoise_rows(cfg, &ev, &cfg.denoise_offsets_db)?);
        }
        Ok(())
    })?;
    let layout = Layout::new(&cfg.out_dir);
    write_results(&out.sweep, &layout.table("sweep.csv"))?;
    write_table(&layout.table("grid.csv"), &out.grid)?;
    write_table(&layout.table("grid_cumulative.csv"), &out.cumulative)?;
    write_table(&layout.table("denoise.csv"), &out.denoise)?;
    write_table(&layout.table("crb.csv"), &out.crb)?;
    Ok(out)
}

/// Full pipeline: datasets, training, then [`evaluate_all`].
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    build_datasets(cfg)?;
    let training = train_models(cfg)?;
    Ok(PipelineOutput {
        training,
        ..evaluate_all(cfg)?
    })
}
