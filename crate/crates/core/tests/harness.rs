use arrayemu::doa::{doa_mse, AngleGrid, MusicEstimator};
use arrayemu::harness::*;
use arrayemu::nn::predict;

fn tiny(out: &std::path::Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    for (k, v) in [
        ("ranges", "20:45"),
        ("snr_train", "-6:6:6"),
        ("snr_test", "-6:6:6"),
        ("samples", "300"),
        ("mixed.m1", "450"),
        ("mixed.m2", "150"),
        ("test_samples", "450"),
        ("train.epochs", "3"),
        ("denoise.offsets_db", "0,8"),
    ] {
        c.set(k, v).unwrap();
    }
    c.out_dir = out.to_path_buf();
    c
}

#[test]
fn sweep_rows_are_reproducible_from_persisted_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path());
    let out = run_pipeline(&cfg).unwrap();
    let range = (20.0, 45.0);
    let (truth, tests) = load_test_data(&cfg, range).unwrap();
    let grid = AngleGrid::padded(range, cfg.grid_pad_deg, cfg.grid_step_deg).unwrap();
    let music = MusicEstimator::new(cfg.high, grid, cfg.targets).unwrap();
    let persisted = read_table::<SweepRow>(&dir.path().join("sweep.csv")).unwrap();
    assert_eq!(persisted, out.sweep);
    for row in persisted.iter().filter(|r| r.train_set_id.starts_with("matched_snr/")) {
        let set: SetId = row.train_set_id.split('/').nth(1).unwrap().parse().unwrap();
        let model = load_model(&cfg, range, set).unwrap();
        let trials = tests.iter().find(|t| t.snr_db == row.test_snr_db).unwrap();
        let est: Vec<Vec<f64>> = trials
            .low
            .iter()
            .map(|b| {
                let p = predict(&model, b, &cfg.high).unwrap();
                music
                    .estimate(&p.covariance(0..cfg.snapshots).unwrap())
                    .unwrap()
                    .angles_deg
            })
            .collect();
        let mse = doa_mse(&est, &truth.angles_deg).unwrap();
        assert!((mse - row.doa_mse_rad2).abs() <= 1e-12 * mse.max(1e-300), "{row:?}");
    }
}

#[test]
fn persisted_and_generated_test_data_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path());
    build_datasets(&cfg).unwrap();
    let range = (20.0, 45.0);
    let (truth, tests) = load_test_data(&cfg, range).unwrap();
    assert_eq!(truth, generate_truth(&cfg, range).unwrap());
    for t in &tests {
        let fresh = generate_test(&cfg, range, t.snr_db).unwrap();
        for q in 0..cfg.trials() {
            assert_eq!(fresh.low[q].data, t.low[q].data);
            assert_eq!(fresh.high[q].data, t.high[q].data);
        }
    }
    let reread = read_dataset(&Layout::new(dir.path()).dataset(range, SetId::M1)).unwrap();
    assert_eq!(reread, generate_set(&cfg, range, SetId::M1).unwrap());
}

#[test]
fn zero_offset_matches_r_e_and_grid_flags_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path());
    let out = run_pipeline(&cfg).unwrap();
    for row in out.denoise.iter().filter(|r| r.offset_db == 0.0) {
        assert_eq!(row.r_e, row.r_offset);
    }
    assert!(out.denoise.iter().all(|r| r.r_e >= 0.0 && r.r_offset >= 0.0));
    for snr in &cfg.snr_test {
        let cells: Vec<&GridRow> = out.grid.iter().filter(|g| g.test_snr_db == *snr).collect();
        assert_eq!(cells.len(), cfg.snr_train.len());
        assert_eq!(cells.iter().filter(|g| g.best).count(), 1);
        assert_eq!(cells.iter().filter(|g| g.second_best).count(), 1);
        assert!(cells.iter().all(|g| !(g.best && g.second_best)));
        assert!(cells.iter().all(|g| !g.best || g.within_10pct));
    }
    assert_eq!(out.cumulative.iter().filter(|c| c.best_single_snr).count(), 1);
    assert!(out
        .sweep
        .iter()
        .all(|r| r.doa_mse_rad2 >= 0.0 && r.crb_low >= 0.0 && r.crb_high >= 0.0));
}

#[test]
fn worker_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg_a = tiny(a.path());
    cfg_a.train.epochs = 1;
    let mut cfg_b = cfg_a.clone();
    cfg_b.out_dir = b.path().to_path_buf();
    cfg_b.workers = 3;
    run_pipeline(&cfg_a).unwrap();
    run_pipeline(&cfg_b).unwrap();
    for f in [
        "sweep.csv",
        "training.csv",
        "models/range_20_45/M1.bin",
        "datasets/range_20_45/M2.bin",
    ] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn missing_model_names_the_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path());
    let err = run_case_sweep(&cfg, Case::MixedM1).unwrap_err().to_string();
    assert!(err.contains("training set M1") && err.contains("20:45"), "{err}");
    let mut no_trials = cfg.clone();
    no_trials.test_samples = 0;
    assert!(run_case_sweep(&no_trials, Case::RawLow).is_err());
}
