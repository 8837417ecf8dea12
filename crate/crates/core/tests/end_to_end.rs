use lfk_core::bench::{learning_curve, run_benchmark, BenchmarkConfig};
use lfk_core::data::{
    generate_pool, read_samples, split_pool, write_samples, NoiseSpec, TargetFunction,
};
use lfk_core::model_selection::{cross_validate, GridSearchConfig, Method};

#[test]
fn single_repetition_shape() {
    let cfg = BenchmarkConfig {
        functions: vec![TargetFunction::F2],
        methods: vec![Method::Krr],
        train_sizes: vec![50],
        repetitions: 1,
        noise_variance: 0.0,
        ..Default::default()
    };
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.rows.len(), 1);
    let row = &report.rows[0];
    assert!(row.mse_mean >= 0.0);
    assert_eq!(row.mse_std, 0.0);
    assert_eq!(row.repetitions.len(), 1);
}

#[test]
fn noise_free_near_interpolation_curve() {
    let cfg = BenchmarkConfig {
        functions: vec![TargetFunction::F2],
        methods: vec![Method::Krr],
        train_sizes: vec![25, 300],
        noise_variance: 0.0,
        repetitions: 2,
        grids: GridSearchConfig {
            lambda_grid: vec![1e-8],
            ..Default::default()
        },
        ..Default::default()
    };
    let curve = learning_curve(&cfg).unwrap();
    let series = curve.series(TargetFunction::F2, Method::Krr);
    assert_eq!(series.len(), 2);
    assert!(series[1].mse_mean <= 1e-3, "{}", series[1].mse_mean);
}

#[test]
fn unlabeled_variant_runs() {
    let cfg = BenchmarkConfig {
        functions: vec![TargetFunction::F3],
        methods: vec![Method::Lfk3],
        train_sizes: vec![50],
        unlabeled_size: 300,
        repetitions: 2,
        ..Default::default()
    };
    let report = run_benchmark(&cfg).unwrap();
    let row = &report.rows[0];
    assert_eq!(row.failures, 0);
    assert!(row.mse_mean < 0.1, "{}", row.mse_mean);
}

#[test]
fn pool_file_feeds_cross_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pool.csv");
    let pool = generate_pool(
        TargetFunction::F1,
        200,
        NoiseSpec::gaussian(0.01).unwrap(),
        7,
    )
    .unwrap();
    write_samples(&path, &pool).unwrap();
    let back = read_samples(&path).unwrap();
    assert_eq!(back, pool);
    let split = split_pool(&back, 60, 20, 50, 1).unwrap();
    let cfg = GridSearchConfig {
        sigma_grid: vec![0.25, 0.5, 1.0],
        lambda_grid: vec![1e-4, 1e-2],
        ..Default::default()
    };
    let cv = cross_validate(&split.train, Method::Lfk3, &cfg).unwrap();
    assert_eq!(cv.table.len(), 6);
    assert!(cv.best_cv_mse.is_finite());
}
