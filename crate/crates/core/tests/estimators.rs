use eqtax_core::estimate::{fit_boltzmann_binned, fit_pareto_tail, TailData};
use eqtax_core::{BinTable, CapitalModel, LaborModel};

const SEEDS: u64 = 16;

fn rms(errors: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = errors.collect();
    (v.iter().map(|e| e * e).sum::<f64>() / v.len() as f64).sqrt()
}

#[test]
fn hill_error_shrinks_with_sample_size() {
    let m = CapitalModel::new(2.4, 1e5, 1.0).unwrap();
    let errs: Vec<f64> = [10_000usize, 100_000, 1_000_000]
        .iter()
        .map(|&n| {
            rms((0..SEEDS).map(|s| {
                let x = m.sample(n, 1000 + s);
                fit_pareto_tail(TailData::Sample(&x), 1e5)
                    .unwrap()
                    .gamma_hat
                    - 2.4
            }))
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    // (γ-1)/√n at n = 10^6
    assert!(errs[2] < 3.0 * 1.4e-3, "{errs:?}");
}

#[test]
fn boltzmann_error_shrinks_with_sample_size() {
    let m = LaborModel::new(28_013.0, 1.0).unwrap();
    let edges: Vec<f64> = (0..=100).map(|k| k as f64 * 1e3).collect();
    let errs: Vec<f64> = [10_000usize, 100_000, 1_000_000]
        .iter()
        .map(|&n| {
            rms((0..SEEDS).map(|s| {
                let x = m.sample(n, 2000 + s);
                let bins = BinTable::histogram(&x, &edges).unwrap();
                let fit = fit_boltzmann_binned(&bins, 13_250.0, 100_000.0).unwrap();
                fit.x_bar_hat / 28_013.0 - 1.0
            }))
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn binned_and_micro_tail_fits_agree() {
    let m = CapitalModel::new(2.40515, 1e5, 1.0).unwrap();
    for seed in [31, 32, 33] {
        let x = m.sample(100_000, seed);
        let micro = fit_pareto_tail(TailData::Sample(&x), 1e5).unwrap();
        let bins = BinTable::sparse_histogram(&x, 1e5, 1e3).unwrap();
        let binned = fit_pareto_tail(TailData::Binned(&bins), 1e5).unwrap();
        assert!(
            (micro.gamma_hat - binned.gamma_hat).abs() < 2.0 * micro.stderr,
            "seed {seed}: {} vs {}",
            micro.gamma_hat,
            binned.gamma_hat
        );
    }
}

#[test]
fn exact_bins_recover_belgian_mean() {
    let m = LaborModel::new(170.6e9 / 6.09e6, 6.09e6).unwrap();
    let bins = BinTable::from_labor_model(&m, 0.0, 100_000.0, 1_000.0).unwrap();
    let fit = fit_boltzmann_binned(&bins, 13_250.0, 100_000.0).unwrap();
    assert!((fit.x_bar_hat / m.x_bar() - 1.0).abs() < 1e-9);
    assert!((fit.n_lab_hat / 6.09e6 - 1.0).abs() < 1e-9);
}
