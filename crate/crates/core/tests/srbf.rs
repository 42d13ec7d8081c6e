use mfuq_core::model::{taylor_fidelity, FidelityModel, FnFamily, ParamDomain};
use mfuq_core::srbf::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn taus(n: usize) -> TauSamples {
    TauSamples::draw(7, &SrbfConfig { theta: n, ..Default::default() }).unwrap()
}

fn fast_options(mode: CenterMode, iterations: usize) -> SrbfOptions {
    SrbfOptions {
        mode,
        config: SrbfConfig { theta: 100, loocv_taus: 50, ..Default::default() },
        pso: PsoConfig { iterations: 60, ..Default::default() },
        seed: 3,
        stop: SrbfStop { max_iterations: Some(iterations), max_cost: None },
        ..Default::default()
    }
}

fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| r.gen()).collect()).collect()
}

fn benchmark_sets(levels: usize, sizes: &[usize]) -> Vec<TrainingSet> {
    let pts = random_points(sizes[0], 2, 21);
    (1..=levels)
        .map(|a| {
            TrainingSet::from_pairs(
                a,
                2,
                pts[..sizes[a - 1]].iter().map(|p| (p.clone(), taylor_fidelity(a, p).unwrap())),
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn kernel_and_weight_examples() {
    let c = vec![vec![0.0], vec![1.0]];
    assert!((kernel_value(&c, &[1.0, -1.0], &[0.25], 1.0) + 0.5).abs() < 1e-15);
    assert_eq!(kernel_value(&[vec![0.3]], &[5.0], &[0.3], 2.2), 0.0);

    let w = fit_weights(&c, &[0.0, 1.0], &c, 1.0, Solver::Qr).unwrap();
    assert!((w[0] - 1.0).abs() < 1e-15 && w[1].abs() < 1e-15);

    let w = fit_weights(&c, &[0.0, 0.0], &[vec![0.5]], 1.0, Solver::Qr).unwrap();
    assert_eq!(w, vec![0.0]);

    assert!(fit_weights(&[vec![0.4]], &[1.0], &[vec![0.4]], 1.5, Solver::Qr).is_err());
    assert!(fit_weights(&c, &[0.0, 1.0], &[vec![0.2], vec![0.3], vec![0.4]], 1.0, Solver::Qr).is_err());
}

#[test]
fn band_of_four_values() {
    assert!((band_width(&mut [4.0, 2.0, 1.0, 3.0]) - 2.85).abs() < 1e-12);
    assert_eq!(band_width(&mut [1.5; 10]), 0.0);
}

#[test]
fn centers_by_k_means() {
    let p = vec![vec![0.0], vec![0.1], vec![0.9], vec![1.0]];
    let c = select_centers(&p, 2).unwrap();
    let mut xs: Vec<f64> = c.iter().map(|c| c[0]).collect();
    xs.sort_by(f64::total_cmp);
    assert!((xs[0] - 0.05).abs() < 1e-12 && (xs[1] - 0.95).abs() < 1e-12);
    assert_eq!(select_centers(&p, 4).unwrap(), p);
    assert!((select_centers(&p, 1).unwrap()[0][0] - 0.5).abs() < 1e-15);
    assert!(select_centers(&p, 5).is_err());
}

#[test]
fn least_squares_fit_satisfies_the_normal_equations() {
    let pts = random_points(30, 2, 5);
    let vals: Vec<f64> = pts.iter().map(|p| (3.0 * p[0]).sin() + p[1] * p[1]).collect();
    let centers = select_centers(&pts, 8).unwrap();
    for solver in [Solver::Qr, Solver::NormalEquations] {
        for tau in [1.0, 1.7, 2.9] {
            let w = fit_weights(&pts, &vals, &centers, tau, solver).unwrap();
            let r = residuals(&pts, &vals, &centers, &w, tau);
            let g = normal_residual(&pts, &centers, &r, tau);
            let scale: f64 = vals.iter().map(|v| v * v).sum::<f64>().sqrt() * pts.len() as f64;
            assert!(g.iter().all(|x| x.abs() <= 1e-8 * scale), "{solver:?} {tau}: {g:?}");
        }
    }
}

#[test]
fn loocv_examples() {
    let t = taus(100);
    let lin = TrainingSet::from_pairs(1, 1, (0..8).map(|i| {
        let x = i as f64 / 7.0;
        (vec![x], 2.0 * x + 1.0)
    }))
    .unwrap();
    assert_eq!(loocv_select_k(&lin, &[8], &t, Solver::Qr).unwrap().k_star, 8);
    assert!(loocv_rmse(&lin, 8, &t, Solver::Qr).unwrap() < 0.1);
    assert!(loocv_select_k(&TrainingSet::from_pairs(1, 1, [(vec![0.5], 1.0)]).unwrap(), &[1], &t, Solver::Qr).is_err());

    // linear trend plus alternating frozen noise
    let noisy = TrainingSet::from_pairs(1, 1, (0..16).map(|i| {
        let x = i as f64 / 15.0;
        (vec![x], x + if i % 2 == 0 { 0.1 } else { -0.1 })
    }))
    .unwrap();
    let all: Vec<usize> = (1..=16).collect();
    let choice = loocv_select_k(&noisy, &all, &t, Solver::Qr).unwrap();
    let score = |k: usize| choice.scores.iter().find(|s| s.0 == k).unwrap().1;
    assert!(choice.k_star < 16);
    assert!(score(choice.k_star) < score(16));
    assert!(choice.scores.iter().all(|s| s.1 >= score(choice.k_star)));
}

#[test]
fn regression_beats_interpolation_on_noisy_data() {
    let t = taus(100);
    let truth = |x: f64| (2.0 * x).sin();
    let mut r = ChaCha8Rng::seed_from_u64(12);
    let data = TrainingSet::from_pairs(1, 1, (0..20).map(|i| {
        let x = i as f64 / 19.0;
        (vec![x], truth(x) + 0.05 * (2.0 * r.gen::<f64>() - 1.0))
    }))
    .unwrap();
    let cand: Vec<usize> = (1..20).collect();
    let k = loocv_select_k(&data, &cand, &t, Solver::Qr).unwrap().k_star;
    let reg = SrbfSurrogate::fit(&data, k, &t, Solver::Qr).unwrap();
    let int = SrbfSurrogate::fit(&data, 20, &t, Solver::Qr).unwrap();
    let rmse = |s: &SrbfSurrogate| {
        let n = 1000;
        ((0..=n).map(|i| {
            let x = i as f64 / n as f64;
            (s.predict(&[x]) - truth(x)).powi(2)
        }).sum::<f64>() / (n + 1) as f64).sqrt()
    };
    assert!(rmse(&reg) <= rmse(&int), "{} vs {}", rmse(&reg), rmse(&int));
}

#[test]
fn select_fidelity_examples() {
    assert_eq!(select_fidelity(&[0.8, 0.1], &[1.0, 8.0]), 1);
    assert_eq!(select_fidelity(&[0.8, 6.5], &[1.0, 8.0]), 2);
    assert_eq!(select_fidelity(&[0.8, 6.4], &[1.0, 8.0]), 1);
    assert_eq!(select_fidelity(&[0.3], &[2.0]), 1);
    for scale in [1e-3, 0.5, 7.0, 1e6] {
        let c: Vec<f64> = [1.0, 8.0, 64.0].iter().map(|g| g * scale).collect();
        assert_eq!(select_fidelity(&[0.2, 1.9, 13.0], &c), 2);
    }
}

#[test]
fn identical_fidelities_collapse() {
    let t = taus(100);
    let pts = random_points(12, 2, 4);
    let f = |p: &[f64]| (p[0] + 2.0 * p[1]).cos();
    let sets: Vec<TrainingSet> = [12, 8, 5]
        .iter()
        .enumerate()
        .map(|(a, &n)| TrainingSet::from_pairs(a + 1, 2, pts[..n].iter().map(|p| (p.clone(), f(p)))).unwrap())
        .collect();
    let mf = build_interpolating(&sets, &t, &[1.0, 2.0, 4.0]).unwrap();
    for y in random_points(200, 2, 8) {
        for e in mf.error_layers() {
            assert!(e.predict(&y).abs() <= 1e-10);
            for i in 0..t.len() {
                assert!(e.kernel_predict(&y, i).abs() <= 1e-10);
            }
        }
        assert!((mf.predict(&y) - mf.base().predict(&y)).abs() <= 1e-10);
    }
    let single = build_interpolating(&sets[..1], &t, &[1.0]).unwrap();
    let y = [0.3, 0.6];
    assert_eq!(single.predict(&y), single.base().predict(&y));
    assert_eq!(single.select_fidelity(&y), 1);
}

#[test]
fn two_level_stack_interpolates_the_top_set() {
    let t = taus(100);
    let sets = benchmark_sets(2, &[15, 7]);
    let mf = build_interpolating(&sets, &t, &[1.0, 8.0]).unwrap();
    let scale = 1.0 + sets[1].values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (p, v) in sets[1].points().iter().zip(sets[1].values()) {
        assert!((mf.predict(p) - v).abs() <= 1e-8 * scale);
        assert!(mf.uncertainty(p) <= 1e-8);
    }
    for (p, v) in sets[0].points().iter().zip(sets[0].values()) {
        assert!((mf.predict_level(p, 1) - v).abs() <= 1e-8 * scale);
    }
}

#[test]
fn stack_is_the_sum_of_its_layers() {
    let t = taus(100);
    let sets = benchmark_sets(4, &[20, 14, 9, 5]);
    let mf = build_interpolating(&sets, &t, &[1.0, 8.0, 64.0, 512.0]).unwrap();
    for y in random_points(100, 2, 30) {
        let sum: f64 = mf.layers().iter().map(|l| l.predict(&y)).sum();
        assert!((mf.predict(&y) - sum).abs() <= 1e-14 * sum.abs().max(1.0));
        let u = mf.component_uncertainties(&y);
        assert!(u.iter().all(|&u| u >= 0.0));
        let total = u.iter().map(|u| u * u).sum::<f64>().sqrt();
        assert!((mf.uncertainty(&y) - total).abs() <= 1e-15 * total.max(1.0));
    }
}

#[test]
fn infill_avoids_training_points() {
    let t = taus(100);
    let sets = benchmark_sets(1, &[9]);
    let mf = build_interpolating(&sets, &t, &[1.0]).unwrap();
    let inf = infill_point(&mf, &sets, &PsoConfig::default()).unwrap();
    assert!(!inf.degenerate && inf.uncertainty > 0.0);
    for p in sets[0].points() {
        let d: f64 = p.iter().zip(&inf.point).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(d > 1e-9);
    }
}

#[test]
fn flat_uncertainty_is_degenerate() {
    let t = taus(50);
    let set = TrainingSet::from_pairs(1, 1, [(vec![0.2], 0.0), (vec![0.9], 0.0)]).unwrap();
    let mf = build_interpolating(std::slice::from_ref(&set), &t, &[1.0]).unwrap();
    let inf = infill_point(&mf, &[set], &PsoConfig::default()).unwrap();
    assert!(inf.degenerate);
    assert_eq!(inf.point, vec![0.5]);
}

#[test]
fn infill_matches_a_grid_search_in_one_dimension() {
    let t = taus(200);
    let set = TrainingSet::from_pairs(1, 1, [(vec![0.0], 0.0), (vec![0.15], 0.4), (vec![1.0], 1.0)]).unwrap();
    let mf = build_interpolating(std::slice::from_ref(&set), &t, &[1.0]).unwrap();
    let (mut gx, mut gu) = (0.0, f64::NEG_INFINITY);
    for i in 0..10_000 {
        let x = i as f64 / 9999.0;
        let u = mf.uncertainty(&[x]);
        if u > gu {
            (gx, gu) = (x, u);
        }
    }
    let inf = infill_point(&mf, &[set], &PsoConfig::default()).unwrap();
    assert!((inf.point[0] - gx).abs() <= 1e-3, "{} vs {gx}", inf.point[0]);
    assert!(inf.uncertainty >= gu * (1.0 - 1e-9));
}

#[test]
fn pso_finds_the_global_peak_of_a_multimodal_function() {
    let f = |x: f64| (13.0 * x).sin() * (27.0 * x).sin() + 0.3 * x;
    let d = ParamDomain::unit(1);
    let best = pso_maximize(&d, &PsoConfig::default(), |p| Ok(p.iter().map(|y| f(y[0])).collect())).unwrap();
    let grid = (0..1000).map(|i| f(i as f64 / 999.0)).fold(f64::NEG_INFINITY, f64::max);
    assert!(best.value >= grid, "{} < {grid}", best.value);

    let flat = pso_maximize(&ParamDomain::unit(3), &PsoConfig::default(), |p| Ok(vec![1.0; p.len()])).unwrap();
    assert_eq!(flat.unit_point, vec![0.5; 3]);
}

#[test]
fn initial_cost_of_the_benchmark() {
    let mut m = FidelityModel::taylor_benchmark();
    let out = adaptive_run(&mut m, &fast_options(CenterMode::Auto, 0), |v| Ok(v.cost)).unwrap();
    assert_eq!(out.records, vec![187_245.0]);
    assert_eq!(out.stop, SrbfStopReason::Iterations);
    assert!(out.training.iter().all(|t| t.len() == 5));
}

#[test]
fn interpolation_mode_run_keeps_the_interpolation_property() {
    let mut m = FidelityModel::taylor_benchmark();
    let opts = fast_options(CenterMode::Interpolation, 4);
    let out = adaptive_run(&mut m, &opts, |v| {
        for (layer, data) in v.surrogate.layers().iter().zip(v.surrogate.layer_data()) {
            let scale = 1.0 + data.values().iter().fold(0.0f64, |a, b| a.max(b.abs()));
            for (p, g) in data.points().iter().zip(data.values()) {
                for i in 0..layer.taus().len() {
                    assert!((layer.kernel_predict(p, i) - g).abs() <= 1e-8 * scale);
                }
                assert!(layer.uncertainty(p) <= 1e-8);
            }
        }
        Ok(v.training.iter().map(|t| t.len()).collect::<Vec<_>>())
    })
    .unwrap();
    assert_eq!(out.records.len(), 5);
    let mut before = out.records[0].clone();
    for (batch, after) in out.batches.iter().zip(&out.records[1..]) {
        let (_, k) = &batch[0];
        assert!(after.iter().zip(&before).enumerate().all(|(a, (n, b))| *n == b + usize::from(a < *k) || *n == *b));
        assert!(after[k - 1] == before[k - 1] + 1);
        before = after.clone();
    }
}

#[test]
fn batched_runs_are_deterministic() {
    let run = || {
        let mut m = FidelityModel::taylor_benchmark();
        let opts = SrbfOptions { batch: 2, ..fast_options(CenterMode::Auto, 2) };
        let out = adaptive_run(&mut m, &opts, |v| Ok(v.cost)).unwrap();
        (out.records, out.batches, out.training)
    };
    let a = run();
    assert_eq!(a.1.len(), 2);
    assert!(a.1.iter().all(|b| b.len() == 2));
    assert!(a.2.iter().all(|t| t.provisional_count() == 0));
    let b = run();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    for (x, y) in a.2.iter().zip(&b.2) {
        assert_eq!(x.points(), y.points());
        assert_eq!(x.values(), y.values());
    }
}

#[test]
fn one_level_family_always_picks_level_one() {
    let mut m = FidelityModel::new(
        ParamDomain::new(vec![(-1.0, 1.0)]).unwrap(),
        FnFamily::new(1, |_: usize, y: &[f64]| y[0] * y[0]),
    );
    let out = adaptive_run(&mut m, &fast_options(CenterMode::Regression, 3), |v| Ok(v.cost)).unwrap();
    assert!(out.batches.iter().all(|b| b.iter().all(|(_, k)| *k == 1)));
    assert_eq!(out.records, vec![3.0, 4.0, 5.0, 6.0]);
}
