use hddcor::simulate::{
    generate_example, mc_decisions, mc_rejection_rate, power_curve, power_table_dim,
    replicate_rng, sample_ar_normal, Example, SimConfig,
};
use hddcor_core::calibration::Method;

/// Pooled sample covariance of `reps` draws of `n x d` AR(1) normals.
fn pooled_cov(rho: f64, n: usize, d: usize, reps: u64) -> (Vec<f64>, usize) {
    let mut acc = vec![0.0; d * d];
    let mut count = 0;
    for r in 0..reps {
        let x = sample_ar_normal(n, d, rho, &mut replicate_rng(17, r)).unwrap();
        for row in x.rows() {
            for i in 0..d {
                for j in 0..d {
                    acc[i * d + j] += row[i] * row[j];
                }
            }
        }
        count += n;
    }
    (acc.iter().map(|v| v / count as f64).collect(), count)
}

#[test]
fn white_noise_covariance_is_identity() {
    let (c, total) = pooled_cov(0.0, 50, 4, 200);
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { 1.0 } else { 0.0 };
            let se = if i == j { (2.0 / total as f64).sqrt() } else { 1.0 / (total as f64).sqrt() };
            assert!((c[i * 4 + j] - want).abs() <= 4.0 * se, "({i},{j}) {}", c[i * 4 + j]);
        }
    }
}

#[test]
fn ar_covariance_matches_sigma() {
    let (c, total) = pooled_cov(0.7, 50, 3, 200);
    let sigma = |i: usize, j: usize| 0.7f64.powi((i as i32 - j as i32).abs());
    for i in 0..3 {
        for j in 0..3 {
            // Var of x_i x_j for Gaussians: s_ii s_jj + s_ij^2.
            let se = ((sigma(i, i) * sigma(j, j) + sigma(i, j).powi(2)) / total as f64).sqrt();
            assert!((c[i * 3 + j] - sigma(i, j)).abs() <= 4.0 * se, "({i},{j}) {}", c[i * 3 + j]);
        }
    }
}

#[test]
fn ex3_has_positive_linear_term() {
    let cfg = SimConfig::new(Example::Ex3, 200, 3);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for r in 0..20 {
        let (x, y) = generate_example(&cfg, &mut replicate_rng(3, r)).unwrap();
        let (xs, ys) = (x.as_slice(), y.as_slice());
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        for (a, b) in xs.iter().zip(ys) {
            sxy += a * (b - my);
            sxx += a * a;
            syy += (b - my) * (b - my);
        }
    }
    let corr = sxy / (sxx * syy).sqrt();
    assert!(corr > 0.05, "corr {corr}");
}

#[test]
fn same_seed_same_matrix() {
    let a = sample_ar_normal(7, 5, 0.5, &mut replicate_rng(1, 2)).unwrap();
    let b = sample_ar_normal(7, 5, 0.5, &mut replicate_rng(1, 2)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn reports_are_thread_independent() {
    let mut cfg = SimConfig::new(Example::Ex3, 20, 4);
    cfg.replicates = 120;
    cfg.seed = 99;
    let methods = Method::ALL;
    let serial = mc_decisions(&cfg, &methods).unwrap();
    cfg.threads = 4;
    let parallel = mc_decisions(&cfg, &methods).unwrap();
    assert_eq!(serial, parallel);
    cfg.seed = 100;
    assert_ne!(serial.t_n, mc_decisions(&cfg, &methods).unwrap().t_n);
}

#[test]
fn report_stderr_is_binomial() {
    let mut cfg = SimConfig::new(Example::Ex4, 20, 4);
    cfg.replicates = 200;
    let r = mc_rejection_rate(&cfg).unwrap();
    assert_eq!(r.stderr, (r.rate * (1.0 - r.rate) / 200.0).sqrt());
    assert_eq!((r.q, r.failures), (4, 0));
}

#[test]
fn null_size_is_controlled_for_every_method() {
    for (k, example) in [Example::Ex1, Example::Ex2].into_iter().enumerate() {
        let mut cfg = SimConfig::new(example, 100, 50);
        cfg.replicates = 500;
        cfg.seed = 31 + k as u64;
        let reports = power_curve(&[cfg], &Method::ALL).unwrap();
        let se = (0.05 * 0.95 / 500.0f64).sqrt();
        for r in reports {
            assert!((r.rate - 0.05).abs() <= 3.0 * se, "{example} {}: {}", r.method, r.rate);
        }
    }
}

#[test]
fn power_grows_with_n_on_the_table_grid() {
    let grid: Vec<SimConfig> = [10, 40, 70]
        .iter()
        .map(|&n| {
            let mut c = SimConfig::new(Example::Ex4, n, power_table_dim(n));
            c.replicates = 400;
            c.seed = 5;
            c
        })
        .collect();
    let rates: Vec<f64> = power_curve(&grid, &[]).unwrap().iter().map(|r| r.rate).collect();
    for w in rates.windows(2) {
        assert!(w[1] >= w[0] - 0.05, "{rates:?}");
    }
    assert!(rates[2] > rates[0] + 0.2, "{rates:?}");
}
