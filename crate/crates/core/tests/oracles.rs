use nalgebra::DMatrix;
use occam_core::oracle::mc::rng_for;
use occam_core::oracle::quadrature::{integrate, integrate_2d};
use occam_core::oracle::{
    mc_ellipsoid_volume, quad_evidence_known_sigma, quad_evidence_unknown_sigma, quad_marginalization,
    quad_student_t_normalization, random_instance, OracleConfig,
};
use occam_core::{
    fit, log_evidence, log_occam_factor, max_error_norm, parsimonious_prior, posterior_known_sigma,
    posterior_unknown_sigma, rank_reports, BoundMode, DesignMatrix, NoiseModel, PriorSpec,
};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

fn cfg() -> OracleConfig {
    OracleConfig {
        mc_samples: 200_000,
        ..OracleConfig::default()
    }
}

#[test]
fn known_sigma_evidence_matches_quadrature() {
    let mut rng = rng_for(11, "known");
    for i in 0..20 {
        let m = 1 + i % 2;
        let n = rng.random_range(m + 1..=8);
        let sigma = rng.random_range(0.2..2.5);
        let (x, y) = random_instance(&mut rng, n, m, sigma);
        let f = fit(&x, &y).unwrap();
        let mode = if i % 3 == 0 { BoundMode::Approximate } else { BoundMode::Exact };
        let spec = PriorSpec::known(sigma).with_k(rng.random_range(0.5..6.0)).with_bound_mode(mode);
        let o = quad_evidence_known_sigma(&x, &y, &f, &spec, &cfg()).unwrap();
        assert!(o.pass, "{o:?}");
    }
}

#[test]
fn unknown_sigma_evidence_matches_quadrature() {
    let mut rng = rng_for(11, "unknown");
    for _ in 0..20 {
        let n = rng.random_range(2..=20);
        let m = rng.random_range(1..n.min(7));
        let sigma = rng.random_range(0.1..4.0);
        let (x, y) = random_instance(&mut rng, n, m, sigma);
        let f = fit(&x, &y).unwrap();
        let spec = PriorSpec::jeffreys().with_k(rng.random_range(0.0..8.0));
        let o = quad_evidence_unknown_sigma(&f, &x, &spec, &cfg()).unwrap();
        assert!(o.pass, "{o:?}");
    }
}

#[test]
fn student_t_mass_and_marginalization() {
    let mut rng = rng_for(11, "student");
    for n in [2usize, 5, 50] {
        let (x, y) = random_instance(&mut rng, n, 1, 1.0);
        let post = posterior_unknown_sigma(&fit(&x, &y).unwrap(), &x).unwrap();
        let o = quad_student_t_normalization(&post, &cfg()).unwrap();
        assert!(o.pass, "{o:?}");
    }
    for _ in 0..20 {
        let m = rng.random_range(1..=2);
        let n = rng.random_range(m + 1..=10);
        let (x, y) = random_instance(&mut rng, n, m, 0.5);
        let f = fit(&x, &y).unwrap();
        let beta: Vec<f64> = f.beta_hat.iter().map(|b| b + rng.random_range(-1.5..1.5)).collect();
        let o = quad_marginalization(&beta, &f, &x, &cfg()).unwrap();
        assert!(o.pass, "{o:?}");
    }
}

#[test]
fn normal_posterior_mass_and_one_sigma_ellipse() {
    let mut rng = rng_for(11, "normal");
    let (x, y) = random_instance(&mut rng, 7, 2, 0.8);
    let f = fit(&x, &y).unwrap();
    let nm = NoiseModel::new(0.8, 7).unwrap();
    let post = posterior_known_sigma(&f, &x, &nm).unwrap();
    let cov = x.gram_inverse() * 0.64;
    let h: Vec<f64> = (0..2).map(|j| 12.0 * cov[(j, j)].sqrt()).collect();
    let b = &f.beta_hat;
    let mass = integrate_2d(
        |u, v| post.density(&[u, v]).unwrap(),
        (b[0] - h[0], b[0] + h[0]),
        (b[1] - h[1], b[1] + h[1]),
        0.0,
        1e-9,
    );
    assert!((mass.value - 1.0).abs() < 1e-6);

    // Inside (β−β̂)ᵀG(β−β̂) ≤ σ², integrate v over the chord at each u.
    let g = x.gram();
    let (g00, g01, g11) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
    let half_u = (0.64 * g11 / (g00 * g11 - g01 * g01)).sqrt();
    let inside = integrate(
        |du| {
            let disc = (g01 * du).powi(2) - g11 * (g00 * du * du - 0.64);
            if disc <= 0.0 {
                return 0.0;
            }
            let (lo, hi) = ((-g01 * du - disc.sqrt()) / g11, (-g01 * du + disc.sqrt()) / g11);
            integrate(|dv| post.density(&[b[0] + du, b[1] + dv]).unwrap(), lo, hi, 0.0, 1e-12).value
        },
        -half_u,
        half_u,
        0.0,
        1e-10,
    );
    assert!((inside.value - (1.0 - (-0.5f64).exp())).abs() < 1e-7, "{}", inside.value);
}

#[test]
fn known_sigma_posterior_ignores_k() {
    let mut rng = rng_for(11, "k_free");
    let (x, y) = random_instance(&mut rng, 9, 3, 1.0);
    let f = fit(&x, &y).unwrap();
    let post = posterior_known_sigma(&f, &x, &NoiseModel::new(1.0, 9).unwrap()).unwrap();
    let point = [0.1, -0.2, 0.3];
    let base = post.log_density(&point).unwrap();
    for k in [3.0, 6.0, 12.0] {
        let _ = parsimonious_prior(&f, &x, &PriorSpec::known(1.0).with_k(k)).unwrap();
        let again = posterior_known_sigma(&f, &x, &NoiseModel::new(1.0, 9).unwrap()).unwrap();
        assert_eq!(again.log_density(&point).unwrap().to_bits(), base.to_bits());
    }
}

#[test]
fn posteriors_peak_at_the_fit() {
    let mut rng = rng_for(11, "argmax");
    let (x, y) = random_instance(&mut rng, 8, 3, 1.0);
    let f = fit(&x, &y).unwrap();
    let normal = posterior_known_sigma(&f, &x, &NoiseModel::new(1.0, 8).unwrap()).unwrap();
    let t = posterior_unknown_sigma(&f, &x).unwrap();
    let (p0, q0) = (normal.log_density(&f.beta_hat).unwrap(), t.log_density(&f.beta_hat).unwrap());
    for j in 0..3 {
        for s in [-1e-4, 1e-4] {
            let mut b = f.beta_hat.clone();
            b[j] += s;
            assert!(normal.log_density(&b).unwrap() < p0);
            assert!(t.log_density(&b).unwrap() < q0);
        }
    }
    let plus: Vec<f64> = f.beta_hat.iter().map(|b| b + 0.3).collect();
    let minus: Vec<f64> = f.beta_hat.iter().map(|b| b - 0.3).collect();
    assert!((t.log_density(&plus).unwrap() - t.log_density(&minus).unwrap()).abs() < 1e-12);
}

#[test]
fn joint_posterior_is_symmetric_under_relabeling() {
    let mut rng = rng_for(11, "relabel");
    let (x, y) = random_instance(&mut rng, 8, 3, 1.0);
    let f = fit(&x, &y).unwrap();
    let xp = x.permute_columns(&[2, 0, 1]).unwrap();
    let fp = fit(&xp, &y).unwrap();
    let beta = [0.3, -0.1, 1.2];
    let a = occam_core::log_joint_posterior_unknown_sigma(&beta, 0.9, &f, &x).unwrap();
    let b = occam_core::log_joint_posterior_unknown_sigma(&[beta[2], beta[0], beta[1]], 0.9, &fp, &xp).unwrap();
    assert!((a - b).abs() < 1e-10);
}

#[test]
fn ellipsoid_volume_by_monte_carlo() {
    let mut rng = rng_for(11, "volume");
    for m in [2usize, 3] {
        let (x, _) = random_instance(&mut rng, 8, m, 1.0);
        let o = mc_ellipsoid_volume(&x, 3.5, &cfg()).unwrap();
        assert!(o.pass, "{o:?}");
    }
}

#[test]
fn factorization_is_exact() {
    let mut rng = rng_for(11, "factorization");
    for _ in 0..200 {
        let n = rng.random_range(2..=60);
        let m = rng.random_range(1..n.min(8));
        let (x, y) = random_instance(&mut rng, n, m, 1.0);
        let f = fit(&x, &y).unwrap();
        let spec = PriorSpec::jeffreys()
            .with_k(rng.random_range(0.0..10.0))
            .with_jeffreys_a(rng.random_range(0.01..100.0));
        let r = log_evidence(&f, &x, &spec).unwrap();
        assert!((r.log_evidence - (r.log_occam + r.log_gof + r.log_common)).abs() <= 1e-12);
    }
}

#[test]
fn noise_column_does_not_help_the_occam_factor() {
    let mut rng = rng_for(11, "nested_sanity");
    for _ in 0..30 {
        let n = rng.random_range(5..40);
        let (x, y) = random_instance(&mut rng, n, 2, 1.0);
        let mut cols: Vec<Vec<f64>> = x.matrix().column_iter().map(|c| c.iter().copied().collect()).collect();
        cols.push((0..n).map(|_| rng.sample(StandardNormal)).collect());
        let wide = DesignMatrix::from_columns(n, &cols).unwrap();
        let spec = PriorSpec::jeffreys();
        let small = log_evidence(&fit(&x, &y).unwrap(), &x, &spec).unwrap();
        let big = log_evidence(&fit(&wide, &y).unwrap(), &wide, &spec).unwrap();
        assert!(big.log_occam < small.log_occam);
        assert!(big.log_gof >= small.log_gof - 1e-12);
    }
}

#[test]
fn occam_factor_strictly_decreases() {
    let mut prev = log_occam_factor(200, 0, 6.0).unwrap();
    for m in 1..=200 {
        let cur = log_occam_factor(200, m, 6.0).unwrap();
        assert!(cur < prev, "m={m}");
        prev = cur;
    }
    let v = log_occam_factor(101, 1, 6.0).unwrap();
    assert!((v - ((PI / 2.0).sqrt() / 16.0).ln()).abs() < 1e-14);
}

#[test]
fn probabilities_do_not_depend_on_a() {
    let with = |a: f64| {
        let mut rng = rng_for(11, "common.data");
        let (x, y) = random_instance(&mut rng, 30, 4, 1.0);
        let reports: Vec<_> = (1..=4)
            .map(|m| {
                let cols: Vec<Vec<f64>> =
                    (0..m).map(|j| x.matrix().column(j).iter().copied().collect()).collect();
                let xm = DesignMatrix::from_columns(30, &cols).unwrap();
                let spec = PriorSpec::jeffreys().with_jeffreys_a(a);
                (format!("m{m}"), log_evidence(&fit(&xm, &y).unwrap(), &xm, &spec).unwrap())
            })
            .collect();
        rank_reports(&reports, None).unwrap()
    };
    let base = with(1.0);
    let scaled = with(1e6);
    for (a, b) in base.entries.iter().zip(&scaled.entries) {
        assert_eq!(a.label, b.label);
        assert_eq!(a.posterior_prob.to_bits(), b.posterior_prob.to_bits());
    }
}

// The evidence integrates the prior over all of coefficient space; keeping
// only the ellipsoid support gives a strictly smaller value.
#[test]
fn truncated_support_evidence_is_smaller() {
    let x = DesignMatrix::from_matrix(DMatrix::from_column_slice(4, 1, &[1.0, 0.5, -0.3, 0.8])).unwrap();
    let y = [1.3, 0.2, -0.9, 1.1];
    let f = fit(&x, &y).unwrap();
    let sigma = 1.0;
    let spec = PriorSpec::known(sigma).with_k(0.5);
    let full = log_evidence(&f, &x, &spec).unwrap().log_evidence;
    let prior = parsimonious_prior(&f, &x, &spec).unwrap();
    let max_e = max_error_norm(&NoiseModel::new(sigma, 4).unwrap(), 0.5, BoundMode::Exact).unwrap().value;
    let half = max_e / x.column_norms()[0];
    let like = |b: f64| {
        let ss: f64 = (0..4).map(|i| (y[i] - x.matrix()[(i, 0)] * b).powi(2)).sum();
        (-ss / 2.0 - 2.0 * (2.0 * PI).ln()).exp()
    };
    let inside = integrate(like, f.beta_hat[0] - half, f.beta_hat[0] + half, 0.0, 1e-12).value;
    let truncated = inside.ln() + prior.log_height;
    assert!(truncated < full);
    assert!(full - truncated > 1e-6);
}
