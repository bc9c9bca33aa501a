use nalgebra::DMatrix;
use oscnet::diagnostics::{
    classify_event, dissipation_tail, drift_estimate, gaussian_stationary_covariance, gibbs_covariance,
    gibbs_invariance_test, lyapunov_residual, observable_decay_fit, DecayOptions, DriftConfig, EventClass,
    EventFrequencies, GibbsOptions, GibbsSampler, Observable,
};
use oscnet::dynamics::{integrate, prepare_state, IntegrateOptions, Model, Placement, TimescaleRule};
use oscnet::potentials::PotentialSpec;
use oscnet::rng;
use proptest::prelude::*;

fn harmonic_chain(len: usize, temps: (f64, f64)) -> Model {
    Model::chain(
        len,
        Some(PotentialSpec::isotropic_quadratic(1.0, 1).unwrap()),
        PotentialSpec::isotropic_quadratic(1.0, 1).unwrap(),
        1.0,
        temps,
    )
    .unwrap()
}

fn soft_pair() -> Model {
    Model::chain(
        2,
        Some(PotentialSpec::soft_power(2.0, 1).unwrap()),
        PotentialSpec::soft_power(4.0, 1).unwrap(),
        1.0,
        (1.0, 1.0),
    )
    .unwrap()
}

fn drift_config(theta: f64, ensemble: usize) -> DriftConfig {
    serde_json::from_value(serde_json::json!({
        "theta": theta, "t_star": 1.0, "ensemble": ensemble, "energy_grid": [10.0, 100.0],
        "lambda": 0.5, "h0": 0.01
    }))
    .unwrap()
}

fn event_class() -> impl Strategy<Value = EventClass> {
    prop_oneof![Just(EventClass::A1), Just(EventClass::A2), Just(EventClass::A3)]
}

proptest! {
    #[test]
    fn event_frequencies_sum_to_one(classes in proptest::collection::vec(event_class(), 1..200)) {
        let f = EventFrequencies::tally(&classes);
        prop_assert!((f.a1 + f.a2 + f.a3 - 1.0).abs() < 1e-12);
        prop_assert!(f.a1 >= 0.0 && f.a2 >= 0.0 && f.a3 >= 0.0);
    }

    #[test]
    fn first_exit_decides_the_class(path in proptest::collection::vec(0.1f64..5.0, 1..50)) {
        // Oracle: scan for the first sample outside [1/2, 2].
        let expected = path
            .iter()
            .find_map(|&h| if h < 0.5 { Some(EventClass::A2) } else if h > 2.0 { Some(EventClass::A3) } else { None })
            .unwrap_or(EventClass::A1);
        let mut trace = integrate(&harmonic_chain(2, (1.0, 1.0)), &harmonic_chain(2, (1.0, 1.0)).zero_state(),
            &IntegrateOptions::new(0.01, 0.01), &mut rng::seed_stream(0, 0)).unwrap();
        trace.energy = path;
        prop_assert_eq!(classify_event(&trace, 1.0).unwrap(), expected);
    }
}

#[test]
fn equal_temperatures_recover_the_gibbs_covariance() {
    let m = harmonic_chain(4, (1.5, 1.5));
    let oracle = gaussian_stationary_covariance(&m).unwrap();
    let gibbs = gibbs_covariance(&m, 1.5).unwrap();
    let diff = (&oracle.covariance - &gibbs).abs().max();
    assert!(diff < 1e-10, "{diff}");
    assert!(oracle.residual < 1e-10);
    assert!(oracle.spectral_abscissa() < 0.0);
}

#[test]
fn unequal_temperatures_interpolate_in_the_middle() {
    let m = harmonic_chain(3, (1.0, 2.0));
    let s = gaussian_stationary_covariance(&m).unwrap().covariance;
    let kinetic = s[(1, 1)];
    assert!(kinetic > 1.0 && kinetic < 2.0, "{kinetic}");
    assert!(s[(0, 0)] < s[(2, 2)]);
    // The oracle solves A Σ + Σ Aᵀ + 2D = 0 to rounding.
    let g = gaussian_stationary_covariance(&m).unwrap();
    assert!(lyapunov_residual(&g.drift, &g.diffusion, &g.covariance) < 1e-10);
}

#[test]
fn rejection_sampler_matches_quadrature() {
    let m = soft_pair();
    let sampler = GibbsSampler::new(&m, 1.0).unwrap();
    assert_eq!(sampler.name(), "rejection");
    let mut stream = rng::seed_stream(11, 0);
    let n = 20_000;
    let (mut sum, mut sum_sq, mut p_sq) = (0.0, 0.0, 0.0);
    for _ in 0..n {
        let z = sampler.sample(&m, &mut stream);
        let x = z.q[0] * z.q[0];
        sum += x;
        sum_sq += x * x;
        p_sq += z.p[0] * z.p[0];
    }
    let mean = sum / n as f64;
    let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();

    // ⟨q₀²⟩ under e^{−U(q₀) − U(q₁) − V(q₁ − q₀)} by a midpoint rule.
    let density = |a: f64, b: f64| {
        let d = b - a;
        (-(1.0 + a * a) - (1.0 + b * b) - (1.0 + d * d).powi(2)).exp()
    };
    let (mut z, mut w) = (0.0, 0.0);
    let cells = 600;
    let width = 12.0 / cells as f64;
    for i in 0..cells {
        for j in 0..cells {
            let a = -6.0 + (i as f64 + 0.5) * width;
            let b = -6.0 + (j as f64 + 0.5) * width;
            let rho = density(a, b);
            z += rho;
            w += a * a * rho;
        }
    }
    let exact = w / z;
    assert!((mean - exact).abs() < 4.0 * se, "{mean} ± {se} vs {exact}");
    assert!((p_sq / n as f64 - 1.0).abs() < 0.05);
}

#[test]
fn gibbs_start_is_invariant_at_equal_temperature() {
    let m = harmonic_chain(3, (1.0, 1.0));
    let opts = GibbsOptions {
        observables: vec![Observable::Energy, Observable::MomentumSquared { vertex: 1, component: 0 }],
        samples: 4000,
        t_check: 2.0,
        h: 0.01,
        temperature: None,
    };
    let r = gibbs_invariance_test(&m, &opts, 3).unwrap();
    assert!(r.equal_temperatures);
    assert!(r.max_abs_z < 4.0, "{}", r.max_abs_z);
}

#[test]
fn wrong_temperature_start_drifts_away() {
    let m = harmonic_chain(3, (1.0, 1.0));
    let opts = GibbsOptions {
        observables: vec![Observable::Energy],
        samples: 2000,
        t_check: 5.0,
        h: 0.01,
        temperature: Some(2.0),
    };
    let r = gibbs_invariance_test(&m, &opts, 3).unwrap();
    assert!(r.observables[0].z < -3.0, "{}", r.observables[0].z);
}

#[test]
fn unequal_temperatures_need_an_explicit_sampling_temperature() {
    let m = harmonic_chain(3, (1.0, 2.0));
    let opts = GibbsOptions {
        observables: vec![Observable::Energy],
        samples: 10,
        t_check: 1.0,
        h: 0.01,
        temperature: None,
    };
    assert!(gibbs_invariance_test(&m, &opts, 0).is_err());
}

#[test]
fn zero_temperature_drift_is_a_pure_dissipation_factor() {
    let m = harmonic_chain(3, (0.0, 0.0));
    let z0 = prepare_state(&m, 10.0, Placement::Interaction).unwrap();
    let theta = 0.3;
    let r = drift_estimate(&m, &z0, &drift_config(theta, 100), 0.01, 1).unwrap();
    // Every member follows the same noise-free path.
    assert!(r.se < 1e-12);
    assert!(r.mean <= 1.0);
    let predicted = (-theta * r.mean_dissipation).exp();
    assert!((r.mean - predicted).abs() < 1e-3 * predicted, "{} vs {predicted}", r.mean);
}

#[test]
fn drift_rejects_theta_beyond_the_temperature_bound() {
    let m = harmonic_chain(3, (1.0, 2.0));
    let z0 = prepare_state(&m, 10.0, Placement::Interaction).unwrap();
    assert!(drift_estimate(&m, &z0, &drift_config(0.5, 100), 0.01, 1).is_err());
    assert!(drift_estimate(&m, &z0, &drift_config(0.49, 100), 0.01, 1).is_ok());
}

#[test]
fn generous_dissipation_threshold_is_almost_always_met() {
    let m = harmonic_chain(3, (1.0, 2.0));
    let z0 = prepare_state(&m, 50.0, Placement::Interaction).unwrap();
    let rule = TimescaleRule::new(0.5, 2.0, 2.0).unwrap();
    let r = dissipation_tail(&m, &z0, &rule, 1e3, 200, 0.01, 2).unwrap();
    assert!(r.probability > 0.95, "{}", r.probability);
    assert!(r.ci95.0 <= r.probability && r.probability <= r.ci95.1);
}

#[test]
fn monte_carlo_estimates_are_seed_reproducible() {
    let m = harmonic_chain(3, (1.0, 2.0));
    let z0 = prepare_state(&m, 10.0, Placement::Interaction).unwrap();
    let a = drift_estimate(&m, &z0, &drift_config(0.25, 200), 0.01, 7).unwrap();
    let b = drift_estimate(&m, &z0, &drift_config(0.25, 200), 0.01, 7).unwrap();
    let c = drift_estimate(&m, &z0, &drift_config(0.25, 200), 0.01, 8).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_ne!(a.mean.to_bits(), c.mean.to_bits());
}

#[test]
fn constant_observable_has_no_decay_to_fit() {
    let m = harmonic_chain(3, (1.0, 2.0));
    let z0 = prepare_state(&m, 5.0, Placement::Interaction).unwrap();
    let opts = DecayOptions {
        observable: Observable::Constant,
        horizon: 2.0,
        h: 0.05,
        record_every: 4,
        ensemble: 64,
        fit_start: 0.0,
        burn_in: Some(5.0),
        reference_time: 10.0,
    };
    let r = observable_decay_fit(&m, &z0, &opts, 0).unwrap();
    assert!(r.coupled.iter().all(|&d| d == 0.0));
    assert!(r.inconclusive && r.rate.is_none());
    assert!(r.oracle_rate.is_some());
}

#[test]
fn oracle_covariance_is_symmetric_positive_definite() {
    let m = harmonic_chain(5, (0.5, 3.0));
    let s = gaussian_stationary_covariance(&m).unwrap().covariance;
    assert!((&s - s.transpose()).abs().max() < 1e-12);
    let sym: DMatrix<f64> = 0.5 * (&s + s.transpose());
    assert!(sym.cholesky().is_some());
}
