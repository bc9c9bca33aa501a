use oscnet::dynamics::{
    forces, hamiltonian, integrate, integrate_deterministic, prepare_state, rescale_state, tau, BathParams,
    DeterministicOptions, IntegrateOptions, Model, Placement, RescaleMode, State, TimescaleRule,
};
use oscnet::graph::NetworkTopology;
use oscnet::potentials::PotentialSpec;
use oscnet::rng;
use proptest::prelude::*;

fn soft_chain(len: usize, dim: usize, pinned: bool) -> Model {
    Model::chain(
        len,
        pinned.then(|| PotentialSpec::soft_power(2.0, dim).unwrap()),
        PotentialSpec::soft_power(4.0, dim).unwrap(),
        1.0,
        (1.0, 2.0),
    )
    .unwrap()
}

fn harmonic_chain(len: usize, temps: (f64, f64)) -> Model {
    Model::chain(
        len,
        Some(PotentialSpec::even_power(2, 1).unwrap()),
        PotentialSpec::even_power(2, 1).unwrap(),
        1.0,
        temps,
    )
    .unwrap()
}

fn state(len: usize, dim: usize) -> impl Strategy<Value = State> {
    (
        proptest::collection::vec(-2.0f64..2.0, len * dim),
        proptest::collection::vec(-2.0f64..2.0, len * dim),
    )
        .prop_map(move |(p, q)| State { dim, p, q })
}

fn energy_of(model: &Model, s: &State) -> f64 {
    hamiltonian(model, s).unwrap().h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn energy_split_adds_up(len in 2usize..6, pinned in any::<bool>(), s in state(6, 2)) {
        let m = soft_chain(len, 2, pinned);
        let s = State { dim: 2, p: s.p[..2 * len].to_vec(), q: s.q[..2 * len].to_vec() };
        let e = hamiltonian(&m, &s).unwrap();
        prop_assert!((e.hc + e.hi - e.h).abs() <= 1e-12 * (1.0 + e.h.abs()));
        prop_assert!(e.hi >= 0.0);
    }

    #[test]
    fn forces_are_minus_the_energy_gradient(s in state(4, 2), pinned in any::<bool>()) {
        let m = soft_chain(4, 2, pinned);
        let f = forces(&m, &s).unwrap();
        for (i, &fi) in f.iter().enumerate() {
            let eps = 1e-5;
            let (mut a, mut b) = (s.clone(), s.clone());
            a.q[i] += eps;
            b.q[i] -= eps;
            let fd = -(energy_of(&m, &a) - energy_of(&m, &b)) / (2.0 * eps);
            prop_assert!((fi - fd).abs() <= 1e-5 * (1.0 + fd.abs()), "{} vs {}", fi, fd);
        }
    }

    #[test]
    fn interaction_forces_ignore_translation(s in state(4, 2), shift in proptest::collection::vec(-5.0f64..5.0, 2)) {
        let m = soft_chain(4, 2, false);
        let mut moved = s.clone();
        for (i, q) in moved.q.iter_mut().enumerate() {
            *q += shift[i % 2];
        }
        let (f, g) = (forces(&m, &s).unwrap(), forces(&m, &moved).unwrap());
        let mut total = [0.0; 2];
        for i in 0..f.len() {
            prop_assert!((f[i] - g[i]).abs() <= 1e-9 * (1.0 + f[i].abs()));
            total[i % 2] += f[i];
        }
        prop_assert!(total.iter().all(|t| t.abs() < 1e-9));
    }

    #[test]
    fn prepared_state_has_the_requested_energy(h0 in 3.0f64..1e4, pinning in any::<bool>()) {
        let m = soft_chain(5, 1, true);
        let placement = if pinning { Placement::Pinning } else { Placement::Interaction };
        let s = prepare_state(&m, h0, placement).unwrap();
        let e = hamiltonian(&m, &s).unwrap();
        prop_assert!((e.h - h0).abs() <= 1e-9 * h0);
        if !pinning {
            // zero total momentum, relaxed springs around the origin
            prop_assert!(s.p.iter().sum::<f64>().abs() < 1e-9 * h0.sqrt());
        }
    }

    #[test]
    fn tau_scales_as_a_power_of_energy(h in 1.0f64..1e3, e in 1.0f64..100.0, share in 0.6f64..1.0) {
        let rule = TimescaleRule::new(0.5, 4.0, 2.0).unwrap();
        let a = tau(&rule, h, (1.0 - share) * h, share * h).unwrap();
        let b = tau(&rule, e * h, (1.0 - share) * e * h, share * e * h).unwrap();
        prop_assert!((b / a - e.powf(0.25 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn rescaling_homogeneous_energy(s in state(3, 1), e in 0.1f64..1e3) {
        // Quartic interactions only: H(E^{-1/2}p, E^{-1/4}q) = H(p, q)/E.
        let topo = NetworkTopology::new(3, &[(0, 1), (1, 2)], &[]).unwrap();
        let m = Model::new(topo, 1, vec![None; 3], vec![PotentialSpec::even_power(4, 1).unwrap(); 2], vec![]).unwrap();
        let r = rescale_state(&s, e, RescaleMode::Interaction, 4.0, 2.0).unwrap();
        let (before, after) = (energy_of(&m, &s), energy_of(&m, &r));
        prop_assert!((after - before / e).abs() <= 1e-12 * (1.0 + before / e));
    }
}

#[test]
fn seeded_runs_are_bitwise_reproducible() {
    let m = soft_chain(4, 1, true);
    let z0 = prepare_state(&m, 10.0, Placement::Interaction).unwrap();
    let opts = IntegrateOptions::new(5.0, 0.01);
    let a = integrate(&m, &z0, &opts, &mut rng::seed_stream(9, 3)).unwrap();
    let b = integrate(&m, &z0, &opts, &mut rng::seed_stream(9, 3)).unwrap();
    let c = integrate(&m, &z0, &opts, &mut rng::seed_stream(9, 4)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.energy.last(), c.energy.last());
}

#[test]
fn harmonic_pair_follows_the_exact_solution() {
    // Two free masses joined by V(d) = d²: the relative coordinate has ω = 2.
    let topo = NetworkTopology::new(2, &[(0, 1)], &[]).unwrap();
    let m = Model::new(topo, 1, vec![None, None], vec![PotentialSpec::even_power(2, 1).unwrap()], vec![]).unwrap();
    let z0 = State { dim: 1, p: vec![0.0, 0.0], q: vec![-0.5, 0.5] };
    let mut opts = DeterministicOptions::new(10.0, 1e-3);
    opts.keep_states = true;
    opts.record_every = 1000;
    let trace = integrate_deterministic(&m, &z0, &opts).unwrap();
    let omega = 2.0;
    for (t, s) in trace.times.iter().zip(trace.states.as_ref().unwrap()) {
        let exact = (omega * t).cos();
        assert!((s.q[1] - s.q[0] - exact).abs() < 1e-5, "t = {t}");
    }
}

#[test]
fn zero_temperature_baths_only_dissipate() {
    let m = harmonic_chain(3, (0.0, 0.0));
    let z0 = prepare_state(&m, 5.0, Placement::Interaction).unwrap();
    let trace = integrate(&m, &z0, &IntegrateOptions::new(20.0, 0.005), &mut rng::seed_stream(1, 0)).unwrap();
    assert!(trace.work.iter().all(|&w| w == 0.0));
    assert!(trace.energy.last().unwrap() < &1.0);
    let gamma = trace.dissipation.last().unwrap();
    assert!((5.0 - trace.energy.last().unwrap() - gamma).abs() < 0.01, "{}", trace.final_residual());
}

#[test]
fn budget_residual_shrinks_with_the_step() {
    // Same Brownian path at two step sizes; the mean absolute residual
    // is first order in h.
    let m = harmonic_chain(3, (1.0, 2.0));
    let z0 = prepare_state(&m, 5.0, Placement::Interaction).unwrap();
    let mean_residual = |h: f64, factor: usize| {
        let mut total = 0.0;
        for i in 0..40 {
            let mut noise = oscnet::dynamics::CoarsenedNoise::new(rng::seed_stream(5, i), factor);
            let t = integrate(&m, &z0, &IntegrateOptions::new(2.0, h), &mut noise).unwrap();
            total += t.final_residual().abs();
        }
        total / 40.0
    };
    let coarse = mean_residual(0.004, 4);
    let fine = mean_residual(0.001, 1);
    let ratio = fine / coarse;
    assert!(ratio > 0.15 && ratio < 0.4, "ratio {ratio}");
}

#[test]
fn bath_parameters_are_checked() {
    let topo = NetworkTopology::new(2, &[(0, 1)], &[0]).unwrap();
    let v = PotentialSpec::even_power(2, 1).unwrap();
    let bad = |gamma, temperature| {
        Model::new(topo.clone(), 1, vec![None, None], vec![v.clone()], vec![BathParams { gamma, temperature }])
    };
    assert!(bad(0.0, 1.0).is_err());
    assert!(bad(1.0, -1.0).is_err());
    assert!(bad(1.0, f64::INFINITY).is_err());
    assert!(bad(1.0, 0.0).is_ok());
}
