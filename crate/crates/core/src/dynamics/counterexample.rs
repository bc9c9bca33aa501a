//! Two masses in ℝ³ whose potentials violate the injectivity condition on the
//! limiting interaction force.
//!
//! Mass `m1` (a bath vertex) starts at `(0, 1, 0)` and mass `m2` at
//! `(4, 2, 0)`, both at rest. With
//!
//! ```text
//! V(x, y, z)  = y⁴/4 + x² z²/2               (edge m1 → m2)
//! U₁(x, y, z) = (x⁴ + y⁴ + z⁴)/4
//! U₂(x, y, z) = x⁴/64 − y⁴/32 + z⁴/4
//! ```
//!
//! the interaction force on `m1` is `(0, 1, 0)` along the whole motion
//! `q₂ = (x(t), 2, 0)` and exactly cancels the pinning force, so `m1` never
//! moves while `m2` slides towards smaller `x`.
//!
//! The polynomials are only meaningful near this motion. `U₂` is positive on
//! the validity region, so no additive shift is applied, and the integration
//! aborts with [`Error::OutsideValidityRegion`] if the state ever leaves it.

use serde::{Deserialize, Serialize};

use super::{integrator::Stepper, BathParams, Model, State};
use crate::error::{invalid, Error, Result};
use crate::graph::NetworkTopology;
use crate::potentials::{Monomial, PotentialSpec};

pub fn counterexample_model() -> (Model, State) {
    let interaction = PotentialSpec::local_piece(
        vec![Monomial::new(0.25, &[0, 4, 0]), Monomial::new(0.5, &[2, 0, 2])],
        0.0,
        3,
    )
    .expect("valid polynomial");
    let u1 = PotentialSpec::local_piece(
        vec![
            Monomial::new(0.25, &[4, 0, 0]),
            Monomial::new(0.25, &[0, 4, 0]),
            Monomial::new(0.25, &[0, 0, 4]),
        ],
        0.0,
        3,
    )
    .expect("valid polynomial");
    let u2 = PotentialSpec::local_piece(
        vec![
            Monomial::new(1.0 / 64.0, &[4, 0, 0]),
            Monomial::new(-1.0 / 32.0, &[0, 4, 0]),
            Monomial::new(0.25, &[0, 0, 4]),
        ],
        0.0,
        3,
    )
    .expect("valid polynomial");
    let topology = NetworkTopology::with_names(vec!["m1".into(), "m2".into()], &[(0, 1)], &[0]).expect("valid network");
    let model = Model::new(
        topology,
        3,
        vec![Some(u1), Some(u2)],
        vec![interaction],
        vec![BathParams {
            gamma: 1.0,
            temperature: 1.0,
        }],
    )
    .expect("valid model");
    let state = State {
        dim: 3,
        p: vec![0.0; 6],
        q: vec![0.0, 1.0, 0.0, 4.0, 2.0, 0.0],
    };
    (model, state)
}

/// Box around the frozen motion inside which the polynomial pieces are used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidityRegion {
    pub x2_radius: f64,
    pub yz_radius: f64,
    pub m1_radius: f64,
}

impl Default for ValidityRegion {
    fn default() -> Self {
        Self {
            x2_radius: 1.0,
            yz_radius: 0.2,
            m1_radius: 0.2,
        }
    }
}

impl ValidityRegion {
    pub fn check(&self, time: f64, state: &State) -> Result<()> {
        let q = &state.q;
        let outside = |detail: String| Err(Error::OutsideValidityRegion { time, detail });
        if (q[3] - 4.0).abs() > self.x2_radius {
            return outside(format!("|x2 - 4| = {} > {}", (q[3] - 4.0).abs(), self.x2_radius));
        }
        if (q[4] - 2.0).abs() > self.yz_radius || q[5].abs() > self.yz_radius {
            return outside(format!("m2 transverse position ({}, {}) off (2, 0)", q[4], q[5]));
        }
        let d = (q[0].powi(2) + (q[1] - 1.0).powi(2) + q[2].powi(2)).sqrt();
        if d > self.m1_radius {
            return outside(format!("m1 is {d} away from (0, 1, 0)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleOptions {
    pub h: f64,
    /// Stop once `x₂` falls to this value.
    pub x_stop: f64,
    /// Safety cap on the simulated time.
    pub max_time: f64,
    pub record_every: usize,
    pub region: ValidityRegion,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        Self {
            h: 1e-4,
            x_stop: 3.5,
            max_time: 10.0,
            record_every: 10,
            region: ValidityRegion::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleRun {
    pub steps: usize,
    pub final_time: f64,
    pub x2_start: f64,
    pub x2_end: f64,
    pub x2_decreasing: bool,
    /// `max_t ‖p₁(t)‖`
    pub max_p1: f64,
    /// `max_t ‖q₁(t) − q₁(0)‖`
    pub max_q1_displacement: f64,
    /// `max_t ‖∇V(q₂ − q₁) − (0, 1, 0)‖`
    pub max_force_deviation: f64,
    pub max_relative_energy_drift: f64,
    #[serde(skip)]
    pub trace: super::Trace,
}

/// Noise-free, friction-free integration of the counterexample until `x₂`
/// reaches `x_stop`.
pub fn run_counterexample(options: &CounterexampleOptions) -> Result<CounterexampleRun> {
    if !(options.h > 0.0 && options.h.is_finite()) {
        return invalid(format!("step size must be positive, got {}", options.h));
    }
    if !(options.x_stop < 4.0 && options.x_stop >= 4.0 - options.region.x2_radius) {
        return invalid(format!("x_stop must lie in [3, 4), got {}", options.x_stop));
    }
    if options.record_every == 0 {
        return invalid("record cadence must be at least 1");
    }
    let (model, state0) = counterexample_model();
    let edge = model.interaction()[0].clone();
    let q1_start = [state0.q[0], state0.q[1], state0.q[2]];
    let mut stepper = Stepper::new(&model, state0.clone())?;
    let h0 = stepper.energies().h;
    let mut run = CounterexampleRun {
        steps: 0,
        final_time: 0.0,
        x2_start: state0.q[3],
        x2_end: state0.q[3],
        x2_decreasing: true,
        max_p1: 0.0,
        max_q1_displacement: 0.0,
        max_force_deviation: 0.0,
        max_relative_energy_drift: 0.0,
        trace: super::Trace::empty(0.0, true),
    };
    let mut delta = [0.0; 3];
    let mut grad = [0.0; 3];
    run.trace.push(&stepper);
    let max_steps = (options.max_time / options.h).ceil() as usize;
    loop {
        let previous_x2 = stepper.state().q[3];
        stepper.step_deterministic(options.h, false)?;
        let s = stepper.state();
        options.region.check(stepper.time(), s)?;
        run.max_p1 = run.max_p1.max(norm(&s.p[0..3]));
        run.max_q1_displacement = run
            .max_q1_displacement
            .max(norm(&[s.q[0] - q1_start[0], s.q[1] - q1_start[1], s.q[2] - q1_start[2]]));
        for k in 0..3 {
            delta[k] = s.q[3 + k] - s.q[k];
        }
        edge.gradient_into(&delta, &mut grad);
        run.max_force_deviation = run
            .max_force_deviation
            .max(norm(&[grad[0], grad[1] - 1.0, grad[2]]));
        let e = stepper.energies().h;
        run.max_relative_energy_drift = run.max_relative_energy_drift.max(((e - h0) / h0).abs());
        if s.q[3] >= previous_x2 {
            run.x2_decreasing = false;
        }
        let done = s.q[3] <= options.x_stop;
        if done || stepper.steps() % options.record_every == 0 {
            run.trace.push(&stepper);
        }
        if done {
            break;
        }
        if stepper.steps() >= max_steps {
            return Err(Error::Diagnostic(format!(
                "x2 = {} did not reach {} within t = {}",
                s.q[3], options.x_stop, options.max_time
            )));
        }
    }
    run.steps = stepper.steps();
    run.final_time = stepper.time();
    run.x2_end = stepper.state().q[3];
    Ok(run)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
