//! Ensemble estimates of the exponential drift `E e^{θ(H(z_{t*}) − H(z₀))}`
//! at prescribed initial energies.
//!
//! For large `H₀` the mean should fall below one and `log(mean)` should
//! decrease at least linearly in `H₀`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::events::{EventClass, EventFrequencies, EventTracker};
use crate::dynamics::{prepare_state, tau, Model, Placement, State, Stepper, TimescaleRule};
use crate::error::{invalid, Error, Result};
use crate::graph::controls;
use crate::rng;
use crate::stats::{linear_fit, mean_se, Estimate, LinearFit, NeumaierSum, Z95};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftConfig {
    pub theta: f64,
    pub t_star: f64,
    pub ensemble: usize,
    pub energy_grid: Vec<f64>,
    /// Prefactor of the energy-dependent window `τ = λ H^{1/ℓ − 1/2}`,
    /// reported per level.
    pub lambda: f64,
    /// Base step size.
    pub h0: f64,
    #[serde(default)]
    pub placement: Placement,
    /// Shrink the step as `h0 · min(1, H₀^{1/ℓ_i − 1/2})` at high energy.
    #[serde(default)]
    pub energy_adaptive: bool,
}

impl DriftConfig {
    /// Checks every field against the model, including `θ · T_max < 1`.
    pub fn validate(&self, model: &Model) -> Result<()> {
        let t_max = model.t_max();
        if !(self.theta > 0.0 && self.theta * t_max < 1.0) {
            return invalid(format!(
                "theta must lie in (0, 1/T_max) = (0, {}), got {}",
                1.0 / t_max,
                self.theta
            ));
        }
        if !(self.t_star > 0.0 && self.t_star.is_finite()) {
            return invalid(format!("t_star must be positive, got {}", self.t_star));
        }
        if self.ensemble < 100 {
            return invalid(format!("ensemble must be at least 100, got {}", self.ensemble));
        }
        if !(self.h0 > 0.0 && self.h0 <= self.t_star) {
            return invalid(format!("h0 must lie in (0, t_star], got {}", self.h0));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return invalid(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.energy_grid.is_empty() {
            return invalid("energy grid is empty");
        }
        if self.energy_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return invalid("energy grid entries must be positive and finite");
        }
        if self.energy_grid.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("energy grid must be strictly increasing");
        }
        Ok(())
    }

    /// Step size used at initial energy `h0_energy`.
    pub fn step_size(&self, model: &Model, h0_energy: f64) -> f64 {
        if !self.energy_adaptive {
            return self.h0;
        }
        let li = model.interaction_degree().unwrap_or(2.0);
        self.h0 * h0_energy.powf(1.0 / li - 0.5).min(1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftEstimate {
    pub h0: f64,
    pub mean: f64,
    pub se: f64,
    pub ci95: (f64, f64),
    /// Upper confidence bound below one.
    pub below_one: bool,
    pub events: EventFrequencies,
    pub mean_dissipation: f64,
    pub blowups: usize,
    pub ensemble: usize,
    pub step: f64,
}

/// Drift estimate from the fixed initial state `z0`, at step `h`.
pub fn drift_estimate(model: &Model, z0: &State, config: &DriftConfig, h: f64, seed: u64) -> Result<DriftEstimate> {
    config.validate(model)?;
    if !(h > 0.0 && h <= config.t_star) {
        return invalid(format!("step must lie in (0, t_star], got {h}"));
    }
    let start = model.energies(z0).h;
    if !start.is_finite() {
        return invalid("initial state has non-finite energy");
    }
    let steps = (config.t_star / h - 1e-9).ceil().max(1.0) as usize;
    let h = config.t_star / steps as f64;
    let cap = (2.0 * config.theta * start).exp();
    let theta = config.theta;

    let runs: Vec<Result<(f64, EventClass, f64, bool)>> = (0..config.ensemble)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng::seed_stream(seed, i as u64);
            let mut stepper = Stepper::new(model, z0.clone())?;
            let mut tracker = EventTracker::new(start);
            tracker.observe(start);
            for _ in 0..steps {
                match stepper.step_sde(h, &mut stream) {
                    Ok(()) => tracker.observe(stepper.energies().h),
                    Err(Error::Blowup { .. }) => {
                        return Ok((cap, EventClass::A3, stepper.dissipation(), true));
                    }
                    Err(e) => return Err(e),
                }
            }
            let end = stepper.energies().h;
            Ok(((theta * (end - start)).exp(), tracker.class(), stepper.dissipation(), false))
        })
        .collect();
    let runs: Vec<(f64, EventClass, f64, bool)> = runs.into_iter().collect::<Result<_>>()?;
    let values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let classes: Vec<EventClass> = runs.iter().map(|r| r.1).collect();
    let mut gamma = NeumaierSum::default();
    runs.iter().for_each(|r| gamma.add(r.2));
    let Estimate { mean, se, .. } = mean_se(&values);
    let ci95 = (mean - Z95 * se, mean + Z95 * se);
    Ok(DriftEstimate {
        h0: start,
        mean,
        se,
        ci95,
        below_one: ci95.1 < 1.0,
        events: EventFrequencies::tally(&classes),
        mean_dissipation: gamma.value() / runs.len() as f64,
        blowups: runs.iter().filter(|r| r.3).count(),
        ensemble: config.ensemble,
        step: h,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftLevel {
    #[serde(flatten)]
    pub estimate: DriftEstimate,
    /// Window `τ(z₀)` for the prepared state.
    pub tau: f64,
    /// The confidence interval excludes one, so the level enters the fit.
    pub qualifying: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    pub theta: f64,
    pub t_star: f64,
    pub placement: Placement,
    pub controlled: bool,
    pub connected: bool,
    pub levels: Vec<DriftLevel>,
    /// `log(mean)` against `H₀` over the qualifying levels.
    pub fit: Option<LinearFit>,
    /// `−slope`, the estimate of the drift constant.
    pub c1_estimate: Option<f64>,
    /// Exploratory: `log(−log mean)` against `log H₀` over levels with mean below one.
    pub exponent_fit: Option<LinearFit>,
    pub all_below_one: bool,
    /// Largest grid energy at least ten times the smallest.
    pub spans_decade: bool,
    pub inconclusive: bool,
}

pub fn drift_scan(model: &Model, config: &DriftConfig, seed: u64) -> Result<DriftReport> {
    config.validate(model)?;
    let grid = &config.energy_grid;
    let control = controls(model.topology());
    let li = model.interaction_degree().unwrap_or(2.0);
    let lp = model.pinning_degree().unwrap_or(2.0);
    let rule = TimescaleRule::new(config.lambda, li, lp)?;
    let mut levels = Vec::with_capacity(grid.len());
    for (k, &e) in grid.iter().enumerate() {
        let z0 = prepare_state(model, e, config.placement)?;
        let en = model.energies(&z0);
        let estimate = drift_estimate(
            model,
            &z0,
            config,
            config.step_size(model, e),
            rng::derive_seed(seed, k as u64),
        )?;
        let qualifying = estimate.ci95.1 < 1.0 || estimate.ci95.0 > 1.0;
        levels.push(DriftLevel {
            tau: tau(&rule, en.h, en.hc, en.hi)?,
            estimate,
            qualifying,
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = levels
        .iter()
        .filter(|l| l.qualifying && l.estimate.mean > 0.0)
        .map(|l| (l.estimate.h0, l.estimate.mean.ln()))
        .unzip();
    let inconclusive = x.len() < 3;
    let fit = if x.len() >= 2 { linear_fit(&x, &y) } else { None };
    let (lx, ly): (Vec<f64>, Vec<f64>) = levels
        .iter()
        .filter(|l| l.estimate.mean > 0.0 && l.estimate.mean < 1.0)
        .map(|l| (l.estimate.h0.ln(), (-l.estimate.mean.ln()).ln()))
        .unzip();
    Ok(DriftReport {
        theta: config.theta,
        t_star: config.t_star,
        placement: config.placement,
        controlled: control.controlled,
        connected: control.connected,
        spans_decade: grid[grid.len() - 1] >= 10.0 * grid[0],
        all_below_one: levels.iter().all(|l| l.estimate.below_one),
        c1_estimate: fit.map(|f| -f.slope),
        fit,
        exponent_fit: if lx.len() >= 2 { linear_fit(&lx, &ly) } else { None },
        levels,
        inconclusive,
    })
}
