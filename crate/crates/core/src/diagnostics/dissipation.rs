//! Tail probability of weak dissipation over the energy-dependent window.
//!
//! Over `[0, τ(z₀)]` the event of interest is that the energy stays below
//! `4H₀` and yet the friction removes less than `ε H₀ τ`. Its probability
//! should shrink as `H₀` grows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{prepare_state, tau, Model, Placement, State, Stepper, TimescaleRule};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::stats::{wilson_interval, Z95};

/// Minimum number of steps per window.
const MIN_WINDOW_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationConfig {
    pub epsilon: f64,
    pub ensemble: usize,
    pub energy_grid: Vec<f64>,
    pub lambda: f64,
    /// Largest step; shortened so every window has at least 100 steps.
    pub h0: f64,
    #[serde(default)]
    pub placement: Placement,
}

impl DissipationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return invalid(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.ensemble == 0 {
            return invalid("ensemble must be positive");
        }
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return invalid(format!("h0 must be positive, got {}", self.h0));
        }
        if self.energy_grid.is_empty() || self.energy_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return invalid("energy grid must be non-empty with positive entries");
        }
        if self.energy_grid.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("energy grid must be strictly increasing");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TailEstimate {
    pub h0: f64,
    pub tau: f64,
    pub threshold: f64,
    pub successes: usize,
    pub ensemble: usize,
    pub probability: f64,
    pub ci95: (f64, f64),
    /// Paths whose energy stayed below `4H₀`.
    pub bounded: usize,
    pub mean_dissipation: f64,
    pub blowups: usize,
    pub step: f64,
}

/// `P(H ≤ 4H₀ on [0, τ] and Γ(τ) < ε H₀ τ)` from the fixed state `z0`.
pub fn dissipation_tail(
    model: &Model,
    z0: &State,
    rule: &TimescaleRule,
    epsilon: f64,
    ensemble: usize,
    h_max: f64,
    seed: u64,
) -> Result<TailEstimate> {
    if !(epsilon > 0.0) {
        return invalid(format!("epsilon must be positive, got {epsilon}"));
    }
    if ensemble == 0 || !(h_max > 0.0) {
        return invalid("ensemble and step must be positive");
    }
    let en = model.energies(z0);
    let window = tau(rule, en.h, en.hc, en.hi)?;
    let steps = ((window / h_max - 1e-9).ceil() as usize).max(MIN_WINDOW_STEPS);
    let h = window / steps as f64;
    let start = en.h;
    let threshold = epsilon * start * window;

    let runs: Vec<Result<(bool, bool, f64, bool)>> = (0..ensemble)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng::seed_stream(seed, i as u64);
            let mut stepper = Stepper::new(model, z0.clone())?;
            let mut bounded = true;
            for _ in 0..steps {
                match stepper.step_sde(h, &mut stream) {
                    Ok(()) => bounded &= stepper.energies().h <= 4.0 * start,
                    Err(Error::Blowup { .. }) => return Ok((false, false, stepper.dissipation(), true)),
                    Err(e) => return Err(e),
                }
            }
            let gamma = stepper.dissipation();
            Ok((bounded && gamma < threshold, bounded, gamma, false))
        })
        .collect();
    let runs: Vec<(bool, bool, f64, bool)> = runs.into_iter().collect::<Result<_>>()?;
    let successes = runs.iter().filter(|r| r.0).count();
    Ok(TailEstimate {
        h0: start,
        tau: window,
        threshold,
        successes,
        ensemble,
        probability: successes as f64 / ensemble as f64,
        ci95: wilson_interval(successes, ensemble, Z95),
        bounded: runs.iter().filter(|r| r.1).count(),
        mean_dissipation: crate::stats::sum(runs.iter().map(|r| r.2)) / ensemble as f64,
        blowups: runs.iter().filter(|r| r.3).count(),
        step: h,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DissipationReport {
    pub epsilon: f64,
    pub placement: Placement,
    pub levels: Vec<TailEstimate>,
    /// Each probability lies at or below the upper bound of the previous level.
    pub non_increasing: bool,
}

pub fn dissipation_scan(model: &Model, config: &DissipationConfig, seed: u64) -> Result<DissipationReport> {
    config.validate()?;
    let li = model.interaction_degree().unwrap_or(2.0);
    let lp = model.pinning_degree().unwrap_or(2.0);
    let rule = TimescaleRule::new(config.lambda, li, lp)?;
    let mut levels = Vec::with_capacity(config.energy_grid.len());
    for (k, &e) in config.energy_grid.iter().enumerate() {
        let z0 = prepare_state(model, e, config.placement)?;
        levels.push(dissipation_tail(
            model,
            &z0,
            &rule,
            config.epsilon,
            config.ensemble,
            config.h0,
            rng::derive_seed(seed, k as u64),
        )?);
    }
    let non_increasing = levels.windows(2).all(|w| w[1].probability <= w[0].ci95.1);
    Ok(DissipationReport {
        epsilon: config.epsilon,
        placement: config.placement,
        levels,
        non_increasing,
    })
}
