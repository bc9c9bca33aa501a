//! Exponential relaxation of `E_z f(z_t)` towards its stationary value.
//!
//! Each ensemble member runs two copies driven by the same noise: one from
//! the fixed start `z₀`, one from a stationary snapshot. The mean of
//! `f(z_t) − f(z'_t)` is an unbiased estimate of `E_z f(z_t) − μ(f)` whose
//! noise shrinks with the coupled distance, so the decay can be followed far
//! further than with a plain ensemble average against a long-run reference.
//! The plain curve `|E f(z_t) − μ̂(f)|` is reported as well.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::observable::Observable;
use super::oracle::gaussian_stationary_covariance;
use crate::dynamics::{Model, State, Stepper};
use crate::error::{invalid, Result};
use crate::rng;
use crate::stats::{batch_means, linear_fit, Accumulator, BatchEstimate, LinearFit};

/// Burn-in used when no oracle time scale is available.
pub const DEFAULT_BURN_IN: f64 = 200.0;
/// Records below the significance threshold that end the fit range.
const FIT_GAP: usize = 5;
/// Fewest points a fit may use.
const MIN_FIT_POINTS: usize = 5;
/// Ensemble members per accumulation block.
const BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions {
    pub observable: Observable,
    pub horizon: f64,
    pub h: f64,
    pub record_every: usize,
    pub ensemble: usize,
    /// Fit only from this time on, after faster modes have died out.
    #[serde(default)]
    pub fit_start: f64,
    /// Stationary burn-in; `None` means ten oracle time scales for quadratic
    /// models and [`DEFAULT_BURN_IN`] otherwise.
    #[serde(default)]
    pub burn_in: Option<f64>,
    /// Length of the single long run behind the reference `μ̂(f)`.
    pub reference_time: f64,
}

impl DecayOptions {
    fn validate(&self, model: &Model) -> Result<()> {
        self.observable.validate(model)?;
        if !(self.h > 0.0 && self.horizon > self.h && self.horizon.is_finite()) {
            return invalid("need 0 < h < horizon");
        }
        if self.record_every == 0 || self.ensemble < 2 {
            return invalid("record cadence must be positive and the ensemble at least 2");
        }
        if !(self.fit_start >= 0.0 && self.fit_start < self.horizon) {
            return invalid("fit_start must lie in [0, horizon)");
        }
        if let Some(b) = self.burn_in {
            if !(b >= 0.0 && b.is_finite()) {
                return invalid("burn-in must be non-negative");
            }
        }
        if !(self.reference_time > 0.0) {
            return invalid("reference time must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub observable: String,
    pub times: Vec<f64>,
    /// `mean[f(z_t) − f(z'_t)]` over the coupled pairs, with its standard error.
    pub coupled: Vec<f64>,
    pub coupled_se: Vec<f64>,
    /// `mean f(z_t)` over the ensemble, with its standard error.
    pub raw: Vec<f64>,
    pub raw_se: Vec<f64>,
    /// Long-run time average `μ̂(f)`.
    pub reference: BatchEstimate,
    pub burn_in: f64,
    /// Twice the distance of the oracle spectral abscissa from zero, for
    /// quadratic models: the slowest decay rate of a second moment.
    pub oracle_rate: Option<f64>,
    pub fit: Option<LinearFit>,
    pub fit_range: Option<(f64, f64)>,
    pub fit_points: usize,
    pub rate: Option<f64>,
    pub inconclusive: bool,
}

impl DecayReport {
    /// CSV with `t, coupled, coupled_se, raw, raw_se, raw_minus_reference`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,coupled,coupled_se,raw,raw_se,raw_minus_reference\n");
        for k in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.times[k],
                self.coupled[k],
                self.coupled_se[k],
                self.raw[k],
                self.raw_se[k],
                self.raw[k] - self.reference.mean
            ));
        }
        out
    }
}

fn run_for(stepper: &mut Stepper<'_>, stream: &mut rng::Stream, h: f64, time: f64) -> Result<()> {
    let steps = (time / h).ceil() as usize;
    for _ in 0..steps {
        stepper.step_sde(h, stream)?;
    }
    Ok(())
}

pub fn observable_decay_fit(model: &Model, z0: &State, options: &DecayOptions, seed: u64) -> Result<DecayReport> {
    options.validate(model)?;
    let oracle_abscissa = if model.is_quadratic() {
        Some(gaussian_stationary_covariance(model)?.spectral_abscissa())
    } else {
        None
    };
    let burn_in = match (options.burn_in, oracle_abscissa) {
        (Some(b), _) => b,
        (None, Some(a)) if a < 0.0 => 10.0 / a.abs(),
        _ => DEFAULT_BURN_IN,
    };
    let f = options.observable;
    let h = options.h;
    let records = (options.horizon / (h * options.record_every as f64)).floor() as usize;
    let partner_seed = rng::derive_seed(seed, 1);

    // Fixed-size blocks, each accumulated sequentially and merged in
    // order, keep the result independent of the thread count.
    let blocks: Vec<Result<(Vec<Accumulator>, Vec<Accumulator>)>> = (0..options.ensemble.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut diff = vec![Accumulator::default(); records + 1];
            let mut raw = vec![Accumulator::default(); records + 1];
            for i in b * BLOCK..((b + 1) * BLOCK).min(options.ensemble) {
                let mut warm = rng::seed_stream(partner_seed, i as u64);
                let mut partner = Stepper::new(model, model.zero_state())?;
                run_for(&mut partner, &mut warm, h, burn_in)?;
                let mut main = Stepper::new(model, z0.clone())?;
                let mut stream = rng::seed_stream(seed, i as u64);
                let mut draws = vec![0.0; main.draws_per_step()];
                for k in 0..=records {
                    if k > 0 {
                        for _ in 0..options.record_every {
                            rng::fill_normal(&mut stream, &mut draws);
                            main.step_with_draws(h, &draws, true)?;
                            partner.step_with_draws(h, &draws, true)?;
                        }
                    }
                    let a = f.eval(model, main.state());
                    diff[k].push(a - f.eval(model, partner.state()));
                    raw[k].push(a);
                }
            }
            Ok((diff, raw))
        })
        .collect();
    let mut diff = vec![Accumulator::default(); records + 1];
    let mut raw = vec![Accumulator::default(); records + 1];
    for block in blocks {
        let (d, r) = block?;
        for k in 0..=records {
            diff[k].merge(&d[k]);
            raw[k].merge(&r[k]);
        }
    }

    let mut reference_run = Stepper::new(model, model.zero_state())?;
    let mut reference_stream = rng::seed_stream(rng::derive_seed(seed, 2), 0);
    run_for(&mut reference_run, &mut reference_stream, h, burn_in)?;
    let mut samples = Vec::new();
    let reference_records = (options.reference_time / (h * options.record_every as f64)).ceil() as usize;
    for _ in 0..reference_records {
        for _ in 0..options.record_every {
            reference_run.step_sde(h, &mut reference_stream)?;
        }
        samples.push(f.eval(model, reference_run.state()));
    }
    let reference = batch_means(&samples, 20);

    let times: Vec<f64> = (0..=records).map(|k| (k * options.record_every) as f64 * h).collect();
    let coupled_est: Vec<_> = diff.iter().map(Accumulator::estimate).collect();
    let raw_est: Vec<_> = raw.iter().map(Accumulator::estimate).collect();

    let significant = |k: usize| {
        let e = &coupled_est[k];
        e.mean.abs() > 3.0 * e.se && e.mean != 0.0
    };
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut misses = 0;
    for k in (0..=records).filter(|&k| times[k] >= options.fit_start) {
        if significant(k) {
            misses = 0;
            x.push(times[k]);
            y.push(coupled_est[k].mean.abs().ln());
        } else {
            misses += 1;
            if misses >= FIT_GAP && !x.is_empty() {
                break;
            }
        }
    }
    let fit = if x.len() >= MIN_FIT_POINTS { linear_fit(&x, &y) } else { None };
    Ok(DecayReport {
        observable: f.name(),
        coupled: coupled_est.iter().map(|e| e.mean).collect(),
        coupled_se: coupled_est.iter().map(|e| e.se).collect(),
        raw: raw_est.iter().map(|e| e.mean).collect(),
        raw_se: raw_est.iter().map(|e| e.se).collect(),
        times,
        reference,
        burn_in,
        oracle_rate: oracle_abscissa.map(|a| 2.0 * a.abs()),
        rate: fit.map(|f| -f.slope),
        fit_range: fit.map(|_| (x[0], x[x.len() - 1])),
        fit_points: if fit.is_some() { x.len() } else { 0 },
        inconclusive: fit.is_none(),
        fit,
    })
}
