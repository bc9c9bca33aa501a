//! Long-run time averages against the stationary energy balance and, for
//! quadratic models, the exact stationary covariance.
//!
//! In the steady state the Itô formula for `H` forces
//! `Σ_b γ_b ⟨|p_b|²⟩ = n Σ_b γ_b T_b`: the friction removes exactly what the
//! noise injects.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::oracle::gaussian_stationary_covariance;
use crate::dynamics::{Model, Stepper};
use crate::error::{invalid, Result};
use crate::rng;
use crate::stats::{self, mean_se};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryOptions {
    pub h: f64,
    /// Simulated time discarded before sampling, per chain.
    pub burn_in: f64,
    /// Recorded samples per chain.
    pub samples_per_chain: usize,
    /// Steps between recorded samples.
    pub sample_every: usize,
    /// Independent chains, each on its own stream.
    pub chains: usize,
    /// Batches per chain for the batch-means standard errors.
    pub batches_per_chain: usize,
}

impl StationaryOptions {
    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return invalid(format!("step size must be positive, got {}", self.h));
        }
        if !(self.burn_in >= 0.0) {
            return invalid("burn-in must be non-negative");
        }
        if self.chains == 0 || self.sample_every == 0 || self.batches_per_chain == 0 {
            return invalid("chains, sample cadence and batches must be positive");
        }
        if self.samples_per_chain < self.batches_per_chain * 2 {
            return invalid("need at least two samples per batch");
        }
        if self.chains * self.batches_per_chain < 2 {
            return invalid("need at least two batches in total");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moment {
    pub mean: f64,
    pub se: f64,
    /// Effective number of independent samples.
    pub ess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentEntry {
    pub i: usize,
    pub j: usize,
    pub simulated: Moment,
    pub oracle: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentComparison {
    pub oracle_residual: f64,
    pub max_abs_z: f64,
    pub max_abs_deviation: f64,
    pub min_ess: f64,
    pub entries: Vec<MomentEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryReport {
    pub samples: usize,
    pub simulated_time: f64,
    /// `⟨|p_v|²⟩` per vertex.
    pub momentum_squared: Vec<Moment>,
    /// `Σ_b γ_b ⟨|p_b|²⟩`
    pub bath_flux: Moment,
    /// `n Σ_b γ_b T_b`
    pub input_rate: f64,
    /// `bath_flux / input_rate`, with its standard error.
    pub balance_ratio: f64,
    pub balance_ratio_se: f64,
    /// Present for fully quadratic models: `E[z zᵀ]` in `(p, q)` ordering.
    pub moments: Option<MomentComparison>,
}

pub fn stationary_moment_test(model: &Model, options: &StationaryOptions, seed: u64) -> Result<StationaryReport> {
    options.validate()?;
    let oracle = if model.is_quadratic() {
        Some(gaussian_stationary_covariance(model)?)
    } else {
        None
    };
    let n = model.dim();
    let count = model.vertex_count();
    let m = count * n;
    let pairs: Vec<(usize, usize)> = if oracle.is_some() {
        (0..2 * m).flat_map(|i| (i..2 * m).map(move |j| (i, j))).collect()
    } else {
        Vec::new()
    };
    let baths: Vec<(usize, f64)> = model
        .topology()
        .baths()
        .iter()
        .map(|b| (b.0, model.gamma(*b)))
        .collect();
    let width = count + 1 + pairs.len();

    // Per chain: batch sums and whole-chain sums of squares.
    let chains: Vec<Result<(Vec<Vec<f64>>, Vec<f64>)>> = (0..options.chains)
        .into_par_iter()
        .map(|c| {
            let mut stream = rng::seed_stream(seed, c as u64);
            let mut stepper = Stepper::new(model, model.zero_state())?;
            let burn = (options.burn_in / options.h).ceil() as usize;
            for _ in 0..burn {
                stepper.step_sde(options.h, &mut stream)?;
            }
            let per_batch = options.samples_per_chain / options.batches_per_chain;
            let mut batches = vec![vec![0.0; width]; options.batches_per_chain];
            let mut squares = vec![0.0; width];
            let mut row = vec![0.0; width];
            let mut z = vec![0.0; 2 * m];
            for batch in batches.iter_mut() {
                for _ in 0..per_batch {
                    for _ in 0..options.sample_every {
                        stepper.step_sde(options.h, &mut stream)?;
                    }
                    let s = stepper.state();
                    for v in 0..count {
                        row[v] = s.p[v * n..(v + 1) * n].iter().map(|x| x * x).sum();
                    }
                    row[count] = baths.iter().map(|&(b, g)| g * row[b]).sum();
                    if !pairs.is_empty() {
                        z[..m].copy_from_slice(&s.p);
                        z[m..].copy_from_slice(&s.q);
                        for (k, &(i, j)) in pairs.iter().enumerate() {
                            row[count + 1 + k] = z[i] * z[j];
                        }
                    }
                    for k in 0..width {
                        batch[k] += row[k];
                        squares[k] += row[k] * row[k];
                    }
                }
                batch.iter_mut().for_each(|x| *x /= per_batch as f64);
            }
            Ok((batches, squares))
        })
        .collect();

    let per_batch = options.samples_per_chain / options.batches_per_chain;
    let total = per_batch * options.batches_per_chain * options.chains;
    let mut batch_means: Vec<Vec<f64>> = Vec::new();
    let mut squares = vec![stats::NeumaierSum::default(); width];
    for chain in chains {
        let (b, sq) = chain?;
        batch_means.extend(b);
        for k in 0..width {
            squares[k].add(sq[k]);
        }
    }
    let moment = |k: usize| {
        let column: Vec<f64> = batch_means.iter().map(|b| b[k]).collect();
        let est = mean_se(&column);
        let var = squares[k].value() / total as f64 - est.mean * est.mean;
        Moment {
            mean: est.mean,
            se: est.se,
            ess: var.max(0.0) / (est.se * est.se),
        }
    };
    let momentum_squared: Vec<Moment> = (0..count).map(moment).collect();
    let bath_flux = moment(count);
    let input_rate = model.input_rate();
    let moments = oracle.map(|o| {
        let entries: Vec<MomentEntry> = pairs
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| {
                let simulated = moment(count + 1 + k);
                let exact = o.covariance[(i, j)];
                MomentEntry {
                    i,
                    j,
                    z: (simulated.mean - exact) / simulated.se,
                    simulated,
                    oracle: exact,
                }
            })
            .collect();
        MomentComparison {
            oracle_residual: o.residual,
            max_abs_z: entries.iter().map(|e| e.z.abs()).fold(0.0, f64::max),
            max_abs_deviation: entries
                .iter()
                .map(|e| (e.simulated.mean - e.oracle).abs())
                .fold(0.0, f64::max),
            min_ess: entries.iter().map(|e| e.simulated.ess).fold(f64::INFINITY, f64::min),
            entries,
        }
    });
    Ok(StationaryReport {
        samples: total,
        simulated_time: total as f64 * options.sample_every as f64 * options.h,
        momentum_squared,
        balance_ratio: bath_flux.mean / input_rate,
        balance_ratio_se: bath_flux.se / input_rate,
        bath_flux,
        input_rate,
        moments,
    })
}
