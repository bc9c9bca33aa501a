//! Invariance of the Gibbs measure `∝ e^{−H/T}` when every bath has the
//! same temperature `T`.
//!
//! Initial points are drawn exactly from the Gibbs measure, evolved for a
//! fixed time, and each observable is compared before and after through the
//! paired difference `f(z_t) − f(z_0)`.
//!
//! Two exact samplers are available:
//!
//! * quadratic models: positions `N(0, T K⁻¹)`, momenta `N(0, T I)`;
//! * rejection sampling for pinned radial families. Each pinning potential
//!   has a quadratic lower bound `U_v(x) ≥ c_v + a_v |x|²`, and interactions
//!   are bounded below by their value at the origin. The proposal is the
//!   Gaussian `∝ e^{−Σ a_v |q_v|²/T}` and a proposal is kept with probability
//!   `e^{−(Φ(q) − Φ_low(q))/T} ≤ 1`. The bounds used are
//!   `(1 + s)^{r/2} ≥ 1 + (r/2)s` (soft power), `|x|^r ≥ |x|² − 1` (even
//!   power, `r ≥ 4`) and `½x·Kx ≥ ½λ_min|x|²` (quadratic).

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::observable::Observable;
use crate::dynamics::{Model, State, Stepper};
use crate::error::{invalid, Error, Result};
use crate::potentials::{Family, PotentialSpec};
use crate::rng::{self, Stream};
use crate::stats::{mean_se, Estimate};

/// Pilot proposals used to check the acceptance floor.
const PILOT: usize = 2000;
/// Smallest acceptable rejection-sampler acceptance rate.
pub const ACCEPTANCE_FLOOR: f64 = 0.01;

#[derive(Debug, Clone)]
pub enum GibbsSampler {
    Gaussian {
        temperature: f64,
        /// Lower Cholesky factor of `T K⁻¹`.
        position_factor: DMatrix<f64>,
    },
    Rejection {
        temperature: f64,
        /// Per vertex `(c_v, a_v)`.
        bounds: Vec<(f64, f64)>,
        interaction_floor: f64,
        acceptance: f64,
    },
}

fn quadratic_lower_bound(u: &PotentialSpec) -> Option<(f64, f64)> {
    match u.family() {
        Family::SoftPower { degree } => Some((1.0, 0.5 * degree)),
        Family::EvenPower { degree: 2 } => Some((0.0, 1.0)),
        Family::EvenPower { .. } => Some((-1.0, 1.0)),
        Family::Quadratic { stiffness } => {
            let n = u.dim();
            let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, stiffness));
            Some((0.0, 0.5 * eig.eigenvalues.min()))
        }
        Family::LocalPiece { .. } => None,
    }
}

impl GibbsSampler {
    pub fn new(model: &Model, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return invalid(format!("sampling temperature must be positive, got {temperature}"));
        }
        if let Some(k) = model.stiffness_matrix() {
            let Some(chol) = (k.clone().try_inverse().map(|inv| inv * temperature)).and_then(|c| c.cholesky()) else {
                return invalid("Gibbs sampling needs a positive-definite stiffness (every mass pinned)");
            };
            return Ok(GibbsSampler::Gaussian {
                temperature,
                position_factor: chol.l(),
            });
        }
        let mut bounds = Vec::with_capacity(model.vertex_count());
        for (v, u) in model.pinning().iter().enumerate() {
            let Some(u) = u else {
                return invalid(format!(
                    "vertex {v} is unpinned; supported forms are fully quadratic models or every mass pinned by soft power, even power or quadratic potentials"
                ));
            };
            let Some(b) = quadratic_lower_bound(u) else {
                return invalid(format!(
                    "pinning of vertex {v} is a local polynomial; supported pinning families are soft power, even power and quadratic"
                ));
            };
            bounds.push(b);
        }
        let mut floor = 0.0;
        for pot in model.interaction() {
            if matches!(pot.family(), Family::LocalPiece { .. }) {
                return invalid("local polynomial interactions cannot be Gibbs sampled");
            }
            floor += pot.value(&vec![0.0; pot.dim()]);
        }
        let mut sampler = GibbsSampler::Rejection {
            temperature,
            bounds,
            interaction_floor: floor,
            acceptance: 1.0,
        };
        let mut stream = rng::seed_stream(0x6962_6273, 0);
        let mut accepted = 0;
        let mut q = vec![0.0; model.vertex_count() * model.dim()];
        for _ in 0..PILOT {
            if sampler.propose(model, &mut stream, &mut q) {
                accepted += 1;
            }
        }
        let rate = accepted as f64 / PILOT as f64;
        if rate < ACCEPTANCE_FLOOR {
            return Err(Error::Diagnostic(format!(
                "rejection sampler acceptance {rate} is below the floor {ACCEPTANCE_FLOOR}"
            )));
        }
        if let GibbsSampler::Rejection { acceptance, .. } = &mut sampler {
            *acceptance = rate;
        }
        Ok(sampler)
    }

    pub fn name(&self) -> &'static str {
        match self {
            GibbsSampler::Gaussian { .. } => "gaussian",
            GibbsSampler::Rejection { .. } => "rejection",
        }
    }

    pub fn acceptance(&self) -> f64 {
        match self {
            GibbsSampler::Gaussian { .. } => 1.0,
            GibbsSampler::Rejection { acceptance, .. } => *acceptance,
        }
    }

    /// One rejection-sampling proposal into `q`; returns whether it was kept.
    fn propose(&self, model: &Model, stream: &mut Stream, q: &mut [f64]) -> bool {
        let GibbsSampler::Rejection {
            temperature,
            bounds,
            interaction_floor,
            ..
        } = self
        else {
            unreachable!("proposals only exist for the rejection sampler");
        };
        let n = model.dim();
        let mut low = *interaction_floor;
        for (v, &(c, a)) in bounds.iter().enumerate() {
            let sd = (temperature / (2.0 * a)).sqrt();
            for k in 0..n {
                q[v * n + k] = sd * rng::normal(stream);
            }
            let r2: f64 = q[v * n..(v + 1) * n].iter().map(|x| x * x).sum();
            low += c + a * r2;
        }
        let state = State {
            dim: n,
            p: vec![0.0; q.len()],
            q: q.to_vec(),
        };
        let potential = model.energies(&state).h;
        let u: f64 = rand::Rng::random(stream);
        u < (-(potential - low) / temperature).exp()
    }

    pub fn sample(&self, model: &Model, stream: &mut Stream) -> State {
        let n = model.dim();
        let m = model.vertex_count() * n;
        let mut state = State::zeros(model.vertex_count(), n);
        match self {
            GibbsSampler::Gaussian {
                temperature,
                position_factor,
            } => {
                let mut xi = vec![0.0; m];
                rng::fill_normal(stream, &mut xi);
                for i in 0..m {
                    state.q[i] = (0..=i).map(|j| position_factor[(i, j)] * xi[j]).sum();
                }
                rng::fill_normal(stream, &mut state.p);
                let sd = temperature.sqrt();
                state.p.iter_mut().for_each(|x| *x *= sd);
            }
            GibbsSampler::Rejection { temperature, .. } => {
                let mut q = vec![0.0; m];
                while !self.propose(model, stream, &mut q) {}
                state.q = q;
                rng::fill_normal(stream, &mut state.p);
                let sd = temperature.sqrt();
                state.p.iter_mut().for_each(|x| *x *= sd);
            }
        }
        state
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsOptions {
    pub observables: Vec<Observable>,
    pub samples: usize,
    pub t_check: f64,
    pub h: f64,
    /// Temperature of the initial Gibbs measure; defaults to the common bath
    /// temperature and is required when the baths differ.
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObservableShift {
    pub name: String,
    pub before: Estimate,
    pub after: Estimate,
    /// Paired difference `f(z_t) − f(z_0)`.
    pub difference: Estimate,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GibbsReport {
    pub sampler: &'static str,
    pub acceptance: f64,
    pub temperature: f64,
    pub equal_temperatures: bool,
    pub samples: usize,
    pub t_check: f64,
    pub observables: Vec<ObservableShift>,
    pub max_abs_z: f64,
}

pub fn gibbs_invariance_test(model: &Model, options: &GibbsOptions, seed: u64) -> Result<GibbsReport> {
    let temps: Vec<f64> = model.bath_params().iter().map(|b| b.temperature).collect();
    let equal = temps.windows(2).all(|w| w[0] == w[1]);
    let temperature = match (options.temperature, equal, temps.first()) {
        (Some(t), _, _) => t,
        (None, true, Some(&t)) => t,
        (None, true, None) => return invalid("a model without baths needs an explicit sampling temperature"),
        (None, false, _) => {
            return invalid("bath temperatures differ; give the sampling temperature explicitly")
        }
    };
    if options.samples < 2 {
        return invalid("need at least two samples");
    }
    if !(options.h > 0.0 && options.t_check > 0.0) {
        return invalid("step size and check time must be positive");
    }
    for obs in &options.observables {
        obs.validate(model)?;
    }
    let sampler = GibbsSampler::new(model, temperature)?;
    let steps = ((options.t_check / options.h) - 1e-9).ceil() as usize;
    let k = options.observables.len();
    let rows: Vec<Result<Vec<(f64, f64)>>> = (0..options.samples)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng::seed_stream(seed, i as u64);
            let z0 = sampler.sample(model, &mut stream);
            let before: Vec<f64> = options.observables.iter().map(|o| o.eval(model, &z0)).collect();
            let mut stepper = Stepper::new(model, z0)?;
            for _ in 0..steps {
                stepper.step_sde(options.h, &mut stream)?;
            }
            Ok(options
                .observables
                .iter()
                .zip(before)
                .map(|(o, b)| (b, o.eval(model, stepper.state())))
                .collect())
        })
        .collect();
    let rows: Vec<Vec<(f64, f64)>> = rows.into_iter().collect::<Result<_>>()?;
    let observables: Vec<ObservableShift> = (0..k)
        .map(|j| {
            let before: Vec<f64> = rows.iter().map(|r| r[j].0).collect();
            let after: Vec<f64> = rows.iter().map(|r| r[j].1).collect();
            let diff: Vec<f64> = rows.iter().map(|r| r[j].1 - r[j].0).collect();
            let difference = mean_se(&diff);
            let z = if difference.se > 0.0 {
                difference.mean / difference.se
            } else {
                0.0
            };
            ObservableShift {
                name: options.observables[j].name(),
                before: mean_se(&before),
                after: mean_se(&after),
                difference,
                z,
            }
        })
        .collect();
    Ok(GibbsReport {
        sampler: sampler.name(),
        acceptance: sampler.acceptance(),
        temperature,
        equal_temperatures: equal,
        samples: options.samples,
        t_check: options.t_check,
        max_abs_z: observables.iter().map(|o| o.z.abs()).fold(0.0, f64::max),
        observables,
    })
}
