//! The network Hamiltonian and its Langevin dynamics.
//!
//! Masses are 1. For a state `z = (p, q)` the energy is
//!
//! ```text
//! H = Σ_v (|p_v|²/2 + U_v(q_v)) + Σ_e V_e(q_b − q_a)
//! ```
//!
//! and bath vertices additionally feel friction `−γ_b p_b` and noise of
//! strength `√(2 γ_b T_b)`.

mod counterexample;
mod integrator;
mod noise;
mod scaling;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{NetworkTopology, VertexId};
use crate::potentials::PotentialSpec;

pub use counterexample::{
    counterexample_model, run_counterexample, CounterexampleOptions, CounterexampleRun, ValidityRegion,
};
pub use integrator::{
    integrate, integrate_deterministic, step_sde, DeterministicOptions, IntegrateOptions, Stepper, Trace,
    BLOWUP_FACTOR,
};
pub use noise::{CoarsenedNoise, NoiseSource, Silent};
pub use scaling::{
    prepare_state, rescale_state, tau, u_infinity, Placement, RescaleMode, TimescaleRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub gamma: f64,
    pub temperature: f64,
}

/// The complete SDE definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    topology: NetworkTopology,
    dim: usize,
    pinning: Vec<Option<PotentialSpec>>,
    interaction: Vec<PotentialSpec>,
    /// Per vertex; zero off the bath set.
    gamma: Vec<f64>,
    temperature: Vec<f64>,
    /// Nonzero entries of the stiffness matrix when every potential is quadratic.
    linear: Option<Vec<(usize, usize, f64)>>,
}

impl Model {
    /// `pinning` is per vertex (`None` = unpinned), `interaction` parallel to
    /// `topology.edges()`, `baths` parallel to `topology.baths()`.
    ///
    /// Bath temperatures may be zero (pure friction); friction must be positive.
    pub fn new(
        topology: NetworkTopology,
        dim: usize,
        pinning: Vec<Option<PotentialSpec>>,
        interaction: Vec<PotentialSpec>,
        baths: Vec<BathParams>,
    ) -> Result<Self> {
        let count = topology.vertex_count();
        if dim == 0 {
            return invalid("spatial dimension must be at least 1");
        }
        if pinning.len() != count {
            return invalid(format!("expected {count} pinning entries, got {}", pinning.len()));
        }
        if interaction.len() != topology.edges().len() {
            return invalid(format!(
                "expected {} interaction potentials, got {}",
                topology.edges().len(),
                interaction.len()
            ));
        }
        if baths.len() != topology.baths().len() {
            return invalid(format!(
                "expected parameters for {} baths, got {}",
                topology.baths().len(),
                baths.len()
            ));
        }
        for (v, u) in pinning.iter().enumerate() {
            if let Some(u) = u {
                if u.dim() != dim {
                    return invalid(format!("pinning potential of vertex {v} has dimension {}, model has {dim}", u.dim()));
                }
            }
        }
        for (k, e) in interaction.iter().enumerate() {
            if e.dim() != dim {
                return invalid(format!("interaction potential of edge {k} has dimension {}, model has {dim}", e.dim()));
            }
        }
        let mut gamma = vec![0.0; count];
        let mut temperature = vec![0.0; count];
        for (b, params) in topology.baths().iter().zip(&baths) {
            if !(params.gamma > 0.0 && params.gamma.is_finite()) {
                return invalid(format!("friction at bath {b} must be positive, got {}", params.gamma));
            }
            if !(params.temperature >= 0.0 && params.temperature.is_finite()) {
                return invalid(format!(
                    "temperature at bath {b} must be non-negative, got {}",
                    params.temperature
                ));
            }
            gamma[b.0] = params.gamma;
            temperature[b.0] = params.temperature;
        }
        let mut model = Self {
            topology,
            dim,
            pinning,
            interaction,
            gamma,
            temperature,
            linear: None,
        };
        model.linear = model.stiffness_matrix().map(|k| {
            let m = k.nrows();
            let mut entries = Vec::new();
            for i in 0..m {
                for j in 0..m {
                    if k[(i, j)] != 0.0 {
                        entries.push((i, j, k[(i, j)]));
                    }
                }
            }
            entries
        });
        Ok(model)
    }

    /// The Hessian `K` of the potential energy (so `−∇_q H = −K q`) when
    /// every potential is quadratic; coordinates are vertex-major.
    pub fn stiffness_matrix(&self) -> Option<DMatrix<f64>> {
        if !self.is_quadratic() {
            return None;
        }
        let n = self.dim;
        let m = self.vertex_count() * n;
        let mut k = DMatrix::zeros(m, m);
        for (v, u) in self.pinning.iter().enumerate() {
            if let Some(s) = u.as_ref().and_then(PotentialSpec::stiffness) {
                for i in 0..n {
                    for j in 0..n {
                        k[(v * n + i, v * n + j)] += s[i * n + j];
                    }
                }
            }
        }
        for (e, pot) in self.topology.edges().iter().zip(&self.interaction) {
            let s = pot.stiffness().expect("quadratic");
            let (a, b) = (e.a.0, e.b.0);
            for i in 0..n {
                for j in 0..n {
                    let c = s[i * n + j];
                    k[(a * n + i, a * n + j)] += c;
                    k[(b * n + i, b * n + j)] += c;
                    k[(a * n + i, b * n + j)] -= c;
                    k[(b * n + i, a * n + j)] -= c;
                }
            }
        }
        Some(k)
    }

    /// Path `0 – 1 – … – len−1` with identical potentials and baths at both ends.
    pub fn chain(
        len: usize,
        pinning: Option<PotentialSpec>,
        interaction: PotentialSpec,
        gamma: f64,
        end_temperatures: (f64, f64),
    ) -> Result<Self> {
        if len < 2 {
            return invalid("a chain needs at least two masses");
        }
        let dim = interaction.dim();
        let edges: Vec<(usize, usize)> = (0..len - 1).map(|i| (i, i + 1)).collect();
        let topology = NetworkTopology::new(len, &edges, &[0, len - 1])?;
        Self::new(
            topology,
            dim,
            vec![pinning; len],
            vec![interaction; len - 1],
            vec![
                BathParams {
                    gamma,
                    temperature: end_temperatures.0,
                },
                BathParams {
                    gamma,
                    temperature: end_temperatures.1,
                },
            ],
        )
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.topology.vertex_count()
    }

    pub fn pinning(&self) -> &[Option<PotentialSpec>] {
        &self.pinning
    }

    pub fn interaction(&self) -> &[PotentialSpec] {
        &self.interaction
    }

    pub fn gamma(&self, v: VertexId) -> f64 {
        self.gamma[v.0]
    }

    pub fn temperature(&self, v: VertexId) -> f64 {
        self.temperature[v.0]
    }

    pub fn bath_params(&self) -> Vec<BathParams> {
        self.topology
            .baths()
            .iter()
            .map(|b| BathParams {
                gamma: self.gamma[b.0],
                temperature: self.temperature[b.0],
            })
            .collect()
    }

    pub fn t_max(&self) -> f64 {
        self.temperature.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// `n Σ_b γ_b T_b`, the mean rate of energy injected by the baths.
    pub fn input_rate(&self) -> f64 {
        self.dim as f64 * self.gamma.iter().zip(&self.temperature).map(|(g, t)| g * t).sum::<f64>()
    }

    /// Same network and potentials with new bath parameters.
    pub fn with_baths(&self, baths: Vec<BathParams>) -> Result<Self> {
        Self::new(
            self.topology.clone(),
            self.dim,
            self.pinning.clone(),
            self.interaction.clone(),
            baths,
        )
    }

    /// Common degree of all interaction potentials, if there is one.
    pub fn interaction_degree(&self) -> Option<f64> {
        common(self.interaction.iter().map(PotentialSpec::degree))
    }

    /// Common degree of all pinning potentials, if every vertex is pinned
    /// with the same degree.
    pub fn pinning_degree(&self) -> Option<f64> {
        if self.pinning.iter().any(Option::is_none) {
            return None;
        }
        common(self.pinning.iter().flatten().map(PotentialSpec::degree))
    }

    pub fn is_quadratic(&self) -> bool {
        self.interaction.iter().all(PotentialSpec::is_quadratic)
            && self.pinning.iter().flatten().all(PotentialSpec::is_quadratic)
    }

    pub fn zero_state(&self) -> State {
        State::zeros(self.vertex_count(), self.dim)
    }

    fn check_state(&self, state: &State) -> Result<()> {
        let len = self.vertex_count() * self.dim;
        if state.dim != self.dim || state.p.len() != len || state.q.len() != len {
            return invalid(format!(
                "state shape ({} + {} coordinates, dim {}) does not match model ({len}, dim {})",
                state.p.len(),
                state.q.len(),
                state.dim,
                self.dim
            ));
        }
        Ok(())
    }

    /// `(H, H_c, H_i)` without shape checks.
    pub(crate) fn energies(&self, state: &State) -> Energies {
        let n = self.dim;
        let count = self.vertex_count();
        let mut total_p = vec![0.0; n];
        let mut kinetic = 0.0;
        for v in 0..count {
            for k in 0..n {
                let pv = state.p[v * n + k];
                total_p[k] += pv;
                kinetic += pv * pv;
            }
        }
        let pinning: f64 = self
            .pinning
            .iter()
            .enumerate()
            .filter_map(|(v, u)| u.as_ref().map(|u| u.value(&state.q[v * n..(v + 1) * n])))
            .sum();
        let mut delta = vec![0.0; n];
        let mut interaction = 0.0;
        for (e, pot) in self.topology.edges().iter().zip(&self.interaction) {
            for k in 0..n {
                delta[k] = state.q[e.b.0 * n + k] - state.q[e.a.0 * n + k];
            }
            interaction += pot.value(&delta);
        }
        let mean_sq: f64 = total_p.iter().map(|x| x * x).sum::<f64>() / count as f64;
        let mut internal_kinetic = 0.0;
        for v in 0..count {
            for k in 0..n {
                let d = state.p[v * n + k] - total_p[k] / count as f64;
                internal_kinetic += d * d;
            }
        }
        Energies {
            h: 0.5 * kinetic + pinning + interaction,
            hc: 0.5 * mean_sq + pinning,
            hi: 0.5 * internal_kinetic + interaction,
        }
    }

    /// Conservative forces `−∇_q H` into `out`; `limiting` swaps every
    /// potential for its homogeneous limit.
    pub(crate) fn forces_into(&self, q: &[f64], out: &mut [f64], scratch: &mut [f64], limiting: bool) {
        out.iter_mut().for_each(|f| *f = 0.0);
        if let Some(entries) = &self.linear {
            for &(i, j, k) in entries {
                out[i] -= k * q[j];
            }
            return;
        }
        let n = self.dim;
        let (delta, grad) = scratch.split_at_mut(n);
        for (v, u) in self.pinning.iter().enumerate() {
            if let Some(u) = u {
                let x = &q[v * n..(v + 1) * n];
                if limiting {
                    u.limiting_gradient_into(x, grad);
                } else {
                    u.gradient_into(x, grad);
                }
                for k in 0..n {
                    out[v * n + k] -= grad[k];
                }
            }
        }
        for (e, pot) in self.topology.edges().iter().zip(&self.interaction) {
            let (a, b) = (e.a.0, e.b.0);
            for k in 0..n {
                delta[k] = q[b * n + k] - q[a * n + k];
            }
            if limiting {
                pot.limiting_gradient_into(delta, grad);
            } else {
                pot.gradient_into(delta, grad);
            }
            for k in 0..n {
                out[a * n + k] += grad[k];
                out[b * n + k] -= grad[k];
            }
        }
    }
}

fn common(mut it: impl Iterator<Item = f64>) -> Option<f64> {
    let first = it.next()?;
    it.all(|d| d == first).then_some(first)
}

/// Phase point `z = (p, q)`, vertex-major: coordinate `k` of vertex `v`
/// lives at index `v·dim + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub dim: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl State {
    pub fn zeros(vertex_count: usize, dim: usize) -> Self {
        Self {
            dim,
            p: vec![0.0; vertex_count * dim],
            q: vec![0.0; vertex_count * dim],
        }
    }

    pub fn from_rows(p: &[Vec<f64>], q: &[Vec<f64>]) -> Result<Self> {
        let dim = p.first().map_or(0, Vec::len);
        if dim == 0 || p.len() != q.len() || p.iter().chain(q).any(|r| r.len() != dim) {
            return invalid("momentum and position rows must be non-empty and share one shape");
        }
        Ok(Self {
            dim,
            p: p.concat(),
            q: q.concat(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.p.len() / self.dim
    }

    pub fn p_of(&self, v: usize) -> &[f64] {
        &self.p[v * self.dim..(v + 1) * self.dim]
    }

    pub fn q_of(&self, v: usize) -> &[f64] {
        &self.q[v * self.dim..(v + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(&self.q).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energies {
    pub h: f64,
    pub hc: f64,
    pub hi: f64,
}

/// Total energy and its center-of-mass / internal split.
pub fn hamiltonian(model: &Model, state: &State) -> Result<Energies> {
    model.check_state(state)?;
    Ok(model.energies(state))
}

/// `−∇_q H`, one row per vertex flattened like [`State::q`].
pub fn forces(model: &Model, state: &State) -> Result<Vec<f64>> {
    model.check_state(state)?;
    let mut out = vec![0.0; state.q.len()];
    let mut scratch = vec![0.0; 2 * model.dim];
    model.forces_into(&state.q, &mut out, &mut scratch, false);
    Ok(out)
}

/// Total momentum `P` and mean position `Q`.
pub fn com_coords(state: &State) -> (Vec<f64>, Vec<f64>) {
    let n = state.dim;
    let count = state.vertex_count();
    let mut big_p = vec![0.0; n];
    let mut big_q = vec![0.0; n];
    for v in 0..count {
        for k in 0..n {
            big_p[k] += state.p[v * n + k];
            big_q[k] += state.q[v * n + k];
        }
    }
    big_q.iter_mut().for_each(|x| *x /= count as f64);
    (big_p, big_q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> Model {
        let k2 = PotentialSpec::isotropic_quadratic(2.0, 1).unwrap();
        Model::chain(2, Some(k2.clone()), k2, 1.0, (1.0, 1.0)).unwrap()
    }

    #[test]
    fn split_of_two_free_masses() {
        let m = pair();
        let s = State::from_rows(&[vec![1.0], vec![1.0]], &[vec![0.0], vec![0.0]]).unwrap();
        let e = hamiltonian(&m, &s).unwrap();
        assert_eq!((e.h, e.hc, e.hi), (1.0, 1.0, 0.0));
        let s = State::from_rows(&[vec![1.0], vec![-1.0]], &[vec![0.0], vec![0.0]]).unwrap();
        let e = hamiltonian(&m, &s).unwrap();
        assert_eq!((e.h, e.hc, e.hi), (1.0, 0.0, 1.0));
    }

    #[test]
    fn single_pinned_mass_force() {
        let t = NetworkTopology::new(1, &[], &[]).unwrap();
        let m = Model::new(t, 2, vec![Some(PotentialSpec::isotropic_quadratic(1.0, 2).unwrap())], vec![], vec![]).unwrap();
        let s = State::from_rows(&[vec![0.0, 0.0]], &[vec![1.0, 0.0]]).unwrap();
        assert_eq!(forces(&m, &s).unwrap(), vec![-1.0, 0.0]);
    }

    #[test]
    fn center_of_mass() {
        let s = State::from_rows(&[vec![1.0], vec![1.0]], &[vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(com_coords(&s), (vec![2.0], vec![1.0]));
        let s = State::from_rows(
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]],
            &[vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        assert_eq!(com_coords(&s).0, vec![0.0, 0.0]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let m = pair();
        assert!(hamiltonian(&m, &State::zeros(3, 1)).is_err());
        assert!(forces(&m, &State::zeros(2, 2)).is_err());
    }

    #[test]
    fn model_validation() {
        let k = PotentialSpec::isotropic_quadratic(1.0, 1).unwrap();
        assert!(Model::chain(3, None, k.clone(), 0.0, (1.0, 1.0)).is_err());
        assert!(Model::chain(3, None, k.clone(), 1.0, (-1.0, 1.0)).is_err());
        assert!(Model::chain(1, None, k.clone(), 1.0, (1.0, 1.0)).is_err());
        let k2 = PotentialSpec::isotropic_quadratic(1.0, 2).unwrap();
        assert!(Model::chain(3, Some(k2), k.clone(), 1.0, (1.0, 1.0)).is_err());
        let m = Model::chain(3, None, k, 0.5, (1.0, 2.0)).unwrap();
        assert_eq!(m.t_max(), 2.0);
        assert_eq!(m.input_rate(), 1.5);
        assert_eq!(m.pinning_degree(), None);
        assert_eq!(m.interaction_degree(), Some(2.0));
    }
}
