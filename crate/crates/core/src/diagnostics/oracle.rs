//! Exact second moments of fully quadratic models.
//!
//! With every potential quadratic the dynamics is an Ornstein–Uhlenbeck
//! process `dz = A z dt + σ dW` in the ordering `z = (p, q)`:
//!
//! ```text
//! A = [ −Γ  −K ]      2D = σσᵀ = [ 2ΓT  0 ]
//!     [  I   0 ]                 [  0   0 ]
//! ```
//!
//! and its stationary covariance solves `AΣ + ΣAᵀ + 2D = 0`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::Model;
use crate::error::{invalid, Error, Result};

/// Largest state dimension handed to the dense Kronecker solve.
const MAX_STATE_DIM: usize = 64;

#[derive(Debug, Clone)]
pub struct GaussianOracle {
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
    /// `‖AΣ + ΣAᵀ + 2D‖_max`
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub state_dim: usize,
    pub residual: f64,
    pub spectral_abscissa: f64,
    pub covariance: Vec<Vec<f64>>,
}

/// Drift and diffusion matrices of a fully quadratic model.
pub fn linear_drift(model: &Model) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let Some(k) = model.stiffness_matrix() else {
        return invalid("the Gaussian oracle needs every potential to be quadratic");
    };
    let n = model.dim();
    let m = k.nrows();
    let mut a = DMatrix::zeros(2 * m, 2 * m);
    let mut d = DMatrix::zeros(2 * m, 2 * m);
    for v in 0..model.vertex_count() {
        let vid = crate::graph::VertexId(v);
        let g = model.gamma(vid);
        let t = model.temperature(vid);
        for c in 0..n {
            let i = v * n + c;
            a[(i, i)] = -g;
            d[(i, i)] = g * t;
        }
    }
    for i in 0..m {
        for j in 0..m {
            a[(i, m + j)] = -k[(i, j)];
        }
        a[(m + i, i)] = 1.0;
    }
    Ok((a, d))
}

pub fn gaussian_stationary_covariance(model: &Model) -> Result<GaussianOracle> {
    let (a, d) = linear_drift(model)?;
    let dim = a.nrows();
    if dim > MAX_STATE_DIM {
        return invalid(format!(
            "state dimension {dim} exceeds the dense solver limit {MAX_STATE_DIM}"
        ));
    }
    let covariance = solve_lyapunov(&a, &d)?;
    let residual = lyapunov_residual(&a, &d, &covariance);
    let scale = d.amax().max(1.0);
    if !(residual <= 1e-10 * scale) {
        return Err(Error::Diagnostic(format!(
            "Lyapunov residual {residual:e} too large; the stationary covariance is not unique"
        )));
    }
    Ok(GaussianOracle {
        drift: a,
        diffusion: d,
        covariance,
        residual,
    })
}

/// Dense solve of `AΣ + ΣAᵀ + 2D = 0` through `(I⊗A + A⊗I) vec Σ = −2 vec D`.
pub fn solve_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut l = DMatrix::zeros(n * n, n * n);
    // Column-major vec: entry (i, j) of Σ sits at j·n + i.
    for j in 0..n {
        for i in 0..n {
            let row = j * n + i;
            for k in 0..n {
                l[(row, j * n + k)] += a[(i, k)];
                l[(row, k * n + i)] += a[(j, k)];
            }
        }
    }
    let rhs = DVector::from_iterator(n * n, d.iter().map(|x| -2.0 * x));
    let lu = l.lu();
    let Some(x) = lu.solve(&rhs) else {
        return Err(Error::Diagnostic("Lyapunov system is singular".into()));
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diagnostic("Lyapunov system is singular".into()));
    }
    let s = DMatrix::from_column_slice(n, n, x.as_slice());
    Ok((&s + s.transpose()) * 0.5)
}

pub fn lyapunov_residual(a: &DMatrix<f64>, d: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
    (a * s + s * a.transpose() + d * 2.0).amax()
}

impl GaussianOracle {
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        let mut ev: Vec<Complex<f64>> = self.drift.complex_eigenvalues().iter().copied().collect();
        ev.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
        ev
    }

    /// `max Re λ(A)`; negative for a mixing model.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues()[0].re
    }

    pub fn summary(&self) -> OracleSummary {
        let n = self.covariance.nrows();
        OracleSummary {
            state_dim: n,
            residual: self.residual,
            spectral_abscissa: self.spectral_abscissa(),
            covariance: (0..n).map(|i| (0..n).map(|j| self.covariance[(i, j)]).collect()).collect(),
        }
    }
}

/// Covariance of the Gibbs measure `∝ e^{−H/T}` in the `(p, q)` ordering:
/// `T·I` for momenta and `T K⁻¹` for positions.
pub fn gibbs_covariance(model: &Model, temperature: f64) -> Result<DMatrix<f64>> {
    let Some(k) = model.stiffness_matrix() else {
        return invalid("the Gibbs covariance is only closed-form for quadratic models");
    };
    if !(temperature > 0.0) {
        return invalid("temperature must be positive");
    }
    let m = k.nrows();
    let Some(chol) = k.cholesky() else {
        return invalid("stiffness matrix is not positive definite (unpinned network?)");
    };
    let kinv = chol.inverse();
    let mut s = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        s[(i, i)] = temperature;
        for j in 0..m {
            s[(m + i, m + j)] = temperature * kinv[(i, j)];
        }
    }
    Ok(s)
}
