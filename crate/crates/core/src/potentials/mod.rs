//! Pinning and interaction potentials.
//!
//! Four closed families are supported:
//!
//! * `SoftPower { degree: r }`: `V(x) = (1 + ‖x‖²)^{r/2}`, real `r ≥ 2`, limit `‖x‖^r`.
//! * `EvenPower { degree: r }`: `V(x) = ‖x‖^r`, even `r ≥ 2`, its own limit.
//! * `Quadratic { stiffness: K }`: `V(x) = ½ x·Kx` with `K` symmetric positive definite.
//! * `LocalPiece`: an explicit polynomial plus an additive offset. Its limit
//!   is the homogeneous part of top degree. Used for the local counterexample
//!   potentials, which are only meaningful near the point they describe.
//!
//! Gradients are analytic for every family. Higher derivatives (needed by the
//! non-degeneracy check) come from a truncated Taylor [`jet::Jet`].

mod checks;
mod conditions;
pub mod jet;
mod poly;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use jet::Jet;

pub use checks::{
    check_coercive_limit, check_near_homogeneous, check_nondegenerate, default_nondegeneracy_samples,
    sphere_points, CoercivityReport, HomogeneityDeviation, NondegeneracyReport, MAX_NONDEGENERACY_ORDER,
};
pub use conditions::{
    check_conditions, C1Report, C2EdgeReport, C3Report, C4Verdict, C5Report, ConditionOptions, ConditionReport,
};
pub use poly::{Monomial, Polynomial};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    SoftPower { degree: f64 },
    EvenPower { degree: u32 },
    /// Row-major `n × n` stiffness matrix.
    Quadratic { stiffness: Vec<f64> },
    LocalPiece { terms: Polynomial, offset: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct PotentialSpec {
    #[serde(flatten)]
    family: Family,
    dim: usize,
}

#[derive(Deserialize)]
struct RawSpec {
    #[serde(flatten)]
    family: Family,
    dim: usize,
}

impl TryFrom<RawSpec> for PotentialSpec {
    type Error = crate::Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        PotentialSpec::new(raw.family, raw.dim)
    }
}

impl PotentialSpec {
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("potential dimension must be at least 1");
        }
        match &family {
            Family::SoftPower { degree } => {
                if !(degree.is_finite() && *degree >= 2.0) {
                    return invalid(format!("soft power degree must be a real number >= 2, got {degree}"));
                }
            }
            Family::EvenPower { degree } => {
                if *degree < 2 || degree % 2 != 0 {
                    return invalid(format!("even power degree must be an even integer >= 2, got {degree}"));
                }
            }
            Family::Quadratic { stiffness } => check_stiffness(stiffness, dim)?,
            Family::LocalPiece { terms, offset } => {
                if !offset.is_finite() {
                    return invalid("local piece offset must be finite");
                }
                if terms.terms.is_empty() {
                    return invalid("local piece needs at least one term");
                }
                for t in &terms.terms {
                    if t.powers.len() != dim {
                        return invalid(format!(
                            "local piece monomial has {} exponents, dimension is {dim}",
                            t.powers.len()
                        ));
                    }
                    if !t.coef.is_finite() {
                        return invalid("local piece coefficients must be finite");
                    }
                }
            }
        }
        Ok(Self { family, dim })
    }

    pub fn soft_power(degree: f64, dim: usize) -> Result<Self> {
        Self::new(Family::SoftPower { degree }, dim)
    }

    pub fn even_power(degree: u32, dim: usize) -> Result<Self> {
        Self::new(Family::EvenPower { degree }, dim)
    }

    /// `½ k ‖x‖²`
    pub fn isotropic_quadratic(k: f64, dim: usize) -> Result<Self> {
        let mut stiffness = vec![0.0; dim * dim];
        for i in 0..dim {
            stiffness[i * dim + i] = k;
        }
        Self::new(Family::Quadratic { stiffness }, dim)
    }

    pub fn quadratic(stiffness: Vec<f64>, dim: usize) -> Result<Self> {
        Self::new(Family::Quadratic { stiffness }, dim)
    }

    pub fn local_piece(terms: Vec<Monomial>, offset: f64, dim: usize) -> Result<Self> {
        Self::new(
            Family::LocalPiece {
                terms: Polynomial::new(terms),
                offset,
            },
            dim,
        )
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::SoftPower { .. } => "soft_power",
            Family::EvenPower { .. } => "even_power",
            Family::Quadratic { .. } => "quadratic",
            Family::LocalPiece { .. } => "local_piece",
        }
    }

    /// Homogeneity degree of the limiting form.
    pub fn degree(&self) -> f64 {
        match &self.family {
            Family::SoftPower { degree } => *degree,
            Family::EvenPower { degree } => f64::from(*degree),
            Family::Quadratic { .. } => 2.0,
            Family::LocalPiece { terms, .. } => f64::from(terms.degree()),
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.family, Family::Quadratic { .. })
    }

    pub fn stiffness(&self) -> Option<&[f64]> {
        match &self.family {
            Family::Quadratic { stiffness } => Some(stiffness),
            _ => None,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return invalid(format!("expected a {}-vector, got length {}", self.dim, x.len()));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.value(x))
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.dim];
        self.gradient_into(x, &mut out);
        Ok(out)
    }

    pub fn limiting_eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.limiting_value(x))
    }

    pub fn limiting_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.dim];
        self.limiting_gradient_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked value; `x.len()` must equal the dimension.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.family {
            Family::SoftPower { degree } => real_pow(1.0 + norm2(x), 0.5 * degree),
            Family::EvenPower { degree } => norm2(x).powi((degree / 2) as i32),
            Family::Quadratic { stiffness } => 0.5 * quad_form(stiffness, x),
            Family::LocalPiece { terms, offset } => terms.eval(x) + offset,
        }
    }

    #[inline]
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        match &self.family {
            Family::SoftPower { degree } => {
                let c = degree * real_pow(1.0 + norm2(x), 0.5 * degree - 1.0);
                scale_into(x, c, out);
            }
            Family::EvenPower { degree } => {
                let c = f64::from(*degree) * norm2(x).powi((degree / 2 - 1) as i32);
                scale_into(x, c, out);
            }
            Family::Quadratic { stiffness } => mat_vec(stiffness, x, out),
            Family::LocalPiece { terms, .. } => terms.gradient_into(x, out),
        }
    }

    pub fn limiting_value(&self, x: &[f64]) -> f64 {
        match &self.family {
            Family::SoftPower { degree } => real_pow(norm2(x), 0.5 * degree),
            Family::EvenPower { .. } | Family::Quadratic { .. } => self.value(x),
            Family::LocalPiece { terms, .. } => terms.leading_part().eval(x),
        }
    }

    pub fn limiting_gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.family {
            Family::SoftPower { degree } => {
                let c = degree * real_pow(norm2(x), 0.5 * degree - 1.0);
                scale_into(x, c, out);
            }
            Family::EvenPower { .. } | Family::Quadratic { .. } => self.gradient_into(x, out),
            Family::LocalPiece { terms, .. } => terms.leading_part().gradient_into(x, out),
        }
    }

    /// Taylor jet of the potential at `x` up to total order `order`.
    pub fn taylor_jet(&self, x: &[f64], order: u32) -> Result<Jet> {
        self.check_dim(x)?;
        let dim = self.dim;
        let s = norm2(x);
        let jet = match &self.family {
            Family::SoftPower { degree } => {
                let half = 0.5 * degree;
                let derivs: Vec<f64> = (0..=order)
                    .map(|k| falling_real(half, k) * (1.0 + s).powf(half - f64::from(k)))
                    .collect();
                Jet::radial(x, order, &derivs)
            }
            Family::EvenPower { degree } => {
                let m = degree / 2;
                let derivs: Vec<f64> = (0..=order)
                    .map(|k| {
                        if k > m {
                            0.0
                        } else {
                            falling_real(f64::from(m), k) * s.powi((m - k) as i32)
                        }
                    })
                    .collect();
                Jet::radial(x, order, &derivs)
            }
            Family::Quadratic { stiffness } => {
                let mut jet = Jet::constant(dim, order, self.value(x));
                let mut g = vec![0.0; dim];
                mat_vec(stiffness, x, &mut g);
                for i in 0..dim {
                    let mut e = vec![0; dim];
                    e[i] = 1;
                    jet.add_term(e, g[i]);
                    for j in 0..dim {
                        let mut e = vec![0; dim];
                        e[i] += 1;
                        e[j] += 1;
                        jet.add_term(e, 0.5 * stiffness[i * dim + j]);
                    }
                }
                jet
            }
            Family::LocalPiece { terms, offset } => {
                let mut jet = Jet::constant(dim, order, *offset);
                for k in 0..=order {
                    for alpha in jet::multi_indices(dim, k) {
                        let factorial: f64 = alpha
                            .iter()
                            .map(|&a| (1..=a).map(f64::from).product::<f64>())
                            .product();
                        jet.add_term(alpha.clone(), terms.derivative(x, &alpha) / factorial);
                    }
                }
                jet
            }
        };
        Ok(jet)
    }

    /// Flagged analytic verdict on local injectivity of the limiting force:
    /// strictly convex limits give `Some(true)`, polynomial pieces `None`.
    pub fn limiting_force_injective(&self) -> Option<bool> {
        match self.family {
            Family::SoftPower { .. } | Family::EvenPower { .. } | Family::Quadratic { .. } => Some(true),
            Family::LocalPiece { .. } => None,
        }
    }
}

fn check_stiffness(k: &[f64], dim: usize) -> Result<()> {
    if k.len() != dim * dim {
        return invalid(format!("stiffness must have {} entries, got {}", dim * dim, k.len()));
    }
    if k.iter().any(|v| !v.is_finite()) {
        return invalid("stiffness entries must be finite");
    }
    let scale = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..dim {
        for j in 0..i {
            if (k[i * dim + j] - k[j * dim + i]).abs() > 1e-12 * scale.max(1.0) {
                return invalid("stiffness matrix must be symmetric");
            }
        }
    }
    let m = DMatrix::from_row_slice(dim, dim, k);
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return invalid("stiffness matrix must be positive definite");
    }
    Ok(())
}

/// `base^e`, through `powi` when the exponent is a small integer.
#[inline]
fn real_pow(base: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < 64.0 {
        base.powi(e as i32)
    } else {
        base.powf(e)
    }
}

fn falling_real(a: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a - f64::from(j)))
}

#[inline]
pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[inline]
fn scale_into(x: &[f64], c: f64, out: &mut [f64]) {
    for (o, xi) in out.iter_mut().zip(x) {
        *o = c * xi;
    }
}

#[inline]
fn mat_vec(k: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..n).map(|j| k[i * n + j] * x[j]).sum();
    }
}

#[inline]
fn quad_form(k: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += x[i] * k[i * n + j] * x[j];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_of_simple_potentials() {
        assert_eq!(PotentialSpec::soft_power(4.0, 2).unwrap().eval(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(PotentialSpec::even_power(2, 2).unwrap().eval(&[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(PotentialSpec::isotropic_quadratic(1.0, 2).unwrap().eval(&[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn gradients_of_simple_potentials() {
        assert_eq!(PotentialSpec::even_power(4, 2).unwrap().grad(&[1.0, 0.0]).unwrap(), vec![4.0, 0.0]);
        assert_eq!(PotentialSpec::soft_power(2.0, 2).unwrap().grad(&[2.0, 0.0]).unwrap(), vec![4.0, 0.0]);
    }

    #[test]
    fn limiting_soft_power_is_pure_power() {
        let v = PotentialSpec::soft_power(4.0, 2).unwrap();
        assert_eq!(v.limiting_eval(&[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(v.limiting_grad(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let v = PotentialSpec::soft_power(4.0, 2).unwrap();
        assert!(v.eval(&[1.0]).is_err());
        assert!(v.grad(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn construction_validates_parameters() {
        assert!(PotentialSpec::soft_power(1.5, 1).is_err());
        assert!(PotentialSpec::even_power(3, 1).is_err());
        assert!(PotentialSpec::even_power(0, 1).is_err());
        assert!(PotentialSpec::quadratic(vec![1.0, 0.5, 0.4, 1.0], 2).is_err());
        assert!(PotentialSpec::quadratic(vec![1.0, 2.0, 2.0, 1.0], 2).is_err());
        assert!(PotentialSpec::quadratic(vec![1.0], 2).is_err());
        assert!(PotentialSpec::local_piece(vec![Monomial::new(1.0, &[4])], 0.0, 2).is_err());
        assert!(PotentialSpec::isotropic_quadratic(1.0, 0).is_err());
    }

    #[test]
    fn degrees() {
        assert_eq!(PotentialSpec::soft_power(3.5, 1).unwrap().degree(), 3.5);
        assert_eq!(PotentialSpec::isotropic_quadratic(2.0, 3).unwrap().degree(), 2.0);
        let p = PotentialSpec::local_piece(vec![Monomial::new(0.25, &[0, 4, 0]), Monomial::new(0.5, &[2, 0, 2])], 0.0, 3)
            .unwrap();
        assert_eq!(p.degree(), 4.0);
    }

    #[test]
    fn soft_power_jet_matches_gradient() {
        let v = PotentialSpec::soft_power(3.0, 2).unwrap();
        let x = [0.3, -1.2];
        let jet = v.taylor_jet(&x, 3).unwrap();
        let g = v.grad(&x).unwrap();
        assert!((jet.derivative(&[1, 0]) - g[0]).abs() < 1e-12);
        assert!((jet.derivative(&[0, 1]) - g[1]).abs() < 1e-12);
        assert!((jet.derivative(&[0, 0]) - v.value(&x)).abs() < 1e-12);
    }
}
