//! Truncated multivariate Taylor expansions.
//!
//! A [`Jet`] holds the Taylor coefficients of a function around a point up
//! to a fixed total order, keyed by multi-index. Radial potentials `φ(‖x‖²)`
//! are expanded by composing the scalar Taylor series of `φ` with the exact
//! polynomial `‖x + h‖² − ‖x‖² = 2x·h + ‖h‖²`.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    dim: usize,
    order: u32,
    coeffs: BTreeMap<Vec<u32>, f64>,
}

impl Jet {
    pub fn zero(dim: usize, order: u32) -> Self {
        Self {
            dim,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, order: u32, c: f64) -> Self {
        let mut j = Self::zero(dim, order);
        j.add_term(vec![0; dim], c);
        j
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn add_term(&mut self, alpha: Vec<u32>, c: f64) {
        debug_assert_eq!(alpha.len(), self.dim);
        if alpha.iter().sum::<u32>() <= self.order && c != 0.0 {
            *self.coeffs.entry(alpha).or_insert(0.0) += c;
        }
    }

    pub fn coefficient(&self, alpha: &[u32]) -> f64 {
        self.coeffs.get(alpha).copied().unwrap_or(0.0)
    }

    /// `D^alpha f(x) = alpha! · coefficient(alpha)`.
    pub fn derivative(&self, alpha: &[u32]) -> f64 {
        let factorial: f64 = alpha
            .iter()
            .map(|&k| (1..=k).map(f64::from).product::<f64>())
            .product();
        factorial * self.coefficient(alpha)
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let mut out = Jet::zero(self.dim, self.order);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(sum, ca * cb);
            }
        }
        out
    }

    pub fn scaled_add(&mut self, other: &Jet, s: f64) {
        for (a, c) in &other.coeffs {
            self.add_term(a.clone(), s * c);
        }
    }

    /// Jet of `x ↦ φ(‖x‖²)` at `x`, given `φ^{(k)}(‖x‖²)` for k = 0..=order.
    pub fn radial(x: &[f64], order: u32, phi_derivs: &[f64]) -> Jet {
        let dim = x.len();
        let mut u = Jet::zero(dim, order);
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = 1;
            u.add_term(e.clone(), 2.0 * x[i]);
            e[i] = 2;
            u.add_term(e, 1.0);
        }
        let mut out = Jet::constant(dim, order, phi_derivs[0]);
        let mut power = Jet::constant(dim, order, 1.0);
        let mut factorial = 1.0;
        for (k, &d) in phi_derivs.iter().enumerate().skip(1) {
            power = power.mul(&u);
            factorial *= k as f64;
            out.scaled_add(&power, d / factorial);
        }
        out
    }
}

/// All multi-indices of dimension `dim` with total order exactly `k`.
pub fn multi_indices(dim: usize, k: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim - 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=k).rev() {
            prefix.push(first);
            rec(dim, k - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, k, &mut Vec::with_capacity(dim), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_jet_of_squared_norm() {
        // φ(s) = s gives ‖x‖²: gradient 2x, Hessian 2I.
        let x = [1.0, -3.0];
        let jet = Jet::radial(&x, 3, &[10.0, 1.0, 0.0, 0.0]);
        assert_eq!(jet.derivative(&[0, 0]), 10.0);
        assert_eq!(jet.derivative(&[1, 0]), 2.0);
        assert_eq!(jet.derivative(&[0, 1]), -6.0);
        assert_eq!(jet.derivative(&[2, 0]), 2.0);
        assert_eq!(jet.derivative(&[1, 1]), 0.0);
        assert_eq!(jet.derivative(&[3, 0]), 0.0);
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1, 4), vec![vec![4]]);
        assert_eq!(multi_indices(2, 2).len(), 3);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(3, 0), vec![vec![0, 0, 0]]);
    }
}
