use serde::{Deserialize, Serialize};

/// `coef · Π x_i^{powers[i]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

impl Monomial {
    pub fn new(coef: f64, powers: &[u32]) -> Self {
        Self {
            coef,
            powers: powers.to_vec(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(x)
            .fold(self.coef, |acc, (&k, &xi)| acc * xi.powi(k as i32))
    }

    /// `D^beta` of the monomial at `x`.
    pub fn derivative(&self, x: &[f64], beta: &[u32]) -> f64 {
        let mut value = self.coef;
        for ((&k, &b), &xi) in self.powers.iter().zip(beta).zip(x) {
            if b > k {
                return 0.0;
            }
            value *= falling(k, b) * xi.powi((k - b) as i32);
        }
        value
    }
}

fn falling(k: u32, b: u32) -> f64 {
    (0..b).fold(1.0, |acc, j| acc * f64::from(k - j))
}

/// A polynomial as a plain list of monomials (repeated exponents are summed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|t| t.coef != 0.0)
            .map(Monomial::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut beta = vec![0u32; x.len()];
        for (i, o) in out.iter_mut().enumerate() {
            beta[i] = 1;
            *o = self.terms.iter().map(|t| t.derivative(x, &beta)).sum();
            beta[i] = 0;
        }
    }

    pub fn derivative(&self, x: &[f64], beta: &[u32]) -> f64 {
        self.terms.iter().map(|t| t.derivative(x, beta)).sum()
    }

    /// The homogeneous part of top degree.
    pub fn leading_part(&self) -> Polynomial {
        let d = self.degree();
        Polynomial::new(
            self.terms
                .iter()
                .filter(|t| t.degree() == d && t.coef != 0.0)
                .cloned()
                .collect(),
        )
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.degree();
        self.terms.iter().all(|t| t.coef == 0.0 || t.degree() == d)
    }
}
