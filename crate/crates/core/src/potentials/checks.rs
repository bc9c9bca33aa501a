//! Sampled numeric checks on single potentials.
//!
//! None of these prove anything about all of ℝⁿ; reports carry a `sampled`
//! marker so that downstream JSON never reads as a proof.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{jet::multi_indices, norm2, PotentialSpec};
use crate::error::{invalid, Result};
use crate::rng;

pub const MAX_NONDEGENERACY_ORDER: u32 = 6;

/// Seed for the fixed random part of the default C2 sample set.
const SAMPLE_SEED: u64 = 0x5eed_c2c2;

#[derive(Debug, Clone, Serialize)]
pub struct NondegeneracyReport {
    pub ell: u32,
    pub tol: f64,
    pub samples: Vec<Vec<f64>>,
    pub ranks: Vec<usize>,
    pub per_sample: Vec<bool>,
    pub passed: bool,
    pub sampled: bool,
}

/// Rank test of the rows `D^α∇V(x)`, `1 ≤ |α| ≤ ell`, at every sample.
///
/// Singular values below `tol` times the largest count as zero.
pub fn check_nondegenerate(spec: &PotentialSpec, samples: &[Vec<f64>], ell: u32, tol: f64) -> Result<NondegeneracyReport> {
    if ell == 0 || ell > MAX_NONDEGENERACY_ORDER {
        return invalid(format!("ell must be in 1..={MAX_NONDEGENERACY_ORDER}, got {ell}"));
    }
    if samples.is_empty() {
        return invalid("non-degeneracy check needs at least one sample");
    }
    if !(tol > 0.0 && tol < 1.0) {
        return invalid(format!("rank tolerance must be in (0, 1), got {tol}"));
    }
    let n = spec.dim();
    let mut ranks = Vec::with_capacity(samples.len());
    for x in samples {
        let jet = spec.taylor_jet(x, ell + 1)?;
        let mut rows: Vec<f64> = Vec::new();
        let mut count = 0;
        for k in 1..=ell {
            for alpha in multi_indices(n, k) {
                for i in 0..n {
                    let mut beta = alpha.clone();
                    beta[i] += 1;
                    rows.push(jet.derivative(&beta));
                }
                count += 1;
            }
        }
        ranks.push(numerical_rank(DMatrix::from_row_slice(count, n, &rows), tol));
    }
    let per_sample: Vec<bool> = ranks.iter().map(|&r| r == n).collect();
    Ok(NondegeneracyReport {
        ell,
        tol,
        samples: samples.to_vec(),
        passed: per_sample.iter().all(|&b| b),
        ranks,
        per_sample,
        sampled: true,
    })
}

fn numerical_rank(m: DMatrix<f64>, tol: f64) -> usize {
    let sv = m.singular_values();
    let max = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if max == 0.0 || !max.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Origin, unit basis vectors and 20 fixed pseudo-random points with norm at most 5.
pub fn default_nondegeneracy_samples(dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dim]];
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        out.push(e);
    }
    let mut stream = rng::seed_stream(SAMPLE_SEED, dim as u64);
    for _ in 0..20 {
        let mut x = vec![0.0; dim];
        rng::fill_normal(&mut stream, &mut x);
        let norm = norm2(&x).sqrt();
        let u: f64 = rand::Rng::random(&mut stream);
        let radius = 5.0 * u.powf(1.0 / dim as f64);
        x.iter_mut().for_each(|v| *v *= radius / norm);
        out.push(x);
    }
    out
}

/// Roughly uniform points on the unit sphere in ℝ^dim.
///
/// Deterministic: both poles in 1-D, equally spaced angles in 2-D, a
/// Fibonacci lattice in 3-D and normalized fixed-seed Gaussians above that.
pub fn sphere_points(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut stream = rng::seed_stream(SAMPLE_SEED, 1000 + dim as u64);
            (0..count)
                .map(|_| {
                    let mut x = vec![0.0; dim];
                    rng::fill_normal(&mut stream, &mut x);
                    let norm = norm2(&x).sqrt();
                    x.iter_mut().for_each(|v| *v /= norm);
                    x
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoercivityReport {
    pub positive: bool,
    pub min_value: f64,
    pub argmin: Vec<f64>,
    pub samples: usize,
    pub sampled: bool,
}

/// Minimum of the limiting form over the unit sphere, by sampling and then
/// projected gradient descent from the best few samples.
pub fn check_coercive_limit(spec: &PotentialSpec, sphere_samples: usize) -> Result<CoercivityReport> {
    if sphere_samples < 100 {
        return invalid(format!("need at least 100 sphere samples, got {sphere_samples}"));
    }
    let pts = sphere_points(spec.dim(), sphere_samples);
    let mut scored: Vec<(f64, Vec<f64>)> = pts.into_iter().map(|x| (spec.limiting_value(&x), x)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scored[0].clone();
    if spec.dim() > 1 {
        for (v, x) in scored.iter().take(5) {
            let refined = descend_on_sphere(spec, x.clone(), *v);
            if refined.0 < best.0 {
                best = refined;
            }
        }
    }
    Ok(CoercivityReport {
        positive: best.0 > 0.0,
        min_value: best.0,
        argmin: best.1,
        samples: sphere_samples,
        sampled: true,
    })
}

fn descend_on_sphere(spec: &PotentialSpec, mut x: Vec<f64>, mut value: f64) -> (f64, Vec<f64>) {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut step = 0.1;
    for _ in 0..500 {
        spec.limiting_gradient_into(&x, &mut g);
        let radial: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        let tangent: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| gi - radial * xi).collect();
        let tnorm = norm2(&tangent).sqrt();
        if tnorm < 1e-13 {
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            let mut y: Vec<f64> = x.iter().zip(&tangent).map(|(xi, ti)| xi - step * ti / tnorm).collect();
            let ny = norm2(&y).sqrt();
            y.iter_mut().for_each(|v| *v /= ny);
            let vy = spec.limiting_value(&y);
            if vy < value {
                x = y;
                value = vy;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (value, x)
}

#[derive(Debug, Clone, Serialize)]
pub struct HomogeneityDeviation {
    pub lambda: f64,
    /// `sup |V(λx)/λ^r − V_∞(x)|`
    pub value: f64,
    /// `sup ‖∇V(λx)/λ^{r−1} − ∇V_∞(x)‖`
    pub gradient: f64,
}

/// Deviation of the rescaled potential from its limit over a sphere sample.
pub fn check_near_homogeneous(spec: &PotentialSpec, lambdas: &[f64]) -> Result<Vec<HomogeneityDeviation>> {
    if lambdas.len() < 3 {
        return invalid("need at least three scale factors");
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("scale factors must be positive and strictly increasing");
    }
    let n = spec.dim();
    let r = spec.degree();
    let pts = sphere_points(n, 200);
    let mut g = vec![0.0; n];
    let mut g_inf = vec![0.0; n];
    let mut y = vec![0.0; n];
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let mut dev = HomogeneityDeviation {
                lambda,
                value: 0.0,
                gradient: 0.0,
            };
            for x in &pts {
                y.iter_mut().zip(x).for_each(|(yi, xi)| *yi = lambda * xi);
                let dv = (spec.value(&y) / lambda.powf(r) - spec.limiting_value(x)).abs();
                spec.gradient_into(&y, &mut g);
                spec.limiting_gradient_into(x, &mut g_inf);
                let scale = lambda.powf(r - 1.0);
                let dg = g.iter().zip(&g_inf).map(|(a, b)| (a / scale - b).powi(2)).sum::<f64>().sqrt();
                dev.value = dev.value.max(dv);
                dev.gradient = dev.gradient.max(dg);
            }
            dev
        })
        .collect())
}
