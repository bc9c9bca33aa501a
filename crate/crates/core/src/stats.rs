//! Small statistics toolkit for ensemble reports.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Compensated (Neumaier) summation; order effects stay at the rounding level.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = NeumaierSum::default();
    xs.into_iter().for_each(|x| acc.add(x));
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn ci95(&self) -> (f64, f64) {
        (self.mean - Z95 * self.se, self.mean + Z95 * self.se)
    }
}

/// Mean and standard error of independent samples.
pub fn mean_se(xs: &[f64]) -> Estimate {
    let n = xs.len();
    if n == 0 {
        return Estimate {
            mean: f64::NAN,
            se: f64::NAN,
            n,
        };
    }
    let mean = sum(xs.iter().copied()) / n as f64;
    let var = if n > 1 {
        sum(xs.iter().map(|x| (x - mean).powi(2))) / (n - 1) as f64
    } else {
        f64::NAN
    };
    Estimate {
        mean,
        se: (var / n as f64).sqrt(),
        n,
    }
}

/// Running mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn estimate(&self) -> Estimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { f64::NAN };
        Estimate {
            mean: if self.n > 0 { self.mean } else { f64::NAN },
            se: (var / self.n as f64).sqrt(),
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchEstimate {
    pub mean: f64,
    pub se: f64,
    /// `var / se²`: the number of independent samples worth of information.
    pub ess: f64,
    pub batches: usize,
}

/// Mean with a batch-means standard error for a correlated series.
pub fn batch_means(xs: &[f64], batches: usize) -> BatchEstimate {
    let batches = batches.max(2).min(xs.len().max(2));
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| sum(xs[b * size..(b + 1) * size].iter().copied()) / size as f64)
        .collect();
    let est = mean_se(&means);
    let all = mean_se(xs);
    let var = all.se.powi(2) * xs.len() as f64;
    BatchEstimate {
        mean: all.mean,
        se: est.se,
        ess: var / est.se.powi(2),
        batches,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_se: f64,
}

/// Ordinary least squares `y ≈ intercept + slope · x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = sum(x.iter().copied()) / n as f64;
    let my = sum(y.iter().copied()) / n as f64;
    let sxx = sum(x.iter().map(|v| (v - mx).powi(2)));
    let sxy = sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let syy = sum(y.iter().map(|v| (v - my).powi(2)));
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = sum(x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)));
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_se = if n > 2 { (sse / (n - 2) as f64 / sxx).sqrt() } else { f64::NAN };
    Some(LinearFit {
        slope,
        intercept,
        r2,
        slope_se,
    })
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}
