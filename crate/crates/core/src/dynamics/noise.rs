use crate::rng::{self, Stream};

/// Supplier of the standard normals consumed by one SDE step.
pub trait NoiseSource {
    fn fill(&mut self, out: &mut [f64]);
}

impl NoiseSource for Stream {
    fn fill(&mut self, out: &mut [f64]) {
        rng::fill_normal(self, out);
    }
}

/// All zeros: the noise-free limit.
pub struct Silent;

impl NoiseSource for Silent {
    fn fill(&mut self, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
    }
}

/// One Brownian path seen at a coarser step.
///
/// Each coarse draw is `Σ ξ_j / √m` over `m` consecutive fine draws, so runs
/// at steps `h`, `h/2`, `h/4`, ... built from the same fine stream are driven
/// by the same underlying Wiener path.
pub struct CoarsenedNoise {
    fine: Stream,
    factor: usize,
    buf: Vec<f64>,
}

impl CoarsenedNoise {
    pub fn new(fine: Stream, factor: usize) -> Self {
        assert!(factor >= 1, "coarsening factor must be at least 1");
        Self {
            fine,
            factor,
            buf: Vec::new(),
        }
    }
}

impl NoiseSource for CoarsenedNoise {
    fn fill(&mut self, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        self.buf.resize(out.len(), 0.0);
        for _ in 0..self.factor {
            rng::fill_normal(&mut self.fine, &mut self.buf);
            for (o, b) in out.iter_mut().zip(&self.buf) {
                *o += b;
            }
        }
        let s = (self.factor as f64).sqrt();
        out.iter_mut().for_each(|x| *x /= s);
    }
}
