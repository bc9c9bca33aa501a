//! Energy-dependent time scales, rescalings and initial states at a
//! prescribed energy.

use serde::{Deserialize, Serialize};

use super::{Model, State};
use crate::error::{invalid, Result};

/// `τ(z) = λ H^{1/ℓ − 1/2}` with `ℓ = ℓ_i` when the internal energy
/// dominates and `ℓ = ℓ_p` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimescaleRule {
    pub lambda: f64,
    pub li: f64,
    pub lp: f64,
}

impl TimescaleRule {
    pub fn new(lambda: f64, li: f64, lp: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("lambda must be positive, got {lambda}"));
        }
        if !(li >= 2.0 && lp >= 2.0 && li.is_finite() && lp.is_finite()) {
            return invalid(format!("degrees must be at least 2, got li = {li}, lp = {lp}"));
        }
        Ok(Self { lambda, li, lp })
    }

    /// With quadratic pinning the window may not exceed half of `t_star`.
    pub fn check_window(&self, t_star: f64) -> Result<()> {
        if self.lp == 2.0 && self.lambda > 0.5 * t_star {
            return invalid(format!(
                "with quadratic pinning lambda must be at most t_star/2 = {}, got {}",
                0.5 * t_star,
                self.lambda
            ));
        }
        Ok(())
    }
}

pub fn tau(rule: &TimescaleRule, h: f64, hc: f64, hi: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return invalid(format!("energy must be positive, got {h}"));
    }
    if (hc + hi - h).abs() > 1e-9 * h {
        return invalid(format!("split {hc} + {hi} does not add up to {h}"));
    }
    let ell = if hi >= 0.5 * h { rule.li } else { rule.lp };
    Ok(rule.lambda * h.powf(1.0 / ell - 0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleMode {
    Interaction,
    Pinning,
}

/// `p ↦ E^{−1/2} p`, `q ↦ E^{−1/ℓ} q` with `ℓ` picked by `mode`.
pub fn rescale_state(state: &State, e: f64, mode: RescaleMode, li: f64, lp: f64) -> Result<State> {
    if !(e > 0.0 && e.is_finite()) {
        return invalid(format!("rescaling energy must be positive, got {e}"));
    }
    let ell = match mode {
        RescaleMode::Interaction => li,
        RescaleMode::Pinning => lp,
    };
    let sp = e.powf(-0.5);
    let sq = e.powf(-1.0 / ell);
    Ok(State {
        dim: state.dim,
        p: state.p.iter().map(|x| sp * x).collect(),
        q: state.q.iter().map(|x| sq * x).collect(),
    })
}

/// Sum of the limiting pinning forms, all evaluated at the single point `Q`.
pub fn u_infinity(model: &Model, big_q: &[f64]) -> Result<f64> {
    if big_q.len() != model.dim() {
        return invalid(format!("expected a {}-vector, got length {}", model.dim(), big_q.len()));
    }
    Ok(model.pinning().iter().flatten().map(|u| u.limiting_value(big_q)).sum())
}

/// Where the energy of a prepared initial state sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Positions at the origin, momenta `s (v − (N−1)/2) e₁`: zero total
    /// momentum, so all the excess energy is internal.
    #[default]
    Interaction,
    /// All masses displaced together to `s e₁`, at rest: interactions stay
    /// relaxed and the excess energy is pinning energy.
    Pinning,
}

/// A deterministic state with `H = h0`.
pub fn prepare_state(model: &Model, h0: f64, placement: Placement) -> Result<State> {
    let count = model.vertex_count();
    let n = model.dim();
    let rest = model.energies(&model.zero_state()).h;
    if !(h0 > rest && h0.is_finite()) {
        return invalid(format!("target energy {h0} must exceed the rest energy {rest}"));
    }
    let mut state = model.zero_state();
    match placement {
        Placement::Interaction => {
            if count < 2 {
                return invalid("interaction placement needs at least two masses");
            }
            let centre = 0.5 * (count as f64 - 1.0);
            let spread: f64 = (0..count).map(|v| (v as f64 - centre).powi(2)).sum();
            let s = (2.0 * (h0 - rest) / spread).sqrt();
            for v in 0..count {
                state.p[v * n] = s * (v as f64 - centre);
            }
        }
        Placement::Pinning => {
            if model.pinning().iter().all(Option::is_none) {
                return invalid("pinning placement needs at least one pinned mass");
            }
            let energy_at = |s: f64| {
                let mut st = model.zero_state();
                for v in 0..count {
                    st.q[v * n] = s;
                }
                model.energies(&st).h
            };
            let mut hi = 1.0;
            while energy_at(hi) < h0 {
                hi *= 2.0;
                if hi > 1e150 {
                    return invalid("pinning energy does not reach the target");
                }
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if energy_at(mid) < h0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            for v in 0..count {
                state.q[v * n] = hi;
            }
        }
    }
    Ok(state)
}
