use serde::{Deserialize, Serialize};

use crate::dynamics::{Model, State};
use crate::error::{invalid, Result};

/// Scalar functions of the phase point used by the Monte Carlo tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    Energy,
    MomentumSquared {
        vertex: usize,
        #[serde(default)]
        component: usize,
    },
    PositionSquared {
        vertex: usize,
        #[serde(default)]
        component: usize,
    },
    PositionMomentum {
        vertex: usize,
        #[serde(default)]
        component: usize,
    },
    Constant,
}

impl Observable {
    pub fn name(&self) -> String {
        match *self {
            Observable::Energy => "H".into(),
            Observable::MomentumSquared { vertex, component } => format!("p{vertex}_{component}^2"),
            Observable::PositionSquared { vertex, component } => format!("q{vertex}_{component}^2"),
            Observable::PositionMomentum { vertex, component } => format!("p{vertex}_{component}*q{vertex}_{component}"),
            Observable::Constant => "1".into(),
        }
    }

    pub fn validate(&self, model: &Model) -> Result<()> {
        match *self {
            Observable::MomentumSquared { vertex, component }
            | Observable::PositionSquared { vertex, component }
            | Observable::PositionMomentum { vertex, component } => {
                if vertex >= model.vertex_count() || component >= model.dim() {
                    return invalid(format!(
                        "observable {} refers to a coordinate outside the model",
                        self.name()
                    ));
                }
                Ok(())
            }
            Observable::Energy | Observable::Constant => Ok(()),
        }
    }

    /// Unchecked evaluation; call [`Observable::validate`] first.
    pub fn eval(&self, model: &Model, state: &State) -> f64 {
        let n = state.dim;
        match *self {
            Observable::Energy => model.energies(state).h,
            Observable::MomentumSquared { vertex, component } => state.p[vertex * n + component].powi(2),
            Observable::PositionSquared { vertex, component } => state.q[vertex * n + component].powi(2),
            Observable::PositionMomentum { vertex, component } => {
                state.p[vertex * n + component] * state.q[vertex * n + component]
            }
            Observable::Constant => 1.0,
        }
    }
}
