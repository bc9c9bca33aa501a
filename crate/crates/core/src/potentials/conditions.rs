//! Aggregate report over the structural conditions C1–C5 and CA.

use serde::{Deserialize, Serialize};

use super::checks::{check_coercive_limit, check_nondegenerate, default_nondegeneracy_samples, MAX_NONDEGENERACY_ORDER};
use super::PotentialSpec;
use crate::dynamics::Model;
use crate::error::{invalid, Result};
use crate::graph::{controls, Depth};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionOptions {
    /// Relative singular-value threshold for the rank test.
    pub rank_tol: f64,
    /// Highest derivative order tried for non-degeneracy.
    pub max_ell: u32,
    pub sphere_samples: usize,
    /// Overrides the default non-degeneracy sample set.
    pub samples: Option<Vec<Vec<f64>>>,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            max_ell: MAX_NONDEGENERACY_ORDER,
            sphere_samples: 200,
            samples: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct C1Report {
    pub passed: bool,
    pub controlled: bool,
    pub connected: bool,
    pub depth: Vec<(String, Depth)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct C2EdgeReport {
    pub edge: (String, String),
    pub passed: bool,
    /// Smallest order at which every sample passed.
    pub ell: Option<u32>,
    pub samples: usize,
    pub sampled: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoercivityEntry {
    pub role: &'static str,
    pub label: String,
    pub degree: f64,
    pub positive: bool,
    pub min_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct C3Report {
    pub passed: bool,
    pub potentials: Vec<CoercivityEntry>,
    pub sampled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum C4Verdict {
    True,
    False,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct C5Report {
    pub passed: bool,
    pub li: Option<f64>,
    pub lp: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub c1: C1Report,
    pub c2: Vec<C2EdgeReport>,
    pub c2_passed: bool,
    pub c3: C3Report,
    pub c4: Vec<((String, String), C4Verdict)>,
    pub c4_overall: C4Verdict,
    pub c5: C5Report,
    /// Compact level sets; implied by C3.
    pub ca: bool,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.c1.passed && self.c2_passed && self.c3.passed && self.c4_overall == C4Verdict::True && self.c5.passed && self.ca
    }
}

pub fn check_conditions(model: &Model, options: &ConditionOptions) -> Result<ConditionReport> {
    if options.max_ell == 0 || options.max_ell > MAX_NONDEGENERACY_ORDER {
        return invalid(format!("max_ell must be in 1..={MAX_NONDEGENERACY_ORDER}"));
    }
    let topology = model.topology();
    let name = |v: usize| topology.names()[v].clone();
    let control = controls(topology);
    let c1 = C1Report {
        passed: control.controlled && control.connected,
        controlled: control.controlled,
        connected: control.connected,
        depth: control.depth.iter().enumerate().map(|(v, d)| (name(v), *d)).collect(),
    };

    let samples = options
        .samples
        .clone()
        .unwrap_or_else(|| default_nondegeneracy_samples(model.dim()));
    let mut c2 = Vec::new();
    for (e, pot) in topology.edges().iter().zip(model.interaction()) {
        let mut ell = None;
        for k in 1..=options.max_ell {
            if check_nondegenerate(pot, &samples, k, options.rank_tol)?.passed {
                ell = Some(k);
                break;
            }
        }
        c2.push(C2EdgeReport {
            edge: (name(e.a.0), name(e.b.0)),
            passed: ell.is_some(),
            ell,
            samples: samples.len(),
            sampled: true,
        });
    }
    let c2_passed = c2.iter().all(|r| r.passed);

    let mut entries = Vec::new();
    let mut coercive = |role: &'static str, label: String, pot: &PotentialSpec| -> Result<()> {
        let r = check_coercive_limit(pot, options.sphere_samples)?;
        entries.push(CoercivityEntry {
            role,
            label,
            degree: pot.degree(),
            positive: r.positive,
            min_value: r.min_value,
        });
        Ok(())
    };
    for (v, u) in model.pinning().iter().enumerate() {
        if let Some(u) = u {
            coercive("pinning", name(v), u)?;
        }
    }
    for (e, pot) in topology.edges().iter().zip(model.interaction()) {
        coercive("interaction", format!("{}-{}", name(e.a.0), name(e.b.0)), pot)?;
    }
    let c3 = C3Report {
        passed: entries.iter().all(|e| e.positive),
        potentials: entries,
        sampled: true,
    };

    let c4: Vec<((String, String), C4Verdict)> = topology
        .edges()
        .iter()
        .zip(model.interaction())
        .map(|(e, pot)| {
            let verdict = match pot.limiting_force_injective() {
                Some(true) => C4Verdict::True,
                Some(false) => C4Verdict::False,
                None => C4Verdict::Unknown,
            };
            ((name(e.a.0), name(e.b.0)), verdict)
        })
        .collect();
    let c4_overall = if c4.iter().any(|(_, v)| *v == C4Verdict::False) {
        C4Verdict::False
    } else if c4.iter().any(|(_, v)| *v == C4Verdict::Unknown) {
        C4Verdict::Unknown
    } else {
        C4Verdict::True
    };

    let c5 = degree_condition(model);
    Ok(ConditionReport {
        ca: c3.passed,
        c1,
        c2,
        c2_passed,
        c3,
        c4,
        c4_overall,
        c5,
    })
}

fn degree_condition(model: &Model) -> C5Report {
    let li = model.interaction_degree();
    let lp = model.pinning_degree();
    let fail = |message: String| C5Report {
        passed: false,
        li,
        lp,
        message,
    };
    if model.interaction().is_empty() {
        return fail("no interaction potentials".into());
    }
    if li.is_none() {
        return fail("interaction potentials have mixed degrees; a common degree is required".into());
    }
    if model.pinning().iter().any(Option::is_none) {
        return fail("every vertex needs a pinning potential".into());
    }
    let (Some(li), Some(lp)) = (li, lp) else {
        return fail("pinning potentials have mixed degrees; a common degree is required".into());
    };
    if li >= lp {
        C5Report {
            passed: true,
            li: Some(li),
            lp: Some(lp),
            message: format!("interaction degree {li} >= pinning degree {lp}"),
        }
    } else {
        fail(format!("interaction degree {li} < pinning degree {lp}"))
    }
}
