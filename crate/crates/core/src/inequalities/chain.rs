//! Witness-wise check of LSI(K) ⇒ T(K) ⇒ P(K).

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::witness::{Witness, WitnessFamily};
use super::Inequality;
use crate::error::{invalid, Result};
use crate::space::MeasuredSpace;

/// Witnesses for each stage of the chain.
#[derive(Debug, Clone, Default)]
pub struct WitnessSuites {
    pub lsi: Vec<Witness>,
    pub talagrand: Vec<Witness>,
    pub poincare: Vec<Witness>,
}

impl WitnessSuites {
    pub fn from_family(space: &MeasuredSpace, family: &WitnessFamily, seed: u64) -> Result<Self> {
        Ok(Self {
            lsi: family.candidates(space, Inequality::Lsi, seed)?,
            talagrand: family.candidates(space, Inequality::Talagrand, seed)?,
            poincare: family.candidates(space, Inequality::Poincare, seed)?,
        })
    }

    fn stage(&self, which: Inequality) -> &[Witness] {
        match which {
            Inequality::Lsi => &self.lsi,
            Inequality::Talagrand => &self.talagrand,
            Inequality::Poincare => &self.poincare,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub witness: String,
    pub stage: Inequality,
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    /// The LSI stage was refuted: the hypothesis is false, not the chain.
    HypothesisFails { witness: String },
    /// A later stage failed although the previous one held on every
    /// witness. Points to mesh error at this tolerance.
    Counterexample { stage: Inequality, witness: String },
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        !matches!(self, Verdict::Counterexample { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Consistent => write!(f, "consistent"),
            Verdict::HypothesisFails { witness } => {
                write!(f, "hypothesis LSI(K) fails (witness {witness})")
            }
            Verdict::Counterexample { stage, witness } => write!(
                f,
                "counterexample at stage {stage} (witness {witness}); rerun on a refined space"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub stage: Inequality,
    pub witness: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub k: f64,
    pub tau: f64,
    pub entries: Vec<ChainEntry>,
    /// Witnesses without an admissible ratio (constant fields, transport
    /// below the mesh scale).
    pub skipped: Vec<Skipped>,
    pub verdict: Verdict,
}

/// Stage `j` (0-based) requires every witness ratio to be at least
/// `K (1 - τ)^(j+1)`. A failing stage stops the chain.
pub fn verify_chain(space: &MeasuredSpace, k: f64, suites: &WitnessSuites, tau: f64) -> Result<ChainReport> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(invalid(format!("tolerance must lie in (0, 1), got {tau}")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid(format!("K must be finite and > 0, got {k}")));
    }
    if suites.lsi.is_empty() || suites.talagrand.is_empty() || suites.poincare.is_empty() {
        return Err(invalid("every stage needs at least one witness"));
    }

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    let mut threshold = k;
    for which in [Inequality::Lsi, Inequality::Talagrand, Inequality::Poincare] {
        threshold *= 1.0 - tau;
        let ratios: Vec<_> = suites
            .stage(which)
            .par_iter()
            .map(|w| which.admissible_ratio(space, &w.field))
            .collect();
        let mut first_fail = None;
        for (w, r) in suites.stage(which).iter().zip(ratios) {
            match r {
                Ok(ratio) => {
                    let pass = ratio >= threshold;
                    if !pass && first_fail.is_none() {
                        first_fail = Some(w.label.clone());
                    }
                    entries.push(ChainEntry {
                        witness: w.label.clone(),
                        stage: which,
                        ratio,
                        threshold,
                        pass,
                    });
                }
                Err(e) => skipped.push(Skipped {
                    stage: which,
                    witness: w.label.clone(),
                    reason: e.to_string(),
                }),
            }
        }
        if let Some(witness) = first_fail {
            let verdict = if which == Inequality::Lsi {
                Verdict::HypothesisFails { witness }
            } else {
                Verdict::Counterexample { stage: which, witness }
            };
            return Ok(ChainReport {
                k,
                tau,
                entries,
                skipped,
                verdict,
            });
        }
    }
    Ok(ChainReport {
        k,
        tau,
        entries,
        skipped,
        verdict: Verdict::Consistent,
    })
}
