//! Log-Sobolev, Talagrand and Poincaré functionals, constant estimates and
//! the witness-wise chain check.
//!
//! With `|∇⁻f|` the descending slope and `Ent(f^2) = ∫ f^2 log f^2 dν` for
//! `∫ f^2 dν = 1`:
//!
//! ```text
//! LSI(K):  Ent(f^2)          <= (2/K) ∫ |∇⁻f|^2 dν
//! T(K):    W_2(F^2 ν, ν)^2   <= (2/K) Ent(F^2)
//! P(K):    ∫ h^2 dν          <= (1/K) ∫ |∇⁻h|^2 dν      (∫ h dν = 0)
//! ```
//!
//! Each `*_ratio` returns the largest `K` a given function allows.

mod chain;
mod estimate;
mod functionals;
mod traces;
mod witness;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::space::{MeasuredSpace, ScalarField, SpaceId};

pub use chain::{verify_chain, ChainEntry, ChainReport, Skipped, Verdict, WitnessSuites};
pub use estimate::{estimate_constant, estimate_from, CandidateResult, Estimate};
pub use functionals::{
    centered, dirichlet_energy, entropy_functional, lsi_ratio, poincare_ratio, resolved_talagrand_ratio,
    talagrand_parts, talagrand_ratio, DEGENERACY_TOL, TRANSPORT_RESOLUTION,
};
pub use traces::{dual_talagrand_defect, log_integral_exp, phi_at, phi_trace, psi_trace, PhiTrace, PsiTrace};
pub use witness::{eigenfields, line_coordinate, smoothed_random_field, Witness, WitnessFamily, EIGEN_MAX_N};

/// Coordinate-descent sweeps per witness unless a caller asks otherwise.
pub const DEFAULT_BUDGET: usize = 8;

/// Re-evaluating a reported witness must reproduce its ratio this closely.
pub const REPRODUCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    Lsi,
    Talagrand,
    Poincare,
}

impl Inequality {
    pub const ALL: [Inequality; 3] = [Inequality::Lsi, Inequality::Talagrand, Inequality::Poincare];

    pub fn ratio(self, space: &MeasuredSpace, f: &ScalarField) -> Result<f64> {
        match self {
            Inequality::Lsi => lsi_ratio(space, f),
            Inequality::Talagrand => talagrand_ratio(space, f),
            Inequality::Poincare => poincare_ratio(space, f),
        }
    }

    /// The ratio as used by estimates and the chain check: Talagrand
    /// witnesses must be resolved by the mesh.
    pub fn admissible_ratio(self, space: &MeasuredSpace, f: &ScalarField) -> Result<f64> {
        match self {
            Inequality::Talagrand => resolved_talagrand_ratio(space, f),
            _ => self.ratio(space, f),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Inequality::Lsi => "lsi",
            Inequality::Talagrand => "talagrand",
            Inequality::Poincare => "poincare",
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Inequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lsi" | "log-sobolev" => Ok(Inequality::Lsi),
            "t" | "talagrand" => Ok(Inequality::Talagrand),
            "p" | "poincare" => Ok(Inequality::Poincare),
            other => Err(invalid(format!("unknown inequality '{other}' (lsi, talagrand, poincare)"))),
        }
    }
}

/// Everything one run learned about the three inequalities on a space.
#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub space: SpaceId,
    pub estimates: Vec<Estimate>,
    pub chain: Option<ChainReport>,
    pub psi: Vec<PsiTrace>,
    pub phi: Vec<PhiTrace>,
}

impl InequalityReport {
    pub fn new(space: &MeasuredSpace) -> Self {
        Self {
            space: space.id(),
            estimates: Vec::new(),
            chain: None,
            psi: Vec::new(),
            phi: Vec::new(),
        }
    }

    pub fn k_upper(&self, which: Inequality) -> Option<f64> {
        self.estimates.iter().find(|e| e.inequality == which).map(|e| e.k_upper)
    }

    /// Name of the CSV sidecar holding the witness for `which`.
    pub fn field_ref(which: Inequality) -> String {
        format!("witness_{which}.csv")
    }

    /// Largest gap between a recorded ratio and its re-evaluation.
    pub fn reproduction_error(&self, space: &MeasuredSpace) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for e in &self.estimates {
            let r = e.inequality.ratio(space, &e.witness.field)?;
            worst = worst.max((r - e.k_upper).abs());
        }
        Ok(worst)
    }

    pub fn to_document(&self) -> ReportDocument {
        ReportDocument {
            space: self.space.to_string(),
            k_estimates: KEstimates {
                lsi: self.k_upper(Inequality::Lsi),
                talagrand: self.k_upper(Inequality::Talagrand),
                poincare: self.k_upper(Inequality::Poincare),
            },
            witnesses: self
                .estimates
                .iter()
                .map(|e| WitnessRecord {
                    field_ref: Self::field_ref(e.inequality),
                    label: e.witness.label.clone(),
                    ratio: e.k_upper,
                    stage: e.inequality,
                })
                .collect(),
            chain: self.chain.as_ref().map(|c| c.entries.clone()).unwrap_or_default(),
            verdict: self.chain.as_ref().map(|c| c.verdict.to_string()),
            traces: Traces {
                psi: self.psi.clone(),
                phi: self.phi.clone(),
            },
            tolerances: Tolerances {
                tau: self.chain.as_ref().map(|c| c.tau),
                reproduce: REPRODUCE_TOL,
            },
        }
    }
}

/// JSON shape of an [`InequalityReport`]; witness values live in sidecars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub space: String,
    #[serde(rename = "K_estimates")]
    pub k_estimates: KEstimates,
    pub witnesses: Vec<WitnessRecord>,
    pub chain: Vec<ChainEntry>,
    pub verdict: Option<String>,
    pub traces: Traces,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KEstimates {
    pub lsi: Option<f64>,
    pub talagrand: Option<f64>,
    pub poincare: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub field_ref: String,
    pub label: String,
    pub ratio: f64,
    pub stage: Inequality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Traces {
    pub psi: Vec<PsiTrace>,
    pub phi: Vec<PhiTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tau: Option<f64>,
    pub reproduce: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::SpaceSpec;

    #[test]
    fn parse_names() {
        assert_eq!("LSI".parse::<Inequality>().unwrap(), Inequality::Lsi);
        assert_eq!("t".parse::<Inequality>().unwrap(), Inequality::Talagrand);
        assert_eq!("poincare".parse::<Inequality>().unwrap(), Inequality::Poincare);
        assert!("x".parse::<Inequality>().is_err());
    }

    #[test]
    fn report_document_shape() {
        let s = SpaceSpec::Path { n: 5 }.generate().unwrap();
        let mut rep = InequalityReport::new(&s);
        let est = estimate_constant(&s, Inequality::Poincare, &WitnessFamily::default(), 2, 1).unwrap();
        rep.estimates.push(est);
        assert!(rep.reproduction_error(&s).unwrap() < REPRODUCE_TOL);
        let v = serde_json::to_value(rep.to_document()).unwrap();
        assert!(v["K_estimates"]["poincare"].as_f64().unwrap() > 0.0);
        assert!(v["K_estimates"]["lsi"].is_null());
        assert_eq!(v["witnesses"][0]["field_ref"], "witness_poincare.csv");
        assert_eq!(v["witnesses"][0]["stage"], "poincare");
    }
}
