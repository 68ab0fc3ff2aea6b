use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::witness::{eigenfields, line_coordinate, Witness, WitnessFamily, EIGEN_MAX_N};
use super::Inequality;
use crate::error::{invalid, Error, Result};
use crate::space::{MeasuredSpace, ScalarField};

/// Initial coordinate-descent step, in sup-norm units of the directions.
const INITIAL_STEP: f64 = 0.25;

/// Smallest ratio found, its witness, and every candidate's final ratio.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub inequality: Inequality,
    pub k_upper: f64,
    pub witness: Witness,
    pub ratio: f64,
    pub candidates: Vec<CandidateResult>,
    /// Candidates without an admissible ratio, with the reason.
    pub excluded: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub label: String,
    /// Ratio of the unrefined candidate.
    pub initial: f64,
    /// Ratio after refinement.
    pub ratio: f64,
}

/// Family-restricted infimum of the ratio for `which`: an upper bound on
/// the best constant.
///
/// Each candidate is refined by `budget` sweeps of coordinate descent over
/// the span of the line coordinate and the low eigenfields (in the exponent
/// for LSI and Talagrand, directly for Poincaré). Refinement of a candidate
/// depends only on that candidate, so enlarging the family can only lower
/// the result. Talagrand candidates and refinement moves must stay above
/// [`TRANSPORT_RESOLUTION`](super::TRANSPORT_RESOLUTION).
pub fn estimate_constant(
    space: &MeasuredSpace,
    which: Inequality,
    family: &WitnessFamily,
    budget: usize,
    seed: u64,
) -> Result<Estimate> {
    let pool = family.candidates(space, which, seed)?;
    estimate_from(space, which, pool, family.eigenfields, budget)
}

/// Same as [`estimate_constant`] over an explicit candidate list.
pub fn estimate_from(
    space: &MeasuredSpace,
    which: Inequality,
    pool: Vec<Witness>,
    directions: usize,
    budget: usize,
) -> Result<Estimate> {
    if pool.is_empty() {
        return Err(invalid("witness family is empty"));
    }
    if budget == 0 {
        return Err(invalid("budget must be at least 1"));
    }
    let basis = refinement_basis(space, directions)?;
    let results: Vec<std::result::Result<(Witness, f64, f64), (String, String)>> = pool
        .into_par_iter()
        .map(|w| {
            let initial = which
                .admissible_ratio(space, &w.field)
                .map_err(|e| (w.label.clone(), e.to_string()))?;
            let (field, ratio) = refine(space, which, &w.field, initial, &basis, budget);
            Ok((Witness { label: w.label, field }, initial, ratio))
        })
        .collect();

    let mut best: Option<(Witness, f64)> = None;
    let mut candidates = Vec::new();
    let mut excluded = Vec::new();
    for r in results {
        let (w, initial, ratio) = match r {
            Ok(ok) => ok,
            Err(skip) => {
                excluded.push(skip);
                continue;
            }
        };
        candidates.push(CandidateResult {
            label: w.label.clone(),
            initial,
            ratio,
        });
        if best.as_ref().map_or(true, |(_, r)| ratio < *r) {
            best = Some((w, ratio));
        }
    }
    let (witness, ratio) = best.ok_or_else(|| {
        Error::Degenerate(format!("every {which} witness is degenerate on this space"))
    })?;
    Ok(Estimate {
        inequality: which,
        k_upper: ratio,
        witness,
        ratio,
        candidates,
        excluded,
    })
}

fn refinement_basis(space: &MeasuredSpace, k: usize) -> Result<Vec<Vec<f64>>> {
    let mut basis = Vec::new();
    if let Some(x) = line_coordinate(space) {
        let m = x.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        basis.push(x.values().iter().map(|v| v / m).collect());
    }
    if k > 0 && space.n() <= EIGEN_MAX_N {
        basis.extend(eigenfields(space, k)?.into_iter().map(ScalarField::into_values));
    }
    Ok(basis)
}

// Positive witnesses are perturbed in the exponent; the ratios are scale
// invariant, so the starting field is normalized first.
fn refine(
    space: &MeasuredSpace,
    which: Inequality,
    start: &ScalarField,
    start_ratio: f64,
    basis: &[Vec<f64>],
    sweeps: usize,
) -> (ScalarField, f64) {
    if basis.is_empty() {
        return (start.clone(), start_ratio);
    }
    let log_domain = which != Inequality::Poincare;
    let sup = start.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if log_domain && start.min() <= 0.0 || sup == 0.0 {
        return (start.clone(), start_ratio);
    }
    let base: Vec<f64> = if log_domain {
        start.values().iter().map(|v| 2.0 * (v / sup).ln()).collect()
    } else {
        start.values().iter().map(|v| v / sup).collect()
    };
    let build = |coef: &[f64]| -> Vec<f64> {
        let mut g = base.clone();
        for (c, b) in coef.iter().zip(basis) {
            if *c != 0.0 {
                g.iter_mut().zip(b).for_each(|(gi, bi)| *gi += c * bi);
            }
        }
        if log_domain {
            g.iter_mut().for_each(|v| *v = (*v / 2.0).exp());
        }
        g
    };
    let eval = |coef: &[f64]| -> Option<(ScalarField, f64)> {
        let field = ScalarField::new(space, build(coef)).ok()?;
        let r = which.admissible_ratio(space, &field).ok()?;
        Some((field, r))
    };

    let mut coef = vec![0.0; basis.len()];
    let mut best = (start.clone(), start_ratio);
    let mut step = INITIAL_STEP;
    for _ in 0..sweeps {
        let mut improved = false;
        for k in 0..basis.len() {
            for sign in [1.0, -1.0] {
                let mut trial = coef.clone();
                trial[k] += sign * step;
                if let Some((field, r)) = eval(&trial) {
                    if r < best.1 {
                        best = (field, r);
                        coef = trial;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::SpaceSpec;

    #[test]
    fn two_point_poincare_is_exact() {
        let s = SpaceSpec::Path { n: 2 }.generate().unwrap();
        let h = ScalarField::new(&s, vec![-1.0, 1.0]).unwrap();
        let pool = vec![Witness { label: "h".into(), field: h }];
        let est = estimate_from(&s, Inequality::Poincare, pool, 0, 3).unwrap();
        assert_eq!(est.k_upper, 2.0);
    }

    #[test]
    fn witness_reproduces_ratio() {
        let s = SpaceSpec::GaussianInterval { n: 41, sigma: 1.0, half_width: 4.0 }.generate().unwrap();
        for which in [Inequality::Lsi, Inequality::Poincare] {
            let est = estimate_constant(&s, which, &WitnessFamily::default(), 3, 5).unwrap();
            let again = which.ratio(&s, &est.witness.field).unwrap();
            assert!((again - est.k_upper).abs() < 1e-9);
            assert!(est.candidates.iter().all(|c| c.ratio <= c.initial));
        }
    }

    #[test]
    fn rejects_empty_inputs() {
        let s = SpaceSpec::Path { n: 3 }.generate().unwrap();
        assert!(estimate_from(&s, Inequality::Lsi, Vec::new(), 0, 1).is_err());
        let h = ScalarField::constant(&s, 1.0).unwrap();
        let pool = vec![Witness { label: "flat".into(), field: h.clone() }];
        assert!(matches!(estimate_from(&s, Inequality::Lsi, pool.clone(), 0, 1), Err(Error::Degenerate(_))));
        assert!(estimate_from(&s, Inequality::Poincare, pool, 0, 0).is_err());
    }
}
