//! Exact quadratic Wasserstein distance between measures on a
//! [`MeasuredSpace`].

mod oracle;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::space::MeasuredSpace;

pub use oracle::{brute_force_w2, w2_oracle_1d, BRUTE_FORCE_MAX_N};

/// Tolerance on the total mass of an input marginal.
pub const MARGINAL_SUM_TOL: f64 = 1e-9;

/// An optimal coupling together with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    n: usize,
    coupling: Vec<f64>,
    pub source_marginal: Vec<f64>,
    pub target_marginal: Vec<f64>,
    /// `Σ π_xy d(x, y)^2`.
    pub cost: f64,
    /// Primal cost minus the value of an exactly feasible dual.
    pub duality_gap: f64,
    /// Simplex pivots used.
    pub pivots: usize,
}

impl TransportPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coupling(&self) -> &[f64] {
        &self.coupling
    }

    pub fn mass(&self, x: usize, y: usize) -> f64 {
        self.coupling[x * self.n + y]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.coupling.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for row in self.coupling.chunks(self.n) {
            for (s, m) in sums.iter_mut().zip(row) {
                *s += m;
            }
        }
        sums
    }

    pub fn recompute_cost(&self, space: &MeasuredSpace) -> f64 {
        self.coupling
            .iter()
            .zip(space.dist_matrix())
            .map(|(m, d)| m * d * d)
            .sum()
    }

    pub fn distance(&self) -> f64 {
        self.cost.sqrt()
    }

    pub fn to_document(&self) -> PlanDocument {
        let mut coupling = Vec::new();
        for x in 0..self.n {
            for y in 0..self.n {
                let m = self.mass(x, y);
                if m > 0.0 {
                    coupling.push((x, y, m));
                }
            }
        }
        PlanDocument {
            coupling,
            cost: self.cost,
            duality_gap: self.duality_gap,
        }
    }
}

/// JSON form of a plan: sparse `(x, y, mass)` triplets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub coupling: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub duality_gap: f64,
}

pub(crate) fn check_marginal(space: &MeasuredSpace, name: &str, mu: &[f64]) -> Result<()> {
    if mu.len() != space.n() {
        return Err(invalid(format!(
            "{name} has {} entries, the space has {} points",
            mu.len(),
            space.n()
        )));
    }
    if let Some(i) = mu.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(invalid(format!("{name}[{i}] = {} is not a nonnegative number", mu[i])));
    }
    let defect = mu.iter().sum::<f64>() - 1.0;
    if defect.abs() > MARGINAL_SUM_TOL {
        return Err(invalid(format!("{name} sums to 1 + {defect:e}, outside tolerance {MARGINAL_SUM_TOL:e}")));
    }
    Ok(())
}

/// `W_2(mu0, mu1)` and an optimal plan, by exact network simplex on the
/// cost matrix `d^2`. Zero-mass points are admitted.
pub fn w2(space: &MeasuredSpace, mu0: &[f64], mu1: &[f64]) -> Result<(f64, TransportPlan)> {
    check_marginal(space, "mu0", mu0)?;
    check_marginal(space, "mu1", mu1)?;
    let n = space.n();
    let rows: Vec<usize> = (0..n).filter(|&i| mu0[i] > 0.0).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| mu1[j] > 0.0).collect();
    let supply: Vec<f64> = rows.iter().map(|&i| mu0[i]).collect();
    let demand: Vec<f64> = cols.iter().map(|&j| mu1[j]).collect();
    let cost = |i: usize, j: usize| {
        let d = space.d(rows[i], cols[j]);
        d * d
    };
    let sol = simplex::solve(&supply, &demand, &cost)?;

    let mut coupling = vec![0.0; n * n];
    for &(i, j, m) in &sol.flows {
        coupling[rows[i] * n + cols[j]] = m;
    }
    let dual: f64 = sol.u.iter().zip(&supply).map(|(u, a)| u * a).sum::<f64>()
        + sol.v.iter().zip(&demand).map(|(v, b)| v * b).sum::<f64>();
    let cost = sol.cost.max(0.0);
    let plan = TransportPlan {
        n,
        coupling,
        source_marginal: mu0.to_vec(),
        target_marginal: mu1.to_vec(),
        cost,
        duality_gap: sol.cost - dual,
        pivots: sol.pivots,
    };
    Ok((cost.sqrt(), plan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::SpaceSpec;

    #[test]
    fn identical_measures() {
        let s = SpaceSpec::Circle { n: 6, circumference: 1.0 }.generate().unwrap();
        let mu = [0.1, 0.2, 0.3, 0.1, 0.2, 0.1];
        let (d, plan) = w2(&s, &mu, &mu).unwrap();
        assert_eq!(d, 0.0);
        for x in 0..6 {
            for y in 0..6 {
                if x != y {
                    assert_eq!(plan.mass(x, y), 0.0);
                }
            }
            assert!((plan.mass(x, x) - mu[x]).abs() < 1e-15);
        }
    }

    #[test]
    fn point_masses() {
        let s = SpaceSpec::Path { n: 5 }.generate().unwrap();
        let mut a = [0.0; 5];
        let mut b = [0.0; 5];
        a[1] = 1.0;
        b[4] = 1.0;
        let (d, _) = w2(&s, &a, &b).unwrap();
        assert_eq!(d, 3.0);
    }

    #[test]
    fn two_point_half_mass() {
        let s = SpaceSpec::Path { n: 2 }.generate().unwrap();
        let (d, plan) = w2(&s, &[0.5, 0.5], &[0.0, 1.0]).unwrap();
        assert_eq!(plan.cost, 0.5);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((d - 0.70711).abs() < 1e-5);
        assert_eq!(plan.mass(0, 1), 0.5);
        assert_eq!(plan.mass(1, 1), 0.5);
    }

    #[test]
    fn rejects_bad_marginals() {
        let s = SpaceSpec::Path { n: 2 }.generate().unwrap();
        let e = w2(&s, &[0.5, 0.6], &[0.5, 0.5]).unwrap_err();
        assert!(e.to_string().contains("sums to 1 +"), "{e}");
        assert!(w2(&s, &[1.5, -0.5], &[0.5, 0.5]).is_err());
        assert!(w2(&s, &[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn plan_document_is_sparse() {
        let s = SpaceSpec::Path { n: 3 }.generate().unwrap();
        let (_, plan) = w2(&s, &[0.5, 0.5, 0.0], &[0.0, 0.5, 0.5]).unwrap();
        let doc = plan.to_document();
        assert_eq!(doc.coupling, vec![(0, 1, 0.5), (1, 2, 0.5)]);
        assert_eq!(doc.cost, 1.0);
    }
}
