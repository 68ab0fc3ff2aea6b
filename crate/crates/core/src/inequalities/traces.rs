//! Exponential integrals of `Q_t` behind the two implications.

use serde::{Deserialize, Serialize};

use super::functionals::centered;
use crate::error::{invalid, Result};
use crate::hopf_lax;
use crate::space::{MeasuredSpace, ScalarField};

/// `log Σ e^{a_x} ν_x`, shifted by the largest exponent on the support.
/// `ν` is taken as exactly normalized, so constant `a` returns itself.
pub fn log_integral_exp(space: &MeasuredSpace, a: &[f64]) -> f64 {
    let nu = space.measure();
    let top = a
        .iter()
        .zip(nu)
        .filter(|(_, &m)| m > 0.0)
        .fold(f64::NEG_INFINITY, |acc, (&v, _)| acc.max(v));
    let excess: f64 = a.iter().zip(nu).map(|(&v, &m)| m * (v - top).exp_m1()).sum();
    top + excess.ln_1p()
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("K must be finite and > 0, got {k}")))
    }
}

fn check_times(times: &[f64], increasing: bool) -> Result<()> {
    if times.is_empty() {
        return Err(invalid("time grid is empty"));
    }
    if let Some(t) = times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(invalid(format!("times must be finite and > 0, got {t}")));
    }
    if increasing && times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("times must be strictly increasing"));
    }
    Ok(())
}

/// `log ∫ e^{K Q_1 g} dν - K ∫ g dν`; nonpositive for every `g` under `T(K)`.
pub fn dual_talagrand_defect(space: &MeasuredSpace, g: &ScalarField, k: f64) -> Result<f64> {
    check_k(k)?;
    let q = hopf_lax::apply(space, g, 1.0)?;
    let a: Vec<f64> = q.values().iter().map(|v| k * v).collect();
    Ok(log_integral_exp(space, &a) - k * space.integrate(g.values()))
}

/// `ψ(t) = ∫ e^{K t Q_t h} dν` for centered `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiTrace {
    pub k: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `max ψ - 1`; at most zero under `T(K)`.
    pub max_excess: f64,
}

pub fn psi_trace(space: &MeasuredSpace, h: &ScalarField, k: f64, times: &[f64]) -> Result<PsiTrace> {
    check_k(k)?;
    check_times(times, false)?;
    let h = centered(space, h)?;
    let values = times
        .iter()
        .map(|&t| {
            let q = hopf_lax::apply(space, &h, t)?;
            let a: Vec<f64> = q.values().iter().map(|v| k * t * v).collect();
            Ok(log_integral_exp(space, &a).exp())
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_excess = values.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v)) - 1.0;
    Ok(PsiTrace {
        k,
        times: times.to_vec(),
        values,
        max_excess,
    })
}

/// `φ(t) = (1 / Kt) log ∫ e^{K t Q_t g} dν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiTrace {
    pub k: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub mean: f64,
    /// Largest `φ(t_{i+1}) - φ(t_i)`, zero for a single time; `φ` is
    /// nonincreasing under `LSI(K)`.
    pub max_upward_step: f64,
    /// `|φ(t_min) - ∫ g dν|`.
    pub limit_defect: f64,
}

pub fn phi_trace(space: &MeasuredSpace, g: &ScalarField, k: f64, times: &[f64]) -> Result<PhiTrace> {
    check_k(k)?;
    check_times(times, true)?;
    space.check_field(g)?;
    let values = times
        .iter()
        .map(|&t| Ok(phi_at(space, g, k, t)?))
        .collect::<Result<Vec<f64>>>()?;
    let mean = space.integrate(g.values());
    let max_upward_step = values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(PhiTrace {
        k,
        times: times.to_vec(),
        limit_defect: (values[0] - mean).abs(),
        values,
        mean,
        max_upward_step,
    })
}

/// A single `φ(t)`.
pub fn phi_at(space: &MeasuredSpace, g: &ScalarField, k: f64, t: f64) -> Result<f64> {
    check_k(k)?;
    check_times(&[t], false)?;
    let q = hopf_lax::apply(space, g, t)?;
    let a: Vec<f64> = q.values().iter().map(|v| k * t * v).collect();
    Ok(log_integral_exp(space, &a) / (k * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::SpaceSpec;

    fn two_point() -> MeasuredSpace {
        SpaceSpec::Path { n: 2 }.generate().unwrap()
    }

    #[test]
    fn dual_defect_examples() {
        let s = two_point();
        let c = ScalarField::constant(&s, 3.5).unwrap();
        assert_eq!(dual_talagrand_defect(&s, &c, 2.0).unwrap(), 0.0);
        let g = ScalarField::new(&s, vec![0.0, 1.0]).unwrap();
        let d = dual_talagrand_defect(&s, &g, 2.0).unwrap();
        let expect = (0.5 * (1.0 + std::f64::consts::E)).ln() - 1.0;
        assert!((d - expect).abs() < 1e-15);
        assert!((d + 0.37989).abs() < 1e-5);
    }

    #[test]
    fn phi_two_point() {
        let s = two_point();
        let g = ScalarField::new(&s, vec![0.0, 1.0]).unwrap();
        let tr = phi_trace(&s, &g, 2.0, &[0.5, 1.0]).unwrap();
        let l = (0.5 * (1.0 + std::f64::consts::E)).ln();
        assert!((tr.values[0] - l).abs() < 1e-15);
        assert!((tr.values[1] - l / 2.0).abs() < 1e-15);
        assert_eq!(tr.max_upward_step, 0.0);
        assert!((tr.values[1] - 0.31005).abs() < 1e-5);
    }

    #[test]
    fn constant_inputs() {
        let s = SpaceSpec::Circle { n: 9, circumference: 1.0 }.generate().unwrap();
        let zero = ScalarField::constant(&s, 0.0).unwrap();
        let psi = psi_trace(&s, &zero, 1.3, &[0.1, 0.5, 2.0]).unwrap();
        assert!(psi.values.iter().all(|&v| v == 1.0));
        let c = ScalarField::constant(&s, -0.7).unwrap();
        let phi = phi_trace(&s, &c, 0.8, &[0.1, 0.5, 2.0]).unwrap();
        assert!(phi.values.iter().all(|&v| (v + 0.7).abs() < 1e-15));
        assert!(phi.max_upward_step < 1e-15);
    }

    #[test]
    fn bad_grids() {
        let s = two_point();
        let g = ScalarField::new(&s, vec![0.0, 1.0]).unwrap();
        assert!(psi_trace(&s, &g, 1.0, &[]).is_err());
        assert!(phi_trace(&s, &g, 1.0, &[]).is_err());
        assert!(phi_trace(&s, &g, 1.0, &[1.0, 0.5]).is_err());
        assert!(phi_trace(&s, &g, 0.0, &[1.0]).is_err());
        assert!(dual_talagrand_defect(&s, &g, -1.0).is_err());
    }
}
