//! The quadratic Hopf–Lax operator
//!
//! ```text
//! Q_t f(x) = min_y [ f(y) + d(x, y)^2 / (2t) ],   Q_0 f = f,
//! ```
//!
//! the discrete gradient and descending-slope norms, and diagnostics that
//! turn each semigroup property into a measurable quantity.
//!
//! Slopes are maxima over graph neighbors. Every minimization is exact;
//! ties in the argmin never matter since only values are exposed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::space::{MeasuredSpace, ScalarField};

#[inline]
fn candidate(fy: f64, d: f64, two_t: f64) -> f64 {
    fy + d * d / two_t
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("time must be finite and >= 0, got {t}")))
    }
}

fn check_step(name: &str, s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and > 0, got {s}")))
    }
}

/// `Q_t f` by exhaustive minimization over all points.
pub fn apply(space: &MeasuredSpace, f: &ScalarField, t: f64) -> Result<ScalarField> {
    space.check_field(f)?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let values = f.values();
    let two_t = 2.0 * t;
    let out: Vec<f64> = (0..space.n())
        .into_par_iter()
        .map(|x| {
            space
                .row(x)
                .iter()
                .zip(values)
                .fold(f64::INFINITY, |best, (&d, &fy)| best.min(candidate(fy, d, two_t)))
        })
        .collect();
    Ok(f.with_values(out))
}

/// Radius outside which no point can beat `y = x`:
/// `sqrt(C t)` with `C = 2 (max f - min f)`, widened by a few ulps of
/// `max |f|` so that rounding in the candidate values cannot matter.
pub fn pruning_radius(f: &ScalarField, t: f64) -> f64 {
    let (lo, hi) = (f.min(), f.max());
    let slack = 8.0 * f64::EPSILON * lo.abs().max(hi.abs());
    (2.0 * ((hi - lo) + slack) * t).sqrt()
}

/// `Q_t f` restricted to the ball of radius [`pruning_radius`] around each
/// point. Returns bit-identical values to [`apply`].
pub fn apply_pruned(space: &MeasuredSpace, f: &ScalarField, t: f64) -> Result<ScalarField> {
    apply_pruned_with_counts(space, f, t).map(|(q, _)| q)
}

/// [`apply_pruned`] together with the number of candidates visited per point.
pub fn apply_pruned_with_counts(
    space: &MeasuredSpace,
    f: &ScalarField,
    t: f64,
) -> Result<(ScalarField, Vec<usize>)> {
    space.check_field(f)?;
    check_step("t", t)?;
    let values = f.values();
    let two_t = 2.0 * t;
    let radius = pruning_radius(f, t);
    let (out, counts): (Vec<f64>, Vec<usize>) = (0..space.n())
        .into_par_iter()
        .map(|x| {
            let row = space.row(x);
            let mut best = f64::INFINITY;
            let mut visited = 0;
            for &y in space.by_distance(x) {
                let d = row[y as usize];
                if d > radius {
                    break;
                }
                visited += 1;
                best = best.min(candidate(values[y as usize], d, two_t));
            }
            (best, visited)
        })
        .unzip();
    Ok((f.with_values(out), counts))
}

fn slope_at(space: &MeasuredSpace, f: &[f64], x: usize, descending: bool) -> Result<f64> {
    let neighbors = space.neighbors(x);
    if neighbors.is_empty() {
        return Err(Error::IsolatedPoint(x));
    }
    Ok(neighbors
        .iter()
        .map(|&(y, _)| {
            let diff = f[x] - f[y];
            let num = if descending { diff.max(0.0) } else { diff.abs() };
            num / space.d(x, y)
        })
        .fold(0.0, f64::max))
}

/// `|∇f|(x)`: largest `|f(y) - f(x)| / d(x, y)` over graph neighbors `y`.
pub fn grad_norm(space: &MeasuredSpace, f: &ScalarField, x: usize) -> Result<f64> {
    space.check_field(f)?;
    space.check_index(x)?;
    slope_at(space, f.values(), x, false)
}

/// `|∇⁻f|(x)`: largest `[f(x) - f(y)]₊ / d(x, y)` over graph neighbors `y`.
/// Zero at every neighborhood minimum.
pub fn subgrad_norm(space: &MeasuredSpace, f: &ScalarField, x: usize) -> Result<f64> {
    space.check_field(f)?;
    space.check_index(x)?;
    slope_at(space, f.values(), x, true)
}

pub fn grad_norms(space: &MeasuredSpace, f: &ScalarField) -> Result<Vec<f64>> {
    space.check_field(f)?;
    (0..space.n()).map(|x| slope_at(space, f.values(), x, false)).collect()
}

pub fn subgrad_norms(space: &MeasuredSpace, f: &ScalarField) -> Result<Vec<f64>> {
    space.check_field(f)?;
    (0..space.n()).map(|x| slope_at(space, f.values(), x, true)).collect()
}

/// Global constant `max_{x != y} |f(x) - f(y)| / d(x, y)`.
pub fn lipschitz_constant(space: &MeasuredSpace, f: &ScalarField) -> Result<f64> {
    space.check_field(f)?;
    let n = space.n();
    if n < 2 {
        return Err(Error::Degenerate("Lipschitz constant needs at least two points".into()));
    }
    let v = f.values();
    Ok((0..n)
        .into_par_iter()
        .map(|x| {
            let row = space.row(x);
            ((x + 1)..n)
                .map(|y| (v[x] - v[y]).abs() / row[y])
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// `max_x [Q_t Q_s f(x) - Q_{t+s} f(x)]`. The difference is nonnegative on
/// any metric space; it vanishes on length spaces.
pub fn semigroup_defect(space: &MeasuredSpace, f: &ScalarField, t: f64, s: f64) -> Result<f64> {
    check_step("t", t)?;
    check_step("s", s)?;
    let composed = apply(space, &apply(space, f, s)?, t)?;
    let direct = apply(space, f, t + s)?;
    Ok(composed
        .values()
        .iter()
        .zip(direct.values())
        .map(|(a, b)| a - b)
        .fold(0.0, f64::max))
}

/// `min_z [d(x,z)^2/t + d(z,y)^2/s] - d(x,y)^2/(t+s)`, which is zero when
/// the space has a point at the right fraction of a geodesic from x to y.
pub fn midpoint_identity_defect(space: &MeasuredSpace, x: usize, y: usize, t: f64, s: f64) -> Result<f64> {
    space.check_index(x)?;
    space.check_index(y)?;
    check_step("t", t)?;
    check_step("s", s)?;
    let best = (0..space.n())
        .map(|z| {
            let (a, b) = (space.d(x, z), space.d(z, y));
            a * a / t + b * b / s
        })
        .fold(f64::INFINITY, f64::min);
    let dxy = space.d(x, y);
    Ok(best - dxy * dxy / (t + s))
}

/// `max_x (Q_t f(x) - Q_{t+s} f(x)) / s - Lip(Q_t f)^2 / 2`.
///
/// Nonpositive whenever `Q_{t+s} = Q_s Q_t`; on a discrete space the
/// excess is at most `semigroup_defect(f, s, t) / s`.
pub fn speed_bound_excess(space: &MeasuredSpace, f: &ScalarField, t: f64, s: f64) -> Result<f64> {
    check_time(t)?;
    check_step("s", s)?;
    let at_t = apply(space, f, t)?;
    let later = apply(space, f, t + s)?;
    let lip = lipschitz_constant(space, &at_t)?;
    let speed = at_t
        .values()
        .iter()
        .zip(later.values())
        .map(|(a, b)| (a - b) / s)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(speed - lip * lip / 2.0)
}

/// Forward-difference residual of `∂_t F + |∇⁻F|^2 / 2 = 0` at time `t`:
/// `r(x) = (Q_{t+s} f(x) - Q_t f(x)) / s + |∇⁻ Q_t f|(x)^2 / 2`.
pub fn hj_forward_residual(space: &MeasuredSpace, f: &ScalarField, t: f64, s: f64) -> Result<ScalarField> {
    Ok(hj_residual_parts(space, f, t, s)?.residual)
}

/// The pieces of [`hj_forward_residual`], kept for diagnostics.
#[derive(Debug, Clone)]
pub struct HjResidual {
    pub at_t: ScalarField,
    /// `(Q_{t+s} f - Q_t f) / s`, always in `[-Lip(Q_t f)^2 / 2, 0]` up to
    /// the semigroup defect.
    pub quotient: Vec<f64>,
    pub residual: ScalarField,
}

pub fn hj_residual_parts(space: &MeasuredSpace, f: &ScalarField, t: f64, s: f64) -> Result<HjResidual> {
    check_time(t)?;
    check_step("s", s)?;
    let at_t = apply(space, f, t)?;
    let later = apply(space, f, t + s)?;
    let slopes = subgrad_norms(space, &at_t)?;
    let quotient: Vec<f64> = later
        .values()
        .iter()
        .zip(at_t.values())
        .map(|(b, a)| (b - a) / s)
        .collect();
    let residual: Vec<f64> = quotient
        .iter()
        .zip(&slopes)
        .map(|(q, g)| q + g * g / 2.0)
        .collect();
    let residual = at_t.with_values(residual);
    Ok(HjResidual {
        at_t,
        quotient,
        residual,
    })
}

/// ν-mean and maximum of `|r|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub t: f64,
    pub s: f64,
    pub mean_abs: f64,
    pub max_abs: f64,
}

pub fn summarize_residual(space: &MeasuredSpace, r: &ScalarField, t: f64, s: f64) -> ResidualSummary {
    let abs: Vec<f64> = r.values().iter().map(|v| v.abs()).collect();
    ResidualSummary {
        t,
        s,
        mean_abs: space.integrate(&abs),
        max_abs: abs.iter().copied().fold(0.0, f64::max),
    }
}

/// How the forward step `s` for the HJ residual is chosen at each trace time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ResidualStep {
    /// `s = fraction * t`.
    Relative(f64),
    Fixed(f64),
}

impl Default for ResidualStep {
    fn default() -> Self {
        ResidualStep::Relative(1.0 / 16.0)
    }
}

impl ResidualStep {
    fn at(self, t: f64) -> f64 {
        match self {
            ResidualStep::Relative(c) => c * t,
            ResidualStep::Fixed(s) => s,
        }
    }
}

/// `Q_t f` over a time grid with per-time diagnostics.
#[derive(Debug, Clone)]
pub struct SemigroupTrace {
    pub source: ScalarField,
    pub times: Vec<f64>,
    pub fields: Vec<ScalarField>,
    pub lip_constants: Vec<f64>,
    pub hj_residuals: Vec<ScalarField>,
    pub residual_summaries: Vec<ResidualSummary>,
    /// ν-mean of `|∇Q_t f| - |∇⁻Q_t f|`; zero a.e. in the continuum.
    pub slope_gaps: Vec<f64>,
    pub checks: TraceChecks,
}

/// Exact invariants of a trace, each counted as violations beyond
/// [`INVARIANT_SLACK`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceChecks {
    /// `min f <= Q_t f <= f`.
    pub range_violations: usize,
    /// `Q_t f` nonincreasing along the grid.
    pub monotonicity_violations: usize,
    /// `Lip(Q_t f) <= diam / t`.
    pub lipschitz_violations: usize,
    /// `max |Q_{t_min} f - f|`.
    pub small_time_gap: f64,
    /// `Lip(f)^2 t_min / 2`, which bounds `small_time_gap` on any metric space.
    pub small_time_bound: f64,
}

impl TraceChecks {
    pub fn all_pass(&self) -> bool {
        self.range_violations == 0
            && self.monotonicity_violations == 0
            && self.lipschitz_violations == 0
            && self.small_time_gap <= self.small_time_bound
    }
}

/// Arithmetic slack for invariants that hold exactly in real arithmetic.
pub const INVARIANT_SLACK: f64 = 1e-12;

pub fn make_trace(space: &MeasuredSpace, f: &ScalarField, times: &[f64]) -> Result<SemigroupTrace> {
    make_trace_with(space, f, times, ResidualStep::default())
}

pub fn make_trace_with(
    space: &MeasuredSpace,
    f: &ScalarField,
    times: &[f64],
    step: ResidualStep,
) -> Result<SemigroupTrace> {
    space.check_field(f)?;
    if times.is_empty() {
        return Err(invalid("time grid is empty"));
    }
    for w in times.windows(2) {
        if !(w[0] < w[1]) {
            return Err(invalid(format!("time grid must be strictly increasing, got {} then {}", w[0], w[1])));
        }
    }
    for &t in times {
        check_step("trace time", t)?;
    }

    let mut fields = Vec::with_capacity(times.len());
    let mut lip_constants = Vec::with_capacity(times.len());
    let mut hj_residuals = Vec::with_capacity(times.len());
    let mut residual_summaries = Vec::with_capacity(times.len());
    let mut slope_gaps = Vec::with_capacity(times.len());
    for &t in times {
        let s = step.at(t);
        let parts = hj_residual_parts(space, f, t, s)?;
        let lip = if space.n() > 1 {
            lipschitz_constant(space, &parts.at_t)?
        } else {
            0.0
        };
        if space.n() > 1 {
            let up = grad_norms(space, &parts.at_t)?;
            let down = subgrad_norms(space, &parts.at_t)?;
            let gap: Vec<f64> = up.iter().zip(&down).map(|(a, b)| a - b).collect();
            slope_gaps.push(space.integrate(&gap));
        } else {
            slope_gaps.push(0.0);
        }
        residual_summaries.push(summarize_residual(space, &parts.residual, t, s));
        hj_residuals.push(parts.residual);
        lip_constants.push(lip);
        fields.push(parts.at_t);
    }

    let mut checks = TraceChecks::default();
    let lo = f.min();
    for (k, q) in fields.iter().enumerate() {
        for (qv, fv) in q.values().iter().zip(f.values()) {
            if *qv > fv + INVARIANT_SLACK || *qv < lo - INVARIANT_SLACK {
                checks.range_violations += 1;
            }
        }
        if k > 0 {
            for (a, b) in fields[k - 1].values().iter().zip(q.values()) {
                if *b > a + INVARIANT_SLACK {
                    checks.monotonicity_violations += 1;
                }
            }
        }
        if space.n() > 1 && lip_constants[k] > space.diameter() / times[k] + INVARIANT_SLACK {
            checks.lipschitz_violations += 1;
        }
    }
    let lip_f = if space.n() > 1 { lipschitz_constant(space, f)? } else { 0.0 };
    checks.small_time_gap = fields[0]
        .values()
        .iter()
        .zip(f.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    checks.small_time_bound = lip_f * lip_f * times[0] / 2.0 + INVARIANT_SLACK;

    Ok(SemigroupTrace {
        source: f.clone(),
        times: times.to_vec(),
        fields,
        lip_constants,
        hj_residuals,
        residual_summaries,
        slope_gaps,
        checks,
    })
}

/// JSON form of a trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceDocument {
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
    pub lip_constants: Vec<f64>,
    pub residual_summaries: Vec<ResidualSummary>,
    pub slope_gaps: Vec<f64>,
    pub checks: TraceChecks,
}

impl SemigroupTrace {
    pub fn to_document(&self) -> TraceDocument {
        TraceDocument {
            times: self.times.clone(),
            fields: self.fields.iter().map(|f| f.values().to_vec()).collect(),
            lip_constants: self.lip_constants.clone(),
            residual_summaries: self.residual_summaries.clone(),
            slope_gaps: self.slope_gaps.clone(),
            checks: self.checks.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::SpaceSpec;

    fn two_point() -> MeasuredSpace {
        SpaceSpec::Path { n: 2 }.generate().unwrap()
    }

    fn field(space: &MeasuredSpace, v: &[f64]) -> ScalarField {
        ScalarField::new(space, v.to_vec()).unwrap()
    }

    #[test]
    fn q_zero_is_identity() {
        let s = two_point();
        let f = field(&s, &[0.3, -2.0]);
        assert_eq!(apply(&s, &f, 0.0).unwrap(), f);
    }

    #[test]
    fn constants_are_fixed() {
        let s = SpaceSpec::Circle { n: 16, circumference: 1.0 }.generate().unwrap();
        let c = ScalarField::constant(&s, 1.25).unwrap();
        for t in [0.01, 1.0, 100.0] {
            assert!(apply(&s, &c, t).unwrap().values().iter().all(|&v| v == 1.25));
        }
    }

    #[test]
    fn two_point_hopf_lax() {
        let s = two_point();
        let f = field(&s, &[0.0, 1.0]);
        assert_eq!(apply(&s, &f, 1.0).unwrap().values(), &[0.0, 0.5]);
        assert_eq!(apply(&s, &f, 0.25).unwrap().values(), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_time_and_foreign_fields() {
        let s = two_point();
        let f = field(&s, &[0.0, 1.0]);
        assert!(apply(&s, &f, -1.0).is_err());
        assert!(apply(&s, &f, f64::NAN).is_err());
        let other = SpaceSpec::Path { n: 3 }.generate().unwrap();
        assert!(apply(&other, &f, 1.0).is_err());
    }

    #[test]
    fn pruned_constant_field_visits_only_center() {
        let s = SpaceSpec::Circle { n: 32, circumference: 1.0 }.generate().unwrap();
        let c = ScalarField::constant(&s, 0.0).unwrap();
        let (q, counts) = apply_pruned_with_counts(&s, &c, 0.01).unwrap();
        assert_eq!(q, c);
        assert!(counts.iter().all(|&k| k == 1));
    }

    #[test]
    fn pruned_cosine_on_circle() {
        let s = SpaceSpec::Circle { n: 256, circumference: 2.0 * std::f64::consts::PI }.generate().unwrap();
        let f = ScalarField::from_fn(&s, |i| s.coords().unwrap()[i][0].cos()).unwrap();
        let (q, counts) = apply_pruned_with_counts(&s, &f, 0.01).unwrap();
        assert!(counts.iter().all(|&k| k < 256));
        assert_eq!(q, apply(&s, &f, 0.01).unwrap());
    }

    #[test]
    fn slopes_on_two_points() {
        let s = two_point();
        let f = field(&s, &[0.0, 1.0]);
        assert_eq!(grad_norm(&s, &f, 0).unwrap(), 1.0);
        assert_eq!(grad_norm(&s, &f, 1).unwrap(), 1.0);
        assert_eq!(subgrad_norm(&s, &f, 0).unwrap(), 0.0);
        assert_eq!(subgrad_norm(&s, &f, 1).unwrap(), 1.0);
        let c = field(&s, &[2.0, 2.0]);
        assert_eq!(grad_norms(&s, &c).unwrap(), vec![0.0, 0.0]);
        assert_eq!(subgrad_norms(&s, &c).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn subgradient_vanishes_at_local_minimum() {
        let s = SpaceSpec::Path { n: 5 }.generate().unwrap();
        let f = field(&s, &[9.0, -3.0, -7.0, 100.0, 4.0]);
        assert_eq!(subgrad_norm(&s, &f, 2).unwrap(), 0.0);
        assert!(subgrad_norm(&s, &f, 3).unwrap() > 0.0);
    }

    #[test]
    fn isolated_point_is_an_error() {
        let s = MeasuredSpace::build_from_graph(1, &[], &[1.0]).unwrap();
        let f = ScalarField::constant(&s, 0.0).unwrap();
        assert!(matches!(grad_norm(&s, &f, 0), Err(Error::IsolatedPoint(0))));
        assert!(matches!(subgrad_norm(&s, &f, 0), Err(Error::IsolatedPoint(0))));
    }

    #[test]
    fn gradient_of_cosine_at_quarter_turn() {
        let s = SpaceSpec::Circle { n: 256, circumference: 2.0 * std::f64::consts::PI }.generate().unwrap();
        let f = ScalarField::from_fn(&s, |i| s.coords().unwrap()[i][0].cos()).unwrap();
        let g = grad_norm(&s, &f, 64).unwrap();
        assert!((g - 1.0).abs() <= 2.0 * s.mesh_h());
    }

    #[test]
    fn lipschitz_examples() {
        let s = two_point();
        assert_eq!(lipschitz_constant(&s, &field(&s, &[0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(lipschitz_constant(&s, &field(&s, &[5.0, 5.0])).unwrap(), 0.0);
        let single = MeasuredSpace::build_from_graph(1, &[], &[1.0]).unwrap();
        let c = ScalarField::constant(&single, 0.0).unwrap();
        assert!(lipschitz_constant(&single, &c).is_err());
    }

    #[test]
    fn two_point_semigroup_defect_matches_missing_midpoint() {
        let s = two_point();
        let f = field(&s, &[0.0, 1.0]);
        assert_eq!(semigroup_defect(&s, &f, 0.5, 0.5).unwrap(), 0.5);
        let c = field(&s, &[1.0, 1.0]);
        assert_eq!(semigroup_defect(&s, &c, 0.3, 0.7).unwrap(), 0.0);
        assert!(semigroup_defect(&s, &f, 0.0, 1.0).is_err());
    }

    #[test]
    fn midpoint_identity_examples() {
        let s = two_point();
        assert_eq!(midpoint_identity_defect(&s, 0, 1, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(midpoint_identity_defect(&s, 1, 1, 1.0, 2.0).unwrap(), 0.0);
        let cycle = SpaceSpec::Circle { n: 4, circumference: 4.0 }.generate().unwrap();
        assert_eq!(midpoint_identity_defect(&cycle, 0, 2, 0.5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn two_point_residual() {
        let s = two_point();
        let f = field(&s, &[0.0, 1.0]);
        let r = hj_forward_residual(&s, &f, 1.0, 0.1).unwrap();
        let expected = (1.0 / 2.2 - 0.5) / 0.1 + 0.125;
        assert_eq!(r.values()[0], 0.0);
        assert!((r.values()[1] - expected).abs() < 1e-14);
        assert!((r.values()[1] + 0.329_545_454_5).abs() < 1e-9);
        assert!(hj_forward_residual(&s, &f, 1.0, 0.0).is_err());
        let c = field(&s, &[3.0, 3.0]);
        assert!(hj_forward_residual(&s, &c, 0.5, 0.1).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_point_trace() {
        let s = two_point();
        let f = field(&s, &[0.0, 1.0]);
        let trace = make_trace(&s, &f, &[0.25, 0.5, 1.0, 2.0]).unwrap();
        let at_b: Vec<f64> = trace.fields.iter().map(|q| q.values()[1]).collect();
        assert_eq!(at_b, vec![1.0, 1.0, 0.5, 0.25]);
        assert_eq!(trace.checks.range_violations, 0);
        assert_eq!(trace.checks.monotonicity_violations, 0);
        assert!(make_trace(&s, &f, &[]).is_err());
        assert!(make_trace(&s, &f, &[1.0, 0.5]).is_err());
        assert!(make_trace(&s, &f, &[0.0, 0.5]).is_err());
    }

    #[test]
    fn constant_trace() {
        let s = two_point();
        let c = field(&s, &[4.0, 4.0]);
        let trace = make_trace(&s, &c, &[1.0]).unwrap();
        assert_eq!(trace.fields, vec![c]);
        assert!(trace.checks.all_pass());
    }
}
