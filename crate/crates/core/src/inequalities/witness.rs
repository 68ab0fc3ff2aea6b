//! Test-function families for the constant search.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Inequality;
use crate::error::{invalid, Result};
use crate::hopf_lax;
use crate::space::{MeasuredSpace, ScalarField};

/// Largest space for which eigenfields are computed (dense eigensolve).
pub const EIGEN_MAX_N: usize = 1500;

/// A named test function.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub label: String,
    pub field: ScalarField,
}

/// Which test functions to try.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFamily {
    /// Slopes `α` of the tilts `e^{α x / 2}` along a 1-D coordinate.
    pub tilts: Vec<f64>,
    /// Number of low nonconstant Laplacian eigenfields.
    pub eigenfields: usize,
    /// Amplitude `ε` of the near-constant forms `1 + ε v`; `None` disables them.
    pub near_constant: Option<f64>,
    /// Number of seeded random fields smoothed by `Q_{t0}`.
    pub random: usize,
    /// Factor `c` in `t0 = c * mesh_h^2`.
    pub smoothing: f64,
}

impl Default for WitnessFamily {
    fn default() -> Self {
        Self {
            tilts: vec![-1.0, -0.5, -0.25, 0.25, 0.5, 1.0],
            eigenfields: 4,
            near_constant: Some(0.1),
            random: 4,
            smoothing: 10.0,
        }
    }
}

impl WitnessFamily {
    pub fn empty() -> Self {
        Self {
            tilts: Vec::new(),
            eigenfields: 0,
            near_constant: None,
            random: 0,
            smoothing: 10.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tilts.is_empty() && self.eigenfields == 0 && self.random == 0
    }

    /// Candidate witnesses for `which`, in a fixed order.
    ///
    /// LSI and Talagrand witnesses are positive (`e^{g/2}` or `1 + ε v`);
    /// Poincaré witnesses are the directions themselves.
    pub fn candidates(&self, space: &MeasuredSpace, which: Inequality, seed: u64) -> Result<Vec<Witness>> {
        let mut out = Vec::new();
        let coord = line_coordinate(space);
        let modes = if self.eigenfields > 0 && space.n() <= EIGEN_MAX_N {
            eigenfields(space, self.eigenfields)?
        } else {
            Vec::new()
        };
        let noise: Vec<ScalarField> = (0..self.random)
            .map(|i| smoothed_random_field(space, seed, i as u64, self.smoothing * space.mesh_h().powi(2)))
            .collect::<Result<_>>()?;

        let mut directions: Vec<(String, ScalarField)> = Vec::new();
        if let Some(x) = &coord {
            directions.push(("coordinate".into(), sup_normalized(x)));
        }
        for (k, v) in modes.iter().enumerate() {
            directions.push((format!("eigen{}", k + 1), v.clone()));
        }

        match which {
            Inequality::Poincare => {
                out.extend(directions.into_iter().map(|(label, field)| Witness { label, field }));
                if let Some(x) = &coord {
                    for &a in &self.tilts {
                        let field = x.map(|v| (a * v / 2.0).exp())?;
                        out.push(Witness { label: format!("tilt{a}"), field });
                    }
                }
                for (i, r) in noise.into_iter().enumerate() {
                    out.push(Witness { label: format!("random{i}"), field: r });
                }
            }
            Inequality::Lsi | Inequality::Talagrand => {
                if let Some(x) = &coord {
                    for &a in &self.tilts {
                        let field = x.map(|v| (a * v / 2.0).exp())?;
                        out.push(Witness { label: format!("tilt{a}"), field });
                    }
                }
                if let Some(eps) = self.near_constant {
                    for (label, v) in &directions {
                        let field = v.map(|t| 1.0 + eps * t)?;
                        out.push(Witness { label: format!("near-{label}"), field });
                    }
                }
                for (i, r) in noise.into_iter().enumerate() {
                    let field = r.map(|v| (v / 2.0).exp())?;
                    out.push(Witness { label: format!("random{i}"), field });
                }
            }
        }
        Ok(out)
    }
}

/// The ν-centered coordinate, when the space carries 1-D coordinates.
pub fn line_coordinate(space: &MeasuredSpace) -> Option<ScalarField> {
    let coords = space.coords()?;
    if coords.first()?.len() != 1 {
        return None;
    }
    let x: Vec<f64> = coords.iter().map(|c| c[0]).collect();
    let mean = space.integrate(&x);
    ScalarField::new(space, x.into_iter().map(|v| v - mean).collect()).ok()
}

fn sup_normalized(f: &ScalarField) -> ScalarField {
    let m = f.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        f.with_values(f.values().iter().map(|v| v / m).collect())
    } else {
        f.clone()
    }
}

/// The `k` lowest nonconstant eigenfields of the ν-weighted graph
/// Laplacian, each scaled to sup norm 1 with its largest entry positive.
///
/// Edge `xy` of length `l` has weight `(ν_x + ν_y) / (2 l^2)` and the mass
/// matrix is `diag(ν)`, so Rayleigh quotients approximate `∫|∇v|^2 dν / ∫v^2 dν`.
pub fn eigenfields(space: &MeasuredSpace, k: usize) -> Result<Vec<ScalarField>> {
    let n = space.n();
    let nu = space.measure();
    if nu.iter().any(|&m| m <= 0.0) {
        return Err(invalid("eigenfields need a measure with full support"));
    }
    let scale: Vec<f64> = nu.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        for &(y, len) in space.neighbors(x) {
            let w = (nu[x] + nu[y]) / (2.0 * len * len);
            a[(x, x)] += w * scale[x] * scale[x];
            a[(x, y)] -= w * scale[x] * scale[y];
        }
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut out = Vec::new();
    for &idx in order.iter().skip(1).take(k) {
        let col = eig.eigenvectors.column(idx);
        let mut v: Vec<f64> = (0..n).map(|x| col[x] * scale[x]).collect();
        let big = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        // first near-maximal entry fixes the sign, robust to rounding ties
        let at = v.iter().position(|x| x.abs() >= big * (1.0 - 1e-9)).unwrap_or(0);
        let s = v[at].signum() / big;
        v.iter_mut().for_each(|x| *x *= s);
        out.push(ScalarField::new(space, v)?);
    }
    Ok(out)
}

/// Uniform `[-1, 1]` noise from stream `index` of `seed`, smoothed by `Q_{t0}`.
pub fn smoothed_random_field(space: &MeasuredSpace, seed: u64, index: u64, t0: f64) -> Result<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let values: Vec<f64> = (0..space.n()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let noise = ScalarField::new(space, values)?;
    hopf_lax::apply(space, &noise, t0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::SpaceSpec;
    use crate::inequalities::functionals::poincare_ratio;

    #[test]
    fn circle_eigenfields_are_first_harmonics() {
        let s = SpaceSpec::Circle { n: 128, circumference: 2.0 * std::f64::consts::PI }.generate().unwrap();
        let modes = eigenfields(&s, 4).unwrap();
        for (k, v) in modes.iter().enumerate() {
            let r = poincare_ratio(&s, v).unwrap();
            let expect = if k < 2 { 1.0 } else { 4.0 };
            assert!((r - expect).abs() < 0.02 * expect, "mode {k}: {r}");
            assert_eq!(v.values().iter().fold(0.0f64, |a, x| a.max(x.abs())), 1.0);
        }
    }

    #[test]
    fn random_fields_are_seeded() {
        let s = SpaceSpec::Path { n: 30 }.generate().unwrap();
        let a = smoothed_random_field(&s, 7, 0, 10.0).unwrap();
        let b = smoothed_random_field(&s, 7, 0, 10.0).unwrap();
        let c = smoothed_random_field(&s, 7, 1, 10.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.min() >= -1.0 && a.max() <= 1.0);
    }

    #[test]
    fn candidate_shapes() {
        let s = SpaceSpec::GaussianInterval { n: 41, sigma: 1.0, half_width: 4.0 }.generate().unwrap();
        let fam = WitnessFamily::default();
        let lsi = fam.candidates(&s, Inequality::Lsi, 1).unwrap();
        assert_eq!(lsi.len(), 6 + 5 + 4);
        assert!(lsi.iter().all(|w| w.field.min() > 0.0));
        let p = fam.candidates(&s, Inequality::Poincare, 1).unwrap();
        assert_eq!(p[0].label, "coordinate");
        let circle = SpaceSpec::Complete { n: 5 }.generate().unwrap();
        assert!(line_coordinate(&circle).is_none());
    }
}
