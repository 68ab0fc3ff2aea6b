use crate::error::{Error, Result};
use crate::hopf_lax::subgrad_norms;
use crate::space::{MeasuredSpace, ScalarField};
use crate::transport::w2;

/// Below this a quantity in a ratio denominator counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

fn density(space: &MeasuredSpace, f: &ScalarField) -> Result<(Vec<f64>, f64)> {
    space.check_field(f)?;
    let sq: Vec<f64> = f.values().iter().map(|v| v * v).collect();
    let mass = space.integrate(&sq);
    if !(mass > 0.0) {
        return Err(Error::Degenerate("zero field has no entropy".into()));
    }
    Ok((sq.into_iter().map(|v| v / mass).collect(), mass))
}

fn entropy_of_density(space: &MeasuredSpace, rho: &[f64]) -> f64 {
    let ent: f64 = rho
        .iter()
        .zip(space.measure())
        .map(|(&r, &m)| if r > 0.0 { r * r.ln() * m } else { 0.0 })
        .sum();
    ent.max(0.0)
}

/// `Σ ρ log ρ ν` for `ρ = F^2 / Σ F^2 ν`, with `0 log 0 = 0`.
pub fn entropy_functional(space: &MeasuredSpace, f: &ScalarField) -> Result<f64> {
    let (rho, _) = density(space, f)?;
    Ok(entropy_of_density(space, &rho))
}

/// `Σ |∇⁻f|^2 ν`.
pub fn dirichlet_energy(space: &MeasuredSpace, f: &ScalarField) -> Result<f64> {
    let g = subgrad_norms(space, f)?;
    Ok(space.integrate(&g.iter().map(|v| v * v).collect::<Vec<_>>()))
}

/// Largest `K` for which `f` satisfies the log-Sobolev inequality.
pub fn lsi_ratio(space: &MeasuredSpace, f: &ScalarField) -> Result<f64> {
    let (rho, mass) = density(space, f)?;
    let ent = entropy_of_density(space, &rho);
    if ent <= DEGENERACY_TOL {
        return Err(Error::Degenerate("witness carries no information (entropy vanishes)".into()));
    }
    Ok(2.0 * dirichlet_energy(space, f)? / mass / ent)
}

/// A Talagrand witness counts toward constant estimates only if it moves
/// mass across at least this many mesh cells, `W_2(F^2 ν, ν) >= c * mesh_h`.
///
/// Below the mesh scale `W_2^2` grows linearly in the size of the
/// perturbation rather than quadratically, so the ratio of any small
/// perturbation of the constant tends to zero on every finite space.
pub const TRANSPORT_RESOLUTION: f64 = 4.0;

/// Largest `K` for which `F` satisfies the Talagrand inequality.
pub fn talagrand_ratio(space: &MeasuredSpace, f: &ScalarField) -> Result<f64> {
    talagrand_parts(space, f).map(|(r, _)| r)
}

/// The Talagrand ratio together with `W_2(F^2 ν, ν)`.
pub fn talagrand_parts(space: &MeasuredSpace, f: &ScalarField) -> Result<(f64, f64)> {
    let (rho, _) = density(space, f)?;
    let ent = entropy_of_density(space, &rho);
    let nu = space.measure();
    let mu: Vec<f64> = rho.iter().zip(nu).map(|(r, m)| r * m).collect();
    let (dist, _) = w2(space, &mu, nu)?;
    if dist <= DEGENERACY_TOL {
        return Err(Error::Degenerate("zero transport distance between F^2 ν and ν".into()));
    }
    Ok((2.0 * ent / (dist * dist), dist))
}

/// [`talagrand_ratio`], rejecting witnesses below [`TRANSPORT_RESOLUTION`].
pub fn resolved_talagrand_ratio(space: &MeasuredSpace, f: &ScalarField) -> Result<f64> {
    let (ratio, dist) = talagrand_parts(space, f)?;
    let floor = TRANSPORT_RESOLUTION * space.mesh_h();
    if dist < floor {
        return Err(Error::Degenerate(format!(
            "unresolved transport: W_2 = {dist:.3e} is below {TRANSPORT_RESOLUTION} mesh cells ({floor:.3e})"
        )));
    }
    Ok(ratio)
}

/// `h - ∫h dν`.
pub fn centered(space: &MeasuredSpace, h: &ScalarField) -> Result<ScalarField> {
    space.check_field(h)?;
    let mean = space.integrate(h.values());
    Ok(h.with_values(h.values().iter().map(|v| v - mean).collect()))
}

/// Largest `K` for which `h` satisfies the Poincaré inequality.
pub fn poincare_ratio(space: &MeasuredSpace, h: &ScalarField) -> Result<f64> {
    let c = centered(space, h)?;
    let var = space.integrate(&c.values().iter().map(|v| v * v).collect::<Vec<_>>());
    if var <= DEGENERACY_TOL {
        return Err(Error::Degenerate("field is constant, variance vanishes".into()));
    }
    Ok(dirichlet_energy(space, &c)? / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::SpaceSpec;

    fn two_point() -> MeasuredSpace {
        SpaceSpec::Path { n: 2 }.generate().unwrap()
    }

    #[test]
    fn entropy_examples() {
        let s = two_point();
        let one = ScalarField::constant(&s, 1.0).unwrap();
        assert!(entropy_functional(&s, &one).unwrap() < 1e-15);
        let f = ScalarField::new(&s, vec![2f64.sqrt(), 0.0]).unwrap();
        let e = entropy_functional(&s, &f).unwrap();
        assert!((e - 2f64.ln()).abs() < 1e-15);
        let g = ScalarField::new(&s, vec![-3.0 * 2f64.sqrt(), 0.0]).unwrap();
        assert!((entropy_functional(&s, &g).unwrap() - e).abs() < 1e-15);
        let zero = ScalarField::constant(&s, 0.0).unwrap();
        assert!(entropy_functional(&s, &zero).is_err());
    }

    #[test]
    fn two_point_ratios() {
        let s = two_point();
        let f = ScalarField::new(&s, vec![2f64.sqrt(), 0.0]).unwrap();
        let lsi = lsi_ratio(&s, &f).unwrap();
        assert!((lsi - 2.0 / 2f64.ln()).abs() < 1e-12);
        assert!((lsi - 2.8854).abs() < 1e-4);
        let t = talagrand_ratio(&s, &f).unwrap();
        assert!((t - 4.0 * 2f64.ln()).abs() < 1e-12);
        assert!((t - 2.7726).abs() < 1e-4);
        let h = ScalarField::new(&s, vec![-1.0, 1.0]).unwrap();
        assert_eq!(poincare_ratio(&s, &h).unwrap(), 2.0);
    }

    #[test]
    fn degenerate_witnesses() {
        let s = two_point();
        let flat = ScalarField::new(&s, vec![1.0, -1.0]).unwrap();
        let e = lsi_ratio(&s, &flat).unwrap_err();
        assert!(e.to_string().contains("witness carries no information"));
        let one = ScalarField::constant(&s, 1.0).unwrap();
        let e = talagrand_ratio(&s, &one).unwrap_err();
        assert!(e.to_string().contains("zero transport distance"));
        assert!(poincare_ratio(&s, &ScalarField::constant(&s, 4.0).unwrap()).is_err());
    }

    #[test]
    fn sub_mesh_tilts_collapse() {
        let s = SpaceSpec::GaussianInterval { n: 201, sigma: 1.0, half_width: 4.0 }.generate().unwrap();
        let x: Vec<f64> = s.coords().unwrap().iter().map(|c| c[0]).collect();
        let tilt = |a: f64| ScalarField::from_fn(&s, |i| (a * x[i] / 2.0).exp()).unwrap();
        let (tiny, d) = talagrand_parts(&s, &tilt(0.01)).unwrap();
        assert!(d < s.mesh_h());
        assert!(tiny < 0.3, "{tiny}");
        assert!(resolved_talagrand_ratio(&s, &tilt(0.01)).is_err());
        let big = resolved_talagrand_ratio(&s, &tilt(0.5)).unwrap();
        assert!((big - 1.0).abs() < 0.01);
    }

    #[test]
    fn bump_is_homogeneous() {
        let s = SpaceSpec::Circle { n: 7, circumference: 1.0 }.generate().unwrap();
        let bump = |a: f64| ScalarField::from_fn(&s, |i| if i == 3 { a } else { 0.0 }).unwrap();
        let r1 = poincare_ratio(&s, &bump(1.0)).unwrap();
        let r2 = poincare_ratio(&s, &bump(2.0)).unwrap();
        assert!(r1.is_finite() && r1 > 0.0);
        assert!((r1 - r2).abs() < 1e-12 * r1);
    }

    #[test]
    fn cosine_matches_same_mesh_rayleigh_quotient() {
        let n = 512;
        let s = SpaceSpec::Circle { n, circumference: 2.0 * std::f64::consts::PI }.generate().unwrap();
        let h = ScalarField::from_fn(&s, |i| (s.coords().unwrap()[i][0]).cos()).unwrap();
        let ratio = poincare_ratio(&s, &h).unwrap();
        // descending one-sided differences, evaluated independently
        let dx = 2.0 * std::f64::consts::PI / n as f64;
        let v = h.values();
        let mut energy = 0.0;
        let mut var = 0.0;
        for i in 0..n {
            let l = v[(i + n - 1) % n];
            let r = v[(i + 1) % n];
            let slope = ((v[i] - l).max(v[i] - r)).max(0.0) / dx;
            energy += slope * slope / n as f64;
            var += v[i] * v[i] / n as f64;
        }
        assert!((ratio - energy / var).abs() < 1e-12);
        assert!((ratio - 1.0).abs() < 0.05);
    }
}
