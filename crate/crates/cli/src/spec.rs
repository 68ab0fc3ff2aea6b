//! Small argument languages: fields, measures and time grids.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use hjlab::inequalities::{eigenfields, line_coordinate, smoothed_random_field};
use hjlab::{MeasuredSpace, ScalarField};

/// Smoothing time of `random:SEED` fields, in units of `mesh_h^2`.
pub const RANDOM_SMOOTHING: f64 = 10.0;

/// A scalar field resolved against a space's coordinates.
///
/// `cos[:k]` and `sin[:k]` act on the first coordinate (an angle on circles
/// and tori), `coordinate[:axis]` is a raw coordinate, `tilt:a` is
/// `exp(a x / 2)` for the ν-centered line coordinate `x`, `eigen:k` is the
/// k-th Laplacian eigenfield, `random:seed` a smoothed noise field and
/// `csv:path` reads `index,value` rows.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Cos(f64),
    Sin(f64),
    Coordinate(usize),
    Tilt(f64),
    Const(f64),
    Eigen(usize),
    Random(u64),
    Csv(PathBuf),
}

impl FieldSpec {
    /// Whether the field can be rebuilt on a refined space.
    pub fn is_analytic(&self) -> bool {
        !matches!(self, FieldSpec::Csv(_))
    }

    pub fn resolve(&self, space: &MeasuredSpace) -> Result<ScalarField> {
        let axis = |k: usize| -> Result<Vec<f64>> {
            let coords = space
                .coords()
                .ok_or_else(|| anyhow!("field `{self}` needs point coordinates and the space has none"))?;
            coords
                .iter()
                .map(|c| c.get(k).copied())
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| anyhow!("field `{self}` needs coordinate axis {k}"))
        };
        let values = match *self {
            FieldSpec::Cos(k) => axis(0)?.into_iter().map(|x| (k * x).cos()).collect(),
            FieldSpec::Sin(k) => axis(0)?.into_iter().map(|x| (k * x).sin()).collect(),
            FieldSpec::Coordinate(a) => axis(a)?,
            FieldSpec::Tilt(a) => {
                let x = line_coordinate(space)
                    .ok_or_else(|| anyhow!("field `{self}` needs a space with 1-D coordinates"))?;
                x.values().iter().map(|v| (a * v / 2.0).exp()).collect()
            }
            FieldSpec::Const(c) => vec![c; space.n()],
            FieldSpec::Eigen(k) => {
                ensure!(k >= 1, "eigenfields are numbered from 1");
                let modes = eigenfields(space, k)?;
                modes
                    .into_iter()
                    .nth(k - 1)
                    .ok_or_else(|| anyhow!("space has fewer than {k} nonconstant eigenfields"))?
                    .into_values()
            }
            FieldSpec::Random(seed) => {
                let t0 = RANDOM_SMOOTHING * space.mesh_h().powi(2);
                return Ok(smoothed_random_field(space, seed, 0, t0)?);
            }
            FieldSpec::Csv(ref path) => read_values(path, space.n())?,
        };
        Ok(ScalarField::new(space, values)?)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Cos(k) => write!(f, "cos:{k}"),
            FieldSpec::Sin(k) => write!(f, "sin:{k}"),
            FieldSpec::Coordinate(a) => write!(f, "coordinate:{a}"),
            FieldSpec::Tilt(a) => write!(f, "tilt:{a}"),
            FieldSpec::Const(c) => write!(f, "const:{c}"),
            FieldSpec::Eigen(k) => write!(f, "eigen:{k}"),
            FieldSpec::Random(s) => write!(f, "random:{s}"),
            FieldSpec::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |what: &str| -> Result<f64> {
            let a = arg.ok_or_else(|| anyhow!("field `{s}` needs {what}"))?;
            a.parse().with_context(|| format!("field `{s}`: `{a}` is not a number"))
        };
        let int = |what: &str| -> Result<u64> {
            let a = arg.ok_or_else(|| anyhow!("field `{s}` needs {what}"))?;
            a.parse().with_context(|| format!("field `{s}`: `{a}` is not a nonnegative integer"))
        };
        Ok(match head {
            "cos" => FieldSpec::Cos(if arg.is_some() { num("a frequency")? } else { 1.0 }),
            "sin" => FieldSpec::Sin(if arg.is_some() { num("a frequency")? } else { 1.0 }),
            "coordinate" | "x" => FieldSpec::Coordinate(if arg.is_some() { int("an axis")? as usize } else { 0 }),
            "tilt" => FieldSpec::Tilt(num("a slope")?),
            "const" => FieldSpec::Const(num("a value")?),
            "eigen" => FieldSpec::Eigen(int("an index")? as usize),
            "random" => FieldSpec::Random(int("a seed")?),
            "csv" => FieldSpec::Csv(PathBuf::from(arg.ok_or_else(|| anyhow!("field `{s}` needs a path"))?)),
            _ => bail!("unknown field `{s}` (cos, sin, coordinate, tilt:A, const:C, eigen:K, random:SEED, csv:PATH)"),
        })
    }
}

/// A probability measure on the points of a space.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    /// The reference measure ν.
    Nu,
    Uniform,
    Point(usize),
    /// `F^2 ν` normalized.
    Density(FieldSpec),
    Csv(PathBuf),
}

impl MeasureSpec {
    pub fn resolve(&self, space: &MeasuredSpace) -> Result<Vec<f64>> {
        let n = space.n();
        let raw = match self {
            MeasureSpec::Nu => space.measure().to_vec(),
            MeasureSpec::Uniform => vec![1.0; n],
            MeasureSpec::Point(i) => {
                ensure!(*i < n, "point {i} is out of range for a space with {n} points");
                let mut v = vec![0.0; n];
                v[*i] = 1.0;
                v
            }
            MeasureSpec::Density(f) => {
                let f = f.resolve(space)?;
                f.values()
                    .iter()
                    .zip(space.measure())
                    .map(|(v, m)| v * v * m)
                    .collect()
            }
            MeasureSpec::Csv(path) => read_values(path, n)?,
        };
        ensure!(
            raw.iter().all(|m| m.is_finite() && *m >= 0.0),
            "measure `{self}` has negative or non-finite entries"
        );
        let total: f64 = raw.iter().sum();
        ensure!(total > 0.0, "measure `{self}` has zero mass");
        Ok(raw.into_iter().map(|m| m / total).collect())
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureSpec::Nu => write!(f, "nu"),
            MeasureSpec::Uniform => write!(f, "uniform"),
            MeasureSpec::Point(i) => write!(f, "point:{i}"),
            MeasureSpec::Density(g) => write!(f, "density:{g}"),
            MeasureSpec::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

impl FromStr for MeasureSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "nu" {
            return Ok(MeasureSpec::Nu);
        }
        if s == "uniform" {
            return Ok(MeasureSpec::Uniform);
        }
        if let Some(i) = s.strip_prefix("point:") {
            return Ok(MeasureSpec::Point(
                i.parse().with_context(|| format!("measure `{s}`: `{i}` is not a point index"))?,
            ));
        }
        if let Some(f) = s.strip_prefix("density:") {
            return Ok(MeasureSpec::Density(f.parse()?));
        }
        if let Some(p) = s.strip_prefix("csv:") {
            return Ok(MeasureSpec::Csv(PathBuf::from(p)));
        }
        bail!("unknown measure `{s}` (nu, uniform, point:I, density:FIELD, csv:PATH)")
    }
}

/// Strictly positive, strictly increasing times: `geo:a:b:n`, `lin:a:b:n`
/// or a comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub text: String,
    pub times: Vec<f64>,
}

impl FromStr for TimeGrid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let times = match parts[0] {
            "geo" | "lin" => {
                ensure!(parts.len() == 4, "time grid `{s}` must look like {}:MIN:MAX:COUNT", parts[0]);
                let a: f64 = parts[1].parse().with_context(|| format!("time grid `{s}`: bad minimum"))?;
                let b: f64 = parts[2].parse().with_context(|| format!("time grid `{s}`: bad maximum"))?;
                let n: usize = parts[3].parse().with_context(|| format!("time grid `{s}`: bad count"))?;
                ensure!(n >= 1, "time grid `{s}` needs at least one time");
                ensure!(a > 0.0 && a.is_finite() && b.is_finite(), "time grid `{s}` must be positive and finite");
                ensure!(n == 1 || a < b, "time grid `{s}` needs MIN < MAX");
                if n == 1 {
                    vec![a]
                } else if parts[0] == "geo" {
                    let r = (b / a).ln() / (n - 1) as f64;
                    let mut v: Vec<f64> = (0..n).map(|i| a * (r * i as f64).exp()).collect();
                    v[n - 1] = b;
                    v
                } else {
                    let mut v: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
                    v[n - 1] = b;
                    v
                }
            }
            _ => s
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .with_context(|| format!("time grid `{s}`: `{t}` is not a number"))
                })
                .collect::<Result<Vec<f64>>>()?,
        };
        ensure!(
            times.iter().all(|t| *t > 0.0 && t.is_finite()),
            "time grid `{s}` contains a nonpositive time"
        );
        ensure!(
            times.windows(2).all(|w| w[0] < w[1]),
            "time grid `{s}` is not strictly increasing"
        );
        Ok(TimeGrid {
            text: s.to_string(),
            times,
        })
    }
}

/// Reads `index,value` rows (a header line is skipped) into a dense vector.
pub fn read_values(path: &Path, n: usize) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut values = vec![None; n];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
            bail!("{}:{}: expected `index,value`", path.display(), lineno + 1);
        };
        let Ok(i) = a.parse::<usize>() else {
            if lineno == 0 {
                continue;
            }
            bail!("{}:{}: `{a}` is not a point index", path.display(), lineno + 1);
        };
        let v: f64 = b
            .parse()
            .with_context(|| format!("{}:{}: `{b}` is not a number", path.display(), lineno + 1))?;
        ensure!(i < n, "{}:{}: index {i} out of range for {n} points", path.display(), lineno + 1);
        ensure!(values[i].is_none(), "{}:{}: index {i} given twice", path.display(), lineno + 1);
        values[i] = Some(v);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| anyhow!("{}: no value for point {i}", path.display())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use hjlab::SpaceSpec;

    #[test]
    fn geometric_grid_hits_both_ends() {
        let g: TimeGrid = "geo:0.001:1:16".parse().unwrap();
        assert_eq!(g.times.len(), 16);
        assert_eq!(g.times[0], 0.001);
        assert_eq!(g.times[15], 1.0);
        let ratio = g.times[1] / g.times[0];
        assert!((g.times[8] / g.times[7] - ratio).abs() < 1e-12);
    }

    #[test]
    fn bad_grids() {
        for s in ["geo:0:1:4", "lin:1:0.5:3", "0.5,0.2", "geo:1:2", "-1", "lin:0.1:1:0"] {
            assert!(s.parse::<TimeGrid>().is_err(), "{s}");
        }
        assert_eq!("0.1, 0.2".parse::<TimeGrid>().unwrap().times, vec![0.1, 0.2]);
    }

    #[test]
    fn fields_on_a_circle() {
        let s = SpaceSpec::Circle { n: 8, circumference: 1.0 }.generate().unwrap();
        let c = "cos".parse::<FieldSpec>().unwrap().resolve(&s).unwrap();
        assert_eq!(c.values()[0], 1.0);
        assert!((c.values()[4] + 1.0).abs() < 1e-15);
        let s2 = "sin:2".parse::<FieldSpec>().unwrap().resolve(&s).unwrap();
        assert!(s2.values()[2].abs() < 1e-15);
        assert!("tilt:1".parse::<FieldSpec>().unwrap().resolve(&s).is_ok());
        assert!("coordinate:1".parse::<FieldSpec>().unwrap().resolve(&s).is_err());
        assert!("wobble".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn complete_graph_has_no_coordinates() {
        let s = SpaceSpec::Complete { n: 4 }.generate().unwrap();
        assert!("cos".parse::<FieldSpec>().unwrap().resolve(&s).is_err());
        assert_eq!("const:2".parse::<FieldSpec>().unwrap().resolve(&s).unwrap().values(), &[2.0; 4]);
    }

    #[test]
    fn measures_are_normalized() {
        let s = SpaceSpec::Path { n: 4 }.generate().unwrap();
        let m = "density:coordinate".parse::<MeasureSpec>().unwrap().resolve(&s).unwrap();
        assert_eq!(m[0], 0.0);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!("point:2".parse::<MeasureSpec>().unwrap().resolve(&s).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        assert!("point:9".parse::<MeasureSpec>().unwrap().resolve(&s).is_err());
    }

    #[test]
    fn csv_values_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, "index,value\n1,2.5\n0,-1\n").unwrap();
        assert_eq!(read_values(&p, 2).unwrap(), vec![-1.0, 2.5]);
        assert!(read_values(&p, 3).is_err());
        std::fs::write(&p, "0,1\n0,2\n").unwrap();
        assert!(read_values(&p, 1).is_err());
    }
}
