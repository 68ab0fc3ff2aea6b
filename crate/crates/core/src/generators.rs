//! Canonical measured spaces with known continuum limits.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::format;
use crate::space::MeasuredSpace;

/// Recipe for a generated space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    /// `n` equally spaced points on a cycle of the given circumference.
    Circle { n: usize, circumference: f64 },
    /// `n` equally spaced points on `[-half_width, half_width]` with weights
    /// `exp(-x^2 / (2 sigma^2))`.
    GaussianInterval { n: usize, sigma: f64, half_width: f64 },
    /// `n × m` grid with wraparound and side lengths `width × height`.
    Torus { n: usize, m: usize, width: f64, height: f64 },
    /// Path graph with unit edges.
    Path { n: usize },
    /// Complete graph with unit edges.
    Complete { n: usize },
    /// A space file on disk.
    CustomFile { path: PathBuf },
}

impl SpaceSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be > 0, got {v}")))
            }
        };
        let resolution = |name: &str, v: usize| {
            if v >= 2 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be >= 2, got {v}")))
            }
        };
        match *self {
            SpaceSpec::Circle { n, circumference } => {
                resolution("n", n)?;
                positive("circumference", circumference)
            }
            SpaceSpec::GaussianInterval { n, sigma, half_width } => {
                resolution("n", n)?;
                positive("sigma", sigma)?;
                positive("half_width", half_width)?;
                if half_width < 3.0 * sigma {
                    return Err(invalid(format!(
                        "half_width must be >= 3 sigma = {}, got {half_width}",
                        3.0 * sigma
                    )));
                }
                Ok(())
            }
            SpaceSpec::Torus { n, m, width, height } => {
                resolution("n", n)?;
                resolution("m", m)?;
                positive("width", width)?;
                positive("height", height)
            }
            SpaceSpec::Path { n } | SpaceSpec::Complete { n } => resolution("n", n),
            SpaceSpec::CustomFile { .. } => Ok(()),
        }
    }

    /// Builds the space. Generated spaces carry coordinates: the angle for
    /// circles and tori, the position for intervals and paths.
    pub fn generate(&self) -> Result<MeasuredSpace> {
        self.validate()?;
        match *self {
            SpaceSpec::Circle { n, circumference } => {
                let step = circumference / n as f64;
                let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, step)).collect();
                let coords = (0..n).map(|i| vec![2.0 * PI * i as f64 / n as f64]).collect();
                MeasuredSpace::build_from_graph(n, &edges, &vec![1.0; n])?.with_coords(coords)
            }
            SpaceSpec::GaussianInterval { n, sigma, half_width } => {
                let step = 2.0 * half_width / (n - 1) as f64;
                // signed integer offsets keep the grid exactly symmetric
                let xs: Vec<f64> = (0..n)
                    .map(|i| half_width * (2 * i as i64 - (n as i64 - 1)) as f64 / (n - 1) as f64)
                    .collect();
                let weights: Vec<f64> = xs.iter().map(|x| (-x * x / (2.0 * sigma * sigma)).exp()).collect();
                let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, step)).collect();
                let coords = xs.iter().map(|&x| vec![x]).collect();
                MeasuredSpace::build_from_graph(n, &edges, &weights)?.with_coords(coords)
            }
            SpaceSpec::Torus { n, m, width, height } => {
                let (hx, hy) = (width / n as f64, height / m as f64);
                let index = |i: usize, j: usize| i * m + j;
                let mut edges = Vec::with_capacity(2 * n * m);
                let mut coords = Vec::with_capacity(n * m);
                for i in 0..n {
                    for j in 0..m {
                        edges.push((index(i, j), index((i + 1) % n, j), hx));
                        edges.push((index(i, j), index(i, (j + 1) % m), hy));
                        coords.push(vec![2.0 * PI * i as f64 / n as f64, 2.0 * PI * j as f64 / m as f64]);
                    }
                }
                MeasuredSpace::build_from_graph(n * m, &edges, &vec![1.0; n * m])?.with_coords(coords)
            }
            SpaceSpec::Path { n } => {
                let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
                let coords = (0..n).map(|i| vec![i as f64]).collect();
                MeasuredSpace::build_from_graph(n, &edges, &vec![1.0; n])?.with_coords(coords)
            }
            SpaceSpec::Complete { n } => {
                let edges: Vec<_> = (0..n)
                    .flat_map(|i| ((i + 1)..n).map(move |j| (i, j, 1.0)))
                    .collect();
                MeasuredSpace::build_from_graph(n, &edges, &vec![1.0; n])
            }
            SpaceSpec::CustomFile { ref path } => format::load(path),
        }
    }

    /// Doubles the resolution. Gaussian intervals go to `2n - 1` points so
    /// the grid keeps every old point, including the origin for odd `n`.
    pub fn refine(&self) -> Result<SpaceSpec> {
        Ok(match *self {
            SpaceSpec::Circle { n, circumference } => SpaceSpec::Circle {
                n: 2 * n,
                circumference,
            },
            SpaceSpec::GaussianInterval { n, sigma, half_width } => SpaceSpec::GaussianInterval {
                n: 2 * n - 1,
                sigma,
                half_width,
            },
            SpaceSpec::Torus { n, m, width, height } => SpaceSpec::Torus {
                n: 2 * n,
                m: 2 * m,
                width,
                height,
            },
            SpaceSpec::Path { n } => SpaceSpec::Path { n: 2 * n },
            SpaceSpec::Complete { n } => SpaceSpec::Complete { n: 2 * n },
            SpaceSpec::CustomFile { .. } => {
                return Err(Error::Unsupported("a space file cannot be refined".into()))
            }
        })
    }

    /// Mass the untruncated Gaussian puts outside `[-W, W]`, for report
    /// headers. Zero for every other kind.
    pub fn truncation_mass(&self) -> f64 {
        match *self {
            SpaceSpec::GaussianInterval { sigma, half_width, .. } => {
                statrs::function::erf::erfc(half_width / (sigma * std::f64::consts::SQRT_2))
            }
            _ => 0.0,
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Circle { n, circumference } => write!(f, "circle:{n}:{circumference}"),
            SpaceSpec::GaussianInterval { n, sigma, half_width } => write!(f, "gauss:{n}:{sigma}:{half_width}"),
            SpaceSpec::Torus { n, m, width, height } => write!(f, "torus:{n}:{m}:{width}:{height}"),
            SpaceSpec::Path { n } => write!(f, "path:{n}"),
            SpaceSpec::Complete { n } => write!(f, "complete:{n}"),
            SpaceSpec::CustomFile { path } => write!(f, "{}", path.display()),
        }
    }
}

/// Parses `circle:N:L`, `gauss:N:SIGMA:W`, `torus:N:M[:W:H]`, `path:N`,
/// `complete:N`, or anything else as a file path.
impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let int = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .ok_or_else(|| invalid(format!("space spec `{s}` is missing field {i}")))?
                .parse()
                .map_err(|_| invalid(format!("space spec `{s}`: field {i} is not an integer")))
        };
        let real = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| invalid(format!("space spec `{s}` is missing field {i}")))?
                .parse()
                .map_err(|_| invalid(format!("space spec `{s}`: field {i} is not a number")))
        };
        let arity = |k: &[usize]| -> Result<()> {
            if k.contains(&parts.len()) {
                Ok(())
            } else {
                Err(invalid(format!("space spec `{s}` has the wrong number of fields")))
            }
        };
        let spec = match parts[0] {
            "circle" => {
                arity(&[2, 3])?;
                SpaceSpec::Circle {
                    n: int(1)?,
                    circumference: if parts.len() == 3 { real(2)? } else { 2.0 * PI },
                }
            }
            "gauss" | "gaussian" => {
                arity(&[4])?;
                SpaceSpec::GaussianInterval {
                    n: int(1)?,
                    sigma: real(2)?,
                    half_width: real(3)?,
                }
            }
            "torus" => {
                arity(&[3, 5])?;
                let (width, height) = if parts.len() == 5 {
                    (real(3)?, real(4)?)
                } else {
                    (2.0 * PI, 2.0 * PI)
                };
                SpaceSpec::Torus {
                    n: int(1)?,
                    m: int(2)?,
                    width,
                    height,
                }
            }
            "path" => {
                arity(&[2])?;
                SpaceSpec::Path { n: int(1)? }
            }
            "complete" => {
                arity(&[2])?;
                SpaceSpec::Complete { n: int(1)? }
            }
            "file" => SpaceSpec::CustomFile {
                path: PathBuf::from(&s["file:".len()..]),
            },
            _ => SpaceSpec::CustomFile { path: PathBuf::from(s) },
        };
        spec.validate()?;
        Ok(spec)
    }
}
