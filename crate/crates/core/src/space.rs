//! Discrete measured spaces: a connected weighted graph, its shortest-path
//! metric and a probability measure on the vertices.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::hopf_lax;

/// Tolerance on the total mass of a normalized measure.
pub const MEASURE_SUM_TOL: f64 = 1e-12;

/// Pass/fail threshold used by [`validate_metric`].
pub const METRIC_TOL: f64 = 1e-9;

/// Content hash of a space (edges and measure), used to bind fields to the
/// space they were built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceId(pub u64);

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// One value per point of a [`MeasuredSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    space_id: SpaceId,
}

impl ScalarField {
    pub fn new(space: &MeasuredSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.n() {
            return Err(Error::FieldLength {
                expected: space.n(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField { index });
        }
        Ok(Self {
            values,
            space_id: space.id(),
        })
    }

    pub fn from_fn(space: &MeasuredSpace, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new(space, (0..space.n()).map(f).collect())
    }

    pub fn constant(space: &MeasuredSpace, c: f64) -> Result<Self> {
        Self::new(space, vec![c; space.n()])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn space_id(&self) -> SpaceId {
        self.space_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same space, new values. The caller guarantees the length.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            space_id: self.space_id,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField { index });
        }
        Ok(self.with_values(values))
    }
}

/// A finite point set with shortest-path distances and a probability measure.
///
/// Immutable after construction; every operation on it is a pure function.
#[derive(Debug, Clone)]
pub struct MeasuredSpace {
    n: usize,
    dist: Vec<f64>,
    measure: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
    // per row, point indices sorted by distance (ties by index)
    by_distance: Vec<u32>,
    mesh_h: f64,
    midpoint_defect: f64,
    diameter: f64,
    id: SpaceId,
    coords: Option<Vec<Vec<f64>>>,
    labels: Option<Vec<String>>,
}

impl MeasuredSpace {
    /// Builds the space generated by a weighted graph.
    ///
    /// `weights` need not be normalized. Distances are all-pairs shortest
    /// paths; mesh radius and midpoint defect are computed exhaustively.
    pub fn build_from_graph(n: usize, edges: &[(usize, usize, f64)], weights: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("a space needs at least one point"));
        }
        if weights.len() != n {
            return Err(Error::MeasureLength {
                expected: n,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::BadMeasure);
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::BadMeasure);
        }
        let measure: Vec<f64> = weights.iter().map(|w| w / total).collect();

        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(a, b, length) in edges {
            for index in [a, b] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop { a, b });
            }
            if !(length.is_finite() && length > 0.0) {
                return Err(Error::BadEdgeLength { a, b, length });
            }
            add_neighbor(&mut adjacency[a], b, length);
            add_neighbor(&mut adjacency[b], a, length);
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(j, _)| j);
        }

        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(&adjacency, s)).collect();
        let mut dist = Vec::with_capacity(n * n);
        for (s, row) in rows.iter().enumerate() {
            if let Some(to) = row.iter().position(|d| d.is_infinite()) {
                return Err(Error::Disconnected { from: s, to });
            }
            dist.extend_from_slice(row);
        }
        // Dijkstra is exact per source; enforce bitwise symmetry anyway
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist[i * n + j].min(dist[j * n + i]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }

        let by_distance = sorted_rows(n, &dist);
        let mesh_h = (0..n)
            .map(|x| if n > 1 { dist[x * n + by_distance[x * n + 1] as usize] } else { 0.0 })
            .fold(0.0, f64::max);
        let diameter = dist.iter().copied().fold(0.0, f64::max);
        let midpoint_defect = compute_midpoint_defect(n, &dist);

        let mut hasher = Sha256::new();
        hasher.update((n as u64).to_le_bytes());
        for &(a, b, l) in edges {
            hasher.update((a as u64).to_le_bytes());
            hasher.update((b as u64).to_le_bytes());
            hasher.update(l.to_bits().to_le_bytes());
        }
        for m in &measure {
            hasher.update(m.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);

        Ok(Self {
            n,
            dist,
            measure,
            edges: edges.to_vec(),
            adjacency,
            by_distance,
            mesh_h,
            midpoint_defect,
            diameter,
            id: SpaceId(u64::from_le_bytes(head)),
            coords: None,
            labels: None,
        })
    }

    /// Attaches per-point coordinates. Metadata only: never used for distances.
    pub fn with_coords(mut self, coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.len() != self.n {
            return Err(invalid(format!(
                "coords has {} rows, expected {}",
                coords.len(),
                self.n
            )));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(invalid(format!(
                "labels has {} entries, expected {}",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn id(&self) -> SpaceId {
        self.id
    }

    #[inline]
    pub fn d(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n + y]
    }

    /// Row `x` of the distance matrix.
    #[inline]
    pub fn row(&self, x: usize) -> &[f64] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    pub fn dist_matrix(&self) -> &[f64] {
        &self.dist
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn mesh_h(&self) -> f64 {
        self.mesh_h
    }

    pub fn midpoint_defect(&self) -> f64 {
        self.midpoint_defect
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Points sorted by distance from `x`, nearest first (ties by index).
    #[inline]
    pub(crate) fn by_distance(&self, x: usize) -> &[u32] {
        &self.by_distance[x * self.n..(x + 1) * self.n]
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, n: self.n })
        }
    }

    pub fn check_field(&self, field: &ScalarField) -> Result<()> {
        if field.space_id() != self.id || field.len() != self.n {
            return Err(Error::SpaceMismatch {
                field: field.space_id().to_string(),
                space: self.id.to_string(),
            });
        }
        Ok(())
    }

    /// ν-integral of a field.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.measure).map(|(v, m)| v * m).sum()
    }

    /// `min_z |max(d(x,z), d(z,y)) - d(x,y)/2|` for one pair.
    pub fn midpoint_excess(&self, x: usize, y: usize) -> Result<f64> {
        self.check_index(x)?;
        self.check_index(y)?;
        Ok(pair_midpoint_excess(self.n, &self.dist, x, y))
    }

    /// Closed ball `{ y : d(center, y) <= radius }`, indices ascending.
    pub fn ball(&self, center: usize, radius: f64) -> Result<Vec<usize>> {
        self.check_index(center)?;
        if !(radius >= 0.0) {
            return Err(invalid(format!("ball radius must be >= 0, got {radius}")));
        }
        Ok(self
            .row(center)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= radius)
            .map(|(y, _)| y)
            .collect())
    }

    fn ball_mass(&self, center: usize, radius: f64) -> f64 {
        self.row(center)
            .iter()
            .zip(&self.measure)
            .filter(|(&d, _)| d <= radius)
            .map(|(_, m)| m)
            .sum()
    }

    /// Validation report for this space's metric and measure.
    pub fn validate(&self) -> MetricReport {
        validate_metric(self.n, &self.dist, &self.measure)
    }

    /// Empirical doubling ratio `sup ν(B_2r(x)) / ν(B_r(x))` over all centers
    /// and `r_steps` equally spaced radii in `[r_min, r_max]`.
    pub fn doubling_constant(&self, r_min: f64, r_max: f64, r_steps: usize) -> Result<f64> {
        if !(r_min > 0.0 && r_min <= r_max) || r_steps == 0 {
            return Err(invalid(format!(
                "doubling sweep needs 0 < r_min <= r_max and r_steps >= 1, got ({r_min}, {r_max}, {r_steps})"
            )));
        }
        let radii: Vec<f64> = if r_steps == 1 {
            vec![r_min]
        } else {
            (0..r_steps)
                .map(|k| r_min + (r_max - r_min) * k as f64 / (r_steps - 1) as f64)
                .collect()
        };
        let per_center: Vec<Result<f64>> = (0..self.n)
            .into_par_iter()
            .map(|x| {
                let mut best: f64 = 1.0;
                for &r in &radii {
                    let small = self.ball_mass(x, r);
                    if small <= 0.0 {
                        return Err(Error::EmptyBall { center: x, radius: r });
                    }
                    best = best.max(self.ball_mass(x, 2.0 * r) / small);
                }
                Ok(best)
            })
            .collect();
        per_center
            .into_iter()
            .try_fold(1.0_f64, |acc, r| r.map(|v| acc.max(v)))
    }

    /// Per-field certificate for the (1,1) local Poincaré inequality at one
    /// scale: the largest over centers of
    /// `avg_{B_r} |h - h_B| / (r * avg_{B_λr} |∇h|)`, with 0/0 read as 0.
    pub fn local_poincare_constant(&self, field: &ScalarField, radius: f64, dilation: f64) -> Result<f64> {
        self.check_field(field)?;
        if !(radius > 0.0) || !(dilation >= 1.0) {
            return Err(invalid(format!(
                "local Poincaré needs radius > 0 and dilation >= 1, got ({radius}, {dilation})"
            )));
        }
        let grad = hopf_lax::grad_norms(self, field)?;
        let h = field.values();
        let per_center: Vec<Result<f64>> = (0..self.n)
            .into_par_iter()
            .map(|x| {
                let row = self.row(x);
                let (mut mass, mut first) = (0.0, 0.0);
                for y in 0..self.n {
                    if row[y] <= radius {
                        mass += self.measure[y];
                        first += self.measure[y] * h[y];
                    }
                }
                if mass <= 0.0 {
                    return Err(Error::EmptyBall { center: x, radius });
                }
                let mean = first / mass;
                let mut spread = 0.0;
                for y in 0..self.n {
                    if row[y] <= radius {
                        spread += self.measure[y] * (h[y] - mean).abs();
                    }
                }
                let lhs = spread / mass;

                let big = radius * dilation;
                let (mut big_mass, mut energy) = (0.0, 0.0);
                for y in 0..self.n {
                    if row[y] <= big {
                        big_mass += self.measure[y];
                        energy += self.measure[y] * grad[y];
                    }
                }
                if big_mass <= 0.0 {
                    return Err(Error::EmptyBall { center: x, radius: big });
                }
                let rhs = radius * energy / big_mass;
                Ok(if lhs == 0.0 {
                    0.0
                } else if rhs == 0.0 {
                    f64::INFINITY
                } else {
                    lhs / rhs
                })
            })
            .collect();
        per_center
            .into_iter()
            .try_fold(0.0_f64, |acc, r| r.map(|v| acc.max(v)))
    }
}

fn add_neighbor(list: &mut Vec<(usize, f64)>, j: usize, length: f64) {
    match list.iter_mut().find(|(k, _)| *k == j) {
        Some(entry) => entry.1 = entry.1.min(length),
        None => list.push((j, length)),
    }
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then index
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adjacency: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier(0.0, source));
    while let Some(Frontier(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adjacency[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Frontier(nd, v));
            }
        }
    }
    dist
}

fn sorted_rows(n: usize, dist: &[f64]) -> Vec<u32> {
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let row = &dist[x * n..(x + 1) * n];
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by(|&a, &b| row[a as usize].total_cmp(&row[b as usize]).then(a.cmp(&b)));
            order
        })
        .collect();
    rows.concat()
}

fn pair_midpoint_excess(n: usize, dist: &[f64], x: usize, y: usize) -> f64 {
    let half = dist[x * n + y] / 2.0;
    let mut best = f64::INFINITY;
    for z in 0..n {
        let e = (dist[x * n + z].max(dist[z * n + y]) - half).abs();
        if e < best {
            best = e;
            if best == 0.0 {
                break;
            }
        }
    }
    best
}

fn compute_midpoint_defect(n: usize, dist: &[f64]) -> f64 {
    (0..n)
        .into_par_iter()
        .map(|x| {
            ((x + 1)..n)
                .map(|y| pair_midpoint_excess(n, dist, x, y))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Worst-case defects of a distance matrix and measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// `max(d(x,z) - d(x,y) - d(y,z), 0)` over ordered triples.
    pub triangle_violation: f64,
    /// `max |d(x,y) - d(y,x)|`.
    pub symmetry_defect: f64,
    /// `max |d(x,x)|` together with off-diagonal zeros (reported as their count).
    pub diagonal_defect: f64,
    pub zero_off_diagonal: usize,
    /// `|Σν - 1|`.
    pub measure_sum_defect: f64,
    pub negative_entries: usize,
    pub pass: bool,
}

/// Checks the metric axioms on a dense row-major `n × n` matrix.
pub fn validate_metric(n: usize, dist: &[f64], measure: &[f64]) -> MetricReport {
    assert_eq!(dist.len(), n * n, "distance matrix must be n x n");
    let at = |i: usize, j: usize| dist[i * n + j];
    let triangle_violation = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut worst: f64 = 0.0;
            for y in 0..n {
                let dxy = at(x, y);
                for z in 0..n {
                    worst = worst.max(at(x, z) - dxy - at(y, z));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let mut symmetry_defect: f64 = 0.0;
    let mut diagonal_defect: f64 = 0.0;
    let mut zero_off_diagonal = 0;
    let mut negative_entries = 0;
    for i in 0..n {
        diagonal_defect = diagonal_defect.max(at(i, i).abs());
        for j in 0..n {
            symmetry_defect = symmetry_defect.max((at(i, j) - at(j, i)).abs());
            if i != j && at(i, j) == 0.0 {
                zero_off_diagonal += 1;
            }
            if at(i, j) < 0.0 {
                negative_entries += 1;
            }
        }
    }
    let measure_sum_defect = (measure.iter().sum::<f64>() - 1.0).abs();
    let pass = triangle_violation <= METRIC_TOL
        && symmetry_defect <= METRIC_TOL
        && diagonal_defect <= METRIC_TOL
        && zero_off_diagonal == 0
        && negative_entries == 0
        && measure_sum_defect <= METRIC_TOL
        && measure.iter().all(|m| *m >= 0.0);
    MetricReport {
        triangle_violation,
        symmetry_defect,
        diagonal_defect,
        zero_off_diagonal,
        measure_sum_defect,
        negative_entries,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> MeasuredSpace {
        let edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)];
        MeasuredSpace::build_from_graph(4, &edges, &[1.0; 4]).unwrap()
    }

    fn two_point() -> MeasuredSpace {
        MeasuredSpace::build_from_graph(2, &[(0, 1, 1.0)], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn single_edge() {
        let s = two_point();
        assert_eq!(s.dist_matrix(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(s.measure(), &[0.5, 0.5]);
        assert_eq!(s.mesh_h(), 1.0);
        assert_eq!(s.midpoint_defect(), 0.5);
    }

    #[test]
    fn four_cycle_goes_around() {
        let s = cycle4();
        assert_eq!(s.d(0, 2), 2.0);
        assert_eq!(s.mesh_h(), 1.0);
        assert_eq!(s.midpoint_excess(0, 2).unwrap(), 0.0);
        assert_eq!(s.midpoint_excess(1, 3).unwrap(), 0.0);
        // adjacent pairs have no midpoint
        assert_eq!(s.midpoint_excess(0, 1).unwrap(), 0.5);
    }

    #[test]
    fn shortcut_through_middle_vertex() {
        let s = MeasuredSpace::build_from_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)], &[1.0; 3])
            .unwrap();
        assert_eq!(s.d(0, 2), 2.0);
        // the long edge stays in the adjacency with its own length
        assert!(s.neighbors(0).contains(&(2, 3.0)));
        for x in 0..3 {
            for &(y, l) in s.neighbors(x) {
                assert!(l >= s.d(x, y));
            }
        }
    }

    #[test]
    fn construction_errors() {
        let e = MeasuredSpace::build_from_graph(3, &[(0, 1, 1.0)], &[1.0; 3]).unwrap_err();
        assert!(matches!(e, Error::Disconnected { from: 0, to: 2 }), "{e}");
        let e = MeasuredSpace::build_from_graph(2, &[(0, 1, 0.0)], &[1.0; 2]).unwrap_err();
        assert!(matches!(e, Error::BadEdgeLength { .. }));
        let e = MeasuredSpace::build_from_graph(2, &[(0, 1, -1.0)], &[1.0; 2]).unwrap_err();
        assert!(matches!(e, Error::BadEdgeLength { .. }));
        let e = MeasuredSpace::build_from_graph(2, &[(0, 1, 1.0)], &[0.0; 2]).unwrap_err();
        assert!(matches!(e, Error::BadMeasure));
        let e = MeasuredSpace::build_from_graph(2, &[(0, 0, 1.0)], &[1.0; 2]).unwrap_err();
        assert!(matches!(e, Error::SelfLoop { .. }));
    }

    #[test]
    fn built_spaces_validate_exactly() {
        for s in [two_point(), cycle4()] {
            let r = s.validate();
            assert!(r.pass);
            assert!(r.triangle_violation <= 1e-12);
            assert!(r.symmetry_defect <= 1e-12);
            assert!(r.measure_sum_defect <= 1e-12);
        }
    }

    #[test]
    fn validate_reports_triangle_violation() {
        let dist = [0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0];
        let r = validate_metric(3, &dist, &[1.0 / 3.0; 3]);
        assert_eq!(r.triangle_violation, 3.0);
        assert!(!r.pass);
    }

    #[test]
    fn validate_reports_asymmetry() {
        let dist = [0.0, 1.0, 2.0, 0.0];
        let r = validate_metric(2, &dist, &[0.5, 0.5]);
        assert_eq!(r.symmetry_defect, 1.0);
        assert!(!r.pass);
    }

    #[test]
    fn balls() {
        let s = cycle4();
        assert_eq!(s.ball(2, 0.0).unwrap(), vec![2]);
        assert_eq!(s.ball(0, 1.0).unwrap(), vec![0, 1, 3]);
        assert_eq!(s.ball(0, s.diameter()).unwrap(), vec![0, 1, 2, 3]);
        assert!(s.ball(7, 1.0).is_err());
        assert!(s.ball(0, -1.0).is_err());
    }

    #[test]
    fn doubling_small_cases() {
        let single = MeasuredSpace::build_from_graph(1, &[], &[1.0]).unwrap();
        assert_eq!(single.doubling_constant(0.1, 1.0, 5).unwrap(), 1.0);
        let s = two_point();
        assert_eq!(s.doubling_constant(0.6, 0.6, 1).unwrap(), 2.0);
    }

    #[test]
    fn doubling_empty_ball_is_an_error() {
        let s = MeasuredSpace::build_from_graph(2, &[(0, 1, 1.0)], &[1.0, 0.0]).unwrap();
        let e = s.doubling_constant(0.5, 0.5, 1).unwrap_err();
        assert!(matches!(e, Error::EmptyBall { center: 1, .. }), "{e}");
    }

    #[test]
    fn local_poincare_two_point() {
        let s = two_point();
        let h = ScalarField::new(&s, vec![0.0, 1.0]).unwrap();
        assert_eq!(s.local_poincare_constant(&h, 1.0, 1.0).unwrap(), 0.5);
        let c = ScalarField::constant(&s, 3.0).unwrap();
        assert_eq!(s.local_poincare_constant(&c, 1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn field_binding() {
        let a = two_point();
        let b = cycle4();
        assert!(ScalarField::new(&a, vec![1.0]).is_err());
        assert!(ScalarField::new(&a, vec![1.0, f64::NAN]).is_err());
        let f = ScalarField::new(&b, vec![0.0; 4]).unwrap();
        assert!(matches!(a.check_field(&f), Err(Error::SpaceMismatch { .. })));
    }
}
