//! Two independent second opinions for [`w2`](super::w2): the monotone
//! coupling on path graphs, and vertex enumeration of the coupling polytope
//! for tiny spaces.

use crate::error::{Error, Result};
use crate::space::MeasuredSpace;

use super::check_marginal;

/// Positions along the path, in path order, if the generating graph is a
/// simple path.
fn path_positions(space: &MeasuredSpace) -> Result<Vec<(usize, f64)>> {
    let n = space.n();
    let not_path = || Error::Unsupported("the monotone-coupling oracle needs a path graph".into());
    if n == 1 {
        return Ok(vec![(0, 0.0)]);
    }
    let degree_ok = (0..n).all(|x| (1..=2).contains(&space.neighbors(x).len()));
    let ends: Vec<usize> = (0..n).filter(|&x| space.neighbors(x).len() == 1).collect();
    if !degree_ok || ends.len() != 2 {
        return Err(not_path());
    }
    let mut order = Vec::with_capacity(n);
    let (mut prev, mut cur, mut pos) = (usize::MAX, ends[0], 0.0);
    loop {
        order.push((cur, pos));
        let next = space.neighbors(cur).iter().find(|&&(y, _)| y != prev);
        match next {
            Some(&(y, len)) if order.len() < n => {
                pos += len;
                prev = cur;
                cur = y;
            }
            _ => break,
        }
    }
    if order.len() != n {
        return Err(not_path());
    }
    Ok(order)
}

/// `W_2` on a path graph from the monotone rearrangement, merging the two
/// cumulative distributions.
pub fn w2_oracle_1d(space: &MeasuredSpace, mu0: &[f64], mu1: &[f64]) -> Result<f64> {
    check_marginal(space, "mu0", mu0)?;
    check_marginal(space, "mu1", mu1)?;
    let order = path_positions(space)?;
    let atoms = |mu: &[f64]| -> Vec<(f64, f64)> {
        order
            .iter()
            .filter(|(i, _)| mu[*i] > 0.0)
            .map(|&(i, x)| (x, mu[i]))
            .collect()
    };
    let (a, b) = (atoms(mu0), atoms(mu1));
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut cost = 0.0;
    // Totals agree only to rounding; whatever is left when one side runs
    // out is below the marginal tolerance and is dropped.
    while i < a.len() && j < b.len() {
        let m = ra.min(rb);
        let gap = a[i].0 - b[j].0;
        cost += m * gap * gap;
        ra -= m;
        rb -= m;
        if ra <= rb {
            i += 1;
            if i < a.len() {
                ra += a[i].1;
            }
        } else {
            j += 1;
            if j < b.len() {
                rb += b[j].1;
            }
        }
    }
    Ok(cost.sqrt())
}

/// Largest space [`brute_force_w2`] accepts.
pub const BRUTE_FORCE_MAX_N: usize = 4;

/// `W_2` by enumerating every basic feasible solution of the transportation
/// polytope: each spanning tree of the complete bipartite graph on
/// `n + n` nodes determines at most one vertex.
pub fn brute_force_w2(space: &MeasuredSpace, mu0: &[f64], mu1: &[f64]) -> Result<f64> {
    check_marginal(space, "mu0", mu0)?;
    check_marginal(space, "mu1", mu1)?;
    let n = space.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Unsupported(format!(
            "vertex enumeration is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let cells = n * n;
    let basis = 2 * n - 1;
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(basis);
    enumerate(0, cells, basis, &mut chosen, &mut |subset| {
        if let Some(flows) = tree_flows(n, subset, mu0, mu1) {
            let cost: f64 = subset
                .iter()
                .zip(&flows)
                .map(|(&c, m)| {
                    let d = space.d(c / n, c % n);
                    m * d * d
                })
                .sum();
            best = best.min(cost);
        }
    });
    Ok(best.max(0.0).sqrt())
}

fn enumerate(start: usize, cells: usize, k: usize, chosen: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    for c in start..cells {
        if cells - c < k - chosen.len() {
            break;
        }
        chosen.push(c);
        enumerate(c + 1, cells, k, chosen, visit);
        chosen.pop();
    }
}

/// Flows on a candidate basis by peeling leaves; `None` if the cells contain
/// a cycle or a flow comes out negative.
fn tree_flows(n: usize, subset: &[usize], mu0: &[f64], mu1: &[f64]) -> Option<Vec<f64>> {
    let mut rem_row = mu0.to_vec();
    let mut rem_col = mu1.to_vec();
    let mut flows = vec![f64::NAN; subset.len()];
    let mut open = subset.len();
    while open > 0 {
        let mut progressed = false;
        for line in 0..2 * n {
            let is_row = line < n;
            let idx = line % n;
            let mut only = None;
            let mut count = 0;
            for (k, &c) in subset.iter().enumerate() {
                if !flows[k].is_nan() {
                    continue;
                }
                let hit = if is_row { c / n == idx } else { c % n == idx };
                if hit {
                    count += 1;
                    only = Some(k);
                }
            }
            if count == 1 {
                let k = only.unwrap();
                let (r, c) = (subset[k] / n, subset[k] % n);
                let m = if is_row { rem_row[r] } else { rem_col[c] };
                if m < -1e-12 {
                    return None;
                }
                flows[k] = m.max(0.0);
                rem_row[r] -= m;
                rem_col[c] -= m;
                open -= 1;
                progressed = true;
            }
        }
        if !progressed {
            return None;
        }
    }
    let residual = rem_row.iter().chain(&rem_col).map(|r| r.abs()).fold(0.0, f64::max);
    if residual > 1e-12 {
        return None;
    }
    Some(flows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::SpaceSpec;

    #[test]
    fn monotone_oracle_examples() {
        let p2 = SpaceSpec::Path { n: 2 }.generate().unwrap();
        assert_eq!(w2_oracle_1d(&p2, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(w2_oracle_1d(&p2, &[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        let p3 = SpaceSpec::Path { n: 3 }.generate().unwrap();
        let d = w2_oracle_1d(&p3, &[0.5, 0.5, 0.0], &[0.0, 0.5, 0.5]).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn monotone_oracle_rejects_non_paths() {
        let c = SpaceSpec::Circle { n: 5, circumference: 1.0 }.generate().unwrap();
        let mu = [0.2; 5];
        assert!(matches!(w2_oracle_1d(&c, &mu, &mu), Err(Error::Unsupported(_))));
    }

    #[test]
    fn brute_force_examples() {
        let p2 = SpaceSpec::Path { n: 2 }.generate().unwrap();
        let d = brute_force_w2(&p2, &[0.5, 0.5], &[0.0, 1.0]).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        let p3 = SpaceSpec::Complete { n: 3 }.generate().unwrap();
        let mu = [0.2, 0.3, 0.5];
        assert_eq!(brute_force_w2(&p3, &mu, &mu).unwrap(), 0.0);
        let big = SpaceSpec::Path { n: 5 }.generate().unwrap();
        assert!(matches!(brute_force_w2(&big, &[0.2; 5], &[0.2; 5]), Err(Error::Unsupported(_))));
    }
}
