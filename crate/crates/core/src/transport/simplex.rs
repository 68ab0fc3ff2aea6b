//! Network simplex for the dense transportation problem.
//!
//! Supply nodes are rows, demand nodes are columns, and an artificial root
//! is joined to every node by a high-cost arc that carries the initial flow.
//! The spanning tree is kept strongly feasible (Cunningham's leaving-arc
//! rule), which rules out cycling on degenerate pivots. Entering arcs are
//! picked by block search.

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Optimal flows on the support of the two marginals.
#[derive(Debug, Clone)]
pub struct Solution {
    /// `(row, col, mass)` for every positive flow.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
    /// Dual potentials, feasible by construction: `u_i + v_j <= c_ij`.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pivots: usize,
}

struct Network<'a> {
    rows: usize,
    cols: usize,
    cost: &'a dyn Fn(usize, usize) -> f64,
    art_cost: f64,
    real_arcs: usize,
    flow: Vec<f64>,
    in_tree: Vec<bool>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    // pred arc points from the node to its parent
    up: Vec<bool>,
    depth: Vec<usize>,
    pi: Vec<f64>,
    children: Vec<Vec<usize>>,
}

impl<'a> Network<'a> {
    fn root(&self) -> usize {
        self.rows + self.cols
    }

    fn ends(&self, arc: usize) -> (usize, usize) {
        if arc < self.real_arcs {
            (arc / self.cols, self.rows + arc % self.cols)
        } else {
            let u = arc - self.real_arcs;
            if u < self.rows {
                (u, self.root())
            } else {
                (self.root(), u)
            }
        }
    }

    fn arc_cost(&self, arc: usize) -> f64 {
        if arc < self.real_arcs {
            (self.cost)(arc / self.cols, arc % self.cols)
        } else {
            self.art_cost
        }
    }

    fn reduced_cost(&self, arc: usize) -> f64 {
        let (s, t) = self.ends(arc);
        self.arc_cost(arc) + self.pi[s] - self.pi[t]
    }

    fn remove_child(&mut self, parent: usize, child: usize) {
        let list = &mut self.children[parent];
        let pos = list.iter().position(|&c| c == child).expect("child is linked to its parent");
        list.swap_remove(pos);
    }

    // Recomputes depth and potential below `top`, whose own pred arc is set.
    fn refresh_subtree(&mut self, top: usize) {
        let mut stack = vec![top];
        while let Some(u) = stack.pop() {
            let p = self.parent[u];
            let c = self.arc_cost(self.pred[u]);
            self.depth[u] = self.depth[p] + 1;
            // tree arcs have zero reduced cost
            self.pi[u] = if self.up[u] { self.pi[p] - c } else { self.pi[p] + c };
            stack.extend(self.children[u].iter().copied());
        }
    }

    fn pivot(&mut self, entering: usize) {
        let (first, second) = self.ends(entering);

        let (mut a, mut b) = (first, second);
        while a != b {
            if self.depth[a] > self.depth[b] {
                a = self.parent[a];
            } else if self.depth[b] > self.depth[a] {
                b = self.parent[b];
            } else {
                a = self.parent[a];
                b = self.parent[b];
            }
        }
        let join = a;

        // Flow runs join -> first -> second -> join. The leaving arc is the
        // last blocking arc met in that orientation.
        let mut delta = f64::INFINITY;
        let mut leaving = NONE;
        let mut on_first_side = true;
        let mut u = first;
        while u != join {
            if self.up[u] {
                let d = self.flow[self.pred[u]];
                if d < delta {
                    delta = d;
                    leaving = u;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            if !self.up[u] {
                let d = self.flow[self.pred[u]];
                if d <= delta {
                    delta = d;
                    leaving = u;
                    on_first_side = false;
                }
            }
            u = self.parent[u];
        }
        debug_assert!(leaving != NONE, "transport cycles are always bounded");

        if delta > 0.0 {
            let mut u = first;
            while u != join {
                let e = self.pred[u];
                self.flow[e] += if self.up[u] { -delta } else { delta };
                u = self.parent[u];
            }
            let mut u = second;
            while u != join {
                let e = self.pred[u];
                self.flow[e] += if self.up[u] { delta } else { -delta };
                u = self.parent[u];
            }
        }
        self.flow[entering] = delta;

        let leaving_arc = self.pred[leaving];
        self.flow[leaving_arc] = 0.0;
        self.in_tree[leaving_arc] = false;
        self.in_tree[entering] = true;

        // Re-hang the subtree below the leaving arc from the entering arc.
        let (u_in, v_in) = if on_first_side { (first, second) } else { (second, first) };
        let mut node = u_in;
        let mut new_parent = v_in;
        let mut new_pred = entering;
        let mut new_up = u_in == first;
        loop {
            let old_parent = self.parent[node];
            let old_pred = self.pred[node];
            let old_up = self.up[node];
            self.remove_child(old_parent, node);
            self.children[new_parent].push(node);
            self.parent[node] = new_parent;
            self.pred[node] = new_pred;
            self.up[node] = new_up;
            if node == leaving {
                break;
            }
            new_parent = node;
            new_pred = old_pred;
            new_up = !old_up;
            node = old_parent;
        }
        self.refresh_subtree(u_in);
    }
}

/// Solves `min Σ π_ij c_ij` over couplings of `supply` and `demand`.
///
/// Both marginals must be strictly positive; callers strip zero entries.
/// Their totals should agree to rounding, any imbalance stays on the
/// artificial arcs.
pub fn solve(supply: &[f64], demand: &[f64], cost: &dyn Fn(usize, usize) -> f64) -> Result<Solution> {
    let (rows, cols) = (supply.len(), demand.len());
    assert!(rows > 0 && cols > 0, "marginals must be nonempty");
    debug_assert!(supply.iter().chain(demand).all(|&m| m > 0.0));
    let real_arcs = rows * cols;
    let nodes = rows + cols;

    let mut max_cost: f64 = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            max_cost = max_cost.max(cost(i, j).abs());
        }
    }
    let art_cost = (max_cost + 1.0) * (nodes + 1) as f64;

    let total_arcs = real_arcs + nodes;
    let mut net = Network {
        rows,
        cols,
        cost,
        art_cost,
        real_arcs,
        flow: vec![0.0; total_arcs],
        in_tree: vec![false; total_arcs],
        parent: vec![NONE; nodes + 1],
        pred: vec![NONE; nodes + 1],
        up: vec![false; nodes + 1],
        depth: vec![0; nodes + 1],
        pi: vec![0.0; nodes + 1],
        children: vec![Vec::new(); nodes + 1],
    };
    let root = nodes;
    for u in 0..nodes {
        let arc = real_arcs + u;
        net.parent[u] = root;
        net.pred[u] = arc;
        net.depth[u] = 1;
        net.in_tree[arc] = true;
        net.children[root].push(u);
        if u < rows {
            net.up[u] = true;
            net.flow[arc] = supply[u];
            net.pi[u] = -art_cost;
        } else {
            net.up[u] = false;
            net.flow[arc] = demand[u - rows];
            net.pi[u] = art_cost;
        }
    }

    let eps = 64.0 * f64::EPSILON * art_cost;
    let block = ((total_arcs as f64).sqrt().ceil() as usize).max(10);
    let max_pivots = 50 * total_arcs + 10_000;
    let mut next = 0;
    let mut pivots = 0;
    loop {
        // block search: best candidate in the first block that has one
        let mut best = NONE;
        let mut best_rc = -eps;
        let mut scanned = 0;
        let mut in_block = 0;
        while scanned < total_arcs {
            let arc = next;
            next = if next + 1 == total_arcs { 0 } else { next + 1 };
            scanned += 1;
            in_block += 1;
            if !net.in_tree[arc] {
                let rc = net.reduced_cost(arc);
                if rc < best_rc {
                    best_rc = rc;
                    best = arc;
                }
            }
            if in_block == block {
                if best != NONE {
                    break;
                }
                in_block = 0;
            }
        }
        if best == NONE {
            break;
        }
        net.pivot(best);
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::SolverStalled(pivots));
        }
    }

    let mut flows = Vec::new();
    let mut primal = 0.0;
    for arc in 0..real_arcs {
        let m = net.flow[arc];
        if m > 0.0 {
            let (i, j) = (arc / cols, arc % cols);
            primal += m * cost(i, j);
            flows.push((i, j, m));
        }
    }

    // Double c-transform of the tree potentials gives exactly feasible duals.
    let shift = (0..rows).map(|i| -net.pi[i]).fold(f64::INFINITY, f64::min);
    let mut u: Vec<f64> = (0..rows).map(|i| -net.pi[i] - shift).collect();
    let v: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| cost(i, j) - u[i]).fold(f64::INFINITY, f64::min))
        .collect();
    for (i, ui) in u.iter_mut().enumerate() {
        *ui = (0..cols).map(|j| cost(i, j) - v[j]).fold(f64::INFINITY, f64::min);
    }

    Ok(Solution {
        flows,
        cost: primal,
        u,
        v,
        pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_coupling() {
        let c = |_: usize, _: usize| 2.0;
        let sol = solve(&[1.0], &[1.0], &c).unwrap();
        assert_eq!(sol.flows, vec![(0, 0, 1.0)]);
        assert_eq!(sol.cost, 2.0);
    }

    #[test]
    fn prefers_diagonal() {
        let cost = [[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]];
        let c = |i: usize, j: usize| cost[i][j];
        let m = [0.2, 0.5, 0.3];
        let sol = solve(&m, &m, &c).unwrap();
        assert!(sol.cost.abs() < 1e-15);
        let dual: f64 = sol.u.iter().zip(&m).map(|(u, a)| u * a).sum::<f64>()
            + sol.v.iter().zip(&m).map(|(v, b)| v * b).sum::<f64>();
        assert!((sol.cost - dual).abs() < 1e-12);
    }

    #[test]
    fn rectangular_problem() {
        // two sources, three sinks on a line
        let xs = [0.0, 1.0];
        let ys = [0.0, 0.5, 2.0];
        let c = |i: usize, j: usize| (xs[i] - ys[j]) * (xs[i] - ys[j]);
        let sol = solve(&[0.5, 0.5], &[0.25, 0.25, 0.5], &c).unwrap();
        // monotone: 0.25 0->0, 0.25 0->0.5, 0.5 1->2
        let expected = 0.25 * 0.0 + 0.25 * 0.25 + 0.5 * 1.0;
        assert!((sol.cost - expected).abs() < 1e-14);
    }
}
