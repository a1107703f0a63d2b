//! Primal transportation simplex (the network simplex specialised to a
//! complete bipartite graph).
//!
//! The basis is a spanning tree on `m` supply nodes and `n` demand nodes with
//! exactly `m + n - 1` basic cells, some of which may carry zero flow.
//! Pricing is Dantzig's most-negative reduced cost; after a long run of
//! degenerate pivots it switches to Bland's rule, which cannot cycle.

use std::collections::VecDeque;

/// Optimal flow on an `m x n` transportation problem.
#[derive(Debug, Clone)]
pub struct Solution {
    pub flow: Vec<f64>,
    pub cost: f64,
    pub pivots: usize,
}

struct Basis {
    m: usize,
    n: usize,
    /// Basic cells as `(row, col)`.
    cells: Vec<(usize, usize)>,
    /// Flow on each basic cell.
    flow: Vec<f64>,
}

impl Basis {
    /// Northwest-corner start.
    fn northwest(supply: &[f64], demand: &[f64]) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let mut a = supply.to_vec();
        let mut b = demand.to_vec();
        let mut cells = Vec::with_capacity(m + n - 1);
        let mut flow = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = a[i].min(b[j]);
            cells.push((i, j));
            flow.push(x);
            a[i] -= x;
            b[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            // Advance exactly one index per cell so the tree has m + n - 1 edges.
            if j == n - 1 || (i < m - 1 && a[i] <= b[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(cells.len(), m + n - 1);
        Basis { m, n, cells, flow }
    }

    /// Node ids: rows are `0..m`, columns are `m..m+n`. Returns, for each
    /// node, the list of `(neighbour, cell index)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push((self.m + j, k));
            adj[self.m + j].push((i, k));
        }
        adj
    }

    /// Dual potentials with `u_0 = 0` and `u_i + v_j = c_ij` on basic cells.
    fn potentials(&self, adj: &[Vec<(usize, usize)>], cost: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut pot = vec![f64::NAN; self.m + self.n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &(next, k) in &adj[node] {
                if pot[next].is_nan() {
                    let (i, j) = self.cells[k];
                    pot[next] = cost[i * self.n + j] - pot[node];
                    queue.push_back(next);
                }
            }
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Tree path from `from` to `to` as a list of cell indices, in order.
    fn path(&self, adj: &[Vec<(usize, usize)>], from: usize, to: usize) -> Vec<usize> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(node) = queue.pop_front() {
            if node == to {
                break;
            }
            for &(next, k) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, k));
                    queue.push_back(next);
                }
            }
        }
        let mut out = Vec::new();
        let mut node = to;
        while node != from {
            let (prev, k) = parent[node].expect("basis is a spanning tree");
            out.push(k);
            node = prev;
        }
        out.reverse();
        out
    }
}

/// Solves `min sum c_ij x_ij` subject to row sums `supply`, column sums
/// `demand`, `x >= 0`. `cost` is row-major `m x n`. Supplies and demands must
/// be nonnegative with equal totals (the last demand absorbs rounding).
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Solution {
    let (m, n) = (supply.len(), demand.len());
    assert!(m > 0 && n > 0, "empty transportation problem");
    assert_eq!(cost.len(), m * n, "cost matrix has wrong size");

    let mut demand = demand.to_vec();
    let gap = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
    demand[n - 1] = (demand[n - 1] + gap).max(0.0);

    let mut basis = Basis::northwest(supply, &demand);
    let scale = cost.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1.0);
    let eps = 1e-12 * scale;
    let max_pivots = 50 * (m + n) * (m + n) + 1000;
    let mut degenerate_run = 0usize;
    let mut pivots = 0usize;

    let mut in_basis = vec![false; m * n];
    for &(i, j) in &basis.cells {
        in_basis[i * n + j] = true;
    }

    loop {
        let adj = basis.adjacency();
        let (u, v) = basis.potentials(&adj, cost);
        let bland = degenerate_run > m + n;

        let mut entering: Option<(usize, usize)> = None;
        let mut best = -eps;
        'scan: for i in 0..m {
            for j in 0..n {
                if in_basis[i * n + j] {
                    continue;
                }
                let reduced = cost[i * n + j] - u[i] - v[j];
                if reduced < best {
                    entering = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = reduced;
                }
            }
        }
        let Some((ei, ej)) = entering else { break };
        pivots += 1;
        if pivots > max_pivots {
            // Floating-point stalling; the current basis is feasible and
            // within eps of optimal on every priced cell.
            break;
        }

        // Cycle: entering cell (+), then the tree path from column ej back
        // to row ei with alternating signs starting with (-).
        let path = basis.path(&adj, m + ej, ei);
        let mut theta = f64::INFINITY;
        let mut leaving = usize::MAX;
        for (step, &k) in path.iter().enumerate() {
            if step % 2 == 0 {
                let f = basis.flow[k];
                let better = f < theta
                    || (bland && f == theta && basis.cells[k] < basis.cells[leaving]);
                if better {
                    theta = f;
                    leaving = k;
                }
            }
        }
        for (step, &k) in path.iter().enumerate() {
            if step % 2 == 0 {
                basis.flow[k] -= theta;
            } else {
                basis.flow[k] += theta;
            }
        }
        degenerate_run = if theta > 0.0 { 0 } else { degenerate_run + 1 };

        let (li, lj) = basis.cells[leaving];
        in_basis[li * n + lj] = false;
        in_basis[ei * n + ej] = true;
        basis.cells[leaving] = (ei, ej);
        basis.flow[leaving] = theta;
    }

    let mut flow = vec![0.0; m * n];
    for (&(i, j), &f) in basis.cells.iter().zip(&basis.flow) {
        flow[i * n + j] = f.max(0.0);
    }
    let total = flow.iter().zip(cost).map(|(f, c)| f * c).sum();
    Solution { flow, cost: total, pivots }
}
