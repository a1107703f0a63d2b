//! Exact `W_r` distances between finitely supported measures.

pub mod simplex;

use crate::error::{Error, Result};
use crate::measure::MixingMeasure;

/// Coupling `q` between two weight vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    q: Vec<f64>,
    row_marginals: Vec<f64>,
    col_marginals: Vec<f64>,
}

impl TransportPlan {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.cols + j]
    }

    pub fn row_marginals(&self) -> &[f64] {
        &self.row_marginals
    }

    pub fn col_marginals(&self) -> &[f64] {
        &self.col_marginals
    }

    /// Nonzero entries as `(i, j, mass)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.q
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(move |(k, m)| (k / self.cols, k % self.cols, *m))
    }

    /// Largest absolute deviation of the plan's marginals from the targets.
    pub fn marginal_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            let s: f64 = (0..self.cols).map(|j| self.mass(i, j)).sum();
            worst = worst.max((s - self.row_marginals[i]).abs());
        }
        for j in 0..self.cols {
            let s: f64 = (0..self.rows).map(|i| self.mass(i, j)).sum();
            worst = worst.max((s - self.col_marginals[j]).abs());
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct WassersteinResult {
    pub distance: f64,
    /// Rows index atoms of `source`, columns atoms of `target`.
    pub plan: TransportPlan,
    pub r: f64,
    /// Canonical forms the plan refers to.
    pub source: MixingMeasure,
    pub target: MixingMeasure,
}

impl WassersteinResult {
    /// `sum_ij q_ij ||theta_i - theta'_j||^r` recomputed from the plan.
    pub fn plan_cost(&self) -> f64 {
        self.plan
            .entries()
            .map(|(i, j, m)| m * self.source.atoms()[i].distance(&self.target.atoms()[j]).powf(self.r))
            .sum()
    }
}

/// `W_r(G, H)` with an optimal coupling. Both inputs are canonicalized
/// (exact duplicates merged, zero weights dropped) before solving.
pub fn wasserstein(g: &MixingMeasure, h: &MixingMeasure, r: f64) -> Result<WassersteinResult> {
    if g.dim() != h.dim() {
        return Err(Error::Dimension { expected: g.dim(), got: h.dim() });
    }
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::Domain(format!("Wasserstein order must be >= 1, got {r}")));
    }
    let g = g.canonicalize(0.0)?;
    let h = h.canonicalize(0.0)?;
    let cost: Vec<f64> = g
        .atoms()
        .iter()
        .flat_map(|a| h.atoms().iter().map(move |b| a.distance(b).powf(r)))
        .collect();
    let sol = simplex::solve(g.weights(), h.weights(), &cost);
    let plan = TransportPlan {
        rows: g.len(),
        cols: h.len(),
        q: sol.flow,
        row_marginals: g.weights().to_vec(),
        col_marginals: h.weights().to_vec(),
    };
    Ok(WassersteinResult { distance: sol.cost.max(0.0).powf(1.0 / r), plan, r, source: g, target: h })
}

/// One row of [`bottleneck_match`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomMatch {
    /// Index into the estimated measure.
    pub estimate: usize,
    /// Index into the reference measure.
    pub reference: usize,
    pub distance: f64,
}

/// For each atom of `reference`, the nearest atom of `estimate` (lowest index
/// on ties) and their Euclidean distance.
pub fn bottleneck_match(estimate: &MixingMeasure, reference: &MixingMeasure) -> Result<Vec<AtomMatch>> {
    if estimate.dim() != reference.dim() {
        return Err(Error::Dimension { expected: reference.dim(), got: estimate.dim() });
    }
    Ok(reference
        .atoms()
        .iter()
        .enumerate()
        .map(|(j, target)| {
            let (i, d) = estimate
                .atoms()
                .iter()
                .map(|a| a.distance(target))
                .enumerate()
                .fold((0, f64::INFINITY), |best, (i, d)| if d < best.1 { (i, d) } else { best });
            AtomMatch { estimate: i, reference: j, distance: d }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(atoms: &[f64], weights: &[f64]) -> MixingMeasure {
        MixingMeasure::from_coords(atoms.iter().map(|a| vec![*a]).collect(), weights.to_vec()).unwrap()
    }

    /// 1-D `W_1` as the integral of |F - G| over the real line.
    fn cdf_w1(g: &MixingMeasure, h: &MixingMeasure) -> f64 {
        let mut pts: Vec<f64> = g.atoms().iter().chain(h.atoms()).map(|p| p.coords()[0]).collect();
        pts.sort_by(f64::total_cmp);
        let cdf = |m: &MixingMeasure, x: f64| -> f64 { m.iter().filter(|(a, _)| a.coords()[0] <= x).map(|(_, w)| w).sum() };
        pts.windows(2).map(|w| (cdf(g, w[0]) - cdf(h, w[0])).abs() * (w[1] - w[0])).sum()
    }

    #[test]
    fn identical_measures_have_zero_distance() {
        let g = m1(&[0.0, 2.0, 5.0], &[0.2, 0.3, 0.5]);
        assert!(wasserstein(&g, &g, 2.0).unwrap().distance.abs() < 1e-12);
    }

    #[test]
    fn diracs_at_unit_distance() {
        for r in [1.0, 1.5, 2.0, 3.0] {
            let d = wasserstein(&m1(&[0.0], &[1.0]), &m1(&[1.0], &[1.0]), r).unwrap().distance;
            assert!((d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_by_two_against_polytope_edge() {
        // The 2x2 transportation polytope is a segment q00 = t in
        // [max(0, a0 - b1), min(a0, b0)]; the optimum is at an endpoint.
        let g = m1(&[0.0, 4.0], &[0.7, 0.3]);
        let h = m1(&[1.0, 3.0], &[0.4, 0.6]);
        let cost = |t: f64| t * 1.0 + (0.7 - t) * 3.0 + (0.4 - t) * 3.0 + (t - 0.1) * 1.0;
        let oracle = cost(0.1).min(cost(0.4));
        let res = wasserstein(&g, &h, 1.0).unwrap();
        assert!((res.distance - oracle).abs() < 1e-8);
        assert!((res.distance - 1.6).abs() < 1e-12);
        assert!((res.distance - cdf_w1(&g, &h)).abs() < 1e-12);
        assert!(res.plan.marginal_error() < 1e-12);
        assert!((res.plan_cost() - res.distance).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_and_bad_order() {
        let g = m1(&[0.0], &[1.0]);
        let h = MixingMeasure::from_coords(vec![vec![0.0, 0.0]], vec![1.0]).unwrap();
        assert!(matches!(wasserstein(&g, &h, 1.0), Err(Error::Dimension { .. })));
        assert!(matches!(wasserstein(&g, &g, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn duplicate_atoms_are_premerged() {
        let g = m1(&[0.0, 0.0, 1.0], &[0.25, 0.25, 0.5]);
        let res = wasserstein(&g, &m1(&[0.0, 1.0], &[0.5, 0.5]), 2.0).unwrap();
        assert_eq!(res.plan.rows(), 2);
        assert!(res.distance < 1e-12);
    }

    #[test]
    fn bottleneck_nearest_atoms() {
        let g0 = m1(&[0.0], &[1.0]);
        let g = m1(&[-0.1, 0.2], &[0.5, 0.5]);
        let m = bottleneck_match(&g, &g0).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].estimate, 0);
        assert!((m[0].distance - 0.1).abs() < 1e-12);
        for am in bottleneck_match(&g, &g).unwrap() {
            assert_eq!(am.distance, 0.0);
        }
    }
}
