//! Merge-Truncate-Merge: turns one posterior draw of a mixing measure into an
//! estimate `G~` whose number of atoms `k~` estimates the number of mixture
//! components.
//!
//! Stage 1 visits atoms in a weighted random order and folds every atom that
//! lies within `omega` of an earlier kept atom into the earliest such atom.
//! Stage 2 truncates atoms whose mass is at most `(c omega)^r`, demotes atoms
//! whose transport cost `q_i ||phi_i - phi_j||^r` to a heavier survivor is at
//! most `(c omega)^r`, and hands every truncated or demoted atom's mass to
//! its nearest survivor.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{MixingMeasure, Point};
use crate::rng::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtmConfig {
    /// Merge radius, usually [`omega_n`] of the sample size.
    pub omega: f64,
    /// Truncation constant; the threshold is `(c * omega)^r`.
    pub c: f64,
    /// Wasserstein order.
    pub r: f64,
    pub seed: u64,
}

impl MtmConfig {
    pub fn new(omega: f64, c: f64, r: f64, seed: u64) -> Result<Self> {
        let cfg = MtmConfig { omega, c, r, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Config(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("c must be positive, got {}", self.c)));
        }
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return Err(Error::Config(format!("r must be >= 1, got {}", self.r)));
        }
        Ok(())
    }

    /// `(c * omega)^r`.
    pub fn threshold(&self) -> f64 {
        (self.c * self.omega).powf(self.r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtmResult {
    pub g_tilde: MixingMeasure,
    pub k_tilde: usize,
    /// `G'` after stage 1, atoms sorted by descending weight.
    pub merged_measure: MixingMeasure,
    /// Atoms of the input removed by stage-1 merging.
    pub stage1_merge_count: usize,
    /// Atoms of `G'` with weight at most `(c omega)^r`.
    pub stage2_truncated_count: usize,
    /// Atoms of `G'` above the threshold but demoted by the cost test.
    pub stage2_demoted_count: usize,
    /// Set when every atom of `G'` fell below the threshold and the heaviest
    /// atom was kept anyway.
    pub empty_fallback: bool,
    /// Visiting order used by stage 1 (indices into the input).
    pub order: Vec<usize>,
    /// For each atom of `g_tilde`, its index in `merged_measure`.
    pub survivors: Vec<usize>,
    /// Stage-1 merges as `(removed, absorbing)` input indices.
    pub absorptions: Vec<(usize, usize)>,
}

/// `sqrt(ln ln n / ln n)` for `n >= 3`.
pub fn omega_n(n: u64) -> Result<f64> {
    if n <= 2 {
        return Err(Error::Domain(format!("omega_n needs n >= 3, got {n}")));
    }
    let ln = (n as f64).ln();
    Ok((ln.ln() / ln).sqrt())
}

/// Successive weighted sampling without replacement: position `k` of the
/// permutation is drawn from the not-yet-chosen indices with probability
/// proportional to their weights.
///
/// Implemented as an exponential race: index `i` gets the key `E_i / w_i`
/// with `E_i ~ Exp(1)` and the permutation sorts keys ascending. The minimum
/// of independent exponentials with rates `w_i` is attained at `i` with
/// probability `w_i / sum w`, and memorylessness makes the remaining order a
/// race on the remaining indices, which is exactly the successive scheme.
/// Zero-weight indices come last in index order.
pub fn srswor_order(weights: &[f64], seed: u64) -> Result<Vec<usize>> {
    let mut rng = rng::seeded(seed, streams::MTM);
    srswor_order_with(weights, &mut rng)
}

pub fn srswor_order_with<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidMeasure("weights must be finite and nonnegative".into()));
    }
    if !weights.iter().any(|w| *w > 0.0) {
        return Err(Error::EmptyMeasure);
    }
    let mut keys: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            // 1 - U lies in (0, 1], so the log is finite.
            let e = -(1.0 - rng.random::<f64>()).ln();
            (if w > 0.0 { e / w } else { f64::INFINITY }, i)
        })
        .collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(keys.into_iter().map(|(_, i)| i).collect())
}

/// Runs both stages on `g` (canonicalized first).
pub fn mtm(g: &MixingMeasure, cfg: &MtmConfig) -> Result<MtmResult> {
    cfg.validate()?;
    let g = g.canonicalize(0.0)?;
    let order = srswor_order(g.weights(), cfg.seed)?;

    // Stage 1. `kept` holds (input index, accumulated mass) in visiting order.
    let mut kept: Vec<(usize, f64)> = Vec::new();
    let mut absorptions = Vec::new();
    for &idx in &order {
        let atom = &g.atoms()[idx];
        let w = g.weights()[idx];
        match kept.iter_mut().find(|(k, _)| g.atoms()[*k].distance(atom) <= cfg.omega) {
            Some((k, mass)) => {
                *mass += w;
                absorptions.push((idx, *k));
            }
            None => kept.push((idx, w)),
        }
    }
    let stage1_merge_count = g.len() - kept.len();
    // Stable sort: equal weights keep their stage-1 order.
    kept.sort_by(|a, b| b.1.total_cmp(&a.1));
    let phi: Vec<Point> = kept.iter().map(|(k, _)| g.atoms()[*k].clone()).collect();
    let q: Vec<f64> = kept.iter().map(|(_, m)| *m).collect();
    let merged_measure = MixingMeasure::from_parts_unchecked(phi.clone(), q.clone());

    // Stage 2.
    let threshold = cfg.threshold();
    let mut active: Vec<bool> = q.iter().map(|w| *w > threshold).collect();
    let stage2_truncated_count = active.iter().filter(|a| !**a).count();
    let empty_fallback = stage2_truncated_count == q.len();
    if empty_fallback {
        active[0] = true;
    }
    let mut stage2_demoted_count = 0;
    for i in 0..q.len() {
        if !active[i] {
            continue;
        }
        let demote = (0..i).any(|j| active[j] && q[i] * phi[i].distance(&phi[j]).powf(cfg.r) <= threshold);
        if demote {
            active[i] = false;
            stage2_demoted_count += 1;
        }
    }

    let survivors: Vec<usize> = (0..q.len()).filter(|&i| active[i]).collect();
    let mut mass: Vec<f64> = survivors.iter().map(|&i| q[i]).collect();
    for i in (0..q.len()).filter(|&i| !active[i]) {
        let nearest = survivors
            .iter()
            .enumerate()
            .map(|(slot, &j)| (slot, phi[i].distance(&phi[j])))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
            .0;
        mass[nearest] += q[i];
    }
    let atoms: Vec<Point> = survivors.iter().map(|&i| phi[i].clone()).collect();
    let g_tilde = MixingMeasure::from_parts_unchecked(atoms, mass);

    Ok(MtmResult {
        k_tilde: g_tilde.len(),
        g_tilde,
        merged_measure,
        stage1_merge_count,
        stage2_truncated_count,
        stage2_demoted_count,
        empty_fallback,
        order,
        survivors,
        absorptions,
    })
}

/// Separation and perturbation conditions under which the component count
/// is recovered with high probability, for a reference measure `g0`, merge
/// radius `omega` and perturbation level `delta` (`W_r(G, G0) <= delta
/// omega`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConditions {
    /// `omega < min((p_min / 2)^{1/r}, min_sep / 8)`.
    pub b1: bool,
    /// `sqrt(delta) < p_min / (2 k0)`.
    pub b2: bool,
    /// `omega < 7 p_min min_sep / 16`.
    pub b3: bool,
    /// `sqrt(delta) < p_min / (2 k0 (k0 + 2))`.
    pub b4: bool,
}

impl RecoveryConditions {
    pub fn evaluate(g0: &MixingMeasure, omega: f64, delta: f64, r: f64) -> Self {
        let k0 = g0.len() as f64;
        let p_min = g0.weights().iter().copied().fold(f64::INFINITY, f64::min);
        let sep = min_separation(g0);
        let root = delta.sqrt();
        RecoveryConditions {
            b1: omega < (p_min / 2.0).powf(1.0 / r).min(sep / 8.0),
            b2: root < p_min / (2.0 * k0),
            b3: omega < 7.0 * p_min * sep / 16.0,
            b4: root < p_min / (2.0 * k0 * (k0 + 2.0)),
        }
    }

    pub fn all(&self) -> bool {
        self.b1 && self.b2 && self.b3 && self.b4
    }
}

/// Smallest pairwise distance between atoms (infinite for one atom).
pub fn min_separation(g: &MixingMeasure) -> f64 {
    let a = g.atoms();
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        for j in 0..i {
            best = best.min(a[i].distance(&a[j]));
        }
    }
    best
}

/// Lower bound `1 - delta^{r/2} sum_i 1 / p_i` on the probability that
/// stage 1 keeps one heavy atom near each atom of `g0`.
pub fn count_recovery_bound(g0: &MixingMeasure, delta: f64, r: f64) -> f64 {
    1.0 - delta.powf(r / 2.0) * g0.weights().iter().map(|p| 1.0 / p).sum::<f64>()
}

/// `C = (1 + 4 (2 diam / min_sep)^r)^{1/r} (k0 + 2)`; on the high-probability
/// event, `W_r(G~, G0) <= C sqrt(delta) omega`.
pub fn wasserstein_bound_constant(g0: &MixingMeasure, diameter: f64, r: f64) -> f64 {
    let k0 = g0.len() as f64;
    let ratio = 2.0 * diameter / min_separation(g0);
    (1.0 + 4.0 * ratio.powf(r)).powf(1.0 / r) * (k0 + 2.0)
}
