//! Independent oracles and instance generators shared by the integration
//! tests. Nothing here calls the transport solver.
#![allow(dead_code)]

use mtmix::rng::{seeded, Rng};
use mtmix::{MixingMeasure, Point};
use rand::Rng as _;

pub fn rng(seed: u64) -> Rng {
    seeded(seed, 0xA11CE)
}

/// Two measures whose weights are multiples of `1/den`, together with the
/// integer numerators.
pub struct RationalPair {
    pub g: MixingMeasure,
    pub h: MixingMeasure,
    pub g_units: Vec<usize>,
    pub h_units: Vec<usize>,
    pub den: usize,
}

/// `parts` positive integers summing to `total`, uniformly over compositions.
pub fn composition(rng: &mut Rng, total: usize, parts: usize) -> Vec<usize> {
    // Choose parts - 1 distinct cut points in 1..total.
    let mut cuts: Vec<usize> = (1..total).collect();
    for i in 0..parts - 1 {
        let j = rng.random_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut chosen: Vec<usize> = cuts[..parts - 1].to_vec();
    chosen.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in chosen.into_iter().chain(std::iter::once(total)) {
        out.push(c - prev);
        prev = c;
    }
    out
}

pub fn random_points(rng: &mut Rng, k: usize, d: usize, half_width: f64) -> Vec<Point> {
    (0..k)
        .map(|_| Point::new((0..d).map(|_| rng.random_range(-half_width..half_width)).collect()).unwrap())
        .collect()
}

pub fn random_rational_pair(rng: &mut Rng, d: usize) -> RationalPair {
    let den = rng.random_range(1..=8usize);
    let kg = rng.random_range(1..=den.min(6));
    let kh = rng.random_range(1..=den.min(6));
    let g_units = composition(rng, den, kg);
    let h_units = composition(rng, den, kh);
    let to_w = |u: &[usize]| u.iter().map(|x| *x as f64 / den as f64).collect::<Vec<_>>();
    let g = MixingMeasure::new(random_points(rng, kg, d, 3.0), to_w(&g_units)).unwrap();
    let h = MixingMeasure::new(random_points(rng, kh, d, 3.0), to_w(&h_units)).unwrap();
    RationalPair { g, h, g_units, h_units, den }
}

/// Random measure with `k` atoms and weights bounded away from zero.
pub fn random_measure(rng: &mut Rng, k: usize, d: usize) -> MixingMeasure {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    MixingMeasure::new(random_points(rng, k, d, 3.0), raw.iter().map(|w| w / total).collect()).unwrap()
}

fn permutations(n: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(k: usize, p: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, f);
            p.swap(k, i);
        }
    }
    let mut p: Vec<usize> = (0..n).collect();
    rec(0, &mut p, f);
}

/// Exact optimal transport cost `min sum q_ij c_ij` for weights that are
/// multiples of `1/den`. Each measure is expanded into `den` unit masses;
/// the uniform assignment polytope has permutation matrices as its
/// vertices, so exhausting all `den!` permutations finds the optimum.
pub fn brute_force_cost(p: &RationalPair, r: f64) -> f64 {
    let expand = |units: &[usize]| -> Vec<usize> {
        units.iter().enumerate().flat_map(|(i, u)| std::iter::repeat_n(i, *u)).collect()
    };
    let rows = expand(&p.g_units);
    let cols = expand(&p.h_units);
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| p.g.atoms()[i].distance(&p.h.atoms()[j]).powf(r)).collect())
        .collect();
    let mut best = f64::INFINITY;
    permutations(p.den, &mut |perm| {
        let c: f64 = perm.iter().enumerate().map(|(a, &b)| cost[a][b]).sum();
        best = best.min(c);
    });
    best / p.den as f64
}
