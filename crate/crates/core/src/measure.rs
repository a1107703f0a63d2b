//! Finitely supported mixing measures and the parameter-space box.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum(weights) - 1|` accepted by [`MixingMeasure::new`].
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A point of the parameter space, `d >= 1` finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidMeasure("point has zero dimension".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMeasure("point has a non-finite coordinate".into()));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point(vec![x])
    }
}

impl From<[f64; 2]> for Point {
    fn from(x: [f64; 2]) -> Self {
        Point(x.to_vec())
    }
}

/// `G = sum_i p_i delta_{theta_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMeasure {
    atoms: Vec<Point>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureWire {
    d: usize,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl MixingMeasure {
    pub fn new(atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("measure has no atoms".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let d = atoms[0].dim();
        if let Some(bad) = atoms.iter().find(|a| a.dim() != d) {
            return Err(Error::Dimension { expected: d, got: bad.dim() });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidMeasure("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(MixingMeasure { atoms, weights })
    }

    /// Builds a measure from raw coordinates; convenient in tests and the CLI.
    pub fn from_coords(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let atoms = atoms.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?;
        Self::new(atoms, weights)
    }

    /// Builds a measure from nonnegative masses that need not sum to one.
    pub fn from_masses(atoms: Vec<Point>, masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptyMeasure);
        }
        Self::new(atoms, masses.into_iter().map(|m| m / total).collect())
    }

    pub fn dirac(atom: Point) -> Self {
        MixingMeasure { atoms: vec![atom], weights: vec![1.0] }
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    pub(crate) fn from_parts_unchecked(atoms: Vec<Point>, weights: Vec<f64>) -> Self {
        MixingMeasure { atoms, weights }
    }

    /// Merges atoms within `atol` of an earlier kept atom, drops zero-weight
    /// atoms and renormalizes. `atol = 0` merges only bitwise-equal atoms.
    /// Kept atoms retain their first-occurrence order. A measure with nothing
    /// to merge or drop comes back unchanged, bit for bit.
    pub fn canonicalize(&self, atol: f64) -> Result<MixingMeasure> {
        let mut atoms: Vec<Point> = Vec::with_capacity(self.len());
        let mut masses: Vec<f64> = Vec::with_capacity(self.len());
        for (atom, w) in self.iter() {
            if w <= 0.0 {
                continue;
            }
            let hit = if atol == 0.0 {
                atoms.iter().position(|a| a == atom)
            } else {
                atoms.iter().position(|a| a.distance(atom) <= atol)
            };
            match hit {
                Some(k) => masses[k] += w,
                None => {
                    atoms.push(atom.clone());
                    masses.push(w);
                }
            }
        }
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if atoms.len() == self.len() {
            return Ok(self.clone());
        }
        let total: f64 = masses.iter().sum();
        let weights = masses.into_iter().map(|m| m / total).collect();
        Ok(MixingMeasure { atoms, weights })
    }

    /// True when every weight is positive and all atoms are distinct.
    pub fn is_canonical(&self) -> bool {
        if self.weights.iter().any(|w| *w <= 0.0) {
            return false;
        }
        for i in 0..self.len() {
            for j in 0..i {
                if self.atoms[i] == self.atoms[j] {
                    return false;
                }
            }
        }
        true
    }

    /// Equality up to a permutation of atoms, with tolerances on locations
    /// and weights.
    pub fn approx_eq_unordered(&self, other: &MixingMeasure, tol: f64) -> bool {
        if self.len() != other.len() || self.dim() != other.dim() {
            return false;
        }
        let mut used = vec![false; other.len()];
        'outer: for (a, w) in self.iter() {
            for (j, (b, v)) in other.iter().enumerate() {
                if !used[j] && a.distance(b) <= tol && (w - v).abs() <= tol {
                    used[j] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    /// Translates every atom by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Result<MixingMeasure> {
        if shift.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: shift.len() });
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Point(a.0.iter().zip(shift).map(|(x, s)| x + s).collect()))
            .collect();
        Ok(MixingMeasure { atoms, weights: self.weights.clone() })
    }

    /// Scales every atom coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> MixingMeasure {
        let atoms = self.atoms.iter().map(|a| Point(a.0.iter().map(|x| x * factor).collect())).collect();
        MixingMeasure { atoms, weights: self.weights.clone() }
    }

    pub fn to_json(&self) -> String {
        let wire = MeasureWire {
            d: self.dim(),
            atoms: self.atoms.iter().map(|a| a.0.clone()).collect(),
            weights: self.weights.clone(),
        };
        serde_json::to_string_pretty(&wire).expect("measure serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: MeasureWire = serde_json::from_str(s)?;
        let m = Self::from_coords(wire.atoms, wire.weights)?;
        if m.dim() != wire.d {
            return Err(Error::Dimension { expected: wire.d, got: m.dim() });
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }
}

impl Serialize for MixingMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureWire {
            d: self.dim(),
            atoms: self.atoms.iter().map(|a| a.0.clone()).collect(),
            weights: self.weights.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MixingMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = MeasureWire::deserialize(d)?;
        let m = Self::from_coords(wire.atoms, wire.weights).map_err(serde::de::Error::custom)?;
        if m.dim() != wire.d {
            return Err(serde::de::Error::custom("declared d does not match atoms"));
        }
        Ok(m)
    }
}

/// Axis-aligned box `prod_i [lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Dimension { expected: lower.len(), got: upper.len() });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::Domain("box bounds must be finite with lower < upper".into()));
        }
        Ok(BoxDomain { lower, upper })
    }

    /// `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn diameter(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| (u - l) * (u - l)).sum::<f64>().sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && p.0.iter().zip(self.lower.iter().zip(&self.upper)).all(|(x, (l, u))| *l <= *x && *x <= *u)
    }

    pub fn clamp(&self, p: &Point) -> Point {
        Point(p.0.iter().zip(self.lower.iter().zip(&self.upper)).map(|(x, (l, u))| x.clamp(*l, *u)).collect())
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point(self.lower.iter().zip(&self.upper).map(|(l, u)| rng.random_range(*l..*u)).collect())
    }

    /// Folds each coordinate back into the box by mirror reflection.
    pub fn reflect(&self, coords: &mut [f64]) {
        for (x, (l, u)) in coords.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            let width = u - l;
            let mut y = (*x - l).rem_euclid(2.0 * width);
            if y > width {
                y = 2.0 * width - y;
            }
            *x = l + y;
        }
    }
}
