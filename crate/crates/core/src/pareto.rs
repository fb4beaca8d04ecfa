//! Nondominated archive, min-max normalization, reference-point layout and
//! weighted Chebyshev selection of representatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FrequencyVector, ObjectiveVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry<T> {
    pub objectives: ObjectiveVector,
    pub payload: T,
}

/// Exact set of mutually nondominated outcomes, kept sorted by inventory
/// ascending (and therefore by distance descending). Duplicate objective
/// vectors are rejected, so the first entry with a given outcome wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archive<T = FrequencyVector> {
    entries: Vec<ArchiveEntry<T>>,
}

impl<T> Default for Archive<T> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<T> Archive<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ArchiveEntry<T>] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &ArchiveEntry<T>> {
        self.entries.iter()
    }

    pub fn objectives(&self) -> impl Iterator<Item = ObjectiveVector> + '_ {
        self.entries.iter().map(|e| e.objectives)
    }

    /// True if some entry dominates or equals `o`.
    pub fn covers(&self, o: &ObjectiveVector) -> bool {
        self.entries.iter().any(|e| e.objectives.covers(o))
    }

    /// Adds the candidate unless an entry dominates or equals it, removing
    /// every entry it dominates. Returns whether it was added.
    pub fn insert(&mut self, objectives: ObjectiveVector, payload: T) -> bool {
        if self.covers(&objectives) {
            return false;
        }
        self.entries.retain(|e| !objectives.dominates(&e.objectives));
        let at = self.entries.partition_point(|e| {
            (e.objectives.inventory, e.objectives.distance) < (objectives.inventory, objectives.distance)
        });
        self.entries.insert(at, ArchiveEntry { objectives, payload });
        true
    }

    /// Every entry of `earlier` is present here or dominated by an entry here.
    pub fn weakly_dominates<U>(&self, earlier: &Archive<U>) -> bool {
        earlier.objectives().all(|o| self.covers(&o))
    }

    pub fn normalizer(&self) -> Result<Normalizer> {
        Normalizer::from_objectives(self.objectives())
    }
}

/// A point in normalized objective space: `u` for inventory, `v` for
/// distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPoint {
    pub u: f64,
    pub v: f64,
}

impl NormalizedPoint {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.u) && (0.0..=1.0).contains(&self.v)
    }
}

/// Min-max scaling over a set of outcomes. A degenerate objective (all
/// values equal) maps to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    inv_min: f64,
    inv_max: f64,
    dist_min: f64,
    dist_max: f64,
}

impl Normalizer {
    pub fn from_objectives(objectives: impl IntoIterator<Item = ObjectiveVector>) -> Result<Self> {
        let mut it = objectives.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::contract("cannot normalize an empty archive"))?;
        let init = Self {
            inv_min: first.inventory,
            inv_max: first.inventory,
            dist_min: first.distance,
            dist_max: first.distance,
        };
        Ok(it.fold(init, |n, o| Self {
            inv_min: n.inv_min.min(o.inventory),
            inv_max: n.inv_max.max(o.inventory),
            dist_min: n.dist_min.min(o.distance),
            dist_max: n.dist_max.max(o.distance),
        }))
    }

    pub fn normalize(&self, o: &ObjectiveVector) -> NormalizedPoint {
        fn scale(x: f64, lo: f64, hi: f64) -> f64 {
            if hi > lo {
                (x - lo) / (hi - lo)
            } else {
                0.0
            }
        }
        NormalizedPoint::new(
            scale(o.inventory, self.inv_min, self.inv_max),
            scale(o.distance, self.dist_min, self.dist_max),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub inventory: f64,
    pub distance: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { inventory: 1.0, distance: 1.0 }
    }
}

impl Weights {
    pub fn check(&self) -> Result<()> {
        if self.inventory > 0.0 && self.distance > 0.0 {
            Ok(())
        } else {
            Err(Error::contract("Chebyshev weights must be positive"))
        }
    }
}

pub fn chebyshev_distance(p: &NormalizedPoint, r: &NormalizedPoint, w: &Weights) -> f64 {
    (w.inventory * (p.u - r.u).abs()).max(w.distance * (p.v - r.v).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePointSet {
    pub points: Vec<NormalizedPoint>,
    pub weights: Weights,
}

/// The two extreme-solution corners: least inventory (0, 1) and least
/// distance (1, 0).
pub const EXTREME_CORNERS: [NormalizedPoint; 2] =
    [NormalizedPoint::new(0.0, 1.0), NormalizedPoint::new(1.0, 0.0)];

impl ReferencePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// User-chosen points joined with the two extreme corners, so that the
    /// ends of the front are always represented.
    pub fn with_corners(user: &[NormalizedPoint], weights: Weights) -> Result<Self> {
        if let Some(p) = user.iter().find(|p| !p.in_unit_square()) {
            return Err(Error::contract(format!(
                "reference point ({}, {}) lies outside [0,1]²",
                p.u, p.v
            )));
        }
        let mut points = EXTREME_CORNERS.to_vec();
        for p in user {
            if !points.contains(p) {
                points.push(*p);
            }
        }
        Ok(Self { points, weights })
    }
}

/// Canonical layout for `count = 3 + 2k` points: the ideal point (0, 0), the
/// extreme corners (0, 1) and (1, 0), and each axis segment from the ideal
/// point to a corner split into `k + 1` equal parts.
pub fn build_reference_points(count: usize) -> Result<ReferencePointSet> {
    if count < 3 || count.is_multiple_of(2) {
        return Err(Error::contract("reference point count must be odd ≥ 3"));
    }
    let k = (count - 3) / 2;
    let mut points = vec![
        NormalizedPoint::new(0.0, 0.0),
        NormalizedPoint::new(0.0, 1.0),
        NormalizedPoint::new(1.0, 0.0),
    ];
    let parts = (k + 1) as f64;
    points.extend((1..=k).map(|j| NormalizedPoint::new(0.0, j as f64 / parts)));
    points.extend((1..=k).map(|j| NormalizedPoint::new(j as f64 / parts, 0.0)));
    Ok(ReferencePointSet { points, weights: Weights::default() })
}

/// For each reference point, the index of the archive entry closest in
/// weighted Chebyshev distance (ties: smaller normalized inventory, then
/// smaller normalized distance). Returns the distinct indices in ascending
/// order.
pub fn select_representatives<T>(arch: &Archive<T>, refs: &ReferencePointSet) -> Vec<usize> {
    let Ok(norm) = arch.normalizer() else {
        return Vec::new();
    };
    let points: Vec<NormalizedPoint> = arch.objectives().map(|o| norm.normalize(&o)).collect();
    let mut picked: Vec<usize> = refs
        .points
        .iter()
        .filter_map(|r| {
            points
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    chebyshev_distance(a, r, &refs.weights)
                        .total_cmp(&chebyshev_distance(b, r, &refs.weights))
                        .then(a.u.total_cmp(&b.u))
                        .then(a.v.total_cmp(&b.v))
                })
                .map(|(ix, _)| ix)
        })
        .collect();
    picked.sort_unstable();
    picked.dedup();
    picked
}
