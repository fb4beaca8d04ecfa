//! Multi-period instance generator.
//!
//! Each customer's average demand follows one of three profiles over the
//! horizon (constant, linearly doubling, or a half sine wave that doubles at
//! mid-horizon and returns), and actual integer demands are drawn uniformly
//! from a ±deviation band around the average.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_instance, Customer, Instance, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Constant average.
    #[serde(rename = "a")]
    Constant,
    /// Average doubles linearly from the first to the last period.
    #[serde(rename = "b")]
    Increasing,
    /// Average doubles at mid-horizon along a sine arc, then returns.
    #[serde(rename = "c")]
    Sinus,
}

impl ScenarioKind {
    pub fn letter(self) -> char {
        match self {
            ScenarioKind::Constant => 'a',
            ScenarioKind::Increasing => 'b',
            ScenarioKind::Sinus => 'c',
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(ScenarioKind::Constant),
            "b" => Ok(ScenarioKind::Increasing),
            "c" => Ok(ScenarioKind::Sinus),
            other => Err(Error::contract(format!("unknown scenario {other:?}, expected a, b or c"))),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub horizon: usize,
    pub deviation: f64,
    pub seed: u64,
    /// γ in `Q_i = ceil(γ · base average demand)`.
    pub storage_cap_factor: f64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind) -> Self {
        Self { kind, horizon: 240, deviation: 0.25, seed: 0, storage_cap_factor: 10.0 }
    }

    pub fn check(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::contract("horizon must be ≥ 1"));
        }
        if !(0.0..1.0).contains(&self.deviation) {
            return Err(Error::contract("deviation must lie in [0, 1)"));
        }
        if self.storage_cap_factor.is_nan() || self.storage_cap_factor <= 0.0 {
            return Err(Error::contract("storage cap factor must be positive"));
        }
        Ok(())
    }
}

/// Average demand in 0-based `period` of a horizon of length `horizon`.
pub fn average_demand(kind: ScenarioKind, base: f64, period: usize, horizon: usize) -> f64 {
    if horizon <= 1 {
        return base;
    }
    let phase = period as f64 / (horizon - 1) as f64;
    match kind {
        ScenarioKind::Constant => base,
        ScenarioKind::Increasing => base * (1.0 + phase),
        ScenarioKind::Sinus => base * (1.0 + (PI * phase).sin()),
    }
}

/// Integer range `[ceil((1-dev)·avg), floor((1+dev)·avg)]`; collapses to the
/// rounded average when the band contains no integer.
pub fn demand_band(avg: f64, deviation: f64) -> (i64, i64) {
    let lo = ((1.0 - deviation) * avg).ceil() as i64;
    let hi = ((1.0 + deviation) * avg).floor() as i64;
    if lo <= hi {
        (lo, hi)
    } else {
        let r = avg.round() as i64;
        (r, r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Site {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub base_demand: f64,
}

/// Depot plus customer sites with base demands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub name: String,
    pub depot: Point,
    pub sites: Vec<Site>,
}

impl Geometry {
    /// Parses a whitespace- or comma-separated listing. Blank lines and
    /// lines starting with `#` are skipped, as are lines whose first token
    /// is not a number (keyword headers). The first data line is the depot:
    /// `x y`, `id x y` or `id x y demand`. Every further line is a customer:
    /// `id x y demand`, or `x y demand` with ids assigned in order.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut depot = None;
        let mut sites = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            let Ok(nums) = tokens.iter().map(|t| t.parse::<f64>()).collect::<Result<Vec<f64>, _>>() else {
                if tokens[0].parse::<f64>().is_err() {
                    continue;
                }
                return Err(Error::Parse(format!("line {}: expected numbers", lineno + 1)));
            };
            if depot.is_none() {
                let (x, y) = match nums.as_slice() {
                    [x, y] | [_, x, y] | [_, x, y, _] => (*x, *y),
                    _ => return Err(Error::Parse(format!("line {}: bad depot line", lineno + 1))),
                };
                depot = Some(Point::new(x, y));
                continue;
            }
            let site = match nums.as_slice() {
                [x, y, d] => Site { id: sites.len() as u32 + 1, x: *x, y: *y, base_demand: *d },
                [id, x, y, d] => Site { id: *id as u32, x: *x, y: *y, base_demand: *d },
                _ => return Err(Error::Parse(format!("line {}: bad customer line", lineno + 1))),
            };
            sites.push(site);
        }
        let depot = depot.ok_or_else(|| Error::Parse("geometry has no depot line".into()))?;
        Ok(Self { name: name.to_string(), depot, sites })
    }

    /// Random geometry in a square of side `extent`, base demands drawn
    /// uniformly from `demand_range`.
    pub fn random(n: usize, seed: u64, extent: f64, demand_range: (u32, u32)) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites = (0..n)
            .map(|k| Site {
                id: k as u32 + 1,
                x: rng.random_range(0.0..extent),
                y: rng.random_range(0.0..extent),
                base_demand: f64::from(rng.random_range(demand_range.0..=demand_range.1)),
            })
            .collect();
        Self { name: format!("random-{n}-{seed}"), depot: Point::new(extent / 2.0, extent / 2.0), sites }
    }
}

/// Result of generation, with the number of demands clamped to
/// `min(Q_i, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub instance: Instance,
    pub clamped: usize,
}

pub fn generate_instance(geometry: &Geometry, spec: &ScenarioSpec, vehicle_cap: i64) -> Result<Generated> {
    spec.check()?;
    if geometry.sites.is_empty() {
        return Err(Error::contract("geometry has no customers"));
    }
    if let Some(s) = geometry.sites.iter().find(|s| s.base_demand.is_nan() || s.base_demand <= 0.0) {
        return Err(Error::contract(format!("site {} has non-positive base demand", s.id)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut clamped = 0;
    let customers = geometry
        .sites
        .iter()
        .map(|s| {
            let storage_cap = (spec.storage_cap_factor * s.base_demand).ceil() as i64;
            let limit = storage_cap.min(vehicle_cap);
            let demands = (0..spec.horizon)
                .map(|t| {
                    let avg = average_demand(spec.kind, s.base_demand, t, spec.horizon);
                    let (lo, hi) = demand_band(avg, spec.deviation);
                    let d = rng.random_range(lo..=hi);
                    if d > limit {
                        clamped += 1;
                        limit
                    } else {
                        d
                    }
                })
                .collect();
            Customer { id: s.id, x: s.x, y: s.y, storage_cap, initial_inventory: 0, demands }
        })
        .collect();
    if clamped > 0 {
        log::warn!("{clamped} generated demands clamped to min(storage cap, vehicle cap)");
    }
    let instance = Instance {
        name: format!("{}-{}", geometry.name, spec.kind),
        vehicle_cap,
        horizon: spec.horizon,
        depot: geometry.depot,
        customers,
    };
    let report = validate_instance(&instance)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::Generation(v.to_string()));
    }
    Ok(Generated { instance, clamped })
}
