//! Instance data model, the frequency encoding and objective vectors.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A customer with its storage cap and per-period demand series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Customer {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub storage_cap: i64,
    #[serde(default)]
    pub initial_inventory: i64,
    pub demands: Vec<i64>,
}

impl Customer {
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Instance {
    pub name: String,
    pub vehicle_cap: i64,
    pub horizon: usize,
    pub depot: Point,
    pub customers: Vec<Customer>,
}

impl Instance {
    pub fn num_customers(&self) -> usize {
        self.customers.len()
    }

    /// Checks dimensions and identity; modelling assumptions are left to
    /// [`validate_instance`].
    pub fn check_structure(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.customers.len());
        for (i, c) in self.customers.iter().enumerate() {
            if c.demands.len() != self.horizon {
                return Err(Error::structure(format!(
                    "customer {} has {} demand entries, horizon is {}",
                    c.id,
                    c.demands.len(),
                    self.horizon
                )));
            }
            if !seen.insert(c.id) {
                return Err(Error::structure(format!("duplicate customer id {}", c.id)));
            }
            if !(c.x.is_finite() && c.y.is_finite()) {
                return Err(Error::structure(format!(
                    "customer at position {i} has non-finite coordinates"
                )));
            }
        }
        if !(self.depot.x.is_finite() && self.depot.y.is_finite()) {
            return Err(Error::structure("depot has non-finite coordinates"));
        }
        Ok(())
    }

    /// Structure and validation in one call.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate_instance(self)?;
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(report))
        }
    }

    pub fn total_demand(&self, customer: usize) -> i64 {
        self.customers[customer].demands.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    HorizonTooShort,
    NonPositiveVehicleCap { cap: i64 },
    NonPositiveStorageCap { customer: u32, cap: i64 },
    NegativeDemand { customer: u32, period: usize, demand: i64 },
    DemandExceedsStorageCap { customer: u32, period: usize, demand: i64, cap: i64 },
    DemandExceedsVehicleCap { customer: u32, period: usize, demand: i64, cap: i64 },
    InitialInventoryOutOfRange { customer: u32, level: i64, cap: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::HorizonTooShort => write!(f, "horizon must be ≥ 1"),
            Violation::NonPositiveVehicleCap { cap } => {
                write!(f, "vehicle capacity must be positive, got {cap}")
            }
            Violation::NonPositiveStorageCap { customer, cap } => {
                write!(f, "customer {customer}: storage cap must be positive, got {cap}")
            }
            Violation::NegativeDemand { customer, period, demand } => {
                write!(f, "customer {customer}: negative demand {demand} in period {}", period + 1)
            }
            Violation::DemandExceedsStorageCap { customer, period, demand, cap } => write!(
                f,
                "customer {customer}: demand exceeds storage cap ({demand} > {cap}) in period {}",
                period + 1
            ),
            Violation::DemandExceedsVehicleCap { customer, period, demand, cap } => write!(
                f,
                "customer {customer}: demand exceeds vehicle cap ({demand} > {cap}) in period {}",
                period + 1
            ),
            Violation::InitialInventoryOutOfRange { customer, level, cap } => write!(
                f,
                "customer {customer}: initial inventory {level} outside 0..={cap}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the assumptions under which the frequency encoding can never
/// produce a stockout: nonnegative demand with `d_it ≤ min(Q_i, C)`,
/// positive capacities and `0 ≤ L_i0 ≤ Q_i`.
///
/// Structural problems (demand series of the wrong length, duplicate ids)
/// are returned as [`Error::Structure`] rather than as violations.
pub fn validate_instance(inst: &Instance) -> Result<ValidationReport> {
    inst.check_structure()?;
    let mut violations = Vec::new();
    if inst.horizon == 0 {
        violations.push(Violation::HorizonTooShort);
    }
    if inst.vehicle_cap <= 0 {
        violations.push(Violation::NonPositiveVehicleCap { cap: inst.vehicle_cap });
    }
    for c in &inst.customers {
        if c.storage_cap <= 0 {
            violations.push(Violation::NonPositiveStorageCap { customer: c.id, cap: c.storage_cap });
        }
        if c.initial_inventory < 0 || c.initial_inventory > c.storage_cap {
            violations.push(Violation::InitialInventoryOutOfRange {
                customer: c.id,
                level: c.initial_inventory,
                cap: c.storage_cap,
            });
        }
        for (t, &d) in c.demands.iter().enumerate() {
            if d < 0 {
                violations.push(Violation::NegativeDemand { customer: c.id, period: t, demand: d });
            }
            if d > c.storage_cap {
                violations.push(Violation::DemandExceedsStorageCap {
                    customer: c.id,
                    period: t,
                    demand: d,
                    cap: c.storage_cap,
                });
            }
            if d > inst.vehicle_cap {
                violations.push(Violation::DemandExceedsVehicleCap {
                    customer: c.id,
                    period: t,
                    demand: d,
                    cap: inst.vehicle_cap,
                });
            }
        }
    }
    Ok(ValidationReport { violations })
}

/// Per-customer delivery frequencies: how many consecutive periods of demand
/// a triggered delivery tries to cover. Every entry is at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct FrequencyVector(Vec<u32>);

impl FrequencyVector {
    pub fn new(freqs: Vec<u32>) -> Result<Self> {
        if let Some(pos) = freqs.iter().position(|&f| f < 1) {
            return Err(Error::contract(format!("frequency at position {pos} is below 1")));
        }
        Ok(Self(freqs))
    }

    pub fn uniform(n: usize, value: u32) -> Self {
        assert!(value >= 1, "frequency must be at least 1");
        Self(vec![value; n])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Checks this vector against an instance: one entry per customer and
    /// no entry above the horizon.
    pub fn check_for(&self, inst: &Instance) -> Result<()> {
        if self.0.len() != inst.num_customers() {
            return Err(Error::contract(format!(
                "frequency vector has {} entries, instance has {} customers",
                self.0.len(),
                inst.num_customers()
            )));
        }
        if let Some(pos) = self.0.iter().position(|&f| f as usize > inst.horizon) {
            return Err(Error::contract(format!(
                "frequency {} at position {pos} exceeds horizon {}",
                self.0[pos], inst.horizon
            )));
        }
        Ok(())
    }

    /// Compact textual key, e.g. `3.1.2`. Used as a stable solution id.
    pub fn key(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        parts.join(".")
    }

    pub fn parse_key(key: &str) -> Result<Self> {
        let freqs = key
            .split('.')
            .map(|p| p.parse::<u32>().map_err(|_| Error::Parse(format!("bad frequency key {key:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(freqs)
    }
}

impl TryFrom<Vec<u32>> for FrequencyVector {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FrequencyVector> for Vec<u32> {
    fn from(f: FrequencyVector) -> Self {
        f.0
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.key().replace('.', ","))
    }
}

/// Outcome of a solution: total carried inventory and total routing distance.
/// Both are minimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub inventory: f64,
    pub distance: f64,
}

impl ObjectiveVector {
    pub const fn new(inventory: f64, distance: f64) -> Self {
        Self { inventory, distance }
    }

    /// Pareto dominance for minimization.
    pub fn dominates(&self, other: &ObjectiveVector) -> bool {
        self.inventory <= other.inventory
            && self.distance <= other.distance
            && (self.inventory < other.inventory || self.distance < other.distance)
    }

    /// Dominates or equals.
    pub fn covers(&self, other: &ObjectiveVector) -> bool {
        self.inventory <= other.inventory && self.distance <= other.distance
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::single_customer;
    use super::*;

    #[test]
    fn valid_instance_passes() {
        let inst = single_customer(&[2, 3], 10, 10);
        assert!(validate_instance(&inst).unwrap().is_valid());
    }

    #[test]
    fn demand_above_storage_cap_fails() {
        let inst = single_customer(&[12, 3], 10, 10);
        let report = validate_instance(&inst).unwrap();
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DemandExceedsStorageCap { demand: 12, .. })));
        assert!(report.to_string().contains("demand exceeds storage cap"));
    }

    #[test]
    fn demand_above_vehicle_cap_fails() {
        let inst = single_customer(&[2, 3], 10, 1);
        let report = validate_instance(&inst).unwrap();
        assert!(report.to_string().contains("demand exceeds vehicle cap"));
        // both periods exceed C=1
        assert_eq!(report.violations.len(), 2);
    }

    #[test]
    fn other_violations_are_listed() {
        let mut inst = single_customer(&[-1, 3], 10, 0);
        inst.customers[0].initial_inventory = 11;
        let report = validate_instance(&inst).unwrap();
        let kinds: Vec<_> = report.violations.iter().map(|v| v.to_string()).collect();
        assert!(kinds.iter().any(|k| k.contains("negative demand")));
        assert!(kinds.iter().any(|k| k.contains("vehicle capacity must be positive")));
        assert!(kinds.iter().any(|k| k.contains("initial inventory")));
    }

    #[test]
    fn zero_horizon_is_a_violation() {
        let inst = single_customer(&[], 10, 10);
        let report = validate_instance(&inst).unwrap();
        assert_eq!(report.violations, vec![Violation::HorizonTooShort]);
        assert_eq!(report.to_string(), "horizon must be ≥ 1");
    }

    #[test]
    fn mismatched_dimensions_are_structural() {
        let mut inst = single_customer(&[2, 3], 10, 10);
        inst.horizon = 3;
        assert!(matches!(validate_instance(&inst), Err(Error::Structure(_))));
    }

    #[test]
    fn duplicate_ids_are_structural() {
        let mut inst = single_customer(&[2, 3], 10, 10);
        let dup = inst.customers[0].clone();
        inst.customers.push(dup);
        assert!(matches!(validate_instance(&inst), Err(Error::Structure(_))));
    }

    #[test]
    fn frequency_vector_rejects_zero() {
        assert!(FrequencyVector::new(vec![1, 0]).is_err());
        let f = FrequencyVector::new(vec![3, 1, 2]).unwrap();
        assert_eq!(f.key(), "3.1.2");
        assert_eq!(FrequencyVector::parse_key("3.1.2").unwrap(), f);
        assert!(FrequencyVector::parse_key("3.x").is_err());
    }

    #[test]
    fn frequency_vector_checked_against_instance() {
        let inst = single_customer(&[2, 3], 10, 10);
        assert!(FrequencyVector::new(vec![2]).unwrap().check_for(&inst).is_ok());
        assert!(FrequencyVector::new(vec![3]).unwrap().check_for(&inst).is_err());
        assert!(FrequencyVector::new(vec![1, 1]).unwrap().check_for(&inst).is_err());
    }

    #[test]
    fn dominance_examples() {
        let d = |a: (f64, f64), b: (f64, f64)| {
            ObjectiveVector::new(a.0, a.1).dominates(&ObjectiveVector::new(b.0, b.1))
        };
        assert!(d((1.0, 5.0), (2.0, 5.0)));
        assert!(!d((2.0, 3.0), (2.0, 3.0)));
        assert!(!d((1.0, 5.0), (5.0, 1.0)));
        assert!(!d((5.0, 1.0), (1.0, 5.0)));
    }
}
