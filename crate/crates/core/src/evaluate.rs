//! From a frequency vector to a full solution: inventory simulation followed
//! by one routing problem per period.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inventory::{simulate_inventory, InventoryTrajectory};
use crate::model::{FrequencyVector, Instance, ObjectiveVector};
use crate::vrp::{
    brute_force_oracle, rtr_improve, savings_construct, RoutingProblem, RoutingSolution, RtrConfig,
    Stop,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VrpSolver {
    Savings,
    /// Savings followed by record-to-record travel.
    Rtr(RtrConfig),
    /// Exact enumeration; only for periods with very few stops.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub solver: VrpSolver,
    pub seed: u64,
}

impl EvalSettings {
    pub fn savings() -> Self {
        Self { solver: VrpSolver::Savings, seed: 0 }
    }

    pub fn rtr(seed: u64) -> Self {
        Self { solver: VrpSolver::Rtr(RtrConfig::default()), seed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub freqs: FrequencyVector,
    pub trajectory: InventoryTrajectory,
    pub period_routes: Vec<RoutingSolution>,
    pub objectives: ObjectiveVector,
}

/// The routing problem of one period: every customer with a positive
/// delivery, in customer order.
pub fn period_problem(inst: &Instance, traj: &InventoryTrajectory, period: usize) -> RoutingProblem {
    RoutingProblem {
        depot: inst.depot,
        vehicle_cap: inst.vehicle_cap,
        stops: traj
            .served_in(period)
            .map(|(i, q)| {
                let c = &inst.customers[i];
                Stop { id: c.id, load: q, x: c.x, y: c.y }
            })
            .collect(),
    }
}

/// The stochastic solver is seeded from the run seed and the problem's
/// content, so the same period problem always gets the same routes.
fn problem_seed(base: u64, p: &RoutingProblem) -> u64 {
    let mut h = base ^ 0x9e37_79b9_7f4a_7c15;
    for s in &p.stops {
        h = splitmix(h ^ u64::from(s.id));
        h = splitmix(h ^ s.load as u64);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn solve_period(p: &RoutingProblem, settings: &EvalSettings) -> Result<RoutingSolution> {
    if p.stops.is_empty() {
        return Ok(RoutingSolution::empty());
    }
    match settings.solver {
        VrpSolver::Savings => savings_construct(p),
        VrpSolver::Rtr(cfg) => {
            let start = savings_construct(p)?;
            rtr_improve(p, &start, problem_seed(settings.seed, p), &cfg)
        }
        VrpSolver::Exact => brute_force_oracle(p),
    }
}

fn check_deliveries(inst: &Instance, traj: &InventoryTrajectory) -> Result<()> {
    for (i, row) in traj.deliveries.iter().enumerate() {
        if let Some(t) = row.iter().position(|&q| q > inst.vehicle_cap || q < 0) {
            return Err(Error::Invariant(format!(
                "delivery {} to customer {} in period {} outside 0..={}",
                row[t],
                inst.customers[i].id,
                t + 1,
                inst.vehicle_cap
            )));
        }
    }
    Ok(())
}

/// Evaluates `freqs` on a validated instance. A pure function of its
/// arguments.
pub fn evaluate(inst: &Instance, freqs: &FrequencyVector, settings: &EvalSettings) -> Result<Solution> {
    let trajectory = simulate_inventory(inst, freqs)?;
    check_deliveries(inst, &trajectory)?;
    let period_routes = (0..inst.horizon)
        .map(|t| solve_period(&period_problem(inst, &trajectory, t), settings))
        .collect::<Result<Vec<_>>>()?;
    let objectives = ObjectiveVector::new(
        trajectory.total_inventory() as f64,
        period_routes.iter().map(|r| r.total_distance).sum(),
    );
    Ok(Solution { freqs: freqs.clone(), trajectory, period_routes, objectives })
}

type PeriodKey = Vec<(u32, i64)>;

/// Shared evaluator for one instance. Period routing results are memoized
/// by the period's (customer, load) list; the cached values are exactly
/// those [`evaluate`] would compute.
pub struct Evaluator {
    instance: Arc<Instance>,
    settings: EvalSettings,
    cache: Mutex<HashMap<PeriodKey, f64>>,
    cache_limit: usize,
}

impl Evaluator {
    pub fn new(instance: Arc<Instance>, settings: EvalSettings) -> Self {
        Self { instance, settings, cache: Mutex::new(HashMap::new()), cache_limit: 250_000 }
    }

    pub fn instance(&self) -> &Arc<Instance> {
        &self.instance
    }

    pub fn settings(&self) -> &EvalSettings {
        &self.settings
    }

    pub fn objectives(&self, freqs: &FrequencyVector) -> Result<ObjectiveVector> {
        let inst = &*self.instance;
        let traj = simulate_inventory(inst, freqs)?;
        check_deliveries(inst, &traj)?;
        let mut distance = 0.0;
        for t in 0..inst.horizon {
            let p = period_problem(inst, &traj, t);
            let key: PeriodKey = p.stops.iter().map(|s| (s.id, s.load)).collect();
            let cached = self.cache.lock().unwrap().get(&key).copied();
            let d = match cached {
                Some(d) => d,
                None => {
                    let d = solve_period(&p, &self.settings)?.total_distance;
                    let mut cache = self.cache.lock().unwrap();
                    if cache.len() >= self.cache_limit {
                        cache.clear();
                    }
                    cache.insert(key, d);
                    d
                }
            };
            distance += d;
        }
        Ok(ObjectiveVector::new(traj.total_inventory() as f64, distance))
    }

    pub fn solution(&self, freqs: &FrequencyVector) -> Result<Solution> {
        evaluate(&self.instance, freqs, &self.settings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::single_customer;
    use crate::model::{Customer, Point};

    fn fv(v: &[u32]) -> FrequencyVector {
        FrequencyVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let inst = single_customer(&[0, 0, 0], 10, 10);
        let sol = evaluate(&inst, &fv(&[2]), &EvalSettings::savings()).unwrap();
        assert_eq!(sol.objectives, ObjectiveVector::new(0.0, 0.0));

        let mut carry = inst.clone();
        carry.customers[0].initial_inventory = 4;
        let sol = evaluate(&carry, &fv(&[2]), &EvalSettings::savings()).unwrap();
        assert_eq!(sol.objectives, ObjectiveVector::new(12.0, 0.0));
    }

    #[test]
    fn day_to_day_two_tours() {
        let inst = single_customer(&[1, 1], 10, 10);
        let sol = evaluate(&inst, &fv(&[1]), &EvalSettings::rtr(3)).unwrap();
        assert_eq!(sol.objectives, ObjectiveVector::new(0.0, 4.0));
        assert_eq!(sol.period_routes.len(), 2);
    }

    #[test]
    fn covering_two_periods_trades_distance_for_inventory() {
        let inst = single_customer(&[1, 1], 10, 10);
        let sol = evaluate(&inst, &fv(&[2]), &EvalSettings::savings()).unwrap();
        assert_eq!(sol.trajectory.deliveries[0], vec![2, 0]);
        assert_eq!(sol.trajectory.levels[0], vec![1, 0]);
        assert_eq!(sol.objectives, ObjectiveVector::new(1.0, 2.0));
        assert!(sol.period_routes[1].routes.is_empty());
    }

    #[test]
    fn evaluator_matches_evaluate() {
        let inst = Arc::new(Instance {
            name: "three".into(),
            vehicle_cap: 12,
            horizon: 5,
            depot: Point::new(0.0, 0.0),
            customers: (0..3)
                .map(|k| Customer {
                    id: k + 1,
                    x: f64::from(k) * 3.0 + 1.0,
                    y: f64::from(k % 2) * 4.0,
                    storage_cap: 12,
                    initial_inventory: 0,
                    demands: vec![3, 4, 2, 5, 3],
                })
                .collect(),
        });
        let settings = EvalSettings::rtr(17);
        let ev = Evaluator::new(inst.clone(), settings);
        for f in [[1, 1, 1], [2, 1, 3], [3, 3, 3], [2, 2, 1]] {
            let f = fv(&f);
            let direct = evaluate(&inst, &f, &settings).unwrap().objectives;
            assert_eq!(ev.objectives(&f).unwrap(), direct);
            // second call hits the cache
            assert_eq!(ev.objectives(&f).unwrap(), direct);
        }
    }

    #[test]
    fn exact_solver_refuses_crowded_periods() {
        let inst = Instance {
            name: "crowded".into(),
            vehicle_cap: 5,
            horizon: 1,
            depot: Point::new(0.0, 0.0),
            customers: (0..9)
                .map(|k| Customer {
                    id: k + 1,
                    x: f64::from(k),
                    y: 1.0,
                    storage_cap: 5,
                    initial_inventory: 0,
                    demands: vec![1],
                })
                .collect(),
        };
        let settings = EvalSettings { solver: VrpSolver::Exact, seed: 0 };
        assert!(matches!(
            evaluate(&inst, &FrequencyVector::uniform(9, 1), &settings),
            Err(Error::TooManyStops(9))
        ));
    }
}
