//! Delivery-quantity rule and the inventory flow simulation.
//!
//! Periods are 0-based here. Within a period the delivery arrives before the
//! demand is consumed, so the level carried out of period `t` is
//! `L_t = L_{t-1} + inflow_t - outflow_t`, and a delivery is triggered iff
//! `d_t > L_{t-1}`.

use crate::error::{Error, Result};
use crate::model::{FrequencyVector, Instance};

/// `min{ Σ_{l=t}^{t+π_i-1} d_il - L, Q_i - L, C }`, with the demand sum
/// truncated at the end of the horizon.
///
/// Only meaningful when the trigger `d_it > level_before` holds; otherwise
/// the caller ships nothing.
pub fn delivery_quantity(
    inst: &Instance,
    customer: usize,
    period: usize,
    freqs: &FrequencyVector,
    level_before: i64,
) -> Result<i64> {
    let n = inst.num_customers();
    if customer >= n {
        return Err(Error::OutOfRange { what: "customer", index: customer, len: n });
    }
    if period >= inst.horizon {
        return Err(Error::OutOfRange { what: "period", index: period, len: inst.horizon });
    }
    if freqs.len() != n {
        return Err(Error::contract("frequency vector length does not match instance"));
    }
    let c = &inst.customers[customer];
    let end = (period + freqs.get(customer) as usize).min(inst.horizon);
    let covered: i64 = c.demands[period..end].iter().sum();
    Ok((covered - level_before)
        .min(c.storage_cap - level_before)
        .min(inst.vehicle_cap))
}

/// Per-customer, per-period quantities, indexed `[customer][period]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InventoryTrajectory {
    /// Level carried out of each period, after consumption.
    pub levels: Vec<Vec<i64>>,
    pub inflow: Vec<Vec<i64>>,
    pub outflow: Vec<Vec<i64>>,
    pub deliveries: Vec<Vec<i64>>,
}

impl InventoryTrajectory {
    pub fn horizon(&self) -> usize {
        self.levels.first().map_or(0, Vec::len)
    }

    pub fn total_inventory(&self) -> i64 {
        self.levels.iter().flatten().sum()
    }

    /// Total inventory held after each period.
    pub fn inventory_series(&self) -> Vec<i64> {
        (0..self.horizon())
            .map(|t| self.levels.iter().map(|row| row[t]).sum())
            .collect()
    }

    /// Customers (by index) receiving a positive delivery in `period`.
    pub fn served_in(&self, period: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.deliveries
            .iter()
            .enumerate()
            .filter_map(move |(i, row)| (row[period] > 0).then_some((i, row[period])))
    }
}

/// Runs the flow equations over the whole horizon.
///
/// On a validated instance the result is stockout-free: every period's
/// outflow equals its demand.
pub fn simulate_inventory(inst: &Instance, freqs: &FrequencyVector) -> Result<InventoryTrajectory> {
    freqs.check_for(inst)?;
    let n = inst.num_customers();
    let horizon = inst.horizon;
    let mut traj = InventoryTrajectory {
        levels: vec![vec![0; horizon]; n],
        inflow: vec![vec![0; horizon]; n],
        outflow: vec![vec![0; horizon]; n],
        deliveries: vec![vec![0; horizon]; n],
    };
    for (i, c) in inst.customers.iter().enumerate() {
        let mut level = c.initial_inventory;
        for t in 0..horizon {
            let demand = c.demands[t];
            let shipped = if demand > level {
                delivery_quantity(inst, i, t, freqs, level)?
            } else {
                0
            };
            let inflow = shipped.min(c.storage_cap - level);
            let available = level + inflow;
            let outflow = demand.min(available);
            level = available - outflow;
            traj.deliveries[i][t] = shipped;
            traj.inflow[i][t] = inflow;
            traj.outflow[i][t] = outflow;
            traj.levels[i][t] = level;
        }
    }
    Ok(traj)
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
    fn day_to_day_ships_current_demand() {
        let inst = single_customer(&[5], 100, 50);
        assert_eq!(delivery_quantity(&inst, 0, 0, &fv(&[1]), 0).unwrap(), 5);
    }

    #[test]
    fn covers_several_periods() {
        let inst = single_customer(&[2, 3, 4], 100, 50);
        assert_eq!(delivery_quantity(&inst, 0, 0, &fv(&[3]), 0).unwrap(), 9);
    }

    #[test]
    fn storage_cap_binds() {
        let inst = single_customer(&[5, 5], 8, 10);
        assert_eq!(delivery_quantity(&inst, 0, 0, &fv(&[2]), 0).unwrap(), 8);
    }

    #[test]
    fn vehicle_cap_binds() {
        let inst = single_customer(&[5, 5], 20, 7);
        assert_eq!(delivery_quantity(&inst, 0, 0, &fv(&[2]), 0).unwrap(), 7);
    }

    #[test]
    fn demand_sum_truncated_at_horizon() {
        let inst = single_customer(&[2, 3, 4], 100, 50);
        assert_eq!(delivery_quantity(&inst, 0, 2, &fv(&[3]), 0).unwrap(), 4);
    }

    #[test]
    fn period_out_of_range() {
        let inst = single_customer(&[2, 3], 100, 50);
        assert!(matches!(
            delivery_quantity(&inst, 0, 2, &fv(&[1]), 0),
            Err(Error::OutOfRange { what: "period", .. })
        ));
        assert!(matches!(
            delivery_quantity(&inst, 1, 0, &fv(&[1]), 0),
            Err(Error::OutOfRange { what: "customer", .. })
        ));
    }

    #[test]
    fn three_period_cover() {
        let inst = single_customer(&[2, 3, 4], 100, 50);
        let traj = simulate_inventory(&inst, &fv(&[3])).unwrap();
        assert_eq!(traj.deliveries[0], vec![9, 0, 0]);
        assert_eq!(traj.levels[0], vec![7, 4, 0]);
        assert_eq!(traj.total_inventory(), 11);
        assert_eq!(traj.outflow[0], vec![2, 3, 4]);
    }

    #[test]
    fn storage_cap_forces_second_delivery() {
        let inst = single_customer(&[5, 5], 8, 10);
        let traj = simulate_inventory(&inst, &fv(&[2])).unwrap();
        assert_eq!(traj.deliveries[0], vec![8, 2]);
        assert_eq!(traj.levels[0], vec![3, 0]);
        assert_eq!(traj.total_inventory(), 3);
    }

    #[test]
    fn all_ones_carries_nothing() {
        let inst = Instance {
            name: "two".into(),
            vehicle_cap: 10,
            horizon: 4,
            depot: Point::new(0.0, 0.0),
            customers: vec![
                Customer { id: 1, x: 1.0, y: 1.0, storage_cap: 9, initial_inventory: 0, demands: vec![3, 0, 9, 4] },
                Customer { id: 2, x: 2.0, y: 1.0, storage_cap: 9, initial_inventory: 0, demands: vec![1, 1, 1, 1] },
            ],
        };
        let traj = simulate_inventory(&inst, &fv(&[1, 1])).unwrap();
        assert_eq!(traj.total_inventory(), 0);
        assert_eq!(traj.inventory_series(), vec![0, 0, 0, 0]);
        // zero demand never triggers
        assert_eq!(traj.deliveries[0][1], 0);
        assert_eq!(traj.served_in(1).collect::<Vec<_>>(), vec![(1, 1)]);
    }

    #[test]
    fn initial_inventory_is_consumed_first() {
        let mut inst = single_customer(&[2, 3, 4], 100, 50);
        inst.customers[0].initial_inventory = 4;
        let traj = simulate_inventory(&inst, &fv(&[1])).unwrap();
        assert_eq!(traj.deliveries[0], vec![0, 1, 4]);
        assert_eq!(traj.levels[0], vec![2, 0, 0]);
    }

    #[test]
    fn rejects_frequency_above_horizon() {
        let inst = single_customer(&[2, 3], 100, 50);
        assert!(simulate_inventory(&inst, &fv(&[3])).is_err());
    }
}
