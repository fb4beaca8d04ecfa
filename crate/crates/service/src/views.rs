use std::collections::HashMap;

use irp_core::{Archive, Instance, NormalizedPoint, ObjectiveVector, Result, SearchConfig, SearchStats, Solution};
use serde::{Deserialize, Serialize};

use crate::store::{RunHandle, RunSnapshot, RunState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ArchiveRow {
    /// Dotted frequency key, also the solution id.
    pub id: String,
    pub inventory: f64,
    pub distance: f64,
    pub frequencies: Vec<u32>,
}

pub fn archive_rows(arch: &Archive) -> Vec<ArchiveRow> {
    arch.iter()
        .map(|e| ArchiveRow {
            id: e.payload.key(),
            inventory: e.objectives.inventory,
            distance: e.objectives.distance,
            frequencies: e.payload.as_slice().to_vec(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunView {
    pub id: String,
    pub instance_id: String,
    pub state: RunState,
    pub stats: SearchStats,
    pub config: SearchConfig,
    pub reference_points: Vec<NormalizedPoint>,
    pub archive: Vec<ArchiveRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunView {
    pub fn new(handle: &RunHandle, snap: &RunSnapshot) -> Self {
        Self {
            id: handle.id.clone(),
            instance_id: handle.instance_id.clone(),
            state: snap.state,
            stats: snap.stats,
            config: snap.config.clone(),
            reference_points: snap.reference_points.clone(),
            archive: archive_rows(&snap.archive),
            error: snap.error.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StopView {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub load: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RouteView {
    pub stops: Vec<StopView>,
    pub load: i64,
    pub length: f64,
    /// Depot, stops in visiting order, depot.
    pub path: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CustomerView {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub storage_cap: i64,
    pub demand: i64,
    pub delivery: i64,
    /// Stock level at the end of the period.
    pub level: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionView {
    pub id: String,
    pub objectives: ObjectiveVector,
    pub frequencies: Vec<u32>,
    /// 1-based.
    pub period: usize,
    pub horizon: usize,
    pub routes: Vec<RouteView>,
    pub vehicles_used: usize,
    pub period_distance: f64,
    pub customers: Vec<CustomerView>,
    /// Total stock per period, first period first.
    pub inventory_series: Vec<i64>,
}

impl SolutionView {
    /// View of `solution` for 1-based `period`.
    pub fn new(inst: &Instance, solution: &Solution, period: usize) -> Result<Self> {
        if !(1..=inst.horizon).contains(&period) {
            return Err(irp_core::Error::OutOfRange { what: "period", index: period, len: inst.horizon + 1 });
        }
        let t = period - 1;
        let traj = &solution.trajectory;
        let index: HashMap<u32, usize> = inst.customers.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        let routing = &solution.period_routes[t];
        let depot = [inst.depot.x, inst.depot.y];
        let routes = routing
            .routes
            .iter()
            .map(|r| {
                let stops: Vec<StopView> = r
                    .stops
                    .iter()
                    .map(|id| {
                        let i = index[id];
                        let c = &inst.customers[i];
                        StopView { id: c.id, x: c.x, y: c.y, load: traj.deliveries[i][t] }
                    })
                    .collect();
                let mut path = vec![depot];
                path.extend(stops.iter().map(|s| [s.x, s.y]));
                path.push(depot);
                RouteView { stops, load: r.load, length: r.length, path }
            })
            .collect();
        let customers = inst
            .customers
            .iter()
            .enumerate()
            .map(|(i, c)| CustomerView {
                id: c.id,
                x: c.x,
                y: c.y,
                storage_cap: c.storage_cap,
                demand: c.demands[t],
                delivery: traj.deliveries[i][t],
                level: traj.levels[i][t],
            })
            .collect();
        Ok(Self {
            id: solution.freqs.key(),
            objectives: solution.objectives,
            frequencies: solution.freqs.as_slice().to_vec(),
            period,
            horizon: inst.horizon,
            routes,
            vehicles_used: routing.vehicles_used(),
            period_distance: routing.total_distance,
            customers,
            inventory_series: traj.inventory_series(),
        })
    }
}
