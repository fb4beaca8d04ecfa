//! Capacitated VRP subsolvers for a single period.
//!
//! Node indexing inside the algorithms: `0` is the depot, `k + 1` is
//! `problem.stops[k]`. Routes are exposed to callers as customer ids.

mod oracle;
mod rtr;
mod savings;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Point;

pub use oracle::{brute_force_oracle, ORACLE_MAX_STOPS};
pub use rtr::{rtr_improve, RtrConfig};
pub use savings::savings_construct;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub id: u32,
    pub load: i64,
    pub x: f64,
    pub y: f64,
}

impl Stop {
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoutingProblem {
    pub depot: Point,
    pub vehicle_cap: i64,
    pub stops: Vec<Stop>,
}

impl RoutingProblem {
    pub fn check(&self) -> Result<()> {
        let mut ids: Vec<u32> = self.stops.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::structure("duplicate stop id in routing problem"));
        }
        if let Some(s) = self.stops.iter().find(|s| s.load <= 0 || s.load > self.vehicle_cap) {
            return Err(Error::contract(format!(
                "stop {} has load {} outside 1..={}",
                s.id, s.load, self.vehicle_cap
            )));
        }
        Ok(())
    }

    pub fn distance_matrix(&self) -> DistanceMatrix {
        let mut nodes = Vec::with_capacity(self.stops.len() + 1);
        nodes.push(self.depot);
        nodes.extend(self.stops.iter().map(Stop::position));
        DistanceMatrix::new(&nodes)
    }

    fn index_of(&self, id: u32) -> Option<usize> {
        self.stops.iter().position(|s| s.id == id)
    }
}

/// Dense symmetric Euclidean distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(nodes: &[Point]) -> Self {
        let n = nodes.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = nodes[i].distance(&nodes[j]);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Closed tour depot → nodes → depot.
    pub fn tour_length(&self, nodes: &[usize]) -> f64 {
        let Some((&first, &last)) = nodes.first().zip(nodes.last()) else {
            return 0.0;
        };
        let inner: f64 = nodes.windows(2).map(|w| self.get(w[0], w[1])).sum();
        self.get(0, first) + inner + self.get(last, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub stops: Vec<u32>,
    pub load: i64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoutingSolution {
    pub routes: Vec<Route>,
    pub total_distance: f64,
}

impl RoutingSolution {
    pub fn empty() -> Self {
        Self { routes: Vec::new(), total_distance: 0.0 }
    }

    /// Builds a solution from routes given as node sequences (1-based stop
    /// nodes), recomputing loads and lengths.
    pub(crate) fn from_node_routes(p: &RoutingProblem, dm: &DistanceMatrix, routes: &[Vec<usize>]) -> Self {
        let routes: Vec<Route> = routes
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| Route {
                stops: r.iter().map(|&k| p.stops[k - 1].id).collect(),
                load: r.iter().map(|&k| p.stops[k - 1].load).sum(),
                length: dm.tour_length(r),
            })
            .collect();
        let total_distance = routes.iter().map(|r| r.length).sum();
        Self { routes, total_distance }
    }

    /// Routes as node sequences, failing if an id is unknown.
    pub(crate) fn to_node_routes(&self, p: &RoutingProblem) -> Result<Vec<Vec<usize>>> {
        self.routes
            .iter()
            .map(|r| {
                r.stops
                    .iter()
                    .map(|&id| {
                        p.index_of(id)
                            .map(|k| k + 1)
                            .ok_or_else(|| Error::contract(format!("route visits unknown stop {id}")))
                    })
                    .collect()
            })
            .collect()
    }

    /// Every stop served exactly once and every route within capacity.
    pub fn check_feasible(&self, p: &RoutingProblem) -> Result<()> {
        let mut seen = vec![false; p.stops.len()];
        for r in self.to_node_routes(p)? {
            let load: i64 = r.iter().map(|&k| p.stops[k - 1].load).sum();
            if load > p.vehicle_cap {
                return Err(Error::contract(format!(
                    "route load {load} exceeds capacity {}",
                    p.vehicle_cap
                )));
            }
            for k in r {
                if std::mem::replace(&mut seen[k - 1], true) {
                    return Err(Error::contract(format!("stop {} visited twice", p.stops[k - 1].id)));
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::contract(format!("stop {} not visited", p.stops[k].id)));
        }
        Ok(())
    }

    pub fn vehicles_used(&self) -> usize {
        self.routes.len()
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::problem;
    use super::*;

    #[test]
    fn tour_length_closed() {
        let p = problem(5, &[(0.0, 2.0, 1), (2.0, 0.0, 1)]);
        let dm = p.distance_matrix();
        let len = dm.tour_length(&[1, 2]);
        assert!((len - (4.0 + 8f64.sqrt())).abs() < 1e-12);
        assert_eq!(dm.tour_length(&[]), 0.0);
    }

    #[test]
    fn feasibility_checks() {
        let p = problem(2, &[(0.0, 2.0, 1), (2.0, 0.0, 2)]);
        let dm = p.distance_matrix();
        let good = RoutingSolution::from_node_routes(&p, &dm, &[vec![1], vec![2]]);
        assert!(good.check_feasible(&p).is_ok());
        let over = RoutingSolution::from_node_routes(&p, &dm, &[vec![1, 2]]);
        assert!(over.check_feasible(&p).is_err());
        let missing = RoutingSolution::from_node_routes(&p, &dm, &[vec![1]]);
        assert!(missing.check_feasible(&p).is_err());
        let twice = RoutingSolution::from_node_routes(&p, &dm, &[vec![1], vec![1], vec![2]]);
        assert!(twice.check_feasible(&p).is_err());
    }

    #[test]
    fn problem_check_rejects_bad_loads() {
        assert!(problem(2, &[(1.0, 1.0, 3)]).check().is_err());
        assert!(problem(2, &[(1.0, 1.0, 0)]).check().is_err());
        let mut p = problem(2, &[(1.0, 1.0, 1), (2.0, 1.0, 1)]);
        p.stops[1].id = 1;
        assert!(p.check().is_err());
    }
}
