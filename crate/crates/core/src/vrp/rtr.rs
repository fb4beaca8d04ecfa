//! Record-to-record travel improvement.
//!
//! Each outer loop runs an uphill phase, where any move keeping the cost
//! below `record + deviation` is accepted, followed by a downhill phase of
//! strictly improving moves until a local optimum is reached. The
//! deviation is `δ · record` and is refreshed whenever the record improves.
//! The search stops after a fixed number of outer loops without a new
//! record and returns the record.
//!
//! Moves are restricted to the nearest-neighbor lists of each stop:
//! intra-route two-opt and or-opt, one-point moves (relocation) and
//! two-point swaps within or between routes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DistanceMatrix, RoutingProblem, RoutingSolution};
use crate::error::Result;

const EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RtrConfig {
    /// δ: allowed deviation above the record, as a fraction of the record.
    pub deviation: f64,
    /// Outer loops without a new record before stopping.
    pub max_non_improving: usize,
    /// Size of each stop's nearest-neighbor list.
    pub neighbors: usize,
    /// Passes over all stops in each uphill phase.
    pub uphill_passes: usize,
}

impl Default for RtrConfig {
    fn default() -> Self {
        Self { deviation: 0.01, max_non_improving: 30, neighbors: 10, uphill_passes: 5 }
    }
}

#[derive(Debug, Clone, Copy)]
enum Move {
    /// Remove `node` and reinsert it before or after `anchor`.
    Relocate { node: usize, anchor: usize, after: bool },
    Swap { a: usize, b: usize },
    /// Reverse the stretch between two nodes of one route so they become adjacent.
    TwoOpt { a: usize, b: usize },
    /// Move `len` consecutive nodes starting at `head` behind `anchor`, same route.
    OrOpt { head: usize, len: usize, anchor: usize },
}

struct Change {
    parts: Vec<(usize, Vec<usize>, f64)>,
    delta: f64,
}

struct Tours<'a> {
    p: &'a RoutingProblem,
    dm: &'a DistanceMatrix,
    routes: Vec<Vec<usize>>,
    loads: Vec<i64>,
    lens: Vec<f64>,
    /// (route, index) of every stop node; index 0 unused.
    pos: Vec<(usize, usize)>,
}

impl<'a> Tours<'a> {
    fn new(p: &'a RoutingProblem, dm: &'a DistanceMatrix, routes: Vec<Vec<usize>>) -> Self {
        let mut t = Self { p, dm, routes, loads: Vec::new(), lens: Vec::new(), pos: Vec::new() };
        t.loads = t.routes.iter().map(|r| t.load_of(r)).collect();
        t.lens = t.routes.iter().map(|r| dm.tour_length(r)).collect();
        t.reindex();
        t
    }

    fn load_of(&self, r: &[usize]) -> i64 {
        r.iter().map(|&k| self.p.stops[k - 1].load).sum()
    }

    fn reindex(&mut self) {
        self.pos = vec![(usize::MAX, usize::MAX); self.p.stops.len() + 1];
        for (ri, r) in self.routes.iter().enumerate() {
            for (ix, &k) in r.iter().enumerate() {
                self.pos[k] = (ri, ix);
            }
        }
    }

    fn cost(&self) -> f64 {
        self.lens.iter().sum()
    }

    fn preview(&self, mv: Move) -> Option<Change> {
        let cap = self.p.vehicle_cap;
        let load = |k: usize| self.p.stops[k - 1].load;
        let parts: Vec<(usize, Vec<usize>)> = match mv {
            Move::Relocate { node, anchor, after } => {
                let (ru, iu) = self.pos[node];
                let (rv, _) = self.pos[anchor];
                if ru == rv {
                    let mut r = self.routes[ru].clone();
                    r.remove(iu);
                    let ia = r.iter().position(|&k| k == anchor)?;
                    r.insert(if after { ia + 1 } else { ia }, node);
                    if r == self.routes[ru] {
                        return None;
                    }
                    vec![(ru, r)]
                } else {
                    if self.loads[rv] + load(node) > cap {
                        return None;
                    }
                    let mut from = self.routes[ru].clone();
                    from.remove(iu);
                    let mut to = self.routes[rv].clone();
                    let ia = self.pos[anchor].1;
                    to.insert(if after { ia + 1 } else { ia }, node);
                    vec![(ru, from), (rv, to)]
                }
            }
            Move::Swap { a, b } => {
                let (ra, ia) = self.pos[a];
                let (rb, ib) = self.pos[b];
                if ra == rb {
                    let mut r = self.routes[ra].clone();
                    r.swap(ia, ib);
                    vec![(ra, r)]
                } else {
                    let diff = load(b) - load(a);
                    if self.loads[ra] + diff > cap || self.loads[rb] - diff > cap {
                        return None;
                    }
                    let mut x = self.routes[ra].clone();
                    let mut y = self.routes[rb].clone();
                    x[ia] = b;
                    y[ib] = a;
                    vec![(ra, x), (rb, y)]
                }
            }
            Move::TwoOpt { a, b } => {
                let (ra, ia) = self.pos[a];
                let (rb, ib) = self.pos[b];
                if ra != rb || ia.abs_diff(ib) < 2 {
                    return None;
                }
                let mut r = self.routes[ra].clone();
                if ia < ib {
                    r[ia + 1..=ib].reverse();
                } else {
                    r[ib..ia].reverse();
                }
                vec![(ra, r)]
            }
            Move::OrOpt { head, len, anchor } => {
                let (rh, ih) = self.pos[head];
                let (ra, _) = self.pos[anchor];
                let route = &self.routes[rh];
                if ra != rh || ih + len > route.len() {
                    return None;
                }
                let segment = &route[ih..ih + len];
                if segment.contains(&anchor) {
                    return None;
                }
                let mut r: Vec<usize> = route[..ih].iter().chain(&route[ih + len..]).copied().collect();
                let at = r.iter().position(|&k| k == anchor)? + 1;
                r.splice(at..at, segment.iter().copied());
                if r == *route {
                    return None;
                }
                vec![(rh, r)]
            }
        };
        let mut delta = 0.0;
        let parts = parts
            .into_iter()
            .map(|(ri, r)| {
                let len = self.dm.tour_length(&r);
                delta += len - self.lens[ri];
                (ri, r, len)
            })
            .collect();
        Some(Change { parts, delta })
    }

    fn apply(&mut self, change: Change) {
        for (ri, r, len) in change.parts {
            self.loads[ri] = self.load_of(&r);
            self.lens[ri] = len;
            self.routes[ri] = r;
        }
        if self.routes.iter().any(Vec::is_empty) {
            let keep: Vec<bool> = self.routes.iter().map(|r| !r.is_empty()).collect();
            let mut k = keep.iter();
            self.routes.retain(|_| *k.next().unwrap());
            let mut k = keep.iter();
            self.loads.retain(|_| *k.next().unwrap());
            let mut k = keep.iter();
            self.lens.retain(|_| *k.next().unwrap());
        }
        self.reindex();
    }

    fn best_move(&self, node: usize, neighbors: &[usize]) -> Option<Change> {
        let mut best: Option<Change> = None;
        let mut consider = |mv: Move| {
            if let Some(c) = self.preview(mv) {
                if best.as_ref().is_none_or(|b| c.delta < b.delta - EPS) {
                    best = Some(c);
                }
            }
        };
        for &v in neighbors {
            consider(Move::Relocate { node, anchor: v, after: true });
            consider(Move::Relocate { node, anchor: v, after: false });
            consider(Move::Swap { a: node, b: v });
            if self.pos[node].0 == self.pos[v].0 {
                consider(Move::TwoOpt { a: node, b: v });
                consider(Move::OrOpt { head: node, len: 2, anchor: v });
                consider(Move::OrOpt { head: node, len: 3, anchor: v });
            }
        }
        best
    }
}

/// Improves `start` by record-to-record travel and returns the best solution
/// seen, which is never longer than `start`.
pub fn rtr_improve(
    p: &RoutingProblem,
    start: &RoutingSolution,
    seed: u64,
    cfg: &RtrConfig,
) -> Result<RoutingSolution> {
    p.check()?;
    start.check_feasible(p)?;
    let dm = p.distance_matrix();
    let start_routes = start.to_node_routes(p)?;
    let start = RoutingSolution::from_node_routes(p, &dm, &start_routes);
    let m = p.stops.len();
    if m <= 1 {
        return Ok(start);
    }

    let neighbor_lists: Vec<Vec<usize>> = (0..=m)
        .map(|u| {
            if u == 0 {
                return Vec::new();
            }
            let mut others: Vec<usize> = (1..=m).filter(|&v| v != u).collect();
            others.sort_by(|&a, &b| dm.get(u, a).total_cmp(&dm.get(u, b)).then(a.cmp(&b)));
            others.truncate(cfg.neighbors.max(1));
            others
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tours = Tours::new(p, &dm, start_routes.into_iter().filter(|r| !r.is_empty()).collect());
    let mut record_cost = tours.cost();
    let mut record = tours.routes.clone();
    let mut order: Vec<usize> = (1..=m).collect();
    let mut stale = 0;

    while stale < cfg.max_non_improving {
        let before = record_cost;
        let threshold = record_cost * (1.0 + cfg.deviation);
        for _ in 0..cfg.uphill_passes {
            order.shuffle(&mut rng);
            for &u in &order {
                if let Some(c) = tours.best_move(u, &neighbor_lists[u]) {
                    if tours.cost() + c.delta < threshold {
                        tours.apply(c);
                        if tours.cost() < record_cost - EPS {
                            record_cost = tours.cost();
                            record = tours.routes.clone();
                        }
                    }
                }
            }
        }
        loop {
            let mut improved = false;
            for &u in &order {
                if let Some(c) = tours.best_move(u, &neighbor_lists[u]) {
                    if c.delta < -EPS {
                        tours.apply(c);
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if tours.cost() < record_cost - EPS {
            record_cost = tours.cost();
            record = tours.routes.clone();
        }
        if record_cost < before - EPS {
            stale = 0;
        } else {
            stale += 1;
        }
    }

    let best = RoutingSolution::from_node_routes(p, &dm, &record);
    if best.total_distance < start.total_distance {
        Ok(best)
    } else {
        Ok(start)
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::{problem, random_problem, rng};
    use super::super::{brute_force_oracle, savings_construct};
    use super::*;
    use rand::Rng;

    #[test]
    fn single_stop_returns_start() {
        let p = problem(5, &[(3.0, 4.0, 2)]);
        let start = savings_construct(&p).unwrap();
        let out = rtr_improve(&p, &start, 1, &RtrConfig::default()).unwrap();
        assert_eq!(out, start);
    }

    #[test]
    fn rejects_infeasible_start() {
        let p = problem(1, &[(0.0, 2.0, 1), (2.0, 0.0, 1)]);
        let dm = p.distance_matrix();
        let bad = RoutingSolution::from_node_routes(&p, &dm, &[vec![1, 2]]);
        assert!(rtr_improve(&p, &bad, 0, &RtrConfig::default()).is_err());
    }

    #[test]
    fn five_stop_single_route_reaches_tsp_optimum() {
        let mut r = rng(11);
        for case in 0..20 {
            let stops: Vec<_> = (0..5)
                .map(|_| (r.random_range(-20.0..20.0), r.random_range(-20.0..20.0), 1))
                .collect();
            let p = problem(5, &stops);
            let start = savings_construct(&p).unwrap();
            let out = rtr_improve(&p, &start, case, &RtrConfig::default()).unwrap();
            let opt = brute_force_oracle(&p).unwrap();
            assert!(
                (out.total_distance - opt.total_distance).abs() < 1e-9,
                "case {case}: {} vs {}",
                out.total_distance,
                opt.total_distance
            );
        }
    }

    #[test]
    fn optimal_start_is_kept() {
        let mut r = rng(3);
        for case in 0..20 {
            let p = random_problem(&mut r, 6);
            let opt = brute_force_oracle(&p).unwrap();
            let out = rtr_improve(&p, &opt, case, &RtrConfig::default()).unwrap();
            assert!((out.total_distance - opt.total_distance).abs() < 1e-9);
        }
    }

    #[test]
    fn improves_a_poor_start_and_stays_feasible() {
        let mut r = rng(5);
        for case in 0..30 {
            let p = random_problem(&mut r, 8);
            let dm = p.distance_matrix();
            // one stop per route
            let naive: Vec<Vec<usize>> = (1..=p.stops.len()).map(|k| vec![k]).collect();
            let start = RoutingSolution::from_node_routes(&p, &dm, &naive);
            let out = rtr_improve(&p, &start, case, &RtrConfig::default()).unwrap();
            out.check_feasible(&p).unwrap();
            assert!(out.total_distance <= start.total_distance);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let mut r = rng(9);
        let p = random_problem(&mut r, 8);
        let start = savings_construct(&p).unwrap();
        let a = rtr_improve(&p, &start, 42, &RtrConfig::default()).unwrap();
        let b = rtr_improve(&p, &start, 42, &RtrConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
