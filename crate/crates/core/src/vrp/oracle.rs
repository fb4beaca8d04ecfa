//! Exact solver for tiny problems, used as a test and enumeration oracle.
//!
//! Held-Karp gives the optimal closed tour for every subset of stops; a
//! subset DP then picks the cheapest partition into capacity-feasible routes.

use super::{RoutingProblem, RoutingSolution};
use crate::error::{Error, Result};

pub const ORACLE_MAX_STOPS: usize = 8;

pub fn brute_force_oracle(p: &RoutingProblem) -> Result<RoutingSolution> {
    p.check()?;
    let m = p.stops.len();
    if m > ORACLE_MAX_STOPS {
        return Err(Error::TooManyStops(m));
    }
    if m == 0 {
        return Ok(RoutingSolution::empty());
    }
    let dm = p.distance_matrix();
    let full = (1usize << m) - 1;

    // path[mask][last]: cheapest depot -> ... -> last visiting exactly mask
    let mut path = vec![vec![f64::INFINITY; m]; full + 1];
    let mut parent = vec![vec![usize::MAX; m]; full + 1];
    for k in 0..m {
        path[1 << k][k] = dm.get(0, k + 1);
    }
    for mask in 1..=full {
        for last in 0..m {
            let cost = path[mask][last];
            if mask & (1 << last) == 0 || !cost.is_finite() {
                continue;
            }
            for next in 0..m {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nm = mask | (1 << next);
                let c = cost + dm.get(last + 1, next + 1);
                if c < path[nm][next] {
                    path[nm][next] = c;
                    parent[nm][next] = last;
                }
            }
        }
    }

    let mut tour = vec![f64::INFINITY; full + 1];
    let mut tour_end = vec![usize::MAX; full + 1];
    let mut load = vec![0i64; full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        load[mask] = load[mask & (mask - 1)] + p.stops[low].load;
        if load[mask] > p.vehicle_cap {
            continue;
        }
        for (last, &to_last) in path[mask].iter().enumerate() {
            if mask & (1 << last) != 0 {
                let c = to_last + dm.get(last + 1, 0);
                if c < tour[mask] {
                    tour[mask] = c;
                    tour_end[mask] = last;
                }
            }
        }
    }

    let mut best = vec![f64::INFINITY; full + 1];
    let mut choice = vec![0usize; full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // enumerate subsets of `rest`, each joined with the lowest bit
        let mut sub = rest;
        loop {
            let route = sub | low;
            let c = tour[route] + best[mask ^ route];
            if c < best[mask] {
                best[mask] = c;
                choice[mask] = route;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }

    let mut routes = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let route = choice[mask];
        let mut order = Vec::new();
        let (mut m_, mut last) = (route, tour_end[route]);
        while last != usize::MAX {
            order.push(last + 1);
            let prev = parent[m_][last];
            m_ &= !(1 << last);
            last = prev;
        }
        order.reverse();
        routes.push(order);
        mask ^= route;
    }
    Ok(RoutingSolution::from_node_routes(p, &dm, &routes))
}
