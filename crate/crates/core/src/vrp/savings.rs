//! Parallel Clarke-Wright savings construction.
//!
//! Every stop starts on its own out-and-back route. Pairs are processed by
//! decreasing saving `s(i, j) = d(0, i) + d(0, j) - d(i, j)`, equal savings
//! by ascending `(i, j)`, and two routes are joined when `i` and `j` sit at
//! route ends of different routes and the combined load fits.

use std::collections::VecDeque;

use super::{RoutingProblem, RoutingSolution};
use crate::error::Result;

pub fn savings_construct(p: &RoutingProblem) -> Result<RoutingSolution> {
    p.check()?;
    let m = p.stops.len();
    if m == 0 {
        return Ok(RoutingSolution::empty());
    }
    let dm = p.distance_matrix();

    let mut savings = Vec::with_capacity(m * (m - 1) / 2);
    for i in 1..=m {
        for j in (i + 1)..=m {
            let s = dm.get(0, i) + dm.get(0, j) - dm.get(i, j);
            if s > 0.0 {
                savings.push((s, i, j));
            }
        }
    }
    savings.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut routes: Vec<Option<VecDeque<usize>>> = (0..=m)
        .map(|k| (k > 0).then(|| VecDeque::from([k])))
        .collect();
    let mut loads: Vec<i64> = std::iter::once(0).chain(p.stops.iter().map(|s| s.load)).collect();
    // route slot holding each node
    let mut owner: Vec<usize> = (0..=m).collect();

    for (_, i, j) in savings {
        let (ri, rj) = (owner[i], owner[j]);
        if ri == rj || loads[ri] + loads[rj] > p.vehicle_cap {
            continue;
        }
        let (a, b) = (routes[ri].as_ref().unwrap(), routes[rj].as_ref().unwrap());
        let i_end = a.back() == Some(&i);
        let i_start = a.front() == Some(&i);
        let j_start = b.front() == Some(&j);
        let j_end = b.back() == Some(&j);
        if !(i_end || i_start) || !(j_start || j_end) {
            continue;
        }
        let mut a = routes[ri].take().unwrap();
        let mut b = routes[rj].take().unwrap();
        // orient so that i ends `a` and j starts `b`
        if !i_end {
            a.make_contiguous().reverse();
        }
        if !j_start {
            b.make_contiguous().reverse();
        }
        for &k in &b {
            owner[k] = ri;
        }
        a.extend(b);
        loads[ri] += loads[rj];
        loads[rj] = 0;
        routes[ri] = Some(a);
    }

    let node_routes: Vec<Vec<usize>> = routes.into_iter().flatten().map(Vec::from).collect();
    Ok(RoutingSolution::from_node_routes(p, &dm, &node_routes))
}
