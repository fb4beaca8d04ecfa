//! Reproducible workloads shared by the benchmarks.

use irp_core::benchgen::{generate_instance, Geometry, ScenarioKind, ScenarioSpec};
use irp_core::{Instance, ObjectiveVector, Point, RoutingProblem, Stop};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random routing problem with `stops` customers in a 100×100 square and
/// loads in `1..=cap / 3`.
pub fn routing_problem(stops: usize, cap: i64, seed: u64) -> RoutingProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RoutingProblem {
        depot: Point::new(50.0, 50.0),
        vehicle_cap: cap,
        stops: (0..stops)
            .map(|k| Stop {
                id: k as u32 + 1,
                load: rng.random_range(1..=(cap / 3).max(1)),
                x: rng.random_range(0.0..100.0),
                y: rng.random_range(0.0..100.0),
            })
            .collect(),
    }
}

/// Generated instance with random geometry.
pub fn instance(customers: usize, horizon: usize, kind: ScenarioKind, seed: u64) -> Instance {
    let geo = Geometry::random(customers, seed, 100.0, (5, 15));
    let spec = ScenarioSpec { horizon, seed, ..ScenarioSpec::new(kind) };
    generate_instance(&geo, &spec, 60).expect("generated instance").instance
}

/// Random objective vectors on a 1000×1000 integer grid.
pub fn outcomes(count: usize, seed: u64) -> Vec<ObjectiveVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            ObjectiveVector::new(f64::from(rng.random_range(0..1000u32)), f64::from(rng.random_range(0..1000u32)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_are_valid_and_reproducible() {
        let p = routing_problem(30, 60, 1);
        p.check().unwrap();
        assert_eq!(p, routing_problem(30, 60, 1));
        let inst = instance(8, 20, ScenarioKind::Increasing, 2);
        inst.ensure_valid().unwrap();
        assert_eq!(outcomes(10, 3), outcomes(10, 3));
    }
}
