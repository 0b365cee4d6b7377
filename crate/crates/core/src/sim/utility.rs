//! Mapping mission state onto utility rates.

use crate::model::{NetworkTopology, UtilityParams};
use crate::sim::scenario::Point;

pub const MIN_RATE: f64 = 1.0;
pub const MAX_RATE: f64 = 10.0;

/// Affine map of distance onto `[1, 10]`: 10 at zero distance, 1 at the map
/// diagonal. Distances outside `[0, map_diagonal]` are clamped.
pub fn distance_to_utility(distance: f64, map_diagonal: f64) -> f64 {
    debug_assert!(map_diagonal > 0.0);
    let fraction = (distance / map_diagonal).clamp(0.0, 1.0);
    MIN_RATE + (MAX_RATE - MIN_RATE) * (1.0 - fraction)
}

/// After a positive reading at `reached`, multiplies the `delta` column of
/// every still-active waypoint within `radius` of it by `boost` and clamps
/// the result to `[1, 10]`. A zero reading changes nothing.
pub fn importance_update(
    params: &mut UtilityParams,
    topology: &NetworkTopology,
    reached: usize,
    reading: i32,
    waypoints: &[Point],
    radius: f64,
    boost: f64,
) {
    if reading != 1 {
        return;
    }
    let origin = waypoints[reached];
    for y in topology.active_waypoints() {
        if y == reached || origin.distance(waypoints[y]) >= radius {
            continue;
        }
        for x in 0..topology.agent_count() {
            let boosted = (params.delta.get(x, y) * boost).clamp(MIN_RATE, MAX_RATE);
            params.delta.set(x, y, boosted);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Matrix;

    #[test]
    fn affine_endpoints() {
        assert_eq!(distance_to_utility(0.0, 100.0), 10.0);
        assert_eq!(distance_to_utility(100.0, 100.0), 1.0);
        assert_eq!(distance_to_utility(50.0, 100.0), 5.5);
        assert!(distance_to_utility(30.0, 100.0) > distance_to_utility(31.0, 100.0));
    }

    fn setup(delta: f64) -> (UtilityParams, NetworkTopology, Vec<Point>) {
        let params = UtilityParams::new(Matrix::filled(1, 3, 1.0), Matrix::filled(1, 3, delta));
        let mut topo = NetworkTopology::full(1, 3).unwrap();
        topo.remove_waypoint(0);
        let points = vec![Point(0.0, 0.0), Point(10.0, 0.0), Point(100.0, 0.0)];
        (params, topo, points)
    }

    #[test]
    fn negative_reading_is_a_no_op() {
        let (mut params, topo, points) = setup(4.0);
        let before = params.clone();
        importance_update(&mut params, &topo, 0, 0, &points, 50.0, 2.0);
        assert_eq!(params, before);
    }

    #[test]
    fn positive_reading_boosts_neighbours_only() {
        let (mut params, topo, points) = setup(4.0);
        importance_update(&mut params, &topo, 0, 1, &points, 50.0, 2.0);
        assert_eq!(params.delta.get(0, 1), 8.0);
        assert_eq!(params.delta.get(0, 2), 4.0);
    }

    #[test]
    fn boost_is_clamped() {
        let (mut params, topo, points) = setup(7.0);
        importance_update(&mut params, &topo, 0, 1, &points, 50.0, 2.0);
        assert_eq!(params.delta.get(0, 1), 10.0);
    }
}
