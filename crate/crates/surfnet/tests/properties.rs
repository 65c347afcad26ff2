//! Property tests for the pipeline invariants.

mod common;

use std::collections::BTreeSet;

use chrono::DateTime;
use common::{analytic_grid, gaussian};
use proptest::prelude::*;

use surfnet::critical_lines::{extract_critical_lines, LineKind, Terminus};
use surfnet::critical_points::{classify_vertex, extract_critical_points, CriticalKind, HeightKey};
use surfnet::density::DensityGrid;
use surfnet::indices::compute_indices;
use surfnet::ingest::{
    extract_od_points, filter_noise, OdPoint, Projection, RegionSpec, TrajectoryRecord,
};
use surfnet::mesh::triangulate;
use surfnet::surface_network::{build_surface_network, filter_significant_peaks};

fn record(car: u8, ts: i64, x: f64, y: f64, load: bool) -> TrajectoryRecord {
    TrajectoryRecord {
        car_id: format!("car{car}"),
        time: DateTime::from_timestamp(ts, 0).unwrap(),
        lon: x,
        lat: y,
        speed: None,
        direction: None,
        is_load: load,
    }
}

/// Car streams that start and end unloaded, like a real shift. One car per
/// stream, so (car_id, time) keys are unique and sorting fully normalizes.
fn fleet_strategy() -> impl Strategy<Value = Vec<TrajectoryRecord>> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), 0..20), 1..5).prop_map(|streams| {
        let mut records = Vec::new();
        for (car, loads) in streams.into_iter().enumerate() {
            let car = car as u8;
            let mut push = |i: usize, load: bool| {
                let ts = 1_000_000 + i as i64 * 60;
                records.push(record(car, ts, i as f64, car as f64, load));
            };
            push(0, false);
            for (i, load) in loads.iter().enumerate() {
                push(i + 1, *load);
            }
            push(loads.len() + 1, false);
        }
        records
    })
}

fn permute<T>(items: &mut [T], seed: u64) {
    let mut state = seed | 1;
    for i in (1..items.len()).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        items.swap(i, (state >> 33) as usize % (i + 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trip_conservation_and_compression(records in fleet_strategy()) {
        let od = extract_od_points(&records, &Projection::PreProjected);
        // Exactly one origin and one destination per trip.
        let trips: BTreeSet<(&str, u32)> = od
            .points
            .iter()
            .map(|p| (p.car_id.as_str(), p.trip_id))
            .collect();
        prop_assert_eq!(od.points.len(), 2 * trips.len());
        for &(car, trip) in &trips {
            let members: Vec<&OdPoint> = od
                .points
                .iter()
                .filter(|p| p.car_id == car && p.trip_id == trip)
                .collect();
            prop_assert_eq!(members.len(), 2);
            prop_assert!(members[0].time <= members[1].time);
        }
        // Streams bounded by unloaded fixes can never expand.
        prop_assert!(od.points.len() <= records.len());
    }

    #[test]
    fn extraction_is_input_order_independent(records in fleet_strategy(), seed in any::<u64>()) {
        let baseline = extract_od_points(&records, &Projection::PreProjected);
        let mut shuffled = records.clone();
        permute(&mut shuffled, seed);
        let reshuffled = extract_od_points(&shuffled, &Projection::PreProjected);
        prop_assert_eq!(baseline.points, reshuffled.points);
    }

    #[test]
    fn shrinking_the_region_never_keeps_more_trips(
        trips in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0, 0.0f64..100.0, 0.0f64..100.0), 0..40),
        shrink in 0.1f64..1.0,
    ) {
        let mut points = Vec::new();
        for (i, &(ox, oy, dx, dy)) in trips.iter().enumerate() {
            let time = DateTime::from_timestamp(1_000_000, 0).unwrap();
            points.push(OdPoint {
                car_id: "c".into(),
                kind: surfnet::ingest::OdKind::Origin,
                x: ox, y: oy, time, trip_id: i as u32,
            });
            points.push(OdPoint {
                car_id: "c".into(),
                kind: surfnet::ingest::OdKind::Destination,
                x: dx, y: dy, time, trip_id: i as u32,
            });
        }
        let square = |half: f64| RegionSpec {
            name: "s".into(),
            boundary: vec![
                (50.0 - half, 50.0 - half),
                (50.0 + half, 50.0 - half),
                (50.0 + half, 50.0 + half),
                (50.0 - half, 50.0 + half),
            ],
        };
        let large = filter_noise(&points, &square(40.0)).unwrap();
        let small = filter_noise(&points, &square(40.0 * shrink)).unwrap();
        prop_assert!(small.kept.len() <= large.kept.len());
    }

    #[test]
    fn mesh_euler_characteristic_is_one(ncols in 2usize..24, nrows in 2usize..24) {
        let grid = DensityGrid {
            ncols,
            nrows,
            cell_size_m: 1.0,
            origin: (0.0, 0.0),
            values: (0..ncols * nrows).map(|i| (i % 7) as f64).collect(),
        };
        let mesh = triangulate(&grid).unwrap();
        prop_assert_eq!(mesh.euler_characteristic(), 1);
    }
}

fn bumps_strategy() -> impl Strategy<Value = DensityGrid> {
    prop::collection::vec(
        (-6.0f64..6.0, -4.0f64..4.0, 0.8f64..2.5, 0.3f64..1.5),
        1..5,
    )
    .prop_map(|bumps| {
        analytic_grid(19, 15, move |x, y| {
            bumps
                .iter()
                .map(|&(cx, cy, sigma, amp)| gaussian(x, y, cx, cy, sigma, amp))
                .sum::<f64>()
                + 1e-7 * x
                + 3e-8 * y
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classification_partitions_and_sign_changes_are_even(grid in bumps_strategy()) {
        let mesh = triangulate(&grid).unwrap();
        let set = extract_critical_points(&mesh).unwrap();
        let mut criticals = 0usize;
        let mut interior = 0usize;
        for row in 1..mesh.nrows() - 1 {
            for col in 1..mesh.ncols() - 1 {
                interior += 1;
                let c = classify_vertex(&mesh, mesh.vertex_id(col, row)).unwrap();
                prop_assert_eq!(c.sign_changes % 2, 0);
                if c.kind != CriticalKind::Regular {
                    criticals += 1;
                }
            }
        }
        let pass_vertices: BTreeSet<u32> = set.passes.iter().map(|p| p.vertex).collect();
        prop_assert_eq!(criticals, set.peaks.len() + set.pits.len() + pass_vertices.len());
        prop_assert!(criticals <= interior);
    }

    #[test]
    fn line_invariants_hold_on_random_surfaces(grid in bumps_strategy()) {
        let mesh = triangulate(&grid).unwrap();
        let set = extract_critical_points(&mesh).unwrap();
        let lines = extract_critical_lines(&mesh, &set).unwrap();

        prop_assert_eq!(lines.ridgelines.len(), 2 * set.pass_count());
        prop_assert_eq!(lines.courselines.len(), 2 * set.pass_count());

        let peaks: BTreeSet<u32> = set.peaks.iter().copied().collect();
        let pits: BTreeSet<u32> = set.pits.iter().copied().collect();
        for line in lines.ridgelines.iter().chain(lines.courselines.iter()) {
            prop_assert!(line.path.len() <= mesh.vertex_count());
            for w in line.path.windows(2) {
                let a = HeightKey::of(&mesh, w[0]);
                let b = HeightKey::of(&mesh, w[1]);
                match line.kind {
                    LineKind::Ridgeline => prop_assert!(b > a),
                    LineKind::Courseline => prop_assert!(b < a),
                }
            }
            match (line.complete, line.kind, line.terminus) {
                (true, LineKind::Ridgeline, Terminus::Peak(p)) => prop_assert!(peaks.contains(&p)),
                (true, LineKind::Courseline, Terminus::Pit(p)) => prop_assert!(pits.contains(&p)),
                (false, _, _) => {}
                other => prop_assert!(false, "complete line with wrong terminus: {:?}", other),
            }
        }
    }

    #[test]
    fn network_edges_are_even_and_mu_nonnegative(grid in bumps_strategy()) {
        let mesh = triangulate(&grid).unwrap();
        let set = extract_critical_points(&mesh).unwrap();
        let lines = extract_critical_lines(&mesh, &set).unwrap();
        let extent = surfnet::density::Extent {
            min_x: grid.origin.0,
            min_y: grid.origin.1,
            max_x: grid.origin.0 + grid.ncols as f64,
            max_y: grid.origin.1 + grid.nrows as f64,
        };
        let significant = filter_significant_peaks(&mesh, &set, &lines.ridgelines, 0.10).unwrap();
        let network = build_surface_network(significant.peaks, &lines.ridgelines, &extent).unwrap();
        prop_assert_eq!(network.e() % 2, 0);
        prop_assert_eq!(network.e(), 2 * network.pass_nodes.len());
        let indices = compute_indices(&network).unwrap();
        prop_assert!(indices.mu >= 0);
        if network.v() >= 1 {
            prop_assert!(network.p() >= 1);
        }
    }

    #[test]
    fn raising_the_threshold_never_keeps_more_peaks(
        grid in bumps_strategy(),
        t1 in 0.0f64..0.5,
        dt in 0.0f64..0.4,
    ) {
        let mesh = triangulate(&grid).unwrap();
        let set = extract_critical_points(&mesh).unwrap();
        let lines = extract_critical_lines(&mesh, &set).unwrap();
        let low = filter_significant_peaks(&mesh, &set, &lines.ridgelines, t1).unwrap();
        let high = filter_significant_peaks(&mesh, &set, &lines.ridgelines, t1 + dt).unwrap();
        prop_assert!(high.peaks.len() <= low.peaks.len());
        let low_set: BTreeSet<u32> = low.peaks.iter().map(|p| p.vertex).collect();
        for peak in &high.peaks {
            prop_assert!(low_set.contains(&peak.vertex));
        }
    }
}
