use super::*;
use crate::energy::{group_samples, EnergyParams};
use crate::depth::SparseDepth;
use crate::geometry::{plane_depth_at, PixelDepth};

fn grid_graph(w: usize, h: usize, cell: usize) -> SuperpixelGraph {
    let cols = w.div_ceil(cell);
    let labels = (0..w * h)
        .map(|p| {
            let (u, v) = (p % w, p / w);
            ((v / cell) * cols + u / cell) as u32
        })
        .collect();
    SuperpixelGraph::from_labels(w, h, labels).unwrap()
}

fn k() -> CameraIntrinsics<f64> {
    CameraIntrinsics::new(60.0, 24.0, -6.0).unwrap()
}

/// Road plane y = 1.5 (camera 1.5 m above it) under `k()`.
fn road() -> Plane<f64> {
    Plane::new([0.0, 1.0, 0.0], -1.5).unwrap()
}

#[test]
fn planar_slots_follow_layout() {
    let g = grid_graph(12, 8, 4);
    let inc: Vec<Plane<f64>> = (0..g.len()).map(|i| Plane::front_parallel(5.0 + i as f64)).collect();
    let set = sample_particles_planar(&inc, &g, [0.02, 0.02, 0.02, 0.2], 7, 10);
    assert_eq!(set.len(), g.len());
    for i in 0..g.len() {
        assert_eq!(set.planes[i].len(), 10);
        assert_eq!(set.planes[i][0], inc[i]);
        let nbrs = g.neighbors(i);
        for s in 0..4 {
            assert_eq!(set.planes[i][6 + s], inc[nbrs[s % nbrs.len()]]);
        }
    }
    assert_eq!(set, sample_particles_planar(&inc, &g, [0.02, 0.02, 0.02, 0.2], 7, 10));
    assert_ne!(set, sample_particles_planar(&inc, &g, [0.02, 0.02, 0.02, 0.2], 8, 10));
}

#[test]
fn zero_noise_proposals_equal_incumbent() {
    let g = grid_graph(8, 4, 4);
    let inc = vec![Plane::<f64>::new([0.0, 0.6, 0.8], -4.0).unwrap(); g.len()];
    let set = sample_particles_planar(&inc, &g, [0.0; 4], 1, 10);
    for s in 1..=5 {
        assert_eq!(set.planes[0][s], inc[0]);
    }
    let tiny = sample_particles_planar(&inc, &g, [1e-12; 4], 1, 10);
    for s in 1..=5 {
        let (a, b) = (tiny.planes[0][s].coefficients(), inc[0].coefficients());
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
    }
}

#[test]
fn single_neighbor_fills_all_neighbor_slots() {
    let g = grid_graph(8, 4, 4);
    assert_eq!(g.neighbors(0), &[1]);
    let inc = vec![Plane::front_parallel(3.0), Plane::front_parallel(9.0)];
    let set = sample_particles_planar(&inc, &g, [0.02, 0.02, 0.02, 0.2], 3, 10);
    assert!(set.planes[0][6..].iter().all(|p| *p == inc[1]));
}

#[test]
fn cardboard_slots_keep_object_normal() {
    let g = grid_graph(48, 16, 8);
    let road = Plane::new([0.0, 0.98, -0.2], -1.5).unwrap();
    let n_obj = object_normal(&road).unwrap();
    let inc: Vec<Plane<f64>> = (0..g.len())
        .map(|i| if i % 3 == 0 { road } else { object_plane_at(&g, i, n_obj, 8.0, &k()).unwrap() })
        .collect();
    let flags: Vec<bool> = (0..g.len()).map(|i| i % 3 == 0).collect();
    let anchors = vec![8.0; g.len()];
    let set = sample_particles_cardboard(&inc, &flags, &road, &g, &k(), &anchors, 0.5, 11, 10).unwrap();
    for i in 0..g.len() {
        assert_eq!(set.planes[i].len(), 10);
        assert_eq!(set.planes[i][0], inc[i]);
        assert_eq!(set.planes[i][1], road);
        assert!(set.is_road[i][1]);
        for (p, &r) in set.planes[i].iter().zip(&set.is_road[i]) {
            if r {
                assert_eq!(*p, road);
            } else {
                assert!(dot(&p.normal(), &road.normal()).abs() < 1e-9);
            }
        }
    }
    let again = sample_particles_cardboard(&inc, &flags, &road, &g, &k(), &anchors, 0.5, 11, 10).unwrap();
    assert_eq!(set, again);
}

#[test]
fn cardboard_zero_noise_keeps_depth() {
    let g = grid_graph(16, 8, 8);
    let road = road();
    let n_obj = object_normal(&road).unwrap();
    let inc: Vec<Plane<f64>> = (0..g.len()).map(|i| object_plane_at(&g, i, n_obj, 6.0, &k()).unwrap()).collect();
    let flags = vec![false; g.len()];
    let set = sample_particles_cardboard(&inc, &flags, &road, &g, &k(), &[6.0, 6.0], 0.0, 2, 10).unwrap();
    for s in 2..6 {
        assert_eq!(set.planes[0][s], inc[0]);
    }
}

#[test]
fn cardboard_rejects_vertical_road_normal() {
    let g = grid_graph(8, 4, 4);
    let road = Plane::new([1.0, 0.0, 0.0], -1.0).unwrap();
    let inc = vec![road; g.len()];
    let r = sample_particles_cardboard(&inc, &[true, true], &road, &g, &k(), &[1.0, 1.0], 0.5, 0, 10);
    assert!(matches!(r, Err(InferenceError::Geometry(GeometryError::InvalidRoadPlane))));
}

fn two_plane_scene() -> (SuperpixelGraph, Vec<Vec<PixelDepth<f64>>>, Vec<Plane<f64>>) {
    let (w, h) = (48, 24);
    let g = grid_graph(w, h, 6);
    let left = Plane::new([0.3, 0.0, 1.0], -6.0).unwrap();
    let right = Plane::new([-0.2, 0.1, 1.0], -9.0).unwrap();
    let truth: Vec<Plane<f64>> = (0..g.len())
        .map(|i| if g.centroid(i).0 < w as f64 / 2.0 { left } else { right })
        .collect();
    let mut samples = Vec::new();
    for v in (1..h).step_by(3) {
        for u in (1..w).step_by(3) {
            let p = truth[g.label_at(u, v)];
            samples.push(PixelDepth::new(u as f64, v as f64, plane_depth_at(&p, u as f64, v as f64, &k()).unwrap()));
        }
    }
    let sparse = SparseDepth::new(w, h, samples).unwrap();
    (g.clone(), group_samples(&g, &sparse), truth)
}

#[test]
fn zero_iterations_return_init() {
    let (g, by_region, _) = two_plane_scene();
    let model = EnergyModel::new(&g, &by_region, &k(), EnergyParams::default()).unwrap();
    let init = vec![Plane::front_parallel(7.0); g.len()];
    let cfg = SolverConfig { n_iters: 0, ..SolverConfig::planar() };
    let out = pcbp_run(&g, &model, &k(), &cfg, InitState::Planar(init.clone())).unwrap();
    assert_eq!(out.planes, init);
    assert!(out.trace.is_empty());
}

#[test]
fn planar_run_reduces_energy_monotonically() {
    let (g, by_region, truth) = two_plane_scene();
    let model = EnergyModel::new(&g, &by_region, &k(), EnergyParams::default()).unwrap();
    let init = vec![Plane::front_parallel(7.0); g.len()];
    let cfg = SolverConfig { n_iters: 30, seed: 5, ..SolverConfig::planar() };
    let out = pcbp_run(&g, &model, &k(), &cfg, InitState::Planar(init)).unwrap();
    assert_eq!(out.trace.len(), 30);
    let mut prev = out.initial_total;
    for r in &out.trace {
        assert!(r.total <= prev);
        prev = r.total;
    }
    assert!(prev <= 0.1 * out.initial_total, "{prev} vs {}", out.initial_total);
    assert!(out.labeling.is_road.is_none());
    assert!(out.labeling.indices.iter().all(|&i| i < 10));
    let truth_e = model.evaluate(&truth).unwrap().total;
    assert!(prev <= 2.0 * truth_e + 1.0, "{prev} vs truth {truth_e}");

    let again = pcbp_run(&g, &model, &k(), &cfg, InitState::Planar(vec![Plane::front_parallel(7.0); g.len()])).unwrap();
    assert_eq!(out.planes, again.planes);
    assert_eq!(out.trace, again.trace);
}

#[test]
fn cardboard_run_separates_road_and_objects() {
    let (w, h) = (48, 24);
    let g = grid_graph(w, h, 6);
    let k = CameraIntrinsics::new(60.0, 24.0, -6.0).unwrap();
    let road = road();
    let n_obj = object_normal(&road).unwrap();
    // lower half road, upper half a wall at 12 m
    let wall = Plane::through_point(n_obj, crate::geometry::Point3::new(0.0, 0.0, 12.0)).unwrap();
    let depth_at = |u: usize, v: usize| {
        let r = plane_depth_at(&road, u as f64, v as f64, &k).ok();
        let o = plane_depth_at(&wall, u as f64, v as f64, &k).unwrap();
        match r {
            Some(d) if d < o => (d, true),
            _ => (o, false),
        }
    };
    let mut samples = Vec::new();
    for v in (0..h).step_by(2) {
        for u in (0..w).step_by(2) {
            samples.push(PixelDepth::new(u as f64, v as f64, depth_at(u, v).0));
        }
    }
    let sparse = SparseDepth::new(w, h, samples).unwrap();
    let by_region = group_samples(&g, &sparse);
    let model = EnergyModel::new(&g, &by_region, &k, EnergyParams::default()).unwrap();
    let init: Vec<Plane<f64>> = (0..g.len()).map(|i| object_plane_at(&g, i, n_obj, 8.0, &k).unwrap()).collect();
    let cfg = SolverConfig { seed: 3, ..SolverConfig::cardboard() };
    let out = pcbp_run(
        &g,
        &model,
        &k,
        &cfg,
        InitState::Cardboard { planes: init, is_road: vec![false; g.len()], road },
    )
    .unwrap();
    let mask = free_space_mask(&out.labeling, &g).unwrap();
    let mut agree = 0;
    for v in 0..h {
        for u in 0..w {
            agree += (mask[v * w + u] == depth_at(u, v).1) as usize;
        }
    }
    assert!(agree as f64 >= 0.85 * (w * h) as f64, "{agree}");
    for (p, &r) in out.planes.iter().zip(out.labeling.is_road.as_ref().unwrap()) {
        assert!(if r { *p == road } else { dot(&p.normal(), &road.normal()).abs() < 1e-9 });
    }
}

#[test]
fn render_front_parallel_is_constant() {
    let g = grid_graph(12, 8, 4);
    let state = vec![Plane::front_parallel(10.0); g.len()];
    let d = render_depth(&state, &g, &k(), None);
    assert!(d.raw().iter().all(|&x| x == 10.0));
}

#[test]
fn render_replaces_infeasible_pixels() {
    let g = grid_graph(8, 8, 8);
    // road plane: pixels above the horizon (v <= c_y) see no intersection
    let k = CameraIntrinsics::new(10.0, 4.0, 3.0).unwrap();
    let d = render_depth(&[road()], &g, &k, None);
    let row4 = d.get(0, 4).unwrap();
    assert_eq!(d.get(0, 0), d.get(0, 0));
    let mut feasible: Vec<f64> = (0..8 * 8)
        .filter_map(|p| plane_depth_at(&road(), (p % 8) as f64, (p / 8) as f64, &k).ok())
        .collect();
    let med = median_in_place(&mut feasible).unwrap();
    assert_eq!(d.get(3, 0), Some(med));
    assert!(row4 > 0.0);

    let fallback = DenseDepth::filled(8, 8, 42.0);
    let sky = Plane::new([0.0, 1.0, 0.0], 5.0).unwrap(); // y = -5: above camera
    let k2 = CameraIntrinsics::new(10.0, 4.0, -20.0).unwrap(); // every ray points down
    let d2 = render_depth(&[sky], &g, &k2, Some(&fallback));
    assert!(d2.raw().iter().all(|&x| x == 42.0));
}

#[test]
fn free_space_mask_modes() {
    let g = grid_graph(8, 4, 4);
    let all = Labeling { indices: vec![0, 0], is_road: Some(vec![true, true]) };
    assert!(free_space_mask(&all, &g).unwrap().iter().all(|&b| b));
    let none = Labeling { indices: vec![0, 0], is_road: Some(vec![false, false]) };
    assert!(free_space_mask(&none, &g).unwrap().iter().all(|&b| !b));
    let planar = Labeling { indices: vec![0, 0], is_road: None };
    assert!(matches!(free_space_mask(&planar, &g), Err(InferenceError::ModeMismatch)));
}

#[test]
fn config_validation() {
    assert!(SolverConfig::<f64>::planar().validate().is_ok());
    assert!(SolverConfig::<f32>::cardboard().validate().is_ok());
    assert!(SolverConfig::<f64> { n_particles: 1, ..SolverConfig::planar() }.validate().is_err());
    assert!(SolverConfig::<f64> { n_particles: 2, ..SolverConfig::cardboard() }.validate().is_err());
    assert!(SolverConfig::<f64> { decay: 0.0, ..SolverConfig::planar() }.validate().is_err());
    assert!(SolverConfig::<f64> { decay: 1.5, ..SolverConfig::planar() }.validate().is_err());
    assert!(SolverConfig::<f64> { sigma_plane: [0.0, 0.1, 0.1, 0.1], ..SolverConfig::planar() }.validate().is_err());
}

#[test]
fn trace_csv_format() {
    let trace = vec![TraceRow { iteration: 1, unary: 2.5, total: 4.0 }, TraceRow { iteration: 2, unary: 1.0, total: 3.25 }];
    let mut buf = Vec::new();
    write_trace_csv(&trace, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "iteration,unary_energy,total_energy\n1,2.5,4\n2,1,3.25\n");
}
