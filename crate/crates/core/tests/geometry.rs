use holostab_core::geometry::{
    compose, error_loop, invert, max_displacement, out_of_plane_extent, parallelogram_loop,
    perturb_loop, polygon_areas, span_surface_with, ControlPoint, ErrorModel, Loop, MeshApex,
    Path, Plane, SmoothErrorModel,
};
use holostab_core::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

fn pt(c: &[f64]) -> ControlPoint {
    ControlPoint::new(c.to_vec()).unwrap()
}

/// Signed area by fan triangulation from the vertex average, oriented
/// from axis `rho` to axis `chi`.
fn fan_area(vertices: &[ControlPoint], plane: Plane) -> f64 {
    let n = vertices.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    for v in vertices {
        cx += v.coords()[plane.rho] / n as f64;
        cy += v.coords()[plane.chi] / n as f64;
    }
    let mut area = 0.0;
    for k in 0..n {
        let p = vertices[k].coords();
        let q = vertices[(k + 1) % n].coords();
        let (px, py) = (p[plane.rho] - cx, p[plane.chi] - cy);
        let (qx, qy) = (q[plane.rho] - cx, q[plane.chi] - cy);
        area += 0.5 * (px * qy - py * qx);
    }
    area
}

#[test]
fn wedge_orientation_example() {
    let p = Plane::from_label(2, 1, 2).unwrap();
    assert_eq!(p.wedge(&[1.0, 2.0], &[3.0, 4.0]), -2.0);
    assert_eq!(p.wedge(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
    assert!(Plane::from_label(1, 2, 2).is_err());
    assert!(Plane::from_label(3, 1, 2).is_err());
}

#[test]
fn plane_enumeration() {
    let labels: Vec<_> = Plane::all(3).iter().map(|p| p.label()).collect();
    assert_eq!(labels, vec![(2, 1), (3, 1), (3, 2)]);
}

#[test]
fn error_loop_of_nested_squares() {
    for eps in [0.1, 0.01, 0.001] {
        let o = ControlPoint::origin(2);
        let g0 = parallelogram_loop(&o, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        let g1 = parallelogram_loop(&o, &[1.0 + eps, 0.0], &[0.0, 1.0 + eps]).unwrap();
        let d = error_loop(&g0, &g1).unwrap();
        let s = d.signed_areas(&Plane::all(2))[0];
        assert!((s + (2.0 * eps + eps * eps)).abs() < 1e-14, "{s}");
    }
}

#[test]
fn error_loop_requires_shared_base() {
    let g0 = parallelogram_loop(&ControlPoint::origin(2), &[1.0, 0.0], &[0.0, 1.0]).unwrap();
    let g1 = parallelogram_loop(&pt(&[0.0, 1e-12]), &[1.0, 0.0], &[0.0, 1.0]).unwrap();
    assert!(matches!(error_loop(&g0, &g1), Err(Error::BasePointMismatch(..))));
}

#[test]
fn compose_requires_matching_endpoints() {
    let a = Path::from_coords(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let b = Path::from_coords(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    let c = Path::from_coords(&[vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
    let ab = compose(&a, &b).unwrap();
    assert_eq!(ab.vertices().len(), 3);
    assert!(matches!(compose(&a, &c), Err(Error::EndpointMismatch { .. })));
    assert_eq!(invert(&invert(&ab)), ab);
}

#[test]
fn degenerate_parallelogram() {
    let o = ControlPoint::origin(3);
    assert!(matches!(
        parallelogram_loop(&o, &[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]),
        Err(Error::DegenerateVectors)
    ));
    assert!(matches!(
        parallelogram_loop(&o, &[0.0; 3], &[1.0, 0.0, 0.0]),
        Err(Error::DegenerateVectors)
    ));
}

#[test]
fn circle_area_matches_polygon_formula() {
    let n = 100;
    let r = 0.5;
    let l = Loop::circle(&ControlPoint::origin(2), r, (0, 1), n).unwrap();
    let s = l.signed_areas(&Plane::all(2))[0];
    let expected = 0.5 * n as f64 * r * r * (2.0 * PI / n as f64).sin();
    assert!((s - expected).abs() < 1e-14);
    // reversed traversal flips the sign
    assert!((l.reversed().signed_areas(&Plane::all(2))[0] + expected).abs() < 1e-14);
}

#[test]
fn perturbation_keeps_base_point_and_scales() {
    let g = parallelogram_loop(&pt(&[0.2, 0.1]), &[0.5, 0.0], &[0.0, 0.5])
        .unwrap()
        .refined(128)
        .unwrap();
    let model = SmoothErrorModel::new(2, 3, 1.0, 4).unwrap();
    let bound = max_displacement(&model, 4096);
    let m = ErrorModel::Smooth(model);
    for eps in [1e-3, 1e-2, 0.1] {
        let p = perturb_loop(&g, &m, eps).unwrap();
        assert_eq!(p.base_point(), g.base_point());
        assert_eq!(p.vertices().last(), g.vertices().last());
        for (a, b) in p.vertices().iter().zip(g.vertices()) {
            assert!(a.distance(b) <= eps * bound * (1.0 + 1e-12));
        }
    }
}

#[test]
fn mesh_rejects_non_planar_loop() {
    let l = Loop::from_coords(&[
        vec![0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![1.0, 1.0, 0.1],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0],
    ])
    .unwrap();
    assert!(out_of_plane_extent(&l) > 1e-3);
    assert!(matches!(span_surface_with(&l, 2, MeshApex::Centroid), Err(Error::NonPlanar(_))));
}

#[test]
fn mesh_areas_in_tilted_plane() {
    let l = parallelogram_loop(&pt(&[0.1, 0.2, 0.3]), &[0.3, 0.1, -0.2], &[0.0, 0.2, 0.4]).unwrap();
    let planes = Plane::all(3);
    let expected: Vec<f64> = planes.iter().map(|p| fan_area(&l.vertices()[..4], *p)).collect();
    for apex in [MeshApex::BasePoint, MeshApex::Centroid] {
        for n in [1, 2, 5] {
            let m = span_surface_with(&l, n, apex).unwrap();
            for (a, e) in m.total_areas().iter().zip(&expected) {
                assert!((a - e).abs() < 1e-14, "{apex:?} {n}: {a} vs {e}");
            }
        }
    }
}

fn star_polygon() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(0.3f64..1.0, 5..24).prop_map(|radii| {
        let n = radii.len();
        radii
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let t = 2.0 * PI * k as f64 / n as f64;
                vec![0.2 + r * t.cos(), -0.1 + r * t.sin()]
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shoelace_matches_fan_oracle(coords in star_polygon()) {
        let pts: Vec<ControlPoint> = coords.iter().map(|c| pt(c)).collect();
        let planes = Plane::all(2);
        let a = polygon_areas(&pts, &planes)[0];
        let b = fan_area(&pts, planes[0]);
        prop_assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn plaquettes_partition_the_loop(coords in star_polygon(), n in 1usize..7) {
        let mut c = coords.clone();
        c.push(coords[0].clone());
        let l = Loop::from_coords(&c).unwrap();
        let total = l.signed_areas(&Plane::all(2))[0];
        for apex in [MeshApex::BasePoint, MeshApex::Centroid] {
            let m = span_surface_with(&l, n, apex).unwrap();
            prop_assert_eq!(m.plaquettes().len(), n * n);
            prop_assert!((m.total_areas()[0] - total).abs() < 1e-13);
            prop_assert_eq!(m.ray(0).last().unwrap(), l.base_point());
        }
    }

    #[test]
    fn compose_with_inverse_is_closed(coords in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2..8)) {
        let p = match Path::from_coords(&coords) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        let q = compose(&p, &invert(&p)).unwrap();
        prop_assert!(Loop::from_path(q).is_ok());
    }

    #[test]
    fn contraction_scales_areas(coords in star_polygon(), f in 0.01f64..2.0) {
        let mut c = coords.clone();
        c.push(coords[0].clone());
        let l = Loop::from_coords(&c).unwrap();
        let a = l.signed_areas(&Plane::all(2))[0];
        let s = l.contracted(f).unwrap().signed_areas(&Plane::all(2))[0];
        prop_assert!((s - f * f * a).abs() < 1e-12);
    }
}
