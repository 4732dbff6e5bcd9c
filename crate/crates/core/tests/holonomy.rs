use holostab_core::connection::{
    AffineConnection, ConjugatedConnection, ConstantConnection, FourierConnection,
    PureGaugeConnection,
};
use holostab_core::fidelity::fit_slope;
use holostab_core::geometry::{
    compose, invert, parallelogram_loop, span_surface_with, ControlPoint, Loop, MeshApex, Path,
};
use holostab_core::holonomy::{
    convergence_sequence, holonomy, stokes_residual_with, surface_ordered_holonomy, transporter,
    IntegratorConfig, PlaquetteRule,
};
use holostab_core::linalg::{
    c, frobenius_distance, identity, pauli_x, pauli_y, random_matrix, unitarity_defect, CMatrix,
};
use holostab_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn pt(c: &[f64]) -> ControlPoint {
    ControlPoint::new(c.to_vec()).unwrap()
}

/// `exp(iθσ) = cos θ I + i sin θ σ` for a Pauli matrix σ.
fn pauli_exp(theta: f64, sigma: &CMatrix) -> CMatrix {
    identity(2).scale(theta.cos()) + sigma * c(0.0, theta.sin())
}

#[test]
fn pauli_square_matches_edge_product() {
    let (x, y) = (pauli_x(), pauli_y());
    let exact = pauli_exp(-1.0, &y) * pauli_exp(-1.0, &x) * pauli_exp(1.0, &y) * pauli_exp(1.0, &x);
    let l = parallelogram_loop(&ControlPoint::origin(2), &[1.0, 0.0], &[0.0, 1.0]).unwrap();
    let g = holonomy(&ConstantConnection::pauli(), &l, &IntegratorConfig::default()).unwrap();
    let d = frobenius_distance(g.matrix(), &exact).unwrap();
    assert!(d < 1e-10, "{d:e}");
}

#[test]
fn pauli_rectangle_matches_edge_product() {
    let (x, y) = (pauli_x(), pauli_y());
    let (a, b) = (0.3, 1.7);
    let exact = pauli_exp(-b, &y) * pauli_exp(-a, &x) * pauli_exp(b, &y) * pauli_exp(a, &x);
    let l = parallelogram_loop(&pt(&[5.0, -3.0]), &[a, 0.0], &[0.0, b]).unwrap();
    let g = holonomy(&ConstantConnection::pauli(), &l, &IntegratorConfig::default()).unwrap();
    assert!(frobenius_distance(g.matrix(), &exact).unwrap() < 1e-10);
}

#[test]
fn midpoint_rule_converges_at_second_order() {
    let field = FourierConnection::new(2, 2, 3, 1.0, 7).unwrap();
    let l = parallelogram_loop(&pt(&[0.1, 0.2]), &[0.6, 0.1], &[-0.2, 0.5]).unwrap();
    let seq = convergence_sequence(&field, l.path(), 4, 5).unwrap();
    let x: Vec<f64> = seq.iter().map(|(s, _)| (*s as f64).ln()).collect();
    let y: Vec<f64> = seq.iter().map(|(_, d)| d.ln()).collect();
    let slope = fit_slope(&x, &y).unwrap();
    assert!((slope + 2.0).abs() < 0.2, "{slope} {seq:?}");
}

#[test]
fn abelian_circle_phase_is_enclosed_flux() {
    let r = 0.5;
    let field = AffineConnection::uniform_abelian(1.0);
    let l = Loop::circle(&ControlPoint::origin(2), r, (0, 1), 32768).unwrap();
    let cfg = IntegratorConfig {
        steps_per_segment: 2,
        ..IntegratorConfig::default()
    };
    let g = holonomy(&field, &l, &cfg).unwrap();
    let phase = g.matrix()[(0, 0)].arg();
    assert!((phase - PI * r * r).abs() < 1e-8, "{:e}", phase - PI * r * r);
}

#[test]
fn abelian_stokes_is_exact_at_every_resolution() {
    let field = AffineConnection::uniform_abelian(1.0);
    let l = Loop::circle(&pt(&[0.3, -0.1]), 0.5, (0, 1), 64).unwrap();
    let cfg = IntegratorConfig::default();
    for apex in [MeshApex::BasePoint, MeshApex::Centroid] {
        for n in [1, 2, 3, 8] {
            let r = stokes_residual_with(&field, &l, n, apex, &cfg).unwrap();
            assert!(r < 1e-10, "{apex:?} n={n}: {r:e}");
        }
    }
}

#[test]
fn non_abelian_stokes_converges() {
    let field = ConstantConnection::pauli();
    let l = parallelogram_loop(&ControlPoint::origin(2), &[0.2, 0.0], &[0.0, 0.2]).unwrap();
    let cfg = IntegratorConfig::default();
    let mut prev = f64::INFINITY;
    for n in [1, 2, 4, 8] {
        let refined = l.refined(4 * n).unwrap();
        let r = stokes_residual_with(&field, &refined, n, MeshApex::Centroid, &cfg).unwrap();
        assert!(r < prev, "n={n}: {r:e} !< {prev:e}");
        prev = r;
    }
    assert!(prev <= 1e-4);
}

#[test]
fn boundary_rule_reproduces_line_holonomy() {
    let field = FourierConnection::new(2, 2, 1, 1.0, 5).unwrap();
    let l = Loop::circle(&pt(&[0.2, 0.1]), 0.4, (0, 1), 12).unwrap();
    let cfg = IntegratorConfig::default();
    let line = holonomy(&field, &l, &cfg).unwrap();
    for apex in [MeshApex::BasePoint, MeshApex::Centroid] {
        let mesh = span_surface_with(&l, 3, apex).unwrap();
        let s = surface_ordered_holonomy(&field, &mesh, PlaquetteRule::BoundaryLoop, &cfg).unwrap();
        assert!(frobenius_distance(line.matrix(), s.matrix()).unwrap() < 1e-8);
    }
}

fn random_loop(rng: &mut ChaCha8Rng, dim: usize) -> Loop {
    let n = rng.random_range(3..7);
    let mut pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect())
        .collect();
    pts.push(pts[0].clone());
    Loop::from_coords(&pts).unwrap()
}

#[test]
fn pure_gauge_loops_are_trivial() {
    let field = PureGaugeConnection::new(2, 2, 1, 0.8, 17).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = IntegratorConfig::default();
    for _ in 0..6 {
        let l = random_loop(&mut rng, 2);
        let g = holonomy(&field, &l, &cfg).unwrap();
        assert!(frobenius_distance(g.matrix(), &identity(2)).unwrap() <= 1e-8);
    }
}

#[test]
fn pure_gauge_open_path_is_gauge_ratio() {
    let field = PureGaugeConnection::new(2, 2, 1, 0.8, 17).unwrap();
    let p = Path::from_coords(&[vec![0.1, 0.2], vec![0.5, -0.3], vec![0.9, 0.4]]).unwrap();
    let t = transporter(&field, &p, &IntegratorConfig::default()).unwrap();
    let va = field.gauge(p.start());
    let vb = field.gauge(p.end());
    let candidates = [&vb * va.adjoint(), vb.adjoint() * &va];
    let best = candidates
        .iter()
        .map(|m| frobenius_distance(t.matrix(), m).unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-8, "{best:e}");
}

#[test]
fn composition_and_inversion() {
    let field = FourierConnection::new(3, 2, 1, 1.0, 8).unwrap();
    let cfg = IntegratorConfig::default();
    let p = Path::from_coords(&[vec![0.0, 0.0, 0.0], vec![0.3, 0.1, -0.2], vec![0.5, 0.5, 0.1]]).unwrap();
    let q = Path::from_coords(&[vec![0.5, 0.5, 0.1], vec![-0.2, 0.4, 0.3]]).unwrap();
    let tp = transporter(&field, &p, &cfg).unwrap();
    let tq = transporter(&field, &q, &cfg).unwrap();
    let tpq = transporter(&field, &compose(&p, &q).unwrap(), &cfg).unwrap();
    assert!(frobenius_distance(tpq.matrix(), &(tq.matrix() * tp.matrix())).unwrap() < 1e-9);
    let tinv = transporter(&field, &invert(&p), &cfg).unwrap();
    assert!(frobenius_distance(tinv.matrix(), &tp.matrix().adjoint()).unwrap() < 1e-9);
    assert!(unitarity_defect(tpq.matrix()) < 1e-12);
}

#[test]
fn rebasing_conjugates_holonomy() {
    let field = FourierConnection::new(2, 2, 1, 1.0, 2).unwrap();
    let cfg = IntegratorConfig::default();
    let l = Loop::circle(&pt(&[0.0, 0.0]), 0.3, (0, 1), 32).unwrap();
    let tail = Path::from_coords(&[vec![-0.4, 0.2], l.base_point().coords().to_vec()]).unwrap();
    let lasso = compose(&compose(&tail, l.path()).unwrap(), &invert(&tail)).unwrap();
    let g = holonomy(&field, &l, &cfg).unwrap();
    let gl = transporter(&field, &lasso, &cfg).unwrap();
    let t = transporter(&field, &tail, &cfg).unwrap();
    let expected = t.matrix().adjoint() * g.matrix() * t.matrix();
    assert!(frobenius_distance(gl.matrix(), &expected).unwrap() < 1e-9);
}

#[test]
fn exhausted_refinement_reports_convergence_failure() {
    let field = FourierConnection::new(2, 2, 3, 1.0, 7).unwrap();
    let l = parallelogram_loop(&ControlPoint::origin(2), &[1.0, 0.0], &[0.0, 1.0]).unwrap();
    let cfg = IntegratorConfig {
        steps_per_segment: 1,
        refinement: 2,
        tolerance: 1e-14,
        unitary_projection: true,
    };
    match holonomy(&field, &l, &cfg) {
        Err(Error::Convergence { distance, .. }) => assert!(distance > 1e-14),
        other => panic!("expected convergence failure, got {other:?}"),
    }
    let bad = IntegratorConfig {
        steps_per_segment: 0,
        ..IntegratorConfig::default()
    };
    assert!(holonomy(&field, &l, &bad).is_err());
}

#[test]
fn dimension_mismatch_is_rejected() {
    let l = parallelogram_loop(&ControlPoint::origin(3), &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
    assert!(matches!(
        holonomy(&ConstantConnection::pauli(), &l, &IntegratorConfig::default()),
        Err(Error::DimensionMismatch { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn holonomy_is_gauge_covariant(seed in 0u64..1000, shift in -0.5f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_matrix(2, &mut rng).qr().q();
        let inner = FourierConnection::new(2, 2, 1, 1.0, seed).unwrap();
        let l = parallelogram_loop(&pt(&[shift, 0.1]), &[0.4, 0.1], &[0.0, 0.3]).unwrap();
        let cfg = IntegratorConfig::default();
        let g = holonomy(&inner, &l, &cfg).unwrap();
        let h = holonomy(&ConjugatedConnection::new(inner, w.clone()).unwrap(), &l, &cfg).unwrap();
        let expected = &w * g.matrix() * w.adjoint();
        prop_assert!(frobenius_distance(h.matrix(), &expected).unwrap() < 1e-9);
    }

    #[test]
    fn reversed_loop_gives_inverse(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = FourierConnection::new(2, 3, 1, 1.0, seed).unwrap();
        let l = random_loop(&mut rng, 2);
        let cfg = IntegratorConfig::default();
        let g = holonomy(&field, &l, &cfg).unwrap();
        let h = holonomy(&field, &l.reversed(), &cfg).unwrap();
        prop_assert!(frobenius_distance(&(h.matrix() * g.matrix()), &identity(3)).unwrap() < 1e-9);
    }
}
