use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use uniformizer::energy::angle_sums;
use uniformizer::realize::{angle_error, cross_ratios, inverse_stereographic, RealizableKind};
use uniformizer::samples;
use uniformizer::{
    classify_realizable, layout_disk, make_delaunay, minimize_e_bar, polyhedron_from_layout, prescribe_cone_angles,
    two_sided_polygon, uniformize_sphere, uniformize_torus, ConeAngleTarget, DecoratedMetric, DelaunayMode, Error,
    PartialDecoration, Realization, RealizationKind, SolveOptions,
};

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn octahedron_metric() -> DecoratedMetric<f64> {
    samples::embedded_metric(samples::octahedron(), &samples::octahedron_points()).unwrap()
}

fn certify_polyhedron(r: &Realization<f64>) {
    assert_eq!(r.kind, RealizationKind::InscribedPolyhedron);
    for p in &r.positions {
        assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs() < 1e-9);
    }
    let d = &r.diagnostics;
    assert!(d.sphere_residual < 1e-9 && d.planarity < 1e-8 && d.convexity_margin >= -1e-8, "{d:?}");
    // independent convexity scan: every vertex lies on the inner side of every face plane
    for f in &r.faces {
        let [a, b, c] = [r.positions[f[0]], r.positions[f[1]], r.positions[f[2]]];
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        let nn = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        for p in &r.positions {
            let s = (n[0] * (p[0] - a[0]) + n[1] * (p[1] - a[1]) + n[2] * (p[2] - a[2])) / nn;
            assert!(s <= 1e-8, "vertex outside face plane by {s}");
        }
    }
}

#[test]
fn stereographic_convention() {
    assert_eq!(inverse_stereographic([0.0, 0.0]), [0.0, 0.0, -1.0]);
    let e = inverse_stereographic([1.0, 0.0]);
    assert!((e[0] - 1.0).abs() < 1e-15 && e[2].abs() < 1e-15);
    let far = inverse_stereographic([1e8, 0.0]);
    assert!((far[2] - 1.0).abs() < 1e-15);
}

#[test]
fn cross_ratios_are_moebius_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let pts: Vec<[f64; 2]> = (0..4).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let on_sphere = [0, 1, 2, 3].map(|k| inverse_stereographic(pts[k]));
        // z ↦ 1/z followed by a similarity
        let (s, tx, ty) = (rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let moved = [0, 1, 2, 3].map(|k| {
            let [x, y] = pts[k];
            let r2 = x * x + y * y;
            inverse_stereographic([s * x / r2 + tx, -s * y / r2 + ty])
        });
        let (a, b) = (cross_ratios(on_sphere), cross_ratios(moved));
        for k in 0..6 {
            assert!((a[k] - b[k]).abs() < 1e-9 * a[k].max(1.0));
        }
    }
}

#[test]
fn regular_tetrahedron() {
    let m = DecoratedMetric::from_lengths(samples::tetrahedron(), &[1.0; 6]).unwrap();
    let (report, r) = uniformize_sphere(&m, 0, &opts()).unwrap();
    assert!(report.kkt.pass);
    certify_polyhedron(&r);
    assert_eq!(r.positions.len(), 4);
    assert_eq!(r.positions[0], [0.0, 0.0, 1.0]);
    let p = [r.positions[0], r.positions[1], r.positions[2], r.positions[3]];
    // all six chords of a regular tetrahedron are equal, so every cross-ratio is 1
    assert!(cross_ratios(p).iter().all(|c| (c - 1.0).abs() < 1e-7), "{:?}", cross_ratios(p));
}

#[test]
fn single_triangle_layout() {
    let m = DecoratedMetric::from_lengths(samples::tetrahedron(), &[1.0; 6]).unwrap();
    let report = minimize_e_bar(&m, 0, &opts()).unwrap();
    let layout = layout_disk(&report.delaunay, 0).unwrap();
    let placed: Vec<usize> = (0..layout.corner.len()).filter(|&c| layout.corner[c].is_some()).collect();
    assert_eq!(placed.len(), 3);
    assert_eq!(layout.corner[placed[0]], Some([0.0, 0.0]));
    assert!(layout.seams.is_empty());
    assert!(layout.length_error < 1e-9);
}

#[test]
fn regular_octahedron() {
    let m = octahedron_metric();
    let (_, r) = uniformize_sphere(&m, 5, &opts()).unwrap();
    certify_polyhedron(&r);
    assert_eq!(r.positions.len(), 6);
    assert_eq!(r.faces.len(), 8);
    assert!(r.faces.iter().all(|f| f.len() == 3));
    assert!(r.diagnostics.length_error < 1e-9);
    // the ideal regular octahedron: opposite vertices are antipodal up to a Möbius map,
    // so the cross-ratio of two opposite pairs is the same for all three choices
    let q = |a: usize, b: usize, c: usize, d: usize| cross_ratios([r.positions[a], r.positions[b], r.positions[c], r.positions[d]]);
    let x = q(0, 2, 1, 3);
    let y = q(0, 4, 1, 5);
    for k in 0..6 {
        assert!((x[k] - y[k]).abs() < 1e-7);
    }
}

#[test]
fn realization_does_not_depend_on_the_vertex_at_infinity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..5 {
        let m = samples::random_surface::<f64, _>(&mut rng, 0, 8);
        let (_, a) = uniformize_sphere(&m, 0, &opts()).unwrap();
        let (_, b) = uniformize_sphere(&m, 5, &opts()).unwrap();
        assert_eq!(a.kind, b.kind);
        if a.kind != RealizationKind::InscribedPolyhedron {
            continue;
        }
        for quad in [[0, 1, 2, 3], [1, 4, 6, 7], [2, 3, 5, 7]] {
            let x = cross_ratios(quad.map(|v| a.positions[v]));
            let y = cross_ratios(quad.map(|v| b.positions[v]));
            for k in 0..6 {
                assert!((x[k] - y[k]).abs() < 1e-6 * x[k].max(1.0), "{x:?} vs {y:?}");
            }
        }
    }
}

#[test]
fn random_spheres_are_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.gen_range(5..25);
        let m = samples::random_surface::<f64, _>(&mut rng, 0, n);
        let vinf = rng.gen_range(0..n);
        let (report, r) = uniformize_sphere(&m, vinf, &opts()).unwrap();
        assert!(report.kkt.pass);
        if r.kind == RealizationKind::InscribedPolyhedron {
            certify_polyhedron(&r);
            let north = r.positions[vinf];
            assert!((north[2] - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn sphere3_is_a_two_sided_polygon() {
    let m = DecoratedMetric::new(samples::sphere3(), vec![0.0; 3]).unwrap();
    let (report, r) = uniformize_sphere(&m, 0, &opts()).unwrap();
    assert_eq!(r.kind, RealizationKind::TwoSidedPolygon);
    assert_eq!(r.positions.len(), 3);
    let [a, b, c]: [[f64; 3]; 3] = [r.positions[0], r.positions[1], r.positions[2]];
    let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
    assert!(det.abs() < 1e-12, "points not on a great circle");
    for p in [a, b, c] {
        assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs() < 1e-12);
    }
    assert_eq!(r.faces.len(), 2);
    let layout = layout_disk(&report.delaunay, 0);
    assert!(matches!(layout, Err(Error::WrongKind(_))));
}

#[test]
fn wrong_kinds_are_refused() {
    let s = DecoratedMetric::new(samples::sphere3(), vec![0.0; 3]).unwrap();
    let rs = minimize_e_bar(&s, 0, &opts()).unwrap();
    let o = octahedron_metric();
    let ro = minimize_e_bar(&o, 5, &opts()).unwrap();
    let layout = layout_disk(&ro.delaunay, 5).unwrap();
    assert!(matches!(polyhedron_from_layout(&layout, &rs.delaunay, 0), Err(Error::WrongKind(_))));
    assert!(matches!(two_sided_polygon(&ro.delaunay, 5), Err(Error::WrongKind(_))));
    assert_eq!(classify_realizable(&ro.delaunay, 5).unwrap(), RealizableKind::Polyhedral);
}

/// Adjusted Delaunay data of the octahedron with `v∞ = 5` and the horocycle at
/// the pole `4` shifted by `s`; returns it with the angle sum at the pole.
fn pole_data(s: f64) -> (uniformizer::Delaunay, f64) {
    let m = octahedron_metric();
    let mut u = vec![0.0; 6];
    u[4] = s;
    let d = make_delaunay(&m, &PartialDecoration::with_missing(&u, &[5]).unwrap(), DelaunayMode::Adjusted).unwrap();
    let mut full = u.clone();
    full[5] = 0.0;
    let theta = angle_sums(&d.metric.fiber_shift(&full).unwrap()).unwrap()[4];
    (d, theta)
}

#[test]
fn excess_interior_angle_is_not_realizable() {
    let target = TAU + 0.1;
    let (mut lo, mut hi) = (-3.0, 0.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if pole_data(mid).1 > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (d, theta) = pole_data(0.5 * (lo + hi));
    assert!((theta - target).abs() < 1e-9);
    match classify_realizable(&d, 5) {
        Err(Error::NotRealizable(msg)) => assert!(msg.contains("interior vertex 4"), "{msg}"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(layout_disk(&d, 5), Err(Error::LayoutInconsistent(_))));
}

#[test]
fn square_torus_modulus() {
    let r = uniformize_torus(&samples::square_torus::<f64>(), &opts()).unwrap();
    assert_eq!(r.kind, RealizationKind::FlatTorus);
    let t = r.torus.unwrap();
    assert!(t.tau[0].abs() < 1e-8 && (t.tau[1] - 1.0).abs() < 1e-8, "{:?}", t.tau);
    let [a, b] = t.basis;
    assert!((a[0] * b[1] - a[1] * b[0] - 1.0).abs() < 1e-12);
    assert!(t.lattice_residual < 1e-8);
}

#[test]
fn refined_torus_keeps_its_modulus() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // the midpoint of the diagonal is the common circumcenter of both
    // triangles, so the refinement stays Delaunay and keeps the flat metric
    let square = samples::square_torus::<f64>();
    let (t, _) = square.triangulation().split_edge(2).unwrap();
    let half = 2.0 * (0.5f64.sqrt()).ln();
    let mut lam = square.lambda().to_vec();
    lam[2] = half;
    lam.extend([half; 3]);
    let refined = DecoratedMetric::new(t, lam).unwrap();
    for _ in 0..5 {
        let u: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let tau = uniformize_torus(&refined.fiber_shift(&u).unwrap(), &opts()).unwrap().torus.unwrap().tau;
        assert!(tau[0].abs() < 1e-6 && (tau[1] - 1.0).abs() < 1e-6, "{tau:?}");
    }
}

#[test]
fn modulus_is_a_conformal_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let m = samples::random_surface::<f64, _>(&mut rng, 1, 5);
        let base = uniformize_torus(&m, &opts()).unwrap().torus.unwrap().tau;
        let u: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let other = uniformize_torus(&m.fiber_shift(&u).unwrap(), &opts()).unwrap().torus.unwrap().tau;
        assert!((base[0] - other[0]).abs() < 1e-8 && (base[1] - other[1]).abs() < 1e-8, "{base:?} vs {other:?}");
    }
}

#[test]
fn modulus_lies_in_the_fundamental_domain() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let m = samples::random_surface::<f64, _>(&mut rng, 1, 6);
        let r = uniformize_torus(&m, &opts()).unwrap();
        let t = r.torus.unwrap();
        let [x, y] = t.tau;
        assert!(y > 0.0 && x.abs() <= 0.5 + 1e-12 && x * x + y * y >= 1.0 - 1e-12, "{:?}", t.tau);
        assert!(t.lattice_residual < 1e-8);
        assert!(r.diagnostics.length_error < 1e-9);
    }
}

#[test]
fn torus_needs_genus_one() {
    let s = DecoratedMetric::new(samples::sphere3(), vec![0.0; 3]).unwrap();
    assert_eq!(uniformize_torus(&s, &opts()).unwrap_err(), Error::WrongGenus { expected: 1, got: 0 });
}

#[test]
fn flat_torus_as_cone_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m = samples::random_surface::<f64, _>(&mut rng, 1, 5);
    let th = ConeAngleTarget::flat(5);
    let r = prescribe_cone_angles(&m, &th, &opts()).unwrap();
    assert_eq!(r.kind, RealizationKind::ConeMetric);
    let cone = r.cone.unwrap();
    assert!(cone.theta_tilde.iter().all(|x| (x - TAU).abs() < 1e-8));
    assert!(angle_error(&cone.metric, &th).unwrap() < 1e-8);
}

#[test]
fn genus_two_with_one_cone_point() {
    let m = DecoratedMetric::new(samples::genus2(), vec![0.0; 9]).unwrap();
    let th = ConeAngleTarget::new(vec![6.0 * PI]).unwrap();
    let r = prescribe_cone_angles(&m, &th, &opts()).unwrap();
    let cone = r.cone.unwrap();
    assert!((cone.theta_tilde[0] - 6.0 * PI).abs() < 1e-8);
    assert_eq!(cone.lengths.len(), 9);
    let bad = ConeAngleTarget::new(vec![6.0 * PI + 0.1]).unwrap();
    assert!(matches!(prescribe_cone_angles(&m, &bad, &opts()), Err(Error::GaussBonnetViolated { .. })));
}

#[test]
fn random_cone_angles_are_attained() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for genus in 0..3 {
        for _ in 0..4 {
            let m = samples::random_surface::<f64, _>(&mut rng, genus, 7);
            let th = ConeAngleTarget::new(samples::random_cone_angles::<f64, _>(&mut rng, m.triangulation())).unwrap();
            let r = prescribe_cone_angles(&m, &th, &opts()).unwrap();
            let cone = r.cone.unwrap();
            for v in 0..7 {
                assert!((cone.theta_tilde[v] - th.values()[v]).abs() <= 1e-8);
            }
            assert!(angle_error(&cone.metric, &th).unwrap() <= 1e-8);
        }
    }
}
