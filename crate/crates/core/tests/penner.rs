use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uniformizer::penner::{
    arc_lengths, lambdas_from_arcs, penner_from_shear, ptolemy_update, shear_from_penner, ShearCoordinates,
};
use uniformizer::samples;
use uniformizer::{ConeAngleTarget, DecoratedMetric, Error, PartialDecoration};

const LN2: f64 = std::f64::consts::LN_2;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn arc_examples() {
    assert_eq!(arc_lengths([0.0, 0.0, 0.0]), [1.0, 1.0, 1.0]);
    let a = arc_lengths([2.0 * LN2, 0.0, 0.0]);
    assert!(close(a[0], 2.0, 1e-15) && close(a[1], 0.5, 1e-15) && close(a[2], 0.5, 1e-15));
}

#[test]
fn arcs_invert() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let l = [rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)];
        let back = lambdas_from_arcs(arc_lengths(l));
        for k in 0..3 {
            assert!(close(back[k], l[k], 1e-12), "{l:?} -> {back:?}");
        }
    }
}

#[test]
fn horocycle_lengths_at_zero() {
    let torus = DecoratedMetric::new(samples::torus1(), vec![0.0; 3]).unwrap();
    assert!(close(torus.horocycle_length(0).unwrap(), 6.0, 1e-14));
    let sphere = DecoratedMetric::new(samples::sphere3(), vec![0.0; 3]).unwrap();
    for v in 0..3 {
        assert!(close(sphere.horocycle_length(v).unwrap(), 2.0, 1e-14));
    }
    assert_eq!(sphere.horocycle_length(3).unwrap_err(), Error::UnknownVertex(3));
}

#[test]
fn horocycle_length_under_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for genus in 0..3 {
        let m = samples::random_surface::<f64, _>(&mut rng, genus, 7);
        let n = m.triangulation().num_vertices();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let s = m.fiber_shift(&u).unwrap();
        for v in 0..n {
            let lhs = s.log_horocycle_length(v).unwrap();
            let rhs = m.log_horocycle_length(v).unwrap() - u[v];
            assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn fiber_shift_examples() {
    let m = DecoratedMetric::new(samples::torus1(), vec![0.1, -0.2, 0.3]).unwrap();
    assert_eq!(m.fiber_shift(&[0.0]).unwrap().lambda(), m.lambda());
    let s = m.fiber_shift(&[0.25]).unwrap();
    for e in 0..3 {
        assert!(close(s.lambda()[e], m.lambda()[e] + 0.5, 1e-15));
    }
    let m = DecoratedMetric::new(samples::sphere3(), vec![0.0; 3]).unwrap();
    let s = m.fiber_shift(&[1.0, 0.0, 0.0]).unwrap();
    for e in 0..3 {
        let (a, b) = m.triangulation().endpoints(e);
        let expect = (a == 0) as u8 as f64 + (b == 0) as u8 as f64;
        assert_eq!(s.lambda()[e], expect);
    }
    assert!(matches!(m.fiber_shift(&[0.0]), Err(Error::LengthMismatch { .. })));
    assert!(matches!(m.fiber_shift(&[f64::NAN, 0.0, 0.0]), Err(Error::NonFinite(0))));
}

#[test]
fn metric_validation() {
    assert!(matches!(DecoratedMetric::new(samples::torus1(), vec![0.0; 2]), Err(Error::LengthMismatch { .. })));
    assert!(matches!(DecoratedMetric::new(samples::torus1(), vec![0.0, f64::INFINITY, 0.0]), Err(Error::NonFinite(1))));
    let m = DecoratedMetric::from_lengths(samples::torus1(), &[1.0, 1.0, 2f64.sqrt()]).unwrap();
    assert!(close(m.lambda()[2], LN2, 1e-15));
    assert!(DecoratedMetric::from_lengths(samples::torus1(), &[1.0, 0.0, 1.0]).is_err());
}

#[test]
fn decorations_and_targets() {
    assert!(matches!(PartialDecoration::<f64>::with_missing(&[0.0, 0.0], &[0, 1]), Err(Error::NoDecoratedVertex)));
    let d = PartialDecoration::with_missing(&[0.5, 0.0, 1.0], &[1]).unwrap();
    assert!(d.is_decorated(0) && !d.is_decorated(1));
    assert_eq!(d.all_finite(), None);
    assert!(matches!(ConeAngleTarget::new(vec![1.0, -0.1]), Err(Error::NegativeConeAngle(1))));
    let u = ConeAngleTarget::<f64>::uniform(&samples::genus2());
    assert!(close(u.sum(), 6.0 * std::f64::consts::PI, 1e-12));
}

#[test]
fn shears_vanish_at_zero() {
    let m = DecoratedMetric::new(samples::genus2(), vec![0.0; 9]).unwrap();
    assert!(shear_from_penner(&m).sigma.iter().all(|&s| s == 0.0));
}

fn vertex_sums(s: &ShearCoordinates<f64>) -> Vec<f64> {
    let t = &s.triangulation;
    (0..t.num_vertices()).map(|v| t.vertex_corners(v).iter().map(|&c| s.sigma[t.edge(c)]).sum()).collect()
}

#[test]
fn square_torus_shears() {
    for diag in [LN2, 2.0 * LN2] {
        let m = DecoratedMetric::new(samples::torus1(), vec![0.0, 0.0, diag]).unwrap();
        let s = shear_from_penner(&m);
        assert!(vertex_sums(&s).iter().all(|x| x.abs() < 1e-12));
        // the diagonal is opposite the two legs in both triangles
        assert!(close(s.sigma[2], 0.0, 1e-15));
        assert!(close(s.sigma[0], -s.sigma[1], 1e-15));
    }
}

#[test]
fn shears_ignore_the_decoration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for genus in 0..3 {
        let m = samples::random_surface::<f64, _>(&mut rng, genus, 9);
        let n = m.triangulation().num_vertices();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let a = shear_from_penner(&m);
        let b = shear_from_penner(&m.fiber_shift(&u).unwrap());
        for (x, y) in a.sigma.iter().zip(&b.sigma) {
            assert!(close(*x, *y, 1e-10));
        }
        assert!(vertex_sums(&a).iter().all(|x| x.abs() < 1e-10));
    }
}

#[test]
fn shear_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for genus in 0..3 {
        let m = samples::random_surface::<f64, _>(&mut rng, genus, 8);
        let back = penner_from_shear(&shear_from_penner(&m), &m.anchor_arcs()).unwrap();
        for (x, y) in back.lambda().iter().zip(m.lambda()) {
            assert!(close(*x, *y, 1e-10), "{x} vs {y}");
        }
    }
}

#[test]
fn zero_shears_with_unit_anchors() {
    let t = samples::genus2();
    let s = ShearCoordinates { triangulation: t.clone(), sigma: vec![0.0; 9] };
    let m: DecoratedMetric<f64> = penner_from_shear(&s, &[1.0]).unwrap();
    assert!(m.lambda().iter().all(|x| x.abs() < 1e-14));
    let anchors = m.anchor_arcs();
    assert!(anchors.iter().all(|a| close(*a, 1.0, 1e-14)));
}

#[test]
fn incompatible_shears() {
    let mut s = ShearCoordinates { triangulation: samples::sphere3(), sigma: vec![0.0; 3] };
    s.sigma[0] = 0.3;
    assert!(matches!(penner_from_shear(&s, &[1.0, 1.0, 1.0]), Err(Error::IncompatibleShear { .. })));
}

#[test]
fn ptolemy_examples() {
    assert!(close(ptolemy_update(0.0, 0.0, 0.0, 0.0, 0.0), 2.0 * LN2, 1e-15));
    assert!(close(ptolemy_update(0.0, 0.0, 0.0, 0.0, 2.0 * LN2), 0.0, 1e-15));
    let big: f64 = ptolemy_update(1000.0, 1000.0, 1000.0, 1000.0, 1000.0);
    // ℓ_f = (e^1000 + e^1000) / e^500, so λ_f = 2 (1000 + log 2) − 1000
    assert!(big.is_finite() && close(big, 1000.0 + 2.0 * LN2, 1e-10));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-30.0..30.0)).collect();
        let f = ptolemy_update(x[0], x[1], x[2], x[3], x[4]);
        let back = ptolemy_update(x[1], x[2], x[3], x[0], f);
        assert!(close(back, x[4], 1e-12 * x[4].abs().max(1.0)), "{x:?}");
    }
}

#[test]
fn metric_flip_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = samples::random_surface::<f64, _>(&mut rng, 1, 10);
    for e in 0..m.triangulation().num_edges() {
        if let Ok((f, rec)) = m.flip(e) {
            assert_eq!((rec.edge, rec.before), (e, m.lambda()[e]));
            let (back, _) = f.flip(e).unwrap();
            for (x, y) in back.lambda().iter().zip(m.lambda()) {
                assert!(close(*x, *y, 1e-12));
            }
        }
    }
}
