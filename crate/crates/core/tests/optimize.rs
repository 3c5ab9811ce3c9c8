use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use uniformizer::optimize::{distance_bounds, minimize_e_bar_from, minimize_e_theta_from, Gauge, LineSearch};
use uniformizer::realize::{classify_realizable, RealizableKind};
use uniformizer::samples;
use uniformizer::{
    e_theta, kkt_check, minimize_e_bar, minimize_e_theta, ConeAngleTarget, DecoratedMetric, Error, KktProblem,
    SolveOptions, SolveStatus,
};

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn perturbed_square_torus(rng: &mut ChaCha8Rng) -> DecoratedMetric<f64> {
    let base = samples::square_torus::<f64>();
    let lam = base.lambda().iter().map(|x| x + rng.gen_range(-0.5..0.5)).collect();
    DecoratedMetric::new(base.triangulation().clone(), lam).unwrap()
}

fn gauge_distance(a: &[f64], b: &[f64]) -> f64 {
    let shift = (a.iter().sum::<f64>() - b.iter().sum::<f64>()) / a.len() as f64;
    a.iter().zip(b).map(|(x, y)| (x - y - shift).abs()).fold(0.0, f64::max)
}

#[test]
fn flat_square_torus_needs_no_steps() {
    let m = samples::square_torus::<f64>();
    let r = minimize_e_theta(&m, &ConeAngleTarget::flat(1), &opts()).unwrap();
    assert_eq!(r.iterations, 0);
    assert_eq!(r.u, vec![0.0]);
    assert_eq!(r.status, SolveStatus::Converged);
    assert!(r.kkt.pass);
}

#[test]
fn perturbed_tori_become_flat() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let m = perturbed_square_torus(&mut rng);
        let r = minimize_e_theta(&m, &ConeAngleTarget::flat(1), &opts()).unwrap();
        assert!((r.theta_tilde[0] - TAU).abs() < 1e-8);
    }
    for _ in 0..5 {
        let m = samples::random_surface::<f64, _>(&mut rng, 1, 8);
        let r = minimize_e_theta(&m, &ConeAngleTarget::flat(8), &opts()).unwrap();
        assert!(r.theta_tilde.iter().all(|x| (x - TAU).abs() < 1e-8));
        assert!(r.u.iter().sum::<f64>().abs() < 1e-10);
    }
}

#[test]
fn e_theta_minimizer_is_unique_up_to_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for genus in 0..3 {
        let m = samples::random_surface::<f64, _>(&mut rng, genus, 7);
        let th = ConeAngleTarget::new(samples::random_cone_angles::<f64, _>(&mut rng, m.triangulation())).unwrap();
        let a = minimize_e_theta(&m, &th, &opts()).unwrap();
        let start: Vec<f64> = (0..7).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = minimize_e_theta_from(&m, &th, &start, &opts()).unwrap();
        assert!(gauge_distance(&a.u, &b.u) < 1e-6);
    }
}

#[test]
fn pinned_gauge_fixes_one_vertex() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = samples::random_surface::<f64, _>(&mut rng, 1, 6);
    let o = SolveOptions { gauge: Gauge::Pin(4), ..opts() };
    let a = minimize_e_theta(&m, &ConeAngleTarget::flat(6), &o).unwrap();
    assert_eq!(a.u[4], 0.0);
    let b = minimize_e_theta(&m, &ConeAngleTarget::flat(6), &opts()).unwrap();
    assert!(gauge_distance(&a.u, &b.u) < 1e-8);
}

#[test]
fn gauss_bonnet_is_enforced() {
    let m = samples::square_torus::<f64>();
    let r = minimize_e_theta(&m, &ConeAngleTarget::new(vec![TAU + 0.1]).unwrap(), &opts());
    assert!(matches!(r, Err(Error::GaussBonnetViolated { .. })));
    let s = DecoratedMetric::new(samples::sphere3(), vec![0.0; 3]).unwrap();
    assert!(matches!(
        minimize_e_theta(&s, &ConeAngleTarget::flat(3), &opts()),
        Err(Error::GaussBonnetViolated { .. })
    ));
}

#[test]
fn options_are_validated() {
    let m = samples::square_torus::<f64>();
    let th = ConeAngleTarget::flat(1);
    for o in [
        SolveOptions { gradient_tolerance: 0.0, ..opts() },
        SolveOptions { line_search: LineSearch { shrink: 1.0, sufficient_decrease: 1e-4 }, ..opts() },
        SolveOptions { line_search: LineSearch { shrink: 0.5, sufficient_decrease: 0.0 }, ..opts() },
    ] {
        assert!(matches!(minimize_e_theta(&m, &th, &o), Err(Error::InvalidOptions(_))));
    }
}

#[test]
fn iteration_limit_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = samples::random_surface::<f64, _>(&mut rng, 0, 12);
    let o = SolveOptions { max_iterations: 1, ..opts() };
    let th = ConeAngleTarget::uniform(m.triangulation());
    assert!(matches!(minimize_e_theta(&m, &th, &o), Err(Error::IterLimit { iterations: 1, .. })));
    assert!(matches!(minimize_e_bar(&m, 0, &o), Err(Error::IterLimit { iterations: 1, .. })));
}

#[test]
fn solves_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = samples::random_surface::<f64, _>(&mut rng, 0, 15);
    let a = minimize_e_bar(&m, 2, &opts()).unwrap();
    let b = minimize_e_bar(&m, 2, &opts()).unwrap();
    assert_eq!(a.u, b.u);
    assert_eq!(a.value, b.value);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn sphere3_minimizer_is_two_sided() {
    let m = DecoratedMetric::new(samples::sphere3(), vec![0.0; 3]).unwrap();
    for vinf in 0..3 {
        let r = minimize_e_bar(&m, vinf, &opts()).unwrap();
        assert_eq!(r.active_set, vec![0, 1]);
        assert!(r.kkt.pass);
        assert_eq!(classify_realizable(&r.delaunay, vinf).unwrap(), RealizableKind::TwoSided);
    }
}

#[test]
fn octahedron_minimizer_passes_kkt() {
    let m = samples::embedded_metric(samples::octahedron(), &samples::octahedron_points()).unwrap();
    let r = minimize_e_bar(&m, 5, &opts()).unwrap();
    assert!(r.kkt.pass && !r.active_set.is_empty());
    let k = kkt_check(&m, KktProblem::Bar { vinf: 5 }, &r.u, 1e-8).unwrap();
    assert!(k.pass, "{k:?}");
    assert_eq!(classify_realizable(&r.delaunay, 5).unwrap(), RealizableKind::Polyhedral);
    // the four neighbours of the south pole are symmetric
    let u = &r.u;
    for v in 1..4 {
        assert!((u[v] - u[0]).abs() < 1e-8);
    }
}

#[test]
fn e_bar_minimizer_is_unique() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let n = rng.gen_range(4..12);
        let m = samples::random_surface::<f64, _>(&mut rng, 0, n);
        let vinf = rng.gen_range(0..n);
        let bounds = distance_bounds(&m, vinf).unwrap();
        let a = minimize_e_bar_from(&m, vinf, &bounds, &opts()).unwrap();
        let lifted: Vec<f64> = bounds.iter().map(|d| d + 1.0).collect();
        let b = minimize_e_bar_from(&m, vinf, &lifted, &opts()).unwrap();
        let c = minimize_e_bar(&m, vinf, &opts()).unwrap();
        for k in 0..n - 1 {
            assert!((a.u[k] - b.u[k]).abs() < 1e-6 && (a.u[k] - c.u[k]).abs() < 1e-6);
            assert!(a.u[k] >= bounds[k] - 1e-12);
        }
    }
}

#[test]
fn e_bar_solutions_pass_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let n = rng.gen_range(4..20);
        let m = samples::random_surface::<f64, _>(&mut rng, 0, n);
        let vinf = rng.gen_range(0..n);
        let r = minimize_e_bar(&m, vinf, &opts()).unwrap();
        let k = kkt_check(&m, KktProblem::Bar { vinf }, &r.u, 1e-8).unwrap();
        assert!(k.pass && !k.active.is_empty(), "{k:?}");
        assert!(k.stationarity <= 1e-8 && k.feasibility <= 1e-8 && k.complementarity <= 1e-8);
        assert_eq!(k.active, r.active_set);
        assert!(r.bounds.is_some());
    }
}

#[test]
fn kkt_detects_violations() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = samples::random_surface::<f64, _>(&mut rng, 1, 5);
    let th = ConeAngleTarget::flat(5);
    let r = minimize_e_theta(&m, &th, &opts()).unwrap();
    assert!(kkt_check(&m, KktProblem::Theta(&th), &r.u, 1e-8).unwrap().pass);
    let mut off = r.u.clone();
    off[0] += 0.1;
    let k = kkt_check(&m, KktProblem::Theta(&th), &off, 1e-8).unwrap();
    assert!(!k.pass && k.stationarity > 1e-3);

    let s = samples::random_surface::<f64, _>(&mut rng, 0, 8);
    let r = minimize_e_bar(&s, 0, &opts()).unwrap();
    let mut below = r.u.clone();
    below[r.active_set[0]] -= 0.1;
    let k = kkt_check(&s, KktProblem::Bar { vinf: 0 }, &below, 1e-8).unwrap();
    assert!(!k.pass && (k.feasibility - 0.1).abs() < 1e-12);
    assert_eq!(kkt_check(&s, KktProblem::Bar { vinf: 0 }, &r.u, 1e-8).unwrap().feasibility.to_bits(), 0f64.to_bits());
}

#[test]
fn e_bar_needs_a_sphere() {
    let m = samples::square_torus::<f64>();
    assert!(matches!(minimize_e_bar(&m, 0, &opts()), Err(Error::WrongGenus { expected: 0, got: 1 })));
    let s = DecoratedMetric::new(samples::sphere3(), vec![0.0; 3]).unwrap();
    assert!(matches!(minimize_e_bar(&s, 3, &opts()), Err(Error::UnknownVertex(3))));
}

#[test]
fn minimizer_beats_nearby_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for genus in 0..3 {
        let m = samples::random_surface::<f64, _>(&mut rng, genus, 9);
        let th = ConeAngleTarget::new(samples::random_cone_angles::<f64, _>(&mut rng, m.triangulation())).unwrap();
        let r = minimize_e_theta(&m, &th, &opts()).unwrap();
        assert!(r.value <= e_theta(&m, &th, &[0.0; 9]).unwrap().value);
        for _ in 0..20 {
            let p: Vec<f64> = r.u.iter().map(|x| x + rng.gen_range(-0.3..0.3)).collect();
            assert!(e_theta(&m, &th, &p).unwrap().value >= r.value - 1e-12);
        }
    }
}
