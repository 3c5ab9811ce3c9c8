//! Small reference surfaces and random instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::mesh::{Gluing, Triangulation};
use crate::penner::DecoratedMetric;
use crate::scalar::Real;

/// Two triangles glued along all three sides: a sphere with three vertices.
pub fn sphere3() -> Triangulation {
    Triangulation::from_gluings(&[Gluing::new(0, 0, 1, 0), Gluing::new(0, 1, 1, 2), Gluing::new(0, 2, 1, 1)], Some(0))
        .expect("valid gluing")
}

/// Two triangles glued into a torus with one vertex and three edges.
pub fn torus1() -> Triangulation {
    Triangulation::from_gluings(&[Gluing::new(0, 0, 1, 0), Gluing::new(0, 1, 1, 1), Gluing::new(0, 2, 1, 2)], Some(1))
        .expect("valid gluing")
}

/// The flat square torus: legs of length 1, edge 2 is the diagonal of length √2.
pub fn square_torus<T: Real>() -> DecoratedMetric<T> {
    DecoratedMetric::new(torus1(), vec![T::zero(), T::zero(), T::LN_2()]).expect("finite")
}

pub fn tetrahedron() -> Triangulation {
    Triangulation::from_faces(&[[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]]).expect("closed")
}

/// Vertices `±x, ±y, ±z` as `0..6` in the order `+x, −x, +y, −y, +z, −z`.
pub fn octahedron() -> Triangulation {
    Triangulation::from_faces(&octahedron_faces()).expect("closed")
}

pub fn octahedron_faces() -> Vec<[usize; 3]> {
    let mut faces = Vec::new();
    for &x in &[0, 1] {
        for &y in &[2, 3] {
            for &z in &[4, 5] {
                // outward orientation flips with each negative coordinate
                let neg = (x == 1) as u8 + (y == 3) as u8 + (z == 5) as u8;
                faces.push(if neg % 2 == 0 { [x, y, z] } else { [x, z, y] });
            }
        }
    }
    faces
}

/// Genus-two surface with one vertex: the octagon `a b a⁻¹ b⁻¹ c d c⁻¹ d⁻¹`
/// fanned from one corner (six triangles, nine edges).
pub fn genus2() -> Triangulation {
    // octagon side j as a triangle side
    let side = |j: usize| match j {
        0 => (0, 0),
        7 => (5, 2),
        j => (j - 1, 1),
    };
    let mut g = Vec::new();
    for k in 0..5 {
        g.push(Gluing::new(k, 2, k + 1, 0));
    }
    for (p, q) in [(0, 2), (1, 3), (4, 6), (5, 7)] {
        let (a, b) = (side(p), side(q));
        g.push(Gluing::new(a.0, a.1, b.0, b.1));
    }
    Triangulation::from_gluings(&g, Some(2)).expect("valid gluing")
}

/// Base triangulation of the given genus with the fewest vertices.
pub fn minimal(genus: usize) -> Triangulation {
    match genus {
        0 => sphere3(),
        1 => torus1(),
        2 => genus2(),
        _ => panic!("no sample of genus {genus}"),
    }
}

/// A random triangulation of the given genus with `vertices` vertices, grown
/// by random triangle splits followed by `2|E|` random flips.
pub fn random_triangulation<R: Rng>(rng: &mut R, genus: usize, vertices: usize) -> Triangulation {
    let mut t = minimal(genus);
    while t.num_vertices() < vertices {
        let tri = rng.gen_range(0..t.num_triangles());
        t = t.split_triangle(tri).expect("triangle in range").0;
    }
    for _ in 0..2 * t.num_edges() {
        let e = rng.gen_range(0..t.num_edges());
        if let Ok(f) = t.flip_edge(e) {
            t = f;
        }
    }
    t
}

/// Random Penner coordinates, uniform in `[lo, hi]`.
pub fn random_lambda<T: Real, R: Rng>(rng: &mut R, t: Triangulation, lo: f64, hi: f64) -> DecoratedMetric<T> {
    let lam = (0..t.num_edges()).map(|_| T::lit(rng.gen_range(lo..=hi))).collect();
    DecoratedMetric::new(t, lam).expect("finite")
}

/// A random decorated surface with λ uniform in `[−2, 2]`.
pub fn random_surface<T: Real, R: Rng>(rng: &mut R, genus: usize, vertices: usize) -> DecoratedMetric<T> {
    let t = random_triangulation(rng, genus, vertices);
    random_lambda(rng, t, -2.0, 2.0)
}

/// Random cone angles, positive, summing to `2π(2g − 2 + n)`.
pub fn random_cone_angles<T: Real, R: Rng>(rng: &mut R, t: &Triangulation) -> Vec<T> {
    let n = t.num_vertices();
    let total = std::f64::consts::TAU * (2.0 * t.genus() as f64 - 2.0 + n as f64);
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| T::lit(x * total / s)).collect()
}

/// A random vertex ordering, used to test relabeling invariance.
pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Euclidean edge lengths of a triangle mesh embedded by `points`.
pub fn lengths_from_points(t: &Triangulation, points: &[[f64; 3]]) -> Vec<f64> {
    (0..t.num_edges())
        .map(|e| {
            let (a, b) = t.endpoints(e);
            let d: f64 = (0..3).map(|k| (points[a][k] - points[b][k]).powi(2)).sum();
            d.sqrt()
        })
        .collect()
}

/// The metric of `t` embedded with the given vertex positions.
pub fn embedded_metric(t: Triangulation, points: &[[f64; 3]]) -> Result<DecoratedMetric<f64>> {
    let l = lengths_from_points(&t, points);
    DecoratedMetric::from_lengths(t, &l)
}

pub fn octahedron_points() -> Vec<[f64; 3]> {
    vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]
}
