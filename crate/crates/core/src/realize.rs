//! Geometric back-ends: planar layouts, inscribed ideal polyhedra, two-sided
//! polygons, flat tori and cone metrics.

use std::collections::VecDeque;

use crate::delaunay::DelaunayResult;
use crate::energy::{corner_angles, e_theta};
use crate::error::{Error, Result};
use crate::mesh::{next, prev, tri_of, SubcomplexKind, Triangulation, VertexClass};
use crate::optimize::{minimize_e_bar, minimize_e_theta, SolveOptions, SolveReport};
use crate::penner::{ConeAngleTarget, DecoratedMetric};
use crate::scalar::Real;

/// Angle tolerance for the realizability conditions.
pub const ANGLE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealizableKind {
    TwoSided,
    Polyhedral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealizationKind {
    InscribedPolyhedron,
    TwoSidedPolygon,
    FlatTorus,
    ConeMetric,
}

/// A developed triangle set. Corner positions are indexed by half-edge.
#[derive(Clone, Debug)]
pub struct PlanarLayout<T> {
    pub corner: Vec<Option<[T; 2]>>,
    /// Position of the first placed corner of each vertex.
    pub vertex: Vec<Option<[T; 2]>>,
    /// Edges whose two sides were laid out in different places.
    pub seams: Vec<usize>,
    pub closure_residual: T,
    pub length_error: T,
    pub diameter: T,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics<T> {
    pub sphere_residual: T,
    pub planarity: T,
    /// Smallest signed clearance of a vertex below a face plane.
    pub convexity_margin: T,
    pub closure_residual: T,
    pub length_error: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusModulus<T> {
    /// Reduced lattice basis with unit covolume.
    pub basis: [[T; 2]; 2],
    /// `ω₂/ω₁` in the standard fundamental domain, as `(re, im)`.
    pub tau: [T; 2],
    /// Largest distance of a deck translation from the integer lattice.
    pub lattice_residual: T,
}

#[derive(Clone, Debug)]
pub struct ConeData<T> {
    /// The final Delaunay triangulation with `λ̃`.
    pub metric: DecoratedMetric<T>,
    pub lengths: Vec<T>,
    pub theta_tilde: Vec<T>,
    pub u: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct Realization<T> {
    pub kind: RealizationKind,
    /// 3D points on the unit sphere, or planar points with `z = 0`.
    pub positions: Vec<[T; 3]>,
    /// Vertex cycles, outward oriented for polyhedra.
    pub faces: Vec<Vec<usize>>,
    pub diagnostics: Diagnostics<T>,
    pub torus: Option<TorusModulus<T>>,
    pub cone: Option<ConeData<T>>,
}

fn f64_of<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn tilde_lambda<T: Real>(d: &DelaunayResult<T>, e: usize) -> T {
    d.shifted_lambda(e).finite().expect("edge avoids the undecorated vertex")
}

fn triangle_tilde<T: Real>(d: &DelaunayResult<T>, t: usize) -> [T; 3] {
    d.triangulation().triangle_edges(t).map(|e| tilde_lambda(d, e))
}

/// Angle sums of the kept triangles (zero elsewhere), corner ordered.
fn kept_angle_sums<T: Real>(d: &DelaunayResult<T>, keep_tri: &dyn Fn(usize) -> bool) -> Result<Vec<T>> {
    let t = d.triangulation();
    let mut angle = vec![None; t.num_halfedges()];
    for tri in (0..t.num_triangles()).filter(|&x| keep_tri(x)) {
        let a = corner_angles(triangle_tilde(d, tri)).ok_or(Error::OutsideDomainA(tri))?;
        for k in 0..3 {
            angle[3 * tri + k] = Some(a[(k + 1) % 3]);
        }
    }
    Ok((0..t.num_vertices())
        .map(|v| t.vertex_corners(v).into_iter().filter_map(|c| angle[c]).fold(T::zero(), |s, a| s + a))
        .collect())
}

/// Decides which realization the adjusted Delaunay data at an `Ē` minimizer admits.
pub fn classify_realizable<T: Real>(d: &DelaunayResult<T>, vinf: usize) -> Result<RealizableKind> {
    let t = d.triangulation();
    let sub = t.subcomplex_avoiding(vinf)?;
    match sub.classify() {
        SubcomplexKind::LinearGraph => Ok(RealizableKind::TwoSided),
        SubcomplexKind::Other => Err(Error::NotRealizable(
            "the subcomplex avoiding the distinguished vertex is neither a path nor a disk".into(),
        )),
        SubcomplexKind::DiskTriangulation => {
            let theta = kept_angle_sums(d, &|x| sub.has_triangle(x))?;
            let tol = T::tol(ANGLE_TOL);
            for v in sub.vertices() {
                match sub.vertex_class(v) {
                    Some(VertexClass::Interior) if (theta[v] - T::TAU()).abs() > tol => {
                        return Err(Error::NotRealizable(format!(
                            "interior vertex {v} has angle sum {} instead of 2π",
                            f64_of(theta[v])
                        )));
                    }
                    Some(VertexClass::Boundary) if theta[v] > T::PI() + tol => {
                        return Err(Error::NotRealizable(format!(
                            "boundary vertex {v} has angle sum {} above π",
                            f64_of(theta[v])
                        )));
                    }
                    _ => {}
                }
            }
            Ok(RealizableKind::Polyhedral)
        }
    }
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm2(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Places the triangles accepted by `keep` by breadth-first development from
/// `seed`, crossing only edges accepted by `cross`.
fn develop<T: Real>(
    t: &Triangulation,
    side_lambda: &dyn Fn(usize) -> T,
    keep: &dyn Fn(usize) -> bool,
    cross: &dyn Fn(usize) -> bool,
    seed: usize,
) -> Result<(Vec<Option<[f64; 2]>>, Vec<Option<usize>>)> {
    let nh = t.num_halfedges();
    let mut pos: Vec<Option<[f64; 2]>> = vec![None; nh];
    let mut parent: Vec<Option<usize>> = vec![None; t.num_triangles()];
    let len = |h: usize| f64_of((side_lambda(t.edge(h)) * T::lit(0.5)).exp());
    let angles = |tri: usize| -> Result<[f64; 3]> {
        let l = t.triangle_edges(tri).map(side_lambda);
        corner_angles(l).map(|a| a.map(f64_of)).ok_or(Error::OutsideDomainA(tri))
    };
    let a = angles(seed)?;
    let h = 3 * seed;
    pos[h] = Some([0.0, 0.0]);
    pos[h + 1] = Some([len(h), 0.0]);
    let l2 = len(h + 2);
    pos[h + 2] = Some([l2 * a[1].cos(), l2 * a[1].sin()]);
    let mut placed = vec![false; t.num_triangles()];
    placed[seed] = true;
    let mut queue = VecDeque::from([seed]);
    while let Some(tri) = queue.pop_front() {
        for h in 3 * tri..3 * tri + 3 {
            let tw = t.twin(h);
            let u = tri_of(tw);
            if placed[u] || !keep(u) || !cross(t.edge(h)) {
                continue;
            }
            let p = pos[next(h)].expect("placed");
            let q = pos[h].expect("placed");
            let au = angles(u)?;
            // angle at corner tw is opposite side next(tw)
            let alpha = au[(tw % 3 + 1) % 3];
            let dir = sub2(q, p);
            let dl = norm2(dir);
            let (c, s) = (alpha.cos(), alpha.sin());
            let r = len(prev(tw)) / dl;
            let apex = [p[0] + r * (c * dir[0] - s * dir[1]), p[1] + r * (s * dir[0] + c * dir[1])];
            pos[tw] = Some(p);
            pos[next(tw)] = Some(q);
            pos[prev(tw)] = Some(apex);
            placed[u] = true;
            parent[u] = Some(h);
            queue.push_back(u);
        }
    }
    Ok((pos, parent))
}

fn triangle_area<T: Real>(l: [T; 3]) -> f64 {
    let l = l.map(|x| f64_of((x * T::lit(0.5)).exp()));
    let s = (l[0] + l[1] + l[2]) / 2.0;
    (s * (s - l[0]) * (s - l[1]) * (s - l[2])).max(0.0).sqrt()
}

/// Develops the disk of triangles avoiding `vinf` into the plane.
pub fn layout_disk<T: Real>(d: &DelaunayResult<T>, vinf: usize) -> Result<PlanarLayout<T>> {
    let t = d.triangulation();
    let sub = t.subcomplex_avoiding(vinf)?;
    if sub.classify() != SubcomplexKind::DiskTriangulation {
        return Err(Error::WrongKind("layout needs a disk; use two_sided_polygon".into()));
    }
    let tris = sub.triangles();
    let seed = *tris
        .iter()
        .max_by(|&&a, &&b| triangle_area(triangle_tilde(d, a)).total_cmp(&triangle_area(triangle_tilde(d, b))))
        .expect("disk has triangles");
    let lam = |e: usize| d.shifted_lambda(e).finite().unwrap_or(T::infinity());
    let (pos, _) = develop(t, &lam, &|x| sub.has_triangle(x), &|_| true, seed)?;
    finish_layout(t, d, pos, &|x| sub.has_triangle(x))
}

fn finish_layout<T: Real>(
    t: &Triangulation,
    d: &DelaunayResult<T>,
    pos: Vec<Option<[f64; 2]>>,
    keep: &dyn Fn(usize) -> bool,
) -> Result<PlanarLayout<T>> {
    let mut vertex: Vec<Option<[f64; 2]>> = vec![None; t.num_vertices()];
    for c in 0..t.num_halfedges() {
        if let Some(p) = pos[c] {
            vertex[t.vertex(c)].get_or_insert(p);
        }
    }
    let pts: Vec<[f64; 2]> = vertex.iter().flatten().copied().collect();
    let mut diameter: f64 = 0.0;
    for a in &pts {
        for b in &pts {
            diameter = diameter.max(norm2(sub2(*a, *b)));
        }
    }
    let mut residual: f64 = 0.0;
    let mut length_error: f64 = 0.0;
    let mut seams = Vec::new();
    for c in 0..t.num_halfedges() {
        if let Some(p) = pos[c] {
            residual = residual.max(norm2(sub2(p, vertex[t.vertex(c)].expect("placed"))));
            let q = pos[next(c)].expect("whole triangle placed");
            let l = f64_of((tilde_lambda(d, t.edge(c)) * T::lit(0.5)).exp());
            length_error = length_error.max((norm2(sub2(p, q)) - l).abs() / l);
        }
    }
    for e in 0..t.num_edges() {
        let [h0, h1] = t.halfedges(e);
        if keep(tri_of(h0)) && keep(tri_of(h1)) {
            let (a, b) = (pos[h0].expect("placed"), pos[next(h1)].expect("placed"));
            if norm2(sub2(a, b)) > f64_of(T::tol(1e-12)) * diameter.max(1.0) {
                seams.push(e);
            }
        }
    }
    if residual > f64_of(T::tol(1e-8)) * diameter.max(f64::MIN_POSITIVE) {
        return Err(Error::LayoutInconsistent(residual));
    }
    let conv = |p: Option<[f64; 2]>| p.map(|x| x.map(T::lit));
    Ok(PlanarLayout {
        corner: pos.into_iter().map(conv).collect(),
        vertex: vertex.into_iter().map(conv).collect(),
        seams,
        closure_residual: T::lit(residual),
        length_error: T::lit(length_error),
        diameter: T::lit(diameter),
    })
}

/// Translates and scales planar points to centroid 0 and mean squared radius 1.
fn normalize(points: &mut [[f64; 2]]) {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    for p in points.iter_mut() {
        p[0] -= cx;
        p[1] -= cy;
    }
    let r = (points.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>() / n).sqrt();
    if r > 0.0 {
        for p in points.iter_mut() {
            p[0] /= r;
            p[1] /= r;
        }
    }
}

/// Inverse stereographic projection from the north pole onto the unit sphere.
pub fn inverse_stereographic(p: [f64; 2]) -> [f64; 3] {
    let r2 = p[0] * p[0] + p[1] * p[1];
    let s = 1.0 + r2;
    [2.0 * p[0] / s, 2.0 * p[1] / s, (r2 - 1.0) / s]
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Boundary cycles of a set of triangles, as vertex loops in orientation order.
fn boundary_loops(t: &Triangulation, in_set: &dyn Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let hs: Vec<usize> = (0..t.num_halfedges()).filter(|&h| in_set(tri_of(h)) && !in_set(tri_of(t.twin(h)))).collect();
    let mut used = vec![false; hs.len()];
    let mut loops = Vec::new();
    for start in 0..hs.len() {
        if used[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut cur = start;
        loop {
            used[cur] = true;
            let h = hs[cur];
            cycle.push(t.vertex(h));
            // the next boundary half-edge leaves the head of h: rotate through the set
            let mut c = next(h);
            while !(in_set(tri_of(c)) && !in_set(tri_of(t.twin(c)))) {
                c = next(t.twin(c));
            }
            match hs.iter().position(|&x| x == c) {
                Some(k) if !used[k] => cur = k,
                _ => break,
            }
        }
        loops.push(cycle);
    }
    loops
}

/// Builds the inscribed ideal polyhedron from a disk layout.
pub fn polyhedron_from_layout<T: Real>(
    layout: &PlanarLayout<T>,
    d: &DelaunayResult<T>,
    vinf: usize,
) -> Result<Realization<T>> {
    if classify_realizable(d, vinf)? != RealizableKind::Polyhedral {
        return Err(Error::WrongKind("two-sided data has no polyhedron".into()));
    }
    let t = d.triangulation();
    let sub = t.subcomplex_avoiding(vinf)?;
    let verts = sub.vertices();
    let mut planar: Vec<[f64; 2]> =
        verts.iter().map(|&v| layout.vertex[v].expect("disk vertex placed").map(f64_of)).collect();
    normalize(&mut planar);
    let mut points = vec![[0.0, 0.0, 1.0]; t.num_vertices()];
    for (k, &v) in verts.iter().enumerate() {
        points[v] = inverse_stereographic(planar[k]);
    }

    // faces of the disk: merge triangles across nonessential interior edges
    let tris = sub.triangles();
    let mut group: Vec<usize> = (0..t.num_triangles()).collect();
    fn find(g: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while g[r] != r {
            r = g[r];
        }
        let mut y = x;
        while g[y] != r {
            let n = g[y];
            g[y] = r;
            y = n;
        }
        r
    }
    for &e in &d.nonessential {
        let [h0, h1] = t.halfedges(e);
        let (a, b) = (tri_of(h0), tri_of(h1));
        if sub.has_triangle(a) && sub.has_triangle(b) {
            let (ra, rb) = (find(&mut group, a), find(&mut group, b));
            group[ra] = rb;
        }
    }
    let root_of: Vec<usize> = (0..t.num_triangles()).map(|x| find(&mut group, x)).collect();
    let mut roots: Vec<usize> = tris.iter().map(|&x| root_of[x]).collect();
    roots.sort_unstable();
    roots.dedup();
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for r in roots {
        faces.extend(boundary_loops(t, &|x| sub.has_triangle(x) && root_of[x] == r));
    }

    // vertical faces through v∞: one per straight run of the disk boundary
    let theta = kept_angle_sums(d, &|x| sub.has_triangle(x))?;
    let straight = |v: usize| (theta[v] - T::PI()).abs() <= T::tol(ANGLE_TOL);
    for cycle in boundary_loops(t, &|x| sub.has_triangle(x)) {
        let k = cycle.len();
        let start = (0..k).find(|&i| !straight(cycle[i])).unwrap_or(0);
        let mut run = vec![cycle[start]];
        for step in 1..=k {
            let v = cycle[(start + step) % k];
            run.push(v);
            if step == k || !straight(v) {
                let mut f: Vec<usize> = run.iter().rev().copied().collect();
                f.push(vinf);
                faces.push(f);
                run = vec![v];
            }
        }
    }

    let diagnostics = certify(&points, &mut faces, layout);
    if diagnostics.convexity_margin < -f64_of(T::tol(1e-8)) {
        return Err(Error::ConvexityViolated(diagnostics.convexity_margin));
    }
    Ok(Realization {
        kind: RealizationKind::InscribedPolyhedron,
        positions: points.into_iter().map(|p| p.map(T::lit)).collect(),
        faces,
        diagnostics: Diagnostics {
            sphere_residual: T::lit(diagnostics.sphere_residual),
            planarity: T::lit(diagnostics.planarity),
            convexity_margin: T::lit(diagnostics.convexity_margin),
            closure_residual: layout.closure_residual,
            length_error: layout.length_error,
        },
        torus: None,
        cone: None,
    })
}

fn newell(points: &[[f64; 3]], f: &[usize]) -> [f64; 3] {
    let mut n = [0.0; 3];
    for i in 0..f.len() {
        let a = points[f[i]];
        let b = points[f[(i + 1) % f.len()]];
        n[0] += (a[1] - b[1]) * (a[2] + b[2]);
        n[1] += (a[2] - b[2]) * (a[0] + b[0]);
        n[2] += (a[0] - b[0]) * (a[1] + b[1]);
    }
    let l = norm3(n);
    n.map(|x| x / l)
}

/// Orients faces outward and measures sphere, planarity and convexity residuals.
fn certify<T: Real>(points: &[[f64; 3]], faces: &mut [Vec<usize>], _layout: &PlanarLayout<T>) -> Diagnostics<f64> {
    let n = points.len() as f64;
    let centroid = (0..3).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / n).collect::<Vec<_>>();
    let centroid = [centroid[0], centroid[1], centroid[2]];
    let sphere_residual = points.iter().map(|p| (norm3(*p) - 1.0).abs()).fold(0.0, f64::max);
    let mut planarity: f64 = 0.0;
    let mut margin = f64::INFINITY;
    for f in faces.iter_mut() {
        let mut nrm = newell(points, f);
        let fc = f.iter().fold([0.0; 3], |s, &v| [s[0] + points[v][0], s[1] + points[v][1], s[2] + points[v][2]]);
        let fc = fc.map(|x| x / f.len() as f64);
        if dot3(nrm, sub3(fc, centroid)) < 0.0 {
            f.reverse();
            nrm = nrm.map(|x| -x);
        }
        for &v in f.iter() {
            planarity = planarity.max(dot3(nrm, sub3(points[v], fc)).abs());
        }
        for (v, p) in points.iter().enumerate() {
            if !f.contains(&v) {
                margin = margin.min(dot3(nrm, sub3(fc, *p)));
            }
        }
    }
    Diagnostics {
        sphere_residual,
        planarity,
        convexity_margin: if margin.is_finite() { margin } else { 0.0 },
        closure_residual: 0.0,
        length_error: 0.0,
    }
}

/// The degenerate realization: the path avoiding `v∞` laid on a line and
/// projected to a great circle, as a polygon and its reverse.
pub fn two_sided_polygon<T: Real>(d: &DelaunayResult<T>, vinf: usize) -> Result<Realization<T>> {
    if classify_realizable(d, vinf)? != RealizableKind::TwoSided {
        return Err(Error::WrongKind("polyhedral data; use polyhedron_from_layout".into()));
    }
    let t = d.triangulation();
    let sub = t.subcomplex_avoiding(vinf)?;
    let (order, edges) = sub.path_order().expect("linear graph");
    let mut x = vec![0.0];
    for &e in &edges {
        let l = f64_of((tilde_lambda(d, e) * T::lit(0.5)).exp());
        x.push(x.last().unwrap() + l);
    }
    let mut planar: Vec<[f64; 2]> = x.iter().map(|&s| [s, 0.0]).collect();
    normalize(&mut planar);
    let mut points = vec![[0.0, 0.0, 1.0]; t.num_vertices()];
    for (k, &v) in order.iter().enumerate() {
        points[v] = inverse_stereographic(planar[k]);
    }
    let mut face = vec![vinf];
    face.extend(order.iter().copied());
    let back: Vec<usize> = face.iter().rev().copied().collect();
    let sphere_residual = points.iter().map(|p| (norm3(*p) - 1.0).abs()).fold(0.0, f64::max);
    let planarity = points.iter().map(|p| p[1].abs()).fold(0.0, f64::max);
    Ok(Realization {
        kind: RealizationKind::TwoSidedPolygon,
        positions: points.into_iter().map(|p| p.map(T::lit)).collect(),
        faces: vec![face, back],
        diagnostics: Diagnostics {
            sphere_residual: T::lit(sphere_residual),
            planarity: T::lit(planarity),
            ..Default::default()
        },
        torus: None,
        cone: None,
    })
}

/// Minimizes `Ē^{v∞}` and builds the matching realization.
pub fn uniformize_sphere<T: Real>(
    m: &DecoratedMetric<T>,
    vinf: usize,
    opts: &SolveOptions,
) -> Result<(SolveReport<T>, Realization<T>)> {
    let report = minimize_e_bar(m, vinf, opts)?;
    let d = &report.delaunay;
    let real = match classify_realizable(d, vinf)? {
        RealizableKind::TwoSided => two_sided_polygon(d, vinf)?,
        RealizableKind::Polyhedral => polyhedron_from_layout(&layout_disk(d, vinf)?, d, vinf)?,
    };
    Ok((report, real))
}

/// Absolute cross-ratios `|p_a − p_c||p_b − p_d| / (|p_a − p_d||p_b − p_c|)` of
/// four points for the three pairings and their inverses.
pub fn cross_ratios(p: [[f64; 3]; 4]) -> [f64; 6] {
    let d = |i: usize, j: usize| norm3(sub3(p[i], p[j]));
    let a = d(0, 2) * d(1, 3) / (d(0, 3) * d(1, 2));
    let b = d(0, 1) * d(2, 3) / (d(0, 3) * d(1, 2));
    let c = d(0, 1) * d(2, 3) / (d(0, 2) * d(1, 3));
    [a, 1.0 / a, b, 1.0 / b, c, 1.0 / c]
}

fn gauss_reduce(mut a: [f64; 2], mut b: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let n2 = |v: [f64; 2]| v[0] * v[0] + v[1] * v[1];
    if n2(a) > n2(b) {
        std::mem::swap(&mut a, &mut b);
    }
    for _ in 0..100 {
        let mu = ((a[0] * b[0] + a[1] * b[1]) / n2(a)).round();
        b = [b[0] - mu * a[0], b[1] - mu * a[1]];
        if n2(b) >= n2(a) {
            break;
        }
        std::mem::swap(&mut a, &mut b);
    }
    (a, b)
}

/// `τ` in the standard fundamental domain from a reduced basis.
fn tau_of(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    // b / a as complex numbers
    let d = a[0] * a[0] + a[1] * a[1];
    let mut re = (b[0] * a[0] + b[1] * a[1]) / d;
    let mut im = (b[1] * a[0] - b[0] * a[1]) / d;
    if im < 0.0 {
        re = -re;
        im = -im;
    }
    let eps = 1e-12;
    if (re + 0.5).abs() < eps {
        re = 0.5;
    }
    if (re * re + im * im - 1.0).abs() < eps && re < 0.0 {
        re = -re;
    }
    [re, im]
}

/// Flat metric of a torus and its modulus.
pub fn uniformize_torus<T: Real>(m: &DecoratedMetric<T>, opts: &SolveOptions) -> Result<Realization<T>> {
    let t0 = m.triangulation();
    if t0.genus() != 1 {
        return Err(Error::WrongGenus { expected: 1, got: t0.genus() });
    }
    let theta = ConeAngleTarget::flat(t0.num_vertices());
    let report = minimize_e_theta(m, &theta, opts)?;
    let flat = report.delaunay.shifted_metric().expect("all vertices decorated");
    let t = flat.triangulation();
    let lam = |e: usize| flat.lambda()[e];
    let (pos, parent) = develop(t, &lam, &|_| true, &|_| true, 0)?;
    let p = |h: usize| pos[h].expect("every triangle placed");

    let tree_edge: Vec<bool> = {
        let mut v = vec![false; t.num_edges()];
        for h in parent.iter().flatten() {
            v[t.edge(*h)] = true;
        }
        v
    };
    // deck translation carrying the copy of tri(h1) next to tri(h0)
    let translation = |e: usize| {
        let [h0, h1] = t.halfedges(e);
        sub2(p(next(h0)), p(h1))
    };
    let mut uf: Vec<usize> = (0..t.num_vertices()).collect();
    fn root(u: &mut [usize], mut x: usize) -> usize {
        while u[x] != x {
            u[x] = u[u[x]];
            x = u[x];
        }
        x
    }
    let mut generators = Vec::new();
    for e in (0..t.num_edges()).filter(|&e| !tree_edge[e]) {
        let (a, b) = t.endpoints(e);
        let (ra, rb) = (root(&mut uf, a), root(&mut uf, b));
        if ra != rb {
            uf[ra] = rb;
        } else {
            generators.push(e);
        }
    }
    if generators.len() != 2 {
        return Err(Error::LayoutInconsistent(generators.len() as f64));
    }
    let (w1, w2) = (translation(generators[0]), translation(generators[1]));
    let det = w1[0] * w2[1] - w1[1] * w2[0];
    let scale = det.abs().sqrt();
    let mut residual: f64 = 0.0;
    let mut closure: f64 = 0.0;
    for e in (0..t.num_edges()).filter(|&e| !tree_edge[e]) {
        let v = translation(e);
        let x = (v[0] * w2[1] - v[1] * w2[0]) / det;
        let y = (w1[0] * v[1] - w1[1] * v[0]) / det;
        residual = residual.max((x - x.round()).abs().max((y - y.round()).abs()));
        let [h0, h1] = t.halfedges(e);
        let q = [p(next(h1))[0] + v[0], p(next(h1))[1] + v[1]];
        closure = closure.max(norm2(sub2(q, p(h0))) / scale);
    }
    let (a, b) = gauss_reduce(w1, w2);
    let tau = tau_of(a, b);
    let (mut a, mut b) = (a.map(|x| x / scale), b.map(|x| x / scale));
    if a[0] * b[1] - a[1] * b[0] < 0.0 {
        b = b.map(|x| -x);
    }
    if !a.iter().chain(b.iter()).all(|x| x.is_finite()) {
        a = [f64::NAN; 2];
    }
    let mut positions = vec![[T::zero(); 3]; t.num_vertices()];
    for c in 0..t.num_halfedges() {
        let v = t.vertex(c);
        if t.first_corner(v) == c {
            let q = p(c);
            positions[v] = [T::lit(q[0] / scale), T::lit(q[1] / scale), T::zero()];
        }
    }
    let faces = (0..t.num_triangles()).map(|x| t.triangle_vertices(x).to_vec()).collect();
    let length_error = (0..t.num_halfedges())
        .map(|h| {
            let l = f64_of(flat.length(t.edge(h)));
            (norm2(sub2(p(h), p(next(h)))) - l).abs() / l
        })
        .fold(0.0, f64::max);
    Ok(Realization {
        kind: RealizationKind::FlatTorus,
        positions,
        faces,
        diagnostics: Diagnostics {
            closure_residual: T::lit(closure),
            length_error: T::lit(length_error),
            ..Default::default()
        },
        torus: Some(TorusModulus {
            basis: [a.map(T::lit), b.map(T::lit)],
            tau: tau.map(T::lit),
            lattice_residual: T::lit(residual),
        }),
        cone: Some(cone_data(flat, &report)),
    })
}

fn cone_data<T: Real>(flat: DecoratedMetric<T>, report: &SolveReport<T>) -> ConeData<T> {
    ConeData { lengths: flat.lengths(), metric: flat, theta_tilde: report.theta_tilde.clone(), u: report.u.clone() }
}

/// Metric with prescribed cone angles in the discrete conformal class of `m`.
pub fn prescribe_cone_angles<T: Real>(
    m: &DecoratedMetric<T>,
    theta: &ConeAngleTarget<T>,
    opts: &SolveOptions,
) -> Result<Realization<T>> {
    let report = minimize_e_theta(m, theta, opts)?;
    let metric = report.delaunay.shifted_metric().expect("all vertices decorated");
    Ok(Realization {
        kind: RealizationKind::ConeMetric,
        positions: Vec::new(),
        faces: (0..metric.triangulation().num_triangles())
            .map(|x| metric.triangulation().triangle_vertices(x).to_vec())
            .collect(),
        diagnostics: Diagnostics::default(),
        torus: None,
        cone: Some(cone_data(metric, &report)),
    })
}

/// `max_v |Θ_v − Θ̃_v|` of a metric evaluated at `u = 0`.
pub fn angle_error<T: Real>(m: &DecoratedMetric<T>, theta: &ConeAngleTarget<T>) -> Result<T> {
    let n = m.triangulation().num_vertices();
    let ev = e_theta(m, theta, &vec![T::zero(); n])?;
    Ok(ev.gradient.iter().fold(T::zero(), |a, &g| a.max(g.abs())))
}
