//! The Lobachevsky function, the triangle function `f`, and the energies
//! `H_Θ`, `E_Θ` and `Ē` with their gradients and Hessians.

use crate::delaunay::{make_delaunay, split_margin, DelaunayMode, DelaunayResult};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::mesh::{next, prev, Triangulation};
use crate::penner::{ConeAngleTarget, DecoratedMetric, PartialDecoration};
use crate::scalar::{ExtReal, Real};

/// Taylor coefficients of `Cl₂(θ) − θ + θ log|θ|` in odd powers `θ^{2n+1}`,
/// `|B_{2n}| / (2n (2n+1)!)`.
const CLAUSEN_COEF: [f64; 28] = [
    0.013888888888888888,
    6.944444444444444e-05,
    7.873519778281683e-07,
    1.1482216343327455e-08,
    1.8978869988971e-10,
    3.387301370953521e-12,
    6.372636443183181e-14,
    1.2462059912950672e-15,
    2.5105444608999545e-17,
    5.178258806090623e-19,
    1.0887357368300849e-20,
    2.325744114302087e-22,
    5.03519521314739e-24,
    1.1026499294381215e-25,
    2.4386585509007344e-27,
    5.440142678856253e-29,
    1.2228340131217352e-30,
    2.767263468967951e-32,
    6.3000905918320136e-34,
    1.4420868388418476e-35,
    3.3170939991595428e-37,
    7.663913557920658e-39,
    1.7778714733830659e-40,
    4.1396058982341375e-42,
    9.671557036081102e-44,
    2.2667187016766123e-45,
    5.327956311328254e-47,
    1.2557248389564336e-48,
];

/// Milnor's Lobachevsky function `Л(x) = −∫₀ˣ log|2 sin t| dt`.
pub fn lobachevsky<T: Real>(x: T) -> T {
    if !x.is_finite() {
        return T::nan();
    }
    let pi = T::PI();
    let mut y = x - pi * (x / pi).round();
    let sign = if y < T::zero() { -T::one() } else { T::one() };
    y = y.abs();
    if y == T::zero() {
        return T::zero();
    }
    // Л(x) = Cl₂(2x)/2 with 2y ∈ (0, π].
    let th = y + y;
    let th2 = th * th;
    let mut p = th;
    let mut s = th - th * th.ln();
    for &c in CLAUSEN_COEF.iter() {
        p = p * th2;
        let term = T::lit(c) * p;
        s = s + term;
        if term < T::epsilon() * s.abs() * T::lit(1e-3) {
            break;
        }
    }
    sign * s * T::lit(0.5)
}

fn check_sides<T: Real>(l: [T; 3]) -> Option<[T; 3]> {
    let d = [
        (l[1] + l[2] - l[0]) * T::lit(0.5),
        (l[2] + l[0] - l[1]) * T::lit(0.5),
        (l[0] + l[1] - l[2]) * T::lit(0.5),
    ];
    (d.iter().all(|&x| x > T::zero()) && l.iter().all(|x| x.is_finite())).then_some(d)
}

/// `(P_i, Q_i)` with `tan(α_i/2) = √(P_i/Q_i)`.
fn half_angle_terms<T: Real>(l: [T; 3]) -> Option<[(T, T); 3]> {
    let d = check_sides(l)?;
    let s = (l[0] + l[1] + l[2]) * T::lit(0.5);
    Some([(d[1] * d[2], s * d[0]), (d[2] * d[0], s * d[1]), (d[0] * d[1], s * d[2])])
}

fn angles_of<T: Real>(l: [T; 3]) -> Option<[T; 3]> {
    let two = T::lit(2.0);
    half_angle_terms(l).map(|pq| pq.map(|(p, q)| two * p.sqrt().atan2(q.sqrt())))
}

fn cotangents_of<T: Real>(l: [T; 3]) -> Option<[T; 3]> {
    half_angle_terms(l).map(|pq| pq.map(|(p, q)| (q - p) / (T::lit(2.0) * (p * q).sqrt())))
}

fn lengths_from_lambda<T: Real>(lam: [T; 3]) -> [T; 3] {
    let top = lam[0].max(lam[1]).max(lam[2]);
    lam.map(|x| ((x - top) * T::lit(0.5)).exp())
}

/// Angles opposite the sides of a euclidean triangle.
pub fn euclidean_angles<T: Real>(l: [T; 3]) -> Result<[T; 3]> {
    if l.iter().any(|&x| !(x > T::zero())) {
        return Err(violated(l));
    }
    let top = l[0].max(l[1]).max(l[2]);
    angles_of(l.map(|x| x / top)).ok_or_else(|| violated(l))
}

fn violated<T: Real>(l: [T; 3]) -> Error {
    let f = l.map(|x| x.to_f64().unwrap_or(f64::NAN));
    Error::TriangleInequalityViolated(f[0], f[1], f[2])
}

/// Angles opposite each side for side lengths `e^{λ/2}`.
pub fn corner_angles<T: Real>(lam: [T; 3]) -> Option<[T; 3]> {
    angles_of(lengths_from_lambda(lam))
}

/// Cotangents of the angles opposite each side for side lengths `e^{λ/2}`.
pub fn corner_cotangents<T: Real>(lam: [T; 3]) -> Option<[T; 3]> {
    cotangents_of(lengths_from_lambda(lam))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleF<T> {
    pub value: T,
    /// The angles `α_i`.
    pub gradient: [T; 3],
    pub hessian: [[T; 3]; 3],
}

/// `f(x) = Σ α_i x_i + Л(α_i)` where `α` are the angles of the triangle with
/// sides `e^{x_i}`.
pub fn triangle_f<T: Real>(x: [T; 3]) -> Result<TriangleF<T>> {
    let lam = x.map(|v| v + v);
    let (a, c) = match (corner_angles(lam), corner_cotangents(lam)) {
        (Some(a), Some(c)) => (a, c),
        _ => return Err(Error::OutsideDomainA(0)),
    };
    let value = (0..3).fold(T::zero(), |s, i| s + a[i] * x[i] + lobachevsky(a[i]));
    let hessian = [
        [c[1] + c[2], -c[2], -c[1]],
        [-c[2], c[2] + c[0], -c[0]],
        [-c[1], -c[0], c[0] + c[1]],
    ];
    Ok(TriangleF { value, gradient: a, hessian })
}

fn log_horocycle_lengths<T: Real>(m: &DecoratedMetric<T>) -> Vec<T> {
    (0..m.triangulation().num_vertices())
        .map(|v| m.log_horocycle_length(v).expect("vertex in range"))
        .collect()
}

fn check_theta<T: Real>(t: &Triangulation, theta: &ConeAngleTarget<T>) -> Result<()> {
    let n = t.num_vertices();
    if theta.values().len() != n {
        return Err(Error::LengthMismatch { expected: n, got: theta.values().len() });
    }
    Ok(())
}

/// `H_Θ = Σ_t 2f(λ_t/2) − π Σ_e λ_e − Σ_v Θ_v log c_v` on the given triangulation.
pub fn h_theta<T: Real>(m: &DecoratedMetric<T>, theta: &ConeAngleTarget<T>) -> Result<T> {
    let t = m.triangulation();
    check_theta(t, theta)?;
    let half = T::lit(0.5);
    let mut value = T::zero();
    for tri in 0..t.num_triangles() {
        let f = triangle_f(m.side_lambdas(tri).map(|x| x * half)).map_err(|_| Error::OutsideDomainA(tri))?;
        value = value + f.value + f.value;
    }
    let lsum = m.lambda().iter().fold(T::zero(), |a, &b| a + b);
    let lc = log_horocycle_lengths(m);
    let csum = theta.values().iter().zip(&lc).fold(T::zero(), |a, (&th, &c)| a + th * c);
    Ok(value - T::PI() * lsum - csum)
}

/// Gradient of [`h_theta`] with respect to λ.
pub fn h_theta_gradient<T: Real>(m: &DecoratedMetric<T>, theta: &ConeAngleTarget<T>) -> Result<Vec<T>> {
    let t = m.triangulation();
    check_theta(t, theta)?;
    let mut g = vec![-T::PI(); t.num_edges()];
    for tri in 0..t.num_triangles() {
        let a = corner_angles(m.side_lambdas(tri)).ok_or(Error::OutsideDomainA(tri))?;
        for (k, e) in t.triangle_edges(tri).into_iter().enumerate() {
            g[e] = g[e] + a[k];
        }
    }
    let lc = log_horocycle_lengths(m);
    let half = T::lit(0.5);
    for c in 0..t.num_halfedges() {
        let v = t.vertex(c);
        let w = theta.values()[v] * (m.log_corner_arc(c) - lc[v]).exp() * half;
        let opp = t.edge(next(c));
        g[opp] = g[opp] - w;
        for h in [c, prev(c)] {
            let e = t.edge(h);
            g[e] = g[e] + w;
        }
    }
    Ok(g)
}

/// Value, gradient and Hessian of an energy at one point.
#[derive(Clone, Debug)]
pub struct EnergyEvaluation<T> {
    pub value: T,
    /// Indexed by free vertex.
    pub gradient: Vec<T>,
    /// Over free vertices; the quadratic form is the second differential.
    pub hessian: SymMatrix<T>,
    pub delaunay: DelaunayResult<T>,
    /// Angle sums over all vertices, zero at vertices outside the kept subcomplex.
    pub theta_tilde: Vec<T>,
}

struct Assembly<T> {
    f_sum: T,
    lambda_sum: T,
    theta_tilde: Vec<T>,
    deg1: Vec<usize>,
    deg2: Vec<usize>,
    hessian: SymMatrix<T>,
}

/// Sums over the kept triangles and edges of the chart with `λ̃ = λ + u_a + u_b`.
fn assemble<T: Real>(chart: &DecoratedMetric<T>, u: &[T], keep_vertex: Option<usize>) -> Result<Assembly<T>> {
    let t = chart.triangulation();
    let n = t.num_vertices();
    let kept = |v: usize| keep_vertex != Some(v);
    let lt = |e: usize| {
        let (a, b) = t.endpoints(e);
        chart.lambda()[e] + u[a] + u[b]
    };
    let half = T::lit(0.5);
    let mut f_sum = T::zero();
    let mut angle = vec![T::zero(); t.num_halfedges()];
    let mut in_sub = vec![false; t.num_halfedges()];
    let mut hessian = SymMatrix::zeros(n);
    for tri in 0..t.num_triangles() {
        if !t.triangle_vertices(tri).into_iter().all(kept) {
            continue;
        }
        let sides = t.triangle_edges(tri).map(lt);
        let f = triangle_f(sides.map(|x| x * half)).map_err(|_| Error::OutsideDomainA(tri))?;
        let cot = corner_cotangents(sides).ok_or(Error::OutsideDomainA(tri))?;
        f_sum = f_sum + f.value + f.value;
        for k in 0..3 {
            let c = 3 * tri + k;
            // the angle at corner k is opposite side k + 1
            angle[c] = f.gradient[(k + 1) % 3];
            in_sub[c] = true;
            hessian.add_edge(t.vertex(c), t.head(c), half * cot[k]);
        }
    }
    let mut lambda_sum = T::zero();
    for e in 0..t.num_edges() {
        let (a, b) = t.endpoints(e);
        if kept(a) && kept(b) {
            lambda_sum = lambda_sum + lt(e);
        }
    }
    let mut theta_tilde = vec![T::zero(); n];
    let mut deg1 = vec![0; n];
    let mut deg2 = vec![0; n];
    for v in (0..n).filter(|&v| kept(v)) {
        for c in t.vertex_corners(v) {
            if in_sub[c] {
                theta_tilde[v] = theta_tilde[v] + angle[c];
                deg2[v] += 1;
            }
            if kept(t.head(c)) {
                deg1[v] += 1;
            }
        }
    }
    Ok(Assembly { f_sum, lambda_sum, theta_tilde, deg1, deg2, hessian })
}

fn finite_u<T: Real>(t: &Triangulation, u: &[T]) -> Result<()> {
    if u.len() != t.num_vertices() {
        return Err(Error::LengthMismatch { expected: t.num_vertices(), got: u.len() });
    }
    if let Some(v) = u.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(v));
    }
    Ok(())
}

/// `E_Θ(u)`: `H_Θ` on the Delaunay triangulation of the shifted metric.
pub fn e_theta<T: Real>(m: &DecoratedMetric<T>, theta: &ConeAngleTarget<T>, u: &[T]) -> Result<EnergyEvaluation<T>> {
    check_theta(m.triangulation(), theta)?;
    e_theta_warm(m, &log_horocycle_lengths(m), theta, u)
}

/// [`e_theta`] starting the flips from `chart`, any triangulation carrying the
/// same decorated surface; `log_c` are the horocycle lengths of the input.
pub(crate) fn e_theta_warm<T: Real>(
    chart: &DecoratedMetric<T>,
    log_c: &[T],
    theta: &ConeAngleTarget<T>,
    u: &[T],
) -> Result<EnergyEvaluation<T>> {
    finite_u(chart.triangulation(), u)?;
    let delaunay = make_delaunay(chart, &PartialDecoration::finite(u)?, DelaunayMode::Plain)?;
    let a = assemble(&delaunay.metric, u, None)?;
    let th = theta.values();
    let mut value = a.f_sum - T::PI() * a.lambda_sum;
    for v in 0..u.len() {
        value = value - th[v] * (log_c[v] - u[v]);
    }
    let gradient = (0..u.len()).map(|v| th[v] - a.theta_tilde[v]).collect();
    Ok(EnergyEvaluation { value, gradient, hessian: a.hessian, delaunay, theta_tilde: a.theta_tilde })
}

/// The vertices other than `vinf`, in increasing order; the index space of `Ē`.
pub fn free_vertices(t: &Triangulation, vinf: usize) -> Vec<usize> {
    (0..t.num_vertices()).filter(|&v| v != vinf).collect()
}

/// `Ē^{v∞}(u)` for `u` on the free vertices (see [`free_vertices`]).
pub fn e_bar<T: Real>(m: &DecoratedMetric<T>, vinf: usize, u: &[T]) -> Result<EnergyEvaluation<T>> {
    m.triangulation().check_vertex(vinf)?;
    e_bar_warm(m, &log_horocycle_lengths(m), vinf, u)
}

pub(crate) fn e_bar_warm<T: Real>(
    chart: &DecoratedMetric<T>,
    log_c: &[T],
    vinf: usize,
    u: &[T],
) -> Result<EnergyEvaluation<T>> {
    let t = chart.triangulation();
    let free = free_vertices(t, vinf);
    if u.len() != free.len() {
        return Err(Error::LengthMismatch { expected: free.len(), got: u.len() });
    }
    let mut full = vec![T::zero(); t.num_vertices()];
    for (k, &v) in free.iter().enumerate() {
        full[v] = u[k];
    }
    let dec = PartialDecoration::with_missing(&full, &[vinf])?;
    let delaunay = make_delaunay(chart, &dec, DelaunayMode::Adjusted)?;
    let a = assemble(&delaunay.metric, &full, Some(vinf))?;
    let two_pi = T::TAU();
    let pi = T::PI();
    let mut value = a.f_sum - pi * a.lambda_sum;
    for &v in &free {
        value = value - two_pi * (log_c[v] - full[v]);
    }
    let gradient = free
        .iter()
        .map(|&v| -a.theta_tilde[v] + pi * (T::count(a.deg2[v] + 2) - T::count(a.deg1[v])))
        .collect();
    let hessian = a.hessian.principal(&free);
    Ok(EnergyEvaluation { value, gradient, hessian, delaunay, theta_tilde: a.theta_tilde })
}

/// Deviations between the two charts on either side of a neutral edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossFlipReport<T> {
    pub value_before: T,
    pub value_after: T,
    pub value_deviation: T,
    pub gradient_deviation: T,
    pub hessian_deviation: T,
    /// Largest disagreement of a directional third derivative; not expected to vanish.
    pub third_derivative_deviation: T,
}

/// Compares `H_Θ` in the chart of `m` with `H_Θ ∘ φ` in the chart obtained by
/// flipping the neutral edge `e`, where `φ` is the Ptolemy chart transition.
pub fn crossflip_c2_check<T: Real>(
    m: &DecoratedMetric<T>,
    theta: &ConeAngleTarget<T>,
    e: usize,
) -> Result<CrossFlipReport<T>> {
    let t = m.triangulation();
    t.check_edge(e)?;
    check_theta(t, theta)?;
    if t.is_folded(e) {
        return Err(Error::DegenerateQuad(e));
    }
    let zero = vec![ExtReal::Finite(T::zero()); t.num_vertices()];
    let s = split_margin(m, &zero, e);
    if s.m0.abs() > s.tol0 {
        return Err(Error::NotNeutral { edge: e, margin: s.m0.to_f64().unwrap_or(f64::NAN) });
    }
    let mut t2 = t.clone();
    let quad = t2.flip_in_place(e)?;
    let chart2 = |lam: &[T]| -> (DecoratedMetric<T>, [T; 4]) {
        let h = T::lit(0.5);
        let (a, b, c, d) = (lam[quad[0]], lam[quad[1]], lam[quad[2]], lam[quad[3]]);
        let mut out = lam.to_vec();
        out[e] = crate::penner::ptolemy_update(a, b, c, d, lam[e]);
        let (p, q) = ((a + c) * h, (b + d) * h);
        let w1 = T::one() / (T::one() + (q - p).exp());
        let w2 = T::one() - w1;
        (DecoratedMetric::new(t2.clone(), out).expect("finite"), [w1, w2, w1, w2])
    };
    let value2 = |lam: &[T]| -> Result<T> { h_theta(&chart2(lam).0, theta) };
    let grad1 = |lam: &[T]| -> Result<Vec<T>> { h_theta_gradient(&DecoratedMetric::new(t.clone(), lam.to_vec())?, theta) };
    let grad2 = |lam: &[T]| -> Result<Vec<T>> {
        let (m2, w) = chart2(lam);
        let g2 = h_theta_gradient(&m2, theta)?;
        let mut g = g2.clone();
        g[e] = -g2[e];
        for k in 0..4 {
            g[quad[k]] = g[quad[k]] + g2[e] * w[k];
        }
        Ok(g)
    };
    let lam = m.lambda().to_vec();
    let v1 = h_theta(m, theta)?;
    let v2 = value2(&lam)?;
    let g1 = grad1(&lam)?;
    let g2 = grad2(&lam)?;
    let gdev = g1.iter().zip(&g2).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()));

    let ne = lam.len();
    let fd = T::lit(1e-5);
    let mut hdev = T::zero();
    for j in 0..ne {
        let mut p = lam.clone();
        let mut q = lam.clone();
        p[j] = p[j] + fd;
        q[j] = q[j] - fd;
        let (a1, b1, a2, b2) = (grad1(&p)?, grad1(&q)?, grad2(&p)?, grad2(&q)?);
        for i in 0..ne {
            let h1 = (a1[i] - b1[i]) / (fd + fd);
            let h2 = (a2[i] - b2[i]) / (fd + fd);
            hdev = hdev.max((h1 - h2).abs());
        }
    }

    // Directional third derivatives along coordinate axes of the quadrilateral.
    let step = T::lit(1e-3);
    let mut third = T::zero();
    let mut dirs: Vec<usize> = quad.to_vec();
    dirs.push(e);
    dirs.sort_unstable();
    dirs.dedup();
    for &k in &dirs {
        let at = |s: T| {
            let mut p = lam.clone();
            p[k] = p[k] + s;
            p
        };
        let d1 = |g: &dyn Fn(&[T]) -> Result<Vec<T>>| -> Result<T> {
            let (a, b, c) = (g(&at(step))?[k], g(&lam)?[k], g(&at(-step))?[k]);
            Ok((a - b - b + c) / (step * step))
        };
        let (x, y) = (d1(&grad1)?, d1(&grad2)?);
        third = third.max((x - y).abs());
    }
    Ok(CrossFlipReport {
        value_before: v1,
        value_after: v2,
        value_deviation: (v1 - v2).abs(),
        gradient_deviation: gdev,
        hessian_deviation: hdev,
        third_derivative_deviation: third,
    })
}

/// `Σ_v (2π − Θ̃_v)` for the piecewise euclidean metric of `m` on its own
/// triangulation.
pub fn total_defect<T: Real>(m: &DecoratedMetric<T>) -> Result<T> {
    let t = m.triangulation();
    let mut sum = T::TAU() * T::count(t.num_vertices());
    for tri in 0..t.num_triangles() {
        let a = corner_angles(m.side_lambdas(tri)).ok_or(Error::OutsideDomainA(tri))?;
        sum = sum - a[0] - a[1] - a[2];
    }
    Ok(sum)
}

/// Euclidean angle sums `Θ̃_v` of `m` on its own triangulation, in corner order.
pub fn angle_sums<T: Real>(m: &DecoratedMetric<T>) -> Result<Vec<T>> {
    let t = m.triangulation();
    let mut angle = vec![T::zero(); t.num_halfedges()];
    for tri in 0..t.num_triangles() {
        let a = corner_angles(m.side_lambdas(tri)).ok_or(Error::OutsideDomainA(tri))?;
        for k in 0..3 {
            angle[3 * tri + k] = a[(k + 1) % 3];
        }
    }
    Ok((0..t.num_vertices())
        .map(|v| t.vertex_corners(v).into_iter().fold(T::zero(), |s, c| s + angle[c]))
        .collect())
}
