#![allow(dead_code)]

use uniformizer::linalg::SymMatrix;
use uniformizer::penner::arc_lengths;
use uniformizer::{make_delaunay, DecoratedMetric, DelaunayMode, PartialDecoration};

pub const FD_STEP: f64 = 1e-5;

/// `Л(x) = −∫₀ˣ log|2 sin t| dt` by composite Simpson on the smooth part
/// `log(2 sin t / t)`, with `∫₀ˣ log t dt` done exactly.
pub fn lobachevsky_quadrature(x: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let y = x - pi * (x / pi).round();
    let (sign, y) = if y < 0.0 { (-1.0, -y) } else { (1.0, y) };
    let (sign, y) = if y > pi / 2.0 { (-sign, (pi - y).min(pi / 2.0)) } else { (sign, y) };
    if y == 0.0 {
        return 0.0;
    }
    let g = |t: f64| if t == 0.0 { 2f64.ln() } else { (2.0 * t.sin() / t).ln() };
    let n = 4000;
    let h = y / n as f64;
    let mut s = g(0.0) + g(y);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    sign * (-(y * y.ln() - y) - s * h / 3.0)
}

pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize) -> f64 {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[i] += FD_STEP;
    b[i] -= FD_STEP;
    (f(&a) - f(&b)) / (2.0 * FD_STEP)
}

/// Largest deviation between an analytic gradient and central differences.
pub fn gradient_error(f: impl Fn(&[f64]) -> f64, grad: &[f64], x: &[f64]) -> f64 {
    (0..x.len()).map(|i| (central_difference(&f, x, i) - grad[i]).abs()).fold(0.0, f64::max)
}

/// Largest deviation between an analytic Hessian and central differences of the gradient.
pub fn hessian_error(g: impl Fn(&[f64]) -> Vec<f64>, hess: &SymMatrix<f64>, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[j] += FD_STEP;
        b[j] -= FD_STEP;
        let (ga, gb) = (g(&a), g(&b));
        for i in 0..x.len() {
            worst = worst.max(((ga[i] - gb[i]) / (2.0 * FD_STEP) - hess.get(i, j)).abs());
        }
    }
    worst
}

/// Moves λ on edge `e` so that its quadrilateral becomes cocircular (margin 0 at `u ≡ 0`).
pub fn make_neutral(m: &DecoratedMetric<f64>, e: usize) -> DecoratedMetric<f64> {
    let t = m.triangulation();
    let (mut ends, mut opposite) = (0.0, 0.0);
    for h in t.halfedges(e) {
        let tri = h / 3;
        let k = h % 3;
        let l = m.side_lambdas(tri);
        let (b, c) = (l[(k + 1) % 3], l[(k + 2) % 3]);
        ends += ((b - c) / 2.0).exp() + ((c - b) / 2.0).exp();
        opposite += (-(b + c) / 2.0).exp();
    }
    let mut lam = m.lambda().to_vec();
    lam[e] = (ends / opposite).ln();
    let out = DecoratedMetric::new(t.clone(), lam).unwrap();
    debug_assert!({
        let a = arc_lengths(out.side_lambdas(t.halfedges(e)[0] / 3));
        a.iter().all(|x| x.is_finite())
    });
    out
}

/// A Delaunay metric with one neutral edge, or `None` if the chosen edge is folded.
pub fn neutral_instance(m: &DecoratedMetric<f64>, pick: usize) -> Option<(DecoratedMetric<f64>, usize)> {
    let n = m.triangulation().num_vertices();
    let d = make_delaunay(m, &PartialDecoration::zero(n), DelaunayMode::Plain).ok()?.metric;
    let t = d.triangulation();
    let e = (0..t.num_edges()).map(|k| (k + pick) % t.num_edges()).find(|&e| !t.is_folded(e))?;
    Some((make_neutral(&d, e), e))
}
