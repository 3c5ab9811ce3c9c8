//! Ideal Delaunay triangulations of decorated and partially decorated surfaces.
//!
//! The working representation is the base λ of the input decoration together
//! with the shift `u`. The weighted margin of an edge is exactly the margin of
//! the shifted metric, so flips never need a finite stand-in for `u = +∞`.

use std::collections::VecDeque;

use crate::energy::corner_cotangents;
use crate::error::{Error, Result};
use crate::mesh::{next, prev, tri_of, Triangulation};
use crate::penner::{DecoratedMetric, FlipRecord, PartialDecoration};
use crate::scalar::{ExtReal, Real};

/// Relative tolerance below which a margin counts as zero.
pub const MARGIN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DelaunayMode {
    /// Flip every edge with a strictly negative margin.
    Plain,
    /// Additionally fan every punctured face from its undecorated center.
    Adjusted,
}

/// The triangles incident to an undecorated vertex in an adjusted Delaunay
/// triangulation.
#[derive(Clone, Debug, PartialEq)]
pub struct PuncturedFace {
    pub center: usize,
    pub triangles: Vec<usize>,
    /// Edges from the center, in corner order.
    pub spokes: Vec<usize>,
    /// Other endpoints of the spokes, in the same order.
    pub peripheral: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct DelaunayResult<T> {
    /// Base λ transported to the Delaunay triangulation.
    pub metric: DecoratedMetric<T>,
    pub decoration: PartialDecoration<T>,
    pub flips: Vec<FlipRecord<T>>,
    /// Edges whose margin vanishes within tolerance.
    pub nonessential: Vec<usize>,
    pub punctured_faces: Vec<PuncturedFace>,
}

impl<T: Real> DelaunayResult<T> {
    pub fn triangulation(&self) -> &Triangulation {
        self.metric.triangulation()
    }

    /// `λ̃_e = λ_e + u_a + u_b`, infinite at undecorated ends.
    pub fn shifted_lambda(&self, e: usize) -> ExtReal<T> {
        let (a, b) = self.triangulation().endpoints(e);
        ExtReal::Finite(self.metric.lambda()[e]).add(self.decoration.get(a)).add(self.decoration.get(b))
    }

    /// The shifted metric, when every vertex is decorated.
    pub fn shifted_metric(&self) -> Option<DecoratedMetric<T>> {
        let u = self.decoration.all_finite()?;
        self.metric.fiber_shift(&u).ok()
    }

    pub fn is_nonessential(&self, e: usize) -> bool {
        self.nonessential.binary_search(&e).is_ok()
    }
}

/// Margin split into the part at decorated vertices and the part at
/// undecorated ones, the latter carrying an infinitesimal factor.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SplitMargin<T> {
    pub m0: T,
    pub m1: T,
    pub tol0: T,
    pub tol1: T,
}

impl<T: Real> SplitMargin<T> {
    fn violates(&self, mode: DelaunayMode) -> bool {
        if self.m0 < -self.tol0 {
            return true;
        }
        mode == DelaunayMode::Adjusted && self.m0.abs() <= self.tol0 && self.m1 < -self.tol1
    }

    fn is_zero(&self) -> bool {
        self.m0.abs() <= self.tol0
    }
}

pub(crate) fn split_margin<T: Real>(m: &DecoratedMetric<T>, u: &[ExtReal<T>], e: usize) -> SplitMargin<T> {
    let t = m.triangulation();
    let [h0, h1] = t.halfedges(e);
    let zero = T::zero();
    let (mut m0, mut m1, mut s0, mut s1) = (zero, zero, zero, zero);
    let mut add = |c: usize, sign: T| {
        let arc = m.corner_arc(c);
        match u[t.vertex(c)] {
            ExtReal::Finite(x) => {
                let w = arc * (-x).exp();
                m0 = m0 + sign * w;
                s0 = s0 + w;
            }
            ExtReal::Infinite => {
                m1 = m1 + sign * arc;
                s1 = s1 + arc;
            }
        }
    };
    for h in [h0, h1] {
        add(h, T::one());
        add(next(h), T::one());
        add(prev(h), -T::one());
    }
    let rel = T::tol(MARGIN_TOL);
    SplitMargin { m0, m1, tol0: rel * s0, tol1: rel * s1 }
}

fn check_decoration<T: Real>(m: &DecoratedMetric<T>, u: &PartialDecoration<T>) -> Result<()> {
    let n = m.triangulation().num_vertices();
    if u.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: u.len() });
    }
    Ok(())
}

/// Local Delaunay margin of `e`: arcs at the ends of `e` minus arcs opposite
/// it, each weighted by `e^{−u}` at its vertex. Non-negative means Delaunay.
pub fn delaunay_margin<T: Real>(m: &DecoratedMetric<T>, u: &PartialDecoration<T>, e: usize) -> Result<T> {
    check_decoration(m, u)?;
    let t = m.triangulation();
    t.check_edge(e)?;
    if t.is_folded(e) {
        return Err(Error::DegenerateQuad(e));
    }
    Ok(split_margin(m, u.values(), e).m0)
}

/// Flips `m` in place until no edge violates the condition for `mode`.
pub(crate) fn flip_until_delaunay<T: Real>(
    m: &mut DecoratedMetric<T>,
    u: &[ExtReal<T>],
    mode: DelaunayMode,
    log: &mut Vec<FlipRecord<T>>,
) -> Result<()> {
    let ne = m.triangulation().num_edges();
    let cap = 1000 * ne + 10000;
    let mut queued = vec![true; ne];
    let mut queue: VecDeque<usize> = (0..ne).collect();
    let mut count = 0usize;
    while let Some(e) = queue.pop_front() {
        queued[e] = false;
        if m.triangulation().is_folded(e) || !split_margin(m, u, e).violates(mode) {
            continue;
        }
        if count == cap {
            return Err(Error::FlipLimitExceeded(cap));
        }
        let [h0, h1] = m.triangulation().halfedges(e);
        let quad = [next(h0), prev(h0), next(h1), prev(h1)].map(|h| m.triangulation().edge(h));
        log.push(m.flip_in_place(e)?);
        count += 1;
        for f in quad {
            if !queued[f] {
                queued[f] = true;
                queue.push_back(f);
            }
        }
    }
    Ok(())
}

/// Flips to an (adjusted) ideal Delaunay triangulation.
pub fn make_delaunay<T: Real>(
    m: &DecoratedMetric<T>,
    u: &PartialDecoration<T>,
    mode: DelaunayMode,
) -> Result<DelaunayResult<T>> {
    check_decoration(m, u)?;
    let mut work = m.clone();
    let mut flips = Vec::new();
    flip_until_delaunay(&mut work, u.values(), mode, &mut flips)?;
    Ok(finish(work, u.clone(), flips))
}

pub(crate) fn finish<T: Real>(
    metric: DecoratedMetric<T>,
    decoration: PartialDecoration<T>,
    flips: Vec<FlipRecord<T>>,
) -> DelaunayResult<T> {
    let t = metric.triangulation();
    let nonessential = (0..t.num_edges())
        .filter(|&e| !t.is_folded(e) && split_margin(&metric, decoration.values(), e).is_zero())
        .collect();
    let punctured_faces = (0..t.num_vertices())
        .filter(|&v| !decoration.is_decorated(v))
        .map(|v| {
            let corners = t.vertex_corners(v);
            let mut triangles: Vec<usize> = corners.iter().map(|&c| tri_of(c)).collect();
            triangles.sort_unstable();
            triangles.dedup();
            let spokes: Vec<usize> = corners.iter().map(|&c| t.edge(c)).collect();
            let peripheral = corners.iter().map(|&c| t.head(c)).collect();
            PuncturedFace { center: v, triangles, spokes, peripheral }
        })
        .collect();
    DelaunayResult { metric, decoration, flips, nonessential, punctured_faces }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DelaunayCheck<T> {
    pub ok: bool,
    /// `(edge, margin)` for every edge with a strictly negative margin.
    pub violations: Vec<(usize, T)>,
    pub nonessential: Vec<usize>,
}

/// Scans every edge with [`delaunay_margin`]. Folded edges are always Delaunay.
pub fn check_delaunay<T: Real>(m: &DecoratedMetric<T>, u: &PartialDecoration<T>) -> Result<DelaunayCheck<T>> {
    check_decoration(m, u)?;
    let t = m.triangulation();
    let mut violations = Vec::new();
    let mut nonessential = Vec::new();
    for e in 0..t.num_edges() {
        if t.is_folded(e) {
            continue;
        }
        let s = split_margin(m, u.values(), e);
        if s.m0 < -s.tol0 {
            violations.push((e, s.m0));
        } else if s.is_zero() {
            nonessential.push(e);
        }
    }
    Ok(DelaunayCheck { ok: violations.is_empty(), violations, nonessential })
}

/// Whether `ℓ = e^{λ/2}` satisfies the strict triangle inequalities in every triangle.
pub fn triangle_inequality_check<T: Real>(m: &DecoratedMetric<T>) -> bool {
    (0..m.triangulation().num_triangles()).all(|t| {
        let l = m.side_lambdas(t);
        let top = l[0].max(l[1]).max(l[2]);
        let s = l.map(|x| ((x - top) * T::lit(0.5)).exp());
        s[0] < s[1] + s[2] && s[1] < s[2] + s[0] && s[2] < s[0] + s[1]
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossCheck<T> {
    pub consistent: bool,
    /// `(edge, cot α + cot α′, margin)` where the two predicates disagree in sign.
    pub mismatches: Vec<(usize, T, T)>,
}

/// Compares the sign of the ideal margin (`u ≡ 0`) with the euclidean
/// predicate `cot α + cot α′` on every non-folded edge.
pub fn euclidean_delaunay_crosscheck<T: Real>(m: &DecoratedMetric<T>) -> Result<CrossCheck<T>> {
    let t = m.triangulation();
    let u = vec![ExtReal::Finite(T::zero()); t.num_vertices()];
    let mut cots = vec![T::zero(); t.num_halfedges()];
    for tri in 0..t.num_triangles() {
        let l = m.side_lambdas(tri);
        let c = corner_cotangents(l).ok_or_else(|| {
            let len = l.map(|x| (x * T::lit(0.5)).exp().to_f64().unwrap_or(f64::NAN));
            Error::TriangleInequalityViolated(len[0], len[1], len[2])
        })?;
        cots[3 * tri..3 * tri + 3].copy_from_slice(&c);
    }
    let rel = T::tol(MARGIN_TOL);
    let mut mismatches = Vec::new();
    for e in 0..t.num_edges() {
        if t.is_folded(e) {
            continue;
        }
        let [h0, h1] = t.halfedges(e);
        let (c0, c1) = (cots[h0], cots[h1]);
        let w = c0 + c1;
        let wtol = rel * (c0.abs() + c1.abs()).max(T::one());
        let s = split_margin(m, &u, e);
        let bad = (w > wtol && s.m0 < -s.tol0) || (w < -wtol && s.m0 > s.tol0);
        if bad {
            mismatches.push((e, w, s.m0));
        }
    }
    Ok(CrossCheck { consistent: mismatches.is_empty(), mismatches })
}

/// Signed distance δ between the horocycles at `v1` and `v2`, minimized over
/// lifts to the universal cover.
pub fn horocycle_distance<T: Real>(m: &DecoratedMetric<T>, v1: usize, v2: usize) -> Result<T> {
    let t = m.triangulation();
    t.check_vertex(v1)?;
    t.check_vertex(v2)?;
    if v1 == v2 {
        return Err(Error::SameVertex(v1));
    }
    let n = t.num_vertices();
    let mut u = vec![ExtReal::Infinite; n];
    u[v2] = ExtReal::Finite(T::zero());
    let dec = PartialDecoration::new(u)?;
    let d = make_delaunay(m, &dec, DelaunayMode::Adjusted)?;
    let face = d
        .punctured_faces
        .iter()
        .find(|f| f.center == v1)
        .expect("undecorated vertex has a punctured face");
    let mut best: Option<T> = None;
    for (&e, &p) in face.spokes.iter().zip(&face.peripheral) {
        if p != v2 {
            continue;
        }
        let l = d.metric.lambda()[e];
        match best {
            None => best = Some(l),
            Some(b) => {
                let scale = b.abs().max(l.abs()).max(T::one());
                if (b - l).abs() > T::tol(1e-9) * scale {
                    return Err(Error::InconsistentDistance(
                        b.to_f64().unwrap_or(f64::NAN),
                        l.to_f64().unwrap_or(f64::NAN),
                    ));
                }
            }
        }
    }
    best.ok_or_else(|| Error::NotRealizable(format!("no edge joins {v1} and {v2} after flipping")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Gluing;

    fn sphere3() -> Triangulation {
        Triangulation::from_gluings(&[Gluing::new(0, 0, 1, 0), Gluing::new(0, 1, 1, 2), Gluing::new(0, 2, 1, 1)], None)
            .unwrap()
    }

    #[test]
    fn symmetric_margin_is_two() {
        let m = DecoratedMetric::new(sphere3(), vec![0.0f64; 3]).unwrap();
        let u = PartialDecoration::zero(3);
        assert!((delaunay_margin(&m, &u, 0).unwrap() - 2.0).abs() < 1e-15);
    }
}
