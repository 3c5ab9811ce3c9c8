//! Penner coordinates of decorated hyperbolic surfaces.
//!
//! `λ_e` is the signed distance between the horocycles at the ends of `e`;
//! the euclidean length is `ℓ_e = e^{λ_e/2}`. All arithmetic stays in λ.

use crate::error::{Error, Result};
use crate::mesh::{next, prev, Triangulation};
use crate::scalar::{log_add_exp, ExtReal, Real};

/// A triangulation with one Penner coordinate per edge.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoratedMetric<T> {
    tri: Triangulation,
    lambda: Vec<T>,
}

/// One executed flip: the edge id and its λ before and after.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipRecord<T> {
    pub edge: usize,
    pub before: T,
    pub after: T,
}

impl<T: Real> DecoratedMetric<T> {
    pub fn new(tri: Triangulation, lambda: Vec<T>) -> Result<Self> {
        if lambda.len() != tri.num_edges() {
            return Err(Error::LengthMismatch { expected: tri.num_edges(), got: lambda.len() });
        }
        if let Some(e) = lambda.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(e));
        }
        Ok(DecoratedMetric { tri, lambda })
    }

    /// From euclidean edge lengths, `λ = 2 log ℓ`.
    pub fn from_lengths(tri: Triangulation, lengths: &[T]) -> Result<Self> {
        if let Some(e) = lengths.iter().position(|&l| !(l > T::zero()) || !l.is_finite()) {
            return Err(Error::NonFinite(e));
        }
        let two = T::lit(2.0);
        Self::new(tri, lengths.iter().map(|&l| two * l.ln()).collect())
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.tri
    }

    pub fn lambda(&self) -> &[T] {
        &self.lambda
    }

    pub fn into_parts(self) -> (Triangulation, Vec<T>) {
        (self.tri, self.lambda)
    }

    pub fn length(&self, e: usize) -> T {
        (self.lambda[e] * T::lit(0.5)).exp()
    }

    pub fn lengths(&self) -> Vec<T> {
        (0..self.lambda.len()).map(|e| self.length(e)).collect()
    }

    /// λ of the three sides of `t`, in side order.
    pub fn side_lambdas(&self, t: usize) -> [T; 3] {
        self.tri.triangle_edges(t).map(|e| self.lambda[e])
    }

    /// Log of the horocyclic arc at corner `c` inside its triangle.
    #[inline]
    pub fn log_corner_arc(&self, c: usize) -> T {
        let l = |h: usize| self.lambda[self.tri.edge(h)];
        (l(next(c)) - l(c) - l(prev(c))) * T::lit(0.5)
    }

    #[inline]
    pub fn corner_arc(&self, c: usize) -> T {
        self.log_corner_arc(c).exp()
    }

    /// Total length `c_v` of the decorating horocycle at `v`.
    pub fn horocycle_length(&self, v: usize) -> Result<T> {
        Ok(self.log_horocycle_length(v)?.exp())
    }

    pub fn log_horocycle_length(&self, v: usize) -> Result<T> {
        self.tri.check_vertex(v)?;
        Ok(self
            .tri
            .vertex_corners(v)
            .into_iter()
            .map(|c| self.log_corner_arc(c))
            .fold(T::neg_infinity(), log_add_exp))
    }

    /// Arc at the representative corner of every vertex; the anchors that
    /// reproduce this metric from its shear coordinates.
    pub fn anchor_arcs(&self) -> Vec<T> {
        (0..self.tri.num_vertices()).map(|v| self.corner_arc(self.tri.first_corner(v))).collect()
    }

    /// Moves the horocycle at every vertex `v` by `u_v` towards its cusp.
    pub fn fiber_shift(&self, u: &[T]) -> Result<Self> {
        let n = self.tri.num_vertices();
        if u.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: u.len() });
        }
        let lambda = (0..self.lambda.len())
            .map(|e| {
                let (a, b) = self.tri.endpoints(e);
                self.lambda[e] + u[a] + u[b]
            })
            .collect();
        Self::new(self.tri.clone(), lambda)
    }

    pub fn flip(&self, e: usize) -> Result<(Self, FlipRecord<T>)> {
        let mut m = self.clone();
        let rec = m.flip_in_place(e)?;
        Ok((m, rec))
    }

    pub(crate) fn flip_in_place(&mut self, e: usize) -> Result<FlipRecord<T>> {
        let [a, b, c, d] = self.tri.flip_in_place(e)?;
        let l = &self.lambda;
        let before = l[e];
        let after = ptolemy_update(l[a], l[b], l[c], l[d], before);
        self.lambda[e] = after;
        Ok(FlipRecord { edge: e, before, after })
    }
}

/// Horocyclic arc lengths of a decorated ideal triangle; `α_i` sits at the
/// vertex opposite side `i`.
pub fn arc_lengths<T: Real>(l: [T; 3]) -> [T; 3] {
    let h = T::lit(0.5);
    [((l[0] - l[1] - l[2]) * h).exp(), ((l[1] - l[2] - l[0]) * h).exp(), ((l[2] - l[0] - l[1]) * h).exp()]
}

/// Inverse of [`arc_lengths`]: `λ_i = −log α_j − log α_k`.
pub fn lambdas_from_arcs<T: Real>(a: [T; 3]) -> [T; 3] {
    let g = a.map(|x| x.ln());
    [-g[1] - g[2], -g[2] - g[0], -g[0] - g[1]]
}

/// λ of the new diagonal after flipping `e` in a quadrilateral with sides
/// `a, b, c, d` in cyclic order (`ℓ_e ℓ_f = ℓ_a ℓ_c + ℓ_b ℓ_d`).
pub fn ptolemy_update<T: Real>(la: T, lb: T, lc: T, ld: T, le: T) -> T {
    let h = T::lit(0.5);
    T::lit(2.0) * log_add_exp((la + lc) * h, (lb + ld) * h) - le
}

/// Horocycle shifts `u_v ∈ ℝ ∪ {+∞}`; `+∞` means the horocycle is missing.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialDecoration<T> {
    u: Vec<ExtReal<T>>,
}

impl<T: Real> PartialDecoration<T> {
    pub fn new(u: Vec<ExtReal<T>>) -> Result<Self> {
        if !u.iter().any(|x| x.is_finite()) {
            return Err(Error::NoDecoratedVertex);
        }
        if let Some(v) = u.iter().position(|x| x.finite().is_some_and(|y| !y.is_finite())) {
            return Err(Error::NonFinite(v));
        }
        Ok(PartialDecoration { u })
    }

    pub fn zero(n: usize) -> Self {
        PartialDecoration { u: vec![ExtReal::Finite(T::zero()); n] }
    }

    pub fn finite(u: &[T]) -> Result<Self> {
        Self::new(u.iter().map(|&x| ExtReal::Finite(x)).collect())
    }

    /// `u` on every vertex except `missing`, which gets +∞.
    pub fn with_missing(u: &[T], missing: &[usize]) -> Result<Self> {
        let mut v: Vec<ExtReal<T>> = u.iter().map(|&x| ExtReal::Finite(x)).collect();
        for &m in missing {
            if m >= v.len() {
                return Err(Error::UnknownVertex(m));
            }
            v[m] = ExtReal::Infinite;
        }
        Self::new(v)
    }

    pub fn values(&self) -> &[ExtReal<T>] {
        &self.u
    }

    pub fn get(&self, v: usize) -> ExtReal<T> {
        self.u[v]
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_decorated(&self, v: usize) -> bool {
        self.u[v].is_finite()
    }

    pub fn all_finite(&self) -> Option<Vec<T>> {
        self.u.iter().map(|x| x.finite()).collect()
    }
}

/// Target cone angles `Θ_v ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeAngleTarget<T> {
    theta: Vec<T>,
}

impl<T: Real> ConeAngleTarget<T> {
    pub fn new(theta: Vec<T>) -> Result<Self> {
        if let Some(v) = theta.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(v));
        }
        if let Some(v) = theta.iter().position(|&x| x < T::zero()) {
            return Err(Error::NegativeConeAngle(v));
        }
        Ok(ConeAngleTarget { theta })
    }

    /// `2π` at every vertex.
    pub fn flat(n: usize) -> Self {
        ConeAngleTarget { theta: vec![T::TAU(); n] }
    }

    /// The same angle at every vertex, chosen to satisfy Gauss–Bonnet.
    pub fn uniform(tri: &Triangulation) -> Self {
        let n = tri.num_vertices();
        let total = T::TAU() * T::lit((2 * tri.genus() as i64 - 2 + n as i64) as f64);
        ConeAngleTarget { theta: vec![total / T::count(n); n] }
    }

    pub fn values(&self) -> &[T] {
        &self.theta
    }

    pub fn sum(&self) -> T {
        self.theta.iter().fold(T::zero(), |a, &b| a + b)
    }
}

/// Shear coordinates: one real per edge, summing to zero around each vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ShearCoordinates<T> {
    pub triangulation: Triangulation,
    pub sigma: Vec<T>,
}

/// `σ_e = log(α'/α)`, the log-ratio of the two arcs at a common end of `e`.
///
/// Walking the corners around a vertex, each step across edge `e` multiplies
/// the arc by `e^{σ_e}`, whichever end of `e` the vertex is.
pub fn shear_from_penner<T: Real>(m: &DecoratedMetric<T>) -> ShearCoordinates<T> {
    let t = m.triangulation();
    let l = |h: usize| m.lambda()[t.edge(h)];
    let sigma = (0..t.num_edges())
        .map(|e| {
            let [h0, h1] = t.halfedges(e);
            (l(prev(h0)) + l(prev(h1)) - l(next(h0)) - l(next(h1))) * T::lit(0.5)
        })
        .collect();
    ShearCoordinates { triangulation: t.clone(), sigma }
}

/// Rebuilds Penner coordinates from shears and one arc per vertex, taken at
/// the vertex's representative corner.
pub fn penner_from_shear<T: Real>(s: &ShearCoordinates<T>, anchors: &[T]) -> Result<DecoratedMetric<T>> {
    let t = &s.triangulation;
    if s.sigma.len() != t.num_edges() {
        return Err(Error::LengthMismatch { expected: t.num_edges(), got: s.sigma.len() });
    }
    if anchors.len() != t.num_vertices() {
        return Err(Error::LengthMismatch { expected: t.num_vertices(), got: anchors.len() });
    }
    if let Some(v) = anchors.iter().position(|&a| !(a > T::zero())) {
        return Err(Error::NonFinite(v));
    }
    let mut log_arc = vec![T::zero(); t.num_halfedges()];
    for (v, &anchor) in anchors.iter().enumerate() {
        let corners = t.vertex_corners(v);
        let mut acc = anchor.ln();
        let mut total = T::zero();
        let mut scale = T::zero();
        for &c in &corners {
            log_arc[c] = acc;
            let sg = s.sigma[t.edge(c)];
            acc = acc + sg;
            total = total + sg;
            scale = scale + sg.abs();
        }
        if total.abs() > T::tol(1e-8) * scale.max(T::one()) {
            return Err(Error::IncompatibleShear { vertex: v, sum: total.to_f64().unwrap_or(f64::NAN) });
        }
    }
    let lambda = (0..t.num_edges())
        .map(|e| {
            let h = t.halfedges(e)[0];
            -log_arc[h] - log_arc[next(h)]
        })
        .collect();
    DecoratedMetric::new(t.clone(), lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcs_of_doubled_side() {
        let a = arc_lengths([2.0 * 2f64.ln(), 0.0, 0.0]);
        assert!((a[0] - 2.0).abs() < 1e-15 && (a[1] - 0.5).abs() < 1e-15 && (a[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ptolemy_square() {
        assert!((ptolemy_update(0.0, 0.0, 0.0, 0.0, 0.0) - 2.0 * 2f64.ln()).abs() < 1e-15);
        let big = ptolemy_update(1000.0, 1000.0, 1000.0, 1000.0, 1000.0);
        assert!((big - (1000.0 + 2.0 * 2f64.ln())).abs() < 1e-10);
    }
}
