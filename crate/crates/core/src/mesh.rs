//! Triangulations of closed oriented surfaces described by side gluings.
//!
//! Half-edge `h = 3t + i` is side `i` of triangle `t`. It runs from corner `i`
//! to corner `i + 1` of `t`, and the corner at its tail shares the index `h`.
//! Vertices are orbits of corners under the gluing, edges are glued side
//! pairs, so self-glued edges, multi-edges and one-vertex surfaces are all
//! representable.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// A side of a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Side {
    pub tri: usize,
    pub side: usize,
}

impl Side {
    pub fn new(tri: usize, side: usize) -> Self {
        Side { tri, side }
    }

    fn halfedge(self) -> usize {
        3 * self.tri + self.side
    }
}

/// One glued pair of sides. `reversing` is false only for malformed input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gluing {
    pub a: Side,
    pub b: Side,
    pub reversing: bool,
}

impl Gluing {
    pub fn new(ta: usize, sa: usize, tb: usize, sb: usize) -> Self {
        Gluing { a: Side::new(ta, sa), b: Side::new(tb, sb), reversing: true }
    }
}

#[inline]
pub fn next(h: usize) -> usize {
    if h % 3 == 2 {
        h - 2
    } else {
        h + 1
    }
}

#[inline]
pub fn prev(h: usize) -> usize {
    if h % 3 == 0 {
        h + 2
    } else {
        h - 1
    }
}

#[inline]
pub fn tri_of(h: usize) -> usize {
    h / 3
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangulation {
    twin: Vec<usize>,
    edge_of: Vec<usize>,
    halves: Vec<[usize; 2]>,
    vert: Vec<usize>,
    rep_corner: Vec<usize>,
    genus: usize,
}

enum Slot {
    Old(usize),
    New(usize),
}

impl Triangulation {
    /// Builds and validates a triangulation. Edge `i` is the `i`-th gluing;
    /// vertices are numbered by the first corner (in `3t + i` order) they own.
    pub fn from_gluings(gluings: &[Gluing], genus_hint: Option<usize>) -> Result<Self> {
        let ntri = gluings.iter().flat_map(|g| [g.a.tri, g.b.tri]).max().map(|t| t + 1).ok_or(Error::Empty)?;
        let nh = 3 * ntri;
        let mut twin = vec![usize::MAX; nh];
        let mut edge_of = vec![usize::MAX; nh];
        let mut halves = Vec::with_capacity(gluings.len());
        for (e, g) in gluings.iter().enumerate() {
            for s in [g.a, g.b] {
                if s.side > 2 {
                    return Err(Error::UnmatchedSide { tri: s.tri, side: s.side });
                }
            }
            if !g.reversing {
                return Err(Error::NonOrientable { tri: g.a.tri, side: g.a.side });
            }
            let (ha, hb) = (g.a.halfedge(), g.b.halfedge());
            if ha == hb {
                return Err(Error::UnmatchedSide { tri: g.a.tri, side: g.a.side });
            }
            for s in [g.a, g.b] {
                if twin[s.halfedge()] != usize::MAX {
                    return Err(Error::UnmatchedSide { tri: s.tri, side: s.side });
                }
            }
            twin[ha] = hb;
            twin[hb] = ha;
            edge_of[ha] = e;
            edge_of[hb] = e;
            halves.push([ha, hb]);
        }
        if let Some(h) = twin.iter().position(|&t| t == usize::MAX) {
            return Err(Error::UnmatchedSide { tri: h / 3, side: h % 3 });
        }

        let mut uf = UnionFind::new(nh);
        for h in 0..nh {
            uf.union(h, next(twin[h]));
        }
        let mut root_id = vec![usize::MAX; nh];
        let mut vert = vec![0; nh];
        let mut rep_corner = Vec::new();
        for c in 0..nh {
            let r = uf.find(c);
            if root_id[r] == usize::MAX {
                root_id[r] = rep_corner.len();
                rep_corner.push(c);
            }
            vert[c] = root_id[r];
        }

        let mut seen = vec![false; ntri];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(t) = queue.pop_front() {
            for i in 0..3 {
                let u = tri_of(twin[3 * t + i]);
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        if reached != ntri {
            return Err(Error::Disconnected);
        }

        let chi = rep_corner.len() as i64 - halves.len() as i64 + ntri as i64;
        let genus = ((2 - chi) / 2).max(0) as usize;
        if let Some(g) = genus_hint {
            if 2 - 2 * g as i64 != chi {
                return Err(Error::EulerMismatch { chi, genus: g });
            }
        }
        Ok(Triangulation { twin, edge_of, halves, vert, rep_corner, genus })
    }

    /// Builds a triangulation from oriented vertex triples, gluing each side
    /// `(a, b)` to the side `(b, a)`. Vertex `k` of the result is input vertex
    /// `k`; edges are numbered by first appearance.
    pub fn from_faces(faces: &[[usize; 3]]) -> Result<Self> {
        use std::collections::HashMap;
        let mut open: HashMap<(usize, usize), usize> = HashMap::new();
        let mut gluings = Vec::new();
        for (t, f) in faces.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (f[i], f[(i + 1) % 3]);
                if a == b {
                    return Err(Error::OpenMesh(format!("face {t} repeats vertex {a}")));
                }
                if let Some(h) = open.remove(&(b, a)) {
                    gluings.push(Gluing::new(h / 3, h % 3, t, i));
                } else if open.insert((a, b), 3 * t + i).is_some() {
                    return Err(Error::OpenMesh(format!("oriented edge {a}-{b} appears twice")));
                }
            }
        }
        if let Some((&(a, b), _)) = open.iter().min() {
            return Err(Error::OpenMesh(format!("edge {a}-{b} has only one side")));
        }
        let mut order: Vec<(usize, usize)> = Vec::new();
        let mut tri = Triangulation::from_gluings(&gluings, None)?;
        let nv = faces.iter().flatten().max().map_or(0, |m| m + 1);
        let mut owner = vec![usize::MAX; tri.num_vertices()];
        for c in 0..tri.num_halfedges() {
            let input = faces[c / 3][c % 3];
            let v = tri.vertex(c);
            if owner[v] == usize::MAX {
                owner[v] = input;
                order.push((input, v));
            } else if owner[v] != input {
                return Err(Error::OpenMesh(format!("vertex {input} is not a manifold vertex")));
            }
        }
        if order.len() != nv {
            return Err(Error::OpenMesh(format!(
                "{} vertices referenced by faces but {} vertex stars found",
                nv,
                order.len()
            )));
        }
        order.sort_unstable();
        if order.iter().enumerate().any(|(k, &(input, _))| k != input) {
            return Err(Error::OpenMesh("some vertices are not used by any face".into()));
        }
        tri = tri.relabel_vertices(&order.iter().map(|&(_, v)| v).collect::<Vec<_>>())?;
        Ok(tri)
    }

    pub fn num_triangles(&self) -> usize {
        self.twin.len() / 3
    }

    pub fn num_edges(&self) -> usize {
        self.halves.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.rep_corner.len()
    }

    pub fn num_halfedges(&self) -> usize {
        self.twin.len()
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    #[inline]
    pub fn twin(&self, h: usize) -> usize {
        self.twin[h]
    }

    #[inline]
    pub fn edge(&self, h: usize) -> usize {
        self.edge_of[h]
    }

    /// The two half-edges of `e`; the first one runs from `v1(e)` to `v2(e)`.
    #[inline]
    pub fn halfedges(&self, e: usize) -> [usize; 2] {
        self.halves[e]
    }

    /// Vertex at corner `c` (equivalently, tail of half-edge `c`).
    #[inline]
    pub fn vertex(&self, c: usize) -> usize {
        self.vert[c]
    }

    #[inline]
    pub fn head(&self, h: usize) -> usize {
        self.vert[next(h)]
    }

    /// `(v1(e), v2(e))`.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let h = self.halves[e][0];
        (self.vert[h], self.head(h))
    }

    /// Corner of the triangle of `h` opposite to the side `h`.
    #[inline]
    pub fn opposite_corner(&self, h: usize) -> usize {
        prev(h)
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        [self.edge_of[3 * t], self.edge_of[3 * t + 1], self.edge_of[3 * t + 2]]
    }

    pub fn triangle_vertices(&self, t: usize) -> [usize; 3] {
        [self.vert[3 * t], self.vert[3 * t + 1], self.vert[3 * t + 2]]
    }

    /// True when both sides of `e` belong to the same triangle.
    pub fn is_folded(&self, e: usize) -> bool {
        let [a, b] = self.halves[e];
        tri_of(a) == tri_of(b)
    }

    /// Next corner around the same vertex, across the outgoing side of `c`.
    #[inline]
    pub fn rotate(&self, c: usize) -> usize {
        next(self.twin[c])
    }

    /// Representative corner of `v`; the start of [`Self::vertex_corners`].
    pub fn first_corner(&self, v: usize) -> usize {
        self.rep_corner[v]
    }

    /// Corners at `v` in rotation order.
    pub fn vertex_corners(&self, v: usize) -> Vec<usize> {
        let start = self.rep_corner[v];
        let mut out = vec![start];
        let mut c = self.rotate(start);
        while c != start {
            out.push(c);
            c = self.rotate(c);
        }
        out
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn check_edge(&self, e: usize) -> Result<()> {
        if e < self.num_edges() {
            Ok(())
        } else {
            Err(Error::UnknownEdge(e))
        }
    }

    /// Gluing list reproducing this triangulation with the same edge ids.
    pub fn gluings(&self) -> Vec<Gluing> {
        self.halves
            .iter()
            .map(|&[a, b]| Gluing::new(a / 3, a % 3, b / 3, b % 3))
            .collect()
    }

    /// `(deg1, deg2)`: edge-ends and corners at `v`, optionally restricted to `sub`.
    pub fn vertex_degrees(&self, v: usize, sub: Option<&Subcomplex>) -> Result<(usize, usize)> {
        self.check_vertex(v)?;
        if let Some(s) = sub {
            if !s.kept_vertex[v] {
                return Err(Error::UnknownVertex(v));
            }
        }
        let corners = self.vertex_corners(v);
        let deg1 = corners.iter().filter(|&&c| sub.is_none_or(|s| s.kept_edge[self.edge_of[c]])).count();
        let deg2 = corners.iter().filter(|&&c| sub.is_none_or(|s| s.kept_tri[tri_of(c)])).count();
        Ok((deg1, deg2))
    }

    /// Flips `e` to the other diagonal of its quadrilateral. The new diagonal keeps id `e`.
    pub fn flip_edge(&self, e: usize) -> Result<Triangulation> {
        let mut t = self.clone();
        t.flip_in_place(e)?;
        Ok(t)
    }

    /// In-place flip. Returns the four boundary edges of the quadrilateral
    /// as `[a, b, c, d]` in cyclic order, so `a, c` and `b, d` are opposite.
    pub(crate) fn flip_in_place(&mut self, e: usize) -> Result<[usize; 4]> {
        self.check_edge(e)?;
        let [h0, h1] = self.halves[e];
        let (t0, t1) = (tri_of(h0), tri_of(h1));
        if t0 == t1 {
            return Err(Error::DegenerateFlip(e));
        }
        let (n0, p0, n1, p1) = (next(h0), prev(h0), next(h1), prev(h1));
        let a0 = self.vert[h0];
        let b0 = self.vert[h1];
        let o0 = self.vert[p0];
        let o1 = self.vert[p1];
        let quad = [self.edge_of[n1], self.edge_of[p1], self.edge_of[n0], self.edge_of[p0]];
        self.rewire(&[
            (3 * t0, Slot::Old(p0), o0),
            (3 * t0 + 1, Slot::Old(n1), a0),
            (3 * t0 + 2, Slot::New(e), o1),
            (3 * t1, Slot::Old(p1), o1),
            (3 * t1 + 1, Slot::Old(n0), b0),
            (3 * t1 + 2, Slot::New(e), o0),
        ]);
        self.rep_corner[a0] = 3 * t0 + 1;
        self.rep_corner[b0] = 3 * t1 + 1;
        self.rep_corner[o0] = 3 * t0;
        self.rep_corner[o1] = 3 * t1;
        Ok(quad)
    }

    /// Inserts a vertex inside triangle `t` (one-to-three split).
    /// Returns the new triangulation and the id of the new vertex; the three
    /// new edges get ids `E, E+1, E+2` joining it to corners 1, 2, 0 of `t`.
    pub fn split_triangle(&self, t: usize) -> Result<(Triangulation, usize)> {
        if t >= self.num_triangles() {
            return Err(Error::UnknownTriangle(t));
        }
        let mut m = self.clone();
        let [a, b, c] = self.triangle_vertices(t);
        let p = m.num_vertices();
        let (t1, t2) = (m.num_triangles(), m.num_triangles() + 1);
        let ne = m.num_edges();
        m.grow(2, 3, 1);
        m.rewire(&[
            (3 * t, Slot::Old(3 * t), a),
            (3 * t + 1, Slot::New(ne), b),
            (3 * t + 2, Slot::New(ne + 2), p),
            (3 * t1, Slot::Old(3 * t + 1), b),
            (3 * t1 + 1, Slot::New(ne + 1), c),
            (3 * t1 + 2, Slot::New(ne), p),
            (3 * t2, Slot::Old(3 * t + 2), c),
            (3 * t2 + 1, Slot::New(ne + 2), a),
            (3 * t2 + 2, Slot::New(ne + 1), p),
        ]);
        m.rep_corner[a] = 3 * t;
        m.rep_corner[b] = 3 * t + 1;
        m.rep_corner[c] = 3 * t1 + 1;
        m.rep_corner[p] = 3 * t + 2;
        Ok((m, p))
    }

    /// Inserts a vertex on edge `e` (two-to-four split). Edge `e` keeps the
    /// half at `v1(e)`; new edges `E` (new vertex to the apex on the side of
    /// the first half-edge), `E+1` (to `v2(e)`), `E+2` (to the other apex).
    pub fn split_edge(&self, e: usize) -> Result<(Triangulation, usize)> {
        self.check_edge(e)?;
        let [h0, h1] = self.halves[e];
        let (t0, t1) = (tri_of(h0), tri_of(h1));
        if t0 == t1 {
            return Err(Error::DegenerateQuad(e));
        }
        let mut m = self.clone();
        let (n0, p0, n1, p1) = (next(h0), prev(h0), next(h1), prev(h1));
        let (a, b, o0, o1) = (self.vert[h0], self.vert[h1], self.vert[p0], self.vert[p1]);
        let p = m.num_vertices();
        let (s0, s1) = (m.num_triangles(), m.num_triangles() + 1);
        let ne = m.num_edges();
        m.grow(2, 3, 1);
        m.rewire(&[
            (3 * t0, Slot::New(e), a),
            (3 * t0 + 1, Slot::New(ne), p),
            (3 * t0 + 2, Slot::Old(p0), o0),
            (3 * s0, Slot::New(ne + 1), p),
            (3 * s0 + 1, Slot::Old(n0), b),
            (3 * s0 + 2, Slot::New(ne), o0),
            (3 * t1, Slot::New(ne + 1), b),
            (3 * t1 + 1, Slot::New(ne + 2), p),
            (3 * t1 + 2, Slot::Old(p1), o1),
            (3 * s1, Slot::New(e), p),
            (3 * s1 + 1, Slot::Old(n1), a),
            (3 * s1 + 2, Slot::New(ne + 2), o1),
        ]);
        m.rep_corner[a] = 3 * t0;
        m.rep_corner[b] = 3 * t1;
        m.rep_corner[o0] = 3 * t0 + 2;
        m.rep_corner[o1] = 3 * t1 + 2;
        m.rep_corner[p] = 3 * t0 + 1;
        Ok((m, p))
    }

    fn grow(&mut self, tris: usize, edges: usize, verts: usize) {
        let nh = self.twin.len() + 3 * tris;
        self.twin.resize(nh, usize::MAX);
        self.edge_of.resize(nh, usize::MAX);
        self.vert.resize(nh, usize::MAX);
        self.halves.extend(std::iter::repeat_n([usize::MAX; 2], edges));
        self.rep_corner.extend(std::iter::repeat_n(usize::MAX, verts));
    }

    /// Reassigns a set of slots. `Old(x)` moves half-edge `x` (with its edge
    /// and gluing) into the slot; `New(e)` slots come in pairs and are glued
    /// to each other as edge `e`. Every old half-edge of the rewritten
    /// triangles that is not moved is discarded.
    fn rewire(&mut self, assign: &[(usize, Slot, usize)]) {
        let moved: Vec<(usize, usize)> = assign
            .iter()
            .filter_map(|(slot, s, _)| match s {
                Slot::Old(x) => Some((*x, *slot)),
                Slot::New(_) => None,
            })
            .collect();
        let map = |x: usize| moved.iter().find(|(o, _)| *o == x).map(|(_, s)| *s);
        let snapshot: Vec<(usize, usize, usize, usize)> = moved
            .iter()
            .map(|&(x, slot)| {
                let e = self.edge_of[x];
                let pos = if self.halves[e][0] == x { 0 } else { 1 };
                (slot, self.twin[x], e, pos)
            })
            .collect();
        for &(slot, old_twin, e, pos) in &snapshot {
            self.edge_of[slot] = e;
            self.halves[e][pos] = slot;
            match map(old_twin) {
                Some(t) => self.twin[slot] = t,
                None => {
                    self.twin[slot] = old_twin;
                    self.twin[old_twin] = slot;
                }
            }
        }
        let mut pending: Vec<(usize, usize)> = Vec::new();
        for (slot, s, _) in assign {
            if let Slot::New(e) = s {
                if let Some(i) = pending.iter().position(|(pe, _)| pe == e) {
                    let (_, other) = pending.swap_remove(i);
                    self.twin[*slot] = other;
                    self.twin[other] = *slot;
                    self.halves[*e] = [other, *slot];
                } else {
                    pending.push((*e, *slot));
                }
                self.edge_of[*slot] = *e;
            }
        }
        debug_assert!(pending.is_empty());
        for (slot, _, v) in assign {
            self.vert[*slot] = *v;
        }
    }

    /// Renumbers vertices so that old vertex `order[k]` becomes vertex `k`.
    pub fn relabel_vertices(&self, order: &[usize]) -> Result<Triangulation> {
        let n = self.num_vertices();
        if order.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: order.len() });
        }
        let mut inv = vec![usize::MAX; n];
        for (k, &v) in order.iter().enumerate() {
            self.check_vertex(v)?;
            if inv[v] != usize::MAX {
                return Err(Error::UnknownVertex(v));
            }
            inv[v] = k;
        }
        let mut t = self.clone();
        for c in 0..t.vert.len() {
            t.vert[c] = inv[self.vert[c]];
        }
        for (k, &v) in order.iter().enumerate() {
            t.rep_corner[k] = self.rep_corner[v];
        }
        Ok(t)
    }

    fn canonical_code(&self, start: usize) -> (Vec<usize>, Vec<[usize; 2]>) {
        let nh = self.twin.len();
        let mut label = vec![usize::MAX; nh];
        let mut order = Vec::with_capacity(nh);
        label[start] = 0;
        order.push(start);
        let mut i = 0;
        while i < order.len() {
            let h = order[i];
            for nb in [next(h), self.twin[h]] {
                if label[nb] == usize::MAX {
                    label[nb] = order.len();
                    order.push(nb);
                }
            }
            i += 1;
        }
        let code = order.iter().map(|&h| [label[next(h)], label[self.twin[h]]]).collect();
        (order, code)
    }

    /// An orientation-preserving combinatorial isomorphism, as a map from
    /// half-edges of `self` to half-edges of `other`.
    pub fn isomorphism(&self, other: &Triangulation) -> Option<Vec<usize>> {
        if self.twin.len() != other.twin.len() || self.num_vertices() != other.num_vertices() {
            return None;
        }
        let (order, code) = self.canonical_code(0);
        for s in 0..other.twin.len() {
            let (o_order, o_code) = other.canonical_code(s);
            if o_code == code {
                let mut map = vec![0; order.len()];
                for (k, &h) in order.iter().enumerate() {
                    map[h] = o_order[k];
                }
                return Some(map);
            }
        }
        None
    }

    pub fn is_isomorphic(&self, other: &Triangulation) -> bool {
        self.isomorphism(other).is_some()
    }

    /// The closed cells not incident with `vinf`.
    pub fn subcomplex_avoiding(&self, vinf: usize) -> Result<Subcomplex> {
        self.check_vertex(vinf)?;
        let keep: Vec<bool> = (0..self.num_vertices()).map(|v| v != vinf).collect();
        Ok(self.subcomplex(&keep))
    }

    /// The closed cells all of whose vertices are kept.
    pub fn subcomplex(&self, keep_vertex: &[bool]) -> Subcomplex {
        let kept_edge: Vec<bool> = (0..self.num_edges())
            .map(|e| {
                let (a, b) = self.endpoints(e);
                keep_vertex[a] && keep_vertex[b]
            })
            .collect();
        let kept_tri: Vec<bool> =
            (0..self.num_triangles()).map(|t| self.triangle_vertices(t).iter().all(|&v| keep_vertex[v])).collect();
        let edge_class = (0..self.num_edges())
            .map(|e| {
                kept_edge[e].then(|| {
                    let n = self.halves[e].iter().filter(|&&h| kept_tri[tri_of(h)]).count();
                    match n {
                        2 => EdgeClass::Interior,
                        1 => EdgeClass::Boundary,
                        _ => EdgeClass::Free,
                    }
                })
            })
            .collect();
        let vertex_class = (0..self.num_vertices())
            .map(|v| {
                keep_vertex[v].then(|| {
                    if self.vertex_corners(v).iter().all(|&c| kept_tri[tri_of(c)]) {
                        VertexClass::Interior
                    } else {
                        VertexClass::Boundary
                    }
                })
            })
            .collect();
        Subcomplex {
            parent: self.clone(),
            kept_vertex: keep_vertex.to_vec(),
            kept_edge,
            kept_tri,
            vertex_class,
            edge_class,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexClass {
    Interior,
    Boundary,
}

/// How many kept triangles an edge of a subcomplex borders: two, one or none.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeClass {
    Interior,
    Boundary,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubcomplexKind {
    LinearGraph,
    DiskTriangulation,
    Other,
}

/// A closed subcomplex of a triangulation.
#[derive(Clone, Debug)]
pub struct Subcomplex {
    parent: Triangulation,
    kept_vertex: Vec<bool>,
    kept_edge: Vec<bool>,
    kept_tri: Vec<bool>,
    vertex_class: Vec<Option<VertexClass>>,
    edge_class: Vec<Option<EdgeClass>>,
}

impl Subcomplex {
    pub fn parent(&self) -> &Triangulation {
        &self.parent
    }

    pub fn has_vertex(&self, v: usize) -> bool {
        self.kept_vertex.get(v).copied().unwrap_or(false)
    }

    pub fn has_edge(&self, e: usize) -> bool {
        self.kept_edge.get(e).copied().unwrap_or(false)
    }

    pub fn has_triangle(&self, t: usize) -> bool {
        self.kept_tri.get(t).copied().unwrap_or(false)
    }

    pub fn vertices(&self) -> Vec<usize> {
        (0..self.kept_vertex.len()).filter(|&v| self.kept_vertex[v]).collect()
    }

    pub fn edges(&self) -> Vec<usize> {
        (0..self.kept_edge.len()).filter(|&e| self.kept_edge[e]).collect()
    }

    pub fn triangles(&self) -> Vec<usize> {
        (0..self.kept_tri.len()).filter(|&t| self.kept_tri[t]).collect()
    }

    pub fn vertex_class(&self, v: usize) -> Option<VertexClass> {
        self.vertex_class.get(v).copied().flatten()
    }

    pub fn edge_class(&self, e: usize) -> Option<EdgeClass> {
        self.edge_class.get(e).copied().flatten()
    }

    pub fn degrees(&self, v: usize) -> Result<(usize, usize)> {
        self.parent.vertex_degrees(v, Some(self))
    }

    pub fn classify(&self) -> SubcomplexKind {
        if self.triangles().is_empty() {
            if self.path_order().is_some() {
                SubcomplexKind::LinearGraph
            } else {
                SubcomplexKind::Other
            }
        } else if self.is_disk() {
            SubcomplexKind::DiskTriangulation
        } else {
            SubcomplexKind::Other
        }
    }

    /// For a triangle-free subcomplex whose graph is a path, the vertices and
    /// edges in path order.
    pub fn path_order(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let t = &self.parent;
        let verts = self.vertices();
        let edges = self.edges();
        if verts.is_empty() || edges.len() + 1 != verts.len() || !self.triangles().is_empty() {
            return None;
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); t.num_vertices()];
        for &e in &edges {
            let (a, b) = t.endpoints(e);
            if a == b {
                return None;
            }
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        if verts.iter().any(|&v| adj[v].len() > 2) {
            return None;
        }
        let start = if verts.len() == 1 { verts[0] } else { *verts.iter().find(|&&v| adj[v].len() == 1)? };
        let mut order = vec![start];
        let mut path_edges = Vec::new();
        let mut prev_edge = usize::MAX;
        let mut cur = start;
        loop {
            let step = adj[cur].iter().find(|&&(_, e)| e != prev_edge);
            match step {
                Some(&(nb, e)) => {
                    path_edges.push(e);
                    order.push(nb);
                    prev_edge = e;
                    cur = nb;
                }
                None => break,
            }
            if order.len() > verts.len() {
                return None;
            }
        }
        (order.len() == verts.len()).then_some((order, path_edges))
    }

    fn is_disk(&self) -> bool {
        let t = &self.parent;
        let verts = self.vertices();
        let edges = self.edges();
        let tris = self.triangles();
        if edges.iter().any(|&e| self.edge_class[e] == Some(EdgeClass::Free)) {
            return false;
        }
        for &v in &verts {
            let corners = t.vertex_corners(v);
            let kept: Vec<bool> = corners.iter().map(|&c| self.kept_tri[tri_of(c)]).collect();
            if !kept.iter().any(|&k| k) {
                return false;
            }
            let runs = (0..kept.len()).filter(|&i| kept[i] && !kept[(i + kept.len() - 1) % kept.len()]).count();
            if runs > 1 {
                return false;
            }
        }
        let mut seen = vec![false; t.num_triangles()];
        let mut queue = VecDeque::from([tris[0]]);
        seen[tris[0]] = true;
        let mut reached = 1;
        while let Some(x) = queue.pop_front() {
            for i in 0..3 {
                let y = tri_of(t.twin(3 * x + i));
                if self.kept_tri[y] && !seen[y] {
                    seen[y] = true;
                    reached += 1;
                    queue.push_back(y);
                }
            }
        }
        reached == tris.len() && verts.len() as i64 - edges.len() as i64 + tris.len() as i64 == 1
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere3() -> Triangulation {
        Triangulation::from_gluings(&[Gluing::new(0, 0, 1, 0), Gluing::new(0, 1, 1, 2), Gluing::new(0, 2, 1, 1)], None)
            .unwrap()
    }

    #[test]
    fn three_vertex_sphere_counts() {
        let t = sphere3();
        assert_eq!((t.num_vertices(), t.num_edges(), t.num_triangles(), t.genus()), (3, 3, 2, 0));
        for v in 0..3 {
            assert_eq!(t.vertex_degrees(v, None).unwrap(), (2, 2));
        }
    }

    #[test]
    fn fold_is_refused() {
        let t = sphere3();
        let f = t.flip_edge(0).unwrap();
        let folded = (0..3).find(|&e| f.is_folded(e)).expect("flip creates a folded edge");
        assert_eq!(f.flip_edge(folded), Err(Error::DegenerateFlip(folded)));
    }
}
