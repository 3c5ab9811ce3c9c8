//! Text formats: surface files, report files and OBJ meshes.
//!
//! A surface file is a sequence of whitespace-separated tokens; `#` starts a
//! comment that runs to the end of the line.
//!
//! ```text
//! surface 1
//! triangles 2
//! gluings 3
//! 0 0 1 0
//! 0 1 1 2
//! 0 2 1 1
//! lambda 0 0 0          # or: lengths 1 1 1
//! theta 2.0943951023931957 2.0943951023931957 2.0943951023931957
//! labels a b c
//! ```
//!
//! Each gluing `ta sa tb sb` joins side `sa` of triangle `ta` to side `sb` of
//! triangle `tb`; side `i` of a triangle runs from corner `i` to corner `i + 1`.
//! Edge `k` is the `k`-th gluing. Vertices are numbered by the first corner
//! (in `3t + i` order) that lies at them. `theta` and `labels` are optional and
//! list one entry per vertex.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{Gluing, Triangulation};
use crate::penner::DecoratedMetric;

pub const SURFACE_VERSION: u32 = 1;
pub const REPORT_VERSION: u32 = 1;

/// Formats a float with 17 significant digits; `-0` prints as `0`.
pub fn fmt_real(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split('#').next().unwrap_or("").split_whitespace().map(move |w| (i + 1, w)))
            .collect();
        Tokens { items, pos: 0 }
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).or(self.items.last()).map_or(1, |x| x.0)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line(), msg: msg.into() }
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|x| x.1)
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        let t = self.peek().ok_or_else(|| self.err(format!("unexpected end of file, expected {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let t = self.next(kw)?;
        if t != kw {
            self.pos -= 1;
            return Err(self.err(format!("expected `{kw}`, found `{t}`")));
        }
        Ok(())
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let t = self.next(what)?;
        t.parse().map_err(|_| {
            self.pos -= 1;
            self.err(format!("expected {what}, found `{t}`"))
        })
    }

    fn real(&mut self, what: &str) -> Result<f64> {
        let t = self.next(what)?;
        match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => {
                self.pos -= 1;
                Err(self.err(format!("expected finite {what}, found `{t}`")))
            }
        }
    }
}

/// The contents of a surface file.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceFile {
    pub triangulation: Triangulation,
    pub lambda: Vec<f64>,
    pub theta: Option<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

impl SurfaceFile {
    pub fn from_metric(m: &DecoratedMetric<f64>) -> Self {
        SurfaceFile { triangulation: m.triangulation().clone(), lambda: m.lambda().to_vec(), theta: None, labels: None }
    }

    pub fn metric(&self) -> Result<DecoratedMetric<f64>> {
        DecoratedMetric::new(self.triangulation.clone(), self.lambda.clone())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tk = Tokens::new(text);
        tk.keyword("surface")?;
        let version = tk.usize("format version")?;
        if version != SURFACE_VERSION as usize {
            tk.pos -= 1;
            return Err(tk.err(format!("unsupported surface format version {version}")));
        }
        tk.keyword("triangles")?;
        let ntri = tk.usize("triangle count")?;
        tk.keyword("gluings")?;
        let ng = tk.usize("gluing count")?;
        let mut gluings = Vec::with_capacity(ng);
        for _ in 0..ng {
            let mut s = [0; 4];
            for (k, x) in s.iter_mut().enumerate() {
                *x = tk.usize(if k % 2 == 0 { "triangle index" } else { "side index" })?;
                let bound = if k % 2 == 0 { ntri } else { 3 };
                if *x >= bound {
                    tk.pos -= 1;
                    return Err(tk.err(format!("index {x} out of range (< {bound})")));
                }
            }
            gluings.push(Gluing::new(s[0], s[1], s[2], s[3]));
        }
        if 2 * ng != 3 * ntri {
            return Err(tk.err(format!("{ntri} triangles need {} gluings, found {ng}", 3 * ntri / 2)));
        }
        let triangulation = Triangulation::from_gluings(&gluings, None)?;
        let lambda = match tk.next("`lambda` or `lengths`")? {
            "lambda" => (0..ng).map(|_| tk.real("lambda value")).collect::<Result<Vec<_>>>()?,
            "lengths" => {
                let mut lam = Vec::with_capacity(ng);
                for _ in 0..ng {
                    let l = tk.real("edge length")?;
                    if l <= 0.0 {
                        tk.pos -= 1;
                        return Err(tk.err(format!("edge length {l} is not positive")));
                    }
                    lam.push(2.0 * l.ln());
                }
                lam
            }
            other => {
                tk.pos -= 1;
                return Err(tk.err(format!("expected `lambda` or `lengths`, found `{other}`")));
            }
        };
        let nv = triangulation.num_vertices();
        let mut theta = None;
        let mut labels = None;
        while let Some(kw) = tk.peek() {
            tk.pos += 1;
            match kw {
                "theta" if theta.is_none() => {
                    theta = Some((0..nv).map(|_| tk.real("cone angle")).collect::<Result<Vec<_>>>()?);
                }
                "labels" if labels.is_none() => {
                    labels =
                        Some((0..nv).map(|_| tk.next("vertex label").map(str::to_string)).collect::<Result<Vec<_>>>()?);
                }
                _ => {
                    tk.pos -= 1;
                    return Err(tk.err(format!("unexpected `{kw}`")));
                }
            }
        }
        Ok(SurfaceFile { triangulation, lambda, theta, labels })
    }

    /// Vertices in the order the file numbering assigns them: by first corner.
    pub fn file_order(&self) -> Vec<usize> {
        let t = &self.triangulation;
        let mut seen = vec![false; t.num_vertices()];
        let mut order = Vec::with_capacity(t.num_vertices());
        for c in 0..t.num_halfedges() {
            let v = t.vertex(c);
            if !seen[v] {
                seen[v] = true;
                order.push(v);
            }
        }
        order
    }

    /// Canonical text form. Per-vertex entries are written in file order, so
    /// they stay attached to their vertices however the vertices are numbered
    /// in memory. Emitting a parsed emission reproduces it exactly.
    pub fn emit(&self) -> String {
        let t = &self.triangulation;
        let order = self.file_order();
        let mut s = String::new();
        let _ = writeln!(s, "surface {SURFACE_VERSION}");
        let _ = writeln!(s, "triangles {}", t.num_triangles());
        let _ = writeln!(s, "gluings {}", t.num_edges());
        for g in t.gluings() {
            let _ = writeln!(s, "{} {} {} {}", g.a.tri, g.a.side, g.b.tri, g.b.side);
        }
        let _ = writeln!(s, "lambda");
        for &x in &self.lambda {
            let _ = writeln!(s, "{}", fmt_real(x));
        }
        if let Some(th) = &self.theta {
            let _ = writeln!(s, "theta");
            for &v in &order {
                let _ = writeln!(s, "{}", fmt_real(th[v]));
            }
        }
        if let Some(lb) = &self.labels {
            let names: Vec<&str> = order.iter().map(|&v| lb[v].as_str()).collect();
            let _ = writeln!(s, "labels {}", names.join(" "));
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.emit())?)
    }
}

/// A typed value in a report.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
    Ints(Vec<i64>),
    Reals(Vec<f64>),
}

/// An ordered list of typed `key value` records, one per line:
/// `key int 3`, `key real 1.0e0`, `key text free text`, `key ints 2 4 5`,
/// `key reals 2 1.0e0 2.0e0` (list records give their length first).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportFile {
    pub entries: Vec<(String, Value)>,
}

/// Key of the wall-clock field, the only nondeterministic entry.
pub const TIMING_KEY: &str = "elapsed_seconds";

impl ReportFile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, v: Value) -> &mut Self {
        self.entries.push((key.to_string(), v));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn emit(&self) -> String {
        let mut s = format!("report {REPORT_VERSION}\n");
        for (k, v) in &self.entries {
            let _ = match v {
                Value::Int(x) => writeln!(s, "{k} int {x}"),
                Value::Real(x) => writeln!(s, "{k} real {}", fmt_real(*x)),
                Value::Text(x) => writeln!(s, "{k} text {x}"),
                Value::Ints(xs) => {
                    let body: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                    writeln!(s, "{k} ints {} {}", xs.len(), body.join(" ")).map(|_| ())
                }
                Value::Reals(xs) => {
                    let body: Vec<String> = xs.iter().map(|&x| fmt_real(x)).collect();
                    writeln!(s, "{k} reals {} {}", xs.len(), body.join(" ")).map(|_| ())
                }
            };
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let bad = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        match lines.next() {
            Some((_, l)) if l.trim() == format!("report {REPORT_VERSION}") => {}
            _ => return Err(bad(0, "expected `report 1`".into())),
        }
        let mut r = ReportFile::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').ok_or_else(|| bad(i, "missing type".into()))?;
            let (ty, body) = rest.split_once(' ').unwrap_or((rest, ""));
            let reals = |s: &str| -> Result<Vec<f64>> {
                s.split_whitespace().map(|w| w.parse().map_err(|_| bad(i, format!("bad real `{w}`")))).collect()
            };
            let ints = |s: &str| -> Result<Vec<i64>> {
                s.split_whitespace().map(|w| w.parse().map_err(|_| bad(i, format!("bad integer `{w}`")))).collect()
            };
            let list = |s: &str| -> Result<(usize, String)> {
                let mut it = s.splitn(2, ' ');
                let n = it.next().unwrap_or("").parse().map_err(|_| bad(i, "bad list length".into()))?;
                Ok((n, it.next().unwrap_or("").to_string()))
            };
            let v = match ty {
                "int" => Value::Int(body.trim().parse().map_err(|_| bad(i, format!("bad integer `{body}`")))?),
                "real" => Value::Real(body.trim().parse().map_err(|_| bad(i, format!("bad real `{body}`")))?),
                "text" => Value::Text(body.to_string()),
                "ints" => {
                    let (n, b) = list(body)?;
                    let xs = ints(&b)?;
                    if xs.len() != n {
                        return Err(bad(i, format!("expected {n} integers, found {}", xs.len())));
                    }
                    Value::Ints(xs)
                }
                "reals" => {
                    let (n, b) = list(body)?;
                    let xs = reals(&b)?;
                    if xs.len() != n {
                        return Err(bad(i, format!("expected {n} reals, found {}", xs.len())));
                    }
                    Value::Reals(xs)
                }
                other => return Err(bad(i, format!("unknown type `{other}`"))),
            };
            r.entries.push((key.to_string(), v));
        }
        Ok(r)
    }

    /// The report without its timing field, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        ReportFile { entries: self.entries.iter().filter(|(k, _)| k != TIMING_KEY).cloned().collect() }
    }
}

/// Vertex positions and triangles read from an OBJ file (0-based indices).
#[derive(Clone, Debug, PartialEq)]
pub struct ObjMesh {
    pub points: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

pub fn parse_obj(text: &str) -> Result<ObjMesh> {
    let mut points = Vec::new();
    let mut faces = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |msg: String| Error::Parse { line: i + 1, msg };
        let mut w = line.split('#').next().unwrap_or("").split_whitespace();
        match w.next() {
            Some("v") => {
                let xs: Vec<f64> = w.take(3).map(|s| s.parse().map_err(|_| bad(format!("bad coordinate `{s}`")))).collect::<Result<_>>()?;
                if xs.len() != 3 || !xs.iter().all(|x| x.is_finite()) {
                    return Err(bad("vertex needs three finite coordinates".into()));
                }
                points.push([xs[0], xs[1], xs[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = w
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or("");
                        let k: i64 = head.parse().map_err(|_| bad(format!("bad face index `{s}`")))?;
                        let n = points.len() as i64;
                        let k = if k < 0 { n + k } else { k - 1 };
                        if k < 0 || k >= n {
                            return Err(bad(format!("face index `{s}` out of range")));
                        }
                        Ok(k as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(Error::NonTriangleFace(faces.len()));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    Ok(ObjMesh { points, faces })
}

/// Builds the closed triangulation and its edge-length metric from an OBJ mesh.
pub fn metric_from_obj(mesh: &ObjMesh) -> Result<DecoratedMetric<f64>> {
    let t = Triangulation::from_faces(&mesh.faces)?;
    if t.num_vertices() != mesh.points.len() {
        return Err(Error::OpenMesh(format!(
            "{} vertices are not used by any face",
            mesh.points.len() - t.num_vertices()
        )));
    }
    let mut lengths = Vec::with_capacity(t.num_edges());
    for e in 0..t.num_edges() {
        let (a, b) = t.endpoints(e);
        let (p, q) = (mesh.points[a], mesh.points[b]);
        let l = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
        if l == 0.0 {
            return Err(Error::ZeroLengthEdge(a, b));
        }
        lengths.push(l);
    }
    DecoratedMetric::from_lengths(t, &lengths)
}

/// Reads a closed triangle mesh; edge lengths come from the vertex positions.
pub fn ingest_obj(path: &Path) -> Result<(Triangulation, DecoratedMetric<f64>)> {
    let m = metric_from_obj(&parse_obj(&std::fs::read_to_string(path)?)?)?;
    Ok((m.triangulation().clone(), m))
}

/// OBJ text with 1-based polygon faces.
pub fn emit_obj(points: &[[f64; 3]], faces: &[Vec<usize>]) -> String {
    let mut s = String::new();
    for p in points {
        let _ = writeln!(s, "v {} {} {}", fmt_real(p[0]), fmt_real(p[1]), fmt_real(p[2]));
    }
    for f in faces {
        let idx: Vec<String> = f.iter().map(|&v| (v + 1).to_string()).collect();
        let _ = writeln!(s, "f {}", idx.join(" "));
    }
    s
}
