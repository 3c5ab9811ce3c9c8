//! Newton solvers for `E_Θ` (unconstrained up to scale) and `Ē^{v∞}`
//! (lower bounds `u_v ≥ −δ(v, v∞)`).

use crate::delaunay::{horocycle_distance, DelaunayResult};
use crate::energy::{e_bar_warm, e_theta_warm, free_vertices, EnergyEvaluation};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, solve_spd};
use crate::penner::{ConeAngleTarget, DecoratedMetric};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gauge {
    /// Keep `u_v = 0` at this vertex.
    Pin(usize),
    ZeroMean,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearch {
    pub shrink: f64,
    pub sufficient_decrease: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Stop once the sup-norm of the (projected) gradient is below this.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    pub line_search: LineSearch,
    pub gauge: Gauge,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gradient_tolerance: 1e-10,
            max_iterations: 500,
            line_search: LineSearch { shrink: 0.5, sufficient_decrease: 1e-4 },
            gauge: Gauge::ZeroMean,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        let ls = self.line_search;
        if !(self.gradient_tolerance > 0.0) {
            Err(Error::InvalidOptions("gradient tolerance must be positive".into()))
        } else if !(ls.shrink > 0.0 && ls.shrink < 1.0) {
            Err(Error::InvalidOptions("line search shrink factor must lie in (0, 1)".into()))
        } else if !(ls.sufficient_decrease > 0.0 && ls.sufficient_decrease < 1.0) {
            Err(Error::InvalidOptions("sufficient decrease constant must lie in (0, 1)".into()))
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    IterLimit,
    LineSearchFailure,
}

#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    /// All vertices for `E_Θ`; the free vertices (see [`free_vertices`]) for `Ē`.
    pub u: Vec<T>,
    pub iterations: usize,
    pub flips_total: usize,
    /// Indices into `u` of the constraints active at the solution.
    pub active_set: Vec<usize>,
    pub kkt: KktReport<T>,
    pub status: SolveStatus,
    pub value: T,
    /// Whether any Newton system needed a diagonal shift.
    pub regularized: bool,
    pub delaunay: DelaunayResult<T>,
    pub theta_tilde: Vec<T>,
    /// Lower bounds `−δ(v, v∞)` for the constrained problem.
    pub bounds: Option<Vec<T>>,
}

/// Residuals of the optimality conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct KktReport<T> {
    pub stationarity: T,
    pub feasibility: T,
    pub complementarity: T,
    pub active: Vec<usize>,
    pub pass: bool,
}

fn gauss_bonnet<T: Real>(m: &DecoratedMetric<T>, theta: &ConeAngleTarget<T>) -> Result<()> {
    let t = m.triangulation();
    if theta.values().len() != t.num_vertices() {
        return Err(Error::LengthMismatch { expected: t.num_vertices(), got: theta.values().len() });
    }
    let chi_like = 2 * t.genus() as i64 - 2 + t.num_vertices() as i64;
    let required = T::TAU() * T::lit(chi_like as f64);
    let sum = theta.sum();
    if (sum - required).abs() > T::tol(1e-8) * required.abs().max(T::one()) {
        return Err(Error::GaussBonnetViolated {
            sum: sum.to_f64().unwrap_or(f64::NAN),
            required: required.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

fn log_c<T: Real>(m: &DecoratedMetric<T>) -> Vec<T> {
    (0..m.triangulation().num_vertices()).map(|v| m.log_horocycle_length(v).expect("in range")).collect()
}

fn apply_gauge<T: Real>(u: &mut [T], gauge: Gauge) {
    let shift = match gauge {
        Gauge::Pin(v) => u[v],
        Gauge::ZeroMean => u.iter().fold(T::zero(), |a, &b| a + b) / T::count(u.len()),
    };
    for x in u.iter_mut() {
        *x = *x - shift;
    }
}

fn axpy<T: Real>(u: &[T], t: T, d: &[T]) -> Vec<T> {
    u.iter().zip(d).map(|(&a, &b)| a + t * b).collect()
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Minimizes `E_Θ` from `u = 0`.
pub fn minimize_e_theta<T: Real>(
    m: &DecoratedMetric<T>,
    theta: &ConeAngleTarget<T>,
    opts: &SolveOptions,
) -> Result<SolveReport<T>> {
    minimize_e_theta_from(m, theta, &vec![T::zero(); m.triangulation().num_vertices()], opts)
}

pub fn minimize_e_theta_from<T: Real>(
    m: &DecoratedMetric<T>,
    theta: &ConeAngleTarget<T>,
    u0: &[T],
    opts: &SolveOptions,
) -> Result<SolveReport<T>> {
    opts.validate()?;
    gauss_bonnet(m, theta)?;
    let n = m.triangulation().num_vertices();
    if u0.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: u0.len() });
    }
    let pin = match opts.gauge {
        Gauge::Pin(v) => {
            m.triangulation().check_vertex(v)?;
            v
        }
        Gauge::ZeroMean => 0,
    };
    let lc = log_c(m);
    let mut u = u0.to_vec();
    apply_gauge(&mut u, opts.gauge);
    let mut ev = e_theta_warm(m, &lc, theta, &u)?;
    let mut flips = ev.delaunay.flips.len();

    let shifted: Vec<T> = u.iter().map(|&x| x + T::one()).collect();
    let ev1 = e_theta_warm(&ev.delaunay.metric, &lc, theta, &shifted)?;
    if (ev1.value - ev.value).abs() > T::tol(1e-10) * ev.value.abs().max(T::one()) {
        return Err(Error::GaussBonnetViolated {
            sum: to_f64(theta.sum()),
            required: to_f64(theta.sum() - (ev1.value - ev.value)),
        });
    }

    let tol = T::lit(opts.gradient_tolerance);
    let c1 = T::lit(opts.line_search.sufficient_decrease);
    let shrink = T::lit(opts.line_search.shrink);
    let free: Vec<usize> = (0..n).filter(|&v| v != pin).collect();
    let mut regularized = false;
    let mut iterations = 0;
    loop {
        let gnorm = norm_inf(&ev.gradient);
        if gnorm <= tol {
            break;
        }
        if iterations == opts.max_iterations {
            return Err(Error::IterLimit { iterations, gradient: to_f64(gnorm) });
        }
        iterations += 1;
        let h = ev.hessian.principal(&free);
        let rhs: Vec<T> = free.iter().map(|&v| -ev.gradient[v]).collect();
        let (sol, reg) = solve_spd(&h, &rhs).ok_or(Error::LineSearchFailure { iterations, gradient: to_f64(gnorm) })?;
        regularized |= reg;
        let mut d = vec![T::zero(); n];
        for (k, &v) in free.iter().enumerate() {
            d[v] = sol[k];
        }
        if opts.gauge == Gauge::ZeroMean {
            apply_gauge(&mut d, Gauge::ZeroMean);
        }
        let slope = dot(&ev.gradient, &d);
        if !(slope < T::zero()) {
            d = ev.gradient.iter().map(|&g| -g).collect();
        }
        let next = line_search(&ev, &u, &d, c1, shrink, |x| e_theta_warm(&ev.delaunay.metric, &lc, theta, x))
            .map_err(|_| Error::LineSearchFailure { iterations, gradient: to_f64(gnorm) })?;
        u = next.0;
        ev = next.1;
        flips += ev.delaunay.flips.len();
    }
    let kkt = theta_kkt(&ev, tol);
    Ok(SolveReport {
        u,
        iterations,
        flips_total: flips,
        active_set: Vec::new(),
        kkt,
        status: SolveStatus::Converged,
        value: ev.value,
        regularized,
        delaunay: ev.delaunay,
        theta_tilde: ev.theta_tilde,
        bounds: None,
    })
}

/// Backtracking Armijo search along `d` starting from step `t0 = 1`.
/// A step that fails Armijo only by round-off but reduces the gradient is accepted.
fn line_search<T: Real, F>(
    ev: &EnergyEvaluation<T>,
    u: &[T],
    d: &[T],
    c1: T,
    shrink: T,
    eval: F,
) -> Result<(Vec<T>, EnergyEvaluation<T>), ()>
where
    F: Fn(&[T]) -> Result<EnergyEvaluation<T>>,
{
    let measure = |_: &[T], e: &EnergyEvaluation<T>| norm_inf(&e.gradient);
    searched(ev, u, d, T::one(), c1, shrink, &eval, &measure).map(|(u, e, _)| (u, e))
}

fn searched<T: Real, F, M>(
    ev: &EnergyEvaluation<T>,
    u: &[T],
    d: &[T],
    t0: T,
    c1: T,
    shrink: T,
    eval: &F,
    measure: &M,
) -> Result<(Vec<T>, EnergyEvaluation<T>, T), ()>
where
    F: Fn(&[T]) -> Result<EnergyEvaluation<T>>,
    M: Fn(&[T], &EnergyEvaluation<T>) -> T,
{
    let slope = dot(&ev.gradient, d);
    let roundoff = T::lit(64.0) * T::epsilon() * ev.value.abs().max(T::one());
    let gnorm = measure(u, ev);
    let mut t = t0;
    for _ in 0..80 {
        let trial = axpy(u, t, d);
        if let Ok(next) = eval(&trial) {
            if next.value <= ev.value + c1 * t * slope {
                return Ok((trial, next, t));
            }
            if next.value <= ev.value + roundoff && measure(&trial, &next) < gnorm {
                return Ok((trial, next, t));
            }
        }
        t = t * shrink;
    }
    Err(())
}

fn theta_kkt<T: Real>(ev: &EnergyEvaluation<T>, tol: T) -> KktReport<T> {
    let s = norm_inf(&ev.gradient);
    KktReport { stationarity: s, feasibility: T::zero(), complementarity: T::zero(), active: Vec::new(), pass: s <= tol }
}

fn check_sphere<T: Real>(m: &DecoratedMetric<T>, vinf: usize) -> Result<()> {
    let t = m.triangulation();
    t.check_vertex(vinf)?;
    if t.genus() != 0 {
        return Err(Error::WrongGenus { expected: 0, got: t.genus() });
    }
    if t.num_vertices() < 3 {
        return Err(Error::TooFewVertices { needed: 3, got: t.num_vertices() });
    }
    Ok(())
}

/// The lower bounds `−δ(v, v∞)` for the free vertices. A shifted horocycle at
/// `v` lies at distance `δ(v, v∞) + u_v` from the one at `v∞`, and the
/// neighbours of `v∞` are the vertices where this is smallest.
pub fn distance_bounds<T: Real>(m: &DecoratedMetric<T>, vinf: usize) -> Result<Vec<T>> {
    free_vertices(m.triangulation(), vinf).into_iter().map(|v| horocycle_distance(m, v, vinf).map(|d| -d)).collect()
}

/// Minimizes `Ē^{v∞}` subject to `u_v ≥ −δ(v, v∞)`, from `u⁰ = max(0, −δ)`.
pub fn minimize_e_bar<T: Real>(m: &DecoratedMetric<T>, vinf: usize, opts: &SolveOptions) -> Result<SolveReport<T>> {
    check_sphere(m, vinf)?;
    let delta = distance_bounds(m, vinf)?;
    let u0: Vec<T> = delta.iter().map(|&d| d.max(T::zero())).collect();
    solve_e_bar(m, vinf, delta, u0, opts)
}

/// As [`minimize_e_bar`] from a given start; infeasible entries are raised to their bound.
pub fn minimize_e_bar_from<T: Real>(
    m: &DecoratedMetric<T>,
    vinf: usize,
    u0: &[T],
    opts: &SolveOptions,
) -> Result<SolveReport<T>> {
    check_sphere(m, vinf)?;
    let delta = distance_bounds(m, vinf)?;
    if u0.len() != delta.len() {
        return Err(Error::LengthMismatch { expected: delta.len(), got: u0.len() });
    }
    let u0: Vec<T> = u0.iter().zip(&delta).map(|(&x, &d)| x.max(d)).collect();
    solve_e_bar(m, vinf, delta, u0, opts)
}

fn bound_eps<T: Real>(d: T) -> T {
    T::tol(1e-12) * d.abs().max(T::one())
}

fn solve_e_bar<T: Real>(
    m: &DecoratedMetric<T>,
    vinf: usize,
    delta: Vec<T>,
    mut u: Vec<T>,
    opts: &SolveOptions,
) -> Result<SolveReport<T>> {
    opts.validate()?;
    let nf = delta.len();
    let lc = log_c(m);
    let tol = T::lit(opts.gradient_tolerance);
    let c1 = T::lit(opts.line_search.sufficient_decrease);
    let shrink = T::lit(opts.line_search.shrink);
    let at_bound = |u: &[T], i: usize| u[i] - delta[i] <= bound_eps(delta[i]);

    translate_to_bound(&mut u, &delta);
    let mut ev = e_bar_warm(m, &lc, vinf, &u)?;
    let mut flips = ev.delaunay.flips.len();
    let mut regularized = false;
    let mut iterations = 0;
    loop {
        let k = bar_kkt(&ev.gradient, &u, &delta, tol);
        if k.pass {
            break;
        }
        let gnorm = k.stationarity;
        if iterations == opts.max_iterations {
            return Err(Error::IterLimit { iterations, gradient: to_f64(gnorm) });
        }
        iterations += 1;
        let g = &ev.gradient;
        let mut fixed: Vec<bool> = (0..nf).map(|i| at_bound(&u, i) && g[i] >= T::zero()).collect();
        if !fixed.iter().any(|&f| f) {
            let pin = (0..nf)
                .filter(|&i| at_bound(&u, i))
                .max_by(|&a, &b| g[a].partial_cmp(&g[b]).unwrap_or(std::cmp::Ordering::Equal))
                .expect("translation leaves one variable at its bound");
            fixed[pin] = true;
        }
        let mut d = vec![T::zero(); nf];
        loop {
            let free: Vec<usize> = (0..nf).filter(|&i| !fixed[i]).collect();
            let h = ev.hessian.principal(&free);
            let rhs: Vec<T> = free.iter().map(|&i| -g[i]).collect();
            let (sol, reg) =
                solve_spd(&h, &rhs).ok_or(Error::LineSearchFailure { iterations, gradient: to_f64(gnorm) })?;
            regularized |= reg;
            d.iter_mut().for_each(|x| *x = T::zero());
            for (k, &i) in free.iter().enumerate() {
                d[i] = sol[k];
            }
            let blocked: Vec<usize> = free.iter().copied().filter(|&i| at_bound(&u, i) && d[i] < T::zero()).collect();
            if blocked.is_empty() {
                break;
            }
            for i in blocked {
                fixed[i] = true;
            }
        }
        if !(dot(g, &d) < T::zero()) {
            d = (0..nf).map(|i| if at_bound(&u, i) && g[i] > T::zero() { T::zero() } else { -g[i] }).collect();
        }
        let mut tmax = T::infinity();
        for i in 0..nf {
            if d[i] < T::zero() {
                tmax = tmax.min((u[i] - delta[i]).max(T::zero()) / -d[i]);
            }
        }
        let t0 = tmax.min(T::one());
        let eval = |x: &[T]| e_bar_warm(&ev.delaunay.metric, &lc, vinf, x);
        let measure = |x: &[T], e: &EnergyEvaluation<T>| bar_kkt(&e.gradient, x, &delta, tol).stationarity;
        let (mut nu, _, t) = searched(&ev, &u, &d, t0, c1, shrink, &eval, &measure)
            .map_err(|_| Error::LineSearchFailure { iterations, gradient: to_f64(gnorm) })?;
        if t == tmax {
            for i in 0..nf {
                if d[i] < T::zero() && (nu[i] - delta[i]) <= bound_eps(delta[i]) * T::lit(16.0) {
                    nu[i] = delta[i];
                }
            }
        }
        for i in 0..nf {
            nu[i] = nu[i].max(delta[i]);
        }
        translate_to_bound(&mut nu, &delta);
        u = nu;
        let chart = ev.delaunay.metric.clone();
        ev = e_bar_warm(&chart, &lc, vinf, &u)?;
        flips += ev.delaunay.flips.len();
    }
    let kkt = bar_kkt(&ev.gradient, &u, &delta, tol);
    Ok(SolveReport {
        active_set: kkt.active.clone(),
        u,
        iterations,
        flips_total: flips,
        kkt,
        status: SolveStatus::Converged,
        value: ev.value,
        regularized,
        delaunay: ev.delaunay,
        theta_tilde: ev.theta_tilde,
        bounds: Some(delta),
    })
}

/// Shifts `u` down along `1` until the smallest slack is zero, which lowers
/// `Ē` by exactly `2π` times the shift.
fn translate_to_bound<T: Real>(u: &mut [T], delta: &[T]) {
    let s = u.iter().zip(delta).fold(T::infinity(), |m, (&x, &d)| m.min(x - d));
    if s > T::zero() && s.is_finite() {
        for (x, &d) in u.iter_mut().zip(delta) {
            *x = (*x - s).max(d);
        }
    }
}

fn bar_kkt<T: Real>(g: &[T], u: &[T], delta: &[T], tol: T) -> KktReport<T> {
    let mut stationarity = T::zero();
    let mut feasibility = T::zero();
    let mut complementarity = T::zero();
    let mut active = Vec::new();
    for i in 0..g.len() {
        let slack = u[i] - delta[i];
        feasibility = feasibility.max(T::zero() - slack);
        if slack <= bound_eps(delta[i]) {
            active.push(i);
            stationarity = stationarity.max(-g[i]);
            complementarity = complementarity.max((slack * g[i]).abs());
        } else {
            stationarity = stationarity.max(g[i].abs());
        }
    }
    let pass = stationarity <= tol && feasibility <= tol && complementarity <= tol && !active.is_empty();
    KktReport { stationarity, feasibility, complementarity, active, pass }
}

/// Which optimality conditions to check.
#[derive(Clone, Copy, Debug)]
pub enum KktProblem<'a, T> {
    Theta(&'a ConeAngleTarget<T>),
    Bar { vinf: usize },
}

/// Independent verification of the optimality conditions at `u`.
pub fn kkt_check<T: Real>(m: &DecoratedMetric<T>, problem: KktProblem<'_, T>, u: &[T], tol: T) -> Result<KktReport<T>> {
    match problem {
        KktProblem::Theta(theta) => {
            let ev = crate::energy::e_theta(m, theta, u)?;
            Ok(theta_kkt(&ev, tol))
        }
        KktProblem::Bar { vinf } => {
            check_sphere(m, vinf)?;
            let delta = distance_bounds(m, vinf)?;
            let ev = crate::energy::e_bar(m, vinf, u)?;
            Ok(bar_kkt(&ev.gradient, u, &delta, tol))
        }
    }
}
