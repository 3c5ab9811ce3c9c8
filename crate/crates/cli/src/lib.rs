//! Command-line front end. [`cli_dispatch`] runs one invocation and returns
//! the process exit code: 0 success, 1 usage, 2 invalid input, 3 solver failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use uniformizer::delaunay::{euclidean_delaunay_crosscheck, triangle_inequality_check};
use uniformizer::energy::{e_bar, e_theta, free_vertices, total_defect};
use uniformizer::io::{emit_obj, fmt_real, metric_from_obj, parse_obj, ReportFile, SurfaceFile, Value, TIMING_KEY};
use uniformizer::optimize::SolveOptions;
use uniformizer::realize::{prescribe_cone_angles, uniformize_sphere, uniformize_torus, RealizationKind};
use uniformizer::{
    check_delaunay, horocycle_distance, make_delaunay, ConeAngleTarget, DelaunayMode, Error, ExtReal, Metric,
    PartialDecoration, SolveReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Environment variable bounding the worker threads of `check`.
pub const THREADS_VAR: &str = "UNIFORMIZER_THREADS";

#[derive(Parser, Debug)]
#[command(name = "uniformizer", version, about = "Discrete uniformization of decorated surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct SolverFlags {
    /// Gradient tolerance (sup-norm, radians)
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Newton iteration limit
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
}

impl SolverFlags {
    fn options(self) -> SolveOptions {
        SolveOptions { gradient_tolerance: self.tol, max_iterations: self.max_iter, ..SolveOptions::default() }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate surfaces and report Delaunay and Gauss-Bonnet diagnostics
    Check {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Flip to a Delaunay triangulation and print the resulting surface file
    Delaunay {
        input: PathBuf,
        /// Use the adjusted predicate for partial decorations
        #[arg(long)]
        adjusted: bool,
        /// Comma-separated vertices without horocycles
        #[arg(long, value_delimiter = ',')]
        undecorated: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the signed horocycle distance between two vertices
    Distance {
        input: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Realize a genus-0 surface as an ideal polyhedron inscribed in the sphere
    UniformizeSphere {
        input: PathBuf,
        #[arg(long)]
        vinf: usize,
        #[command(flatten)]
        solver: SolverFlags,
        /// OBJ destination (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compute the flat metric and modulus of a torus
    UniformizeTorus {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        /// Surface file destination for the flat metric
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Find the metric with prescribed cone angles in the discrete conformal class
    PrescribeAngles {
        input: PathBuf,
        /// A file with one angle per vertex, or `uniform`; defaults to the input's theta
        #[arg(long)]
        theta: Option<String>,
        #[command(flatten)]
        solver: SolverFlags,
        /// Surface file destination (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print an energy value and gradient at a given u
    Energy {
        input: PathBuf,
        /// File with one value per vertex (per non-distinguished vertex with --vinf)
        #[arg(long)]
        u: PathBuf,
        /// Evaluate the limit energy for this distinguished vertex
        #[arg(long)]
        vinf: Option<usize>,
        /// Cone angles as for prescribe-angles (E_Θ only)
        #[arg(long)]
        theta: Option<String>,
    },
}

/// Why a command failed.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::IterLimit { .. }
            | Error::LineSearchFailure { .. }
            | Error::FlipLimitExceeded(_)
            | Error::NotRealizable(_)
            | Error::LayoutInconsistent(_)
            | Error::ConvexityViolated(_)
            | Error::InconsistentDistance(..)
            | Error::NotNeutral { .. } => Failure::Solver(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Runs one invocation. `argv[0]` is the program name.
pub fn cli_dispatch<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Check { inputs } => check(&inputs, out, err),
        Command::Delaunay { input, adjusted, undecorated, output } => {
            delaunay(&input, adjusted, &undecorated, output.as_deref(), out)
        }
        Command::Distance { input, from, to } => distance(&input, from, to, out),
        Command::UniformizeSphere { input, vinf, solver, output, report } => {
            sphere(&input, vinf, solver.options(), output.as_deref(), report.as_deref(), out)
        }
        Command::UniformizeTorus { input, solver, output, report } => {
            torus(&input, solver.options(), output.as_deref(), report.as_deref(), out)
        }
        Command::PrescribeAngles { input, theta, solver, output, report } => {
            angles(&input, theta.as_deref(), solver.options(), output.as_deref(), report.as_deref(), out)
        }
        Command::Energy { input, u, vinf, theta } => energy(&input, &u, vinf, theta.as_deref(), out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Solver(msg)) => {
            let _ = writeln!(err, "solver failure: {msg}");
            EXIT_SOLVER
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Invalid(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_text(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Outcome {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_err(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::Invalid(e.to_string())),
    }
}

/// Reads a surface file, or an OBJ mesh when the extension is `.obj`.
fn load(path: &Path) -> Result<SurfaceFile, Failure> {
    let text = read_text(path)?;
    let located = |e: Error| Failure::from(e).with_context(path);
    if path.extension().is_some_and(|x| x.eq_ignore_ascii_case("obj")) {
        let m = metric_from_obj(&parse_obj(&text).map_err(located)?).map_err(located)?;
        Ok(SurfaceFile::from_metric(&m))
    } else {
        SurfaceFile::parse(&text).map_err(located)
    }
}

impl Failure {
    fn with_context(self, path: &Path) -> Self {
        match self {
            Failure::Invalid(m) => Failure::Invalid(format!("{}: {m}", path.display())),
            Failure::Solver(m) => Failure::Solver(format!("{}: {m}", path.display())),
        }
    }
}

fn parse_reals(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    let mut xs = Vec::new();
    for line in text.lines() {
        for w in line.split('#').next().unwrap_or("").split_whitespace() {
            let x: f64 = w.parse().map_err(|_| Failure::Invalid(format!("bad {what} value `{w}`")))?;
            xs.push(x);
        }
    }
    Ok(xs)
}

fn cone_angles(spec: Option<&str>, surf: &SurfaceFile) -> Result<ConeAngleTarget<f64>, Failure> {
    let values = match spec {
        Some("uniform") => return Ok(ConeAngleTarget::uniform(&surf.triangulation)),
        Some(path) => parse_reals(&read_text(Path::new(path))?, "theta")?,
        None => match &surf.theta {
            Some(t) => t.clone(),
            None => return Ok(ConeAngleTarget::uniform(&surf.triangulation)),
        },
    };
    Ok(ConeAngleTarget::new(values)?)
}

fn check_one(path: &Path) -> Result<String, Failure> {
    let surf = load(path)?;
    let m = surf.metric()?;
    let t = m.triangulation();
    let chi = t.euler_characteristic();
    let mut s = format!(
        "{}: V={} E={} T={} genus={}\n",
        path.display(),
        t.num_vertices(),
        t.num_edges(),
        t.num_triangles(),
        t.genus()
    );
    let u = PartialDecoration::zero(t.num_vertices());
    let before = check_delaunay(&m, &u)?;
    s += &format!("input delaunay: {} ({} violations)\n", yes_no(before.ok), before.violations.len());
    let d = make_delaunay(&m, &u, DelaunayMode::Plain)?;
    let del = d.metric.clone();
    let after = check_delaunay(&del, &u)?;
    let cross = euclidean_delaunay_crosscheck(&del)?;
    s += &format!(
        "after {} flips: delaunay {}, nonessential edges {}, triangle inequalities {}, euclidean predicate {}\n",
        d.flips.len(),
        yes_no(after.ok),
        after.nonessential.len(),
        yes_no(triangle_inequality_check(&del)),
        if cross.consistent { "agrees" } else { "disagrees" }
    );
    let defect = total_defect(&del)?;
    let expected = std::f64::consts::TAU * chi as f64;
    let residual = defect - expected;
    // the residual is pure roundoff once below this
    let shown = if residual.abs() <= 1e-9 * expected.abs().max(1.0) { expected } else { defect };
    s += &format!("sum defect = {:.6e} (χ={chi})\n", shown);
    s += &format!("gauss-bonnet residual = {:.3e}\n", residual);
    if !after.ok || !cross.consistent {
        return Err(Failure::Solver(format!("{}: Delaunay oracle failed", path.display())));
    }
    Ok(s)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn thread_count(jobs: usize) -> usize {
    let requested = std::env::var(THREADS_VAR).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    requested.unwrap_or(1).min(jobs.max(1))
}

fn check(inputs: &[PathBuf], out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let threads = thread_count(inputs.len());
    let mut results: Vec<Option<Result<String, Failure>>> = (0..inputs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = inputs.len().div_ceil(threads);
        for (paths, slots) in inputs.chunks(chunk).zip(results.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (p, slot) in paths.iter().zip(slots.iter_mut()) {
                    *slot = Some(check_one(p));
                }
            });
        }
    });
    let mut worst: Outcome = Ok(());
    for r in results.into_iter().flatten() {
        match r {
            Ok(text) => {
                let _ = out.write_all(text.as_bytes());
            }
            Err(f) => {
                let _ = match &f {
                    Failure::Invalid(m) => writeln!(err, "error: {m}"),
                    Failure::Solver(m) => writeln!(err, "solver failure: {m}"),
                };
                worst = match (worst, f) {
                    (Err(Failure::Solver(a)), _) => Err(Failure::Solver(a)),
                    (_, Failure::Solver(b)) => Err(Failure::Solver(b)),
                    (Err(a), _) => Err(a),
                    (Ok(()), b) => Err(b),
                };
            }
        }
    }
    worst.map_err(|f| match f {
        Failure::Invalid(_) => Failure::Invalid("some inputs failed validation".into()),
        Failure::Solver(_) => Failure::Solver("some inputs failed the Delaunay oracle".into()),
    })
}

fn delaunay(
    input: &Path,
    adjusted: bool,
    undecorated: &[usize],
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let surf = load(input)?;
    let m = surf.metric()?;
    let n = m.triangulation().num_vertices();
    let mut u = vec![ExtReal::Finite(0.0); n];
    for &v in undecorated {
        m.triangulation().check_vertex(v)?;
        u[v] = ExtReal::Infinite;
    }
    let mode = if adjusted { DelaunayMode::Adjusted } else { DelaunayMode::Plain };
    let d = make_delaunay(&m, &PartialDecoration::new(u)?, mode)?;
    let mut result = SurfaceFile::from_metric(&d.metric);
    result.theta = surf.theta.clone();
    result.labels = surf.labels.clone();
    let mut text = result.emit();
    text += &format!("# {} flips\n", d.flips.len());
    for f in &d.flips {
        text += &format!("# flip {} {} -> {}\n", f.edge, fmt_real(f.before), fmt_real(f.after));
    }
    write_text(output, &text, out)
}

fn distance(input: &Path, from: usize, to: usize, out: &mut dyn Write) -> Outcome {
    let m = load(input)?.metric()?;
    let d = horocycle_distance(&m, from, to)?;
    let _ = writeln!(out, "{}", fmt_real(d));
    Ok(())
}

fn solve_report(command: &str, r: &SolveReport<f64>, elapsed: f64) -> ReportFile {
    let mut rep = ReportFile::new();
    rep.push("command", Value::Text(command.into()))
        .push("status", Value::Text(format!("{:?}", r.status)))
        .push("iterations", Value::Int(r.iterations as i64))
        .push("flips", Value::Int(r.flips_total as i64))
        .push("final_flips", Value::Int(r.delaunay.flips.len() as i64))
        .push("energy", Value::Real(r.value))
        .push("u", Value::Reals(r.u.clone()))
        .push("active", Value::Ints(r.active_set.iter().map(|&i| i as i64).collect()))
        .push("theta_tilde", Value::Reals(r.theta_tilde.clone()))
        .push("kkt_stationarity", Value::Real(r.kkt.stationarity))
        .push("kkt_feasibility", Value::Real(r.kkt.feasibility))
        .push("kkt_complementarity", Value::Real(r.kkt.complementarity))
        .push("regularized", Value::Int(r.regularized as i64));
    if let Some(b) = &r.bounds {
        rep.push("bounds", Value::Reals(b.clone()));
    }
    rep.push(TIMING_KEY, Value::Real(elapsed));
    rep
}

fn sphere(
    input: &Path,
    vinf: usize,
    opts: SolveOptions,
    output: Option<&Path>,
    report: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let m: Metric = load(input)?.metric()?;
    m.triangulation().check_vertex(vinf)?;
    let start = Instant::now();
    let (r, real) = uniformize_sphere(&m, vinf, &opts)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut rep = solve_report("uniformize-sphere", &r, elapsed);
    let kind = match real.kind {
        RealizationKind::TwoSidedPolygon => "two-sided-polygon",
        _ => "inscribed-polyhedron",
    };
    rep.entries.insert(1, ("realization".into(), Value::Text(kind.into())));
    let free: Vec<i64> = free_vertices(m.triangulation(), vinf).into_iter().map(|v| v as i64).collect();
    rep.entries.insert(2, ("free_vertices".into(), Value::Ints(free)));
    let dg = &real.diagnostics;
    rep.entries.insert(3, ("sphere_residual".into(), Value::Real(dg.sphere_residual)));
    rep.entries.insert(4, ("planarity".into(), Value::Real(dg.planarity)));
    rep.entries.insert(5, ("convexity_margin".into(), Value::Real(dg.convexity_margin)));
    rep.entries.insert(6, ("faces".into(), Value::Int(real.faces.len() as i64)));
    if let Some(p) = report {
        write_text(Some(p), &rep.emit(), out)?;
    }
    write_text(output, &emit_obj(&real.positions, &real.faces), out)
}

fn torus(
    input: &Path,
    opts: SolveOptions,
    output: Option<&Path>,
    report: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let m: Metric = load(input)?.metric()?;
    let start = Instant::now();
    let real = uniformize_torus(&m, &opts)?;
    let elapsed = start.elapsed().as_secs_f64();
    let tm = real.torus.as_ref().expect("torus realization carries its modulus");
    let cone = real.cone.as_ref().expect("torus realization carries its metric");
    let _ = writeln!(out, "tau = {} {}", fmt_real(tm.tau[0]), fmt_real(tm.tau[1]));
    let _ = writeln!(out, "basis = {} {} {} {}", fmt_real(tm.basis[0][0]), fmt_real(tm.basis[0][1]), fmt_real(tm.basis[1][0]), fmt_real(tm.basis[1][1]));
    if let Some(p) = output {
        let mut flat = SurfaceFile::from_metric(&cone.metric);
        flat.theta = Some(cone.theta_tilde.clone());
        write_text(Some(p), &flat.emit(), out)?;
    }
    if let Some(p) = report {
        let mut rep = ReportFile::new();
        rep.push("command", Value::Text("uniformize-torus".into()))
            .push("tau", Value::Reals(tm.tau.to_vec()))
            .push("basis", Value::Reals(vec![tm.basis[0][0], tm.basis[0][1], tm.basis[1][0], tm.basis[1][1]]))
            .push("lattice_residual", Value::Real(tm.lattice_residual))
            .push("closure_residual", Value::Real(real.diagnostics.closure_residual))
            .push("u", Value::Reals(cone.u.clone()))
            .push("theta_tilde", Value::Reals(cone.theta_tilde.clone()))
            .push(TIMING_KEY, Value::Real(elapsed));
        write_text(Some(p), &rep.emit(), out)?;
    }
    Ok(())
}

fn angles(
    input: &Path,
    theta: Option<&str>,
    opts: SolveOptions,
    output: Option<&Path>,
    report: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let surf = load(input)?;
    let m: Metric = surf.metric()?;
    let target = cone_angles(theta, &surf)?;
    let start = Instant::now();
    let real = prescribe_cone_angles(&m, &target, &opts)?;
    let elapsed = start.elapsed().as_secs_f64();
    let cone = real.cone.as_ref().expect("cone realization carries its metric");
    let err_inf = target.values().iter().zip(&cone.theta_tilde).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if let Some(p) = report {
        let mut rep = ReportFile::new();
        rep.push("command", Value::Text("prescribe-angles".into()))
            .push("theta", Value::Reals(target.values().to_vec()))
            .push("theta_tilde", Value::Reals(cone.theta_tilde.clone()))
            .push("angle_error", Value::Real(err_inf))
            .push("u", Value::Reals(cone.u.clone()))
            .push(TIMING_KEY, Value::Real(elapsed));
        write_text(Some(p), &rep.emit(), out)?;
    }
    let mut result = SurfaceFile::from_metric(&cone.metric);
    result.theta = Some(target.values().to_vec());
    result.labels = surf.labels.clone();
    write_text(output, &result.emit(), out)
}

fn energy(input: &Path, u_path: &Path, vinf: Option<usize>, theta: Option<&str>, out: &mut dyn Write) -> Outcome {
    let surf = load(input)?;
    let m: Metric = surf.metric()?;
    let u = parse_reals(&read_text(u_path)?, "u")?;
    let ev = match vinf {
        Some(v) => {
            m.triangulation().check_vertex(v)?;
            e_bar(&m, v, &u)?
        }
        None => e_theta(&m, &cone_angles(theta, &surf)?, &u)?,
    };
    let _ = writeln!(out, "value {}", fmt_real(ev.value));
    let g: Vec<String> = ev.gradient.iter().map(|&x| fmt_real(x)).collect();
    let _ = writeln!(out, "gradient {}", g.join(" "));
    Ok(())
}
