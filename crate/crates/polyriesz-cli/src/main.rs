//! `polyriesz`: batch computation of polygon interaction energies and reports.
//!
//! Exit codes: 0 success, 2 usage, 3 input validation, 4 accuracy, 5 optimization.
//! Failures print one line `error code=N kind=K msg="…"` on stderr.

mod output;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyriesz::energy::{energy, energy_by_area_quadrature, energy_ratio_to_regular};
use polyriesz::geom::{Polygon, Vec2};
use polyriesz::kernel::Kernel;
use polyriesz::optimize::{maximize_energy, stationarity_at_optimum, Init, OptimizeOptions, OptimizeResult};
use polyriesz::potential::{potential_at, QuadratureSpec};
use polyriesz::stationarity::{check_stationarity, StationarityReport};
use polyriesz::symmflow::{equilateral_side, quadrilateral_recursion, symmetrization_run, triangle_recursion};
use polyriesz::variation::{
    admissible_range, analytic_first_variation, analytic_geometry_derivatives, fd_first_variation,
    fd_geometry_derivatives, richardson_first_variation, Constraint, FlowSpec,
};
use serde_json::{json, Value};

use output::float;

#[derive(Parser, Debug)]
#[command(name = "polyriesz", version, about = "Riesz-type interaction energies of polygons")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    #[arg(long, global = true, value_enum, default_value_t = KernelKind::Riesz)]
    kernel: KernelKind,
    /// Riesz exponent in (0, 2).
    #[arg(long, global = true, default_value_t = 1.0)]
    alpha: f64,
    /// Shift of the regularized kernel `(r + δ)^(−α)`.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Relative tolerance of the adaptive quadratures.
    #[arg(long, global = true, default_value_t = 1e-8)]
    quad_tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    out: Format,
    /// Worker threads; numeric output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KernelKind {
    Riesz,
    RegularizedRiesz,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConstraintArg {
    Area,
    Perimeter,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Shape {
    Triangle,
    Quad,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnergyMethod {
    Boundary,
    Area,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energy of a polygon with its error bound.
    Energy {
        /// Polygon JSON file, `-` for stdin.
        polygon: PathBuf,
        #[arg(long, value_enum, default_value_t = EnergyMethod::Boundary)]
        method: EnergyMethod,
        /// Also report the ratio to the regular polygon of equal area and vertex count.
        #[arg(long)]
        ratio: bool,
    },
    /// Potential at a point.
    Potential {
        polygon: PathBuf,
        /// Evaluation point `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        at: Vec2,
    },
    /// Stationarity residuals and verdict.
    Stationarity {
        polygon: PathBuf,
        #[arg(long, value_enum)]
        constraint: ConstraintArg,
        /// Absolute tolerance; residuals within three error bounds also pass.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Analytic first variation against finite differences.
    Variation {
        polygon: PathBuf,
        /// Flow as inline JSON or a path to a JSON file; indices are 1-based.
        #[arg(long)]
        flow: String,
        #[arg(long, default_value_t = 1e-3)]
        fd_step: f64,
    },
    /// Chain of Steiner symmetrizations of a triangle or quadrilateral.
    Symmetrize {
        polygon: PathBuf,
        #[arg(long)]
        steps: usize,
    },
    /// Side-length recursions of the symmetrization chains.
    PolyaSzego {
        #[arg(long, value_enum)]
        shape: Shape,
        /// Half base of the unit-area triangle, or side of the unit-area rhombus for `quad`.
        #[arg(long)]
        a0: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Area-constrained energy maximization over N-gons.
    Optimize {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        area: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Start polygon JSON instead of a random one.
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value_t = OptimizeOptions::default().max_iters)]
        max_iters: usize,
        #[arg(long, default_value_t = OptimizeOptions::default().grad_tol)]
        grad_tol: f64,
        /// Also write the trace as CSV here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Also write the final polygon JSON here.
        #[arg(long)]
        polygon_out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    msg: String,
}

impl From<polyriesz::Error> for Failure {
    fn from(e: polyriesz::Error) -> Self {
        use polyriesz::Error as E;
        let code = match e {
            E::Accuracy { .. } => 4,
            E::Optimization(_) => 5,
            _ => 3,
        };
        Failure { code, kind: e.kind(), msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, kind: "usage", msg: msg.into() }
}

fn io_failure(path: &std::path::Path, e: io::Error) -> Failure {
    Failure { code: 3, kind: "io", msg: format!("{}: {e}", path.display()) }
}

fn parse_point(s: &str) -> Result<Vec2, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected x,y".into());
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(Vec2::new(x, y))
}

fn read_text(path: &std::path::Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| io_failure(path, e))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| io_failure(path, e))
    }
}

fn read_polygon(path: &std::path::Path) -> Result<Polygon, Failure> {
    let (p, flipped) = Polygon::from_json(&read_text(path)?)?;
    if flipped {
        eprintln!("note: clockwise input was reordered counterclockwise");
    }
    Ok(p)
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn kernel(g: &Global) -> Result<Kernel, Failure> {
    match (g.kernel, g.delta) {
        (KernelKind::Riesz, None) => Ok(Kernel::riesz(g.alpha)?),
        (KernelKind::Riesz, Some(_)) => Err(usage("--delta applies to --kernel regularized-riesz only")),
        (KernelKind::RegularizedRiesz, Some(d)) => Ok(Kernel::regularized_riesz(g.alpha, d)?),
        (KernelKind::RegularizedRiesz, None) => Err(usage("--kernel regularized-riesz needs --delta")),
    }
}

fn kernel_json(g: &Global) -> Value {
    match g.kernel {
        KernelKind::Riesz => json!({"kind": "riesz", "alpha": g.alpha}),
        KernelKind::RegularizedRiesz => json!({"kind": "regularized_riesz", "alpha": g.alpha, "delta": g.delta}),
    }
}

fn polygon_json(p: &Polygon) -> Value {
    serde_json::to_value(p).expect("polygon serializes")
}

fn vertex_header(n: usize) -> Vec<String> {
    (1..=n).flat_map(|i| [format!("x{i}"), format!("y{i}")]).collect()
}

fn vertex_cells(p: &Polygon) -> Vec<String> {
    p.vertices().iter().flat_map(|v| [float(v.x), float(v.y)]).collect()
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn stationarity_output(r: &StationarityReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut v = r.to_json_value();
            let status = if r.verdict.stationary { "stationary" } else { "not stationary" };
            v["status"] = json!(status);
            output::json(&v)
        }
        Format::Csv => {
            let header = strings(&[
                "i",
                "length",
                "side_mean",
                "sliding_area",
                "sliding_perimeter",
                "tilting_area",
                "tilting_perimeter",
                "err",
                "angle",
                "diagonal_i",
                "diagonal_perimeter",
            ]);
            let rows: Vec<Vec<String>> = r
                .sides
                .iter()
                .zip(&r.vertices)
                .map(|(s, v)| {
                    vec![
                        (s.index + 1).to_string(),
                        float(s.length),
                        float(s.side_mean),
                        float(s.sliding_area),
                        float(s.sliding_perimeter),
                        float(s.tilting_area),
                        float(s.tilting_perimeter),
                        float(s.err),
                        float(v.angle),
                        opt_float(v.diagonal_i),
                        opt_float(v.diagonal_perimeter),
                    ]
                })
                .collect();
            output::csv(&header, &rows)
        }
    }
}

fn optimize_csv(r: &OptimizeResult) -> String {
    let header = strings(&["iter", "energy", "error_bound", "grad_norm", "max_side_dev", "max_angle_dev"]);
    let rows: Vec<Vec<String>> = r
        .trace
        .iter()
        .map(|t| {
            vec![
                t.iter.to_string(),
                float(t.energy),
                float(t.error_bound),
                float(t.grad_norm),
                float(t.max_side_dev),
                float(t.max_angle_dev),
            ]
        })
        .collect();
    output::csv(&header, &rows)
}

fn run(cli: Cli) -> Result<String, Failure> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure { code: 3, kind: "threads", msg: e.to_string() })?;
    }
    let q = QuadratureSpec::with_tolerance(g.quad_tol);
    q.validate()?;
    match &cli.command {
        Command::Energy { polygon, method, ratio } => {
            let p = read_polygon(polygon)?;
            let k = kernel(g)?;
            let e = match method {
                EnergyMethod::Boundary => energy(&p, &k, &q)?,
                EnergyMethod::Area => energy_by_area_quadrature(&p, &k, &q)?,
            };
            let r = if *ratio { Some(energy_ratio_to_regular(&p, &k, &q)?) } else { None };
            Ok(match g.out {
                Format::Json => {
                    let mut v = json!({"kernel": kernel_json(g), "n": p.len(), "area": p.area(), "energy": e.value, "error": e.error});
                    if let Some(r) = r {
                        v["ratio_to_regular"] = json!(r.value);
                        v["ratio_error"] = json!(r.error);
                    }
                    output::json(&v)
                }
                Format::Csv => {
                    let mut h = strings(&["n", "area", "energy", "error"]);
                    let mut row = vec![p.len().to_string(), float(p.area()), float(e.value), float(e.error)];
                    if let Some(r) = r {
                        h.extend(strings(&["ratio_to_regular", "ratio_error"]));
                        row.extend([float(r.value), float(r.error)]);
                    }
                    output::csv(&h, &[row])
                }
            })
        }
        Command::Potential { polygon, at } => {
            let p = read_polygon(polygon)?;
            let v = potential_at(&p, &kernel(g)?, *at, &q)?;
            Ok(match g.out {
                Format::Json => output::json(&json!({"kernel": kernel_json(g), "at": [at.x, at.y], "potential": v.value, "error": v.error})),
                Format::Csv => output::csv(
                    &strings(&["x", "y", "potential", "error"]),
                    &[vec![float(at.x), float(at.y), float(v.value), float(v.error)]],
                ),
            })
        }
        Command::Stationarity { polygon, constraint, tol } => {
            let p = read_polygon(polygon)?;
            let c = match constraint {
                ConstraintArg::Area => Constraint::Area,
                ConstraintArg::Perimeter => Constraint::Perimeter,
            };
            let r = check_stationarity(&p, &kernel(g)?, c, *tol, &q)?;
            Ok(stationarity_output(&r, g.out))
        }
        Command::Variation { polygon, flow, fd_step } => {
            let p = read_polygon(polygon)?;
            let text = if flow.trim_start().starts_with('{') { flow.clone() } else { read_text(flow.as_ref())? };
            let spec = FlowSpec::from_json(&text)?;
            let k = kernel(g)?;
            let (range, reason) = admissible_range(&p, &spec.family)?;
            let a = analytic_first_variation(&p, &k, &spec, &q)?;
            let fd = fd_first_variation(&p, &k, &spec, *fd_step, &q)?;
            let rich = richardson_first_variation(&p, &k, &spec, *fd_step, &q)?;
            let (da, dp) = analytic_geometry_derivatives(&p, &spec.family)?;
            let raw = FlowSpec::new(spec.family, Constraint::None);
            let (fa, fp) = fd_geometry_derivatives(&p, &raw, *fd_step)?;
            // (quantity, analytic, analytic bound, fd, fd bound, richardson, richardson bound)
            type Row = (&'static str, f64, f64, f64, f64, Option<f64>, Option<f64>);
            let rows: [Row; 3] = [
                ("energy", a.value, a.error, fd.value, fd.bound(), Some(rich.value), Some(rich.bound())),
                ("area", da, 0.0, fa, 0.0, None, None),
                ("perimeter", dp, 0.0, fp, 0.0, None, None),
            ];
            Ok(match g.out {
                Format::Json => {
                    let table: Vec<Value> = rows
                        .iter()
                        .map(|r| {
                            json!({"quantity": r.0, "analytic": r.1, "analytic_error": r.2, "fd": r.3, "fd_bound": r.4,
                                   "richardson": r.5, "richardson_bound": r.6,
                                   "difference": r.5.unwrap_or(r.3) - r.1})
                        })
                        .collect();
                    output::json(&json!({
                        "flow": spec, "fd_step": fd_step, "kernel": kernel_json(g),
                        "admissible_range": range, "range_limited_by": reason, "rows": table,
                    }))
                }
                Format::Csv => {
                    let header = strings(&[
                        "quantity",
                        "analytic",
                        "analytic_error",
                        "fd",
                        "fd_bound",
                        "richardson",
                        "richardson_bound",
                        "difference",
                    ]);
                    let body: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.0.to_string(),
                                float(r.1),
                                float(r.2),
                                float(r.3),
                                float(r.4),
                                opt_float(r.5),
                                opt_float(r.6),
                                float(r.5.unwrap_or(r.3) - r.1),
                            ]
                        })
                        .collect();
                    output::csv(&header, &body)
                }
            })
        }
        Command::Symmetrize { polygon, steps } => {
            let p = read_polygon(polygon)?;
            let run = symmetrization_run(&p, &kernel(g)?, *steps, &q)?;
            Ok(match g.out {
                Format::Csv => {
                    let mut header = vec!["step".to_string()];
                    header.extend(vertex_header(p.len()));
                    header.extend(strings(&["area", "energy", "error_bound"]));
                    let rows: Vec<Vec<String>> = run
                        .iter()
                        .map(|s| {
                            let mut r = vec![s.step.to_string()];
                            r.extend(vertex_cells(&s.polygon));
                            r.extend([float(s.polygon.area()), float(s.energy.value), float(s.energy.error)]);
                            r
                        })
                        .collect();
                    output::csv(&header, &rows)
                }
                Format::Json => {
                    let steps: Vec<Value> = run
                        .iter()
                        .map(|s| {
                            json!({"step": s.step, "polygon": polygon_json(&s.polygon), "area": s.polygon.area(),
                                   "energy": s.energy.value, "error_bound": s.energy.error,
                                   "direction": s.direction.map(|d| [d.x, d.y])})
                        })
                        .collect();
                    output::json(&json!({"kernel": kernel_json(g), "steps": steps}))
                }
            })
        }
        Command::PolyaSzego { shape, a0, steps } => {
            let (values, limit, first) = match shape {
                Shape::Triangle => (triangle_recursion(*a0, *steps)?, equilateral_side(), 1),
                Shape::Quad => (quadrilateral_recursion(*a0, *steps)?, 1.0, 3),
            };
            Ok(match g.out {
                Format::Json => output::json(&json!({
                    "shape": format!("{shape:?}").to_lowercase(), "a0": a0, "first_index": first,
                    "values": values, "last": values.last(), "limit": limit,
                })),
                Format::Csv => {
                    let rows: Vec<Vec<String>> =
                        values.iter().enumerate().map(|(k, v)| vec![(k + first).to_string(), float(*v)]).collect();
                    output::csv(&strings(&["n", "a_n"]), &rows)
                }
            })
        }
        Command::Optimize { n, area, seed, init, max_iters, grad_tol, trace_out, polygon_out } => {
            let k = kernel(g)?;
            let start = match init {
                Some(path) => Init::Polygon(read_polygon(path)?),
                None => Init::Random,
            };
            let opts = OptimizeOptions { max_iters: *max_iters, grad_tol: *grad_tol, seed: *seed, ..Default::default() };
            let r = maximize_energy(*n, *area, &k, start, &opts, &q)?;
            if let Some(path) = trace_out {
                write_file(path, &optimize_csv(&r))?;
            }
            if let Some(path) = polygon_out {
                write_file(path, &output::json(&polygon_json(&r.polygon)))?;
            }
            let text = match g.out {
                Format::Csv => optimize_csv(&r),
                Format::Json => {
                    let st = stationarity_at_optimum(&r, &k, &q)?;
                    let mut v = serde_json::to_value(&r).expect("result serializes");
                    v["kernel"] = kernel_json(g);
                    v["stationary"] = json!(st.verdict.stationary);
                    output::json(&v)
                }
            };
            if !r.converged {
                print!("{text}");
                return Err(Failure {
                    code: 5,
                    kind: "optimization",
                    msg: format!("no convergence within {} iterations (relative gradient {:e})", r.iterations, r.trace.last().map_or(f64::NAN, |t| t.grad_norm)),
                });
            }
            Ok(text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let msg = e.kind().to_string();
            eprintln!("error code=2 kind=usage msg={msg:?}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(text) => {
            let mut out = io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error code={} kind={} msg={:?}", f.code, f.kind, f.msg);
            ExitCode::from(f.code)
        }
    }
}
