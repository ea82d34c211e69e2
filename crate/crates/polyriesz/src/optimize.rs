//! Area-constrained maximization of the energy over polygons with a fixed
//! number of vertices.
//!
//! Each iteration moves the vertices along the energy gradient with the area
//! gradient projected out, then restores the area by a homothety about the
//! centroid. Step lengths follow Barzilai–Borwein with Armijo backtracking;
//! trial polygons that are not simple are rejected by halving the step. When
//! the gain stalls before the gradient is small, a Nelder–Mead search on the
//! vertex coordinates takes over for a while.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{regular_ngon, Polygon, Vec2};
use crate::kernel::Kernel;
use crate::potential::{BoundaryProfile, Estimate, QuadratureSpec};
use crate::stationarity::{check_stationarity, StationarityReport};
use crate::variation::{gradient_from_profile, Constraint};

/// Starting polygon of a run.
#[derive(Clone, Debug)]
pub enum Init {
    /// Seeded random star-shaped polygon.
    Random,
    Polygon(Polygon),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizeOptions {
    pub max_iters: usize,
    /// Stop once `|projected gradient| · √area / E` falls below this.
    pub grad_tol: f64,
    pub seed: u64,
    /// First displacement length; `0.1·√area/N` when absent.
    pub initial_step: Option<f64>,
    /// Iterations with relative gain below `stall_gain` before the simplex fallback.
    pub stall_iters: usize,
    pub stall_gain: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            max_iters: 400,
            grad_tol: 1e-7,
            seed: 1,
            initial_step: None,
            stall_iters: 5,
            stall_gain: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMethod {
    Start,
    Gradient,
    NelderMead,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub error_bound: f64,
    /// Relative projected-gradient norm `|g| · √area / E`.
    pub grad_norm: f64,
    /// `max |ℓ_i/ℓ_reg − 1|` against the regular N-gon of the same area.
    pub max_side_dev: f64,
    /// `max |θ_i − (N−2)π/N|`.
    pub max_angle_dev: f64,
    pub step: f64,
    pub method: StepMethod,
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizeResult {
    pub polygon: Polygon,
    pub energy: Estimate,
    pub iterations: usize,
    pub converged: bool,
    pub convex: bool,
    pub trace: Vec<TraceRow>,
}

struct Point {
    poly: Polygon,
    energy: Estimate,
    /// Projected gradient, flattened `[x0, y0, x1, y1, …]`.
    grad: Vec<f64>,
    grad_rel: f64,
}

fn flatten(v: &[Vec2]) -> Vec<f64> {
    v.iter().flat_map(|p| [p.x, p.y]).collect()
}

fn unflatten(x: &[f64]) -> Vec<Vec2> {
    x.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `∂|P|/∂P_i = ½ (P_{i−1} − P_{i+1})^⊥`.
fn area_gradient(p: &Polygon) -> Vec<f64> {
    let n = p.len() as isize;
    let g: Vec<Vec2> = (0..n).map(|i| (p.vertex(i - 1) - p.vertex(i + 1)).perp() * 0.5).collect();
    flatten(&g)
}

fn with_area(vertices: Vec<Vec2>, area: f64) -> Result<Polygon> {
    let p = Polygon::new(vertices)?;
    Ok(p.scaled_about(p.centroid(), (area / p.area()).sqrt()))
}

fn evaluate(poly: Polygon, k: &Kernel, q: &QuadratureSpec) -> Result<Point> {
    let prof = BoundaryProfile::compute(&poly, k, q, true)?;
    let energy = prof.energy().expect("computed with energy");
    let mut grad = flatten(&gradient_from_profile(&prof).0);
    let a = area_gradient(&poly);
    let c = dot(&grad, &a) / dot(&a, &a);
    for (g, ai) in grad.iter_mut().zip(&a) {
        *g -= c * ai;
    }
    let grad_rel = dot(&grad, &grad).sqrt() * poly.area().sqrt() / energy.value.abs();
    Ok(Point { poly, energy, grad, grad_rel })
}

/// Deviations of side lengths and angles from the regular N-gon of the same area.
pub fn regularity_deviation(p: &Polygon) -> (f64, f64) {
    let n = p.len();
    let reg = regular_ngon(n, p.area()).map(|r| r.side_length(0)).unwrap_or(f64::NAN);
    let side = (0..n).map(|i| (p.side_length(i) / reg - 1.0).abs()).fold(0.0, f64::max);
    let target = (n as f64 - 2.0) * PI / n as f64;
    let angle = p.interior_angles().iter().map(|t| (t - target).abs()).fold(0.0, f64::max);
    (side, angle)
}

/// Seeded random star-shaped polygon of the given area.
pub fn random_polygon(n: usize, area: f64, seed: u64) -> Result<Polygon> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("a polygon needs at least 3 vertices, got {n}")));
    }
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::InvalidArgument(format!("area must be positive, got {area}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slot = 2.0 * PI / n as f64;
    loop {
        let v: Vec<Vec2> = (0..n)
            .map(|k| {
                let t = slot * (k as f64 + rng.gen_range(-0.3..0.3));
                let r = rng.gen_range(0.6..1.4);
                Vec2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        if let Ok(p) = with_area(v, area) {
            return Ok(p);
        }
    }
}

fn row(iter: usize, p: &Point, step: f64, method: StepMethod) -> TraceRow {
    let (side, angle) = regularity_deviation(&p.poly);
    TraceRow {
        iter,
        energy: p.energy.value,
        error_bound: p.energy.error,
        grad_norm: p.grad_rel,
        max_side_dev: side,
        max_angle_dev: angle,
        step,
        method,
    }
}

/// Nelder–Mead on raw vertex coordinates; the objective rescales to `area`.
fn nelder_mead(start: &Point, area: f64, k: &Kernel, q: &QuadratureSpec, max_evals: usize) -> Result<Option<Point>> {
    let x0 = flatten(start.poly.vertices());
    let dim = x0.len();
    let h = 0.05 * area.sqrt() / start.poly.len() as f64;
    let f = |x: &[f64]| -> f64 {
        match with_area(unflatten(x), area).and_then(|p| crate::energy::energy(&p, k, q)) {
            Ok(e) => -e.value,
            Err(_) => f64::INFINITY,
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.clone(), -start.energy.value)];
    for j in 0..dim {
        let mut x = x0.clone();
        x[j] += h;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = dim;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[dim].1);
        if (worst - best).abs() <= 1e-14 * best.abs() {
            break;
        }
        let centroid: Vec<f64> =
            (0..dim).map(|c| simplex[..dim].iter().map(|s| s.0[c]).sum::<f64>() / dim as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[dim].0).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let xc = along(if fr < worst { 0.5 } else { -0.5 });
            let fc = f(&xc);
            evals += 1;
            if fc < fr.min(worst) {
                simplex[dim] = (xc, fc);
            } else {
                let b = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = b.iter().zip(&s.0).map(|(bi, si)| bi + 0.5 * (si - bi)).collect();
                    s.1 = f(&s.0);
                }
                evals += dim;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    if !(simplex[0].1 < -start.energy.value) {
        return Ok(None);
    }
    let poly = with_area(unflatten(&simplex[0].0), area)?;
    Ok(Some(evaluate(poly, k, q)?))
}

/// Maximizes `E` over `n`-gons of the given area.
pub fn maximize_energy(
    n: usize,
    area: f64,
    k: &Kernel,
    init: Init,
    opts: &OptimizeOptions,
    q: &QuadratureSpec,
) -> Result<OptimizeResult> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("a polygon needs at least 3 vertices, got {n}")));
    }
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::InvalidArgument(format!("area must be positive, got {area}")));
    }
    let start = match init {
        Init::Random => random_polygon(n, area, opts.seed)?,
        Init::Polygon(p) => {
            if p.len() != n {
                return Err(Error::InvalidArgument(format!("initial polygon has {} vertices, expected {n}", p.len())));
            }
            with_area(p.vertices().to_vec(), area)?
        }
    };
    let mut cur = evaluate(start, k, q)?;
    let mut trace = vec![row(0, &cur, 0.0, StepMethod::Start)];
    let mut step = opts.initial_step.unwrap_or(0.1 * area.sqrt() / n as f64) / dot(&cur.grad, &cur.grad).sqrt().max(f64::MIN_POSITIVE);
    let mut stalled = 0;
    let mut converged = cur.grad_rel <= opts.grad_tol;
    let mut iter = 0;
    while !converged && iter < opts.max_iters {
        iter += 1;
        let x = flatten(cur.poly.vertices());
        let g2 = dot(&cur.grad, &cur.grad);
        let mut s = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&cur.grad).map(|(xi, gi)| xi + s * gi).collect();
            if let Ok(p) = with_area(unflatten(&trial), area) {
                let pt = evaluate(p, k, q)?;
                if pt.energy.value >= cur.energy.value + 1e-4 * s * g2 {
                    accepted = Some(pt);
                    break;
                }
            }
            s *= 0.5;
        }
        let Some(next) = accepted else {
            // no ascent along the gradient at any resolvable step
            if let Some(nm) = nelder_mead(&cur, area, k, q, 60 * 2 * n)? {
                cur = nm;
                trace.push(row(iter, &cur, 0.0, StepMethod::NelderMead));
                converged = cur.grad_rel <= opts.grad_tol;
                step = opts.initial_step.unwrap_or(0.1 * area.sqrt() / n as f64) / dot(&cur.grad, &cur.grad).sqrt().max(f64::MIN_POSITIVE);
                continue;
            }
            break;
        };
        let gain = (next.energy.value - cur.energy.value) / cur.energy.value.abs();
        // Barzilai–Borwein length from the change of position and projected gradient
        let dx: Vec<f64> = flatten(next.poly.vertices()).iter().zip(&x).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = next.grad.iter().zip(&cur.grad).map(|(a, b)| a - b).collect();
        let curv = dot(&dx, &dg).abs();
        step = if curv > 0.0 { (dot(&dx, &dx) / curv).clamp(1e-3 * s, 1e3 * s) } else { 2.0 * s };
        cur = next;
        trace.push(row(iter, &cur, s, StepMethod::Gradient));
        converged = cur.grad_rel <= opts.grad_tol;
        stalled = if gain < opts.stall_gain { stalled + 1 } else { 0 };
        if stalled >= opts.stall_iters && !converged {
            stalled = 0;
            if let Some(nm) = nelder_mead(&cur, area, k, q, 60 * 2 * n)? {
                cur = nm;
                trace.push(row(iter, &cur, 0.0, StepMethod::NelderMead));
                converged = cur.grad_rel <= opts.grad_tol;
            }
        }
    }
    if !cur.energy.value.is_finite() {
        return Err(Error::Optimization("energy became non-finite".into()));
    }
    let convex = cur.poly.is_convex();
    Ok(OptimizeResult { polygon: cur.poly, energy: cur.energy, iterations: iter, converged, convex, trace })
}

/// Tolerance used by [`stationarity_at_optimum`]: `1e−6 · max(E, 1)`.
pub fn optimum_tolerance(result: &OptimizeResult) -> f64 {
    1e-6 * result.energy.value.abs().max(1.0)
}

/// Area-constrained stationarity report of the terminal polygon.
pub fn stationarity_at_optimum(result: &OptimizeResult, k: &Kernel, q: &QuadratureSpec) -> Result<StationarityReport> {
    check_stationarity(&result.polygon, k, Constraint::Area, optimum_tolerance(result), q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy;

    #[test]
    fn random_polygons_are_reproducible() {
        let a = random_polygon(6, 2.0, 7).unwrap();
        assert_eq!(a, random_polygon(6, 2.0, 7).unwrap());
        assert_ne!(a, random_polygon(6, 2.0, 8).unwrap());
        assert!((a.area() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn area_gradient_matches_finite_differences() {
        let p = random_polygon(5, 1.0, 3).unwrap();
        let g = area_gradient(&p);
        let x = flatten(p.vertices());
        for j in 0..x.len() {
            let mut xp = x.clone();
            xp[j] += 1e-6;
            let mut xm = x.clone();
            xm[j] -= 1e-6;
            let fd = (crate::geom::signed_area(&unflatten(&xp)) - crate::geom::signed_area(&unflatten(&xm))) / 2e-6;
            assert!((fd - g[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn triangle_run_reaches_the_equilateral() {
        let k = Kernel::riesz(1.0).unwrap();
        let q = QuadratureSpec::default();
        let r = maximize_energy(3, 1.0, &k, Init::Random, &OptimizeOptions::default(), &q).unwrap();
        assert!(r.converged, "{:?}", r.trace.last());
        let (side, _) = regularity_deviation(&r.polygon);
        assert!(side < 1e-3);
        let reg = energy(&regular_ngon(3, 1.0).unwrap(), &k, &q).unwrap();
        assert!((r.energy.value - reg.value).abs() < 1e-6 * reg.value);
        for w in r.trace.windows(2) {
            assert!(w[1].energy >= w[0].energy - w[0].error_bound - w[1].error_bound);
        }
        assert!(stationarity_at_optimum(&r, &k, &q).unwrap().verdict.stationary);
    }

    #[test]
    fn early_stop_is_not_stationary() {
        let k = Kernel::riesz(1.0).unwrap();
        let q = QuadratureSpec::default();
        let opts = OptimizeOptions { max_iters: 1, seed: 4, ..Default::default() };
        let r = maximize_energy(4, 1.0, &k, Init::Random, &opts, &q).unwrap();
        assert!(!r.converged);
        assert!(!stationarity_at_optimum(&r, &k, &q).unwrap().verdict.stationary);
    }

    #[test]
    fn simplex_fallback_increases_energy_and_keeps_area() {
        let k = Kernel::riesz(1.0).unwrap();
        let q = QuadratureSpec::with_tolerance(1e-7);
        let start = evaluate(random_polygon(3, 1.0, 9).unwrap(), &k, &q).unwrap();
        let better = nelder_mead(&start, 1.0, &k, &q, 120).unwrap().expect("an improvement");
        assert!(better.energy.value > start.energy.value);
        assert!((better.poly.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_arguments() {
        let k = Kernel::riesz(1.0).unwrap();
        let q = QuadratureSpec::default();
        let o = OptimizeOptions::default();
        assert!(maximize_energy(2, 1.0, &k, Init::Random, &o, &q).is_err());
        assert!(maximize_energy(3, -1.0, &k, Init::Random, &o, &q).is_err());
        let sq = regular_ngon(4, 1.0).unwrap();
        assert!(maximize_energy(3, 1.0, &k, Init::Polygon(sq), &o, &q).is_err());
    }
}
