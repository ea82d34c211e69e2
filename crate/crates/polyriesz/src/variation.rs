//! Perturbation flows of a polygon, constraint-restoring rescalings, and
//! first variations of the energy, area and perimeter along them.
//!
//! Indices are 0-based in the Rust API and 1-based in [`FlowSpec`] JSON.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::energy;
use crate::error::{Error, Result};
use crate::geom::{psi_extended, reduce_angle, Polygon, Vec2};
use crate::kernel::Kernel;
use crate::potential::{Anchor, BoundaryProfile, Estimate, Half, QuadratureSpec};
use crate::quad::{gauss_legendre, Adaptive};
use crate::stationarity::diagonal_from_profile;

/// Which geometric quantity a flow is rescaled to preserve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    #[default]
    None,
    Area,
    Perimeter,
}

/// A one-parameter family of polygons through `P` at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// Side `side` moves parallel to itself by `t` along its outward normal.
    Sliding { side: usize },
    /// Side `side` turns by the angle `t` about its midpoint.
    Tilting { side: usize },
    /// Vertex `vertex` moves by `t` parallel to the diagonal joining its neighbours.
    DiagonalVertex { vertex: usize },
    /// Quadrilateral shear along a diagonal: the two off-diagonal vertices move
    /// parallel to it with speeds `beta_plus·x₂` and `−beta_minus·x₂`.
    /// `diagonal` 0 joins vertices 0 and 2, `diagonal` 1 joins 1 and 3.
    QuadTwoSided { beta_plus: f64, beta_minus: f64, diagonal: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FlowSpecJson", into = "FlowSpecJson")]
pub struct FlowSpec {
    pub family: Family,
    pub constraint: Constraint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowSpecJson {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    side: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertex: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diagonal: Option<usize>,
    #[serde(default)]
    constraint: Constraint,
}

fn one_based(v: Option<usize>, name: &str) -> std::result::Result<usize, String> {
    match v {
        Some(k) if k >= 1 => Ok(k - 1),
        Some(_) => Err(format!("\"{name}\" is 1-based and must be at least 1")),
        None => Err(format!("missing \"{name}\"")),
    }
}

impl TryFrom<FlowSpecJson> for FlowSpec {
    type Error = String;
    fn try_from(j: FlowSpecJson) -> std::result::Result<Self, String> {
        let family = match j.family.as_str() {
            "sliding" => Family::Sliding { side: one_based(j.side, "side")? },
            "tilting" => Family::Tilting { side: one_based(j.side, "side")? },
            "diagonal_vertex" => Family::DiagonalVertex { vertex: one_based(j.vertex, "vertex")? },
            "quad_two_sided" => {
                let bp = j.beta_plus.ok_or("missing \"beta_plus\"")?;
                let bm = j.beta_minus.ok_or("missing \"beta_minus\"")?;
                if !(bp >= 0.0 && bm >= 0.0 && bp.is_finite() && bm.is_finite()) {
                    return Err("beta_plus and beta_minus must be finite and nonnegative".into());
                }
                let diagonal = one_based(Some(j.diagonal.unwrap_or(1)), "diagonal")?;
                Family::QuadTwoSided { beta_plus: bp, beta_minus: bm, diagonal }
            }
            other => return Err(format!("unknown flow family \"{other}\"")),
        };
        Ok(FlowSpec { family, constraint: j.constraint })
    }
}

impl From<FlowSpec> for FlowSpecJson {
    fn from(s: FlowSpec) -> Self {
        let mut j = FlowSpecJson {
            family: String::new(),
            side: None,
            vertex: None,
            beta_plus: None,
            beta_minus: None,
            diagonal: None,
            constraint: s.constraint,
        };
        match s.family {
            Family::Sliding { side } => {
                j.family = "sliding".into();
                j.side = Some(side + 1);
            }
            Family::Tilting { side } => {
                j.family = "tilting".into();
                j.side = Some(side + 1);
            }
            Family::DiagonalVertex { vertex } => {
                j.family = "diagonal_vertex".into();
                j.vertex = Some(vertex + 1);
            }
            Family::QuadTwoSided { beta_plus, beta_minus, diagonal } => {
                j.family = "quad_two_sided".into();
                j.beta_plus = Some(beta_plus);
                j.beta_minus = Some(beta_minus);
                j.diagonal = Some(diagonal + 1);
            }
        }
        j
    }
}

impl FlowSpec {
    pub fn new(family: Family, constraint: Constraint) -> Self {
        FlowSpec { family, constraint }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("flow spec: {e}")))
    }
}

/// Angles `(α⁻, α⁺)` that the diagonal `P_{i−1}P_{i+1}` makes with the sides at `P_{i−1}` and `P_{i+1}`.
pub fn diagonal_angles(poly: &Polygon, i: usize) -> Result<(f64, f64)> {
    check_index(i, poly.len(), "vertex")?;
    let ii = i as isize;
    let (prev, cur, next) = (poly.vertex(ii - 1), poly.vertex(ii), poly.vertex(ii + 1));
    let angle = |u: Vec2, v: Vec2| u.cross(v).abs().atan2(u.dot(v));
    Ok((angle(next - prev, cur - prev), angle(prev - next, cur - next)))
}

fn check_index(i: usize, n: usize, what: &str) -> Result<()> {
    if i >= n {
        return Err(Error::InvalidArgument(format!("{what} index {i} out of range for a polygon with {n} vertices")));
    }
    Ok(())
}

/// The diagonal-aligned frame of a quadrilateral: vertex `a` on the negative
/// `x₁` axis, `c` on the positive one, `b` in the upper half plane.
#[derive(Clone, Copy, Debug)]
pub(crate) struct QuadFrame {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    origin: Vec2,
    e1: Vec2,
    e2: Vec2,
}

impl QuadFrame {
    pub fn new(poly: &Polygon, diagonal: usize) -> Result<Self> {
        if poly.len() != 4 {
            return Err(Error::Unsupported(format!(
                "the two-sided flow needs a quadrilateral, got {} vertices",
                poly.len()
            )));
        }
        if diagonal > 1 {
            return Err(Error::InvalidArgument(format!("a quadrilateral has diagonals 0 and 1, got {diagonal}")));
        }
        let (a, b, c, d) = (diagonal, diagonal + 1, diagonal + 2, (diagonal + 3) % 4);
        let v = poly.vertices();
        let e1 = (v[c] - v[a]).normalized();
        let (sb, sd) = (e1.cross(v[b] - v[a]), e1.cross(v[d] - v[a]));
        if !(sb < 0.0 && sd > 0.0) {
            return Err(Error::Domain(format!("diagonal {} of this quadrilateral is not interior", diagonal + 1)));
        }
        Ok(QuadFrame { a, b, c, d, origin: (v[a] + v[c]) * 0.5, e1, e2: Vec2::new(e1.y, -e1.x) })
    }

    pub fn coords(&self, p: Vec2) -> (f64, f64) {
        ((p - self.origin).dot(self.e1), (p - self.origin).dot(self.e2))
    }
}

/// Which case of the two-sided argument a quadrilateral falls into, and the matching speeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadCaseChoice {
    pub beta_plus: f64,
    pub beta_minus: f64,
    /// 1 when the lower vertex lies on or right of the `x₂` axis, 2 otherwise.
    pub case: u8,
    /// Lower vertex exactly on the `x₂` axis; treated as case 1.
    pub on_axis: bool,
}

/// `β⁺ = −x₁(b)/x₂(b)`, and `β⁻ = x₁(d)/x₂(d)` if `d` lies left of the `x₂` axis, else 0.
///
/// Requires `α⁻ > α⁺` at the upper vertex, that is `x₁(b) < 0`.
pub fn quad_case_betas(poly: &Polygon, diagonal: usize) -> Result<QuadCaseChoice> {
    let f = QuadFrame::new(poly, diagonal)?;
    let v = poly.vertices();
    let (xb, yb) = f.coords(v[f.b]);
    let (xd, yd) = f.coords(v[f.d]);
    if !(xb < 0.0) {
        return Err(Error::Domain(format!(
            "vertex {} does not lean towards vertex {} (needs the angle at {} larger than at {})",
            f.b + 1,
            f.a + 1,
            f.a + 1,
            f.c + 1
        )));
    }
    let beta_plus = -xb / yb;
    let tol = 1e-12 * poly.scale();
    if xd < -tol {
        Ok(QuadCaseChoice { beta_plus, beta_minus: xd / yd, case: 2, on_axis: false })
    } else {
        Ok(QuadCaseChoice { beta_plus, beta_minus: 0.0, case: 1, on_axis: xd.abs() <= tol })
    }
}

/// Vertices of the flowed polygon, without any validity check.
fn raw_flow(poly: &Polygon, family: &Family, t: f64) -> Result<Vec<Vec2>> {
    let n = poly.len();
    let mut v = poly.vertices().to_vec();
    let unit = |a: Vec2, b: Vec2| (a - b).normalized();
    match *family {
        Family::Sliding { side } => {
            check_index(side, n, "side")?;
            let i = side as isize;
            let (th_i, th_j) = (poly.interior_angle(side), poly.interior_angle((side + 1) % n));
            let d_i = unit(poly.vertex(i), poly.vertex(i - 1)) * (t / th_i.sin());
            let d_j = unit(poly.vertex(i + 1), poly.vertex(i + 2)) * (t / th_j.sin());
            v[side] += d_i;
            v[(side + 1) % n] += d_j;
        }
        Family::Tilting { side } => {
            check_index(side, n, "side")?;
            let i = side as isize;
            let j = (side + 1) % n;
            let (th_i, th_j) = (poly.interior_angle(side), poly.interior_angle(j));
            let (rt_i, rt_j) = (reduce_angle(th_i), reduce_angle(th_j));
            if rt_i.sin() < 1e-6 || rt_j.sin() < 1e-6 {
                return Err(Error::Domain(format!("side {} has an endpoint angle too close to 0 or π to tilt", side + 1)));
            }
            let tau_i = if th_i < PI {
                unit(poly.vertex(i), poly.vertex(i - 1))
            } else {
                unit(poly.vertex(i - 1), poly.vertex(i))
            };
            let tau_j = if th_j < PI {
                unit(poly.vertex(i + 1), poly.vertex(i + 2))
            } else {
                unit(poly.vertex(i + 2), poly.vertex(i + 1))
            };
            let len = poly.side_length(side);
            v[side] += tau_i * (len * t.sin() / (2.0 * (rt_i - t).sin()));
            v[j] -= tau_j * (len * t.sin() / (2.0 * (rt_j + t).sin()));
        }
        Family::DiagonalVertex { vertex } => {
            check_index(vertex, n, "vertex")?;
            if poly.interior_angle(vertex) >= PI {
                return Err(Error::Unsupported(format!("vertex {} is concave", vertex + 1)));
            }
            let i = vertex as isize;
            v[vertex] += unit(poly.vertex(i + 1), poly.vertex(i - 1)) * t;
        }
        Family::QuadTwoSided { beta_plus, beta_minus, diagonal } => {
            if !(beta_plus >= 0.0 && beta_minus >= 0.0) {
                return Err(Error::InvalidArgument("beta_plus and beta_minus must be nonnegative".into()));
            }
            let f = QuadFrame::new(poly, diagonal)?;
            let (_, yb) = f.coords(v[f.b]);
            let (_, yd) = f.coords(v[f.d]);
            v[f.b] += f.e1 * (beta_plus * yb * t);
            v[f.d] += f.e1 * (-beta_minus * yd * t);
        }
    }
    Ok(v)
}

fn flow_degeneracy(poly: &Polygon, family: &Family, t: f64) -> Option<String> {
    if let Family::Tilting { side } = *family {
        let rt_i = reduce_angle(poly.interior_angle(side));
        let rt_j = reduce_angle(poly.interior_angle((side + 1) % poly.len()));
        if !(t < rt_i && t > rt_i - PI) || !(t > -rt_j && t < PI - rt_j) {
            return Some(format!("a moved vertex of side {} runs off to infinity", side + 1));
        }
    }
    match raw_flow(poly, family, t) {
        Err(e) => Some(e.to_string()),
        Ok(v) => Polygon::new(v).err().map(|e| e.to_string()),
    }
}

/// Largest `|t|` accepted by [`apply_flow`], and the degeneracy that limits it.
///
/// Each direction is scanned for the first invalid polygon and refined by
/// bisection; the admissible range is half the smaller critical value.
pub fn admissible_range(poly: &Polygon, family: &Family) -> Result<(f64, String)> {
    raw_flow(poly, family, 0.0)?;
    let cap = match family {
        Family::Tilting { .. } => PI,
        _ => 10.0 * poly.scale(),
    };
    let mut best = (cap, "none within the scanned range".to_string());
    for sign in [1.0, -1.0] {
        let mut lo = 0.0;
        let mut t = cap * 2f64.powi(-40);
        let mut hit = None;
        while t <= cap {
            if let Some(reason) = flow_degeneracy(poly, family, sign * t) {
                hit = Some((t, reason));
                break;
            }
            lo = t;
            t *= 2.0;
        }
        let Some((mut hi, mut reason)) = hit else { continue };
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            match flow_degeneracy(poly, family, sign * mid) {
                Some(r) => {
                    hi = mid;
                    reason = r;
                }
                None => lo = mid,
            }
        }
        if hi < best.0 {
            best = (hi, format!("{reason} at t ≈ {:.6e}", sign * hi));
        }
    }
    Ok((0.5 * best.0, best.1))
}

/// The flowed polygon `P_t`, before any rescaling.
pub fn apply_flow(poly: &Polygon, spec: &FlowSpec, t: f64) -> Result<Polygon> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument("flow parameter is not finite".into()));
    }
    if t == 0.0 {
        raw_flow(poly, &spec.family, 0.0)?;
        return Ok(poly.clone());
    }
    let (bound, reason) = admissible_range(poly, &spec.family)?;
    if t.abs() > bound {
        return Err(Error::Range(format!(
            "t = {t:e} exceeds the admissible range ±{bound:e} (first degeneracy: {reason})"
        )));
    }
    Polygon::new(raw_flow(poly, &spec.family, t)?)
}

/// `P_t` scaled about the origin to the area or perimeter of `reference`.
pub fn rescale_constraint(reference: &Polygon, flowed: &Polygon, constraint: Constraint) -> Polygon {
    let factor = match constraint {
        Constraint::None => return flowed.clone(),
        Constraint::Area => (reference.area() / flowed.area()).sqrt(),
        Constraint::Perimeter => reference.perimeter() / flowed.perimeter(),
    };
    flowed.scaled_about(Vec2::ZERO, factor)
}

/// `P_t` followed by the rescaling of `spec.constraint`.
pub fn constrained_flow(poly: &Polygon, spec: &FlowSpec, t: f64) -> Result<Polygon> {
    Ok(rescale_constraint(poly, &apply_flow(poly, spec, t)?, spec.constraint))
}

/// A finite-difference derivative with separate truncation and quadrature bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdEstimate {
    pub value: f64,
    pub truncation: f64,
    pub quadrature: f64,
}

impl FdEstimate {
    pub fn bound(&self) -> f64 {
        self.truncation + self.quadrature
    }
}

fn central_difference(poly: &Polygon, k: &Kernel, spec: &FlowSpec, h: f64, q: &QuadratureSpec) -> Result<(f64, f64)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let plus = constrained_flow(poly, spec, h)?;
    let minus = constrained_flow(poly, spec, -h)?;
    let (ep, em) = rayon::join(|| energy(&plus, k, q), || energy(&minus, k, q));
    let (ep, em) = (ep?, em?);
    Ok(((ep.value - em.value) / (2.0 * h), (ep.error + em.error) / (2.0 * h)))
}

/// `[E(C_h) − E(C_{−h})] / 2h`, with `C_t` the constraint-rescaled flow.
///
/// The truncation bound compares against the step `h/2`.
pub fn fd_first_variation(poly: &Polygon, k: &Kernel, spec: &FlowSpec, h: f64, q: &QuadratureSpec) -> Result<FdEstimate> {
    let (d1, q1) = central_difference(poly, k, spec, h, q)?;
    let (d2, q2) = central_difference(poly, k, spec, 0.5 * h, q)?;
    Ok(FdEstimate { value: d1, truncation: (4.0 / 3.0) * (d1 - d2).abs(), quadrature: q1 + (q1 + q2) / 3.0 })
}

/// Richardson extrapolation `(4 D(h/2) − D(h)) / 3` of two central differences.
///
/// The truncation bound is the distance to `D(h/2)`, which overestimates the
/// fourth-order remainder.
pub fn richardson_first_variation(
    poly: &Polygon,
    k: &Kernel,
    spec: &FlowSpec,
    h: f64,
    q: &QuadratureSpec,
) -> Result<FdEstimate> {
    let (d1, q1) = central_difference(poly, k, spec, h, q)?;
    let (d2, q2) = central_difference(poly, k, spec, 0.5 * h, q)?;
    let r = (4.0 * d2 - d1) / 3.0;
    Ok(FdEstimate { value: r, truncation: (r - d2).abs(), quadrature: (4.0 * q2 + q1) / 3.0 })
}

/// `(d|P_t|/dt, dPer(P_t)/dt)` at `t = 0` for the raw flow.
pub fn analytic_geometry_derivatives(poly: &Polygon, family: &Family) -> Result<(f64, f64)> {
    let n = poly.len();
    raw_flow(poly, family, 0.0)?;
    Ok(match *family {
        Family::Sliding { side } => {
            let (a, b) = (poly.interior_angle(side), poly.interior_angle((side + 1) % n));
            (poly.side_length(side), psi_extended(a) + psi_extended(b))
        }
        Family::Tilting { side } => {
            // actual angles: at a concave end both sign flips of the reduced form cancel
            let (a, b) = (poly.interior_angle(side), poly.interior_angle((side + 1) % n));
            (0.0, 0.5 * poly.side_length(side) * (psi_extended(a) - psi_extended(b)))
        }
        Family::DiagonalVertex { vertex } => {
            let (am, ap) = diagonal_angles(poly, vertex)?;
            (0.0, am.cos() - ap.cos())
        }
        Family::QuadTwoSided { beta_plus, beta_minus, diagonal } => {
            let f = QuadFrame::new(poly, diagonal)?;
            let (_, yb) = f.coords(poly.vertices()[f.b]);
            let (_, yd) = f.coords(poly.vertices()[f.d]);
            let (bm, bp) = diagonal_angles(poly, f.b)?;
            let (dm, dp) = diagonal_angles(poly, f.d)?;
            (0.0, beta_plus * yb * (bm.cos() - bp.cos()) - beta_minus * yd.abs() * (dm.cos() - dp.cos()))
        }
    })
}

/// Central differences of area and perimeter along the raw flow.
pub fn fd_geometry_derivatives(poly: &Polygon, spec: &FlowSpec, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let plus = apply_flow(poly, spec, h)?;
    let minus = apply_flow(poly, spec, -h)?;
    Ok(((plus.area() - minus.area()) / (2.0 * h), (plus.perimeter() - minus.perimeter()) / (2.0 * h)))
}

/// `dE/dt` at `t = 0` along the raw flow, from a boundary profile of `poly`.
pub(crate) fn raw_energy_derivative(poly: &Polygon, prof: &BoundaryProfile, family: &Family) -> Result<Estimate> {
    Ok(match *family {
        Family::Sliding { side } => {
            check_index(side, poly.len(), "side")?;
            prof.side_integral(side) * 2.0
        }
        Family::Tilting { side } => {
            check_index(side, poly.len(), "side")?;
            (prof.half_moment(side, Half::First) - prof.half_moment(side, Half::Second)) * 2.0
        }
        Family::DiagonalVertex { vertex } => diagonal_from_profile(poly, prof, vertex)?,
        Family::QuadTwoSided { beta_plus, beta_minus, diagonal } => {
            let f = QuadFrame::new(poly, diagonal)?;
            let (_, yb) = f.coords(poly.vertices()[f.b]);
            let (_, yd) = f.coords(poly.vertices()[f.d]);
            let ib = diagonal_from_profile(poly, prof, f.b)?;
            let id = diagonal_from_profile(poly, prof, f.d)?;
            ib * (beta_plus * yb) - id * (beta_minus * yd.abs())
        }
    })
}

/// `dE(C_t)/dt` at `t = 0`, where `C_t` is the constraint-rescaled flow.
///
/// The rescaling contributes `−(σ/|P|) d|P_t|/dt` for area and
/// `−(2σ/Per) dPer/dt` for perimeter, with `σ = ∫_{∂P} v (x·ν)`.
pub fn analytic_first_variation(poly: &Polygon, k: &Kernel, spec: &FlowSpec, q: &QuadratureSpec) -> Result<Estimate> {
    let (da, dp) = analytic_geometry_derivatives(poly, &spec.family)?;
    let prof = BoundaryProfile::compute(poly, k, q, false)?;
    let raw = raw_energy_derivative(poly, &prof, &spec.family)?;
    let sigma = prof.sigma();
    Ok(match spec.constraint {
        Constraint::None => raw,
        Constraint::Area => raw - sigma * (da / poly.area()),
        Constraint::Perimeter => raw - sigma * (2.0 * dp / poly.perimeter()),
    })
}

/// `∂E/∂P_i` as a plane vector for every vertex, with error bounds on each component.
pub(crate) fn gradient_from_profile(prof: &BoundaryProfile) -> (Vec<Vec2>, Vec<f64>) {
    let sides = prof.side_data();
    let n = sides.len();
    (0..n)
        .map(|i| {
            let prev = (i + n - 1) % n;
            let a = prof.vertex_moment(prev, Anchor::Start) * (2.0 / sides[prev].length);
            let b = prof.vertex_moment(i, Anchor::End) * (2.0 / sides[i].length);
            (sides[prev].normal * a.value + sides[i].normal * b.value, a.error + b.error)
        })
        .unzip()
}

/// `∂E/∂P_i` for every vertex.
pub fn vertex_gradient(poly: &Polygon, k: &Kernel, q: &QuadratureSpec) -> Result<Vec<Vec2>> {
    Ok(vertex_gradient_with_bounds(poly, k, q)?.0)
}

/// [`vertex_gradient`] together with an error bound per vertex.
pub fn vertex_gradient_with_bounds(poly: &Polygon, k: &Kernel, q: &QuadratureSpec) -> Result<(Vec<Vec2>, Vec<f64>)> {
    let prof = BoundaryProfile::compute(poly, k, q, false)?;
    Ok(gradient_from_profile(&prof))
}

/// Both sides of the slice-interaction inequality for two horizontal slices
/// of the triangle cut off by the diagonal at `apex`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SliceBound {
    /// Derivative of the interaction of the two slices under the shear.
    pub lhs: f64,
    /// `C_W α min(r_x, r_y) |c_x − c_y| |x₂ − y₂|`.
    pub rhs: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub radius_x: f64,
    pub radius_y: f64,
    /// `min |W′|` on `[|c_x − c_y|/2, |c_x − c_y| + r_x + r_y]`.
    pub c_w: f64,
    /// Shear rate `1/height`.
    pub rate: f64,
}

/// Evaluates the slice-interaction derivative and its lower bound.
///
/// The frame puts the diagonal `P_{apex−1}P_{apex+1}` on the `x₁` axis with
/// its midpoint at the origin and the apex above it, reflected so that the
/// apex leans towards negative `x₁`. Slices at heights `x₂, y₂ ∈ (0, height)`
/// are sheared with speed `x₂/height`, and `W(r) = K(√(l² + r²))` with
/// `l = |x₂ − y₂|`.
pub fn slice_derivative_bound_check(poly: &Polygon, k: &Kernel, apex: usize, x2: f64, y2: f64) -> Result<SliceBound> {
    let n = poly.len();
    check_index(apex, n, "vertex")?;
    if !(n == 3 || (n == 4 && poly.is_convex())) {
        return Err(Error::Unsupported("slice bounds need a triangle or a convex quadrilateral".into()));
    }
    let i = apex as isize;
    let (a, b, c) = (poly.vertex(i - 1), poly.vertex(i), poly.vertex(i + 1));
    let origin = (a + c) * 0.5;
    let e1 = (c - a).normalized();
    let height = (b - origin).dot(Vec2::new(e1.y, -e1.x));
    // reflected so that the apex leans towards negative x₁
    let lean = -(b - origin).dot(e1).abs();
    let half_base = 0.5 * (c - a).norm();
    for s in [x2, y2] {
        if !(s > 0.0 && s < height) {
            return Err(Error::Domain(format!("slice height {s} is outside (0, {height})")));
        }
    }
    let slice = |s: f64| (lean * s / height, half_base * (1.0 - s / height));
    let (cx, rx) = slice(x2);
    let (cy, ry) = slice(y2);
    let rate = 1.0 / height;
    let l = (x2 - y2).abs();
    let gap = (cx - cy).abs();
    let mut out = SliceBound {
        lhs: 0.0,
        rhs: 0.0,
        center_x: cx,
        center_y: cy,
        radius_x: rx,
        radius_y: ry,
        c_w: 0.0,
        rate,
    };
    if l == 0.0 {
        return Ok(out);
    }
    let w = |r: f64| k.k((l * l + r * r).sqrt());
    let dw = |r: f64| {
        let rho = (l * l + r * r).sqrt();
        k.dk(rho) * r / rho
    };
    // ∬_R W′(x₁ − y₁) = ∫ [W(a₁ − y₁) − W(a₀ − y₁)] dy₁ over |y₁| ≤ r_y
    let (a0, a1) = (-rx + (cx - cy), rx + (cx - cy));
    let ad = Adaptive { rule: gauss_legendre(16), rel_tol: 1e-13, max_depth: 30 };
    let est = ad.integrate(|y: f64| ([w(a1 - y) - w(a0 - y)], [0.0]), -ry, ry);
    if !est.converged {
        return Err(Error::Accuracy {
            context: "slice interaction integral".into(),
            estimate: est.value[0],
            bound: est.error[0],
        });
    }
    out.lhs = rate * (x2 - y2) * est.value[0];
    let (lo, hi) = (0.5 * gap, gap + rx + ry);
    out.c_w = (0..=256).map(|j| dw(lo + (hi - lo) * j as f64 / 256.0).abs()).fold(f64::INFINITY, f64::min);
    out.rhs = out.c_w * rate * rx.min(ry) * gap * l;
    Ok(out)
}
