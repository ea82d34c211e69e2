//! The multiplier `σ`, residuals of the sliding and tilting stationarity
//! conditions under area and perimeter constraints, and the diagonal-vertex
//! first variations `I_i`.
//!
//! A residual counts as zero when `|r| ≤ max(tolerance, 3·bound)`, with
//! `bound` the accumulated quadrature error of that residual.

use std::f64::consts::PI;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geom::{psi_extended, Polygon};
use crate::kernel::Kernel;
use crate::potential::{Anchor, BoundaryProfile, Estimate, Half, QuadratureSpec};
use crate::variation::{diagonal_angles, Constraint};

/// `σ = ∫_{∂P} v_P (x·ν) dH¹`.
pub fn lagrange_sigma(poly: &Polygon, k: &Kernel, q: &QuadratureSpec) -> Result<Estimate> {
    Ok(BoundaryProfile::compute(poly, k, q, false)?.sigma())
}

fn require_constraint(c: Constraint) -> Result<()> {
    if c == Constraint::None {
        return Err(Error::InvalidArgument("stationarity needs an area or perimeter constraint".into()));
    }
    Ok(())
}

fn check_side(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::InvalidArgument(format!("side index {i} out of range for {n} sides")));
    }
    Ok(())
}

fn sliding_from_profile(poly: &Polygon, prof: &BoundaryProfile, i: usize, c: Constraint) -> Estimate {
    let sd = &prof.side_data()[i];
    let sigma = prof.sigma();
    match c {
        Constraint::Perimeter => {
            let w = psi_extended(sd.angle_start) + psi_extended(sd.angle_end);
            prof.side_integral(i) - sigma * (w / poly.perimeter())
        }
        _ => prof.side_mean(i) - sigma.div(2.0 * poly.area()),
    }
}

fn tilting_from_profile(poly: &Polygon, prof: &BoundaryProfile, i: usize, c: Constraint) -> Estimate {
    let sd = &prof.side_data()[i];
    let diff = prof.half_moment(i, Half::First) - prof.half_moment(i, Half::Second);
    match c {
        Constraint::Perimeter => {
            let w = psi_extended(sd.angle_start) - psi_extended(sd.angle_end);
            diff - prof.sigma() * (sd.length * w / (2.0 * poly.perimeter()))
        }
        _ => diff,
    }
}

/// `I_i` from a precomputed profile.
pub(crate) fn diagonal_from_profile(poly: &Polygon, prof: &BoundaryProfile, i: usize) -> Result<Estimate> {
    let n = poly.len();
    if i >= n {
        return Err(Error::InvalidArgument(format!("vertex index {i} out of range for {n} vertices")));
    }
    if poly.interior_angle(i) >= PI {
        return Err(Error::Unsupported(format!("vertex {} is concave; the diagonal variation needs a convex vertex", i + 1)));
    }
    let (am, ap) = diagonal_angles(poly, i)?;
    let prev = (i + n - 1) % n;
    let out = prof.vertex_moment(i, Anchor::End) * (2.0 * ap.sin() / poly.side_length(i));
    let inn = prof.vertex_moment(prev, Anchor::Start) * (2.0 * am.sin() / poly.side_length(prev));
    Ok(out - inn)
}

/// Area: `(1/ℓ_i)∫_i v − σ/(2|P|)`. Perimeter: `∫_i v − (σ/Per)(ψ(θ_i) + ψ(θ_{i+1}))`.
pub fn sliding_residual(poly: &Polygon, k: &Kernel, i: usize, c: Constraint, q: &QuadratureSpec) -> Result<Estimate> {
    require_constraint(c)?;
    check_side(i, poly.len())?;
    let prof = BoundaryProfile::compute(poly, k, q, false)?;
    Ok(sliding_from_profile(poly, &prof, i, c))
}

/// Area: first-half moment minus second-half moment about the midpoint.
/// Perimeter: that difference minus `(σℓ_i/(2 Per))(ψ(θ_i) − ψ(θ_{i+1}))`, with
/// `ψ(θ) = cot(θ/2)` also at concave vertices.
pub fn tilting_residual(poly: &Polygon, k: &Kernel, i: usize, c: Constraint, q: &QuadratureSpec) -> Result<Estimate> {
    require_constraint(c)?;
    check_side(i, poly.len())?;
    let prof = BoundaryProfile::compute(poly, k, q, false)?;
    Ok(tilting_from_profile(poly, &prof, i, c))
}

/// First variation of `E` when the convex vertex `i` moves with unit speed
/// parallel to the diagonal from `P_{i−1}` to `P_{i+1}`.
#[doc(alias = "diagonal_I")]
pub fn diagonal_variation(poly: &Polygon, k: &Kernel, i: usize, q: &QuadratureSpec) -> Result<Estimate> {
    if i < poly.len() && poly.interior_angle(i) >= PI {
        return Err(Error::Unsupported(format!("vertex {} is concave; the diagonal variation needs a convex vertex", i + 1)));
    }
    let prof = BoundaryProfile::compute(poly, k, q, false)?;
    diagonal_from_profile(poly, &prof, i)
}

fn one_based<S: Serializer>(i: &usize, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(*i as u64 + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SideResiduals {
    /// 0-based here, 1-based in JSON.
    #[serde(rename = "i", serialize_with = "one_based")]
    pub index: usize,
    pub length: f64,
    /// `(1/ℓ_i) ∫_i v`
    pub side_mean: f64,
    pub sliding_area: f64,
    pub sliding_area_err: f64,
    pub sliding_perimeter: f64,
    pub sliding_perimeter_err: f64,
    pub tilting_area: f64,
    pub tilting_area_err: f64,
    pub tilting_perimeter: f64,
    pub tilting_perimeter_err: f64,
    /// Largest of the four error bounds.
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexResiduals {
    #[serde(rename = "i", serialize_with = "one_based")]
    pub index: usize,
    pub angle: f64,
    /// `I_i`; absent at concave vertices.
    pub diagonal_i: Option<f64>,
    /// `I_i − 2(σ/Per)(cos α⁻ − cos α⁺)`; absent at concave vertices.
    pub diagonal_perimeter: Option<f64>,
    pub err: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub constraint: Constraint,
    pub tolerance: f64,
    pub sliding: bool,
    pub tilting: bool,
    pub diagonal: bool,
    pub stationary: bool,
    /// Largest pairwise difference of the side means of `v`.
    pub max_sliding_difference: f64,
    pub rule: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationarityReport {
    pub sigma: f64,
    pub sigma_err: f64,
    pub area: f64,
    pub perimeter: f64,
    pub sides: Vec<SideResiduals>,
    pub vertices: Vec<VertexResiduals>,
    pub verdict: Verdict,
}

impl StationarityReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn passes(r: f64, err: f64, tol: f64) -> bool {
    r.abs() <= tol.max(3.0 * err)
}

/// Full report from a precomputed profile.
pub(crate) fn report_from_profile(
    poly: &Polygon,
    prof: &BoundaryProfile,
    constraint: Constraint,
    tolerance: f64,
) -> Result<StationarityReport> {
    require_constraint(constraint)?;
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be finite and nonnegative, got {tolerance}")));
    }
    let n = poly.len();
    let sigma = prof.sigma();
    let sides: Vec<SideResiduals> = (0..n)
        .map(|i| {
            let sa = sliding_from_profile(poly, prof, i, Constraint::Area);
            let sp = sliding_from_profile(poly, prof, i, Constraint::Perimeter);
            let ta = tilting_from_profile(poly, prof, i, Constraint::Area);
            let tp = tilting_from_profile(poly, prof, i, Constraint::Perimeter);
            SideResiduals {
                index: i,
                length: poly.side_length(i),
                side_mean: prof.side_mean(i).value,
                sliding_area: sa.value,
                sliding_area_err: sa.error,
                sliding_perimeter: sp.value,
                sliding_perimeter_err: sp.error,
                tilting_area: ta.value,
                tilting_area_err: ta.error,
                tilting_perimeter: tp.value,
                tilting_perimeter_err: tp.error,
                err: sa.error.max(sp.error).max(ta.error).max(tp.error),
            }
        })
        .collect();
    let sigma_bar = sigma.div(poly.perimeter());
    let mut vertices = Vec::with_capacity(n);
    for i in 0..n {
        let angle = poly.interior_angle(i);
        let mut vr = VertexResiduals { index: i, angle, diagonal_i: None, diagonal_perimeter: None, err: None };
        if angle < PI {
            let d = diagonal_from_profile(poly, prof, i)?;
            let (am, ap) = diagonal_angles(poly, i)?;
            let dp = d - sigma_bar * (2.0 * (am.cos() - ap.cos()));
            vr.diagonal_i = Some(d.value);
            vr.diagonal_perimeter = Some(dp.value);
            vr.err = Some(dp.error);
        }
        vertices.push(vr);
    }
    let area_case = constraint == Constraint::Area;
    let sliding = sides.iter().all(|s| {
        if area_case {
            passes(s.sliding_area, s.sliding_area_err, tolerance)
        } else {
            passes(s.sliding_perimeter, s.sliding_perimeter_err, tolerance)
        }
    });
    let tilting = sides.iter().all(|s| {
        if area_case {
            passes(s.tilting_area, s.tilting_area_err, tolerance)
        } else {
            passes(s.tilting_perimeter, s.tilting_perimeter_err, tolerance)
        }
    });
    let diagonal = vertices.iter().all(|v| match (v.diagonal_i, v.diagonal_perimeter, v.err) {
        (Some(a), Some(p), Some(e)) => passes(if area_case { a } else { p }, e, tolerance),
        _ => true,
    });
    let means: Vec<f64> = sides.iter().map(|s| s.side_mean).collect();
    let max_sliding_difference = means.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - means.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Ok(StationarityReport {
        sigma: sigma.value,
        sigma_err: sigma.error,
        area: poly.area(),
        perimeter: poly.perimeter(),
        sides,
        vertices,
        verdict: Verdict {
            constraint,
            tolerance,
            sliding,
            tilting,
            diagonal,
            stationary: sliding && tilting && diagonal,
            max_sliding_difference,
            rule: "|residual| <= max(tolerance, 3 * error bound)",
        },
    })
}

/// Evaluates every residual and classifies `poly` under `constraint`.
pub fn check_stationarity(
    poly: &Polygon,
    k: &Kernel,
    constraint: Constraint,
    tolerance: f64,
    q: &QuadratureSpec,
) -> Result<StationarityReport> {
    require_constraint(constraint)?;
    let prof = BoundaryProfile::compute(poly, k, q, false)?;
    report_from_profile(poly, &prof, constraint, tolerance)
}
