//! The interaction energy `E(P) = ∫_P ∫_P K(|x − y|) dx dy = ∫_P v_P`.
//!
//! [`energy`] writes `v_P(x)` as a flux through `∂P` and swaps the order of
//! integration, which leaves a line integral over `∂P` of
//! `∫_P M(|x−y|) (y−x)·ν(y) / |x−y|² dx`. That inner integral is again a signed
//! fan about `y`, with radial primitive `N(R) = ∫₀ᴿ M`. No point of the outer
//! quadrature sees a singular or non-smooth integrand except at the vertices,
//! where the side parametrisation is graded.
//!
//! [`energy_by_area_quadrature`] integrates `v_P` over a triangulation with
//! a symmetric triangle rule and adaptive quadrisection. It converges slowly
//! because `v_P` has unbounded derivatives at `∂P`; it is kept as an
//! independent cross-check.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{regular_ngon, Polygon, Vec2};
use crate::kernel::Kernel;
use crate::potential::{BoundaryProfile, Estimate, Fan, QuadratureSpec};

/// `E(P)` with an error bound.
///
/// ```
/// use polyriesz::{energy::energy, geom::Polygon, kernel::Kernel, potential::QuadratureSpec};
/// let sq = Polygon::from_coords(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
/// let e = energy(&sq, &Kernel::riesz(1.0).unwrap(), &QuadratureSpec::default()).unwrap();
/// assert!((e.value - 2.9732095982473787).abs() < 1e-8);
/// ```
pub fn energy(poly: &Polygon, kernel: &Kernel, q: &QuadratureSpec) -> Result<Estimate> {
    let prof = BoundaryProfile::compute(poly, kernel, q, true)?;
    Ok(prof.energy().expect("profile computed with energy"))
}

/// `E(P) / E(regular N-gon of the same area)`.
pub fn energy_ratio_to_regular(poly: &Polygon, kernel: &Kernel, q: &QuadratureSpec) -> Result<Estimate> {
    let reference = regular_ngon(poly.len(), poly.area())?;
    let (e, r) = rayon::join(|| energy(poly, kernel, q), || energy(&reference, kernel, q));
    let (e, r) = (e?, r?);
    let ratio = e.value / r.value;
    Ok(Estimate::new(ratio, e.error / r.value + ratio * r.error / r.value))
}

/// Symmetric rules on the reference triangle: barycentric points and weights summing to 1.
fn triangle_rule(order: usize) -> Result<Vec<([f64; 3], f64)>> {
    let perm = |a: f64, b: f64, w: f64| vec![([a, a, b], w), ([a, b, a], w), ([b, a, a], w)];
    match order {
        3 => Ok(perm(1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0)),
        6 => {
            let mut r = perm(0.445_948_490_915_965, 0.108_103_018_168_070, 0.223_381_589_678_011);
            r.extend(perm(0.091_576_213_509_771, 0.816_847_572_980_459, 0.109_951_743_655_322));
            Ok(r)
        }
        7 => {
            let s = 15f64.sqrt();
            let mut r = vec![([1.0 / 3.0; 3], 9.0 / 40.0)];
            r.extend(perm((6.0 - s) / 21.0, (9.0 + 2.0 * s) / 21.0, (155.0 - s) / 1200.0));
            r.extend(perm((6.0 + s) / 21.0, (9.0 - 2.0 * s) / 21.0, (155.0 + s) / 1200.0));
            Ok(r)
        }
        _ => Err(Error::InvalidArgument(format!(
            "outer triangle rule with {order} points is not available (use 3, 6 or 7)"
        ))),
    }
}

/// Ear-clipping triangulation of a simple counterclockwise polygon.
pub(crate) fn triangulate(poly: &Polygon) -> Vec<[Vec2; 3]> {
    let v = poly.vertices();
    if poly.is_convex() {
        let c = poly.centroid();
        return (0..v.len()).map(|i| [c, v[i], v[(i + 1) % v.len()]]).collect();
    }
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut out = Vec::with_capacity(v.len() - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let ear = (0..m).find(|&k| {
            let (a, b, c) = (v[idx[(k + m - 1) % m]], v[idx[k]], v[idx[(k + 1) % m]]);
            if (b - a).cross(c - b) <= 0.0 {
                return false;
            }
            idx.iter().all(|&j| {
                let p = v[j];
                if p == a || p == b || p == c {
                    return true;
                }
                !((b - a).cross(p - a) >= 0.0 && (c - b).cross(p - b) >= 0.0 && (a - c).cross(p - c) >= 0.0)
            })
        });
        let k = ear.expect("every simple polygon has an ear");
        out.push([v[idx[(k + m - 1) % m]], v[idx[k]], v[idx[(k + 1) % m]]]);
        idx.remove(k);
    }
    out.push([v[idx[0]], v[idx[1]], v[idx[2]]]);
    out
}

struct AreaRule<'a> {
    fan: Fan<'a>,
    rule: Vec<([f64; 3], f64)>,
    tol: f64,
    max_depth: u32,
    total_area: f64,
}

impl AreaRule<'_> {
    /// (value, |value|, inner error, converged)
    fn apply(&self, t: &[Vec2; 3]) -> (f64, f64, f64, bool) {
        let area = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).abs();
        let (mut val, mut abs, mut err, mut ok) = (0.0, 0.0, 0.0, true);
        for (b, w) in &self.rule {
            let x = t[0] * b[0] + t[1] * b[1] + t[2] * b[2];
            let f = self.fan.eval(x, None, None);
            val += w * f.v;
            abs += w * f.v.abs();
            err += w * f.v_err;
            ok &= f.converged;
        }
        (val * area, abs * area, err * area, ok)
    }

    fn recurse(&self, t: [Vec2; 3], whole: (f64, f64, f64, bool), global_abs: f64, depth: u32) -> (f64, f64, bool) {
        let [a, b, c] = t;
        let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
        let kids = [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]];
        let parts: Vec<_> = kids.iter().map(|k| self.apply(k)).collect();
        let fine: f64 = parts.iter().map(|p| p.0).sum();
        let local: f64 = parts.iter().map(|p| p.1).sum();
        let inner: f64 = parts.iter().map(|p| p.2).sum();
        let inner_ok = parts.iter().all(|p| p.3);
        let diff = (fine - whole.0).abs();
        let frac = 0.5 * (b - a).cross(c - a).abs() / self.total_area;
        let ok = diff <= self.tol * local.max(global_abs * frac);
        if ok || depth >= self.max_depth {
            return (fine, diff + inner, ok && inner_ok);
        }
        let mut acc = (0.0, 0.0, inner_ok);
        for (k, p) in kids.iter().zip(parts) {
            let r = self.recurse(*k, p, global_abs, depth + 1);
            acc.0 += r.0;
            acc.1 += r.1;
            acc.2 &= r.2;
        }
        acc
    }
}

/// `E(P) = ∫_P v_P` by a triangle rule on a triangulation of `P` with adaptive quadrisection.
pub fn energy_by_area_quadrature(poly: &Polygon, kernel: &Kernel, q: &QuadratureSpec) -> Result<Estimate> {
    q.validate()?;
    let ar = AreaRule {
        fan: Fan::new(poly, kernel, q),
        rule: triangle_rule(q.outer_triangle_order)?,
        tol: q.tolerance,
        max_depth: q.max_subdivision_depth,
        total_area: poly.area(),
    };
    let tris = triangulate(poly);
    let coarse: Vec<_> = tris.par_iter().map(|t| ar.apply(t)).collect();
    let global_abs: f64 = coarse.iter().map(|c| c.1).sum();
    let parts: Vec<(f64, f64, bool)> =
        tris.par_iter().zip(coarse.par_iter()).map(|(t, c)| ar.recurse(*t, *c, global_abs, 1)).collect();
    let value = crate::pairwise_sum(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let error = parts.iter().map(|p| p.1).sum::<f64>();
    if !parts.iter().all(|p| p.2) {
        return Err(Error::Accuracy { context: "area quadrature of the energy".into(), estimate: value, bound: error });
    }
    Ok(Estimate::new(value, error))
}
