//! The potential `v_P(x) = ∫_P K(|x − y|) dy` and its integrals along sides.
//!
//! Every evaluation splits `P` into signed triangles `(x, V_j, V_{j+1})`. In
//! polar coordinates about `x` the radial integral is the primitive `M`, so
//! only an angular integral remains, and the singularity at `y = x` never
//! reaches the quadrature. Along the edge at distance `h` from `x`, the
//! angle is parametrised by `s = h sinh w` (`s` the abscissa along the edge),
//! which turns the angular integral into
//! `∫ M(h cosh w) / cosh w dw`, smooth even when `x` nearly touches the edge line.
//!
//! The same pass also produces the boundary density whose integral is the
//! energy (see [`crate::energy`]).

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Polygon, SideData, Vec2};
use crate::kernel::Kernel;
use crate::quad::{gauss_legendre, Adaptive};

/// Node counts, depth limit and target relative tolerance for all integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Gauss points per angular panel of a fan triangle.
    pub angular_nodes: usize,
    /// Gauss points per panel along a side.
    pub line_nodes: usize,
    /// Points of the symmetric triangle rule used by the area route.
    pub outer_triangle_order: usize,
    pub max_subdivision_depth: u32,
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            angular_nodes: 32,
            line_nodes: 48,
            outer_triangle_order: 7,
            max_subdivision_depth: 10,
            tolerance: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(tolerance: f64) -> Self {
        QuadratureSpec { tolerance, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.angular_nodes < 2 || self.line_nodes < 2 || self.outer_triangle_order < 2 {
            return Err(Error::InvalidArgument("quadrature node counts must be at least 2".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1e-2) {
            return Err(Error::InvalidArgument(format!(
                "quadrature tolerance must lie in (0, 1e-2), got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// A value with an absolute error bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }

    pub const fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    /// Quotient by an exact scalar.
    pub fn div(self, d: f64) -> Estimate {
        Estimate::new(self.value / d, self.error / d.abs())
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate::new(self.value + o.value, self.error + o.error)
    }
}

impl Sub for Estimate {
    type Output = Estimate;
    fn sub(self, o: Estimate) -> Estimate {
        Estimate::new(self.value - o.value, self.error + o.error)
    }
}

impl Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, s: f64) -> Estimate {
        Estimate::new(self.value * s, self.error * s.abs())
    }
}

impl Mul<Estimate> for f64 {
    type Output = Estimate;
    fn mul(self, e: Estimate) -> Estimate {
        e * self
    }
}

/// Half of a side, split at its midpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Half {
    /// From the start vertex to the midpoint.
    First,
    /// From the midpoint to the end vertex.
    Second,
}

/// Endpoint of a side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    Start,
    End,
}

struct Edge {
    start: Vec2,
    dir: Vec2,
    len: f64,
}

pub(crate) struct FanValue {
    pub v: f64,
    pub v_err: f64,
    pub w: f64,
    pub w_err: f64,
    pub converged: bool,
}

/// Signed fan quadrature about an arbitrary apex.
pub(crate) struct Fan<'a> {
    kernel: &'a Kernel,
    edges: Vec<Edge>,
    inner: Adaptive,
    h_floor: f64,
}

impl<'a> Fan<'a> {
    pub fn new(poly: &Polygon, kernel: &'a Kernel, q: &QuadratureSpec) -> Self {
        let n = poly.len();
        let edges = (0..n)
            .map(|j| {
                let a = poly.vertex(j as isize);
                let d = poly.vertex(j as isize + 1) - a;
                let len = d.norm();
                Edge { start: a, dir: d / len, len }
            })
            .collect();
        Fan {
            kernel,
            edges,
            inner: Adaptive {
                rule: gauss_legendre(q.angular_nodes),
                rel_tol: 0.1 * q.tolerance,
                max_depth: q.max_subdivision_depth,
            },
            h_floor: 1e-14 * poly.scale(),
        }
    }

    /// `v_P(y)`; with `normal`, also the energy density
    /// `∫_P M(|x−y|) (y−x)·ν / |x−y|² dx` for `y` on a side with outward normal `ν`.
    pub fn eval(&self, y: Vec2, normal: Option<Vec2>, skip: Option<usize>) -> FanValue {
        let mut out = FanValue { v: 0.0, v_err: 0.0, w: 0.0, w_err: 0.0, converged: true };
        let kernel = self.kernel;
        for (j, e) in self.edges.iter().enumerate() {
            if skip == Some(j) {
                continue;
            }
            let a = e.start - y;
            let c = a.cross(e.dir);
            let h = c.abs();
            if h <= self.h_floor {
                // apex on the edge line: the fan triangle is degenerate
                continue;
            }
            let s_a = a.dot(e.dir);
            let w_a = (s_a / h).asinh();
            let w_b = ((s_a + e.len) / h).asinh();
            let sign = c.signum();
            let est = match normal {
                None => self.inner.integrate(
                    |w: f64| {
                        let ew = w.exp();
                        let ch = 0.5 * (ew + 1.0 / ew);
                        ([kernel.m(h * ch) / ch, 0.0], [0.0; 2])
                    },
                    w_a,
                    w_b,
                ),
                Some(nu) => {
                    let foot = (a - e.dir * s_a) / h;
                    let (fn_, dn) = (foot.dot(nu), e.dir.dot(nu));
                    self.inner.integrate(
                        |w: f64| {
                            let ew = w.exp();
                            let inv = 1.0 / ew;
                            let ch = 0.5 * (ew + inv);
                            let sech = 1.0 / ch;
                            let th = (ew - inv) / (ew + inv);
                            let r = h * ch;
                            let v = kernel.m(r) * sech;
                            let dens = -(fn_ * sech + dn * th) * sech * kernel.n(r);
                            ([v, dens], [0.0; 2])
                        },
                        w_a,
                        w_b,
                    )
                }
            };
            out.v += sign * est.value[0];
            out.v_err += est.error[0];
            out.w += sign * est.value[1];
            out.w_err += est.error[1];
            out.converged &= est.converged;
        }
        out
    }
}

/// Integrals over one half of a side, where `d` is the distance to the side midpoint.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct HalfIntegrals {
    /// `∫ v dH¹`
    pub v: Estimate,
    /// `∫ v·d dH¹`
    pub moment: Estimate,
    /// `∫ (energy density) dH¹`; zero unless requested.
    pub energy: Estimate,
}

fn half_side(fan: &Fan, sd: &SideData, half: Half, line: &Adaptive, with_energy: bool) -> (HalfIntegrals, bool) {
    let len = 0.5 * sd.length;
    let (vertex, toward) = match half {
        Half::First => (sd.start, sd.tangent()),
        Half::Second => (sd.end, -sd.tangent()),
    };
    let normal = with_energy.then_some(sd.normal);
    let mut inner_ok = true;
    // s = len·τ³ grades the nodes towards the vertex, where v is least smooth
    let est = line.integrate(
        |tau: f64| {
            let s = len * tau * tau * tau;
            let jac = 3.0 * len * tau * tau;
            let f = fan.eval(vertex + toward * s, normal, Some(sd.index));
            inner_ok &= f.converged;
            let d = len - s;
            (
                [f.v * jac, f.v * d * jac, f.w * jac],
                [f.v_err * jac, f.v_err * d * jac, f.w_err * jac],
            )
        },
        0.0,
        1.0,
    );
    let out = HalfIntegrals {
        v: Estimate::new(est.value[0], est.error[0]),
        moment: Estimate::new(est.value[1], est.error[1]),
        energy: Estimate::new(est.value[2], est.error[2]),
    };
    (out, est.converged && inner_ok)
}

fn line_adaptive(q: &QuadratureSpec) -> Adaptive {
    Adaptive { rule: gauss_legendre(q.line_nodes), rel_tol: q.tolerance, max_depth: q.max_subdivision_depth }
}

/// All half-side integrals of one polygon, computed in a single pass.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryProfile {
    sides: Vec<SideData>,
    halves: Vec<[HalfIntegrals; 2]>,
    with_energy: bool,
}

impl BoundaryProfile {
    /// Integrates `v`, `v·|x − M_i|` and (optionally) the energy density over every half side.
    pub fn compute(poly: &Polygon, kernel: &Kernel, q: &QuadratureSpec, with_energy: bool) -> Result<Self> {
        q.validate()?;
        let sides = poly.side_data();
        let fan = Fan::new(poly, kernel, q);
        let line = line_adaptive(q);
        let jobs: Vec<(usize, Half)> =
            (0..sides.len()).flat_map(|i| [(i, Half::First), (i, Half::Second)]).collect();
        let results: Vec<(HalfIntegrals, bool)> =
            jobs.par_iter().map(|&(i, h)| half_side(&fan, &sides[i], h, &line, with_energy)).collect();
        let converged = results.iter().all(|r| r.1);
        let halves: Vec<[HalfIntegrals; 2]> = results.chunks(2).map(|c| [c[0].0, c[1].0]).collect();
        let profile = BoundaryProfile { sides, halves, with_energy };
        if !converged {
            let total = profile.boundary_integral();
            return Err(Error::Accuracy {
                context: "boundary integrals of the potential".into(),
                estimate: total.value,
                bound: total.error,
            });
        }
        Ok(profile)
    }

    pub fn side_data(&self) -> &[SideData] {
        &self.sides
    }

    pub fn len(&self) -> usize {
        self.sides.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sides.is_empty()
    }

    pub fn halves(&self, i: usize) -> &[HalfIntegrals; 2] {
        &self.halves[i]
    }

    /// `∫_{side i} v dH¹`.
    pub fn side_integral(&self, i: usize) -> Estimate {
        self.halves[i][0].v + self.halves[i][1].v
    }

    /// `(1/ℓ_i) ∫_{side i} v dH¹`.
    pub fn side_mean(&self, i: usize) -> Estimate {
        self.side_integral(i).div(self.sides[i].length)
    }

    /// `∫_{half} v(x) |x − M_i| dH¹`.
    pub fn half_moment(&self, i: usize, half: Half) -> Estimate {
        match half {
            Half::First => self.halves[i][0].moment,
            Half::Second => self.halves[i][1].moment,
        }
    }

    /// `∫_{side i} v(x) |x − anchor| dH¹`.
    pub fn vertex_moment(&self, i: usize, anchor: Anchor) -> Estimate {
        let half_len = 0.5 * self.sides[i].length;
        let [a, b] = &self.halves[i];
        let base = (a.v + b.v) * half_len;
        match anchor {
            Anchor::Start => base - a.moment + b.moment,
            Anchor::End => base + a.moment - b.moment,
        }
    }

    /// `∫_{∂P} v dH¹`.
    pub fn boundary_integral(&self) -> Estimate {
        (0..self.len()).fold(Estimate::default(), |acc, i| acc + self.side_integral(i))
    }

    /// `σ = ∫_{∂P} v (x·ν) dH¹`, using that `x·ν` is constant on each side.
    pub fn sigma(&self) -> Estimate {
        (0..self.len()).fold(Estimate::default(), |acc, i| acc + self.side_integral(i) * self.sides[i].support())
    }

    /// Energy, if the profile was computed with it.
    pub fn energy(&self) -> Option<Estimate> {
        self.with_energy.then(|| {
            self.halves.iter().fold(Estimate::default(), |acc, h| acc + h[0].energy + h[1].energy)
        })
    }
}

fn side_profile(poly: &Polygon, kernel: &Kernel, i: usize, q: &QuadratureSpec) -> Result<[HalfIntegrals; 2]> {
    q.validate()?;
    let sides = poly.side_data();
    let sd = sides
        .get(i)
        .ok_or_else(|| Error::InvalidArgument(format!("side index {i} out of range for {} sides", sides.len())))?;
    let fan = Fan::new(poly, kernel, q);
    let line = line_adaptive(q);
    let (a, ok_a) = half_side(&fan, sd, Half::First, &line, false);
    let (b, ok_b) = half_side(&fan, sd, Half::Second, &line, false);
    if !(ok_a && ok_b) {
        let t = a.v + b.v;
        return Err(Error::Accuracy {
            context: format!("potential along side {}", i + 1),
            estimate: t.value,
            bound: t.error,
        });
    }
    Ok([a, b])
}

/// `v_P(x)` for any point of the plane.
///
/// ```
/// use polyriesz::{geom::regular_ngon, kernel::Kernel, potential::{potential_at, QuadratureSpec}};
/// use polyriesz::geom::Vec2;
/// let sq = regular_ngon(4, 1.0).unwrap();
/// let v = potential_at(&sq, &Kernel::riesz(1.0).unwrap(), Vec2::ZERO, &QuadratureSpec::default()).unwrap();
/// assert!((v.value - 4.0 * 1f64.asinh()).abs() < 1e-10);
/// ```
pub fn potential_at(poly: &Polygon, kernel: &Kernel, x: Vec2, q: &QuadratureSpec) -> Result<Estimate> {
    q.validate()?;
    if !x.is_finite() {
        return Err(Error::InvalidArgument("evaluation point is not finite".into()));
    }
    let f = Fan::new(poly, kernel, q).eval(x, None, None);
    let est = Estimate::new(f.v, f.v_err + 4.0 * f64::EPSILON * f.v.abs());
    if !f.converged {
        return Err(Error::Accuracy { context: format!("potential at {x}"), estimate: est.value, bound: est.error });
    }
    Ok(est)
}

/// `(1/ℓ_i) ∫_{side i} v_P dH¹`.
pub fn side_mean_potential(poly: &Polygon, kernel: &Kernel, i: usize, q: &QuadratureSpec) -> Result<Estimate> {
    let [a, b] = side_profile(poly, kernel, i, q)?;
    Ok((a.v + b.v).div(poly.side_length(i)))
}

/// `∫_{half of side i} v_P(x) |x − M_i| dH¹`.
pub fn side_half_moment(poly: &Polygon, kernel: &Kernel, i: usize, half: Half, q: &QuadratureSpec) -> Result<Estimate> {
    let [a, b] = side_profile(poly, kernel, i, q)?;
    Ok(match half {
        Half::First => a.moment,
        Half::Second => b.moment,
    })
}

/// `∫_{side i} v_P(x) |x − anchor| dH¹`.
pub fn side_vertex_moment(
    poly: &Polygon,
    kernel: &Kernel,
    i: usize,
    anchor: Anchor,
    q: &QuadratureSpec,
) -> Result<Estimate> {
    let [a, b] = side_profile(poly, kernel, i, q)?;
    let half_len = 0.5 * poly.side_length(i);
    let base = (a.v + b.v) * half_len;
    Ok(match anchor {
        Anchor::Start => base - a.moment + b.moment,
        Anchor::End => base + a.moment - b.moment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::regular_ngon;

    /// `v` for α = 1 in closed form: each edge contributes `h (asinh(s_B/h) − asinh(s_A/h))`.
    fn newton_like(poly: &Polygon, x: Vec2) -> f64 {
        let n = poly.len();
        let mut v = 0.0;
        for j in 0..n {
            let a = poly.vertex(j as isize);
            let b = poly.vertex(j as isize + 1);
            let d = (b - a).normalized();
            let c = (a - x).cross(d);
            if c.abs() < 1e-15 {
                continue;
            }
            let h = c.abs();
            let sa = (a - x).dot(d);
            let sb = (b - x).dot(d);
            v += c.signum() * h * ((sb / h).asinh() - (sa / h).asinh());
        }
        v
    }

    #[test]
    fn alpha_one_matches_closed_form_everywhere() {
        let p = Polygon::from_coords(&[[0.0, 0.0], [2.0, 0.3], [1.6, 1.5], [0.7, 1.1], [-0.2, 1.3]]).unwrap();
        let k = Kernel::riesz(1.0).unwrap();
        let q = QuadratureSpec::default();
        for x in [
            Vec2::new(0.8, 0.6),
            Vec2::new(1.0, 0.15),
            Vec2::new(-3.0, 2.0),
            Vec2::new(0.7, 1.1),
            Vec2::new(1.0, 0.15 + 1e-9),
        ] {
            let got = potential_at(&p, &k, x, &q).unwrap();
            let want = newton_like(&p, x);
            assert!((got.value - want).abs() < 1e-12 * want.abs().max(1.0), "{x}: {} vs {want}", got.value);
        }
    }

    #[test]
    fn far_field_bounds() {
        let sq = Polygon::from_coords(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let k = Kernel::riesz(1.0).unwrap();
        let v = potential_at(&sq, &k, Vec2::new(11.0, 0.5), &QuadratureSpec::default()).unwrap().value;
        assert!(v >= 1.0 / (10.0 + 2f64.sqrt()) && v <= 0.1);
    }

    #[test]
    fn vertex_moments_add_up() {
        let t = Polygon::from_coords(&[[0.0, 0.0], [1.5, 0.1], [0.4, 1.2]]).unwrap();
        let k = Kernel::riesz(1.3).unwrap();
        let q = QuadratureSpec::default();
        let prof = BoundaryProfile::compute(&t, &k, &q, false).unwrap();
        for i in 0..3 {
            let s = prof.vertex_moment(i, Anchor::Start).value + prof.vertex_moment(i, Anchor::End).value;
            let want = t.side_length(i) * prof.side_integral(i).value;
            assert!((s - want).abs() < 1e-12 * want);
            let single = side_vertex_moment(&t, &k, i, Anchor::End, &q).unwrap();
            assert!((single.value - prof.vertex_moment(i, Anchor::End).value).abs() < 1e-13 * single.value);
        }
    }

    #[test]
    fn square_side_means_agree() {
        let sq = regular_ngon(4, 1.0).unwrap();
        for k in [Kernel::riesz(0.5).unwrap(), Kernel::regularized_riesz(1.5, 0.05).unwrap()] {
            let q = QuadratureSpec::default();
            let m: Vec<f64> = (0..4).map(|i| side_mean_potential(&sq, &k, i, &q).unwrap().value).collect();
            for w in m.windows(2) {
                assert!((w[0] - w[1]).abs() < 1e-9 * w[0]);
            }
        }
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let sq = regular_ngon(4, 1.0).unwrap();
        let k = Kernel::riesz(1.0).unwrap();
        let q = QuadratureSpec { tolerance: 0.5, ..Default::default() };
        assert!(potential_at(&sq, &k, Vec2::ZERO, &q).is_err());
        assert!(side_mean_potential(&sq, &k, 9, &QuadratureSpec::default()).is_err());
    }
}
