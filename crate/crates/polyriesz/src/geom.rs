//! Planar polygons, per-side data, rigid motions and Steiner symmetrization.
//!
//! Vertices are stored counterclockwise. Side `i` joins vertex `i` to vertex
//! `i + 1` (indices are cyclic and zero-based in the API).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angles closer than this to 0, π or 2π are rejected.
pub const ANGLE_TOL: f64 = 1e-9;
/// Relative tolerance for geometric predicates on unit-scale data.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Counterclockwise rotation by a right angle.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn normalized(self) -> Vec2 {
        self / self.norm()
    }

    #[inline]
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    #[inline]
    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from(a: (f64, f64)) -> Self {
        Vec2::new(a.0, a.1)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// `cot θ + 1/sin θ`, the perimeter sensitivity of a vertex with interior angle θ.
///
/// ```
/// use polyriesz::geom::psi;
/// assert!((psi(std::f64::consts::FRAC_PI_2).unwrap() - 1.0).abs() < 1e-15);
/// assert!(psi(0.0).is_err());
/// ```
pub fn psi(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("psi needs an angle in (0, pi), got {theta}")));
    }
    Ok(psi_extended(theta))
}

/// Same expression on (0, 2π) minus {π}; negative past π.
#[inline]
pub(crate) fn psi_extended(theta: f64) -> f64 {
    // cot θ + 1/sin θ = cot(θ/2), without the cancellation near π
    1.0 / (0.5 * theta).tan()
}

/// Per-side geometric record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SideData {
    pub index: usize,
    pub start: Vec2,
    pub end: Vec2,
    pub length: f64,
    /// Outward unit normal.
    pub normal: Vec2,
    pub midpoint: Vec2,
    /// Interior angle at `start`.
    pub angle_start: f64,
    /// Interior angle at `end`.
    pub angle_end: f64,
    /// `angle_start` modulo π.
    pub reduced_start: f64,
    /// `angle_end` modulo π.
    pub reduced_end: f64,
}

impl SideData {
    /// Unit tangent from `start` to `end`.
    pub fn tangent(&self) -> Vec2 {
        (self.end - self.start) / self.length
    }

    /// Support value `x·ν`, constant along the side.
    pub fn support(&self) -> f64 {
        self.start.dot(self.normal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Motion {
    Translate(Vec2),
    /// Rotation about the origin.
    Rotate(f64),
    /// Reflection across the line through the origin with this direction.
    Reflect(Vec2),
    /// Homothety about the origin.
    Scale(f64),
}

/// A simple polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

#[derive(Serialize, Deserialize)]
struct PolygonJson {
    vertices: Vec<[f64; 2]>,
}

impl Serialize for Polygon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolygonJson { vertices: self.vertices.iter().map(|&v| v.into()).collect() }.serialize(s)
    }
}

impl Polygon {
    /// Validates and stores counterclockwise vertices.
    ///
    /// Rejects fewer than three vertices, repeated consecutive vertices,
    /// clockwise order, self-intersections and interior angles within
    /// [`ANGLE_TOL`] of 0, π or 2π.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        check_vertices(&vertices)?;
        let a = signed_area(&vertices);
        if a < 0.0 {
            return Err(Error::InvalidArgument("vertices are in clockwise order".into()));
        }
        let p = Polygon { vertices };
        p.validate()?;
        Ok(p)
    }

    /// Like [`Polygon::new`] but reverses clockwise input; the flag reports whether it did.
    pub fn new_any_orientation(mut vertices: Vec<Vec2>) -> Result<(Self, bool)> {
        check_vertices(&vertices)?;
        let flipped = signed_area(&vertices) < 0.0;
        if flipped {
            reverse_keep_first(&mut vertices);
        }
        Ok((Polygon::new(vertices)?, flipped))
    }

    pub fn from_coords(coords: &[[f64; 2]]) -> Result<Self> {
        Polygon::new(coords.iter().map(|&c| c.into()).collect())
    }

    /// Parses `{"vertices": [[x, y], ...]}`; clockwise input is re-oriented
    /// and reported through the returned flag.
    pub fn from_json(s: &str) -> Result<(Self, bool)> {
        let raw: PolygonJson =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("polygon JSON: {e}")))?;
        Polygon::new_any_orientation(raw.vertices.into_iter().map(Vec2::from).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polygon serialization cannot fail")
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Vertex with cyclic index.
    #[inline]
    pub fn vertex(&self, i: isize) -> Vec2 {
        let n = self.vertices.len() as isize;
        self.vertices[i.rem_euclid(n) as usize]
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len()).map(|i| self.side_length(i)).sum()
    }

    pub fn side_length(&self, i: usize) -> f64 {
        (self.vertex(i as isize + 1) - self.vertex(i as isize)).norm()
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.len();
        let mut c = Vec2::ZERO;
        let mut a2 = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = p.cross(q);
            a2 += w;
            c += (p + q) * w;
        }
        c / (3.0 * a2)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                d = d.max(p.distance(*q));
            }
        }
        d
    }

    /// Interior angle at vertex `i`, in (0, 2π).
    pub fn interior_angle(&self, i: usize) -> f64 {
        let i = i as isize;
        let a = self.vertex(i) - self.vertex(i - 1);
        let b = self.vertex(i + 1) - self.vertex(i);
        PI - a.cross(b).atan2(a.dot(b))
    }

    pub fn interior_angles(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.interior_angle(i)).collect()
    }

    pub fn is_convex(&self) -> bool {
        self.interior_angles().iter().all(|&t| t < PI)
    }

    pub fn side_data(&self) -> Vec<SideData> {
        let angles = self.interior_angles();
        let n = self.len();
        (0..n)
            .map(|i| {
                let start = self.vertices[i];
                let end = self.vertices[(i + 1) % n];
                let d = end - start;
                let length = d.norm();
                let (a0, a1) = (angles[i], angles[(i + 1) % n]);
                SideData {
                    index: i,
                    start,
                    end,
                    length,
                    normal: Vec2::new(d.y, -d.x) / length,
                    midpoint: (start + end) * 0.5,
                    angle_start: a0,
                    angle_end: a1,
                    reduced_start: reduce_angle(a0),
                    reduced_end: reduce_angle(a1),
                }
            })
            .collect()
    }

    pub fn translated(&self, v: Vec2) -> Polygon {
        Polygon { vertices: self.vertices.iter().map(|&p| p + v).collect() }
    }

    /// Homothety about `center`; `factor` must be positive.
    pub(crate) fn scaled_about(&self, center: Vec2, factor: f64) -> Polygon {
        debug_assert!(factor > 0.0);
        Polygon { vertices: self.vertices.iter().map(|&p| center + (p - center) * factor).collect() }
    }

    pub fn transform(&self, motion: Motion) -> Result<Polygon> {
        let vertices = match motion {
            Motion::Translate(v) => return Ok(self.translated(v)),
            Motion::Rotate(a) => self.vertices.iter().map(|p| p.rotated(a)).collect(),
            Motion::Scale(s) => {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::InvalidArgument(format!("scale factor must be positive, got {s}")));
                }
                return Ok(self.scaled_about(Vec2::ZERO, s));
            }
            Motion::Reflect(axis) => {
                let n = axis.norm();
                if !(n > 0.0 && n.is_finite()) {
                    return Err(Error::InvalidArgument("reflection axis must be a nonzero vector".into()));
                }
                let u = axis / n;
                let mut v: Vec<Vec2> =
                    self.vertices.iter().map(|&p| u * (2.0 * p.dot(u)) - p).collect();
                reverse_keep_first(&mut v);
                v
            }
        };
        Polygon::new(vertices)
    }

    /// Even-odd point location; points on the boundary may go either way.
    pub fn contains(&self, x: Vec2) -> bool {
        let n = self.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a.y > x.y) != (b.y > x.y) {
                let t = (x.y - a.y) / (b.y - a.y);
                if x.x < a.x + t * (b.x - a.x) {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Length scale used by the tolerance rules.
    pub(crate) fn scale(&self) -> f64 {
        bbox_scale(&self.vertices)
    }

    fn validate(&self) -> Result<()> {
        let n = self.len();
        let scale = self.scale();
        for i in 0..n {
            let t = self.interior_angle(i);
            if t < ANGLE_TOL || (t - PI).abs() < ANGLE_TOL || t > 2.0 * PI - ANGLE_TOL {
                return Err(Error::InvalidArgument(format!(
                    "degenerate interior angle {t} at vertex {}",
                    i + 1
                )));
            }
        }
        let eps = GEOM_TOL * scale * scale;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if segments_touch(a, b, c, d, eps) {
                    return Err(Error::InvalidArgument(format!(
                        "boundary is not simple: sides {} and {} meet",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

/// Regular N-gon of the given area centred at the origin, first vertex on the positive x-axis.
pub fn regular_ngon(n: usize, area: f64) -> Result<Polygon> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("a polygon needs at least 3 vertices, got {n}")));
    }
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::InvalidArgument(format!("area must be positive, got {area}")));
    }
    let step = 2.0 * PI / n as f64;
    let radius = (2.0 * area / (n as f64 * step.sin())).sqrt();
    let vertices = (0..n)
        .map(|k| {
            let (s, c) = (step * k as f64).sin_cos();
            Vec2::new(radius * c, radius * s)
        })
        .collect();
    Polygon::new(vertices)
}

/// Steiner symmetral of a convex polygon: every chord parallel to `direction`
/// is replaced by the chord of equal length centred on the line through the
/// origin orthogonal to `direction`.
pub fn steiner_symmetrize(p: &Polygon, direction: Vec2) -> Result<Polygon> {
    if !p.is_convex() {
        return Err(Error::Unsupported(
            "Steiner symmetrization is implemented for convex polygons only".into(),
        ));
    }
    symmetrize_chords(p, direction)
}

/// Chord-wise symmetrization; valid whenever every chord parallel to
/// `direction` is a single segment.
pub(crate) fn symmetrize_chords(p: &Polygon, direction: Vec2) -> Result<Polygon> {
    let dn = direction.norm();
    if !(dn > 0.0 && dn.is_finite()) {
        return Err(Error::InvalidArgument("symmetrization direction must be nonzero".into()));
    }
    let e2 = direction / dn;
    let e1 = Vec2::new(e2.y, -e2.x);
    let pts: Vec<Vec2> = p.vertices.iter().map(|&v| Vec2::new(v.dot(e1), v.dot(e2))).collect();
    let eps = GEOM_TOL * p.scale();

    let mut xs: Vec<f64> = pts.iter().map(|v| v.x).collect();
    xs.sort_by(f64::total_cmp);
    let mut breaks: Vec<f64> = Vec::with_capacity(xs.len());
    for x in xs {
        if breaks.last().map_or(true, |&b| x - b > eps) {
            breaks.push(x);
        }
    }

    let n = pts.len();
    let chord = |c: f64| -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let (xmin, xmax) = if a.x < b.x { (a.x, b.x) } else { (b.x, a.x) };
            if c < xmin - eps || c > xmax + eps {
                continue;
            }
            if xmax - xmin <= eps {
                lo = lo.min(a.y.min(b.y));
                hi = hi.max(a.y.max(b.y));
            } else {
                let t = ((c - a.x) / (b.x - a.x)).clamp(0.0, 1.0);
                let y = a.y + t * (b.y - a.y);
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
        (hi - lo).max(0.0)
    };
    let heights: Vec<f64> = breaks.iter().map(|&c| chord(c)).collect();

    let mut out: Vec<Vec2> = Vec::with_capacity(2 * breaks.len());
    for (&c, &h) in breaks.iter().zip(&heights) {
        out.push(Vec2::new(c, -0.5 * h));
    }
    for (&c, &h) in breaks.iter().zip(&heights).rev() {
        if h > eps {
            out.push(Vec2::new(c, 0.5 * h));
        }
    }
    let out = drop_collinear(out, eps);
    Polygon::new(out.into_iter().map(|v| e1 * v.x + e2 * v.y).collect())
}

/// Removes repeated points and straight-angle vertices.
fn drop_collinear(mut v: Vec<Vec2>, eps: f64) -> Vec<Vec2> {
    loop {
        let n = v.len();
        if n < 3 {
            return v;
        }
        let mut removed = false;
        for i in 0..n {
            let prev = v[(i + n - 1) % n];
            let cur = v[i];
            let next = v[(i + 1) % n];
            let (a, b) = (cur - prev, next - cur);
            let degenerate = a.norm() <= eps
                || b.norm() <= eps
                || (a.cross(b).abs() <= 2.0 * ANGLE_TOL * a.norm() * b.norm() && a.dot(b) > 0.0);
            if degenerate {
                v.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return v;
        }
    }
}

pub(crate) fn reduce_angle(t: f64) -> f64 {
    if t > PI {
        t - PI
    } else {
        t
    }
}

pub(crate) fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn bbox_scale(v: &[Vec2]) -> f64 {
    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in v {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (hi - lo).norm().max(f64::MIN_POSITIVE)
}

fn reverse_keep_first(v: &mut [Vec2]) {
    v[1..].reverse();
}

fn check_vertices(v: &[Vec2]) -> Result<()> {
    if v.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a polygon needs at least 3 vertices, got {}",
            v.len()
        )));
    }
    if let Some(i) = v.iter().position(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument(format!("vertex {} is not finite", i + 1)));
    }
    let eps = GEOM_TOL * bbox_scale(v);
    let n = v.len();
    for i in 0..n {
        if v[i].distance(v[(i + 1) % n]) <= eps {
            return Err(Error::InvalidArgument(format!(
                "vertices {} and {} coincide",
                i + 1,
                (i + 1) % n + 1
            )));
        }
    }
    if signed_area(v).abs() <= eps * eps {
        return Err(Error::InvalidArgument("polygon has zero area".into()));
    }
    Ok(())
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2, eps: f64) -> bool {
    let e = eps.sqrt();
    p.x >= a.x.min(b.x) - e && p.x <= a.x.max(b.x) + e && p.y >= a.y.min(b.y) - e && p.y <= a.y.max(b.y) + e
}

/// Closed segments [a,b] and [c,d] intersect (within `eps` in area units).
fn segments_touch(a: Vec2, b: Vec2, c: Vec2, d: Vec2, eps: f64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)) {
        return true;
    }
    (d1.abs() <= eps && on_segment(c, d, a, eps))
        || (d2.abs() <= eps && on_segment(c, d, b, eps))
        || (d3.abs() <= eps && on_segment(a, b, c, eps))
        || (d4.abs() <= eps && on_segment(a, b, d, eps))
}
