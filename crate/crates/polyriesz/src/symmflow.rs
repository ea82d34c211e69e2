//! Chains of Steiner symmetrizations that turn a unit-area triangle into the
//! equilateral triangle and a unit-area quadrilateral into the square, both as
//! scalar side-length recursions and as actual polygon sequences.

use serde::Serialize;

use crate::energy::energy;
use crate::error::{Error, Result};
use crate::geom::{symmetrize_chords, Polygon, Vec2};
use crate::kernel::Kernel;
use crate::potential::{Estimate, QuadratureSpec};

/// Limit of [`triangle_recursion`]: the side of the unit-area equilateral triangle, `2/3^{1/4}`.
pub fn equilateral_side() -> f64 {
    2.0 / 3f64.powf(0.25)
}

/// Equal-side lengths `a_1, …, a_n` of the isosceles triangles produced from a
/// unit-area triangle with half base `a0`.
///
/// `a_1 = (a0² + a0⁻²)^{1/2}` and `a_k = (a_{k−1}²/4 + 4/a_{k−1}²)^{1/2}`.
///
/// ```
/// let a = polyriesz::symmflow::triangle_recursion(1.0, 100).unwrap();
/// assert!((a[0] - 2f64.sqrt()).abs() < 1e-15);
/// assert!((a[99] - polyriesz::symmflow::equilateral_side()).abs() < 1e-12);
/// ```
pub fn triangle_recursion(a0: f64, n_steps: usize) -> Result<Vec<f64>> {
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(Error::InvalidArgument(format!("half base must be positive, got {a0}")));
    }
    let mut out = Vec::with_capacity(n_steps);
    let mut a = a0;
    for k in 0..n_steps {
        let a2 = a * a;
        a = if k == 0 { (a2 + 1.0 / a2).sqrt() } else { (0.25 * a2 + 4.0 / a2).sqrt() };
        out.push(a);
    }
    Ok(out)
}

/// Side lengths `a_3, a_4, …` (`n_steps` values) of the alternating
/// rectangle/rhombus chain started from a unit-area rhombus of side `a2`.
///
/// Odd terms repeat their predecessor (long side of the rectangle); even terms
/// are `(a²/(a⁴+1) + (a⁴+1)/(4a²))^{1/2}` of the previous term.
pub fn quadrilateral_recursion(a2: f64, n_steps: usize) -> Result<Vec<f64>> {
    if !(a2 >= 1.0 && a2.is_finite()) {
        return Err(Error::Domain(format!("a unit-area rhombus has side at least 1, got {a2}")));
    }
    let mut out = Vec::with_capacity(n_steps);
    let mut a = a2;
    for k in 0..n_steps {
        // index k + 3: odd indices copy, even indices recurse
        if k % 2 == 1 {
            let a2 = a * a;
            let q = a2 * a2 + 1.0;
            a = (a2 / q + q / (4.0 * a2)).sqrt();
        }
        out.push(a);
    }
    Ok(out)
}

/// One polygon of a symmetrization run.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetrizationStep {
    pub step: usize,
    pub polygon: Polygon,
    pub energy: Estimate,
    /// Unit vector parallel to the chords that were centred; absent for the input.
    pub direction: Option<Vec2>,
}

fn side_direction(p: &Polygon, i: usize) -> Vec2 {
    p.vertex(i as isize + 1) - p.vertex(i as isize)
}

fn normalized_area(p: &Polygon) -> Polygon {
    p.scaled_about(p.centroid(), (1.0 / p.area()).sqrt())
}

/// The side of a triangle to use next: the lower-indexed member of the pair of sides closest in length.
pub(crate) fn triangle_leg(p: &Polygon) -> usize {
    let l = [p.side_length(0), p.side_length(1), p.side_length(2)];
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let (a, _) = pairs
        .iter()
        .copied()
        .min_by(|x, y| (l[x.0] - l[x.1]).abs().total_cmp(&(l[y.0] - l[y.1]).abs()))
        .expect("three pairs");
    a
}

/// Diagonal of a quadrilateral lying inside it: `(0, 2)` unless the polygon is
/// concave at vertex 1 or 3.
fn interior_diagonal(p: &Polygon) -> (usize, usize) {
    let v = p.vertices();
    let e = v[2] - v[0];
    if e.cross(v[1] - v[0]) < 0.0 && e.cross(v[3] - v[0]) > 0.0 {
        (0, 2)
    } else {
        (1, 3)
    }
}

/// Direction of the next symmetrization at `step ≥ 1`.
fn next_direction(p: &Polygon, step: usize, previous: Option<Vec2>) -> Vec2 {
    let v = p.vertices();
    if p.len() == 3 {
        return side_direction(p, if step == 1 { 0 } else { triangle_leg(p) });
    }
    match step {
        1 => {
            let (a, c) = interior_diagonal(p);
            v[c] - v[a]
        }
        // the kite's axis is orthogonal to the chords of the previous step
        2 => previous.expect("step 1 ran").perp(),
        s if s % 2 == 1 => side_direction(p, 0),
        _ => v[2] - v[0],
    }
}

/// Rescales `poly` to unit area and applies `steps` Steiner symmetrizations.
///
/// Triangles are first symmetrized along side 0, then repeatedly along one of
/// the two equal sides. Quadrilaterals go through a kite (interior diagonal),
/// a rhombus (kite axis), then alternately a rectangle (along a side) and a
/// rhombus (along a diagonal). The returned list starts with the rescaled input.
pub fn symmetrization_run(poly: &Polygon, k: &Kernel, steps: usize, q: &QuadratureSpec) -> Result<Vec<SymmetrizationStep>> {
    match poly.len() {
        3 => {}
        4 => {}
        n => {
            return Err(Error::Unsupported(format!(
                "symmetrization chains exist for triangles and quadrilaterals only, got {n} vertices"
            )))
        }
    }
    let mut current = normalized_area(poly);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(SymmetrizationStep { step: 0, energy: energy(&current, k, q)?, polygon: current.clone(), direction: None });
    let mut previous = None;
    for step in 1..=steps {
        let dir = next_direction(&current, step, previous).normalized();
        let next = symmetrize_chords(&current, dir)?;
        if next.len() != poly.len() {
            return Err(Error::Domain(format!(
                "step {step} produced {} vertices from {}; the input is degenerate for this chain",
                next.len(),
                poly.len()
            )));
        }
        current = next;
        previous = Some(dir);
        out.push(SymmetrizationStep { step, energy: energy(&current, k, q)?, polygon: current.clone(), direction: Some(dir) });
    }
    Ok(out)
}
