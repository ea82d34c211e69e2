//! Reference values computed without any library quadrature.

use std::f64::consts::PI;

use polyriesz::geom::{Polygon, Vec2};

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn integrate(rule: &[(f64, f64)], a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|j| {
            let (lo, hi) = (a + j as f64 * h, a + (j + 1) as f64 * h);
            let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            rule.iter().map(|(x, w)| w * f(m + r * x)).sum::<f64>() * r
        })
        .sum()
}

/// Riesz potential `∫₀^{2π} R(φ)^{2−α}/(2−α) dφ` at a point `x` from which `p` is star-shaped,
/// `R(φ)` the distance to the boundary along the ray.
pub fn polar_potential(p: &Polygon, alpha: f64, x: Vec2) -> f64 {
    let rule = gauss_legendre(24);
    let v = p.vertices();
    let n = v.len();
    let mut total = 0.0;
    for j in 0..n {
        let (a, b) = (v[j] - x, v[(j + 1) % n] - x);
        let (ta, mut tb) = (a.y.atan2(a.x), b.y.atan2(b.x));
        while tb < ta {
            tb += 2.0 * PI;
        }
        let d = (b - a).normalized();
        let nrm = Vec2::new(d.y, -d.x);
        let h = a.dot(nrm);
        let phi0 = nrm.y.atan2(nrm.x);
        total += integrate(&rule, ta, tb, 8, |t| {
            let r = h / (t - phi0).cos();
            r.powf(2.0 - alpha) / (2.0 - alpha)
        });
    }
    total
}

/// Length of the intersection of the line `{y : y·nrm = c}` with a convex polygon.
fn chord(v: &[Vec2], dir: Vec2, nrm: Vec2, c: f64) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..v.len() {
        let (a, b) = (v[j], v[(j + 1) % v.len()]);
        let (da, db) = (a.dot(nrm) - c, b.dot(nrm) - c);
        let mut add = |p: Vec2| {
            lo = lo.min(p.dot(dir));
            hi = hi.max(p.dot(dir));
        };
        if da == 0.0 {
            add(a);
        }
        if da * db < 0.0 {
            add(a + (b - a) * (da / (da - db)));
        }
    }
    if hi > lo {
        hi - lo
    } else {
        0.0
    }
}

/// Riesz energy of a convex polygon from the line representation
/// `E = ∫₀^π ∫ G(L(θ, c)) dc dθ`, `G(L) = 2L^{3−α}/((2−α)(3−α))`.
///
/// `L` is piecewise linear in `c`, so the inner integral is exact; the outer one
/// is split where two vertices have equal projection.
pub fn chord_energy(p: &Polygon, alpha: f64) -> f64 {
    assert!(p.is_convex());
    let v = p.vertices();
    let gamma = 3.0 - alpha;
    let mut breaks = vec![0.0, PI];
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let d = v[j] - v[i];
            breaks.push(d.y.atan2(d.x).rem_euclid(PI));
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let inner = |theta: f64| {
        let dir = Vec2::new(theta.cos(), theta.sin());
        let nrm = Vec2::new(-dir.y, dir.x);
        let mut cs: Vec<f64> = v.iter().map(|x| x.dot(nrm)).collect();
        cs.sort_by(f64::total_cmp);
        let ls: Vec<f64> = cs.iter().map(|&c| chord(v, dir, nrm, c)).collect();
        let mut s = 0.0;
        for k in 0..cs.len() - 1 {
            let dc = cs[k + 1] - cs[k];
            let (l0, l1) = (ls[k], ls[k + 1]);
            s += if (l1 - l0).abs() > 1e-12 * (l0 + l1) {
                dc * (l1.powf(gamma + 1.0) - l0.powf(gamma + 1.0)) / ((gamma + 1.0) * (l1 - l0))
            } else {
                dc * (0.5 * (l0 + l1)).powf(gamma)
            };
        }
        s
    };
    let rule = gauss_legendre(30);
    let total: f64 = breaks.windows(2).map(|w| integrate(&rule, w[0], w[1], 2, inner)).sum();
    2.0 * total / ((2.0 - alpha) * (3.0 - alpha))
}
