//! Seeded generators of test polygons.
#![allow(dead_code)]

pub mod oracle;

use std::f64::consts::PI;

use polyriesz::geom::{Polygon, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_area(p: &Polygon) -> Polygon {
    let s = (1.0 / p.area()).sqrt();
    let c = p.centroid();
    Polygon::new(p.vertices().iter().map(|&v| c + (v - c) * s).collect()).unwrap()
}

fn min_angle(p: &Polygon) -> f64 {
    p.interior_angles().into_iter().fold(PI, f64::min)
}

/// Convex polygon with vertices on a random ellipse, angles at least `0.25` rad, area 1.
pub fn convex(rng: &mut ChaCha8Rng, n: usize) -> Polygon {
    loop {
        let (a, b) = (rng.gen_range(0.6..1.4), rng.gen_range(0.6..1.4));
        let rot = rng.gen_range(0.0..PI);
        let slot = 2.0 * PI / n as f64;
        let o = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let v: Vec<Vec2> = (0..n)
            .map(|k| {
                let t = slot * (k as f64 + rng.gen_range(-0.3..0.3));
                o + Vec2::new(a * t.cos(), b * t.sin()).rotated(rot)
            })
            .collect();
        if let Ok(p) = Polygon::new(v) {
            if p.is_convex() && min_angle(&p) > 0.25 {
                return unit_area(&p);
            }
        }
    }
}

/// Triangle of area 1 with all angles above `0.2` rad and sides pairwise differing by at least 2%.
pub fn scalene_triangle(rng: &mut ChaCha8Rng) -> Polygon {
    loop {
        let v: Vec<Vec2> = (0..3).map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let Ok((p, _)) = Polygon::new_any_orientation(v) else { continue };
        let l = [p.side_length(0), p.side_length(1), p.side_length(2)];
        let distinct = (0..3).all(|i| (l[i] - l[(i + 1) % 3]).abs() > 0.02 * l[i]);
        if distinct && min_angle(&p) > 0.2 {
            return unit_area(&p);
        }
    }
}

/// Rhombus of side `a` and acute angle `phi`, rotated and translated.
pub fn rhombus(rng: &mut ChaCha8Rng) -> Polygon {
    let phi: f64 = rng.gen_range(0.5..1.35);
    let rot = rng.gen_range(0.0..2.0 * PI);
    let u = Vec2::new(1.0, 0.0).rotated(rot);
    let w = Vec2::new(phi.cos(), phi.sin()).rotated(rot);
    let o = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    unit_area(&Polygon::new(vec![o, o + u, o + u + w, o + w]).unwrap())
}

/// Rectangle with aspect ratio in `[1.2, 3]`, rotated and translated.
pub fn rectangle(rng: &mut ChaCha8Rng) -> Polygon {
    let aspect = rng.gen_range(1.2..3.0);
    let rot = rng.gen_range(0.0..2.0 * PI);
    let u = Vec2::new(aspect, 0.0).rotated(rot);
    let w = Vec2::new(0.0, 1.0).rotated(rot);
    let o = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    unit_area(&Polygon::new(vec![o, o + u, o + u + w, o + w]).unwrap())
}
