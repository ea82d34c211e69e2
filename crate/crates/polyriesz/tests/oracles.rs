mod common;

use common::oracle::{chord_energy, gauss_legendre, polar_potential};
use polyriesz::energy::energy;
use polyriesz::geom::{regular_ngon, Polygon, Vec2};
use polyriesz::kernel::Kernel;
use polyriesz::potential::{potential_at, QuadratureSpec};
use polyriesz::stationarity::lagrange_sigma;
use rand::Rng;

// Frozen values of an independent mpmath evaluation at 30 digits.
const CENTRE_POTENTIAL_SQUARE_ALPHA_1: f64 = 3.5254943480781721;
const ENERGY_SQUARE: [(f64, f64); 3] = [(0.5, 1.5844091715698881), (1.0, 2.9732095982473787), (1.5, 8.0556092819183898)];
const SIGMA_TRIANGLE_ALPHA_1: f64 = 6.350803066585786764;

fn unit_square() -> Polygon {
    Polygon::from_coords(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
}

fn random_interior_point(rng: &mut impl Rng, p: &Polygon) -> Vec2 {
    let v = p.vertices();
    let mut w: Vec<f64> = (0..v.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    v.iter().zip(&w).fold(Vec2::ZERO, |a, (&x, &wi)| a + x * wi)
}

#[test]
fn gauss_legendre_oracle_rule_is_exact_on_polynomials() {
    let r = gauss_legendre(12);
    let m: f64 = r.iter().map(|(x, w)| w * x.powi(22)).sum();
    assert!((m - 2.0 / 23.0).abs() < 1e-15);
}

#[test]
fn oracles_reproduce_the_frozen_constants() {
    let sq = unit_square();
    let v = polar_potential(&sq, 1.0, Vec2::new(0.5, 0.5));
    assert!((v - CENTRE_POTENTIAL_SQUARE_ALPHA_1).abs() < 1e-13, "{v}");
    for (alpha, e) in ENERGY_SQUARE {
        let c = chord_energy(&sq, alpha);
        assert!((c - e).abs() < 1e-12 * e, "alpha {alpha}: {c} vs {e}");
    }
}

#[test]
fn potential_matches_the_polar_oracle() {
    let mut rng = common::rng(11);
    let q = QuadratureSpec::default();
    for case in 0..20 {
        let n = rng.gen_range(3..8);
        let p = common::convex(&mut rng, n);
        let alpha = [0.5, 1.0, 1.5][case % 3];
        let x = random_interior_point(&mut rng, &p);
        let got = potential_at(&p, &Kernel::riesz(alpha).unwrap(), x, &q).unwrap();
        let want = polar_potential(&p, alpha, x);
        assert!((got.value - want).abs() <= 1e-9 * want, "case {case}: {got:?} vs {want}");
    }
}

#[test]
fn centre_of_square_golden_value() {
    let v = potential_at(&unit_square(), &Kernel::riesz(1.0).unwrap(), Vec2::new(0.5, 0.5), &QuadratureSpec::default())
        .unwrap();
    assert!((v.value - CENTRE_POTENTIAL_SQUARE_ALPHA_1).abs() < 1e-10, "{v:?}");
}

#[test]
fn square_energy_golden_values() {
    for (alpha, want) in ENERGY_SQUARE {
        let e = energy(&unit_square(), &Kernel::riesz(alpha).unwrap(), &QuadratureSpec::default()).unwrap();
        assert!((e.value - want).abs() < 1e-8 * want, "alpha {alpha}: {e:?}");
        assert!((e.value - want).abs() <= e.error.max(1e-14 * want));
    }
}

#[test]
fn energy_matches_the_chord_oracle() {
    let mut rng = common::rng(12);
    let q = QuadratureSpec::default();
    for case in 0..10 {
        let n = rng.gen_range(3..7);
        let p = common::convex(&mut rng, n);
        for alpha in [0.5, 1.0, 1.5] {
            let got = energy(&p, &Kernel::riesz(alpha).unwrap(), &q).unwrap();
            let want = chord_energy(&p, alpha);
            assert!((got.value - want).abs() <= 1e-9 * want, "case {case} alpha {alpha}: {got:?} vs {want}");
        }
    }
}

#[test]
fn triangle_sigma_golden_value() {
    let t = Polygon::from_coords(&[[0.0, 0.0], [2.0, 0.3], [0.7, 1.4]]).unwrap();
    let s = lagrange_sigma(&t, &Kernel::riesz(1.0).unwrap(), &QuadratureSpec::default()).unwrap();
    assert!((s.value - SIGMA_TRIANGLE_ALPHA_1).abs() < 1e-9, "{s:?}");
}

#[test]
fn riesz_scaling_laws() {
    let mut rng = common::rng(13);
    let q = QuadratureSpec::default();
    let p = common::convex(&mut rng, 5);
    let x = random_interior_point(&mut rng, &p);
    for alpha in [0.5, 1.0, 1.5] {
        let k = Kernel::riesz(alpha).unwrap();
        let e = energy(&p, &k, &q).unwrap().value;
        let v = potential_at(&p, &k, x, &q).unwrap().value;
        for lambda in [0.5, 2.0, 3.0] {
            let scaled = Polygon::new(p.vertices().iter().map(|&y| y * lambda).collect()).unwrap();
            let es = energy(&scaled, &k, &q).unwrap().value;
            assert!((es / e / lambda.powf(4.0 - alpha) - 1.0).abs() < 1e-7, "alpha {alpha} lambda {lambda}");
            let vs = potential_at(&scaled, &k, x * lambda, &q).unwrap().value;
            assert!((vs / v / lambda.powf(2.0 - alpha) - 1.0).abs() < 1e-8, "alpha {alpha} lambda {lambda}");
        }
    }
}

#[test]
fn potential_is_bounded_by_the_unit_ball_split() {
    let mut rng = common::rng(14);
    let q = QuadratureSpec::default();
    for alpha in [0.5, 1.0, 1.5] {
        let k = Kernel::riesz(alpha).unwrap();
        let bound = 2.0 * std::f64::consts::PI * k.radial_primitive(1.0).unwrap() + k.eval(1.0).unwrap() * 1.0;
        for _ in 0..5 {
            let p = common::convex(&mut rng, 4);
            let x = random_interior_point(&mut rng, &p);
            assert!(potential_at(&p, &k, x, &q).unwrap().value <= bound);
        }
    }
}

#[test]
fn disk_proxy_dominates() {
    let k = Kernel::riesz(1.0).unwrap();
    // short rules keep the 256-gon cheap; its error bound stays far below the gaps tested
    let q = QuadratureSpec { angular_nodes: 8, line_nodes: 8, ..QuadratureSpec::with_tolerance(1e-7) };
    let disk = energy(&regular_ngon(256, 1.0).unwrap(), &k, &q).unwrap();
    for n in [3, 4, 5, 8] {
        let e = energy(&regular_ngon(n, 1.0).unwrap(), &k, &q).unwrap();
        assert!(e.value <= disk.value + disk.error + e.error, "n = {n}");
    }
}
