//! Interaction kernels `K(r)`, their derivatives and radial primitives.
//!
//! Besides `M(R) = ∫₀ᴿ K(r) r dr` the quadrature also uses the second
//! primitive `N(R) = ∫₀ᴿ M(r) dr = ∫₀ᴿ K(r) r (R − r) dr`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Serializable kernel description.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Riesz { alpha: f64 },
    RegularizedRiesz { alpha: f64, delta: f64 },
}

#[derive(Clone)]
pub struct Kernel {
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Riesz { alpha: f64 },
    Regularized { alpha: f64, delta: f64 },
    Custom { k: ScalarFn, dk: ScalarFn, m: Option<ScalarFn> },
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Riesz { alpha } => write!(f, "Riesz(alpha = {alpha})"),
            Kind::Regularized { alpha, delta } => {
                write!(f, "RegularizedRiesz(alpha = {alpha}, delta = {delta})")
            }
            Kind::Custom { m, .. } => {
                write!(f, "Custom(primitive = {})", if m.is_some() { "given" } else { "numeric" })
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Riesz exponent must lie in (0, 2), got {alpha}")))
    }
}

const PRIMITIVE_TOL: f64 = 1e-12;
/// Below this distance from 1 the exponent `1 − α` is expanded in series.
const NEAR_LOG: f64 = 1e-4;

impl Kernel {
    /// `K(r) = r^(−α)`.
    pub fn riesz(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Kernel { kind: Kind::Riesz { alpha } })
    }

    /// `K(r) = (r + δ)^(−α)`.
    pub fn regularized_riesz(alpha: f64, delta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("regularization must be positive, got {delta}")));
        }
        Ok(Kernel { kind: Kind::Regularized { alpha, delta } })
    }

    /// User kernel with derivative and optional primitive `M`.
    ///
    /// Positivity and strict decrease are checked on 64 log-spaced radii in
    /// `(1e-8, 1e3)`; `M(1)` must be finite.
    pub fn custom(k: ScalarFn, dk: ScalarFn, m: Option<ScalarFn>) -> Result<Self> {
        let kernel = Kernel { kind: Kind::Custom { k: k.clone(), dk: dk.clone(), m } };
        let grid: Vec<f64> = (0..64).map(|j| 10f64.powf(-8.0 + 11.0 * j as f64 / 63.0)).collect();
        let mut prev = f64::INFINITY;
        for &r in &grid {
            let (kv, dv) = (k(r), dk(r));
            if !(kv.is_finite() && kv >= 0.0) {
                return Err(Error::InvalidArgument(format!("kernel is not finite and nonnegative at r = {r:e}")));
            }
            if !(dv < 0.0) {
                return Err(Error::InvalidArgument(format!("kernel derivative is not negative at r = {r:e}")));
            }
            if !(kv < prev) {
                return Err(Error::InvalidArgument(format!("kernel is not strictly decreasing near r = {r:e}")));
            }
            prev = kv;
        }
        let m1 = kernel.radial_primitive(1.0)?;
        if !m1.is_finite() {
            return Err(Error::InvalidArgument("radial primitive M(1) is not finite".into()));
        }
        Ok(kernel)
    }

    pub fn from_spec(spec: KernelSpec) -> Result<Self> {
        match spec {
            KernelSpec::Riesz { alpha } => Kernel::riesz(alpha),
            KernelSpec::RegularizedRiesz { alpha, delta } => Kernel::regularized_riesz(alpha, delta),
        }
    }

    /// Serializable description; `None` for custom kernels.
    pub fn spec(&self) -> Option<KernelSpec> {
        match self.kind {
            Kind::Riesz { alpha } => Some(KernelSpec::Riesz { alpha }),
            Kind::Regularized { alpha, delta } => Some(KernelSpec::RegularizedRiesz { alpha, delta }),
            Kind::Custom { .. } => None,
        }
    }

    /// Degree of homogeneity `−α` for pure Riesz kernels.
    pub fn riesz_exponent(&self) -> Option<f64> {
        match self.kind {
            Kind::Riesz { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("kernel evaluated at r = {r}; needs r > 0")));
        }
        Ok(self.k(r))
    }

    pub fn eval_deriv(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("kernel derivative evaluated at r = {r}; needs r > 0")));
        }
        Ok(self.dk(r))
    }

    /// Evaluation on `[0, ∞)`; only regularized kernels are finite at 0.
    pub fn eval_extended(&self, r: f64) -> Result<f64> {
        match self.kind {
            Kind::Regularized { .. } if r == 0.0 => Ok(self.k(0.0)),
            _ => self.eval(r),
        }
    }

    /// `M(R) = ∫₀ᴿ K(r) r dr`.
    pub fn radial_primitive(&self, big_r: f64) -> Result<f64> {
        if !(big_r >= 0.0 && big_r.is_finite()) {
            return Err(Error::Domain(format!("radial primitive needs a finite R >= 0, got {big_r}")));
        }
        Ok(self.m(big_r))
    }

    /// `N(R) = ∫₀ᴿ M(r) dr`.
    pub fn second_primitive(&self, big_r: f64) -> Result<f64> {
        if !(big_r >= 0.0 && big_r.is_finite()) {
            return Err(Error::Domain(format!("second primitive needs a finite R >= 0, got {big_r}")));
        }
        Ok(self.n(big_r))
    }

    #[inline]
    pub(crate) fn k(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::Riesz { alpha } => r.powf(-alpha),
            Kind::Regularized { alpha, delta } => (r + delta).powf(-alpha),
            Kind::Custom { k, .. } => k(r),
        }
    }

    #[inline]
    pub(crate) fn dk(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::Riesz { alpha } => -alpha * r.powf(-alpha - 1.0),
            Kind::Regularized { alpha, delta } => -alpha * (r + delta).powf(-alpha - 1.0),
            Kind::Custom { dk, .. } => dk(r),
        }
    }

    #[inline]
    pub(crate) fn m(&self, big_r: f64) -> f64 {
        match &self.kind {
            Kind::Riesz { alpha } => {
                let b = 2.0 - alpha;
                big_r.powf(b) / b
            }
            Kind::Regularized { alpha, delta } => regularized_m(*alpha, *delta, big_r),
            Kind::Custom { k, m, .. } => match m {
                Some(m) => m(big_r),
                None => tanh_sinh(|r| k(r) * r, big_r, PRIMITIVE_TOL),
            },
        }
    }

    #[inline]
    pub(crate) fn n(&self, big_r: f64) -> f64 {
        match &self.kind {
            Kind::Riesz { alpha } => {
                let b = 2.0 - alpha;
                big_r.powf(b + 1.0) / (b * (b + 1.0))
            }
            Kind::Regularized { alpha, delta } => regularized_n(*alpha, *delta, big_r),
            Kind::Custom { k, .. } => tanh_sinh(|r| k(r) * r * (big_r - r), big_r, PRIMITIVE_TOL),
        }
    }
}

/// `(u^ε − 1)/ε` at `u = e^L`, continuous through ε = 0.
#[inline]
fn pow_quotient(eps: f64, l: f64) -> f64 {
    if eps == 0.0 {
        l
    } else {
        (eps * l).exp_m1() / eps
    }
}

fn regularized_m(alpha: f64, delta: f64, big_r: f64) -> f64 {
    if big_r == 0.0 {
        return 0.0;
    }
    let b = 2.0 - alpha;
    let l = (big_r / delta).ln_1p();
    delta.powf(b) * (pow_quotient(b, l) - pow_quotient(1.0 - alpha, l))
}

fn regularized_n(alpha: f64, delta: f64, big_r: f64) -> f64 {
    if big_r == 0.0 {
        return 0.0;
    }
    let b = 2.0 - alpha;
    let eps = 1.0 - alpha;
    let l = (big_r / delta).ln_1p();
    let u_minus_1 = big_r / delta;
    let u = 1.0 + u_minus_1;
    let first = ((b + 1.0) * l).exp_m1() / (b + 1.0) - u_minus_1;
    // ((u^b − 1)/b − (u − 1))/ε, expanded in ε near the logarithmic case
    let second = if eps.abs() >= NEAR_LOG {
        ((b * l).exp_m1() / b - u_minus_1) / eps
    } else {
        let a0 = u_minus_1;
        let a1 = u * l;
        let a2 = a1 * l;
        let a3 = a2 * l;
        let g1 = a1 - a0;
        let g2 = 0.5 * a2 - a1 + a0;
        let g3 = a3 / 6.0 - 0.5 * a2 + a1 - a0;
        g1 + eps * (g2 + eps * g3)
    };
    delta.powf(3.0 - alpha) * (first / b - second)
}

/// `∫₀ᴸ f` by double-exponential quadrature; `f` may be singular at 0.
pub(crate) fn tanh_sinh<F: Fn(f64) -> f64>(f: F, len: f64, rel_tol: f64) -> f64 {
    if len == 0.0 {
        return 0.0;
    }
    const T_MAX: f64 = 6.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let term = |t: f64| -> f64 {
        let u = half_pi * t.sinh();
        let x = len / (1.0 + (-2.0 * u).exp());
        if !(x > 0.0) {
            return 0.0;
        }
        let w = len * half_pi * t.cosh() / (2.0 * u.cosh().powi(2));
        if !(w > 0.0) {
            return 0.0;
        }
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut k = 1;
    while (k as f64) * h <= T_MAX {
        sum += term(k as f64 * h) + term(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h;
    for _level in 0..9 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= T_MAX {
            sum += term(k as f64 * h) + term(-(k as f64) * h);
            k += 2;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= rel_tol * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluations() {
        let k = Kernel::riesz(1.0).unwrap();
        assert_eq!(k.eval(2.0).unwrap(), 0.5);
        assert!(k.eval(0.0).is_err());
        assert!(k.eval_extended(0.0).is_err());
        let r = Kernel::regularized_riesz(1.0, 0.1).unwrap();
        assert!(r.eval(0.0).is_err());
        assert!((r.eval_extended(0.0).unwrap() - 10.0).abs() < 1e-12);
        let h = Kernel::riesz(0.5).unwrap();
        assert_eq!(h.eval_deriv(1.0).unwrap(), -0.5);
    }

    #[test]
    fn constructor_rejections() {
        assert!(Kernel::riesz(2.0).is_err());
        assert!(Kernel::riesz(0.0).is_err());
        assert!(Kernel::regularized_riesz(1.0, 0.0).is_err());
        let flat: ScalarFn = Arc::new(|_| 1.0);
        let zero: ScalarFn = Arc::new(|_| 0.0);
        assert!(Kernel::custom(flat, zero, None).is_err());
    }

    #[test]
    fn primitives_closed_forms() {
        let k = Kernel::riesz(1.0).unwrap();
        assert!((k.radial_primitive(1.0).unwrap() - 1.0).abs() < 1e-15);
        let h = Kernel::riesz(0.5).unwrap();
        assert!((h.radial_primitive(4.0).unwrap() - 16.0 / 3.0).abs() < 1e-13);
        let r = Kernel::regularized_riesz(1.0, 1.0).unwrap();
        assert!((r.radial_primitive(1.0).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!(k.radial_primitive(-1.0).is_err());
    }

    fn numeric(alpha: f64, delta: f64) -> Kernel {
        let k: ScalarFn = Arc::new(move |r: f64| (r + delta).powf(-alpha));
        let dk: ScalarFn = Arc::new(move |r: f64| -alpha * (r + delta).powf(-alpha - 1.0));
        Kernel::custom(k, dk, None).unwrap()
    }

    #[test]
    fn regularized_primitives_match_numeric() {
        for &alpha in &[0.3, 0.99995, 1.0, 1.00003, 1.5, 1.9] {
            for &delta in &[0.01, 0.05, 1.0] {
                let exact = Kernel::regularized_riesz(alpha, delta).unwrap();
                let num = numeric(alpha, delta);
                for &r in &[1e-4, 0.03, 0.7, 5.0] {
                    let (a, b) = (exact.m(r), num.m(r));
                    assert!((a - b).abs() <= 1e-11 * b.abs(), "M alpha={alpha} delta={delta} r={r}: {a} {b}");
                    // absolute floor: cancellation below R ≪ δ is far under any integral's scale
                    let floor = 1e-15 * exact.n(delta);
                    let (a, b) = (exact.n(r), num.n(r));
                    assert!((a - b).abs() <= 1e-10 * b.abs() + floor, "N alpha={alpha} delta={delta} r={r}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn custom_riesz_matches_closed_form() {
        for &alpha in &[0.5, 1.0, 1.5, 1.9] {
            let exact = Kernel::riesz(alpha).unwrap();
            let k: ScalarFn = Arc::new(move |r: f64| r.powf(-alpha));
            let dk: ScalarFn = Arc::new(move |r: f64| -alpha * r.powf(-alpha - 1.0));
            let num = Kernel::custom(k, dk, None).unwrap();
            for &r in &[0.01, 1.0, 7.5] {
                let (a, b) = (exact.m(r), num.m(r));
                assert!((a - b).abs() <= 1e-10 * a, "alpha={alpha} r={r}: {a} {b}");
                let (a, b) = (exact.n(r), num.n(r));
                assert!((a - b).abs() <= 1e-10 * a, "alpha={alpha} r={r}: {a} {b}");
            }
        }
    }

    #[test]
    fn spec_round_trip() {
        let s: KernelSpec = serde_json::from_str(r#"{"type":"regularized_riesz","alpha":0.5,"delta":0.01}"#).unwrap();
        assert_eq!(s, KernelSpec::RegularizedRiesz { alpha: 0.5, delta: 0.01 });
        let k = Kernel::from_spec(s).unwrap();
        assert_eq!(k.spec(), Some(s));
        let s: KernelSpec = serde_json::from_str(r#"{"type":"riesz","alpha":0.5}"#).unwrap();
        assert_eq!(s, KernelSpec::Riesz { alpha: 0.5 });
        assert!(Kernel::from_spec(KernelSpec::Riesz { alpha: 3.0 }).is_err());
    }
}
