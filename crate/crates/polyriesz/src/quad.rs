//! Gauss–Legendre rules, vector-valued adaptive bisection, pairwise sums.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

pub(crate) struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }
}

/// Cached `n`-point rule on [−1, 1].
pub(crate) fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n).or_insert_with(|| Box::leak(Box::new(GaussLegendre::compute(n))))
}

/// Sum in a fixed binary tree so the result does not depend on scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct VecEstimate<const K: usize> {
    pub value: [f64; K],
    pub error: [f64; K],
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Panel<const K: usize> {
    value: [f64; K],
    abs: [f64; K],
    inner: [f64; K],
}

pub(crate) struct Adaptive {
    pub rule: &'static GaussLegendre,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Adaptive {
    fn panel<const K: usize, F>(&self, f: &mut F, a: f64, b: f64) -> Panel<K>
    where
        F: FnMut(f64) -> ([f64; K], [f64; K]),
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut p = Panel { value: [0.0; K], abs: [0.0; K], inner: [0.0; K] };
        for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let (v, e) = f(mid + half * x);
            for c in 0..K {
                p.value[c] += w * v[c];
                p.abs[c] += w * v[c].abs();
                p.inner[c] += w * e[c];
            }
        }
        for c in 0..K {
            p.value[c] *= half;
            p.abs[c] *= half.abs();
            p.inner[c] *= half.abs();
        }
        p
    }

    /// `∫ₐᵇ f` componentwise. `f` returns values and the error bounds of any
    /// nested quadrature; those are integrated into the returned bounds.
    pub fn integrate<const K: usize, F>(&self, mut f: F, a: f64, b: f64) -> VecEstimate<K>
    where
        F: FnMut(f64) -> ([f64; K], [f64; K]),
    {
        let whole = self.panel(&mut f, a, b);
        let mut out = VecEstimate { value: [0.0; K], error: [0.0; K], converged: true };
        self.recurse(&mut f, a, b, whole, whole.abs, b - a, 0, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<const K: usize, F>(
        &self,
        f: &mut F,
        a: f64,
        b: f64,
        whole: Panel<K>,
        global_abs: [f64; K],
        width: f64,
        depth: u32,
        out: &mut VecEstimate<K>,
    ) where
        F: FnMut(f64) -> ([f64; K], [f64; K]),
    {
        let m = 0.5 * (a + b);
        let left = self.panel(f, a, m);
        let right = self.panel(f, m, b);
        let frac = ((b - a) / width).abs();
        let mut ok = true;
        let mut diff = [0.0; K];
        for c in 0..K {
            let fine = left.value[c] + right.value[c];
            diff[c] = (fine - whole.value[c]).abs();
            let local = left.abs[c] + right.abs[c];
            let budget = self.rel_tol * local.max(global_abs[c] * frac);
            if diff[c] > budget && diff[c] > 8.0 * f64::EPSILON * local {
                ok = false;
            }
        }
        if ok || depth >= self.max_depth {
            for c in 0..K {
                let local = left.abs[c] + right.abs[c];
                out.value[c] += left.value[c] + right.value[c];
                out.error[c] += diff[c] + left.inner[c] + right.inner[c] + 4.0 * f64::EPSILON * local;
            }
            out.converged &= ok;
            return;
        }
        self.recurse(f, a, m, left, global_abs, width, depth + 1, out);
        self.recurse(f, m, b, right, global_abs, width, depth + 1, out);
    }
}
