//! Composite Gauss-Legendre quadrature on panels pinned at break points.
//!
//! Every segment between consecutive break points is cut into equal panels
//! and each panel gets a fixed-order Gauss-Legendre rule. Nodes are strictly
//! interior to panels, so the integrand is never sampled at a break point.
//! Refinement doubles the panel count and compares successive levels.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Points per panel.
pub const ORDER: usize = 20;

/// Panel doublings allowed before giving up.
pub const MAX_DOUBLINGS: u32 = 12;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// The shared rule of order [`ORDER`].
    pub fn shared() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(ORDER))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]` with one panel.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Abscissae and weights of the composite rule: each segment between
/// consecutive `breaks` (sorted, increasing) is split into `panels` panels.
pub fn composite_points(breaks: &[f64], panels: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::shared();
    let mut out = Vec::with_capacity(breaks.len().saturating_sub(1) * panels * ORDER);
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                out.push((mid + half * x, w * half));
            }
        }
    }
    out
}

/// Runs `level(panels)` for `initial`, `2*initial`, ... until two successive
/// levels are within `tol` of each other under `distance`. Returns the finer
/// level and the last distance.
pub fn refine<T>(
    initial: usize,
    tol: f64,
    max_doublings: u32,
    mut level: impl FnMut(usize) -> T,
    distance: impl Fn(&T, &T) -> f64,
) -> Result<(T, f64)> {
    let mut panels = initial.max(1);
    let mut coarse = level(panels);
    let mut estimate = f64::INFINITY;
    for _ in 0..max_doublings {
        panels *= 2;
        let fine = level(panels);
        estimate = distance(&coarse, &fine);
        if estimate.is_nan() {
            break;
        }
        if estimate <= tol {
            return Ok((fine, estimate));
        }
        coarse = fine;
    }
    Err(Error::QuadratureFailure {
        tol,
        estimate,
        doublings: max_doublings,
    })
}

/// Scalar integral of `f` over the segments defined by `breaks`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    initial_panels: usize,
    tol: f64,
) -> Result<(f64, f64)> {
    refine(
        initial_panels,
        tol,
        MAX_DOUBLINGS,
        |panels| {
            composite_points(breaks, panels)
                .into_iter()
                .map(|(x, w)| w * f(x))
                .sum::<f64>()
        },
        |a, b| {
            let d = (a - b).abs();
            // scale-aware: tolerance is relative once the integral exceeds one
            d / b.abs().max(1.0)
        },
    )
}
