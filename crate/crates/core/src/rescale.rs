//! Affine transport between a physical interval `[a, b]` and the canonical
//! circle `[-pi, pi]`, for points, filter widths and functions.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::classify::{classify_nodes, ClassificationReport};
use crate::error::{Error, Result};
use crate::function::{EvaluatorFunction, SingularKind, SingularPoint};
use crate::grid::nodes;
use crate::realfilter::{integrate_window, Windowed, DEFAULT_KERNEL_TOL};

/// `theta = 2 pi (x - a) / (b - a) - pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalMap {
    a: f64,
    b: f64,
}

impl IntervalMap {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::domain(format!("interval [{a}, {b}] must be finite with b > a")));
        }
        Ok(IntervalMap { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn to_canonical(&self, x: f64) -> Result<f64> {
        if !(x >= self.a && x <= self.b) {
            return Err(Error::OutOfDomain(x, self.a, self.b));
        }
        Ok(2.0 * PI * (x - self.a) / (self.b - self.a) - PI)
    }

    pub fn from_canonical(&self, theta: f64) -> Result<f64> {
        if !(-PI..=PI).contains(&theta) {
            return Err(Error::OutOfDomain(theta, -PI, PI));
        }
        Ok(self.physical_unchecked(theta))
    }

    pub(crate) fn physical_unchecked(&self, theta: f64) -> f64 {
        (self.b - self.a) * theta / (2.0 * PI) + 0.5 * (self.b + self.a)
    }

    /// Physical half-width corresponding to a canonical one.
    pub fn epsilon_map(&self, eps: f64) -> Result<f64> {
        crate::realfilter::check_eps(eps)?;
        Ok(self.width() / (2.0 * PI) * eps)
    }

    /// Canonical half-width corresponding to a physical one.
    pub fn epsilon_to_canonical(&self, eps_physical: f64) -> Result<f64> {
        let eps = 2.0 * PI * eps_physical / self.width();
        crate::realfilter::check_eps(eps)?;
        Ok(eps)
    }
}

/// A real function on `[a, b]`, not periodic. Singular points are given in
/// physical coordinates; the interval ends act as boundary points.
#[derive(Clone)]
pub struct PhysicalFunction {
    map: IntervalMap,
    rule: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    singular: Vec<SingularPoint>,
}

impl std::fmt::Debug for PhysicalFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhysicalFunction")
            .field("map", &self.map)
            .field("singular", &self.singular)
            .finish()
    }
}

impl PhysicalFunction {
    pub fn new(map: IntervalMap, rule: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PhysicalFunction {
            map,
            rule: Arc::new(rule),
            singular: Vec::new(),
        }
    }

    /// Declares a singular point at physical coordinate `x`.
    pub fn with_singular(mut self, x: f64, kind: SingularKind) -> Self {
        self.singular.push(SingularPoint { theta: x, kind });
        self.singular.sort_by(|p, q| p.theta.total_cmp(&q.theta));
        self
    }

    pub fn map(&self) -> IntervalMap {
        self.map
    }

    pub fn raw(&self, x: f64) -> f64 {
        (self.rule)(x)
    }

    fn snap(&self) -> f64 {
        1e-12 * self.map.width()
    }

    /// Declared singular points plus the two interval ends.
    fn all_points(&self) -> impl Iterator<Item = SingularPoint> + '_ {
        [
            SingularPoint { theta: self.map.a, kind: SingularKind::Boundary },
            SingularPoint { theta: self.map.b, kind: SingularKind::Boundary },
        ]
        .into_iter()
        .chain(self.singular.iter().copied())
    }
}

impl Windowed for PhysicalFunction {
    fn point(&self, x: f64) -> Option<f64> {
        if !(x >= self.map.a && x <= self.map.b) {
            return None;
        }
        let v = self.raw(x);
        v.is_finite().then_some(v)
    }

    fn singular_kind_at(&self, x: f64) -> Option<SingularKind> {
        let snap = self.snap();
        self.all_points()
            .filter(|p| (p.theta - x).abs() <= snap)
            .map(|p| p.kind)
            .max_by_key(|k| match k {
                SingularKind::Integrable => 0,
                SingularKind::Boundary => 1,
                SingularKind::NonIntegrable => 2,
            })
    }

    fn clearance(&self, x: f64) -> Option<f64> {
        let snap = self.snap();
        self.all_points()
            .map(|p| (p.theta - x).abs())
            .filter(|&d| d > snap)
            .min_by(f64::total_cmp)
    }

    fn window_average(&self, x: f64, half: f64, tol: f64) -> Result<f64> {
        transport_filter_with_tol(self, x, half, tol)
    }

    fn max_half_width(&self) -> f64 {
        0.5 * self.map.width()
    }
}

/// `(1 / 2 eps) * integral of g over [x - eps, x + eps]`, the window lying
/// inside `[a, b]`.
pub fn transport_filter(g: &PhysicalFunction, x: f64, eps: f64) -> Result<f64> {
    transport_filter_with_tol(g, x, eps, DEFAULT_KERNEL_TOL)
}

pub fn transport_filter_with_tol(g: &PhysicalFunction, x: f64, eps: f64, tol: f64) -> Result<f64> {
    let map = g.map;
    if !(eps > 0.0 && eps <= 0.5 * map.width()) {
        return Err(Error::domain(format!(
            "physical half-width must lie in (0, {}], got {eps}",
            0.5 * map.width()
        )));
    }
    let (lo, hi) = (x - eps, x + eps);
    let slack = g.snap();
    if lo < map.a - slack || hi > map.b + slack {
        return Err(Error::UndefinedHere {
            theta: x,
            reason: format!("window [{lo}, {hi}] leaves the domain [{}, {}]", map.a, map.b),
        });
    }
    let mut breaks = vec![lo];
    for p in &g.singular {
        let inside = p.theta >= lo && p.theta <= hi;
        let interior = p.theta > lo && p.theta < hi;
        match p.kind {
            SingularKind::NonIntegrable if inside => {
                return Err(Error::UndefinedHere {
                    theta: x,
                    reason: format!("non-integrable singular point at {} lies in the window", p.theta),
                })
            }
            SingularKind::Boundary if interior => {
                return Err(Error::UndefinedHere {
                    theta: x,
                    reason: format!("the window crosses the boundary point {}", p.theta),
                })
            }
            SingularKind::Integrable if interior => breaks.push(p.theta),
            _ => {}
        }
    }
    breaks.push(hi);
    integrate_window(|t| g.raw(t), &breaks, x, eps, tol)
}

/// The canonical function `f(theta) = g(x(theta))`. The seam at `-pi` is a
/// boundary point so that no window mixes values near `a` with values near `b`.
pub fn pullback(g: &PhysicalFunction) -> EvaluatorFunction {
    let map = g.map;
    let inner = g.clone();
    let points = g
        .singular
        .iter()
        .filter_map(|p| {
            map.to_canonical(p.theta).ok().map(|theta| SingularPoint {
                theta: crate::function::wrap_angle(theta),
                kind: p.kind,
            })
        })
        .chain([SingularPoint {
            theta: -PI,
            kind: SingularKind::Boundary,
        }]);
    EvaluatorFunction::new(move |theta| inner.raw(map.physical_unchecked(theta)))
        .with_singular_points(points)
        .labelled("pullback")
}

/// Classifies `g` on the physical images of the canonical `n_grid` nodes,
/// with the canonical schedule mapped to physical widths.
pub fn classify_physical(
    g: &PhysicalFunction,
    n_grid: usize,
    schedule: &[f64],
    tol: f64,
) -> Result<ClassificationReport> {
    let map = g.map;
    let xs: Vec<f64> = nodes(n_grid)
        .into_iter()
        .map(|t| map.physical_unchecked(t))
        .collect();
    // the first node is a itself
    let mut xs = xs;
    xs[0] = map.a;
    let physical: Vec<f64> = schedule
        .iter()
        .map(|&e| map.epsilon_map(e))
        .collect::<Result<_>>()?;
    let spacing = map.width() / n_grid as f64;
    classify_nodes(g, &xs, spacing, &physical, tol, schedule)
}
