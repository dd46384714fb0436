//! The first-order low-pass filter `f_eps(t) = (1/2 eps) * integral of f over
//! [t - eps, t + eps]` in kernel (window) and multiplier (coefficient) form,
//! and the `eps -> 0` limits of filtered values and filtered derivatives.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolate::{extrapolate_to_zero, ErrorModel, Extrapolated};
use crate::function::{EvaluatorFunction, SingularKind};
use crate::grid::GridFunction;
use crate::quad;
use crate::spectrum::{CoefficientSequence, GeneratorTag};

/// Schedule used by the limit operations when none is given.
pub const DEFAULT_SCHEDULE: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
/// Quadrature tolerance for a single window average.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-12;

/// `sin(k eps) / (k eps)`, with a series for small arguments.
pub fn multiplier(k: usize, eps: f64) -> f64 {
    sinc(k as f64 * eps)
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= PI {
        Ok(())
    } else {
        Err(Error::domain(format!("epsilon must lie in (0, pi], got {eps}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMethod {
    Kernel,
    Multiplier,
}

/// A validated filter width together with the form used to apply it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    eps: f64,
    method: FilterMethod,
}

impl FilterSpec {
    pub fn new(eps: f64, method: FilterMethod) -> Result<Self> {
        check_eps(eps)?;
        Ok(FilterSpec { eps, method })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn method(&self) -> FilterMethod {
        self.method
    }
}

/// Multiplies every `a_k`, `b_k` by `sin(k eps)/(k eps)`; `a0` is untouched.
pub fn multiplier_filter(c: &CoefficientSequence, eps: f64) -> Result<CoefficientSequence> {
    check_eps(eps)?;
    let mut out = c.map_terms(c.a0(), |k, a, b| {
        let m = multiplier(k, eps);
        (a * m, b * m)
    });
    if let Some(tag) = c.generator() {
        let mut params = serde_json::Map::new();
        params.insert("eps".into(), eps.into());
        params.insert("of".into(), serde_json::to_value(tag)?);
        out = out.with_generator(GeneratorTag::new("lowpass", params));
    }
    Ok(out)
}

/// Something that can be averaged over symmetric windows: a function on the
/// circle, or a function on a physical interval.
///
/// Coordinates and widths are in the function's own units.
pub trait Windowed {
    /// Point value, `None` where undefined.
    fn point(&self, t: f64) -> Option<f64>;
    /// Kind of the declared singular point at `t`, if any.
    fn singular_kind_at(&self, t: f64) -> Option<SingularKind>;
    /// Distance to the nearest declared singular point other than one at `t`.
    fn clearance(&self, t: f64) -> Option<f64>;
    /// Mean over `[t - half, t + half]`.
    fn window_average(&self, t: f64, half: f64, tol: f64) -> Result<f64>;
    /// Largest admissible half-width.
    fn max_half_width(&self) -> f64;
}

impl Windowed for EvaluatorFunction {
    fn point(&self, t: f64) -> Option<f64> {
        self.value(t)
    }

    fn singular_kind_at(&self, t: f64) -> Option<SingularKind> {
        self.singular_at(t).map(|p| p.kind)
    }

    fn clearance(&self, t: f64) -> Option<f64> {
        EvaluatorFunction::clearance(self, t)
    }

    fn window_average(&self, t: f64, half: f64, tol: f64) -> Result<f64> {
        kernel_filter_eval(self, t, half, tol)
    }

    fn max_half_width(&self) -> f64 {
        PI
    }
}

/// Mean of `f` over `[theta - eps, theta + eps]` by panel quadrature with
/// panel boundaries at every interior singular point.
///
/// A non-integrable point anywhere in the closed window, or a boundary point
/// strictly inside it, makes the window inadmissible.
pub fn kernel_filter_eval(f: &EvaluatorFunction, theta: f64, eps: f64, tol: f64) -> Result<f64> {
    check_eps(eps)?;
    let (lo, hi) = (theta - eps, theta + eps);
    let mut breaks = vec![lo];
    for (x, kind) in f.singular_in(lo, hi) {
        let interior = x > lo && x < hi;
        match kind {
            SingularKind::NonIntegrable => {
                return Err(Error::UndefinedHere {
                    theta,
                    reason: format!("non-integrable singular point at {x} lies in the window"),
                })
            }
            SingularKind::Boundary if interior => {
                return Err(Error::UndefinedHere {
                    theta,
                    reason: format!("the window crosses the domain boundary at {x}"),
                })
            }
            _ if interior => breaks.push(x),
            _ => {}
        }
    }
    breaks.push(hi);
    integrate_window(|x| f.regular(x), &breaks, theta, eps, tol)
}

pub(crate) fn integrate_window(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    center: f64,
    half: f64,
    tol: f64,
) -> Result<f64> {
    let width = 2.0 * half;
    match quad::integrate(&f, breaks, 1, tol * width) {
        Ok((integral, _)) => Ok(integral / width),
        Err(e) => {
            let probe = quad::composite_points(breaks, 1)
                .into_iter()
                .find(|&(x, _)| !f(x).is_finite());
            match probe {
                Some((x, _)) => Err(Error::UndefinedHere {
                    theta: center,
                    reason: format!("the function is undefined at {x} inside the window"),
                }),
                None => Err(e),
            }
        }
    }
}

/// Moving average of the piecewise-linear interpolant of `g` over windows of
/// half-width `eps`.
///
/// The window ends fall between nodes in general; the interpolant's exact
/// integral amounts to trapezoid weights with linearly interpolated ends. An
/// output node is undefined when its window touches an undefined node
/// (including the nodes used to interpolate the window ends).
pub fn kernel_filter_grid(g: &GridFunction, eps: f64) -> Result<GridFunction> {
    check_eps(eps)?;
    let n = g.len();
    let h = g.spacing();
    if eps < h * (1.0 - 1e-12) {
        return Err(Error::EpsilonBelowResolution { eps, spacing: h });
    }
    let mut r = eps / h;
    if (r - r.round()).abs() < 1e-9 {
        r = r.round();
    }
    let v: Vec<f64> = (0..n)
        .map(|i| if g.is_defined(i) { g.value(i) } else { 0.0 })
        .collect();
    // prefix[j] = integral of the interpolant from node 0 to node j (index units)
    let mut prefix = vec![0.0; n + 1];
    for j in 0..n {
        prefix[j + 1] = prefix[j] + 0.5 * (v[j] + v[(j + 1) % n]);
    }
    let total = prefix[n];
    let primitive = |x: f64| -> f64 {
        let m = x.div_euclid(n as f64);
        let local = x - m * n as f64;
        let j = (local.floor() as usize).min(n - 1);
        let t = local - j as f64;
        let (a, b) = (v[j], v[(j + 1) % n]);
        m * total + prefix[j] + a * t + 0.5 * (b - a) * t * t
    };
    let reach = r.ceil() as i64;
    let undefined: Vec<usize> = (0..n).filter(|&i| !g.is_defined(i)).collect();
    let mut values = vec![0.0; n];
    let mut defined = vec![true; n];
    for i in 0..n {
        let touches = undefined.iter().any(|&u| {
            let d = (u as i64 - i as i64).rem_euclid(n as i64);
            d.min(n as i64 - d) <= reach
        });
        if touches {
            defined[i] = false;
            values[i] = f64::NAN;
            continue;
        }
        let x = i as f64;
        values[i] = (primitive(x + r) - primitive(x - r)) / (2.0 * r);
    }
    Ok(g.with_values(values, defined))
}

/// Result of an `eps -> 0` extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    /// Size of the last correction along the extrapolation tableau.
    pub residual: f64,
    /// Window half-widths actually used (after clearance scaling).
    pub schedule: Vec<f64>,
    /// Filtered value (or filtered derivative) at each half-width.
    pub samples: Vec<f64>,
    pub model: ErrorModel,
}

/// Validates a window schedule: at least three strictly decreasing positive
/// entries, none above `max`.
pub fn check_schedule(schedule: &[f64], max: f64) -> Result<()> {
    if schedule.len() < 3 {
        return Err(Error::domain("epsilon schedule needs at least three entries"));
    }
    if schedule.iter().any(|&e| !(e > 0.0 && e <= max)) {
        return Err(Error::domain(format!(
            "epsilon schedule entries must lie in (0, {max}]"
        )));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("epsilon schedule must be strictly decreasing"));
    }
    Ok(())
}

/// Scales the schedule so that no window reaches beyond half the distance to
/// the nearest other singular point, and picks the error model: a singular
/// point at `t` itself brings odd powers into the expansion.
fn prepare<W: Windowed + ?Sized>(f: &W, t: f64, schedule: &[f64]) -> Result<(Vec<f64>, ErrorModel)> {
    check_schedule(schedule, f.max_half_width())?;
    let model = match f.singular_kind_at(t) {
        None => ErrorModel::Even,
        Some(SingularKind::Integrable) => ErrorModel::Full,
        Some(kind) => {
            return Err(Error::UndefinedHere {
                theta: t,
                reason: format!("{kind:?} singular point at the evaluation point").to_lowercase(),
            })
        }
    };
    let largest = schedule[0];
    let scale = match f.clearance(t) {
        Some(d) if largest > 0.5 * d => 0.5 * d / largest,
        _ => 1.0,
    };
    Ok((schedule.iter().map(|e| e * scale).collect(), model))
}

fn finish(t: f64, schedule: Vec<f64>, samples: Vec<f64>, model: ErrorModel) -> Result<LimitEstimate> {
    let ex: Extrapolated = extrapolate_to_zero(&schedule, &samples, model);
    let (value, residual) = (ex.value, ex.residual);
    let floor = 1e-10 * (1.0 + value.abs());
    if let Some((last, previous)) = ex.diverging(floor) {
        return Err(Error::NoConvergence {
            at: t,
            last,
            previous,
        });
    }
    if !value.is_finite() {
        return Err(Error::NoConvergence {
            at: t,
            last: value,
            previous: f64::NAN,
        });
    }
    Ok(LimitEstimate {
        value,
        residual,
        schedule,
        samples,
        model,
    })
}

/// `lim_{eps -> 0} f_eps(t)` by Richardson extrapolation over the schedule.
///
/// Windows are shrunk (the whole schedule scaled by one factor) so that they
/// stay within half the distance to the nearest other singular point. At a
/// declared integrable singular point the full power model is used, since
/// jumps and kinks produce odd terms; elsewhere the even model.
pub fn filter_limit<W: Windowed + ?Sized>(f: &W, t: f64, schedule: &[f64]) -> Result<LimitEstimate> {
    filter_limit_with_tol(f, t, schedule, DEFAULT_KERNEL_TOL)
}

pub fn filter_limit_with_tol<W: Windowed + ?Sized>(
    f: &W,
    t: f64,
    schedule: &[f64],
    tol: f64,
) -> Result<LimitEstimate> {
    let (schedule, model) = prepare(f, t, schedule)?;
    let samples = schedule
        .iter()
        .map(|&e| f.window_average(t, e, tol))
        .collect::<Result<Vec<_>>>()?;
    finish(t, schedule, samples, model)
}

/// `lim_{eps -> 0} d f_eps / dt` at `t`, using the exact derivative of the
/// window mean, `[f(t + eps) - f(t - eps)] / (2 eps)`.
///
/// At a kink the two lateral derivatives are averaged. Where a lateral
/// derivative does not exist (a jump, a one-sided blow-up) the samples grow
/// and the result is `NoConvergence`.
pub fn filtered_derivative_limit<W: Windowed + ?Sized>(
    f: &W,
    t: f64,
    schedule: &[f64],
) -> Result<LimitEstimate> {
    let (schedule, model) = prepare(f, t, schedule)?;
    let samples = schedule
        .iter()
        .map(|&e| match (f.point(t + e), f.point(t - e)) {
            (Some(p), Some(m)) => Ok((p - m) / (2.0 * e)),
            _ => Err(Error::UndefinedHere {
                theta: t,
                reason: format!("the function is undefined at a window end (eps = {e})"),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    finish(t, schedule, samples, model)
}
