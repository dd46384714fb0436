//! Pointwise real functions on the circle with declared singular structure.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// How the function behaves at a declared singular point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    /// Integrable: a kink, a jump, or an integrable blow-up.
    Integrable,
    /// Not integrable in any neighbourhood; filter windows must avoid it.
    NonIntegrable,
    /// End of a physical interval mapped onto the circle. Windows must not
    /// cross it, but the whole circle is still integrable.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub theta: f64,
    pub kind: SingularKind,
}

impl SingularPoint {
    pub fn integrable(theta: f64) -> Self {
        SingularPoint {
            theta: wrap_angle(theta),
            kind: SingularKind::Integrable,
        }
    }

    pub fn non_integrable(theta: f64) -> Self {
        SingularPoint {
            theta: wrap_angle(theta),
            kind: SingularKind::NonIntegrable,
        }
    }

    /// Whether a filter window may contain this point in its interior.
    pub fn blocks_windows(&self) -> bool {
        !matches!(self.kind, SingularKind::Integrable)
    }
}

/// Maps any angle into `[-pi, pi)`. Angles already in range are returned
/// unchanged, bit for bit.
pub fn wrap_angle(theta: f64) -> f64 {
    if (-PI..PI).contains(&theta) {
        return theta;
    }
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t >= PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Shortest signed distance `b - a` on the circle, in `[-pi, pi)`.
pub fn circle_offset(a: f64, b: f64) -> f64 {
    wrap_angle(b - a)
}

type Rule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function on `[-pi, pi]`, periodically extended.
///
/// The rule receives angles already wrapped into `[-pi, pi)`. A non-finite
/// return value means "undefined here". Removable defects are isolated points
/// where the value differs from the surrounding function (zero-measure
/// spikes); quadrature never needs to know about them because Gauss nodes are
/// interior to panels, but classification reports them.
#[derive(Clone)]
pub struct EvaluatorFunction {
    rule: Rule,
    singular: Vec<SingularPoint>,
    defects: Vec<f64>,
    label: String,
}

impl fmt::Debug for EvaluatorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvaluatorFunction")
            .field("label", &self.label)
            .field("singular", &self.singular.len())
            .field("defects", &self.defects)
            .finish()
    }
}

impl EvaluatorFunction {
    pub fn new(rule: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        EvaluatorFunction {
            rule: Arc::new(rule),
            singular: Vec::new(),
            defects: Vec::new(),
            label: String::new(),
        }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_singular(mut self, point: SingularPoint) -> Self {
        self.push_singular(point);
        self
    }

    pub fn with_singular_points(mut self, points: impl IntoIterator<Item = SingularPoint>) -> Self {
        for p in points {
            self.push_singular(p);
        }
        self
    }

    pub fn with_defect(mut self, theta: f64) -> Self {
        self.defects.push(wrap_angle(theta));
        self
    }

    fn push_singular(&mut self, mut point: SingularPoint) {
        point.theta = wrap_angle(point.theta);
        match self
            .singular
            .binary_search_by(|p| p.theta.total_cmp(&point.theta))
        {
            Ok(i) => {
                // keep the most restrictive declaration
                if point.kind != SingularKind::Integrable {
                    self.singular[i].kind = point.kind;
                }
            }
            Err(i) => self.singular.insert(i, point),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Singular points sorted by angle in `[-pi, pi)`.
    pub fn singular_points(&self) -> &[SingularPoint] {
        &self.singular
    }

    pub fn defects(&self) -> &[f64] {
        &self.defects
    }

    /// True when every singular point is integrable over the whole circle.
    pub fn is_integrable(&self) -> bool {
        self.singular
            .iter()
            .all(|p| p.kind != SingularKind::NonIntegrable)
    }

    /// Raw value, possibly non-finite.
    pub fn raw(&self, theta: f64) -> f64 {
        (self.rule)(wrap_angle(theta))
    }

    /// Raw value for integration: a sample landing exactly on a declared
    /// defect is taken one ulp away, so defects never reach a quadrature sum.
    pub fn regular(&self, theta: f64) -> f64 {
        let t = wrap_angle(theta);
        if self.defects.contains(&t) {
            (self.rule)(t.next_up())
        } else {
            (self.rule)(t)
        }
    }

    /// Value at `theta`, or `None` where the function is undefined.
    pub fn value(&self, theta: f64) -> Option<f64> {
        let v = self.raw(theta);
        v.is_finite().then_some(v)
    }

    /// The declared singular point at `theta`, if any.
    pub fn singular_at(&self, theta: f64) -> Option<SingularPoint> {
        let t = wrap_angle(theta);
        self.singular
            .iter()
            .copied()
            .find(|p| circle_offset(p.theta, t).abs() <= 1e-12)
    }

    /// Distance from `theta` to the nearest singular point not located at
    /// `theta` itself; `None` when there is no other singular point.
    pub fn clearance(&self, theta: f64) -> Option<f64> {
        let t = wrap_angle(theta);
        if self.singular.is_empty() {
            return None;
        }
        let idx = self.singular.partition_point(|p| p.theta < t);
        let n = self.singular.len();
        let mut best: Option<f64> = None;
        // neighbours on each side, skipping points that sit at theta
        for step in 0..n.min(4) {
            for cand in [idx + step, idx + n - 1 - step] {
                let p = self.singular[cand % n];
                let d = circle_offset(t, p.theta).abs();
                if d > 1e-12 {
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
        }
        best
    }

    /// Singular points (with every periodic image) lying in the closed
    /// interval `[lo, hi]`, returned in unwrapped coordinates, sorted.
    pub fn singular_in(&self, lo: f64, hi: f64) -> Vec<(f64, SingularKind)> {
        let mut out = Vec::new();
        if self.singular.is_empty() || hi < lo {
            return out;
        }
        let two_pi = 2.0 * PI;
        let first = ((lo + PI) / two_pi).floor() as i64 - 1;
        let last = ((hi + PI) / two_pi).ceil() as i64 + 1;
        for m in first..=last {
            let shift = two_pi * m as f64;
            for p in &self.singular {
                let x = p.theta + shift;
                if x >= lo && x <= hi {
                    out.push((x, p.kind));
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}
