//! One runner per task. Library errors become failed checks; a scenario the
//! task cannot use is reported as [`Inapplicable`].

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{ExpectedVerdict, Scenario, TaskName};
use super::report::{Check, TaskReport};
use crate::chern_weil::{
    chern_pontryagin_forms, double_tangent_euler_form, euler_form, first_pontryagin_trace, frame_rotation_defect,
    gauss_bonnet_integral, pontryagin_naturality_defect, rotation, tangent_curvature_form, GaussBonnetGrid,
    MAX_FORM_DIM,
};
use crate::connection::{
    christoffel_fd_defect, metric_compatibility_defect, torsion_tensor, wedge_one, ConnectionSpec,
};
use crate::curvature::curvature;
use crate::dsl::ScalarExpr;
use crate::homothety::{srm_homothety_verdict, tm_homothety_verdict, HomothetySpec, Verdict, VerdictReport};
use crate::manifold::MetricFamily;
use crate::sampling::{base_points, chart_points, par_samples, tangent_points, vector};
use crate::sphere::{
    find_radius_for_sign, orthonormal_frame, scal_formula_general, scal_formula_spaceform, Sign, SpaceFormParams,
    SphereBundleChart, SIGN_MARGIN,
};
use crate::tangent::{dmu_identity_defect, nijenhuis_sup, symplectic_residual, BundlePoint, WeightedSasakiMetric};
use crate::Error;

/// Identities evaluated through jets.
pub const JET_TOL: f64 = 1e-8;
/// Checks where finite differences participate.
pub const FD_TOL: f64 = 1e-5;
/// Brute-force curvature of induced sphere bundle metrics.
pub const BRUTE_TOL: f64 = 1e-4;
/// Constancy of a quantity over samples.
pub const SPREAD_TOL: f64 = 1e-5;
/// Relative agreement of the closed-form and numeric pushforward.
pub const PUSHFORWARD_TOL: f64 = 1e-6;
/// A quantity counts as nonzero when some sample exceeds this.
pub const NONZERO: f64 = 1e-3;
/// Characteristic forms.
pub const FORM_TOL: f64 = 1e-10;
/// Gauss–Bonnet integral against the Euler characteristic.
pub const GAUSS_BONNET_TOL: f64 = 1e-3;
/// Step of the finite-difference Christoffel oracle.
const FD_STEP: f64 = 1e-5;

/// Sample count, seed and an optional override of the task's primary
/// tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: Option<f64>,
}

impl RunOptions {
    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    /// Seed of an auxiliary stream family, disjoint from the point streams.
    fn aux_seed(&self, k: u64) -> u64 {
        self.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k + 1))
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("task {task} does not apply to this scenario: {reason}")]
pub struct Inapplicable {
    pub task: &'static str,
    pub reason: String,
}

type TaskResult = std::result::Result<TaskReport, Inapplicable>;

fn inapplicable(task: TaskName, reason: impl Into<String>) -> Inapplicable {
    Inapplicable {
        task: task.as_str(),
        reason: reason.into(),
    }
}

pub fn run_task(task: TaskName, sc: &Scenario, opts: &RunOptions) -> TaskResult {
    let report = match task {
        TaskName::Curvature => curvature_task(sc, opts),
        TaskName::TmHomothety => tm_homothety(sc, opts),
        TaskName::SrmHomothety => srm_homothety(sc, opts),
        TaskName::ScalSpaceform => scal_spaceform(sc, opts),
        TaskName::RadiusSearch => radius_search(sc, opts),
        TaskName::Integrability => integrability(sc, opts),
        TaskName::DmuIdentity => dmu_identity(sc, opts),
        TaskName::ChernWeil => chern_weil(sc, opts),
        TaskName::EinsteinCheck => einstein_check(sc, opts),
        TaskName::All => return Err(inapplicable(task, "'all' is expanded by the caller")),
    }?;
    Ok(report.finish())
}

/// Index and value of the largest entry; NaN counts as largest.
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            return (i, v);
        }
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn evaluate<P: Sync>(items: &[P], f: impl Fn(&P) -> crate::Result<f64> + Sync + Send) -> crate::Result<Vec<f64>> {
    items.par_iter().map(f).collect()
}

/// `max < threshold` over samples, with the worst sample as witness.
fn max_below(name: &str, values: &[f64], threshold: f64, point: impl Fn(usize) -> Value) -> Check {
    let (i, v) = argmax(values);
    Check::below(name, v, threshold).with_witness(|| json!({ "sample": i, "point": point(i), "value": v }))
}

fn coords(p: &BundlePoint) -> Value {
    json!(p.coords())
}

fn weighted_metric(sc: &Scenario) -> WeightedSasakiMetric {
    WeightedSasakiMetric::new(sc.manifold.clone(), sc.connection.clone(), sc.weights.clone())
}

fn space_form(sc: &Scenario) -> Option<(Sign, f64)> {
    match sc.manifold.family() {
        MetricFamily::SphereStereographic { radius } => Some((Sign::Positive, *radius)),
        MetricFamily::HyperbolicBall { radius } => Some((Sign::Negative, *radius)),
        _ => None,
    }
}

fn curvature_task(sc: &Scenario, opts: &RunOptions) -> TaskResult {
    let mut report = TaskReport::new(TaskName::Curvature.as_str());
    let tol = opts.tol(JET_TOL);
    let manifold = &sc.manifold;
    let spec = &sc.connection;
    let m = manifold.dim();
    let xs = base_points(manifold, opts.seed, opts.samples);
    let at = |i: usize| json!(xs[i]);

    match evaluate(&xs, |x| metric_compatibility_defect(manifold, spec, x)) {
        Ok(v) => report.check(max_below("metric compatibility", &v, tol, at)),
        Err(e) => report.error("metric compatibility", &e),
    }

    let curvs = match xs.par_iter().map(|x| curvature(manifold, spec, x)).collect::<crate::Result<Vec<_>>>() {
        Ok(c) => c,
        Err(e) => {
            report.error("curvature", &e);
            return Ok(report);
        }
    };
    let anti: Vec<f64> = curvs.iter().map(|c| c.antisymmetry_defect()).collect();
    report.check(max_below("riemann antisymmetry", &anti, tol, at));

    match &spec.torsion {
        None => {
            let bianchi: Vec<f64> = curvs.iter().map(|c| c.bianchi_defect()).collect();
            report.check(max_below("first bianchi identity", &bianchi, tol, at));
        }
        Some(psi) => {
            let defect = evaluate(&xs, |x| {
                let dpsi = psi.eval_jet(x)?.gradient;
                Ok(torsion_tensor(manifold, spec, x)?.max_abs_diff(&wedge_one(&dpsi)))
            });
            match defect {
                Ok(v) => report.check(max_below("torsion equals dpsi wedge 1", &v, tol, at)),
                Err(e) => report.error("torsion", &e),
            }
        }
    }

    match evaluate(&xs, |x| christoffel_fd_defect(manifold, spec, x, FD_STEP)) {
        Ok(v) => report.check(max_below("christoffel vs finite differences", &v, FD_TOL, at)),
        Err(e) => report.error("finite differences", &e),
    }

    let scal: Vec<f64> = curvs.iter().map(|c| c.scalar).collect();
    report.detail("scalar_curvature_min", scal.iter().copied().fold(f64::INFINITY, f64::min));
    report.detail("scalar_curvature_max", scal.iter().copied().fold(f64::NEG_INFINITY, f64::max));

    if let (Some((sign, radius)), true) = (space_form(sc), spec == &ConnectionSpec::levi_civita()) {
        let k = sign.factor() / (radius * radius);
        let expected = (m * (m - 1)) as f64 * k;
        report.detail("expected_sectional", k);
        report.detail("expected_scalar", expected);
        let dev: Vec<f64> = scal.iter().map(|s| (s - expected).abs()).collect();
        report.check(max_below("scalar curvature of the space form", &dev, tol, at));
        if m >= 2 {
            let planes = par_samples(opts.aux_seed(0), opts.samples, |_, rng| (vector(m, rng), vector(m, rng)));
            let dev: crate::Result<Vec<f64>> = curvs
                .iter()
                .zip(&planes)
                .map(|(c, (u, v))| Ok((c.sectional(u, v)? - k).abs()))
                .collect();
            match dev {
                Ok(v) => report.check(max_below("sectional curvature of the space form", &v, tol, at)),
                Err(e) => report.error("sectional curvature", &e),
            }
        }
    }
    Ok(report)
}

fn homothety_block(sc: &Scenario, task: TaskName) -> std::result::Result<&super::config::HomothetyConfig, Inapplicable> {
    sc.homothety
        .as_ref()
        .ok_or_else(|| inapplicable(task, "a [homothety] section is required"))
}

fn expected_verdict(e: ExpectedVerdict) -> Verdict {
    match e {
        ExpectedVerdict::Homothety => Verdict::Homothety,
        ExpectedVerdict::Isometry => Verdict::Isometry,
        ExpectedVerdict::NotHomothety => Verdict::NotHomothety,
    }
}

fn verdict_checks(report: &mut TaskReport, rep: &VerdictReport, expected: Option<ExpectedVerdict>) {
    report.detail("verdict", rep.verdict);
    report.detail("ratio", rep.ratio);
    report.detail("ratio_spread", rep.ratio_spread);
    report.detail("max_deviation", rep.max_deviation);
    report.detail("theorem_backed", rep.theorem_backed);
    if let Some(w) = &rep.witness {
        report.detail("witness", w);
    }
    if let Some(w) = &rep.warning {
        report.note(w.clone());
    }
    match expected.map(expected_verdict) {
        None => report.note(format!(
            "no expected verdict configured; measured verdict is {}",
            rep.verdict.as_str()
        )),
        Some(v) => {
            let witness = rep.witness.clone();
            let measured = rep.verdict;
            report.check(
                Check::boolean(format!("verdict is {}", v.as_str()), measured == v).with_witness(|| {
                    json!({ "measured": measured.as_str(), "witness": witness })
                }),
            );
            let dev = rep.max_deviation;
            let c = if v.is_positive() {
                Check::below("max deviation from psi times identity", dev, rep.tolerance)
            } else {
                Check::above("max deviation from psi times identity", dev, rep.tolerance)
            };
            report.check(c);
        }
    }
    if let Some(e) = rep.expected_ratio {
        report.check(Check::below(
            format!("ratio equals {e}"),
            (rep.ratio - e).abs(),
            rep.tolerance * e.abs().max(1.0),
        ));
    }
}

fn tm_homothety(sc: &Scenario, opts: &RunOptions) -> TaskResult {
    let task = TaskName::TmHomothety;
    let h = homothety_block(sc, task)?;
    let t = h
        .t
        .clone()
        .ok_or_else(|| inapplicable(task, "homothety.t is required"))?;
    let mut report = TaskReport::new(task.as_str());
    if sc.raw.connection.is_some() {
        report.note("the [connection] section is not used; both sides use Levi-Civita connections");
    }
    let tol = opts.tol(crate::homothety::DEFAULT_TOLERANCE);
    let m = sc.manifold.dim();
    let mut spec = HomothetySpec::tangent(
        sc.manifold.clone(),
        h.lambda.clone(),
        sc.weights.clone(),
        h.target_weights.clone(),
        t,
    );
    if let Some(l) = &h.source_lambda {
        spec = spec.with_source_lambda(l.clone());
    }
    if let Some(psi) = h.expected_ratio {
        spec = spec.with_expected_ratio(psi);
    }
    let points = tangent_points(&sc.manifold, opts.seed, opts.samples);
    match tm_homothety_verdict(&spec, &points, tol) {
        Ok(rep) => verdict_checks(&mut report, &rep, h.expected),
        Err(e) => report.error("verdict", &e),
    }

    let vectors = par_samples(opts.aux_seed(0), opts.samples, |_, rng| vector(2 * m, rng));
    let rel = points
        .par_iter()
        .zip(&vectors)
        .map(|(p, x)| {
            let closed = spec.pushforward_closed_form(p, x)?;
            let numeric = spec.pushforward_numeric(p, x)?;
            let scale = numeric.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
            let diff = closed.iter().zip(&numeric).fold(0.0f64, |a, (c, n)| a.max((c - n).abs()));
            Ok(diff / scale)
        })
        .collect::<crate::Result<Vec<f64>>>();
    match rel {
        Ok(v) => report.check(max_below("pushforward closed form vs numeric", &v, PUSHFORWARD_TOL, |i| {
            json!({ "point": points[i].coords(), "vector": vectors[i] })
        })),
        Err(e) => report.error("pushforward", &e),
    }
    let decomposition = points
        .par_iter()
        .zip(&vectors)
        .map(|(p, x)| spec.decomposition_defect(p, x))
        .collect::<crate::Result<Vec<f64>>>();
    match decomposition {
        Ok(v) => report.check(max_below("horizontal vertical decomposition", &v, JET_TOL, |i| coords(&points[i]))),
        Err(e) => report.error("decomposition", &e),
    }
    Ok(report)
}

fn radii(sc: &Scenario, task: TaskName) -> std::result::Result<(ScalarExpr, ScalarExpr), Inapplicable> {
    match (&sc.r, &sc.s) {
        (Some(r), Some(s)) => Ok((r.clone(), s.clone())),
        _ => Err(inapplicable(task, "radius.r and radius.s are required")),
    }
}

fn srm_homothety(sc: &Scenario, opts: &RunOptions) -> TaskResult {
    let task = TaskName::SrmHomothety;
    let h = homothety_block(sc, task)?;
    let (r, s) = radii(sc, task)?;
    if sc.manifold.dim() < 2 {
        return Err(inapplicable(task, "sphere bundles need manifold.dim >= 2"));
    }
    let mut report = TaskReport::new(task.as_str());
    if h.t.is_some() {
        report.note("homothety.t is ignored; the fiber scale is s/r");
    }
    if sc.raw.connection.is_some() {
        report.note("the [connection] section is not used; both sides use Levi-Civita connections");
    }
    let tol = opts.tol(crate::homothety::DEFAULT_TOLERANCE);
    let mut spec = HomothetySpec::sphere(
        sc.manifold.clone(),
        h.lambda.clone(),
        sc.weights.clone(),
        h.target_weights.clone(),
        r,
        s,
    );
    if let Some(l) = &h.source_lambda {
        spec = spec.with_source_lambda(l.clone());
    }
    if let Some(psi) = h.expected_ratio {
        spec = spec.with_expected_ratio(psi);
    }
    let chart = match spec.source_chart() {
        Ok(Some(c)) => c,
        Ok(None) => unreachable!("sphere spec has radii"),
        Err(e) => {
            report.error("chart", &e);
            return Ok(report);
        }
    };
    let qs = chart_points(&chart, opts.seed, opts.samples);
    match srm_homothety_verdict(&spec, &qs, tol) {
        Ok(rep) => verdict_checks(&mut report, &rep, h.expected),
        Err(e) => report.error("verdict", &e),
    }

    let dim = chart.dim();
    let coeffs = par_samples(opts.aux_seed(0), opts.samples, |_, rng| vector(dim, rng));
    let tangency = qs
        .par_iter()
        .zip(&coeffs)
        .map(|(q, c)| {
            let p = chart.bundle_point(q)?;
            let x = chart.jacobian(q)?.mat_vec(c);
            Ok(chart.tangency_defect(q)?.max(spec.target_tangency_defect(&p, &x)?))
        })
        .collect::<crate::Result<Vec<f64>>>();
    match tangency {
        Ok(v) => report.check(max_below("image stays in the target sphere bundle", &v, JET_TOL, |i| json!(qs[i]))),
        Err(e) => report.error("tangency", &e),
    }
    Ok(report)
}

/// Space form data for the sphere bundle tasks.
fn spaceform_params(sc: &Scenario, task: TaskName) -> std::result::Result<SpaceFormParams, Inapplicable> {
    let (sign, radius) = space_form(sc).ok_or_else(|| inapplicable(task, "manifold.metric must be sphere or hyperbolic"))?;
    let m = sc.manifold.dim();
    if m < 2 {
        return Err(inapplicable(task, "sphere bundles need manifold.dim >= 2"));
    }
    if sc.connection != ConnectionSpec::levi_civita() {
        return Err(inapplicable(task, "the connection must be Levi-Civita"));
    }
    if !(sc.weights.f1.is_constant() && sc.weights.f2.is_constant()) {
        return Err(inapplicable(task, "weights must be constant"));
    }
    let origin = vec![0.0; m];
    let (f1, f2) = sc
        .weights
        .eval(&origin)
        .map_err(|e| inapplicable(task, e.to_string()))?;
    Ok(SpaceFormParams {
        sign,
        radius,
        f1,
        f2,
        n: m - 1,
    })
}

/// Brute-force scalar curvature of `(S_sM, g^{f₁,f₂})` at sampled chart points.
fn brute_force_scal(sc: &Scenario, s: f64, opts: &RunOptions) -> crate::Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let m = sc.manifold.dim();
    let w = WeightedSasakiMetric::new(sc.manifold.clone(), ConnectionSpec::levi_civita(), sc.weights.clone());
    let chart = SphereBundleChart::for_metric(&w, ScalarExpr::constant(s, m))?;
    let qs = chart_points(&chart, opts.seed, opts.samples);
    let values = evaluate(&qs, |q| chart.scalar_curvature(&w, q))?;
    Ok((qs, values))
}

fn scal_spaceform(sc: &Scenario, opts: &RunOptions) -> TaskResult {
    let task = TaskName::ScalSpaceform;
    let params = spaceform_params(sc, task)?;
    let r = sc
        .r
        .as_ref()
        .ok_or_else(|| inapplicable(task, "radius.r is required"))?;
    if !r.is_constant() {
        return Err(inapplicable(task, "radius.r must be constant"));
    }
    let mut report = TaskReport::new(task.as_str());
    if sc.s.is_some() {
        report.note("radius.s is ignored; the bundle radius is radius.r");
    }
    let tol = opts.tol(BRUTE_TOL);
    let m = sc.manifold.dim();
    let s = match r.eval_f64(&vec![0.0; m]) {
        Ok(s) => s,
        Err(e) => {
            report.error("radius", &e);
            return Ok(report);
        }
    };
    let formula = match scal_formula_spaceform(&params, s) {
        Ok(v) => v,
        Err(e) => {
            report.error("formula", &e);
            return Ok(report);
        }
    };
    report.detail("sign", params.sign);
    report.detail("radius", params.radius);
    report.detail("s", s);
    report.detail("f1", params.f1);
    report.detail("f2", params.f2);
    report.detail("formula", formula);

    let (qs, brute) = match brute_force_scal(sc, s, opts) {
        Ok(v) => v,
        Err(e) => {
            report.error("brute force", &e);
            return Ok(report);
        }
    };
    report.detail("brute_force_min", brute.iter().copied().fold(f64::INFINITY, f64::min));
    report.detail("brute_force_max", brute.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let at = |i: usize| json!(qs[i]);
    let dev: Vec<f64> = brute.iter().map(|b| (b - formula).abs()).collect();
    report.check(max_below("brute force vs formula", &dev, tol, at));
    report.check(Check::below("brute force spread", spread(&brute), SPREAD_TOL));

    let w = WeightedSasakiMetric::new(sc.manifold.clone(), ConnectionSpec::levi_civita(), sc.weights.clone());
    let general = SphereBundleChart::for_metric(&w, r.clone()).and_then(|chart| {
        evaluate(&qs, |q| {
            let p = chart.bundle_point(q)?;
            Ok((scal_formula_general(&sc.manifold, params.f1, params.f2, s, &p.x, &p.u)? - formula).abs())
        })
    });
    match general {
        Ok(v) => report.check(max_below("pointwise formula vs space form formula", &v, JET_TOL, at)),
        Err(e) => report.error("pointwise formula", &e),
    }
    Ok(report)
}

fn radius_search(sc: &Scenario, opts: &RunOptions) -> TaskResult {
    let task = TaskName::RadiusSearch;
    let params = spaceform_params(sc, task)?;
    let mut report = TaskReport::new(task.as_str());
    if sc.r.is_some() || sc.s.is_some() {
        report.note("the [radius] section is ignored; radii are searched");
    }
    let tol = opts.tol(BRUTE_TOL);
    for target in [Sign::Positive, Sign::Negative] {
        let label = match target {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        };
        let s = match find_radius_for_sign(&params, target) {
            Ok(s) => s,
            Err(Error::Unreachable(msg)) => {
                report.check(
                    Check::boolean(format!("{label}: radius found"), false).with_witness(|| Value::String(msg)),
                );
                continue;
            }
            Err(e) => {
                report.error(&format!("{label} search"), &e);
                continue;
            }
        };
        report.detail(&format!("radius_{label}"), s);
        let formula = match scal_formula_spaceform(&params, s) {
            Ok(v) => v,
            Err(e) => {
                report.error(&format!("{label} formula"), &e);
                continue;
            }
        };
        report.detail(&format!("formula_{label}"), formula);
        report.check(Check::above(
            format!("{label}: signed formula value"),
            target.factor() * formula,
            SIGN_MARGIN,
        ));
        match brute_force_scal(sc, s, opts) {
            Ok((qs, brute)) => {
                let worst_sign: Vec<f64> = brute.iter().map(|b| -target.factor() * b).collect();
                let (i, v) = argmax(&worst_sign);
                report.check(
                    Check::above(format!("{label}: signed brute force minimum"), -v, 0.0)
                        .with_witness(|| json!({ "sample": i, "point": qs[i], "value": brute[i] })),
                );
                let rel: Vec<f64> = brute.iter().map(|b| (b - formula).abs() / formula.abs().max(1.0)).collect();
                report.check(max_below(
                    &format!("{label}: brute force vs formula (relative)"),
                    &rel,
                    tol,
                    |i| json!(qs[i]),
                ));
            }
            Err(e) => report.error(&format!("{label} brute force"), &e),
        }
    }
    Ok(report)
}

fn integrability(sc: &Scenario, opts: &RunOptions) -> TaskResult {
    let task = TaskName::Integrability;
    let mut report = TaskReport::new(task.as_str());
    let tol = opts.tol(JET_TOL);
    let w = weighted_metric(sc);
    let manifold = &sc.manifold;
    let m = manifold.dim();
    let points = tangent_points(manifold, opts.seed, opts.samples);
    let at = |i: usize| coords(&points[i]);

    // flatness of the metric the connection is compatible with, and the
    // one-forms dψ = d(φ₂−φ₁), dψ̄ = d(φ₁+φ₂), dψ̃
    let riemannian = ConnectionSpec {
        conformal: sc.connection.conformal.clone(),
        torsion: None,
    };
    let ingredients = points
        .par_iter()
        .map(|p| {
            let flat = curvature(manifold, &riemannian, &p.x)?.max_abs_riemann();
            let f1 = sc.weights.f1.eval_jet(&p.x)?;
            let f2 = sc.weights.f2.eval_jet(&p.x)?;
            let dphi1: Vec<f64> = f1.gradient.iter().map(|d| d / (2.0 * f1.value)).collect();
            let dphi2: Vec<f64> = f2.gradient.iter().map(|d| d / (2.0 * f2.value)).collect();
            let dtilde = match &sc.connection.torsion {
                Some(t) => t.eval_jet(&p.x)?.gradient,
                None => vec![0.0; m],
            };
            let psi_defect = (0..m).fold(0.0f64, |a, k| a.max((dtilde[k] - (dphi2[k] - dphi1[k])).abs()));
            let psi_bar_defect = (0..m).fold(0.0f64, |a, k| a.max((dtilde[k] + dphi1[k] + dphi2[k]).abs()));
            Ok((flat, psi_defect, psi_bar_defect))
        })
        .collect::<crate::Result<Vec<_>>>();
    let ingredients = match ingredients {
        Ok(v) => v,
        Err(e) => {
            report.error("prediction", &e);
            return Ok(report);
        }
    };
    let flat = ingredients.iter().all(|v| v.0 < tol);
    let torsion_psi = ingredients.iter().all(|v| v.1 < tol);
    let torsion_minus_psi_bar = ingredients.iter().all(|v| v.2 < tol);
    let complex_predicted = flat && torsion_psi;
    let symplectic_predicted = torsion_minus_psi_bar;
    report.detail("base_flat", flat);
    report.detail("torsion_is_dpsi_wedge_1", torsion_psi);
    report.detail("torsion_is_minus_dpsi_bar_wedge_1", torsion_minus_psi_bar);
    report.detail("predicted_integrable", complex_predicted);
    report.detail("predicted_symplectic", symplectic_predicted);
    report.detail("predicted_kahler", complex_predicted && symplectic_predicted);

    let mut measured = [None, None];
    for (k, (name, predicted)) in [("nijenhuis tensor", complex_predicted), ("d omega", symplectic_predicted)]
        .into_iter()
        .enumerate()
    {
        let values = if k == 0 {
            evaluate(&points, |p| nijenhuis_sup(&w, p))
        } else {
            evaluate(&points, |p| symplectic_residual(&w, p))
        };
        match values {
            Ok(v) => {
                let (_, max) = argmax(&v);
                measured[k] = Some(max);
                if predicted {
                    report.check(max_below(&format!("{name} vanishes"), &v, tol, at));
                } else {
                    report.check(Check::above(format!("{name} is nonzero"), max, NONZERO));
                }
            }
            Err(e) => report.error(name, &e),
        }
    }
    report.detail("nijenhuis_max", measured[0]);
    report.detail("d_omega_max", measured[1]);
    Ok(report)
}

fn dmu_identity(sc: &Scenario, opts: &RunOptions) -> TaskResult {
    let mut report = TaskReport::new(TaskName::DmuIdentity.as_str());
    let w = weighted_metric(sc);
    let points = tangent_points(&sc.manifold, opts.seed, opts.samples);
    match evaluate(&points, |p| dmu_identity_defect(&w, p)) {
        Ok(v) => report.check(max_below("d mu equals omega plus mu of torsion", &v, opts.tol(JET_TOL), |i| {
            coords(&points[i])
        })),
        Err(e) => report.error("d mu", &e),
    }
    Ok(report)
}

fn chern_weil(sc: &Scenario, opts: &RunOptions) -> TaskResult {
    let task = TaskName::ChernWeil;
    let m = sc.manifold.dim();
    if 2 * m > MAX_FORM_DIM {
        return Err(inapplicable(task, format!("manifold.dim must be at most {}", MAX_FORM_DIM / 2)));
    }
    let mut report = TaskReport::new(task.as_str());
    let tol = opts.tol(FORM_TOL);
    let manifold = &sc.manifold;
    let xs = base_points(manifold, opts.seed, opts.samples);
    let at = |i: usize| json!(xs[i]);

    let forms = xs
        .par_iter()
        .map(|x| tangent_curvature_form(manifold, x))
        .collect::<crate::Result<Vec<_>>>();
    match forms {
        Ok(forms) => {
            if m.is_multiple_of(2) {
                match forms.iter().map(|o| Ok(euler_form(o)?.top())).collect::<crate::Result<Vec<f64>>>() {
                    Ok(e) => {
                        report.detail("euler_density_min", e.iter().copied().fold(f64::INFINITY, f64::min));
                        report.detail("euler_density_max", e.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                    }
                    Err(e) => report.error("euler form", &e),
                }
            }
            if m >= 2 {
                let trace = forms
                    .iter()
                    .map(|o| Ok(chern_pontryagin_forms(o, 1)?.pontryagin.max_abs_diff(&first_pontryagin_trace(o))))
                    .collect::<crate::Result<Vec<f64>>>();
                match trace {
                    Ok(v) => report.check(max_below("p1 from symmetric functions vs trace formula", &v, tol, at)),
                    Err(e) => report.error("p1 trace", &e),
                }
            }
            if space_form(sc).is_some() {
                let pont = forms
                    .iter()
                    .map(|o| {
                        (1..=m / 2).try_fold(0.0f64, |a, j| Ok(a.max(chern_pontryagin_forms(o, j)?.pontryagin.max_abs())))
                    })
                    .collect::<crate::Result<Vec<f64>>>();
                match pont {
                    Ok(v) => report.check(max_below("pontryagin forms vanish for constant curvature", &v, tol, at)),
                    Err(e) => report.error("constant curvature pontryagin", &e),
                }
            }
        }
        Err(e) => report.error("curvature form", &e),
    }

    let angles = par_samples(opts.aux_seed(0), opts.samples, |_, rng| vector(m * (m - 1) / 2, rng));
    let rotated = xs
        .par_iter()
        .zip(&angles)
        .map(|(x, a)| {
            let curv = curvature(manifold, &ConnectionSpec::levi_civita(), x)?;
            let frame = orthonormal_frame(&curv.metric)?;
            let q = rotation(m, &a.iter().map(|t| t * std::f64::consts::PI).collect::<Vec<_>>());
            frame_rotation_defect(&curv, &frame, &curv.metric, &q)
        })
        .collect::<crate::Result<Vec<f64>>>();
    match rotated {
        Ok(v) => report.check(max_below("forms independent of the orthonormal frame", &v, tol, at)),
        Err(e) => report.error("frame rotation", &e),
    }

    let w = weighted_metric(sc);
    let points = tangent_points(manifold, opts.seed, opts.samples);
    match evaluate(&points, |p| Ok(double_tangent_euler_form(&w, p)?.top().abs())) {
        Ok(v) => report.check(max_below("euler form of TTM vanishes", &v, tol, |i| coords(&points[i]))),
        Err(e) => report.error("TTM euler form", &e),
    }
    if m >= 2 {
        match evaluate(&points, |p| pontryagin_naturality_defect(&w, p)) {
            Ok(v) => report.check(max_below("pontryagin forms are natural under pullback", &v, tol, |i| {
                coords(&points[i])
            })),
            Err(e) => report.error("naturality", &e),
        }
    }

    if m == 2 && matches!(manifold.family(), MetricFamily::SphereStereographic { .. }) {
        match gauss_bonnet_integral(manifold, GaussBonnetGrid::default()) {
            Ok(gb) => {
                report.detail("gauss_bonnet", &gb);
                if let Some(w) = &gb.warning {
                    report.note(w.clone());
                }
                report.check(Check::below("gauss-bonnet integral equals 2", (gb.value - 2.0).abs(), GAUSS_BONNET_TOL));
            }
            Err(e) => report.error("gauss-bonnet", &e),
        }
    }
    Ok(report)
}

fn einstein_check(sc: &Scenario, opts: &RunOptions) -> TaskResult {
    let task = TaskName::EinsteinCheck;
    let r = sc
        .r
        .clone()
        .ok_or_else(|| inapplicable(task, "radius.r is required"))?;
    if sc.manifold.dim() < 2 {
        return Err(inapplicable(task, "sphere bundles need manifold.dim >= 2"));
    }
    let mut report = TaskReport::new(task.as_str());
    if sc.s.is_some() {
        report.note("radius.s is ignored; the bundle radius is radius.r");
    }
    let w = weighted_metric(sc);
    match SphereBundleChart::for_metric(&w, r) {
        Ok(chart) => {
            let qs = chart_points(&chart, opts.seed, opts.samples);
            match evaluate(&qs, |q| chart.einstein_residual(&w, q)) {
                Ok(v) => {
                    let (i, max) = argmax(&v);
                    report.detail("bundle_residual_max", max);
                    report.detail("bundle_residual_min", v.iter().copied().fold(f64::INFINITY, f64::min));
                    report.check(
                        Check::above("sphere bundle is not einstein", max, NONZERO)
                            .with_witness(|| json!({ "sample": i, "point": qs[i], "value": max })),
                    );
                }
                Err(e) => report.error("bundle residual", &e),
            }
        }
        Err(e) => report.error("chart", &e),
    }

    let control = sc.connection == ConnectionSpec::levi_civita()
        && (space_form(sc).is_some()
            || matches!(sc.manifold.family(), MetricFamily::Euclidean)
            || sc.manifold.dim() == 2);
    let xs = base_points(&sc.manifold, opts.seed, opts.samples);
    match evaluate(&xs, |x| Ok(curvature(&sc.manifold, &sc.connection, x)?.einstein_residual())) {
        Ok(v) => {
            report.detail("base_residual_max", argmax(&v).1);
            if control {
                report.check(max_below("base is einstein", &v, opts.tol(JET_TOL), |i| json!(xs[i])));
            }
        }
        Err(e) => report.error("base residual", &e),
    }
    Ok(report)
}
