//! The fiber map `h(x, u) = (x, ĥ(x) u)`, `ĥ = e^{−φ} t`, between tangent
//! (sphere) bundles of `λ₁g` and `λ₂g = e^{2φ} λ₁g`, with Levi-Civita
//! connections on both sides.

use serde::Serialize;

use crate::connection::{check_point, compatible_metric, connection_coeffs, ConnectionSpec};
use crate::dsl::{BinOp, Expr, Func};
use crate::dsl::ScalarExpr;
use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::linalg::{orthonormalize, Mat};
use crate::manifold::ChartedManifold;
use crate::sphere::SphereBundleChart;
use crate::tangent::{BundlePoint, WeightedSasakiMetric, Weights};

/// How the fiber scale `t` is given.
#[derive(Clone, Debug, PartialEq)]
pub enum Scale {
    /// Any positive `t` (tangent bundle case).
    Free(ScalarExpr),
    /// `t = s/r` between `S_rM` and `S_sM`.
    Radii { r: ScalarExpr, s: ScalarExpr },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomothetySpec {
    pub manifold: ChartedManifold,
    /// `λ₁`; `None` means `1`.
    pub source_lambda: Option<ScalarExpr>,
    /// `λ₂` (the `λ` of the single conformal change when `λ₁ = 1`).
    pub target_lambda: Option<ScalarExpr>,
    pub source_weights: Weights,
    pub target_weights: Weights,
    pub scale: Scale,
    pub expected_ratio: Option<f64>,
}

fn half_log(lambda: &Option<ScalarExpr>) -> Result<Option<ScalarExpr>> {
    lambda
        .as_ref()
        .map(|l| {
            let e = Expr::binary(BinOp::Mul, Expr::num(0.5), Expr::call(Func::Ln, l.expr().clone()));
            ScalarExpr::from_expr(e, l.dim())
        })
        .transpose()
}

impl HomothetySpec {
    /// `h` between `(TM, g^{f₁,f₂})` and `(TM, (λg)^{f₁′,f₂′})`.
    pub fn tangent(manifold: ChartedManifold, lambda: ScalarExpr, source: Weights, target: Weights, t: ScalarExpr) -> Self {
        HomothetySpec {
            manifold,
            source_lambda: None,
            target_lambda: Some(lambda),
            source_weights: source,
            target_weights: target,
            scale: Scale::Free(t),
            expected_ratio: None,
        }
    }

    /// `h` between `(S_rM, g^{f₁,f₂})` and `(S_sM, (λg)^{f₁′,f₂′})`.
    pub fn sphere(
        manifold: ChartedManifold,
        lambda: ScalarExpr,
        source: Weights,
        target: Weights,
        r: ScalarExpr,
        s: ScalarExpr,
    ) -> Self {
        HomothetySpec {
            manifold,
            source_lambda: None,
            target_lambda: Some(lambda),
            source_weights: source,
            target_weights: target,
            scale: Scale::Radii { r, s },
            expected_ratio: None,
        }
    }

    pub fn with_source_lambda(mut self, lambda: ScalarExpr) -> Self {
        self.source_lambda = Some(lambda);
        self
    }

    pub fn with_expected_ratio(mut self, psi: f64) -> Self {
        self.expected_ratio = Some(psi);
        self
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    fn spec_for(&self, lambda: &Option<ScalarExpr>) -> Result<ConnectionSpec> {
        Ok(ConnectionSpec {
            conformal: half_log(lambda)?,
            torsion: None,
        })
    }

    pub fn source_connection(&self) -> Result<ConnectionSpec> {
        self.spec_for(&self.source_lambda)
    }

    pub fn target_connection(&self) -> Result<ConnectionSpec> {
        self.spec_for(&self.target_lambda)
    }

    pub fn source_metric(&self) -> Result<WeightedSasakiMetric> {
        Ok(WeightedSasakiMetric::new(
            self.manifold.clone(),
            self.source_connection()?,
            self.source_weights.clone(),
        ))
    }

    pub fn target_metric(&self) -> Result<WeightedSasakiMetric> {
        Ok(WeightedSasakiMetric::new(
            self.manifold.clone(),
            self.target_connection()?,
            self.target_weights.clone(),
        ))
    }

    /// Chart of the source sphere bundle; `None` in the tangent bundle case.
    pub fn source_chart(&self) -> Result<Option<SphereBundleChart>> {
        match &self.scale {
            Scale::Free(_) => Ok(None),
            Scale::Radii { r, .. } => Ok(Some(
                SphereBundleChart::new(self.manifold.clone(), r.clone())?.with_conformal(half_log(&self.source_lambda)?),
            )),
        }
    }

    fn lambda_at<T: Scalar>(lambda: &Option<ScalarExpr>, x: &[T]) -> Result<T> {
        match lambda {
            None => Ok(x[0].lift(1.0)),
            Some(l) => {
                let v = l.eval(x)?;
                if !(v.value() > 0.0) {
                    return Err(Error::Domain(format!("conformal factor must be positive, got {}", v.value())));
                }
                Ok(v)
            }
        }
    }

    /// `λ₂/λ₁ = e^{2φ}`.
    pub fn relative_lambda<T: Scalar>(&self, x: &[T]) -> Result<T> {
        Ok(Self::lambda_at(&self.target_lambda, x)? / Self::lambda_at(&self.source_lambda, x)?)
    }

    pub fn scale_at<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let t = match &self.scale {
            Scale::Free(t) => t.eval(x)?,
            Scale::Radii { r, s } => s.eval(x)? / r.eval(x)?,
        };
        if !(t.value() > 0.0) {
            return Err(Error::Domain(format!("fiber scale must be positive, got {}", t.value())));
        }
        Ok(t)
    }

    /// `ĥ = e^{−φ} t`.
    pub fn hat<T: Scalar>(&self, x: &[T]) -> Result<T> {
        Ok(self.scale_at(x)? / self.relative_lambda(x)?.sqrt())
    }

    pub fn map<T: Scalar>(&self, xu: &[T]) -> Result<Vec<T>> {
        let m = self.dim();
        let (x, u) = xu.split_at(m);
        let h = self.hat(x)?;
        Ok(x.iter().cloned().chain(u.iter().map(|v| v.clone() * h.clone())).collect())
    }

    pub fn apply(&self, p: &BundlePoint) -> Result<BundlePoint> {
        check_point(&self.manifold, &p.x)?;
        Ok(BundlePoint::from_coords(&self.map(&p.coords())?))
    }

    /// Coordinate Jacobian of `h` at `p`.
    pub fn jacobian(&self, p: &BundlePoint) -> Result<Mat<f64>> {
        check_point(&self.manifold, &p.x)?;
        let c = p.coords();
        let img = self.map(&Jet::seed(&c, 1))?;
        Ok(Mat::from_fn(c.len(), c.len(), |r, k| img[r].derivative(k).value()))
    }

    fn check_vector(&self, x: &[f64]) -> Result<()> {
        if x.len() != 2 * self.dim() {
            return Err(Error::Dimension {
                expected: 2 * self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Pieces shared by the closed form and the decomposition check.
    fn ingredients(&self, p: &BundlePoint) -> Result<Ingredients> {
        check_point(&self.manifold, &p.x)?;
        let src = self.source_connection()?;
        let gamma = connection_coeffs(&self.manifold, &src, &p.x)?;
        let gamma_t = connection_coeffs(&self.manifold, &self.target_connection()?, &p.x)?;
        let g = compatible_metric(&self.manifold, &src, &p.x)?;
        let ginv = g.inverse().ok_or_else(|| Error::Degenerate("metric is singular".into()))?;
        let xj = Jet::seed(&p.x, 1);
        // φ = ½ ln(λ₂/λ₁)
        let phi = self.relative_lambda(&xj)?.ln() * xj[0].lift(0.5);
        let t = self.scale_at(&xj)?;
        let hat = self.hat(&p.x)?;
        Ok(Ingredients {
            dphi: phi.gradient(),
            grad_phi: ginv.mat_vec(&phi.gradient()),
            dt_over_t: t.gradient().iter().map(|d| d / t.value()).collect(),
            gamma,
            gamma_t,
            g,
            hat,
        })
    }

    /// `h_*X = X^{h′} + ĥ((X(t)/t)ξ + X^v + ∂φ·θX − μ(X)θ grad φ)` at `h(p)`.
    pub fn pushforward_closed_form(&self, p: &BundlePoint, x: &[f64]) -> Result<Vec<f64>> {
        self.check_vector(x)?;
        let m = self.dim();
        let ing = self.ingredients(p)?;
        let (xx, xu) = x.split_at(m);
        let hu: Vec<f64> = p.u.iter().map(|v| v * ing.hat).collect();
        let horizontal = ing.gamma_t.apply(xx, &hu);
        let xv = ing.vertical(xx, xu, &p.u);
        let xt: f64 = ing.dt_over_t.iter().zip(xx).map(|(a, b)| a * b).sum();
        let dphi_u: f64 = ing.dphi.iter().zip(&p.u).map(|(a, b)| a * b).sum();
        let mu = ing.g.bilinear(xx, &p.u);
        let out_u = (0..m).map(|k| {
            -horizontal[k] + ing.hat * (xt * p.u[k] + xv[k] + dphi_u * xx[k] - mu * ing.grad_phi[k])
        });
        Ok(xx.iter().copied().chain(out_u).collect())
    }

    pub fn pushforward_numeric(&self, p: &BundlePoint, x: &[f64]) -> Result<Vec<f64>> {
        self.check_vector(x)?;
        Ok(self.jacobian(p)?.mat_vec(x))
    }

    /// `max |X^{h′} + X^{v′} − X|` with
    /// `X^{v′} = X^v + ∂φ·θX + X(φ)ξ − μ(X)θ grad φ`, all at `p`.
    pub fn decomposition_defect(&self, p: &BundlePoint, x: &[f64]) -> Result<f64> {
        self.check_vector(x)?;
        let m = self.dim();
        let ing = self.ingredients(p)?;
        let (xx, xu) = x.split_at(m);
        let h_prime = ing.gamma_t.apply(xx, &p.u);
        let xv = ing.vertical(xx, xu, &p.u);
        let dphi_u: f64 = ing.dphi.iter().zip(&p.u).map(|(a, b)| a * b).sum();
        let x_phi: f64 = ing.dphi.iter().zip(xx).map(|(a, b)| a * b).sum();
        let mu = ing.g.bilinear(xx, &p.u);
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let v_prime = xv[k] + dphi_u * xx[k] + x_phi * p.u[k] - mu * ing.grad_phi[k];
            worst = worst.max((-h_prime[k] + v_prime - xu[k]).abs());
        }
        Ok(worst)
    }

    /// For `X` tangent to `S_rM` at `p`: `|g′((h_*X)^{v′}, u′) − s (h_*X)(s)|`
    /// at `h(p)`, with `g′ = λ₂g` and its Levi-Civita splitting.
    pub fn target_tangency_defect(&self, p: &BundlePoint, x: &[f64]) -> Result<f64> {
        let s = match &self.scale {
            Scale::Radii { s, .. } => s,
            Scale::Free(_) => return Err(Error::Precondition("tangency needs sphere bundle radii".into())),
        };
        let y = self.pushforward_numeric(p, x)?;
        let q = self.apply(p)?;
        let m = self.dim();
        let spec = self.target_connection()?;
        let gamma = connection_coeffs(&self.manifold, &spec, &q.x)?;
        let g = compatible_metric(&self.manifold, &spec, &q.x)?;
        let (yx, yu) = y.split_at(m);
        let b = gamma.apply(yx, &q.u);
        let yv: Vec<f64> = (0..m).map(|k| yu[k] + b[k]).collect();
        let sv = s.eval_jet(&q.x)?;
        let ys: f64 = sv.gradient.iter().zip(yx).map(|(a, b)| a * b).sum();
        Ok((g.bilinear(&yv, &q.u) - sv.value * ys).abs())
    }

    /// `h^*G′` at `p` as a `2m × 2m` matrix.
    pub fn pullback_metric(&self, p: &BundlePoint) -> Result<Mat<f64>> {
        let jac = self.jacobian(p)?;
        let target = self.target_metric()?.matrix(&self.apply(p)?)?;
        Ok(target.congruence(&jac))
    }
}

struct Ingredients {
    dphi: Vec<f64>,
    grad_phi: Vec<f64>,
    dt_over_t: Vec<f64>,
    gamma: crate::connection::Christoffel<f64>,
    gamma_t: crate::connection::Christoffel<f64>,
    g: Mat<f64>,
    hat: f64,
}

impl Ingredients {
    /// `X^v = X_u + Γ(X_x, u)` for the source connection.
    fn vertical(&self, xx: &[f64], xu: &[f64], u: &[f64]) -> Vec<f64> {
        let b = self.gamma.apply(xx, u);
        xu.iter().zip(b).map(|(a, c)| a + c).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Homothety,
    Isometry,
    NotHomothety,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Homothety => "homothety",
            Verdict::Isometry => "isometry",
            Verdict::NotHomothety => "not-homothety",
        }
    }

    pub fn is_positive(self) -> bool {
        self != Verdict::NotHomothety
    }
}

/// A sample and pair of `G`-orthonormal test vectors where `h^*G′ ≠ ψG`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub sample: usize,
    pub point: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub pullback: f64,
    pub metric: f64,
    pub ratio: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub ratio: f64,
    /// `max − min` of the vertical ratios over all samples.
    pub ratio_spread: f64,
    pub max_deviation: f64,
    pub per_sample: Vec<f64>,
    pub tolerance: f64,
    pub expected_ratio: Option<f64>,
    pub expected_ratio_matches: Option<bool>,
    /// `false` when the classification is outside the range of the theorem.
    pub theorem_backed: bool,
    pub warning: Option<String>,
    pub witness: Option<Witness>,
}

impl VerdictReport {
    pub fn passes(&self, expected: Verdict) -> bool {
        self.verdict == expected && self.expected_ratio_matches.unwrap_or(true)
    }
}

/// Pullback and source metric on a `G`-orthonormal test frame at one sample.
#[derive(Clone, Debug)]
pub struct SampleFrame {
    pub point: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
    /// The first `vertical` frame vectors are vertical.
    pub vertical: usize,
    /// `h^*G′` on the frame.
    pub pullback: Mat<f64>,
}

/// Builds the orthonormal frame from `vectors` (vertical ones first) and
/// evaluates `pullback` on it.
pub fn sample_frame(
    point: Vec<f64>,
    metric: &Mat<f64>,
    pullback: &Mat<f64>,
    vectors: &[Vec<f64>],
    vertical: usize,
) -> Result<SampleFrame> {
    let frame = orthonormalize(metric, vectors)
        .ok_or_else(|| Error::Degenerate(format!("test vectors are G-degenerate at {point:?}")))?;
    let n = frame.len();
    let a = Mat::from_fn(n, n, |i, j| pullback.bilinear(&frame[i], &frame[j]));
    Ok(SampleFrame {
        point,
        frame,
        vertical,
        pullback: a,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Fits `ψ` as the median of the vertical diagonal entries and measures the
/// largest relative deviation `|h^*G′(e_i,e_j) − ψδ_ij| / ψ`.
pub fn classify(frames: &[SampleFrame], tolerance: f64, expected_ratio: Option<f64>) -> Result<VerdictReport> {
    if frames.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    let ratios: Vec<f64> = frames
        .iter()
        .flat_map(|f| (0..f.vertical).map(move |i| f.pullback[(i, i)]))
        .collect();
    if ratios.is_empty() {
        return Err(Error::Degenerate("no vertical test vectors".into()));
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let psi = median(ratios);
    if !(psi > 0.0) {
        return Err(Error::Degenerate(format!("fitted ratio {psi} is not positive")));
    }
    let mut per_sample = Vec::with_capacity(frames.len());
    let mut witness: Option<Witness> = None;
    for (k, f) in frames.iter().enumerate() {
        let n = f.frame.len();
        let mut worst = (0.0, 0, 0);
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { psi } else { 0.0 };
                let d = (f.pullback[(i, j)] - target).abs() / psi;
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        per_sample.push(worst.0);
        if witness.as_ref().is_none_or(|w| worst.0 > w.deviation) {
            let (d, i, j) = worst;
            let metric = if i == j { 1.0 } else { 0.0 };
            witness = Some(Witness {
                sample: k,
                point: f.point.clone(),
                x: f.frame[i].clone(),
                y: f.frame[j].clone(),
                pullback: f.pullback[(i, j)],
                metric,
                ratio: psi,
                deviation: d,
            });
        }
    }
    let max_deviation = per_sample.iter().copied().fold(0.0, f64::max);
    let verdict = if max_deviation < tolerance {
        if (psi - 1.0).abs() < tolerance {
            Verdict::Isometry
        } else {
            Verdict::Homothety
        }
    } else {
        Verdict::NotHomothety
    };
    Ok(VerdictReport {
        verdict,
        ratio: psi,
        ratio_spread: hi - lo,
        max_deviation,
        per_sample,
        tolerance,
        expected_ratio,
        expected_ratio_matches: expected_ratio.map(|e| (psi - e).abs() < tolerance * e.abs().max(1.0)),
        theorem_backed: true,
        warning: None,
        witness: if verdict == Verdict::NotHomothety { witness } else { None },
    })
}

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

fn basis(n: usize, k: usize) -> Vec<f64> {
    (0..n).map(|j| (j == k) as u8 as f64).collect()
}

/// Compares `h^*G′` with `ψG` on coordinate frames of `TM` at `samples`.
pub fn tm_homothety_verdict(spec: &HomothetySpec, samples: &[BundlePoint], tolerance: f64) -> Result<VerdictReport> {
    use rayon::prelude::*;
    let source = spec.source_metric()?;
    let m = spec.dim();
    let vectors: Vec<Vec<f64>> = (m..2 * m).chain(0..m).map(|k| basis(2 * m, k)).collect();
    let frames = samples
        .par_iter()
        .map(|p| {
            let g = source.matrix(p)?;
            let pb = spec.pullback_metric(p)?;
            sample_frame(p.coords(), &g, &pb, &vectors, m)
        })
        .collect::<Result<Vec<_>>>()?;
    classify(&frames, tolerance, spec.expected_ratio)
}

pub const DIMENSION_TWO_WARNING: &str =
    "dim M = 2 is outside the sphere bundle homothety theorem; the verdict reports raw deviations only";

/// As [`tm_homothety_verdict`] on tangent spaces of `S_rM`, sampled at chart
/// points `q = (x, a)`; test vectors are the chart coordinate vectors.
pub fn srm_homothety_verdict(spec: &HomothetySpec, samples: &[Vec<f64>], tolerance: f64) -> Result<VerdictReport> {
    use rayon::prelude::*;
    let chart = spec
        .source_chart()?
        .ok_or_else(|| Error::Precondition("sphere bundle verdict needs radii r and s".into()))?;
    let source = spec.source_metric()?;
    let m = spec.dim();
    let frames = samples
        .par_iter()
        .map(|q| {
            let p = chart.bundle_point(q)?;
            let j = chart.jacobian(q)?;
            // angle columns (vertical) first
            let vectors: Vec<Vec<f64>> = (m..j.cols()).chain(0..m).map(|c| j.column(c)).collect();
            let g = source.matrix(&p)?;
            let pb = spec.pullback_metric(&p)?;
            sample_frame(q.clone(), &g, &pb, &vectors, m - 1)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = classify(&frames, tolerance, spec.expected_ratio)?;
    if m < 3 {
        report.theorem_backed = false;
        report.warning = Some(DIMENSION_TWO_WARNING.into());
    }
    Ok(report)
}

/// Result of checking `F_*(x,u) = (R/R₁)(x,u)` and the chain of isometries
/// between sphere bundles of space forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub f1: f64,
    pub f2: f64,
    pub s: f64,
    /// `(F_*)^*g^S` against `g^{f₁,f₂}` on `S_sM_{R₁}`.
    pub pullback: VerdictReport,
    pub links: Vec<(String, VerdictReport)>,
}

impl ChainReport {
    pub fn passes(&self) -> bool {
        self.pullback.verdict == Verdict::Isometry && self.links.iter().all(|(_, l)| l.verdict == Verdict::Isometry)
    }
}

/// `F : M_{R₁} → M_R`, `x ↦ (R/R₁)x` in stereographic coordinates of spheres
/// of dimension `m`; checks `(F_*)^*g^S = g^{f₁,f₂}` with `f₁ = f₂ = R²/R₁²`
/// on `S_sM_{R₁}`, `s = R₁r/R`, then each link of
/// `(S₁M_R, g^S) ≅ (S_{1/R}M₁, g^{R²,R²}) ≅ (S′_{1/R}M₁, (R²g)^{1,R²}) ≅ (S′₁M₁, (R²g)^{1,1})`.
pub fn spaceform_isometry_check(
    m: usize,
    r1: f64,
    big_r: f64,
    r: f64,
    seed: u64,
    samples: usize,
    tolerance: f64,
) -> Result<ChainReport> {
    let f = (big_r / r1).powi(2);
    let s = r1 * r / big_r;
    let pullback = spaceform_pullback(m, r1, big_r, r, seed, samples, tolerance)?;

    let unit = ChartedManifold::sphere(m, 1.0)?;
    let k = |v: f64| ScalarExpr::constant(v, m);
    let rr = big_r * big_r;
    let mut links = Vec::new();
    let first = spaceform_pullback(m, 1.0, big_r, 1.0, seed, samples, tolerance)?;
    links.push(("(S_1 M_R, g^S) ~ (S_{1/R} M_1, g^{R^2,R^2})".to_string(), first));
    let second = HomothetySpec::sphere(
        unit.clone(),
        k(rr),
        Weights::constant(rr, rr, m),
        Weights::constant(1.0, rr, m),
        k(1.0 / big_r),
        k(1.0 / big_r),
    )
    .with_expected_ratio(1.0);
    let third = HomothetySpec::sphere(
        unit,
        k(rr),
        Weights::constant(1.0, rr, m),
        Weights::constant(1.0, 1.0, m),
        k(1.0 / big_r),
        k(1.0),
    )
    .with_source_lambda(k(rr))
    .with_expected_ratio(1.0);
    for (name, spec) in [
        ("(S_{1/R} M_1, g^{R^2,R^2}) ~ (S'_{1/R} M_1, (R^2 g)^{1,R^2})", second),
        ("(S'_{1/R} M_1, (R^2 g)^{1,R^2}) ~ (S'_1 M_1, (R^2 g)^{1,1})", third),
    ] {
        let chart = spec.source_chart()?.expect("sphere spec has a chart");
        let qs = crate::sampling::chart_points(&chart, seed, samples);
        links.push((name.to_string(), srm_homothety_verdict(&spec, &qs, tolerance)?));
    }
    Ok(ChainReport {
        f1: f,
        f2: f,
        s,
        pullback,
        links,
    })
}

/// `(F_*)^*g^S` on `S_sM_{R₁}` against `g^{f,f}`, `f = R²/R₁²`, `s = R₁r/R`.
pub fn spaceform_pullback(
    m: usize,
    r1: f64,
    big_r: f64,
    r: f64,
    seed: u64,
    samples: usize,
    tolerance: f64,
) -> Result<VerdictReport> {
    use rayon::prelude::*;
    if !(r1 > 0.0 && big_r > 0.0 && r > 0.0) {
        return Err(Error::InvalidParameter("radii must be positive".into()));
    }
    let c = big_r / r1;
    let f = c * c;
    let small = ChartedManifold::sphere(m, r1)?;
    let chart = SphereBundleChart::new(small.clone(), ScalarExpr::constant(r1 * r / big_r, m))?;
    let source = WeightedSasakiMetric::new(small, ConnectionSpec::levi_civita(), Weights::constant(f, f, m));
    let target = WeightedSasakiMetric::sasaki(ChartedManifold::sphere(m, big_r)?);
    let qs = crate::sampling::chart_points(&chart, seed, samples);
    let frames = qs
        .par_iter()
        .map(|q| {
            let p = chart.bundle_point(q)?;
            let image = BundlePoint::from_coords(&p.coords().iter().map(|v| v * c).collect::<Vec<_>>());
            let pb = target.matrix(&image)?.scaled(c * c);
            let j = chart.jacobian(q)?;
            let vectors: Vec<Vec<f64>> = (m..j.cols()).chain(0..m).map(|k| j.column(k)).collect();
            sample_frame(q.clone(), &source.matrix(&p)?, &pb, &vectors, m - 1)
        })
        .collect::<Result<Vec<_>>>()?;
    classify(&frames, tolerance, Some(1.0))
}
