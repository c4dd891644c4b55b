//! Tangent sphere bundles `S_rM = {u : |u|_g = r(x)}` of variable radius.
//!
//! Chart: `q = (x, a)` with `n = m − 1` angles and
//! `u = r(x) · C(x)^{-T} · σ(a)`, where `g = C Cᵀ` is the Cholesky factor and
//! `σ` the hyperspherical parametrization of the unit sphere `S^n ⊂ ℝ^m`.

use rand::Rng;

use crate::connection::{check_point, compatible_metric, connection_coeffs, ConnectionSpec};
use crate::curvature::{curvature, metric_curvature, CurvatureData};
use crate::dsl::ScalarExpr;
use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::linalg::Mat;
use crate::manifold::ChartedManifold;
use crate::tangent::{BundlePoint, WeightedSasakiMetric};

/// Distance kept from the coordinate singularities of `σ`.
pub const POLE_MARGIN: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct SphereBundleChart {
    pub manifold: ChartedManifold,
    /// Conformal potential of the fiber metric, as in [`ConnectionSpec`].
    pub conformal: Option<ScalarExpr>,
    pub radius: ScalarExpr,
}

/// `σ(a)`: `σ_1 = cos a_1`, `σ_k = sin a_1 ⋯ sin a_{k−1} cos a_k`,
/// `σ_m = sin a_1 ⋯ sin a_{m−1}`.
pub fn sphere_param<T: Scalar>(a: &[T], like: &T) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + 1);
    let mut prod = like.lift(1.0);
    for ak in a {
        out.push(prod.clone() * ak.cos());
        prod = prod * ak.sin();
    }
    out.push(prod);
    out
}

impl SphereBundleChart {
    pub fn new(manifold: ChartedManifold, radius: ScalarExpr) -> Result<Self> {
        if manifold.dim() < 2 {
            return Err(Error::InvalidParameter("sphere bundles need dim M >= 2".into()));
        }
        if radius.dim() != manifold.dim() {
            return Err(Error::Dimension {
                expected: manifold.dim(),
                got: radius.dim(),
            });
        }
        Ok(SphereBundleChart {
            manifold,
            conformal: None,
            radius,
        })
    }

    /// Sphere bundle of the metric `e^{2φ} g`.
    pub fn with_conformal(mut self, phi: Option<ScalarExpr>) -> Self {
        self.conformal = phi;
        self
    }

    /// Chart matching the metric of a weighted Sasaki structure.
    pub fn for_metric(w: &WeightedSasakiMetric, radius: ScalarExpr) -> Result<Self> {
        Ok(SphereBundleChart::new(w.manifold.clone(), radius)?.with_conformal(w.connection.conformal.clone()))
    }

    pub fn base_dim(&self) -> usize {
        self.manifold.dim()
    }

    /// `2m − 1`.
    pub fn dim(&self) -> usize {
        2 * self.base_dim() - 1
    }

    fn metric_spec(&self) -> ConnectionSpec {
        ConnectionSpec {
            conformal: self.conformal.clone(),
            torsion: None,
        }
    }

    pub fn angle_box(&self) -> Vec<(f64, f64)> {
        let n = self.base_dim() - 1;
        let pi = std::f64::consts::PI;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    (POLE_MARGIN, 2.0 * pi - POLE_MARGIN)
                } else {
                    (POLE_MARGIN, pi - POLE_MARGIN)
                }
            })
            .collect()
    }

    pub fn check(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: q.len(),
            });
        }
        let m = self.base_dim();
        check_point(&self.manifold, &q[..m])?;
        let inside = q[m..].iter().zip(self.angle_box()).all(|(a, (lo, hi))| *a >= lo && *a <= hi);
        if !inside {
            return Err(Error::OutsideDomain { point: q.to_vec() });
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut q = self.manifold.sample_point(rng);
        q.extend(self.angle_box().into_iter().map(|(lo, hi)| rng.random_range(lo..hi)));
        q
    }

    /// Radius value on jets.
    pub fn radius_at<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let r = self.radius.eval(x)?;
        if !(r.value() > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {}", r.value())));
        }
        Ok(r)
    }

    /// `(x, u)` as functions of `q`, on any carrier.
    pub fn embed<T: Scalar>(&self, q: &[T]) -> Result<Vec<T>> {
        let m = self.base_dim();
        let (x, a) = q.split_at(m);
        let g = compatible_metric(&self.manifold, &self.metric_spec(), x)?;
        let c = g.cholesky().map_err(|pivot| Error::NotPositiveDefinite {
            point: x.iter().map(|v| v.value()).collect(),
            pivot,
        })?;
        let sigma = sphere_param(a, &q[0]);
        let r = self.radius_at(x)?;
        let u = c.solve_upper_transpose(&sigma);
        Ok(x.iter().cloned().chain(u.into_iter().map(|v| v * r.clone())).collect())
    }

    pub fn bundle_point(&self, q: &[f64]) -> Result<BundlePoint> {
        self.check(q)?;
        Ok(BundlePoint::from_coords(&self.embed(q)?))
    }

    /// Embedding Jacobian `∂(x,u)/∂q` (`2m × (2m−1)`).
    pub fn jacobian(&self, q: &[f64]) -> Result<Mat<f64>> {
        self.check(q)?;
        let e = self.embed(&Jet::seed(q, 1))?;
        Ok(Mat::from_fn(e.len(), q.len(), |r, c| e[r].derivative(c).value()))
    }

    /// Largest `|g(X^v, u) − r X(r)|` over the Jacobian columns, with the
    /// Levi-Civita splitting of the fiber metric.
    pub fn tangency_defect(&self, q: &[f64]) -> Result<f64> {
        let m = self.base_dim();
        let j = self.jacobian(q)?;
        let p = self.bundle_point(q)?;
        let spec = self.metric_spec();
        let gamma = connection_coeffs(&self.manifold, &spec, &p.x)?;
        let g = compatible_metric(&self.manifold, &spec, &p.x)?;
        let r = self.radius.eval_jet(&p.x)?;
        let gu = g.mat_vec(&p.u);
        let mut worst: f64 = 0.0;
        for c in 0..j.cols() {
            let col = j.column(c);
            let (xx, xu) = col.split_at(m);
            let bx = gamma.apply(xx, &p.u);
            let xv: Vec<f64> = (0..m).map(|k| xu[k] + bx[k]).collect();
            let lhs: f64 = xv.iter().zip(&gu).map(|(a, b)| a * b).sum();
            let rhs: f64 = r.value * r.gradient.iter().zip(xx).map(|(a, b)| a * b).sum::<f64>();
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(worst)
    }

    fn check_metric(&self, w: &WeightedSasakiMetric) -> Result<()> {
        if w.manifold != self.manifold || w.connection.conformal != self.conformal {
            return Err(Error::InvalidParameter(
                "weighted metric and sphere bundle chart use different base metrics".into(),
            ));
        }
        Ok(())
    }

    /// Pullback `Jᵀ G J` on jets over `q`; the result has one order less
    /// than `q`.
    pub fn induced_metric_jet(&self, w: &WeightedSasakiMetric, q: &[Jet]) -> Result<Mat<Jet>> {
        self.check_metric(w)?;
        let xu = self.embed(q)?;
        let n = q.len();
        let jac = Mat::from_fn(xu.len(), n, |r, c| xu[r].derivative(c));
        let g = w.local(&xu)?.metric();
        Ok(g.congruence(&jac))
    }

    pub fn induced_metric(&self, w: &WeightedSasakiMetric, q: &[f64]) -> Result<Mat<f64>> {
        self.check(q)?;
        let h = self.induced_metric_jet(w, &Jet::seed(q, 2))?.values();
        h.cholesky().map_err(|pivot| Error::NotPositiveDefinite { point: q.to_vec(), pivot })?;
        Ok(h)
    }

    /// Brute-force curvature of the induced metric at `q`.
    pub fn curvature(&self, w: &WeightedSasakiMetric, q: &[f64]) -> Result<CurvatureData> {
        self.check(q)?;
        let h = self.induced_metric_jet(w, &Jet::seed(q, 3))?;
        let hv = h.values();
        hv.cholesky().map_err(|pivot| Error::NotPositiveDefinite { point: q.to_vec(), pivot })?;
        metric_curvature(q, &h)
    }

    pub fn scalar_curvature(&self, w: &WeightedSasakiMetric, q: &[f64]) -> Result<f64> {
        Ok(self.curvature(w, q)?.scalar)
    }

    /// `‖Ric − Scal/(2m−1) h‖ / ‖h‖` for the induced metric.
    pub fn einstein_residual(&self, w: &WeightedSasakiMetric, q: &[f64]) -> Result<f64> {
        Ok(self.curvature(w, q)?.einstein_residual())
    }
}

/// Closed-form scalar curvature of `(S_sM, g^{f₁,f₂})` for constant weights
/// and radius:
/// `Scal_M/f₁ − (f₂/4f₁²) Σ_{ijk} ⟨R(e_i,e_j)u, e_k⟩² + (n−1)n/(f₂s²)`
/// with `u` the actual point (`|u|_g = s`) and `(e_i)` a `g`-orthonormal frame.
pub fn scal_formula_general(
    manifold: &ChartedManifold,
    f1: f64,
    f2: f64,
    s: f64,
    x: &[f64],
    direction: &[f64],
) -> Result<f64> {
    if !(f1 > 0.0 && f2 > 0.0 && s > 0.0) {
        return Err(Error::InvalidParameter("weights and radius must be positive".into()));
    }
    let m = manifold.dim();
    let curv = curvature(manifold, &ConnectionSpec::levi_civita(), x)?;
    let g = &curv.metric;
    let norm = g.bilinear(direction, direction).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Degenerate("direction must be non-zero".into()));
    }
    let u: Vec<f64> = direction.iter().map(|v| v * s / norm).collect();
    let frame = orthonormal_frame(g)?;
    let mut sum = 0.0;
    for i in 0..m {
        for j in 0..m {
            let rv = curv.apply(&frame[i], &frame[j], &u);
            for ek in &frame {
                sum += g.bilinear(&rv, ek).powi(2);
            }
        }
    }
    let n = (m - 1) as f64;
    Ok(curv.scalar / f1 - f2 / (4.0 * f1 * f1) * sum + (n - 1.0) * n / (f2 * s * s))
}

/// `g`-orthonormal frame from the Cholesky factor: columns of `C^{-T}`.
pub fn orthonormal_frame(g: &Mat<f64>) -> Result<Vec<Vec<f64>>> {
    let c = g.cholesky().map_err(|pivot| Error::NotPositiveDefinite { point: vec![], pivot })?;
    let m = g.rows();
    Ok((0..m)
        .map(|i| {
            let e: Vec<f64> = (0..m).map(|k| (k == i) as u8 as f64).collect();
            c.solve_upper_transpose(&e)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    pub fn holds(self, v: f64) -> bool {
        match self {
            Sign::Positive => v > 0.0,
            Sign::Negative => v < 0.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
        }
    }
}

/// Parameters of a space form sphere bundle `(S_sM_R, g^{f₁,f₂})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceFormParams {
    pub sign: Sign,
    pub radius: f64,
    pub f1: f64,
    pub f2: f64,
    /// Fiber dimension `n = m − 1`.
    pub n: usize,
}

impl SpaceFormParams {
    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.f1 > 0.0 && self.f2 > 0.0) || self.n == 0 {
            return Err(Error::InvalidParameter(format!(
                "space form parameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `±n(n+1)/(f₁R²) − (f₂/4f₁²)(s²/R⁴)2n + (n−1)n/(f₂s²)`.
pub fn scal_formula_spaceform(p: &SpaceFormParams, s: f64) -> Result<f64> {
    p.validate()?;
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("fiber radius must be positive, got {s}")));
    }
    let n = p.n as f64;
    let r2 = p.radius * p.radius;
    Ok(p.sign.factor() * n * (n + 1.0) / (p.f1 * r2) - p.f2 / (4.0 * p.f1 * p.f1) * (s * s / (r2 * r2)) * 2.0 * n
        + (n - 1.0) * n / (p.f2 * s * s))
}

/// Log grid on `[1e-4, 1e4]`.
pub const SEARCH_DECADES: (i32, i32) = (-4, 4);
pub const POINTS_PER_DECADE: usize = 20;
/// Minimum `|Scal|` accepted for a returned radius.
pub const SIGN_MARGIN: f64 = 1e-3;

/// A radius `s` for which `scal_formula_spaceform` has the requested sign.
///
/// The log grid is scanned first. When the sign changes between neighbours
/// the root `s*` is bisected and `s* · 10^{±1/2}` on the target side is
/// returned if it clears [`SIGN_MARGIN`]; otherwise the grid point closest
/// to the end of the grid that has the sign is used.
pub fn find_radius_for_sign(p: &SpaceFormParams, target: Sign) -> Result<f64> {
    p.validate()?;
    let (lo, hi) = SEARCH_DECADES;
    let count = (hi - lo) as usize * POINTS_PER_DECADE + 1;
    let grid: Vec<f64> = (0..count)
        .map(|i| 10f64.powf(lo as f64 + i as f64 / POINTS_PER_DECADE as f64))
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&s| scal_formula_spaceform(p, s)).collect::<Result<_>>()?;
    let ok = |v: f64| target.holds(v) && v.abs() >= SIGN_MARGIN;

    for i in 0..count - 1 {
        if (vals[i] > 0.0) != (vals[i + 1] > 0.0) {
            let root = bisect(p, grid[i], grid[i + 1])?;
            let step = 10f64.powf(0.5);
            for cand in [root * step, root / step] {
                let v = scal_formula_spaceform(p, cand)?;
                if ok(v) {
                    return Ok(cand);
                }
            }
        }
    }
    let first = vals.iter().position(|&v| ok(v));
    let last = vals.iter().rposition(|&v| ok(v));
    match (first, last) {
        (Some(f), Some(l)) => {
            // prefer whichever end of the grid is reached
            if l == count - 1 || count - 1 - l <= f {
                Ok(grid[l])
            } else {
                Ok(grid[f])
            }
        }
        _ => Err(Error::Unreachable(format!(
            "sign {} R={} f1={} f2={} n={}",
            target.symbol(),
            p.radius,
            p.f1,
            p.f2,
            p.n
        ))),
    }
}

fn bisect(p: &SpaceFormParams, mut a: f64, mut b: f64) -> Result<f64> {
    let fa = scal_formula_spaceform(p, a)?;
    for _ in 0..200 {
        let mid = (a * b).sqrt();
        let fm = scal_formula_spaceform(p, mid)?;
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
        if b / a - 1.0 < 1e-14 {
            break;
        }
    }
    Ok((a * b).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tangent::Weights;

    fn expr(s: &str, m: usize) -> ScalarExpr {
        ScalarExpr::parse(s, m).unwrap()
    }

    fn params(sign: Sign, n: usize) -> SpaceFormParams {
        SpaceFormParams {
            sign,
            radius: 1.0,
            f1: 1.0,
            f2: 1.0,
            n,
        }
    }

    #[test]
    fn embedding_has_prescribed_norm() {
        let m = ChartedManifold::sphere(3, 1.0).unwrap();
        let chart = SphereBundleChart::new(m.clone(), expr("1 + 0.3*sin(x1)", 3)).unwrap();
        let q = [0.2, -0.4, 0.3, 1.1, 2.5];
        let p = chart.bundle_point(&q).unwrap();
        let g = m.metric_at(&p.x).unwrap();
        let r = 1.0 + 0.3 * 0.2f64.sin();
        assert!((g.bilinear(&p.u, &p.u).sqrt() - r).abs() < 1e-12);
        assert!(chart.tangency_defect(&q).unwrap() < 1e-12);
    }

    #[test]
    fn flat_circle_bundle() {
        let chart = SphereBundleChart::new(ChartedManifold::euclidean(2), expr("1", 2)).unwrap();
        let w = WeightedSasakiMetric::sasaki(ChartedManifold::euclidean(2));
        let q = [0.1, 0.3, 1.0];
        assert!(chart.induced_metric(&w, &q).unwrap().sub(&Mat::identity(3)).max_abs() < 1e-14);
        assert!(chart.scalar_curvature(&w, &q).unwrap().abs() < 1e-12);
    }

    #[test]
    fn anchor_values() {
        let sphere2 = ChartedManifold::sphere(2, 1.0).unwrap();
        let chart = SphereBundleChart::new(sphere2.clone(), expr("1", 2)).unwrap();
        let w = WeightedSasakiMetric::sasaki(sphere2);
        let s = chart.scalar_curvature(&w, &[0.3, -0.2, 2.0]).unwrap();
        assert!((s - 1.5).abs() < 1e-9, "{s}");
        assert!((scal_formula_spaceform(&params(Sign::Positive, 1), 1.0).unwrap() - 1.5).abs() < 1e-15);

        let sphere3 = ChartedManifold::sphere(3, 1.0).unwrap();
        let chart = SphereBundleChart::new(sphere3.clone(), expr("1", 3)).unwrap();
        let w = WeightedSasakiMetric::sasaki(sphere3.clone());
        let s = chart.scalar_curvature(&w, &[0.3, -0.2, 0.1, 1.0, 2.0]).unwrap();
        assert!((s - 7.0).abs() < 1e-9, "{s}");
        let general = scal_formula_general(&sphere3, 1.0, 1.0, 1.0, &[0.3, -0.2, 0.1], &[0.2, 1.0, -0.4]).unwrap();
        assert!((general - 7.0).abs() < 1e-10);

        let flat = ChartedManifold::euclidean(3);
        let chart = SphereBundleChart::new(flat.clone(), expr("1", 3)).unwrap();
        let w = WeightedSasakiMetric::sasaki(flat);
        assert!((chart.scalar_curvature(&w, &[0.3, -0.2, 0.1, 1.0, 2.0]).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn hyperbolic_formula() {
        let h = ChartedManifold::hyperbolic(3, 1.0).unwrap();
        let v = scal_formula_general(&h, 1.0, 1.0, 1.0, &[0.1, 0.0, -0.2], &[1.0, 0.0, 0.0]).unwrap();
        assert!((v + 5.0).abs() < 1e-10);
        assert!((scal_formula_spaceform(&params(Sign::Negative, 2), 1.0).unwrap() + 5.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_brute_force_matches_formula() {
        let h = ChartedManifold::hyperbolic(3, 2.0).unwrap();
        let w = WeightedSasakiMetric::new(h.clone(), ConnectionSpec::levi_civita(), Weights::constant(0.5, 2.0, 3));
        let chart = SphereBundleChart::new(h, expr("0.5", 3)).unwrap();
        let p = SpaceFormParams {
            sign: Sign::Negative,
            radius: 2.0,
            f1: 0.5,
            f2: 2.0,
            n: 2,
        };
        let expected = scal_formula_spaceform(&p, 0.5).unwrap();
        let got = chart.scalar_curvature(&w, &[0.1, 0.2, -0.3, 0.7, 4.0]).unwrap();
        assert!((got - expected).abs() < 1e-8, "{got} vs {expected}");
    }

    #[test]
    fn radius_search_examples() {
        let s = find_radius_for_sign(&params(Sign::Positive, 2), Sign::Negative).unwrap();
        assert!(s > 1.0);
        assert!(scal_formula_spaceform(&params(Sign::Positive, 2), s).unwrap() < 0.0);
        let s = find_radius_for_sign(&params(Sign::Negative, 2), Sign::Positive).unwrap();
        assert!(s < 1.0);
        assert!(scal_formula_spaceform(&params(Sign::Negative, 2), s).unwrap() > 0.0);
        let s = find_radius_for_sign(&params(Sign::Positive, 2), Sign::Positive).unwrap();
        assert!(scal_formula_spaceform(&params(Sign::Positive, 2), s).unwrap() > 0.0);
    }

    #[test]
    fn negative_circle_bundle_never_positive() {
        let r = find_radius_for_sign(&params(Sign::Negative, 1), Sign::Positive);
        assert!(matches!(r, Err(Error::Unreachable(_))));
    }

    #[test]
    fn base_sphere_is_einstein_bundle_is_not() {
        let sphere3 = ChartedManifold::sphere(3, 1.0).unwrap();
        let c = curvature(&sphere3, &ConnectionSpec::levi_civita(), &[0.1, 0.2, 0.3]).unwrap();
        assert!(c.einstein_residual() < 1e-10);
        let chart = SphereBundleChart::new(sphere3.clone(), expr("1", 3)).unwrap();
        let w = WeightedSasakiMetric::sasaki(sphere3);
        assert!(chart.einstein_residual(&w, &[0.1, 0.2, 0.3, 1.0, 2.0]).unwrap() > 1e-3);
    }
}
