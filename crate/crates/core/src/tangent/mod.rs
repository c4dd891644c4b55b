//! Geometry of `TM` in the coordinates `(x, u)`.
//!
//! A coordinate tangent vector of `TM` is a `2m` vector `(X_x, X_u)`. For a
//! connection with coefficients `Γ`, set `B^k_i = Γ^k_{ij} u^j`; then
//! `δ_i = ∂_{x^i} − B^k_i ∂_{u^k}` spans the horizontal space and the
//! vertical part of `X` is `X^v = X_u + B X_x` (as a vector of `T_xM`).

mod forms;
mod product;

pub use forms::{
    d_one_form, d_two_form, dmu_identity_defect, mu_torsion_matrix, nijenhuis, nijenhuis_sup,
    symplectic_residual, ThreeForm,
};
pub use product::{product_connection, product_torsion_defect, product_curvature};

use crate::connection::{check_point, compatible_metric, connection_jets, ConnectionSpec};
use crate::curvature::metric_curvature;
use crate::dsl::{BinOp, Expr, Func, ScalarExpr};
use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::linalg::Mat;
use crate::manifold::ChartedManifold;

/// A point `u ∈ T_xM`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundlePoint {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl BundlePoint {
    pub fn new(x: Vec<f64>, u: Vec<f64>) -> Self {
        BundlePoint { x, u }
    }

    /// `(x, u)` as one coordinate vector of length `2m`.
    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.u).copied().collect()
    }

    pub fn from_coords(c: &[f64]) -> Self {
        let m = c.len() / 2;
        BundlePoint::new(c[..m].to_vec(), c[m..].to_vec())
    }
}

/// Weight functions `f₁ = e^{2φ₁}`, `f₂ = e^{2φ₂}` on the base.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    pub f1: ScalarExpr,
    pub f2: ScalarExpr,
}

fn exp_two(phi: &ScalarExpr) -> ScalarExpr {
    let e = Expr::call(Func::Exp, Expr::binary(BinOp::Mul, Expr::Num(2.0), phi.expr().clone()));
    ScalarExpr::from_expr(e, phi.dim()).expect("same dimension")
}

impl Weights {
    pub fn new(f1: ScalarExpr, f2: ScalarExpr) -> Self {
        Weights { f1, f2 }
    }

    pub fn sasaki(m: usize) -> Self {
        Weights::constant(1.0, 1.0, m)
    }

    pub fn constant(f1: f64, f2: f64, m: usize) -> Self {
        Weights::new(ScalarExpr::constant(f1, m), ScalarExpr::constant(f2, m))
    }

    /// Weights given by their logarithmic potentials `φ₁`, `φ₂`.
    pub fn from_phi(phi1: &ScalarExpr, phi2: &ScalarExpr) -> Self {
        Weights::new(exp_two(phi1), exp_two(phi2))
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<(T, T)> {
        let f1 = self.f1.eval(x)?;
        let f2 = self.f2.eval(x)?;
        if !(f1.value() > 0.0 && f2.value() > 0.0) {
            return Err(Error::Domain(format!(
                "weights must be positive, got f1 = {}, f2 = {}",
                f1.value(),
                f2.value()
            )));
        }
        Ok((f1, f2))
    }
}

/// `G = f₁ π*g ⊕ f₂ π*g` for the splitting of a metric connection. The
/// metric `g` is the one the connection is compatible with.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSasakiMetric {
    pub manifold: ChartedManifold,
    pub connection: ConnectionSpec,
    pub weights: Weights,
}

/// Pointwise ingredients on jets over the `2m` coordinates of `TM`.
#[derive(Clone, Debug)]
pub struct Local {
    pub m: usize,
    pub g: Mat<Jet>,
    pub b: Mat<Jet>,
    pub f1: Jet,
    pub f2: Jet,
    pub u: Vec<Jet>,
}

impl WeightedSasakiMetric {
    pub fn new(manifold: ChartedManifold, connection: ConnectionSpec, weights: Weights) -> Self {
        WeightedSasakiMetric {
            manifold,
            connection,
            weights,
        }
    }

    pub fn sasaki(manifold: ChartedManifold) -> Self {
        let m = manifold.dim();
        WeightedSasakiMetric::new(manifold, ConnectionSpec::levi_civita(), Weights::sasaki(m))
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    pub fn check(&self, p: &BundlePoint) -> Result<()> {
        check_point(&self.manifold, &p.x)?;
        if p.u.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: p.u.len(),
            });
        }
        Ok(())
    }

    /// Ingredients on jets `xu` (length `2m`, coordinates first); the result
    /// carries one order less than `xu`.
    pub fn local(&self, xu: &[Jet]) -> Result<Local> {
        let m = self.dim();
        let (x, u) = xu.split_at(m);
        let g = compatible_metric(&self.manifold, &self.connection, x)?;
        let gamma = connection_jets(&self.manifold, &self.connection, x)?;
        let (f1, f2) = self.weights.eval(x)?;
        Ok(Local {
            m,
            b: gamma.contract_last(u),
            g,
            f1,
            f2,
            u: u.to_vec(),
        })
    }

    pub fn local_at(&self, p: &BundlePoint, order: usize) -> Result<Local> {
        self.check(p)?;
        self.local(&Jet::seed(&p.coords(), order))
    }

    /// The `2m × 2m` matrix of `G` at `p`.
    pub fn matrix(&self, p: &BundlePoint) -> Result<Mat<f64>> {
        Ok(self.local_at(p, 1)?.metric().values())
    }

    /// Scalar curvature of `(TM, G)` at `p`, brute force.
    pub fn scalar_curvature(&self, p: &BundlePoint) -> Result<f64> {
        self.check(p)?;
        let c = p.coords();
        let g = self.local(&Jet::seed(&c, 3))?.metric();
        Ok(metric_curvature(&c, &g)?.scalar)
    }

    pub fn splitting_frame(&self, p: &BundlePoint) -> Result<SplittingFrame> {
        let l = self.local_at(p, 1)?;
        let b = l.b.values();
        Ok(SplittingFrame::new(&b, &p.u))
    }

    pub fn canonical_forms(&self, p: &BundlePoint) -> Result<CanonicalForms> {
        let l = self.local_at(p, 1)?;
        let v = |m: Mat<Jet>| m.values();
        Ok(CanonicalForms {
            eta: l.eta().iter().map(|j| j.value()).collect(),
            mu: l.mu().iter().map(|j| j.value()).collect(),
            omega_s: v(l.omega_s()),
            omega_g: v(l.omega_g()),
            complex_sasaki: v(l.complex_structure_sasaki()),
            complex_g: v(l.complex_structure()),
            metric: v(l.metric()),
        })
    }
}

fn block<T: Scalar>(m: usize, like: &T, f: impl Fn(usize, usize, usize, usize) -> Option<T>) -> Mat<T> {
    let z = like.zero_like();
    Mat::from_fn(2 * m, 2 * m, |r, c| f(r / m, c / m, r % m, c % m).unwrap_or_else(|| z.clone()))
}

impl Local {
    fn like(&self) -> &Jet {
        &self.f1
    }

    /// `ψ = φ₂ − φ₁` as `e^ψ = sqrt(f₂/f₁)`.
    pub fn exp_psi(&self) -> Jet {
        (self.f2.clone() / self.f1.clone()).sqrt()
    }

    /// `e^{ψ̄} = sqrt(f₁ f₂)`.
    pub fn exp_psi_bar(&self) -> Jet {
        (self.f1.clone() * self.f2.clone()).sqrt()
    }

    /// `K = [[I, 0], [B, I]]`, mapping `(X_x, X_u)` to `(X_x, X^v)`.
    pub fn split(&self) -> Mat<Jet> {
        let one = self.like().lift(1.0);
        block(self.m, self.like(), |bi, bj, i, j| match (bi, bj) {
            (0, 0) | (1, 1) if i == j => Some(one.clone()),
            (1, 0) => Some(self.b[(i, j)].clone()),
            _ => None,
        })
    }

    pub fn metric(&self) -> Mat<Jet> {
        let d = block(self.m, self.like(), |bi, bj, i, j| match (bi, bj) {
            (0, 0) => Some(self.g[(i, j)].clone() * self.f1.clone()),
            (1, 1) => Some(self.g[(i, j)].clone() * self.f2.clone()),
            _ => None,
        });
        d.congruence(&self.split())
    }

    /// `θ`: `X ↦ (0, X_x)`.
    pub fn theta(&self) -> Mat<Jet> {
        let one = self.like().lift(1.0);
        block(self.m, self.like(), |bi, bj, i, j| (bi == 1 && bj == 0 && i == j).then(|| one.clone()))
    }

    /// `θ^t`: `X ↦ (X^v, −B X^v)`, i.e. `[[B, I], [−B², −B]]`.
    pub fn theta_t(&self) -> Mat<Jet> {
        let one = self.like().lift(1.0);
        let bb = self.b.matmul(&self.b);
        block(self.m, self.like(), |bi, bj, i, j| match (bi, bj) {
            (0, 0) => Some(self.b[(i, j)].clone()),
            (0, 1) => (i == j).then(|| one.clone()),
            (1, 0) => Some(-bb[(i, j)].clone()),
            _ => Some(-self.b[(i, j)].clone()),
        })
    }

    /// `I^G = e^ψ θ^t − e^{−ψ} θ`.
    pub fn complex_structure(&self) -> Mat<Jet> {
        let e = self.exp_psi();
        let ei = e.recip();
        let tt = self.theta_t();
        let t = self.theta();
        Mat::from_fn(2 * self.m, 2 * self.m, |r, c| {
            tt[(r, c)].clone() * e.clone() - t[(r, c)].clone() * ei.clone()
        })
    }

    pub fn complex_structure_sasaki(&self) -> Mat<Jet> {
        let tt = self.theta_t();
        let t = self.theta();
        Mat::from_fn(2 * self.m, 2 * self.m, |r, c| tt[(r, c)].clone() - t[(r, c)].clone())
    }

    /// `ω^S(X,Y) = g(X^v, Y_x) − g(X_x, Y^v)` as the matrix `Xᵀ Ω Y`.
    pub fn omega_s(&self) -> Mat<Jet> {
        let gb = self.g.matmul(&self.b);
        block(self.m, self.like(), |bi, bj, i, j| match (bi, bj) {
            (0, 0) => Some(gb[(j, i)].clone() - gb[(i, j)].clone()),
            (0, 1) => Some(-self.g[(i, j)].clone()),
            (1, 0) => Some(self.g[(i, j)].clone()),
            _ => None,
        })
    }

    /// `ω^G(X,Y) = G(I^G X, Y)`, computed from its definition.
    pub fn omega_g(&self) -> Mat<Jet> {
        self.complex_structure().transpose().matmul(&self.metric())
    }

    /// `μ = g_ij u^j dx^i`.
    pub fn mu(&self) -> Vec<Jet> {
        let gu = self.g.mat_vec(&self.u);
        let z = self.like().zero_like();
        gu.into_iter().chain((0..self.m).map(|_| z.clone())).collect()
    }

    /// `η(X) = g(X^v, u)`.
    pub fn eta(&self) -> Vec<Jet> {
        let gu = self.g.mat_vec(&self.u);
        let btgu = self.b.transpose().mat_vec(&gu);
        btgu.into_iter().chain(gu).collect()
    }
}

/// Horizontal/vertical splitting of `T_{(x,u)}TM`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingFrame {
    pub b: Mat<f64>,
    /// Columns `δ_i`.
    pub horizontal: Vec<Vec<f64>>,
    /// Columns `∂_{u^i}`.
    pub vertical: Vec<Vec<f64>>,
    pub theta: Mat<f64>,
    pub theta_t: Mat<f64>,
    pub horizontal_projector: Mat<f64>,
    pub vertical_projector: Mat<f64>,
    pub xi: Vec<f64>,
    pub spray: Vec<f64>,
}

impl SplittingFrame {
    pub fn new(b: &Mat<f64>, u: &[f64]) -> Self {
        let m = b.rows();
        let n = 2 * m;
        let at = |r: usize, c: usize| b[(r, c)];
        let horizontal = (0..m)
            .map(|i| (0..n).map(|r| if r < m { (r == i) as u8 as f64 } else { -at(r - m, i) }).collect())
            .collect();
        let vertical = (0..m)
            .map(|i| (0..n).map(|r| (r == m + i) as u8 as f64).collect())
            .collect();
        let bb = b.matmul(b);
        let theta = Mat::from_fn(n, n, |r, c| (r >= m && c < m && r - m == c) as u8 as f64);
        let theta_t = Mat::from_fn(n, n, |r, c| match (r < m, c < m) {
            (true, true) => at(r, c),
            (true, false) => (c - m == r) as u8 as f64,
            (false, true) => -bb[(r - m, c)],
            (false, false) => -at(r - m, c - m),
        });
        let horizontal_projector = Mat::from_fn(n, n, |r, c| match (r < m, c < m) {
            (true, true) => (r == c) as u8 as f64,
            (false, true) => -at(r - m, c),
            _ => 0.0,
        });
        let vertical_projector = Mat::from_fn(n, n, |r, c| match (r < m, c < m) {
            (false, true) => at(r - m, c),
            (false, false) => (r == c) as u8 as f64,
            _ => 0.0,
        });
        let xi: Vec<f64> = (0..m).map(|_| 0.0).chain(u.iter().copied()).collect();
        let spray = theta_t.mat_vec(&xi);
        SplittingFrame {
            b: b.clone(),
            horizontal,
            vertical,
            theta,
            theta_t,
            horizontal_projector,
            vertical_projector,
            xi,
            spray,
        }
    }

    /// `X^v` as a vector of `T_xM`.
    pub fn vertical_part(&self, x: &[f64]) -> Vec<f64> {
        let m = self.b.rows();
        let bx = self.b.mat_vec(&x[..m]);
        (0..m).map(|k| x[m + k] + bx[k]).collect()
    }

    /// Horizontal lift of `w ∈ T_xM`.
    pub fn horizontal_lift(&self, w: &[f64]) -> Vec<f64> {
        let bw = self.b.mat_vec(w);
        w.iter().copied().chain(bw.iter().map(|v| -v)).collect()
    }

    /// Vertical lift of `w ∈ T_xM`.
    pub fn vertical_lift(&self, w: &[f64]) -> Vec<f64> {
        w.iter().map(|_| 0.0).chain(w.iter().copied()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalForms {
    pub eta: Vec<f64>,
    pub mu: Vec<f64>,
    pub omega_s: Mat<f64>,
    pub omega_g: Mat<f64>,
    pub complex_sasaki: Mat<f64>,
    pub complex_g: Mat<f64>,
    pub metric: Mat<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(s: &str, m: usize) -> ScalarExpr {
        ScalarExpr::parse(s, m).unwrap()
    }

    fn sphere_point() -> BundlePoint {
        BundlePoint::new(vec![0.3, -0.4], vec![0.7, 0.5])
    }

    #[test]
    fn euclidean_frame_is_trivial() {
        let w = WeightedSasakiMetric::sasaki(ChartedManifold::euclidean(2));
        let f = w.splitting_frame(&sphere_point()).unwrap();
        assert_eq!(f.horizontal[0], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.theta.mat_vec(&[1.0, 0.0, 0.0, 0.0]), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(w.matrix(&sphere_point()).unwrap(), Mat::identity(4));
    }

    #[test]
    fn frame_identities_on_sphere() {
        let w = WeightedSasakiMetric::sasaki(ChartedManifold::sphere(2, 1.0).unwrap());
        let p = sphere_point();
        let f = w.splitting_frame(&p).unwrap();
        let n = 4;
        assert!(f.theta.matmul(&f.theta).max_abs() < 1e-15);
        let proj = f.theta_t.matmul(&f.theta).sub(&f.horizontal_projector);
        assert!(proj.max_abs() < 1e-12);
        let total = Mat::from_fn(n, n, |r, c| f.horizontal_projector[(r, c)] + f.vertical_projector[(r, c)]);
        assert!(total.sub(&Mat::identity(n)).max_abs() < 1e-12);
        let mirror = Mat::from_fn(n, n, |r, c| {
            f.theta_t.matmul(&f.theta)[(r, c)] + f.theta.matmul(&f.theta_t)[(r, c)]
        });
        assert!(mirror.sub(&Mat::identity(n)).max_abs() < 1e-12);
        let pv = &f.vertical_projector;
        assert!(pv.matmul(pv).sub(pv).max_abs() < 1e-12);
        assert_eq!(f.spray[..2], p.u[..]);
        for h in &f.horizontal {
            assert!(f.vertical_part(h).iter().all(|v| v.abs() < 1e-15));
            let th = f.theta_t.mat_vec(&f.theta.mat_vec(h));
            assert!(th.iter().zip(h).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }

    #[test]
    fn weighted_blocks_in_adapted_frame() {
        let m = ChartedManifold::sphere(2, 1.0).unwrap();
        let w = WeightedSasakiMetric::new(m.clone(), ConnectionSpec::levi_civita(), Weights::constant(1.5, 4.0, 2));
        let p = sphere_point();
        let g = w.matrix(&p).unwrap();
        assert!(g.cholesky().is_ok());
        assert!(g[(0, 2)].abs() > 1e-3, "coordinate matrix should not be block diagonal");
        let f = w.splitting_frame(&p).unwrap();
        let frame: Vec<Vec<f64>> = f.horizontal.iter().chain(&f.vertical).cloned().collect();
        let e = Mat::from_fn(4, 4, |r, c| frame[c][r]);
        let adapted = g.congruence(&e);
        let base = m.metric_at(&p.x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((adapted[(i, j)] - 1.5 * base[(i, j)]).abs() < 1e-12);
                assert!((adapted[(2 + i, 2 + j)] - 4.0 * base[(i, j)]).abs() < 1e-12);
                assert!(adapted[(i, 2 + j)].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_vertical_weight_scales_block() {
        let w = WeightedSasakiMetric::new(
            ChartedManifold::euclidean(2),
            ConnectionSpec::levi_civita(),
            Weights::constant(1.0, 4.0, 2),
        );
        let g = w.matrix(&sphere_point()).unwrap();
        let mut expected = Mat::identity(4);
        expected[(2, 2)] = 4.0;
        expected[(3, 3)] = 4.0;
        assert_eq!(g, expected);
    }

    #[test]
    fn conformal_change_tilts_horizontal_space() {
        let m = ChartedManifold::euclidean(2);
        let spec = ConnectionSpec::conformal(expr("0.3*x1", 2));
        let w = WeightedSasakiMetric::new(m.clone(), spec, Weights::sasaki(2));
        let base = WeightedSasakiMetric::sasaki(m);
        let p = sphere_point();
        let tilted = w.splitting_frame(&p).unwrap();
        let original = base.splitting_frame(&p).unwrap();
        let worst = tilted
            .horizontal
            .iter()
            .map(|h| original.vertical_part(h).iter().fold(0.0f64, |a, v| a.max(v.abs())))
            .fold(0.0, f64::max);
        assert!(worst > 1e-2);
    }

    #[test]
    fn complex_structure_is_compatible() {
        let m = ChartedManifold::sphere(2, 1.0).unwrap();
        let weights = Weights::from_phi(&expr("0.1*x1 - 0.2*x2", 2), &expr("0.3*x1 + 0.1*x2", 2));
        let w = WeightedSasakiMetric::new(m, ConnectionSpec::levi_civita(), weights);
        let p = sphere_point();
        let c = w.canonical_forms(&p).unwrap();
        let j2 = c.complex_g.matmul(&c.complex_g);
        assert!(Mat::from_fn(4, 4, |r, k| j2[(r, k)] + (r == k) as u8 as f64).max_abs() < 1e-12);
        let compat = c.metric.congruence(&c.complex_g).sub(&c.metric);
        assert!(compat.max_abs() < 1e-12);
        let x = w.local_at(&p, 1).unwrap();
        let factor = x.exp_psi_bar().value();
        assert!(c.omega_g.sub(&c.omega_s.scaled(factor)).max_abs() < 1e-12);
        assert!(Mat::from_fn(4, 4, |r, k| c.omega_g[(r, k)] + c.omega_g[(k, r)]).max_abs() < 1e-12);
    }

    #[test]
    fn equal_weights_give_sasaki_structure() {
        let m = ChartedManifold::sphere(2, 1.0).unwrap();
        let w = WeightedSasakiMetric::new(m, ConnectionSpec::levi_civita(), Weights::constant(2.0, 2.0, 2));
        let c = w.canonical_forms(&sphere_point()).unwrap();
        assert!(c.complex_g.sub(&c.complex_sasaki).max_abs() < 1e-15);
    }

    #[test]
    fn mu_ignores_torsion() {
        let m = ChartedManifold::sphere(2, 1.0).unwrap();
        let a = WeightedSasakiMetric::sasaki(m.clone());
        let b = WeightedSasakiMetric::new(
            m,
            ConnectionSpec::levi_civita().with_torsion(expr("x1 + x2^2", 2)),
            Weights::sasaki(2),
        );
        let p = sphere_point();
        let (ma, mb) = (a.canonical_forms(&p).unwrap().mu, b.canonical_forms(&p).unwrap().mu);
        assert!(ma.iter().zip(&mb).all(|(x, y)| (x - y).abs() < 1e-12));
        let f = a.splitting_frame(&p).unwrap();
        // μ(X) = ⟨θX, ξ⟩ for the Sasaki metric
        let gs = a.matrix(&p).unwrap();
        for col in 0..4 {
            let mut x = vec![0.0; 4];
            x[col] = 1.0;
            let tx = f.theta.mat_vec(&x);
            assert!((gs.bilinear(&tx, &f.xi) - ma[col]).abs() < 1e-12);
        }
    }

    #[test]
    fn homothetic_weights_divide_scalar_curvature() {
        let m = ChartedManifold::sphere(2, 1.0).unwrap();
        let p = sphere_point();
        let s1 = WeightedSasakiMetric::sasaki(m.clone()).scalar_curvature(&p).unwrap();
        let s3 = WeightedSasakiMetric::new(m, ConnectionSpec::levi_civita(), Weights::constant(3.0, 3.0, 2))
            .scalar_curvature(&p)
            .unwrap();
        assert!(s1.is_finite());
        assert!((s3 - s1 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn flat_tangent_bundle() {
        let w = WeightedSasakiMetric::new(ChartedManifold::euclidean(2), ConnectionSpec::levi_civita(), Weights::constant(2.0, 0.5, 2));
        assert!(w.scalar_curvature(&sphere_point()).unwrap().abs() < 1e-14);
    }
}
