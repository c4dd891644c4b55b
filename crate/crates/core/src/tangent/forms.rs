//! Exterior derivatives on `TM`, the `dμ` identity, the symplectic residual
//! and the Nijenhuis tensor.
//!
//! A 2-form is stored as the antisymmetric matrix `β(X,Y) = Xᵀ β Y`, so
//! `dα(∂_A, ∂_B) = ∂_A α_B − ∂_B α_A` and
//! `dβ(∂_A, ∂_B, ∂_C) = ∂_A β_BC + ∂_B β_CA + ∂_C β_AB`.

use crate::connection::connection_jets;
use crate::error::Result;
use crate::jet::Jet;
use crate::linalg::Mat;

use super::{BundlePoint, Local, WeightedSasakiMetric};

/// Dense antisymmetric 3-form coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeForm {
    pub n: usize,
    pub data: Vec<f64>,
}

impl ThreeForm {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Exterior derivative of a 1-form field given on jets, at `p`.
pub fn d_one_form<F>(field: F, p: &[f64]) -> Result<Mat<f64>>
where
    F: Fn(&[Jet]) -> Result<Vec<Jet>>,
{
    let alpha = field(&Jet::seed(p, 2))?;
    let n = p.len();
    let d: Vec<Vec<f64>> = (0..n)
        .map(|a| alpha.iter().map(|c| c.derivative(a).value()).collect())
        .collect();
    Ok(Mat::from_fn(n, n, |a, b| d[a][b] - d[b][a]))
}

/// Exterior derivative of a 2-form field given on jets, at `p`.
pub fn d_two_form<F>(field: F, p: &[f64]) -> Result<ThreeForm>
where
    F: Fn(&[Jet]) -> Result<Mat<Jet>>,
{
    let beta = field(&Jet::seed(p, 2))?;
    let n = p.len();
    // d[a] = ∂_a β
    let d: Vec<Mat<f64>> = (0..n).map(|a| beta.map(|c| c.derivative(a).value())).collect();
    let mut data = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                data[(a * n + b) * n + c] = d[a][(b, c)] + d[b][(c, a)] + d[c][(a, b)];
            }
        }
    }
    Ok(ThreeForm { n, data })
}

/// The 2-form `(X,Y) ↦ g(T(X_x, Y_x), u)`, zero on vertical slots.
pub fn mu_torsion_matrix(w: &WeightedSasakiMetric, p: &BundlePoint) -> Result<Mat<f64>> {
    w.check(p)?;
    let m = w.dim();
    let t = connection_jets(&w.manifold, &w.connection, &Jet::seed(&p.x, 1))?
        .values()
        .torsion();
    let g = crate::connection::compatible_metric(&w.manifold, &w.connection, &p.x)?;
    let gu = g.mat_vec(&p.u);
    Ok(Mat::from_fn(2 * m, 2 * m, |a, b| {
        if a >= m || b >= m {
            return 0.0;
        }
        (0..m).map(|k| t.get(k, a, b) * gu[k]).sum()
    }))
}

/// `max |dμ − ω^S − μ∘T|` at `p`; both sides computed independently.
pub fn dmu_identity_defect(w: &WeightedSasakiMetric, p: &BundlePoint) -> Result<f64> {
    w.check(p)?;
    let dmu = d_one_form(|xu| Ok(w.local(xu)?.mu()), &p.coords())?;
    let omega = w.local_at(p, 1)?.omega_s().values();
    let mt = mu_torsion_matrix(w, p)?;
    let n = 2 * w.dim();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            worst = worst.max((dmu[(a, b)] - omega[(a, b)] - mt[(a, b)]).abs());
        }
    }
    Ok(worst)
}

/// Largest coefficient of `dω^G` at `p`.
pub fn symplectic_residual(w: &WeightedSasakiMetric, p: &BundlePoint) -> Result<f64> {
    w.check(p)?;
    Ok(d_two_form(|xu| Ok(w.local(xu)?.omega_g()), &p.coords())?.max_abs())
}

fn complex_derivatives(w: &WeightedSasakiMetric, p: &BundlePoint) -> Result<(Mat<f64>, Vec<Mat<f64>>)> {
    w.check(p)?;
    let c = p.coords();
    let l: Local = w.local(&Jet::seed(&c, 2))?;
    let i = l.complex_structure();
    let di = (0..c.len()).map(|a| i.map(|v| v.derivative(a).value())).collect();
    Ok((i.values(), di))
}

fn nijenhuis_with(i: &Mat<f64>, di: &[Mat<f64>], x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    // (∂_v I) w with v, w constant coefficient fields
    let dir = |v: &[f64], w: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (a, va) in v.iter().enumerate() {
            if *va == 0.0 {
                continue;
            }
            for (o, d) in out.iter_mut().zip(di[a].mat_vec(w)) {
                *o += va * d;
            }
        }
        out
    };
    let ix = i.mat_vec(x);
    let iy = i.mat_vec(y);
    let a = dir(&ix, y);
    let b = dir(&iy, x);
    let c = i.mat_vec(&dir(y, x));
    let d = i.mat_vec(&dir(x, y));
    (0..n).map(|k| a[k] - b[k] + c[k] - d[k]).collect()
}

/// `N(X,Y) = [IX,IY] − I[IX,Y] − I[X,IY] − [X,Y]` with `X`, `Y` extended as
/// constant coefficient fields.
pub fn nijenhuis(w: &WeightedSasakiMetric, p: &BundlePoint, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let (i, di) = complex_derivatives(w, p)?;
    Ok(nijenhuis_with(&i, &di, x, y))
}

/// Largest component of `N` over all pairs of coordinate basis vectors.
pub fn nijenhuis_sup(w: &WeightedSasakiMetric, p: &BundlePoint) -> Result<f64> {
    let (i, di) = complex_derivatives(w, p)?;
    let n = 2 * w.dim();
    let e = |k: usize| (0..n).map(|j| (j == k) as u8 as f64).collect::<Vec<_>>();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let v = nijenhuis_with(&i, &di, &e(a), &e(b));
            worst = v.iter().fold(worst, |m, c| m.max(c.abs()));
        }
    }
    Ok(worst)
}
