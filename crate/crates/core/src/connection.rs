//! Metric connections on a chart: Levi-Civita, conformal rescaling and
//! vectorial torsion.
//!
//! Conventions: `∇_{∂_i} ∂_j = Γ^k_{ij} ∂_k`, so the first lower index is the
//! differentiating direction, and `T(X,Y) = ∇_X Y − ∇_Y X − [X,Y]`.

use crate::dsl::ScalarExpr;
use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::linalg::Mat;
use crate::manifold::ChartedManifold;

/// Connection coefficients `Γ^k_{ij}` stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> Christoffel<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    data.push(f(k, i, j));
                }
            }
        }
        Christoffel { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γ^k_{ij}`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> &T {
        &self.data[(k * self.n + i) * self.n + j]
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Christoffel<U> {
        Christoffel {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> Christoffel<T> {
    pub fn add(&self, other: &Christoffel<T>) -> Christoffel<T> {
        assert_eq!(self.n, other.n);
        Christoffel {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    /// `∇_X Y` for constant coefficient vectors, i.e. `Γ(X, Y)`.
    pub fn apply(&self, x: &[T], y: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut acc = x[0].zero_like();
                for i in 0..n {
                    for j in 0..n {
                        acc = acc + self.get(k, i, j).clone() * x[i].clone() * y[j].clone();
                    }
                }
                acc
            })
            .collect()
    }

    /// `B^k_i = Γ^k_{ij} u^j`, the matrix of `X ↦ Γ(X, u)`.
    pub fn contract_last(&self, u: &[T]) -> Mat<T> {
        let n = self.n;
        Mat::from_fn(n, n, |k, i| {
            let mut acc = u[0].zero_like();
            for (j, uj) in u.iter().enumerate() {
                acc = acc + self.get(k, i, j).clone() * uj.clone();
            }
            acc
        })
    }

    pub fn values(&self) -> Christoffel<f64> {
        self.map(|v| v.value())
    }

    /// `T^k_{ij} = Γ^k_{ij} − Γ^k_{ji}`.
    pub fn torsion(&self) -> Christoffel<T> {
        Christoffel::from_fn(self.n, |k, i, j| self.get(k, i, j).clone() - self.get(k, j, i).clone())
    }
}

impl Christoffel<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Christoffel<f64>) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Levi-Civita coefficients of a metric given as jets whose first
/// `g.rows()` variables are the chart coordinates. The result has one order
/// less than the metric.
pub fn levi_civita(g: &Mat<Jet>) -> Result<Christoffel<Jet>> {
    let n = g.rows();
    let ginv = g.inverse().ok_or_else(|| Error::Degenerate("metric is singular".into()))?;
    // dg[a][i][j] = ∂_a g_ij
    let dg: Vec<Vec<Vec<Jet>>> = (0..n)
        .map(|a| (0..n).map(|i| (0..n).map(|j| g[(i, j)].derivative(a)).collect()).collect())
        .collect();
    let lower = |l: usize, i: usize, j: usize| {
        (dg[i][j][l].clone() + dg[j][i][l].clone() - dg[l][i][j].clone()) * 0.5
    };
    let lowered: Vec<Jet> = (0..n * n * n).map(|idx| lower(idx / (n * n), (idx / n) % n, idx % n)).collect();
    Ok(Christoffel::from_fn(n, |k, i, j| {
        let mut acc = ginv[(k, 0)].clone() * lowered[i * n + j].clone();
        for l in 1..n {
            acc = acc + ginv[(k, l)].clone() * lowered[(l * n + i) * n + j].clone();
        }
        acc
    }))
}

/// `C^k_{ij} = δ^k_j ∂_iφ + δ^k_i ∂_jφ − g_ij g^{kl} ∂_lφ`: the change of the
/// Levi-Civita connection under `g ↦ e^{2φ} g`.
pub fn conformal_delta(g: &Mat<Jet>, ginv: &Mat<Jet>, dphi: &[Jet]) -> Christoffel<Jet> {
    let n = g.rows();
    let grad = ginv.mat_vec(dphi);
    Christoffel::from_fn(n, |k, i, j| {
        let mut v = -(g[(i, j)].clone() * grad[k].clone());
        if k == j {
            v = v + dphi[i].clone();
        }
        if k == i {
            v = v + dphi[j].clone();
        }
        v
    })
}

/// `A^k_{ij} = g_ij g^{kl} ∂_lψ − δ^k_i ∂_jψ`: the metric connection change
/// whose torsion is `dψ ∧ 1`.
pub fn vectorial_torsion_delta(g: &Mat<Jet>, ginv: &Mat<Jet>, dpsi: &[Jet]) -> Christoffel<Jet> {
    let n = g.rows();
    let grad = ginv.mat_vec(dpsi);
    Christoffel::from_fn(n, |k, i, j| {
        let v = g[(i, j)].clone() * grad[k].clone();
        if k == i {
            v - dpsi[j].clone()
        } else {
            v
        }
    })
}

/// Which metric the connection is compatible with, and its torsion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConnectionSpec {
    /// `φ` with base metric `e^{2φ} g`; `None` means `g` itself.
    pub conformal: Option<ScalarExpr>,
    /// Torsion potential `ψ̃`; `None` means torsion-free.
    pub torsion: Option<ScalarExpr>,
}

impl ConnectionSpec {
    pub fn levi_civita() -> Self {
        ConnectionSpec::default()
    }

    pub fn conformal(phi: ScalarExpr) -> Self {
        ConnectionSpec {
            conformal: Some(phi),
            torsion: None,
        }
    }

    pub fn with_torsion(mut self, psi: ScalarExpr) -> Self {
        self.torsion = Some(psi);
        self
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion.is_none()
    }
}

fn gradient_jets(e: &ScalarExpr, x: &[Jet], m: usize) -> Result<(Jet, Vec<Jet>)> {
    let v = e.eval(x)?;
    let d = (0..m).map(|i| v.derivative(i)).collect();
    Ok((v, d))
}

/// The metric a connection is compatible with, `e^{2φ} g`, evaluated on
/// jets. The first `M.dim()` jet variables must be the chart coordinates.
pub fn compatible_metric<T: Scalar>(manifold: &ChartedManifold, spec: &ConnectionSpec, x: &[T]) -> Result<Mat<T>> {
    let g = manifold.metric_jet(x)?;
    match &spec.conformal {
        None => Ok(g),
        Some(phi) => {
            let lambda = (phi.eval(x)? * 2.0).exp();
            Ok(g.map(|v| v.clone() * lambda.clone()))
        }
    }
}

/// Connection coefficients on jets; the result has one order less than `x`.
/// Assembled as `Γ(g) + C(φ) + A(ψ̃)` from closed-form corrections.
pub fn connection_jets(manifold: &ChartedManifold, spec: &ConnectionSpec, x: &[Jet]) -> Result<Christoffel<Jet>> {
    let m = manifold.dim();
    let g = manifold.metric_jet(x)?;
    let mut gamma = levi_civita(&g)?;
    let needs_inverse = spec.conformal.is_some() || spec.torsion.is_some();
    if !needs_inverse {
        return Ok(gamma);
    }
    let ginv = g.inverse().ok_or_else(|| Error::Degenerate("metric is singular".into()))?;
    if let Some(phi) = &spec.conformal {
        let (_, dphi) = gradient_jets(phi, x, m)?;
        gamma = gamma.add(&conformal_delta(&g, &ginv, &dphi));
    }
    if let Some(psi) = &spec.torsion {
        let (_, dpsi) = gradient_jets(psi, x, m)?;
        gamma = gamma.add(&vectorial_torsion_delta(&g, &ginv, &dpsi));
    }
    Ok(gamma)
}

/// `Γ^k_{ij}` at a point.
pub fn connection_coeffs(manifold: &ChartedManifold, spec: &ConnectionSpec, x: &[f64]) -> Result<Christoffel<f64>> {
    check_point(manifold, x)?;
    Ok(connection_jets(manifold, spec, &Jet::seed(x, 1))?.values())
}

/// `T^k_{ij}` at a point.
pub fn torsion_tensor(manifold: &ChartedManifold, spec: &ConnectionSpec, x: &[f64]) -> Result<Christoffel<f64>> {
    Ok(connection_coeffs(manifold, spec, x)?.torsion())
}

/// `(dψ ∧ 1)(∂_i, ∂_j)^k = ∂_iψ δ^k_j − ∂_jψ δ^k_i`.
pub fn wedge_one(dpsi: &[f64]) -> Christoffel<f64> {
    Christoffel::from_fn(dpsi.len(), |k, i, j| {
        let mut v = 0.0;
        if k == j {
            v += dpsi[i];
        }
        if k == i {
            v -= dpsi[j];
        }
        v
    })
}

/// Largest component of `∇_k g_ij = ∂_k g_ij − Γ^l_{ki} g_lj − Γ^l_{kj} g_il`
/// for the connection and its compatible metric.
pub fn metric_compatibility_defect(manifold: &ChartedManifold, spec: &ConnectionSpec, x: &[f64]) -> Result<f64> {
    check_point(manifold, x)?;
    let m = manifold.dim();
    let xj = Jet::seed(x, 1);
    let g = compatible_metric(manifold, spec, &xj)?;
    let gamma = connection_jets(manifold, spec, &xj)?.values();
    let gv = g.values();
    let mut worst: f64 = 0.0;
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut v = g[(i, j)].derivative(k).value();
                for l in 0..m {
                    v -= gamma.get(l, k, i) * gv[(l, j)] + gamma.get(l, k, j) * gv[(i, l)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Largest difference between the jet coefficients of the torsion-free part
/// of `spec` and the Levi-Civita coefficients of its compatible metric built
/// from central differences with step `h`.
pub fn christoffel_fd_defect(manifold: &ChartedManifold, spec: &ConnectionSpec, x: &[f64], h: f64) -> Result<f64> {
    check_point(manifold, x)?;
    let m = manifold.dim();
    let torsion_free = ConnectionSpec {
        conformal: spec.conformal.clone(),
        torsion: None,
    };
    let jet = connection_coeffs(manifold, &torsion_free, x)?;
    let metric = |y: &[f64]| compatible_metric(manifold, &torsion_free, y);
    let d = (0..m)
        .map(|a| {
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            xp[a] += h;
            xm[a] -= h;
            Ok(metric(&xp)?.sub(&metric(&xm)?).scaled(0.5 / h))
        })
        .collect::<Result<Vec<_>>>()?;
    let ginv = metric(x)?
        .inverse()
        .ok_or_else(|| Error::Degenerate("metric is singular".into()))?;
    let fd = Christoffel::from_fn(m, |k, i, j| {
        (0..m)
            .map(|l| ginv[(k, l)] * 0.5 * (d[i][(j, l)] + d[j][(i, l)] - d[l][(i, j)]))
            .sum::<f64>()
    });
    Ok(jet.max_abs_diff(&fd))
}

pub(crate) fn check_point(manifold: &ChartedManifold, x: &[f64]) -> Result<()> {
    if x.len() != manifold.dim() {
        return Err(Error::Dimension {
            expected: manifold.dim(),
            got: x.len(),
        });
    }
    if !manifold.contains(x) {
        return Err(Error::OutsideDomain { point: x.to_vec() });
    }
    Ok(())
}
