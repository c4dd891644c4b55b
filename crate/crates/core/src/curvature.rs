//! Brute-force curvature from connection coefficients.
//!
//! `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_{[X,Y]}` with components stored as
//! `riemann[l][k][i][j] = dx^l(R(∂_i, ∂_j) ∂_k)`, so that
//! `R^l_{kij} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{ip}Γ^p_{jk} − Γ^l_{jp}Γ^p_{ik}`.
//! Ricci is `Ric(Y,Z) = tr(X ↦ R(X,Y)Z)`.

use crate::connection::{check_point, connection_jets, compatible_metric, levi_civita, Christoffel, ConnectionSpec};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::Mat;
use crate::manifold::ChartedManifold;

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureData {
    pub point: Vec<f64>,
    pub metric: Mat<f64>,
    pub christoffel: Christoffel<f64>,
    riemann: Vec<f64>,
    pub ricci: Mat<f64>,
    pub scalar: f64,
    pub torsion: Christoffel<f64>,
}

/// Curvature of a connection given on jets of order at least one whose first
/// `n` variables are coordinates. `metric` only needs values.
pub fn curvature_from_connection(point: &[f64], metric: &Mat<f64>, gamma: &Christoffel<Jet>) -> Result<CurvatureData> {
    let n = gamma.dim();
    if metric.rows() != n {
        return Err(Error::Dimension {
            expected: n,
            got: metric.rows(),
        });
    }
    let gv = gamma.values();
    // dgamma[(a, l, i, j)] = ∂_a Γ^l_{ij}
    let mut dgamma = vec![0.0; n * n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let c = gamma.get(l, i, j);
                for a in 0..n {
                    dgamma[((a * n + l) * n + i) * n + j] = c.derivative(a).value();
                }
            }
        }
    }
    let dg = |a: usize, l: usize, i: usize, j: usize| dgamma[((a * n + l) * n + i) * n + j];
    let mut riemann = vec![0.0; n * n * n * n];
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = dg(i, l, j, k) - dg(j, l, i, k);
                    for p in 0..n {
                        v += gv.get(l, i, p) * gv.get(p, j, k) - gv.get(l, j, p) * gv.get(p, i, k);
                    }
                    riemann[((l * n + k) * n + i) * n + j] = v;
                }
            }
        }
    }
    let ricci = Mat::from_fn(n, n, |j, k| (0..n).map(|i| riemann[((i * n + k) * n + i) * n + j]).sum());
    let ginv = metric
        .inverse()
        .ok_or_else(|| Error::Degenerate("metric is singular".into()))?;
    let mut scalar = 0.0;
    for j in 0..n {
        for k in 0..n {
            scalar += ginv[(j, k)] * ricci[(j, k)];
        }
    }
    Ok(CurvatureData {
        point: point.to_vec(),
        metric: metric.clone(),
        torsion: gv.torsion(),
        christoffel: gv,
        riemann,
        ricci,
        scalar,
    })
}

/// Levi-Civita curvature of a metric given on jets of order at least two.
pub fn metric_curvature(point: &[f64], g: &Mat<Jet>) -> Result<CurvatureData> {
    let gamma = levi_civita(g)?;
    curvature_from_connection(point, &g.values(), &gamma)
}

/// Curvature of the connection `spec` on `manifold` at `x`.
pub fn curvature(manifold: &ChartedManifold, spec: &ConnectionSpec, x: &[f64]) -> Result<CurvatureData> {
    check_point(manifold, x)?;
    let xj = Jet::seed(x, 2);
    let gamma = connection_jets(manifold, spec, &xj)?;
    let g = compatible_metric(manifold, spec, x)?;
    curvature_from_connection(x, &g, &gamma)
}

pub fn sectional_curvature(
    manifold: &ChartedManifold,
    spec: &ConnectionSpec,
    x: &[f64],
    u: &[f64],
    v: &[f64],
) -> Result<f64> {
    curvature(manifold, spec, x)?.sectional(u, v)
}

impl CurvatureData {
    pub fn dim(&self) -> usize {
        self.metric.rows()
    }

    /// `dx^l(R(∂_i, ∂_j) ∂_k)`.
    pub fn riemann(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim();
        self.riemann[((l * n + k) * n + i) * n + j]
    }

    /// `R(X,Y)Z`.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|l| {
                let mut acc = 0.0;
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            acc += self.riemann(l, k, i, j) * x[i] * y[j] * z[k];
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// `⟨R(X,Y)Y, X⟩ / (|X|²|Y|² − ⟨X,Y⟩²)`.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let g = &self.metric;
        let area2 = g.bilinear(x, x) * g.bilinear(y, y) - g.bilinear(x, y).powi(2);
        let scale = g.bilinear(x, x) * g.bilinear(y, y);
        if !(area2 > 1e-12 * scale) {
            return Err(Error::Degenerate("plane vectors are linearly dependent".into()));
        }
        Ok(g.bilinear(&self.apply(x, y, y), x) / area2)
    }

    /// `‖Ric − (Scal/n) g‖ / ‖g‖` in Frobenius norms.
    pub fn einstein_residual(&self) -> f64 {
        let n = self.dim() as f64;
        self.ricci.sub(&self.metric.scaled(self.scalar / n)).frobenius() / self.metric.frobenius()
    }

    /// Largest violation of `R^l_{kij} = −R^l_{kji}`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max((self.riemann(l, k, i, j) + self.riemann(l, k, j, i)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of the first Bianchi identity (torsion-free case).
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let s = self.riemann(l, k, i, j) + self.riemann(l, i, j, k) + self.riemann(l, j, k, i);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs_riemann(&self) -> f64 {
        self.riemann.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Scalar curvature of a metric evaluated with the given closure over jets of
/// order two seeded at `point`.
pub fn scalar_curvature_of<F>(point: &[f64], metric: F) -> Result<f64>
where
    F: Fn(&[Jet]) -> Result<Mat<Jet>>,
{
    let g = metric(&Jet::seed(point, 2))?;
    Ok(metric_curvature(point, &g)?.scalar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::ScalarExpr;

    #[test]
    fn euclidean_is_flat() {
        let m = ChartedManifold::euclidean(3);
        let c = curvature(&m, &ConnectionSpec::levi_civita(), &[0.1, 0.5, -0.2]).unwrap();
        assert_eq!(c.max_abs_riemann(), 0.0);
        assert_eq!(c.scalar, 0.0);
    }

    #[test]
    fn sphere_and_hyperbolic_scalar_curvature() {
        let s = ChartedManifold::sphere(2, 1.7).unwrap();
        let c = curvature(&s, &ConnectionSpec::levi_civita(), &[0.4, -0.9]).unwrap();
        assert!((c.scalar - 2.0 / 1.7f64.powi(2)).abs() < 1e-10);
        let h = ChartedManifold::hyperbolic(3, 0.8).unwrap();
        let c = curvature(&h, &ConnectionSpec::levi_civita(), &[0.1, -0.2, 0.15]).unwrap();
        assert!((c.scalar + 6.0 / 0.64).abs() < 1e-9);
        assert!(c.bianchi_defect() < 1e-8);
        assert!(c.antisymmetry_defect() < 1e-10);
        assert!(c.einstein_residual() < 1e-10);
    }

    #[test]
    fn sectional_curvature_of_space_forms() {
        let s = ChartedManifold::sphere(3, 1.0).unwrap();
        let k = sectional_curvature(&s, &ConnectionSpec::levi_civita(), &[0.2, 0.3, -0.1], &[1.0, 0.2, 0.0], &[0.3, -1.0, 0.5])
            .unwrap();
        assert!((k - 1.0).abs() < 1e-10);
        let conformal = ConnectionSpec::conformal(ScalarExpr::parse("0.5*ln(3)", 3).unwrap());
        let k = sectional_curvature(&s, &conformal, &[0.2, 0.3, -0.1], &[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0]).unwrap();
        assert!((k - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_plane_is_an_error() {
        let s = ChartedManifold::sphere(2, 1.0).unwrap();
        let r = sectional_curvature(&s, &ConnectionSpec::levi_civita(), &[0.0, 0.0], &[1.0, 2.0], &[2.0, 4.0]);
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }
}
