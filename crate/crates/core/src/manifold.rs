//! Single-chart Riemannian manifolds.

use rand::Rng;

use crate::dsl::ScalarExpr;
use crate::error::{Error, Result};
use crate::jet::Scalar;
use crate::linalg::Mat;

#[derive(Clone, Debug, PartialEq)]
pub enum MetricFamily {
    Euclidean,
    /// `F(x) · δ_ij`.
    Conformal(ScalarExpr),
    /// Round sphere of radius `R` in stereographic coordinates.
    SphereStereographic { radius: f64 },
    /// Hyperbolic space of curvature `-1/R²` in the Poincaré ball `|x| < R`.
    HyperbolicBall { radius: f64 },
    /// Symmetric matrix of expressions; only the upper triangle is read.
    Explicit(Vec<Vec<ScalarExpr>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartedManifold {
    dim: usize,
    metric: MetricFamily,
    domain: Vec<(f64, f64)>,
}

impl ChartedManifold {
    pub fn new(dim: usize, metric: MetricFamily, domain: Vec<(f64, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if domain.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: domain.len(),
            });
        }
        if let Some((lo, hi)) = domain.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidParameter(format!("empty domain interval [{lo}, {hi}]")));
        }
        match &metric {
            MetricFamily::SphereStereographic { radius } | MetricFamily::HyperbolicBall { radius }
                if !(*radius > 0.0) =>
            {
                return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
            }
            MetricFamily::Conformal(f) if f.dim() != dim => {
                return Err(Error::Dimension {
                    expected: dim,
                    got: f.dim(),
                });
            }
            MetricFamily::Explicit(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::InvalidParameter(format!(
                        "explicit metric must be a {dim}x{dim} matrix"
                    )));
                }
                if rows.iter().flatten().any(|e| e.dim() != dim) {
                    return Err(Error::Dimension {
                        expected: dim,
                        got: rows.iter().flatten().map(|e| e.dim()).find(|&d| d != dim).unwrap_or(0),
                    });
                }
            }
            _ => {}
        }
        Ok(ChartedManifold { dim, metric, domain })
    }

    /// Family with its default coordinate box.
    pub fn with_default_domain(dim: usize, metric: MetricFamily) -> Result<Self> {
        let half = match &metric {
            MetricFamily::SphereStereographic { radius } => 1.5 * radius,
            // keeps the whole box inside the ball for dim <= 4
            MetricFamily::HyperbolicBall { radius } => 0.45 * radius,
            _ => 1.0,
        };
        ChartedManifold::new(dim, metric, vec![(-half, half); dim])
    }

    pub fn euclidean(dim: usize) -> Self {
        ChartedManifold::with_default_domain(dim, MetricFamily::Euclidean).expect("valid euclidean chart")
    }

    pub fn sphere(dim: usize, radius: f64) -> Result<Self> {
        ChartedManifold::with_default_domain(dim, MetricFamily::SphereStereographic { radius })
    }

    pub fn hyperbolic(dim: usize, radius: f64) -> Result<Self> {
        ChartedManifold::with_default_domain(dim, MetricFamily::HyperbolicBall { radius })
    }

    /// Space form of curvature `sign/R²`.
    pub fn space_form(dim: usize, positive: bool, radius: f64) -> Result<Self> {
        if positive {
            ChartedManifold::sphere(dim, radius)
        } else {
            ChartedManifold::hyperbolic(dim, radius)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &MetricFamily {
        &self.metric
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let in_box = x
            .iter()
            .zip(&self.domain)
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi);
        let in_ball = match self.metric {
            MetricFamily::HyperbolicBall { radius } => x.iter().map(|v| v * v).sum::<f64>() < radius * radius,
            _ => true,
        };
        in_box && in_ball
    }

    /// Uniform sample from the coordinate box.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.domain.iter().map(|(lo, hi)| rng.random_range(*lo..*hi)).collect()
    }

    /// Metric coefficients evaluated over any scalar carrier, without
    /// definiteness checks.
    pub fn metric_raw<T: Scalar>(&self, x: &[T]) -> Result<Mat<T>> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        let like = &x[0];
        let r2 = || {
            x.iter()
                .skip(1)
                .fold(x[0].clone() * x[0].clone(), |acc, v| acc + v.clone() * v.clone())
        };
        let conformal = |factor: T| {
            let z = like.zero_like();
            Mat::from_fn(self.dim, self.dim, |i, j| if i == j { factor.clone() } else { z.clone() })
        };
        Ok(match &self.metric {
            MetricFamily::Euclidean => Mat::identity_like(self.dim, like),
            MetricFamily::Conformal(f) => conformal(f.eval(x)?),
            MetricFamily::SphereStereographic { radius } => {
                let rr = radius * radius;
                let d = r2() + rr;
                conformal((d.clone() * d).recip() * (4.0 * rr * rr))
            }
            MetricFamily::HyperbolicBall { radius } => {
                let rr = radius * radius;
                let d = -r2() + rr;
                if !(d.value() > 0.0) {
                    return Err(Error::OutsideDomain {
                        point: x.iter().map(|v| v.value()).collect(),
                    });
                }
                conformal((d.clone() * d).recip() * (4.0 * rr * rr))
            }
            MetricFamily::Explicit(rows) => {
                let mut m = Mat::zeros_like(self.dim, self.dim, like);
                for i in 0..self.dim {
                    for j in i..self.dim {
                        let v = rows[i][j].eval(x)?;
                        m[(j, i)] = v.clone();
                        m[(i, j)] = v;
                    }
                }
                m
            }
        })
    }

    /// Metric over any scalar carrier, with a positive-definiteness check on
    /// the values.
    pub fn metric_jet<T: Scalar>(&self, x: &[T]) -> Result<Mat<T>> {
        let g = self.metric_raw(x)?;
        check_spd(&g.values(), x)?;
        Ok(g)
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<Mat<f64>> {
        self.metric_jet(x)
    }
}

pub(crate) fn check_spd<T: Scalar>(g: &Mat<f64>, x: &[T]) -> Result<()> {
    let symmetric = (0..g.rows()).all(|i| {
        (0..i).all(|j| (g[(i, j)] - g[(j, i)]).abs() <= 1e-12 * (1.0 + g[(i, j)].abs()))
    });
    let point = || x.iter().map(|v| v.value()).collect::<Vec<_>>();
    if !symmetric {
        return Err(Error::NotPositiveDefinite { point: point(), pivot: 0 });
    }
    g.cholesky()
        .map(|_| ())
        .map_err(|pivot| Error::NotPositiveDefinite { point: point(), pivot })
}
