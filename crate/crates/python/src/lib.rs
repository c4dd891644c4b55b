//! Python bindings: expressions, manifolds, weighted Sasaki metrics, sphere
//! bundles, the space form formulas and the scenario runner.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sasaki_lab::connection::ConnectionSpec;
use sasaki_lab::curvature::curvature;
use sasaki_lab::dsl::ScalarExpr;
use sasaki_lab::linalg::Mat;
use sasaki_lab::manifold::{ChartedManifold, MetricFamily};
use sasaki_lab::scenario::{self, Overrides, Scenario, TaskName};
use sasaki_lab::sphere::{self, Sign, SpaceFormParams, SphereBundleChart};
use sasaki_lab::tangent::{self, BundlePoint, WeightedSasakiMetric, Weights};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

fn parse(source: &str, dim: usize) -> PyResult<ScalarExpr> {
    ScalarExpr::parse(source, dim).map_err(err)
}

fn sign(name: &str) -> PyResult<Sign> {
    match name {
        "positive" | "+" => Ok(Sign::Positive),
        "negative" | "-" => Ok(Sign::Negative),
        other => Err(PyValueError::new_err(format!("sign must be 'positive' or 'negative', got '{other}'"))),
    }
}

/// A scalar field over chart coordinates `x1..xm`.
#[pyclass(name = "ScalarExpr", frozen)]
struct PyScalarExpr {
    inner: ScalarExpr,
}

#[pymethods]
impl PyScalarExpr {
    #[new]
    fn new(source: &str, dim: usize) -> PyResult<Self> {
        Ok(PyScalarExpr { inner: parse(source, dim)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.eval_f64(&x).map_err(err)
    }

    /// `(value, gradient, hessian)` at `x`.
    fn eval_jet(&self, x: Vec<f64>) -> PyResult<(f64, Vec<f64>, Vec<Vec<f64>>)> {
        let j = self.inner.eval_jet(&x).map_err(err)?;
        Ok((j.value, j.gradient, j.hessian))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("ScalarExpr({:?}, {})", self.inner.to_string(), self.inner.dim())
    }
}

/// A coordinate chart with a Riemannian metric.
#[pyclass(name = "Manifold", frozen)]
struct PyManifold {
    inner: ChartedManifold,
}

fn connection(dim: usize, conformal: Option<&str>, torsion: Option<&str>) -> PyResult<ConnectionSpec> {
    Ok(ConnectionSpec {
        conformal: conformal.map(|s| parse(s, dim)).transpose()?,
        torsion: torsion.map(|s| parse(s, dim)).transpose()?,
    })
}

#[pymethods]
impl PyManifold {
    #[staticmethod]
    fn euclidean(dim: usize) -> Self {
        PyManifold {
            inner: ChartedManifold::euclidean(dim),
        }
    }

    #[staticmethod]
    fn sphere(dim: usize, radius: f64) -> PyResult<Self> {
        Ok(PyManifold {
            inner: ChartedManifold::sphere(dim, radius).map_err(err)?,
        })
    }

    #[staticmethod]
    fn hyperbolic(dim: usize, radius: f64) -> PyResult<Self> {
        Ok(PyManifold {
            inner: ChartedManifold::hyperbolic(dim, radius).map_err(err)?,
        })
    }

    /// `factor · δ` on the default box.
    #[staticmethod]
    fn conformal(dim: usize, factor: &str) -> PyResult<Self> {
        let family = MetricFamily::Conformal(parse(factor, dim)?);
        Ok(PyManifold {
            inner: ChartedManifold::with_default_domain(dim, family).map_err(err)?,
        })
    }

    /// Metric given by a symmetric matrix of expressions.
    #[staticmethod]
    #[pyo3(signature = (components, domain=None))]
    fn explicit(components: Vec<Vec<String>>, domain: Option<Vec<(f64, f64)>>) -> PyResult<Self> {
        let dim = components.len();
        let parsed = components
            .iter()
            .map(|row| row.iter().map(|s| parse(s, dim)).collect::<PyResult<Vec<_>>>())
            .collect::<PyResult<Vec<_>>>()?;
        let family = MetricFamily::Explicit(parsed);
        let inner = match domain {
            Some(d) => ChartedManifold::new(dim, family, d),
            None => ChartedManifold::with_default_domain(dim, family),
        }
        .map_err(err)?;
        Ok(PyManifold { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn metric(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.metric_at(&x).map_err(err)?))
    }

    /// Scalar curvature, Ricci tensor and Einstein residual at `x` of the
    /// connection given by `conformal` and `torsion` potentials.
    #[pyo3(signature = (x, conformal=None, torsion=None))]
    fn curvature(
        &self,
        x: Vec<f64>,
        conformal: Option<&str>,
        torsion: Option<&str>,
    ) -> PyResult<(f64, Vec<Vec<f64>>, f64)> {
        let spec = connection(self.inner.dim(), conformal, torsion)?;
        let c = curvature(&self.inner, &spec, &x).map_err(err)?;
        Ok((c.scalar, rows(&c.ricci), c.einstein_residual()))
    }

    fn sectional(&self, x: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        curvature(&self.inner, &ConnectionSpec::levi_civita(), &x)
            .and_then(|c| c.sectional(&u, &v))
            .map_err(err)
    }
}

/// `g^{f₁,f₂}` on `TM` for a metric connection.
#[pyclass(name = "WeightedSasaki", frozen)]
struct PyWeightedSasaki {
    inner: WeightedSasakiMetric,
}

#[pymethods]
impl PyWeightedSasaki {
    #[new]
    #[pyo3(signature = (manifold, f1="1", f2="1", conformal=None, torsion=None))]
    fn new(manifold: &PyManifold, f1: &str, f2: &str, conformal: Option<&str>, torsion: Option<&str>) -> PyResult<Self> {
        let m = manifold.inner.dim();
        Ok(PyWeightedSasaki {
            inner: WeightedSasakiMetric::new(
                manifold.inner.clone(),
                connection(m, conformal, torsion)?,
                Weights::new(parse(f1, m)?, parse(f2, m)?),
            ),
        })
    }

    fn matrix(&self, x: Vec<f64>, u: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.matrix(&BundlePoint::new(x, u)).map_err(err)?))
    }

    fn scalar_curvature(&self, x: Vec<f64>, u: Vec<f64>) -> PyResult<f64> {
        self.inner.scalar_curvature(&BundlePoint::new(x, u)).map_err(err)
    }

    fn nijenhuis_sup(&self, x: Vec<f64>, u: Vec<f64>) -> PyResult<f64> {
        tangent::nijenhuis_sup(&self.inner, &BundlePoint::new(x, u)).map_err(err)
    }

    fn symplectic_residual(&self, x: Vec<f64>, u: Vec<f64>) -> PyResult<f64> {
        tangent::symplectic_residual(&self.inner, &BundlePoint::new(x, u)).map_err(err)
    }

    fn dmu_identity_defect(&self, x: Vec<f64>, u: Vec<f64>) -> PyResult<f64> {
        tangent::dmu_identity_defect(&self.inner, &BundlePoint::new(x, u)).map_err(err)
    }
}

/// The sphere bundle `S_rM` of radius field `r` with the induced metric of
/// a weighted Sasaki metric, in the chart `(x, angles)`.
#[pyclass(name = "SphereBundle", frozen)]
struct PySphereBundle {
    metric: WeightedSasakiMetric,
    chart: SphereBundleChart,
}

#[pymethods]
impl PySphereBundle {
    #[new]
    fn new(metric: &PyWeightedSasaki, radius: &str) -> PyResult<Self> {
        let r = parse(radius, metric.inner.manifold.dim())?;
        Ok(PySphereBundle {
            chart: SphereBundleChart::for_metric(&metric.inner, r).map_err(err)?,
            metric: metric.inner.clone(),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Reproducible chart points for `seed`.
    fn sample(&self, seed: u64, count: usize) -> Vec<Vec<f64>> {
        sasaki_lab::sampling::chart_points(&self.chart, seed, count)
    }

    fn embed(&self, q: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = self.chart.bundle_point(&q).map_err(err)?;
        Ok((p.x, p.u))
    }

    fn induced_metric(&self, q: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.chart.induced_metric(&self.metric, &q).map_err(err)?))
    }

    fn scalar_curvature(&self, q: Vec<f64>) -> PyResult<f64> {
        self.chart.scalar_curvature(&self.metric, &q).map_err(err)
    }

    fn einstein_residual(&self, q: Vec<f64>) -> PyResult<f64> {
        self.chart.einstein_residual(&self.metric, &q).map_err(err)
    }
}

fn params(sign_name: &str, radius: f64, f1: f64, f2: f64, n: usize) -> PyResult<SpaceFormParams> {
    Ok(SpaceFormParams {
        sign: sign(sign_name)?,
        radius,
        f1,
        f2,
        n,
    })
}

/// Closed-form scalar curvature of `(S_sM_R, g^{f₁,f₂})`, fiber dimension `n`.
#[pyfunction]
#[pyo3(signature = (sign, radius, s, f1=1.0, f2=1.0, n=2))]
fn scal_formula_spaceform(sign: &str, radius: f64, s: f64, f1: f64, f2: f64, n: usize) -> PyResult<f64> {
    sphere::scal_formula_spaceform(&params(sign, radius, f1, f2, n)?, s).map_err(err)
}

/// A fiber radius giving scalar curvature of sign `target`.
#[pyfunction]
#[pyo3(signature = (sign, radius, target, f1=1.0, f2=1.0, n=2))]
fn find_radius_for_sign(sign: &str, radius: f64, target: &str, f1: f64, f2: f64, n: usize) -> PyResult<f64> {
    sphere::find_radius_for_sign(&params(sign, radius, f1, f2, n)?, self::sign(target)?).map_err(err)
}

/// Runs a scenario given as TOML text and returns the JSON report and
/// whether every check passed.
#[pyfunction]
#[pyo3(signature = (config, task=None, samples=None, seed=None, tol=None))]
fn run_scenario(
    config: &str,
    task: Option<&str>,
    samples: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
) -> PyResult<(String, bool)> {
    let sc = Scenario::from_toml(config).map_err(err)?;
    let task = task
        .map(|t| <TaskName as clap::ValueEnum>::from_str(t, false).map_err(err))
        .transpose()?;
    let report = scenario::run(
        &sc,
        &Overrides {
            task,
            samples,
            seed,
            tolerance: tol,
        },
    )
    .map_err(err)?;
    Ok((report.to_json(), report.passed()))
}

#[pymodule]
fn pysasaki(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScalarExpr>()?;
    m.add_class::<PyManifold>()?;
    m.add_class::<PyWeightedSasaki>()?;
    m.add_class::<PySphereBundle>()?;
    m.add_function(wrap_pyfunction!(scal_formula_spaceform, m)?)?;
    m.add_function(wrap_pyfunction!(find_radius_for_sign, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
