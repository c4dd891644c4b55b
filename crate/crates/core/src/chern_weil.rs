//! Chern–Weil forms of metric connections: the Euler form (Pfaffian), the
//! Chern forms of the complexification and the Pontryagin forms.
//!
//! Only form-level statements are checked. Mod 2 classes such as
//! Stiefel–Whitney classes have no curvature representative and are out of
//! scope.
//!
//! With `Ω^a_b(X,Y) = ⟨R(X,Y)e_b, e_a⟩` in an orthonormal frame,
//! `det(1 + tΩ) = Σ t^k σ_k(Ω)`, `c_k(E⊗ℂ) = (i/2π)^k σ_k(Ω)` and
//! `p_j = (−1)^j c_{2j} = σ_{2j}(Ω)/(2π)^{2j}`; in particular
//! `p₁ = −tr(Ω∧Ω)/8π²`.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::connection::ConnectionSpec;
use crate::curvature::{curvature, CurvatureData};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::manifold::ChartedManifold;
use crate::sphere::orthonormal_frame;
use crate::tangent::{product_curvature, BundlePoint, WeightedSasakiMetric};

/// Largest number of base coordinates a [`Form`] supports.
pub const MAX_FORM_DIM: usize = 16;

/// A differential form at a point; coefficient `k` belongs to
/// `dx^{i₁}∧⋯∧dx^{i_p}` with `i₁ < ⋯ < i_p` the set bits of `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    n: usize,
    coeffs: Vec<f64>,
}

fn wedge_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Form {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_FORM_DIM, "forms on more than {MAX_FORM_DIM} coordinates");
        Form {
            n,
            coeffs: vec![0.0; 1 << n],
        }
    }

    pub fn scalar(n: usize, v: f64) -> Self {
        let mut f = Form::zero(n);
        f.coeffs[0] = v;
        f
    }

    /// `Σ_{i<j} β_ij dx^i∧dx^j` from the antisymmetric matrix `β`.
    pub fn two_form(beta: &Mat<f64>) -> Self {
        let n = beta.rows();
        let mut f = Form::zero(n);
        for i in 0..n {
            for j in (i + 1)..n {
                f.coeffs[(1 << i) | (1 << j)] = beta[(i, j)];
            }
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Coefficient of `dx^{i₁}∧⋯∧dx^{i_p}` for increasing indices.
    pub fn coefficient(&self, indices: &[usize]) -> f64 {
        let mask = indices.iter().fold(0usize, |m, &i| m | (1 << i));
        self.coeffs[mask]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `dx^1∧⋯∧dx^n`.
    pub fn top(&self) -> f64 {
        self.coeffs[(1 << self.n) - 1]
    }

    pub fn add(&self, other: &Form) -> Form {
        Form {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Form {
        Form {
            n: self.n,
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Form::zero(self.n);
        let nz: Vec<(usize, f64)> = other.coeffs.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
        for (a, &va) in self.coeffs.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            for &(b, vb) in &nz {
                if a & b == 0 {
                    out.coeffs[a | b] += wedge_sign(a, b) * va * vb;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Form) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Matrix of curvature 2-forms in an orthonormal frame of a rank `rank`
/// bundle over `n` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTwoForm {
    rank: usize,
    n: usize,
    entries: Vec<Form>,
}

impl CurvatureTwoForm {
    pub fn from_entries(rank: usize, entries: Vec<Form>) -> Result<Self> {
        if entries.len() != rank * rank || entries.is_empty() {
            return Err(Error::InvalidParameter(format!("{} entries for rank {rank}", entries.len())));
        }
        let n = entries[0].dim();
        Ok(CurvatureTwoForm { rank, n, entries })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> &Form {
        &self.entries[a * self.rank + b]
    }

    /// Largest `|Ω^a_b + Ω^b_a|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.rank {
            for b in 0..self.rank {
                worst = worst.max(self.get(a, b).add(self.get(b, a)).max_abs());
            }
        }
        worst
    }

    fn power_traces(&self, max: usize) -> Vec<Form> {
        let r = self.rank;
        let mut power = self.entries.clone();
        let mut traces = Vec::with_capacity(max);
        for k in 1..=max {
            if k > 1 {
                power = (0..r * r)
                    .map(|idx| {
                        let (a, b) = (idx / r, idx % r);
                        (0..r).fold(Form::zero(self.n), |acc, c| acc.add(&power[a * r + c].wedge(self.get(c, b))))
                    })
                    .collect();
            }
            traces.push((0..r).fold(Form::zero(self.n), |acc, a| acc.add(&power[a * r + a])));
        }
        traces
    }

    /// `σ_0, …, σ_max` of `det(1 + tΩ)` via Newton's identities.
    pub fn elementary(&self, max: usize) -> Vec<Form> {
        let s = self.power_traces(max);
        let mut sigma = vec![Form::scalar(self.n, 1.0)];
        for k in 1..=max {
            let mut acc = Form::zero(self.n);
            for i in 1..=k {
                let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                acc = acc.add(&sigma[k - i].wedge(&s[i - 1]).scaled(sign));
            }
            sigma.push(acc.scaled(1.0 / k as f64));
        }
        sigma
    }
}

/// `Ω^a_b(∂_i,∂_j) = ⟨R(∂_i,∂_j)E_b, E_a⟩` for a `metric`-orthonormal frame
/// `E` spanning a subbundle preserved by the connection.
pub fn curvature_two_form(curv: &CurvatureData, frame: &[Vec<f64>], metric: &Mat<f64>) -> Result<CurvatureTwoForm> {
    let n = curv.dim();
    if n > MAX_FORM_DIM {
        return Err(Error::InvalidParameter(format!("{n} coordinates exceed {MAX_FORM_DIM}")));
    }
    if frame.iter().any(|e| e.len() != metric.rows()) {
        return Err(Error::Dimension {
            expected: metric.rows(),
            got: frame.iter().map(Vec::len).find(|&l| l != metric.rows()).unwrap_or(0),
        });
    }
    let rank = frame.len();
    let basis = |k: usize| (0..n).map(|j| (j == k) as u8 as f64).collect::<Vec<_>>();
    // r[i][j][b] = R(∂_i,∂_j)E_b
    let mut entries = vec![Mat::zeros(n, n); rank * rank];
    for i in 0..n {
        for j in (i + 1)..n {
            for (b, eb) in frame.iter().enumerate() {
                let v = curv.apply(&basis(i), &basis(j), eb);
                for (a, ea) in frame.iter().enumerate() {
                    let c = metric.bilinear(&v, ea);
                    let m = &mut entries[a * rank + b];
                    m[(i, j)] = c;
                    m[(j, i)] = -c;
                }
            }
        }
    }
    CurvatureTwoForm::from_entries(rank, entries.iter().map(Form::two_form).collect())
}

/// Pfaffian by expansion along the first row (sum over perfect matchings).
fn pfaffian(omega: &CurvatureTwoForm, idx: &[usize]) -> Form {
    if idx.is_empty() {
        return Form::scalar(omega.n, 1.0);
    }
    let first = idx[0];
    let mut acc = Form::zero(omega.n);
    for k in 1..idx.len() {
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&v| v != idx[k]).collect();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = omega.get(first, idx[k]).wedge(&pfaffian(omega, &rest));
        acc = acc.add(&term.scaled(sign));
    }
    acc
}

/// `Pf(Ω) / (2π)^{rank/2}`.
pub fn euler_form(omega: &CurvatureTwoForm) -> Result<Form> {
    if omega.rank % 2 == 1 {
        return Err(Error::InvalidParameter(format!("Euler form needs even rank, got {}", omega.rank)));
    }
    let idx: Vec<usize> = (0..omega.rank).collect();
    Ok(pfaffian(omega, &idx).scaled((2.0 * PI).powi(-(omega.rank as i32 / 2))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChernPontryagin {
    /// `c_{2j}(E⊗ℂ)`.
    pub chern: Form,
    /// `p_j(E) = (−1)^j c_{2j}(E⊗ℂ)`.
    pub pontryagin: Form,
}

/// Degree `j` Pontryagin form and the matching Chern form of the
/// complexification, `1 ≤ j ≤ rank/2`.
pub fn chern_pontryagin_forms(omega: &CurvatureTwoForm, j: usize) -> Result<ChernPontryagin> {
    if j == 0 || 2 * j > omega.rank {
        return Err(Error::InvalidParameter(format!(
            "Pontryagin degree {j} outside 1..={}",
            omega.rank / 2
        )));
    }
    let sigma = omega.elementary(2 * j);
    let p = sigma[2 * j].scaled((2.0 * PI).powi(-2 * j as i32));
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(ChernPontryagin {
        chern: p.scaled(sign),
        pontryagin: p,
    })
}

/// `p₁ = −tr(Ω∧Ω)/8π²`, computed directly.
pub fn first_pontryagin_trace(omega: &CurvatureTwoForm) -> Form {
    omega.power_traces(2)[1].scaled(-1.0 / (8.0 * PI * PI))
}

/// Levi-Civita curvature form of `TM` at `x` in the Cholesky frame.
pub fn tangent_curvature_form(manifold: &ChartedManifold, x: &[f64]) -> Result<CurvatureTwoForm> {
    let curv = curvature(manifold, &ConnectionSpec::levi_civita(), x)?;
    let frame = orthonormal_frame(&curv.metric)?;
    curvature_two_form(&curv, &frame, &curv.metric)
}

/// Curvature form of `∇*⊕∇*` on `TTM` in a Sasaki-orthonormal frame.
pub fn double_tangent_curvature_form(w: &WeightedSasakiMetric, p: &BundlePoint) -> Result<CurvatureTwoForm> {
    let curv = product_curvature(w, p)?;
    let frame = orthonormal_frame(&curv.metric)?;
    curvature_two_form(&curv, &frame, &curv.metric)
}

/// Euler form of `(TTM, ∇*⊕∇*)` at `p`.
pub fn double_tangent_euler_form(w: &WeightedSasakiMetric, p: &BundlePoint) -> Result<Form> {
    euler_form(&double_tangent_curvature_form(w, p)?)
}

/// Largest difference between `p_j` of the horizontal (and vertical) block
/// of `∇*⊕∇*` over `TM` and `π*p_j(TM)`, for all `j`.
pub fn pontryagin_naturality_defect(w: &WeightedSasakiMetric, p: &BundlePoint) -> Result<f64> {
    let m = w.dim();
    let curv = product_curvature(w, p)?;
    let base = tangent_curvature_form(&w.manifold, &p.x)?;
    let g = crate::connection::compatible_metric(&w.manifold, &w.connection, &p.x)?;
    let split = w.splitting_frame(p)?;
    let e = orthonormal_frame(&g)?;
    let horizontal: Vec<Vec<f64>> = e.iter().map(|v| split.horizontal_lift(v)).collect();
    let vertical: Vec<Vec<f64>> = e.iter().map(|v| split.vertical_lift(v)).collect();
    let mut worst: f64 = 0.0;
    for frame in [horizontal, vertical] {
        let omega = curvature_two_form(&curv, &frame, &curv.metric)?;
        for j in 1..=m / 2 {
            let up = chern_pontryagin_forms(&omega, j)?.pontryagin;
            let down = chern_pontryagin_forms(&base, j)?.pontryagin;
            // base coordinates are the low bits, so π* keeps coefficients
            let mut pulled = Form::zero(2 * m);
            pulled.coeffs[..down.coeffs.len()].copy_from_slice(&down.coeffs);
            worst = worst.max(up.max_abs_diff(&pulled));
        }
    }
    Ok(worst)
}

/// Product of plane rotations with the given angles (`det = 1`).
pub fn rotation(n: usize, angles: &[f64]) -> Mat<f64> {
    let mut q: Mat<f64> = Mat::identity(n);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let th = angles.get(k).copied().unwrap_or(0.0);
            k += 1;
            let (c, s) = (th.cos(), th.sin());
            for r in 0..n {
                let (a, b) = (q[(r, i)], q[(r, j)]);
                q[(r, i)] = c * a - s * b;
                q[(r, j)] = s * a + c * b;
            }
        }
    }
    q
}

/// Largest change of the Euler and Pontryagin forms when the orthonormal
/// frame is rotated by `q`.
pub fn frame_rotation_defect(curv: &CurvatureData, frame: &[Vec<f64>], metric: &Mat<f64>, q: &Mat<f64>) -> Result<f64> {
    let rank = frame.len();
    let rotated: Vec<Vec<f64>> = (0..rank)
        .map(|b| {
            (0..frame[0].len())
                .map(|c| (0..rank).map(|a| frame[a][c] * q[(a, b)]).sum())
                .collect()
        })
        .collect();
    let w1 = curvature_two_form(curv, frame, metric)?;
    let w2 = curvature_two_form(curv, &rotated, metric)?;
    let mut worst: f64 = 0.0;
    if rank.is_multiple_of(2) {
        worst = worst.max(euler_form(&w1)?.max_abs_diff(&euler_form(&w2)?));
    }
    for j in 1..=rank / 2 {
        let a = chern_pontryagin_forms(&w1, j)?.pontryagin;
        let b = chern_pontryagin_forms(&w2, j)?.pontryagin;
        worst = worst.max(a.max_abs_diff(&b));
    }
    Ok(worst)
}

/// Radial and angular resolution of [`gauss_bonnet_integral`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussBonnetGrid {
    pub outer_radius: f64,
    pub panels: usize,
    pub nodes: usize,
    pub angles: usize,
}

impl Default for GaussBonnetGrid {
    fn default() -> Self {
        GaussBonnetGrid {
            outer_radius: 50.0,
            panels: 48,
            nodes: 8,
            angles: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussBonnetReport {
    /// `∫ e(Ω)` including the tail.
    pub value: f64,
    /// Same integral on a grid with half the radial panels.
    pub half_resolution: f64,
    /// `π P² ē(P)`, the tail beyond the outer radius for `ρ^{-4}` decay.
    pub tail: f64,
    pub warning: Option<String>,
}

/// Resolution difference above which the integral is flagged.
pub const GAUSS_BONNET_WARN: f64 = 1e-4;

/// `∫_{ℝ²} e(Ω)` for a surface chart covering the plane, on polar
/// coordinates with log-spaced Gauss–Legendre panels in `ρ`, an equispaced
/// angular rule and a tail estimate from the Euler density at `ρ = P`.
pub fn gauss_bonnet_integral(manifold: &ChartedManifold, grid: GaussBonnetGrid) -> Result<GaussBonnetReport> {
    if manifold.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: manifold.dim(),
        });
    }
    if grid.panels < 2 || grid.nodes == 0 || grid.angles == 0 || !(grid.outer_radius > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid grid {grid:?}")));
    }
    let reach = grid.outer_radius * 1.01;
    let plane = ChartedManifold::new(2, manifold.family().clone(), vec![(-reach, reach); 2])?;
    let density = |rho: f64| -> Result<f64> {
        let mut acc = 0.0;
        for k in 0..grid.angles {
            let th = 2.0 * PI * (k as f64 + 0.5) / grid.angles as f64;
            let x = [rho * th.cos(), rho * th.sin()];
            acc += euler_form(&tangent_curvature_form(&plane, &x)?)?.top();
        }
        Ok(acc / grid.angles as f64)
    };
    let integrate = |panels: usize| -> Result<f64> {
        let quad = GaussLegendre::new(grid.nodes.try_into().map_err(|_| Error::InvalidParameter("nodes".into()))?);
        let rule: Vec<(f64, f64)> = quad.iter().map(|(x, w)| (*x, *w)).collect();
        // first panel [0, ρ₁], then log spacing to P
        let inner = grid.outer_radius * 1e-3;
        let mut edges = vec![0.0];
        edges.extend((0..panels).map(|i| inner * (grid.outer_radius / inner).powf(i as f64 / (panels - 1) as f64)));
        let pieces = edges
            .par_windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                rule.iter().try_fold(0.0, |acc, (x, wt)| {
                    let rho = mid + half * x;
                    Ok::<f64, Error>(acc + wt * half * density(rho)? * 2.0 * PI * rho)
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(pieces.iter().sum())
    };
    let tail = PI * grid.outer_radius.powi(2) * density(grid.outer_radius)?;
    let value = integrate(grid.panels)? + tail;
    let half_resolution = integrate(grid.panels / 2)? + tail;
    let warning = ((value - half_resolution).abs() > GAUSS_BONNET_WARN).then(|| {
        format!(
            "grid too coarse: full and half resolution differ by {:.3e}",
            (value - half_resolution).abs()
        )
    });
    Ok(GaussBonnetReport {
        value,
        half_resolution,
        tail,
        warning,
    })
}
