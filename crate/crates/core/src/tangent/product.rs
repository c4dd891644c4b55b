//! The connection `∇* ⊕ ∇*` on `TTM = H ⊕ V ≅ π*TM ⊕ π*TM`, written in
//! the coordinate frame `(∂_x, ∂_u)`.

use crate::connection::{connection_jets, Christoffel};
use crate::curvature::{curvature, curvature_from_connection, CurvatureData};
use crate::error::Result;
use crate::jet::{Jet, Scalar};

use super::{BundlePoint, WeightedSasakiMetric};

/// Coordinate coefficients of `∇* ⊕ ∇*` on jets over `(x, u)`; two orders
/// are lost. With `D_X δ_j = Γ^k_{ij} X^i δ_k`, `D_X ∂_{u^j} = Γ^k_{ij} X^i ∂_{u^k}`
/// and `∂_{x^j} = δ_j + B^l_j ∂_{u^l}`:
///
/// ```text
/// D_{∂x^i} ∂_{x^j} = Γ^k_{ij} ∂_{x^k} + (∂_{x^i}B^l_j + B^p_j Γ^l_{ip} − Γ^k_{ij} B^l_k) ∂_{u^l}
/// D_{∂u^i} ∂_{x^j} = ∂_{u^i}B^l_j ∂_{u^l}
/// D_{∂x^i} ∂_{u^j} = Γ^k_{ij} ∂_{u^k}
/// D_{∂u^i} ∂_{u^j} = 0
/// ```
pub fn product_connection(w: &WeightedSasakiMetric, xu: &[Jet]) -> Result<Christoffel<Jet>> {
    let m = w.dim();
    let (x, u) = xu.split_at(m);
    let gamma = connection_jets(&w.manifold, &w.connection, x)?;
    let b = gamma.contract_last(u);
    let z = xu[0].zero_like();
    let db = |a: usize, l: usize, j: usize| b[(l, j)].derivative(a);
    Ok(Christoffel::from_fn(2 * m, |c, a, bb| {
        let (cu, ci) = (c >= m, c % m);
        let (au, ai) = (a >= m, a % m);
        let (bu, bi) = (bb >= m, bb % m);
        match (cu, au, bu) {
            (false, false, false) => gamma.get(ci, ai, bi).clone(),
            (true, false, false) => {
                let mut v = db(ai, ci, bi);
                for p in 0..m {
                    v = v + b[(p, bi)].clone() * gamma.get(ci, ai, p).clone()
                        - gamma.get(p, ai, bi).clone() * b[(ci, p)].clone();
                }
                v
            }
            (true, true, false) => db(m + ai, ci, bi),
            (true, false, true) => gamma.get(ci, ai, bi).clone(),
            _ => z.clone(),
        }
    }))
}

/// Largest deviation of `T^D(δ_i, δ_j)` from `T(∂_i,∂_j)^h + (R(∂_i,∂_j)u)^v`.
pub fn product_torsion_defect(w: &WeightedSasakiMetric, p: &BundlePoint) -> Result<f64> {
    w.check(p)?;
    let m = w.dim();
    let hat = product_connection(w, &Jet::seed(&p.coords(), 2))?.values().torsion();
    let frame = w.splitting_frame(p)?;
    let base = curvature(&w.manifold, &w.connection, &p.x)?;
    let e = |k: usize| (0..m).map(|j| (j == k) as u8 as f64).collect::<Vec<_>>();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let (hi, hj) = (&frame.horizontal[i], &frame.horizontal[j]);
            let lhs: Vec<f64> = (0..2 * m)
                .map(|c| {
                    let mut acc = 0.0;
                    for a in 0..2 * m {
                        for b in 0..2 * m {
                            acc += hat.get(c, a, b) * hi[a] * hj[b];
                        }
                    }
                    acc
                })
                .collect();
            let t: Vec<f64> = (0..m).map(|k| *base.torsion.get(k, i, j)).collect();
            let r = base.apply(&e(i), &e(j), &p.u);
            let th = frame.horizontal_lift(&t);
            let rv = frame.vertical_lift(&r);
            for c in 0..2 * m {
                worst = worst.max((lhs[c] - th[c] - rv[c]).abs());
            }
        }
    }
    Ok(worst)
}

/// Curvature of `∇* ⊕ ∇*` at `p`, with the Sasaki metric attached for
/// contractions.
pub fn product_curvature(w: &WeightedSasakiMetric, p: &BundlePoint) -> Result<CurvatureData> {
    w.check(p)?;
    let c = p.coords();
    let hat = product_connection(w, &Jet::seed(&c, 3))?;
    let sasaki = WeightedSasakiMetric::new(
        w.manifold.clone(),
        w.connection.clone(),
        super::Weights::sasaki(w.dim()),
    );
    curvature_from_connection(&c, &sasaki.matrix(p)?, &hat)
}
