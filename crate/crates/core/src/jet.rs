//! Truncated multivariate Taylor series.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a scalar
//! field around a point, up to a total degree (its *order*). Arithmetic and
//! the elementary functions propagate all coefficients exactly, so evaluating
//! a metric with jets yields its derivatives without finite differences.
//! [`Jet::derivative`] lowers the order by one, which is what makes it possible
//! to build Christoffel symbols as jets and differentiate them again.
//!
//! Coefficients are laid out in graded order (all degree-0 monomials, then
//! degree 1, ...), so a series of lower order is a prefix of one of higher
//! order. Binary operations between jets of different orders truncate to the
//! smaller one.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

/// Highest total degree any jet may carry.
pub const MAX_ORDER: usize = 4;

/// Numeric carrier shared by all geometry code: `f64` for plain values,
/// [`Jet`] when derivatives are needed.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// The value at the expansion point.
    fn value(&self) -> f64;
    /// A constant living in the same space (and order) as `self`.
    fn lift(&self, c: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn tanh(&self) -> Self;
    fn recip(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, p: f64) -> Self;

    /// True when the value and every carried derivative are finite.
    fn is_finite(&self) -> bool;

    fn zero_like(&self) -> Self {
        self.lift(0.0)
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn tanh(&self) -> Self {
        f64::tanh(*self)
    }
    fn recip(&self) -> Self {
        1.0 / *self
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Monomial bookkeeping for a fixed number of variables.
pub struct JetSpace {
    nvars: usize,
    exps: Vec<Vec<u8>>,
    /// `len_upto[d]` = number of monomials of degree `<= d`.
    len_upto: [usize; MAX_ORDER + 1],
    /// `(i, j, k)` with `mono_i * mono_j = mono_k`, sorted by `k`.
    mul: Vec<(u32, u32, u32)>,
    /// Number of `mul` entries whose product has degree `<= d`.
    mul_upto: [usize; MAX_ORDER + 1],
    /// Per variable: `(src, dst, factor)` sorted by `src`.
    deriv: Vec<Vec<(u32, u32, f64)>>,
    /// Per variable and source order: entries with `deg(src) <= d`.
    deriv_upto: Vec<[usize; MAX_ORDER + 1]>,
}

impl JetSpace {
    /// Shared space for `nvars` variables. Spaces are built once and live for
    /// the rest of the process.
    pub fn get(nvars: usize) -> &'static JetSpace {
        static CACHE: OnceLock<Mutex<HashMap<usize, &'static JetSpace>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        guard
            .entry(nvars)
            .or_insert_with(|| Box::leak(Box::new(JetSpace::build(nvars))))
    }

    fn build(nvars: usize) -> JetSpace {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut len_upto = [0usize; MAX_ORDER + 1];
        for d in 0..=MAX_ORDER {
            let mut cur = vec![0u8; nvars];
            push_monomials(&mut exps, &mut cur, 0, d);
            len_upto[d] = exps.len();
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let deg = |e: &[u8]| e.iter().map(|&v| v as usize).sum::<usize>();

        let mut mul = Vec::new();
        for (i, ei) in exps.iter().enumerate() {
            for (j, ej) in exps.iter().enumerate() {
                if deg(ei) + deg(ej) > MAX_ORDER {
                    continue;
                }
                let prod: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                mul.push((i as u32, j as u32, index[&prod] as u32));
            }
        }
        mul.sort_by_key(|&(i, j, k)| (k, i, j));
        let mut mul_upto = [0usize; MAX_ORDER + 1];
        for d in 0..=MAX_ORDER {
            mul_upto[d] = mul.partition_point(|&(_, _, k)| (k as usize) < len_upto[d]);
        }

        let mut deriv = Vec::with_capacity(nvars);
        let mut deriv_upto = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let mut entries = Vec::new();
            for (src, e) in exps.iter().enumerate() {
                if e[v] == 0 {
                    continue;
                }
                let mut lowered = e.clone();
                lowered[v] -= 1;
                entries.push((src as u32, index[&lowered] as u32, e[v] as f64));
            }
            let mut upto = [0usize; MAX_ORDER + 1];
            for d in 0..=MAX_ORDER {
                upto[d] = entries.partition_point(|&(s, _, _)| (s as usize) < len_upto[d]);
            }
            deriv.push(entries);
            deriv_upto.push(upto);
        }

        JetSpace {
            nvars,
            exps,
            len_upto,
            mul,
            mul_upto,
            deriv,
            deriv_upto,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    fn len(&self, order: usize) -> usize {
        self.len_upto[order]
    }

    fn index_of(&self, exp: &[u8]) -> Option<usize> {
        self.exps.iter().position(|e| e.as_slice() == exp)
    }
}

fn push_monomials(out: &mut Vec<Vec<u8>>, cur: &mut [u8], pos: usize, remaining: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining as u8;
        out.push(cur.to_vec());
        cur[pos] = 0;
        return;
    }
    if cur.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k as u8;
        push_monomials(out, cur, pos + 1, remaining - k);
    }
    cur[pos] = 0;
}

/// A truncated Taylor series in `space.nvars()` variables.
#[derive(Clone)]
pub struct Jet {
    space: &'static JetSpace,
    order: usize,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.space.nvars)
            .field("order", &self.order)
            .field("coeffs", &self.c)
            .finish()
    }
}

impl Jet {
    pub fn constant(space: &'static JetSpace, order: usize, value: f64) -> Jet {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = vec![0.0; space.len(order)];
        c[0] = value;
        Jet { space, order, c }
    }

    /// The coordinate function `x_index`, expanded around `value`.
    pub fn variable(space: &'static JetSpace, order: usize, index: usize, value: f64) -> Jet {
        assert!(index < space.nvars, "variable index out of range");
        let mut j = Jet::constant(space, order, value);
        if order >= 1 {
            j.c[1 + index] = 1.0;
        }
        j
    }

    /// All coordinate functions of a point, expanded to `order`.
    pub fn seed(point: &[f64], order: usize) -> Vec<Jet> {
        let space = JetSpace::get(point.len());
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(space, order, i, v))
            .collect()
    }

    pub fn space(&self) -> &'static JetSpace {
        self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Coefficient of the monomial with the given exponents (zero beyond the order).
    pub fn coeff(&self, exp: &[u8]) -> f64 {
        match self.space.index_of(exp) {
            Some(i) if i < self.c.len() => self.c[i],
            _ => 0.0,
        }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn gradient(&self) -> Vec<f64> {
        let n = self.space.nvars;
        if self.order == 0 {
            return vec![0.0; n];
        }
        self.c[1..=n].to_vec()
    }

    /// Second derivatives; zero when the jet carries fewer than two orders.
    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.space.nvars;
        let mut h = vec![vec![0.0; n]; n];
        if self.order < 2 {
            return h;
        }
        for idx in self.space.len(1)..self.space.len(2) {
            let e = &self.space.exps[idx];
            let vars: Vec<usize> = (0..n).filter(|&v| e[v] > 0).collect();
            match vars.as_slice() {
                [a] => h[*a][*a] = 2.0 * self.c[idx],
                [a, b] => {
                    h[*a][*b] = self.c[idx];
                    h[*b][*a] = self.c[idx];
                }
                _ => unreachable!("degree-2 monomial"),
            }
        }
        h
    }

    /// Partial derivative in variable `var`; the result has one order less.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let mut c = vec![0.0; self.space.len(order)];
        let entries = &self.space.deriv[var][..self.space.deriv_upto[var][self.order]];
        for &(src, dst, factor) in entries {
            c[dst as usize] += factor * self.c[src as usize];
        }
        Jet {
            space: self.space,
            order,
            c,
        }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet {
            space: self.space,
            order,
            c: self.c[..self.space.len(order)].to_vec(),
        }
    }

    fn check_space(&self, other: &Jet) {
        assert!(
            std::ptr::eq(self.space, other.space),
            "jets from different variable spaces ({} vs {} variables)",
            self.space.nvars,
            other.space.nvars
        );
    }

    fn binary(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        self.check_space(other);
        let order = self.order.min(other.order);
        let n = self.space.len(order);
        let c = (0..n).map(|i| f(self.c[i], other.c[i])).collect();
        Jet {
            space: self.space,
            order,
            c,
        }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        self.check_space(other);
        let order = self.order.min(other.order);
        let mut c = vec![0.0; self.space.len(order)];
        for &(i, j, k) in &self.space.mul[..self.space.mul_upto[order]] {
            c[k as usize] += self.c[i as usize] * other.c[j as usize];
        }
        Jet {
            space: self.space,
            order,
            c,
        }
    }

    fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space,
            order: self.order,
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    /// `f(self)` given the derivatives `f^(k)(value)` for `k = 0..=order`.
    fn compose(&self, derivs: &[f64]) -> Jet {
        let mut out = Jet::constant(self.space, self.order, derivs[0]);
        if self.order == 0 {
            return out;
        }
        let mut h = self.clone();
        h.c[0] = 0.0;
        let mut power = h.clone();
        let mut factorial = 1.0;
        for (k, d) in derivs.iter().enumerate().skip(1).take(self.order) {
            factorial *= k as f64;
            let w = d / factorial;
            for (o, p) in out.c.iter_mut().zip(&power.c) {
                *o += w * p;
            }
            if k < self.order {
                power = power.mul_jet(&h);
            }
        }
        out
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        self.c[0]
    }

    fn lift(&self, c: f64) -> Self {
        Jet::constant(self.space, self.order, c)
    }

    fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    fn ln(&self) -> Self {
        let a = self.value();
        let mut d = vec![a.ln()];
        let mut fact = 1.0;
        for k in 1..=self.order {
            if k > 1 {
                fact *= (k - 1) as f64;
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * fact / a.powi(k as i32));
        }
        self.compose(&d)
    }

    fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    fn tanh(&self) -> Self {
        // d^k/dx^k tanh = P_k(tanh) with P_{k+1}(T) = P_k'(T) (1 - T^2).
        let t = self.value().tanh();
        let mut poly = vec![0.0, 1.0];
        let mut d = Vec::with_capacity(self.order + 1);
        for _ in 0..=self.order {
            d.push(poly.iter().rev().fold(0.0, |acc, c| acc * t + c));
            let deriv: Vec<f64> = poly
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect();
            let mut next = vec![0.0; deriv.len() + 2];
            for (i, c) in deriv.iter().enumerate() {
                next[i] += c;
                next[i + 2] -= c;
            }
            poly = next;
        }
        self.compose(&d)
    }

    fn recip(&self) -> Self {
        let a = self.value();
        let mut d = Vec::with_capacity(self.order + 1);
        let mut fact = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                fact *= k as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            d.push(sign * fact / a.powi(k as i32 + 1));
        }
        self.compose(&d)
    }

    fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = self.lift(1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        result
    }

    fn powf(&self, p: f64) -> Self {
        let a = self.value();
        let mut d = Vec::with_capacity(self.order + 1);
        let mut falling = 1.0;
        for k in 0..=self.order {
            d.push(falling * a.powf(p - k as f64));
            falling *= p - k as f64;
        }
        self.compose(&d)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.binary(&rhs, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.binary(&rhs, |a, b| a - b)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.binary(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.binary(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_derivative(f: impl Fn(f64) -> f64, x: f64, k: usize) -> f64 {
        // central differences of increasing order; crude but independent
        let h = 1e-3;
        match k {
            1 => (f(x + h) - f(x - h)) / (2.0 * h),
            2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
            3 => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
            _ => unreachable!(),
        }
    }

    #[test]
    fn monomial_counts() {
        let s = JetSpace::get(3);
        assert_eq!(s.len(0), 1);
        assert_eq!(s.len(1), 4);
        assert_eq!(s.len(2), 10);
        assert_eq!(s.len(3), 20);
        assert_eq!(s.len(4), 35);
    }

    #[test]
    fn product_rule_matches_expansion() {
        let v = Jet::seed(&[0.5, -1.0], 3);
        let f = v[0].clone() * v[0].clone() * v[1].clone();
        // x^2 y at (0.5,-1): value -0.25, grad (2xy, x^2) = (-1, 0.25)
        assert!((f.value() + 0.25).abs() < 1e-15);
        let g = f.gradient();
        assert!((g[0] + 1.0).abs() < 1e-15);
        assert!((g[1] - 0.25).abs() < 1e-15);
        let h = f.hessian();
        assert!((h[0][0] + 2.0).abs() < 1e-15);
        assert!((h[0][1] - 1.0).abs() < 1e-15);
        assert!(h[1][1].abs() < 1e-15);
    }

    type Case = (&'static str, fn(&Jet) -> Jet, fn(f64) -> f64);

    #[test]
    fn elementary_functions_against_finite_differences() {
        let x0 = 0.7;
        let cases: Vec<Case> = vec![
            ("exp", |j| j.exp(), f64::exp),
            ("ln", |j| j.ln(), f64::ln),
            ("sin", |j| j.sin(), f64::sin),
            ("cos", |j| j.cos(), f64::cos),
            ("sqrt", |j| j.sqrt(), f64::sqrt),
            ("tanh", |j| j.tanh(), f64::tanh),
            ("recip", |j| j.recip(), |x| 1.0 / x),
            ("powf", |j| j.powf(1.7), |x| x.powf(1.7)),
        ];
        for (name, jf, ff) in cases {
            let x = Jet::seed(&[x0], 3);
            let y = jf(&x[0]);
            assert!((y.value() - ff(x0)).abs() < 1e-14, "{name} value");
            for k in 1..=3 {
                let exact = y.coeff(&[k as u8]) * (1..=k).product::<usize>() as f64;
                let fd = fd_derivative(ff, x0, k);
                let tol = if k == 3 { 1e-4 } else { 1e-5 };
                assert!(
                    (exact - fd).abs() < tol * (1.0 + fd.abs()),
                    "{name} derivative {k}: {exact} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn derivative_lowers_order() {
        let v = Jet::seed(&[1.0, 2.0], 3);
        let f = (v[0].clone() * v[1].clone()).exp();
        let dfx = f.derivative(0);
        assert_eq!(dfx.order(), 2);
        // d/dx exp(xy) = y exp(xy)
        assert!((dfx.value() - 2.0 * 2f64.exp()).abs() < 1e-12);
        // d/dy of that = exp(xy) + xy exp(xy)
        let dxy = dfx.derivative(1);
        assert!((dxy.value() - 3.0 * 2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn mixed_orders_truncate() {
        let a = Jet::seed(&[1.0], 3);
        let b = a[0].truncate(1);
        let c = a[0].clone() * b;
        assert_eq!(c.order(), 1);
    }

    #[test]
    fn negative_integer_power_of_negative_base() {
        let x = Jet::seed(&[-2.0], 2);
        let y = x[0].powi(-3);
        assert!((y.value() + 0.125).abs() < 1e-15);
        // d/dx x^-3 = -3 x^-4
        assert!((y.gradient()[0] + 3.0 / 16.0).abs() < 1e-15);
    }
}
