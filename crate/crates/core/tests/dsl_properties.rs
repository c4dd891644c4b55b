use proptest::prelude::*;
use sasaki_lab::dsl::{BinOp, Expr, Func, ScalarExpr};

const DIM: usize = 3;

/// Trees that are finite and smooth on `[-1, 1]^3`.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-2.0..2.0f64).prop_map(Expr::num),
        (0..DIM).prop_map(Expr::var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let bounded = |e: Expr| Expr::call(Func::Tanh, e);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Mul, a, b)),
            // a / (2 + sin b)
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(
                BinOp::Div,
                a,
                Expr::binary(BinOp::Add, Expr::num(2.0), Expr::call(Func::Sin, b))
            )),
            (inner.clone(), 0..4i32).prop_map(|(a, k)| Expr::binary(BinOp::Pow, a, Expr::num(k as f64))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            inner.clone().prop_map(|a| Expr::call(Func::Sin, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Cos, a)),
            inner.clone().prop_map(move |a| Expr::call(Func::Exp, bounded(a))),
            // ln(1 + a²), sqrt(1 + a²)
            inner.clone().prop_map(|a| Expr::call(
                Func::Ln,
                Expr::binary(BinOp::Add, Expr::num(1.0), Expr::binary(BinOp::Pow, a, Expr::num(2.0)))
            )),
            inner.clone().prop_map(|a| Expr::call(
                Func::Sqrt,
                Expr::binary(BinOp::Add, Expr::num(1.0), Expr::binary(BinOp::Pow, a, Expr::num(2.0)))
            )),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0f64, DIM)
}

fn shifted(x: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += h;
    y
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gradient_matches_central_differences(e in smooth_expr(), x in point()) {
        let f = ScalarExpr::from_expr(e, DIM).unwrap();
        let jet = f.eval_jet(&x).unwrap();
        let h = 1e-5;
        for i in 0..DIM {
            let fd = (f.eval_f64(&shifted(&x, i, h)).unwrap() - f.eval_f64(&shifted(&x, i, -h)).unwrap()) / (2.0 * h);
            let g = jet.gradient[i];
            prop_assert!((fd - g).abs() <= 1e-6 * g.abs().max(1.0), "d/dx{}: jet {} fd {} for {}", i + 1, g, fd, f);
        }
    }

    #[test]
    fn hessian_matches_second_differences(e in smooth_expr(), x in point()) {
        let f = ScalarExpr::from_expr(e, DIM).unwrap();
        let jet = f.eval_jet(&x).unwrap();
        let h = 1e-4;
        let v = |dx: &[(usize, f64)]| {
            let mut y = x.clone();
            for (i, d) in dx {
                y[*i] += d;
            }
            f.eval_f64(&y).unwrap()
        };
        for i in 0..DIM {
            for j in 0..DIM {
                let fd = (v(&[(i, h), (j, h)]) - v(&[(i, h), (j, -h)]) - v(&[(i, -h), (j, h)]) + v(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h);
                let hij = jet.hessian[i][j];
                prop_assert!((fd - hij).abs() <= 1e-4 * hij.abs().max(1.0), "H[{}][{}]: jet {} fd {} for {}", i, j, hij, fd, f);
            }
        }
    }

    #[test]
    fn printing_round_trips(e in smooth_expr(), xs in proptest::collection::vec(point(), 100)) {
        let f = ScalarExpr::from_expr(e, DIM).unwrap();
        let g = ScalarExpr::parse(&f.to_string(), DIM).unwrap();
        for x in &xs {
            prop_assert_eq!(f.eval_f64(x).unwrap().to_bits(), g.eval_f64(x).unwrap().to_bits());
        }
    }
}
