use concirc_core::expr::{differentiate, evaluate, evaluate_dual, parse, simplify, Expr, Func, Kind};
use proptest::prelude::*;

fn coords() -> Vec<String> {
    vec!["x".to_string(), "y".to_string()]
}

/// Raw trees (no folding) with literals that print as plain decimals.
fn raw_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..40).prop_map(|k| Expr::ratio(k, 4)),
        Just(Expr::var("x")),
        Just(Expr::var("y")),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::from_kind(Kind::Neg(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::from_kind(Kind::Add(a, b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::from_kind(Kind::Sub(a, b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::from_kind(Kind::Mul(a, b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::from_kind(Kind::Div(a, b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::from_kind(Kind::Pow(a, b))),
            (0..Func::ALL.len(), inner).prop_map(|(f, a)| Expr::from_kind(Kind::Call(Func::ALL[f], a))),
        ]
    })
}

/// Folded trees over smooth operations, with small integer powers.
fn smooth_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-8i64..8).prop_map(|k| Expr::ratio(k, 2)),
        Just(Expr::var("x")),
        Just(Expr::var("y")),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(&Expr::int(2).add(&b.mul(&b)))),
            (inner.clone(), 2i64..4).prop_map(|(a, k)| a.powi(k)),
            inner.clone().prop_map(|a| Expr::call(Func::Sin, &a)),
            inner.clone().prop_map(|a| Expr::call(Func::Cos, &a)),
            inner.clone().prop_map(|a| Expr::call(Func::Sinh, &a.div(&Expr::int(4)))),
            inner.clone().prop_map(|a| Expr::call(Func::Exp, &Expr::call(Func::Sin, &a))),
            inner.clone().prop_map(|a| Expr::call(Func::Ln, &Expr::int(1).add(&a.mul(&a)))),
            inner.prop_map(|a| Expr::call(Func::Sqrt, &Expr::int(1).add(&a.mul(&a)))),
        ]
    })
}

fn point() -> impl Strategy<Value = [(&'static str, f64); 2]> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y)| [("x", x), ("y", y)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn symbolic_and_dual_derivatives_agree(e in smooth_tree(), at in point(), along_y in any::<bool>()) {
        let dir = if along_y { "y" } else { "x" };
        let dual = evaluate_dual(&e, &at, dir);
        prop_assume!(dual.is_ok());
        let dual = dual.unwrap();
        let symbolic = evaluate(&differentiate(&e, dir), &at).unwrap();
        prop_assert!((symbolic - dual.deriv).abs() <= 1e-12 * (1.0 + dual.deriv.abs()),
            "{e}: {symbolic} vs {}", dual.deriv);
        prop_assert_eq!(dual.value, evaluate(&e, &at).unwrap());
    }

    #[test]
    fn simplification_preserves_values(e in smooth_tree(), at in point()) {
        let before = evaluate(&e, &at).unwrap();
        let after = evaluate(&simplify(&e), &at).unwrap();
        prop_assert!((before - after).abs() <= 1e-10 * (1.0 + before.abs()), "{e}: {before} vs {after}");
    }

    #[test]
    fn print_then_parse_is_identity(e in raw_tree()) {
        let text = e.to_string();
        let back = parse(&text, &coords()).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }
}
