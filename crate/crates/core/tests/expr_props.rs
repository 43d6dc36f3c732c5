use dfjss_core::expr::{parse, random_tree, DecisionContext, Expr, Function, Terminal, TreeMode};
use dfjss_core::seeding::rng_for;
use proptest::prelude::*;

fn terminal() -> impl Strategy<Value = Terminal> {
    prop::sample::select(Terminal::ALL.to_vec())
}

fn function() -> impl Strategy<Value = Function> {
    prop::sample::select(vec![Function::Add, Function::Sub, Function::Mul, Function::Div, Function::Min, Function::Max])
}

fn expr() -> impl Strategy<Value = Expr> {
    terminal().prop_map(Expr::leaf).prop_recursive(7, 128, 2, |inner| {
        (function(), inner.clone(), inner).prop_map(|(f, a, b)| Expr::node(f, a, b))
    })
}

fn wild() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        Just(-0.0),
        Just(f64::MAX),
        Just(-f64::MAX),
        Just(f64::MIN_POSITIVE),
        -1e6f64..1e6,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
    ]
}

fn context() -> impl Strategy<Value = DecisionContext> {
    prop::collection::vec(wild(), 13).prop_map(|v| {
        let mut ctx = DecisionContext::default();
        for (t, x) in Terminal::ALL.iter().zip(v) {
            ctx.set(*t, x);
        }
        ctx
    })
}

proptest! {
    #[test]
    fn format_then_parse_is_identity(e in expr()) {
        prop_assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn evaluation_is_total(e in expr(), ctx in context()) {
        prop_assert!(e.evaluate(&ctx).is_finite());
    }

    #[test]
    fn functions_are_total(f in function(), a in wild(), b in wild()) {
        prop_assert!(f.apply(a, b).is_finite());
    }

    #[test]
    fn ramped_trees_respect_depth(seed in any::<u64>(), lo in 1usize..5, extra in 0usize..4, full in any::<bool>()) {
        let mode = if full { TreeMode::Full } else { TreeMode::Grow };
        let t = random_tree(&mut rng_for(seed, 0, 0), mode, lo..=lo + extra, 0.1);
        prop_assert!(t.depth() >= lo && t.depth() <= lo + extra);
        prop_assert_eq!(t.size(), 2 * t.leaf_count() - 1);
    }
}
