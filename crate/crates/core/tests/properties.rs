use linegerm::classify::{classify_germ, normal_form, ClassifyOptions, GermKind, Relation};
use linegerm::conjugacy::{
    c0_conjugacy, c1_conjugator, scale_conjugacy, solve_homological, time_map, Side,
};
use linegerm::expr::{BinOp, Func, Node};
use linegerm::flows::{flow, model_flow, verify_conjugacy, FlowStatus, ModelField, VerifyGrid};
use linegerm::jets::{taylor, TruncatedSeries};
use linegerm::unfold::{build_unfolding, equilibria, FamilyKind};
use linegerm::Expression;
use proptest::prelude::*;

fn parse(text: &str) -> Expression {
    Expression::parse(text).unwrap()
}

fn node_strategy() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (-5i32..=5).prop_map(|c| Node::Const(c as f64 * 0.5)),
        Just(Node::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (
                inner.clone(),
                inner.clone(),
                prop_oneof![
                    Just(BinOp::Add),
                    Just(BinOp::Sub),
                    Just(BinOp::Mul),
                    Just(BinOp::Div)
                ]
            )
                .prop_map(|(a, b, op)| Node::Binary(op, Box::new(a), Box::new(b))),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| Node::Binary(
                BinOp::Pow,
                Box::new(a),
                Box::new(Node::Const(n as f64))
            )),
            (
                inner,
                prop_oneof![
                    Just(Func::Sin),
                    Just(Func::Cos),
                    Just(Func::Exp),
                    Just(Func::Atan)
                ]
            )
                .prop_map(|(a, f)| Node::Call(f, Box::new(a))),
        ]
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

// Number of distinct real roots of p in (a, b] by a Sturm sequence.
fn sturm_count(p: &[f64], a: f64, b: f64) -> usize {
    fn trim(mut v: Vec<f64>) -> Vec<f64> {
        let scale = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        while v.len() > 1 && v.last().unwrap().abs() <= 1e-12 * scale {
            v.pop();
        }
        v
    }
    fn rem(num: &[f64], den: &[f64]) -> Vec<f64> {
        let mut r = num.to_vec();
        let dl = den.len();
        while r.len() >= dl {
            let q = r[r.len() - 1] / den[dl - 1];
            let shift = r.len() - dl;
            for i in 0..dl {
                r[shift + i] -= q * den[i];
            }
            r.pop();
        }
        r
    }
    fn eval(p: &[f64], x: f64) -> f64 {
        p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
    let mut seq = vec![trim(p.to_vec())];
    let d: Vec<f64> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| i as f64 * c)
        .collect();
    seq.push(trim(d));
    while seq.last().unwrap().len() > 1 {
        let n = seq.len();
        let r: Vec<f64> = rem(&seq[n - 2], &seq[n - 1]).iter().map(|c| -c).collect();
        let r = trim(r);
        if r.iter().all(|c| *c == 0.0) {
            break;
        }
        seq.push(r);
    }
    let changes = |x: f64| {
        let signs: Vec<f64> = seq
            .iter()
            .map(|q| eval(q, x))
            .filter(|v| *v != 0.0)
            .collect();
        signs
            .windows(2)
            .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
            .count()
    };
    changes(a) - changes(b)
}

fn expand(roots: &[f64], lead: f64) -> Vec<f64> {
    let mut p = vec![lead];
    for &r in roots {
        let mut next = vec![0.0; p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= r * c;
        }
        p = next;
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_round_trips(node in node_strategy(), x in -2.0f64..2.0) {
        let e = Expression::from_node(node);
        let reparsed = parse(&e.to_string());
        match (e.evaluate(x), reparsed.evaluate(x)) {
            (Ok(a), Ok(b)) => prop_assert!(close(a, b, 1e-12), "{e}: {a} vs {b}"),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{e}: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn derivative_matches_finite_differences(node in node_strategy(), x in -1.0f64..1.0) {
        let e = Expression::from_node(node);
        let central = |h: f64| -> Option<f64> {
            Some((e.evaluate(x + h).ok()? - e.evaluate(x - h).ok()?) / (2.0 * h))
        };
        if let (Some(coarse), Some(fine), Ok(d)) = (central(1e-4), central(5e-5), e.derivative().evaluate(x)) {
            // Skip points where the difference quotient has not settled.
            prop_assume!(close(coarse, fine, 1e-6) && fine.abs() < 1e4);
            prop_assert!(close(fine, d, 1e-5), "{e}: {fine} vs {d}");
        }
    }

    #[test]
    fn series_arithmetic_is_consistent(a in prop::collection::vec(-2.0f64..2.0, 6), b in prop::collection::vec(-2.0f64..2.0, 6)) {
        let mut a = a;
        a[0] = 1.0 + a[0].abs();
        let sa = TruncatedSeries::from_polynomial(&a, 8);
        let sb = TruncatedSeries::from_polynomial(&b, 8);
        let product = &sa * &sb;
        let back = product.divide(&sa).unwrap();
        for i in 0..=8 {
            prop_assert!(close(back.coeff(i), sb.coeff(i), 1e-9));
        }
        let one = &sa * &sa.reciprocal().unwrap();
        prop_assert!(close(one.coeff(0), 1.0, 1e-12));
        for i in 1..=8 {
            prop_assert!(one.coeff(i).abs() < 1e-9);
        }
        // Jet of a product expression equals the product of jets.
        let ea = Expression::polynomial(&a);
        let eb = Expression::polynomial(&b);
        let e = parse(&format!("({ea}) * ({eb})"));
        let jet = taylor(&e, 8).unwrap();
        for i in 0..=8 {
            prop_assert!(close(jet.coeff(i), product.coeff(i), 1e-9));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn flow_group_law_and_fixed_points(field in 0usize..4, x in -0.5f64..0.5, s in -0.5f64..0.5, t in -0.5f64..0.5) {
        let f = parse(["x", "-2*x", "x^2", "x^2 + x^3"][field]);
        let direct = flow(&f, x, s + t).unwrap();
        let mid = flow(&f, x, t).unwrap();
        let composed = flow(&f, mid.value, s).unwrap();
        prop_assert_eq!(direct.status, FlowStatus::Ok);
        prop_assert!((direct.value - composed.value).abs() < 1e-8);
        prop_assert!(flow(&f, 0.0, t).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn flow_matches_model_flows(a in -2.0f64..2.0, k in 2u32..5, x in -0.8f64..0.8, t in -0.8f64..0.8) {
        let linear = ModelField::Linear { a };
        let exact = model_flow(linear, x, t).unwrap();
        prop_assert!((flow(&linear.expression(), x, t).unwrap().value - exact).abs() < 1e-8);
        let power = ModelField::Power { coeff: 1.0, k };
        if let Ok(exact) = model_flow(power, x, t) {
            if exact.abs() < 10.0 {
                let numeric = flow(&power.expression(), x, t).unwrap();
                prop_assert!((numeric.value - exact).abs() < 1e-8 * (1.0 + exact.abs()));
            }
        }
    }

    #[test]
    fn time_map_translation(field in 0usize..4, negative in any::<bool>(), x in 0.05f64..0.4, t in -1.0f64..1.0, base in 0.2f64..0.6) {
        let f = parse(["x", "2*x", "x^2", "x^2 + x^3"][field]);
        let (x, base, side) = if negative { (-x, -base, Side::Negative) } else { (x, base, Side::Positive) };
        let tau = time_map(&f, base, side).unwrap();
        let r = flow(&f, x, t).unwrap();
        prop_assume!(r.status == FlowStatus::Ok && r.value.abs() < 0.9);
        let err = tau.eval(r.value).unwrap() - tau.eval(x).unwrap() - t;
        prop_assert!(err.abs() < 1e-8, "error {err}");
        let back = tau.inverse(tau.eval(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() < 1e-12 * (1.0 + x.abs()) + 1e-14);
    }

    #[test]
    fn planted_roots_are_recovered(
        roots in prop::collection::btree_set(-36i32..=36, 1..=4),
        lead in 0.5f64..2.0,
        flip in any::<bool>(),
        complex_pair in prop::option::of(0.1f64..2.0),
    ) {
        let roots: Vec<f64> = roots.into_iter().map(|r| r as f64 / 20.0 + 0.003).collect();
        let mut p = expand(&roots, if flip { -lead } else { lead });
        if let Some(c) = complex_pair {
            // Multiply by x^2 + c, which has no real roots.
            let mut q = vec![0.0; p.len() + 2];
            for (i, &v) in p.iter().enumerate() {
                q[i] += c * v;
                q[i + 2] += v;
            }
            p = q;
        }
        let report = equilibria(&p, (-2.0, 2.0)).unwrap();
        let found: Vec<f64> = report.equilibria.iter().map(|e| e.location).collect();
        prop_assert_eq!(found.len(), roots.len(), "{:?} vs {:?}", found, roots);
        prop_assert_eq!(found.len(), sturm_count(&p, -2.0, 2.0));
        for (f, r) in found.iter().zip(&roots) {
            prop_assert!((f - r).abs() < 1e-10, "{} vs {}", f, r);
        }
        for e in &report.equilibria {
            prop_assert_eq!(e.multiplicity, 1);
        }
        // Simple roots alternate in stability.
        for w in report.equilibria.windows(2) {
            prop_assert_ne!(w[0].stability, w[1].stability);
        }
    }

    #[test]
    fn double_roots_are_semi_stable(r in -1.5f64..1.5, s in -1.5f64..1.5) {
        prop_assume!((r - s).abs() > 0.1);
        let p = expand(&[r, r, s], 1.0);
        let report = equilibria(&p, (-2.0, 2.0)).unwrap();
        let total: usize = report.equilibria.iter().map(|e| e.multiplicity).sum();
        prop_assert_eq!(total, 3);
        let double = report.equilibria.iter().find(|e| e.multiplicity == 2).unwrap();
        prop_assert!((double.location - r).abs() < 1e-8);
    }

    #[test]
    fn unfoldings_reproduce_base_germ(kind in 0usize..4, k in 2usize..6, a in 0.5f64..2.0, d in -1.0f64..1.0, lambda in prop::collection::vec(-1.0f64..1.0, 6)) {
        let kind = [FamilyKind::Q, FamilyKind::Q1, FamilyKind::F, FamilyKind::F1][kind];
        let fam = build_unfolding(kind, k, Some(a), Some(d)).unwrap();
        let zero = vec![0.0; fam.param_count()];
        let base = Expression::polynomial(fam.instantiate(&zero).unwrap().coeffs());
        let c = classify_germ(&base, &ClassifyOptions::default()).unwrap();
        let expected_a = match kind { FamilyKind::Q | FamilyKind::F => 1.0, _ => a };
        prop_assert_eq!(c.kind, GermKind::Degenerate);
        prop_assert_eq!(c.k, k);
        prop_assert_eq!(c.a, expected_a);
        let params = &lambda[..fam.param_count()];
        let poly = fam.instantiate(params).unwrap();
        let report = equilibria(poly.coeffs(), (-2.0, 2.0)).unwrap();
        let total: usize = report.equilibria.iter().map(|e| e.multiplicity).sum();
        prop_assert!(total <= fam.degree());
    }

    #[test]
    fn perturbations_beyond_order_k_do_not_change_the_class(k in 2usize..5, h in prop::collection::vec(-1.0f64..1.0, 4)) {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        c.extend(h);
        let cl = classify_germ(&Expression::polynomial(&c), &ClassifyOptions::default()).unwrap();
        prop_assert_eq!((cl.kind, cl.k, cl.a), (GermKind::Degenerate, k, 1.0));
    }

    #[test]
    fn smooth_model_keeps_stability(k in 2usize..6, a in 0.5f64..3.0, negative in any::<bool>(), tail in -1.0f64..1.0) {
        let a = if negative { -a } else { a };
        let mut c = vec![0.0; k + 2];
        c[k] = a;
        c[k + 1] = tail;
        let cl = classify_germ(&Expression::polynomial(&c), &ClassifyOptions::default()).unwrap();
        let nf = normal_form(&cl, Relation::Cinf, false).unwrap();
        let lead = nf.terms[0].1;
        prop_assert_eq!(lead, if k % 2 == 1 { a.signum() } else { 1.0 });
        // The model lies in the same topological class (up to reversal for even k).
        let model = classify_germ(&nf.expression(), &ClassifyOptions::default()).unwrap();
        let same = model.c0_class == cl.c0_class || model.c0_class.map(|m| m.reversed()) == cl.c0_class;
        prop_assert!(same);
    }

    #[test]
    fn scaling_solves_the_monomial_relation(a in 0.2f64..5.0, b in 0.2f64..5.0, k in 2u32..6, x in -1.0f64..1.0, flip in any::<bool>()) {
        let b = if flip && k % 2 == 0 { -b } else { b };
        let w = scale_conjugacy(a, b, k).unwrap();
        let psi = w.eval(x).unwrap();
        let lhs = a * psi.powi(k as i32) / w.eval_derivative(x).unwrap();
        prop_assert!((lhs - b * x.powi(k as i32)).abs() < 1e-12 * (1.0 + lhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn homological_residual_is_small(
        k in 1usize..=3,
        unit in prop::collection::vec(-0.3f64..0.3, 3),
        g in prop::collection::vec(-1.0f64..1.0, 3),
        kk in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let mut f = vec![0.0; k];
        f.push(1.0);
        f.extend(unit);
        let mut gc = vec![0.0];
        gc.extend(g);
        let mut kc = vec![0.0, 0.0];
        kc.extend(kk);
        let s = solve_homological(&Expression::polynomial(&f), &Expression::polynomial(&gc), &Expression::polynomial(&kc)).unwrap();
        prop_assert!(s.residual_bound < 1e-8, "residual {}", s.residual_bound);
        prop_assert_eq!(s.eval(0.0).unwrap(), 0.0);
        for h in [1e-4, -1e-4] {
            prop_assert!(s.eval(h).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn witnesses_commute_with_flows_and_are_monotone(
        a in 0.5f64..2.0,
        b in 0.5f64..2.0,
        negative in any::<bool>(),
        k in 2usize..=3,
        tail in -1.0f64..1.0,
    ) {
        let s = if negative { -1.0 } else { 1.0 };
        let f = Expression::polynomial(&[0.0, s * a]);
        let g = Expression::polynomial(&[0.0, s * b]);
        let w = c0_conjugacy(&f, &g, 1.0).unwrap();
        let grid = VerifyGrid::uniform((-0.4, 0.4), 9, (-1.0, 1.0), 5);
        let report = verify_conjugacy(&f, &g, &w, &grid).unwrap();
        prop_assert!(report.max_residual < 1e-6, "c0 residual {}", report.max_residual);

        let mut c = vec![0.0; k + 2];
        c[k] = 1.0;
        c[k + 1] = tail;
        let f = Expression::polynomial(&c);
        let w = c1_conjugator(&f, 0.4, true).unwrap();
        prop_assert!(!w.downgraded);
        let mut last = f64::NEG_INFINITY;
        for i in 0..200 {
            let x = -0.39 + 0.78 * i as f64 / 199.0;
            let y = w.eval(x).unwrap();
            prop_assert!(y > last, "not monotone at {x}");
            last = y;
        }
    }
}
