use proptest::prelude::*;

use equiweyl::experiment::avoid_ties;
use equiweyl::group_rep::{build_group, character_table, FiniteGroup, GroupFamily, OrthogonalElement};
use equiweyl::isotypic_solver::SymmetryAction;
use equiweyl::lattice_domain::{discretize, group_permutations, DomainSpec};
use equiweyl::operator_disc::{assemble, equivariance_check, Coefficient, OperatorSpec};
use equiweyl::weyl_volume::{a_lambda, log_log_fit};
use num_complex::Complex64;

fn groups() -> impl Strategy<Value = FiniteGroup> {
    (
        prop_oneof![Just(GroupFamily::Cyclic), Just(GroupFamily::Dihedral), Just(GroupFamily::Product)],
        prop_oneof![Just(1usize), Just(2), Just(4)],
        2usize..=3,
    )
        .prop_filter_map("unsupported", |(f, k, n)| build_group(f, k, n).ok())
}

fn signed_perm(n: usize) -> impl Strategy<Value = OrthogonalElement> {
    (Just((0..n).collect::<Vec<_>>()).prop_shuffle(), prop::collection::vec(prop::bool::ANY, n))
        .prop_map(|(p, s)| OrthogonalElement::new(p, s.iter().map(|&b| if b { 1 } else { -1 }).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_matches_sequential_application(
        (a, b, x) in (2usize..=4).prop_flat_map(|n| (signed_perm(n), signed_perm(n), prop::collection::vec(-5.0f64..5.0, n)))
    ) {
        prop_assert_eq!(a.compose(&b).apply(&x), a.apply(&b.apply(&x)));
        prop_assert!(a.compose(&a.inverse()).is_identity());
        prop_assert_eq!(a.compose(&b).determinant(), a.determinant() * b.determinant());
    }

    #[test]
    fn group_table_is_closed_and_consistent(g in groups(), i in 0usize..64, j in 0usize..64) {
        let (a, b) = (i % g.order(), j % g.order());
        let ab = g.element(a).compose(g.element(b));
        prop_assert_eq!(g.element(g.mul(a, b)), &ab);
        prop_assert!(g.element(g.mul(a, g.inverse(a))).is_identity());
    }

    #[test]
    fn characters_are_orthonormal(g in groups()) {
        let t = character_table(&g).unwrap();
        prop_assert!(t.row_orthogonality_defect() < 1e-10);
        prop_assert!(t.column_orthogonality_defect() < 1e-10);
        prop_assert_eq!(t.sum_of_squared_dims(), g.order());
    }

    #[test]
    fn projectors_are_idempotent_and_complete(
        g in groups().prop_filter("planar", |g| g.dim() == 2),
        seed in prop::collection::vec(-1.0f64..1.0, 64),
    ) {
        let grid = discretize(&DomainSpec::square(0.5).unwrap(), 1.0 / 10.0).unwrap();
        let action = SymmetryAction::new(character_table(&g).unwrap(), group_permutations(&grid, &g).unwrap()).unwrap();
        let v: Vec<Complex64> = (0..grid.len()).map(|i| Complex64::new(seed[i % 64], seed[(7 * i + 3) % 64])).collect();
        let mut sum = vec![Complex64::new(0.0, 0.0); v.len()];
        for chi in 0..action.num_irreps() {
            let p = action.projector_apply(chi, &v);
            let pp = action.projector_apply(chi, &p);
            let defect = p.iter().zip(&pp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(defect < 1e-12);
            for (s, x) in sum.iter_mut().zip(&p) {
                *s += x;
            }
        }
        let gap = sum.iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-12);
    }

    #[test]
    fn variable_coefficient_operator_is_exactly_equivariant(
        g in groups().prop_filter("planar", |g| g.dim() == 2),
        beta in -0.5f64..3.0,
        inv_h in 6u32..20,
        ball in prop::bool::ANY,
    ) {
        let domain = if ball { DomainSpec::ball(2, 0.5).unwrap() } else { DomainSpec::square(0.5).unwrap() };
        let grid = discretize(&domain, 1.0 / f64::from(inv_h)).unwrap();
        let l = assemble(&OperatorSpec::div_a_grad(Coefficient::Quadratic { beta }), &grid).unwrap();
        prop_assert_eq!(l.hermitian_defect(), 0.0);
        let report = equivariance_check(&l, &group_permutations(&grid, &g).unwrap());
        prop_assert!(report.exact());
    }

    #[test]
    fn a_lambda_sign_matches_the_symbol_inequality(
        x in prop::collection::vec(-0.5f64..0.5, 2),
        xi in prop::collection::vec(-50.0f64..50.0, 2),
        lambda in 1.0f64..1e4,
        beta in 0.0f64..2.0,
        bilap in prop::bool::ANY,
    ) {
        let spec = if bilap { OperatorSpec::bilaplacian() } else { OperatorSpec::div_a_grad(Coefficient::Quadratic { beta }) };
        let symbol = spec.principal_symbol();
        let a = a_lambda(&symbol, &x, &xi, lambda);
        let s = symbol.evaluate(&x, &xi);
        prop_assume!((s - lambda).abs() > 1e-9 * lambda);
        prop_assert_eq!(a < 0.0, s < lambda);
        prop_assert!(a > -1.0 / symbol.on_sphere(&x) - 1e-12 && a < 1.0);
    }

    #[test]
    fn fit_recovers_exact_power_laws(c in 0.01f64..100.0, p in -2.0f64..2.0, n in 3usize..10) {
        let xs: Vec<f64> = (0..n).map(|i| 10.0 * 1.7f64.powi(i as i32)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(p)).collect();
        let fit = log_log_fit(&xs, &ys).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-9);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-8);
        prop_assert!(fit.dropped.is_empty());
    }

    #[test]
    fn avoid_ties_never_lands_on_an_eigenvalue(
        mut values in prop::collection::vec(1.0f64..100.0, 1..30),
        pick in 0usize..30,
        offset in prop_oneof![Just(0.0f64), -1e-10f64..1e-10, -1.0f64..1.0],
    ) {
        values.sort_by(f64::total_cmp);
        let lambda = values[pick % values.len()] + offset;
        let moved = avoid_ties(lambda, &values);
        let near = |l: f64| values.iter().any(|v| (v - l).abs() <= 1e-9 * l.abs().max(1.0));
        prop_assert!(!near(moved));
        prop_assert_eq!(moved == lambda, !near(lambda));
    }
}
