use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;

use susylab::eigen::{solve_spectrum, sturm_count};
use susylab::entangle::{schmidt, TwoComponentState};
use susylab::lattice::{
    build_charges, build_partner_hamiltonians, BandMatrix, Basis, Discretization, Grid,
    LatticeOperator, Parity, SpinBlockOperator,
};
use susylab::parser::{differentiate, parse_superpotential, Expr, Func, SuperpotentialAst};
use susylab::superselect::{commutant_check, conjugate_by_parity, rotation_flip_demo, ObservableSet};
use susylab::susy::{charge_adjointness, pair_spectra};

fn expr_strategy(allow_div: bool) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Var),
        (0u32..40).prop_map(|k| Expr::Const(f64::from(k) / 8.0)),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let funcs = prop_oneof![
            Just(Func::Sin),
            Just(Func::Cos),
            Just(Func::Tanh),
            Just(Func::Exp),
            Just(Func::Sinh),
            Just(Func::Cosh),
        ];
        let bin = (inner.clone(), inner.clone(), 0..if allow_div { 4 } else { 3 }).prop_map(
            |(a, b, op)| {
                let (a, b) = (Box::new(a), Box::new(b));
                match op {
                    0 => Expr::Add(a, b),
                    1 => Expr::Sub(a, b),
                    2 => Expr::Mul(a, b),
                    _ => Expr::Div(a, b),
                }
            },
        );
        prop_oneof![
            bin,
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
            (funcs, inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

fn polynomial_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec(-1.0f64..1.0, 1..=5).prop_map(|c| {
        let terms: Vec<String> = c
            .iter()
            .enumerate()
            .map(|(k, a)| format!("({a})*q^{k}"))
            .collect();
        terms.join(" + ")
    })
}

fn dense_eigenvalues(op: &LatticeOperator) -> Vec<f64> {
    let n = op.dim();
    let m = DMatrix::from_fn(n, n, |i, j| op.get(i, j));
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn printed_form_reparses_to_the_same_tree(e in expr_strategy(true)) {
        let printed = e.to_string();
        let back = parse_superpotential(&printed).unwrap();
        prop_assert_eq!(back.root(), &e, "{}", printed);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn derivative_matches_finite_difference(e in expr_strategy(false), q in -1.0f64..1.0) {
        let ast = SuperpotentialAst::new(e);
        let d = differentiate(&ast).eval(q);
        let f = |x: f64| ast.eval(x);
        let h = 1e-3;
        let fd = (f(q - 2.0 * h) - 8.0 * f(q - h) + 8.0 * f(q + h) - f(q + 2.0 * h)) / (12.0 * h);
        prop_assume!(d.is_finite() && fd.is_finite() && f(q).abs() < 1e6);
        let scale = d.abs().max(f(q).abs()).max(1.0);
        prop_assert!((d - fd).abs() <= 1e-6 * scale, "{} at q={}: {} vs {}", ast, q, d, fd);
    }

    #[test]
    fn sturm_count_matches_dense_spectrum(
        diag in prop::collection::vec(-5.0f64..5.0, 3..30),
        seed_off in prop::collection::vec(-2.0f64..2.0, 29),
        x in -8.0f64..8.0,
    ) {
        let n = diag.len();
        let off = seed_off[..n - 1].to_vec();
        let grid = Grid::new(0.0, 1.0, n).unwrap();
        let op = LatticeOperator::symmetric(grid, diag.clone(), off.clone()).unwrap();
        let e = dense_eigenvalues(&op);
        prop_assume!(e.iter().all(|l| (l - x).abs() > 1e-9));
        let below = e.iter().filter(|&&l| l < x).count();
        prop_assert_eq!(sturm_count(&diag, &off, x), below);
    }

    #[test]
    fn solver_matches_dense_spectrum(
        diag in prop::collection::vec(-5.0f64..5.0, 3..40),
        seed_off in prop::collection::vec(-2.0f64..2.0, 39),
    ) {
        let n = diag.len();
        let grid = Grid::new(0.0, 1.0, n).unwrap();
        let op = LatticeOperator::symmetric(grid, diag, seed_off[..n - 1].to_vec()).unwrap();
        let want = dense_eigenvalues(&op);
        let got = solve_spectrum(&op, n).unwrap();
        for (g, w) in got.eigenvalues.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-10, "{} vs {}", g, w);
        }
    }

    #[test]
    fn susy_exact_pairing_for_random_polynomials(w in polynomial_strategy()) {
        let grid = Grid::new(-3.0, 3.0, 200).unwrap();
        let ast = parse_superpotential(&w).unwrap();
        let pair = build_partner_hamiltonians(&ast, &grid, Discretization::SusyExact).unwrap();
        let dp = dense_eigenvalues(&pair.h_plus);
        let dm = dense_eigenvalues(&pair.h_minus);
        let norm = pair.h_plus.inf_norm();
        for (a, b) in dp.iter().zip(&dm) {
            prop_assert!((a - b).abs() < 1e-9 * norm, "{}: {} vs {}", w, a, b);
        }
        let k = 8;
        let plus = solve_spectrum(&pair.h_plus, k).unwrap().with_mode(Discretization::SusyExact);
        let minus = solve_spectrum(&pair.h_minus, k).unwrap().with_mode(Discretization::SusyExact);
        for i in 0..k {
            prop_assert!((plus.eigenvalues[i] - dp[i]).abs() < 1e-9 * norm);
            prop_assert!((minus.eigenvalues[i] - dm[i]).abs() < 1e-9 * norm);
        }
        let rep = pair_spectra(&plus, &minus, 1e-6, 1e-6).unwrap();
        prop_assert!(rep.max_delta() < 1e-9 * norm, "{:?}", rep);
    }

    #[test]
    fn charges_are_adjoint(
        w in polynomial_strategy(),
        naive in any::<bool>(),
        re in prop::collection::vec(-1.0f64..1.0, 120),
        im in prop::collection::vec(-1.0f64..1.0, 120),
    ) {
        let grid = Grid::new(-2.0, 2.0, 60).unwrap();
        let mode = if naive { Discretization::Naive } else { Discretization::SusyExact };
        let pair = build_partner_hamiltonians(&parse_superpotential(&w).unwrap(), &grid, mode).unwrap();
        let (q, q_dag) = build_charges(&pair);
        let z: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let s = TwoComponentState::unnormalized(pair.basis(), z[..60].to_vec(), z[60..].to_vec()).unwrap();
        let (lhs, rhs) = charge_adjointness(&q, &q_dag, &s).unwrap();
        prop_assert!((Complex64::new(lhs, 0.0) - rhs).norm() <= 1e-12 * lhs.max(1.0));
        prop_assert_eq!(q.matmul(&q).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn schmidt_spectrum_is_invariant_under_spin_unitaries(
        up in prop::collection::vec(-1.0f64..1.0, 16),
        down in prop::collection::vec(-1.0f64..1.0, 16),
        theta in 0.0f64..std::f64::consts::PI,
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let basis = Basis::Fock { truncation: 16 };
        let s = TwoComponentState::from_real(basis, &up, &down).unwrap().normalized().unwrap();
        let (c, sn) = (theta.cos(), theta.sin());
        let e = Complex64::from_polar(1.0, phi);
        let u = [
            [Complex64::new(c, 0.0), -e.conj() * sn],
            [e * sn, Complex64::new(c, 0.0)],
        ];
        let a = schmidt(&s);
        let b = schmidt(&s.spin_rotated(u));
        prop_assert!((a.schmidt[0] - b.schmidt[0]).abs() < 1e-10);
        prop_assert!((a.schmidt[1] - b.schmidt[1]).abs() < 1e-10);
        prop_assert!((a.entropy - b.entropy).abs() < 1e-9);
    }

    #[test]
    fn rotation_overlap_is_one_minus_twice_upper_weight(
        up in prop::collection::vec(-1.0f64..1.0, 12),
        down in prop::collection::vec(-1.0f64..1.0, 12),
    ) {
        let s = TwoComponentState::from_real(Basis::Fock { truncation: 12 }, &up, &down)
            .unwrap()
            .normalized()
            .unwrap();
        let (w, _) = s.weights();
        let demo = rotation_flip_demo(&s).unwrap();
        prop_assert!((demo.overlap.re - (1.0 - 2.0 * w)).abs() < 1e-12);
    }

    #[test]
    fn commutant_verdict_agrees_with_conjugation(
        d1 in prop::collection::vec(-1.0f64..1.0, 6),
        d2 in prop::collection::vec(-1.0f64..1.0, 6),
        mix in prop::collection::vec(-1.0f64..1.0, 6),
        kind in 0u8..3,
    ) {
        let basis = Basis::Fock { truncation: 6 };
        let diag = |v: &[f64]| BandMatrix::from_real_diagonal(v);
        let even = SpinBlockOperator::block_diagonal(basis.clone(), diag(&d1), diag(&d2)).unwrap();
        let m = diag(&mix);
        let odd = SpinBlockOperator::new(basis, [[None, Some(m.clone())], [Some(m), None]], Parity::Odd).unwrap();
        let op = match kind {
            0 => even,
            1 => odd,
            _ => even.add(&odd).unwrap(),
        };
        let rep = commutant_check(&ObservableSet::new().with("o", op.clone()).unwrap()).unwrap();
        let (_, verdict) = conjugate_by_parity(&op);
        prop_assert_eq!(rep.active, verdict == Parity::Even);
    }
}
