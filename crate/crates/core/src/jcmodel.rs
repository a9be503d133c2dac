//! Spin-boson interactions used as superselection probes: the
//! Jaynes-Cummings term, odd in the spin variables, and the Yukawa term,
//! even in them.
//!
//! Both are built against any [`BosonicMode`]: the truncated Fock ladder,
//! where `a` is exact, or the position grid, where `a` is the lattice
//! factor of the oscillator superpotential `W = ωq`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::entangle::{schmidt, TwoComponentState};
use crate::lattice::spin_matrices::{PSI, PSI_DAG};
use crate::lattice::{
    build_momentum, build_partner_hamiltonians, BandMatrix, Basis, Discretization, Grid,
    LatticeError, LatticePair, Parity, SpinBlockOperator,
};
use crate::parser::{Expr, SuperpotentialAst};
use crate::superselect::{
    commutant_check, physical_state_filter, ObservableSet, Ruling, SuperselectError,
    SuperselectionReport,
};

/// `σ₊ := ψ†`, so that `a†σ₊ + aσ₋ = aψ + a†ψ†`.
pub const SIGMA_PLUS: [[Complex64; 2]; 2] = PSI_DAG;
pub const SIGMA_MINUS: [[Complex64; 2]; 2] = PSI;

/// Doublets reported by [`jc_superselection_demo`].
const DEMO_DOUBLETS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JcError {
    #[error("Fock truncation must be at least 2, got {0}")]
    TruncationTooSmall(usize),
    #[error("oscillator frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Superselect(#[from] SuperselectError),
}

/// A single bosonic degree of freedom with ladder operators.
pub trait BosonicMode {
    fn basis(&self) -> Basis;
    fn lowering(&self) -> BandMatrix;
    fn raising(&self) -> BandMatrix {
        self.lowering().adjoint()
    }
    fn position(&self) -> BandMatrix;
    fn momentum(&self) -> BandMatrix;
}

/// Number basis `|0>, ..., |M−1>` with `a|n> = √n |n−1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockLadder {
    pub truncation: usize,
    pub omega: f64,
}

pub fn build_ladder(truncation: usize) -> Result<FockLadder, JcError> {
    FockLadder::with_frequency(truncation, 1.0)
}

impl FockLadder {
    pub fn with_frequency(truncation: usize, omega: f64) -> Result<Self, JcError> {
        if truncation < 2 {
            return Err(JcError::TruncationTooSmall(truncation));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(JcError::InvalidFrequency(omega));
        }
        Ok(Self { truncation, omega })
    }

    /// `a†a = diag(0, 1, ..., M−1)`.
    pub fn number(&self) -> BandMatrix {
        let n: Vec<f64> = (0..self.truncation).map(|k| k as f64).collect();
        BandMatrix::from_real_diagonal(&n)
    }

    /// `[a, a†]`; the identity except for `1 − M` in the last entry.
    pub fn commutator(&self) -> BandMatrix {
        let a = self.lowering();
        let ad = self.raising();
        a.matmul(&ad).sub(&ad.matmul(&a))
    }
}

impl BosonicMode for FockLadder {
    fn basis(&self) -> Basis {
        Basis::Fock {
            truncation: self.truncation,
        }
    }

    fn lowering(&self) -> BandMatrix {
        let sup = (1..self.truncation)
            .map(|n| Complex64::new((n as f64).sqrt(), 0.0))
            .collect();
        BandMatrix::zeros(self.truncation).with_diagonal(1, sup)
    }

    /// `(a + a†) / √(2ω)`.
    fn position(&self) -> BandMatrix {
        let a = self.lowering();
        a.add(&a.adjoint())
            .scale(Complex64::new((2.0 * self.omega).sqrt().recip(), 0.0))
    }

    /// `i√(ω/2) (a† − a)`.
    fn momentum(&self) -> BandMatrix {
        let a = self.lowering();
        a.adjoint()
            .sub(&a)
            .scale(Complex64::new(0.0, (0.5 * self.omega).sqrt()))
    }
}

/// The oscillator ladder on the position grid: `a = A / √(2ω)` with `A`
/// the forward-difference factor of `W = ωq`, so that `H₋ = 2ω a†a`.
#[derive(Debug, Clone)]
pub struct LatticeLadder {
    pub omega: f64,
    pair: LatticePair,
}

impl LatticeLadder {
    pub fn new(grid: &Grid, omega: f64) -> Result<Self, JcError> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(JcError::InvalidFrequency(omega));
        }
        let w = SuperpotentialAst::new(Expr::Mul(Box::new(Expr::Const(omega)), Box::new(Expr::Var)));
        let pair = build_partner_hamiltonians(&w, grid, Discretization::SusyExact)?;
        Ok(Self { omega, pair })
    }

    pub fn pair(&self) -> &LatticePair {
        &self.pair
    }
}

impl BosonicMode for LatticeLadder {
    fn basis(&self) -> Basis {
        self.pair.basis()
    }

    fn lowering(&self) -> BandMatrix {
        self.pair
            .a
            .to_band()
            .scale(Complex64::new((2.0 * self.omega).sqrt().recip(), 0.0))
    }

    fn position(&self) -> BandMatrix {
        BandMatrix::from_real_diagonal(&self.pair.grid.points().collect::<Vec<_>>())
    }

    fn momentum(&self) -> BandMatrix {
        build_momentum(&self.pair.grid)
    }
}

/// `g (a ψ + a† ψ†)`: up-down block `g·a`, down-up block `g·a†`.
pub fn build_jc_interaction(g: f64, mode: &impl BosonicMode) -> SpinBlockOperator {
    let basis = mode.basis();
    if g == 0.0 {
        return SpinBlockOperator::zero(basis);
    }
    let gc = Complex64::new(g, 0.0);
    let up_down = mode.lowering().scale(gc);
    let down_up = mode.raising().scale(gc);
    SpinBlockOperator::new(basis, [[None, Some(up_down)], [Some(down_up), None]], Parity::Odd)
        .expect("ladder matches its own basis")
}

/// `g (a† σ₊ + a σ₋)`, assembled from spin tensors.
pub fn build_jc_interaction_sigma(g: f64, mode: &impl BosonicMode) -> SpinBlockOperator {
    let basis = mode.basis();
    let gc = Complex64::new(g, 0.0);
    let raise = SpinBlockOperator::spin_tensor(basis.clone(), SIGMA_PLUS, &mode.raising(), Parity::Odd)
        .expect("ladder matches its own basis");
    let lower = SpinBlockOperator::spin_tensor(basis, SIGMA_MINUS, &mode.lowering(), Parity::Odd)
        .expect("ladder matches its own basis");
    raise.add(&lower).expect("same basis").scale(gc)
}

/// `g ψ q ψ† = g·diag(q, 0)`.
pub fn build_yukawa(g: f64, mode: &impl BosonicMode) -> SpinBlockOperator {
    let q = mode.position().scale(Complex64::new(g, 0.0));
    SpinBlockOperator::new(mode.basis(), [[Some(q), None], [None, None]], Parity::Even)
        .expect("position matches its own basis")
}

/// `diag(2ω(N+1), 2ωN)`, the oscillator partners in the number basis.
pub fn susy_oscillator_fock(ladder: &FockLadder) -> SpinBlockOperator {
    let two_omega = 2.0 * ladder.omega;
    let level = |shift: f64| -> Vec<f64> {
        (0..ladder.truncation)
            .map(|n| two_omega * (n as f64 + shift))
            .collect()
    };
    SpinBlockOperator::block_diagonal(
        ladder.basis(),
        BandMatrix::from_real_diagonal(&level(1.0)),
        BandMatrix::from_real_diagonal(&level(0.0)),
    )
    .expect("diagonals match the truncation")
}

/// `(|n−1>, |n>) / √2`: the two degenerate states at energy `2ωn`.
pub fn fock_doublet(ladder: &FockLadder, n: usize) -> TwoComponentState {
    assert!(n >= 1 && n < ladder.truncation, "doublet index out of range");
    let mut up = vec![0.0; ladder.truncation];
    let mut down = vec![0.0; ladder.truncation];
    up[n - 1] = std::f64::consts::FRAC_1_SQRT_2;
    down[n] = std::f64::consts::FRAC_1_SQRT_2;
    TwoComponentState::from_real(ladder.basis(), &up, &down).expect("dimensions match")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubletRuling {
    pub n: usize,
    pub energy: f64,
    pub ruling: Ruling,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JcDemo {
    pub g: f64,
    pub truncation: usize,
    pub omega: f64,
    pub report: SuperselectionReport,
    pub doublets: Vec<DoubletRuling>,
}

/// Audits `{H_SUSY, H_jc}` in the number basis and rules on the lowest
/// doublet superpositions.
pub fn jc_superselection_demo(g: f64, truncation: usize, omega: f64) -> Result<JcDemo, JcError> {
    let ladder = FockLadder::with_frequency(truncation, omega)?;
    let observables = ObservableSet::new()
        .with("hamiltonian", susy_oscillator_fock(&ladder))?
        .with("jc", build_jc_interaction(g, &ladder))?;
    let report = commutant_check(&observables)?;
    let doublets = (1..truncation.min(DEMO_DOUBLETS + 1))
        .map(|n| {
            let state = fock_doublet(&ladder, n);
            Ok(DoubletRuling {
                n,
                energy: 2.0 * omega * n as f64,
                ruling: physical_state_filter(&state, &report)?,
                entropy: schmidt(&state).entropy,
            })
        })
        .collect::<Result<_, JcError>>()?;
    Ok(JcDemo {
        g,
        truncation,
        omega,
        report,
        doublets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superselect::{conjugate_by_parity, parity_operator};

    fn real(m: &BandMatrix) -> Vec<Vec<f64>> {
        (0..m.dim())
            .map(|i| (0..m.dim()).map(|j| m.get(i, j).re).collect())
            .collect()
    }

    #[test]
    fn small_ladders() {
        let l2 = build_ladder(2).unwrap();
        assert_eq!(real(&l2.lowering()), vec![vec![0.0, 1.0], vec![0.0, 0.0]]);
        let l3 = build_ladder(3).unwrap();
        assert!(l3.raising().matmul(&l3.lowering()).sub(&l3.number()).max_abs() < 1e-15);
        assert_eq!(real(&l3.number()), vec![vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]);
        let c = l3.commutator();
        assert!((c.get(2, 2).re + 2.0).abs() < 1e-15);
        assert_eq!(build_ladder(1).unwrap_err(), JcError::TruncationTooSmall(1));
        assert!(FockLadder::with_frequency(4, 0.0).is_err());
    }

    #[test]
    fn truncation_artifact_in_last_entry_only() {
        for m in [2, 5, 16] {
            let c = build_ladder(m).unwrap().commutator();
            for i in 0..m {
                for j in 0..m {
                    let want = match (i == j, i == m - 1) {
                        (true, true) => 1.0 - m as f64,
                        (true, false) => 1.0,
                        _ => 0.0,
                    };
                    assert!((c.get(i, j).re - want).abs() < 1e-12, "M={m} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn parity_dichotomy() {
        for m in [2, 3, 8, 16] {
            let l = FockLadder::with_frequency(m, 1.3).unwrap();
            for g in [0.1, -0.7, 2.0] {
                let jc = build_jc_interaction(g, &l);
                assert!(jc.is_hermitian(1e-12));
                assert_eq!(conjugate_by_parity(&jc).1, Parity::Odd);
                let yu = build_yukawa(g, &l);
                assert!(yu.is_hermitian(1e-12));
                assert_eq!(conjugate_by_parity(&yu).1, Parity::Even);
                assert!(yu.block(1, 1).is_none());
            }
        }
        let grid = Grid::new(-6.0, 6.0, 300).unwrap();
        let l = LatticeLadder::new(&grid, 1.0).unwrap();
        assert_eq!(conjugate_by_parity(&build_jc_interaction(0.1, &l)).1, Parity::Odd);
        assert_eq!(conjugate_by_parity(&build_yukawa(0.5, &l)).1, Parity::Even);
    }

    #[test]
    fn jc_commutator_norm() {
        let check = |mode: &dyn Fn(f64) -> (SpinBlockOperator, BandMatrix, Basis)| {
            for g in [0.1, 1.5] {
                let (jc, a, basis) = mode(g);
                let c = jc.commutator(&parity_operator(basis)).unwrap().inf_norm();
                let want = 2.0 * g * a.inf_norm();
                assert!((c - want).abs() < 1e-12 * want.max(1.0), "{c} vs {want}");
            }
        };
        let fock = FockLadder::with_frequency(16, 1.0).unwrap();
        check(&|g| (build_jc_interaction(g, &fock), fock.lowering(), fock.basis()));
        assert!((fock.lowering().inf_norm() - 15.0_f64.sqrt()).abs() < 1e-15);
        let lat = LatticeLadder::new(&Grid::new(-8.0, 8.0, 400).unwrap(), 1.0).unwrap();
        check(&|g| (build_jc_interaction(g, &lat), lat.lowering(), lat.basis()));
    }

    #[test]
    fn sigma_form_matches_psi_form() {
        let l = FockLadder::with_frequency(7, 0.8).unwrap();
        let a = build_jc_interaction(0.3, &l);
        let b = build_jc_interaction_sigma(0.3, &l);
        assert_eq!(a.to_dense(), b.to_dense());
    }

    #[test]
    fn zero_coupling_is_even_zero() {
        let l = build_ladder(5).unwrap();
        let jc = build_jc_interaction(0.0, &l);
        assert_eq!(jc.max_abs(), 0.0);
        assert_eq!(conjugate_by_parity(&jc).1, Parity::Even);
    }

    #[test]
    fn oscillator_doublets_at_zero_coupling() {
        let omega = 0.7;
        let l = FockLadder::with_frequency(20, omega).unwrap();
        let h = susy_oscillator_fock(&l).add(&build_jc_interaction(0.0, &l)).unwrap();
        let dense = h.to_dense();
        assert!(h.is_hermitian(0.0));
        let mut e: Vec<f64> = (0..dense.len()).map(|i| dense[i][i].re).collect();
        e.sort_by(f64::total_cmp);
        assert!(e[0].abs() < 1e-9);
        for k in 1..10 {
            let want = 2.0 * omega * k as f64;
            assert!((e[2 * k - 1] - want).abs() < 1e-9);
            assert!((e[2 * k] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn lattice_ladder_factorizes_lower_partner() {
        let omega = 1.7;
        let l = LatticeLadder::new(&Grid::new(-5.0, 5.0, 200).unwrap(), omega).unwrap();
        let n = l.raising().matmul(&l.lowering()).scale(Complex64::new(2.0 * omega, 0.0));
        let h = l.pair().h_minus.to_band();
        let diff = n.sub(&h).max_abs();
        assert!(diff < 1e-10 * h.max_abs(), "{diff}");
    }

    #[test]
    fn demo_verdicts() {
        let on = jc_superselection_demo(0.1, 16, 1.0).unwrap();
        assert!(!on.report.active);
        assert_eq!(on.report.offending, vec!["jc".to_string()]);
        assert_eq!(on.doublets.len(), 3);
        for d in &on.doublets {
            assert_eq!(d.ruling, Ruling::Allowed);
            assert!((d.entropy - std::f64::consts::LN_2).abs() < 1e-6);
        }
        let off = jc_superselection_demo(0.0, 16, 1.0).unwrap();
        assert!(off.report.active);
        assert!(off
            .doublets
            .iter()
            .all(|d| matches!(d.ruling, Ruling::Forbidden { .. })));
        assert_eq!(jc_superselection_demo(0.1, 2, 1.0).unwrap().doublets.len(), 1);
    }
}
