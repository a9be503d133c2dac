//! Parity superselection: the operator `P = σ₃ ⊗ I`, conjugation by it,
//! the commutant audit of a declared observable set, and the resulting
//! rule on which superpositions count as physical.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::entangle::{StateError, TwoComponentState, FERMION_PARITY_DIAGONAL};
use crate::lattice::spin_matrices::SIGMA3;
use crate::lattice::{BandMatrix, Basis, LatticeError, Parity, SpinBlockOperator};

/// Commutator norm below which an observable counts as even.
pub const COMMUTANT_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative tolerance of the conjugation verdict.
pub const CONJUGATION_TOL: f64 = 1e-12;
/// Sector weight above which a state counts as occupying that sector.
pub const SECTOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SuperselectError {
    #[error("observable set is empty")]
    EmptyObservableSet,
    #[error("observable '{label}' is not Hermitian")]
    NotHermitian { label: String },
    #[error("observable '{label}' lives on a different basis")]
    BasisMismatch { label: String },
    #[error("state and report live on different bases")]
    StateBasisMismatch,
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

pub fn parity_operator(basis: Basis) -> SpinBlockOperator {
    let id = BandMatrix::identity(basis.dim());
    SpinBlockOperator::spin_tensor(basis, SIGMA3, &id, Parity::Even)
        .expect("identity matches the basis dimension")
}

/// `(−1)^F = −P`.
pub fn fermion_parity(basis: Basis) -> SpinBlockOperator {
    let id = BandMatrix::identity(basis.dim());
    let [up, down] = FERMION_PARITY_DIAGONAL.map(|s| id.scale(Complex64::new(s, 0.0)));
    SpinBlockOperator::block_diagonal(basis, up, down).expect("identity matches the basis dimension")
}

/// Returns `P·op·P†` and whether it equals `op`, `−op`, or neither.
pub fn conjugate_by_parity(op: &SpinBlockOperator) -> (SpinBlockOperator, Parity) {
    let p = parity_operator(op.basis().clone());
    let conj = p
        .matmul(op)
        .and_then(|x| x.matmul(&p))
        .expect("parity shares the operator basis");
    let tol = CONJUGATION_TOL * op.max_abs().max(1.0);
    let even = conj.sub(op).expect("same basis").max_abs();
    let odd = conj.add(op).expect("same basis").max_abs();
    let verdict = if even <= tol {
        Parity::Even
    } else if odd <= tol {
        Parity::Odd
    } else {
        Parity::Mixed
    };
    (conj.with_parity(verdict), verdict)
}

/// Labelled observables sharing one basis, each Hermitian.
#[derive(Debug, Clone, Default)]
pub struct ObservableSet {
    entries: Vec<(String, SpinBlockOperator)>,
}

impl ObservableSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        label: impl Into<String>,
        op: SpinBlockOperator,
    ) -> Result<(), SuperselectError> {
        let label = label.into();
        if let Some((_, first)) = self.entries.first() {
            if first.basis() != op.basis() {
                return Err(SuperselectError::BasisMismatch { label });
            }
        }
        if !op.is_hermitian(HERMITIAN_TOL) {
            return Err(SuperselectError::NotHermitian { label });
        }
        self.entries.push((label, op));
        Ok(())
    }

    pub fn with(
        mut self,
        label: impl Into<String>,
        op: SpinBlockOperator,
    ) -> Result<Self, SuperselectError> {
        self.push(label, op)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn basis(&self) -> Option<&Basis> {
        self.entries.first().map(|(_, op)| op.basis())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SpinBlockOperator)> {
        self.entries.iter().map(|(l, op)| (l.as_str(), op))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableNorm {
    pub label: String,
    pub commutator_norm: f64,
}

/// Projectors onto the `P = +1` and `P = −1` eigenspaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorStructure {
    pub labels: [i8; 2],
    #[serde(skip)]
    pub plus: SpinBlockOperator,
    #[serde(skip)]
    pub minus: SpinBlockOperator,
}

impl SectorStructure {
    fn new(basis: Basis) -> Self {
        let n = basis.dim();
        let id = BandMatrix::identity(n);
        let plus = SpinBlockOperator::new(basis.clone(), [[Some(id.clone()), None], [None, None]], Parity::Even)
            .expect("identity matches the basis dimension");
        let minus = SpinBlockOperator::new(basis, [[None, None], [None, Some(id)]], Parity::Even)
            .expect("identity matches the basis dimension");
        Self {
            labels: [1, -1],
            plus,
            minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperselectionReport {
    pub active: bool,
    pub norms: Vec<ObservableNorm>,
    pub offending: Vec<String>,
    pub sectors: Option<SectorStructure>,
    #[serde(skip)]
    pub basis: Basis,
}

pub fn commutant_check(obs: &ObservableSet) -> Result<SuperselectionReport, SuperselectError> {
    let basis = obs.basis().ok_or(SuperselectError::EmptyObservableSet)?.clone();
    let p = parity_operator(basis.clone());
    let mut norms = Vec::with_capacity(obs.len());
    let mut offending = Vec::new();
    for (label, op) in obs.iter() {
        let commutator_norm = op.commutator(&p)?.inf_norm();
        if commutator_norm >= COMMUTANT_TOL {
            offending.push(label.to_string());
        }
        norms.push(ObservableNorm {
            label: label.to_string(),
            commutator_norm,
        });
    }
    let active = offending.is_empty();
    Ok(SuperselectionReport {
        active,
        norms,
        offending,
        sectors: active.then(|| SectorStructure::new(basis.clone())),
        basis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "ruling", rename_all = "snake_case")]
pub enum Ruling {
    Allowed,
    Forbidden { plus_weight: f64, minus_weight: f64 },
}

pub fn physical_state_filter(
    state: &TwoComponentState,
    report: &SuperselectionReport,
) -> Result<Ruling, SuperselectError> {
    if state.basis() != &report.basis {
        return Err(SuperselectError::StateBasisMismatch);
    }
    if !report.active {
        return Ok(Ruling::Allowed);
    }
    let total = state.norm_sq();
    if total == 0.0 {
        return Err(StateError::ZeroNorm.into());
    }
    let (up, down) = state.weights();
    let (plus_weight, minus_weight) = (up / total, down / total);
    if plus_weight > SECTOR_TOL && minus_weight > SECTOR_TOL {
        Ok(Ruling::Forbidden {
            plus_weight,
            minus_weight,
        })
    } else {
        Ok(Ruling::Allowed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlipDemo {
    pub before: TwoComponentState,
    pub after: TwoComponentState,
    pub overlap: Complex64,
}

/// A 2π rotation acts as `+1` on the bosonic (lower) component and `−1` on
/// the fermionic (upper) one.
pub fn rotation_flip_demo(state: &TwoComponentState) -> Result<FlipDemo, SuperselectError> {
    let rotation = fermion_parity(state.basis().clone());
    let after = rotation.apply(state)?;
    let overlap = state.inner(&after)?;
    Ok(FlipDemo {
        before: state.clone(),
        after,
        overlap,
    })
}
