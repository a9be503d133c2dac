use num_complex::Complex64;
use serde::Serialize;

use super::{BandMatrix, Grid, LatticeError};
use crate::entangle::TwoComponentState;

/// The bosonic space a two-component object lives on.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    /// Position grid; inner products carry the spacing as weight.
    Grid(Grid),
    /// Truncated number basis `|0>, ..., |M-1>` with unit weights.
    Fock { truncation: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::Grid(g) => g.n(),
            Basis::Fock { truncation } => *truncation,
        }
    }

    /// Weight of one basis point in the inner product.
    pub fn weight(&self) -> f64 {
        match self {
            Basis::Grid(g) => g.spacing(),
            Basis::Fock { .. } => 1.0,
        }
    }
}

/// Behaviour under conjugation by the parity operator `P = σ₃ ⊗ I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Spin index of a block row or column: 0 is the upper component, 1 the lower.
pub const UP: usize = 0;
pub const DOWN: usize = 1;

/// Operator on spin ⊗ bosonic space written as a 2×2 array of bosonic
/// blocks. `None` marks a block that is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBlockOperator {
    basis: Basis,
    blocks: [[Option<BandMatrix>; 2]; 2],
    parity: Parity,
}

impl SpinBlockOperator {
    pub fn new(
        basis: Basis,
        blocks: [[Option<BandMatrix>; 2]; 2],
        parity: Parity,
    ) -> Result<Self, LatticeError> {
        let dim = basis.dim();
        for block in blocks.iter().flatten().flatten() {
            if block.dim() != dim {
                return Err(LatticeError::DimensionMismatch {
                    expected: dim,
                    found: block.dim(),
                });
            }
        }
        Ok(Self {
            basis,
            blocks,
            parity,
        })
    }

    pub fn zero(basis: Basis) -> Self {
        Self {
            basis,
            blocks: [[None, None], [None, None]],
            parity: Parity::Even,
        }
    }

    pub fn block_diagonal(
        basis: Basis,
        upper: BandMatrix,
        lower: BandMatrix,
    ) -> Result<Self, LatticeError> {
        Self::new(basis, [[Some(upper), None], [None, Some(lower)]], Parity::Even)
    }

    /// `spin ⊗ spatial` for a 2×2 spin matrix.
    pub fn spin_tensor(
        basis: Basis,
        spin: [[Complex64; 2]; 2],
        spatial: &BandMatrix,
        parity: Parity,
    ) -> Result<Self, LatticeError> {
        let block = |s: Complex64| (s != Complex64::new(0.0, 0.0)).then(|| spatial.scale(s));
        Self::new(
            basis,
            [
                [block(spin[0][0]), block(spin[0][1])],
                [block(spin[1][0]), block(spin[1][1])],
            ],
            parity,
        )
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn declared_parity(&self) -> Parity {
        self.parity
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn block(&self, row: usize, col: usize) -> Option<&BandMatrix> {
        self.blocks[row][col].as_ref()
    }

    fn check_basis(&self, other: &Basis) -> Result<(), LatticeError> {
        if &self.basis != other {
            return Err(LatticeError::BasisMismatch);
        }
        Ok(())
    }

    pub fn apply(&self, state: &TwoComponentState) -> Result<TwoComponentState, LatticeError> {
        self.check_basis(state.basis())?;
        let input = [state.up(), state.down()];
        let mut out = [
            vec![Complex64::new(0.0, 0.0); self.dim()],
            vec![Complex64::new(0.0, 0.0); self.dim()],
        ];
        for (row, target) in out.iter_mut().enumerate() {
            for (col, x) in input.iter().enumerate() {
                if let Some(block) = &self.blocks[row][col] {
                    for (t, y) in target.iter_mut().zip(block.apply(x)) {
                        *t += y;
                    }
                }
            }
        }
        let [up, down] = out;
        Ok(TwoComponentState::unnormalized(self.basis.clone(), up, down)
            .expect("operator output has the operator's dimension"))
    }

    pub fn matmul(&self, other: &SpinBlockOperator) -> Result<Self, LatticeError> {
        self.check_basis(&other.basis)?;
        let mut blocks: [[Option<BandMatrix>; 2]; 2] = Default::default();
        for (r, row) in blocks.iter_mut().enumerate() {
            for (c, slot) in row.iter_mut().enumerate() {
                for m in 0..2 {
                    if let (Some(a), Some(b)) = (&self.blocks[r][m], &other.blocks[m][c]) {
                        let p = a.matmul(b);
                        *slot = Some(match slot.take() {
                            Some(acc) => acc.add(&p),
                            None => p,
                        });
                    }
                }
            }
        }
        Ok(Self {
            basis: self.basis.clone(),
            blocks,
            parity: combine_product(self.parity, other.parity),
        })
    }

    fn zip_blocks(
        &self,
        other: &SpinBlockOperator,
        f: impl Fn(Option<&BandMatrix>, Option<&BandMatrix>) -> Option<BandMatrix>,
    ) -> Result<Self, LatticeError> {
        self.check_basis(&other.basis)?;
        let mut blocks: [[Option<BandMatrix>; 2]; 2] = Default::default();
        for (r, row) in blocks.iter_mut().enumerate() {
            for (c, slot) in row.iter_mut().enumerate() {
                *slot = f(self.blocks[r][c].as_ref(), other.blocks[r][c].as_ref());
            }
        }
        let parity = if self.parity == other.parity {
            self.parity
        } else {
            Parity::Mixed
        };
        Ok(Self {
            basis: self.basis.clone(),
            blocks,
            parity,
        })
    }

    pub fn add(&self, other: &SpinBlockOperator) -> Result<Self, LatticeError> {
        self.zip_blocks(other, |a, b| match (a, b) {
            (Some(a), Some(b)) => Some(a.add(b)),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        })
    }

    pub fn sub(&self, other: &SpinBlockOperator) -> Result<Self, LatticeError> {
        self.zip_blocks(other, |a, b| match (a, b) {
            (Some(a), Some(b)) => Some(a.sub(b)),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.scale(Complex64::new(-1.0, 0.0))),
            (None, None) => None,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for block in out.blocks.iter_mut().flatten().flatten() {
            *block = block.scale(factor);
        }
        out
    }

    /// Conjugate transpose over the full spin ⊗ bosonic space.
    pub fn adjoint(&self) -> Self {
        let b = &self.blocks;
        let adj = |m: &Option<BandMatrix>| m.as_ref().map(BandMatrix::adjoint);
        Self {
            basis: self.basis.clone(),
            blocks: [[adj(&b[0][0]), adj(&b[1][0])], [adj(&b[0][1]), adj(&b[1][1])]],
            parity: self.parity,
        }
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &SpinBlockOperator) -> Result<Self, LatticeError> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// `self·other + other·self`.
    pub fn anticommutator(&self, other: &SpinBlockOperator) -> Result<Self, LatticeError> {
        self.matmul(other)?.add(&other.matmul(self)?)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .flatten()
            .map(BandMatrix::max_abs)
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum of the full matrix.
    pub fn inf_norm(&self) -> f64 {
        let dim = self.dim();
        let mut best: f64 = 0.0;
        for row in &self.blocks {
            let mut sums = vec![0.0; dim];
            for block in row.iter().flatten() {
                for (k, d) in block.offsets().map(|k| (k, block.diagonal(k).unwrap())) {
                    for (m, v) in d.iter().enumerate() {
                        let r = if k >= 0 { m } else { m + k.unsigned_abs() };
                        sums[r] += v.norm();
                    }
                }
            }
            best = sums.into_iter().fold(best, f64::max);
        }
        best
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint())
            .map(|d| d.max_abs() <= tol)
            .unwrap_or(false)
    }

    /// Dense copy, row-major over (spin, site) with spin as the slow index.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let dim = self.dim();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); 2 * dim]; 2 * dim];
        for r in 0..2 {
            for c in 0..2 {
                if let Some(block) = &self.blocks[r][c] {
                    for i in 0..dim {
                        for j in 0..dim {
                            out[r * dim + i][c * dim + j] = block.get(i, j);
                        }
                    }
                }
            }
        }
        out
    }
}

fn combine_product(a: Parity, b: Parity) -> Parity {
    match (a, b) {
        (Parity::Mixed, _) | (_, Parity::Mixed) => Parity::Mixed,
        (x, y) if x == y => Parity::Even,
        _ => Parity::Odd,
    }
}

/// Spin matrices in the `(up, down)` ordering: the fermionic annihilator
/// `ψ = [[0,1],[0,0]]` and creator `ψ† = [[0,0],[1,0]]`.
pub mod spin_matrices {
    use num_complex::Complex64;

    const O: Complex64 = Complex64::new(0.0, 0.0);
    const I: Complex64 = Complex64::new(1.0, 0.0);

    pub const PSI: [[Complex64; 2]; 2] = [[O, I], [O, O]];
    pub const PSI_DAG: [[Complex64; 2]; 2] = [[O, O], [I, O]];
    pub const IDENTITY: [[Complex64; 2]; 2] = [[I, O], [O, I]];
    pub const SIGMA3: [[Complex64; 2]; 2] = [[I, O], [O, Complex64::new(-1.0, 0.0)]];

    pub fn mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let mut out = [[O; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        out
    }
}
