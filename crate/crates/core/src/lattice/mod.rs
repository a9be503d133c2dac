//! Finite-difference realisation of the partner Hamiltonians and charges.
//!
//! Units: ħ = 1 and the kinetic term is `p²` without a factor ½. All
//! operators act on the `n` grid nodes; wavefunctions vanish one spacing
//! outside the box.

mod band;
mod spin;

pub use band::BandMatrix;
pub use spin::{spin_matrices, Basis, Parity, SpinBlockOperator, DOWN, UP};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parser::{differentiate, evaluate_on_grid, EvalError, SuperpotentialAst};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("failed to sample W: {0}")]
    Superpotential(EvalError),
    #[error("failed to sample W': {0}")]
    Derivative(EvalError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operators or states live on different bases")]
    BasisMismatch,
    #[error("product leaves the tridiagonal band (entry {row},{col})")]
    BandOverflow { row: usize, col: usize },
}

/// Uniform grid `q_j = q_min + j·h`, `j = 0..n`, with both ends as nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    q_min: f64,
    q_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(q_min: f64, q_max: f64, n: usize) -> Result<Self, LatticeError> {
        if !(q_min.is_finite() && q_max.is_finite()) {
            return Err(LatticeError::InvalidGrid("bounds must be finite".into()));
        }
        if q_min >= q_max {
            return Err(LatticeError::InvalidGrid(format!(
                "q_min ({q_min}) must be below q_max ({q_max})"
            )));
        }
        if n < 3 {
            return Err(LatticeError::InvalidGrid(format!("need n >= 3 points, got {n}")));
        }
        Ok(Self { q_min, q_max, n })
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.q_min + j as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.point(j))
    }

    /// `⟨f, g⟩ = h Σ conj(f_j) g_j`.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let s: Complex64 = f.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
        s * self.spacing()
    }

    pub fn inner_real(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * self.spacing()
    }

    pub fn norm_real(&self, f: &[f64]) -> f64 {
        self.inner_real(f, f).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    /// 3-point Laplacian plus `W² ± W′` on the diagonal.
    Naive,
    /// `H₋ = AᵀA`, `H₊ = AAᵀ` with `A = D_f + diag(W)`.
    SusyExact,
}

impl std::str::FromStr for Discretization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Discretization::Naive),
            "susy-exact" | "susy_exact" | "exact" => Ok(Discretization::SusyExact),
            other => Err(format!("unknown mode '{other}' (expected naive or susy-exact)")),
        }
    }
}

/// Real tridiagonal matrix on a grid.
///
/// `lower[i]` is entry `(i+1, i)`, `upper[i]` is entry `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOperator {
    grid: Grid,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    symmetric: bool,
}

impl LatticeOperator {
    pub fn new(
        grid: Grid,
        lower: Vec<f64>,
        diag: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, LatticeError> {
        let n = grid.n();
        for (len, expected) in [(diag.len(), n), (lower.len(), n - 1), (upper.len(), n - 1)] {
            if len != expected {
                return Err(LatticeError::DimensionMismatch {
                    expected,
                    found: len,
                });
            }
        }
        let symmetric = lower == upper;
        Ok(Self {
            grid,
            lower,
            diag,
            upper,
            symmetric,
        })
    }

    pub fn symmetric(grid: Grid, diag: Vec<f64>, off: Vec<f64>) -> Result<Self, LatticeError> {
        Self::new(grid, off.clone(), diag, off)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Set when the sub- and super-diagonals are elementwise equal.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j == i + 1 {
            self.upper[i]
        } else if i == j + 1 {
            self.lower[j]
        } else {
            0.0
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            grid: self.grid,
            lower: self.upper.clone(),
            diag: self.diag.clone(),
            upper: self.lower.clone(),
            symmetric: self.symmetric,
        }
    }

    /// Matrix product, which must itself be tridiagonal (e.g. products of
    /// opposite bidiagonals).
    pub fn product(&self, other: &LatticeOperator) -> Result<Self, LatticeError> {
        if self.grid != other.grid {
            return Err(LatticeError::BasisMismatch);
        }
        let n = self.dim();
        let entry = |i: usize, j: usize| -> f64 {
            let lo = i.max(j).saturating_sub(1);
            let hi = (i.min(j) + 1).min(n - 1);
            (lo..=hi).map(|k| self.get(i, k) * other.get(k, j)).sum()
        };
        for i in 0..n.saturating_sub(2) {
            if entry(i, i + 2) != 0.0 {
                return Err(LatticeError::BandOverflow { row: i, col: i + 2 });
            }
            if entry(i + 2, i) != 0.0 {
                return Err(LatticeError::BandOverflow { row: i + 2, col: i });
            }
        }
        let diag = (0..n).map(|i| entry(i, i)).collect();
        let upper = (0..n - 1).map(|i| entry(i, i + 1)).collect();
        let lower = (0..n - 1).map(|i| entry(i + 1, i)).collect();
        Self::new(self.grid, lower, diag, upper)
    }

    pub fn to_band(&self) -> BandMatrix {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        BandMatrix::zeros(self.dim())
            .with_diagonal(-1, c(&self.lower))
            .with_diagonal(0, c(&self.diag))
            .with_diagonal(1, c(&self.upper))
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.lower[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.upper[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &LatticeOperator) -> f64 {
        let d = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        d(&self.diag, &other.diag)
            .max(d(&self.lower, &other.lower))
            .max(d(&self.upper, &other.upper))
    }
}

/// Partner Hamiltonians together with the factor `A` they are built from.
#[derive(Debug, Clone)]
pub struct LatticePair {
    pub grid: Grid,
    pub mode: Discretization,
    pub h_plus: LatticeOperator,
    pub h_minus: LatticeOperator,
    /// Forward-difference factor `D_f + diag(W)` (upper bidiagonal).
    pub a: LatticeOperator,
    /// Exact transpose of `a`.
    pub a_dag: LatticeOperator,
    pub w_samples: Vec<f64>,
    pub wprime_samples: Vec<f64>,
}

impl LatticePair {
    /// `diag(H₊, H₋)` on spin ⊗ grid.
    pub fn hamiltonian(&self) -> SpinBlockOperator {
        SpinBlockOperator::block_diagonal(
            Basis::Grid(self.grid),
            self.h_plus.to_band(),
            self.h_minus.to_band(),
        )
        .expect("partner blocks share the grid dimension")
    }

    pub fn basis(&self) -> Basis {
        Basis::Grid(self.grid)
    }
}

pub fn build_partner_hamiltonians(
    w: &SuperpotentialAst,
    grid: &Grid,
    mode: Discretization,
) -> Result<LatticePair, LatticeError> {
    let grid = *grid;
    let n = grid.n();
    let h = grid.spacing();
    let w_samples = evaluate_on_grid(w, &grid).map_err(LatticeError::Superpotential)?;
    let wprime_samples =
        evaluate_on_grid(&differentiate(w), &grid).map_err(LatticeError::Derivative)?;

    let a = LatticeOperator::new(
        grid,
        vec![0.0; n - 1],
        w_samples.iter().map(|w| w - 1.0 / h).collect(),
        vec![1.0 / h; n - 1],
    )?;
    let a_dag = a.transpose();

    let (h_plus, h_minus) = match mode {
        Discretization::Naive => {
            let kinetic = 2.0 / (h * h);
            let off = vec![-1.0 / (h * h); n - 1];
            let potential = |sign: f64| -> Vec<f64> {
                w_samples
                    .iter()
                    .zip(&wprime_samples)
                    .map(|(w, wp)| kinetic + w * w + sign * wp)
                    .collect()
            };
            (
                LatticeOperator::symmetric(grid, potential(1.0), off.clone())?,
                LatticeOperator::symmetric(grid, potential(-1.0), off)?,
            )
        }
        Discretization::SusyExact => (a.product(&a_dag)?, a_dag.product(&a)?),
    };

    Ok(LatticePair {
        grid,
        mode,
        h_plus,
        h_minus,
        a,
        a_dag,
        w_samples,
        wprime_samples,
    })
}

/// `p = −i·D_c` with the central difference `(f_{j+1} − f_{j−1}) / 2h`.
pub fn build_momentum(grid: &Grid) -> BandMatrix {
    let n = grid.n();
    let s = 1.0 / (2.0 * grid.spacing());
    BandMatrix::zeros(n)
        .with_diagonal(1, vec![Complex64::new(0.0, -s); n - 1])
        .with_diagonal(-1, vec![Complex64::new(0.0, s); n - 1])
}

/// Supersymmetric charges `Q = B ⊗ ψ†` and `Q† = B† ⊗ ψ`.
///
/// `B = p + i·diag(W)`. In susy-exact mode the lattice realisation is
/// `B = i·Aᵀ`, so that `{Q, Q†} = diag(AAᵀ, AᵀA) = diag(H₊, H₋)` holds
/// with the same arithmetic the partners were built with.
pub fn build_charges(pair: &LatticePair) -> (SpinBlockOperator, SpinBlockOperator) {
    let basis = pair.basis();
    let b = match pair.mode {
        Discretization::SusyExact => pair.a_dag.to_band().scale(Complex64::new(0.0, 1.0)),
        Discretization::Naive => {
            let i_w: Vec<Complex64> = pair
                .w_samples
                .iter()
                .map(|&w| Complex64::new(0.0, w))
                .collect();
            build_momentum(&pair.grid).add(&BandMatrix::from_diagonal(i_w))
        }
    };
    let b_dag = b.adjoint();
    let q = SpinBlockOperator::new(basis.clone(), [[None, None], [Some(b), None]], Parity::Odd)
        .expect("charge block has grid dimension");
    let q_dag = SpinBlockOperator::new(basis, [[None, Some(b_dag)], [None, None]], Parity::Odd)
        .expect("charge block has grid dimension");
    (q, q_dag)
}
