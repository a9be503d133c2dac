use std::collections::BTreeMap;

use num_complex::Complex64;

/// Square complex matrix stored by diagonals.
///
/// Diagonal `k` holds the entries `(i, i + k)`; its element `m` is the entry
/// whose smaller index is `m`, so every stored diagonal has length
/// `dim - |k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    dim: usize,
    diagonals: BTreeMap<isize, Vec<Complex64>>,
}

impl BandMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            diagonals: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(values: Vec<Complex64>) -> Self {
        let dim = values.len();
        Self::zeros(dim).with_diagonal(0, values)
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        Self::from_diagonal(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Sets diagonal `offset`. Panics if the length does not match.
    pub fn with_diagonal(mut self, offset: isize, values: Vec<Complex64>) -> Self {
        assert_eq!(
            values.len(),
            self.diagonal_len(offset),
            "diagonal {offset} has wrong length"
        );
        self.diagonals.insert(offset, values);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diagonal(&self, offset: isize) -> Option<&[Complex64]> {
        self.diagonals.get(&offset).map(Vec::as_slice)
    }

    pub fn offsets(&self) -> impl Iterator<Item = isize> + '_ {
        self.diagonals.keys().copied()
    }

    fn diagonal_len(&self, offset: isize) -> usize {
        self.dim.saturating_sub(offset.unsigned_abs())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let offset = j as isize - i as isize;
        self.diagonals
            .get(&offset)
            .map_or(Complex64::new(0.0, 0.0), |d| d[i.min(j)])
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for (&k, diag) in &self.diagonals {
            let shift = k.unsigned_abs();
            for (m, &a) in diag.iter().enumerate() {
                let (row, col) = if k >= 0 { (m, m + shift) } else { (m + shift, m) };
                y[row] += a * x[col];
            }
        }
        y
    }

    pub fn matmul(&self, other: &BandMatrix) -> BandMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim as isize;
        let mut out: BTreeMap<isize, Vec<Complex64>> = BTreeMap::new();
        for (&ka, da) in &self.diagonals {
            for (&kb, db) in &other.diagonals {
                let k = ka + kb;
                if k.abs() >= n {
                    continue;
                }
                let target = out
                    .entry(k)
                    .or_insert_with(|| vec![Complex64::new(0.0, 0.0); (n - k.abs()) as usize]);
                // row i, middle index i + ka, column i + k
                let lo = 0.max(-ka).max(-k);
                let hi = n.min(n - ka).min(n - k);
                for i in lo..hi {
                    let a = da[i.min(i + ka) as usize];
                    let b = db[(i + ka).min(i + k) as usize];
                    target[i.min(i + k) as usize] += a * b;
                }
            }
        }
        BandMatrix {
            dim: self.dim,
            diagonals: out,
        }
    }

    fn zip_with(&self, other: &BandMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = BTreeMap::new();
        let offsets: std::collections::BTreeSet<isize> =
            self.offsets().chain(other.offsets()).collect();
        let zero = Complex64::new(0.0, 0.0);
        for k in offsets {
            let len = self.diagonal_len(k);
            let a = self.diagonals.get(&k);
            let b = other.diagonals.get(&k);
            let values = (0..len)
                .map(|m| f(a.map_or(zero, |d| d[m]), b.map_or(zero, |d| d[m])))
                .collect();
            out.insert(k, values);
        }
        BandMatrix {
            dim: self.dim,
            diagonals: out,
        }
    }

    pub fn add(&self, other: &BandMatrix) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &BandMatrix) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        BandMatrix {
            dim: self.dim,
            diagonals: self
                .diagonals
                .iter()
                .map(|(&k, d)| (k, d.iter().map(|&v| v * factor).collect()))
                .collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        BandMatrix {
            dim: self.dim,
            diagonals: self
                .diagonals
                .iter()
                .map(|(&k, d)| (-k, d.iter().map(|v| v.conj()).collect()))
                .collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        BandMatrix {
            dim: self.dim,
            diagonals: self
                .diagonals
                .iter()
                .map(|(&k, d)| (-k, d.clone()))
                .collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.diagonals
            .values()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        let mut rows = vec![0.0; self.dim];
        for (&k, d) in &self.diagonals {
            for (m, v) in d.iter().enumerate() {
                let row = if k >= 0 { m } else { m + k.unsigned_abs() };
                rows[row] += v.norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs() == 0.0
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).max_abs() <= tol
    }
}
