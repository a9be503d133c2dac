//! Lowest eigenpairs of symmetric tridiagonal operators.
//!
//! Eigenvalues come from bisection on Sturm counts; eigenvectors from
//! inverse iteration on the shifted matrix, reorthogonalized inside
//! clusters of nearby eigenvalues.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{Discretization, Grid, LatticeOperator};

/// Residual bound is `RESIDUAL_TOL · max(1, |E|)`.
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
/// Eigenvalues closer than this fraction of `‖H‖∞` are treated as a cluster.
pub const CLUSTER_TOL: f64 = 1e-6;

const MAX_BISECTION_STEPS: usize = 128;
const MAX_INVERSE_STEPS: usize = 8;
const MAX_RESTARTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("requested {requested} eigenpairs from a matrix of dimension {dim}")]
    CountOutOfRange { requested: usize, dim: usize },
    #[error("operator is not symmetric")]
    NotSymmetric,
    #[error("inverse iteration did not converge for eigenpair {index} (residual {residual:e})")]
    NoConvergence { index: usize, residual: f64 },
    #[error("eigenvectors {i} and {j} are not orthogonal (overlap {overlap:e})")]
    LostOrthogonality { i: usize, j: usize, overlap: f64 },
    #[error("dimension mismatch: operator {operator}, spectrum {spectrum}")]
    DimensionMismatch { operator: usize, spectrum: usize },
}

/// Lowest eigenpairs of a lattice operator.
///
/// Eigenvectors are normalized under `⟨f, g⟩ = h Σ f_j g_j` and their
/// largest-modulus entry is positive.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub grid: Grid,
    pub mode: Option<Discretization>,
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn with_mode(mut self, mode: Discretization) -> Self {
        self.mode = Some(mode);
        self
    }
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let max_off_sq = off.iter().map(|e| e * e).fold(0.0, f64::max);
    let pivmin = f64::MIN_POSITIVE * max_off_sq.max(1.0);
    let mut count = 0;
    let mut d = diag[0] - x;
    if d.abs() < pivmin {
        d = -pivmin;
    }
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        d = (diag[i] - x) - off[i - 1] * off[i - 1] / d;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `index`-th smallest eigenvalue (0-based).
fn bisect(diag: &[f64], off: &[f64], index: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if sturm_count(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// LU factorization with partial pivoting of `T − λI` (tridiagonal), kept
/// in the four-band form used by LAPACK's `dlagtf`.
struct ShiftedLu {
    /// Diagonal of U.
    d: Vec<f64>,
    /// First superdiagonal of U.
    u1: Vec<f64>,
    /// Second superdiagonal of U (fill from pivoting).
    u2: Vec<f64>,
    /// Multipliers.
    l: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, floor: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut u1: Vec<f64> = off.to_vec();
        let mut u2 = vec![0.0; n.saturating_sub(2)];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        // `sub` is the current subdiagonal entry below the pivot
        for k in 0..n.saturating_sub(1) {
            let sub = off[k];
            if sub.abs() > d[k].abs() {
                // swap rows k and k+1
                swapped[k] = true;
                let m = d[k] / sub;
                l[k] = m;
                let next_diag = d[k + 1];
                d[k] = sub;
                let old_u1 = u1[k];
                u1[k] = next_diag;
                d[k + 1] = old_u1 - m * next_diag;
                if k + 1 < n - 1 {
                    let next_u1 = u1[k + 1];
                    u2[k] = next_u1;
                    u1[k + 1] = -m * next_u1;
                }
            } else {
                let pivot = if d[k].abs() < floor {
                    if d[k] < 0.0 {
                        -floor
                    } else {
                        floor
                    }
                } else {
                    d[k]
                };
                d[k] = pivot;
                let m = sub / pivot;
                l[k] = m;
                d[k + 1] -= m * u1[k];
            }
        }
        for v in &mut d {
            if v.abs() < floor {
                *v = if *v < 0.0 { -floor } else { floor };
            }
        }
        Self {
            d,
            u1,
            u2,
            l,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                b.swap(k, k + 1);
            }
            b[k + 1] -= self.l[k] * b[k];
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            if k + 1 < n {
                s -= self.u1[k] * b[k + 1];
            }
            if k + 2 < n {
                s -= self.u2[k] * b[k + 2];
            }
            b[k] = s / self.d[k];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn euclid(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual_euclid(op: &LatticeOperator, v: &[f64], lambda: f64) -> f64 {
    let hv = op.apply(v);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// h-weighted residual `‖Hv − Ev‖`.
fn weighted_residual(op: &LatticeOperator, v: &[f64], lambda: f64) -> f64 {
    residual_euclid(op, v, lambda) * op.grid().spacing().sqrt()
}

fn orthogonalize(x: &mut [f64], against: &[Vec<f64>]) {
    // two passes of classical Gram-Schmidt on unit vectors
    for _ in 0..2 {
        for u in against {
            let c = dot(x, u);
            for (xi, ui) in x.iter_mut().zip(u) {
                *xi -= c * ui;
            }
        }
    }
}

/// The `k` algebraically smallest eigenpairs.
pub fn solve_spectrum(op: &LatticeOperator, k: usize) -> Result<Spectrum, EigenError> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(EigenError::CountOutOfRange {
            requested: k,
            dim: n,
        });
    }
    if !op.is_symmetric() {
        return Err(EigenError::NotSymmetric);
    }
    let diag = op.diag();
    let off = op.upper();
    let norm = op.inf_norm().max(f64::MIN_POSITIVE);
    let (glo, ghi) = gershgorin(diag, off);
    let slack = f64::EPSILON * norm * 4.0 + f64::MIN_POSITIVE;
    let (glo, ghi) = (glo - slack, ghi + slack);

    let eigenvalues: Vec<f64> = (0..k).map(|i| bisect(diag, off, i, glo, ghi)).collect();

    let floor = f64::EPSILON * norm;
    let cluster_gap = CLUSTER_TOL * norm;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5_eed5_u64);
    let mut unit_vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut cluster_start = 0;

    for (i, &lambda) in eigenvalues.iter().enumerate() {
        if i > 0 && lambda - eigenvalues[i - 1] > cluster_gap {
            cluster_start = i;
        }
        let cluster = &unit_vectors[cluster_start..i];
        // separate the shift slightly for members of a cluster so the
        // factorizations differ
        let shift = lambda + (i - cluster_start) as f64 * floor;
        let lu = ShiftedLu::factor(diag, off, shift, floor);
        // the Euclidean residual of a unit vector equals the h-weighted
        // residual of the grid-normalized one
        let target = RESIDUAL_TOL * lambda.abs().max(1.0);

        let mut best: Option<(Vec<f64>, f64)> = None;
        'restarts: for _ in 0..=MAX_RESTARTS {
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            orthogonalize(&mut x, cluster);
            let nx = euclid(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            for _ in 0..MAX_INVERSE_STEPS {
                lu.solve(&mut x);
                orthogonalize(&mut x, cluster);
                let nx = euclid(&x);
                if !nx.is_finite() || nx == 0.0 {
                    continue 'restarts;
                }
                x.iter_mut().for_each(|v| *v /= nx);
                let r = residual_euclid(op, &x, lambda);
                if best.as_ref().is_none_or(|(_, br)| r < *br) {
                    best = Some((x.clone(), r));
                }
                if r <= 1e-3 * target {
                    break 'restarts;
                }
            }
            if best.as_ref().is_some_and(|(_, r)| *r <= target) {
                break;
            }
        }
        let (x, r) = best.expect("at least one inverse-iteration step ran");
        if r > target {
            return Err(EigenError::NoConvergence {
                index: i,
                residual: r,
            });
        }
        unit_vectors.push(x);
    }

    let h = op.grid().spacing();
    let scale = 1.0 / h.sqrt();
    let eigenvectors: Vec<Vec<f64>> = unit_vectors
        .into_iter()
        .map(|mut v| {
            let peak = v.iter().copied().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
            let sign = if peak < 0.0 { -scale } else { scale };
            v.iter_mut().for_each(|x| *x *= sign);
            v
        })
        .collect();

    for i in 0..k {
        for j in 0..i {
            let overlap = op.grid().inner_real(&eigenvectors[i], &eigenvectors[j]);
            if overlap.abs() > ORTHOGONALITY_TOL {
                return Err(EigenError::LostOrthogonality { i, j, overlap });
            }
        }
    }

    let residuals: Vec<f64> = eigenvectors
        .iter()
        .zip(&eigenvalues)
        .map(|(v, &e)| weighted_residual(op, v, e))
        .collect();
    for (index, (&r, &e)) in residuals.iter().zip(&eigenvalues).enumerate() {
        if r >= RESIDUAL_TOL * e.abs().max(1.0) {
            return Err(EigenError::NoConvergence { index, residual: r });
        }
    }

    Ok(Spectrum {
        grid: *op.grid(),
        mode: None,
        eigenvalues,
        eigenvectors,
        residuals,
    })
}

/// Recomputes `‖Hv − Ev‖` for every stored pair.
pub fn residual_report(op: &LatticeOperator, spectrum: &Spectrum) -> Result<Vec<f64>, EigenError> {
    if let Some(v) = spectrum.eigenvectors.iter().find(|v| v.len() != op.dim()) {
        return Err(EigenError::DimensionMismatch {
            operator: op.dim(),
            spectrum: v.len(),
        });
    }
    Ok(spectrum
        .eigenvectors
        .iter()
        .zip(&spectrum.eigenvalues)
        .map(|(v, &e)| weighted_residual(op, v, e))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(diag: Vec<f64>, off: Vec<f64>) -> LatticeOperator {
        let n = diag.len();
        let grid = Grid::new(0.0, (n - 1) as f64, n).unwrap();
        LatticeOperator::symmetric(grid, diag, off).unwrap()
    }

    #[test]
    fn three_by_three() {
        let s = solve_spectrum(&op(vec![2.0; 3], vec![-1.0; 2]), 3).unwrap();
        let r2 = 2.0_f64.sqrt();
        for (e, want) in s.eigenvalues.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
            assert!((e - want).abs() < 1e-14, "{e} vs {want}");
        }
    }

    #[test]
    fn count_out_of_range() {
        let m = op(vec![2.0, 2.0, 2.0], vec![-1.0, -1.0]);
        assert_eq!(
            solve_spectrum(&m, 4).unwrap_err(),
            EigenError::CountOutOfRange {
                requested: 4,
                dim: 3
            }
        );
        assert!(solve_spectrum(&m, 0).is_err());
    }

    #[test]
    fn rejects_nonsymmetric() {
        let grid = Grid::new(0.0, 1.0, 3).unwrap();
        let m = LatticeOperator::new(grid, vec![1.0, 1.0], vec![0.0; 3], vec![2.0, 2.0]).unwrap();
        assert_eq!(solve_spectrum(&m, 1).unwrap_err(), EigenError::NotSymmetric);
    }

    #[test]
    fn laplacian_closed_form() {
        // tridiag(-1, 2, -1) has eigenvalues 2 − 2cos(jπ/(n+1))
        let n = 300;
        let m = op(vec![2.0; n], vec![-1.0; n - 1]);
        let s = solve_spectrum(&m, 12).unwrap();
        for (j, e) in s.eigenvalues.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((e - exact).abs() < 1e-13, "{j}: {e} vs {exact}");
        }
    }

    #[test]
    fn split_matrix_degeneracy_is_orthogonalized() {
        // two decoupled identical blocks give exactly repeated eigenvalues
        let mut off = vec![-1.0; 9];
        off[4] = 0.0;
        let m = op(vec![2.0; 10], off);
        let s = solve_spectrum(&m, 4).unwrap();
        assert!((s.eigenvalues[0] - s.eigenvalues[1]).abs() < 1e-14);
        let g = m.grid();
        assert!(g.inner_real(&s.eigenvectors[0], &s.eigenvectors[1]).abs() < 1e-12);
        for v in &s.eigenvectors {
            assert!((g.norm_real(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_report_matches_and_detects_perturbation() {
        let n = 50;
        let m = op(
            (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect(),
            (0..n - 1).map(|i| 1.0 + (i as f64).cos() * 0.5).collect(),
        );
        let s = solve_spectrum(&m, 5).unwrap();
        assert_eq!(residual_report(&m, &s).unwrap(), s.residuals);

        let mut bumped = s.clone();
        let r = |eps: f64, b: &mut Spectrum| {
            b.eigenvectors[0] = s.eigenvectors[0]
                .iter()
                .zip(&s.eigenvectors[1])
                .map(|(a, u)| a + eps * u)
                .collect();
            residual_report(&m, b).unwrap()[0]
        };
        let r1 = r(1e-4, &mut bumped);
        let r2 = r(2e-4, &mut bumped);
        assert!((r2 / r1 - 2.0).abs() < 1e-3, "{r1} {r2}");

        let small = op(vec![1.0; 4], vec![0.0; 3]);
        assert!(matches!(
            residual_report(&small, &s),
            Err(EigenError::DimensionMismatch { .. })
        ));
    }
}
