//! Two-component states on spin ⊗ bosonic space and their entanglement
//! across the spin/position split.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::Basis;

/// Schmidt coefficient below which a state counts as a product state.
pub const PRODUCT_TOL: f64 = 1e-8;
/// Component weight below which a component counts as absent.
pub const SECTOR_WEIGHT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("component lengths {up} and {down} do not match basis dimension {dim}")]
    DimensionMismatch { up: usize, down: usize, dim: usize },
    #[error("states live on different bases")]
    BasisMismatch,
}

/// Which spin component a level or state lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    /// `(φ, 0)`, the H₊ block.
    Upper,
    /// `(0, φ)`, the H₋ block.
    Lower,
}

/// Spinor-valued wavefunction `(up, down)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoComponentState {
    basis: Basis,
    up: Vec<Complex64>,
    down: Vec<Complex64>,
}

impl TwoComponentState {
    pub fn unnormalized(
        basis: Basis,
        up: Vec<Complex64>,
        down: Vec<Complex64>,
    ) -> Result<Self, StateError> {
        let dim = basis.dim();
        if up.len() != dim || down.len() != dim {
            return Err(StateError::DimensionMismatch {
                up: up.len(),
                down: down.len(),
                dim,
            });
        }
        Ok(Self { basis, up, down })
    }

    pub fn from_real(basis: Basis, up: &[f64], down: &[f64]) -> Result<Self, StateError> {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::unnormalized(basis, c(up), c(down))
    }

    /// Embeds a single real component, leaving the other one zero.
    pub fn in_component(
        basis: Basis,
        component: Component,
        values: &[f64],
    ) -> Result<Self, StateError> {
        let zero = vec![0.0; values.len()];
        match component {
            Component::Upper => Self::from_real(basis, values, &zero),
            Component::Lower => Self::from_real(basis, &zero, values),
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn up(&self) -> &[Complex64] {
        &self.up
    }

    pub fn down(&self) -> &[Complex64] {
        &self.down
    }

    fn inner_vec(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let s: Complex64 = f.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
        s * self.basis.weight()
    }

    /// `(⟨up,up⟩, ⟨down,down⟩)`.
    pub fn weights(&self) -> (f64, f64) {
        (
            self.inner_vec(&self.up, &self.up).re,
            self.inner_vec(&self.down, &self.down).re,
        )
    }

    pub fn norm_sq(&self) -> f64 {
        let (a, b) = self.weights();
        a + b
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inner(&self, other: &TwoComponentState) -> Result<Complex64, StateError> {
        if self.basis != other.basis {
            return Err(StateError::BasisMismatch);
        }
        Ok(self.inner_vec(&self.up, &other.up) + self.inner_vec(&self.down, &other.down))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            basis: self.basis.clone(),
            up: self.up.iter().map(|v| v * factor).collect(),
            down: self.down.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self, StateError> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(StateError::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    /// Applies a 2×2 spin matrix on the spin factor only.
    pub fn spin_rotated(&self, u: [[Complex64; 2]; 2]) -> Self {
        let up = self
            .up
            .iter()
            .zip(&self.down)
            .map(|(a, b)| u[0][0] * a + u[0][1] * b)
            .collect();
        let down = self
            .up
            .iter()
            .zip(&self.down)
            .map(|(a, b)| u[1][0] * a + u[1][1] * b)
            .collect();
        Self {
            basis: self.basis.clone(),
            up,
            down,
        }
    }
}

/// Builds the normalized state `(up, down)`.
pub fn compose_state(
    basis: Basis,
    up: Vec<Complex64>,
    down: Vec<Complex64>,
) -> Result<TwoComponentState, StateError> {
    TwoComponentState::unnormalized(basis, up, down)?.normalized()
}

/// Eigenvalue of `(−1)^F = diag(−1, +1)`, or the component weights when the
/// state is not an eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FermionNumber {
    Plus,
    Minus,
    Indefinite { upper_weight: f64, lower_weight: f64 },
}

impl FermionNumber {
    pub fn value(self) -> Option<i8> {
        match self {
            FermionNumber::Plus => Some(1),
            FermionNumber::Minus => Some(-1),
            FermionNumber::Indefinite { .. } => None,
        }
    }
}

/// Diagonal of `(−1)^F = 1 − 2ψψ†` in the `(up, down)` ordering.
pub const FERMION_PARITY_DIAGONAL: [f64; 2] = [-1.0, 1.0];

/// `(−1)^F` eigenvalue carried by a pure-component state.
pub fn component_fermion_number(component: Component) -> i8 {
    match component {
        Component::Upper => FERMION_PARITY_DIAGONAL[0] as i8,
        Component::Lower => FERMION_PARITY_DIAGONAL[1] as i8,
    }
}

pub fn fermion_number_of(state: &TwoComponentState) -> FermionNumber {
    let (up, down) = state.weights();
    let total = up + down;
    let (up, down) = (up / total, down / total);
    if down < SECTOR_WEIGHT_TOL {
        sign_to_fermion(component_fermion_number(Component::Upper))
    } else if up < SECTOR_WEIGHT_TOL {
        sign_to_fermion(component_fermion_number(Component::Lower))
    } else {
        FermionNumber::Indefinite {
            upper_weight: up,
            lower_weight: down,
        }
    }
}

fn sign_to_fermion(sign: i8) -> FermionNumber {
    if sign > 0 {
        FermionNumber::Plus
    } else {
        FermionNumber::Minus
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementReport {
    /// Schmidt coefficients, descending.
    pub schmidt: [f64; 2],
    /// Von Neumann entropy of the spin reduced state, natural log.
    pub entropy: f64,
    pub product: bool,
    /// Spin reduced density matrix `ρ_{ss'}`.
    #[serde(skip)]
    pub reduced_density: [[Complex64; 2]; 2],
}

impl EntanglementReport {
    /// Eigenvalues of the reduced density matrix, descending.
    pub fn populations(&self) -> [f64; 2] {
        [self.schmidt[0].powi(2), self.schmidt[1].powi(2)]
    }
}

/// Schmidt decomposition across spin ⊗ position.
///
/// The state is rescaled to unit norm first.
pub fn schmidt(state: &TwoComponentState) -> EntanglementReport {
    let w = state.basis().weight();
    let inner = |f: &[Complex64], g: &[Complex64]| -> Complex64 {
        f.iter().zip(g).map(|(a, b)| a.conj() * b).sum::<Complex64>() * w
    };
    let (up, down) = (state.up(), state.down());
    let a = inner(up, up).re;
    let d = inner(down, down).re;
    let b = inner(down, up);
    let trace = a + d;
    let rho = [
        [Complex64::new(a / trace, 0.0), b / trace],
        [b.conj() / trace, Complex64::new(d / trace, 0.0)],
    ];

    // The small eigenvalue is det/λ_max with det = ‖big‖²·‖r‖², where r is
    // the part of the smaller component orthogonal to the larger one. This
    // keeps product states at λ₂ ≈ 0 instead of √ε.
    let (big, small, big_norm) = if a >= d { (up, down, a) } else { (down, up, d) };
    let c = inner(big, small) / big_norm;
    let r_sq: f64 = big
        .iter()
        .zip(small)
        .map(|(x, y)| (y - c * x).norm_sqr())
        .sum::<f64>()
        * w;
    let det = (big_norm * r_sq) / (trace * trace);
    let (pa, pd) = (a / trace, d / trace);
    let disc = ((pa - pd).powi(2) + 4.0 * (b.norm() / trace).powi(2)).sqrt();
    let p_max = 0.5 * (1.0 + disc);
    let p_min = (det / p_max).clamp(0.0, 0.5);
    let p_max = 1.0 - p_min;

    let entropy = [p_max, p_min]
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .clamp(0.0, std::f64::consts::LN_2);
    let schmidt = [p_max.sqrt(), p_min.sqrt()];
    EntanglementReport {
        schmidt,
        entropy,
        product: schmidt[1] < PRODUCT_TOL,
        reduced_density: rho,
    }
}

pub fn is_product(state: &TwoComponentState) -> bool {
    schmidt(state).product
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Grid;

    fn grid() -> Grid {
        Grid::new(-8.0, 8.0, 801).unwrap()
    }

    fn gaussian(g: &Grid, shift: f64) -> Vec<f64> {
        g.points().map(|q| (-(q - shift).powi(2) / 2.0).exp()).collect()
    }

    fn odd(g: &Grid) -> Vec<f64> {
        g.points().map(|q| q * (-q * q / 2.0).exp()).collect()
    }

    fn normalize(g: &Grid, v: Vec<f64>) -> Vec<f64> {
        let n = g.norm_real(&v);
        v.into_iter().map(|x| x / n).collect()
    }

    #[test]
    fn compose_rejects_zero_and_mismatch() {
        let g = grid();
        let zeros = vec![Complex64::new(0.0, 0.0); g.n()];
        assert_eq!(
            compose_state(Basis::Grid(g), zeros.clone(), zeros.clone()).unwrap_err(),
            StateError::ZeroNorm
        );
        assert!(matches!(
            compose_state(Basis::Grid(g), zeros[..3].to_vec(), zeros),
            Err(StateError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pure_components_have_definite_fermion_number() {
        let g = grid();
        let phi = gaussian(&g, 0.0);
        let up = TwoComponentState::in_component(Basis::Grid(g), Component::Upper, &phi)
            .unwrap()
            .normalized()
            .unwrap();
        assert!((up.norm() - 1.0).abs() < 1e-12);
        assert_eq!(fermion_number_of(&up), FermionNumber::Minus);
        let down = TwoComponentState::in_component(Basis::Grid(g), Component::Lower, &phi)
            .unwrap()
            .normalized()
            .unwrap();
        assert_eq!(fermion_number_of(&down), FermionNumber::Plus);
        assert!(is_product(&up) && is_product(&down));
    }

    #[test]
    fn equal_superposition_is_indefinite_and_maximally_entangled() {
        let g = grid();
        let f = normalize(&g, gaussian(&g, 0.0));
        let h = normalize(&g, odd(&g));
        let s = TwoComponentState::from_real(Basis::Grid(g), &f, &h)
            .unwrap()
            .normalized()
            .unwrap();
        match fermion_number_of(&s) {
            FermionNumber::Indefinite {
                upper_weight,
                lower_weight,
            } => {
                assert!((upper_weight - 0.5).abs() < 1e-12);
                assert!((lower_weight - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let rep = schmidt(&s);
        assert!((rep.entropy - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(!rep.product);
        let [p1, p2] = rep.populations();
        assert!((p1 - 0.5).abs() < 1e-12 && (p2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn product_state_with_equal_spatial_parts() {
        let g = grid();
        let f = gaussian(&g, 0.3);
        let three: Vec<f64> = f.iter().map(|x| 3.0 * x).collect();
        let s = TwoComponentState::from_real(Basis::Grid(g), &f, &three)
            .unwrap()
            .normalized()
            .unwrap();
        let rep = schmidt(&s);
        assert!(rep.schmidt[1] < PRODUCT_TOL, "{:?}", rep.schmidt);
        assert!((rep.schmidt[0] - 1.0).abs() < 1e-12);
        assert!(rep.entropy < 1e-20);
        assert!(is_product(&s));
    }

    #[test]
    fn overlapping_components_follow_closed_form() {
        // (f, h)/√2 with real overlap c: ρ eigenvalues (1 ± |c|)/2
        let g = grid();
        let f = normalize(&g, gaussian(&g, 0.0));
        let h = normalize(&g, gaussian(&g, 1.1));
        let c = g.inner_real(&f, &h);
        let s = TwoComponentState::from_real(Basis::Grid(g), &f, &h)
            .unwrap()
            .normalized()
            .unwrap();
        let [p1, p2] = schmidt(&s).populations();
        assert!((p1 - (1.0 + c.abs()) / 2.0).abs() < 1e-12);
        assert!((p2 - (1.0 - c.abs()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_density_is_a_state() {
        let g = grid();
        let f = gaussian(&g, -0.4);
        let h = odd(&g);
        let s = TwoComponentState::from_real(Basis::Grid(g), &f, &h)
            .unwrap()
            .scaled(Complex64::new(0.3, -0.7))
            .normalized()
            .unwrap();
        let rho = schmidt(&s).reduced_density;
        assert!((rho[0][0].re + rho[1][1].re - 1.0).abs() < 1e-12);
        assert!((rho[0][1] - rho[1][0].conj()).norm() < 1e-15);
        let det = (rho[0][0] * rho[1][1] - rho[0][1] * rho[1][0]).re;
        assert!(det >= -1e-15);
    }

    #[test]
    fn component_signs_follow_fermion_parity_matrix() {
        assert_eq!(component_fermion_number(Component::Upper), -1);
        assert_eq!(component_fermion_number(Component::Lower), 1);
    }
}
