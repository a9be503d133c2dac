//! Spectral structure of the partner pair: isospectral matching, zero
//! modes, breaking classification, charge action and the closure of the
//! charge algebra.
//!
//! On a finite box the factorized partners `AᵀA` and `AAᵀ` share their
//! whole spectrum, so a zero mode living in one block comes with an
//! exponentially small partner pinned to a box edge. Candidates below the
//! zero threshold are therefore split by localization: a level whose
//! eigenvector does not decay before the box ends is a boundary mode and
//! never counts as a zero mode.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::eigen::Spectrum;
use crate::entangle::{component_fermion_number, Component, TwoComponentState};
use crate::lattice::{Discretization, Grid, LatticeError, LatticePair, SpinBlockOperator};

pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-6;
/// Endpoint amplitude, relative to the peak, above which an eigenvector is
/// considered pinned to the box boundary.
pub const BOUNDARY_AMPLITUDE_TOL: f64 = 1e-3;
/// Number of lowest eigenvectors per sector used as algebra probes.
pub const ALGEBRA_PROBES: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SusyError {
    #[error("spectra come from different grids")]
    GridMismatch,
    #[error("spectra come from different discretization modes")]
    ModeMismatch,
    #[error("both partner spectra must contain at least one level")]
    MissingSpectra,
    #[error("found {count} zero modes; expected at most one")]
    AmbiguousZeroModes { count: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// One eigenvalue with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub component: Component,
    pub index: usize,
    pub energy: f64,
    /// `max(|v₀|, |v_{n−1}|) / max|v|`.
    pub boundary_amplitude: f64,
    pub zero_mode: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    pub plus_index: usize,
    pub minus_index: usize,
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub delta: f64,
}

impl MatchedPair {
    pub fn energy(&self) -> f64 {
        0.5 * (self.energy_plus + self.energy_minus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingReport {
    pub mode: Option<Discretization>,
    pub tolerance: f64,
    pub zero_threshold: f64,
    pub pairs: Vec<MatchedPair>,
    /// Levels without a partner, including bulk zero modes.
    pub unpaired: Vec<Level>,
    /// Near-zero levels pinned to the box edge.
    pub boundary_modes: Vec<Level>,
    /// Levels above the highest computed level of the other partner.
    pub beyond_window: Vec<Level>,
    pub warnings: Vec<String>,
}

impl PairingReport {
    pub fn max_delta(&self) -> f64 {
        self.pairs.iter().map(|p| p.delta).fold(0.0, f64::max)
    }

    pub fn zero_modes(&self) -> impl Iterator<Item = &Level> {
        self.unpaired.iter().filter(|l| l.zero_mode)
    }
}

pub fn boundary_amplitude(v: &[f64]) -> f64 {
    let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let edge = v[0].abs().max(v[v.len() - 1].abs());
    edge / peak
}

fn level(spec: &Spectrum, component: Component, index: usize) -> Level {
    Level {
        component,
        index,
        energy: spec.eigenvalues[index],
        boundary_amplitude: boundary_amplitude(&spec.eigenvectors[index]),
        zero_mode: false,
    }
}

fn check_compatible(plus: &Spectrum, minus: &Spectrum) -> Result<(), SusyError> {
    if plus.grid != minus.grid {
        return Err(SusyError::GridMismatch);
    }
    if plus.mode != minus.mode {
        return Err(SusyError::ModeMismatch);
    }
    if plus.is_empty() || minus.is_empty() {
        return Err(SusyError::MissingSpectra);
    }
    Ok(())
}

/// Splits the near-zero levels of one partner into bulk zero modes and
/// boundary modes; returns the indices of the remaining levels.
fn set_aside(
    spec: &Spectrum,
    component: Component,
    zero_threshold: f64,
    zero_modes: &mut Vec<Level>,
    boundary: &mut Vec<Level>,
) -> Vec<usize> {
    let mut rest = Vec::new();
    for i in 0..spec.len() {
        if spec.eigenvalues[i] < zero_threshold {
            let mut l = level(spec, component, i);
            if l.boundary_amplitude > BOUNDARY_AMPLITUDE_TOL {
                boundary.push(l);
            } else {
                l.zero_mode = true;
                zero_modes.push(l);
            }
        } else {
            rest.push(i);
        }
    }
    rest
}

/// Greedy ascending match of the two partner spectra within `tolerance`.
pub fn pair_spectra(
    plus: &Spectrum,
    minus: &Spectrum,
    tolerance: f64,
    zero_threshold: f64,
) -> Result<PairingReport, SusyError> {
    check_compatible(plus, minus)?;
    let mut unpaired = Vec::new();
    let mut boundary_modes = Vec::new();
    let plus_rest = set_aside(
        plus,
        Component::Upper,
        zero_threshold,
        &mut unpaired,
        &mut boundary_modes,
    );
    let minus_rest = set_aside(
        minus,
        Component::Lower,
        zero_threshold,
        &mut unpaired,
        &mut boundary_modes,
    );

    let plus_top = plus.eigenvalues[plus.len() - 1];
    let minus_top = minus.eigenvalues[minus.len() - 1];
    let mut pairs = Vec::new();
    let mut beyond_window = Vec::new();
    let mut warnings = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < plus_rest.len() && j < minus_rest.len() {
        let (pi, mj) = (plus_rest[i], minus_rest[j]);
        let (ep, em) = (plus.eigenvalues[pi], minus.eigenvalues[mj]);
        if (ep - em).abs() <= tolerance {
            let crowded_plus = plus_rest
                .get(i + 1)
                .is_some_and(|&k| (plus.eigenvalues[k] - em).abs() <= tolerance);
            let crowded_minus = minus_rest
                .get(j + 1)
                .is_some_and(|&k| (minus.eigenvalues[k] - ep).abs() <= tolerance);
            if crowded_plus || crowded_minus {
                warnings.push(format!(
                    "several candidate partners within tolerance near E = {ep}"
                ));
            }
            pairs.push(MatchedPair {
                plus_index: pi,
                minus_index: mj,
                energy_plus: ep,
                energy_minus: em,
                delta: (ep - em).abs(),
            });
            i += 1;
            j += 1;
        } else if ep < em {
            unpaired.push(level(plus, Component::Upper, pi));
            i += 1;
        } else {
            unpaired.push(level(minus, Component::Lower, mj));
            j += 1;
        }
    }
    for &pi in &plus_rest[i..] {
        let l = level(plus, Component::Upper, pi);
        if l.energy > minus_top + tolerance {
            beyond_window.push(l);
        } else {
            unpaired.push(l);
        }
    }
    for &mj in &minus_rest[j..] {
        let l = level(minus, Component::Lower, mj);
        if l.energy > plus_top + tolerance {
            beyond_window.push(l);
        } else {
            unpaired.push(l);
        }
    }
    unpaired.sort_by(|a, b| a.energy.total_cmp(&b.energy));

    Ok(PairingReport {
        mode: plus.mode,
        tolerance,
        zero_threshold,
        pairs,
        unpaired,
        boundary_modes,
        beyond_window,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Unbroken,
    Broken,
}

/// Sign test on `∫₀^q W` at the box ends: `exp(∓∫W)` is normalizable when
/// the integral grows (resp. falls) towards both ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizabilityCheck {
    pub integral_left: f64,
    pub integral_right: f64,
    pub predicted: Option<Component>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SusyClassification {
    pub verdict: Verdict,
    pub ground_energy_plus: f64,
    pub ground_energy_minus: f64,
    pub zero_mode: Option<Component>,
    pub zero_mode_energy: Option<f64>,
    pub witten_index: i32,
    pub zero_threshold: f64,
    pub boundary_modes: usize,
    pub normalizability: NormalizabilityCheck,
    /// Set when the normalizability proxy disagrees with the spectrum.
    pub warning: bool,
}

/// Cumulative trapezoid of the sampled superpotential from the central node
/// out to either box end.
pub fn normalizability_check(grid: &Grid, w: &[f64]) -> NormalizabilityCheck {
    let h = grid.spacing();
    let c = (grid.n() - 1) / 2;
    let trap = |a: usize, b: usize| -> f64 { (a..b).map(|j| 0.5 * h * (w[j] + w[j + 1])).sum() };
    let integral_left = -trap(0, c);
    let integral_right = trap(c, grid.n() - 1);
    let predicted = if integral_left > 0.0 && integral_right > 0.0 {
        Some(Component::Lower)
    } else if integral_left < 0.0 && integral_right < 0.0 {
        Some(Component::Upper)
    } else {
        None
    };
    NormalizabilityCheck {
        integral_left,
        integral_right,
        predicted,
    }
}

fn first_bulk(spec: &Spectrum, zero_threshold: f64) -> f64 {
    (0..spec.len())
        .find(|&i| {
            spec.eigenvalues[i] >= zero_threshold
                || boundary_amplitude(&spec.eigenvectors[i]) <= BOUNDARY_AMPLITUDE_TOL
        })
        .map_or(f64::NAN, |i| spec.eigenvalues[i])
}

pub fn classify_breaking(
    pair: &LatticePair,
    plus: &Spectrum,
    minus: &Spectrum,
    zero_threshold: f64,
) -> Result<SusyClassification, SusyError> {
    check_compatible(plus, minus)?;
    if plus.grid != pair.grid {
        return Err(SusyError::GridMismatch);
    }
    let mut zero_modes = Vec::new();
    let mut boundary = Vec::new();
    set_aside(plus, Component::Upper, zero_threshold, &mut zero_modes, &mut boundary);
    set_aside(minus, Component::Lower, zero_threshold, &mut zero_modes, &mut boundary);
    if zero_modes.len() > 1 {
        return Err(SusyError::AmbiguousZeroModes {
            count: zero_modes.len(),
        });
    }
    let zero = zero_modes.first();
    let verdict = if zero.is_some() {
        Verdict::Unbroken
    } else {
        Verdict::Broken
    };
    let normalizability = normalizability_check(&pair.grid, &pair.w_samples);
    let zero_mode = zero.map(|l| l.component);
    let mut classification = SusyClassification {
        verdict,
        ground_energy_plus: first_bulk(plus, zero_threshold),
        ground_energy_minus: first_bulk(minus, zero_threshold),
        zero_mode,
        zero_mode_energy: zero.map(|l| l.energy),
        witten_index: 0,
        zero_threshold,
        boundary_modes: boundary.len(),
        warning: normalizability.predicted != zero_mode,
        normalizability,
    };
    classification.witten_index = witten_index(&classification);
    Ok(classification)
}

/// Zero modes with `(−1)^F = +1` minus those with `(−1)^F = −1`.
pub fn witten_index(classification: &SusyClassification) -> i32 {
    classification
        .zero_mode
        .map_or(0, |c| i32::from(component_fermion_number(c)))
}

/// Plain matrix application; the output is not renormalized.
pub fn apply_charge(
    state: &TwoComponentState,
    charge: &SpinBlockOperator,
) -> Result<TwoComponentState, SusyError> {
    Ok(charge.apply(state)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraReport {
    /// Largest entry of `Q²`.
    pub q_squared_norm: f64,
    pub qdag_squared_norm: f64,
    /// `max ‖({Q,Q†} − H) v‖ / ‖v‖` over the probe vectors.
    pub anticommutator_residual: f64,
    /// The same residual divided by `‖H‖∞`.
    pub anticommutator_relative: f64,
    pub hamiltonian_norm: f64,
    pub probes: usize,
}

pub fn check_susy_algebra(
    pair: &LatticePair,
    q: &SpinBlockOperator,
    q_dag: &SpinBlockOperator,
    plus: &Spectrum,
    minus: &Spectrum,
) -> Result<AlgebraReport, SusyError> {
    let q_squared_norm = q.matmul(q)?.max_abs();
    let qdag_squared_norm = q_dag.matmul(q_dag)?.max_abs();
    let hamiltonian = pair.hamiltonian();
    let defect = q.anticommutator(q_dag)?.sub(&hamiltonian)?;
    let basis = pair.basis();

    let mut residual: f64 = 0.0;
    let mut probes = 0;
    for (spec, component) in [(plus, Component::Upper), (minus, Component::Lower)] {
        for v in spec.eigenvectors.iter().take(ALGEBRA_PROBES) {
            let s = TwoComponentState::in_component(basis.clone(), component, v)
                .map_err(|_| SusyError::GridMismatch)?;
            let out = defect.apply(&s)?;
            residual = residual.max(out.norm() / s.norm());
            probes += 1;
        }
    }
    let hamiltonian_norm = hamiltonian.inf_norm();
    Ok(AlgebraReport {
        q_squared_norm,
        qdag_squared_norm,
        anticommutator_residual: residual,
        anticommutator_relative: residual / hamiltonian_norm,
        hamiltonian_norm,
        probes,
    })
}

/// `(‖Q s‖², ⟨s, Q†Q s⟩)`; the two agree when `Q†` is the adjoint of `Q`.
pub fn charge_adjointness(
    q: &SpinBlockOperator,
    q_dag: &SpinBlockOperator,
    s: &TwoComponentState,
) -> Result<(f64, Complex64), SusyError> {
    let qs = q.apply(s)?;
    let qdqs = q_dag.apply(&qs)?;
    let lhs = qs.norm_sq();
    let rhs = s.inner(&qdqs).map_err(|_| SusyError::GridMismatch)?;
    Ok((lhs, rhs))
}
