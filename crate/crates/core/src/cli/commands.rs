//! Subcommand bodies. Each computes its report in full before any file is
//! written.

use std::fmt::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::config::{ObservableSpec, RunConfig, StateSpec};
use super::output::{csv_cell, to_json_string, write_all_atomic};
use super::CliError;
use crate::eigen::{solve_spectrum, Spectrum};
use crate::entangle::{fermion_number_of, schmidt, Component, FermionNumber, TwoComponentState};
use crate::jcmodel::{build_jc_interaction, build_yukawa, jc_superselection_demo, LatticeLadder};
use crate::lattice::spin_matrices::IDENTITY;
use crate::lattice::{
    build_charges, build_momentum, build_partner_hamiltonians, BandMatrix, LatticePair, Parity,
    SpinBlockOperator,
};
use crate::parser::{evaluate_on_grid, parse_superpotential};
use crate::superselect::{commutant_check, parity_operator, physical_state_filter, ObservableSet};
use crate::susy::{
    charge_adjointness, check_susy_algebra, classify_breaking, pair_spectra, PairingReport,
    SusyClassification,
};

/// Random probe states for the adjointness check.
const ADJOINT_PROBES: usize = 100;
const ADJOINT_SEED: u64 = 0x5eed;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn write(cfg: &RunConfig, files: &[(&str, String)]) -> Result<Vec<PathBuf>, CliError> {
    write_all_atomic(&cfg.out, files)
        .map_err(|e| CliError::Io(format!("cannot write to {}: {e}", cfg.out.display())))
}

pub struct Analysis {
    pub pair: LatticePair,
    pub plus: Spectrum,
    pub minus: Spectrum,
    pub pairing: PairingReport,
    pub classification: SusyClassification,
}

pub fn analyze(cfg: &RunConfig) -> Result<Analysis, CliError> {
    let grid = cfg.grid().map_err(|e| CliError::Config(e.0))?;
    let ast = cfg.ast().map_err(|e| CliError::Config(e.0))?;
    let pair = build_partner_hamiltonians(&ast, &grid, cfg.mode).map_err(numerical)?;
    let plus = solve_spectrum(&pair.h_plus, cfg.k)
        .map_err(numerical)?
        .with_mode(cfg.mode);
    let minus = solve_spectrum(&pair.h_minus, cfg.k)
        .map_err(numerical)?
        .with_mode(cfg.mode);
    let pairing = pair_spectra(&plus, &minus, cfg.tol_pair, cfg.tol_zero).map_err(numerical)?;
    let classification = classify_breaking(&pair, &plus, &minus, cfg.tol_zero).map_err(numerical)?;
    Ok(Analysis {
        pair,
        plus,
        minus,
        pairing,
        classification,
    })
}

/// One line of `spectrum.csv`: a matched pair or a lone level, by index
/// into the partner spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub n: usize,
    pub plus: Option<usize>,
    pub minus: Option<usize>,
}

/// Matched pairs and unpaired bulk levels in ascending energy. Boundary
/// modes and levels beyond the common window are left out.
pub fn rows(a: &Analysis) -> Vec<Row> {
    let mut entries: Vec<(f64, Option<usize>, Option<usize>)> = a
        .pairing
        .pairs
        .iter()
        .map(|p| (p.energy(), Some(p.plus_index), Some(p.minus_index)))
        .collect();
    for l in &a.pairing.unpaired {
        match l.component {
            Component::Upper => entries.push((l.energy, Some(l.index), None)),
            Component::Lower => entries.push((l.energy, None, Some(l.index))),
        }
    }
    entries.sort_by(|x, y| x.0.total_cmp(&y.0));
    entries
        .into_iter()
        .enumerate()
        .map(|(n, (_, plus, minus))| Row { n, plus, minus })
        .collect()
}

fn spectrum_csv(a: &Analysis, rows: &[Row]) -> String {
    let mut out = String::from("n,E_minus,E_plus,delta,residual_minus,residual_plus\n");
    for r in rows {
        let em = r.minus.map(|j| a.minus.eigenvalues[j]);
        let ep = r.plus.map(|i| a.plus.eigenvalues[i]);
        let delta = em.zip(ep).map(|(m, p)| (p - m).abs());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            csv_cell(em),
            csv_cell(ep),
            csv_cell(delta),
            csv_cell(r.minus.map(|j| a.minus.residuals[j])),
            csv_cell(r.plus.map(|i| a.plus.residuals[i])),
        );
    }
    out
}

fn spectra_value(a: &Analysis) -> Value {
    json!({
        "plus": {"eigenvalues": a.plus.eigenvalues, "residuals": a.plus.residuals},
        "minus": {"eigenvalues": a.minus.eigenvalues, "residuals": a.minus.residuals},
    })
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let a = analyze(cfg)?;
    let rows = rows(&a);
    let levels: Vec<Value> = rows
        .iter()
        .map(|r| {
            let em = r.minus.map(|j| a.minus.eigenvalues[j]);
            let ep = r.plus.map(|i| a.plus.eigenvalues[i]);
            json!({
                "n": r.n,
                "E_minus": em,
                "E_plus": ep,
                "delta": em.zip(ep).map(|(m, p)| (p - m).abs()),
            })
        })
        .collect();
    let report = json!({
        "config": cfg.summary(),
        "levels": levels,
        "spectra": spectra_value(&a),
        "pairing": to_value(&a.pairing),
        "classification": to_value(&a.classification),
    });
    write(
        cfg,
        &[
            ("spectrum.csv", spectrum_csv(&a, &rows)),
            ("spectrum.json", to_json_string(&report)),
        ],
    )
}

pub fn cmd_pair(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let a = analyze(cfg)?;
    let report = json!({
        "config": cfg.summary(),
        "spectra": spectra_value(&a),
        "pairing": to_value(&a.pairing),
    });
    write(cfg, &[("pairing.json", to_json_string(&report))])
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let a = analyze(cfg)?;
    let report = json!({
        "config": cfg.summary(),
        "classification": to_value(&a.classification),
    });
    write(cfg, &[("classification.json", to_json_string(&report))])
}

fn row(rows: &[Row], n: usize) -> Result<Row, CliError> {
    rows.get(n).copied().ok_or_else(|| {
        CliError::Config(format!(
            "level {n} is not among the {} computed rows; increase k",
            rows.len()
        ))
    })
}

/// The state named by `spec`, built from eigenvectors of row `n`.
pub fn build_state(a: &Analysis, rows: &[Row], spec: &StateSpec) -> Result<TwoComponentState, CliError> {
    let (n, wu, wd) = match *spec {
        StateSpec::Doublet(n) => (n, 0.5, 0.5),
        StateSpec::Sector { fermion_number, n } => {
            // (−1)^F = +1 is the lower component
            if fermion_number > 0 {
                (n, 0.0, 1.0)
            } else {
                (n, 1.0, 0.0)
            }
        }
        StateSpec::Weights { upper, lower, n } => (n, upper / (upper + lower), lower / (upper + lower)),
    };
    let r = row(rows, n)?;
    let dim = a.pair.grid.n();
    let pick = |idx: Option<usize>, spec: &Spectrum, w: f64, side: &str| -> Result<Vec<f64>, CliError> {
        if w == 0.0 {
            return Ok(vec![0.0; dim]);
        }
        let i = idx.ok_or_else(|| CliError::Config(format!("row {n} has no {side} level")))?;
        Ok(spec.eigenvectors[i].iter().map(|x| x * w.sqrt()).collect())
    };
    let up = pick(r.plus, &a.plus, wu, "upper")?;
    let down = pick(r.minus, &a.minus, wd, "lower")?;
    TwoComponentState::from_real(a.pair.basis(), &up, &down).map_err(numerical)
}

fn fermion_value(f: FermionNumber) -> Value {
    match f.value() {
        Some(v) => json!(v),
        None => json!("indefinite"),
    }
}

pub fn cmd_entangle(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let a = analyze(cfg)?;
    let rows = rows(&a);
    let state = build_state(&a, &rows, &cfg.state)?;
    let rep = schmidt(&state);
    let (wu, wd) = state.weights();
    let report = json!({
        "config": cfg.summary(),
        "state": cfg.state.to_string(),
        "weights": [wu, wd],
        "schmidt": rep.schmidt,
        "entropy": rep.entropy,
        "product": rep.schmidt[1] < cfg.tol_product,
        "verdict": if rep.schmidt[1] < cfg.tol_product { "product" } else { "entangled" },
        "fermion_number": fermion_value(fermion_number_of(&state)),
    });
    write(cfg, &[("entangle.json", to_json_string(&report))])
}

fn spin_identity(pair: &LatticePair, spatial: &BandMatrix) -> SpinBlockOperator {
    SpinBlockOperator::spin_tensor(pair.basis(), IDENTITY, spatial, Parity::Even)
        .expect("grid-sized block")
}

pub fn build_observables(cfg: &RunConfig, pair: &LatticePair) -> Result<ObservableSet, CliError> {
    let grid = pair.grid;
    let ladder = || LatticeLadder::new(&grid, cfg.omega).map_err(numerical);
    let mut set = ObservableSet::new();
    for spec in &cfg.observables {
        let op = match spec {
            ObservableSpec::Hamiltonian => pair.hamiltonian(),
            ObservableSpec::Position => {
                spin_identity(pair, &BandMatrix::from_real_diagonal(&grid.points().collect::<Vec<_>>()))
            }
            ObservableSpec::Momentum => spin_identity(pair, &build_momentum(&grid)),
            ObservableSpec::Sigma3 => parity_operator(pair.basis()),
            ObservableSpec::Yukawa(g) => build_yukawa(*g, &ladder()?),
            ObservableSpec::Jc(g) => build_jc_interaction(*g, &ladder()?),
            ObservableSpec::Poly(expr) => {
                let ast = parse_superpotential(expr).map_err(|e| CliError::Config(e.to_string()))?;
                let values = evaluate_on_grid(&ast, &grid).map_err(numerical)?;
                spin_identity(pair, &BandMatrix::from_real_diagonal(&values))
            }
        };
        set.push(spec.label(), op).map_err(numerical)?;
    }
    Ok(set)
}

pub fn cmd_superselect(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let a = analyze(cfg)?;
    let rows = rows(&a);
    let set = build_observables(cfg, &a.pair)?;
    let report = commutant_check(&set).map_err(numerical)?;
    let mut rulings = Vec::new();
    for spec in [
        StateSpec::Doublet(1),
        StateSpec::Sector { fermion_number: 1, n: 1 },
        StateSpec::Sector { fermion_number: -1, n: 1 },
    ] {
        let state = build_state(&a, &rows, &spec)?;
        let ruling = physical_state_filter(&state, &report).map_err(numerical)?;
        rulings.push(json!({
            "state": spec.to_string(),
            "ruling": to_value(&ruling),
            "entropy": schmidt(&state).entropy,
        }));
    }
    let out = json!({
        "config": cfg.summary(),
        "observables": cfg.observables.iter().map(ObservableSpec::label).collect::<Vec<_>>(),
        "report": to_value(&report),
        "rulings": rulings,
    });
    write(cfg, &[("superselect.json", to_json_string(&out))])
}

pub fn cmd_jc_demo(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let demo = jc_superselection_demo(cfg.g, cfg.truncation, cfg.omega).map_err(numerical)?;
    write(cfg, &[("jc_demo.json", to_json_string(&to_value(&demo)))])
}

pub fn cmd_check_algebra(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let a = analyze(cfg)?;
    let (q, q_dag) = build_charges(&a.pair);
    let algebra = check_susy_algebra(&a.pair, &q, &q_dag, &a.plus, &a.minus).map_err(numerical)?;

    let mut rng = ChaCha8Rng::seed_from_u64(ADJOINT_SEED);
    let dim = a.pair.grid.n();
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for _ in 0..ADJOINT_PROBES {
        let mut draw = || -> Vec<Complex64> {
            (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        };
        let (up, down) = (draw(), draw());
        let s = TwoComponentState::unnormalized(a.pair.basis(), up, down).map_err(numerical)?;
        let (lhs, rhs) = charge_adjointness(&q, &q_dag, &s).map_err(numerical)?;
        let dev = (Complex64::new(lhs, 0.0) - rhs).norm();
        max_abs = max_abs.max(dev);
        max_rel = max_rel.max(dev / lhs.max(1.0));
    }
    let report = json!({
        "config": cfg.summary(),
        "algebra": to_value(&algebra),
        "adjointness": {
            "states": ADJOINT_PROBES,
            "seed": ADJOINT_SEED,
            "max_abs_deviation": max_abs,
            "max_rel_deviation": max_rel,
        },
    });
    write(cfg, &[("algebra.json", to_json_string(&report))])
}
