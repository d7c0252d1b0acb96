//! Optical elements expressed as [`ModeMap`]s.
//!
//! Circulators are not represented here: they route by propagation
//! direction and leave mode amplitudes untouched, so the interferometer
//! topologies handle them as bookkeeping.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::fock::ModeMap;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElementError {
    #[error("mode {mode} out of range for {mode_count} modes")]
    ModeOutOfRange { mode: usize, mode_count: usize },
    #[error("mode {0} appears more than once")]
    RepeatedMode(usize),
    #[error("{kind} acts on {expected} modes, got {found}")]
    WrongModeCount {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    /// Directionally-unbiased four-port.
    Grover4,
    /// One phase (radians) per acted mode.
    Phase(Vec<f64>),
    /// Symmetric 50:50 splitter, `(1/sqrt2) [[1, i], [i, 1]]`.
    BeamSplitter50,
    Identity,
}

impl ElementKind {
    fn name(&self) -> &'static str {
        match self {
            ElementKind::Grover4 => "grover4",
            ElementKind::Phase(_) => "phase",
            ElementKind::BeamSplitter50 => "beamsplitter50",
            ElementKind::Identity => "identity",
        }
    }
}

/// An element placed on specific modes of a larger system.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementSpec {
    pub kind: ElementKind,
    pub acted_modes: Vec<usize>,
}

impl ElementSpec {
    pub fn new(kind: ElementKind, acted_modes: Vec<usize>) -> Self {
        Self { kind, acted_modes }
    }

    /// Embeds the element's block into an identity over `mode_count` modes.
    pub fn to_mode_map(&self, mode_count: usize) -> Result<ModeMap, ElementError> {
        validate_modes(&self.acted_modes, mode_count)?;
        let expected = match &self.kind {
            ElementKind::Grover4 => Some(4),
            ElementKind::BeamSplitter50 => Some(2),
            ElementKind::Phase(shifts) => Some(shifts.len()),
            ElementKind::Identity => None,
        };
        if let Some(expected) = expected {
            if self.acted_modes.len() != expected {
                return Err(ElementError::WrongModeCount {
                    kind: self.kind.name(),
                    expected,
                    found: self.acted_modes.len(),
                });
            }
        }
        let block = match &self.kind {
            ElementKind::Grover4 => grover_matrix(),
            ElementKind::BeamSplitter50 => beamsplitter_matrix(),
            ElementKind::Phase(shifts) => phase_matrix(shifts),
            ElementKind::Identity => return Ok(ModeMap::identity(mode_count)),
        };
        Ok(unitary_map(embed(&block, &self.acted_modes, mode_count)))
    }
}

fn validate_modes(modes: &[usize], mode_count: usize) -> Result<(), ElementError> {
    for (i, &mode) in modes.iter().enumerate() {
        if mode >= mode_count {
            return Err(ElementError::ModeOutOfRange { mode, mode_count });
        }
        if modes[..i].contains(&mode) {
            return Err(ElementError::RepeatedMode(mode));
        }
    }
    Ok(())
}

fn embed(block: &DMatrix<Complex64>, modes: &[usize], mode_count: usize) -> DMatrix<Complex64> {
    let mut full = DMatrix::identity(mode_count, mode_count);
    for (bi, &i) in modes.iter().enumerate() {
        for (bj, &j) in modes.iter().enumerate() {
            full[(i, j)] = block[(bi, bj)];
        }
    }
    full
}

fn unitary_map(matrix: DMatrix<Complex64>) -> ModeMap {
    ModeMap::new(matrix).expect("element constructors produce square matrices")
}

fn grover_matrix() -> DMatrix<Complex64> {
    DMatrix::from_fn(4, 4, |i, j| {
        Complex64::new(if i == j { -0.5 } else { 0.5 }, 0.0)
    })
}

fn beamsplitter_matrix() -> DMatrix<Complex64> {
    let t = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let r = Complex64::new(0.0, FRAC_1_SQRT_2);
    DMatrix::from_row_slice(2, 2, &[t, r, r, t])
}

fn phase_matrix(shifts: &[f64]) -> DMatrix<Complex64> {
    let n = shifts.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, shifts[i])
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// The 4x4 Grover coin: `-1/2` on the diagonal, `+1/2` elsewhere.
pub fn grover_unitary() -> ModeMap {
    unitary_map(grover_matrix())
}

/// Diagonal map `diag(e^{i shift_k})`; the mode count is `shifts.len()`.
pub fn phase_map(shifts: &[f64]) -> ModeMap {
    unitary_map(phase_matrix(shifts))
}

/// 50:50 beam splitter on `modes`, identity on every other mode.
pub fn beamsplitter50(mode_count: usize, modes: (usize, usize)) -> Result<ModeMap, ElementError> {
    ElementSpec::new(ElementKind::BeamSplitter50, vec![modes.0, modes.1]).to_mode_map(mode_count)
}
