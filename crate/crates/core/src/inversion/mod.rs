//! Phase retrieval for the Grover–Mach–Zehnder interferometer: recover
//! `(phi0, phi1, phi2)` and optionally the scale `r0` from the four measured
//! coincidence rates.
//!
//! The rate equations depend on `phi0` only through `theta = 2 phi0 + phi1
//! - phi2`, and are even in `theta` and symmetric under `phi1 <-> phi2`.
//! A noiseless rate vector is therefore reproduced by a whole family of
//! phase triples, generated by
//!
//! * `phi0 -> phi0 + pi`,
//! * `(phi1, phi2) -> (-phi1, -phi2)` at fixed `theta`,
//! * `theta -> -theta`,
//! * `phi1 <-> phi2` at fixed `theta`.
//!
//! Every solver here reports all fits it finds together with flags that
//! mark which signs (and whether the `phi1`/`phi2` assignment) the data
//! cannot settle. The primary answer is the fit closest to the calibration
//! branch reference.

mod grid;
mod lm;

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use thiserror::Error;

use crate::interferometers::{wrap_angle, CoincidenceRates, PhaseConfig, RateTerms};

pub use grid::brute_force_invert;

use lm::{LeastSquares, LmSettings, Params};

/// Accepted RMS rate mismatch, relative to the rate scale `16 r0`.
pub const DEFAULT_RESIDUAL_TOLERANCE: f64 = 1e-6;
/// Fits within this factor of the best residual count as equally good.
pub const AMBIGUITY_FACTOR: f64 = 10.0;
/// Relative calibration tolerance: off-pattern rates must stay below this
/// fraction of `R_AB`.
pub const DEFAULT_CALIBRATION_TOLERANCE: f64 = 1e-6;
/// Grid points per axis of the starting-point screen.
pub const DEFAULT_LATTICE: usize = 48;

/// Residuals below `RESIDUAL_FLOOR * 16 r0` are treated as exact.
const RESIDUAL_FLOOR: f64 = 1e-10;
/// Fits closer than this (radians) are the same solution.
const SAME_SOLUTION: f64 = 1e-6;
/// Angles within this of 0 or pi carry no sign.
const SIGNLESS: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InversionError {
    #[error("rates must be finite and non-negative")]
    InvalidRates,
    #[error("zero-phase rates deviate from (0, 0, 16 r0, 0): {0}")]
    InconsistentCalibration(String),
    #[error("a calibration (known r0) is required when r0 is not solved for")]
    MissingCalibration,
    #[error("{0} is undefined for these rates")]
    Degenerate(&'static str),
    #[error("special-case relations do not hold (phi1 != phi2?): {0}")]
    NotSpecialCase(String),
    #[error("no solution within tolerance; best residual {}", .0.residual)]
    NoSolution(Box<PhaseSolution>),
}

/// Result of measuring the rates with no phases applied.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRecord {
    pub r0: f64,
    pub zero_phase_rates: CoincidenceRates,
    /// Point the calibrated solution surface passes through; solutions are
    /// chosen on the branch nearest to it.
    pub branch_reference: PhaseConfig,
}

impl CalibrationRecord {
    /// Calibration from an independently known source scale.
    pub fn from_r0(r0: f64) -> Self {
        Self {
            r0,
            zero_phase_rates: CoincidenceRates::new(0.0, 0.0, 16.0 * r0, 0.0),
            branch_reference: PhaseConfig::zero(),
        }
    }
}

pub fn calibrate(zero_phase_rates: &CoincidenceRates) -> Result<CalibrationRecord, InversionError> {
    calibrate_with_tolerance(zero_phase_rates, DEFAULT_CALIBRATION_TOLERANCE)
}

/// `r0 = R_AB / 16`; `R_AC`, `R_AD` and `R_CD` must not exceed
/// `tolerance * R_AB`.
pub fn calibrate_with_tolerance(
    zero_phase_rates: &CoincidenceRates,
    tolerance: f64,
) -> Result<CalibrationRecord, InversionError> {
    if !zero_phase_rates.is_valid() {
        return Err(InversionError::InvalidRates);
    }
    let r_ab = zero_phase_rates.r_ab;
    if r_ab <= 0.0 {
        return Err(InversionError::InconsistentCalibration(
            "R_AB must be positive".into(),
        ));
    }
    let limit = tolerance * r_ab;
    for (name, rate) in [
        ("R_AC", zero_phase_rates.r_ac),
        ("R_AD", zero_phase_rates.r_ad),
        ("R_CD", zero_phase_rates.r_cd),
    ] {
        if rate > limit {
            return Err(InversionError::InconsistentCalibration(format!(
                "{name} = {rate} exceeds {limit}"
            )));
        }
    }
    Ok(CalibrationRecord {
        r0: r_ab / 16.0,
        zero_phase_rates: *zero_phase_rates,
        branch_reference: PhaseConfig::zero(),
    })
}

/// One phase triple (and scale) that reproduces the measured rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub phases: PhaseConfig,
    pub r0: f64,
    /// Root-mean-square rate mismatch.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSolution {
    pub phases: PhaseConfig,
    pub r0: f64,
    pub residual: f64,
    /// Per phase: some equally good fit has the opposite sign.
    pub sign_ambiguous: [bool; 3],
    /// Some equally good fit swaps the magnitudes of `phi1` and `phi2`.
    pub exchange_ambiguous: bool,
    /// The sign of `2 phi0 + phi1 - phi2` is undetermined, so each
    /// `(phi1, phi2)` admits two values of `phi0` (modulo pi).
    pub theta_ambiguous: bool,
    pub converged: bool,
    /// Every distinct fit within [`AMBIGUITY_FACTOR`] of the best, the
    /// primary one included.
    pub candidates: Vec<Candidate>,
}

impl PhaseSolution {
    fn from_candidates(
        mut candidates: Vec<Candidate>,
        reference: &PhaseConfig,
        converged: bool,
    ) -> Self {
        candidates.sort_by(|a, b| {
            branch_distance(&a.phases, reference)
                .total_cmp(&branch_distance(&b.phases, reference))
                .then(a.phases.as_array().partial_cmp(&b.phases.as_array()).unwrap())
        });
        let primary = candidates[nearest_index(&candidates, reference)];
        let mut out = Self {
            phases: primary.phases,
            r0: primary.r0,
            residual: primary.residual,
            sign_ambiguous: [false; 3],
            exchange_ambiguous: false,
            theta_ambiguous: false,
            converged,
            candidates,
        };
        out.update_flags();
        out
    }

    fn update_flags(&mut self) {
        let p = self.phases.as_array();
        self.sign_ambiguous = std::array::from_fn(|i| {
            has_sign(p[i])
                && self
                    .candidates
                    .iter()
                    .any(|c| has_sign(c.phases.as_array()[i]) && c.phases.as_array()[i].signum() != p[i].signum())
        });
        let (m1, m2) = (p[1].abs(), p[2].abs());
        self.exchange_ambiguous = (m1 - m2).abs() > SAME_SOLUTION
            && self.candidates.iter().any(|c| {
                (c.phases.phi1.abs() - m2).abs() < SAME_SOLUTION
                    && (c.phases.phi2.abs() - m1).abs() < SAME_SOLUTION
            });
        let phases = self.phases;
        self.theta_ambiguous = self.candidates.iter().any(|c| {
            (c.phases.phi1 - phases.phi1).abs() < SAME_SOLUTION
                && (c.phases.phi2 - phases.phi2).abs() < SAME_SOLUTION
                && wrap_angle(2.0 * (c.phases.phi0 - phases.phi0)).abs() > SAME_SOLUTION
        });
    }

    /// Whether `phases` is among the reported fits.
    pub fn contains(&self, phases: &PhaseConfig, tolerance: f64) -> bool {
        self.candidates
            .iter()
            .any(|c| c.phases.circular_distance(phases) <= tolerance)
    }

    /// Whether some reported fit matches `phases` in every magnitude.
    pub fn contains_magnitudes(&self, phases: &PhaseConfig, tolerance: f64) -> bool {
        let target = phases.as_array().map(f64::abs);
        self.candidates.iter().any(|c| {
            c.phases
                .as_array()
                .iter()
                .zip(target)
                .all(|(a, b)| (a.abs() - b).abs() <= tolerance)
        })
    }

    /// Makes the fit nearest to `target` the primary answer.
    pub fn select_nearest(mut self, target: &PhaseConfig) -> Self {
        let best = nearest_index(&self.candidates, target);
        let chosen = self.candidates[best];
        self.phases = chosen.phases;
        self.r0 = chosen.r0;
        self.residual = chosen.residual;
        self.update_flags();
        self
    }
}

/// Index of the candidate nearest to `target`. Exact ties (the symmetry
/// images can be equidistant) go to `|phi1| <= |phi2|`, then to
/// non-negative `phi1`, then to non-negative `phi2`.
fn nearest_index(candidates: &[Candidate], target: &PhaseConfig) -> usize {
    let distances: Vec<f64> = candidates
        .iter()
        .map(|c| branch_distance(&c.phases, target))
        .collect();
    let best = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let tie = best + SAME_SOLUTION * SAME_SOLUTION * (1.0 + best);
    let rank = |c: &Candidate| {
        let p = c.phases;
        (
            p.phi1.abs() > p.phi2.abs() + SAME_SOLUTION,
            p.phi1 < -SIGNLESS,
            p.phi2 < -SIGNLESS,
        )
    };
    (0..candidates.len())
        .filter(|&i| distances[i] <= tie)
        .min_by_key(|&i| rank(&candidates[i]))
        .expect("at least one candidate")
}

fn has_sign(angle: f64) -> bool {
    angle.abs() > SIGNLESS && angle.abs() < PI - SIGNLESS
}

/// Squared distance on the 3-torus.
fn branch_distance(a: &PhaseConfig, b: &PhaseConfig) -> f64 {
    a.as_array()
        .iter()
        .zip(b.as_array())
        .map(|(x, y)| wrap_angle(x - y).powi(2))
        .sum()
}

/// All phase triples related to `phases` by the symmetries of the rate
/// equations (up to 16 distinct points).
pub fn equivalent_phases(phases: &PhaseConfig) -> Vec<PhaseConfig> {
    let mut out: Vec<PhaseConfig> = Vec::with_capacity(16);
    let theta = phases.branch_phase();
    for swap in [false, true] {
        let (a, b) = if swap {
            (phases.phi2, phases.phi1)
        } else {
            (phases.phi1, phases.phi2)
        };
        for flip in [1.0, -1.0] {
            let (p1, p2) = (flip * a, flip * b);
            for t in [theta, -theta] {
                let phi0 = (t - p1 + p2) / 2.0;
                for shift in [0.0, PI] {
                    let candidate = PhaseConfig::new(phi0 + shift, p1, p2);
                    if !out
                        .iter()
                        .any(|c| c.circular_distance(&candidate) < SAME_SOLUTION)
                    {
                        out.push(candidate);
                    }
                }
            }
        }
    }
    out
}

/// Rates at unit scale and their phase derivatives, columns
/// `[phi0, phi1, phi2]`.
pub(crate) fn unit_rates_and_derivatives(phases: [f64; 3]) -> ([f64; 4], [[f64; 3]; 4]) {
    let [phi0, phi1, phi2] = phases;
    let (s1, c1) = phi1.sin_cos();
    let (s2, c2) = phi2.sin_cos();
    let (st, ct) = (2.0 * phi0 + phi1 - phi2).sin_cos();
    let terms = RateTerms::new(phi1, phi2);
    let rates = terms.rates(ct, 1.0);
    // (dP/dphi1, dQ/dphi1, dP/dphi2, dQ/dphi2) per rate AC, AD, AB, CD
    let partials = [
        (2.0 * s1 * c1, -2.0 * c1 * s2, 2.0 * s2 * c2, -2.0 * s1 * c2),
        (2.0 * s1 * c1, 2.0 * c1 * s2, 2.0 * s2 * c2, 2.0 * s1 * c2),
        (
            -2.0 * (c1 + 1.0) * s1,
            -2.0 * s1 * (c2 + 1.0),
            -2.0 * (c2 + 1.0) * s2,
            -2.0 * (c1 + 1.0) * s2,
        ),
        (
            -2.0 * (c1 - 1.0) * s1,
            -2.0 * s1 * (c2 - 1.0),
            -2.0 * (c2 - 1.0) * s2,
            -2.0 * (c1 - 1.0) * s2,
        ),
    ];
    let jac = std::array::from_fn(|k| {
        let q = terms.q[k];
        let (p1, q1, p2, q2) = partials[k];
        [-2.0 * q * st, p1 + q1 * ct - q * st, p2 + q2 * ct + q * st]
    });
    (rates, jac)
}

/// Root-mean-square mismatch between measured rates and the model.
pub fn rate_residual(rates: &CoincidenceRates, phases: &PhaseConfig, r0: f64) -> f64 {
    let model = crate::interferometers::grover_mz_rates(phases, r0).as_array();
    let sum: f64 = model
        .iter()
        .zip(rates.as_array())
        .map(|(m, r)| (m - r).powi(2))
        .sum();
    (sum / 4.0).sqrt()
}

struct RateFit {
    measured: [f64; 4],
    fixed_r0: Option<f64>,
}

impl RateFit {
    fn r0(&self, x: &Params) -> f64 {
        self.fixed_r0.unwrap_or(x[3])
    }

    /// Best `(r0, cos theta)` for fixed `(phi1, phi2)`, and the squared
    /// mismatch it leaves. The rates are linear in `r0` and in
    /// `r0 cos theta`, so this is a small constrained linear fit.
    fn profile(&self, terms: &RateTerms) -> (f64, f64, f64) {
        let m = self.measured;
        let dot = |a: &[f64; 4], b: &[f64; 4]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let (p, q) = (&terms.p, &terms.q);
        let (pp, pq, qq, pm, qm) = (dot(p, p), dot(p, q), dot(q, q), dot(p, &m), dot(q, &m));
        let fit_cos = |r0: f64| {
            if qq > 0.0 && r0 > 0.0 {
                ((qm - r0 * pq) / (r0 * qq)).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        };
        let (r0, c) = match self.fixed_r0 {
            Some(r0) => (r0, fit_cos(r0)),
            None => {
                let det = pp * qq - pq * pq;
                let (a, b) = if det > 1e-12 * pp * qq {
                    ((qq * pm - pq * qm) / det, (pp * qm - pq * pm) / det)
                } else {
                    (pm / pp, 0.0)
                };
                if a > 0.0 && (b / a).abs() <= 1.0 {
                    (a, b / a)
                } else {
                    let c = if a > 0.0 { (b / a).signum() } else { 0.0 };
                    let basis: [f64; 4] = std::array::from_fn(|k| p[k] + c * q[k]);
                    ((dot(&basis, &m) / dot(&basis, &basis)).max(0.0), c)
                }
            }
        };
        let model = terms.rates(c, r0);
        let cost = model.iter().zip(m).map(|(x, y)| (x - y).powi(2)).sum();
        (cost, r0, c)
    }
}

/// Fractional grid offsets per axis. The lines `phi1 = +-phi2` are
/// invariant under the rate symmetries, and a Gauss–Newton step started on
/// them never leaves them, so no grid point may lie there.
const SCREEN_OFFSETS: [f64; 2] = [0.31, 0.73];

/// `n` points spaced `2 pi / n` across `(-pi, pi]`, shifted by `offset`
/// of a spacing.
pub(crate) fn grid_axis(n: usize, offset: f64) -> Vec<f64> {
    let step = 2.0 * PI / n as f64;
    (0..n).map(|k| -PI + (k as f64 + offset) * step).collect()
}

/// Starting points for the local solver: the best local minima of the
/// mismatch over an `n x n` grid in `(phi1, phi2)`, with `theta` and `r0`
/// fitted exactly at each grid point.
fn screen(fit: &RateFit, n: usize, keep: usize) -> Vec<Params> {
    let axis1 = grid_axis(n, SCREEN_OFFSETS[0]);
    let axis2 = grid_axis(n, SCREEN_OFFSETS[1]);
    let profiles: Vec<(f64, f64, f64)> = axis1
        .iter()
        .flat_map(|&a| axis2.iter().map(move |&b| (a, b)))
        .map(|(a, b)| fit.profile(&RateTerms::new(a, b)))
        .collect();
    let at = |i: usize, j: usize| profiles[(i % n) * n + (j % n)].0;
    let mut minima: Vec<(f64, Params)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let cost = at(i, j);
            let is_min = [(n - 1, 0), (1, 0), (0, n - 1), (0, 1), (1, 1), (n - 1, n - 1), (1, n - 1), (n - 1, 1)]
                .iter()
                .all(|&(di, dj)| cost <= at(i + di, j + dj));
            if is_min {
                let (_, r0, c) = profiles[i * n + j];
                let (phi1, phi2) = (axis1[i], axis2[j]);
                let phi0 = (c.acos() - phi1 + phi2) / 2.0;
                minima.push((cost, Vector4::new(phi0, phi1, phi2, r0)));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.truncate(keep);
    minima.into_iter().map(|(_, x)| x).collect()
}

impl LeastSquares for RateFit {
    fn evaluate(&self, x: &Params) -> (Vector4<f64>, Matrix4<f64>) {
        let r0 = self.r0(x);
        let (unit, d) = unit_rates_and_derivatives([x[0], x[1], x[2]]);
        let mut r = Vector4::zeros();
        let mut j = Matrix4::zeros();
        for k in 0..4 {
            r[k] = r0 * unit[k] - self.measured[k];
            for c in 0..3 {
                j[(k, c)] = r0 * d[k][c];
            }
            if self.fixed_r0.is_none() {
                j[(k, 3)] = unit[k];
            }
        }
        (r, j)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionOptions {
    pub solve_r0: bool,
    /// See [`DEFAULT_RESIDUAL_TOLERANCE`].
    pub residual_tolerance: f64,
    /// Grid points per axis of the `(phi1, phi2)` screen.
    pub lattice: usize,
    /// Screen minima that seed a local solve, best-first.
    pub refined_starts: usize,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            solve_r0: false,
            residual_tolerance: DEFAULT_RESIDUAL_TOLERANCE,
            lattice: DEFAULT_LATTICE,
            refined_starts: 16,
        }
    }
}

/// Recovers the phases from measured rates. With `solve_r0 == false` the
/// scale comes from `calibration`, which is then required.
pub fn invert_rates(
    rates: &CoincidenceRates,
    calibration: Option<&CalibrationRecord>,
    solve_r0: bool,
) -> Result<PhaseSolution, InversionError> {
    let options = InversionOptions {
        solve_r0,
        ..InversionOptions::default()
    };
    invert_rates_with(rates, calibration, &options)
}

pub fn invert_rates_with(
    rates: &CoincidenceRates,
    calibration: Option<&CalibrationRecord>,
    options: &InversionOptions,
) -> Result<PhaseSolution, InversionError> {
    if !rates.is_valid() {
        return Err(InversionError::InvalidRates);
    }
    let fixed_r0 = if options.solve_r0 {
        if rates.as_array().iter().all(|&r| r == 0.0) {
            return Err(InversionError::Degenerate("r0"));
        }
        None
    } else {
        Some(calibration.ok_or(InversionError::MissingCalibration)?.r0)
    };
    let reference = calibration
        .map(|c| c.branch_reference)
        .unwrap_or_else(PhaseConfig::zero);
    let fit = RateFit {
        measured: rates.as_array(),
        fixed_r0,
    };

    let starts = screen(&fit, options.lattice.max(4), options.refined_starts.max(1));
    let settings = LmSettings::default();
    let mut fits: Vec<Candidate> = starts
        .iter()
        .map(|x0| {
            let out = lm::minimize(&fit, *x0, &settings);
            let r0 = fit.r0(&out.x);
            Candidate {
                phases: PhaseConfig::new(out.x[0], out.x[1], out.x[2]),
                r0,
                residual: (out.cost / 2.0).sqrt(),
            }
        })
        .collect();
    fits.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let best = fits[0];
    let scale = 16.0 * best.r0.abs();

    // Symmetry images of a good fit are equally good. With a free scale
    // there can be several such fits with different r0.
    let limit = AMBIGUITY_FACTOR * best.residual.max(RESIDUAL_FLOOR * scale);
    let seeds: Vec<Candidate> = fits.iter().copied().filter(|f| f.residual <= limit).collect();
    for seed in seeds {
        for phases in equivalent_phases(&seed.phases) {
            fits.push(Candidate {
                phases,
                r0: seed.r0,
                residual: rate_residual(rates, &phases, seed.r0),
            });
        }
    }

    let candidates = collect_candidates(fits, RESIDUAL_FLOOR * scale, SAME_SOLUTION);
    let converged = candidates[0].residual <= options.residual_tolerance * scale;
    let solution = PhaseSolution::from_candidates(candidates, &reference, converged);
    if solution.converged {
        Ok(solution)
    } else {
        Err(InversionError::NoSolution(Box::new(solution)))
    }
}

/// Keeps distinct fits within [`AMBIGUITY_FACTOR`] of the best one, or of
/// `floor` if the best is below it. Fits closer than `separation` merge.
pub(crate) fn collect_candidates(
    mut fits: Vec<Candidate>,
    floor: f64,
    separation: f64,
) -> Vec<Candidate> {
    fits.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let limit = AMBIGUITY_FACTOR * fits[0].residual.max(floor);
    let mut kept: Vec<Candidate> = Vec::new();
    for c in fits {
        if c.residual > limit {
            break;
        }
        let duplicate = kept.iter().any(|k| {
            k.phases.circular_distance(&c.phases) < separation
                && (k.r0 - c.r0).abs() <= separation * k.r0.abs().max(1.0)
        });
        if !duplicate {
            kept.push(c);
        }
    }
    kept
}

/// Inverts a time-ordered series, following the solution branch that
/// starts at `start` (the calibration reference when `None`). Each step
/// picks the fit nearest to a linear extrapolation of the previous two.
pub fn track_sequence(
    sequence: &[CoincidenceRates],
    calibration: &CalibrationRecord,
    start: Option<PhaseConfig>,
) -> Result<Vec<PhaseSolution>, InversionError> {
    let mut previous = start.unwrap_or(calibration.branch_reference);
    let mut before: Option<PhaseConfig> = None;
    let mut out = Vec::with_capacity(sequence.len());
    for rates in sequence {
        let prediction = match before {
            Some(b) => {
                let p = previous.as_array();
                let q = b.as_array();
                PhaseConfig::from_array(std::array::from_fn(|i| p[i] + wrap_angle(p[i] - q[i])))
            }
            None => previous,
        };
        let solution = invert_rates(rates, Some(calibration), false)?.select_nearest(&prediction);
        before = Some(previous);
        previous = solution.phases;
        out.push(solution);
    }
    Ok(out)
}

/// Closed-form solution for data taken with `phi1 == phi2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecialCaseSolution {
    /// In `[0, pi/2]`.
    pub phi0: f64,
    /// In `[0, pi]`.
    pub phi1: f64,
    /// `(R_AD - R_AC) / (R_AD + R_AC) = cos(2 phi0)`
    pub lambda1: f64,
    /// `(R_AB - R_CD) / (R_AB + R_CD) = 2 cos(phi1) / (1 + cos^2(phi1))`
    pub lambda2: f64,
    /// Both roots of the `lambda2` relation; the first is the physical one.
    pub cos_phi1_roots: [f64; 2],
}

const SPECIAL_CASE_SLACK: f64 = 1e-9;

/// Solves the `phi1 == phi2` case analytically. `cos(phi1)` is the root of
/// `lambda2 c^2 - 2 c + lambda2 = 0` with `|c| <= 1`.
pub fn invert_special_case(rates: &CoincidenceRates) -> Result<SpecialCaseSolution, InversionError> {
    if !rates.is_valid() {
        return Err(InversionError::InvalidRates);
    }
    let sum1 = rates.r_ad + rates.r_ac;
    if sum1 <= 0.0 {
        return Err(InversionError::Degenerate("Lambda1"));
    }
    let sum2 = rates.r_ab + rates.r_cd;
    if sum2 <= 0.0 {
        return Err(InversionError::Degenerate("Lambda2"));
    }
    let lambda1 = (rates.r_ad - rates.r_ac) / sum1;
    let lambda2 = (rates.r_ab - rates.r_cd) / sum2;
    if lambda1.abs() > 1.0 + SPECIAL_CASE_SLACK {
        return Err(InversionError::NotSpecialCase(format!("|Lambda1| = {}", lambda1.abs())));
    }
    if lambda2.abs() > 1.0 + SPECIAL_CASE_SLACK {
        return Err(InversionError::NotSpecialCase(format!("|Lambda2| = {}", lambda2.abs())));
    }
    let root = (1.0 - lambda2 * lambda2).max(0.0).sqrt();
    // (1 - root) / lambda2 rewritten to stay finite as lambda2 -> 0
    let inner = lambda2 / (1.0 + root);
    let outer = if lambda2 == 0.0 {
        f64::INFINITY
    } else {
        (1.0 + root) / lambda2
    };
    let phi0 = lambda1.clamp(-1.0, 1.0).acos() / 2.0;
    let phi1 = inner.clamp(-1.0, 1.0).acos();
    Ok(SpecialCaseSolution {
        phi0,
        phi1,
        lambda1,
        lambda2,
        cos_phi1_roots: [inner, outer],
    })
}
