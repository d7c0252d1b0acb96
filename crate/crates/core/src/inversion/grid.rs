//! Exhaustive grid search over the phase torus, polished by a
//! derivative-free pattern search. Slow but independent of the main
//! solver, so it serves as a cross-check.

use std::f64::consts::PI;

use crate::interferometers::{CoincidenceRates, PhaseConfig, RateTerms};

use super::{
    collect_candidates, grid_axis, rate_residual, CalibrationRecord, Candidate, InversionError,
    PhaseSolution, DEFAULT_RESIDUAL_TOLERANCE,
};

/// Local minima of the grid that get polished.
const POLISHED_MINIMA: usize = 256;
/// Pattern search stops once its step falls below this (radians).
const PATTERN_RESOLUTION: f64 = 1e-12;
/// Upper bound on pattern-search iterations per start.
const PATTERN_MOVES: usize = 20_000;
/// The pattern search reaches about this relative residual.
const GRID_RESIDUAL_FLOOR: f64 = 1e-9;
/// Polished fits closer than this (radians) are the same point.
const GRID_SEPARATION: f64 = 1e-5;

/// Searches `(-pi, pi]^3` with spacing close to `grid_step` at the
/// calibrated scale, then refines every promising local minimum.
pub fn brute_force_invert(
    rates: &CoincidenceRates,
    calibration: &CalibrationRecord,
    grid_step: f64,
) -> Result<PhaseSolution, InversionError> {
    if !rates.is_valid() {
        return Err(InversionError::InvalidRates);
    }
    let r0 = calibration.r0;
    let n = ((2.0 * PI / grid_step).ceil() as usize).max(4);
    let h = 2.0 * PI / n as f64;
    let axis0 = grid_axis(n, 0.5);
    // off the symmetry lines phi1 = +-phi2, as in the solver's screen
    let axis1 = grid_axis(n, 0.31);
    let axis2 = grid_axis(n, 0.73);
    let measured = rates.as_array();

    // theta = 2 phi0 + phi1 - phi2, so tabulate cos over phi0 and rotate.
    let trig0: Vec<(f64, f64)> = axis0.iter().map(|p| (2.0 * p).sin_cos()).collect();
    let index = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut cost = vec![0.0; n * n * n];
    for (j, &p1) in axis1.iter().enumerate() {
        for (k, &p2) in axis2.iter().enumerate() {
            let terms = RateTerms::new(p1, p2);
            let (sd, cd) = (p1 - p2).sin_cos();
            for (i, &(s0, c0)) in trig0.iter().enumerate() {
                let cos_theta = c0 * cd - s0 * sd;
                let model = terms.rates(cos_theta, r0);
                cost[index(i, j, k)] = model
                    .iter()
                    .zip(measured)
                    .map(|(m, r)| (m - r).powi(2))
                    .sum();
            }
        }
    }

    let wrap = |a: usize, d: isize| ((a as isize + d).rem_euclid(n as isize)) as usize;
    let mut minima: Vec<(f64, [usize; 3])> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = cost[index(i, j, k)];
                let is_min = [-1isize, 1].iter().all(|&d| {
                    c <= cost[index(wrap(i, d), j, k)]
                        && c <= cost[index(i, wrap(j, d), k)]
                        && c <= cost[index(i, j, wrap(k, d))]
                });
                if is_min {
                    minima.push((c, [i, j, k]));
                }
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.truncate(POLISHED_MINIMA);

    let fits: Vec<Candidate> = minima
        .iter()
        .map(|(_, [i, j, k])| {
            let start = [axis0[*i], axis1[*j], axis2[*k]];
            let phases = pattern_search(rates, r0, start, h / 2.0);
            Candidate {
                phases,
                r0,
                residual: rate_residual(rates, &phases, r0),
            }
        })
        .collect();
    let scale = 16.0 * r0;
    let candidates = collect_candidates(fits, GRID_RESIDUAL_FLOOR * scale, GRID_SEPARATION);
    let converged = candidates[0].residual <= DEFAULT_RESIDUAL_TOLERANCE * scale;
    let solution =
        PhaseSolution::from_candidates(candidates, &calibration.branch_reference, converged);
    if converged {
        Ok(solution)
    } else {
        Err(InversionError::NoSolution(Box::new(solution)))
    }
}

/// Pattern search on the residual, polling the 26 neighbours of a cubic
/// lattice so that diagonal valleys can be followed. The step doubles after
/// a successful move and halves otherwise.
fn pattern_search(rates: &CoincidenceRates, r0: f64, start: [f64; 3], initial_step: f64) -> PhaseConfig {
    let f = |x: &[f64; 3]| rate_residual(rates, &PhaseConfig::from_array(*x), r0);
    let directions: Vec<[f64; 3]> = (0..27)
        .filter(|&k| k != 13)
        .map(|k| {
            let d = [(k / 9) as f64 - 1.0, ((k / 3) % 3) as f64 - 1.0, (k % 3) as f64 - 1.0];
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            d.map(|v| v / norm)
        })
        .collect();
    let mut x = start;
    let mut fx = f(&x);
    let mut step = initial_step;
    let mut moves = 0;
    while step > PATTERN_RESOLUTION && moves < PATTERN_MOVES {
        moves += 1;
        let best = directions
            .iter()
            .map(|d| {
                let trial: [f64; 3] = std::array::from_fn(|i| x[i] + step * d[i]);
                (f(&trial), trial)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("directions are not empty");
        if best.0 < fx {
            (fx, x) = best;
            step = (2.0 * step).min(initial_step);
        } else {
            step /= 2.0;
        }
    }
    PhaseConfig::from_array(x)
}
