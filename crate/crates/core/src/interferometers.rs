//! The three interferometer topologies: the merged-line tunable HOM setup,
//! the Grover–Mach–Zehnder interferometer and the beam-splitter baseline.
//!
//! Each topology can be evaluated by propagating the two-photon state
//! through its elements. The Grover–Mach–Zehnder setup also has closed-form
//! coincidence rates, [`grover_mz_rates`], which the propagation reproduces
//! up to the global scale `16 r0`.
//!
//! Mode layout of the Grover–Mach–Zehnder interferometer: `0 = a1`,
//! `1 = b1` (upper branch), `2 = a2`, `3 = b2` (lower branch). Photons enter
//! `G1` on `a1` and `b1`; detectors `A, B, C, D` sit on `a1, b1, a2, b2`
//! behind `G2`. Every `G2` output is intercepted by a circulator, so the
//! light makes a single pass.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;

use crate::elements::{beamsplitter50, grover_unitary, phase_map};
use crate::fock::{apply_mode_map, merge_modes, FockState, MergePair, StateVector};

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let y = angle.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Phases of the Grover–Mach–Zehnder interferometer, stored wrapped to
/// `(-pi, pi]`.
///
/// `phi0` shifts the upper branch relative to the lower one, `phi1` is the
/// shift of `a1` relative to `b1` and `phi2` that of `a2` relative to `b2`.
/// The per-line phases are `a1 = phi0 + phi1`, `b1 = phi0`, `a2 = phi2`,
/// `b2 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseConfig {
    pub phi0: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl PhaseConfig {
    pub fn new(phi0: f64, phi1: f64, phi2: f64) -> Self {
        Self {
            phi0: wrap_angle(phi0),
            phi1: wrap_angle(phi1),
            phi2: wrap_angle(phi2),
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.phi0, self.phi1, self.phi2]
    }

    pub fn from_array(phases: [f64; 3]) -> Self {
        Self::new(phases[0], phases[1], phases[2])
    }

    /// Phase of each line in mode order `a1, b1, a2, b2`.
    pub fn line_phases(&self) -> [f64; 4] {
        [self.phi0 + self.phi1, self.phi0, self.phi2, 0.0]
    }

    /// `2 phi0 + phi1 - phi2`, the only combination through which `phi0`
    /// enters the rates.
    pub fn branch_phase(&self) -> f64 {
        2.0 * self.phi0 + self.phi1 - self.phi2
    }

    /// Largest per-component distance on the circle.
    pub fn circular_distance(&self, other: &PhaseConfig) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| wrap_angle(a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for PhaseConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.phi0, self.phi1, self.phi2)
    }
}

/// The four independent pairwise coincidence rates. `R_BD = R_AC` and
/// `R_BC = R_AD` are implied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoincidenceRates {
    pub r_ac: f64,
    pub r_ad: f64,
    pub r_ab: f64,
    pub r_cd: f64,
}

impl CoincidenceRates {
    pub fn new(r_ac: f64, r_ad: f64, r_ab: f64, r_cd: f64) -> Self {
        Self {
            r_ac,
            r_ad,
            r_ab,
            r_cd,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r_ac, self.r_ad, self.r_ab, self.r_cd]
    }

    pub fn from_array(r: [f64; 4]) -> Self {
        Self::new(r[0], r[1], r[2], r[3])
    }

    pub fn is_valid(&self) -> bool {
        self.as_array().iter().all(|r| r.is_finite() && *r >= 0.0)
    }
}

/// Rate `k` (in the order AC, AD, AB, CD) is `r0 * (p + q cos(theta))`
/// where `theta = 2 phi0 + phi1 - phi2` and `p`, `q` depend on `phi1, phi2`
/// only.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RateTerms {
    pub p: [f64; 4],
    pub q: [f64; 4],
}

impl RateTerms {
    pub fn new(phi1: f64, phi2: f64) -> Self {
        let (s1, c1) = phi1.sin_cos();
        let (s2, c2) = phi2.sin_cos();
        let sines = s1 * s1 + s2 * s2;
        Self {
            p: [
                sines,
                sines,
                (c1 + 1.0).powi(2) + (c2 + 1.0).powi(2),
                (c1 - 1.0).powi(2) + (c2 - 1.0).powi(2),
            ],
            q: [
                -2.0 * s1 * s2,
                2.0 * s1 * s2,
                2.0 * (c1 + 1.0) * (c2 + 1.0),
                2.0 * (c1 - 1.0) * (c2 - 1.0),
            ],
        }
    }

    pub fn rates(&self, cos_theta: f64, r0: f64) -> [f64; 4] {
        std::array::from_fn(|k| r0 * (self.p[k] + self.q[k] * cos_theta))
    }
}

/// Closed-form coincidence rates of the Grover–Mach–Zehnder interferometer.
/// `r0` is the source-dependent scale (expected positive); at zero phases the
/// rates are `(0, 0, 16 r0, 0)`.
pub fn grover_mz_rates(phases: &PhaseConfig, r0: f64) -> CoincidenceRates {
    let terms = RateTerms::new(phases.phi1, phases.phi2);
    CoincidenceRates::from_array(terms.rates(phases.branch_phase().cos(), r0))
}

/// Probabilities of two-photon detection events, keyed by the sorted
/// detector labels (`"AC"`, `"BB"`, ...).
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionDistribution {
    outcomes: BTreeMap<String, f64>,
}

impl DetectionDistribution {
    /// Groups the kets of `state` by which detectors fire. `labels[m]` is the
    /// detector watching mode `m`.
    pub fn from_state(state: &StateVector, labels: &[char]) -> Self {
        assert_eq!(state.mode_count(), labels.len(), "one label per mode");
        let mut outcomes = BTreeMap::new();
        for (ket, amp) in state.terms() {
            let mut event: Vec<char> = ket
                .photon_modes()
                .into_iter()
                .map(|m| labels[m])
                .collect();
            event.sort_unstable();
            *outcomes.entry(event.into_iter().collect()).or_insert(0.0) += amp.norm_sqr();
        }
        Self { outcomes }
    }

    fn from_map(outcomes: BTreeMap<String, f64>) -> Self {
        Self { outcomes }
    }

    /// Probability of `event`; label order is irrelevant.
    pub fn probability(&self, event: &str) -> f64 {
        let mut key: Vec<char> = event.chars().collect();
        key.sort_unstable();
        let key: String = key.into_iter().collect();
        self.outcomes.get(&key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.outcomes.values().sum()
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (&str, f64)> {
        self.outcomes.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Converts the Grover–Mach–Zehnder distribution to rates with the
    /// closed-form normalization, `R = 16 r0 p`.
    pub fn to_mz_rates(&self, r0: f64) -> CoincidenceRates {
        let scale = 16.0 * r0;
        CoincidenceRates::new(
            scale * self.probability("AC"),
            scale * self.probability("AD"),
            scale * self.probability("AB"),
            scale * self.probability("CD"),
        )
    }
}

fn pair_input(mode_count: usize, first: usize, second: usize) -> StateVector {
    StateVector::basis(
        FockState::from_photons(mode_count, &[first, second]).expect("modes are in range"),
    )
}

fn propagate(state: &StateVector, map: &crate::fock::ModeMap) -> StateVector {
    apply_mode_map(state, map).expect("fixed topology has consistent dimensions")
}

/// State leaving a Grover four-port fed with one photon on each of ports 1
/// and 2: `(psi_t + psi_r) / sqrt(2)`.
pub fn grover_pair_output() -> StateVector {
    propagate(&pair_input(4, 0, 1), &grover_unitary())
}

/// `psi_t = (a3^† + a4^†)^2 |0> / (2 sqrt2)`, the pair that keeps moving
/// forward through every four-port.
pub fn transmitted_pair() -> StateVector {
    let h = Complex64::new(0.5, 0.0);
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    StateVector::from_terms(
        4,
        [
            (FockState::from_photons(4, &[2, 2]).unwrap(), h),
            (FockState::from_photons(4, &[3, 3]).unwrap(), h),
            (FockState::from_photons(4, &[2, 3]).unwrap(), s),
        ],
    )
    .expect("consistent two-photon terms")
}

/// `psi_r = -(a1^† - a2^†)^2 |0> / (2 sqrt2)`, the pair that is reflected
/// back out of its entry ports.
pub fn reflected_pair() -> StateVector {
    let h = Complex64::new(-0.5, 0.0);
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    StateVector::from_terms(
        4,
        [
            (FockState::from_photons(4, &[0, 0]).unwrap(), h),
            (FockState::from_photons(4, &[1, 1]).unwrap(), h),
            (FockState::from_photons(4, &[0, 1]).unwrap(), s),
        ],
    )
    .expect("consistent two-photon terms")
}

/// Merged-line tunable HOM setup: `|1100>` into a Grover four-port, phase
/// `phi` on each reflected photon (lines 1 and 2), then lines 1+3 merged
/// onto detector `a` and 2+4 onto detector `b`.
///
/// The coincidence probability `p(ab)` is `cos^2 phi`.
pub fn tunable_hom(phi: f64) -> DetectionDistribution {
    let shifted = propagate(&grover_pair_output(), &phase_map(&[phi, phi, 0.0, 0.0]));
    let merged = merge_modes(&shifted, &[MergePair::new(0, 2, 0), MergePair::new(1, 3, 1)])
        .expect("merge pairs are disjoint");
    DetectionDistribution::from_state(&merged.state, &['a', 'b'])
}

/// Detector labels of the Grover–Mach–Zehnder modes `a1, b1, a2, b2`.
pub const MZ_DETECTORS: [char; 4] = ['A', 'B', 'C', 'D'];

/// Two-photon state reaching the detectors of the Grover–Mach–Zehnder
/// interferometer.
pub fn grover_mz_output_state(phases: &PhaseConfig) -> StateVector {
    let grover = grover_unitary();
    let after_g1 = propagate(&pair_input(4, 0, 1), &grover);
    let shifted = propagate(&after_g1, &phase_map(&phases.line_phases()));
    propagate(&shifted, &grover)
}

/// Brute-force evaluation of the Grover–Mach–Zehnder interferometer,
/// including same-detector events.
pub fn simulate_grover_mz(phases: &PhaseConfig) -> DetectionDistribution {
    DetectionDistribution::from_state(&grover_mz_output_state(phases), &MZ_DETECTORS)
}

/// Input for the beam-splitter reference measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaselineInput {
    /// One photon per input port. `indistinguishability` is the squared
    /// overlap of the two photons' temporal modes: 1 at zero delay, 0 for
    /// fully separated photons.
    Pair { indistinguishability: f64 },
    /// A single photon in the first port.
    Single,
}

/// Standard beam-splitter HOM measurement with detectors `c`, `d` on the
/// output ports.
pub fn hom_baseline(input: BaselineInput) -> DetectionDistribution {
    let bs = beamsplitter50(2, (0, 1)).expect("valid pair");
    let labels = ['c', 'd'];
    match input {
        BaselineInput::Single => {
            let state = StateVector::basis(FockState::from_photons(2, &[0]).unwrap());
            DetectionDistribution::from_state(&propagate(&state, &bs), &labels)
        }
        BaselineInput::Pair {
            indistinguishability,
        } => {
            let overlap = indistinguishability.clamp(0.0, 1.0);
            let quantum = DetectionDistribution::from_state(&propagate(&pair_input(2, 0, 1), &bs), &labels);
            // Distinguishable photons scatter independently.
            let m = bs.matrix();
            let mut classical = BTreeMap::new();
            for out0 in 0..2 {
                for out1 in 0..2 {
                    let p = m[(out0, 0)].norm_sqr() * m[(out1, 1)].norm_sqr();
                    let mut event = [labels[out0], labels[out1]];
                    event.sort_unstable();
                    *classical
                        .entry(event.iter().collect::<String>())
                        .or_insert(0.0) += p;
                }
            }
            let mut mixed = BTreeMap::new();
            for key in quantum.outcomes.keys().chain(classical.keys()) {
                let p = overlap * quantum.probability(key)
                    + (1.0 - overlap) * classical.get(key).copied().unwrap_or(0.0);
                mixed.insert(key.clone(), p);
            }
            DetectionDistribution::from_map(mixed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(-7.0), -7.0 + TAU, epsilon = 1e-15);
        assert_eq!(wrap_angle(0.3), 0.3);
    }

    #[test]
    fn tunable_hom_endpoints() {
        let d = tunable_hom(FRAC_PI_2);
        assert!(d.probability("ab") < 1e-24);
        assert_abs_diff_eq!(d.probability("aa"), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d.probability("bb"), 0.5, epsilon = 1e-12);

        let d = tunable_hom(0.0);
        assert_abs_diff_eq!(d.probability("ab"), 1.0, epsilon = 1e-12);

        let d = tunable_hom(FRAC_PI_4);
        assert_abs_diff_eq!(d.probability("ab"), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn tunable_hom_interpolates() {
        for k in 0..50 {
            let phi = -PI + k as f64 * TAU / 50.0;
            let d = tunable_hom(phi);
            assert_abs_diff_eq!(d.probability("ab"), phi.cos().powi(2), epsilon = 1e-12);
            assert_abs_diff_eq!(d.probability("aa"), phi.sin().powi(2) / 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_rates_at_reference_phases() {
        let cases = [
            ((0.0, 0.0, 0.0), [0.0, 0.0, 16.0, 0.0]),
            ((0.0, PI, 0.0), [0.0, 0.0, 4.0, 4.0]),
            ((0.0, FRAC_PI_2, FRAC_PI_2), [0.0, 4.0, 4.0, 4.0]),
        ];
        for ((a, b, c), expected) in cases {
            let r = grover_mz_rates(&PhaseConfig::new(a, b, c), 1.0).as_array();
            for (got, want) in r.iter().zip(expected) {
                assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_matches_modulus_form() {
        // |e^{i(2 phi0 + phi1)} x1 +- e^{i phi2} x2|^2 as printed.
        let ph = PhaseConfig::new(0.4, -1.3, 2.2);
        let upper = Complex64::from_polar(1.0, 2.0 * ph.phi0 + ph.phi1);
        let lower = Complex64::from_polar(1.0, ph.phi2);
        let (s1, c1) = ph.phi1.sin_cos();
        let (s2, c2) = ph.phi2.sin_cos();
        let expected = [
            (upper * s1 - lower * s2).norm_sqr(),
            (upper * s1 + lower * s2).norm_sqr(),
            (upper * (c1 + 1.0) + lower * (c2 + 1.0)).norm_sqr(),
            (upper * (c1 - 1.0) + lower * (c2 - 1.0)).norm_sqr(),
        ];
        let got = grover_mz_rates(&ph, 1.0).as_array();
        for (g, e) in got.iter().zip(expected) {
            assert_abs_diff_eq!(*g, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn simulation_reference_points() {
        let d = simulate_grover_mz(&PhaseConfig::zero());
        assert_abs_diff_eq!(d.probability("AB"), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-12);

        let d = simulate_grover_mz(&PhaseConfig::new(0.0, PI, 0.0));
        assert_abs_diff_eq!(d.probability("AB"), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(d.probability("CD"), 0.25, epsilon = 1e-12);
        let doubles: f64 = ["AA", "BB", "CC", "DD"].iter().map(|e| d.probability(e)).sum();
        assert_abs_diff_eq!(doubles, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn simulation_matches_closed_form() {
        let ph = PhaseConfig::new(0.3, 0.7, 1.1);
        let sim = simulate_grover_mz(&ph);
        let r = grover_mz_rates(&ph, 1.0);
        let s = sim.to_mz_rates(1.0);
        for (a, b) in r.as_array().iter().zip(s.as_array()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(sim.probability("AC"), sim.probability("BD"), epsilon = 1e-10);
        assert_abs_diff_eq!(sim.probability("AD"), sim.probability("BC"), epsilon = 1e-10);
    }

    #[test]
    fn line_phase_assignment() {
        let ph = PhaseConfig::new(0.1, 0.2, 0.3);
        let l = ph.line_phases();
        assert_abs_diff_eq!(l[0] - l[1], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(l[2] - l[3], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(l[1] - l[3], 0.1, epsilon = 1e-15);
    }

    #[test]
    fn pair_decomposition() {
        let expected = transmitted_pair()
            .add(&reflected_pair())
            .unwrap()
            .scale(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        assert!(grover_pair_output().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn baseline_hom() {
        let d = hom_baseline(BaselineInput::Pair {
            indistinguishability: 1.0,
        });
        assert!(d.probability("cd") < 1e-24);
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-14);

        let d = hom_baseline(BaselineInput::Pair {
            indistinguishability: 0.0,
        });
        assert_abs_diff_eq!(d.probability("cd"), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(d.probability("cc"), 0.25, epsilon = 1e-14);

        let d = hom_baseline(BaselineInput::Single);
        assert_abs_diff_eq!(d.probability("c"), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(d.probability("d"), 0.5, epsilon = 1e-14);
    }
}
