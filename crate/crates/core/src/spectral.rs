//! Finite-bandwidth coincidence probability of the tunable HOM setup.
//!
//! With identical photon spectra `|Phi(w)|^2` and delays `tau0` (between
//! the reflected and transmitted pair amplitudes) and `tau1`, `tau2` (within
//! each pair), the coincidence probability is
//!
//! ```text
//! p = 1/2 + 1/2 cos(2 phi) I_c + 1/2 sin(2 phi) I_s
//! I_c = ∫∫ |Phi(wa) Phi(wb)|^2 cos[wb dtau + (wa + wb) tau0]
//! I_s = ∫∫ |Phi(wa) Phi(wb)|^2 sin[-wb dtau + (wa - wb) tau0]
//! ```
//!
//! with `dtau = tau2 - tau1`. Both integrands are separable, so on a tensor
//! product grid the double sums factor into products of the one-dimensional
//! transform `F(t) = ∫ |Phi(w)|^2 e^{i w t} dw`:
//! `I_c = Re[F(tau0) F(tau0 + dtau)]` and
//! `I_s = Im[F(tau0) conj(F(tau0 + dtau))]`.
//!
//! Frequencies are handled in units of the bandwidth, `x = (w - center) / B`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

/// Half-width of the sinc/gaussian integration window, in bandwidths.
pub const DEFAULT_WINDOW: f64 = 8.0;
pub const DEFAULT_INTERVALS: usize = 1024;
/// Largest allowed change of `p` when the grid is refined.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

const REFERENCE_INTERVALS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid spectral profile: {0}")]
    InvalidProfile(String),
    #[error("quadrature grid needs at least 2 intervals, got {0}")]
    InvalidGrid(usize),
    #[error("spectrum integrates to 1 {deviation:+e} on this grid")]
    Unnormalized { deviation: f64 },
    #[error("quadrature did not converge: {coarse} vs {fine} after refinement")]
    NotConverged { coarse: f64, fine: f64 },
    #[error("invalid scan range: {0}")]
    InvalidRange(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    /// `|Phi|^2 ∝ sinc^2((w - center) / B)`
    Sinc,
    /// `|Phi|^2 ∝ exp(-(w - center)^2 / (2 B^2))`
    Gaussian,
    /// `|Phi|^2` flat on `|w - center| <= B`
    Rectangular,
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumKind::Sinc => "sinc",
            SpectrumKind::Gaussian => "gaussian",
            SpectrumKind::Rectangular => "rect",
        })
    }
}

impl FromStr for SpectrumKind {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sinc" => Ok(SpectrumKind::Sinc),
            "gaussian" | "gauss" => Ok(SpectrumKind::Gaussian),
            "rect" | "rectangular" => Ok(SpectrumKind::Rectangular),
            other => Err(SpectralError::InvalidProfile(format!(
                "unknown spectrum kind {other:?}"
            ))),
        }
    }
}

impl SpectrumKind {
    fn shape(self, x: f64) -> f64 {
        match self {
            SpectrumKind::Sinc => {
                if x == 0.0 {
                    1.0
                } else {
                    (x.sin() / x).powi(2)
                }
            }
            SpectrumKind::Gaussian => (-0.5 * x * x).exp(),
            SpectrumKind::Rectangular => {
                if x.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Spectral intensity shared by all photons, normalized to unit area.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProfile {
    kind: SpectrumKind,
    center: f64,
    bandwidth: f64,
    window: f64,
    /// `∫ shape(x) dx` over the integration support.
    shape_area: f64,
}

impl SpectralProfile {
    /// `center` and `bandwidth` in rad/s.
    pub fn new(kind: SpectrumKind, center: f64, bandwidth: f64) -> Result<Self, SpectralError> {
        Self::with_window(kind, center, bandwidth, DEFAULT_WINDOW)
    }

    /// `window` is the half-width of the integration support in bandwidths
    /// (ignored for the rectangular profile, whose support is exact).
    pub fn with_window(
        kind: SpectrumKind,
        center: f64,
        bandwidth: f64,
        window: f64,
    ) -> Result<Self, SpectralError> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(SpectralError::InvalidProfile(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        if !center.is_finite() {
            return Err(SpectralError::InvalidProfile("center must be finite".into()));
        }
        if !(window.is_finite() && window > 0.0) {
            return Err(SpectralError::InvalidProfile(format!(
                "window must be positive, got {window}"
            )));
        }
        let mut profile = Self {
            kind,
            center,
            bandwidth,
            window,
            shape_area: 1.0,
        };
        profile.shape_area = simpson(profile.support(), REFERENCE_INTERVALS, |x| kind.shape(x));
        Ok(profile)
    }

    /// Profile in bandwidth units: unit bandwidth, zero center.
    pub fn relative(kind: SpectrumKind) -> Self {
        Self::new(kind, 0.0, 1.0).expect("unit bandwidth is valid")
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Coherence time `1 / B`.
    pub fn coherence_time(&self) -> f64 {
        1.0 / self.bandwidth
    }

    fn support(&self) -> (f64, f64) {
        match self.kind {
            SpectrumKind::Rectangular => (-1.0, 1.0),
            _ => (-self.window, self.window),
        }
    }

    /// Normalized density in `x = (w - center) / B`.
    fn density(&self, x: f64) -> f64 {
        self.kind.shape(x) / self.shape_area
    }

    /// Normalized `|Phi(w)|^2` in 1/(rad/s).
    pub fn intensity(&self, omega: f64) -> f64 {
        let x = (omega - self.center) / self.bandwidth;
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        self.density(x) / self.bandwidth
    }

    /// `∫ |Phi|^2 dw - 1` with `intervals` Simpson panels.
    pub fn normalization_error(&self, intervals: usize) -> f64 {
        simpson(self.support(), even(intervals), |x| self.density(x)) - 1.0
    }

    /// `F(t) = ∫ |Phi(w)|^2 e^{i w t} dw` for a delay `t` in seconds.
    pub fn transform(&self, t: f64, intervals: usize) -> Complex64 {
        let scaled = self.bandwidth * t;
        let (lo, hi) = self.support();
        let n = even(intervals);
        let h = (hi - lo) / n as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            let x = lo + k as f64 * h;
            sum += simpson_weight(k, n) * self.density(x) * Complex64::from_polar(1.0, x * scaled);
        }
        Complex64::from_polar(h / 3.0, self.center * t) * sum
    }
}

fn even(n: usize) -> usize {
    n + n % 2
}

fn simpson_weight(k: usize, n: usize) -> f64 {
    if k == 0 || k == n {
        1.0
    } else if k % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

fn simpson(range: (f64, f64), intervals: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = even(intervals.max(2));
    let h = (range.1 - range.0) / n as f64;
    let sum: f64 = (0..=n)
        .map(|k| simpson_weight(k, n) * f(range.0 + k as f64 * h))
        .sum();
    sum * h / 3.0
}

/// Delays in seconds. `dtau = tau2 - tau1` is always derived.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DelayConfig {
    pub tau0: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl DelayConfig {
    pub fn new(tau0: f64, tau1: f64, tau2: f64) -> Self {
        Self { tau0, tau1, tau2 }
    }

    pub fn dtau(&self) -> f64 {
        self.tau2 - self.tau1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureGrid {
    /// Simpson panels over the spectral support (rounded up to even).
    pub intervals: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            intervals: DEFAULT_INTERVALS,
        }
    }
}

fn probability_on_grid(phi: f64, delays: &DelayConfig, spectrum: &SpectralProfile, n: usize) -> f64 {
    let f0 = spectrum.transform(delays.tau0, n);
    let f1 = spectrum.transform(delays.tau0 + delays.dtau(), n);
    let i_c = (f0 * f1).re;
    let i_s = (f0 * f1.conj()).im;
    let two_phi = 2.0 * phi;
    0.5 + 0.5 * two_phi.cos() * i_c + 0.5 * two_phi.sin() * i_s
}

/// Coincidence probability between the merged detectors. The value on the
/// refined grid is returned after checking it against the base grid.
pub fn coincidence_probability(
    phi: f64,
    delays: &DelayConfig,
    spectrum: &SpectralProfile,
    grid: &QuadratureGrid,
) -> Result<f64, SpectralError> {
    if grid.intervals < 2 {
        return Err(SpectralError::InvalidGrid(grid.intervals));
    }
    let deviation = spectrum.normalization_error(grid.intervals);
    if deviation.abs() > NORMALIZATION_TOLERANCE {
        return Err(SpectralError::Unnormalized { deviation });
    }
    let coarse = probability_on_grid(phi, delays, spectrum, grid.intervals);
    let fine = probability_on_grid(phi, delays, spectrum, 2 * even(grid.intervals));
    if (coarse - fine).abs() > CONVERGENCE_TOLERANCE || !fine.is_finite() {
        return Err(SpectralError::NotConverged { coarse, fine });
    }
    Ok(fine)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanVariable {
    Tau0,
    DeltaTau,
}

impl fmt::Display for ScanVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanVariable::Tau0 => "tau0",
            ScanVariable::DeltaTau => "dtau",
        })
    }
}

impl FromStr for ScanVariable {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "tau0" => Ok(ScanVariable::Tau0),
            "dtau" => Ok(ScanVariable::DeltaTau),
            other => Err(SpectralError::InvalidRange(format!(
                "scan variable must be tau0 or dtau, got {other:?}"
            ))),
        }
    }
}

/// Inclusive range `min, min + step, ...` up to `max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ScanRange {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self, SpectralError> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(SpectralError::InvalidRange("bounds must be finite".into()));
        }
        if min >= max {
            return Err(SpectralError::InvalidRange(format!(
                "min {min} must be below max {max}"
            )));
        }
        if step <= 0.0 {
            return Err(SpectralError::InvalidRange(format!(
                "step must be positive, got {step}"
            )));
        }
        Ok(Self { min, max, step })
    }

    pub fn values(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.min + i as f64 * self.step).collect()
    }
}

impl FromStr for ScanRange {
    type Err = SpectralError;

    /// Parses `min:max:step`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(SpectralError::InvalidRange(format!(
                "expected min:max:step, got {s:?}"
            )));
        }
        let mut vals = [0.0; 3];
        for (v, p) in vals.iter_mut().zip(&parts) {
            *v = p.trim().parse().map_err(|_| {
                SpectralError::InvalidRange(format!("not a number: {p:?}"))
            })?;
        }
        ScanRange::new(vals[0], vals[1], vals[2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub delay: f64,
    pub probability: f64,
}

/// Scans one delay while holding the other fixed. For a `tau0` scan
/// `fixed` is `dtau`; for a `dtau` scan it is `tau0`.
pub fn hom_scan(
    phi: f64,
    scan: ScanVariable,
    fixed: f64,
    range: &ScanRange,
    spectrum: &SpectralProfile,
    grid: &QuadratureGrid,
) -> Result<Vec<ScanPoint>, SpectralError> {
    range
        .values()
        .into_iter()
        .map(|delay| {
            let delays = match scan {
                ScanVariable::Tau0 => DelayConfig::new(delay, 0.0, fixed),
                ScanVariable::DeltaTau => DelayConfig::new(fixed, 0.0, delay),
            };
            coincidence_probability(phi, &delays, spectrum, grid)
                .map(|probability| ScanPoint { delay, probability })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    /// Transform of an untruncated `sinc^2` spectrum: a triangle of
    /// half-width 2 in bandwidth-relative time.
    fn sinc_transform_untruncated(t_relative: f64) -> f64 {
        (1.0 - t_relative.abs() / 2.0).max(0.0)
    }

    fn grid() -> QuadratureGrid {
        QuadratureGrid::default()
    }

    /// Direct tensor-product midpoint evaluation of both double integrals,
    /// independent of the factorized transform.
    fn direct_double_integral(
        phi: f64,
        d: &DelayConfig,
        s: &SpectralProfile,
        n: usize,
    ) -> f64 {
        let (lo, hi) = s.support();
        let h = (hi - lo) / n as f64;
        let b = s.bandwidth();
        let dtau = d.dtau();
        let nodes: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let x = lo + (k as f64 + 0.5) * h;
                (s.center() + b * x, s.density(x) * h)
            })
            .collect();
        let (mut ic, mut is) = (0.0, 0.0);
        for &(wa, ra) in &nodes {
            for &(wb, rb) in &nodes {
                let w = ra * rb;
                ic += w * (wb * dtau + (wa + wb) * d.tau0).cos();
                is += w * (-wb * dtau + (wa - wb) * d.tau0).sin();
            }
        }
        0.5 + 0.5 * (2.0 * phi).cos() * ic + 0.5 * (2.0 * phi).sin() * is
    }

    #[test]
    fn profiles_are_normalized() {
        for kind in [SpectrumKind::Sinc, SpectrumKind::Gaussian, SpectrumKind::Rectangular] {
            let s = SpectralProfile::new(kind, 3.0, 0.5).unwrap();
            assert!(s.normalization_error(DEFAULT_INTERVALS).abs() < 1e-6, "{kind}");
            // integrate |Phi(w)|^2 in physical units
            let lo = 3.0 - 0.5 * 8.0;
            let hi = 3.0 + 0.5 * 8.0;
            let area = simpson((lo, hi), 1 << 15, |w| s.intensity(w));
            let tol = if kind == SpectrumKind::Rectangular { 1e-3 } else { 1e-6 };
            assert_abs_diff_eq!(area, 1.0, epsilon = tol);
        }
    }

    #[test]
    fn zero_delay_reduces_to_cos_squared() {
        let s = SpectralProfile::relative(SpectrumKind::Sinc);
        for k in 0..20 {
            let phi = -3.0 + 0.3 * k as f64;
            let p = coincidence_probability(phi, &DelayConfig::default(), &s, &grid()).unwrap();
            assert_abs_diff_eq!(p, phi.cos().powi(2), epsilon = 1e-6);
        }
    }

    #[test]
    fn quarter_phase_is_flat_without_dtau() {
        let s = SpectralProfile::relative(SpectrumKind::Sinc);
        for tau0 in [-3.0, -0.7, 0.0, 0.4, 2.5, 11.0] {
            let p = coincidence_probability(FRAC_PI_4, &DelayConfig::new(tau0, 0.0, 0.0), &s, &grid())
                .unwrap();
            assert_abs_diff_eq!(p, 0.5, epsilon = 1e-6);
        }
    }

    #[test]
    fn wings_approach_one_half() {
        let s = SpectralProfile::relative(SpectrumKind::Sinc);
        for tau0 in [-20.0, -9.0, 9.0, 20.0] {
            let p = coincidence_probability(FRAC_PI_2, &DelayConfig::new(tau0, 0.0, 0.0), &s, &grid())
                .unwrap();
            assert_abs_diff_eq!(p, 0.5, epsilon = 1e-3);
        }
    }

    #[test]
    fn factorized_matches_direct_double_sum() {
        let cases = [
            (SpectrumKind::Sinc, 0.0, FRAC_PI_2, DelayConfig::new(0.3, 0.1, 0.6)),
            (SpectrumKind::Gaussian, 2.0, 0.4, DelayConfig::new(-0.8, 0.0, 1.1)),
            (SpectrumKind::Rectangular, -1.0, 1.2, DelayConfig::new(0.5, 0.2, -0.3)),
        ];
        for (kind, center, phi, delays) in cases {
            let s = SpectralProfile::new(kind, center, 1.0).unwrap();
            let fast = coincidence_probability(phi, &delays, &s, &grid()).unwrap();
            let direct = direct_double_integral(phi, &delays, &s, 1200);
            assert_abs_diff_eq!(fast, direct, epsilon = 2e-5);
        }
    }

    #[test]
    fn gaussian_matches_closed_form() {
        // F(t) = exp(i w0 t - B^2 t^2 / 2)
        let (w0, b) = (5.0, 2.0);
        let s = SpectralProfile::new(SpectrumKind::Gaussian, w0, b).unwrap();
        let f = |t: f64| Complex64::from_polar((-(b * t).powi(2) / 2.0).exp(), w0 * t);
        for (phi, d) in [
            (0.3, DelayConfig::new(0.2, 0.0, 0.1)),
            (1.1, DelayConfig::new(-0.4, 0.3, 0.0)),
            (FRAC_PI_2, DelayConfig::new(0.0, 0.0, 0.7)),
        ] {
            let f0 = f(d.tau0);
            let f1 = f(d.tau0 + d.dtau());
            let expected = 0.5
                + 0.5 * (2.0 * phi).cos() * (f0 * f1).re
                + 0.5 * (2.0 * phi).sin() * (f0 * f1.conj()).im;
            let got = coincidence_probability(phi, &d, &s, &grid()).unwrap();
            assert_abs_diff_eq!(got, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn sinc_transform_is_close_to_triangle() {
        // The truncated window perturbs the ideal triangle only slightly.
        let s = SpectralProfile::with_window(SpectrumKind::Sinc, 0.0, 1.0, 64.0).unwrap();
        for t in [0.0, 0.5, 1.0, 1.5, 2.5] {
            let f = s.transform(t, 1 << 14);
            assert_abs_diff_eq!(f.re, sinc_transform_untruncated(t), epsilon = 5e-3);
        }
    }

    #[test]
    fn refinement_changes_little() {
        let s = SpectralProfile::relative(SpectrumKind::Sinc);
        for (phi, tau0) in [(0.2, 0.5), (1.0, -2.0), (FRAC_PI_2, 6.0)] {
            let d = DelayConfig::new(tau0, 0.0, 0.3);
            let a = probability_on_grid(phi, &d, &s, 1024);
            let b = probability_on_grid(phi, &d, &s, 2048);
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn dtau_scan_ignores_common_offset() {
        let s = SpectralProfile::relative(SpectrumKind::Sinc);
        for dtau in [-1.0, 0.0, 0.5] {
            let a = coincidence_probability(1.0, &DelayConfig::new(0.2, 0.0, dtau), &s, &grid()).unwrap();
            let b = coincidence_probability(1.0, &DelayConfig::new(0.2, 3.7, 3.7 + dtau), &s, &grid())
                .unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn phase_has_period_pi() {
        let s = SpectralProfile::relative(SpectrumKind::Gaussian);
        let d = DelayConfig::new(0.3, 0.0, 0.4);
        for phi in [0.0, 0.4, 1.9] {
            let a = coincidence_probability(phi, &d, &s, &grid()).unwrap();
            let b = coincidence_probability(phi + PI, &d, &s, &grid()).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn error_paths() {
        let s = SpectralProfile::relative(SpectrumKind::Sinc);
        assert_eq!(
            coincidence_probability(0.0, &DelayConfig::default(), &s, &QuadratureGrid { intervals: 0 }),
            Err(SpectralError::InvalidGrid(0))
        );
        assert!(matches!(
            coincidence_probability(0.0, &DelayConfig::default(), &s, &QuadratureGrid { intervals: 4 }),
            Err(SpectralError::Unnormalized { .. })
        ));
        // node spacing times delay is a full turn: the base grid aliases
        let aliased = 2.0 * PI * 1024.0 / 16.0;
        assert!(matches!(
            coincidence_probability(0.0, &DelayConfig::new(aliased, 0.0, 0.0), &s, &grid()),
            Err(SpectralError::NotConverged { .. })
        ));
        assert!(SpectralProfile::new(SpectrumKind::Sinc, 0.0, 0.0).is_err());
        assert!("1:0:0.1".parse::<ScanRange>().is_err());
        assert!("0:1:0".parse::<ScanRange>().is_err());
        assert!("0:1".parse::<ScanRange>().is_err());
    }

    #[test]
    fn scan_shapes() {
        let s = SpectralProfile::relative(SpectrumKind::Sinc);
        let range: ScanRange = "-5:5:0.05".parse().unwrap();
        assert_eq!(range.values().len(), 201);

        let dip = hom_scan(FRAC_PI_2, ScanVariable::Tau0, 0.0, &range, &s, &grid()).unwrap();
        let min = dip.iter().map(|p| p.probability).fold(f64::INFINITY, f64::min);
        assert!(min < 1e-6);
        let at_zero = dip.iter().find(|p| p.delay.abs() < 1e-9).unwrap();
        assert!(at_zero.probability < 1e-6);
        assert!(dip.windows(2).all(|w| w[1].delay > w[0].delay));

        let peak = hom_scan(0.0, ScanVariable::Tau0, 0.0, &range, &s, &grid()).unwrap();
        let max = peak.iter().map(|p| p.probability).fold(0.0, f64::max);
        assert!(max > 1.0 - 1e-6);

        let flat = hom_scan(FRAC_PI_4, ScanVariable::Tau0, 0.0, &range, &s, &grid()).unwrap();
        assert!(flat.iter().all(|p| (p.probability - 0.5).abs() < 1e-6));

        let dtau = hom_scan(FRAC_PI_2, ScanVariable::DeltaTau, 0.0, &range, &s, &grid()).unwrap();
        assert!(dtau.iter().find(|p| p.delay.abs() < 1e-9).unwrap().probability < 1e-6);
    }
}
