//! Three-axis rotation sensing with the Grover–Mach–Zehnder phases.
//!
//! Each rotation axis contributes a Sagnac phase through the loop area
//! projected perpendicular to it. The loops are wired so that
//!
//! ```text
//! phi0 = (phi_x - phi_z) / 2
//! phi1 = phi_z
//! phi2 = phi_x + phi_y
//! ```
//!
//! which is invertible, so the three interferometer phases fix all three
//! rotation rates (up to the sign ambiguities of the rate inversion).

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::interferometers::{wrap_angle, CoincidenceRates, PhaseConfig};
use crate::inversion::{invert_rates, CalibrationRecord, InversionError, PhaseSolution};

/// m/s
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Above this value of `r |omega| / c` the first-order delay formula is off
/// by more than about one part in a million.
pub const SLOW_ROTATION_LIMIT: f64 = 1e-3;

/// Reconstructed rotations closer than this, relative to the largest
/// component, are the same.
const SAME_ROTATION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SagnacError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("r |omega| = {speed} m/s reaches the speed of light")]
    Unphysical { speed: f64 },
    #[error("axis {0} has zero projected area and cannot be reconstructed")]
    ZeroArea(Axis),
    #[error(transparent)]
    Inversion(#[from] InversionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SagnacGeometry {
    /// Projected loop areas in m², indexed x, y, z.
    pub areas: [f64; 3],
    /// m
    pub wavelength: f64,
    /// Loop radius in m, only needed for the exact delay.
    pub radius: Option<f64>,
}

impl SagnacGeometry {
    pub fn new(areas: [f64; 3], wavelength: f64, radius: Option<f64>) -> Result<Self, SagnacError> {
        if areas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(SagnacError::InvalidGeometry(format!(
                "areas must be finite and non-negative, got {areas:?}"
            )));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(SagnacError::InvalidGeometry(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if let Some(r) = radius {
            if !(r.is_finite() && r >= 0.0) {
                return Err(SagnacError::InvalidGeometry(format!(
                    "radius must be non-negative, got {r}"
                )));
            }
        }
        Ok(Self {
            areas,
            wavelength,
            radius,
        })
    }

    pub fn area(&self, axis: Axis) -> f64 {
        self.areas[axis as usize]
    }
}

/// Angular velocity components in rad/s.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RotationRates {
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
}

impl RotationRates {
    pub fn new(omega_x: f64, omega_y: f64, omega_z: f64) -> Self {
        Self {
            omega_x,
            omega_y,
            omega_z,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.omega_x, self.omega_y, self.omega_z]
    }

    pub fn from_array(omega: [f64; 3]) -> Self {
        Self::new(omega[0], omega[1], omega[2])
    }

    pub fn magnitudes(&self) -> [f64; 3] {
        self.as_array().map(f64::abs)
    }

    /// A message when the loop rim moves fast enough to spoil the
    /// first-order Sagnac formula.
    pub fn slow_rotation_warning(&self, geometry: &SagnacGeometry) -> Option<String> {
        let r = geometry.radius?;
        let fastest = self.magnitudes().into_iter().fold(0.0, f64::max);
        let beta = r * fastest / SPEED_OF_LIGHT;
        (beta > SLOW_ROTATION_LIMIT).then(|| {
            format!("r|omega|/c = {beta:.3e}; the first-order Sagnac phase is inaccurate")
        })
    }
}

/// Phase difference between the counter-propagating beams,
/// `8 pi A omega / (lambda c)`.
pub fn sagnac_phase(area: f64, omega: f64, wavelength: f64) -> f64 {
    8.0 * std::f64::consts::PI * area * omega / (wavelength * SPEED_OF_LIGHT)
}

/// Arrival-time difference `4 A omega / (c^2 - r^2 omega^2)`.
pub fn exact_time_delay(area: f64, radius: f64, omega: f64) -> Result<f64, SagnacError> {
    let speed = (radius * omega).abs();
    if speed >= SPEED_OF_LIGHT {
        return Err(SagnacError::Unphysical { speed });
    }
    Ok(4.0 * area * omega / (SPEED_OF_LIGHT * SPEED_OF_LIGHT - speed * speed))
}

/// Maps axis phases `(phi_x, phi_y, phi_z)` to `(phi0, phi1, phi2)`.
pub fn forward_matrix() -> Matrix3<f64> {
    Matrix3::new(0.5, 0.0, -0.5, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0)
}

pub fn inverse_matrix() -> Matrix3<f64> {
    Matrix3::new(2.0, 1.0, 0.0, -2.0, -1.0, 1.0, 0.0, 1.0, 0.0)
}

/// Sagnac phase of each axis loop, ordered x, y, z.
pub fn axis_phases(rates: &RotationRates, geometry: &SagnacGeometry) -> [f64; 3] {
    std::array::from_fn(|i| sagnac_phase(geometry.areas[i], rates.as_array()[i], geometry.wavelength))
}

/// Interferometer phases produced by a rotation.
pub fn phases_from_rotation(rates: &RotationRates, geometry: &SagnacGeometry) -> PhaseConfig {
    let v = forward_matrix() * Vector3::from(axis_phases(rates, geometry));
    PhaseConfig::new(v[0], v[1], v[2])
}

/// `(phi_x, phi_y, phi_z)` from the interferometer phases, each reduced to
/// `(-pi, pi]`.
pub fn axis_phases_from(phases: &PhaseConfig) -> [f64; 3] {
    let v = inverse_matrix() * Vector3::from(phases.as_array());
    [wrap_angle(v[0]), wrap_angle(v[1]), wrap_angle(v[2])]
}

pub fn rotation_from_phases(
    phases: &PhaseConfig,
    geometry: &SagnacGeometry,
) -> Result<RotationRates, SagnacError> {
    if let Some(axis) = Axis::ALL.into_iter().find(|&a| geometry.area(a) == 0.0) {
        return Err(SagnacError::ZeroArea(axis));
    }
    let axis = axis_phases_from(phases);
    let scale = |i: usize| {
        geometry.wavelength * SPEED_OF_LIGHT / (8.0 * std::f64::consts::PI * geometry.areas[i])
    };
    Ok(RotationRates::from_array(std::array::from_fn(|i| axis[i] * scale(i))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotationReconstruction {
    /// Rotation for the primary phase solution.
    pub rates: RotationRates,
    /// Per axis x, y, z: an equally good fit turns the other way.
    pub direction_ambiguous: [bool; 3],
    /// Rotations for every phase candidate, distinct entries only.
    pub candidates: Vec<RotationRates>,
    pub phases: PhaseSolution,
}

impl RotationReconstruction {
    /// Whether some candidate matches `truth` in every magnitude, relative
    /// to the largest component.
    pub fn contains_magnitudes(&self, truth: &RotationRates, relative: f64) -> bool {
        let scale = truth.magnitudes().into_iter().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        self.candidates.iter().any(|c| {
            c.magnitudes()
                .iter()
                .zip(truth.magnitudes())
                .all(|(a, b)| (a - b).abs() <= relative * scale)
        })
    }
}

/// Coincidence rates to rotation rates via phase inversion.
pub fn reconstruct_rotation(
    rates: &CoincidenceRates,
    calibration: &CalibrationRecord,
    geometry: &SagnacGeometry,
) -> Result<RotationReconstruction, SagnacError> {
    let solution = invert_rates(rates, Some(calibration), false)?;
    let primary = rotation_from_phases(&solution.phases, geometry)?;
    let all: Vec<RotationRates> = solution
        .candidates
        .iter()
        .map(|c| rotation_from_phases(&c.phases, geometry))
        .collect::<Result<_, _>>()?;
    let scale = all
        .iter()
        .flat_map(|w| w.magnitudes())
        .fold(0.0, f64::max);
    let mut candidates: Vec<RotationRates> = Vec::new();
    for omega in all {
        let fresh = candidates.iter().all(|k| {
            k.as_array()
                .iter()
                .zip(omega.as_array())
                .any(|(a, b)| (a - b).abs() > SAME_ROTATION * scale)
        });
        if fresh {
            candidates.push(omega);
        }
    }
    let p = primary.as_array();
    let direction_ambiguous = std::array::from_fn(|i| {
        p[i] != 0.0
            && candidates
                .iter()
                .any(|c| c.as_array()[i].signum() != p[i].signum() && c.as_array()[i] != 0.0)
    });
    Ok(RotationReconstruction {
        rates: primary,
        direction_ambiguous,
        candidates,
        phases: solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometers::grover_mz_rates;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn unit_geometry() -> SagnacGeometry {
        SagnacGeometry::new([1.0; 3], 1550e-9, None).unwrap()
    }

    #[test]
    fn phase_for_reference_loop() {
        assert_relative_eq!(sagnac_phase(1.0, 1.0, 1550e-9), 0.05409, max_relative = 1e-4);
        assert_eq!(sagnac_phase(1.0, 0.0, 1550e-9), 0.0);
        assert_relative_eq!(
            sagnac_phase(2.0, 0.3, 1550e-9),
            2.0 * sagnac_phase(1.0, 0.3, 1550e-9),
            max_relative = 1e-15
        );
    }

    #[test]
    fn phase_is_optical_frequency_times_delay() {
        let (a, w, lambda) = (0.7, 0.013, 1310e-9);
        let omega_optical = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lambda;
        let dt = exact_time_delay(a, 0.0, w).unwrap();
        assert_relative_eq!(omega_optical * dt, sagnac_phase(a, w, lambda), max_relative = 1e-12);
    }

    #[test]
    fn time_delay() {
        let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
        assert_relative_eq!(exact_time_delay(1.0, 0.0, 1.0).unwrap(), 4.0 / c2, max_relative = 1e-15);
        assert!((exact_time_delay(1.0, 0.0, 1.0).unwrap() - 4.45e-17).abs() < 0.01e-17);
        assert_eq!(exact_time_delay(1.0, 2.0, 0.0).unwrap(), 0.0);
        // leading correction is (r omega / c)^2
        let (r, w) = (1.0, 1e5);
        let beta2 = (r * w / SPEED_OF_LIGHT).powi(2);
        let ratio = exact_time_delay(1.0, r, w).unwrap() / (4.0 * w / c2);
        assert_relative_eq!(ratio - 1.0, beta2, max_relative = 1e-6);
        assert!(matches!(
            exact_time_delay(1.0, 1.0, SPEED_OF_LIGHT),
            Err(SagnacError::Unphysical { .. })
        ));
    }

    #[test]
    fn matrices() {
        let f = forward_matrix();
        assert_abs_diff_eq!(f.determinant(), -0.5, epsilon = 1e-15);
        let id = f * inverse_matrix();
        assert!((id - Matrix3::identity()).amax() < 1e-15);
        let v = f * Vector3::new(1.0, 1.0, 1.0);
        assert_eq!(v, Vector3::new(0.0, 1.0, 2.0));
        let back = inverse_matrix() * Vector3::new(0.0, 1.0, 2.0);
        assert_eq!(back, Vector3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn forward_reference_rotation() {
        let ph = phases_from_rotation(&RotationRates::new(1.0, 1.0, 1.0), &unit_geometry());
        let d = sagnac_phase(1.0, 1.0, 1550e-9);
        assert_abs_diff_eq!(ph.phi0, 0.0, epsilon = 1e-15);
        assert_relative_eq!(ph.phi1, d, max_relative = 1e-14);
        assert_relative_eq!(ph.phi2, 2.0 * d, max_relative = 1e-14);
        assert_eq!(
            phases_from_rotation(&RotationRates::default(), &unit_geometry()),
            PhaseConfig::zero()
        );
    }

    #[test]
    fn z_only_rotation_pattern() {
        let ph = phases_from_rotation(&RotationRates::new(0.0, 0.0, 2.0), &unit_geometry());
        assert_relative_eq!(ph.phi0, -ph.phi1 / 2.0, max_relative = 1e-15);
        assert_eq!(ph.phi2, 0.0);
    }

    #[test]
    fn round_trip_and_area_scaling() {
        let g = SagnacGeometry::new([0.5, 2.0, 1.5], 1064e-9, Some(0.1)).unwrap();
        let omega = RotationRates::new(0.7, -1.3, 0.2);
        let back = rotation_from_phases(&phases_from_rotation(&omega, &g), &g).unwrap();
        for (a, b) in back.as_array().iter().zip(omega.as_array()) {
            assert_relative_eq!(*a, b, max_relative = 1e-12);
        }
        let scaled = SagnacGeometry::new(g.areas.map(|a| 2.0 * a), g.wavelength, None).unwrap();
        let ph = phases_from_rotation(&omega, &g);
        let halved = rotation_from_phases(&ph, &scaled).unwrap();
        for (a, b) in halved.as_array().iter().zip(omega.as_array()) {
            assert_relative_eq!(*a, b / 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_area_axis() {
        let g = SagnacGeometry::new([1.0, 0.0, 1.0], 1550e-9, None).unwrap();
        assert_eq!(
            rotation_from_phases(&PhaseConfig::zero(), &g),
            Err(SagnacError::ZeroArea(Axis::Y))
        );
        assert!(SagnacGeometry::new([1.0, -1.0, 1.0], 1550e-9, None).is_err());
        assert!(SagnacGeometry::new([1.0; 3], 0.0, None).is_err());
    }

    #[test]
    fn reconstruction_from_rates() {
        let g = unit_geometry();
        let omega = RotationRates::new(1.0, 1.0, 1.0);
        let rates = grover_mz_rates(&phases_from_rotation(&omega, &g), 1.0);
        let rec = reconstruct_rotation(&rates, &CalibrationRecord::from_r0(1.0), &g).unwrap();
        for (a, b) in rec.rates.magnitudes().iter().zip(omega.magnitudes()) {
            assert_relative_eq!(*a, b, max_relative = 1e-6);
        }
        assert_eq!(rec.direction_ambiguous, [true; 3]);
        assert_eq!(rec.candidates.len(), 8);
        assert!(rec.contains_magnitudes(&omega, 1e-6));
    }

    #[test]
    fn reconstruction_of_rest() {
        let rec = reconstruct_rotation(
            &CoincidenceRates::new(0.0, 0.0, 16.0, 0.0),
            &CalibrationRecord::from_r0(1.0),
            &unit_geometry(),
        )
        .unwrap();
        assert!(rec.rates.magnitudes().iter().all(|w| *w < 1e-3));
    }

    #[test]
    fn slow_rotation_warning() {
        let g = SagnacGeometry::new([1.0; 3], 1550e-9, Some(1.0)).unwrap();
        assert!(RotationRates::new(1.0, 0.0, 0.0).slow_rotation_warning(&g).is_none());
        assert!(RotationRates::new(0.0, 1e6, 0.0).slow_rotation_warning(&g).is_some());
    }
}
