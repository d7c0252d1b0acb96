//! Few-photon bosonic states over a set of optical modes.
//!
//! States are stored sparsely as a map from occupation lists to complex
//! amplitudes. Linear optical elements act on creation operators,
//! `a_i^† -> sum_j M[j][i] a_j^†`, and a Fock state is evolved by expanding
//! the resulting product of creation operators and collecting monomials with
//! their `sqrt(n!)` normalization factors.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Amplitudes smaller than this are dropped after every transformation.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-14;

/// Largest photon number accepted by [`apply_mode_map`].
pub const DEFAULT_PHOTON_CAP: u32 = 4;

const UNITARY_TOLERANCE: f64 = 1e-12;
const NORMALIZATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("mode count mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{photons} photons exceed the supported cap of {cap}")]
    PhotonCapExceeded { photons: u32, cap: u32 },
    #[error("term with {found} photons added to a {expected}-photon state")]
    PhotonNumberMismatch { expected: u32, found: u32 },
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    Unnormalized { norm_sqr: f64 },
    #[error("cannot normalize the zero vector")]
    ZeroNorm,
    #[error("mode {0} is used more than once in the merge specification")]
    OverlappingMerge(usize),
    #[error("mode {mode} out of range for {mode_count} modes")]
    ModeOutOfRange { mode: usize, mode_count: usize },
    #[error("a state needs at least one mode")]
    NoModes,
}

/// Photon occupation numbers, one entry per mode.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occupations: Vec<u32>,
}

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Result<Self, FockError> {
        if occupations.is_empty() {
            return Err(FockError::NoModes);
        }
        Ok(Self { occupations })
    }

    /// The vacuum over `mode_count` modes.
    pub fn vacuum(mode_count: usize) -> Result<Self, FockError> {
        Self::new(vec![0; mode_count])
    }

    /// Occupation list built from the modes of each photon, e.g. `[0, 1]`
    /// over four modes gives `|1100>`.
    pub fn from_photons(mode_count: usize, photons: &[usize]) -> Result<Self, FockError> {
        let mut occupations = vec![0; mode_count];
        for &mode in photons {
            if mode >= mode_count {
                return Err(FockError::ModeOutOfRange { mode, mode_count });
            }
            occupations[mode] += 1;
        }
        Self::new(occupations)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.occupations
    }

    pub fn mode_count(&self) -> usize {
        self.occupations.len()
    }

    pub fn photon_number(&self) -> u32 {
        self.occupations.iter().sum()
    }

    /// Mode index of every photon, in ascending mode order.
    pub fn photon_modes(&self) -> Vec<usize> {
        self.occupations
            .iter()
            .enumerate()
            .flat_map(|(mode, &n)| std::iter::repeat(mode).take(n as usize))
            .collect()
    }

    /// `prod_j n_j!`
    fn factorial_product(&self) -> f64 {
        self.occupations.iter().map(|&n| factorial(n)).product()
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.occupations.iter().any(|&n| n > 9) { "," } else { "" };
        let body: Vec<String> = self.occupations.iter().map(|n| n.to_string()).collect();
        write!(f, "|{}>", body.join(sep))
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// A pure state in a fixed photon-number sector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    mode_count: usize,
    terms: BTreeMap<FockState, Complex64>,
    prune_threshold: f64,
}

impl StateVector {
    /// The empty (zero) vector over `mode_count` modes.
    pub fn zero(mode_count: usize) -> Self {
        Self {
            mode_count,
            terms: BTreeMap::new(),
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        }
    }

    /// A single basis ket with unit amplitude.
    pub fn basis(state: FockState) -> Self {
        let mut out = Self::zero(state.mode_count());
        out.terms.insert(state, Complex64::new(1.0, 0.0));
        out
    }

    pub fn from_terms<I>(mode_count: usize, terms: I) -> Result<Self, FockError>
    where
        I: IntoIterator<Item = (FockState, Complex64)>,
    {
        let mut out = Self::zero(mode_count);
        for (ket, amp) in terms {
            out.add_term(ket, amp)?;
        }
        Ok(out)
    }

    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold;
        self.prune();
        self
    }

    /// Adds `amp` to the coefficient of `ket`.
    pub fn add_term(&mut self, ket: FockState, amp: Complex64) -> Result<(), FockError> {
        if ket.mode_count() != self.mode_count {
            return Err(FockError::DimensionMismatch {
                expected: self.mode_count,
                found: ket.mode_count(),
            });
        }
        if let Some(expected) = self.photon_number() {
            if ket.photon_number() != expected {
                return Err(FockError::PhotonNumberMismatch {
                    expected,
                    found: ket.photon_number(),
                });
            }
        }
        let entry = self.terms.entry(ket).or_insert(Complex64::new(0.0, 0.0));
        *entry += amp;
        self.prune();
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    /// Photon number shared by every term, `None` for the zero vector.
    pub fn photon_number(&self) -> Option<u32> {
        self.terms.keys().next().map(FockState::photon_number)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockState, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&self) -> Result<Self, FockError> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(FockError::ZeroNorm);
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for amp in out.terms.values_mut() {
            *amp *= factor;
        }
        out.prune();
        out
    }

    /// Superposition `self + other`.
    pub fn add(&self, other: &StateVector) -> Result<Self, FockError> {
        let mut out = self.clone();
        for (ket, amp) in other.terms() {
            out.add_term(ket.clone(), *amp)?;
        }
        Ok(out)
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, FockError> {
        self.check_modes(other.mode_count)?;
        Ok(self
            .terms
            .iter()
            .filter_map(|(ket, a)| other.terms.get(ket).map(|b| a.conj() * b))
            .sum())
    }

    /// Largest entrywise amplitude difference between two states.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        let mut diff: f64 = 0.0;
        for (ket, a) in &self.terms {
            let b = other.terms.get(ket).copied().unwrap_or_default();
            diff = diff.max((a - b).norm());
        }
        for (ket, b) in &other.terms {
            if !self.terms.contains_key(ket) {
                diff = diff.max(b.norm());
            }
        }
        diff
    }

    /// Stored amplitude of `basis`, or exactly zero if absent.
    pub fn amplitude_of(&self, basis: &FockState) -> Result<Complex64, FockError> {
        self.check_modes(basis.mode_count())?;
        Ok(self.terms.get(basis).copied().unwrap_or_default())
    }

    /// Born-rule outcome probabilities.
    pub fn probabilities(&self) -> Result<BTreeMap<FockState, f64>, FockError> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(FockError::Unnormalized { norm_sqr });
        }
        Ok(self
            .terms
            .iter()
            .map(|(ket, amp)| (ket.clone(), amp.norm_sqr()))
            .collect())
    }

    fn check_modes(&self, found: usize) -> Result<(), FockError> {
        if found != self.mode_count {
            return Err(FockError::DimensionMismatch {
                expected: self.mode_count,
                found,
            });
        }
        Ok(())
    }

    fn prune(&mut self) {
        let threshold = self.prune_threshold;
        self.terms.retain(|_, amp| amp.norm() >= threshold);
    }
}

/// Linear transformation of creation operators. Column `i` holds the
/// coefficients of `a_i^†` in the output modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeMap {
    matrix: DMatrix<Complex64>,
    unitary: bool,
}

impl ModeMap {
    /// Wraps a square matrix, detecting unitarity to within 1e-12.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, FockError> {
        if !matrix.is_square() {
            return Err(FockError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(FockError::NoModes);
        }
        let unitary = unitarity_defect(&matrix) <= UNITARY_TOLERANCE;
        Ok(Self { matrix, unitary })
    }

    pub fn identity(mode_count: usize) -> Self {
        Self {
            matrix: DMatrix::identity(mode_count, mode_count),
            unitary: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Largest entry of `|M^† M - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    /// The map that applies `self` first and then `next`.
    pub fn then(&self, next: &ModeMap) -> Result<ModeMap, FockError> {
        if next.dim() != self.dim() {
            return Err(FockError::DimensionMismatch {
                expected: self.dim(),
                found: next.dim(),
            });
        }
        ModeMap::new(&next.matrix * &self.matrix)
    }
}

fn unitarity_defect(matrix: &DMatrix<Complex64>) -> f64 {
    let n = matrix.nrows();
    let product = matrix.adjoint() * matrix;
    let identity = DMatrix::<Complex64>::identity(n, n);
    (product - identity)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Evolves `state` through `map`, refusing states above the default photon cap.
pub fn apply_mode_map(state: &StateVector, map: &ModeMap) -> Result<StateVector, FockError> {
    apply_mode_map_capped(state, map, DEFAULT_PHOTON_CAP)
}

pub fn apply_mode_map_capped(
    state: &StateVector,
    map: &ModeMap,
    photon_cap: u32,
) -> Result<StateVector, FockError> {
    if state.mode_count() != map.dim() {
        return Err(FockError::DimensionMismatch {
            expected: map.dim(),
            found: state.mode_count(),
        });
    }
    if let Some(photons) = state.photon_number() {
        if photons > photon_cap {
            return Err(FockError::PhotonCapExceeded {
                photons,
                cap: photon_cap,
            });
        }
    }
    Ok(transform(state, &map.matrix))
}

/// Applies a possibly rectangular creation-operator map (`rows` output modes,
/// `cols` input modes). Callers validate dimensions.
fn transform(state: &StateVector, matrix: &DMatrix<Complex64>) -> StateVector {
    let out_modes = matrix.nrows();
    let mut out = StateVector::zero(out_modes);
    out.prune_threshold = state.prune_threshold;

    let mut accum: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
    let mut occupation = vec![0u32; out_modes];
    for (ket, &amp) in state.terms() {
        let photons = ket.photon_modes();
        let weight = amp / ket.factorial_product().sqrt();
        expand_monomials(
            matrix,
            &photons,
            weight,
            &mut occupation,
            &mut accum,
        );
    }

    for (occ, coeff) in accum {
        let ket = FockState { occupations: occ };
        // prod (a_j^†)^{m_j} |0> = sqrt(prod m_j!) |m>
        let amp = coeff * ket.factorial_product().sqrt();
        if amp.norm() >= out.prune_threshold {
            out.terms.insert(ket, amp);
        }
    }
    out
}

/// Distributes each remaining photon over the output modes, multiplying the
/// matrix coefficients along the way.
fn expand_monomials(
    matrix: &DMatrix<Complex64>,
    photons: &[usize],
    coeff: Complex64,
    occupation: &mut Vec<u32>,
    accum: &mut BTreeMap<Vec<u32>, Complex64>,
) {
    let Some((&input, rest)) = photons.split_first() else {
        *accum
            .entry(occupation.clone())
            .or_insert(Complex64::new(0.0, 0.0)) += coeff;
        return;
    };
    for output in 0..matrix.nrows() {
        let m = matrix[(output, input)];
        if m == Complex64::new(0.0, 0.0) {
            continue;
        }
        occupation[output] += 1;
        expand_monomials(matrix, rest, coeff * m, occupation, accum);
        occupation[output] -= 1;
    }
}

/// Result of identifying pairs of modes onto shared detected modes.
#[derive(Clone, Debug)]
pub struct MergedState {
    pub state: StateVector,
    /// `| ||state||^2 - 1 |` after the merge.
    pub norm_deviation: f64,
}

/// One merge instruction: both source modes are replaced by `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MergePair {
    pub sources: (usize, usize),
    pub target: usize,
}

impl MergePair {
    pub fn new(first: usize, second: usize, target: usize) -> Self {
        Self {
            sources: (first, second),
            target,
        }
    }
}

/// Replaces the creation operators of each source pair by a single shared
/// operator. The output has one mode per pair (indexed by `target`, which
/// must be `0..pairs.len()`), followed by all untouched input modes in
/// ascending order. The result is not renormalized.
pub fn merge_modes(state: &StateVector, pairs: &[MergePair]) -> Result<MergedState, FockError> {
    let n = state.mode_count();
    let mut used = vec![false; n];
    let mut targets = vec![false; pairs.len()];
    for pair in pairs {
        for mode in [pair.sources.0, pair.sources.1] {
            if mode >= n {
                return Err(FockError::ModeOutOfRange {
                    mode,
                    mode_count: n,
                });
            }
            if used[mode] {
                return Err(FockError::OverlappingMerge(mode));
            }
            used[mode] = true;
        }
        if pair.target >= pairs.len() {
            return Err(FockError::ModeOutOfRange {
                mode: pair.target,
                mode_count: pairs.len(),
            });
        }
        if targets[pair.target] {
            return Err(FockError::OverlappingMerge(pair.target));
        }
        targets[pair.target] = true;
    }

    let untouched: Vec<usize> = (0..n).filter(|&m| !used[m]).collect();
    let out_modes = pairs.len() + untouched.len();
    let mut matrix = DMatrix::<Complex64>::zeros(out_modes, n);
    let one = Complex64::new(1.0, 0.0);
    for pair in pairs {
        matrix[(pair.target, pair.sources.0)] = one;
        matrix[(pair.target, pair.sources.1)] = one;
    }
    for (offset, &mode) in untouched.iter().enumerate() {
        matrix[(pairs.len() + offset, mode)] = one;
    }

    let merged = transform(state, &matrix);
    let norm_deviation = (merged.norm_sqr() - 1.0).abs();
    Ok(MergedState {
        state: merged,
        norm_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ket(occ: &[u32]) -> FockState {
        FockState::new(occ.to_vec()).unwrap()
    }

    fn grover() -> ModeMap {
        let m = DMatrix::from_fn(4, 4, |i, j| if i == j { c(-0.5) } else { c(0.5) });
        ModeMap::new(m).unwrap()
    }

    #[test]
    fn grover_splits_pair_into_six_kets() {
        let input = StateVector::basis(ket(&[1, 1, 0, 0]));
        let out = apply_mode_map(&input, &grover()).unwrap();
        let h = 1.0 / (2.0 * 2f64.sqrt());
        let expected = [
            ([1, 1, 0, 0], 0.5),
            ([0, 0, 1, 1], 0.5),
            ([2, 0, 0, 0], -h),
            ([0, 2, 0, 0], -h),
            ([0, 0, 2, 0], h),
            ([0, 0, 0, 2], h),
        ];
        assert_eq!(out.len(), 6);
        for (occ, amp) in expected {
            let got = out.amplitude_of(&ket(&occ)).unwrap();
            assert_abs_diff_eq!(got.re, amp, epsilon = 1e-12);
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_map_leaves_state_alone() {
        let state = StateVector::from_terms(
            3,
            [
                (ket(&[1, 1, 0]), Complex64::new(0.6, 0.0)),
                (ket(&[0, 0, 2]), Complex64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        let out = apply_mode_map(&state, &ModeMap::identity(3)).unwrap();
        assert!(out.max_abs_diff(&state) < 1e-15);
    }

    #[test]
    fn doubly_occupied_mode_picks_up_twice_the_phase() {
        let phi = 0.37;
        let mut m = DMatrix::identity(4, 4);
        m[(0, 0)] = Complex64::from_polar(1.0, phi);
        let map = ModeMap::new(m).unwrap();
        let out = apply_mode_map(&StateVector::basis(ket(&[2, 0, 0, 0])), &map).unwrap();
        let amp = out.amplitude_of(&ket(&[2, 0, 0, 0])).unwrap();
        assert!((amp - Complex64::from_polar(1.0, 2.0 * phi)).norm() < 1e-14);
    }

    #[test]
    fn amplitude_queries() {
        let out = apply_mode_map(&StateVector::basis(ket(&[1, 1, 0, 0])), &grover()).unwrap();
        assert_abs_diff_eq!(
            out.amplitude_of(&ket(&[0, 0, 1, 1])).unwrap().re,
            0.5,
            epsilon = 1e-12
        );
        assert_eq!(
            out.amplitude_of(&ket(&[1, 0, 0, 0])).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert_abs_diff_eq!(
            out.amplitude_of(&ket(&[2, 0, 0, 0])).unwrap().re,
            -1.0 / (2.0 * 2f64.sqrt()),
            epsilon = 1e-12
        );
        assert!(matches!(
            out.amplitude_of(&ket(&[1, 1])),
            Err(FockError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn born_rule() {
        let s = StateVector::from_terms(
            2,
            [
                (ket(&[0, 2]), c(FRAC_1_SQRT_2)),
                (ket(&[2, 0]), c(FRAC_1_SQRT_2)),
            ],
        )
        .unwrap();
        let p = s.probabilities().unwrap();
        assert_abs_diff_eq!(p[&ket(&[0, 2])], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[&ket(&[2, 0])], 0.5, epsilon = 1e-15);

        let p = StateVector::basis(ket(&[1, 1])).probabilities().unwrap();
        assert_eq!(p[&ket(&[1, 1])], 1.0);

        let uniform = StateVector::from_terms(
            4,
            (0..4).map(|m| (FockState::from_photons(4, &[m]).unwrap(), c(0.5))),
        )
        .unwrap();
        for prob in uniform.probabilities().unwrap().values() {
            assert_abs_diff_eq!(*prob, 0.25, epsilon = 1e-15);
        }

        let bad = StateVector::from_terms(2, [(ket(&[1, 1]), c(0.5))]).unwrap();
        assert!(matches!(
            bad.probabilities(),
            Err(FockError::Unnormalized { .. })
        ));
    }

    #[test]
    fn mixed_photon_numbers_are_rejected() {
        let mut s = StateVector::basis(ket(&[1, 1]));
        assert!(matches!(
            s.add_term(ket(&[1, 0]), c(1.0)),
            Err(FockError::PhotonNumberMismatch { .. })
        ));
    }

    #[test]
    fn photon_cap_is_enforced() {
        let s = StateVector::basis(ket(&[3, 2, 0, 0]));
        assert!(matches!(
            apply_mode_map(&s, &grover()),
            Err(FockError::PhotonCapExceeded { photons: 5, cap: 4 })
        ));
        assert!(apply_mode_map_capped(&s, &grover(), 5).is_ok());
        assert!(matches!(
            apply_mode_map(&StateVector::basis(ket(&[1, 1])), &grover()),
            Err(FockError::DimensionMismatch { .. })
        ));
    }

    fn merged_hom_state(phi: f64) -> StateVector {
        let psi = apply_mode_map(&StateVector::basis(ket(&[1, 1, 0, 0])), &grover()).unwrap();
        let mut m = DMatrix::identity(4, 4);
        m[(0, 0)] = Complex64::from_polar(1.0, phi);
        m[(1, 1)] = Complex64::from_polar(1.0, phi);
        let psi = apply_mode_map(&psi, &ModeMap::new(m).unwrap()).unwrap();
        let merged = merge_modes(&psi, &[MergePair::new(0, 2, 0), MergePair::new(1, 3, 1)]).unwrap();
        assert!(merged.norm_deviation < 1e-10);
        merged.state
    }

    #[test]
    fn merge_at_quarter_turn_gives_hom_state() {
        let out = merged_hom_state(PI / 2.0);
        assert_eq!(out.mode_count(), 2);
        assert!(out.amplitude_of(&ket(&[1, 1])).unwrap().norm() < 1e-14);
        assert_abs_diff_eq!(out.amplitude_of(&ket(&[2, 0])).unwrap().norm(), FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitude_of(&ket(&[0, 2])).unwrap().norm(), FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn merge_at_zero_phase_gives_pure_coincidence() {
        let out = merged_hom_state(0.0);
        assert_eq!(out.len(), 1);
        assert!((out.amplitude_of(&ket(&[1, 1])).unwrap() - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn merge_on_unpopulated_partners_is_a_relabel() {
        let s = StateVector::from_terms(
            4,
            [
                (ket(&[1, 1, 0, 0]), Complex64::new(0.6, 0.0)),
                (ket(&[2, 0, 0, 0]), Complex64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        let merged = merge_modes(&s, &[MergePair::new(0, 2, 0), MergePair::new(1, 3, 1)]).unwrap();
        assert!(merged.norm_deviation < 1e-12);
        assert_eq!(merged.state.amplitude_of(&ket(&[1, 1])).unwrap(), Complex64::new(0.6, 0.0));
        assert_eq!(merged.state.amplitude_of(&ket(&[2, 0])).unwrap(), Complex64::new(0.0, 0.8));
    }

    #[test]
    fn merge_reports_norm_change() {
        // |1010> -> a^2|0> = sqrt(2)|20>, norm^2 = 2
        let s = StateVector::basis(ket(&[1, 0, 1, 0]));
        let merged = merge_modes(&s, &[MergePair::new(0, 2, 0), MergePair::new(1, 3, 1)]).unwrap();
        assert_abs_diff_eq!(merged.norm_deviation, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn overlapping_merge_is_rejected() {
        let s = StateVector::basis(ket(&[1, 1, 0, 0]));
        assert_eq!(
            merge_modes(&s, &[MergePair::new(0, 2, 0), MergePair::new(2, 3, 1)]).unwrap_err(),
            FockError::OverlappingMerge(2)
        );
        assert_eq!(
            merge_modes(&s, &[MergePair::new(0, 2, 0), MergePair::new(1, 3, 0)]).unwrap_err(),
            FockError::OverlappingMerge(0)
        );
    }

    #[test]
    fn unmerged_modes_are_appended() {
        let s = StateVector::basis(ket(&[0, 1, 0, 1, 0]));
        let merged = merge_modes(&s, &[MergePair::new(0, 2, 0)]).unwrap();
        // output modes: merged{0,2}, 1, 3, 4
        assert_eq!(merged.state.mode_count(), 4);
        assert_eq!(
            merged.state.amplitude_of(&ket(&[0, 1, 1, 0])).unwrap(),
            c(1.0)
        );
    }

    #[test]
    fn display_formats_kets() {
        assert_eq!(ket(&[1, 1, 0, 0]).to_string(), "|1100>");
    }
}
