use grover_optics::fock::{apply_mode_map, FockState, ModeMap, StateVector};
use grover_optics::interferometers::{
    grover_mz_rates, simulate_grover_mz, wrap_angle, PhaseConfig,
};
use grover_optics::inversion::{equivalent_phases, rate_residual};
use grover_optics::sagnac::{forward_matrix, inverse_matrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

/// Unitary from the QR factor of an arbitrary complex matrix.
fn unitary(n: usize, entries: &[f64]) -> ModeMap {
    let m = DMatrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        Complex64::new(entries[k], entries[k + 1])
    });
    ModeMap::new(m.qr().q()).unwrap()
}

fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 2 * n * n)
}

fn two_photon_state(n: usize, amps: &[f64]) -> StateVector {
    let mut state = StateVector::zero(n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let ket = FockState::from_photons(n, &[i, j]).unwrap();
            state
                .add_term(ket, Complex64::new(amps[k], amps[k + 1]))
                .unwrap();
            k += 2;
        }
    }
    state.normalize().unwrap()
}

fn permanent2(u: &DMatrix<Complex64>, rows: [usize; 2], cols: [usize; 2]) -> Complex64 {
    u[(rows[0], cols[0])] * u[(rows[1], cols[1])] + u[(rows[0], cols[1])] * u[(rows[1], cols[0])]
}

fn angle() -> impl Strategy<Value = f64> {
    -std::f64::consts::PI..std::f64::consts::PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_preserves_norm_and_photon_number(
        u in entries(4),
        amps in prop::collection::vec(-1.0..1.0f64, 20),
    ) {
        let state = two_photon_state(4, &amps);
        let out = apply_mode_map(&state, &unitary(4, &u)).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert_eq!(out.photon_number(), Some(2));
    }

    #[test]
    fn evolution_respects_composition(
        u in entries(3),
        v in entries(3),
        amps in prop::collection::vec(-1.0..1.0f64, 12),
    ) {
        let state = two_photon_state(3, &amps);
        let (u, v) = (unitary(3, &u), unitary(3, &v));
        let stepwise = apply_mode_map(&apply_mode_map(&state, &u).unwrap(), &v).unwrap();
        let combined = apply_mode_map(&state, &u.then(&v).unwrap()).unwrap();
        prop_assert!(stepwise.max_abs_diff(&combined) < 1e-12);
    }

    #[test]
    fn two_photon_amplitudes_are_permanents(
        u in entries(4),
        input in (0usize..4, 0usize..4),
        output in (0usize..4, 0usize..4),
    ) {
        let map = unitary(4, &u);
        let (a, b) = (input.0.min(input.1), input.0.max(input.1));
        let (c, d) = (output.0.min(output.1), output.0.max(output.1));
        let ket_in = FockState::from_photons(4, &[a, b]).unwrap();
        let ket_out = FockState::from_photons(4, &[c, d]).unwrap();
        let out = apply_mode_map(&StateVector::basis(ket_in), &map).unwrap();
        let amp = out.amplitude_of(&ket_out).unwrap();
        // <n|U|m> = perm(U[out rows, in cols]) / sqrt(prod m! prod n!)
        let factorials = |x: usize, y: usize| if x == y { 2.0f64 } else { 1.0 };
        let expected =
            permanent2(map.matrix(), [c, d], [a, b]) / (factorials(a, b) * factorials(c, d)).sqrt();
        prop_assert!((amp - expected).norm() < 1e-12, "{amp} vs {expected}");
    }

    #[test]
    fn closed_form_rates_match_simulation(p0 in angle(), p1 in angle(), p2 in angle()) {
        let phases = PhaseConfig::new(p0, p1, p2);
        let rates = grover_mz_rates(&phases, 1.0).as_array();
        let sim = simulate_grover_mz(&phases);
        for (rate, event) in rates.iter().zip(["AC", "AD", "AB", "CD"]) {
            prop_assert!((rate - 16.0 * sim.probability(event)).abs() < 1e-9);
        }
        prop_assert!((sim.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetry_images_share_rates(p0 in angle(), p1 in angle(), p2 in angle()) {
        let phases = PhaseConfig::new(p0, p1, p2);
        let rates = grover_mz_rates(&phases, 1.0);
        for image in equivalent_phases(&phases) {
            prop_assert!(rate_residual(&rates, &image, 1.0) < 1e-12);
        }
    }

    #[test]
    fn wrapped_angles_stay_in_range(x in -1e3..1e3f64) {
        let w = wrap_angle(x);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        let turns = (x - w) / std::f64::consts::TAU;
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn sagnac_matrices_invert(x in -10.0..10.0f64, y in -10.0..10.0f64, z in -10.0..10.0f64) {
        let v = nalgebra::Vector3::new(x, y, z);
        let back = inverse_matrix() * (forward_matrix() * v);
        prop_assert!((back - v).amax() < 1e-12);
    }
}
