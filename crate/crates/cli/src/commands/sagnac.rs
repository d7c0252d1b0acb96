use std::path::PathBuf;

use clap::Args;
use grover_optics::interferometers::{grover_mz_rates, CoincidenceRates};
use grover_optics::inversion::CalibrationRecord;
use grover_optics::sagnac::{
    phases_from_rotation, reconstruct_rotation, RotationRates, SagnacGeometry,
};

use super::invert::resolve_calibration;
use crate::config::{parse_numbers, ConfigFile};
use crate::output::{csv_row, pretty_pairs, pretty_table, sci};
use crate::{Failure, Format};

pub const KEYS: &[&str] = &[
    "areas",
    "wavelength",
    "radius",
    "omega",
    "rates",
    "r0",
    "calibration",
];

const DEFAULT_WAVELENGTH: f64 = 1550e-9;

#[derive(Args, Debug)]
pub struct SagnacArgs {
    /// Projected loop areas A_x,A_y,A_z in m² [default: 1,1,1]
    #[arg(long)]
    areas: Option<String>,

    /// Wavelength in m [default: 1.55e-6]
    #[arg(long)]
    wavelength: Option<f64>,

    /// Loop radius in m, enables the slow-rotation check
    #[arg(long)]
    radius: Option<f64>,

    /// Forward mode: rotation rates omega_x,omega_y,omega_z in rad/s
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,

    /// Inverse mode: measured R_AC,R_AD,R_AB,R_CD
    #[arg(long, allow_hyphen_values = true)]
    rates: Option<String>,

    /// Source scale [default: 1]
    #[arg(long)]
    r0: Option<f64>,

    /// TOML file with the zero-phase rates, instead of --r0
    #[arg(long)]
    calibration: Option<PathBuf>,
}

pub fn run(args: SagnacArgs, config: &ConfigFile, format: Format) -> Result<String, Failure> {
    let areas = args
        .areas
        .or(config.list("areas")?)
        .unwrap_or_else(|| "1,1,1".into());
    let geometry = SagnacGeometry::new(
        parse_numbers::<3>("areas", &areas)?,
        args.wavelength
            .or(config.float("wavelength")?)
            .unwrap_or(DEFAULT_WAVELENGTH),
        args.radius.or(config.float("radius")?),
    )?;
    let calibration = resolve_calibration(
        args.calibration.or(config.string("calibration")?.map(PathBuf::from)),
        args.r0.or(config.float("r0")?),
    )?
    .unwrap_or_else(|| CalibrationRecord::from_r0(1.0));
    let omega = args.omega.or(config.list("omega")?);
    let rates = args.rates.or(config.list("rates")?);

    match (omega, rates) {
        (Some(omega), None) => {
            let omega = RotationRates::from_array(parse_numbers::<3>("omega", &omega)?);
            if let Some(warning) = omega.slow_rotation_warning(&geometry) {
                eprintln!("warning: {warning}");
            }
            Ok(forward(&omega, &geometry, calibration.r0, format))
        }
        (None, Some(rates)) => {
            let rates = CoincidenceRates::from_array(parse_numbers::<4>("rates", &rates)?);
            inverse(&rates, &calibration, &geometry, format)
        }
        (Some(_), Some(_)) => Err(Failure::Usage(
            "give either --omega (forward) or --rates (inverse), not both".into(),
        )),
        (None, None) => Err(Failure::Usage(
            "give --omega (forward) or --rates (inverse)".into(),
        )),
    }
}

fn forward(omega: &RotationRates, geometry: &SagnacGeometry, r0: f64, format: Format) -> String {
    let phases = phases_from_rotation(omega, geometry);
    let rates = grover_mz_rates(&phases, r0).as_array();
    let names = ["phi0", "phi1", "phi2", "r_ac", "r_ad", "r_ab", "r_cd"];
    let values: Vec<f64> = phases.as_array().into_iter().chain(rates).collect();
    match format {
        Format::Csv => csv_row(names) + &csv_row(values.iter().map(|v| sci(*v))),
        Format::Pretty => {
            let pairs: Vec<(&str, String)> = names
                .iter()
                .zip(&values)
                .map(|(n, v)| (*n, format!("{v:.12}")))
                .collect();
            pretty_pairs(&pairs)
        }
    }
}

fn inverse(
    rates: &CoincidenceRates,
    calibration: &CalibrationRecord,
    geometry: &SagnacGeometry,
    format: Format,
) -> Result<String, Failure> {
    let rec = reconstruct_rotation(rates, calibration, geometry)?;
    if let Some(warning) = rec.rates.slow_rotation_warning(geometry) {
        eprintln!("warning: {warning}");
    }
    let flags = rec.direction_ambiguous;
    Ok(match format {
        Format::Csv => {
            let mut out = csv_row([
                "candidate",
                "omega_x",
                "omega_y",
                "omega_z",
                "direction_ambiguous_x",
                "direction_ambiguous_y",
                "direction_ambiguous_z",
            ]);
            let others = rec.candidates.iter().filter(|c| **c != rec.rates);
            for (i, w) in std::iter::once(&rec.rates).chain(others).enumerate() {
                let mut row = vec![i.to_string()];
                row.extend(w.as_array().map(sci));
                row.extend(flags.map(|f| f.to_string()));
                out.push_str(&csv_row(row));
            }
            out
        }
        Format::Pretty => {
            let [mx, my, mz] = rec.rates.magnitudes();
            let ambiguous: Vec<&str> = ["x", "y", "z"]
                .iter()
                .zip(flags)
                .filter(|(_, f)| *f)
                .map(|(n, _)| *n)
                .collect();
            let mut out = pretty_pairs(&[
                ("|omega_x| (rad/s)", format!("{mx:.9e}")),
                ("|omega_y| (rad/s)", format!("{my:.9e}")),
                ("|omega_z| (rad/s)", format!("{mz:.9e}")),
                (
                    "direction unknown on",
                    if ambiguous.is_empty() {
                        "none".into()
                    } else {
                        ambiguous.join(" ")
                    },
                ),
                ("phase residual", format!("{:.3e}", rec.phases.residual)),
            ]);
            out.push_str(&format!("\n{} rotations fit the rates:\n", rec.candidates.len()));
            let rows: Vec<Vec<String>> = rec
                .candidates
                .iter()
                .map(|w| w.as_array().iter().map(|v| format!("{v:.9e}")).collect())
                .collect();
            out.push_str(&pretty_table(&["omega_x", "omega_y", "omega_z"], &rows));
            out
        }
    })
}
