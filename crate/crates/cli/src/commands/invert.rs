use std::path::{Path, PathBuf};

use clap::Args;
use grover_optics::interferometers::CoincidenceRates;
use grover_optics::inversion::{
    brute_force_invert, calibrate_with_tolerance, invert_rates_with, invert_special_case,
    CalibrationRecord, InversionError, InversionOptions, PhaseSolution,
    DEFAULT_CALIBRATION_TOLERANCE, DEFAULT_RESIDUAL_TOLERANCE,
};

use super::missing;
use crate::config::{parse_numbers, ConfigFile};
use crate::output::{csv_row, pretty_pairs, pretty_table, sci};
use crate::{Failure, Format};

pub const KEYS: &[&str] = &[
    "rates",
    "calibration",
    "r0",
    "solve-r0",
    "special-case",
    "brute-force-check",
    "tolerance",
];

/// Grid spacing of the brute-force cross-check, radians.
pub const CHECK_GRID_STEP: f64 = 0.05;
/// Fits from the two searches are matched within this distance, radians.
const CHECK_MATCH: f64 = 1e-4;

#[derive(Args, Debug)]
pub struct InvertArgs {
    /// Measured R_AC,R_AD,R_AB,R_CD
    #[arg(long, allow_hyphen_values = true)]
    rates: Option<String>,

    /// TOML file with the zero-phase rates r_ac, r_ad, r_ab, r_cd
    #[arg(long)]
    calibration: Option<PathBuf>,

    /// Known source scale, instead of a calibration file
    #[arg(long)]
    r0: Option<f64>,

    /// Fit r0 together with the phases
    #[arg(long)]
    solve_r0: bool,

    /// Use the closed form for phi1 = phi2 data
    #[arg(long)]
    special_case: bool,

    /// Repeat the inversion with an exhaustive grid search and compare
    #[arg(long)]
    brute_force_check: bool,

    /// Accepted RMS rate mismatch relative to 16 r0 [default: 1e-6]
    #[arg(long)]
    tolerance: Option<f64>,
}

pub fn read_calibration(path: &Path) -> Result<CalibrationRecord, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read calibration {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| Failure::Usage(format!("bad calibration {}: {e}", path.display())))?;
    let get = |key: &str| -> Result<f64, Failure> {
        match table.get(key) {
            Some(toml::Value::Float(x)) => Ok(*x),
            Some(toml::Value::Integer(n)) => Ok(*n as f64),
            _ => Err(Failure::Usage(format!(
                "calibration {}: `{key}` must be a number",
                path.display()
            ))),
        }
    };
    let rates = CoincidenceRates::new(get("r_ac")?, get("r_ad")?, get("r_ab")?, get("r_cd")?);
    let tolerance = match table.get("tolerance") {
        None => DEFAULT_CALIBRATION_TOLERANCE,
        Some(_) => get("tolerance")?,
    };
    Ok(calibrate_with_tolerance(&rates, tolerance)?)
}

/// Calibration from a file or a known `r0`; `None` when neither is given.
pub fn resolve_calibration(
    file: Option<PathBuf>,
    r0: Option<f64>,
) -> Result<Option<CalibrationRecord>, Failure> {
    match (file, r0) {
        (Some(_), Some(_)) => Err(Failure::Usage(
            "give either --calibration or --r0, not both".into(),
        )),
        (Some(path), None) => read_calibration(&path).map(Some),
        (None, Some(r0)) if r0.is_finite() && r0 > 0.0 => Ok(Some(CalibrationRecord::from_r0(r0))),
        (None, Some(r0)) => Err(Failure::Usage(format!("--r0 must be positive, got {r0}"))),
        (None, None) => Ok(None),
    }
}

pub fn run(args: InvertArgs, config: &ConfigFile, format: Format) -> Result<String, Failure> {
    let rates = args.rates.or(config.list("rates")?).ok_or_else(|| missing("rates"))?;
    let rates = CoincidenceRates::from_array(parse_numbers::<4>("rates", &rates)?);
    let calibration = resolve_calibration(
        args.calibration.or(config.string("calibration")?.map(PathBuf::from)),
        args.r0.or(config.float("r0")?),
    )?;
    let solve_r0 = args.solve_r0 || config.flag("solve-r0")?.unwrap_or(false);
    let special = args.special_case || config.flag("special-case")?.unwrap_or(false);
    let check = args.brute_force_check || config.flag("brute-force-check")?.unwrap_or(false);
    let tolerance = args
        .tolerance
        .or(config.float("tolerance")?)
        .unwrap_or(DEFAULT_RESIDUAL_TOLERANCE);

    if special {
        return special_case_report(&rates, format);
    }
    if calibration.is_none() && !solve_r0 {
        return Err(Failure::Usage(
            "give --calibration, --r0 or --solve-r0".into(),
        ));
    }
    let options = InversionOptions {
        solve_r0,
        residual_tolerance: tolerance,
        ..InversionOptions::default()
    };
    let (solution, failure) = match invert_rates_with(&rates, calibration.as_ref(), &options) {
        Ok(s) => (s, None),
        Err(InversionError::NoSolution(best)) => {
            let message = format!(
                "no phases reproduce the rates: residual {:e} exceeds tolerance",
                best.residual
            );
            (*best, Some(Failure::Inversion(message)))
        }
        Err(e) => return Err(e.into()),
    };

    let verdict = if check && failure.is_none() {
        let reference = calibration
            .clone()
            .unwrap_or_else(|| CalibrationRecord::from_r0(solution.r0));
        let grid = match brute_force_invert(&rates, &reference, CHECK_GRID_STEP) {
            Ok(g) => g,
            Err(InversionError::NoSolution(g)) => *g,
            Err(e) => return Err(e.into()),
        };
        let agrees = grid
            .candidates
            .iter()
            .all(|c| solution.contains(&c.phases, CHECK_MATCH));
        Some(agrees)
    } else {
        None
    };

    let report = solution_report(&solution, verdict, format);
    match (failure, verdict) {
        (Some(f), _) => Err(Failure::WithReport {
            report,
            source: Box::new(f),
        }),
        (None, Some(false)) => Err(Failure::WithReport {
            report,
            source: Box::new(Failure::Inversion(
                "grid search found fits the solver missed".into(),
            )),
        }),
        _ => Ok(report),
    }
}

fn special_case_report(rates: &CoincidenceRates, format: Format) -> Result<String, Failure> {
    let s = invert_special_case(rates)?;
    let values = [
        s.phi0,
        s.phi1,
        s.phi1,
        s.lambda1,
        s.lambda2,
        s.cos_phi1_roots[0],
        s.cos_phi1_roots[1],
    ];
    let names = [
        "phi0",
        "phi1",
        "phi2",
        "lambda1",
        "lambda2",
        "cos_phi1",
        "cos_phi1_other_root",
    ];
    Ok(match format {
        Format::Csv => csv_row(names) + &csv_row(values.map(sci)),
        Format::Pretty => {
            let mut pairs: Vec<(&str, String)> = names
                .iter()
                .zip(values)
                .map(|(n, v)| (*n, format!("{v:.12}")))
                .collect();
            pairs.push(("method", "closed form, phi1 = phi2".into()));
            pretty_pairs(&pairs)
        }
    })
}

fn check_label(verdict: Option<bool>) -> &'static str {
    match verdict {
        None => "skipped",
        Some(true) => "agree",
        Some(false) => "disagree",
    }
}

fn solution_report(solution: &PhaseSolution, verdict: Option<bool>, format: Format) -> String {
    let flags = [
        solution.sign_ambiguous[0],
        solution.sign_ambiguous[1],
        solution.sign_ambiguous[2],
        solution.exchange_ambiguous,
        solution.theta_ambiguous,
    ];
    match format {
        Format::Csv => {
            let mut out = csv_row([
                "candidate",
                "phi0",
                "phi1",
                "phi2",
                "r0",
                "residual",
                "converged",
                "sign_ambiguous_phi0",
                "sign_ambiguous_phi1",
                "sign_ambiguous_phi2",
                "exchange_ambiguous",
                "theta_ambiguous",
                "brute_force_check",
            ]);
            let primary = std::iter::once((solution.phases, solution.r0, solution.residual));
            let others = solution
                .candidates
                .iter()
                .filter(|c| c.phases != solution.phases)
                .map(|c| (c.phases, c.r0, c.residual));
            for (i, (p, r0, residual)) in primary.chain(others).enumerate() {
                let mut row = vec![
                    i.to_string(),
                    sci(p.phi0),
                    sci(p.phi1),
                    sci(p.phi2),
                    sci(r0),
                    sci(residual),
                    solution.converged.to_string(),
                ];
                row.extend(flags.iter().map(|f| f.to_string()));
                row.push(check_label(verdict).into());
                out.push_str(&csv_row(row));
            }
            out
        }
        Format::Pretty => {
            let ambiguous: Vec<&str> = ["phi0", "phi1", "phi2"]
                .iter()
                .zip(solution.sign_ambiguous)
                .filter(|(_, f)| *f)
                .map(|(n, _)| *n)
                .collect();
            let mut out = pretty_pairs(&[
                ("phi0", format!("{:.9}", solution.phases.phi0)),
                ("phi1", format!("{:.9}", solution.phases.phi1)),
                ("phi2", format!("{:.9}", solution.phases.phi2)),
                ("r0", format!("{:.9}", solution.r0)),
                ("residual", format!("{:.3e}", solution.residual)),
                ("converged", solution.converged.to_string()),
                (
                    "sign ambiguous",
                    if ambiguous.is_empty() {
                        "none".into()
                    } else {
                        ambiguous.join(" ")
                    },
                ),
                ("phi1/phi2 exchange ambiguous", solution.exchange_ambiguous.to_string()),
                ("sign of 2phi0+phi1-phi2 ambiguous", solution.theta_ambiguous.to_string()),
                ("brute-force check", check_label(verdict).into()),
            ]);
            out.push_str(&format!("\n{} equivalent fits:\n", solution.candidates.len()));
            let rows: Vec<Vec<String>> = solution
                .candidates
                .iter()
                .map(|c| {
                    vec![
                        format!("{:.9}", c.phases.phi0),
                        format!("{:.9}", c.phases.phi1),
                        format!("{:.9}", c.phases.phi2),
                        format!("{:.3e}", c.residual),
                    ]
                })
                .collect();
            out.push_str(&pretty_table(&["phi0", "phi1", "phi2", "residual"], &rows));
            out
        }
    }
}
