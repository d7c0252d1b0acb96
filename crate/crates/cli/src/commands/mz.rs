use clap::Args;
use grover_optics::interferometers::{grover_mz_rates, simulate_grover_mz, PhaseConfig};

use super::missing;
use crate::config::{parse_numbers, ConfigFile};
use crate::output::{csv_row, pretty_pairs, sci};
use crate::{Failure, Format};

pub const KEYS: &[&str] = &["phi", "r0", "mode"];

/// Detector pairs reported by the simulation: the four measured
/// coincidences, the two mirror-image ones, then the doubles.
const SIMULATED_EVENTS: [&str; 10] = ["AC", "AD", "AB", "CD", "BD", "BC", "AA", "BB", "CC", "DD"];

#[derive(Args, Debug)]
pub struct MzArgs {
    /// phi0,phi1,phi2 in radians
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,

    /// Source scale; R_AB = 16 r0 at zero phase [default: 1]
    #[arg(long)]
    r0: Option<f64>,

    /// closed-form rates or a full two-photon simulation [default: closed-form]
    #[arg(long)]
    mode: Option<String>,
}

pub fn run(args: MzArgs, config: &ConfigFile, format: Format) -> Result<String, Failure> {
    let phi = args.phi.or(config.list("phi")?).ok_or_else(|| missing("phi"))?;
    let phases = PhaseConfig::from_array(parse_numbers::<3>("phi", &phi)?);
    let r0 = args.r0.or(config.float("r0")?).unwrap_or(1.0);
    if !(r0.is_finite() && r0 >= 0.0) {
        return Err(Failure::Usage(format!("--r0 must be non-negative, got {r0}")));
    }
    let mode = args
        .mode
        .or(config.string("mode")?)
        .unwrap_or_else(|| "closed-form".into());

    let (names, values): (Vec<String>, Vec<f64>) = match mode.as_str() {
        "closed-form" => {
            let rates = grover_mz_rates(&phases, r0).as_array();
            ["r_ac", "r_ad", "r_ab", "r_cd"]
                .iter()
                .map(|n| n.to_string())
                .zip(rates)
                .unzip()
        }
        "simulate" => {
            let dist = simulate_grover_mz(&phases);
            SIMULATED_EVENTS
                .iter()
                .map(|e| (format!("p_{}", e.to_ascii_lowercase()), dist.probability(e)))
                .unzip()
        }
        other => {
            return Err(Failure::Usage(format!(
                "--mode must be closed-form or simulate, got `{other}`"
            )))
        }
    };

    Ok(match format {
        Format::Csv => csv_row(&names) + &csv_row(values.iter().map(|v| sci(*v))),
        Format::Pretty => {
            let mut pairs = vec![("phases", phases.to_string())];
            if mode == "closed-form" {
                pairs.push(("r0", r0.to_string()));
            }
            pairs.extend(names.iter().map(String::as_str).zip(values.iter().map(|v| format!("{v:.12}"))));
            pretty_pairs(&pairs)
        }
    })
}
