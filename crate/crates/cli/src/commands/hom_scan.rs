use clap::Args;
use grover_optics::interferometers::wrap_angle;
use grover_optics::spectral::{
    hom_scan, QuadratureGrid, ScanRange, ScanVariable, SpectralProfile, SpectrumKind,
    DEFAULT_INTERVALS,
};

use super::missing;
use crate::config::ConfigFile;
use crate::output::{csv_row, pretty_table, sci};
use crate::{Failure, Format};

pub const KEYS: &[&str] = &[
    "phi",
    "scan",
    "fixed",
    "range",
    "spectrum",
    "bandwidth",
    "center",
    "physical-units",
    "intervals",
];

const DEFAULT_RANGE: &str = "-5:5:0.05";

#[derive(Args, Debug)]
pub struct HomScanArgs {
    /// Phase applied to the reflected pair, radians
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,

    /// Delay to scan: tau0 or dtau [default: tau0]
    #[arg(long)]
    scan: Option<String>,

    /// Value of the delay that is not scanned [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    fixed: Option<f64>,

    /// min:max:step of the scanned delay [default: -5:5:0.05]
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,

    /// sinc, gaussian or rect [default: sinc]
    #[arg(long)]
    spectrum: Option<String>,

    /// Spectral width in rad/s; requires --physical-units
    #[arg(long)]
    bandwidth: Option<f64>,

    /// Spectral center, rad/s with --physical-units, else in bandwidths [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    center: Option<f64>,

    /// Delays in seconds instead of inverse bandwidths
    #[arg(long)]
    physical_units: bool,

    /// Simpson intervals over the spectrum [default: 1024]
    #[arg(long)]
    intervals: Option<usize>,
}

pub fn run(args: HomScanArgs, config: &ConfigFile, format: Format) -> Result<String, Failure> {
    let phi = wrap_angle(args.phi.or(config.float("phi")?).ok_or_else(|| missing("phi"))?);
    let scan: ScanVariable = args
        .scan
        .or(config.string("scan")?)
        .unwrap_or_else(|| "tau0".into())
        .parse()?;
    let fixed = args.fixed.or(config.float("fixed")?).unwrap_or(0.0);
    let range: ScanRange = args
        .range
        .or(config.string("range")?)
        .unwrap_or_else(|| DEFAULT_RANGE.into())
        .parse()?;
    let kind: SpectrumKind = args
        .spectrum
        .or(config.string("spectrum")?)
        .unwrap_or_else(|| "sinc".into())
        .parse()?;
    let physical = args.physical_units || config.flag("physical-units")?.unwrap_or(false);
    let bandwidth = args.bandwidth.or(config.float("bandwidth")?);
    let center = args.center.or(config.float("center")?).unwrap_or(0.0);
    let intervals = args
        .intervals
        .or(config.usize("intervals")?)
        .unwrap_or(DEFAULT_INTERVALS);

    let spectrum = if physical {
        let bandwidth = bandwidth.ok_or_else(|| missing("bandwidth"))?;
        SpectralProfile::new(kind, center, bandwidth)?
    } else {
        if bandwidth.is_some() {
            return Err(Failure::Usage(
                "--bandwidth only applies with --physical-units".into(),
            ));
        }
        SpectralProfile::new(kind, center, 1.0)?
    };
    let points = hom_scan(phi, scan, fixed, &range, &spectrum, &QuadratureGrid { intervals })?;

    let scan_name = scan.to_string();
    Ok(match format {
        Format::Csv => {
            let mut out = csv_row(["delay", "probability", "phi", "scan_var"]);
            for p in &points {
                out.push_str(&csv_row([
                    sci(p.delay),
                    sci(p.probability),
                    sci(phi),
                    scan_name.clone(),
                ]));
            }
            out
        }
        Format::Pretty => {
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| vec![format!("{:.6}", p.delay), format!("{:.9}", p.probability)])
                .collect();
            let mut out = format!(
                "# phi = {phi:.6} rad, {} spectrum, scanning {scan_name}\n",
                kind
            );
            out.push_str(&pretty_table(&[scan_name.as_str(), "probability"], &rows));
            out
        }
    })
}
