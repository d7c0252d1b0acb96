pub mod hom_scan;
pub mod invert;
pub mod mz;
pub mod sagnac;

use crate::Failure;

pub(crate) fn missing(key: &str) -> Failure {
    Failure::Usage(format!("--{key} is required (flag or config file)"))
}
