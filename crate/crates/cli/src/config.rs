use serde::{Deserialize, Serialize};
use ud_core::Tolerances;

use crate::args::{Format, GlobalArgs};
use crate::error::CliError;

/// Smallest usable cap: the Theorem 2 check works on `d² = 9`-dimensional factors.
const MIN_DIM_CAP: usize = 9;

/// Settings a report was produced with. Embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub format: Format,
    pub seed: u64,
    pub trials: u64,
}

impl RunConfig {
    pub fn from_args(g: &GlobalArgs) -> Result<Self, CliError> {
        let mut tolerances = Tolerances::default();
        if let Some(t) = g.tol_psd {
            tolerances.psd = positive("--tol-psd", t)?;
        }
        if let Some(t) = g.tol_clip {
            tolerances.clip = positive("--tol-clip", t)?;
        }
        if let Some(cap) = g.dim_cap {
            if cap < MIN_DIM_CAP {
                return Err(CliError::usage(format!(
                    "--dim-cap {cap} is below the minimum {MIN_DIM_CAP}"
                )));
            }
            tolerances.dim_cap = cap;
        }
        if g.trials == 0 {
            return Err(CliError::usage("--trials must be at least 1"));
        }
        Ok(Self {
            tolerances,
            format: g.format,
            seed: g.seed,
            trials: g.trials,
        })
    }
}

fn positive(flag: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::usage(format!(
            "{flag} must be a positive number, got {x}"
        )))
    }
}
