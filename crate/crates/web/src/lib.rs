//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string. Errors come back
//! as `{"error": {"kind", "message"}}` so the page never has to catch a throw.
//! The pairs are built in Rust from a family name and up to two parameters:
//!
//! - `"pure"`: two pure qubit states with overlap `p1`.
//! - `"counterexample"`: ρ'1 and ρ'2 of the three-state family with `a1 = p1`, `b1 = p2`.

use serde::Serialize;
use serde_json::json;
use ud_core::discrimination::{
    compare_from_scalars, evaluate_regime, ud_feasible, BoundScalars, Regime, UdProblem,
};
use ud_core::povm::{commuting_ud_povm, failure_probability, pure_state_ud_povm, simulate_ud};
use ud_core::states::{counterexample_states, PureState};
use ud_core::{DensityMatrix, Error, Tolerances};
use wasm_bindgen::prelude::*;

/// Largest trial count a single call accepts, so the page stays responsive.
pub const MAX_TRIALS: u64 = 5_000_000;
pub const MAX_POINTS: usize = 2000;
pub const MAX_COPIES: u32 = 64;

enum Pair {
    Pure(PureState, PureState),
    Mixed(DensityMatrix, DensityMatrix),
}

impl Pair {
    fn build(family: &str, p1: f64, p2: f64) -> Result<Self, Error> {
        match family {
            "pure" => {
                let (a, b) = PureState::pair_with_overlap(p1, 2)?;
                Ok(Pair::Pure(a, b))
            }
            "counterexample" => {
                let [r1, r2, _] = counterexample_states(p1, p2, 0.5, 3)?;
                Ok(Pair::Mixed(r1, r2))
            }
            other => Err(Error::RangeError(format!("unknown family {other:?}"))),
        }
    }

    fn densities(&self) -> (DensityMatrix, DensityMatrix) {
        match self {
            Pair::Pure(a, b) => (a.density(), b.density()),
            Pair::Mixed(r1, r2) => (r1.clone(), r2.clone()),
        }
    }
}

fn feasible_scalars(
    r1: &DensityMatrix,
    r2: &DensityMatrix,
    tol: &Tolerances,
) -> Result<BoundScalars, Error> {
    let witness = ud_feasible(r1, r2, tol)?;
    if !witness.feasible {
        return Err(Error::NotFeasible(witness));
    }
    BoundScalars::compute(r1, r2, tol)
}

fn to_json<T: Serialize>(result: Result<T, Error>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json("Json", &e.to_string())),
        Err(e) => error_json(e.kind(), &e.to_string()),
    }
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

#[derive(Serialize)]
pub struct Curve {
    pub n: u32,
    pub q_opt: Vec<f64>,
    pub regime: Vec<Regime>,
}

#[derive(Serialize)]
pub struct BoundCurves {
    pub scalars: BoundScalars,
    pub eta1: Vec<f64>,
    pub curves: Vec<Curve>,
}

pub fn bound_curves_impl(
    family: &str,
    p1: f64,
    p2: f64,
    n_max: u32,
    points: usize,
) -> Result<BoundCurves, Error> {
    if !(1..=MAX_COPIES).contains(&n_max) {
        return Err(Error::RangeError(format!(
            "n_max must lie in 1..={MAX_COPIES}"
        )));
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(Error::RangeError(format!(
            "points must lie in 2..={MAX_POINTS}"
        )));
    }
    let tol = Tolerances::default();
    let (r1, r2) = Pair::build(family, p1, p2)?.densities();
    let scalars = feasible_scalars(&r1, &r2, &tol)?;
    // Open interval (0, 1): endpoints are excluded priors.
    let eta1: Vec<f64> = (1..=points)
        .map(|i| i as f64 / (points + 1) as f64)
        .collect();
    let curves = (1..=n_max)
        .map(|n| {
            let evals = eta1
                .iter()
                .map(|&e| evaluate_regime(&scalars, e, n))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Curve {
                n,
                q_opt: evals.iter().map(|e| e.q_opt).collect(),
                regime: evals.iter().map(|e| e.regime).collect(),
            })
        })
        .collect::<Result<_, Error>>()?;
    Ok(BoundCurves {
        scalars,
        eta1,
        curves,
    })
}

/// `q_opt` against `eta1` for each copy count `1..=n_max`.
#[wasm_bindgen]
pub fn bound_curves(family: &str, p1: f64, p2: f64, n_max: u32, points: usize) -> String {
    to_json(bound_curves_impl(family, p1, p2, n_max, points))
}

/// Comparison of `q_opt(n)` with the single-copy bound.
#[wasm_bindgen]
pub fn compare(family: &str, p1: f64, p2: f64, eta1: f64, n: u32) -> String {
    to_json((|| {
        if !(1..=MAX_COPIES).contains(&n) {
            return Err(Error::RangeError(format!("n must lie in 1..={MAX_COPIES}")));
        }
        let tol = Tolerances::default();
        let (r1, r2) = Pair::build(family, p1, p2)?.densities();
        let scalars = feasible_scalars(&r1, &r2, &tol)?;
        compare_from_scalars(&scalars, eta1, n)
    })())
}

#[derive(Serialize)]
pub struct MonteCarlo {
    pub stats: ud_core::povm::SimulationStats,
    pub exact_failure: f64,
    pub q_opt: f64,
}

pub fn simulate_impl(
    family: &str,
    p1: f64,
    p2: f64,
    eta1: f64,
    trials: u64,
    seed: u64,
) -> Result<MonteCarlo, Error> {
    if trials > MAX_TRIALS {
        return Err(Error::RangeError(format!("at most {MAX_TRIALS} trials")));
    }
    let tol = Tolerances::default();
    let pair = Pair::build(family, p1, p2)?;
    let povm = match &pair {
        Pair::Pure(a, b) => pure_state_ud_povm(a, b, eta1, &tol)?,
        Pair::Mixed(r1, r2) => commuting_ud_povm(r1, r2, &tol)?,
    };
    let (r1, r2) = pair.densities();
    let scalars = feasible_scalars(&r1, &r2, &tol)?;
    let q_opt = evaluate_regime(&scalars, eta1, 1)?.q_opt;
    let problem = UdProblem::new(r1, r2, eta1)?;
    Ok(MonteCarlo {
        stats: simulate_ud(&problem, &povm, trials, seed)?,
        exact_failure: failure_probability(&problem, &povm)?,
        q_opt,
    })
}

/// Monte Carlo run of the UD measurement for the pair. Pure pairs use the
/// optimal pure-state measurement, the mixed family the commuting one.
#[wasm_bindgen]
pub fn simulate(family: &str, p1: f64, p2: f64, eta1: f64, trials: u32, seed: u32) -> String {
    to_json(simulate_impl(
        family,
        p1,
        p2,
        eta1,
        trials.into(),
        seed.into(),
    ))
}
