use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use ud_core::discrimination::{
    compare_bounds, compare_from_scalars, evaluate_regime, optimal_failure_bound, ud_feasible,
    BoundOptions, BoundScalars, Regime, UdProblem, Verdict,
};
use ud_core::povm::{
    commuting_ud_povm, failure_probability, pure_state_ud_povm, simulate_ud, ud_error_traces, Povm,
    SimulationStats,
};
use ud_core::programmable::{
    compose_instance, lift_povm, verify_theorem1, verify_theorem2, Theorem2Options,
};
use ud_core::states::{counterexample_states, random_density, PureState};
use ud_core::verify::{power_law_check, product_fidelity_check};
use ud_core::{DensityMatrix, Error, Tolerances};

use crate::args::{
    BoundArgs, GenArgs, GenKind, PairArgs, PovmArgs, PovmSource, SimulateArgs, SweepArgs,
    VerifyTarget,
};
use crate::config::RunConfig;
use crate::error::CliError;

/// A rendered report and whether it records a verification finding.
pub struct Outcome {
    pub report: Value,
    pub finding: Option<String>,
}

impl Outcome {
    fn ok<T: Serialize>(report: &T) -> Result<Self, CliError> {
        Ok(Self {
            report: serde_json::to_value(report)?,
            finding: None,
        })
    }

    fn checked<T: Serialize>(report: &T, passed: bool, what: &str) -> Result<Self, CliError> {
        Ok(Self {
            report: serde_json::to_value(report)?,
            finding: (!passed).then(|| format!("{what}: residuals exceed tolerance")),
        })
    }
}

fn read_state(path: &Path, tol: &Tolerances) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(DensityMatrix::from_json(&text, tol)?)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_pair(p: &PairArgs, tol: &Tolerances) -> Result<(DensityMatrix, DensityMatrix), CliError> {
    Ok((read_state(&p.state1, tol)?, read_state(&p.state2, tol)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenReport {
    pub kind: String,
    pub files: Vec<PathBuf>,
    pub labels: Vec<Option<String>>,
}

pub fn gen(args: &GenArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (kind, states): (&str, Vec<DensityMatrix>) = match &args.kind {
        GenKind::Counterexample { a1, b1, c1, dim } => (
            "counterexample",
            counterexample_states(*a1, *b1, *c1, *dim)?.into(),
        ),
        GenKind::Random { dim, rank, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let states = (0..*count)
                .map(|i| {
                    random_density(*dim, *rank, rng.random())
                        .map(|r| r.with_label(format!("random {}", i + 1)))
                })
                .collect::<Result<_, _>>()?;
            ("random", states)
        }
        GenKind::PurePair { overlap, dim } => {
            let (a, b) = PureState::pair_with_overlap(*overlap, *dim)?;
            (
                "pure_pair",
                vec![
                    a.density().with_label("psi1"),
                    b.density().with_label("psi2"),
                ],
            )
        }
    };
    fs::create_dir_all(&args.out_dir).map_err(|source| CliError::Io {
        path: args.out_dir.clone(),
        source,
    })?;
    let mut files = Vec::new();
    for (i, rho) in states.iter().enumerate() {
        let path = args.out_dir.join(format!("{}{}.json", args.prefix, i + 1));
        write_file(&path, &rho.to_json()?)?;
        files.push(path);
    }
    Outcome::ok(&GenReport {
        kind: kind.into(),
        files,
        labels: states
            .iter()
            .map(|r| r.label().map(str::to_owned))
            .collect(),
    })
}

pub fn bound(args: &BoundArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = &cfg.tolerances;
    let (r1, r2) = read_pair(&args.pair, tol)?;
    let problem = UdProblem::new(r1, r2, args.pair.eta1)?;
    let options = BoundOptions {
        certify: !args.no_certify,
        require_trivial_intersection: args.strict_supports,
    };
    Outcome::ok(&optimal_failure_bound(&problem, args.pair.n, tol, options)?)
}

pub fn compare(args: &PairArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = &cfg.tolerances;
    let (r1, r2) = read_pair(args, tol)?;
    let problem = UdProblem::new(r1, r2, args.eta1)?;
    Outcome::ok(&compare_bounds(&problem, args.n, tol)?)
}

fn build_povm(
    source: &PovmArgs,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    eta1: f64,
    tol: &Tolerances,
) -> Result<Povm, CliError> {
    match source.povm {
        PovmSource::Pure => {
            let a = PureState::from_density(rho1, tol)?;
            let b = PureState::from_density(rho2, tol)?;
            Ok(pure_state_ud_povm(&a, &b, eta1, tol)?)
        }
        PovmSource::Commuting => Ok(commuting_ud_povm(rho1, rho2, tol)?),
        PovmSource::File => {
            let path = source
                .povm_file
                .as_ref()
                .ok_or_else(|| CliError::usage("--povm file needs --povm-file"))?;
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(Povm::from_json(&text, tol)?)
        }
    }
}

pub fn verify(target: &VerifyTarget, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = &cfg.tolerances;
    match target {
        VerifyTarget::Theorem1 {
            state1,
            state2,
            povm,
            eta1,
        } => {
            let r1 = read_state(state1, tol)?;
            let r2 = read_state(state2, tol)?;
            let m = build_povm(povm, &r1, &r2, *eta1, tol)?;
            let rep = verify_theorem1(&r1, &r2, &m, tol)?;
            Outcome::checked(&rep, rep.passed, "theorem1")
        }
        VerifyTarget::Theorem2 {
            a1,
            b1,
            c1,
            dim,
            drop_constraint,
        } => {
            let options = Theorem2Options {
                dim: *dim,
                drop_constraint: *drop_constraint,
            };
            let rep = verify_theorem2(*a1, *b1, *c1, options, tol)?;
            Outcome::checked(&rep, rep.passed, "theorem2")
        }
        VerifyTarget::Lemma1 { dim, n, seeds } => {
            if *n == 0 {
                return Err(Error::RangeError("--n must be at least 1".into()).into());
            }
            let ns: Vec<u32> = (1..=*n).collect();
            let rep = power_law_check(*dim, &ns, *seeds, cfg.seed, tol)?;
            // Lemma 1 is the fidelity law; the support-trace laws are reported
            // alongside but do not decide the exit status.
            Outcome::checked(&rep, rep.fidelity_law_passed, "lemma1")
        }
        VerifyTarget::Eq16 { dim, seeds } => {
            let rep = product_fidelity_check(*dim, *seeds, cfg.seed, tol)?;
            Outcome::checked(&rep, rep.passed, "eq16")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub povm: PovmSource,
    /// Data copies in the simulated pair; 0 means the bare pair.
    pub data_copies: u32,
    pub dim: usize,
    pub eta1: f64,
    pub stats: SimulationStats,
    /// Failure probability of the measurement, from the Born rule.
    pub exact_failure: f64,
    /// `max(Tr(Π1 ρ2), Tr(Π2 ρ1))`; zero for a UD measurement.
    pub exact_error_trace: f64,
    /// `(empirical − exact) / std_error`; absent when the standard error is zero.
    pub deviation_sigmas: Option<f64>,
    /// Optimal failure probability for the same copy count, when the pair is feasible.
    pub analytic_bound: Option<f64>,
    /// `exact_failure − analytic_bound`; zero when the measurement is optimal.
    pub gap_to_bound: Option<f64>,
}

pub fn simulate(args: &SimulateArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = &cfg.tolerances;
    let eta1 = args.pair.eta1;
    let (r1, r2) = read_pair(&args.pair, tol)?;
    let base_povm = build_povm(&args.povm, &r1, &r2, eta1, tol)?;

    let (problem, povm, copies) = if args.composed {
        let n = args.pair.n;
        let inst = compose_instance(&r1, &r2, n, tol)?;
        let prefix = inst.total_dim / r1.dim();
        let lifted = lift_povm(&base_povm, prefix, tol)?;
        (
            UdProblem::new(inst.rho_in_1, inst.rho_in_2, eta1)?,
            lifted,
            n,
        )
    } else {
        (UdProblem::new(r1.clone(), r2.clone(), eta1)?, base_povm, 0)
    };

    let stats = simulate_ud(&problem, &povm, cfg.trials, cfg.seed)?;
    let exact_failure = failure_probability(&problem, &povm)?;
    let exact_error_trace = ud_error_traces(&povm, &problem.rho1, &problem.rho2)?;
    let deviation_sigmas = (stats.failure.std_error > 0.0)
        .then(|| (stats.failure.rate - exact_failure) / stats.failure.std_error);

    let base = UdProblem::new(r1, r2, eta1)?;
    let options = BoundOptions {
        certify: false,
        require_trivial_intersection: false,
    };
    let analytic_bound = match optimal_failure_bound(&base, copies.max(1), tol, options) {
        Ok(rep) => Some(rep.q_opt),
        Err(Error::NotFeasible(_)) => None,
        Err(e) => return Err(e.into()),
    };

    Outcome::ok(&SimulationReport {
        povm: args.povm.povm,
        data_copies: copies,
        dim: problem.rho1.dim(),
        eta1,
        stats,
        exact_failure,
        exact_error_trace,
        deviation_sigmas,
        analytic_bound,
        gap_to_bound: analytic_bound.map(|q| exact_failure - q),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub seed: u64,
    pub eta1: f64,
    pub fidelity: f64,
    pub t21: f64,
    pub t12: f64,
    pub support_intersection_dim: usize,
    /// `q_opt` keyed by copy count.
    pub q_opt: BTreeMap<u32, f64>,
    pub regime: BTreeMap<u32, Regime>,
    /// Comparison of `q_opt(n_max)` with `q_opt(1)`.
    pub verdict: Verdict,
    pub monotonicity_violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub dim: usize,
    pub rank1: usize,
    pub rank2: usize,
    pub n_max: u32,
    pub count: usize,
    pub monotonicity_margin: f64,
    pub monotonicity_violations: usize,
    pub rows: Vec<SweepRow>,
}

const MONOTONICITY_MARGIN: f64 = 1e-12;

pub fn sweep(args: &SweepArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = &cfg.tolerances;
    let range = |msg: String| CliError::Core(Error::RangeError(msg));
    if args.rank1 == 0 || args.rank2 == 0 {
        return Err(range("ranks must be at least 1".into()));
    }
    if args.rank1 + args.rank2 > args.dim {
        return Err(range(format!(
            "rank1 + rank2 = {} exceeds dim {}; supports cannot intersect trivially",
            args.rank1 + args.rank2,
            args.dim
        )));
    }
    if args.n_max == 0 {
        return Err(range("--n-max must be at least 1".into()));
    }
    if let Some(eta1) = args.eta1 {
        if !(eta1 > 0.0 && eta1 < 1.0) {
            return Err(range(format!("eta1 = {eta1} must lie in (0, 1)")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(args.count);
    for index in 0..args.count {
        let seed: u64 = rng.random();
        let drawn_eta1 = rng.random_range(0.01..0.99);
        let eta1 = args.eta1.unwrap_or(drawn_eta1);
        let mut local = ChaCha8Rng::seed_from_u64(seed);
        let r1 = random_density(args.dim, args.rank1, local.random())?;
        let r2 = random_density(args.dim, args.rank2, local.random())?;
        let witness = ud_feasible(&r1, &r2, tol)?;
        if !witness.feasible {
            return Err(Error::NotFeasible(witness).into());
        }
        let scalars = BoundScalars::compute(&r1, &r2, tol)?;
        let mut q_opt = BTreeMap::new();
        let mut regime = BTreeMap::new();
        for n in 1..=args.n_max {
            let eval = evaluate_regime(&scalars, eta1, n)?;
            q_opt.insert(n, eval.q_opt);
            regime.insert(n, eval.regime);
        }
        let values: Vec<f64> = q_opt.values().copied().collect();
        let monotonicity_violation = values.windows(2).any(|w| w[1] > w[0] + MONOTONICITY_MARGIN);
        let verdict = compare_from_scalars(&scalars, eta1, args.n_max)?.verdict;
        rows.push(SweepRow {
            index,
            seed,
            eta1,
            fidelity: scalars.fidelity,
            t21: scalars.t21,
            t12: scalars.t12,
            support_intersection_dim: witness.intersection_dim(),
            q_opt,
            regime,
            verdict,
            monotonicity_violation,
        });
    }
    let violations = rows.iter().filter(|r| r.monotonicity_violation).count();
    let report = SweepReport {
        dim: args.dim,
        rank1: args.rank1,
        rank2: args.rank2,
        n_max: args.n_max,
        count: args.count,
        monotonicity_margin: MONOTONICITY_MARGIN,
        monotonicity_violations: violations,
        rows,
    };
    Outcome::checked(&report, violations == 0, "sweep monotonicity")
}
