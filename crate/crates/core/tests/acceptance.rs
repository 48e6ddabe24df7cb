//! Acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ud_core::discrimination::{
    evaluate_regime, optimal_failure_bound, ud_feasible, Attainability, BoundOptions, BoundScalars,
    Regime, RegimeLines, UdProblem,
};
use ud_core::povm::{commuting_ud_povm, failure_probability, pure_state_ud_povm, simulate_ud};
use ud_core::programmable::{verify_theorem1, verify_theorem2, Theorem2Options};
use ud_core::states::{
    counterexample_states, density_from_mixture, random_density, random_unitary, PureState,
};
use ud_core::verify::{power_law_check, product_fidelity_check};
use ud_core::{DensityMatrix, Result, Tolerances};

const SEED: u64 = 20_240_517;
const SANDWICH_TOL: f64 = 1e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

/// Largest sandwich violation seen on any instance generated by any criterion.
#[derive(Default)]
struct Sandwich {
    instances: usize,
    worst: f64,
}

impl Sandwich {
    fn record(&mut self, violation: f64) {
        self.instances += 1;
        self.worst = self.worst.max(violation);
    }

    fn pair(
        &mut self,
        a: &DensityMatrix,
        b: &DensityMatrix,
        tol: &Tolerances,
    ) -> Result<BoundScalars> {
        let s = BoundScalars::compute(a, b, tol)?;
        self.record(s.sandwich_violation());
        Ok(s)
    }
}

fn c1_lemma1(tol: &Tolerances, sw: &mut Sandwich) -> Result<Outcome> {
    let mut worst_f: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let mut pairs = 0;
    for (dim, seed) in [(2, SEED), (3, SEED + 1)] {
        let rep = power_law_check(dim, &[1, 2, 3], 25, seed, tol)?;
        pairs += rep.samples.len() / 3;
        worst_f = worst_f.max(rep.max_fidelity_residual);
        worst_t = worst_t.max(rep.max_trace_residual);
        rep.samples
            .iter()
            .for_each(|s| sw.record(s.sandwich_violation));
    }
    Ok(Outcome {
        passed: pairs == 50 && worst_f <= 1e-8,
        detail: format!(
            "{pairs} pairs, n=1..3, max |F_in - F^n| = {worst_f:.2e} (support-trace laws, not part of this criterion: {worst_t:.2e})"
        ),
    })
}

fn c2_product(tol: &Tolerances, sw: &mut Sandwich) -> Result<Outcome> {
    let rep = product_fidelity_check(4, 50, SEED + 2, tol)?;
    rep.samples
        .iter()
        .for_each(|s| sw.record(s.sandwich_violation));
    Ok(Outcome {
        passed: rep.samples.len() == 50 && rep.max_residual <= 1e-8,
        detail: format!("50 quadruples, max residual {:.2e}", rep.max_residual),
    })
}

fn c3_fixture(tol: &Tolerances, sw: &mut Sandwich) -> Result<Outcome> {
    let [r1, r2, _] = counterexample_states(0.5, 0.5, 0.5, 3)?;
    sw.pair(&r1, &r2, tol)?;
    let problem = UdProblem::new(r1, r2, 0.5)?;
    let q1 = optimal_failure_bound(&problem, 1, tol, BoundOptions::default())?;
    let q2 = optimal_failure_bound(&problem, 2, tol, BoundOptions::default())?;
    let passed = (q1.q_opt - 0.5).abs() <= 1e-10
        && (q2.q_opt - 0.25).abs() <= 1e-10
        && q1.attainability == Attainability::Certified;
    Ok(Outcome {
        passed,
        detail: format!(
            "q(1) = {:.12}, q(2) = {:.12}, n=1 certificate {:?} (min eigenvalues {:?})",
            q1.q_opt, q2.q_opt, q1.attainability, q1.certificate_residuals
        ),
    })
}

fn random_pair(
    rng: &mut ChaCha8Rng,
    dims: std::ops::RangeInclusive<usize>,
) -> Result<(DensityMatrix, DensityMatrix)> {
    let dim = rng.random_range(dims);
    let k1 = rng.random_range(1..dim);
    let k2 = rng.random_range(1..dim);
    Ok((
        random_density(dim, k1, rng.random())?,
        random_density(dim, k2, rng.random())?,
    ))
}

fn c4_continuity(tol: &Tolerances, sw: &mut Sandwich) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut worst: f64 = 0.0;
    let mut used = 0;
    while used < 100 {
        let (r1, r2) = random_pair(&mut rng, 2..=4)?;
        let s = sw.pair(&r1, &r2, tol)?;
        if s.fidelity <= 1e-6 {
            continue;
        }
        used += 1;
        let n = rng.random_range(1..=3u32);
        let a = s.fidelity.powi(n as i32);
        for (r, pick) in [(s.t21.powi(n as i32) / a, 0), (a / s.t12.powi(n as i32), 1)] {
            let eta1 = 1.0 / (1.0 + r * r);
            let lines = RegimeLines::evaluate(&s, eta1, n);
            let outer = if pick == 0 { lines.lower } else { lines.upper };
            worst = worst.max((outer - lines.middle).abs());
        }
    }
    Ok(Outcome {
        passed: worst <= 1e-10,
        detail: format!("{used} instances, max adjacent-line gap {worst:.2e}"),
    })
}

fn weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn c5_theorem1(tol: &Tolerances, sw: &mut Sandwich) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for i in 0..20 {
        let dim = rng.random_range(2..=4usize);
        let u = random_unitary(dim, rng.random());
        let (r1, r2, povm) = if i % 2 == 0 {
            let (a, b) = PureState::pair_with_overlap(rng.random_range(0.1..0.9), dim)?;
            let a = PureState::normalized(&u * a.amplitudes())?;
            let b = PureState::normalized(&u * b.amplitudes())?;
            let povm = pure_state_ud_povm(&a, &b, 0.5, tol)?;
            (a.density(), b.density(), povm)
        } else {
            // Diagonal in a rotated basis with supports {0..k1} and {k1-1..dim},
            // which overlap in one direction and are both proper.
            let dim = dim.max(3);
            let u = random_unitary(dim, rng.random());
            let k1 = rng.random_range(2..dim);
            let cols = (0..dim)
                .map(|j| PureState::normalized(u.column(j).into_owned()))
                .collect::<Result<Vec<_>>>()?;
            let w1 = weights(&mut rng, k1);
            let w2 = weights(&mut rng, dim - k1 + 1);
            let r1 = density_from_mixture(&w1, &cols[..k1], tol)?;
            let r2 = density_from_mixture(&w2, &cols[k1 - 1..], tol)?;
            let povm = commuting_ud_povm(&r1, &r2, tol)?;
            (r1, r2, povm)
        };
        sw.pair(&r1, &r2, tol)?;
        let rep = verify_theorem1(&r1, &r2, &povm, tol)?;
        worst = worst.max(rep.max_trace_residual);
        failures += usize::from(!rep.passed);
    }
    Ok(Outcome {
        passed: failures == 0 && worst <= 1e-9,
        detail: format!(
            "20 pairs (10 pure, 10 commuting), max trace residual {worst:.2e}, {failures} failed"
        ),
    })
}

fn c6_theorem2(tol: &Tolerances) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut worst_containment: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    let mut weakest_control = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..100 {
        let [a1, b1, c1] = [(); 3].map(|_| rng.random_range(0.1..0.9));
        let rep = verify_theorem2(a1, b1, c1, Theorem2Options::default(), tol)?;
        worst_containment = worst_containment.max(rep.containment_residual);
        worst_trace = worst_trace.max(rep.trace_pi1_rho_in_1.abs());
        failures += usize::from(!rep.passed);
        let control = verify_theorem2(
            a1,
            b1,
            c1,
            Theorem2Options {
                drop_constraint: Some((1, 2)),
                ..Theorem2Options::default()
            },
            tol,
        )?;
        weakest_control = weakest_control.min(control.containment_residual);
    }
    Ok(Outcome {
        passed: failures == 0
            && worst_containment <= 1e-10
            && worst_trace <= 1e-10
            && weakest_control >= 1e-3,
        detail: format!(
            "100 triples, containment {worst_containment:.2e}, Tr(Pi1 rho1in) {worst_trace:.2e}; \
             negative control min residual {weakest_control:.2e}"
        ),
    })
}

fn c7_pure_oracle(tol: &Tolerances, sw: &mut Sandwich) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut worst: f64 = 0.0;
    let mut seen = [0usize; 3];
    for i in 0..200 {
        let s: f64 = rng.random_range(0.05..0.95);
        let dim = rng.random_range(2..=4usize);
        // Target each regime in turn through the prior ratio r.
        let r = match i % 3 {
            0 => s * rng.random_range(0.05..0.95),
            1 => s + (1.0 / s - s) * rng.random_range(0.05..0.95),
            _ => rng.random_range(1.05..20.0) / s,
        };
        let eta1 = 1.0 / (1.0 + r * r);
        let (a, b) = PureState::pair_with_overlap(s, dim)?;
        let u = random_unitary(dim, rng.random());
        let a = PureState::normalized(&u * a.amplitudes())?;
        let b = PureState::normalized(&u * b.amplitudes())?;
        let povm = pure_state_ud_povm(&a, &b, eta1, tol)?;
        let problem = UdProblem::new(a.density(), b.density(), eta1)?;
        let scalars = sw.pair(&problem.rho1, &problem.rho2, tol)?;
        let eval = evaluate_regime(&scalars, eta1, 1)?;
        match eval.regime {
            Regime::Lower => seen[0] += 1,
            Regime::Upper => seen[2] += 1,
            _ => seen[1] += 1,
        }
        worst = worst.max((failure_probability(&problem, &povm)? - eval.q_opt).abs());
    }
    Ok(Outcome {
        passed: worst <= 1e-9 && seen.iter().all(|&k| k > 0),
        detail: format!("200 samples, regimes lower/middle/upper = {seen:?}, max gap {worst:.2e}"),
    })
}

fn c8_monte_carlo(tol: &Tolerances) -> Result<Outcome> {
    let [r1, r2, _] = counterexample_states(0.5, 0.5, 0.5, 3)?;
    let povm = commuting_ud_povm(&r1, &r2, tol)?;
    let problem = UdProblem::new(r1, r2, 0.5)?;
    let stats = simulate_ud(&problem, &povm, 1_000_000, SEED + 7)?;
    let band = 4.0 * (0.25f64 / 1e6).sqrt();
    let gap = (stats.failure.rate - 0.5).abs();
    Ok(Outcome {
        passed: gap <= band && stats.error.rate == 0.0,
        detail: format!(
            "10^6 trials, failure {:.6} (|gap| {gap:.2e} vs {band:.1e}), error {}",
            stats.failure.rate, stats.error.rate
        ),
    })
}

fn c9_monotonicity(tol: &Tolerances, sw: &mut Sandwich) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut violations = Vec::new();
    let mut used = 0;
    while used < 100 {
        let r1 = random_density(4, 2, rng.random())?;
        let r2 = random_density(4, 2, rng.random())?;
        if !ud_feasible(&r1, &r2, tol)?.feasible {
            continue;
        }
        used += 1;
        let s = sw.pair(&r1, &r2, tol)?;
        let eta1: f64 = rng.random_range(0.01..0.99);
        let q: Vec<f64> = (1..=4)
            .map(|n| evaluate_regime(&s, eta1, n).map(|e| e.q_opt))
            .collect::<Result<_>>()?;
        for n in 0..3 {
            if q[n + 1] > q[n] + 1e-12 {
                violations.push((used, n + 1, q[n], q[n + 1]));
            }
        }
    }
    for (i, n, a, b) in &violations {
        println!(
            "    finding: instance {i}, q({}) = {b:.15} > q({n}) = {a:.15}",
            n + 1
        );
    }
    Ok(Outcome {
        passed: violations.is_empty(),
        detail: format!(
            "{used} instances, dim 4, ranks 2+2, n <= 4, {} violations",
            violations.len()
        ),
    })
}

fn run(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let (passed, detail) = match outcome {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let passed = passed && in_time;
    let timing = match limit {
        Some(l) => format!("{:.2}s of {}s", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{:.2}s", elapsed.as_secs_f64()),
    };
    println!(
        "{} {name}: {detail} [{timing}]",
        if passed { "PASS" } else { "FAIL" }
    );
    passed
}

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let mut sw = Sandwich::default();
    let secs = |s| Some(Duration::from_secs(s));
    let results = [
        run("1 Lemma 1 power law", secs(30), || c1_lemma1(&tol, &mut sw)),
        run("2 fidelity multiplicativity", secs(30), || {
            c2_product(&tol, &mut sw)
        }),
        run("3 fixture bound", secs(5), || c3_fixture(&tol, &mut sw)),
        run("4 boundary continuity", None, || {
            c4_continuity(&tol, &mut sw)
        }),
        run("5 Theorem 1 lifting", None, || c5_theorem1(&tol, &mut sw)),
        run("6 Theorem 2 verifier", secs(60), || c6_theorem2(&tol)),
        run("7 pure-state oracle", None, || {
            c7_pure_oracle(&tol, &mut sw)
        }),
        run("8 Monte Carlo", secs(60), || c8_monte_carlo(&tol)),
        run("9 monotonicity", None, || c9_monotonicity(&tol, &mut sw)),
        run("10 sandwich inequalities", None, || {
            Ok(Outcome {
                passed: sw.instances > 0 && sw.worst <= SANDWICH_TOL,
                detail: format!(
                    "{} instances, worst violation {:.2e}",
                    sw.instances, sw.worst
                ),
            })
        }),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
