//! POVMs, Born-rule sampling, and two closed-form UD measurements used as
//! oracles for the failure-probability formulas.
//!
//! Outcome indices follow one fixed convention everywhere: 0 is inconclusive,
//! 1 claims "state 1", 2 claims "state 2".

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::discrimination::UdProblem;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::states::{DensityMatrix, PureState};

pub const OUTCOME_LABELS: [&str; 3] = ["inconclusive", "state 1", "state 2"];

/// `||Σ Π_i − I||_F` above this rejects a POVM.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Born probabilities below this are floating-point noise and set to zero.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
const COMMUTE_TOL: f64 = 1e-9;
const BATCH_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmReport {
    pub element_count: usize,
    /// Smallest eigenvalue of each element (NaN if it could not be computed).
    #[serde(with = "crate::serde_float::vec")]
    pub min_eigenvalues: Vec<f64>,
    #[serde(with = "crate::serde_float")]
    pub completeness_residual: f64,
    /// Indices of elements that are not Hermitian or not PSD within tolerance.
    pub bad_elements: Vec<usize>,
    /// Set when elements disagree in dimension.
    pub dimension_mismatch: bool,
}

impl fmt::Display for PovmReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dimension_mismatch {
            return write!(f, "elements have inconsistent dimensions");
        }
        write!(
            f,
            "completeness residual {:.3e}, non-PSD elements {:?}",
            self.completeness_residual, self.bad_elements
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        validate_povm(elements, tol).map_err(Error::InvalidPovm)
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &CMatrix {
        &self.elements[i]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// Serialised as `{"elements": [matrix, ...]}` with each matrix in the
    /// density-file nesting `[[[re, im], ...], ...]`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PovmFile::from(self))?)
    }

    pub fn from_json(text: &str, tol: &Tolerances) -> Result<Self> {
        let file: PovmFile = serde_json::from_str(text)?;
        file.into_povm(tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmFile {
    pub elements: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&Povm> for PovmFile {
    fn from(p: &Povm) -> Self {
        let elements = p
            .elements
            .iter()
            .map(|m| {
                (0..m.nrows())
                    .map(|i| {
                        (0..m.ncols())
                            .map(|j| [m[(i, j)].re, m[(i, j)].im])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self { elements }
    }
}

impl PovmFile {
    pub fn into_povm(self, tol: &Tolerances) -> Result<Povm> {
        let mut mats = Vec::with_capacity(self.elements.len());
        for rows in &self.elements {
            let d = rows.len();
            if d == 0 || rows.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidPovm(PovmReport {
                    element_count: self.elements.len(),
                    min_eigenvalues: Vec::new(),
                    completeness_residual: f64::NAN,
                    bad_elements: Vec::new(),
                    dimension_mismatch: true,
                }));
            }
            mats.push(CMatrix::from_fn(d, d, |i, j| {
                linalg::c(rows[i][j][0], rows[i][j][1])
            }));
        }
        Povm::new(mats, tol)
    }
}

/// Checks positivity of every element and completeness `Σ Π_i = I`.
pub fn validate_povm(
    elements: Vec<CMatrix>,
    tol: &Tolerances,
) -> std::result::Result<Povm, PovmReport> {
    let mut report = PovmReport {
        element_count: elements.len(),
        min_eigenvalues: Vec::new(),
        completeness_residual: f64::NAN,
        bad_elements: Vec::new(),
        dimension_mismatch: false,
    };
    let Some(first) = elements.first() else {
        report.dimension_mismatch = true;
        return Err(report);
    };
    let dim = first.nrows();
    if elements
        .iter()
        .any(|m| m.nrows() != dim || m.ncols() != dim)
    {
        report.dimension_mismatch = true;
        return Err(report);
    }

    let mut sum = CMatrix::zeros(dim, dim);
    for (i, m) in elements.iter().enumerate() {
        sum += m;
        match linalg::hermitian_eigen(m, tol) {
            Ok(eig) => {
                let min = eig.min_eigenvalue();
                report.min_eigenvalues.push(min);
                if min < -tol.psd {
                    report.bad_elements.push(i);
                }
            }
            Err(_) => {
                report.min_eigenvalues.push(f64::NAN);
                report.bad_elements.push(i);
            }
        }
    }
    report.completeness_residual = (sum - linalg::identity(dim)).norm();
    if report.bad_elements.is_empty() && report.completeness_residual <= COMPLETENESS_TOL {
        Ok(Povm { elements })
    } else {
        Err(report)
    }
}

/// Born probabilities `p_i = Tr(Π_i ρ)`.
pub fn outcome_distribution(rho: &DensityMatrix, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            found: rho.dim(),
        });
    }
    Ok(povm
        .elements
        .iter()
        .map(|pi| {
            let p = (pi * rho.matrix()).trace().re;
            if p.abs() <= PROBABILITY_FLOOR {
                0.0
            } else {
                p.max(0.0)
            }
        })
        .collect())
}

/// Empirical rate with its binomial standard error `sqrt(p(1-p)/trials)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub std_error: f64,
}

impl RateEstimate {
    fn from_count(count: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                rate: 0.0,
                std_error: 0.0,
            };
        }
        let p = count as f64 / trials as f64;
        Self {
            rate: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationStats {
    pub seed: u64,
    pub trials: u64,
    pub outcome_labels: Vec<String>,
    /// Per-outcome counts, indexed by outcome.
    pub counts: [u64; 3],
    /// `joint_counts[truth][outcome]`, truth 0 = state 1, truth 1 = state 2.
    pub joint_counts: [[u64; 3]; 2],
    pub failure: RateEstimate,
    pub error: RateEstimate,
    pub success: RateEstimate,
}

impl SimulationStats {
    pub fn from_joint_counts(seed: u64, joint_counts: [[u64; 3]; 2]) -> Self {
        let mut counts = [0u64; 3];
        for row in &joint_counts {
            for (k, c) in row.iter().enumerate() {
                counts[k] += c;
            }
        }
        let trials: u64 = counts.iter().sum();
        let errors = joint_counts[0][2] + joint_counts[1][1];
        let successes = joint_counts[0][1] + joint_counts[1][2];
        Self {
            seed,
            trials,
            outcome_labels: OUTCOME_LABELS.iter().map(|s| s.to_string()).collect(),
            counts,
            joint_counts,
            failure: RateEstimate::from_count(counts[0], trials),
            error: RateEstimate::from_count(errors, trials),
            success: RateEstimate::from_count(successes, trials),
        }
    }

    /// Combines two independent runs. Associative and commutative.
    pub fn merge(&self, other: &Self) -> Self {
        let mut joint = self.joint_counts;
        for (t, row) in other.joint_counts.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                joint[t][k] += c;
            }
        }
        Self::from_joint_counts(self.seed, joint)
    }
}

fn sample_index(cumulative: &[f64; 3], last_positive: usize, u: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(last_positive)
}

fn cumulative(p: &[f64]) -> Result<([f64; 3], usize)> {
    let mut cum = [0.0; 3];
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        cum[i] = acc;
    }
    let last = p
        .iter()
        .rposition(|&x| x > 0.0)
        .ok_or_else(|| Error::NumericalFailure("all outcome probabilities vanish".into()))?;
    Ok((cum, last))
}

/// Monte Carlo of the UD experiment: the true state is drawn by the priors, the
/// outcome by the Born rule. Trials run in fixed-size batches, batch `b` using
/// stream `b` of a ChaCha generator keyed by `seed`.
pub fn simulate_ud(
    problem: &UdProblem,
    povm: &Povm,
    trials: u64,
    seed: u64,
) -> Result<SimulationStats> {
    if trials == 0 {
        return Err(Error::RangeError("trials must be at least 1".into()));
    }
    if povm.len() != 3 {
        return Err(Error::PreconditionFailed {
            what: "number of POVM elements (need 3)".into(),
            value: povm.len() as f64,
        });
    }
    let p1 = outcome_distribution(&problem.rho1, povm)?;
    let p2 = outcome_distribution(&problem.rho2, povm)?;
    let dists = [cumulative(&p1)?, cumulative(&p2)?];

    let batches = trials.div_ceil(BATCH_TRIALS);
    let mut total: Option<SimulationStats> = None;
    for b in 0..batches {
        let size = BATCH_TRIALS.min(trials - b * BATCH_TRIALS);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b);
        let mut joint = [[0u64; 3]; 2];
        for _ in 0..size {
            let truth = usize::from(rng.random::<f64>() >= problem.eta1);
            let (cum, last) = &dists[truth];
            let outcome = sample_index(cum, *last, rng.random::<f64>());
            joint[truth][outcome] += 1;
        }
        let stats = SimulationStats::from_joint_counts(seed, joint);
        total = Some(match total {
            None => stats,
            Some(acc) => acc.merge(&stats),
        });
    }
    Ok(total.expect("at least one batch"))
}

/// Exact failure probability `η1 Tr(Π0 ρ1) + η2 Tr(Π0 ρ2)`.
pub fn failure_probability(problem: &UdProblem, povm: &Povm) -> Result<f64> {
    let p1 = outcome_distribution(&problem.rho1, povm)?;
    let p2 = outcome_distribution(&problem.rho2, povm)?;
    Ok(problem.eta1 * p1[0] + problem.eta2 * p2[0])
}

/// `Tr(Π_i ρ_j)` for `i` in outcomes, `j` in {1, 2}.
pub fn trace_table(
    povm: &Povm,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<Vec<[f64; 2]>> {
    let a = outcome_distribution(rho1, povm)?;
    let b = outcome_distribution(rho2, povm)?;
    Ok(a.into_iter().zip(b).map(|(x, y)| [x, y]).collect())
}

/// Largest violation of the UD axioms: `max(Tr(Π1 ρ2), Tr(Π2 ρ1))`.
pub fn ud_error_traces(povm: &Povm, rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if povm.len() != 3 {
        return Err(Error::PreconditionFailed {
            what: "number of POVM elements (need 3)".into(),
            value: povm.len() as f64,
        });
    }
    let t = trace_table(povm, rho1, rho2)?;
    Ok(t[1][1].max(t[2][0]))
}

/// Optimal UD measurement for two pure states.
///
/// `Π1 ∝ |ψ2⊥><ψ2⊥|` and `Π2 ∝ |ψ1⊥><ψ1⊥|` with per-state failure rates chosen
/// by the prior ratio `r = sqrt(η2/η1)` against the overlap `s`:
/// `r <= s` projects onto `ψ2` / its complement, `r >= 1/s` onto `ψ1` / its
/// complement, and in between `q1 = s r`, `q2 = s / r`.
pub fn pure_state_ud_povm(
    psi1: &PureState,
    psi2: &PureState,
    eta1: f64,
    tol: &Tolerances,
) -> Result<Povm> {
    if psi1.dim() != psi2.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi1.dim(),
            found: psi2.dim(),
        });
    }
    if !(eta1 > 0.0 && eta1 < 1.0) {
        return Err(Error::RangeError(format!(
            "eta1 = {eta1} must lie in (0, 1)"
        )));
    }
    let inner = psi2.inner(psi1);
    let s = inner.norm();
    if !(s > 1e-12 && s < 1.0 - 1e-12) {
        return Err(Error::DegenerateOverlap { overlap: s });
    }
    let dim = psi1.dim();
    let (v1, v2): (&CVector, &CVector) = (psi1.amplitudes(), psi2.amplitudes());
    // Unit vectors orthogonal to ψ2 and to ψ1 inside span{ψ1, ψ2}.
    let perp2 = (v1 - v2 * inner).unscale((1.0 - s * s).sqrt());
    let perp1 = (v2 - v1 * inner.conj()).unscale((1.0 - s * s).sqrt());

    let r = ((1.0 - eta1) / eta1).sqrt();
    let (q1, q2) = if r <= s {
        (s * s, 1.0)
    } else if r >= 1.0 / s {
        (1.0, s * s)
    } else {
        (s * r, s / r)
    };
    let alpha = ((1.0 - q1) / (1.0 - s * s)).max(0.0);
    let beta = ((1.0 - q2) / (1.0 - s * s)).max(0.0);
    let pi1 = linalg::outer(&perp2).scale(alpha);
    let pi2 = linalg::outer(&perp1).scale(beta);
    let pi0 = linalg::identity(dim) - &pi1 - &pi2;
    Povm::new(vec![pi0, pi1, pi2], tol)
}

/// UD measurement for commuting states, built in a common eigenbasis:
/// `Π1` projects onto eigenvectors in `supp ρ1` but not `supp ρ2`, `Π2` the
/// reverse, and `Π0` is the rest.
pub fn commuting_ud_povm(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    tol: &Tolerances,
) -> Result<Povm> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            found: rho2.dim(),
        });
    }
    let residual = linalg::commutator_norm(rho1.matrix(), rho2.matrix());
    if residual > COMMUTE_TOL {
        return Err(Error::NotCommuting { residual });
    }
    let basis = common_eigenbasis(rho1.matrix(), rho2.matrix(), tol)?;
    let dim = rho1.dim();

    let diag1: Vec<f64> = (0..dim)
        .map(|j| basis.column(j).dotc(&(rho1.matrix() * basis.column(j))).re)
        .collect();
    let diag2: Vec<f64> = (0..dim)
        .map(|j| basis.column(j).dotc(&(rho2.matrix() * basis.column(j))).re)
        .collect();
    let cut1 = tol.clip_threshold(diag1.iter().fold(0.0_f64, |m, &x| m.max(x)));
    let cut2 = tol.clip_threshold(diag2.iter().fold(0.0_f64, |m, &x| m.max(x)));

    let mut pi1 = CMatrix::zeros(dim, dim);
    let mut pi2 = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let v = basis.column(j).into_owned();
        let (in1, in2) = (diag1[j] > cut1, diag2[j] > cut2);
        if in1 && !in2 {
            pi1 += linalg::outer(&v);
        } else if in2 && !in1 {
            pi2 += linalg::outer(&v);
        }
    }
    let pi0 = linalg::identity(dim) - &pi1 - &pi2;
    Povm::new(vec![pi0, pi1, pi2], tol)
}

/// Eigenbasis of `a`, refined inside each degenerate eigenspace by diagonalising `b`.
fn common_eigenbasis(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let eig = linalg::hermitian_eigen(a, tol)?;
    let dim = a.nrows();
    let scale = eig
        .max_eigenvalue()
        .abs()
        .max(eig.min_eigenvalue().abs())
        .max(1.0);
    let cluster_tol = 1e-9 * scale;
    let mut out = CMatrix::zeros(dim, dim);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (eig.eigenvalues[end - 1] - eig.eigenvalues[end]).abs() <= cluster_tol {
            end += 1;
        }
        let block = eig.eigenvectors.columns(start, end - start).into_owned();
        let restricted = block.adjoint() * b * &block;
        let restricted = (&restricted + restricted.adjoint()).scale(0.5);
        let inner = linalg::hermitian_eigen(&restricted, tol)?;
        let rotated = &block * &inner.eigenvectors;
        out.columns_mut(start, end - start).copy_from(&rotated);
        start = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrimination::{optimal_failure_bound, BoundOptions};
    use crate::linalg::diag;
    use crate::states::counterexample_states;

    fn dm(values: &[f64]) -> DensityMatrix {
        DensityMatrix::new(diag(values), &Tolerances::default()).unwrap()
    }

    fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    #[test]
    fn validation_examples() {
        let tol = Tolerances::default();
        assert!(validate_povm(vec![linalg::identity(2)], &tol).is_ok());
        let half = linalg::identity(2).scale(0.5);
        assert!(validate_povm(vec![half.clone(), half], &tol).is_ok());
        let r = validate_povm(vec![diag(&[1.0, 0.0]), diag(&[1.0, 0.0])], &tol).unwrap_err();
        assert!((r.completeness_residual - 2.0_f64.sqrt()).abs() < 1e-14);

        let r = validate_povm(vec![diag(&[2.0, 0.0]), diag(&[-1.0, 1.0])], &tol).unwrap_err();
        assert_eq!(r.bad_elements, vec![1]);

        let r = validate_povm(vec![linalg::identity(2), linalg::identity(3)], &tol).unwrap_err();
        assert!(r.dimension_mismatch);
    }

    #[test]
    fn distributions() {
        let tol = Tolerances::default();
        let rho = dm(&[0.3, 0.7]);
        let trivial = Povm::new(vec![linalg::identity(2)], &tol).unwrap();
        assert_eq!(outcome_distribution(&rho, &trivial).unwrap(), vec![1.0]);

        let proj = Povm::new(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])], &tol).unwrap();
        let p = outcome_distribution(&dm(&[0.5, 0.5]), &proj).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);

        let [r1, r2, _] = counterexample_states(0.5, 0.5, 0.5, 3).unwrap();
        let povm = commuting_ud_povm(&r1, &r2, &tol).unwrap();
        let p = outcome_distribution(&r1, &povm).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15 && p[2] == 0.0);
    }

    #[test]
    fn commuting_povm_on_counterexample_pair() {
        let tol = Tolerances::default();
        let [r1, r2, _] = counterexample_states(0.5, 0.5, 0.5, 3).unwrap();
        let povm = commuting_ud_povm(&r1, &r2, &tol).unwrap();
        assert!(max_abs_diff(povm.element(1), &diag(&[1.0, 0.0, 0.0])) < 1e-12);
        assert!(max_abs_diff(povm.element(2), &diag(&[0.0, 0.0, 1.0])) < 1e-12);
        assert!(max_abs_diff(povm.element(0), &diag(&[0.0, 1.0, 0.0])) < 1e-12);
    }

    #[test]
    fn commuting_povm_orthogonal_and_noncommuting() {
        let tol = Tolerances::default();
        let povm = commuting_ud_povm(&dm(&[0.4, 0.6, 0.0]), &dm(&[0.0, 0.0, 1.0]), &tol).unwrap();
        // Π0 vanishes on the joint support.
        let joint = diag(&[1.0, 1.0, 1.0]);
        assert!((povm.element(0) * joint).norm() < 1e-12);

        let (a, b) = PureState::pair_with_overlap(0.5, 2).unwrap();
        assert!(matches!(
            commuting_ud_povm(&a.density(), &b.density(), &tol),
            Err(Error::NotCommuting { .. })
        ));
    }

    #[test]
    fn commuting_povm_in_degenerate_rotated_basis() {
        let tol = Tolerances::default();
        let u = crate::states::random_unitary(4, 17);
        let [r1, r2, _] = crate::states::counterexample_states_in_basis(0.5, 0.5, 0.5, &u).unwrap();
        let povm = commuting_ud_povm(&r1, &r2, &tol).unwrap();
        assert!(ud_error_traces(&povm, &r1, &r2).unwrap() < 1e-10);
        let t = trace_table(&povm, &r1, &r2).unwrap();
        assert!((t[1][0] - 0.5).abs() < 1e-10);
        assert!((t[2][1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn pure_povm_matches_bound_equal_priors() {
        let tol = Tolerances::default();
        let (a, b) = PureState::pair_with_overlap(0.4, 2).unwrap();
        let povm = pure_state_ud_povm(&a, &b, 0.5, &tol).unwrap();
        let problem = UdProblem::new(a.density(), b.density(), 0.5).unwrap();
        let q = failure_probability(&problem, &povm).unwrap();
        assert!((q - 0.4).abs() < 1e-12);
        assert!(ud_error_traces(&povm, &problem.rho1, &problem.rho2).unwrap() < 1e-12);
    }

    #[test]
    fn pure_povm_clips_extreme_priors() {
        let tol = Tolerances::default();
        let s = 0.5;
        let (a, b) = PureState::pair_with_overlap(s, 3).unwrap();
        for eta1 in [0.02, 0.98] {
            let povm = pure_state_ud_povm(&a, &b, eta1, &tol).unwrap();
            let problem = UdProblem::new(a.density(), b.density(), eta1).unwrap();
            let q = failure_probability(&problem, &povm).unwrap();
            let bound = optimal_failure_bound(&problem, 1, &tol, BoundOptions::default()).unwrap();
            // The rarer state is always sacrificed: min(η1, η2) + max(η1, η2) s².
            let expected = eta1.min(1.0 - eta1) + eta1.max(1.0 - eta1) * s * s;
            assert!((q - expected).abs() < 1e-12);
            assert!((q - bound.q_opt).abs() < 1e-9);
        }
    }

    #[test]
    fn pure_povm_rejects_degenerate_overlap() {
        let tol = Tolerances::default();
        let (a, b) = PureState::pair_with_overlap(0.0, 2).unwrap();
        assert!(matches!(
            pure_state_ud_povm(&a, &b, 0.5, &tol),
            Err(Error::DegenerateOverlap { .. })
        ));
        assert!(matches!(
            pure_state_ud_povm(&a, &a, 0.5, &tol),
            Err(Error::DegenerateOverlap { .. })
        ));
    }

    #[test]
    fn simulation_is_deterministic_and_error_free() {
        let tol = Tolerances::default();
        let [r1, r2, _] = counterexample_states(0.5, 0.5, 0.5, 3).unwrap();
        let povm = commuting_ud_povm(&r1, &r2, &tol).unwrap();
        let problem = UdProblem::new(r1, r2, 0.5).unwrap();
        let a = simulate_ud(&problem, &povm, 100_000, 42).unwrap();
        let b = simulate_ud(&problem, &povm, 100_000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.error.rate, 0.0);
        assert_eq!(a.counts.iter().sum::<u64>(), 100_000);
        assert!((a.failure.rate - 0.5).abs() < 4.0 * (0.25_f64 / 1e5).sqrt());
        assert_ne!(simulate_ud(&problem, &povm, 100_000, 43).unwrap(), a);
    }

    #[test]
    fn merge_is_commutative() {
        let x = SimulationStats::from_joint_counts(1, [[1, 2, 3], [4, 5, 6]]);
        let y = SimulationStats::from_joint_counts(1, [[6, 0, 1], [0, 2, 9]]);
        assert_eq!(x.merge(&y), y.merge(&x));
        assert_eq!(x.merge(&y).trials, 39);
    }

    #[test]
    fn povm_json_round_trip() {
        let tol = Tolerances::default();
        let (a, b) = PureState::pair_with_overlap(0.3, 2).unwrap();
        let povm = pure_state_ud_povm(&a, &b, 0.5, &tol).unwrap();
        let back = Povm::from_json(&povm.to_json().unwrap(), &tol).unwrap();
        assert_eq!(back, povm);
        let bad = r#"{"elements": [[[[1,0],[0,0]],[[0,0],[0,0]]]]}"#;
        assert!(matches!(
            Povm::from_json(bad, &tol),
            Err(Error::InvalidPovm(_))
        ));
    }
}
