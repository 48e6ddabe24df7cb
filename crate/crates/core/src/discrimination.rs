//! Fidelity, supports, UD feasibility and the optimal failure probability of
//! unambiguously discriminating the composed pair
//! `ρ1 ⊗ ρ2 ⊗ ρ1^{⊗n}` vs `ρ1 ⊗ ρ2 ⊗ ρ2^{⊗n}`.
//!
//! The bound depends on three base scalars only: the fidelity `F = F(ρ1, ρ2)`,
//! `t21 = Tr(P2 ρ1)` and `t12 = Tr(P1 ρ2)`, where `P_i` projects onto the support
//! of `ρ_i`. With `r = sqrt(η2/η1)` and composed quantities `A = F^n`,
//! `T21 = t21^n`, `T12 = t12^n`, the three regimes are
//!
//! ```text
//! r <= T21/A          Q = η2 A²/T21 + η1 T21
//! T21/A <= r <= A/T12 Q = 2 sqrt(η1 η2) A
//! A/T12 <= r          Q = η1 A²/T12 + η2 T12
//! ```
//!
//! and each line is optimal iff its pair of positivity conditions on the
//! composed operators holds (see [`Attainability`]).

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Projector};
use crate::programmable;
use crate::states::DensityMatrix;

/// Fidelities at or below this are treated as exactly zero.
pub const FIDELITY_ZERO: f64 = 1e-12;
/// Relative width within which the prior ratio is considered to sit on a regime boundary.
pub const BOUNDARY_REL: f64 = 1e-12;
/// Margin used when comparing `q_opt(n)` against `q_opt(1)`.
pub const COMPARE_MARGIN: f64 = 1e-12;

fn require_same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `F(ρ1, ρ2) = Tr sqrt(sqrt(ρ1) ρ2 sqrt(ρ1))`, evaluated as the nuclear norm of
/// `sqrt(ρ1) sqrt(ρ2)` and clamped to `[0, 1]`.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    require_same_dim(rho1, rho2)?;
    let s1 = linalg::psd_sqrt(rho1.matrix(), tol)?;
    let s2 = linalg::psd_sqrt(rho2.matrix(), tol)?;
    Ok(linalg::nuclear_norm(&(s1 * s2)).clamp(0.0, 1.0))
}

/// `sqrt(sqrt(ρA) ρB sqrt(ρA))`. Its trace is `F(ρA, ρB)`.
pub fn fidelity_operator(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    tol: &Tolerances,
) -> Result<CMatrix> {
    require_same_dim(rho_a, rho_b)?;
    let s = linalg::psd_sqrt(rho_a.matrix(), tol)?;
    let inner = &s * rho_b.matrix() * &s;
    let inner = (&inner + inner.adjoint()).scale(0.5);
    linalg::psd_sqrt(&inner, tol)
}

/// Projector onto the span of eigenvectors with eigenvalue above the clip threshold.
pub fn support_projector(rho: &DensityMatrix, tol: &Tolerances) -> Result<Projector> {
    let eig = linalg::hermitian_eigen(rho.matrix(), tol)?;
    let basis = eig.support_basis(tol);
    let rank = basis.ncols();
    let matrix = if rank == 0 {
        CMatrix::zeros(rho.dim(), rho.dim())
    } else {
        &basis * basis.adjoint()
    };
    Ok(Projector { matrix, rank })
}

/// `Tr(P ρ)`, real part, clamped to `[0, 1]`.
pub fn support_overlap_trace(projector: &CMatrix, rho: &DensityMatrix) -> Result<f64> {
    if projector.nrows() != rho.dim() || projector.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: projector.nrows(),
        });
    }
    let tr = (projector * rho.matrix()).trace();
    Ok(tr.re.clamp(0.0, 1.0))
}

/// Support ranks behind a feasibility decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityWitness {
    pub rank1: usize,
    pub rank2: usize,
    pub joint_rank: usize,
    pub feasible: bool,
}

impl FeasibilityWitness {
    /// `dim(supp ρ1 ∩ supp ρ2)`, by rank additivity.
    pub fn intersection_dim(&self) -> usize {
        (self.rank1 + self.rank2).saturating_sub(self.joint_rank)
    }
}

/// Two states can be unambiguously discriminated iff neither support equals the
/// joint support.
pub fn ud_feasible(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    tol: &Tolerances,
) -> Result<FeasibilityWitness> {
    require_same_dim(rho1, rho2)?;
    let b1 = linalg::hermitian_eigen(rho1.matrix(), tol)?.support_basis(tol);
    let b2 = linalg::hermitian_eigen(rho2.matrix(), tol)?.support_basis(tol);
    let (rank1, rank2) = (b1.ncols(), b2.ncols());
    let stacked = CMatrix::from_fn(rho1.dim(), rank1 + rank2, |i, j| {
        if j < rank1 {
            b1[(i, j)]
        } else {
            b2[(i, j - rank1)]
        }
    });
    let joint_rank = linalg::numerical_rank(&stacked, tol.clip)?;
    Ok(FeasibilityWitness {
        rank1,
        rank2,
        joint_rank,
        feasible: rank1 < joint_rank && rank2 < joint_rank,
    })
}

/// Two hypotheses with priors `eta1 + eta2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UdProblem {
    pub rho1: DensityMatrix,
    pub rho2: DensityMatrix,
    pub eta1: f64,
    pub eta2: f64,
}

impl UdProblem {
    pub fn new(rho1: DensityMatrix, rho2: DensityMatrix, eta1: f64) -> Result<Self> {
        require_same_dim(&rho1, &rho2)?;
        if !(eta1 > 0.0 && eta1 < 1.0) {
            return Err(Error::RangeError(format!(
                "eta1 = {eta1} must lie in (0, 1)"
            )));
        }
        Ok(Self {
            rho1,
            rho2,
            eta1,
            eta2: 1.0 - eta1,
        })
    }

    /// `sqrt(η2/η1)`
    pub fn prior_ratio(&self) -> f64 {
        (self.eta2 / self.eta1).sqrt()
    }
}

/// Base-level scalars from which every copy count's bound follows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundScalars {
    pub fidelity: f64,
    /// `Tr(P2 ρ1)`
    pub t21: f64,
    /// `Tr(P1 ρ2)`
    pub t12: f64,
}

impl BoundScalars {
    pub fn compute(rho1: &DensityMatrix, rho2: &DensityMatrix, tol: &Tolerances) -> Result<Self> {
        let fidelity = fidelity(rho1, rho2, tol)?;
        let p1 = support_projector(rho1, tol)?;
        let p2 = support_projector(rho2, tol)?;
        Ok(Self {
            fidelity,
            t21: support_overlap_trace(&p2.matrix, rho1)?,
            t12: support_overlap_trace(&p1.matrix, rho2)?,
        })
    }

    /// Largest violation of `F² <= t21 <= 1` and `F² <= t12 <= 1` (zero if all hold).
    pub fn sandwich_violation(&self) -> f64 {
        let f2 = self.fidelity * self.fidelity;
        [f2 - self.t21, f2 - self.t12, self.t21 - 1.0, self.t12 - 1.0]
            .into_iter()
            .fold(0.0_f64, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Lower,
    Middle,
    Upper,
    /// `F = 0`: perfect discrimination, `Q = 0`.
    DegenerateF0,
    /// Prior ratio on the lower/middle boundary; evaluated with the middle line.
    BoundaryLowerMiddle,
    /// Prior ratio on the middle/upper boundary; evaluated with the middle line.
    BoundaryMiddleUpper,
}

/// The three candidate failure probabilities at copy count `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLines {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

impl RegimeLines {
    pub fn evaluate(scalars: &BoundScalars, eta1: f64, n: u32) -> Self {
        let eta2 = 1.0 - eta1;
        let a = scalars.fidelity.powi(n as i32);
        let t21 = scalars.t21.powi(n as i32);
        let t12 = scalars.t12.powi(n as i32);
        Self {
            lower: eta2 * a * a / t21 + eta1 * t21,
            middle: 2.0 * (eta1 * eta2).sqrt() * a,
            upper: eta1 * a * a / t12 + eta2 * t12,
        }
    }
}

/// Regime choice and value for given scalars, priors and copy count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeEvaluation {
    pub regime: Regime,
    pub q_opt: f64,
    /// `sqrt(η2/η1)`
    pub prior_ratio: f64,
    /// `t21^n / F^n`
    pub lower_threshold: f64,
    /// `F^n / t12^n`
    #[serde(with = "crate::serde_float")]
    pub upper_threshold: f64,
    /// `lower_threshold > upper_threshold`: the middle regime is empty.
    pub thresholds_inverted: bool,
    /// Multipliers `(c1, c2)` in `ρ1in − c1 F1in >= 0`, `ρ2in − c2 F2in >= 0`.
    pub certificate_coefficients: Option<[f64; 2]>,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= BOUNDARY_REL * a.abs().max(b.abs()).max(1.0)
}

/// Selects the regime and evaluates the failure probability.
///
/// Ties go to the middle line. When the thresholds are inverted and the prior
/// ratio satisfies both outer conditions, the larger of the two outer lines is
/// reported; this keeps `q_opt` continuous in the priors.
pub fn evaluate_regime(scalars: &BoundScalars, eta1: f64, n: u32) -> Result<RegimeEvaluation> {
    if !(eta1 > 0.0 && eta1 < 1.0) {
        return Err(Error::RangeError(format!(
            "eta1 = {eta1} must lie in (0, 1)"
        )));
    }
    if n == 0 {
        return Err(Error::RangeError("copy count must be at least 1".into()));
    }
    let r = ((1.0 - eta1) / eta1).sqrt();
    let f = scalars.fidelity;
    if f <= FIDELITY_ZERO {
        return Ok(RegimeEvaluation {
            regime: Regime::DegenerateF0,
            q_opt: 0.0,
            prior_ratio: r,
            lower_threshold: 0.0,
            upper_threshold: f64::INFINITY,
            thresholds_inverted: false,
            certificate_coefficients: None,
        });
    }
    if scalars.t21 <= 0.0 || scalars.t12 <= 0.0 {
        return Err(Error::NumericalFailure(format!(
            "F = {f:.3e} > 0 but Tr(P2 ρ1) = {:.3e}, Tr(P1 ρ2) = {:.3e}",
            scalars.t21, scalars.t12
        )));
    }
    let lower_threshold = (scalars.t21 / f).powi(n as i32);
    let upper_threshold = (f / scalars.t12).powi(n as i32);
    let lines = RegimeLines::evaluate(scalars, eta1, n);
    let inverted = lower_threshold > upper_threshold && !near(lower_threshold, upper_threshold);

    let below = r < lower_threshold && !near(r, lower_threshold);
    let above = r > upper_threshold && !near(r, upper_threshold);
    let (regime, q) = match (below, above) {
        (true, true) => {
            if lines.lower >= lines.upper {
                (Regime::Lower, lines.lower)
            } else {
                (Regime::Upper, lines.upper)
            }
        }
        (true, false) => (Regime::Lower, lines.lower),
        (false, true) => (Regime::Upper, lines.upper),
        (false, false) => {
            let regime = if near(r, lower_threshold) {
                Regime::BoundaryLowerMiddle
            } else if near(r, upper_threshold) {
                Regime::BoundaryMiddleUpper
            } else {
                Regime::Middle
            };
            (regime, lines.middle)
        }
    };
    let coefficients = match regime {
        Regime::Lower => [lower_threshold, 1.0 / lower_threshold],
        Regime::Upper => [upper_threshold, 1.0 / upper_threshold],
        _ => [r, 1.0 / r],
    };
    Ok(RegimeEvaluation {
        regime,
        q_opt: q.clamp(0.0, 1.0),
        prior_ratio: r,
        lower_threshold,
        upper_threshold,
        thresholds_inverted: inverted,
        certificate_coefficients: Some(coefficients),
    })
}

/// Whether the reported value is certified optimal by the positivity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attainability {
    /// Both positivity operators are PSD within `tol.psd`.
    Certified,
    /// At least one positivity operator has a negative eigenvalue beyond `tol.psd`.
    Violated,
    /// Not checked: composed dimension above the cap, or certification disabled.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundOptions {
    /// Build the composed operators and test both positivity conditions.
    pub certify: bool,
    /// Fail with `OverlappingSupports` when the supports share a nonzero subspace.
    pub require_trivial_intersection: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            certify: true,
            require_trivial_intersection: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UdBoundReport {
    pub n: u32,
    pub eta1: f64,
    pub eta2: f64,
    /// `F(ρ1, ρ2)` of the base pair, not raised to `n`.
    pub fidelity: f64,
    pub t21: f64,
    pub t12: f64,
    pub prior_ratio: f64,
    pub lower_threshold: f64,
    /// Infinite when `F = 0`.
    #[serde(with = "crate::serde_float")]
    pub upper_threshold: f64,
    pub thresholds_inverted: bool,
    pub regime: Regime,
    pub q_opt: f64,
    pub attainability: Attainability,
    /// Minimum eigenvalues of `ρ1in − c1 F1in` and `ρ2in − c2 F2in`.
    pub certificate_residuals: Option<[f64; 2]>,
    pub feasibility: FeasibilityWitness,
    pub support_intersection_dim: usize,
}

/// Optimal failure probability for discriminating the composed pair with `n`
/// data registers.
pub fn optimal_failure_bound(
    problem: &UdProblem,
    n: u32,
    tol: &Tolerances,
    options: BoundOptions,
) -> Result<UdBoundReport> {
    if n == 0 {
        return Err(Error::RangeError("copy count must be at least 1".into()));
    }
    let witness = ud_feasible(&problem.rho1, &problem.rho2, tol)?;
    if !witness.feasible {
        return Err(Error::NotFeasible(witness));
    }
    let intersection = witness.intersection_dim();
    if options.require_trivial_intersection && intersection > 0 {
        return Err(Error::OverlappingSupports {
            intersection_dim: intersection,
        });
    }
    let scalars = BoundScalars::compute(&problem.rho1, &problem.rho2, tol)?;
    let eval = evaluate_regime(&scalars, problem.eta1, n)?;

    let (attainability, residuals) = match eval.certificate_coefficients {
        None => (Attainability::Certified, None),
        Some(coeffs) if options.certify => certify(problem, n, coeffs, tol)?,
        Some(_) => (Attainability::Unknown, None),
    };

    Ok(UdBoundReport {
        n,
        eta1: problem.eta1,
        eta2: problem.eta2,
        fidelity: scalars.fidelity,
        t21: scalars.t21,
        t12: scalars.t12,
        prior_ratio: eval.prior_ratio,
        lower_threshold: eval.lower_threshold,
        upper_threshold: eval.upper_threshold,
        thresholds_inverted: eval.thresholds_inverted,
        regime: eval.regime,
        q_opt: eval.q_opt,
        attainability,
        certificate_residuals: residuals,
        feasibility: witness,
        support_intersection_dim: intersection,
    })
}

fn certify(
    problem: &UdProblem,
    n: u32,
    [c1, c2]: [f64; 2],
    tol: &Tolerances,
) -> Result<(Attainability, Option<[f64; 2]>)> {
    let instance = match programmable::compose_instance(&problem.rho1, &problem.rho2, n, tol) {
        Ok(inst) => inst,
        Err(Error::DimensionOverflow { .. }) => return Ok((Attainability::Unknown, None)),
        Err(e) => return Err(e),
    };
    let (r1, r2) = (&instance.rho_in_1, &instance.rho_in_2);
    let f1 = fidelity_operator(r1, r2, tol)?;
    let f2 = fidelity_operator(r2, r1, tol)?;
    let op1 = r1.matrix() - f1.scale(c1);
    let op2 = r2.matrix() - f2.scale(c2);
    let m1 = linalg::is_psd(&op1, tol.psd)?;
    let m2 = linalg::is_psd(&op2, tol.psd)?;
    let state = if m1.is_psd && m2.is_psd {
        Attainability::Certified
    } else {
        Attainability::Violated
    };
    Ok((state, Some([m1.min_eigenvalue, m2.min_eigenvalue])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    /// `F = 0`: both failure probabilities vanish.
    OrthogonalShortcut,
    NEquals1,
    /// `t21/F <= 1 <= F/t12`.
    Case1,
    /// `t21/F <= F/t12 < 1`.
    Case2,
    /// `t21/F > 1`.
    Case3,
    /// `F/t12 < t21/F <= 1`: inverted thresholds, not covered by the three cases.
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StrictlyBetter,
    Equal,
    /// Prior ratio falls in the case's excluded window.
    Incomparable,
    /// `q_opt(n) > q_opt(1)`: would contradict monotonicity in `n`.
    Worse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub case_id: CaseId,
    pub n: u32,
    pub q_opt_n: f64,
    /// Baseline: the same bound at `n = 1`.
    pub q_opt_1: f64,
    pub verdict: Verdict,
    pub prior_ratio: f64,
    /// `t21/F`
    pub lower_ratio: f64,
    /// `F/t12`, infinite when `F = 0`.
    #[serde(with = "crate::serde_float")]
    pub upper_ratio: f64,
    /// Closed interval of prior ratios excluded from the comparison.
    pub excluded_window: Option<[f64; 2]>,
    pub regime_n: Regime,
    pub regime_1: Regime,
}

/// Classifies the pair and compares `q_opt(n)` against `q_opt(1)`.
pub fn compare_bounds(problem: &UdProblem, n: u32, tol: &Tolerances) -> Result<ComparisonReport> {
    let witness = ud_feasible(&problem.rho1, &problem.rho2, tol)?;
    if !witness.feasible {
        return Err(Error::NotFeasible(witness));
    }
    let scalars = BoundScalars::compute(&problem.rho1, &problem.rho2, tol)?;
    compare_from_scalars(&scalars, problem.eta1, n)
}

/// [`compare_bounds`] on precomputed scalars.
pub fn compare_from_scalars(scalars: &BoundScalars, eta1: f64, n: u32) -> Result<ComparisonReport> {
    let at_n = evaluate_regime(scalars, eta1, n)?;
    let at_1 = evaluate_regime(scalars, eta1, 1)?;
    let r = at_n.prior_ratio;
    let f = scalars.fidelity;
    let (lower_ratio, upper_ratio) = if f > FIDELITY_ZERO {
        (scalars.t21 / f, f / scalars.t12)
    } else {
        (0.0, f64::INFINITY)
    };

    let mut report = ComparisonReport {
        case_id: CaseId::NEquals1,
        n,
        q_opt_n: at_n.q_opt,
        q_opt_1: at_1.q_opt,
        verdict: Verdict::Equal,
        prior_ratio: r,
        lower_ratio,
        upper_ratio,
        excluded_window: None,
        regime_n: at_n.regime,
        regime_1: at_1.regime,
    };
    if f <= FIDELITY_ZERO {
        report.case_id = CaseId::OrthogonalShortcut;
        return Ok(report);
    }
    if n == 1 {
        return Ok(report);
    }

    let (a, b, nn) = (lower_ratio, upper_ratio, n as i32);
    let (case_id, window) = if a <= 1.0 && b >= 1.0 {
        (CaseId::Case1, None)
    } else if a <= b && b < 1.0 {
        (CaseId::Case2, Some([b.powi(nn), b]))
    } else if a > 1.0 {
        (CaseId::Case3, Some([a, a.powi(nn)]))
    } else {
        (CaseId::Unclassified, None)
    };
    report.case_id = case_id;
    report.excluded_window = window;

    let inside = window.is_some_and(|[lo, hi]| r >= lo && r <= hi);
    report.verdict = if inside {
        Verdict::Incomparable
    } else if at_n.q_opt < at_1.q_opt - COMPARE_MARGIN {
        Verdict::StrictlyBetter
    } else if at_n.q_opt <= at_1.q_opt + COMPARE_MARGIN {
        Verdict::Equal
    } else {
        Verdict::Worse
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag;
    use crate::states::{counterexample_states, random_density, PureState};

    fn dm(values: &[f64]) -> DensityMatrix {
        DensityMatrix::new(diag(values), &Tolerances::default()).unwrap()
    }

    fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    #[test]
    fn fidelity_examples() {
        let tol = Tolerances::default();
        let rho = random_density(3, 2, 1).unwrap();
        assert!((fidelity(&rho, &rho, &tol).unwrap() - 1.0).abs() < 1e-9);
        assert!(fidelity(&dm(&[1.0, 0.0]), &dm(&[0.0, 1.0]), &tol).unwrap() < 1e-15);
        let [r1, r2, _] = counterexample_states(0.5, 0.5, 0.5, 3).unwrap();
        assert!((fidelity(&r1, &r2, &tol).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(
            fidelity(&dm(&[1.0, 0.0]), &dm(&[1.0, 0.0, 0.0]), &tol),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fidelity_operator_examples() {
        let tol = Tolerances::default();
        let rho = random_density(3, 3, 8).unwrap();
        let f = fidelity_operator(&rho, &rho, &tol).unwrap();
        assert!(max_abs_diff(&f, rho.matrix()) < 1e-12);

        let [r1, r2, _] = counterexample_states(0.5, 0.5, 0.5, 3).unwrap();
        let f = fidelity_operator(&r1, &r2, &tol).unwrap();
        assert!(max_abs_diff(&f, &diag(&[0.0, 0.5, 0.0])) < 1e-14);

        let f = fidelity_operator(&dm(&[1.0, 0.0]), &dm(&[0.0, 1.0]), &tol).unwrap();
        assert!(f.norm() < 1e-15);
    }

    #[test]
    fn support_projector_examples() {
        let tol = Tolerances::default();
        let p = support_projector(&dm(&[0.5, 0.5, 0.0]), &tol).unwrap();
        assert_eq!(p.rank, 2);
        assert!(max_abs_diff(&p.matrix, &diag(&[1.0, 1.0, 0.0])) < 1e-14);

        let (psi, _) = PureState::pair_with_overlap(0.3, 3).unwrap();
        let p = support_projector(&psi.density(), &tol).unwrap();
        assert!(max_abs_diff(&p.matrix, &psi.projector()) < 1e-12);

        let rho = random_density(4, 2, 21).unwrap();
        let p = support_projector(&rho, &tol).unwrap();
        assert_eq!(p.rank, 2);
        assert!(max_abs_diff(&(&p.matrix * rho.matrix()), rho.matrix()) < 1e-12);
    }

    #[test]
    fn overlap_trace_examples() {
        let rho = dm(&[0.5, 0.5, 0.0]);
        assert!((support_overlap_trace(&linalg::identity(3), &rho).unwrap() - 1.0).abs() < 1e-15);
        assert!(
            (support_overlap_trace(&diag(&[0.0, 1.0, 1.0]), &rho).unwrap() - 0.5).abs() < 1e-15
        );
        assert_eq!(
            support_overlap_trace(&diag(&[0.0, 0.0, 1.0]), &rho).unwrap(),
            0.0
        );
    }

    #[test]
    fn feasibility_examples() {
        let tol = Tolerances::default();
        let [r1, r2, _] = counterexample_states(0.5, 0.5, 0.5, 3).unwrap();
        let w = ud_feasible(&r1, &r2, &tol).unwrap();
        assert_eq!(
            (w.rank1, w.rank2, w.joint_rank, w.feasible),
            (2, 2, 3, true)
        );
        assert_eq!(w.intersection_dim(), 1);

        assert!(!ud_feasible(&r1, &r1, &tol).unwrap().feasible);

        let w = ud_feasible(
            &dm(&[0.5, 0.5, 0.0]),
            &dm(&[1. / 3., 1. / 3., 1. / 3.]),
            &tol,
        )
        .unwrap();
        assert_eq!(
            (w.rank1, w.rank2, w.joint_rank, w.feasible),
            (2, 3, 3, false)
        );
    }

    #[test]
    fn bound_on_counterexample_pair() {
        let tol = Tolerances::default();
        let [r1, r2, _] = counterexample_states(0.5, 0.5, 0.5, 3).unwrap();
        let problem = UdProblem::new(r1, r2, 0.5).unwrap();
        let rep = optimal_failure_bound(&problem, 1, &tol, BoundOptions::default()).unwrap();
        assert!((rep.fidelity - 0.5).abs() < 1e-14);
        assert!((rep.t21 - 0.5).abs() < 1e-14);
        assert!((rep.q_opt - 0.5).abs() < 1e-10);
        assert_eq!(rep.regime, Regime::BoundaryLowerMiddle);
        assert_eq!(rep.attainability, Attainability::Certified);

        let rep = optimal_failure_bound(&problem, 2, &tol, BoundOptions::default()).unwrap();
        assert!((rep.q_opt - 0.25).abs() < 1e-10);
    }

    #[test]
    fn bound_orthogonal_and_infeasible() {
        let tol = Tolerances::default();
        let problem = UdProblem::new(dm(&[1.0, 0.0]), dm(&[0.0, 1.0]), 0.3).unwrap();
        let rep = optimal_failure_bound(&problem, 3, &tol, BoundOptions::default()).unwrap();
        assert_eq!(rep.regime, Regime::DegenerateF0);
        assert_eq!(rep.q_opt, 0.0);

        let rho = dm(&[0.5, 0.5]);
        let problem = UdProblem::new(rho.clone(), rho, 0.5).unwrap();
        assert!(matches!(
            optimal_failure_bound(&problem, 1, &tol, BoundOptions::default()),
            Err(Error::NotFeasible(_))
        ));
    }

    #[test]
    fn overlapping_supports_rejected_when_strict() {
        let tol = Tolerances::default();
        let [r1, r2, _] = counterexample_states(0.5, 0.5, 0.5, 3).unwrap();
        let problem = UdProblem::new(r1, r2, 0.5).unwrap();
        let strict = BoundOptions {
            require_trivial_intersection: true,
            ..BoundOptions::default()
        };
        assert!(matches!(
            optimal_failure_bound(&problem, 1, &tol, strict),
            Err(Error::OverlappingSupports {
                intersection_dim: 1
            })
        ));
    }

    #[test]
    fn pure_pair_middle_regime_power_law() {
        let tol = Tolerances::default();
        let (a, b) = PureState::pair_with_overlap(0.6, 2).unwrap();
        let problem = UdProblem::new(a.density(), b.density(), 0.5).unwrap();
        for n in 1..=3 {
            let rep = optimal_failure_bound(&problem, n, &tol, BoundOptions::default()).unwrap();
            assert_eq!(rep.regime, Regime::Middle);
            assert!((rep.q_opt - 0.6_f64.powi(n as i32)).abs() < 1e-10);
            assert_eq!(rep.attainability, Attainability::Certified);
        }
    }

    #[test]
    fn regimes_for_pure_pair() {
        // F = s, t = s²: thresholds s^n and s^-n.
        let s = 0.5;
        let scalars = BoundScalars {
            fidelity: s,
            t21: s * s,
            t12: s * s,
        };
        // r = sqrt(η2/η1) < s  =>  η1 > 1/(1+s²)
        let lo = evaluate_regime(&scalars, 0.9, 1).unwrap();
        assert_eq!(lo.regime, Regime::Lower);
        assert!((lo.q_opt - (0.1 + 0.9 * s * s)).abs() < 1e-14);
        let hi = evaluate_regime(&scalars, 0.1, 1).unwrap();
        assert_eq!(hi.regime, Regime::Upper);
        assert!((hi.q_opt - (0.1 + 0.9 * s * s)).abs() < 1e-14);
        let mid = evaluate_regime(&scalars, 0.5, 1).unwrap();
        assert_eq!(mid.regime, Regime::Middle);
        assert!((mid.q_opt - s).abs() < 1e-14);
    }

    #[test]
    fn inverted_thresholds_take_larger_outer_line() {
        // t21 t12 > F² makes t21/F > F/t12.
        let scalars = BoundScalars {
            fidelity: 0.3,
            t21: 0.5,
            t12: 0.6,
        };
        let eval = evaluate_regime(&scalars, 0.5, 1).unwrap();
        assert!(eval.thresholds_inverted);
        let lines = RegimeLines::evaluate(&scalars, 0.5, 1);
        assert!((eval.q_opt - lines.lower.max(lines.upper)).abs() < 1e-15);
    }

    #[test]
    fn comparison_examples() {
        let s = 0.5;
        let pure = BoundScalars {
            fidelity: s,
            t21: s * s,
            t12: s * s,
        };
        let rep = compare_from_scalars(&pure, 0.5, 3).unwrap();
        assert_eq!(rep.case_id, CaseId::Case1);
        assert_eq!(rep.verdict, Verdict::StrictlyBetter);
        assert!((rep.q_opt_n - 0.125).abs() < 1e-14);
        assert!((rep.q_opt_1 - 0.5).abs() < 1e-14);

        let zero = BoundScalars {
            fidelity: 0.0,
            t21: 0.0,
            t12: 0.0,
        };
        let rep = compare_from_scalars(&zero, 0.4, 2).unwrap();
        assert_eq!(rep.case_id, CaseId::OrthogonalShortcut);
        assert_eq!(rep.verdict, Verdict::Equal);

        let rep = compare_from_scalars(&pure, 0.5, 1).unwrap();
        assert_eq!(rep.case_id, CaseId::NEquals1);
        assert_eq!(rep.verdict, Verdict::Equal);
    }

    #[test]
    fn case3_window_is_incomparable() {
        // t21/F = 1.5 > 1; window [1.5, 1.5^2] for n = 2. r = 2 sits inside.
        let scalars = BoundScalars {
            fidelity: 0.4,
            t21: 0.6,
            t12: 0.6,
        };
        let eta1 = 1.0 / (1.0 + 4.0);
        let rep = compare_from_scalars(&scalars, eta1, 2).unwrap();
        assert_eq!(rep.case_id, CaseId::Case3);
        let [lo, hi] = rep.excluded_window.unwrap();
        assert!((lo - 1.5).abs() < 1e-12 && (hi - 2.25).abs() < 1e-12);
        assert_eq!(rep.verdict, Verdict::Incomparable);
    }
}
