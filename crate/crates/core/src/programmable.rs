//! Programmable-discriminator instances and the numerical verifiers for the two
//! structural results about them:
//!
//! - lifting: a POVM `{Π_i}` that unambiguously discriminates `ρ1, ρ2` becomes
//!   `{I ⊗ Π_i}` on `ρ1 ⊗ ρ2 ⊗ ρ_j`, with the same per-outcome traces;
//! - nonexistence: no single fixed POVM on two program registers and one data
//!   register works for every UD-discriminable pair, witnessed by the
//!   three-state family of [`counterexample_states`].

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::discrimination::{self, FeasibilityWitness};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::povm::{self, Povm};
use crate::states::{counterexample_states, DensityMatrix};

/// `ρ_in_j = ρ1 ⊗ ρ2 ⊗ ρ_j^{⊗n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgrammableInstance {
    pub rho_in_1: DensityMatrix,
    pub rho_in_2: DensityMatrix,
    pub n: u32,
    pub factor_dim: usize,
    pub total_dim: usize,
}

/// `d^(n+2)`, or `None` on overflow.
pub fn composed_dim(factor_dim: usize, n: u32) -> Option<usize> {
    factor_dim.checked_pow(n.checked_add(2)?)
}

pub fn compose_instance(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    n: u32,
    tol: &Tolerances,
) -> Result<ProgrammableInstance> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            found: rho2.dim(),
        });
    }
    if n == 0 {
        return Err(Error::RangeError("copy count must be at least 1".into()));
    }
    let d = rho1.dim();
    let total_dim = composed_dim(d, n).ok_or(Error::DimensionOverflow {
        dim: usize::MAX,
        cap: tol.dim_cap,
    })?;
    if total_dim > tol.dim_cap {
        return Err(Error::DimensionOverflow {
            dim: total_dim,
            cap: tol.dim_cap,
        });
    }
    let program = linalg::tensor(rho1.matrix(), rho2.matrix(), tol.dim_cap)?;
    let data1 = linalg::tensor_power(rho1.matrix(), n, tol.dim_cap)?;
    let data2 = linalg::tensor_power(rho2.matrix(), n, tol.dim_cap)?;
    let rho_in_1 = DensityMatrix::new(linalg::tensor(&program, &data1, tol.dim_cap)?, tol)?;
    let rho_in_2 = DensityMatrix::new(linalg::tensor(&program, &data2, tol.dim_cap)?, tol)?;
    Ok(ProgrammableInstance {
        rho_in_1,
        rho_in_2,
        n,
        factor_dim: d,
        total_dim,
    })
}

/// `{I_prefix ⊗ Π_i}`
pub fn lift_povm(povm: &Povm, prefix_dim: usize, tol: &Tolerances) -> Result<Povm> {
    if prefix_dim == 0 {
        return Err(Error::RangeError(
            "prefix dimension must be at least 1".into(),
        ));
    }
    let id = linalg::identity(prefix_dim);
    let elements = povm
        .elements()
        .iter()
        .map(|pi| linalg::tensor(&id, pi, tol.dim_cap))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(elements, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    /// `Tr(Π_i ρ_j)` on the base pair, rows by outcome.
    pub base_traces: Vec<[f64; 2]>,
    /// `Tr((I ⊗ Π_i) ρ_in_j)` on the composed pair.
    pub lifted_traces: Vec<[f64; 2]>,
    pub max_trace_residual: f64,
    /// `max(Tr(Π1in ρ2in), Tr(Π2in ρ1in))`
    pub lifted_error_trace: f64,
    pub base_feasibility: FeasibilityWitness,
    pub composed_feasibility: FeasibilityWitness,
    pub lifted_povm_valid: bool,
    pub passed: bool,
}

/// Tolerance for matching lifted and base traces.
pub const THEOREM1_TOL: f64 = 1e-9;

/// Lifts a UD POVM for `(ρ1, ρ2)` to the composed pair with one data register
/// and checks that every outcome probability is preserved, and that UD
/// feasibility of the base and composed pairs agree.
pub fn verify_theorem1(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    povm: &Povm,
    tol: &Tolerances,
) -> Result<Theorem1Report> {
    if povm.len() != 3 {
        return Err(Error::PreconditionFailed {
            what: "number of POVM elements (need 3)".into(),
            value: povm.len() as f64,
        });
    }
    let base = povm::trace_table(povm, rho1, rho2)?;
    let checks = [
        ("Tr(Pi1 rho2)", base[1][1], false),
        ("Tr(Pi2 rho1)", base[2][0], false),
        ("Tr(Pi1 rho1)", base[1][0], true),
        ("Tr(Pi2 rho2)", base[2][1], true),
    ];
    for (what, value, must_be_positive) in checks {
        let ok = if must_be_positive {
            value > THEOREM1_TOL
        } else {
            value <= THEOREM1_TOL
        };
        if !ok {
            return Err(Error::PreconditionFailed {
                what: what.into(),
                value,
            });
        }
    }

    let instance = compose_instance(rho1, rho2, 1, tol)?;
    let d = rho1.dim();
    let lifted = lift_povm(povm, d * d, tol)?;
    let lifted_traces = povm::trace_table(&lifted, &instance.rho_in_1, &instance.rho_in_2)?;
    let max_trace_residual = base
        .iter()
        .zip(&lifted_traces)
        .flat_map(|(a, b)| [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()])
        .fold(0.0_f64, f64::max);
    let lifted_error_trace = lifted_traces[1][1].max(lifted_traces[2][0]);

    let base_feasibility = discrimination::ud_feasible(rho1, rho2, tol)?;
    let composed_feasibility =
        discrimination::ud_feasible(&instance.rho_in_1, &instance.rho_in_2, tol)?;

    let passed = max_trace_residual <= THEOREM1_TOL
        && lifted_error_trace <= THEOREM1_TOL
        && base_feasibility.feasible == composed_feasibility.feasible;
    Ok(Theorem1Report {
        base_traces: base,
        lifted_traces,
        max_trace_residual,
        lifted_error_trace,
        base_feasibility,
        composed_feasibility,
        lifted_povm_valid: true,
        passed,
    })
}

/// Product basis vectors `|γ_i γ_j γ_k>` that the fixed `Π1` must annihilate in
/// one of the four pairings of the counterexample family. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnihilationConstraintSet {
    /// 1 through 4.
    pub case_id: u8,
    pub triples: Vec<[usize; 3]>,
}

impl AnnihilationConstraintSet {
    /// The constraint vectors in the `d³`-dimensional product space.
    pub fn vectors(&self, d: usize) -> Vec<CVector> {
        self.triples
            .iter()
            .map(|&t| product_basis_vector(d, t))
            .collect()
    }
}

pub fn product_basis_vector(d: usize, [i, j, k]: [usize; 3]) -> CVector {
    linalg::basis_vector(d * d * d, (i * d + j) * d + k)
}

// Listed 1-based as in the case analysis: the support of ρ2in for
// (ρ1, ρ2) = (ρ'1, ρ'2), (ρ'2, ρ'1), (ρ'1, ρ'3), (ρ'3, ρ'1).
const CONSTRAINT_TABLE: [[[usize; 3]; 8]; 4] = [
    [
        [1, 2, 2],
        [1, 2, 3],
        [1, 3, 2],
        [1, 3, 3],
        [2, 2, 2],
        [2, 2, 3],
        [2, 3, 2],
        [2, 3, 3],
    ],
    [
        [2, 1, 1],
        [2, 1, 2],
        [2, 2, 1],
        [2, 2, 2],
        [3, 1, 1],
        [3, 1, 2],
        [3, 2, 1],
        [3, 2, 2],
    ],
    [
        [1, 1, 1],
        [1, 1, 3],
        [1, 3, 1],
        [1, 3, 3],
        [2, 1, 1],
        [2, 1, 3],
        [2, 3, 1],
        [2, 3, 3],
    ],
    [
        [1, 1, 1],
        [1, 1, 2],
        [1, 2, 1],
        [1, 2, 2],
        [3, 1, 1],
        [3, 1, 2],
        [3, 2, 1],
        [3, 2, 2],
    ],
];

/// The four annihilation constraint sets, each of eight product vectors.
pub fn theorem2_constraints(d: usize) -> Result<Vec<AnnihilationConstraintSet>> {
    if d < 3 {
        return Err(Error::RangeError(format!(
            "dimension {d} must be at least 3"
        )));
    }
    Ok(CONSTRAINT_TABLE
        .iter()
        .enumerate()
        .map(|(case, rows)| AnnihilationConstraintSet {
            case_id: case as u8 + 1,
            triples: rows
                .iter()
                .map(|t| [t[0] - 1, t[1] - 1, t[2] - 1])
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem2Options {
    pub dim: usize,
    /// Remove one constraint vector `(case_id, index)` before verifying; a
    /// negative control that should make the containment fail.
    pub drop_constraint: Option<(u8, usize)>,
}

impl Default for Theorem2Options {
    fn default() -> Self {
        Self {
            dim: 3,
            drop_constraint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub dim: usize,
    /// Feasibility of (ρ'1, ρ'2), (ρ'1, ρ'3), (ρ'2, ρ'3).
    pub pair_feasibility: [FeasibilityWitness; 3],
    pub constraint_counts: Vec<usize>,
    pub span_rank: usize,
    /// `||(I − P_S) ρ1in (I − P_S)||_F` for the first pairing.
    pub containment_residual: f64,
    /// `max ||Π1 v||` over all constraint vectors, with `Π1 = I − P_S`.
    pub annihilation_residual: f64,
    /// `Tr(Π1 ρ1in)` for the first pairing.
    pub trace_pi1_rho_in_1: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Tolerance on the containment residual and `Tr(Π1 ρ1in)`.
pub const THEOREM2_TOL: f64 = 1e-10;

/// Checks that every `Π1 >= 0` annihilating the constraint vectors has
/// `Tr(Π1 ρ1in) = 0` for the first pairing, and exhibits one such `Π1`.
pub fn verify_theorem2(
    a1: f64,
    b1: f64,
    c1: f64,
    options: Theorem2Options,
    tol: &Tolerances,
) -> Result<Theorem2Report> {
    let d = options.dim;
    let [r1, r2, r3] = counterexample_states(a1, b1, c1, d)?;
    let pair_feasibility = [
        discrimination::ud_feasible(&r1, &r2, tol)?,
        discrimination::ud_feasible(&r1, &r3, tol)?,
        discrimination::ud_feasible(&r2, &r3, tol)?,
    ];

    let mut sets = theorem2_constraints(d)?;
    if let Some((case_id, index)) = options.drop_constraint {
        let set = sets
            .iter_mut()
            .find(|s| s.case_id == case_id)
            .ok_or_else(|| Error::RangeError(format!("no constraint case {case_id}")))?;
        if index >= set.triples.len() {
            return Err(Error::RangeError(format!(
                "constraint index {index} out of range for case {case_id}"
            )));
        }
        set.triples.remove(index);
    }
    let constraint_counts = sets.iter().map(|s| s.triples.len()).collect();
    let vectors: Vec<CVector> = sets.iter().flat_map(|s| s.vectors(d)).collect();
    let span = linalg::span_projector(&vectors, tol.clip)?;

    let tol_big = tol.with_dim_cap(tol.dim_cap.max(d * d * d));
    let instance = compose_instance(&r1, &r2, 1, &tol_big)?;
    let pi1 = linalg::identity(d * d * d) - &span.matrix;
    let compressed = &pi1 * instance.rho_in_1.matrix() * &pi1;
    let containment_residual = compressed.norm();
    let annihilation_residual = vectors
        .iter()
        .map(|v| (&pi1 * v).norm())
        .fold(0.0_f64, f64::max);
    let trace_pi1_rho_in_1 = (&pi1 * instance.rho_in_1.matrix()).trace().re;

    let passed = pair_feasibility.iter().all(|w| w.feasible)
        && containment_residual <= THEOREM2_TOL
        && trace_pi1_rho_in_1.abs() <= THEOREM2_TOL
        && annihilation_residual <= THEOREM2_TOL;
    Ok(Theorem2Report {
        a1,
        b1,
        c1,
        dim: d,
        pair_feasibility,
        constraint_counts,
        span_rank: span.rank,
        containment_residual,
        annihilation_residual,
        trace_pi1_rho_in_1,
        tolerance: THEOREM2_TOL,
        passed,
    })
}

/// Product of the factor support projectors, `P1 ⊗ P2 ⊗ P_j^{⊗n}`.
pub fn product_support_projector(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    data: &DensityMatrix,
    n: u32,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let p1 = discrimination::support_projector(rho1, tol)?.matrix;
    let p2 = discrimination::support_projector(rho2, tol)?.matrix;
    let pd = discrimination::support_projector(data, tol)?.matrix;
    let data_power = linalg::tensor_power(&pd, n, tol.dim_cap)?;
    linalg::tensor_all(&[&p1, &p2, &data_power], tol.dim_cap)
}
