//! Seeded property runs for fidelity multiplicativity over tensor products and
//! the copy-count power laws of the composed pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::discrimination::{self, fidelity, support_overlap_trace, BoundScalars};
use crate::error::{Error, Result};
use crate::linalg;
use crate::programmable::compose_instance;
use crate::states::{random_density, DensityMatrix};

/// Residual bound for both checks.
pub const FIDELITY_LAW_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawSample {
    pub seed: u64,
    pub dim: usize,
    pub ranks: [usize; 2],
    pub n: u32,
    pub fidelity_base: f64,
    pub fidelity_composed: f64,
    /// `|F(ρ1in, ρ2in) − F^n|`
    pub fidelity_residual: f64,
    /// `max(|Tr(P1in ρ2in) − t12^n|, |Tr(P2in ρ1in) − t21^n|)`
    pub trace_residual: f64,
    /// Largest sandwich-inequality violation over the base and composed pairs.
    pub sandwich_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawReport {
    pub samples: Vec<PowerLawSample>,
    pub max_fidelity_residual: f64,
    pub max_trace_residual: f64,
    pub tolerance: f64,
    pub fidelity_law_passed: bool,
    /// Can fail when the composed spectrum spans more than the relative clip:
    /// genuine eigenvalues below `clip * λ_max` drop out of the numerical support.
    pub trace_law_passed: bool,
    pub passed: bool,
}

/// Draws a rank in `1..=dim` and a state seed from `rng`.
fn draw_state(rng: &mut ChaCha8Rng, dim: usize) -> Result<(DensityMatrix, usize)> {
    let rank = rng.random_range(1..=dim);
    let seed = rng.random::<u64>();
    Ok((random_density(dim, rank, seed)?, rank))
}

/// Checks `F(ρ1in, ρ2in) = F(ρ1, ρ2)^n` and the support-trace power laws on
/// `count` random pairs of dimension `dim`, for each copy count in `ns`.
pub fn power_law_check(
    dim: usize,
    ns: &[u32],
    count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<PowerLawReport> {
    if dim == 0 {
        return Err(Error::RangeError("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count * ns.len());
    for _ in 0..count {
        let sample_seed = rng.random::<u64>();
        let mut local = ChaCha8Rng::seed_from_u64(sample_seed);
        let (r1, k1) = draw_state(&mut local, dim)?;
        let (r2, k2) = draw_state(&mut local, dim)?;
        let base = BoundScalars::compute(&r1, &r2, tol)?;
        for &n in ns {
            let inst = compose_instance(&r1, &r2, n, tol)?;
            let f_in = fidelity(&inst.rho_in_1, &inst.rho_in_2, tol)?;
            let p1 = discrimination::support_projector(&inst.rho_in_1, tol)?;
            let p2 = discrimination::support_projector(&inst.rho_in_2, tol)?;
            let t12_in = support_overlap_trace(&p1.matrix, &inst.rho_in_2)?;
            let t21_in = support_overlap_trace(&p2.matrix, &inst.rho_in_1)?;
            let ni = n as i32;
            let composed = BoundScalars {
                fidelity: f_in,
                t21: t21_in,
                t12: t12_in,
            };
            samples.push(PowerLawSample {
                seed: sample_seed,
                dim,
                ranks: [k1, k2],
                n,
                fidelity_base: base.fidelity,
                fidelity_composed: f_in,
                fidelity_residual: (f_in - base.fidelity.powi(ni)).abs(),
                trace_residual: (t12_in - base.t12.powi(ni))
                    .abs()
                    .max((t21_in - base.t21.powi(ni)).abs()),
                sandwich_violation: base.sandwich_violation().max(composed.sandwich_violation()),
            });
        }
    }
    Ok(summarise(samples))
}

fn summarise(samples: Vec<PowerLawSample>) -> PowerLawReport {
    let max_fidelity_residual = samples
        .iter()
        .map(|s| s.fidelity_residual)
        .fold(0.0_f64, f64::max);
    let max_trace_residual = samples
        .iter()
        .map(|s| s.trace_residual)
        .fold(0.0_f64, f64::max);
    let fidelity_law_passed = max_fidelity_residual <= FIDELITY_LAW_TOL;
    let trace_law_passed = max_trace_residual <= FIDELITY_LAW_TOL;
    PowerLawReport {
        fidelity_law_passed,
        trace_law_passed,
        passed: fidelity_law_passed && trace_law_passed,
        samples,
        max_fidelity_residual,
        max_trace_residual,
        tolerance: FIDELITY_LAW_TOL,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSample {
    pub seed: u64,
    pub dims: [usize; 2],
    pub fidelity_product_states: f64,
    pub product_of_fidelities: f64,
    pub residual: f64,
    /// Sandwich violation of the product pair `(ρ1 ⊗ ρ2, ρ3 ⊗ ρ4)`.
    pub sandwich_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductReport {
    pub samples: Vec<ProductSample>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks `F(ρ1 ⊗ ρ2, ρ3 ⊗ ρ4) = F(ρ1, ρ3) F(ρ2, ρ4)` on `count` random
/// quadruples with factor dimensions drawn from `1..=max_dim`.
pub fn product_fidelity_check(
    max_dim: usize,
    count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ProductReport> {
    if max_dim == 0 {
        return Err(Error::RangeError("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let sample_seed = rng.random::<u64>();
        let mut local = ChaCha8Rng::seed_from_u64(sample_seed);
        let da = local.random_range(1..=max_dim);
        let db = local.random_range(1..=max_dim);
        let (r1, _) = draw_state(&mut local, da)?;
        let (r2, _) = draw_state(&mut local, db)?;
        let (r3, _) = draw_state(&mut local, da)?;
        let (r4, _) = draw_state(&mut local, db)?;
        let left = DensityMatrix::new(linalg::tensor(r1.matrix(), r2.matrix(), tol.dim_cap)?, tol)?;
        let right =
            DensityMatrix::new(linalg::tensor(r3.matrix(), r4.matrix(), tol.dim_cap)?, tol)?;
        let joint = fidelity(&left, &right, tol)?;
        let product = fidelity(&r1, &r3, tol)? * fidelity(&r2, &r4, tol)?;
        let sandwich = BoundScalars::compute(&left, &right, tol)?.sandwich_violation();
        samples.push(ProductSample {
            seed: sample_seed,
            dims: [da, db],
            fidelity_product_states: joint,
            product_of_fidelities: product,
            residual: (joint - product).abs(),
            sandwich_violation: sandwich,
        });
    }
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0_f64, f64::max);
    Ok(ProductReport {
        passed: max_residual <= FIDELITY_LAW_TOL,
        samples,
        max_residual,
        tolerance: FIDELITY_LAW_TOL,
    })
}
