//! Density matrices and pure states.
//!
//! A [`DensityMatrix`] can only be obtained through validation, so holding one
//! means the matrix was Hermitian, PSD and unit-trace within the tolerances in
//! force at construction.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};

const PURE_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    Square,
    Finite,
    Hermitian,
    PositiveSemidefinite,
    UnitTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: Invariant,
    #[serde(with = "crate::serde_float")]
    pub residual: f64,
}

/// Every density-matrix invariant that failed, with its numeric residual.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn residual(&self, invariant: Invariant) -> Option<f64> {
        self.violations
            .iter()
            .find(|v| v.invariant == invariant)
            .map(|v| v.residual)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{:?} (residual {:.3e})", v.invariant, v.residual))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    label: Option<String>,
}

impl DensityMatrix {
    /// Validates `matrix` against `tol`.
    pub fn new(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        validate_density(matrix, tol).map_err(Error::InvalidDensity)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `U ρ U^†`
    pub fn conjugate(&self, unitary: &CMatrix, tol: &Tolerances) -> Result<Self> {
        if unitary.nrows() != self.dim() || !unitary.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: unitary.nrows(),
            });
        }
        let m = unitary * &self.matrix * unitary.adjoint();
        Ok(Self::new(m, tol)?.labelled(self.label.clone()))
    }

    fn labelled(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DensityFile::from(self))?)
    }

    /// Parses the JSON file format and validates against `tol`.
    pub fn from_json(text: &str, tol: &Tolerances) -> Result<Self> {
        let file: DensityFile = serde_json::from_str(text)?;
        file.into_density(tol)
    }
}

/// On-disk form: `{"dim": d, "matrix": [[[re, im], ...], ...], "label": ...}`,
/// rows outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl From<&DensityMatrix> for DensityFile {
    fn from(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let matrix = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let z = rho.matrix[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        Self {
            dim: d,
            matrix,
            label: rho.label.clone(),
        }
    }
}

impl DensityFile {
    pub fn into_density(self, tol: &Tolerances) -> Result<DensityMatrix> {
        let mut report = ValidationReport::default();
        let rows = self.matrix.len();
        let square =
            rows == self.dim && self.dim > 0 && self.matrix.iter().all(|r| r.len() == self.dim);
        if !square {
            report.violations.push(Violation {
                invariant: Invariant::Square,
                residual: rows.abs_diff(self.dim) as f64,
            });
            return Err(Error::InvalidDensity(report));
        }
        let m = CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.matrix[i][j];
            c(re, im)
        });
        let rho = DensityMatrix::new(m, tol)?;
        Ok(rho.labelled(self.label))
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = DensityFile::deserialize(d)?;
        file.into_density(&Tolerances::default())
            .map_err(serde::de::Error::custom)
    }
}

/// Checks every density-matrix invariant and reports all that fail.
pub fn validate_density(
    matrix: CMatrix,
    tol: &Tolerances,
) -> std::result::Result<DensityMatrix, ValidationReport> {
    let mut report = ValidationReport::default();
    if !matrix.is_square() || matrix.nrows() == 0 {
        report.violations.push(Violation {
            invariant: Invariant::Square,
            residual: matrix.nrows().abs_diff(matrix.ncols()) as f64,
        });
        return Err(report);
    }
    let non_finite = matrix
        .iter()
        .filter(|z| !z.re.is_finite() || !z.im.is_finite())
        .count();
    if non_finite > 0 {
        report.violations.push(Violation {
            invariant: Invariant::Finite,
            residual: non_finite as f64,
        });
        return Err(report);
    }

    let herm = linalg::hermiticity_residual(&matrix);
    if herm > tol.herm * matrix.norm() {
        report.violations.push(Violation {
            invariant: Invariant::Hermitian,
            residual: herm,
        });
    }

    // Spectrum of the Hermitian part, so positivity is reported even when
    // Hermiticity already failed.
    let sym = (&matrix + matrix.adjoint()).scale(0.5);
    match linalg::hermitian_eigen(&sym, tol) {
        Ok(eig) => {
            let min = eig.min_eigenvalue();
            if min < -tol.psd {
                report.violations.push(Violation {
                    invariant: Invariant::PositiveSemidefinite,
                    residual: -min,
                });
            }
        }
        Err(_) => report.violations.push(Violation {
            invariant: Invariant::PositiveSemidefinite,
            residual: f64::NAN,
        }),
    }

    let trace_residual = (matrix.trace() - c(1.0, 0.0)).norm();
    if trace_residual > tol.trace {
        report.violations.push(Violation {
            invariant: Invariant::UnitTrace,
            residual: trace_residual,
        });
    }

    if report.is_empty() {
        Ok(DensityMatrix {
            matrix,
            label: None,
        })
    } else {
        Err(report)
    }
}

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::RangeError(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::RangeError("cannot normalise a zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::RangeError(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        Ok(Self {
            amplitudes: linalg::basis_vector(dim, index),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> CMatrix {
        linalg::outer(&self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(),
            label: None,
        }
    }

    /// `|self> ⊗ |other>`
    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: linalg::tensor_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    pub fn tensor_power(&self, n: u32) -> PureState {
        let mut acc = CVector::from_element(1, c(1.0, 0.0));
        for _ in 0..n {
            acc = linalg::tensor_vec(&acc, &self.amplitudes);
        }
        PureState { amplitudes: acc }
    }

    /// The state vector of a rank-1 density matrix, up to global phase.
    pub fn from_density(rho: &DensityMatrix, tol: &Tolerances) -> Result<Self> {
        let eig = linalg::hermitian_eigen(rho.matrix(), tol)?;
        let rank = eig.rank(tol);
        if rank != 1 {
            return Err(Error::PreconditionFailed {
                what: "rank of a state passed as pure".into(),
                value: rank as f64,
            });
        }
        Self::normalized(eig.eigenvector(0))
    }

    /// Two states in `dim` dimensions with `<ψ1|ψ2> = overlap` (real, nonnegative):
    /// `ψ1 = e_1`, `ψ2 = overlap e_1 + sqrt(1 - overlap²) e_2`.
    pub fn pair_with_overlap(overlap: f64, dim: usize) -> Result<(PureState, PureState)> {
        if !(0.0..=1.0).contains(&overlap) || dim < 2 {
            return Err(Error::RangeError(format!(
                "overlap {overlap} must be in [0, 1] and dim {dim} >= 2"
            )));
        }
        let psi1 = Self::basis(dim, 0)?;
        let mut amps = CVector::zeros(dim);
        amps[0] = c(overlap, 0.0);
        amps[1] = c((1.0 - overlap * overlap).max(0.0).sqrt(), 0.0);
        Ok((psi1, Self::normalized(amps)?))
    }
}

/// `Σ_i w_i |v_i><v_i|`. The vectors need not be orthogonal.
pub fn density_from_mixture(
    weights: &[f64],
    vectors: &[PureState],
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    if weights.len() != vectors.len() {
        return Err(Error::WeightError(format!(
            "{} weights for {} vectors",
            weights.len(),
            vectors.len()
        )));
    }
    let first = vectors.first().ok_or(Error::EmptyInput)?;
    let dim = first.dim();
    if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        });
    }
    if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
        return Err(Error::WeightError(format!("negative weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > tol.trace {
        return Err(Error::WeightError(format!("weights sum to {total}, not 1")));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for (w, v) in weights.iter().zip(vectors) {
        m += v.projector().scale(*w);
    }
    DensityMatrix::new(m, tol)
}

fn check_open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::RangeError(format!(
            "{name} = {x} must lie in (0, 1)"
        )))
    }
}

/// The three-state family
///
/// ```text
/// ρ'1 = a1|γ1><γ1| + (1-a1)|γ2><γ2|
/// ρ'2 = b1|γ2><γ2| + (1-b1)|γ3><γ3|
/// ρ'3 = c1|γ1><γ1| + (1-c1)|γ3><γ3|
/// ```
///
/// with `γ_i` the first three standard basis vectors of a `dim`-dimensional space.
pub fn counterexample_states(a1: f64, b1: f64, c1: f64, dim: usize) -> Result<[DensityMatrix; 3]> {
    if dim < 3 {
        return Err(Error::RangeError(format!(
            "dimension {dim} must be at least 3"
        )));
    }
    counterexample_states_in_basis(a1, b1, c1, &linalg::identity(dim))
}

/// Same family with `γ_i` taken as the first three columns of `basis`.
pub fn counterexample_states_in_basis(
    a1: f64,
    b1: f64,
    c1: f64,
    basis: &CMatrix,
) -> Result<[DensityMatrix; 3]> {
    check_open_unit("a1", a1)?;
    check_open_unit("b1", b1)?;
    check_open_unit("c1", c1)?;
    let dim = basis.nrows();
    if dim < 3 || basis.ncols() < 3 {
        return Err(Error::RangeError(format!(
            "need three basis vectors in dimension >= 3, got {}x{}",
            basis.nrows(),
            basis.ncols()
        )));
    }
    let gamma: Vec<CVector> = (0..3).map(|i| basis.column(i).into_owned()).collect();
    let gram = CMatrix::from_fn(3, 3, |i, j| gamma[i].dotc(&gamma[j]));
    if (gram - linalg::identity(3)).norm() > 1e-10 {
        return Err(Error::RangeError(
            "basis vectors are not orthonormal".into(),
        ));
    }
    let tol = Tolerances::default();
    let mix = |w: f64, i: usize, j: usize, label: &str| -> Result<DensityMatrix> {
        let m = linalg::outer(&gamma[i]).scale(w) + linalg::outer(&gamma[j]).scale(1.0 - w);
        Ok(DensityMatrix::new(m, &tol)?.with_label(label))
    };
    Ok([
        mix(a1, 0, 1, "rho'1")?,
        mix(b1, 1, 2, "rho'2")?,
        mix(c1, 0, 2, "rho'3")?,
    ])
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im)
}

/// `G G^† / Tr(G G^†)` for a `dim x rank` complex Gaussian `G` drawn from `seed`.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::RangeError(format!(
            "rank {rank} must satisfy 1 <= rank <= dim = {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(dim, rank, |_, _| complex_gaussian(&mut rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr), &Tolerances::default())
}

/// Haar-random pure state.
pub fn random_pure_state(dim: usize, seed: u64) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::RangeError("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = CVector::from_fn(dim, |_, _| complex_gaussian(&mut rng));
    PureState::normalized(v)
}

/// Haar-random unitary via QR of a complex Gaussian matrix with phase fixing.
pub fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(&mut rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}
