//! Bipartite density operators: validation, reduction, Schmidt
//! decomposition, Ginibre sampling, and the named benchmark families.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    self, c, cr, ginibre, hermitian_eigen, hermiticity_residual, ket_tensor, kron, partial_trace,
    pauli, trace, CMatrix, CVector, C64,
};
use crate::tol::Tolerances;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("matrix is {rows}x{cols}, expected square of size {expected}")]
    SizeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NonHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("trace is {trace}, expected 1")]
    WrongTrace { trace: f64 },
    #[error("ket norm is {norm}, expected 1")]
    NonUnitNorm { norm: f64 },
    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("side must be 1 or 2, got {0}")]
    InvalidSide(u8),
    #[error("invalid state parameter: {0}")]
    ParamRange(String),
}

/// Validated bipartite density operator on `H_1 (x) H_2`.
///
/// Immutable after construction; every constructor in this module funnels
/// through [`DensityOperator::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    dims: (usize, usize),
}

impl DensityOperator {
    /// Validates and wraps a matrix as a density operator on dims `(d1, d2)`.
    ///
    /// Hermiticity, unit trace, and positivity are checked against
    /// `tol.validation`; eigenvalues in `[-tol, 0)` are clipped to zero and
    /// the spectrum renormalized.
    pub fn new(matrix: CMatrix, d1: usize, d2: usize) -> Result<Self, StateError> {
        Self::with_tolerances(matrix, d1, d2, &Tolerances::default())
    }

    pub fn with_tolerances(
        matrix: CMatrix,
        d1: usize,
        d2: usize,
        tol: &Tolerances,
    ) -> Result<Self, StateError> {
        let n = d1 * d2;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(StateError::SizeMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: n,
            });
        }
        let residual = hermiticity_residual(&matrix);
        if residual > tol.validation {
            return Err(StateError::NonHermitian { residual });
        }
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > tol.validation {
            return Err(StateError::WrongTrace { trace: tr });
        }
        let herm = linalg::hermitian_part(&matrix);
        let (vals, vecs) = hermitian_eigen(&herm);
        let min_eig = vals[vals.len() - 1];
        if min_eig < -tol.validation {
            return Err(StateError::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        let matrix = if min_eig < 0.0 {
            // Clip the window [-tol, 0) and renormalize the spectrum.
            let clipped: Vec<f64> = vals.iter().map(|&l| l.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            let d = CMatrix::from_diagonal(&CVector::from_iterator(
                vals.len(),
                clipped.iter().map(|&l| cr(l / total)),
            ));
            &vecs * d * vecs.adjoint()
        } else {
            herm
        };
        Ok(Self {
            matrix,
            dims: (d1, d2),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn d1(&self) -> usize {
        self.dims.0
    }

    pub fn d2(&self) -> usize {
        self.dims.1
    }

    pub fn total_dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    /// Partial trace over the other side; `side` selects the kept component.
    pub fn reduced(&self, side: u8) -> Result<CMatrix, StateError> {
        match side {
            1 | 2 => Ok(partial_trace(&self.matrix, self.dims.0, self.dims.1, side)),
            other => Err(StateError::InvalidSide(other)),
        }
    }

    pub fn purity(&self) -> f64 {
        linalg::expectation(&self.matrix, &self.matrix).re
    }
}

/// Unit-norm pure ket on `H_1 (x) H_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureKet {
    amplitudes: CVector,
    dims: (usize, usize),
}

impl PureKet {
    pub fn new(amplitudes: CVector, d1: usize, d2: usize) -> Result<Self, StateError> {
        Self::with_tolerances(amplitudes, d1, d2, &Tolerances::default())
    }

    pub fn with_tolerances(
        amplitudes: CVector,
        d1: usize,
        d2: usize,
        tol: &Tolerances,
    ) -> Result<Self, StateError> {
        if amplitudes.len() != d1 * d2 {
            return Err(StateError::SizeMismatch {
                rows: amplitudes.len(),
                cols: 1,
                expected: d1 * d2,
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol.validation {
            return Err(StateError::NonUnitNorm { norm });
        }
        Ok(Self {
            amplitudes,
            dims: (d1, d2),
        })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn to_density(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator::new(m, self.dims.0, self.dims.1).expect("projector of a unit ket")
    }
}

/// Biorthogonal expansion of a pure ket with non-increasing coefficients.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    /// Nonnegative, non-increasing; squares sum to one.
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<CVector>,
    pub right_basis: Vec<CVector>,
}

impl SchmidtForm {
    /// Rebuilds the ket `sum_j c_j |a_j> (x) |b_j>`.
    pub fn reconstruct(&self) -> CVector {
        let d1 = self.left_basis[0].len();
        let d2 = self.right_basis[0].len();
        let mut out = CVector::zeros(d1 * d2);
        for (j, &coef) in self.coefficients.iter().enumerate() {
            out += ket_tensor(&self.left_basis[j], &self.right_basis[j]).scale(coef);
        }
        out
    }
}

/// Schmidt decomposition of a unit ket via SVD of its amplitude matrix.
pub fn schmidt_decompose(ket: &PureKet) -> SchmidtForm {
    let (d1, d2) = ket.dims();
    let amp = DMatrix::from_fn(d1, d2, |j, k| ket.amplitudes()[j * d2 + k]);
    let svd = amp.svd(true, true);
    let u = svd.u.expect("svd with u");
    let w = svd.v_t.expect("svd with v_t");
    let k = svd.singular_values.len();
    let coefficients: Vec<f64> = svd.singular_values.iter().copied().collect();
    let left_basis: Vec<CVector> = (0..k).map(|m| u.column(m).into_owned()).collect();
    let right_basis: Vec<CVector> = (0..k).map(|m| w.row(m).transpose()).collect();
    SchmidtForm {
        coefficients,
        left_basis,
        right_basis,
    }
}

/// Von Neumann entropy in bits of a Hermitian, PSD, trace-one matrix.
pub fn von_neumann_entropy(m: &CMatrix) -> Result<f64, StateError> {
    von_neumann_entropy_with(m, &Tolerances::default())
}

pub fn von_neumann_entropy_with(m: &CMatrix, tol: &Tolerances) -> Result<f64, StateError> {
    let residual = hermiticity_residual(m);
    if residual > tol.validation {
        return Err(StateError::NonHermitian { residual });
    }
    let tr = trace(m).re;
    if (tr - 1.0).abs() > tol.validation {
        return Err(StateError::WrongTrace { trace: tr });
    }
    let (vals, _) = hermitian_eigen(m);
    let min_eig = vals[vals.len() - 1];
    if min_eig < -tol.validation {
        return Err(StateError::NotPositive {
            min_eigenvalue: min_eig,
        });
    }
    Ok(vals
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum())
}

/// Ginibre-induced random state `G G^dag / tr[G G^dag]` with `G` of shape
/// `(d1 d2) x rank`. Deterministic for a fixed seed.
pub fn random_density(
    d1: usize,
    d2: usize,
    rank: usize,
    seed: u64,
) -> Result<DensityOperator, StateError> {
    let n = d1 * d2;
    if rank == 0 || rank > n {
        return Err(StateError::RankOutOfRange { rank, max: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_from_rng(d1, d2, rank, &mut rng)
}

/// Same sampler with a caller-owned RNG, for deriving independent sub-streams.
pub fn random_density_from_rng<R: Rng + ?Sized>(
    d1: usize,
    d2: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator, StateError> {
    let n = d1 * d2;
    if rank == 0 || rank > n {
        return Err(StateError::RankOutOfRange { rank, max: n });
    }
    let g = ginibre(n, rank, rng);
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityOperator::new(m.unscale(tr), d1, d2)
}

/// Random convex mixture of product states `sum_i w_i rho_i (x) sigma_i`;
/// separable by construction. Deterministic for a fixed seed.
pub fn random_separable(
    d1: usize,
    d2: usize,
    terms: usize,
    seed: u64,
) -> Result<DensityOperator, StateError> {
    if terms == 0 {
        return Err(StateError::ParamRange("terms must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut m = CMatrix::zeros(d1 * d2, d1 * d2);
    for w in weights {
        let left = random_density_from_rng(1, d1, d1, &mut rng)?;
        let right = random_density_from_rng(1, d2, d2, &mut rng)?;
        m += kron(left.matrix(), right.matrix()).scale(w);
    }
    DensityOperator::new(m, d1, d2)
}

/// Named benchmark states with exact matrix constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
pub enum NamedStateSpec {
    /// Two-qubit singlet `|Psi->`.
    Singlet,
    /// `w |Psi-><Psi-| + (1-w)/3 (1 - |Psi-><Psi-|)`.
    Isotropic { w: f64 },
    /// Two-qudit Werner family parametrized by the swap expectation `x`.
    Werner { d: usize, x: f64 },
    /// Maximally entangled two-qubit pair `(|11> + |22>)/sqrt(2)` used by the
    /// trine and mirror-family demonstrations.
    TrineDemo,
    /// `l1 |z><z| (x) tau1 + l2 |-z><-z| (x) tau2`.
    SeparableZ {
        lambda1: f64,
        lambda2: f64,
        /// 2x2 density matrices as `[[re, im]; ...]` rows.
        tau1: Vec<Vec<[f64; 2]>>,
        tau2: Vec<Vec<[f64; 2]>>,
    },
    /// Product of two qubit states with Bloch vectors `m` and `n`.
    Product { m: [f64; 3], n: [f64; 3] },
    /// Mixture of pure states sharing the computational Schmidt basis:
    /// `sum_a w_a |psi_a><psi_a|` with
    /// `|psi_a> = sum_j sqrt(p_j^a) exp(i phi_j^a) |j>|j>`.
    SchmidtMixture {
        weights: Vec<f64>,
        #[serde(default)]
        phases: Option<Vec<Vec<f64>>>,
        schmidt_probs: Vec<Vec<f64>>,
    },
}

/// Builds the exact matrix for a named state.
pub fn named_state(spec: &NamedStateSpec) -> Result<DensityOperator, StateError> {
    match spec {
        NamedStateSpec::Singlet => DensityOperator::new(singlet_projector(), 2, 2),
        NamedStateSpec::Isotropic { w } => {
            if !(0.0..=1.0).contains(w) {
                return Err(StateError::ParamRange(format!("w = {w} outside [0, 1]")));
            }
            let p = singlet_projector();
            let triplet = CMatrix::identity(4, 4) - &p;
            DensityOperator::new(p.scale(*w) + triplet.scale((1.0 - w) / 3.0), 2, 2)
        }
        NamedStateSpec::Werner { d, x } => {
            if *d < 2 {
                return Err(StateError::ParamRange(format!("d = {d} must be >= 2")));
            }
            if !(-1.0..=1.0).contains(x) {
                return Err(StateError::ParamRange(format!("x = {x} outside [-1, 1]")));
            }
            let d = *d;
            let n = d * d;
            let mut swap = CMatrix::zeros(n, n);
            for j in 0..d {
                for k in 0..d {
                    swap[(j * d + k, k * d + j)] = C64::ONE;
                }
            }
            let id = CMatrix::identity(n, n);
            let coef = (x - 1.0 / d as f64) / (n as f64 - 1.0);
            let m = id.scale(1.0 / n as f64) + (swap - id.scale(1.0 / d as f64)).scale(coef);
            DensityOperator::new(m, d, d)
        }
        NamedStateSpec::TrineDemo => {
            let mut amp = CVector::zeros(4);
            amp[0] = cr(1.0 / 2f64.sqrt());
            amp[3] = cr(1.0 / 2f64.sqrt());
            Ok(PureKet::new(amp, 2, 2)?.to_density())
        }
        NamedStateSpec::SeparableZ {
            lambda1,
            lambda2,
            tau1,
            tau2,
        } => {
            if *lambda1 < 0.0 || *lambda2 < 0.0 || (lambda1 + lambda2 - 1.0).abs() > 1e-12 {
                return Err(StateError::ParamRange(
                    "weights must be nonnegative and sum to 1".into(),
                ));
            }
            let t1 = matrix_from_rows(tau1, 2)?;
            let t2 = matrix_from_rows(tau2, 2)?;
            for t in [&t1, &t2] {
                DensityOperator::new(t.clone(), 1, 2)?;
            }
            let z = CMatrix::from_partial_diagonal(2, 2, &[C64::ONE]);
            let mz = CMatrix::from_partial_diagonal(2, 2, &[C64::ZERO, C64::ONE]);
            let m = kron(&z, &t1).scale(*lambda1) + kron(&mz, &t2).scale(*lambda2);
            DensityOperator::new(m, 2, 2)
        }
        NamedStateSpec::Product { m, n } => {
            for (name, v) in [("m", m), ("n", n)] {
                let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if len > 1.0 + 1e-12 {
                    return Err(StateError::ParamRange(format!(
                        "Bloch vector {name} has length {len} > 1"
                    )));
                }
            }
            let rho1 = bloch_density(*m);
            let rho2 = bloch_density(*n);
            DensityOperator::new(kron(&rho1, &rho2), 2, 2)
        }
        NamedStateSpec::SchmidtMixture {
            weights,
            phases,
            schmidt_probs,
        } => {
            if weights.is_empty() || weights.len() != schmidt_probs.len() {
                return Err(StateError::ParamRange(
                    "weights and schmidt_probs must have matching nonzero length".into(),
                ));
            }
            if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
                || weights.iter().any(|&w| w < 0.0)
            {
                return Err(StateError::ParamRange(
                    "mixture weights must be nonnegative and sum to 1".into(),
                ));
            }
            let d = schmidt_probs[0].len();
            for probs in schmidt_probs {
                if probs.len() != d {
                    return Err(StateError::ParamRange(
                        "all schmidt_probs rows must share one length".into(),
                    ));
                }
                if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12
                    || probs.iter().any(|&p| p < 0.0)
                {
                    return Err(StateError::ParamRange(
                        "each schmidt_probs row must be a probability vector".into(),
                    ));
                }
            }
            if let Some(rows) = phases {
                if rows.len() != weights.len() || rows.iter().any(|r| r.len() != d) {
                    return Err(StateError::ParamRange(
                        "phases must match weights x schmidt_probs shape".into(),
                    ));
                }
            }
            let mut m = CMatrix::zeros(d * d, d * d);
            for (alpha, (&w, probs)) in weights.iter().zip(schmidt_probs).enumerate() {
                let mut ket = CVector::zeros(d * d);
                for (j, &p) in probs.iter().enumerate() {
                    let phi = phases.as_ref().map_or(0.0, |rows| rows[alpha][j]);
                    ket[j * d + j] = c(0.0, phi).exp() * p.sqrt();
                }
                m += (&ket * ket.adjoint()).scale(w);
            }
            DensityOperator::new(m, d, d)
        }
    }
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>], n: usize) -> Result<CMatrix, StateError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(StateError::SizeMismatch {
            rows: rows.len(),
            cols: rows.first().map_or(0, Vec::len),
            expected: n,
        });
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

fn bloch_density(v: [f64; 3]) -> CMatrix {
    let mut m = CMatrix::identity(2, 2);
    for (k, &component) in v.iter().enumerate() {
        m += pauli(k).scale(component);
    }
    m.scale(0.5)
}

fn singlet_projector() -> CMatrix {
    let mut amp = CVector::zeros(4);
    amp[1] = cr(1.0 / 2f64.sqrt());
    amp[2] = cr(-1.0 / 2f64.sqrt());
    &amp * amp.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::bloch_ket;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_state(entries: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            entries.len(),
            entries.iter().map(|&x| cr(x)),
        ))
    }

    #[test]
    fn singlet_is_valid() {
        let rho = named_state(&NamedStateSpec::Singlet).unwrap();
        assert_eq!(rho.dims(), (2, 2));
        assert_relative_eq!(rho.purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        let err = DensityOperator::new(diag_state(&[2.0, -1.0, 0.0, 0.0]), 2, 2).unwrap_err();
        assert!(matches!(err, StateError::NotPositive { .. }));
    }

    #[test]
    fn wrong_trace_rejected() {
        let err = DensityOperator::new(diag_state(&[1.0, 1.0, 0.0, 0.0]), 2, 2).unwrap_err();
        assert!(matches!(err, StateError::WrongTrace { .. }));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = diag_state(&[0.5, 0.5, 0.0, 0.0]);
        m[(0, 1)] = cr(1e-3);
        let err = DensityOperator::new(m, 2, 2).unwrap_err();
        assert!(matches!(err, StateError::NonHermitian { .. }));
    }

    #[test]
    fn size_mismatch_rejected() {
        let err = DensityOperator::new(diag_state(&[0.5, 0.5]), 2, 2).unwrap_err();
        assert!(matches!(err, StateError::SizeMismatch { .. }));
    }

    #[test]
    fn tiny_negative_eigenvalues_clipped_and_renormalized() {
        let eps = 5e-13;
        let m = diag_state(&[0.5 + eps, 0.5, -eps, 0.0]);
        let rho = DensityOperator::new(m, 2, 2).unwrap();
        let (vals, _) = hermitian_eigen(rho.matrix());
        assert!(vals[vals.len() - 1] >= 0.0);
        assert_relative_eq!(trace(rho.matrix()).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn reduced_singlet_is_maximally_mixed() {
        let rho = named_state(&NamedStateSpec::Singlet).unwrap();
        for side in [1, 2] {
            let red = rho.reduced(side).unwrap();
            assert!(linalg::max_abs(&(red - CMatrix::identity(2, 2).scale(0.5))) < 1e-12);
        }
        assert!(matches!(rho.reduced(3), Err(StateError::InvalidSide(3))));
    }

    #[test]
    fn reduced_product_factorizes() {
        let m = [0.3, -0.4, 0.5];
        let n = [0.0, 0.0, -0.9];
        let rho = named_state(&NamedStateSpec::Product { m, n }).unwrap();
        let red1 = rho.reduced(1).unwrap();
        assert!(linalg::max_abs(&(red1 - bloch_density(m))) < 1e-12);
        let red2 = rho.reduced(2).unwrap();
        assert!(linalg::max_abs(&(red2 - bloch_density(n))) < 1e-12);
    }

    #[test]
    fn pure_state_reduced_spectra_coincide() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for &(d1, d2) in &[(2usize, 2usize), (2, 3), (3, 3)] {
            let ket = PureKet::new(linalg::random_ket(d1 * d2, &mut rng), d1, d2).unwrap();
            let rho = ket.to_density();
            let (e1, _) = hermitian_eigen(&rho.reduced(1).unwrap());
            let (e2, _) = hermitian_eigen(&rho.reduced(2).unwrap());
            for j in 0..d1.min(d2) {
                assert_relative_eq!(e1[j], e2[j], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn entropy_values() {
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert_relative_eq!(von_neumann_entropy(&half).unwrap(), 1.0, epsilon = 1e-12);

        let proj = diag_state(&[1.0, 0.0]);
        assert_relative_eq!(von_neumann_entropy(&proj).unwrap(), 0.0, epsilon = 1e-12);

        // Oracle: direct eigenvalue formula for diag(3/4, 1/4).
        let expected = 2.0 - 0.75 * 3f64.log2();
        let got = von_neumann_entropy(&diag_state(&[0.75, 0.25])).unwrap();
        assert_relative_eq!(got, expected, epsilon = 1e-12);
        assert_relative_eq!(got, 0.811278, epsilon = 1e-6);

        assert!(von_neumann_entropy(&diag_state(&[0.75, 0.75])).is_err());
    }

    #[test]
    fn schmidt_of_bell_state() {
        let mut amp = CVector::zeros(4);
        amp[0] = cr(1.0 / 2f64.sqrt());
        amp[3] = cr(1.0 / 2f64.sqrt());
        let ket = PureKet::new(amp, 2, 2).unwrap();
        let schmidt = schmidt_decompose(&ket);
        assert_relative_eq!(schmidt.coefficients[0], 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(schmidt.coefficients[1], 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        let rebuilt = schmidt.reconstruct();
        let overlap = rebuilt.dotc(ket.amplitudes()).norm();
        assert_relative_eq!(overlap, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn schmidt_of_product_ket_has_single_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let u = linalg::random_ket(2, &mut rng);
        let v = linalg::random_ket(3, &mut rng);
        let ket = PureKet::new(ket_tensor(&u, &v), 2, 3).unwrap();
        let schmidt = schmidt_decompose(&ket);
        assert_relative_eq!(schmidt.coefficients[0], 1.0, epsilon = 1e-12);
        for &coef in &schmidt.coefficients[1..] {
            assert!(coef < 1e-12);
        }
    }

    #[test]
    fn schmidt_coefficients_match_reduced_spectrum() {
        // Oracle: squared coefficients equal eigenvalues of the reduced state.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let ket = PureKet::new(linalg::random_ket(9, &mut rng), 3, 3).unwrap();
        let schmidt = schmidt_decompose(&ket);
        let (evals, _) = hermitian_eigen(&ket.to_density().reduced(1).unwrap());
        for (j, &coef) in schmidt.coefficients.iter().enumerate() {
            assert_relative_eq!(coef * coef, evals[j], epsilon = 1e-10);
        }
        let total: f64 = schmidt.coefficients.iter().map(|&x| x * x).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_density_is_deterministic() {
        let a = random_density(2, 2, 4, 7).unwrap();
        let b = random_density(2, 2, 4, 7).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn random_density_rank_one_is_pure() {
        let rho = random_density(2, 2, 1, 5).unwrap();
        assert_relative_eq!(rho.purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_density_rank_matches_support() {
        let rho = random_density(2, 3, 6, 13).unwrap();
        let (vals, _) = hermitian_eigen(rho.matrix());
        let support = vals.iter().filter(|&&l| l > 1e-10).count();
        assert_eq!(support, 6);
        assert!(matches!(
            random_density(2, 3, 7, 0),
            Err(StateError::RankOutOfRange { .. })
        ));
        assert!(matches!(
            random_density(2, 3, 0, 0),
            Err(StateError::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn isotropic_limit_is_singlet() {
        let iso = named_state(&NamedStateSpec::Isotropic { w: 1.0 }).unwrap();
        let singlet = named_state(&NamedStateSpec::Singlet).unwrap();
        assert!(linalg::max_abs(&(iso.matrix() - singlet.matrix())) < 1e-14);
        assert!(named_state(&NamedStateSpec::Isotropic { w: 1.5 }).is_err());
    }

    #[test]
    fn werner_qubit_matches_isotropic() {
        for &w in &[0.0, 0.3, 0.71, 1.0] {
            let iso = named_state(&NamedStateSpec::Isotropic { w }).unwrap();
            let werner = named_state(&NamedStateSpec::Werner {
                d: 2,
                x: 1.0 - 2.0 * w,
            })
            .unwrap();
            assert!(linalg::max_abs(&(iso.matrix() - werner.matrix())) < 1e-13);
        }
    }

    #[test]
    fn product_of_z_states_is_basis_projector() {
        let rho = named_state(&NamedStateSpec::Product {
            m: [0.0, 0.0, 1.0],
            n: [0.0, 0.0, 1.0],
        })
        .unwrap();
        let expected = diag_state(&[1.0, 0.0, 0.0, 0.0]);
        assert!(linalg::max_abs(&(rho.matrix() - expected)) < 1e-14);
        assert!(named_state(&NamedStateSpec::Product {
            m: [1.0, 1.0, 0.0],
            n: [0.0, 0.0, 0.0],
        })
        .is_err());
    }

    #[test]
    fn schmidt_mixture_marginal_probabilities() {
        let spec = NamedStateSpec::SchmidtMixture {
            weights: vec![0.5, 0.5],
            phases: None,
            schmidt_probs: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        let rho = named_state(&spec).unwrap();
        // Diagonal in the shared basis with P = (1/2, 1/2) on |jj>.
        assert_relative_eq!(rho.matrix()[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(rho.matrix()[(3, 3)].re, 0.5, epsilon = 1e-12);
        let bad = NamedStateSpec::SchmidtMixture {
            weights: vec![0.7, 0.5],
            phases: None,
            schmidt_probs: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        assert!(named_state(&bad).is_err());
    }

    #[test]
    fn bloch_ket_matches_projector() {
        for &a in &[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.6f64, -0.64, 0.48]] {
            let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
            let unit = [a[0] / norm, a[1] / norm, a[2] / norm];
            let ket = bloch_ket(unit);
            let proj = &ket * ket.adjoint();
            assert!(linalg::max_abs(&(proj - bloch_density(unit))) < 1e-12);
        }
    }
}
