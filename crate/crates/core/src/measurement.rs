//! Maximal (rank-one) probability operator measures, their orthogonal
//! Naimark lifts, joint outcome statistics, and the correlation functionals
//! evaluated at fixed measurements.

use thiserror::Error;

use crate::linalg::{
    bloch_ket, complete_orthonormal, hermitian_eigen, ket_tensor, kron, max_abs, CMatrix, CVector,
    RMatrix, RVector, C64,
};
use crate::state::DensityOperator;
use crate::tol::Tolerances;

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error("ket {index} has dimension {got}, expected {expected}")]
    KetDimension {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("completeness violated: max |sum_j |a_j><a_j| - 1| = {residual:.3e}")]
    Completeness { residual: f64 },
    #[error("Naimark extension needs n >= {outcomes} outcomes, got n = {n}")]
    ExtensionTooSmall { n: usize, outcomes: usize },
    #[error("POM dimensions ({got_a}, {got_b}) do not match state dims ({d1}, {d2})")]
    DimensionMismatch {
        got_a: usize,
        got_b: usize,
        d1: usize,
        d2: usize,
    },
    #[error("outcome counts differ: {a} vs {b}")]
    OutcomeCountMismatch { a: usize, b: usize },
    #[error("table is {rows}x{cols}, expected square")]
    NonSquareTable { rows: usize, cols: usize },
    #[error("coefficient table is {rows}x{cols}, expected {want_rows}x{want_cols}")]
    MeasureShape {
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("coefficient table contains a non-finite entry")]
    NonFiniteMeasure,
    #[error("spin direction must be a nonzero 3-vector")]
    ZeroSpinDirection,
}

/// Maximal POM `{|a_j><a_j|}` with the completeness constraint
/// `sum_j |a_j><a_j| = 1`. Kets may be unnormalized or zero (trivially
/// extended outcomes).
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalPOM {
    kets: Vec<CVector>,
    dim: usize,
}

impl MaximalPOM {
    pub fn new(kets: Vec<CVector>, dim: usize) -> Result<Self, MeasurementError> {
        Self::with_tolerances(kets, dim, &Tolerances::default())
    }

    pub fn with_tolerances(
        kets: Vec<CVector>,
        dim: usize,
        tol: &Tolerances,
    ) -> Result<Self, MeasurementError> {
        for (index, ket) in kets.iter().enumerate() {
            if ket.len() != dim {
                return Err(MeasurementError::KetDimension {
                    index,
                    got: ket.len(),
                    expected: dim,
                });
            }
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for ket in &kets {
            sum += ket * ket.adjoint();
        }
        let residual = max_abs(&(sum - CMatrix::identity(dim, dim)));
        if residual > tol.reconstruction {
            return Err(MeasurementError::Completeness { residual });
        }
        Ok(Self { kets, dim })
    }

    /// Orthogonal POM from the columns of a unitary.
    pub fn from_unitary_columns(u: &CMatrix) -> Result<Self, MeasurementError> {
        let n = u.ncols();
        Self::new((0..n).map(|j| u.column(j).into_owned()).collect(), u.nrows())
    }

    /// Standard-basis orthogonal POM on dimension `d`.
    pub fn computational(d: usize) -> Self {
        let kets = (0..d)
            .map(|j| {
                let mut v = CVector::zeros(d);
                v[j] = C64::ONE;
                v
            })
            .collect();
        Self::new(kets, d).expect("basis projectors are complete")
    }

    /// Two-outcome spin POM `{|a><a|, |-a><-a|}` along Bloch direction `a`
    /// (normalized internally).
    pub fn spin(a: [f64; 3]) -> Result<Self, MeasurementError> {
        let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if norm < 1e-14 {
            return Err(MeasurementError::ZeroSpinDirection);
        }
        // `+ 0.0` turns -0.0 into +0.0 so atan2 yields a canonical phase.
        let unit = [a[0] / norm + 0.0, a[1] / norm + 0.0, a[2] / norm + 0.0];
        let anti = [-unit[0] + 0.0, -unit[1] + 0.0, -unit[2] + 0.0];
        Self::new(vec![bloch_ket(unit), bloch_ket(anti)], 2)
    }

    /// Symmetric three-outcome trine POM `sqrt(2/3) |phi_j>` on a qubit.
    pub fn trine() -> Self {
        let w = (2.0f64 / 3.0).sqrt();
        let phi1 = CVector::from_vec(vec![C64::ONE, C64::ZERO]);
        let phi2 = CVector::from_vec(vec![C64::from(0.5), C64::from(3f64.sqrt() / 2.0)]);
        let phi3 = CVector::from_vec(vec![C64::from(0.5), C64::from(-(3f64.sqrt()) / 2.0)]);
        Self::new(vec![phi1.scale(w), phi2.scale(w), phi3.scale(w)], 2)
            .expect("trine is complete")
    }

    /// Pads with zero kets up to `n` outcomes.
    pub fn padded(&self, n: usize) -> Self {
        let mut kets = self.kets.clone();
        while kets.len() < n {
            kets.push(CVector::zeros(self.dim));
        }
        Self {
            kets,
            dim: self.dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_outcomes(&self) -> usize {
        self.kets.len()
    }

    pub fn kets(&self) -> &[CVector] {
        &self.kets
    }

    pub fn ket(&self, j: usize) -> &CVector {
        &self.kets[j]
    }
}

/// Orthogonal lift of a maximal POM: orthonormal kets `|x_j>` on `H_n` whose
/// projections onto the first `dim` coordinates reproduce the source kets.
#[derive(Debug, Clone)]
pub struct NaimarkFrame {
    vectors: Vec<CVector>,
    dim: usize,
}

impl NaimarkFrame {
    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    /// Physical subspace dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> &CVector {
        &self.vectors[j]
    }

    /// Projector from `H_n` onto the first `dim` coordinates.
    pub fn projection(&self) -> CMatrix {
        let n = self.n();
        CMatrix::from_fn(n, n, |i, j| {
            if i == j && i < self.dim {
                C64::ONE
            } else {
                C64::ZERO
            }
        })
    }

    /// `E |x_j>` as a ket on the physical space.
    pub fn projected_ket(&self, j: usize) -> CVector {
        self.vectors[j].rows(0, self.dim).into_owned()
    }

    /// The lifted orthogonal POM on `H_n`.
    pub fn as_pom(&self) -> MaximalPOM {
        MaximalPOM::new(self.vectors.clone(), self.n()).expect("orthonormal frame is complete")
    }

    /// Unitary whose columns are the frame vectors.
    pub fn unitary(&self) -> CMatrix {
        CMatrix::from_columns(&self.vectors)
    }

    /// Reinterprets the columns of a unitary as a frame over a
    /// `dim`-dimensional physical subspace.
    pub fn from_unitary(u: &CMatrix, dim: usize) -> Self {
        let n = u.ncols();
        assert!(dim <= n);
        Self {
            vectors: (0..n).map(|j| u.column(j).into_owned()).collect(),
            dim,
        }
    }
}

/// Constructive Naimark extension: the POM kets form the first `d` rows of an
/// `n x n` unitary (orthonormal rows by completeness); the remaining rows are
/// filled by Gram-Schmidt completion. Column `j` is the lifted `|x_j>`.
pub fn naimark_extend(pom: &MaximalPOM, n: usize) -> Result<NaimarkFrame, MeasurementError> {
    if n < pom.n_outcomes() {
        return Err(MeasurementError::ExtensionTooSmall {
            n,
            outcomes: pom.n_outcomes(),
        });
    }
    let d = pom.dim();
    let padded = pom.padded(n);
    let rows: Vec<CVector> = (0..d)
        .map(|c| CVector::from_fn(n, |j, _| padded.ket(j)[c]))
        .collect();
    let completed = complete_orthonormal(&rows, n);
    let vectors: Vec<CVector> = (0..n)
        .map(|j| CVector::from_fn(n, |r, _| completed[r][j]))
        .collect();
    Ok(NaimarkFrame { vectors, dim: d })
}

/// Joint outcome table `p_jk = tr[rho A_j (x) B_k]` with marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    table: RMatrix,
    marginal_a: RVector,
    marginal_b: RVector,
}

impl JointDistribution {
    pub fn from_table(table: RMatrix) -> Self {
        let marginal_a = RVector::from_iterator(table.nrows(), table.row_iter().map(|r| r.sum()));
        let marginal_b =
            RVector::from_iterator(table.ncols(), table.column_iter().map(|c| c.sum()));
        Self {
            table,
            marginal_a,
            marginal_b,
        }
    }

    pub fn table(&self) -> &RMatrix {
        &self.table
    }

    pub fn marginal_a(&self) -> &RVector {
        &self.marginal_a
    }

    pub fn marginal_b(&self) -> &RVector {
        &self.marginal_b
    }
}

pub fn joint_distribution(
    rho: &DensityOperator,
    a: &MaximalPOM,
    b: &MaximalPOM,
) -> Result<JointDistribution, MeasurementError> {
    let (d1, d2) = rho.dims();
    if a.dim() != d1 || b.dim() != d2 {
        return Err(MeasurementError::DimensionMismatch {
            got_a: a.dim(),
            got_b: b.dim(),
            d1,
            d2,
        });
    }
    let table = RMatrix::from_fn(a.n_outcomes(), b.n_outcomes(), |j, k| {
        let w = ket_tensor(a.ket(j), b.ket(k));
        let p = w.dotc(&(rho.matrix() * &w)).re;
        if p < 0.0 {
            debug_assert!(p > -1e-12, "probability {p} below clipping window");
            0.0
        } else {
            p
        }
    });
    Ok(JointDistribution::from_table(table))
}

/// `sum_j p_jj` for a square table.
pub fn coincidence_rate(dist: &JointDistribution) -> Result<f64, MeasurementError> {
    let t = dist.table();
    if t.nrows() != t.ncols() {
        return Err(MeasurementError::NonSquareTable {
            rows: t.nrows(),
            cols: t.ncols(),
        });
    }
    Ok(t.diagonal().sum())
}

/// Coincidence rate of a POM pair on a state.
pub fn coincidence(
    rho: &DensityOperator,
    a: &MaximalPOM,
    b: &MaximalPOM,
) -> Result<f64, MeasurementError> {
    if a.n_outcomes() != b.n_outcomes() {
        return Err(MeasurementError::OutcomeCountMismatch {
            a: a.n_outcomes(),
            b: b.n_outcomes(),
        });
    }
    coincidence_rate(&joint_distribution(rho, a, b)?)
}

/// Mutual information in bits, standard nonnegative convention
/// `sum p_jk log2(p_jk / (p_j q_k))` with zero-probability terms dropped.
pub fn mutual_information(dist: &JointDistribution) -> f64 {
    let t = dist.table();
    let mut acc = 0.0;
    for j in 0..t.nrows() {
        for k in 0..t.ncols() {
            let p = t[(j, k)];
            if p > 0.0 {
                acc += p * (p / (dist.marginal_a()[j] * dist.marginal_b()[k])).log2();
            }
        }
    }
    acc
}

/// Shannon entropy in bits of a probability vector.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Coefficient table for a general linear correlation measure
/// `G = sum_jk g_jk p_jk`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMeasureSpec {
    g: RMatrix,
}

impl LinearMeasureSpec {
    pub fn new(g: RMatrix) -> Result<Self, MeasurementError> {
        if g.iter().any(|x| !x.is_finite()) {
            return Err(MeasurementError::NonFiniteMeasure);
        }
        Ok(Self { g })
    }

    /// The coincidence choice `g_jk = delta_jk`.
    pub fn coincidence(n: usize) -> Self {
        Self {
            g: RMatrix::identity(n, n),
        }
    }

    pub fn table(&self) -> &RMatrix {
        &self.g
    }
}

pub fn linear_measure(
    dist: &JointDistribution,
    g: &LinearMeasureSpec,
) -> Result<f64, MeasurementError> {
    let t = dist.table();
    if g.table().nrows() != t.nrows() || g.table().ncols() != t.ncols() {
        return Err(MeasurementError::MeasureShape {
            rows: g.table().nrows(),
            cols: g.table().ncols(),
            want_rows: t.nrows(),
            want_cols: t.ncols(),
        });
    }
    Ok(t.zip_fold(g.table(), 0.0, |acc, p, gg| acc + p * gg))
}

/// Covariance variant `G(rho) - G(rho_1 (x) rho_2)`; vanishes for
/// uncorrelated states.
pub fn covariance_measure(
    rho: &DensityOperator,
    a: &MaximalPOM,
    b: &MaximalPOM,
    g: &LinearMeasureSpec,
) -> Result<f64, MeasurementError> {
    let full = linear_measure(&joint_distribution(rho, a, b)?, g)?;
    let product = DensityOperator::new(
        kron(
            &rho.reduced(1).expect("side 1"),
            &rho.reduced(2).expect("side 2"),
        ),
        rho.d1(),
        rho.d2(),
    )
    .expect("product of reduced states is a state");
    let uncorrelated = linear_measure(&joint_distribution(&product, a, b)?, g)?;
    Ok(full - uncorrelated)
}

/// `sum_j (p_jj - p_j q_j)` for a square table.
pub fn corr(dist: &JointDistribution) -> Result<f64, MeasurementError> {
    let t = dist.table();
    if t.nrows() != t.ncols() {
        return Err(MeasurementError::NonSquareTable {
            rows: t.nrows(),
            cols: t.ncols(),
        });
    }
    Ok((0..t.nrows())
        .map(|j| t[(j, j)] - dist.marginal_a()[j] * dist.marginal_b()[j])
        .sum())
}

/// `K_AB = sum_j |a_j><a_j| (x) |b_j><b_j|` together with its largest
/// eigenvalue; bounds the coincidence rate of every state measured by (A, B).
#[derive(Debug, Clone)]
pub struct CoincidenceOperator {
    matrix: CMatrix,
    max_eigenvalue: f64,
}

impl CoincidenceOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }
}

pub fn coincidence_operator(
    a: &MaximalPOM,
    b: &MaximalPOM,
) -> Result<CoincidenceOperator, MeasurementError> {
    if a.n_outcomes() != b.n_outcomes() {
        return Err(MeasurementError::OutcomeCountMismatch {
            a: a.n_outcomes(),
            b: b.n_outcomes(),
        });
    }
    let dim = a.dim() * b.dim();
    let mut matrix = CMatrix::zeros(dim, dim);
    for j in 0..a.n_outcomes() {
        let pa = a.ket(j) * a.ket(j).adjoint();
        let pb = b.ket(j) * b.ket(j).adjoint();
        matrix += kron(&pa, &pb);
    }
    let (vals, _) = hermitian_eigen(&matrix);
    Ok(CoincidenceOperator {
        matrix,
        max_eigenvalue: vals[0],
    })
}
