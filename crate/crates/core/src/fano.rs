//! Traceless orthonormal operator bases, Fano coefficient matrices, the
//! augmented `T^(n)` construction, spin correlation/covariance matrices, and
//! real SVD utilities on top of them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{expectation, kron, pauli, CMatrix, CVector, RMatrix, RVector, C64};
pub use crate::linalg::{svd_real, RealSvd};
use crate::measurement::{LinearMeasureSpec, NaimarkFrame};
use crate::state::DensityOperator;

#[derive(Debug, Error)]
pub enum FanoError {
    #[error("operator basis needs dimension >= 2, got {0}")]
    DimTooSmall(usize),
    #[error("basis dimensions ({got1}, {got2}) do not match state dims ({d1}, {d2})")]
    BasisMismatch {
        got1: usize,
        got2: usize,
        d1: usize,
        d2: usize,
    },
    #[error("augmented T needs n >= max(d1, d2) = {d}, got n = {n}")]
    ExtensionTooSmall { n: usize, d: usize },
    #[error("spin matrices require two-qubit dims, got ({d1}, {d2})")]
    NonQubit { d1: usize, d2: usize },
    #[error("frames of size {frame} do not match basis dimension {basis}")]
    FrameBasisMismatch { frame: usize, basis: usize },
    #[error("measure table is {rows}x{cols}, expected {n}x{n}")]
    MeasureShape { rows: usize, cols: usize, n: usize },
}

/// Number of measurement outcomes, with an explicit symbolic infinity for
/// the global `T^(inf)` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeCount {
    Finite(usize),
    Infinite,
}

impl fmt::Display for OutcomeCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeCount::Finite(n) => write!(f, "{n}"),
            OutcomeCount::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for OutcomeCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(OutcomeCount::Infinite),
            other => other
                .parse::<usize>()
                .map(OutcomeCount::Finite)
                .map_err(|_| format!("expected a positive integer or 'inf', got '{other}'")),
        }
    }
}

/// Orthonormal basis `{K_p}` of traceless Hermitian operators on `H_n`,
/// normalized so `tr[K_p K_q] = delta_pq`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    matrices: Vec<CMatrix>,
    dim: usize,
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, p: usize) -> &CMatrix {
        &self.matrices[p]
    }
}

/// Generalized Gell-Mann construction: symmetric pairs in lexicographic
/// `(j, k)` order, then antisymmetric pairs, then the diagonal family.
pub fn gell_mann_basis(n: usize) -> Result<OperatorBasis, FanoError> {
    if n < 2 {
        return Err(FanoError::DimTooSmall(n));
    }
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    let mut matrices = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = C64::from(inv_sqrt2);
            m[(k, j)] = C64::from(inv_sqrt2);
            matrices.push(m);
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = C64::new(0.0, -inv_sqrt2);
            m[(k, j)] = C64::new(0.0, inv_sqrt2);
            matrices.push(m);
        }
    }
    for l in 1..n {
        let scale = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(n, n);
        for j in 0..l {
            m[(j, j)] = C64::from(scale);
        }
        m[(l, l)] = C64::from(-(l as f64) * scale);
        matrices.push(m);
    }
    Ok(OperatorBasis { matrices, dim: n })
}

/// Fano coefficients of a bipartite state in a pair of traceless bases:
/// `u_p = <K_p (x) 1>/d2`, `v_q = <1 (x) L_q>/d1`, `T_pq = <K_p (x) L_q>`.
#[derive(Debug, Clone)]
pub struct FanoForm {
    pub u: RVector,
    pub v: RVector,
    pub t: RMatrix,
    basis1: OperatorBasis,
    basis2: OperatorBasis,
}

impl FanoForm {
    pub fn basis1(&self) -> &OperatorBasis {
        &self.basis1
    }

    pub fn basis2(&self) -> &OperatorBasis {
        &self.basis2
    }

    /// Rebuilds the state matrix from `(u, v, T)`.
    pub fn reconstruct(&self) -> CMatrix {
        let d1 = self.basis1.dim();
        let d2 = self.basis2.dim();
        let id1 = CMatrix::identity(d1, d1);
        let id2 = CMatrix::identity(d2, d2);
        let mut m = kron(&id1, &id2).scale(1.0 / (d1 * d2) as f64);
        for (p, kp) in self.basis1.matrices().iter().enumerate() {
            m += kron(kp, &id2).scale(self.u[p]);
        }
        for (q, lq) in self.basis2.matrices().iter().enumerate() {
            m += kron(&id1, lq).scale(self.v[q]);
        }
        for (p, kp) in self.basis1.matrices().iter().enumerate() {
            for (q, lq) in self.basis2.matrices().iter().enumerate() {
                m += kron(kp, lq).scale(self.t[(p, q)]);
            }
        }
        m
    }
}

pub fn fano_coefficients(
    rho: &DensityOperator,
    basis1: &OperatorBasis,
    basis2: &OperatorBasis,
) -> Result<FanoForm, FanoError> {
    let (d1, d2) = rho.dims();
    if basis1.dim() != d1 || basis2.dim() != d2 {
        return Err(FanoError::BasisMismatch {
            got1: basis1.dim(),
            got2: basis2.dim(),
            d1,
            d2,
        });
    }
    let rho1 = rho.reduced(1).expect("side 1");
    let rho2 = rho.reduced(2).expect("side 2");
    let u = RVector::from_iterator(
        basis1.len(),
        basis1
            .matrices()
            .iter()
            .map(|kp| expectation(&rho1, kp).re / d2 as f64),
    );
    let v = RVector::from_iterator(
        basis2.len(),
        basis2
            .matrices()
            .iter()
            .map(|lq| expectation(&rho2, lq).re / d1 as f64),
    );
    let t = RMatrix::from_fn(basis1.len(), basis2.len(), |p, q| {
        expectation(rho.matrix(), &kron(basis1.matrix(p), basis2.matrix(q))).re
    });
    Ok(FanoForm {
        u,
        v,
        t,
        basis1: basis1.clone(),
        basis2: basis2.clone(),
    })
}

/// Covariance block `Tbar_pq = <K_p (x) L_q> - <K_p><L_q>` on the reduced
/// `(p, q >= 1)` rows and columns.
pub fn covariance_t(
    rho: &DensityOperator,
    basis1: &OperatorBasis,
    basis2: &OperatorBasis,
) -> Result<RMatrix, FanoError> {
    let fano = fano_coefficients(rho, basis1, basis2)?;
    let d1 = rho.d1() as f64;
    let d2 = rho.d2() as f64;
    // <K_p> = d2 * u_p and <L_q> = d1 * v_q in the Fano normalization.
    Ok(RMatrix::from_fn(basis1.len(), basis2.len(), |p, q| {
        fano.t[(p, q)] - (d2 * fano.u[p]) * (d1 * fano.v[q])
    }))
}

/// Augmented Fano matrix `T^(n)` including the `K_0`, `L_0` row and column,
/// its scalars, and the bare submatrix `T~`.
#[derive(Debug, Clone)]
pub struct AugmentedT {
    pub matrix: RMatrix,
    pub t_tilde: RMatrix,
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub n: OutcomeCount,
}

impl AugmentedT {
    pub fn singular_values(&self) -> RVector {
        svd_real(&self.matrix).singular_values
    }

    pub fn t_tilde_singular_values(&self) -> RVector {
        svd_real(&self.t_tilde).singular_values
    }
}

/// Builds `T^(n)` for `n >= max(d1, d2)`, or the `n -> infinity` limit where
/// `alpha_i = 1/sqrt(d_i)` and the coefficients reproduce the full Fano form.
/// `beta_i` is defined as 0 when `n = d_i`.
pub fn augmented_t(rho: &DensityOperator, n: OutcomeCount) -> Result<AugmentedT, FanoError> {
    let (d1, d2) = rho.dims();
    let d = d1.max(d2);
    let (alpha1, beta1, alpha2, beta2) = match n {
        OutcomeCount::Finite(n) => {
            if n < d {
                return Err(FanoError::ExtensionTooSmall { n, d });
            }
            let a1 = (1.0 / d1 as f64 - 1.0 / n as f64).max(0.0).sqrt();
            let a2 = (1.0 / d2 as f64 - 1.0 / n as f64).max(0.0).sqrt();
            let b1 = if n == d1 {
                0.0
            } else {
                a1 * d1 as f64 / (n - d1) as f64
            };
            let b2 = if n == d2 {
                0.0
            } else {
                a2 * d2 as f64 / (n - d2) as f64
            };
            (a1, b1, a2, b2)
        }
        OutcomeCount::Infinite => (
            1.0 / (d1 as f64).sqrt(),
            0.0,
            1.0 / (d2 as f64).sqrt(),
            0.0,
        ),
    };

    let basis1 = gell_mann_basis(d1)?;
    let basis2 = gell_mann_basis(d2)?;
    let rho1 = rho.reduced(1).expect("side 1");
    let rho2 = rho.reduced(2).expect("side 2");

    let rows = d1 * d1;
    let cols = d2 * d2;
    let mut matrix = RMatrix::zeros(rows, cols);
    matrix[(0, 0)] = alpha1 * alpha2;
    for (q, lq) in basis2.matrices().iter().enumerate() {
        matrix[(0, q + 1)] = alpha1 * expectation(&rho2, lq).re;
    }
    for (p, kp) in basis1.matrices().iter().enumerate() {
        matrix[(p + 1, 0)] = alpha2 * expectation(&rho1, kp).re;
    }
    let mut t_tilde = RMatrix::zeros(rows - 1, cols - 1);
    for (p, kp) in basis1.matrices().iter().enumerate() {
        for (q, lq) in basis2.matrices().iter().enumerate() {
            let val = expectation(rho.matrix(), &kron(kp, lq)).re;
            matrix[(p + 1, q + 1)] = val;
            t_tilde[(p, q)] = val;
        }
    }
    Ok(AugmentedT {
        matrix,
        t_tilde,
        alpha1,
        beta1,
        alpha2,
        beta2,
        n,
    })
}

/// Spin correlation matrix `S_jk = <sigma_j (x) sigma_k>` and its covariance
/// variant `Sbar = S(rho) - S(rho_1 (x) rho_2)`, with SVD factors on demand.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub s: RMatrix,
    pub s_bar: RMatrix,
}

impl SpinMatrices {
    pub fn svd_s(&self) -> RealSvd {
        svd_real(&self.s)
    }

    pub fn svd_s_bar(&self) -> RealSvd {
        svd_real(&self.s_bar)
    }
}

fn spin_matrix_of(m: &CMatrix) -> RMatrix {
    RMatrix::from_fn(3, 3, |j, k| expectation(m, &kron(&pauli(j), &pauli(k))).re)
}

pub fn spin_matrices(rho: &DensityOperator) -> Result<SpinMatrices, FanoError> {
    let (d1, d2) = rho.dims();
    if d1 != 2 || d2 != 2 {
        return Err(FanoError::NonQubit { d1, d2 });
    }
    let s = spin_matrix_of(rho.matrix());
    let product = kron(
        &rho.reduced(1).expect("side 1"),
        &rho.reduced(2).expect("side 2"),
    );
    let s_bar = &s - spin_matrix_of(&product);
    Ok(SpinMatrices { s, s_bar })
}

/// `S` alone.
pub fn spin_correlation(rho: &DensityOperator) -> Result<RMatrix, FanoError> {
    spin_matrices(rho).map(|m| m.s)
}

/// `Sbar` alone.
pub fn spin_covariance(rho: &DensityOperator) -> Result<RMatrix, FanoError> {
    spin_matrices(rho).map(|m| m.s_bar)
}

/// The measurement matrix `W_pq = sum_j <x_j|L_p|x_j><y_j|L_q|y_j>` of a
/// frame pair in a traceless basis, or its generalization
/// `W^G_pq = sum_jk g_jk <x_j|L_p|x_j><y_k|L_q|y_k>`, together with the
/// probe vectors `f^(j)`, `g^(j)`.
#[derive(Debug, Clone)]
pub struct WMatrix {
    pub w: RMatrix,
    pub f_probes: Vec<RVector>,
    pub g_probes: Vec<RVector>,
}

impl WMatrix {
    pub fn singular_values(&self) -> RVector {
        svd_real(&self.w).singular_values
    }
}

pub fn w_matrix(
    x: &NaimarkFrame,
    y: &NaimarkFrame,
    basis: &OperatorBasis,
    g: Option<&LinearMeasureSpec>,
) -> Result<WMatrix, FanoError> {
    let n = x.n();
    if y.n() != n || basis.dim() != n {
        return Err(FanoError::FrameBasisMismatch {
            frame: y.n(),
            basis: basis.dim(),
        });
    }
    let probe = |ket: &CVector| {
        RVector::from_iterator(
            basis.len(),
            basis.matrices().iter().map(|l| ket.dotc(&(l * ket)).re),
        )
    };
    let f_probes: Vec<RVector> = x.vectors().iter().map(probe).collect();
    let g_probes: Vec<RVector> = y.vectors().iter().map(probe).collect();
    let m = basis.len();
    let w = match g {
        None => {
            let mut w = RMatrix::zeros(m, m);
            for (f, gp) in f_probes.iter().zip(&g_probes) {
                w += f * gp.transpose();
            }
            w
        }
        Some(g) => {
            if g.table().nrows() != n || g.table().ncols() != n {
                return Err(FanoError::MeasureShape {
                    rows: g.table().nrows(),
                    cols: g.table().ncols(),
                    n,
                });
            }
            let mut w = RMatrix::zeros(m, m);
            for (j, f) in f_probes.iter().enumerate() {
                for (k, gp) in g_probes.iter().enumerate() {
                    let gjk = g.table()[(j, k)];
                    if gjk != 0.0 {
                        w += (f * gp.transpose()).scale(gjk);
                    }
                }
            }
            w
        }
    };
    Ok(WMatrix {
        w,
        f_probes,
        g_probes,
    })
}
