//! Complex/real matrix utilities shared by every module.
//!
//! Thin layer over nalgebra: Hermitian eigendecompositions with sorted
//! spectra, full (square-factor) real SVD with a fixed sign convention,
//! unitary retractions, Haar sampling, bipartite index bookkeeping, and
//! partial contractions.
//!
//! Composite index convention: the product ket `|j> ⊗ |k>` on dimensions
//! `(d1, d2)` lives at row `j * d2 + k` (row-major).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `tr[rho * op]` for same-size square matrices.
pub fn expectation(rho: &CMatrix, op: &CMatrix) -> C64 {
    let n = rho.nrows();
    let mut acc = C64::ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += rho[(i, k)] * op[(k, i)];
        }
    }
    acc
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (RVector, CMatrix) {
    let se = nalgebra::linalg::SymmetricEigen::new(hermitian_part(m));
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let vals = RVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
    let mut vecs = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// `exp(i * t * H)` for Hermitian `H`; exactly unitary up to rounding.
pub fn exp_i_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let n = vals.len();
    let phases = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        vals.iter().map(|&l| c(0.0, t * l).exp()),
    ));
    &vecs * phases * vecs.adjoint()
}

/// Complex Ginibre matrix: i.i.d. standard complex Gaussian entries,
/// filled column-major so the draw order is fixed for a given shape.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed random unitary via phase-corrected QR of a Ginibre draw.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    let qr = g.qr();
    let r = qr.r();
    let q = qr.q();
    let phases = CVector::from_iterator(
        n,
        (0..n).map(|i| {
            let d = r[(i, i)];
            if d.norm() < 1e-300 {
                C64::ONE
            } else {
                d / d.norm()
            }
        }),
    );
    q * CMatrix::from_diagonal(&phases)
}

/// Extends `rows` (orthonormal vectors in C^n) to a full orthonormal basis by
/// twice-iterated Gram-Schmidt over the standard basis.
pub fn complete_orthonormal(rows: &[CVector], n: usize) -> Vec<CVector> {
    let mut basis: Vec<CVector> = rows.to_vec();
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = CVector::zeros(n);
        v[i] = C64::ONE;
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v.unscale(norm));
        }
    }
    assert_eq!(basis.len(), n, "orthonormal completion failed");
    basis
}

/// Kronecker product helper (row-major composite index).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Pauli matrix `sigma_k` for `k` in `0..=2` (x, y, z).
pub fn pauli(k: usize) -> CMatrix {
    match k {
        0 => CMatrix::from_row_slice(2, 2, &[C64::ZERO, C64::ONE, C64::ONE, C64::ZERO]),
        1 => CMatrix::from_row_slice(2, 2, &[C64::ZERO, c(0.0, -1.0), c(0.0, 1.0), C64::ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[C64::ONE, C64::ZERO, C64::ZERO, -C64::ONE]),
        _ => panic!("pauli index out of range"),
    }
}

/// `+1` eigenket of `sigma . a` for a unit Bloch direction `a`.
pub fn bloch_ket(a: [f64; 3]) -> CVector {
    let theta = a[2].clamp(-1.0, 1.0).acos();
    let phi = a[1].atan2(a[0]);
    CVector::from_vec(vec![
        cr((theta / 2.0).cos()),
        c(0.0, phi).exp() * (theta / 2.0).sin(),
    ])
}

/// Normalized random ket with i.i.d. complex Gaussian amplitudes.
pub fn random_ket<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.norm();
    v.unscale(norm)
}

pub fn ket_tensor(x: &CVector, y: &CVector) -> CVector {
    let (dx, dy) = (x.len(), y.len());
    CVector::from_fn(dx * dy, |i, _| x[i / dy] * y[i % dy])
}

/// Partial trace of `rho` on `(d1, d2)` over the side NOT kept.
pub fn partial_trace(rho: &CMatrix, d1: usize, d2: usize, keep: u8) -> CMatrix {
    match keep {
        1 => {
            let mut out = CMatrix::zeros(d1, d1);
            for a in 0..d1 {
                for b in 0..d1 {
                    let mut acc = C64::ZERO;
                    for k in 0..d2 {
                        acc += rho[(a * d2 + k, b * d2 + k)];
                    }
                    out[(a, b)] = acc;
                }
            }
            out
        }
        2 => {
            let mut out = CMatrix::zeros(d2, d2);
            for k in 0..d2 {
                for l in 0..d2 {
                    let mut acc = C64::ZERO;
                    for a in 0..d1 {
                        acc += rho[(a * d2 + k, a * d2 + l)];
                    }
                    out[(k, l)] = acc;
                }
            }
            out
        }
        _ => panic!("keep must be 1 or 2"),
    }
}

/// `<y| rho |y>` contracted over side 2: the operator on side 1 with entries
/// `B[a,b] = sum_{c,d} conj(y[c]) rho[(a,c),(b,d)] y[d]`.
pub fn contract_side2(rho: &CMatrix, d1: usize, d2: usize, y: &CVector) -> CMatrix {
    let mut out = CMatrix::zeros(d1, d1);
    for a in 0..d1 {
        for b in 0..d1 {
            let mut acc = C64::ZERO;
            for cc in 0..d2 {
                let yc = y[cc].conj();
                if yc == C64::ZERO {
                    continue;
                }
                for dd in 0..d2 {
                    acc += yc * rho[(a * d2 + cc, b * d2 + dd)] * y[dd];
                }
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// `<x| rho |x>` contracted over side 1: the operator on side 2.
pub fn contract_side1(rho: &CMatrix, d1: usize, d2: usize, x: &CVector) -> CMatrix {
    let mut out = CMatrix::zeros(d2, d2);
    for cc in 0..d2 {
        for dd in 0..d2 {
            let mut acc = C64::ZERO;
            for a in 0..d1 {
                let xa = x[a].conj();
                if xa == C64::ZERO {
                    continue;
                }
                for b in 0..d1 {
                    acc += xa * rho[(a * d2 + cc, b * d2 + dd)] * x[b];
                }
            }
            out[(cc, dd)] = acc;
        }
    }
    out
}

/// Zero-pads a bipartite operator from `(d1, d2)` to `(n, n)`.
pub fn embed_bipartite(rho: &CMatrix, d1: usize, d2: usize, n: usize) -> CMatrix {
    assert!(n >= d1 && n >= d2);
    let mut out = CMatrix::zeros(n * n, n * n);
    for a in 0..d1 {
        for k in 0..d2 {
            for b in 0..d1 {
                for l in 0..d2 {
                    out[(a * n + k, b * n + l)] = rho[(a * d2 + k, b * d2 + l)];
                }
            }
        }
    }
    out
}

/// Full real SVD `M = U D V^T` with square orthogonal factors.
#[derive(Debug, Clone)]
pub struct RealSvd {
    /// `p x p` orthogonal.
    pub u: RMatrix,
    /// Singular values, non-increasing, length `min(p, q)`.
    pub singular_values: RVector,
    /// `q x q` orthogonal.
    pub v: RMatrix,
    pub det_u: f64,
    pub det_v: f64,
}

impl RealSvd {
    /// Reconstructs `U D V^T`.
    pub fn reconstruct(&self) -> RMatrix {
        let (p, q) = (self.u.nrows(), self.v.nrows());
        let mut d = RMatrix::zeros(p, q);
        for (i, s) in self.singular_values.iter().enumerate() {
            d[(i, i)] = *s;
        }
        &self.u * d * self.v.transpose()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.singular_values.get(0).copied().unwrap_or(0.0)
    }

    pub fn trace_norm(&self) -> f64 {
        self.singular_values.sum()
    }
}

/// Real SVD with full orthogonal factors, singular values non-increasing.
/// Columns of `U` paired with nonzero singular values are sign-fixed so their
/// first entry above 1e-12 in magnitude is positive, with the matching column
/// of `V` flipped alongside.
pub fn svd_real(m: &RMatrix) -> RealSvd {
    let (p, q) = (m.nrows(), m.ncols());
    let k = p.min(q);
    let svd = m.clone().svd(true, true);
    let s = svd.singular_values.clone();
    let u_thin = svd.u.expect("svd requested u");
    let v_thin = svd.v_t.expect("svd requested v_t").transpose();

    let mut u = complete_real_basis(&u_thin, p);
    let mut v = complete_real_basis(&v_thin, q);

    for i in 0..k {
        if let Some(lead) = (0..p).find(|&r| u[(r, i)].abs() > 1e-12) {
            if u[(lead, i)] < 0.0 {
                u.column_mut(i).neg_mut();
                v.column_mut(i).neg_mut();
            }
        }
    }
    // Sign-fix completion columns independently; they multiply zero blocks.
    for i in k..p {
        if let Some(lead) = (0..p).find(|&r| u[(r, i)].abs() > 1e-12) {
            if u[(lead, i)] < 0.0 {
                u.column_mut(i).neg_mut();
            }
        }
    }
    for i in k..q {
        if let Some(lead) = (0..q).find(|&r| v[(r, i)].abs() > 1e-12) {
            if v[(lead, i)] < 0.0 {
                v.column_mut(i).neg_mut();
            }
        }
    }

    let det_u = u.determinant();
    let det_v = v.determinant();
    RealSvd {
        u,
        singular_values: s,
        v,
        det_u,
        det_v,
    }
}

fn complete_real_basis(thin: &RMatrix, dim: usize) -> RMatrix {
    let have = thin.ncols();
    let mut cols: Vec<RVector> = (0..have).map(|i| thin.column(i).into_owned()).collect();
    for i in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut v = RVector::zeros(dim);
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &cols {
                let overlap = b.dot(&v);
                v -= b * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v.unscale(norm));
        }
    }
    assert_eq!(cols.len(), dim, "real basis completion failed");
    RMatrix::from_columns(&cols)
}
