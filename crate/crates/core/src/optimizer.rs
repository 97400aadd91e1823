//! Variational maximization of coincidence rate over maximal orthogonal POM
//! pairs on the Naimark space.
//!
//! Frames are columns of unitaries on `H_n`; all variations are generated by
//! Hermitian pairs `(M, N)` through the retraction `X <- exp(i e M) X`,
//! `Y <- exp(i e N) Y`. The exact first variation drives gradient ascent with
//! backtracking line search; stationary points are certified through the
//! extremality equations, the discrimination (state-exclusion) operator
//! inequalities, and the exact second-variation quadratic form.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    c, contract_side1, contract_side2, embed_bipartite, exp_i_hermitian, frobenius, haar_unitary,
    hermitian_eigen, hermitian_part, hermiticity_residual, ket_tensor, trace, CMatrix, CVector,
    RMatrix, C64,
};
use crate::measurement::{MaximalPOM, MeasurementError, NaimarkFrame};
use crate::state::{DensityOperator, StateError};
use crate::tol::HESSIAN_GAUGE_BAND;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("optimizer needs n >= max(d1, d2) = {d}, got n = {n}")]
    ExtensionTooSmall { n: usize, d: usize },
    #[error("outcome counts differ: {a} vs {b}")]
    OutcomeCountMismatch { a: usize, b: usize },
    #[error("frames are not extremal (first-order residual {residual:.3e} > {threshold:.1e})")]
    NotExtremal { residual: f64, threshold: f64 },
    #[error("second-order probe space too large: n = {n} exceeds cap {cap}")]
    ProbeSpaceTooLarge { n: usize, cap: usize },
    #[error("mirror-family parameter {0} outside [0, 1]")]
    MirrorParameter(f64),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// A pair of orthogonal frames on `H_n` together with the state embedded in
/// `H_n (x) H_n`. The embedding zero-pads, so `(E (x) F) rho = rho` holds by
/// construction.
#[derive(Debug, Clone)]
pub struct FramePair {
    x: CMatrix,
    y: CMatrix,
    rho: CMatrix,
    n: usize,
    d1: usize,
    d2: usize,
}

impl FramePair {
    /// Identity frames over the embedded state.
    pub fn new(rho: &DensityOperator, n: usize) -> Result<Self, OptimizerError> {
        let (d1, d2) = rho.dims();
        let d = d1.max(d2);
        if n < d {
            return Err(OptimizerError::ExtensionTooSmall { n, d });
        }
        Ok(Self {
            x: CMatrix::identity(n, n),
            y: CMatrix::identity(n, n),
            rho: embed_bipartite(rho.matrix(), d1, d2, n),
            n,
            d1,
            d2,
        })
    }

    pub fn with_frames(
        rho: &DensityOperator,
        n: usize,
        x: CMatrix,
        y: CMatrix,
    ) -> Result<Self, OptimizerError> {
        let mut pair = Self::new(rho, n)?;
        assert_eq!(x.nrows(), n);
        assert_eq!(y.nrows(), n);
        pair.x = x;
        pair.y = y;
        Ok(pair)
    }

    pub fn from_frames(
        rho: &DensityOperator,
        x: &NaimarkFrame,
        y: &NaimarkFrame,
    ) -> Result<Self, OptimizerError> {
        if x.n() != y.n() {
            return Err(OptimizerError::OutcomeCountMismatch { a: x.n(), b: y.n() });
        }
        Self::with_frames(rho, x.n(), x.unitary(), y.unitary())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self) -> &CMatrix {
        &self.x
    }

    pub fn y(&self) -> &CMatrix {
        &self.y
    }

    pub fn embedded_rho(&self) -> &CMatrix {
        &self.rho
    }

    fn column(m: &CMatrix, j: usize) -> CVector {
        m.column(j).into_owned()
    }

    /// `sum_j <x_j, y_j| rho |x_j, y_j>`.
    pub fn coincidence(&self) -> f64 {
        (0..self.n)
            .map(|j| {
                let w = ket_tensor(&Self::column(&self.x, j), &Self::column(&self.y, j));
                w.dotc(&(&self.rho * &w)).re
            })
            .sum()
    }

    /// `<y_j| rho |y_j>` on side 1.
    fn b_operator(&self, j: usize) -> CMatrix {
        contract_side2(&self.rho, self.n, self.n, &Self::column(&self.y, j))
    }

    /// `<x_j| rho |x_j>` on side 2.
    fn a_operator(&self, j: usize) -> CMatrix {
        contract_side1(&self.rho, self.n, self.n, &Self::column(&self.x, j))
    }

    /// Maximal POMs on the physical spaces obtained by projecting the frames.
    pub fn to_poms(&self) -> (MaximalPOM, MaximalPOM) {
        let a_kets: Vec<CVector> = (0..self.n)
            .map(|j| self.x.column(j).rows(0, self.d1).into_owned())
            .collect();
        let b_kets: Vec<CVector> = (0..self.n)
            .map(|j| self.y.column(j).rows(0, self.d2).into_owned())
            .collect();
        let a = MaximalPOM::new(a_kets, self.d1).expect("projected frame is complete");
        let b = MaximalPOM::new(b_kets, self.d2).expect("projected frame is complete");
        (a, b)
    }

    pub fn frames(&self) -> (NaimarkFrame, NaimarkFrame) {
        (
            NaimarkFrame::from_unitary(&self.x, self.d1),
            NaimarkFrame::from_unitary(&self.y, self.d2),
        )
    }

    /// Applies the retraction `X <- exp(i e M) X`, `Y <- exp(i e N) Y`.
    pub fn retract(&self, m: &CMatrix, nn: &CMatrix, step: f64) -> Self {
        Self {
            x: exp_i_hermitian(m, step) * &self.x,
            y: exp_i_hermitian(nn, step) * &self.y,
            rho: self.rho.clone(),
            n: self.n,
            d1: self.d1,
            d2: self.d2,
        }
    }
}

/// Hermitian ascent generators: moving along `exp(i e G)` increases the
/// coincidence rate to first order, with
/// `dC/de = tr[M G_M] + tr[N G_N]` for probe generators `(M, N)`.
pub fn gradient(pair: &FramePair) -> (CMatrix, CMatrix) {
    let n = pair.n();
    let mut gamma_m = CMatrix::zeros(n, n);
    let mut gamma_n = CMatrix::zeros(n, n);
    for j in 0..n {
        let xj = pair.x.column(j).into_owned();
        let yj = pair.y.column(j).into_owned();
        let proj_x = &xj * xj.adjoint();
        let proj_y = &yj * yj.adjoint();
        let b = pair.b_operator(j);
        let a = pair.a_operator(j);
        gamma_m += &proj_x * &b - &b * &proj_x;
        gamma_n += &proj_y * &a - &a * &proj_y;
    }
    let g_m = hermitian_part(&(gamma_m * c(0.0, 1.0)));
    let g_n = hermitian_part(&(gamma_n * c(0.0, 1.0)));
    (g_m, g_n)
}

/// Options controlling the multi-start ascent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Haar-random restarts in addition to the spectrally informed start.
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Gradient-norm stopping threshold.
    pub tol: f64,
    /// Largest `n` for which the second-variation matrix is assembled.
    pub hessian_cap: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            seed: 0,
            max_iters: 5000,
            tol: 1e-10,
            hessian_cap: 6,
        }
    }
}

/// Second-order classification of a stationary frame pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    LocalMax,
    Saddle,
    LocalMin,
    Indeterminate,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::LocalMax => "local_max",
            Classification::Saddle => "saddle",
            Classification::LocalMin => "local_min",
            Classification::Indeterminate => "indeterminate",
        };
        write!(f, "{s}")
    }
}

/// Lagrange multipliers `V = sum_j <b_j|rho|b_j> |a_j><a_j|` and the mirrored
/// `W`. Their traces equal the coincidence rate identically; Hermiticity
/// holds exactly at extremal pairs.
#[derive(Debug, Clone)]
pub struct MultiplierPair {
    pub v: CMatrix,
    pub w: CMatrix,
    pub v_hermiticity: f64,
    pub w_hermiticity: f64,
    pub trace_v: f64,
    pub trace_w: f64,
}

/// Max violation of the stationarity equations plus the multipliers.
pub fn extremality_residual(
    rho: &DensityOperator,
    a: &MaximalPOM,
    b: &MaximalPOM,
) -> Result<(f64, MultiplierPair), OptimizerError> {
    if a.n_outcomes() != b.n_outcomes() {
        return Err(OptimizerError::OutcomeCountMismatch {
            a: a.n_outcomes(),
            b: b.n_outcomes(),
        });
    }
    let n = a.n_outcomes();
    let m = rho.matrix();
    let element = |ka: &CVector, kb: &CVector, kc: &CVector, kd: &CVector| -> C64 {
        let left = ket_tensor(ka, kb);
        let right = ket_tensor(kc, kd);
        left.dotc(&(m * right))
    };
    let mut residual: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k == l {
                continue;
            }
            let first = element(a.ket(k), b.ket(l), a.ket(l), b.ket(l))
                - element(a.ket(k), b.ket(k), a.ket(l), b.ket(k));
            let second = element(a.ket(k), b.ket(l), a.ket(k), b.ket(k))
                - element(a.ket(l), b.ket(l), a.ket(l), b.ket(k));
            residual = residual.max(first.norm()).max(second.norm());
        }
    }
    let multipliers = multiplier_pair(rho, a, b);
    Ok((residual, multipliers))
}

fn multiplier_pair(rho: &DensityOperator, a: &MaximalPOM, b: &MaximalPOM) -> MultiplierPair {
    let (d1, d2) = rho.dims();
    let mut v = CMatrix::zeros(d1, d1);
    let mut w = CMatrix::zeros(d2, d2);
    for j in 0..a.n_outcomes() {
        let b_op = contract_side2(rho.matrix(), d1, d2, b.ket(j));
        let a_op = contract_side1(rho.matrix(), d1, d2, a.ket(j));
        v += b_op * (a.ket(j) * a.ket(j).adjoint());
        w += a_op * (b.ket(j) * b.ket(j).adjoint());
    }
    MultiplierPair {
        v_hermiticity: hermiticity_residual(&v),
        w_hermiticity: hermiticity_residual(&w),
        trace_v: trace(&v).re,
        trace_w: trace(&w).re,
        v,
        w,
    }
}

/// One side of the state-discrimination reading of an extremal pair: the
/// ensemble `{sigma_j; p_j}` prepared by the partner measurement, the
/// multiplier playing the Helstrom operator, and the operator-inequality
/// flag `Upsilon >= p_j sigma_j`.
#[derive(Debug, Clone)]
pub struct DiscriminationSide {
    pub probabilities: Vec<f64>,
    pub states: Vec<CMatrix>,
    pub upsilon: CMatrix,
    /// `min_j lambda_min(Upsilon - p_j sigma_j)`.
    pub min_eigenvalue: f64,
    pub optimal: bool,
    /// `|Upsilon - sum_j p_j sigma_j Pi_j|` reconstruction residual.
    pub consistency_residual: f64,
}

#[derive(Debug, Clone)]
pub struct DiscriminationReport {
    pub side_a: DiscriminationSide,
    pub side_b: DiscriminationSide,
}

/// Checks the operator inequalities `V >= <b_j|rho|b_j>` and
/// `W >= <a_j|rho|a_j>` tying extremality to optimal discrimination.
pub fn discrimination_check(
    rho: &DensityOperator,
    a: &MaximalPOM,
    b: &MaximalPOM,
) -> Result<DiscriminationReport, OptimizerError> {
    let (d1, d2) = rho.dims();
    let mult = multiplier_pair(rho, a, b);

    let side = |upsilon: &CMatrix,
                ensemble_ops: Vec<CMatrix>,
                pom: &MaximalPOM|
     -> DiscriminationSide {
        let herm = hermitian_part(upsilon);
        let mut min_eig = f64::INFINITY;
        let mut probabilities = Vec::with_capacity(ensemble_ops.len());
        let mut states = Vec::with_capacity(ensemble_ops.len());
        let mut reconstructed = CMatrix::zeros(upsilon.nrows(), upsilon.ncols());
        for (j, op) in ensemble_ops.iter().enumerate() {
            let (vals, _) = hermitian_eigen(&(&herm - op));
            min_eig = min_eig.min(vals[vals.len() - 1]);
            let p = trace(op).re;
            probabilities.push(p);
            states.push(if p > 1e-15 {
                op.unscale(p)
            } else {
                CMatrix::zeros(op.nrows(), op.ncols())
            });
            reconstructed += op * (pom.ket(j) * pom.ket(j).adjoint());
        }
        let consistency_residual = frobenius(&(upsilon - reconstructed));
        DiscriminationSide {
            probabilities,
            states,
            upsilon: upsilon.clone(),
            min_eigenvalue: min_eig,
            optimal: min_eig >= -1e-9,
            consistency_residual,
        }
    };

    let b_ops: Vec<CMatrix> = (0..b.n_outcomes())
        .map(|j| contract_side2(rho.matrix(), d1, d2, b.ket(j)))
        .collect();
    let a_ops: Vec<CMatrix> = (0..a.n_outcomes())
        .map(|j| contract_side1(rho.matrix(), d1, d2, a.ket(j)))
        .collect();
    Ok(DiscriminationReport {
        side_a: side(&mult.v, b_ops, a),
        side_b: side(&mult.w, a_ops, b),
    })
}

/// Orthonormal Hermitian basis of `n x n` matrices: diagonal units first,
/// then symmetric and antisymmetric pairs scaled by `1/sqrt(2)`.
fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut m = CMatrix::zeros(n, n);
        m[(j, j)] = C64::ONE;
        out.push(m);
    }
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = C64::from(inv_sqrt2);
            m[(k, j)] = C64::from(inv_sqrt2);
            out.push(m);
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = c(0.0, -inv_sqrt2);
            m[(k, j)] = c(0.0, inv_sqrt2);
            out.push(m);
        }
    }
    out
}

/// Exact second variation `d2C(M, N) = -sum_j <x_j, y_j|[K, [K, rho]]|x_j, y_j>`
/// with `K = M (x) 1 + 1 (x) N`; matches the second derivative of
/// `C(exp(i e M) X, exp(i e N) Y)` at `e = 0`.
pub fn hessian_quadratic_form(pair: &FramePair, m: &CMatrix, nn: &CMatrix) -> f64 {
    debug_assert!(hermiticity_residual(m) < 1e-12, "probe M must be Hermitian");
    debug_assert!(hermiticity_residual(nn) < 1e-12, "probe N must be Hermitian");
    let n = pair.n();
    let id = CMatrix::identity(n, n);
    let k = m.kronecker(&id) + id.kronecker(nn);
    let inner = &k * pair.embedded_rho() - pair.embedded_rho() * &k;
    let outer = &k * &inner - &inner * &k;
    -(0..n)
        .map(|j| {
            let w = ket_tensor(
                &pair.x.column(j).into_owned(),
                &pair.y.column(j).into_owned(),
            );
            w.dotc(&(&outer * &w)).re
        })
        .sum::<f64>()
}

/// Second-variation spectrum after removal of gauge directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecondOrder {
    pub classification: Classification,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Probe directions inside the dead-band `|lambda| <= 1e-9`.
    pub gauge_count: usize,
}

/// Assembles the second-variation quadratic form on the `2 n^2`-dimensional
/// real probe space and classifies the stationary pair from its spectrum.
/// Gauge directions (dead-band `|lambda| <= 1e-9`) are excluded; `local_max`
/// means the form is nonpositive on every remaining probe.
pub fn second_order_classify(
    rho: &DensityOperator,
    x: &NaimarkFrame,
    y: &NaimarkFrame,
    hessian_cap: usize,
) -> Result<SecondOrder, OptimizerError> {
    let pair = FramePair::from_frames(rho, x, y)?;
    let n = pair.n();
    if n > hessian_cap {
        return Err(OptimizerError::ProbeSpaceTooLarge { n, cap: hessian_cap });
    }
    let (a, b) = pair.to_poms();
    let (residual, _) = extremality_residual(rho, &a, &b)?;
    if residual > 1e-8 {
        return Err(OptimizerError::NotExtremal {
            residual,
            threshold: 1e-8,
        });
    }
    Ok(classify_pair(&pair))
}

fn classify_pair(pair: &FramePair) -> SecondOrder {
    let n = pair.n();
    let basis = hermitian_basis(n);
    let dim = 2 * n * n;
    let id = CMatrix::identity(n, n);

    // Full generators K_a = M_a (x) 1 for the first n^2 probes, 1 (x) N_a after.
    let k_ops: Vec<CMatrix> = basis
        .iter()
        .map(|m| m.kronecker(&id))
        .chain(basis.iter().map(|m| id.kronecker(m)))
        .collect();
    let w_vecs: Vec<CVector> = (0..n)
        .map(|j| {
            ket_tensor(
                &pair.x.column(j).into_owned(),
                &pair.y.column(j).into_owned(),
            )
        })
        .collect();
    // phi_b = [K_b, rho]; u_j^a = K_a w_j; H_ab = -2 sum_j Re <u_j^a | phi_b w_j>.
    let rho = pair.embedded_rho();
    let phi: Vec<CMatrix> = k_ops.iter().map(|k| k * rho - rho * k).collect();
    let u: Vec<Vec<CVector>> = k_ops
        .iter()
        .map(|k| w_vecs.iter().map(|w| k * w).collect())
        .collect();
    let v: Vec<Vec<CVector>> = phi
        .iter()
        .map(|p| w_vecs.iter().map(|w| p * w).collect())
        .collect();
    let mut h = RMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let mut acc = 0.0;
            for j in 0..n {
                acc += u[a][j].dotc(&v[b][j]).re;
            }
            h[(a, b)] = -2.0 * acc;
        }
    }
    let h = (h.transpose() + &h).scale(0.5);
    let eig = nalgebra::linalg::SymmetricEigen::new(h);
    let mut min_eigenvalue = f64::INFINITY;
    let mut max_eigenvalue = f64::NEG_INFINITY;
    let mut gauge_count = 0;
    for &l in eig.eigenvalues.iter() {
        if l.abs() <= HESSIAN_GAUGE_BAND {
            gauge_count += 1;
            continue;
        }
        min_eigenvalue = min_eigenvalue.min(l);
        max_eigenvalue = max_eigenvalue.max(l);
    }
    let has_pos = max_eigenvalue > HESSIAN_GAUGE_BAND;
    let has_neg = min_eigenvalue < -HESSIAN_GAUGE_BAND;
    let classification = match (has_pos, has_neg) {
        (false, false) => Classification::Indeterminate,
        (false, true) => Classification::LocalMax,
        (true, false) => Classification::LocalMin,
        (true, true) => Classification::Saddle,
    };
    if gauge_count == eig.eigenvalues.len() {
        min_eigenvalue = 0.0;
        max_eigenvalue = 0.0;
    }
    SecondOrder {
        classification,
        min_eigenvalue,
        max_eigenvalue,
        gauge_count,
    }
}

/// Per-run bookkeeping for multi-start ascent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartStats {
    pub runs: usize,
    pub converged_runs: usize,
    pub best_run: usize,
    pub best_iterations: usize,
}

/// Certified outcome of a coincidence-rate maximization.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub n: usize,
    pub coincidence: f64,
    pub gradient_norm: f64,
    pub extremality_residual: f64,
    pub multipliers: MultiplierPair,
    pub pom_a: MaximalPOM,
    pub pom_b: MaximalPOM,
    pub frame_x: CMatrix,
    pub frame_y: CMatrix,
    pub discrimination_a: bool,
    pub discrimination_b: bool,
    /// Both discrimination inequalities hold, certifying the n-restricted
    /// maximum as a local maximum among all maximal POMs.
    pub corollary_local_max: bool,
    pub classification: Classification,
    pub hessian_min: Option<f64>,
    pub hessian_max: Option<f64>,
    pub converged: bool,
    pub restarts: RestartStats,
}

struct AscentOutcome {
    pair: FramePair,
    coincidence: f64,
    gradient_norm: f64,
    iterations: usize,
    converged: bool,
}

fn ascend(mut pair: FramePair, max_iters: usize, tol: f64) -> AscentOutcome {
    let mut value = pair.coincidence();
    let mut gradient_norm = f64::INFINITY;
    let mut iterations = 0;
    for iter in 0..max_iters {
        iterations = iter;
        let (g_m, g_n) = gradient(&pair);
        let g2 = frobenius(&g_m).powi(2) + frobenius(&g_n).powi(2);
        gradient_norm = g2.sqrt();
        if gradient_norm < tol {
            return AscentOutcome {
                pair,
                coincidence: value,
                gradient_norm,
                iterations,
                converged: true,
            };
        }
        // Exact curvature along the gradient direction gives the 1D Newton
        // step; a bare first-increase rule crawls on degenerate maxima.
        let curvature = hessian_quadratic_form(&pair, &g_m, &g_n);
        let mut step = if curvature < -1e-14 {
            (g2 / -curvature).min(4.0)
        } else {
            1.0
        };
        let mut accepted: Option<(FramePair, f64)> = None;
        let mut best_fallback: Option<(FramePair, f64)> = None;
        while step > 1e-18 {
            let candidate = pair.retract(&g_m, &g_n, step);
            let candidate_value = candidate.coincidence();
            if candidate_value - value >= 0.3 * step * g2 {
                accepted = Some((candidate, candidate_value));
                break;
            }
            if candidate_value > value
                && best_fallback
                    .as_ref()
                    .is_none_or(|(_, best)| candidate_value > *best)
            {
                best_fallback = Some((candidate, candidate_value));
            }
            step *= 0.5;
        }
        match accepted.or(best_fallback) {
            Some((candidate, candidate_value)) => {
                debug_assert!(candidate_value >= value);
                pair = candidate;
                value = candidate_value;
            }
            None => {
                // Ascent stalled at the floating-point floor; treat tiny
                // leftover gradients as converged.
                return AscentOutcome {
                    pair,
                    coincidence: value,
                    gradient_norm,
                    iterations,
                    converged: gradient_norm < 1e-6,
                };
            }
        }
    }
    AscentOutcome {
        pair,
        coincidence: value,
        gradient_norm,
        iterations,
        converged: false,
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Sub-seed for a derived random stream; used to hand independent seeds to
/// restarts and scan workers.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

fn spectral_start(rho: &DensityOperator, n: usize) -> (CMatrix, CMatrix) {
    let embed = |m: &CMatrix, d: usize| {
        let (_, vecs) = hermitian_eigen(m);
        let mut u = CMatrix::identity(n, n);
        for i in 0..d {
            for j in 0..d {
                u[(i, j)] = vecs[(i, j)];
            }
        }
        u
    };
    (
        embed(&rho.reduced(1).expect("side 1"), rho.d1()),
        embed(&rho.reduced(2).expect("side 2"), rho.d2()),
    )
}

/// Multi-start maximization of `C^(n)`: one spectrally informed start
/// (eigenbases of the reduced states), `restarts` Haar-random starts, plus
/// any caller-supplied frame pairs (used for chain-informed warm starts).
pub fn optimize_coincidence_seeded(
    rho: &DensityOperator,
    n: usize,
    options: &OptimizeOptions,
    extra_starts: &[(CMatrix, CMatrix)],
) -> Result<OptimizationResult, OptimizerError> {
    let d = rho.d1().max(rho.d2());
    if n < d {
        return Err(OptimizerError::ExtensionTooSmall { n, d });
    }
    let mut starts: Vec<(CMatrix, CMatrix)> = Vec::with_capacity(2 + options.restarts);
    starts.push(spectral_start(rho, n));
    for (x, y) in extra_starts {
        starts.push((x.clone(), y.clone()));
    }
    for r in 0..options.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed, r as u64));
        starts.push((haar_unitary(n, &mut rng), haar_unitary(n, &mut rng)));
    }

    let outcomes: Vec<AscentOutcome> = starts
        .into_par_iter()
        .map(|(x, y)| {
            let pair = FramePair::with_frames(rho, n, x, y).expect("validated n");
            ascend(pair, options.max_iters, options.tol)
        })
        .collect();

    let runs = outcomes.len();
    let converged_runs = outcomes.iter().filter(|o| o.converged).count();
    let (best_run, mut best) = outcomes
        .into_iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            a.coincidence
                .total_cmp(&b.coincidence)
                .then(b.gradient_norm.total_cmp(&a.gradient_norm))
        })
        .expect("at least one start");

    // The cyclic relabelings of any pair average to exactly 1/n, so the best
    // of them meets the 1/n floor; re-ascend from there if every start
    // finished below it.
    if best.coincidence < 1.0 / n as f64 {
        let shifted = (1..n)
            .map(|s| {
                let mut y = CMatrix::zeros(n, n);
                for j in 0..n {
                    y.set_column(j, &best.pair.y.column((j + s) % n));
                }
                FramePair::with_frames(rho, n, best.pair.x.clone(), y).expect("validated n")
            })
            .max_by(|a, b| a.coincidence().total_cmp(&b.coincidence()))
            .expect("n >= 2 shifts");
        let rescued = ascend(shifted, options.max_iters, options.tol);
        if rescued.coincidence > best.coincidence {
            best = rescued;
        }
    }

    let (pom_a, pom_b) = best.pair.to_poms();
    let (residual, multipliers) = extremality_residual(rho, &pom_a, &pom_b)?;
    let discrimination = discrimination_check(rho, &pom_a, &pom_b)?;
    let (classification, hessian_min, hessian_max) =
        if n <= options.hessian_cap && residual <= 1e-8 {
            let so = classify_pair(&best.pair);
            (so.classification, Some(so.min_eigenvalue), Some(so.max_eigenvalue))
        } else {
            (Classification::Indeterminate, None, None)
        };
    Ok(OptimizationResult {
        n,
        coincidence: best.coincidence,
        gradient_norm: best.gradient_norm,
        extremality_residual: residual,
        multipliers,
        pom_a,
        pom_b,
        frame_x: best.pair.x.clone(),
        frame_y: best.pair.y.clone(),
        discrimination_a: discrimination.side_a.optimal,
        discrimination_b: discrimination.side_b.optimal,
        corollary_local_max: discrimination.side_a.optimal && discrimination.side_b.optimal,
        classification,
        hessian_min,
        hessian_max,
        converged: best.converged,
        restarts: RestartStats {
            runs,
            converged_runs,
            best_run,
            best_iterations: best.iterations,
        },
    })
}

pub fn optimize_coincidence(
    rho: &DensityOperator,
    n: usize,
    options: &OptimizeOptions,
) -> Result<OptimizationResult, OptimizerError> {
    optimize_coincidence_seeded(rho, n, options, &[])
}

/// Extends frame unitaries from `H_n` to `H_m` (m >= n) by an identity block;
/// the projected POMs gain zero kets, so the coincidence value carries over.
pub fn extend_frames(x: &CMatrix, y: &CMatrix, m: usize) -> (CMatrix, CMatrix) {
    let n = x.nrows();
    assert!(m >= n);
    let grow = |u: &CMatrix| {
        let mut big = CMatrix::identity(m, m);
        for i in 0..n {
            for j in 0..n {
                big[(i, j)] = u[(i, j)];
            }
        }
        big
    };
    (grow(x), grow(y))
}

/// Re-evaluates the discrimination conditions at an optimizer's best pair;
/// `true` certifies (via the Naimark corollary) that the n-restricted value
/// is a local maximum over all maximal POMs.
pub fn corollary_check(
    rho: &DensityOperator,
    result: &OptimizationResult,
) -> Result<bool, OptimizerError> {
    let report = discrimination_check(rho, &result.pom_a, &result.pom_b)?;
    Ok(report.side_a.optimal && report.side_b.optimal)
}

/// The mirror-symmetric three-outcome family `A^(alpha)`; `alpha = 1/3` is
/// the trine POM.
pub fn mirror_pom(alpha: f64) -> Result<MaximalPOM, OptimizerError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(OptimizerError::MirrorParameter(alpha));
    }
    let f1 = 1.0 - alpha;
    let f23 = (1.0 + alpha) / 2.0;
    let scale = 1.0 / (1.0 + alpha).sqrt();
    let phi1 = CVector::from_vec(vec![C64::ONE, C64::ZERO]);
    let phi2 = CVector::from_vec(vec![
        C64::from(scale * alpha.sqrt()),
        C64::from(scale),
    ]);
    let phi3 = CVector::from_vec(vec![
        C64::from(scale * alpha.sqrt()),
        C64::from(-scale),
    ]);
    Ok(MaximalPOM::new(
        vec![
            phi1.scale(f1.sqrt()),
            phi2.scale(f23.sqrt()),
            phi3.scale(f23.sqrt()),
        ],
        2,
    )?)
}

/// Coincidence rate of the mirror family on the shared maximally entangled
/// pair, evaluated on a grid of `alpha` values.
pub fn mirror_family_curve(alphas: &[f64]) -> Result<Vec<(f64, f64)>, OptimizerError> {
    let rho = crate::state::named_state(&crate::state::NamedStateSpec::TrineDemo)?;
    alphas
        .iter()
        .map(|&alpha| {
            let pom = mirror_pom(alpha)?;
            let c = crate::measurement::coincidence(&rho, &pom, &pom)?;
            Ok((alpha, c))
        })
        .collect()
}
