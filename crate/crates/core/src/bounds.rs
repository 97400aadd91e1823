//! Closed-form coincidence maxima, singular-value upper bounds,
//! Bell-inequality evaluation, and separability witnesses.
//!
//! The named bounds live behind [`BoundStrategy`] objects collected in a
//! [`BoundRegistry`], so callers (and the CLI `bound --kind` flag) select a
//! bound by name at runtime.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fano::{
    augmented_t, covariance_t, gell_mann_basis, spin_matrices, svd_real, w_matrix, FanoError,
    OutcomeCount,
};
use crate::linalg::RVector;
use crate::measurement::{
    coincidence, joint_distribution, mutual_information, shannon_entropy, LinearMeasureSpec,
    MaximalPOM, MeasurementError, NaimarkFrame,
};
use crate::state::{von_neumann_entropy, DensityOperator, NamedStateSpec, StateError};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("bound requires two-qubit dims, got ({d1}, {d2})")]
    NonQubit { d1: usize, d2: usize },
    #[error("bound '{kind}' requires the outcome-count parameter n")]
    MissingN { kind: &'static str },
    #[error("unknown bound kind '{0}'")]
    UnknownKind(String),
    #[error("werner parameters out of range: d = {d}, x = {x}")]
    WernerRange { d: usize, x: f64 },
    #[error("expected a schmidt_mixture spec")]
    NotSchmidtMixture,
    #[error(transparent)]
    Fano(#[from] FanoError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// What a bound value is certified by: the optimal directions when known,
/// the singular values consumed by the formula, and the size parameters.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction_a: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction_b: Option<[f64; 3]>,
    pub singular_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: String,
    pub value: f64,
    pub certificate: Certificate,
}

/// Exact two-qubit maximum `(1 + s1(S))/2` with the achieving spin
/// directions `a = R1 x`, `b = R2 x`.
pub fn two_qubit_max(rho: &DensityOperator) -> Result<BoundReport, BoundsError> {
    let (d1, d2) = rho.dims();
    if d1 != 2 || d2 != 2 {
        return Err(BoundsError::NonQubit { d1, d2 });
    }
    let svd = spin_matrices(rho)?.svd_s();
    let s1 = svd.spectral_norm();
    let a = [svd.u[(0, 0)], svd.u[(1, 0)], svd.u[(2, 0)]];
    let b = [svd.v[(0, 0)], svd.v[(1, 0)], svd.v[(2, 0)]];
    let value = 0.5 * (1.0 + s1);
    debug_assert!({
        let pa = MaximalPOM::spin(a).expect("unit direction");
        let pb = MaximalPOM::spin(b).expect("unit direction");
        (coincidence(rho, &pa, &pb).expect("qubit POMs") - value).abs() < 1e-10
    });
    Ok(BoundReport {
        kind: "two-qubit".into(),
        value,
        certificate: Certificate {
            direction_a: Some(a),
            direction_b: Some(b),
            singular_values: svd.singular_values.iter().copied().collect(),
            n: Some("2".into()),
            delta: Some(2),
            d: Some(2),
        },
    })
}

fn top_k_sum(values: &RVector, k: usize) -> f64 {
    values.iter().take(k).sum()
}

/// Upper bound `1/n + sum_{k <= min(n-1, delta^2)} s_k(T^(n))` for n-outcome
/// measurements; `n = inf` yields the global cross-norm bound.
pub fn theorem_bound(rho: &DensityOperator, n: OutcomeCount) -> Result<BoundReport, BoundsError> {
    let (d1, d2) = rho.dims();
    let delta = d1.min(d2);
    let d = d1.max(d2);
    let aug = augmented_t(rho, n)?;
    let svals = aug.singular_values();
    let (inv_n, keep) = match n {
        OutcomeCount::Finite(n) => (1.0 / n as f64, (n - 1).min(delta * delta)),
        OutcomeCount::Infinite => (0.0, delta * delta),
    };
    let value = inv_n + top_k_sum(&svals, keep);
    Ok(BoundReport {
        kind: "theorem".into(),
        value,
        certificate: Certificate {
            singular_values: svals.iter().copied().collect(),
            n: Some(n.to_string()),
            delta: Some(delta),
            d: Some(d),
            ..Certificate::default()
        },
    })
}

/// Global bound: the trace norm of `T^(inf)`, i.e. the computable cross
/// norm of the state.
pub fn cross_norm_bound(rho: &DensityOperator) -> Result<BoundReport, BoundsError> {
    let (d1, d2) = rho.dims();
    let aug = augmented_t(rho, OutcomeCount::Infinite)?;
    let svals = aug.singular_values();
    Ok(BoundReport {
        kind: "cross-norm".into(),
        value: svals.sum(),
        certificate: Certificate {
            singular_values: svals.iter().copied().collect(),
            n: Some(OutcomeCount::Infinite.to_string()),
            delta: Some(d1.min(d2)),
            d: Some(d1.max(d2)),
            ..Certificate::default()
        },
    })
}

/// Minimum-outcome bound `1/d + sum_{k <= min(d-1, delta^2-1)} s_k(T~)` for
/// orthogonal measurements (`n = d`).
pub fn orthogonal_bound(rho: &DensityOperator) -> Result<BoundReport, BoundsError> {
    let (d1, d2) = rho.dims();
    let delta = d1.min(d2);
    let d = d1.max(d2);
    let aug = augmented_t(rho, OutcomeCount::Finite(d))?;
    let svals = aug.t_tilde_singular_values();
    let keep = (d - 1).min(delta * delta - 1);
    let value = 1.0 / d as f64 + top_k_sum(&svals, keep);
    Ok(BoundReport {
        kind: "orthogonal".into(),
        value,
        certificate: Certificate {
            singular_values: svals.iter().copied().collect(),
            n: Some(d.to_string()),
            delta: Some(delta),
            d: Some(d),
            ..Certificate::default()
        },
    })
}

/// Exact minimum-outcome maximum for the two-qudit Werner family:
/// `1/d + |x - 1/d|/(d+1)` for `x >= 1/d` (achieved by `A = B`), and
/// `1/d + |x - 1/d|/(d^2 - 1)` below (achieved by derangement-permuted
/// orthogonal pairs).
pub fn werner_exact(d: usize, x: f64) -> Result<f64, BoundsError> {
    if d < 2 || !(-1.0..=1.0).contains(&x) {
        return Err(BoundsError::WernerRange { d, x });
    }
    let inv_d = 1.0 / d as f64;
    let dev = (x - inv_d).abs();
    if x >= inv_d {
        Ok(inv_d + dev / (d as f64 + 1.0))
    } else {
        Ok(inv_d + dev / ((d * d - 1) as f64))
    }
}

/// Largest achievable spin covariance `s1(Sbar)`.
pub fn covariance_bound(rho: &DensityOperator) -> Result<f64, BoundsError> {
    let (d1, d2) = rho.dims();
    if d1 != 2 || d2 != 2 {
        return Err(BoundsError::NonQubit { d1, d2 });
    }
    Ok(spin_matrices(rho)?.svd_s_bar().spectral_norm())
}

/// Two-qubit separability witnesses built from the spin matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    /// `Tr[Sbar^T Sbar]`; exceeds 1 only for entangled states.
    pub hs_norm: f64,
    /// `tr[rho^2] + s1(Sbar)/2`; exceeds 1 only for entangled states.
    pub purity_witness: f64,
    /// `max{0, log2(s1(S) + s2(S))}`, a lower bound on the log-negativity.
    pub logneg_lower: f64,
    /// `|Tr[Sbar^T Sbar] - 4 tr[(rho - rho1 (x) rho2)^2]|`.
    pub hs_identity_residual: f64,
    pub hs_flag: bool,
    pub purity_flag: bool,
    pub logneg_flag: bool,
}

pub fn separability_witnesses(rho: &DensityOperator) -> Result<WitnessReport, BoundsError> {
    let (d1, d2) = rho.dims();
    if d1 != 2 || d2 != 2 {
        return Err(BoundsError::NonQubit { d1, d2 });
    }
    let mats = spin_matrices(rho)?;
    let hs_norm = (mats.s_bar.transpose() * &mats.s_bar).trace();
    let product = crate::linalg::kron(&rho.reduced(1)?, &rho.reduced(2)?);
    let delta = rho.matrix() - product;
    let hs_direct = 4.0 * crate::linalg::expectation(&delta, &delta).re;
    let hs_identity_residual = (hs_norm - hs_direct).abs();
    debug_assert!(hs_identity_residual < 1e-10);
    let s_bar_svd = mats.svd_s_bar();
    let purity_witness = rho.purity() + 0.5 * s_bar_svd.spectral_norm();
    let s_svd = mats.svd_s();
    let logneg_lower = (s_svd.singular_values[0] + s_svd.singular_values[1])
        .log2()
        .max(0.0);
    Ok(WitnessReport {
        hs_norm,
        purity_witness,
        logneg_lower,
        hs_identity_residual,
        hs_flag: hs_norm > 1.0 + 1e-12,
        purity_flag: purity_witness > 1.0 + 1e-12,
        logneg_flag: logneg_lower > 1e-12,
    })
}

/// Information and coincidence Bell combinations for a measurement quadruple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BellReport {
    pub info_bell_lhs: f64,
    /// `H(A) + H(B)`.
    pub info_bell_rhs: f64,
    pub info_violated: bool,
    pub coincidence_bell_lhs: f64,
    pub coincidence_threshold: f64,
    pub coincidence_violated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directions: Option<[[f64; 3]; 4]>,
}

pub fn bell_tests(
    rho: &DensityOperator,
    a: &MaximalPOM,
    a_bar: &MaximalPOM,
    b: &MaximalPOM,
    b_bar: &MaximalPOM,
) -> Result<BellReport, BoundsError> {
    let d_ab = joint_distribution(rho, a, b)?;
    let d_abb = joint_distribution(rho, a, b_bar)?;
    let d_aab = joint_distribution(rho, a_bar, b)?;
    let d_aabb = joint_distribution(rho, a_bar, b_bar)?;

    let info_bell_lhs = mutual_information(&d_ab) + mutual_information(&d_abb)
        + mutual_information(&d_aab)
        - mutual_information(&d_aabb);
    let h_a = shannon_entropy(d_ab.marginal_a().as_slice());
    let h_b = shannon_entropy(d_ab.marginal_b().as_slice());
    let info_bell_rhs = h_a + h_b;

    let coincidence_bell_lhs = coincidence(rho, a, b)? + coincidence(rho, a, b_bar)?
        + coincidence(rho, a_bar, b)?
        - coincidence(rho, a_bar, b_bar)?;

    Ok(BellReport {
        info_bell_lhs,
        info_bell_rhs,
        info_violated: info_bell_lhs > info_bell_rhs + 1e-12,
        coincidence_bell_lhs,
        coincidence_threshold: 2.0,
        coincidence_violated: coincidence_bell_lhs > 2.0 + 1e-12,
        directions: None,
    })
}

/// Bell combinations for four spin measurements along the given directions.
pub fn bell_tests_spin(
    rho: &DensityOperator,
    directions: [[f64; 3]; 4],
) -> Result<BellReport, BoundsError> {
    let [a, a_bar, b, b_bar] = directions;
    let mut report = bell_tests(
        rho,
        &MaximalPOM::spin(a)?,
        &MaximalPOM::spin(a_bar)?,
        &MaximalPOM::spin(b)?,
        &MaximalPOM::spin(b_bar)?,
    )?;
    report.directions = Some(directions);
    Ok(report)
}

/// Coplanar direction quadruple `(a, abar, b, bbar)` maximizing the
/// coincidence Bell combination on the singlet, where `C = (1 - a.b)/2`.
pub fn chsh_optimal_directions() -> [[f64; 3]; 4] {
    let s = 1.0 / 2f64.sqrt();
    [
        [1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0],
        [-s, 0.0, -s],
        [-s, 0.0, s],
    ]
}

/// Holevo bound `min{S(rho_1), S(rho_2)}` on the accessible information.
pub fn holevo_bound(rho: &DensityOperator) -> Result<f64, BoundsError> {
    let s1 = von_neumann_entropy(&rho.reduced(1)?)?;
    let s2 = von_neumann_entropy(&rho.reduced(2)?)?;
    Ok(s1.min(s2))
}

/// Attained maximum mutual information `-sum_j P_j log2 P_j` with
/// `P_j = sum_a w_a p_j^a` for a mixture sharing a common Schmidt basis.
pub fn schmidt_mixture_imax(spec: &NamedStateSpec) -> Result<f64, BoundsError> {
    let NamedStateSpec::SchmidtMixture {
        weights,
        schmidt_probs,
        ..
    } = spec
    else {
        return Err(BoundsError::NotSchmidtMixture);
    };
    let d = schmidt_probs[0].len();
    let marginals: Vec<f64> = (0..d)
        .map(|j| {
            weights
                .iter()
                .zip(schmidt_probs)
                .map(|(w, probs)| w * probs[j])
                .sum()
        })
        .collect();
    Ok(shannon_entropy(&marginals))
}

/// Singular-value bound on a general linear covariance measure, plus the
/// measurement-free bound for the diagonal `corr` choice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneralMeasureBound {
    /// `sum_k s_k(Tbar) s_k(W^G)` for the supplied frames and table.
    pub measured_bound: f64,
    /// `sum_{k <= min(n-1, delta^2 - 1)} s_k(Tbar)`.
    pub corr_bound: f64,
}

pub fn general_measure_bound(
    rho: &DensityOperator,
    g: &LinearMeasureSpec,
    x: &NaimarkFrame,
    y: &NaimarkFrame,
) -> Result<GeneralMeasureBound, BoundsError> {
    let (d1, d2) = rho.dims();
    let delta = d1.min(d2);
    let n = x.n();
    let basis1 = gell_mann_basis(d1)?;
    let basis2 = gell_mann_basis(d2)?;
    let t_bar = covariance_t(rho, &basis1, &basis2)?;
    let t_svals = svd_real(&t_bar).singular_values;

    let frame_basis = gell_mann_basis(n)?;
    let wm = w_matrix(x, y, &frame_basis, Some(g))?;
    let w_svals = wm.singular_values();

    let measured_bound = t_svals
        .iter()
        .zip(w_svals.iter())
        .map(|(t, w)| t * w)
        .sum();
    let corr_bound = top_k_sum(&t_svals, (n - 1).min(delta * delta - 1));
    Ok(GeneralMeasureBound {
        measured_bound,
        corr_bound,
    })
}

/// Extra parameters a bound strategy may need.
#[derive(Debug, Clone, Default)]
pub struct BoundParams {
    pub n: Option<OutcomeCount>,
}

/// A named upper bound (or exact maximum) on the coincidence rate family.
pub trait BoundStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn evaluate(
        &self,
        rho: &DensityOperator,
        params: &BoundParams,
    ) -> Result<BoundReport, BoundsError>;
}

struct TwoQubitStrategy;

impl BoundStrategy for TwoQubitStrategy {
    fn name(&self) -> &'static str {
        "two-qubit"
    }

    fn description(&self) -> &'static str {
        "exact two-qubit maximum (1 + s1(S))/2 with achieving spin directions"
    }

    fn evaluate(
        &self,
        rho: &DensityOperator,
        _params: &BoundParams,
    ) -> Result<BoundReport, BoundsError> {
        two_qubit_max(rho)
    }
}

struct TheoremStrategy;

impl BoundStrategy for TheoremStrategy {
    fn name(&self) -> &'static str {
        "theorem"
    }

    fn description(&self) -> &'static str {
        "n-outcome bound 1/n + sum of leading singular values of T^(n)"
    }

    fn evaluate(
        &self,
        rho: &DensityOperator,
        params: &BoundParams,
    ) -> Result<BoundReport, BoundsError> {
        let n = params.n.ok_or(BoundsError::MissingN { kind: "theorem" })?;
        theorem_bound(rho, n)
    }
}

struct CrossNormStrategy;

impl BoundStrategy for CrossNormStrategy {
    fn name(&self) -> &'static str {
        "cross-norm"
    }

    fn description(&self) -> &'static str {
        "global bound: trace norm of T^(inf) (computable cross norm)"
    }

    fn evaluate(
        &self,
        rho: &DensityOperator,
        _params: &BoundParams,
    ) -> Result<BoundReport, BoundsError> {
        cross_norm_bound(rho)
    }
}

struct OrthogonalStrategy;

impl BoundStrategy for OrthogonalStrategy {
    fn name(&self) -> &'static str {
        "orthogonal"
    }

    fn description(&self) -> &'static str {
        "minimum-outcome bound 1/d + sum of leading singular values of T~"
    }

    fn evaluate(
        &self,
        rho: &DensityOperator,
        _params: &BoundParams,
    ) -> Result<BoundReport, BoundsError> {
        orthogonal_bound(rho)
    }
}

struct CovarianceStrategy;

impl BoundStrategy for CovarianceStrategy {
    fn name(&self) -> &'static str {
        "covariance"
    }

    fn description(&self) -> &'static str {
        "maximum spin covariance s1(Sbar) for two qubits"
    }

    fn evaluate(
        &self,
        rho: &DensityOperator,
        _params: &BoundParams,
    ) -> Result<BoundReport, BoundsError> {
        let value = covariance_bound(rho)?;
        let svd = spin_matrices(rho)?.svd_s_bar();
        Ok(BoundReport {
            kind: "covariance".into(),
            value,
            certificate: Certificate {
                singular_values: svd.singular_values.iter().copied().collect(),
                delta: Some(2),
                d: Some(2),
                ..Certificate::default()
            },
        })
    }
}

/// Name-indexed collection of bound strategies.
pub struct BoundRegistry {
    entries: BTreeMap<&'static str, Box<dyn BoundStrategy>>,
}

impl BoundRegistry {
    pub fn new() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Registry with every built-in bound.
    pub fn standard() -> Self {
        let mut reg = Self::new();
        reg.register(Box::new(TwoQubitStrategy));
        reg.register(Box::new(TheoremStrategy));
        reg.register(Box::new(CrossNormStrategy));
        reg.register(Box::new(OrthogonalStrategy));
        reg.register(Box::new(CovarianceStrategy));
        reg
    }

    pub fn register(&mut self, strategy: Box<dyn BoundStrategy>) {
        self.entries.insert(strategy.name(), strategy);
    }

    pub fn get(&self, name: &str) -> Option<&dyn BoundStrategy> {
        self.entries.get(name).map(Box::as_ref)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn strategies(&self) -> impl Iterator<Item = &dyn BoundStrategy> {
        self.entries.values().map(Box::as_ref)
    }

    pub fn evaluate(
        &self,
        name: &str,
        rho: &DensityOperator,
        params: &BoundParams,
    ) -> Result<BoundReport, BoundsError> {
        self.get(name)
            .ok_or_else(|| BoundsError::UnknownKind(name.to_string()))?
            .evaluate(rho, params)
    }
}

impl Default for BoundRegistry {
    fn default() -> Self {
        Self::standard()
    }
}
