//! Frame superoperators, reconstruction operators and scaled MSE formulas,
//! plus the classification ladder IC → tight IC → balanced → generalized SIC.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurements::{purity_report, Povm};
use crate::opspace::{
    add_weighted_dyad, devectorize, pseudoinverse, traceless_projection, vectorize, DensityState,
    Operator, Superoperator,
};
use crate::random::{haar_ket, rng_from_seed, CrateRng};
use crate::tol;

/// `F = d Σ_j |Π_j⟩⟩⟨⟨Π_j| / tr(Π_j)`.
pub fn frame_superoperator(p: &Povm) -> Result<Superoperator> {
    let d = p.dim();
    let mut f = Superoperator::zeros(d);
    for (index, op) in p.outcomes().iter().enumerate() {
        let tr = op.trace();
        if !(tr.abs() > tol::TRACE) {
            return Err(Error::ZeroTraceOutcome { index });
        }
        add_weighted_dyad(&mut f, d as f64 / tr, op, op);
    }
    Ok(f)
}

fn checked_probabilities(p: &Povm, rho: &DensityState) -> Result<Vec<f64>> {
    let probs = p.probabilities(rho)?;
    if let Some((index, &probability)) = probs
        .iter()
        .enumerate()
        .find(|(_, &x)| !(x > tol::PROBABILITY))
    {
        return Err(Error::VanishingProbability { index, probability });
    }
    Ok(probs)
}

/// `F(ρ) = Σ_j |Π_j⟩⟩ p_j⁻¹ ⟨⟨Π_j|`; equals `F` at the completely mixed state.
pub fn frame_superoperator_at(p: &Povm, rho: &DensityState) -> Result<Superoperator> {
    let probs = checked_probabilities(p, rho)?;
    let mut f = Superoperator::zeros(p.dim());
    for (op, prob) in p.outcomes().iter().zip(&probs) {
        add_weighted_dyad(&mut f, 1.0 / prob, op, op);
    }
    Ok(f)
}

/// Reconstruction operators `Θ_j`, index-aligned with a POVM.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionSet {
    pub operators: Vec<Operator>,
}

impl ReconstructionSet {
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `Σ_j w_j Θ_j`.
    pub fn combine(&self, weights: &[f64]) -> Operator {
        let d = self.operators[0].dim();
        let mut acc = Operator::zeros(d);
        for (w, t) in weights.iter().zip(&self.operators) {
            acc = &acc + &t.scale(*w);
        }
        acc
    }

    /// `tr(Θ_j²)` for every operator.
    pub fn squared_norms(&self) -> Vec<f64> {
        self.operators
            .iter()
            .map(Operator::trace_of_square)
            .collect()
    }

    /// `Σ_j |Θ_j⟩⟩⟨⟨Π_j|`, which is the identity for a valid set.
    pub fn resolution(&self, p: &Povm) -> Result<Superoperator> {
        check_aligned(p, self)?;
        let mut s = Superoperator::zeros(p.dim());
        for (t, op) in self.operators.iter().zip(p.outcomes()) {
            add_weighted_dyad(&mut s, 1.0, t, op);
        }
        Ok(s)
    }

    /// `‖Σ_j tr(Π_j A) Θ_j − A‖_HS` for a probe `A`.
    pub fn probe_defect(&self, p: &Povm, probe: &Operator) -> Result<f64> {
        check_aligned(p, self)?;
        let coeffs: Vec<f64> = p
            .outcomes()
            .iter()
            .map(|o| crate::opspace::hs_inner_re(o, probe))
            .collect::<Result<_>>()?;
        Ok((&self.combine(&coeffs) - probe).hs_norm())
    }
}

fn check_aligned(p: &Povm, theta: &ReconstructionSet) -> Result<()> {
    if p.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: theta.len(),
        });
    }
    Ok(())
}

/// `|Θ_j⟩⟩ = d F⁻¹|Π_j⟩⟩ / tr(Π_j)`.
pub fn canonical_reconstruction(p: &Povm) -> Result<ReconstructionSet> {
    let finv = frame_superoperator(p)?.inverse()?;
    let d = p.dim() as f64;
    let operators = p
        .outcomes()
        .iter()
        .map(|op| devectorize(&finv.apply_ket(&vectorize(op))).scale(d / op.trace()))
        .collect();
    Ok(ReconstructionSet { operators })
}

/// State-dependent optimal operators `|Θ_j⟩⟩ = p_j⁻¹ F(ρ)⁻¹|Π_j⟩⟩`.
pub fn optimal_reconstruction(p: &Povm, rho: &DensityState) -> Result<ReconstructionSet> {
    let probs = checked_probabilities(p, rho)?;
    let finv = frame_superoperator_at(p, rho)?.inverse()?;
    let operators = p
        .outcomes()
        .iter()
        .zip(&probs)
        .map(|(op, prob)| devectorize(&finv.apply_ket(&vectorize(op))).scale(1.0 / prob))
        .collect();
    Ok(ReconstructionSet { operators })
}

/// Scaled MSE together with its matrix
/// `C(ρ) = Σ_j |Θ_j⟩⟩ p_j ⟨⟨Θ_j| − |ρ⟩⟩⟨⟨ρ|`.
#[derive(Clone, Debug)]
pub struct ScaledMse {
    pub value: f64,
    pub matrix: Superoperator,
}

/// `E(ρ) = Σ_j p_j tr(Θ_j²) − tr(ρ²)`.
pub fn scaled_mse(p: &Povm, theta: &ReconstructionSet, rho: &DensityState) -> Result<ScaledMse> {
    check_aligned(p, theta)?;
    let probs = p.probabilities(rho)?;
    let value = probs
        .iter()
        .zip(&theta.operators)
        .map(|(pj, t)| pj * t.trace_of_square())
        .sum::<f64>()
        - rho.purity();
    let mut matrix = Superoperator::zeros(p.dim());
    for (pj, t) in probs.iter().zip(&theta.operators) {
        add_weighted_dyad(&mut matrix, *pj, t, t);
    }
    add_weighted_dyad(&mut matrix, -1.0, rho.operator(), rho.operator());
    Ok(ScaledMse { value, matrix })
}

/// Scaled MSE value only, without assembling `C(ρ)`.
pub fn scaled_mse_value(p: &Povm, theta: &ReconstructionSet, rho: &DensityState) -> Result<f64> {
    check_aligned(p, theta)?;
    let probs = p.probabilities(rho)?;
    Ok(probs
        .iter()
        .zip(&theta.operators)
        .map(|(pj, t)| pj * t.trace_of_square())
        .sum::<f64>()
        - rho.purity())
}

fn check_state_purity(d: usize, purity: f64) -> Result<()> {
    let lo = 1.0 / d as f64;
    if !(purity >= lo - 1e-12 && purity <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "state purity {purity} outside [{lo}, 1]"
        )));
    }
    Ok(())
}

/// Unitary-orbit average `(1/d) Σ_j tr(Π_j) tr(Θ_j²) − tr(ρ²)`.
pub fn average_scaled_mse(p: &Povm, theta: &ReconstructionSet, purity_of_rho: f64) -> Result<f64> {
    check_aligned(p, theta)?;
    check_state_purity(p.dim(), purity_of_rho)?;
    let sum: f64 = p
        .outcomes()
        .iter()
        .zip(&theta.operators)
        .map(|(o, t)| o.trace() * t.trace_of_square())
        .sum();
    Ok(sum / p.dim() as f64 - purity_of_rho)
}

/// Cramér–Rao scaled MSE of the optimal reconstruction.
#[derive(Clone, Debug)]
pub struct OptimalMse {
    /// `Tr{F̄(ρ)⁺}`.
    pub value: f64,
    /// `Tr{F(ρ)⁻¹} − tr(ρ²)`, computed independently.
    pub via_inverse: f64,
    /// `C(ρ) = F̄(ρ)⁺`.
    pub matrix: Superoperator,
}

pub fn optimal_mse(p: &Povm, rho: &DensityState) -> Result<OptimalMse> {
    let f = frame_superoperator_at(p, rho)?;
    let matrix = pseudoinverse(&traceless_projection(&f), tol::PINV_CUTOFF);
    let via_inverse = f.inverse()?.trace() - rho.purity();
    Ok(OptimalMse {
        value: matrix.trace(),
        via_inverse,
        matrix,
    })
}

/// `α = (d²℘ − d)/(d² − 1)`, `β = (d² − d℘)/(d² − 1)`.
pub fn tight_alpha_beta(d: usize, purity: f64) -> (f64, f64) {
    let d = d as f64;
    let den = d * d - 1.0;
    ((d * d * purity - d) / den, (d * d - d * purity) / den)
}

/// Orbit-averaged scaled MSE of a tight IC measurement with average outcome
/// purity `℘`: `(d²−1)²/(d²℘ − d) − [tr(ρ²) − 1/d]`. This is also the lower
/// bound for any IC measurement with the same `℘`.
pub fn tight_ic_average_mse(d: usize, purity: f64, purity_of_rho: f64) -> f64 {
    let d = d as f64;
    (d * d - 1.0).powi(2) / (d * d * purity - d) - (purity_of_rho - 1.0 / d)
}

/// State-dependent scaled MSE of a tight IC measurement under canonical
/// reconstruction: `d²/α² [℘(ρ) − 1/d] − [tr(ρ²) − 1/d]`.
pub fn tight_ic_mse(d: usize, alpha: f64, weighted_purity: f64, purity_of_rho: f64) -> f64 {
    let d = d as f64;
    d * d / (alpha * alpha) * (weighted_purity - 1.0 / d) - (purity_of_rho - 1.0 / d)
}

/// Options for [`classify_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    /// A residual below this value declares the property.
    pub threshold: f64,
    /// Haar-random pure states used by the sampled quasi-balance test.
    pub samples: usize,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            threshold: tol::VERDICT,
            samples: 20,
            seed: 0x5eed,
        }
    }
}

/// How the quasi-balance verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuasiBalanceMethod {
    /// Spread of `tr(Θ_j²)` (exact for minimal measurements).
    ReconstructionNorms,
    /// Empirical: spread of the optimal MSE over random unitary conjugates.
    Sampled,
    NotApplicable,
}

/// Residuals backing each verdict. Spreads are `(max − min)/max`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub gram_condition: f64,
    pub frame_condition: f64,
    /// `max|F − αI − β|1⟩⟩⟨⟨1|| / d`.
    pub tight_ic: Option<f64>,
    /// Max deviation of `tr(P_jP_k)` from the fitted `αδ_jk + ζ`.
    pub generalized_sic: Option<f64>,
    pub quasi_balance: Option<f64>,
    pub trace_spread: f64,
    pub squared_trace_spread: f64,
    pub purity_spread: f64,
    /// Spread of `tr(Π_jΠ_k)/√(tr(Π_j²)tr(Π_k²))` over `j ≠ k`.
    pub equiangular_spread: Option<f64>,
}

/// The four equivalent generalized-SIC conditions for a minimal tight IC
/// measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TightMinimalConditions {
    pub equal_traces: bool,
    pub equal_squared_traces: bool,
    pub equal_purities: bool,
    pub equiangular: bool,
    /// All four agree with each other and with the generalized-SIC verdict.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TomoDiagnostics {
    pub dim: usize,
    pub outcomes: usize,
    pub average_purity: f64,
    pub is_ic: bool,
    pub is_minimal: bool,
    pub is_tight_ic: bool,
    pub tight_alpha: Option<f64>,
    pub tight_beta: Option<f64>,
    pub is_generalized_sic: bool,
    pub gen_alpha: Option<f64>,
    pub gen_zeta: Option<f64>,
    pub is_quasi_balanced: bool,
    pub quasi_balance_method: QuasiBalanceMethod,
    pub is_balanced: bool,
    pub tight_minimal_conditions: Option<TightMinimalConditions>,
    /// Balanced ⇔ generalized SIC, checked for minimal IC measurements.
    pub balanced_matches_generalized_sic: Option<bool>,
    /// Generalized SIC ⇒ tight IC ⇒ IC and balanced ⇒ tight ∧ quasi-balanced.
    pub implications_hold: bool,
    pub threshold: f64,
    pub residuals: Residuals,
}

fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        (max - min) / max.abs()
    }
}

fn absolute_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Optimal scaled MSE at `U ρ U†` for `samples` Haar-random pure states.
pub fn sampled_optimal_mse(p: &Povm, samples: usize, rng: &mut CrateRng) -> Result<Vec<f64>> {
    (0..samples)
        .map(|_| {
            let rho = DensityState::pure(&haar_ket(p.dim(), rng))?;
            optimal_mse(p, &rho).map(|m| m.value)
        })
        .collect()
}

/// Generalized-SIC fit of the Gram matrix of `P_j = dΠ_j`: `(α, ζ, residual)`.
fn generalized_sic_fit(p: &Povm) -> (f64, f64, f64) {
    let d = p.dim() as f64;
    let g = p.gram().scale(d * d);
    let n = p.len();
    let mut diag = 0.0;
    let mut off = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                diag += g[(j, k)];
            } else {
                off += g[(j, k)];
            }
        }
    }
    let zeta = if n > 1 {
        off / (n * (n - 1)) as f64
    } else {
        0.0
    };
    let alpha = diag / n as f64 - zeta;
    let mut residual = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let target = if j == k { alpha + zeta } else { zeta };
            residual = residual.max((g[(j, k)] - target).abs());
        }
    }
    (alpha, zeta, residual)
}

pub fn classify(p: &Povm) -> Result<TomoDiagnostics> {
    classify_with(p, &ClassifyOptions::default())
}

pub fn classify_with(p: &Povm, opts: &ClassifyOptions) -> Result<TomoDiagnostics> {
    let d = p.dim();
    let n = p.len();
    let thr = opts.threshold;
    let purities = purity_report(p, None)?;
    let traces = p.traces();
    let squared: Vec<f64> = p.outcomes().iter().map(Operator::trace_of_square).collect();

    let (rank, gram_condition) = p.span_rank();
    let f = frame_superoperator(p)?;
    let frame_condition = f.condition_number();
    let is_ic = rank == d * d && frame_condition < tol::CONDITION_CEILING;
    let is_minimal = is_ic && n == d * d;

    let mut residuals = Residuals {
        gram_condition,
        frame_condition,
        trace_spread: relative_spread(&traces),
        squared_trace_spread: relative_spread(&squared),
        purity_spread: relative_spread(&purities.per_outcome_purity),
        ..Residuals::default()
    };

    let (alpha, beta) = tight_alpha_beta(d, purities.average_purity);
    let one = Operator::identity(d);
    let mut model = Superoperator::identity(d).scale(alpha);
    add_weighted_dyad(&mut model, beta, &one, &one);
    let tight_residual = (&f - &model).max_abs() / d as f64;
    residuals.tight_ic = Some(tight_residual);
    let is_tight_ic = is_ic && alpha > 0.0 && tight_residual < thr;

    let mut is_generalized_sic = false;
    let mut gen = None;
    if n == d * d {
        let (ga, gz, res) = generalized_sic_fit(p);
        residuals.generalized_sic = Some(res);
        is_generalized_sic = is_minimal && ga > 0.0 && res < thr;
        if is_generalized_sic {
            gen = Some((ga, gz));
        }
        let mut cosines = Vec::with_capacity(n * (n - 1));
        let g = p.gram();
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    cosines.push(g[(j, k)] / (squared[j] * squared[k]).sqrt());
                }
            }
        }
        residuals.equiangular_spread = Some(absolute_spread(&cosines));
    }

    let (is_quasi_balanced, quasi_balance_method) = if is_minimal {
        let theta = canonical_reconstruction(p)?;
        let spread = relative_spread(&theta.squared_norms());
        residuals.quasi_balance = Some(spread);
        (spread < thr, QuasiBalanceMethod::ReconstructionNorms)
    } else if is_ic {
        let mut rng = rng_from_seed(opts.seed);
        let values = sampled_optimal_mse(p, opts.samples, &mut rng)?;
        let spread = relative_spread(&values);
        residuals.quasi_balance = Some(spread);
        (spread < tol::SAMPLED_SPREAD, QuasiBalanceMethod::Sampled)
    } else {
        (false, QuasiBalanceMethod::NotApplicable)
    };
    let is_balanced = is_tight_ic && is_quasi_balanced;

    let tight_minimal_conditions = if is_minimal && is_tight_ic {
        let equal_traces = residuals.trace_spread < thr;
        let equal_squared_traces = residuals.squared_trace_spread < thr;
        let equal_purities = residuals.purity_spread < thr;
        let equiangular = residuals.equiangular_spread.is_some_and(|s| s < thr);
        let all = [
            equal_traces,
            equal_squared_traces,
            equal_purities,
            equiangular,
        ];
        let consistent = all.iter().all(|&b| b == is_generalized_sic);
        Some(TightMinimalConditions {
            equal_traces,
            equal_squared_traces,
            equal_purities,
            equiangular,
            consistent,
        })
    } else {
        None
    };

    let implications_hold = (!is_generalized_sic || is_tight_ic)
        && (!is_tight_ic || is_ic)
        && (!is_balanced || (is_tight_ic && is_quasi_balanced));

    Ok(TomoDiagnostics {
        dim: d,
        outcomes: n,
        average_purity: purities.average_purity,
        is_ic,
        is_minimal,
        is_tight_ic,
        tight_alpha: is_tight_ic.then_some(alpha),
        tight_beta: is_tight_ic.then_some(beta),
        is_generalized_sic,
        gen_alpha: gen.map(|g| g.0),
        gen_zeta: gen.map(|g| g.1),
        is_quasi_balanced,
        quasi_balance_method,
        is_balanced,
        tight_minimal_conditions,
        balanced_matches_generalized_sic: is_minimal.then_some(is_balanced == is_generalized_sic),
        implications_hold,
        threshold: thr,
        residuals,
    })
}

/// Average-MSE lower bound audit for linear tomography.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundAudit {
    pub average_purity: f64,
    pub purity_of_rho: f64,
    pub trace_frame_inverse: f64,
    /// `Tr(F⁻¹) − tr(ρ²)`.
    pub average_mse: f64,
    pub bound: f64,
    pub gap: f64,
    pub saturated: bool,
    pub is_tight_ic: bool,
    /// Gap non-negative, and saturated exactly when tight IC.
    pub consistent: bool,
}

pub fn bound_audit(p: &Povm, purity_of_rho: f64) -> Result<BoundAudit> {
    bound_audit_with(p, purity_of_rho, &ClassifyOptions::default())
}

pub fn bound_audit_with(
    p: &Povm,
    purity_of_rho: f64,
    opts: &ClassifyOptions,
) -> Result<BoundAudit> {
    let d = p.dim();
    check_state_purity(d, purity_of_rho)?;
    let f = frame_superoperator(p)?;
    let trace_frame_inverse = f.inverse()?.trace();
    let diag = classify_with(p, opts)?;
    let average_mse = trace_frame_inverse - purity_of_rho;
    let bound = tight_ic_average_mse(d, diag.average_purity, purity_of_rho);
    let gap = average_mse - bound;
    let saturated = gap.abs() < tol::BOUND_GAP;
    Ok(BoundAudit {
        average_purity: diag.average_purity,
        purity_of_rho,
        trace_frame_inverse,
        average_mse,
        bound,
        gap,
        saturated,
        is_tight_ic: diag.is_tight_ic,
        consistent: gap >= -1e-10 && saturated == diag.is_tight_ic,
    })
}

/// Balanced ⇔ generalized SIC for a minimal IC measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceAudit {
    pub is_balanced: bool,
    pub is_generalized_sic: bool,
    pub tight_ic_residual: f64,
    pub quasi_balance_residual: f64,
    pub generalized_sic_residual: f64,
    pub consistent: bool,
}

pub fn balance_audit(p: &Povm) -> Result<BalanceAudit> {
    balance_audit_with(p, &ClassifyOptions::default())
}

pub fn balance_audit_with(p: &Povm, opts: &ClassifyOptions) -> Result<BalanceAudit> {
    let diag = classify_with(p, opts)?;
    ensure_minimal_ic(p, &diag)?;
    Ok(BalanceAudit {
        is_balanced: diag.is_balanced,
        is_generalized_sic: diag.is_generalized_sic,
        tight_ic_residual: diag.residuals.tight_ic.unwrap_or(f64::NAN),
        quasi_balance_residual: diag.residuals.quasi_balance.unwrap_or(f64::NAN),
        generalized_sic_residual: diag.residuals.generalized_sic.unwrap_or(f64::NAN),
        consistent: diag.is_balanced == diag.is_generalized_sic
            && diag
                .tight_minimal_conditions
                .as_ref()
                .is_none_or(|c| c.consistent),
    })
}

pub(crate) fn ensure_minimal_ic(p: &Povm, diag: &TomoDiagnostics) -> Result<()> {
    if !diag.is_ic {
        return Err(Error::NotInformationallyComplete {
            condition: diag.residuals.frame_condition,
        });
    }
    if !diag.is_minimal {
        return Err(Error::NotMinimal {
            outcomes: p.len(),
            dim: p.dim(),
        });
    }
    Ok(())
}
