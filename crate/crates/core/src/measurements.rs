//! POVM construction, validation and outcome purities.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opspace::{hermiticity_defect, hs_inner_re, DensityState, Operator};
use crate::random::{ginibre, haar_orthogonal, rng_from_seed};
use crate::{tol, C64};

/// A measurement: positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    outcomes: Vec<Operator>,
    label: String,
    ingest_hermiticity_defect: f64,
}

impl Povm {
    /// Assembles a POVM from Hermitian outcomes. Only the shape is checked
    /// here; positivity and completeness are reported by [`Povm::validate`].
    pub fn new(dim: usize, outcomes: Vec<Operator>, label: impl Into<String>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidPovm("no outcomes".into()));
        }
        for op in &outcomes {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.dim(),
                });
            }
        }
        Ok(Self {
            dim,
            outcomes,
            label: label.into(),
            ingest_hermiticity_defect: 0.0,
        })
    }

    /// Like [`Povm::new`] but from raw matrices, remembering how far the
    /// inputs were from Hermitian before symmetrization.
    pub fn from_matrices(
        dim: usize,
        matrices: Vec<DMatrix<C64>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let defect = matrices.iter().map(hermiticity_defect).fold(0.0, f64::max);
        let outcomes = matrices
            .into_iter()
            .map(Operator::new)
            .collect::<Result<Vec<_>>>()?;
        let mut p = Self::new(dim, outcomes, label)?;
        p.ingest_hermiticity_defect = defect;
        Ok(p)
    }

    /// `Π_j = S^{-1/2} A_j S^{-1/2}` with `S = Σ_j A_j`.
    pub fn from_positive_operators(ops: Vec<Operator>, label: impl Into<String>) -> Result<Self> {
        let dim = ops
            .first()
            .ok_or_else(|| Error::InvalidPovm("no outcomes".into()))?
            .dim();
        let mut total = Operator::zeros(dim);
        for op in &ops {
            total = &total + op;
        }
        let min = total.min_eigenvalue();
        if !(min > 0.0) {
            return Err(Error::InvalidPovm(format!(
                "outcome sum is singular (min eigenvalue {min:.3e})"
            )));
        }
        let inv_sqrt = total.map_spectrum(|x| 1.0 / x.sqrt());
        let outcomes = ops.iter().map(|a| a.sandwich(&inv_sqrt)).collect();
        Self::new(dim, outcomes, label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Operator] {
        &self.outcomes
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_minimal(&self) -> bool {
        self.outcomes.len() == self.dim * self.dim
    }

    /// Born-rule probabilities `p_j = tr(Π_j ρ)`.
    pub fn probabilities(&self, rho: &DensityState) -> Result<Vec<f64>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        Ok(self.outcomes.iter().map(|p| rho.probability(p)).collect())
    }

    pub fn traces(&self) -> Vec<f64> {
        self.outcomes.iter().map(Operator::trace).collect()
    }

    /// Gram matrix `G_jk = tr(Π_j Π_k)`.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut g = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let v = hs_inner_re(&self.outcomes[j], &self.outcomes[k]).expect("same dim");
                g[(j, k)] = v;
                g[(k, j)] = v;
            }
        }
        g
    }

    /// Rank of the Gram matrix, i.e. the dimension of the outcome span,
    /// with the relative cutoff `1 / CONDITION_CEILING`. Also returns the
    /// Gram condition number restricted to the top `d²` eigenvalues.
    pub fn span_rank(&self) -> (usize, f64) {
        let g = self.gram();
        let mut ev: Vec<f64> = g.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        let top = ev.first().copied().unwrap_or(0.0);
        let rank = ev
            .iter()
            .filter(|&&x| x > top / tol::CONDITION_CEILING)
            .count();
        let d2 = self.dim * self.dim;
        let condition = if ev.len() >= d2 && ev[d2 - 1] > 0.0 {
            top / ev[d2 - 1]
        } else {
            f64::INFINITY
        };
        (rank, condition)
    }

    /// Numerical rank of every outcome.
    pub fn outcome_ranks(&self) -> Vec<usize> {
        self.outcomes.iter().map(|o| o.rank(1e-9)).collect()
    }

    /// Reports Hermiticity, positivity and completeness deviations.
    pub fn validate(&self) -> ValidationReport {
        let mut min_eigenvalue = f64::INFINITY;
        let mut worst_outcome = 0;
        let mut sum = Operator::zeros(self.dim);
        for (j, op) in self.outcomes.iter().enumerate() {
            let m = op.min_eigenvalue();
            if m < min_eigenvalue {
                min_eigenvalue = m;
                worst_outcome = j;
            }
            sum = &sum + op;
        }
        let gap = &Operator::identity(self.dim) - &sum;
        let completeness_deviation = gap.max_abs();
        let completeness_gap_norm = gap.hs_norm();
        let positive = min_eigenvalue >= -tol::POSITIVE;
        let complete = completeness_deviation <= tol::TRACE;
        ValidationReport {
            outcomes: self.len(),
            hermiticity_defect: self.ingest_hermiticity_defect,
            min_eigenvalue,
            worst_outcome,
            completeness_deviation,
            completeness_gap_norm,
            positive,
            complete,
            passed: positive && complete,
        }
    }

    /// Fails with [`Error::InvalidPovm`] naming the first violated property.
    pub fn ensure_valid(&self) -> Result<ValidationReport> {
        let report = self.validate();
        if !report.positive {
            return Err(Error::InvalidPovm(format!(
                "outcome {} has eigenvalue {:.3e}",
                report.worst_outcome, report.min_eigenvalue
            )));
        }
        if !report.complete {
            return Err(Error::InvalidPovm(format!(
                "outcomes do not sum to identity (max deviation {:.3e}, HS norm {:.3e})",
                report.completeness_deviation, report.completeness_gap_norm
            )));
        }
        Ok(report)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub outcomes: usize,
    /// Largest `|A_ij − conj(A_ji)|` seen before symmetrization.
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub worst_outcome: usize,
    /// Max entrywise deviation of `Σ_j Π_j` from the identity.
    pub completeness_deviation: f64,
    /// Hilbert–Schmidt norm of `1 − Σ_j Π_j`.
    pub completeness_gap_norm: f64,
    pub positive: bool,
    pub complete: bool,
    pub passed: bool,
}

/// Outcome purities `℘_j = tr(Π_j²)/tr(Π_j)²` and their averages.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PurityReport {
    pub per_outcome_purity: Vec<f64>,
    /// `℘ = Σ_j tr(Π_j) ℘_j / d`.
    pub average_purity: f64,
    /// `℘(ρ) = Σ_j p_j ℘_j` when a state was supplied.
    pub weighted_purity: Option<f64>,
}

pub fn purity_report(p: &Povm, rho: Option<&DensityState>) -> Result<PurityReport> {
    let mut per_outcome_purity = Vec::with_capacity(p.len());
    let mut average = 0.0;
    for (index, op) in p.outcomes().iter().enumerate() {
        let tr = op.trace();
        if !(tr.abs() > tol::TRACE) {
            return Err(Error::ZeroTraceOutcome { index });
        }
        let purity = op.trace_of_square() / (tr * tr);
        per_outcome_purity.push(purity);
        average += tr * purity;
    }
    let average_purity = average / p.dim() as f64;
    let weighted_purity = match rho {
        Some(rho) => {
            let probs = p.probabilities(rho)?;
            Some(
                probs
                    .iter()
                    .zip(&per_outcome_purity)
                    .map(|(a, b)| a * b)
                    .sum(),
            )
        }
        None => None,
    };
    Ok(PurityReport {
        per_outcome_purity,
        average_purity,
        weighted_purity,
    })
}

/// Weyl–Heisenberg displacement `X^a Z^b` with `X|k⟩ = |k+1⟩`,
/// `Z|k⟩ = ω^k |k⟩`.
pub fn displacement(d: usize, a: usize, b: usize) -> DMatrix<C64> {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut m = DMatrix::zeros(d, d);
    for k in 0..d {
        let phase = C64::from_polar(1.0, omega * ((b * k) % d) as f64);
        m[((k + a) % d, k)] = phase;
    }
    m
}

/// Built-in SIC fiducials: the Bloch tetrahedron for `d = 2` and the Hesse
/// configuration for `d = 3`.
pub fn builtin_fiducial(d: usize) -> Option<DVector<C64>> {
    match d {
        2 => {
            let theta = (1.0f64 / 3.0f64.sqrt()).acos();
            Some(DVector::from_vec(vec![
                C64::new((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), std::f64::consts::FRAC_PI_4),
            ]))
        }
        3 => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            Some(DVector::from_vec(vec![
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
                C64::new(-s, 0.0),
            ]))
        }
        _ => None,
    }
}

/// Kets of the Weyl–Heisenberg orbit of `fiducial`, ordered `(a, b)`
/// lexicographically.
pub fn weyl_heisenberg_orbit(fiducial: &DVector<C64>) -> Vec<DVector<C64>> {
    let d = fiducial.len();
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            out.push(displacement(d, a, b) * fiducial);
        }
    }
    out
}

/// Worst deviation of `|⟨ψ_j|ψ_k⟩|²` from `(dδ_jk + 1)/(d + 1)` over unit
/// kets.
pub fn sic_overlap_deviation(kets: &[DVector<C64>]) -> f64 {
    let d = kets.first().map_or(1, |k| k.len());
    let off = 1.0 / (d as f64 + 1.0);
    let mut worst = 0.0f64;
    for (j, a) in kets.iter().enumerate() {
        for (k, b) in kets.iter().enumerate().skip(j) {
            let target = if j == k { 1.0 } else { off };
            worst = worst.max((a.dotc(b).norm_sqr() - target).abs());
        }
    }
    worst
}

/// Tolerance for accepting a user-supplied fiducial.
const FIDUCIAL_TOLERANCE: f64 = 1e-6;

/// Rank-one SIC `Π_j = |ψ_j⟩⟨ψ_j|/d` from the Weyl–Heisenberg orbit of a
/// fiducial (built in for `d ∈ {2, 3}`).
pub fn sic_rank_one(d: usize, fiducial: Option<&DVector<C64>>) -> Result<Povm> {
    let fid = match fiducial {
        Some(f) => {
            if f.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: f.len(),
                });
            }
            let norm = f.norm();
            if !(norm > 0.0) {
                return Err(Error::InvalidParameter(
                    "fiducial is the zero vector".into(),
                ));
            }
            f / C64::new(norm, 0.0)
        }
        None => builtin_fiducial(d).ok_or_else(|| Error::UnsupportedDimension {
            dim: d,
            reason: "no built-in SIC fiducial; supply one".into(),
        })?,
    };
    let kets = weyl_heisenberg_orbit(&fid);
    let worst = sic_overlap_deviation(&kets);
    if worst > FIDUCIAL_TOLERANCE {
        return Err(Error::FiducialNotSic { worst });
    }
    let outcomes = kets
        .iter()
        .map(|k| Operator::projector(k).scale(1.0 / d as f64))
        .collect();
    Povm::new(d, outcomes, format!("sic-d{d}"))
}

/// Checks that `p` is a rank-one SIC: `d²` outcomes with
/// `tr(Π_jΠ_k) = (dδ_jk + 1)/(d²(d+1))`.
fn ensure_rank_one_sic(p: &Povm) -> Result<()> {
    let d = p.dim() as f64;
    if !p.is_minimal() {
        return Err(Error::InvalidParameter("base is not minimal".into()));
    }
    let g = p.gram();
    let mut worst = 0.0f64;
    for j in 0..p.len() {
        for k in 0..p.len() {
            let target = (d * if j == k { 1.0 } else { 0.0 } + 1.0) / (d * d * (d + 1.0));
            worst = worst.max((g[(j, k)] - target).abs());
        }
    }
    if worst > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "base is not a rank-one SIC (Gram deviation {worst:.3e})"
        )));
    }
    Ok(())
}

/// `Π_j = x Π̃_j + (1 − x)/d² · 1` for a rank-one SIC `Π̃` and `0 < x ≤ 1`.
pub fn generalized_sic_depolarized(base: &Povm, x: f64) -> Result<Povm> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::InvalidParameter(format!("x = {x} outside (0, 1]")));
    }
    ensure_rank_one_sic(base)?;
    if x == 1.0 {
        return Ok(base.clone());
    }
    let d = base.dim();
    let shift = Operator::identity(d).scale((1.0 - x) / (d * d) as f64);
    let outcomes = base
        .outcomes()
        .iter()
        .map(|o| &o.scale(x) + &shift)
        .collect();
    Povm::new(d, outcomes, format!("gen-sic-depol-d{d}-x{x}"))
}

/// Orthonormal basis of traceless Hermitian operators (generalized Gell-Mann
/// matrices scaled to unit Hilbert–Schmidt norm).
pub fn traceless_hermitian_basis(d: usize) -> Vec<Operator> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = DMatrix::zeros(d, d);
            sym[(j, k)] = C64::new(s, 0.0);
            sym[(k, j)] = C64::new(s, 0.0);
            basis.push(Operator::from_matrix_lossy(sym));
            let mut asym = DMatrix::zeros(d, d);
            asym[(j, k)] = C64::new(0.0, -s);
            asym[(k, j)] = C64::new(0.0, s);
            basis.push(Operator::from_matrix_lossy(asym));
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for v in diag.iter_mut().take(l) {
            *v = 1.0 / norm;
        }
        diag[l] = -(l as f64) / norm;
        basis.push(Operator::diagonal(&diag));
    }
    basis
}

/// Vertices of a regular simplex centred at the origin of `R^{n−1}`:
/// `n` vectors with `v_j · v_k = n δ_jk − 1`.
pub fn regular_simplex(n: usize) -> Vec<DVector<f64>> {
    // Helmert basis of the complement of (1, …, 1).
    let scale = (n as f64).sqrt();
    (0..n)
        .map(|j| {
            DVector::from_fn(n - 1, |a, _| {
                let a1 = a + 1;
                let h = 1.0 / ((a1 * (a1 + 1)) as f64).sqrt();
                let entry = if j < a1 {
                    h
                } else if j == a1 {
                    -(a1 as f64) * h
                } else {
                    0.0
                };
                scale * entry
            })
        })
        .collect()
}

/// Generalized SIC `Π_j = (1 + B_j)/d²` where the `B_j` are a randomly
/// rotated regular simplex of traceless Hermitian operators, scaled so the
/// most negative eigenvalue among all `B_j` is exactly `−1`.
pub fn generalized_sic_simplex(d: usize, seed: u64) -> Result<Povm> {
    if d < 2 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "need d >= 2".into(),
        });
    }
    let n = d * d;
    let basis = traceless_hermitian_basis(d);
    let mut rng = rng_from_seed(seed);
    let rotation = haar_orthogonal(n - 1, &mut rng);
    let unscaled: Vec<Operator> = regular_simplex(n)
        .into_iter()
        .map(|v| {
            let w = &rotation * v;
            let mut b = Operator::zeros(d);
            for (coef, t) in w.iter().zip(&basis) {
                b = &b + &t.scale(*coef);
            }
            b
        })
        .collect();
    let most_negative = unscaled
        .iter()
        .map(Operator::min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let t = 1.0 / most_negative.abs();
    let one = Operator::identity(d);
    let outcomes = unscaled
        .iter()
        .map(|b| (&one + &b.scale(t)).scale(1.0 / n as f64))
        .collect();
    Povm::new(d, outcomes, format!("gen-sic-simplex-d{d}-s{seed}"))
}

pub fn is_prime(d: usize) -> bool {
    d >= 2
        && (2..)
            .take_while(|k| k * k <= d)
            .all(|k| !d.is_multiple_of(k))
}

/// Kets of a complete set of `d + 1` mutually unbiased bases for prime `d`,
/// basis by basis.
pub fn mub_kets(d: usize) -> Result<Vec<Vec<DVector<C64>>>> {
    if !is_prime(d) {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "dimension must be prime".into(),
        });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    if d == 2 {
        return Ok(vec![
            vec![
                DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
                DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]),
            ],
            vec![
                DVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]),
                DVector::from_vec(vec![c(s, 0.0), c(-s, 0.0)]),
            ],
            vec![
                DVector::from_vec(vec![c(s, 0.0), c(0.0, s)]),
                DVector::from_vec(vec![c(s, 0.0), c(0.0, -s)]),
            ],
        ]);
    }
    let mut bases = Vec::with_capacity(d + 1);
    bases.push(
        (0..d)
            .map(|m| DVector::from_fn(d, |l, _| c(if l == m { 1.0 } else { 0.0 }, 0.0)))
            .collect(),
    );
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let amp = 1.0 / (d as f64).sqrt();
    for k in 0..d {
        let basis = (0..d)
            .map(|m| {
                DVector::from_fn(d, |l, _| {
                    let exponent = (k * l * l + m * l) % d;
                    C64::from_polar(amp, omega * exponent as f64)
                })
            })
            .collect();
        bases.push(basis);
    }
    Ok(bases)
}

/// Complete MUB measurement: `d(d+1)` outcomes `|e⟩⟨e|/(d+1)`.
pub fn mub_complete(d: usize) -> Result<Povm> {
    let bases = mub_kets(d)?;
    let w = 1.0 / (d as f64 + 1.0);
    let outcomes = bases
        .iter()
        .flatten()
        .map(|k| Operator::projector(k).scale(w))
        .collect();
    Povm::new(d, outcomes, format!("mub-d{d}"))
}

/// `(1 + n·σ)/2` for a Bloch vector `n`.
pub fn bloch_operator(n: [f64; 3]) -> Operator {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0 + n[2], 0.0),
            C64::new(n[0], -n[1]),
            C64::new(n[0], n[1]),
            C64::new(1.0 - n[2], 0.0),
        ],
    );
    Operator::from_matrix_lossy(m.scale(0.5))
}

/// Qubit cube measurement: the two antipodal tetrahedra, each weighted 1/2.
/// The first four outcomes (times two) are the tetrahedral SIC.
pub fn cube_qubit() -> Povm {
    let s = 1.0 / 3.0f64.sqrt();
    let tetra = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
    let outcomes = tetra
        .iter()
        .copied()
        .chain(tetra.iter().map(|v| [-v[0], -v[1], -v[2]]))
        .map(|v| bloch_operator(v).scale(0.25))
        .collect();
    Povm::new(2, outcomes, "cube-d2").expect("fixed shape")
}

/// Retry budget for [`random_minimal_ic`].
const RANDOM_IC_ATTEMPTS: usize = 32;
/// Gram condition ceiling for accepting a random minimal IC measurement.
const RANDOM_IC_CONDITION: f64 = 1e6;

/// Random minimal IC measurement: `d²` Wishart operators `G G†` normalized
/// by the inverse square root of their sum, redrawn until the Gram matrix
/// has condition number below `1e6`.
pub fn random_minimal_ic(d: usize, seed: u64) -> Result<Povm> {
    if d < 2 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "need d >= 2".into(),
        });
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..RANDOM_IC_ATTEMPTS {
        let ops = (0..d * d)
            .map(|_| {
                let g = ginibre(d, d, &mut rng);
                Operator::from_matrix_lossy(&g * g.adjoint())
            })
            .collect();
        let p = Povm::from_positive_operators(ops, format!("random-ic-d{d}-s{seed}"))?;
        let (rank, condition) = p.span_rank();
        if rank == d * d && condition < RANDOM_IC_CONDITION {
            return Ok(p);
        }
    }
    Err(Error::RetryBudgetExhausted {
        attempts: RANDOM_IC_ATTEMPTS,
    })
}

/// `Π_j → y Π_j + (1 − y) tr(Π_j)/d · 1`, which keeps every trace and maps
/// the average purity to `1/d + y²(℘ − 1/d)`.
pub fn depolarize(p: &Povm, y: f64) -> Result<Povm> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::InvalidParameter(format!("y = {y} outside [0, 1]")));
    }
    let d = p.dim();
    let one = Operator::identity(d);
    let outcomes = p
        .outcomes()
        .iter()
        .map(|o| &o.scale(y) + &one.scale((1.0 - y) * o.trace() / d as f64))
        .collect();
    Povm::new(d, outcomes, p.label().to_string())
}

/// Depolarizes `p` until its average purity equals `target`.
pub fn depolarize_to_purity(p: &Povm, target: f64) -> Result<Povm> {
    let inv_d = 1.0 / p.dim() as f64;
    let current = purity_report(p, None)?.average_purity;
    if !(target >= inv_d && target <= current + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "target purity {target} outside [{inv_d}, {current}]"
        )));
    }
    let y = if current - inv_d <= 0.0 {
        1.0
    } else {
        ((target - inv_d) / (current - inv_d))
            .clamp(0.0, 1.0)
            .sqrt()
    };
    depolarize(p, y)
}

/// Adds `eps · tr(Π_index) · R` to one outcome (`R` a random unit-trace
/// positive operator) and renormalizes the whole set.
pub fn perturb_outcome(p: &Povm, index: usize, eps: f64, seed: u64) -> Result<Povm> {
    if index >= p.len() {
        return Err(Error::InvalidParameter(format!("no outcome {index}")));
    }
    let d = p.dim();
    let mut rng = rng_from_seed(seed);
    let g = ginibre(d, d, &mut rng);
    let r = Operator::from_matrix_lossy(&g * g.adjoint());
    let r = r.scale(1.0 / r.trace());
    let mut ops = p.outcomes().to_vec();
    ops[index] = &ops[index] + &r.scale(eps * ops[index].trace());
    Povm::from_positive_operators(ops, format!("{}-perturbed", p.label()))
}

/// Weyl–Heisenberg covariant measurement `D ρ₀ D† / d` generated by an
/// arbitrary fiducial state.
pub fn weyl_heisenberg_covariant(fiducial: &DensityState) -> Result<Povm> {
    let d = fiducial.dim();
    let mut outcomes = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let u = displacement(d, a, b);
            outcomes.push(fiducial.operator().conjugate_by(&u).scale(1.0 / d as f64));
        }
    }
    Povm::new(d, outcomes, format!("wh-covariant-d{d}"))
}
