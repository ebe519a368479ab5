//! Structure constants `[L_j, L_k] = Σ_l C_jkl L_l` of an operator basis and
//! their complete antisymmetry.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurements::Povm;
use crate::opspace::{hs_inner, Operator};
use crate::tomo::{classify_with, ensure_minimal_ic, ClassifyOptions};
use crate::{tol, C64};

/// Expansion residual accepted for every commutator.
pub const EXPANSION_RESIDUAL: f64 = 1e-9;

/// `[a, b] = ab − ba` as a raw (anti-Hermitian for Hermitian inputs) matrix.
pub fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

/// Dense `n × n × n` structure tensor, stored row-major in `(j, k, l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureTensor {
    n: usize,
    entries: Vec<C64>,
    /// Largest `‖[L_j,L_k] − Σ_l C_jkl L_l‖_HS` over all pairs.
    pub expansion_residual: f64,
    /// Largest `|Re C_jkl|`; zero for Hermitian bases.
    pub max_real_part: f64,
}

impl StructureTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![C64::new(0.0, 0.0); n * n * n],
            expansion_residual: 0.0,
            max_real_part: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize, l: usize) -> C64 {
        self.entries[(j * self.n + k) * self.n + l]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// Structure matrix `(C_j)_kl = C_jkl`.
    pub fn structure_matrix(&self, j: usize) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |k, l| self.get(j, k, l))
    }

    /// `C → c·C`.
    pub fn scale(&self, c: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|x| x * c).collect(),
            expansion_residual: self.expansion_residual * c.abs(),
            max_real_part: self.max_real_part * c.abs(),
        }
    }

    pub fn to_export(&self) -> TensorExport {
        TensorExport {
            shape: [self.n; 3],
            entries: self.entries.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

/// JSON form of a tensor: shape header plus a flat row-major `[re, im]` list.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct TensorExport {
    pub shape: [usize; 3],
    pub entries: Vec<[f64; 2]>,
}

/// Expands every commutator of `basis` in `basis` itself through the Gram
/// system `G c = b`, `G_ab = ⟨⟨L_a|L_b⟩⟩`.
pub fn structure_constants(basis: &[Operator]) -> Result<StructureTensor> {
    let n = basis.len();
    let Some(first) = basis.first() else {
        return Ok(StructureTensor::zeros(0));
    };
    let d = first.dim();
    if n != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: n,
        });
    }
    let mut gram = DMatrix::<C64>::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            gram[(a, b)] = hs_inner(&basis[a], &basis[b])?;
        }
    }
    let sv = gram.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition < tol::CONDITION_CEILING) {
        return Err(Error::RankDeficientBasis { condition });
    }
    let lu = gram.lu();
    let mats: Vec<&DMatrix<C64>> = basis.iter().map(Operator::matrix).collect();

    // One row block (fixed j) per task; each is independent.
    let blocks: Vec<(Vec<C64>, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut out = Vec::with_capacity(n * n);
            let mut worst = 0.0f64;
            for k in 0..n {
                let comm = commutator(mats[j], mats[k]);
                let rhs = nalgebra::DVector::from_iterator(
                    n,
                    mats.iter()
                        .map(|m| m.map(|x| x.conj()).component_mul(&comm).sum()),
                );
                let c = lu.solve(&rhs).expect("Gram matrix checked invertible");
                let mut recon = comm.clone();
                for l in 0..n {
                    recon -= mats[l] * c[l];
                }
                worst = worst.max(recon.norm());
                out.extend(c.iter().copied());
            }
            (out, worst)
        })
        .collect();

    let mut entries = Vec::with_capacity(n * n * n);
    let mut expansion_residual = 0.0f64;
    for (block, worst) in blocks {
        entries.extend(block);
        expansion_residual = expansion_residual.max(worst);
    }
    let max_real_part = entries.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    if expansion_residual >= EXPANSION_RESIDUAL {
        log::warn!("commutator expansion residual {expansion_residual:.3e}");
    }
    Ok(StructureTensor {
        n,
        entries,
        expansion_residual,
        max_real_part,
    })
}

/// Complete-antisymmetry report, cross-checked against Hermiticity of the
/// structure matrices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AntisymmetryReport {
    /// `max |C_σ(jkl) − sign(σ) C_jkl|` over the three transpositions.
    pub violation: f64,
    /// `max_j max_kl |(C_j)_kl − conj((C_j)_lk)|`.
    pub hermiticity_defect: f64,
    pub threshold: f64,
    pub antisymmetric: bool,
    pub hermitian: bool,
    pub verdicts_agree: bool,
}

pub fn antisymmetry_violation(t: &StructureTensor) -> AntisymmetryReport {
    antisymmetry_violation_with(t, tol::VERDICT)
}

pub fn antisymmetry_violation_with(t: &StructureTensor, threshold: f64) -> AntisymmetryReport {
    let n = t.n();
    let mut violation = 0.0f64;
    let mut hermiticity_defect = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let c = t.get(j, k, l);
                let swaps = [t.get(k, j, l), t.get(j, l, k), t.get(l, k, j)];
                for s in swaps {
                    violation = violation.max((s + c).norm());
                }
                hermiticity_defect = hermiticity_defect.max((c - t.get(j, l, k).conj()).norm());
            }
        }
    }
    let antisymmetric = violation < threshold;
    let hermitian = hermiticity_defect < threshold;
    AntisymmetryReport {
        violation,
        hermiticity_defect,
        threshold,
        antisymmetric,
        hermitian,
        verdicts_agree: antisymmetric == hermitian,
    }
}

/// Antisymmetry of the outcome structure constants versus the
/// generalized-SIC verdict of the classifier.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AntisymmetryAudit {
    pub antisymmetry: AntisymmetryReport,
    pub expansion_residual: f64,
    pub is_generalized_sic: bool,
    pub generalized_sic_residual: f64,
    pub consistent: bool,
}

pub fn antisymmetry_audit(p: &Povm) -> Result<AntisymmetryAudit> {
    antisymmetry_audit_with(p, tol::VERDICT)
}

pub fn antisymmetry_audit_with(p: &Povm, threshold: f64) -> Result<AntisymmetryAudit> {
    let opts = ClassifyOptions {
        threshold,
        ..ClassifyOptions::default()
    };
    let diag = classify_with(p, &opts)?;
    ensure_minimal_ic(p, &diag)?;
    let tensor = structure_constants(p.outcomes())?;
    let antisymmetry = antisymmetry_violation_with(&tensor, threshold);
    let consistent = antisymmetry.verdicts_agree
        && antisymmetry.antisymmetric == diag.is_generalized_sic
        && tensor.expansion_residual < EXPANSION_RESIDUAL;
    Ok(AntisymmetryAudit {
        antisymmetry,
        expansion_residual: tensor.expansion_residual,
        is_generalized_sic: diag.is_generalized_sic,
        generalized_sic_residual: diag.residuals.generalized_sic.unwrap_or(f64::NAN),
        consistent,
    })
}
