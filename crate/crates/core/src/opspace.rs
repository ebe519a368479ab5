//! Operator space and superoperator algebra.
//!
//! Operators are Hermitian `d × d` complex matrices. The operator ket
//! `|A⟩⟩` is the column-stacked vector of `A` (entry `(i, j)` lands at
//! index `j·d + i`); this is the storage order of `nalgebra::DMatrix`, so
//! vectorization is a copy of the backing slice. Superoperators are dense
//! `d² × d²` matrices acting on those kets, and `⟨⟨A|B⟩⟩ = tr(A†B)`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::{tol, C64};

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise deviation of `m` from `m†`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..d {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// A Hermitian operator on `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
}

impl Operator {
    /// Wraps a square matrix, replacing it with its Hermitian part.
    ///
    /// A warning is logged when the correction exceeds [`tol::HERMITIAN`];
    /// last-digit asymmetry from file round trips is expected and silent.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidParameter(
                "operator dimension must be positive".into(),
            ));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > tol::HERMITIAN {
            log::warn!("symmetrizing operator with Hermiticity defect {defect:.3e}");
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
        })
    }

    /// Hermitian part of a matrix already known to be Hermitian up to rounding.
    pub(crate) fn from_matrix_lossy(matrix: DMatrix<C64>) -> Self {
        Self {
            matrix: hermitian_part(&matrix),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(d, d),
        }
    }

    /// `|ψ⟩⟨ψ|` for an arbitrary (not necessarily normalized) ket.
    pub fn projector(psi: &DVector<C64>) -> Self {
        Self::from_matrix_lossy(psi * psi.adjoint())
    }

    /// Real diagonal operator.
    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `tr(A²)`.
    pub fn trace_of_square(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Hilbert–Schmidt norm `√tr(A†A)`.
    pub fn hs_norm(&self) -> f64 {
        self.trace_of_square().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Number of eigenvalues above `rel_cutoff` times the largest magnitude.
    pub fn rank(&self, rel_cutoff: f64) -> usize {
        let ev = self.eigenvalues();
        let top = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if top == 0.0 {
            return 0;
        }
        ev.iter().filter(|v| v.abs() > rel_cutoff * top).count()
    }

    /// `f(A) = V f(Λ) V†` for a real function of the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Operator {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let v = &eig.eigenvectors;
        let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| C64::new(f(x), 0.0)));
        Self::from_matrix_lossy(v * diag * v.adjoint())
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Operator {
        Self::from_matrix_lossy(u * &self.matrix * u.adjoint())
    }

    /// `B A B` for Hermitian `B`.
    pub fn sandwich(&self, b: &Operator) -> Operator {
        Self::from_matrix_lossy(&b.matrix * &self.matrix * &b.matrix)
    }

    pub fn scale(&self, c: f64) -> Operator {
        Self {
            matrix: self.matrix.scale(c),
        }
    }

    fn check_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

/// `tr(a† b)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    a.check_dim(b)?;
    Ok(a.matrix
        .iter()
        .zip(b.matrix.iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Real Hilbert–Schmidt inner product of two Hermitian operators.
pub fn hs_inner_re(a: &Operator, b: &Operator) -> Result<f64> {
    hs_inner(a, b).map(|z| z.re)
}

/// The double ket `|A⟩⟩`, a column-stacked vector of length `d²`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorKet {
    dim: usize,
    coords: DVector<C64>,
}

impl OperatorKet {
    pub fn from_coords(dim: usize, coords: DVector<C64>) -> Result<Self> {
        if coords.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: coords.len(),
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &DVector<C64> {
        &self.coords
    }

    /// Standard inner product `⟨⟨self|other⟩⟩`.
    pub fn inner(&self, other: &OperatorKet) -> C64 {
        self.coords.dotc(&other.coords)
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    /// The unsymmetrized matrix behind this ket.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_column_slice(self.dim, self.dim, self.coords.as_slice())
    }
}

pub fn vectorize(a: &Operator) -> OperatorKet {
    OperatorKet {
        dim: a.dim(),
        coords: DVector::from_column_slice(a.matrix.as_slice()),
    }
}

/// Inverse of [`vectorize`] on Hermitian operators; for other kets it
/// returns the Hermitian part.
pub fn devectorize(v: &OperatorKet) -> Operator {
    Operator::from_matrix_lossy(v.to_matrix())
}

/// Linear map on operator kets, stored as a dense `d² × d²` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: DMatrix<C64>,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        let n = dim * dim;
        Self {
            dim,
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        let n = dim * dim;
        Self {
            dim,
            matrix: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply_ket(&self, v: &OperatorKet) -> OperatorKet {
        OperatorKet {
            dim: self.dim,
            coords: &self.matrix * &v.coords,
        }
    }

    /// Applies the map and returns the raw (possibly non-Hermitian) image.
    pub fn apply_raw(&self, a: &Operator) -> DMatrix<C64> {
        self.apply_ket(&vectorize(a)).to_matrix()
    }

    /// Applies the map, returning the Hermitian part of the image.
    pub fn apply(&self, a: &Operator) -> Operator {
        Operator::from_matrix_lossy(self.apply_raw(a))
    }

    /// Hermiticity defect of the image of a Hermitian probe.
    pub fn hermiticity_defect_on(&self, probe: &Operator) -> f64 {
        hermiticity_defect(&self.apply_raw(probe))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn scale(&self, c: f64) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.scale(c),
        }
    }

    pub fn adjoint(&self) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `Tr` of the superoperator.
    pub fn trace(&self) -> f64 {
        superop_trace(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = hermitian_part(&self.matrix);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Ratio of extreme singular values (`∞` when singular).
    pub fn condition_number(&self) -> f64 {
        let sv = self.matrix.clone().singular_values();
        let max = sv.iter().fold(0.0f64, |m, s| m.max(*s));
        let min = sv.iter().fold(f64::INFINITY, |m, s| m.min(*s));
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Inverse, refused when the condition number exceeds
    /// [`tol::CONDITION_CEILING`].
    pub fn inverse(&self) -> Result<Superoperator> {
        let condition = self.condition_number();
        if !(condition < tol::CONDITION_CEILING) {
            return Err(Error::NotInformationallyComplete { condition });
        }
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or(Error::NotInformationallyComplete { condition })?;
        Ok(Superoperator {
            dim: self.dim,
            matrix: inv,
        })
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// `|a⟩⟩⟨⟨b|`, mapping `X` to `a · tr(b†X)`.
pub fn dyad(a: &Operator, b: &Operator) -> Result<Superoperator> {
    a.check_dim(b)?;
    let va = vectorize(a);
    let vb = vectorize(b);
    Ok(Superoperator {
        dim: a.dim(),
        matrix: &va.coords * vb.coords.adjoint(),
    })
}

/// Adds `w · |a⟩⟩⟨⟨b|` to `acc` in place.
pub(crate) fn add_weighted_dyad(acc: &mut Superoperator, w: f64, a: &Operator, b: &Operator) {
    let va = DVector::from_column_slice(a.matrix.as_slice());
    let vb = DVector::from_column_slice(b.matrix.as_slice());
    acc.matrix
        .gerc(C64::new(w, 0.0), &va, &vb, C64::new(1.0, 0.0));
}

/// Moore–Penrose pseudoinverse; singular values below `cutoff` times the
/// largest one are treated as zero.
pub fn pseudoinverse(s: &Superoperator, cutoff: f64) -> Superoperator {
    if hermiticity_defect(&s.matrix) <= 1e-13 * s.max_abs() {
        return hermitian_pseudoinverse(s, cutoff);
    }
    let svd = s.matrix.clone().svd(true, true);
    let top = svd.singular_values.iter().fold(0.0f64, |m, x| m.max(*x));
    let n = s.matrix.nrows();
    if top == 0.0 {
        return Superoperator::zeros(s.dim);
    }
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    let mut inv = DMatrix::<C64>::zeros(n, n);
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > cutoff * top {
            let uk = u.column(k);
            let vk = v_t.row(k).adjoint();
            inv.gerc(C64::new(1.0 / sigma, 0.0), &vk, &uk, C64::new(1.0, 0.0));
        }
    }
    Superoperator {
        dim: s.dim,
        matrix: inv,
    }
}

// nalgebra's complex SVD occasionally loses ~1e-5 relative accuracy on
// Hermitian inputs; the symmetric eigensolver does not.
fn hermitian_pseudoinverse(s: &Superoperator, cutoff: f64) -> Superoperator {
    let eig = SymmetricEigen::new(hermitian_part(&s.matrix));
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let n = s.matrix.nrows();
    let mut inv = DMatrix::<C64>::zeros(n, n);
    if top == 0.0 {
        return Superoperator::zeros(s.dim);
    }
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > cutoff * top {
            let v = eig.eigenvectors.column(k);
            inv.gerc(C64::new(1.0 / lambda, 0.0), &v, &v, C64::new(1.0, 0.0));
        }
    }
    Superoperator {
        dim: s.dim,
        matrix: inv,
    }
}

/// `P̄ = I − |1⟩⟩⟨⟨1|/d`, the orthogonal projector onto traceless operators.
pub fn traceless_projector(dim: usize) -> Superoperator {
    let one = Operator::identity(dim);
    let mut p = Superoperator::identity(dim);
    add_weighted_dyad(&mut p, -1.0 / dim as f64, &one, &one);
    p
}

/// `P̄ s P̄`.
pub fn traceless_projection(s: &Superoperator) -> Superoperator {
    let p = traceless_projector(s.dim);
    p.compose(s).compose(&p)
}

/// Sum of the diagonal of the `d² × d²` matrix.
pub fn superop_trace(s: &Superoperator) -> f64 {
    let t = s.matrix.trace();
    debug_assert!(
        t.im.abs() < 1e-8 * (1.0 + t.re.abs()),
        "superoperator trace {t}"
    );
    t.re
}

/// A positive, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    op: Operator,
}

impl DensityState {
    /// Validates trace one (within [`tol::TRACE`]) and positivity (within
    /// [`tol::POSITIVE`]).
    pub fn new(op: Operator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = op.min_eigenvalue();
        if min < -tol::POSITIVE {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            op: Operator::identity(d).scale(1.0 / d as f64),
        }
    }

    /// Projector onto the normalized ket.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let psi = psi / C64::new(norm, 0.0);
        Ok(Self {
            op: Operator::projector(&psi),
        })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.op.trace_of_square()
    }

    /// Born-rule probability `tr(Π ρ)`.
    pub fn probability(&self, outcome: &Operator) -> f64 {
        hs_inner_re(outcome, &self.op).expect("dimension checked by caller")
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> DensityState {
        Self {
            op: self.op.conjugate_by(u),
        }
    }
}
