//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here works on `d x d` complex matrices with `d` in the single
//! digits, so all storage is dense. Operators are validated once at
//! construction ([`HermitianOperator`], [`DensityMatrix`]) and are immutable
//! afterwards.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;

/// Relative tolerance for `||M - M^dagger||_max`.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Default relative tolerance for merging nearly equal eigenvalues.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;
/// Default relative tolerance for `||[A,B]||_max`, scaled by `||A||_op ||B||_op`.
pub const DEFAULT_COMMUTE_TOL: f64 = 1e-8;
/// Absolute tolerance used for density-matrix trace and positivity checks.
pub const STATE_TOL: f64 = 1e-9;

pub(crate) const C0: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerances used when decomposing operators and building contexts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues closer than `group * max(1, ||H||_op)` share one eigenspace.
    pub group: f64,
    /// Pairs are accepted as commuting when `||[A,B]||_max <= commute * ||A||_op * ||B||_op`.
    pub commute: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            group: DEFAULT_GROUP_TOL,
            commute: DEFAULT_COMMUTE_TOL,
        }
    }
}

/// A square complex matrix of dimension at least one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    inner: CMatrix,
}

/// Wire format: `{"dim": d, "entries": [[[re, im], ...], ...]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixRepr {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        if repr.entries.len() != repr.dim {
            return Err(Error::Dimension {
                expected: repr.dim,
                found: repr.entries.len(),
            });
        }
        for row in &repr.entries {
            if row.len() != repr.dim {
                return Err(Error::Dimension {
                    expected: repr.dim,
                    found: row.len(),
                });
            }
        }
        let d = repr.dim;
        let m = CMatrix::from_fn(d, d, |i, j| {
            let [re, im] = repr.entries[i][j];
            Complex64::new(re, im)
        });
        ComplexMatrix::new(m)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        let d = m.dim();
        MatrixRepr {
            dim: d,
            entries: (0..d)
                .map(|i| (0..d).map(|j| [m.inner[(i, j)].re, m.inner[(i, j)].im]).collect())
                .collect(),
        }
    }
}

impl ComplexMatrix {
    pub fn new(inner: CMatrix) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::validation(format!(
                "matrix is {}x{}, expected square",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.nrows() == 0 {
            return Err(Error::validation("matrix dimension must be at least 1"));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("matrix has non-finite entries"));
        }
        Ok(ComplexMatrix { inner })
    }

    pub fn identity(d: usize) -> Self {
        ComplexMatrix {
            inner: CMatrix::identity(d, d),
        }
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::validation(
                "rows must all have length equal to the row count",
            ));
        }
        ComplexMatrix::new(CMatrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_inner(self) -> CMatrix {
        self.inner
    }
}

impl Deref for ComplexMatrix {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.inner
    }
}

/// A Hermitian observable. The stored matrix is exactly Hermitian: the input
/// is symmetrized after passing the tolerance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for HermitianOperator {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        HermitianOperator::new(m.into_inner())
    }
}

impl From<HermitianOperator> for ComplexMatrix {
    fn from(h: HermitianOperator) -> Self {
        h.matrix
    }
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        let m = ComplexMatrix::new(m)?;
        let scale = max_norm(&m).max(1.0);
        let defect = max_norm(&(&*m - m.adjoint()));
        if defect > HERMITICITY_TOL * scale {
            return Err(Error::validation(format!(
                "matrix is not Hermitian: ||M - M^dagger||_max = {defect:.3e}"
            )));
        }
        let sym = (&*m + m.adjoint()).scale(0.5);
        Ok(HermitianOperator {
            matrix: ComplexMatrix { inner: sym },
        })
    }

    pub fn identity(d: usize) -> Self {
        HermitianOperator {
            matrix: ComplexMatrix::identity(d),
        }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)));
        HermitianOperator::new(CMatrix::from_diagonal(&v))
    }

    /// `|v><v|` for a (not necessarily normalized) vector.
    pub fn outer(v: &StateVector) -> Result<Self> {
        HermitianOperator::new(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn as_complex_matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Operator norm, i.e. the largest eigenvalue modulus.
    pub fn op_norm(&self) -> f64 {
        op_norm(&self.matrix)
    }
}

impl Deref for HermitianOperator {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.matrix.inner
    }
}

/// Eigenvalues grouped into degenerate eigenspaces, sorted ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<HermitianOperator>,
    pub dims: Vec<usize>,
    /// Orthonormal basis (as columns) of each eigenspace.
    bases: Vec<CMatrix>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Orthonormal basis of eigenspace `i`, one column per basis vector.
    pub fn basis(&self, i: usize) -> &CMatrix {
        &self.bases[i]
    }

    /// `sum_i lambda_i P_i`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.projectors[0].dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(d, d), |acc, (&l, p)| acc + p.scale(l))
    }
}

fn sorted_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let d = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * d.max(1))
        .ok_or_else(|| Error::numerical("Hermitian eigensolver did not converge"))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Splits ascending `values` into runs whose consecutive gaps are at most `tol`.
fn group_runs(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            runs.push(start..i);
            start = i;
        }
    }
    runs
}

fn projector_from_basis(basis: &CMatrix) -> HermitianOperator {
    let p = basis * basis.adjoint();
    let sym = (&p + p.adjoint()).scale(0.5);
    HermitianOperator {
        matrix: ComplexMatrix { inner: sym },
    }
}

/// Spectral decomposition of a Hermitian operator with degeneracy grouping.
pub fn eigendecompose(h: &HermitianOperator, group_tol: f64) -> Result<SpectralDecomposition> {
    let (values, vectors) = sorted_eigen(h)?;
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut out = SpectralDecomposition {
        eigenvalues: Vec::new(),
        projectors: Vec::new(),
        dims: Vec::new(),
        bases: Vec::new(),
    };
    for run in group_runs(&values, group_tol * scale) {
        let k = run.len();
        let mean = values[run.clone()].iter().sum::<f64>() / k as f64;
        let basis = vectors.columns(run.start, k).into_owned();
        out.eigenvalues.push(mean);
        out.projectors.push(projector_from_basis(&basis));
        out.dims.push(k);
        out.bases.push(basis);
    }
    Ok(out)
}

/// Projectors onto the joint eigenspaces of a commuting pair.
#[derive(Debug, Clone)]
pub struct JointEigenspaceFamily {
    /// Joint eigenvalue pairs `(a_i, b_i)`, sorted by `b`, then `a`.
    pub pairs: Vec<(f64, f64)>,
    pub projectors: Vec<HermitianOperator>,
    pub dims: Vec<usize>,
}

impl JointEigenspaceFamily {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Joint eigenspaces of `a` and `b`: `b` is diagonalized first, then the
/// compression of `a` onto each `b`-eigenspace.
pub fn joint_eigenprojectors(
    a: &HermitianOperator,
    b: &HermitianOperator,
    tol: Tolerances,
) -> Result<JointEigenspaceFamily> {
    check_same_dim(a, b)?;
    let norm = max_norm(&commutator(a, b)?);
    let limit = tol.commute * (a.op_norm() * b.op_norm()).max(f64::MIN_POSITIVE);
    if norm > limit {
        return Err(Error::NotCommuting {
            norm,
            tolerance: limit,
        });
    }

    let b_dec = eigendecompose(b, tol.group)?;
    let a_scale = a.op_norm().max(1.0);
    let mut family = JointEigenspaceFamily {
        pairs: Vec::new(),
        projectors: Vec::new(),
        dims: Vec::new(),
    };
    for (i, &b_val) in b_dec.eigenvalues.iter().enumerate() {
        let v = b_dec.basis(i);
        let compressed = v.adjoint() * &**a * v;
        let compressed = (&compressed + compressed.adjoint()).scale(0.5);
        let (values, w) = sorted_eigen(&compressed)?;
        for run in group_runs(&values, tol.group * a_scale) {
            let k = run.len();
            let mean = values[run.clone()].iter().sum::<f64>() / k as f64;
            let basis = v * w.columns(run.start, k);
            family.pairs.push((mean, b_val));
            family.projectors.push(projector_from_basis(&basis));
            family.dims.push(k);
        }
    }
    Ok(family)
}

fn check_same_dim(x: &CMatrix, y: &CMatrix) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(Error::Dimension {
            expected: x.nrows(),
            found: y.nrows(),
        });
    }
    Ok(())
}

/// `[x, y] = xy - yx`.
pub fn commutator(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    check_same_dim(x, y)?;
    Ok(x * y - y * x)
}

/// Largest entry modulus.
pub fn max_norm(x: &CMatrix) -> f64 {
    x.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Hilbert-Schmidt norm `sqrt(Tr(X^dagger X))`.
pub fn hs_norm(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn op_norm(x: &CMatrix) -> f64 {
    x.singular_values().iter().fold(0.0, |m: f64, &s| m.max(s))
}

/// Sum of singular values.
pub fn trace_norm(x: &CMatrix) -> f64 {
    x.singular_values().iter().sum()
}

/// Builds `U diag(values) U^dagger` as a Hermitian operator.
pub fn conjugate_diagonal(u: &CMatrix, values: &[f64]) -> Result<HermitianOperator> {
    let d = values.len();
    let diag = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(values[i], 0.0)
        } else {
            C0
        }
    });
    HermitianOperator::new(u * diag * u.adjoint())
}

/// Multiplies `v` by a unit phase so its first non-negligible component is
/// real and positive.
pub fn fix_global_phase(v: &StateVector) -> StateVector {
    let scale = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    match v.iter().find(|z| z.norm() > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        Some(z) => v * (z.conj() / z.norm()),
        None => v.clone(),
    }
}

/// `|<u|v>|^2` for normalized vectors.
pub fn fidelity(u: &StateVector, v: &StateVector) -> f64 {
    u.dotc(v).norm_sqr()
}

/// A positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        DensityMatrix::new(m.into_inner())
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(r: DensityMatrix) -> Self {
        r.matrix
    }
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let h = HermitianOperator::new(m)?;
        let tr = h.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::validation(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let (values, _) = sorted_eigen(&h)?;
        if values[0] < -STATE_TOL {
            return Err(Error::validation(format!(
                "density matrix has negative eigenvalue {:.3e}",
                values[0]
            )));
        }
        Ok(DensityMatrix { matrix: h.matrix })
    }

    /// `|psi><psi|`; `psi` is normalized first.
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let n = psi.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::validation("state vector has zero or non-finite norm"));
        }
        let psi = psi.unscale(n);
        let m = &psi * psi.adjoint();
        DensityMatrix::new((&m + m.adjoint()).scale(0.5))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix {
            matrix: ComplexMatrix {
                inner: CMatrix::identity(d, d).unscale(d as f64),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn as_complex_matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl Deref for DensityMatrix {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.matrix.inner
    }
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// `Tr(X rho)`.
pub fn expectation(x: &CMatrix, rho: &DensityMatrix) -> Result<Complex64> {
    check_same_dim(x, rho)?;
    let d = x.nrows();
    let mut acc = C0;
    for i in 0..d {
        for j in 0..d {
            acc += x[(i, j)] * rho[(j, i)];
        }
    }
    Ok(acc)
}

/// `Tr(X^2 rho) - Tr(X rho)^2`, clamped at zero after a tolerance check.
pub fn variance(x: &HermitianOperator, rho: &DensityMatrix) -> Result<f64> {
    let mean = expectation(x, rho)?.re;
    let second = expectation(&(&**x * &**x), rho)?.re;
    let v = second - mean * mean;
    let scale = x.op_norm().powi(2).max(1.0);
    if v < -STATE_TOL * scale {
        return Err(Error::numerical(format!("negative variance {v:.3e}")));
    }
    Ok(v.max(0.0))
}

/// Seeded random states, unitaries and Hermitian matrices.
pub mod random {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    /// Haar-random unit vector.
    pub fn state_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> StateVector {
        let v = StateVector::from_fn(d, |_, _| gaussian(rng));
        let n = v.norm();
        v.unscale(n)
    }

    /// Ginibre matrix with i.i.d. standard complex Gaussian entries.
    pub fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
        CMatrix::from_fn(d, d, |_, _| gaussian(rng))
    }

    /// Haar-random unitary from the QR decomposition of a Ginibre matrix.
    pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
        let qr = ginibre(d, rng).qr();
        let (mut q, r) = qr.unpack();
        for j in 0..d {
            let rjj = r[(j, j)];
            let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C1 };
            let mut col = q.column_mut(j);
            col *= phase;
        }
        q
    }

    pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
        let g = ginibre(d, rng);
        HermitianOperator::new((&g + g.adjoint()).scale(0.5)).expect("symmetrized matrix is Hermitian")
    }

    /// Orthogonal projector of the given rank onto a Haar-random subspace.
    pub fn projector<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> HermitianOperator {
        let u = unitary(d, rng);
        projector_from_basis(&u.columns(0, rank).into_owned())
    }

    pub fn pure_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
        DensityMatrix::from_pure(&state_vector(d, rng)).expect("random unit vector")
    }

    pub fn mixed_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
        let g = ginibre(d, rng);
        let w = &g * g.adjoint();
        let tr = w.trace().re;
        DensityMatrix::new(w.unscale(tr)).expect("normalized Wishart matrix is a state")
    }

    /// Random pure state; bit-identical for equal `(d, seed)`.
    pub fn random_pure(d: usize, seed: u64) -> DensityMatrix {
        pure_with(d, &mut rng(seed))
    }

    /// Random full-rank mixed state; bit-identical for equal `(d, seed)`.
    pub fn random_mixed(d: usize, seed: u64) -> DensityMatrix {
        mixed_with(d, &mut rng(seed))
    }
}

pub use random::{random_mixed, random_pure};
