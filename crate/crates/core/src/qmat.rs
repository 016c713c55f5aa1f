//! Dense complex linear algebra and the quantum-information primitives built
//! on top of it: tensor products, partial operations over declared subsystem
//! dimensions, entropies, norms and purification.
//!
//! Subsystems are indexed from zero in the order given by `dims`. All
//! entropies are in bits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Tolerance for Hermiticity of a density operator (max-abs deviation).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as "positive semidefinite".
pub const PSD_TOL: f64 = 1e-9;
/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-9;
/// Eigenvalues at or below this are treated as zero inside entropies.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Matrix with a single unit entry at `(i, j)`.
pub fn unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = c(1.0, 0.0);
    m
}

pub fn from_real_diag(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v, 0.0)),
    ))
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Hermitian part `(M + M†)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}

pub fn hermiticity_error(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Hilbert–Schmidt inner product `Re tr[A† B]`.
pub fn inner_re(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Rank-one projector `|v⟩⟨v|`.
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Computational basis ket `|i⟩` in dimension `d`.
pub fn ket(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

/// Tensor product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMat]) -> CMat {
    ms.iter()
        .fold(CMat::identity(1, 1), |acc, m| kron(&acc, m))
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMat {
    from_real_diag(&[1.0, -1.0])
}

/// Standard maximally entangled state `Φ_d = (1/d) Σ |ii⟩⟨jj|`.
pub fn max_entangled(d: usize) -> CMat {
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = c(1.0, 0.0);
    }
    outer(&v).scale(1.0 / d as f64)
}

fn check_dims(m: &CMat, dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Dimension(format!("invalid subsystem dimensions {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::Dimension(format!(
            "matrix is {}x{} but dims {:?} multiply to {}",
            m.nrows(),
            m.ncols(),
            dims,
            total
        )));
    }
    Ok(total)
}

/// Mixed-radix digits of `index` for the given dims (most significant first).
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn compose_index(digits: &[usize], dims: &[usize], select: impl Fn(usize) -> bool) -> usize {
    let mut idx = 0;
    for (k, (&dk, &dig)) in dims.iter().zip(digits).enumerate() {
        if select(k) {
            idx = idx * dk + dig;
        }
    }
    idx
}

/// Partial trace keeping the subsystems listed in `keep` (in their original
/// order). Tracing out everything yields a 1×1 matrix.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let total = check_dims(m, dims)?;
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension(format!("keep set {keep:?} out of range for {dims:?}")));
    }
    let kept = |k: usize| keep.contains(&k);
    let out_dim: usize = (0..dims.len()).filter(|&k| kept(k)).map(|k| dims[k]).product();
    let mut keep_idx = vec![0usize; total];
    let mut trace_idx = vec![0usize; total];
    let mut dig = vec![0usize; dims.len()];
    for i in 0..total {
        digits(i, dims, &mut dig);
        keep_idx[i] = compose_index(&dig, dims, kept);
        trace_idx[i] = compose_index(&dig, dims, |k| !kept(k));
    }
    let mut out = CMat::zeros(out_dim, out_dim);
    for col in 0..total {
        for row in 0..total {
            if trace_idx[row] == trace_idx[col] {
                out[(keep_idx[row], keep_idx[col])] += m[(row, col)];
            }
        }
    }
    Ok(out)
}

/// Partial transpose on subsystem `sys`.
pub fn partial_transpose(m: &CMat, dims: &[usize], sys: usize) -> Result<CMat> {
    let total = check_dims(m, dims)?;
    if sys >= dims.len() {
        return Err(Error::Dimension(format!("subsystem {sys} out of range for {dims:?}")));
    }
    let stride: usize = dims[sys + 1..].iter().product();
    let d = dims[sys];
    let digit = |i: usize| (i / stride) % d;
    let mut out = CMat::zeros(total, total);
    for col in 0..total {
        let dc = digit(col);
        for row in 0..total {
            let dr = digit(row);
            let r2 = row - dr * stride + dc * stride;
            let c2 = col - dc * stride + dr * stride;
            out[(r2, c2)] = m[(row, col)];
        }
    }
    Ok(out)
}

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
pub fn permute_systems(m: &CMat, dims: &[usize], perm: &[usize]) -> Result<CMat> {
    let total = check_dims(m, dims)?;
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::Dimension(format!("{perm:?} is not a permutation of {} systems", dims.len())));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut map = vec![0usize; total];
    let mut dig = vec![0usize; dims.len()];
    let mut new_dig = vec![0usize; dims.len()];
    for (i, slot) in map.iter_mut().enumerate() {
        digits(i, dims, &mut dig);
        for (k, &p) in perm.iter().enumerate() {
            new_dig[k] = dig[p];
        }
        *slot = compose_index(&new_dig, &new_dims, |_| true);
    }
    let mut out = CMat::zeros(total, total);
    for col in 0..total {
        for row in 0..total {
            out[(map[row], map[col])] = m[(row, col)];
        }
    }
    Ok(out)
}

/// Swap operator `P|i⟩|j⟩ = |j⟩|i⟩` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> CMat {
    let mut p = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            p[(j * d + i, i * d + j)] = c(1.0, 0.0);
        }
    }
    p
}

/// Eigendecomposition of a Hermitian operator, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
}

impl Spectrum {
    pub fn reconstruct(&self) -> CMat {
        let n = self.eigenvectors.nrows();
        let mut out = CMat::zeros(n, n);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(k);
            out += (v * v.adjoint()).scale(l);
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// Spectral decomposition of `(M + M†)/2`.
pub fn hermitian_eigen(m: &CMat) -> Spectrum {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let n = m.nrows();
    let mut vecs = CMat::zeros(n, n);
    for (k, &o) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(o));
    }
    Spectrum {
        eigenvalues: order.iter().map(|&o| eig.eigenvalues[o]).collect(),
        eigenvectors: vecs,
    }
}

pub fn eigenvalues_hermitian(m: &CMat) -> Vec<f64> {
    hermitian_eigen(m).eigenvalues
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).min()
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let s = hermitian_eigen(m);
    let mapped = Spectrum {
        eigenvalues: s.eigenvalues.iter().map(|&l| f(l)).collect(),
        eigenvectors: s.eigenvectors,
    };
    mapped.reconstruct()
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    m.singular_values().iter().sum()
}

/// Hermitian, PSD, trace-one operator together with its subsystem layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
    dims: Vec<usize>,
}

impl DensityOperator {
    pub fn new(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        check_dims(&matrix, &dims)?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("density operator has non-finite entries".into()));
        }
        let herm = hermiticity_error(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::Domain(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Domain(format!("trace is {tr}, expected 1")));
        }
        let lmin = min_eigenvalue(&matrix);
        if lmin < -PSD_TOL {
            return Err(Error::Domain(format!("not PSD (min eigenvalue {lmin:.3e})")));
        }
        Ok(Self { matrix, dims })
    }

    /// Symmetrizes and renormalizes an approximately valid operator (e.g. a
    /// solver output) before validating it.
    pub fn from_approx(matrix: &CMat, dims: Vec<usize>) -> Result<Self> {
        let h = hermitian_part(matrix);
        let tr = h.trace().re;
        if tr.abs() < f64::MIN_POSITIVE {
            return Err(Error::Domain("operator has zero trace".into()));
        }
        let mut m = h.unscale(tr);
        let lmin = min_eigenvalue(&m);
        if lmin < 0.0 && lmin >= -1e-6 {
            m = hermitian_fn(&m, |l| l.max(0.0));
            let tr = m.trace().re;
            m = m.unscale(tr);
        }
        Self::new(m, dims)
    }

    pub fn pure(psi: &CVec, dims: Vec<usize>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::Domain("zero state vector".into()));
        }
        Self::new(outer(&psi.unscale(n)), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self { matrix: CMat::identity(d, d).unscale(d as f64), dims }
    }

    pub fn max_entangled(d: usize) -> Self {
        Self { matrix: max_entangled(d), dims: vec![d, d] }
    }

    /// Two-qudit isotropic state `F Φ_d + (1−F)(I − Φ_d)/(d²−1)`.
    pub fn isotropic(d: usize, fidelity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fidelity) {
            return Err(Error::Domain(format!("fidelity {fidelity} outside [0,1]")));
        }
        let phi = max_entangled(d);
        let rest = (CMat::identity(d * d, d * d) - &phi).scale((1.0 - fidelity) / (d * d - 1) as f64);
        Self::new(phi.scale(fidelity) + rest, vec![d, d])
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&self.matrix, &dims)?;
        Ok(Self { matrix: self.matrix.clone(), dims })
    }

    /// `(d_A, d_B)` of a bipartite operator.
    pub fn bipartite(&self) -> Result<(usize, usize)> {
        match self.dims[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::Dimension(format!("expected bipartite dims, got {:?}", self.dims))),
        }
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<Self> {
        let m = partial_trace(&self.matrix, &self.dims, keep)?;
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(Self { matrix: m, dims })
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { matrix: kron(&self.matrix, &other.matrix), dims }
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_eigen(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Shannon entropy in bits of a probability vector; entries at or below the
/// cutoff contribute nothing.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > ENTROPY_CUTOFF)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Entropy of a list of eigenvalues; slightly negative values (≥ −1e-9) are
/// clipped, more negative ones are rejected.
pub fn entropy_of_eigenvalues(eigs: &[f64]) -> Result<f64> {
    if let Some(&bad) = eigs.iter().find(|&&l| l < -PSD_TOL) {
        return Err(Error::Domain(format!("negative eigenvalue {bad:.3e} in entropy")));
    }
    Ok(shannon_entropy(eigs))
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    entropy_of_eigenvalues(&rho.spectrum().eigenvalues)
}

/// Entropy of an arbitrary Hermitian PSD matrix (not necessarily validated as
/// a density operator).
pub fn matrix_entropy(m: &CMat) -> Result<f64> {
    entropy_of_eigenvalues(&eigenvalues_hermitian(m))
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

/// `g(p) = (1+p) h(p/(1+p))`.
pub fn bosonic_entropy(p: f64) -> f64 {
    (1.0 + p) * binary_entropy(p / (1.0 + p))
}

/// `(h(p), g(p))` for `p ∈ [0, 1]`.
pub fn entropy_scalars(p: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0,1]")));
    }
    Ok((binary_entropy(p), bosonic_entropy(p)))
}

/// `I_c(A⟩B) = S(B) − S(AB)` for a bipartite state.
pub fn coherent_information(rho: &DensityOperator) -> Result<f64> {
    rho.bipartite()?;
    let rho_b = partial_trace(rho.matrix(), rho.dims(), &[1])?;
    Ok(matrix_entropy(&rho_b)? - von_neumann_entropy(rho)?)
}

/// Entanglement entropy `S(B)` of a pure bipartite vector, via its Schmidt
/// coefficients.
pub fn pure_state_entanglement(psi: &CVec, da: usize, db: usize) -> f64 {
    let m = CMat::from_fn(da, db, |a, b| psi[a * db + b]);
    let probs: Vec<f64> = m.singular_values().iter().map(|s| s * s).collect();
    shannon_entropy(&probs)
}

/// Rank threshold used when purifying.
const PURIFY_RANK_TOL: f64 = 1e-12;

/// Purification `|φ⟩` on system ⊗ reference with reference dimension equal
/// to the numerical rank of ρ. Returns the vector and the reference dimension.
pub fn purify(rho: &DensityOperator) -> (CVec, usize) {
    let s = rho.spectrum();
    let d = rho.dim();
    let support: Vec<usize> = (0..d).filter(|&k| s.eigenvalues[k] > PURIFY_RANK_TOL).collect();
    let r = support.len().max(1);
    let mut psi = CVec::zeros(d * r);
    for (j, &k) in support.iter().enumerate() {
        let amp = s.eigenvalues[k].sqrt();
        for i in 0..d {
            psi[i * r + j] += s.eigenvectors[(i, k)] * amp;
        }
    }
    (psi, r)
}

/// Row-major JSON encoding `{"rows", "cols", "data": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CMatJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMat> for CMatJson {
    fn from(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl CMatJson {
    pub fn to_matrix(&self) -> Result<CMat> {
        if self.rows == 0 || self.cols == 0 || self.data.len() != self.rows * self.cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {}x{} matrix",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        if self.data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite matrix entry".into()));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            c(re, im)
        }))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DensityJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
    pub dims: Vec<usize>,
}

impl From<&DensityOperator> for DensityJson {
    fn from(rho: &DensityOperator) -> Self {
        let m = CMatJson::from(rho.matrix());
        Self { rows: m.rows, cols: m.cols, data: m.data, dims: rho.dims().to_vec() }
    }
}

impl DensityJson {
    pub fn to_density(&self) -> Result<DensityOperator> {
        let m = CMatJson { rows: self.rows, cols: self.cols, data: self.data.clone() }.to_matrix()?;
        DensityOperator::new(m, self.dims.clone())
    }
}

pub fn cmat_to_json(m: &CMat) -> String {
    serde_json::to_string(&CMatJson::from(m)).expect("matrix serialization")
}

pub fn cmat_from_json(s: &str) -> Result<CMat> {
    serde_json::from_str::<CMatJson>(s)?.to_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> CMat {
        from_real_diag(v)
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        assert_eq!(kron(&diag(&[1.0, 2.0]), &diag(&[3.0, 4.0])), diag(&[3.0, 4.0, 6.0, 8.0]));
        let xx = kron(&pauli_x(), &pauli_x());
        assert_eq!(&xx * ket(4, 0), ket(4, 3));
    }

    #[test]
    fn partial_trace_examples() {
        let phi = max_entangled(2);
        let a = partial_trace(&phi, &[2, 2], &[0]).unwrap();
        assert!(max_abs_diff(&a, &identity(2).scale(0.5)) < 1e-15);

        let ra = diag(&[0.3, 0.7]);
        let rb = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]);
        let prod = kron(&ra, &rb);
        assert!(max_abs_diff(&partial_trace(&prod, &[2, 2], &[0]).unwrap(), &ra) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&prod, &[2, 2], &[1]).unwrap(), &rb) < 1e-15);
        let full = partial_trace(&prod, &[2, 2], &[]).unwrap();
        assert_eq!(full.shape(), (1, 1));
        assert!((full[(0, 0)] - prod.trace()).norm() < 1e-15);
        assert!(matches!(partial_trace(&prod, &[2, 3], &[0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn partial_transpose_examples() {
        let ra = diag(&[0.3, 0.7]);
        let rb = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]);
        let pt = partial_transpose(&kron(&ra, &rb), &[2, 2], 1).unwrap();
        assert!(max_abs_diff(&pt, &kron(&ra, &rb.transpose())) < 1e-15);

        let mut e = eigenvalues_hermitian(&partial_transpose(&max_entangled(2), &[2, 2], 1).unwrap());
        e.sort_by(f64::total_cmp);
        for (got, want) in e.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        let m = CMat::from_fn(6, 6, |i, j| c(i as f64 + 0.5 * j as f64, (i * j) as f64 * 0.1));
        let twice = partial_transpose(&partial_transpose(&m, &[2, 3], 0).unwrap(), &[2, 3], 0).unwrap();
        assert_eq!(twice, m);
        assert!(partial_transpose(&m, &[2, 2], 0).is_err());
    }

    #[test]
    fn swap_operator_examples() {
        let p = swap_operator(2);
        assert_eq!(&p * ket(4, 1), ket(4, 2));
        for d in 1..5 {
            let p = swap_operator(d);
            assert_eq!(&p * &p, identity(d * d));
            assert_eq!(p.adjoint(), p);
            assert_eq!(p.trace(), c(d as f64, 0.0));
        }
    }

    #[test]
    fn entropy_examples() {
        let pure = DensityOperator::pure(&ket(2, 0), vec![2]).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(vec![2]);
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let r = DensityOperator::new(diag(&[0.9, 0.1]), vec![2]).unwrap();
        // -0.9 log2 0.9 - 0.1 log2 0.1
        assert!((von_neumann_entropy(&r).unwrap() - 0.468_995_593_589_281).abs() < 1e-12);
    }

    #[test]
    fn entropy_scalar_examples() {
        assert_eq!(entropy_scalars(0.0).unwrap(), (0.0, 0.0));
        let (h, g) = entropy_scalars(0.5).unwrap();
        assert!((h - 1.0).abs() < 1e-15);
        assert!((g - 1.5 * binary_entropy(1.0 / 3.0)).abs() < 1e-15);
        let (h, g) = entropy_scalars(0.1).unwrap();
        assert!((h - 0.4690).abs() < 1e-4);
        assert!((g - 0.4834).abs() < 1e-4);
        assert!((binary_entropy(1.0)).abs() < 1e-15);
        assert!(entropy_scalars(1.2).is_err());
        assert!(entropy_scalars(-0.1).is_err());
        let mut last = 0.0;
        for k in 1..=100 {
            let g = bosonic_entropy(k as f64 / 100.0);
            assert!(g > last);
            last = g;
        }
    }

    #[test]
    fn coherent_information_examples() {
        let phi = DensityOperator::max_entangled(2);
        assert!((coherent_information(&phi).unwrap() - 1.0).abs() < 1e-12);
        let mm = DensityOperator::maximally_mixed(vec![2, 2]);
        assert!((coherent_information(&mm).unwrap() + 1.0).abs() < 1e-12);
        let ra = DensityOperator::new(diag(&[0.8, 0.2]), vec![2]).unwrap();
        let rb = DensityOperator::new(diag(&[0.4, 0.6]), vec![2]).unwrap();
        let prod = ra.tensor(&rb);
        let expect = -von_neumann_entropy(&ra).unwrap();
        assert!((coherent_information(&prod).unwrap() - expect).abs() < 1e-12);
        for d in 2..=4 {
            let ic = coherent_information(&DensityOperator::max_entangled(d)).unwrap();
            assert!((ic - (d as f64).log2()).abs() < 1e-9);
        }
        assert!(coherent_information(&DensityOperator::maximally_mixed(vec![2, 2, 2])).is_err());
    }

    #[test]
    fn trace_norm_examples() {
        let r = DensityOperator::isotropic(2, 0.7).unwrap();
        assert!((trace_norm(r.matrix()) - 1.0).abs() < 1e-12);
        assert!((trace_norm(&diag(&[1.0, -1.0])) - 2.0).abs() < 1e-12);
        assert!(trace_norm(&(r.matrix() - r.matrix())) == 0.0);
    }

    #[test]
    fn purify_examples() {
        let pure = DensityOperator::pure(&ket(2, 1), vec![2]).unwrap();
        let (psi, r) = purify(&pure);
        assert_eq!(r, 1);
        assert!(max_abs_diff(&outer(&psi), pure.matrix()) < 1e-12);

        let (psi, r) = purify(&DensityOperator::maximally_mixed(vec![2]));
        assert_eq!(r, 2);
        let ent = pure_state_entanglement(&psi, 2, 2);
        assert!((ent - 1.0).abs() < 1e-12);

        // rank-3 two-qutrit marginal
        let rho = DensityOperator::new(diag(&[0.5, 0.3, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]), vec![3, 3]).unwrap();
        let (psi, r) = purify(&rho);
        assert_eq!(r, 3);
        let back = partial_trace(&outer(&psi), &[9, r], &[0]).unwrap();
        assert!(max_abs_diff(&back, rho.matrix()) < 1e-12);
    }

    #[test]
    fn density_operator_validation() {
        assert!(DensityOperator::new(diag(&[0.5, 0.6]), vec![2]).is_err());
        assert!(DensityOperator::new(diag(&[1.5, -0.5]), vec![2]).is_err());
        let nonherm = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityOperator::new(nonherm, vec![2]).is_err());
        assert!(DensityOperator::new(diag(&[0.5, 0.5]), vec![3]).is_err());
        assert!(DensityOperator::new(diag(&[f64::NAN, 0.5]), vec![2]).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = CMat::from_fn(3, 2, |i, j| c(1.0 / (i + 1) as f64, (j as f64).sqrt() * 0.1 + 1e-300));
        let back = cmat_from_json(&cmat_to_json(&m)).unwrap();
        assert_eq!(back, m);
        let rho = DensityOperator::isotropic(2, 0.3).unwrap();
        let j = serde_json::to_string(&DensityJson::from(&rho)).unwrap();
        let back: DensityJson = serde_json::from_str(&j).unwrap();
        assert_eq!(back.to_density().unwrap(), rho);
        assert!(cmat_from_json(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
    }
}
