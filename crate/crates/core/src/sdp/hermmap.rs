//! Hermiticity-preserving linear maps used to write SDP constraints.

use crate::error::{Error, Result};
use crate::qmat::{partial_trace, partial_transpose, permute_systems, CMat};

/// A linear map between spaces of Hermitian matrices, built from a small set of
/// primitives. `Compose` applies its members first to last.
#[derive(Debug, Clone, PartialEq)]
pub enum HermMap {
    Identity,
    Scale(f64),
    PartialTrace { dims: Vec<usize>, keep: Vec<usize> },
    PartialTranspose { dims: Vec<usize>, sys: usize },
    /// `X ↦ C X C†`.
    Conjugate(CMat),
    /// `X ↦ I_left ⊗ X ⊗ I_right`.
    Kron { left: usize, right: usize },
    /// Reorders tensor factors; output factor `k` is input factor `perm[k]`.
    Permute { dims: Vec<usize>, perm: Vec<usize> },
    Compose(Vec<HermMap>),
    Sum(Vec<HermMap>),
}

impl HermMap {
    pub fn scale(s: f64) -> Self {
        HermMap::Scale(s)
    }

    pub fn ptrace(dims: &[usize], keep: &[usize]) -> Self {
        HermMap::PartialTrace { dims: dims.to_vec(), keep: keep.to_vec() }
    }

    pub fn ptranspose(dims: &[usize], sys: usize) -> Self {
        HermMap::PartialTranspose { dims: dims.to_vec(), sys }
    }

    /// `X ↦ X ⊗ I_d`.
    pub fn tensor_identity(d: usize) -> Self {
        HermMap::Kron { left: 1, right: d }
    }

    /// `X ↦ tr(X) · I_d` on `n`-dimensional inputs.
    pub fn trace_times_identity(n: usize, d: usize) -> Self {
        HermMap::Compose(vec![HermMap::ptrace(&[n], &[]), HermMap::Kron { left: d, right: 1 }])
    }

    /// `s · self`.
    pub fn scaled(self, s: f64) -> Self {
        HermMap::Compose(vec![self, HermMap::Scale(s)])
    }

    pub fn then(self, next: HermMap) -> Self {
        match self {
            HermMap::Compose(mut v) => {
                v.push(next);
                HermMap::Compose(v)
            }
            first => HermMap::Compose(vec![first, next]),
        }
    }

    /// Output dimension for an input of dimension `n`.
    pub fn out_dim(&self, n: usize) -> Result<usize> {
        match self {
            HermMap::Identity | HermMap::Scale(_) => Ok(n),
            HermMap::PartialTrace { dims, keep } => {
                expect_product(dims, n)?;
                if keep.iter().any(|&k| k >= dims.len()) {
                    return Err(Error::Model(format!("keep {keep:?} out of range for {dims:?}")));
                }
                Ok(keep.iter().map(|&k| dims[k]).product())
            }
            HermMap::PartialTranspose { dims, sys } => {
                expect_product(dims, n)?;
                if *sys >= dims.len() {
                    return Err(Error::Model(format!("subsystem {sys} out of range for {dims:?}")));
                }
                Ok(n)
            }
            HermMap::Conjugate(cm) => {
                if cm.ncols() != n {
                    return Err(Error::Model(format!(
                        "conjugation by {}x{} applied to dimension {n}",
                        cm.nrows(),
                        cm.ncols()
                    )));
                }
                Ok(cm.nrows())
            }
            HermMap::Kron { left, right } => {
                if *left == 0 || *right == 0 {
                    return Err(Error::Model("zero identity factor".into()));
                }
                Ok(left * n * right)
            }
            HermMap::Permute { dims, perm } => {
                expect_product(dims, n)?;
                if perm.len() != dims.len() {
                    return Err(Error::Model(format!("permutation {perm:?} for dims {dims:?}")));
                }
                Ok(n)
            }
            HermMap::Compose(ms) => ms.iter().try_fold(n, |d, m| m.out_dim(d)),
            HermMap::Sum(ms) => {
                let mut out = None;
                for m in ms {
                    let d = m.out_dim(n)?;
                    if out.is_some_and(|o| o != d) {
                        return Err(Error::Model("summands have different output dimensions".into()));
                    }
                    out = Some(d);
                }
                out.ok_or_else(|| Error::Model("empty sum map".into()))
            }
        }
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        match self {
            HermMap::Identity => Ok(x.clone()),
            HermMap::Scale(s) => Ok(x.scale(*s)),
            HermMap::PartialTrace { dims, keep } => partial_trace(x, dims, keep).map_err(to_model),
            HermMap::PartialTranspose { dims, sys } => partial_transpose(x, dims, *sys).map_err(to_model),
            HermMap::Conjugate(cm) => {
                self.out_dim(x.nrows())?;
                Ok(cm * x * cm.adjoint())
            }
            HermMap::Kron { left, right } => {
                self.out_dim(x.nrows())?;
                Ok(CMat::identity(*left, *left)
                    .kronecker(x)
                    .kronecker(&CMat::identity(*right, *right)))
            }
            HermMap::Permute { dims, perm } => permute_systems(x, dims, perm).map_err(to_model),
            HermMap::Compose(ms) => ms.iter().try_fold(x.clone(), |acc, m| m.apply(&acc)),
            HermMap::Sum(ms) => {
                let mut parts = ms.iter().map(|m| m.apply(x));
                let first = parts.next().ok_or_else(|| Error::Model("empty sum map".into()))??;
                parts.try_fold(first, |acc, p| Ok(acc + p?))
            }
        }
    }

    /// Adjoint with respect to `⟨A, B⟩ = Re tr(A† B)`; `in_dim` is the
    /// dimension of the original input space.
    pub fn adjoint(&self, y: &CMat, in_dim: usize) -> Result<CMat> {
        let out = self.out_dim(in_dim)?;
        if y.nrows() != out || y.ncols() != out {
            return Err(Error::Model(format!("adjoint input is {}x{}, expected {out}", y.nrows(), y.ncols())));
        }
        match self {
            HermMap::Identity => Ok(y.clone()),
            HermMap::Scale(s) => Ok(y.scale(*s)),
            HermMap::PartialTrace { dims, keep } => Ok(ptrace_adjoint(y, dims, keep)),
            HermMap::PartialTranspose { dims, sys } => partial_transpose(y, dims, *sys).map_err(to_model),
            HermMap::Conjugate(cm) => Ok(cm.adjoint() * y * cm),
            HermMap::Kron { left, right } => {
                partial_trace(y, &[*left, in_dim, *right], &[1]).map_err(to_model)
            }
            HermMap::Permute { dims, perm } => {
                let mut inv = vec![0; perm.len()];
                for (k, &p) in perm.iter().enumerate() {
                    inv[p] = k;
                }
                let permuted: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
                permute_systems(y, &permuted, &inv).map_err(to_model)
            }
            HermMap::Compose(ms) => {
                let mut dims_in = Vec::with_capacity(ms.len());
                let mut d = in_dim;
                for m in ms {
                    dims_in.push(d);
                    d = m.out_dim(d)?;
                }
                let mut acc = y.clone();
                for (m, &d) in ms.iter().zip(&dims_in).rev() {
                    acc = m.adjoint(&acc, d)?;
                }
                Ok(acc)
            }
            HermMap::Sum(ms) => {
                let mut acc = CMat::zeros(in_dim, in_dim);
                for m in ms {
                    acc += m.adjoint(y, in_dim)?;
                }
                Ok(acc)
            }
        }
    }
}

fn to_model(e: Error) -> Error {
    match e {
        Error::Dimension(s) => Error::Model(s),
        other => other,
    }
}

fn expect_product(dims: &[usize], n: usize) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) || dims.iter().product::<usize>() != n {
        return Err(Error::Model(format!("dims {dims:?} do not multiply to {n}")));
    }
    Ok(())
}

/// `Y` embedded as `Y ⊗ I` on the traced factors, in the original factor order.
fn ptrace_adjoint(y: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    let mut keep_idx = vec![0usize; total];
    let mut trace_idx = vec![0usize; total];
    let mut dig = vec![0usize; dims.len()];
    for i in 0..total {
        let mut rem = i;
        for k in (0..dims.len()).rev() {
            dig[k] = rem % dims[k];
            rem /= dims[k];
        }
        let (mut ki, mut ti) = (0, 0);
        for k in 0..dims.len() {
            if keep.contains(&k) {
                ki = ki * dims[k] + dig[k];
            } else {
                ti = ti * dims[k] + dig[k];
            }
        }
        keep_idx[i] = ki;
        trace_idx[i] = ti;
    }
    CMat::from_fn(total, total, |r, c| {
        if trace_idx[r] == trace_idx[c] {
            y[(keep_idx[r], keep_idx[c])]
        } else {
            Default::default()
        }
    })
}
