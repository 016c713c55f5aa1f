//! Real-symmetric embedding `H ↦ [[Re H, −Im H], [Im H, Re H]]` of a Hermitian
//! problem.
//!
//! Every coefficient is embedded with a factor 1/2, so
//! `½ tr(Φ(A) Φ(X)) = Re tr(A X)` and objective values agree without rescaling.

use nalgebra::DMatrix;

use super::compile::{compile, Compiled};
use super::ipm::{self, BlockSdp, RawSolution, Row, RowPart};
use super::{SdpProblem, SdpSolution, Tolerances};
use crate::error::Result;
use crate::qmat::{c, CMat};

/// Real symmetric block SDP in standard form (minimize).
#[derive(Debug, Clone)]
pub struct RealSdp {
    pub block_dims: Vec<usize>,
    pub c: Vec<DMatrix<f64>>,
    /// Each row lists `(block, entries)` with both triangles present.
    pub rows: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>,
    pub b: Vec<f64>,
    compiled: Compiled,
}

pub fn embed_matrix(h: &CMat) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`embed_matrix`], averaging the two copies.
pub fn extract_hermitian(y: &DMatrix<f64>) -> CMat {
    let n = y.nrows() / 2;
    CMat::from_fn(n, n, |i, j| {
        let re = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
        let im = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
        c(re, im)
    })
}

pub fn embed_hermitian(p: &SdpProblem) -> Result<RealSdp> {
    p.validate()?;
    let compiled = compile(p)?;
    let sdp = &compiled.sdp;
    let block_dims = sdp.dims.iter().map(|&n| 2 * n).collect();
    let cm = sdp.c.iter().map(|m| embed_matrix(m) * 0.5).collect();
    let rows = sdp
        .rows
        .iter()
        .map(|row| {
            row.parts
                .iter()
                .map(|part| {
                    let n = sdp.dims[part.block];
                    let mut entries = Vec::with_capacity(4 * part.entries.len());
                    for &(r, col, v) in &part.entries {
                        entries.push((r, col, 0.5 * v.re));
                        entries.push((r + n, col + n, 0.5 * v.re));
                        if v.im != 0.0 {
                            entries.push((r + n, col, 0.5 * v.im));
                            entries.push((r, col + n, -0.5 * v.im));
                        }
                    }
                    (part.block, entries)
                })
                .collect()
        })
        .collect();
    Ok(RealSdp { block_dims, c: cm, rows, b: sdp.b.clone(), compiled })
}

impl RealSdp {
    fn as_block_sdp(&self) -> BlockSdp {
        BlockSdp {
            dims: self.block_dims.clone(),
            c: self.c.iter().map(|m| m.map(|v| c(v, 0.0))).collect(),
            rows: self
                .rows
                .iter()
                .map(|parts| Row {
                    parts: parts
                        .iter()
                        .map(|(block, entries)| RowPart {
                            block: *block,
                            entries: entries.iter().map(|&(r, col, v)| (r, col, c(v, 0.0))).collect(),
                        })
                        .collect(),
                })
                .collect(),
            b: self.b.clone(),
        }
    }

    /// Solves the embedded real problem and maps the solution back to the
    /// Hermitian variables of `p` (the problem this was built from).
    pub fn solve(&self, p: &SdpProblem, tol: &Tolerances) -> Result<SdpSolution> {
        let raw = ipm::solve(&self.as_block_sdp(), tol);
        let x = raw.x.iter().map(|m| extract_hermitian(&m.map(|z| z.re))).collect();
        let mapped = RawSolution { x, ..raw };
        self.compiled.extract(p, mapped, tol)
    }
}
