use std::collections::BTreeMap;

use super::ipm::{BlockSdp, RawSolution, Row, RowPart};
use super::{Cone, SdpProblem, SdpSolution, Sense, SolveStatus, Tolerances};
use crate::error::Result;
use crate::qmat::{c, inner_re, max_abs, CMat, C64};

/// Entries below this fraction of a row's largest entry are dropped.
const SPARSIFY_REL: f64 = 1e-15;
/// Entries below this are rounding noise from maps that cancel exactly (for
/// example a trace-free map restricted to a face it annihilates). The maps in
/// this crate are built from isometries, partial traces and O(1) scalings, so
/// genuine coefficients are many orders of magnitude larger.
const SPARSIFY_ABS: f64 = 1e-13;

#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub sdp: BlockSdp,
    /// Positive and (for free variables) negative block of every variable.
    var_blocks: Vec<(usize, Option<usize>)>,
    /// `(constraint, basis index)` of every row.
    row_origin: Vec<(usize, usize)>,
}

/// Orthonormal Hermitian basis element `k` of `m × m` matrices, as sparse
/// entries. Diagonal units first, then for each `i < j` the real symmetric and
/// the imaginary antisymmetric element.
pub(crate) fn hermitian_basis(m: usize, k: usize) -> Vec<(usize, usize, C64)> {
    if k < m {
        return vec![(k, k, c(1.0, 0.0))];
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut idx = (k - m) / 2;
    let imag = (k - m) % 2 == 1;
    for i in 0..m {
        let count = m - 1 - i;
        if idx < count {
            let j = i + 1 + idx;
            return if imag {
                vec![(i, j, c(0.0, s)), (j, i, c(0.0, -s))]
            } else {
                vec![(i, j, c(s, 0.0)), (j, i, c(s, 0.0))]
            };
        }
        idx -= count;
    }
    unreachable!("basis index {k} out of range for dimension {m}")
}

fn dense(m: usize, entries: &[(usize, usize, C64)]) -> CMat {
    let mut out = CMat::zeros(m, m);
    for &(r, col, v) in entries {
        out[(r, col)] += v;
    }
    out
}

#[cfg(test)]
/// Coordinates of a Hermitian matrix in the basis above.
pub(crate) fn hermitian_coords(h: &CMat) -> Vec<f64> {
    let m = h.nrows();
    (0..m * m)
        .map(|k| hermitian_basis(m, k).iter().map(|&(r, col, v)| (v.conj() * h[(r, col)]).re).sum())
        .collect()
}

fn sparsify(m: &CMat) -> Vec<(usize, usize, C64)> {
    let cutoff = (SPARSIFY_REL * max_abs(m)).max(SPARSIFY_ABS);
    let mut out = Vec::new();
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            let v = m[(r, col)];
            if v.norm() > cutoff && v.norm() > 0.0 {
                out.push((r, col, v));
            }
        }
    }
    out
}

pub(crate) fn compile(p: &SdpProblem) -> Result<Compiled> {
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut dims = Vec::new();
    let mut cmats = Vec::new();
    let mut var_blocks = Vec::new();
    for (v, coeff) in p.variables.iter().zip(&p.objective) {
        let cm = match coeff {
            Some(cm) => (cm + cm.adjoint()).scale(0.5 * sign),
            None => CMat::zeros(v.dim, v.dim),
        };
        let pos = dims.len();
        dims.push(v.dim);
        cmats.push(cm.clone());
        let neg = match v.cone {
            Cone::Psd => None,
            Cone::Free => {
                dims.push(v.dim);
                cmats.push(-cm);
                Some(dims.len() - 1)
            }
        };
        var_blocks.push((pos, neg));
    }

    let mut rows = Vec::new();
    let mut b = Vec::new();
    let mut row_origin = Vec::new();
    for (ci, con) in p.constraints.iter().enumerate() {
        let m = con.rhs.nrows();
        for k in 0..m * m {
            let basis = hermitian_basis(m, k);
            let h = dense(m, &basis);
            let rhs = basis.iter().map(|&(r, col, v)| (v.conj() * con.rhs[(r, col)]).re).sum::<f64>();
            let mut per_var: BTreeMap<usize, CMat> = BTreeMap::new();
            for (var, map) in &con.terms {
                let n = p.variables[var.0].dim;
                let a = map.adjoint(&h, n)?;
                per_var
                    .entry(var.0)
                    .and_modify(|acc| *acc += &a)
                    .or_insert(a);
            }
            let mut parts = Vec::new();
            for (vi, a) in per_var {
                let a = (&a + a.adjoint()).scale(0.5);
                let entries = sparsify(&a);
                if entries.is_empty() {
                    continue;
                }
                let (pos, neg) = var_blocks[vi];
                if let Some(neg) = neg {
                    let negated = entries.iter().map(|&(r, col, v)| (r, col, -v)).collect();
                    parts.push(RowPart { block: pos, entries });
                    parts.push(RowPart { block: neg, entries: negated });
                } else {
                    parts.push(RowPart { block: pos, entries });
                }
            }
            rows.push(Row { parts });
            b.push(rhs);
            row_origin.push((ci, k));
        }
    }
    Ok(Compiled { sdp: BlockSdp { dims, c: cmats, rows, b }, var_blocks, row_origin })
}

impl Compiled {
    pub(crate) fn extract(&self, p: &SdpProblem, raw: RawSolution, tol: &Tolerances) -> Result<SdpSolution> {
        let mut values = BTreeMap::new();
        for (v, &(pos, neg)) in p.variables.iter().zip(&self.var_blocks) {
            let mut x = raw.x[pos].clone();
            if let Some(neg) = neg {
                x -= &raw.x[neg];
            }
            values.insert(v.name.clone(), (&x + x.adjoint()).scale(0.5));
        }
        let sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut duals: Vec<CMat> = p
            .constraints
            .iter()
            .map(|con| CMat::zeros(con.rhs.nrows(), con.rhs.nrows()))
            .collect();
        for (&(ci, k), &y) in self.row_origin.iter().zip(&raw.y) {
            if y == 0.0 {
                continue;
            }
            let m = duals[ci].nrows();
            for (r, col, v) in hermitian_basis(m, k) {
                duals[ci][(r, col)] += v * (sign * y);
            }
        }
        let primal_value = p.objective_value(&values);
        let dual_value: f64 = p.constraints.iter().zip(&duals).map(|(con, y)| inner_re(y, &con.rhs)).sum();

        let mut status = raw.status;
        let mut max_residual = raw.dual_residual;
        if status != SolveStatus::PrimalInfeasible {
            for con in &p.constraints {
                let lhs = p.constraint_lhs(con, &values)?;
                let r = if status == SolveStatus::DualInfeasible { lhs } else { lhs - &con.rhs };
                max_residual = max_residual.max(max_abs(&r));
            }
        }
        if status == SolveStatus::Optimal {
            max_residual = max_residual.max(p.dual_slack_violation(&duals, sign)?);
        }
        if status == SolveStatus::Optimal && max_residual > tol.feas {
            status = SolveStatus::NumericalFailure;
        }
        Ok(SdpSolution {
            status,
            primal_value,
            dual_value,
            variable_values: values,
            duals,
            max_residual,
            iterations: raw.iterations,
        })
    }
}
