//! Plain-text triplet dump of a compiled problem.
//!
//! One record per line, whitespace separated:
//!
//! ```text
//! sdp <min|max> <blocks> <rows>
//! block <index> <dim> <variable-name> <+|->
//! c <block> <row> <col> <re> <im>
//! b <row> <value> <constraint-name> <basis-index>
//! a <row> <block> <row-in-block> <col-in-block> <re> <im>
//! ```
//!
//! Matrices are listed in full (both triangles). A free variable appears as a
//! `+` and a `-` block. Row `i` reads `Σ Re tr(A_i X) = b_i`, where the rows
//! enumerate an orthonormal Hermitian basis of each constraint's output space.
//! The objective is always the minimization form; `max` problems are negated.

use std::fmt::Write;

use super::compile::{compile, hermitian_basis};
use super::{Cone, SdpProblem, Sense};
use crate::error::Result;

pub fn dump(p: &SdpProblem) -> Result<String> {
    p.validate()?;
    let compiled = compile(p)?;
    let sdp = &compiled.sdp;
    let mut out = String::new();
    let sense = match p.sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    };
    writeln!(out, "sdp {sense} {} {}", sdp.dims.len(), sdp.rows.len()).unwrap();
    let mut block = 0;
    for v in &p.variables {
        writeln!(out, "block {block} {} {} +", v.dim, v.name).unwrap();
        block += 1;
        if v.cone == Cone::Free {
            writeln!(out, "block {block} {} {} -", v.dim, v.name).unwrap();
            block += 1;
        }
    }
    for (k, cm) in sdp.c.iter().enumerate() {
        for j in 0..cm.ncols() {
            for i in 0..cm.nrows() {
                let z = cm[(i, j)];
                if z.re != 0.0 || z.im != 0.0 {
                    writeln!(out, "c {k} {i} {j} {:e} {:e}", z.re, z.im).unwrap();
                }
            }
        }
    }
    let mut row = 0;
    for con in &p.constraints {
        let m = con.rhs.nrows();
        for k in 0..m * m {
            debug_assert!(!hermitian_basis(m, k).is_empty());
            writeln!(out, "b {row} {:e} {} {k}", sdp.b[row], con.name.replace(' ', "_")).unwrap();
            for part in &sdp.rows[row].parts {
                for &(r, col, v) in &part.entries {
                    writeln!(out, "a {row} {} {r} {col} {:e} {:e}", part.block, v.re, v.im).unwrap();
                }
            }
            row += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::CMat;
    use crate::sdp::HermMap;

    #[test]
    fn dump_lists_blocks_objective_and_rows() {
        let mut p = SdpProblem::minimize();
        let x = p.psd("X", 2);
        let t = p.free("t", 1);
        p.objective_trace(x, 1.0);
        p.add_constraint("tr X = t", vec![(x, HermMap::ptrace(&[2], &[])), (t, HermMap::Scale(-1.0))], CMat::zeros(1, 1));
        let text = dump(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "sdp min 3 1");
        assert_eq!(lines[1], "block 0 2 X +");
        assert_eq!(lines[3], "block 2 1 t -");
        assert_eq!(text.lines().filter(|l| l.starts_with("c ")).count(), 2);
        assert_eq!(text.lines().filter(|l| l.starts_with("a 0 ")).count(), 4);
        assert!(text.contains("b 0 0e0 tr_X_=_t 0"));
    }
}
