//! Homogeneous self-dual primal-dual interior-point method for Hermitian
//! block SDPs in standard form
//!
//! ```text
//! minimize   Σ ⟨Cb, Xb⟩   s.t.  ⟨Aᵢ, X⟩ = bᵢ,  Xb ⪰ 0
//! ```
//!
//! with Nesterov–Todd scaling, Mehrotra predictor-corrector steps and a dense
//! Cholesky factorization of the Schur complement.

use nalgebra::{Cholesky, DMatrix, DVector, SVD};

use super::{SolveStatus, Tolerances};
use crate::qmat::{c, CMat, C64};

/// Relative threshold on the Gram diagonal below which a row is dependent.
const DEPENDENCY_TOL: f64 = 1e-9;
/// Ratio `τ/κ` below which the embedding certifies infeasibility.
const TAU_KAPPA_TOL: f64 = 1e-9;
const STALL_STEP: f64 = 1e-9;
const STALL_LIMIT: usize = 5;
const MAX_BACKTRACK: usize = 40;

/// Lower Cholesky factor of a Hermitian matrix, `None` unless every pivot is
/// real and positive. nalgebra's complex Cholesky takes complex square roots
/// of negative pivots and so cannot be used as a definiteness test.
fn herm_cholesky(m: &CMat) -> Option<CMat> {
    let n = m.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = c(d, 0.0);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / d;
        }
    }
    Some(l)
}

fn is_pd(m: &CMat) -> bool {
    herm_cholesky(&(m + m.adjoint()).scale(0.5)).is_some()
}

fn min_eig(m: &CMat) -> f64 {
    crate::qmat::min_eigenvalue(m)
}

#[derive(Debug, Clone)]
pub(crate) struct RowPart {
    pub block: usize,
    /// Full (both triangles) listing of a Hermitian matrix.
    pub entries: Vec<(usize, usize, C64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub parts: Vec<RowPart>,
}

#[derive(Debug, Clone)]
pub(crate) struct BlockSdp {
    pub dims: Vec<usize>,
    pub c: Vec<CMat>,
    pub rows: Vec<Row>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawSolution {
    pub status: SolveStatus,
    pub x: Vec<CMat>,
    pub y: Vec<f64>,
    pub dual_residual: f64,
    pub iterations: usize,
}

struct Part {
    block: usize,
    entries: Vec<(usize, usize, C64)>,
    /// Distinct row indices touched, and for every entry the position of its
    /// row index in `touched`.
    touched: Vec<usize>,
    local: Vec<usize>,
}

struct Prepared<'a> {
    sdp: &'a BlockSdp,
    /// Original index and norm of every kept row.
    kept: Vec<(usize, f64)>,
    parts: Vec<Vec<Part>>,
    b: DVector<f64>,
    /// For every block, `(kept row, part)` pairs sorted by row.
    block_rows: Vec<Vec<(usize, usize)>>,
}

enum Presolve {
    Ready,
    Infeasible(Vec<f64>),
}

fn row_dot(a: &[(usize, usize, C64)], scratch: &[C64], n: usize) -> f64 {
    a.iter().map(|&(r, col, v)| (v.conj() * scratch[col * n + r]).re).sum()
}

fn block_inner(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| (p.conj() * q).re).sum::<f64>())
        .sum()
}

fn block_max_abs(a: &[CMat]) -> f64 {
    a.iter().flat_map(|m| m.iter()).fold(0.0, |acc, z| acc.max(z.norm()))
}

fn hermitize(m: &mut CMat) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..=j {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

impl<'a> Prepared<'a> {
    fn new(sdp: &'a BlockSdp, feas: f64) -> (Self, Presolve) {
        let m_all = sdp.rows.len();
        let norms: Vec<f64> = sdp
            .rows
            .iter()
            .map(|r| {
                r.parts
                    .iter()
                    .flat_map(|p| p.entries.iter())
                    .map(|(_, _, v)| v.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let bmax = sdp.b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let mut presolve = Presolve::Ready;
        let mut candidates = Vec::new();
        for i in 0..m_all {
            if norms[i] == 0.0 {
                if sdp.b[i].abs() > feas * (1.0 + bmax) {
                    let mut ray = vec![0.0; m_all];
                    ray[i] = sdp.b[i].signum() / sdp.b[i].abs();
                    presolve = Presolve::Infeasible(ray);
                }
            } else {
                candidates.push(i);
            }
        }

        // Gram matrix of normalized candidate rows.
        let nc = candidates.len();
        let mut gram = DMatrix::<f64>::zeros(nc, nc);
        let mut per_block: Vec<Vec<(usize, usize)>> = vec![Vec::new(); sdp.dims.len()];
        for (ci, &i) in candidates.iter().enumerate() {
            for (pi, part) in sdp.rows[i].parts.iter().enumerate() {
                per_block[part.block].push((ci, pi));
            }
        }
        for (blk, list) in per_block.iter().enumerate() {
            let n = sdp.dims[blk];
            let mut scratch = vec![C64::default(); n * n];
            for (jj, &(cj, pj)) in list.iter().enumerate() {
                let aj = &sdp.rows[candidates[cj]].parts[pj].entries;
                for &(r, col, v) in aj {
                    scratch[col * n + r] += v;
                }
                for &(ci, pi) in &list[..=jj] {
                    let ai = &sdp.rows[candidates[ci]].parts[pi].entries;
                    let val = row_dot(ai, &scratch, n) / (norms[candidates[ci]] * norms[candidates[cj]]);
                    gram[(ci, cj)] += val;
                    if ci != cj {
                        gram[(cj, ci)] += val;
                    }
                }
                for &(r, col, _) in aj {
                    scratch[col * n + r] = C64::default();
                }
            }
        }

        // Greedy pivoted Cholesky picks an independent subset.
        let mut diag: Vec<f64> = (0..nc).map(|i| gram[(i, i)]).collect();
        let mut lcols: Vec<Vec<f64>> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        let mut is_pivot = vec![false; nc];
        loop {
            let best = (0..nc)
                .filter(|&i| !is_pivot[i])
                .max_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(b.cmp(&a)));
            let Some(p) = best else { break };
            if diag[p] <= DEPENDENCY_TOL {
                break;
            }
            let piv = diag[p].sqrt();
            let mut col = vec![0.0; nc];
            for i in 0..nc {
                if is_pivot[i] {
                    continue;
                }
                let mut s = gram[(i, p)];
                for lc in &lcols {
                    s -= lc[i] * lc[p];
                }
                col[i] = s / piv;
            }
            for i in 0..nc {
                if !is_pivot[i] {
                    diag[i] -= col[i] * col[i];
                }
            }
            is_pivot[p] = true;
            pivots.push(p);
            lcols.push(col);
        }

        // Dropped rows must be consistent with the kept ones.
        if matches!(presolve, Presolve::Ready) {
            let r = pivots.len();
            let bn: Vec<f64> = candidates.iter().map(|&i| sdp.b[i] / norms[i]).collect();
            let mut beta = vec![0.0; r];
            for k in 0..r {
                let mut s = bn[pivots[k]];
                for kk in 0..k {
                    s -= lcols[kk][pivots[k]] * beta[kk];
                }
                beta[k] = s / lcols[k][pivots[k]];
            }
            for d in (0..nc).filter(|&i| !is_pivot[i]) {
                let pred: f64 = (0..r).map(|k| lcols[k][d] * beta[k]).sum();
                let gap = bn[d] - pred;
                if gap.abs() > feas * (1.0 + bmax) {
                    // y = e_d − Σ c_k e_{p_k} with Lᵀ c = l_d annihilates A*.
                    let mut coef = vec![0.0; r];
                    for k in (0..r).rev() {
                        let mut s = lcols[k][d];
                        for kk in k + 1..r {
                            s -= lcols[k][pivots[kk]] * coef[kk];
                        }
                        coef[k] = s / lcols[k][pivots[k]];
                    }
                    let mut ray = vec![0.0; m_all];
                    let sgn = gap.signum() / gap.abs();
                    ray[candidates[d]] = sgn / norms[candidates[d]];
                    for k in 0..r {
                        ray[candidates[pivots[k]]] -= sgn * coef[k] / norms[candidates[pivots[k]]];
                    }
                    presolve = Presolve::Infeasible(ray);
                    break;
                }
            }
        }

        let mut kept_idx: Vec<usize> = pivots.iter().map(|&p| candidates[p]).collect();
        kept_idx.sort_unstable();
        let kept: Vec<(usize, f64)> = kept_idx.iter().map(|&i| (i, norms[i])).collect();
        let mut parts = Vec::with_capacity(kept.len());
        let mut block_rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); sdp.dims.len()];
        for (ki, &(i, s)) in kept.iter().enumerate() {
            let mut row_parts = Vec::new();
            for part in &sdp.rows[i].parts {
                let entries: Vec<(usize, usize, C64)> =
                    part.entries.iter().map(|&(r, col, v)| (r, col, v / s)).collect();
                let mut touched: Vec<usize> = entries.iter().map(|e| e.0).collect();
                touched.sort_unstable();
                touched.dedup();
                let local = entries
                    .iter()
                    .map(|e| touched.binary_search(&e.0).expect("row index present"))
                    .collect();
                block_rows[part.block].push((ki, row_parts.len()));
                row_parts.push(Part { block: part.block, entries, touched, local });
            }
            parts.push(row_parts);
        }
        let b = DVector::from_iterator(kept.len(), kept.iter().map(|&(i, s)| sdp.b[i] / s));
        (Self { sdp, kept, parts, b, block_rows }, presolve)
    }

    fn m(&self) -> usize {
        self.kept.len()
    }

    fn apply_a(&self, x: &[CMat]) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.parts.iter().map(|row| {
                row.iter()
                    .map(|p| {
                        let xb = &x[p.block];
                        p.entries.iter().map(|&(r, col, v)| (v.conj() * xb[(r, col)]).re).sum::<f64>()
                    })
                    .sum::<f64>()
            }),
        )
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<CMat> {
        let mut out: Vec<CMat> = self.sdp.dims.iter().map(|&n| CMat::zeros(n, n)).collect();
        for (row, &yi) in self.parts.iter().zip(y.iter()) {
            if yi == 0.0 {
                continue;
            }
            for p in row {
                let ob = &mut out[p.block];
                for &(r, col, v) in &p.entries {
                    ob[(r, col)] += v * yi;
                }
            }
        }
        out
    }

    /// `M_ij = ⟨Aᵢ, W Aⱼ W⟩`.
    fn schur(&self, w: &[CMat]) -> DMatrix<f64> {
        let m = self.m();
        let mut mat = DMatrix::<f64>::zeros(m, m);
        for (blk, list) in self.block_rows.iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            let n = self.sdp.dims[blk];
            let wd = w[blk].as_slice();
            let mut g = vec![C64::default(); n * n];
            let mut t: Vec<C64> = Vec::new();
            for (jj, &(j, pj)) in list.iter().enumerate() {
                let part = &self.parts[j][pj];
                let nt = part.touched.len();
                t.clear();
                t.resize(nt * n, C64::default());
                // T[s, :] = Σ v W[c, :] over entries (r_s, c, v)
                for (&(_, col, v), &s) in part.entries.iter().zip(&part.local) {
                    let wc = &wd[col * n..(col + 1) * n];
                    let ts = &mut t[s * n..(s + 1) * n];
                    for (tk, wk) in ts.iter_mut().zip(wc) {
                        *tk += v * wk.conj();
                    }
                }
                g.iter_mut().for_each(|z| *z = C64::default());
                // G = W[:, touched] · T
                for (s, &r) in part.touched.iter().enumerate() {
                    let wr = &wd[r * n..(r + 1) * n];
                    for k in 0..n {
                        let tv = t[s * n + k];
                        if tv == C64::default() {
                            continue;
                        }
                        let gk = &mut g[k * n..(k + 1) * n];
                        for (gi, wi) in gk.iter_mut().zip(wr) {
                            *gi += wi * tv;
                        }
                    }
                }
                for &(i, pi) in &list[..=jj] {
                    let val = row_dot(&self.parts[i][pi].entries, &g, n);
                    mat[(i, j)] += val;
                }
            }
        }
        for j in 0..m {
            for i in 0..j {
                mat[(j, i)] = mat[(i, j)];
            }
        }
        mat
    }

    /// Maps normalized-row multipliers back to the original rows.
    fn unscale_y(&self, y: &DVector<f64>, factor: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.sdp.rows.len()];
        for (&(i, s), &yi) in self.kept.iter().zip(y.iter()) {
            out[i] = yi / s * factor;
        }
        out
    }
}

struct Scaling {
    r: CMat,
    rinv: CMat,
    w: CMat,
    lam: Vec<f64>,
}

fn scale_columns(m: &mut CMat, s: &[f64]) {
    for (k, &f) in s.iter().enumerate() {
        m.column_mut(k).scale_mut(f);
    }
}

fn scale_rows(m: &mut CMat, s: &[f64]) {
    for (k, &f) in s.iter().enumerate() {
        m.row_mut(k).scale_mut(f);
    }
}

fn nt_scaling(x: &CMat, z: &CMat) -> Option<Scaling> {
    let l1 = herm_cholesky(x)?;
    let l2 = herm_cholesky(z)?;
    let prod = l2.adjoint() * &l1;
    let svd = SVD::try_new(prod, true, true, f64::EPSILON, 0)?;
    let u = svd.u?;
    let vt = svd.v_t?;
    let lam: Vec<f64> = svd.singular_values.iter().copied().collect();
    if lam.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return None;
    }
    let inv_sqrt: Vec<f64> = lam.iter().map(|l| 1.0 / l.sqrt()).collect();
    let mut r = &l1 * vt.adjoint();
    scale_columns(&mut r, &inv_sqrt);
    let mut rinv = u.adjoint() * l2.adjoint();
    scale_rows(&mut rinv, &inv_sqrt);
    let mut w = &r * r.adjoint();
    hermitize(&mut w);
    Some(Scaling { r, rinv, w, lam })
}

/// Largest `α` with `Λ + α D ⪰ 0`, or infinity.
fn max_step_scaled(lam: &[f64], d: &CMat) -> f64 {
    let n = lam.len();
    let mut s = CMat::from_fn(n, n, |i, j| d[(i, j)] / (lam[i] * lam[j]).sqrt());
    hermitize(&mut s);
    let lmin = s.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

enum Factor {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn new(m: &DMatrix<f64>) -> Option<(Self, DMatrix<f64>)> {
        if let Some(ch) = Cholesky::new(m.clone()) {
            return Some((Factor::Chol(ch), m.clone()));
        }
        let dmax = m.diagonal().iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
        for shift in [1e-14, 1e-12, 1e-10] {
            let mut reg = m.clone();
            for i in 0..m.nrows() {
                reg[(i, i)] += shift * dmax;
            }
            if let Some(ch) = Cholesky::new(reg.clone()) {
                return Some((Factor::Chol(ch), m.clone()));
            }
        }
        let lu = m.clone().lu();
        if lu.is_invertible() {
            Some((Factor::Lu(lu), m.clone()))
        } else {
            None
        }
    }

    fn raw_solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            Factor::Chol(ch) => ch.solve(rhs),
            Factor::Lu(lu) => lu.solve(rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
        }
    }
}

struct Linear {
    factor: Factor,
    matrix: DMatrix<f64>,
}

impl Linear {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.factor.raw_solve(rhs);
        let r = rhs - &self.matrix * &x;
        x += self.factor.raw_solve(&r);
        x
    }
}

struct Direction {
    dx: Vec<CMat>,
    dy: DVector<f64>,
    dz: Vec<CMat>,
    dtau: f64,
    dkappa: f64,
}

struct Iterate {
    x: Vec<CMat>,
    y: DVector<f64>,
    z: Vec<CMat>,
    tau: f64,
    kappa: f64,
}

pub(crate) fn solve(sdp: &BlockSdp, tol: &Tolerances) -> RawSolution {
    let (prep, presolve) = Prepared::new(sdp, tol.feas);
    let nblocks = sdp.dims.len();
    let zeros = || sdp.dims.iter().map(|&n| CMat::zeros(n, n)).collect::<Vec<_>>();
    if let Presolve::Infeasible(ray) = presolve {
        return RawSolution { status: SolveStatus::PrimalInfeasible, x: zeros(), y: ray, dual_residual: 0.0, iterations: 0 };
    }
    let cvec = &sdp.c;
    let b = &prep.b;
    let nu: f64 = sdp.dims.iter().sum::<usize>() as f64;

    let mut it = Iterate {
        x: sdp.dims.iter().map(|&n| CMat::identity(n, n)).collect(),
        y: DVector::zeros(prep.m()),
        z: sdp.dims.iter().map(|&n| CMat::identity(n, n)).collect(),
        tau: 1.0,
        kappa: 1.0,
    };
    let mut stalls = 0;
    let mut status = SolveStatus::NumericalFailure;
    let mut iterations = 0;
    let mut ray: Option<(SolveStatus, f64)> = None;

    for iter in 0..=tol.max_iter {
        iterations = iter;
        let ax = prep.apply_a(&it.x);
        let aty = prep.apply_at(&it.y);
        let rp: DVector<f64> = &ax - b * it.tau;
        let rd: Vec<CMat> = (0..nblocks).map(|k| &aty[k] + &it.z[k] - &cvec[k] * c(it.tau, 0.0)).collect();
        let cx = block_inner(cvec, &it.x);
        let by = b.dot(&it.y);
        let rg = cx - by + it.kappa;
        let xz = block_inner(&it.x, &it.z);
        let mu = (xz + it.tau * it.kappa) / (nu + 1.0);

        let pres = rp
            .iter()
            .zip(&prep.kept)
            .fold(0.0f64, |a, (&r, &(_, s))| a.max((r * s).abs()))
            / it.tau;
        let dres = block_max_abs(&rd) / it.tau;
        let (pv, dv) = (cx / it.tau, by / it.tau);
        let scale = 1.0f64.max(pv.abs().min(dv.abs()));
        if pres <= 0.5 * tol.feas && dres <= 0.5 * tol.feas && (pv - dv).abs() <= tol.gap * scale {
            status = SolveStatus::Optimal;
            break;
        }
        // Infeasibility rays.
        let small_tau = it.tau <= TAU_KAPPA_TOL * it.kappa;
        if by > 0.0 && it.tau < it.kappa {
            let resid = block_max_abs(&(0..nblocks).map(|k| &aty[k] + &it.z[k]).collect::<Vec<_>>());
            let certified = aty.iter().all(|a| min_eig(&-a) >= -tol.feas * by);
            if (resid <= tol.feas * by || small_tau) && certified {
                ray = Some((SolveStatus::PrimalInfeasible, by));
                status = SolveStatus::PrimalInfeasible;
                break;
            }
        }
        if cx < 0.0 && it.tau < it.kappa {
            let resid = ax.iter().zip(&prep.kept).fold(0.0f64, |a, (&r, &(_, s))| a.max((r * s).abs()));
            let certified = it.x.iter().all(|x| min_eig(x) >= -tol.feas * (-cx));
            if (resid <= tol.feas * (-cx) || small_tau) && certified {
                ray = Some((SolveStatus::DualInfeasible, -cx));
                status = SolveStatus::DualInfeasible;
                break;
            }
        }
        if iter == tol.max_iter || stalls >= STALL_LIMIT {
            break;
        }

        // Scaling and Schur complement.
        let mut scalings = Vec::with_capacity(nblocks);
        for k in 0..nblocks {
            match nt_scaling(&it.x[k], &it.z[k]) {
                Some(s) => scalings.push(s),
                None => break,
            }
        }
        if scalings.len() != nblocks {
            break;
        }
        let w: Vec<CMat> = scalings.iter().map(|s| s.w.clone()).collect();
        let schur = prep.schur(&w);
        let Some((factor, matrix)) = Factor::new(&schur) else { break };
        let lin = Linear { factor, matrix };
        let wcw: Vec<CMat> = (0..nblocks).map(|k| &w[k] * &cvec[k] * &w[k]).collect();
        let avec = prep.apply_a(&wcw);
        let cwc = block_inner(cvec, &wcw);
        let u2 = lin.solve(&(&avec + b));
        let denom = avec.dot(&u2) - b.dot(&u2) - cwc - it.kappa / it.tau;
        let wrdw: Vec<CMat> = (0..nblocks).map(|k| &w[k] * &rd[k] * &w[k]).collect();

        let direction = |eta: f64, t: &[CMat], r5: f64| -> Direction {
            let tmp: Vec<CMat> = (0..nblocks)
                .map(|k| {
                    let s = &scalings[k];
                    let mut rtr = &s.r * &t[k] * s.r.adjoint();
                    rtr += &wrdw[k] * c(eta, 0.0);
                    rtr
                })
                .collect();
            let q1 = -(&rp * eta) - prep.apply_a(&tmp);
            let u1 = lin.solve(&q1);
            let c1 = block_inner(cvec, &tmp);
            let dtau = (-eta * rg - c1 - avec.dot(&u1) + b.dot(&u1) - r5 / it.tau) / denom;
            let dy = &u1 + &u2 * dtau;
            let atdy = prep.apply_at(&dy);
            let mut dz = Vec::with_capacity(nblocks);
            let mut dx = Vec::with_capacity(nblocks);
            for k in 0..nblocks {
                let mut z = -(&rd[k] * c(eta, 0.0)) - &atdy[k] + &cvec[k] * c(dtau, 0.0);
                hermitize(&mut z);
                let mut x = &tmp[k] + &w[k] * &atdy[k] * &w[k] - &wcw[k] * c(dtau, 0.0);
                hermitize(&mut x);
                dz.push(z);
                dx.push(x);
            }
            let dkappa = (r5 - it.kappa * dtau) / it.tau;
            Direction { dx, dy, dz, dtau, dkappa }
        };
        let scaled = |d: &Direction| -> (Vec<CMat>, Vec<CMat>) {
            let sx = (0..nblocks).map(|k| &scalings[k].rinv * &d.dx[k] * scalings[k].rinv.adjoint()).collect();
            let sz = (0..nblocks).map(|k| scalings[k].r.adjoint() * &d.dz[k] * &scalings[k].r).collect();
            (sx, sz)
        };
        let step_len = |d: &Direction, sx: &[CMat], sz: &[CMat]| -> f64 {
            let mut a = f64::INFINITY;
            for k in 0..nblocks {
                a = a.min(max_step_scaled(&scalings[k].lam, &sx[k]));
                a = a.min(max_step_scaled(&scalings[k].lam, &sz[k]));
            }
            if d.dtau < 0.0 {
                a = a.min(-it.tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-it.kappa / d.dkappa);
            }
            a
        };

        // Predictor.
        let t_aff: Vec<CMat> = scalings.iter().map(|s| crate::qmat::from_real_diag(&s.lam).scale(-1.0)).collect();
        let aff = direction(1.0, &t_aff, -it.tau * it.kappa);
        let (sxa, sza) = scaled(&aff);
        let alpha_aff = step_len(&aff, &sxa, &sza).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // Corrector.
        let t_cor: Vec<CMat> = (0..nblocks)
            .map(|k| {
                let lam = &scalings[k].lam;
                let n = lam.len();
                let prod = &sxa[k] * &sza[k];
                CMat::from_fn(n, n, |i, j| {
                    let mut v = -(prod[(i, j)] + prod[(j, i)].conj()) * 0.5;
                    if i == j {
                        v += c(sigma * mu - lam[i] * lam[i], 0.0);
                    }
                    v * (2.0 / (lam[i] + lam[j]))
                })
            })
            .collect();
        let r5 = sigma * mu - it.tau * it.kappa - aff.dtau * aff.dkappa;
        let dir = direction(1.0 - sigma, &t_cor, r5);
        let (sx, sz) = scaled(&dir);
        let mut alpha = (tol.step_fraction * step_len(&dir, &sx, &sz)).min(1.0);
        // The scaled step length is exact in exact arithmetic only; back off
        // until every block stays positive definite.
        let mut tries = 0;
        while alpha.is_finite() && alpha > 0.0 && tries < MAX_BACKTRACK {
            let inside = (0..nblocks).all(|k| {
                is_pd(&(&it.x[k] + &dir.dx[k] * c(alpha, 0.0))) && is_pd(&(&it.z[k] + &dir.dz[k] * c(alpha, 0.0)))
            });
            if inside {
                break;
            }
            alpha *= 0.5;
            tries += 1;
        }
        if tries == MAX_BACKTRACK {
            alpha = 0.0;
        }
        if !alpha.is_finite() || alpha <= STALL_STEP {
            stalls += 1;
            if !alpha.is_finite() || alpha <= 0.0 {
                break;
            }
        } else {
            stalls = 0;
        }

        for k in 0..nblocks {
            it.x[k] += &dir.dx[k] * c(alpha, 0.0);
            it.z[k] += &dir.dz[k] * c(alpha, 0.0);
            hermitize(&mut it.x[k]);
            hermitize(&mut it.z[k]);
        }
        it.y += &dir.dy * alpha;
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
        if !(it.tau > 0.0 && it.kappa > 0.0 && it.tau.is_finite() && it.kappa.is_finite()) {
            break;
        }
    }

    match ray {
        Some((SolveStatus::PrimalInfeasible, by)) => RawSolution {
            status,
            x: zeros(),
            y: prep.unscale_y(&it.y, 1.0 / by),
            dual_residual: 0.0,
            iterations,
        },
        Some((_, ncx)) => RawSolution {
            status,
            x: it.x.iter().map(|m| m / c(ncx, 0.0)).collect(),
            y: vec![0.0; sdp.rows.len()],
            dual_residual: 0.0,
            iterations,
        },
        None => {
            let aty = prep.apply_at(&it.y);
            let rd: Vec<CMat> = (0..nblocks)
                .map(|k| (&aty[k] + &it.z[k]) / c(it.tau, 0.0) - &cvec[k])
                .collect();
            RawSolution {
                status,
                x: it.x.iter().map(|m| m / c(it.tau, 0.0)).collect(),
                y: prep.unscale_y(&it.y, 1.0 / it.tau),
                dual_residual: block_max_abs(&rd),
                iterations,
            }
        }
    }
}
