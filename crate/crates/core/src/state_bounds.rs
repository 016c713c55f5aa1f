//! State-level quantities: ADG/PPT squeezing SDPs, the squeezing-based
//! distillable-entanglement bounds, anti-degradability tests, set and map
//! distances, continuity bounds and the hashing lower bound.
//!
//! Every bipartite routine reads the `(d_A, d_B)` split from the density
//! operator's declared dims; nothing is inferred.

use std::collections::BTreeMap;

use web_time::Instant;

use crate::channels::{noisy_mes, parse_channel};
use crate::error::{Error, Result};
use crate::qmat::{
    binary_entropy, c, coherent_information, eigenvalues_hermitian, entropy_scalars, hermitian_eigen,
    hermitian_fn, identity, kron, max_entangled, outer, partial_trace, pauli_y, pure_state_entanglement,
    purify, CMat, CVec, DensityJson, DensityOperator,
};
use crate::report::{BoundReport, InputDigest, ReportStatus};
use crate::sdp::{solve, HermMap, SdpProblem, SolveStatus, Tolerances, VarId};

/// Weights and distances within this many solver tolerances of an endpoint
/// are snapped to it.
pub const SNAP_FACTOR: f64 = 10.0;
/// Eigenvalues of the squeezed state below this are dropped from the spectral sum.
pub const SPECTRAL_CUTOFF: f64 = 1e-10;
/// Squeeze weight that counts as "fully free" when the feasibility test is inconclusive.
const ADG_FALLBACK_WEIGHT: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FreeSet {
    /// Anti-degradable states (symmetric extension on B).
    Adg,
    /// States with positive partial transpose.
    Ppt,
}

#[derive(Debug, Clone)]
pub struct SqueezeResult {
    /// `2^{-R_max}`: largest weight of a free state in a convex split of ρ.
    pub free_weight: f64,
    /// `-log₂ free_weight`, `+∞` when the weight is zero.
    pub r_max: f64,
    /// Normalized free component, absent when the weight is zero.
    pub free_part: Option<DensityOperator>,
    /// Normalized remainder; equals ρ when the weight is zero and is absent
    /// when ρ itself is free.
    pub squeezed: Option<DensityOperator>,
    /// Dual optimizers keyed by constraint name (`M`, `N`, `K`). For rank
    /// deficient ρ these act on the reduced spaces and the isometries are
    /// included as `V` and `U` (see [`SqueezeSupport`]).
    pub dual_certificate: BTreeMap<String, CMat>,
    pub status: SolveStatus,
    /// `tr ω` at the optimum.
    pub primal_value: f64,
    /// `tr(M ρ)` at the optimum.
    pub dual_value: f64,
    pub max_residual: f64,
}

fn bipartite(rho: &DensityOperator) -> Result<(usize, usize)> {
    rho.bipartite()
}

fn snap_threshold(tol: &Tolerances) -> f64 {
    SNAP_FACTOR * tol.gap.max(tol.feas)
}

fn snap_weight(w: f64, tol: &Tolerances) -> f64 {
    let w = w.clamp(0.0, 1.0);
    let eps = snap_threshold(tol);
    if w < eps {
        0.0
    } else if w > 1.0 - eps {
        1.0
    } else {
        w
    }
}

/// Relative eigenvalue threshold below which a direction is treated as
/// outside the support of the target in the squeeze SDPs.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Subspaces the squeeze variables are restricted to. Any feasible point of
/// the squeezing SDP has `ω, τ` supported on `supp ρ`, and the extension `T`
/// on `(supp ρ ⊗ E) ∩ P_BE (supp ρ ⊗ B)`. Restricting to these faces keeps a
/// strictly feasible point when ρ is rank deficient, which the interior-point
/// solver needs to converge.
#[derive(Debug, Clone)]
pub struct SqueezeSupport {
    /// Isometry onto `supp ρ` (`d_A d_B × r`); the identity for full rank.
    pub v: CMat,
    /// Isometry onto the extension face (`d_A d_B² × s`), `s` may be 0.
    pub u: CMat,
}

impl SqueezeSupport {
    pub fn is_full(&self) -> bool {
        self.v.ncols() == self.v.nrows() && self.u.ncols() == self.u.nrows()
    }
}

fn eigvecs_above(m: &CMat, threshold: f64) -> CMat {
    let spec = hermitian_eigen(m);
    let cols: Vec<usize> = (0..spec.eigenvalues.len()).filter(|&k| spec.eigenvalues[k] > threshold).collect();
    CMat::from_fn(m.nrows(), cols.len(), |i, j| spec.eigenvectors[(i, cols[j])])
}

pub fn squeeze_support(target: &CMat, da: usize, db: usize) -> Result<SqueezeSupport> {
    let n = da * db;
    let lmax = eigenvalues_hermitian(target).into_iter().fold(0.0f64, f64::max);
    let v = eigvecs_above(target, SUPPORT_TOL * lmax.max(1e-300));
    if v.ncols() == n {
        return Ok(SqueezeSupport { v: identity(n), u: identity(n * db) });
    }
    let q1 = kron(&(&v * v.adjoint()), &identity(db));
    let q2 = crate::qmat::permute_systems(&q1, &[da, db, db], &[0, 2, 1])?;
    let u = eigvecs_above(&(q1 + q2).scale(0.5), 1.0 - 1e-9);
    Ok(SqueezeSupport { v, u })
}

/// `X ↦ V X V†`, or the identity map when `V` is square.
fn lift(v: &CMat) -> HermMap {
    if v.nrows() == v.ncols() {
        HermMap::Identity
    } else {
        HermMap::Conjugate(v.clone())
    }
}

/// `X ↦ V† X V`, or the identity map when `V` is square.
fn restrict(v: &CMat) -> HermMap {
    if v.nrows() == v.ncols() {
        HermMap::Identity
    } else {
        HermMap::Conjugate(v.adjoint())
    }
}

pub(crate) struct SqueezeVars {
    pub omega: VarId,
    /// Absent when the extension face is empty.
    pub tau: Option<VarId>,
    pub support: SqueezeSupport,
}

/// Adds the squeezing variables and constraints for `target` to `p`:
/// `ω + τ = target`, `ω, τ ⪰ 0`, τ free. For ADG freeness is witnessed by
/// `T_ABE ⪰ 0` with `tr_E T = τ` and `tr_B T = τ`; for PPT by
/// `S = τ^{T_B} ⪰ 0`. Variables live on [`SqueezeSupport`]; the objective is
/// left to the caller.
pub(crate) fn add_squeeze(
    p: &mut SdpProblem,
    target: &CMat,
    da: usize,
    db: usize,
    set: FreeSet,
) -> Result<SqueezeVars> {
    let n = da * db;
    let support = squeeze_support(target, da, db)?;
    let r = support.v.ncols();
    let omega = p.psd("omega", r);
    let reduced = restrict(&support.v).apply(target)?;
    if set == FreeSet::Adg && support.u.ncols() == 0 {
        // No extendible operator fits under the target: τ = 0 and ω = target.
        p.add_constraint("M", vec![(omega, HermMap::Identity)], reduced);
        return Ok(SqueezeVars { omega, tau: None, support });
    }
    let tau = p.psd("tau", r);
    p.add_constraint("M", vec![(omega, HermMap::Identity), (tau, HermMap::Identity)], reduced);
    match set {
        FreeSet::Adg => {
            let dims = [da, db, db];
            let t = p.psd("T", support.u.ncols());
            for (name, keep) in [("N", [0, 1]), ("K", [0, 2])] {
                let marginal =
                    lift(&support.u).then(HermMap::ptrace(&dims, &keep)).then(restrict(&support.v)).scaled(-1.0);
                p.add_constraint(name, vec![(tau, HermMap::Identity), (t, marginal)], CMat::zeros(r, r));
            }
        }
        FreeSet::Ppt => {
            let s = p.psd("S", n);
            p.add_constraint(
                "N",
                vec![(tau, lift(&support.v).then(HermMap::ptranspose(&[da, db], 1))), (s, HermMap::Scale(-1.0))],
                CMat::zeros(n, n),
            );
        }
    }
    Ok(SqueezeVars { omega, tau: Some(tau), support })
}

impl SqueezeVars {
    /// `(ω, τ)` on the full space.
    pub(crate) fn lifted_values(&self, p: &SdpProblem, sol: &crate::sdp::SdpSolution) -> Result<(CMat, CMat)> {
        let full = lift(&self.support.v);
        let omega = full.apply(sol.value(&p.var(self.omega).name))?;
        let tau = match self.tau {
            Some(t) => full.apply(sol.value(&p.var(t).name))?,
            None => CMat::zeros(omega.nrows(), omega.nrows()),
        };
        Ok((omega, tau))
    }
}

/// Builds the squeezing SDP for ρ: minimize `tr ω` under [`add_squeeze`].
pub fn squeeze_problem(rho: &DensityOperator, set: FreeSet) -> Result<SdpProblem> {
    let (da, db) = bipartite(rho)?;
    let mut p = SdpProblem::minimize();
    let vars = add_squeeze(&mut p, rho.matrix(), da, db, set)?;
    p.objective_trace(vars.omega, 1.0);
    Ok(p)
}

/// Dual optimizers keyed by constraint name, plus the support isometries
/// `V` and `U` when the problem was reduced.
pub(crate) fn certificate(p: &SdpProblem, duals: &[CMat], support: &SqueezeSupport) -> BTreeMap<String, CMat> {
    let mut out: BTreeMap<String, CMat> =
        p.constraints.iter().zip(duals).map(|(c, y)| (c.name.clone(), y.clone())).collect();
    if !support.is_full() {
        out.insert("V".into(), support.v.clone());
        out.insert("U".into(), support.u.clone());
    }
    out
}

fn drop_below(m: &CMat, cut: f64) -> CMat {
    let kept = hermitian_fn(m, |l| if l > cut { l } else { 0.0 });
    if kept.trace().re > 0.0 {
        kept
    } else {
        m.clone()
    }
}

pub fn squeeze(rho: &DensityOperator, set: FreeSet, tol: &Tolerances) -> Result<SqueezeResult> {
    let (da, db) = bipartite(rho)?;
    let mut p = SdpProblem::minimize();
    let vars = add_squeeze(&mut p, rho.matrix(), da, db, set)?;
    p.objective_trace(vars.omega, 1.0);
    let sol = solve(&p, tol)?;
    let dual_certificate = certificate(&p, &sol.duals, &vars.support);
    if sol.status != SolveStatus::Optimal {
        return Ok(SqueezeResult {
            free_weight: f64::NAN,
            r_max: f64::NAN,
            free_part: None,
            squeezed: None,
            dual_certificate,
            status: sol.status,
            primal_value: sol.primal_value,
            dual_value: sol.dual_value,
            max_residual: sol.max_residual,
        });
    }
    let (omega, tau) = vars.lifted_values(&p, &sol)?;
    let w = snap_weight(tau.trace().re, tol);
    // Components at or below the feasibility tolerance are solver noise. Left
    // in, they give the normalized parts spurious near-null directions that
    // break a second squeeze of the remainder.
    let cut = tol.feas * rho.matrix().trace().re;
    let (omega, tau) = (drop_below(&omega, cut), drop_below(&tau, cut));
    let dims = rho.dims().to_vec();
    let free_part = if w > 0.0 { Some(DensityOperator::from_approx(&tau, dims.clone())?) } else { None };
    let squeezed = if w == 0.0 {
        Some(rho.clone())
    } else if w < 1.0 {
        Some(DensityOperator::from_approx(&omega, dims)?)
    } else {
        None
    };
    Ok(SqueezeResult {
        free_weight: w,
        r_max: if w > 0.0 { -w.log2() } else { f64::INFINITY },
        free_part,
        squeezed,
        dual_certificate,
        status: sol.status,
        primal_value: sol.primal_value,
        dual_value: sol.dual_value,
        max_residual: sol.max_residual,
    })
}

pub fn squeeze_adg(rho: &DensityOperator, tol: &Tolerances) -> Result<SqueezeResult> {
    squeeze(rho, FreeSet::Adg, tol)
}

pub fn squeeze_ppt(rho: &DensityOperator, tol: &Tolerances) -> Result<SqueezeResult> {
    squeeze(rho, FreeSet::Ppt, tol)
}

/// `Σᵢ λᵢ S(B)_{ψᵢ}` over the eigendecomposition of ω. Inside degenerate
/// eigenspaces the eigensolver's basis is used as returned.
pub fn spectral_entanglement(omega: &DensityOperator) -> Result<f64> {
    let (da, db) = bipartite(omega)?;
    let s = omega.spectrum();
    let mut total = 0.0;
    for (k, &l) in s.eigenvalues.iter().enumerate() {
        if l < SPECTRAL_CUTOFF {
            continue;
        }
        let v: CVec = s.eigenvectors.column(k).into_owned();
        total += l * pure_state_entanglement(&v, da, db);
    }
    Ok(total)
}

/// Concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityOperator) -> Result<f64> {
    if rho.dims() != [2, 2] {
        return Err(Error::Dimension(format!("concurrence needs a two-qubit state, got dims {:?}", rho.dims())));
    }
    let yy = kron(&pauli_y(), &pauli_y());
    let tilde = &yy * rho.matrix().conjugate() * &yy;
    let sq = hermitian_fn(rho.matrix(), |l| l.max(0.0).sqrt());
    let r = &sq * tilde * &sq;
    let mut l: Vec<f64> = eigenvalues_hermitian(&r).iter().map(|x| x.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Entanglement of formation of a two-qubit state from its concurrence.
pub fn entanglement_of_formation_2q(rho: &DensityOperator) -> Result<f64> {
    let cc = concurrence(rho)?.min(1.0);
    Ok(binary_entropy((1.0 + (1.0 - cc * cc).sqrt()) / 2.0))
}

fn digest(bound: &str, rho: &DensityOperator) -> String {
    InputDigest::new(bound).ints(rho.dims()).matrix(rho.matrix()).finish()
}

fn squeeze_bound(
    name: &str,
    rho: &DensityOperator,
    set: FreeSet,
    tol: &Tolerances,
    remainder: impl Fn(&DensityOperator) -> Result<f64>,
) -> Result<BoundReport> {
    let start = Instant::now();
    let sq = squeeze(rho, set, tol)?;
    let report = if sq.status != SolveStatus::Optimal {
        BoundReport::failed(name, sq.status.into(), tol.feas, "squeezing SDP did not reach optimality")
    } else {
        let value = match &sq.squeezed {
            Some(omega) if sq.free_weight < 1.0 => (1.0 - sq.free_weight) * remainder(omega)?,
            _ => 0.0,
        };
        BoundReport::new(name, value, ReportStatus::Optimal, tol.feas)
    };
    Ok(report.with_digest(digest(name, rho)).with_runtime(start))
}

/// `(1 − 2^{-R_max}) Σ λᵢ S(B)_{ψᵢ}` with the squeezed state's spectral decomposition.
pub fn e_rev_u_hat(rho: &DensityOperator, set: FreeSet, tol: &Tolerances) -> Result<BoundReport> {
    let name = match set {
        FreeSet::Adg => "erev-u-hat",
        FreeSet::Ppt => "erev-npt-hat",
    };
    squeeze_bound(name, rho, set, tol, spectral_entanglement)
}

/// Two-way bound from PPT squeezing.
pub fn e_rev_npt_hat(rho: &DensityOperator, tol: &Tolerances) -> Result<BoundReport> {
    e_rev_u_hat(rho, FreeSet::Ppt, tol)
}

/// `(1 − 2^{-R_max}) E_F(ω)` for two-qubit states with exact `E_F`.
pub fn e_rev_u(rho: &DensityOperator, set: FreeSet, tol: &Tolerances) -> Result<BoundReport> {
    if rho.dims() != [2, 2] {
        return Err(Error::Dimension(format!("exact E_F is only available for two qubits, got dims {:?}", rho.dims())));
    }
    let name = match set {
        FreeSet::Adg => "erev-u",
        FreeSet::Ppt => "erev-npt",
    };
    squeeze_bound(name, rho, set, tol, entanglement_of_formation_2q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdgMargin {
    pub is_adg: bool,
    /// `tr ρ_B² − tr ρ² + 4√det ρ`.
    pub margin: f64,
}

/// Closed-form symmetric-extension test for two qubits.
pub fn is_adg_two_qubit(rho: &DensityOperator) -> Result<AdgMargin> {
    if rho.dims() != [2, 2] {
        return Err(Error::Dimension(format!("two-qubit criterion needs dims [2, 2], got {:?}", rho.dims())));
    }
    let rho_b = partial_trace(rho.matrix(), rho.dims(), &[1])?;
    let pb = (&rho_b * &rho_b).trace().re;
    let det: f64 = rho.spectrum().eigenvalues.iter().map(|l| l.max(0.0)).product();
    let margin = pb - rho.purity() + 4.0 * det.sqrt();
    Ok(AdgMargin { is_adg: margin >= 0.0, margin })
}

/// Symmetric-extension feasibility `T ⪰ 0, tr_E T = tr_B T = ρ`, with `T`
/// restricted to the face in [`SqueezeSupport`]. When the solver is
/// inconclusive the ADG squeeze weight decides.
pub fn is_adg_general(rho: &DensityOperator, tol: &Tolerances) -> Result<bool> {
    let (da, db) = bipartite(rho)?;
    let support = squeeze_support(rho.matrix(), da, db)?;
    if support.u.ncols() == 0 {
        return Ok(false);
    }
    let target = restrict(&support.v).apply(rho.matrix())?;
    let mut p = SdpProblem::minimize();
    let t = p.psd("T", support.u.ncols());
    let dims = [da, db, db];
    for (name, keep) in [("tr_E", [0, 1]), ("tr_B", [0, 2])] {
        let marginal = lift(&support.u).then(HermMap::ptrace(&dims, &keep)).then(restrict(&support.v));
        p.add_constraint(name, vec![(t, marginal)], target.clone());
    }
    match solve(&p, tol)?.status {
        SolveStatus::Optimal => Ok(true),
        SolveStatus::PrimalInfeasible => Ok(false),
        other => {
            let sq = squeeze_adg(rho, tol)?;
            if sq.status != SolveStatus::Optimal {
                return Err(Error::Solver(format!("symmetric-extension test inconclusive ({other})")));
            }
            Ok(sq.free_weight >= ADG_FALLBACK_WEIGHT)
        }
    }
}

/// Value of a distance SDP together with its solver status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpValue {
    pub value: f64,
    pub status: SolveStatus,
    pub max_residual: f64,
}

fn trace_distance_terms(p: &mut SdpProblem, n: usize) -> (crate::sdp::VarId, crate::sdp::VarId) {
    let pp = p.psd("P", n);
    let qq = p.psd("Q", n);
    p.objective_trace(pp, 0.5);
    p.objective_trace(qq, 0.5);
    (pp, qq)
}

/// `min ½‖ρ − σ‖₁` over anti-degradable states σ, with `ρ − σ = P − Q`.
pub fn d_set(rho: &DensityOperator, tol: &Tolerances) -> Result<SdpValue> {
    let (da, db) = bipartite(rho)?;
    let n = da * db;
    let mut p = SdpProblem::minimize();
    let (pp, qq) = trace_distance_terms(&mut p, n);
    let t = p.psd("T", n * db);
    let dims = [da, db, db];
    p.add_constraint(
        "rho - sigma = P - Q",
        vec![(pp, HermMap::Identity), (qq, HermMap::Scale(-1.0)), (t, HermMap::ptrace(&dims, &[0, 1]))],
        rho.matrix().clone(),
    );
    p.add_constraint(
        "symmetric extension",
        vec![(t, HermMap::ptrace(&dims, &[0, 1])), (t, HermMap::ptrace(&dims, &[0, 2]).scaled(-1.0))],
        CMat::zeros(n, n),
    );
    p.add_constraint("unit trace", vec![(t, HermMap::ptrace(&dims, &[]))], identity(1));
    let sol = solve(&p, tol)?;
    Ok(SdpValue { value: snap_weight(sol.primal_value, tol), status: sol.status, max_residual: sol.max_residual })
}

/// `min ½‖ρ_AB − (id ⊗ D)(ρ_AE)‖₁` over channels `D: E → B`, with E the
/// eigen-purification reference of ρ.
pub fn d_map(rho: &DensityOperator, tol: &Tolerances) -> Result<SdpValue> {
    bipartite(rho)?;
    let (psi, r) = purify(rho);
    d_map_from_purification(rho, &psi, r, tol)
}

/// [`d_map`] for a caller-supplied purification `psi` on `A ⊗ B ⊗ E`
/// (`E` of dimension `r`, last and fastest index).
pub fn d_map_from_purification(rho: &DensityOperator, psi: &CVec, r: usize, tol: &Tolerances) -> Result<SdpValue> {
    let (da, db) = bipartite(rho)?;
    if psi.len() != da * db * r {
        return Err(Error::Dimension(format!("purification length {} vs {da}·{db}·{r}", psi.len())));
    }
    let rho_ae = partial_trace(&outer(psi), &[da, db, r], &[0, 2])?;
    // ρ_AE = Σ_k |φ_k⟩⟨φ_k|, and (id ⊗ D)(|φ⟩⟨φ|) = (L ⊗ I) J_D (L ⊗ I)† with L[a, e] = φ[a·r + e].
    let s = hermitian_eigen(&rho_ae);
    let mut terms = Vec::new();
    for (k, &l) in s.eigenvalues.iter().enumerate() {
        if l <= 1e-14 {
            continue;
        }
        let amp = l.sqrt();
        let lk = CMat::from_fn(da, r, |a, e| s.eigenvectors[(a * r + e, k)] * amp);
        terms.push(HermMap::Conjugate(kron(&lk, &identity(db))));
    }
    let n = da * db;
    let mut p = SdpProblem::minimize();
    let (pp, qq) = trace_distance_terms(&mut p, n);
    let j = p.psd("J_D", r * db);
    p.add_constraint(
        "rho - D(rho_AE) = P - Q",
        vec![(pp, HermMap::Identity), (qq, HermMap::Scale(-1.0)), (j, HermMap::Sum(terms))],
        rho.matrix().clone(),
    );
    p.add_constraint("trace preserving", vec![(j, HermMap::ptrace(&[r, db], &[0]))], identity(r));
    let sol = solve(&p, tol)?;
    Ok(SdpValue { value: snap_weight(sol.primal_value, tol), status: sol.status, max_residual: sol.max_residual })
}

/// `2ε log₂ d_A + g(ε)`.
pub fn scb_formula(eps: f64, da: usize) -> Result<f64> {
    let (_, g) = entropy_scalars(eps)?;
    Ok(2.0 * eps * (da as f64).log2() + g)
}

/// `4ε log₂ d_B + 2 g(ε)`.
pub fn mcb_formula(eps: f64, db: usize) -> Result<f64> {
    let (_, g) = entropy_scalars(eps)?;
    Ok(4.0 * eps * (db as f64).log2() + 2.0 * g)
}

fn distance_bound(
    name: &str,
    rho: &DensityOperator,
    tol: &Tolerances,
    dist: fn(&DensityOperator, &Tolerances) -> Result<SdpValue>,
    formula: impl Fn(f64) -> Result<f64>,
) -> Result<BoundReport> {
    let start = Instant::now();
    let d = dist(rho, tol)?;
    let report = if d.status == SolveStatus::Optimal {
        BoundReport::new(name, formula(d.value)?, ReportStatus::Optimal, tol.feas)
    } else {
        BoundReport::failed(name, d.status.into(), tol.feas, "distance SDP did not reach optimality")
    };
    Ok(report.with_digest(digest(name, rho)).with_runtime(start))
}

pub fn e_scb(rho: &DensityOperator, tol: &Tolerances) -> Result<BoundReport> {
    let (da, _) = bipartite(rho)?;
    distance_bound("scb", rho, tol, d_set, |e| scb_formula(e, da))
}

pub fn e_mcb(rho: &DensityOperator, tol: &Tolerances) -> Result<BoundReport> {
    let (_, db) = bipartite(rho)?;
    distance_bound("mcb", rho, tol, d_map, |e| mcb_formula(e, db))
}

pub fn dset_report(rho: &DensityOperator, tol: &Tolerances) -> Result<BoundReport> {
    distance_bound("dset", rho, tol, d_set, Ok)
}

pub fn dmap_report(rho: &DensityOperator, tol: &Tolerances) -> Result<BoundReport> {
    distance_bound("dmap", rho, tol, d_map, Ok)
}

/// Coherent information `I_c(A⟩B)`; may be negative.
pub fn hashing_lower(rho: &DensityOperator) -> Result<f64> {
    coherent_information(rho)
}

pub fn hashing_report(rho: &DensityOperator) -> Result<BoundReport> {
    let start = Instant::now();
    let v = hashing_lower(rho)?;
    Ok(BoundReport::new("hashing", v, ReportStatus::Analytic, 0.0)
        .with_digest(digest("hashing", rho))
        .with_runtime(start))
}

/// Dispatches a state bound by its CLI name.
pub fn state_bound(name: &str, rho: &DensityOperator, tol: &Tolerances) -> Result<BoundReport> {
    match name {
        "erev-u" => e_rev_u(rho, FreeSet::Adg, tol),
        "erev-u-hat" => e_rev_u_hat(rho, FreeSet::Adg, tol),
        "erev-npt-hat" => e_rev_npt_hat(rho, tol),
        "scb" => e_scb(rho, tol),
        "mcb" => e_mcb(rho, tol),
        "dset" => dset_report(rho, tol),
        "dmap" => dmap_report(rho, tol),
        "hashing" => hashing_report(rho),
        other => Err(Error::Domain(format!("unknown state bound {other:?}"))),
    }
}

/// `(1 − p) Φ₂ + p |01⟩⟨01|`: a mixture of a maximally correlated state and a
/// PPT state, used for the two-way sweep.
pub fn twoway_family(p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0,1]")));
    }
    let mut m = max_entangled(2).scale(1.0 - p);
    m[(1, 1)] += c(p, 0.0);
    DensityOperator::new(m, vec![2, 2])
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|e| Error::Domain(format!("bad value {t:?}: {e}"))))
        .collect()
}

/// Parses a named state constructor or reads a JSON file:
///
/// * `mes:d`
/// * `isotropic:d,F`
/// * `basis:dA,dB,i,j` (product basis state `|ij⟩`)
/// * `bilocal:<channel>|<channel>` (noisy maximally entangled state)
/// * `hs:dA,dB,rank,seed`
/// * `twoway:p`
/// * anything else is treated as a path to a density-operator JSON file.
pub fn parse_state(spec: &str) -> Result<DensityOperator> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match name {
        "mes" => Ok(DensityOperator::max_entangled(rest.trim().parse().map_err(|e| Error::Domain(format!("{e}")))?)),
        "isotropic" => {
            let v: Vec<f64> = parse_list(rest)?;
            if v.len() != 2 || v[0] < 2.0 || v[0].fract() != 0.0 {
                return Err(Error::Domain("isotropic expects d,F".into()));
            }
            DensityOperator::isotropic(v[0] as usize, v[1])
        }
        "basis" => {
            let v: Vec<usize> = parse_list(rest)?;
            if v.len() != 4 || v[2] >= v[0] || v[3] >= v[1] {
                return Err(Error::Domain("basis expects dA,dB,i,j with i<dA, j<dB".into()));
            }
            let psi = crate::qmat::ket(v[0] * v[1], v[2] * v[1] + v[3]);
            DensityOperator::pure(&psi, vec![v[0], v[1]])
        }
        "bilocal" => {
            let (a, b) = rest.split_once('|').ok_or_else(|| Error::Domain("bilocal expects A|B".into()))?;
            noisy_mes(&parse_channel(a)?.choi(), &parse_channel(b)?.choi())
        }
        "hs" => {
            let v: Vec<u64> = parse_list(rest)?;
            if v.len() != 4 {
                return Err(Error::Domain("hs expects dA,dB,rank,seed".into()));
            }
            crate::channels::hs_random_state(v[0] as usize, v[1] as usize, v[2] as usize, v[3])
        }
        "twoway" => {
            let v: Vec<f64> = parse_list(rest)?;
            if v.len() != 1 {
                return Err(Error::Domain("twoway expects p".into()));
            }
            twoway_family(v[0])
        }
        _ => {
            let text = std::fs::read_to_string(spec)
                .map_err(|source| Error::Io { path: spec.to_string(), source })?;
            let j: DensityJson = serde_json::from_str(&text)?;
            j.to_density()
        }
    }
}
