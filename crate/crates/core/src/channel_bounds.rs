//! Channel-level bounds: ADG squeezing of Choi matrices, the qubit squeezed
//! capacity bound, closed forms for Pauli channels, diamond-norm
//! ε-(anti)degradability and the continuity bounds built on it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::channels::{ChoiMatrix, KrausChannel, PauliParams};
use crate::error::{Error, Result};
use crate::qmat::{
    c, entropy_scalars, from_real_diag, hermiticity_error, identity, inner_re, kron, matrix_entropy,
    max_abs, min_eigenvalue, partial_trace, shannon_entropy, CMat,
};
use crate::report::{BoundReport, InputDigest, ReportStatus};
use crate::sdp::{solve, HermMap, SdpProblem, SolveStatus, Tolerances, VarId};
use crate::state_bounds::{add_squeeze, certificate, is_adg_general, FreeSet, SqueezeVars};

/// Degradability of the squeezed channel accepted without comment.
pub const DEGRADABLE_OK: f64 = 1e-6;
/// Degradability accepted with a "numerically marginal" flag.
pub const DEGRADABLE_MARGINAL: f64 = 1e-4;
const GRID_POINTS: usize = 101;
const GOLDEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ChannelSqueezeResult {
    /// `2^{-R̃_max}`: largest weight of an anti-degradable channel in a convex
    /// split of N.
    pub free_weight: f64,
    /// Normalized remainder `S`; absent when N is anti-degradable.
    pub squeezed_channel: Option<ChoiMatrix>,
    /// Normalized anti-degradable component `N′`; absent when its weight is 0.
    pub adg_channel: Option<ChoiMatrix>,
    /// `M`, `N`, `K`, `R_A` for the trace-one Choi state `J/d_A`, plus the
    /// support isometries `V`, `U` when `J` is rank deficient.
    pub dual_certificate: BTreeMap<String, CMat>,
    pub status: SolveStatus,
    /// `tr Γ^S` at the optimum (trace-one scale).
    pub primal_value: f64,
    pub dual_value: f64,
    pub max_residual: f64,
}

fn snap(w: f64, tol: &Tolerances) -> f64 {
    let w = w.clamp(0.0, 1.0);
    let eps = 10.0 * tol.gap.max(tol.feas);
    if w < eps {
        0.0
    } else if w > 1.0 - eps {
        1.0
    } else {
        w
    }
}

/// Squeezing SDP on the Choi state `J/d_A`: minimize `tr Γ^S` with
/// `Γ^S + Γ′ = J/d_A`, `Γ′` symmetrically extendible, and
/// `tr_B Γ^S = (tr Γ^S / d_A) I_A` (equivalent to the same condition on `Γ′`
/// because `J` is trace preserving). `Γ^S` and `Γ′` are the `omega` and `tau`
/// variables of the state squeeze, restricted to the support of `J`.
pub fn channel_squeeze_problem(n: &ChoiMatrix) -> Result<SdpProblem> {
    Ok(build_channel_squeeze(n)?.0)
}

fn build_channel_squeeze(n: &ChoiMatrix) -> Result<(SdpProblem, SqueezeVars)> {
    let (da, db) = (n.d_in(), n.d_out());
    let dim = da * db;
    let mut p = SdpProblem::minimize();
    let vars = add_squeeze(&mut p, &n.normalized_matrix(), da, db, FreeSet::Adg)?;
    p.objective_trace(vars.omega, 1.0);
    let v = &vars.support.v;
    let lift = if v.nrows() == v.ncols() { HermMap::Identity } else { HermMap::Conjugate(v.clone()) };
    p.add_constraint(
        "R_A",
        vec![(
            vars.omega,
            lift.then(HermMap::Sum(vec![
                HermMap::trace_times_identity(dim, da).scaled(1.0 / da as f64),
                HermMap::ptrace(&[da, db], &[0]).scaled(-1.0),
            ])),
        )],
        CMat::zeros(da, da),
    );
    Ok((p, vars))
}

pub fn squeeze_channel_adg(n: &ChoiMatrix, tol: &Tolerances) -> Result<ChannelSqueezeResult> {
    if n.d_in() * n.d_out() > 64 {
        return Err(Error::Dimension("channel squeezing supports d_A·d_B ≤ 64".into()));
    }
    let (p, vars) = build_channel_squeeze(n)?;
    let sol = solve(&p, tol)?;
    let dual_certificate = certificate(&p, &sol.duals, &vars.support);
    if sol.status != SolveStatus::Optimal {
        return Ok(ChannelSqueezeResult {
            free_weight: f64::NAN,
            squeezed_channel: None,
            adg_channel: None,
            dual_certificate,
            status: sol.status,
            primal_value: sol.primal_value,
            dual_value: sol.dual_value,
            max_residual: sol.max_residual,
        });
    }
    let (da, db) = (n.d_in(), n.d_out());
    let (gamma_s, gamma_n) = vars.lifted_values(&p, &sol)?;
    let w = snap(gamma_n.trace().re, tol);
    let unnormalize = |m: &CMat| m.scale(da as f64 / m.trace().re);
    let squeezed_channel = if w == 0.0 {
        Some(n.clone())
    } else if w < 1.0 {
        Some(ChoiMatrix::from_approx(&unnormalize(&gamma_s), da, db)?)
    } else {
        None
    };
    let adg_channel = if w > 0.0 { Some(ChoiMatrix::from_approx(&unnormalize(&gamma_n), da, db)?) } else { None };
    Ok(ChannelSqueezeResult {
        free_weight: w,
        squeezed_channel,
        adg_channel,
        dual_certificate,
        status: sol.status,
        primal_value: sol.primal_value,
        dual_value: sol.dual_value,
        max_residual: sol.max_residual,
    })
}

/// Dual variables of the channel squeezing SDP.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDual {
    pub m: CMat,
    pub n: CMat,
    pub k: CMat,
    pub r: CMat,
}

/// How well a [`ChannelDual`] satisfies the dual constraints. Feasibility
/// means all three minimum eigenvalues are nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCheck {
    /// `tr[M J/d_A]`.
    pub objective: f64,
    /// λ_min of `(1 − tr R/d_A) I − M + R ⊗ I_B`.
    pub slack_s: f64,
    /// λ_min of `−M − N − K`.
    pub slack_n: f64,
    /// λ_min of `N ⊗ I_E + P_BE (K ⊗ I_E) P_BE†`.
    pub slack_ext: f64,
}

impl DualCheck {
    pub fn min_slack(&self) -> f64 {
        self.slack_s.min(self.slack_n).min(self.slack_ext)
    }
}

pub fn check_channel_dual(j: &ChoiMatrix, dual: &ChannelDual) -> Result<DualCheck> {
    let (da, db) = (j.d_in(), j.d_out());
    let dim = da * db;
    if dual.m.nrows() != dim || dual.n.nrows() != dim || dual.k.nrows() != dim || dual.r.nrows() != da {
        return Err(Error::Dimension("dual certificate has the wrong shape".into()));
    }
    let tr_r = dual.r.trace().re;
    let s = identity(dim).scale(1.0 - tr_r / da as f64) - &dual.m + kron(&dual.r, &identity(db));
    let nn = -(&dual.m + &dual.n + &dual.k);
    let dims = [da, db, db];
    let ext = HermMap::ptrace(&dims, &[0, 1]).adjoint(&dual.n, dim * db)?
        + HermMap::ptrace(&dims, &[0, 2]).adjoint(&dual.k, dim * db)?;
    Ok(DualCheck {
        objective: inner_re(&dual.m, &j.normalized_matrix()),
        slack_s: min_eigenvalue(&s),
        slack_n: min_eigenvalue(&nn),
        slack_ext: min_eigenvalue(&ext),
    })
}

/// Closed-form dual optimum for a Pauli channel with dominant `p0` and all
/// `pᵢ > 0`: `M` in the Bell-diagonal block form with parameters η, ξ, ζ,
/// `N = K = −M/2`, `R = 0`.
pub fn pauli_dual_certificate(p: &PauliParams) -> Result<ChannelDual> {
    let [p0, p1, p2, p3] = p.probs();
    if p1 <= 0.0 || p2 <= 0.0 || p3 <= 0.0 || p0 < p1.max(p2).max(p3) {
        return Err(Error::Domain("certificate needs p0 ≥ pᵢ > 0".into()));
    }
    let (s1, s2, s3) = (p1.sqrt(), p2.sqrt(), p3.sqrt());
    let eta = -(s1 + s2) / (2.0 * s3);
    let xi = -(s1 + s3) / (2.0 * s2) - (s2 + s3) / (2.0 * s1) - 1.0;
    let zeta = (s1 + s3) / (2.0 * s2) - (s2 + s3) / (2.0 * s1);
    let z = 0.0;
    let m = CMat::from_row_slice(
        4,
        4,
        &[eta, z, z, 1.0 - eta, z, xi, zeta, z, z, zeta, xi, z, 1.0 - eta, z, z, eta].map(|x| c(x, 0.0)),
    );
    let half = m.scale(-0.5);
    Ok(ChannelDual { m, n: half.clone(), k: half, r: CMat::zeros(2, 2) })
}

/// Closed-form ADG weight of a Pauli channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliWeight {
    /// `min(raw, 1)`.
    pub weight: f64,
    /// `(√p₁+√p₂)² + (√p₂+√p₃)² + (√p₁+√p₃)²`; ≥ 1 signals an anti-degradable channel.
    pub raw: f64,
}

pub fn pauli_adg_weight(p: &PauliParams) -> Result<PauliWeight> {
    let [p0, p1, p2, p3] = p.probs();
    if p0 < p1.max(p2).max(p3) {
        return Err(Error::Domain(format!("p0 = {p0} is not the dominant probability")));
    }
    let (s1, s2, s3) = (p1.sqrt(), p2.sqrt(), p3.sqrt());
    let raw = (s1 + s2).powi(2) + (s2 + s3).powi(2) + (s1 + s3).powi(2);
    Ok(PauliWeight { weight: raw.min(1.0), raw })
}

/// `max(0, 1 − Σ_{i<j, i,j≥1} (√pᵢ+√pⱼ)²)`.
pub fn no_cloning_bound(p: &PauliParams) -> f64 {
    let [_, p1, p2, p3] = p.probs();
    let (s1, s2, s3) = (p1.sqrt(), p2.sqrt(), p3.sqrt());
    (1.0 - (s1 + s2).powi(2) - (s2 + s3).powi(2) - (s1 + s3).powi(2)).max(0.0)
}

/// `3p₀ + p₃ − √(8(p₃ − p₀p₃ − p₃²)) − 2`, clamped at 0.
pub fn covariant_pauli_qsqz(p0: f64, p3: f64) -> Result<f64> {
    let p = PauliParams::covariant(p0, p3)?;
    if p0 < p.p(1).max(p3) {
        return Err(Error::Domain(format!("p0 = {p0} is not dominant")));
    }
    let inner = (8.0 * (p3 - p0 * p3 - p3 * p3)).max(0.0);
    Ok((3.0 * p0 + p3 - inner.sqrt() - 2.0).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliHashing {
    /// `max(0, raw)`.
    pub value: f64,
    /// `1 − H(p⃗)`.
    pub raw: f64,
}

pub fn pauli_hashing(p: &PauliParams) -> PauliHashing {
    let raw = 1.0 - shannon_entropy(&p.probs());
    PauliHashing { value: raw.max(0.0), raw }
}

/// Recovers Pauli probabilities from a qubit Choi matrix, if it is Bell-diagonal.
pub fn pauli_params_of(j: &ChoiMatrix) -> Option<PauliParams> {
    if j.d_in() != 2 || j.d_out() != 2 {
        return None;
    }
    let m = j.matrix();
    let probs = [
        (m[(0, 0)].re + m[(0, 3)].re) / 2.0,
        (m[(1, 1)].re + m[(1, 2)].re) / 2.0,
        (m[(1, 1)].re - m[(1, 2)].re) / 2.0,
        (m[(0, 0)].re - m[(0, 3)].re) / 2.0,
    ];
    let p = PauliParams::new(probs.map(|x| x.max(0.0))).ok()?;
    let rebuilt = crate::channels::pauli(&p, false).ok()?.choi();
    (max_abs(&(rebuilt.matrix() - m)) < 1e-9).then_some(p)
}

/// `X ↦ J_{D∘N}` for fixed `N` given by Kraus operators `Lⱼ` (`d_B × d_A`)
/// and variable `D: B → E` with Choi on `B ⊗ E`:
/// `J_{D∘N} = Σⱼ (Lⱼᵀ ⊗ I_E) J_D (Lⱼᵀ ⊗ I_E)†`.
pub fn link_map(first: &KrausChannel, second_out: usize) -> HermMap {
    HermMap::Sum(
        first
            .ops()
            .iter()
            .map(|l| HermMap::Conjugate(kron(&l.transpose(), &identity(second_out))))
            .collect(),
    )
}

/// `½‖Δ‖_⋄` for a trace-annihilating Hermiticity-preserving map with Choi
/// matrix `delta` (e.g. a difference of two channels): maximize
/// `tr[J(Δ) W]` over `0 ⪯ W ⪯ ρ_A ⊗ I_B`, ρ a density operator.
pub fn diamond_norm_half(delta: &CMat, d_in: usize, d_out: usize, tol: &Tolerances) -> Result<f64> {
    let dim = d_in * d_out;
    if delta.nrows() != dim || delta.ncols() != dim {
        return Err(Error::Dimension(format!("Choi difference must be {dim}x{dim}")));
    }
    let herm = hermiticity_error(delta);
    if herm > 1e-10 {
        return Err(Error::Domain(format!("Choi difference is not Hermitian ({herm:.2e})")));
    }
    let marginal = partial_trace(delta, &[d_in, d_out], &[0])?;
    if max_abs(&marginal) > 1e-8 {
        return Err(Error::Domain("map is not trace-annihilating".into()));
    }
    let mut p = SdpProblem::maximize();
    let w = p.psd("W", dim);
    let rho = p.psd("rho", d_in);
    let slack = p.psd("slack", dim);
    p.set_objective(w, delta.clone());
    p.add_constraint(
        "W + slack = rho ⊗ I",
        vec![(w, HermMap::Identity), (slack, HermMap::Identity), (rho, HermMap::tensor_identity(d_out).scaled(-1.0))],
        CMat::zeros(dim, dim),
    );
    p.add_constraint("tr rho = 1", vec![(rho, HermMap::ptrace(&[d_in], &[]))], identity(1));
    let sol = solve(&p, tol)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!("diamond-norm SDP ended with status {}", sol.status)));
    }
    Ok(sol.primal_value.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Degradable,
    AntiDegradable,
}

#[derive(Debug, Clone)]
pub struct EpsDegradability {
    pub epsilon: f64,
    /// Optimal `D: B → E` (degradable) or `A: E → B` (anti-degradable).
    pub witness_map: Option<ChoiMatrix>,
    pub direction: Direction,
    pub status: SolveStatus,
}

/// Watrous dual for `min_X ½‖T − X∘F‖_⋄` over channels `X`, where `F` is the
/// channel applied first and `T` the target, both from the same input:
/// minimize μ with `Z ⪰ 0`, `Z ⪰ J_T − J_{X∘F}`, `μ I ⪰ tr_out Z`.
fn eps_problem(first: &KrausChannel, target: &ChoiMatrix) -> (SdpProblem, VarId) {
    let d_in = first.d_in();
    let mid = first.d_out();
    let d_out = target.d_out();
    let dim = d_in * d_out;
    let mut p = SdpProblem::minimize();
    let mu = p.free("mu", 1);
    let x = p.psd("X", mid * d_out);
    let z = p.psd("Z", dim);
    let s1 = p.psd("slack_Z", dim);
    let s2 = p.psd("slack_mu", d_in);
    p.objective_trace(mu, 1.0);
    p.add_constraint(
        "Z - slack = J_T - J_XF",
        vec![(z, HermMap::Identity), (s1, HermMap::Scale(-1.0)), (x, link_map(first, d_out))],
        target.matrix().clone(),
    );
    p.add_constraint(
        "mu I - tr_out Z - slack = 0",
        vec![
            (mu, HermMap::Kron { left: d_in, right: 1 }),
            (z, HermMap::ptrace(&[d_in, d_out], &[0]).scaled(-1.0)),
            (s2, HermMap::Scale(-1.0)),
        ],
        CMat::zeros(d_in, d_in),
    );
    p.add_constraint("X trace preserving", vec![(x, HermMap::ptrace(&[mid, d_out], &[0]))], identity(mid));
    (p, x)
}

fn eps_solve(first: &KrausChannel, target: &ChoiMatrix, direction: Direction, tol: &Tolerances) -> Result<EpsDegradability> {
    let (p, x) = eps_problem(first, target);
    let sol = solve(&p, tol)?;
    if sol.status != SolveStatus::Optimal {
        return Ok(EpsDegradability { epsilon: f64::NAN, witness_map: None, direction, status: sol.status });
    }
    let name = &p.var(x).name;
    let witness = ChoiMatrix::from_approx(sol.value(name), first.d_out(), target.d_out()).ok();
    Ok(EpsDegradability { epsilon: sol.primal_value.clamp(0.0, 1.0), witness_map: witness, direction, status: sol.status })
}

/// `min_D ½‖N^c − D∘N‖_⋄` over channels `D: B → E`.
pub fn eps_degradable(n: &KrausChannel, tol: &Tolerances) -> Result<EpsDegradability> {
    let n = n.minimal()?;
    let nc = n.complementary();
    eps_solve(&n, &nc.choi(), Direction::Degradable, tol)
}

/// `min_A ½‖N − A∘N^c‖_⋄` over channels `A: E → B`.
pub fn eps_antidegradable(n: &KrausChannel, tol: &Tolerances) -> Result<EpsDegradability> {
    let n = n.minimal()?;
    let nc = n.complementary();
    eps_solve(&nc, &n.choi(), Direction::AntiDegradable, tol)
}

/// `I_c(ρ_p, S) = H(S(ρ_p)) − H(S^c(ρ_p))` for `ρ_p = diag(p, 1−p)`.
pub fn coherent_info_diag(s: &KrausChannel, p: f64) -> Result<f64> {
    let rho = from_real_diag(&[p, 1.0 - p]);
    let out = s.apply_matrix(&rho);
    let env = s.complementary().apply_matrix(&rho);
    Ok(matrix_entropy(&crate::qmat::hermitian_part(&out))? - matrix_entropy(&crate::qmat::hermitian_part(&env))?)
}

/// Maximizes `I_c(diag(p, 1−p), S)` over `p ∈ [0, 1]`: a 101-point grid
/// followed by golden-section refinement around the best grid point.
pub fn q1_degradable_diag(s: &KrausChannel) -> Result<(f64, f64)> {
    if s.d_in() != 2 {
        return Err(Error::Dimension("diagonal-input maximization is for qubit inputs".into()));
    }
    let f = |p: f64| coherent_info_diag(s, p);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..GRID_POINTS {
        let p = k as f64 / (GRID_POINTS - 1) as f64;
        let v = f(p)?;
        if v > best.0 {
            best = (v, p);
        }
    }
    let step = 1.0 / (GRID_POINTS - 1) as f64;
    let (mut a, mut b) = ((best.1 - step).max(0.0), (best.1 + step).min(1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > GOLDEN_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    let pm = (a + b) / 2.0;
    let vm = f(pm)?;
    Ok(if vm >= best.0 { (vm, pm) } else { best })
}

fn channel_digest(bound: &str, n: &ChoiMatrix) -> String {
    InputDigest::new(bound).ints(&[n.d_in(), n.d_out()]).matrix(n.matrix()).finish()
}

/// `(1 − 2^{-R̃}) · max_p I_c(diag(p, 1−p), S)` for qubit channels, with the
/// squeezed channel's degradability verified first.
pub fn q_sqz_qubit(n: &ChoiMatrix, tol: &Tolerances) -> Result<BoundReport> {
    let start = Instant::now();
    let name = "qsqz";
    let digest = channel_digest(name, n);
    if n.d_in() != 2 || n.d_out() != 2 {
        return Ok(BoundReport::failed(name, ReportStatus::NotApplicable, tol.feas, "squeezed capacity bound is qubit-only")
            .with_digest(digest));
    }
    let sq = squeeze_channel_adg(n, tol)?;
    if sq.status != SolveStatus::Optimal {
        return Ok(BoundReport::failed(name, sq.status.into(), tol.feas, "channel squeezing SDP failed").with_digest(digest));
    }
    let Some(s) = sq.squeezed_channel.as_ref().filter(|_| sq.free_weight < 1.0) else {
        return Ok(BoundReport::new(name, 0.0, ReportStatus::Optimal, tol.feas).with_digest(digest).with_runtime(start));
    };
    let sk = s.to_kraus()?;
    let eps = eps_degradable(&sk, tol)?;
    if eps.status != SolveStatus::Optimal {
        return Ok(BoundReport::failed(name, eps.status.into(), tol.feas, "degradability check failed").with_digest(digest));
    }
    let (q1, _) = q1_degradable_diag(&sk)?;
    let value = (1.0 - sq.free_weight) * q1.max(0.0);
    let report = if eps.epsilon <= DEGRADABLE_OK {
        BoundReport::new(name, value, ReportStatus::Optimal, tol.feas)
    } else if eps.epsilon <= DEGRADABLE_MARGINAL {
        BoundReport::new(name, value, ReportStatus::Marginal, tol.feas)
            .with_note(format!("squeezed channel is only {:.2e}-degradable", eps.epsilon))
    } else {
        BoundReport::new(name, value, ReportStatus::NumericalFailure, tol.feas)
            .with_note(format!("squeezed channel is not degradable (epsilon {:.2e})", eps.epsilon))
    };
    Ok(report.with_digest(digest).with_runtime(start))
}

fn log2_or_zero(x: usize) -> f64 {
    if x <= 1 {
        0.0
    } else {
        (x as f64).log2()
    }
}

/// `ε log(d_E − 1) + h(ε) + 2ε log d_E + g(ε)`.
pub fn conti_deg_penalty(eps: f64, d_e: usize) -> Result<f64> {
    let (h, g) = entropy_scalars(eps)?;
    Ok(eps * log2_or_zero(d_e.saturating_sub(1)) + h + 2.0 * eps * log2_or_zero(d_e) + g)
}

/// `ε log(|B| − 1) + 2ε log|B| + h(ε) + g(ε)`.
pub fn conti_adg_formula(eps: f64, d_b: usize) -> Result<f64> {
    let (h, g) = entropy_scalars(eps)?;
    Ok(eps * log2_or_zero(d_b.saturating_sub(1)) + 2.0 * eps * log2_or_zero(d_b) + h + g)
}

pub fn q_conti_adg(n: &KrausChannel, tol: &Tolerances) -> Result<BoundReport> {
    let start = Instant::now();
    let name = "conti-adg";
    let digest = channel_digest(name, &n.choi());
    let e = eps_antidegradable(n, tol)?;
    if e.status != SolveStatus::Optimal {
        return Ok(BoundReport::failed(name, e.status.into(), tol.feas, "eps-antidegradability SDP failed").with_digest(digest));
    }
    let v = conti_adg_formula(e.epsilon, n.d_out())?;
    Ok(BoundReport::new(name, v, ReportStatus::Optimal, tol.feas).with_digest(digest).with_runtime(start))
}

/// Continuity bound around degradable channels, qubit channels only. When
/// the channel is not degradable to within [`DEGRADABLE_OK`], the single-letter
/// term is evaluated on diagonal inputs of N itself and the report is flagged.
pub fn q_conti_deg(n: &KrausChannel, tol: &Tolerances) -> Result<BoundReport> {
    let start = Instant::now();
    let name = "conti-deg";
    let digest = channel_digest(name, &n.choi());
    if n.d_in() != 2 || n.d_out() != 2 {
        return Ok(BoundReport::failed(name, ReportStatus::NotApplicable, tol.feas, "only qubit channels are supported")
            .with_digest(digest));
    }
    let minimal = n.minimal()?;
    let e = eps_degradable(&minimal, tol)?;
    if e.status != SolveStatus::Optimal {
        return Ok(BoundReport::failed(name, e.status.into(), tol.feas, "eps-degradability SDP failed").with_digest(digest));
    }
    let (q1, _) = q1_degradable_diag(&minimal)?;
    let v = q1 + conti_deg_penalty(e.epsilon, minimal.ops().len())?;
    let report = if e.epsilon <= DEGRADABLE_OK {
        BoundReport::new(name, v, ReportStatus::Optimal, tol.feas)
    } else {
        BoundReport::new(name, v, ReportStatus::Marginal, tol.feas)
            .with_note("single-letter term evaluated on diagonal inputs of a non-degradable channel")
    };
    Ok(report.with_digest(digest).with_runtime(start))
}

fn require_pauli(n: &ChoiMatrix, bound: &str) -> Result<PauliParams> {
    pauli_params_of(n).ok_or_else(|| Error::NotApplicable(format!("{bound} needs a Pauli channel")))
}

/// Dispatches a channel bound by its CLI name.
pub fn channel_bound(name: &str, n: &KrausChannel, tol: &Tolerances) -> Result<BoundReport> {
    let j = n.choi();
    let analytic = |v: f64| {
        BoundReport::new(name, v, ReportStatus::Analytic, 0.0).with_digest(channel_digest(name, &j))
    };
    match name {
        "qsqz" => q_sqz_qubit(&j, tol),
        "nocloning" => Ok(analytic(no_cloning_bound(&require_pauli(&j, name)?))),
        "covpauli" => {
            let p = require_pauli(&j, name)?;
            if (p.p(1) - p.p(2)).abs() > 1e-12 {
                return Err(Error::Domain("covpauli needs p1 = p2".into()));
            }
            Ok(analytic(covariant_pauli_qsqz(p.p(0), p.p(3))?))
        }
        "hashing" => Ok(analytic(pauli_hashing(&require_pauli(&j, name)?).value)),
        "conti-adg" => q_conti_adg(n, tol),
        "conti-deg" => q_conti_deg(n, tol),
        "eps-deg" | "eps-adg" => {
            let start = Instant::now();
            let e = if name == "eps-deg" { eps_degradable(n, tol)? } else { eps_antidegradable(n, tol)? };
            let r = if e.status == SolveStatus::Optimal {
                BoundReport::new(name, e.epsilon, ReportStatus::Optimal, tol.feas)
            } else {
                BoundReport::failed(name, e.status.into(), tol.feas, "SDP failed")
            };
            Ok(r.with_digest(channel_digest(name, &j)).with_runtime(start))
        }
        other => Err(Error::Domain(format!("unknown channel bound {other:?}"))),
    }
}

/// Symmetric-extension test on the normalized Choi state.
pub fn is_adg_channel(n: &ChoiMatrix, tol: &Tolerances) -> Result<bool> {
    is_adg_general(&n.normalized_state()?, tol)
}
