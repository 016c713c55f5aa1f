//! Quantum channels in Kraus and Choi form, the standard noise models, and
//! seeded random ensembles.
//!
//! Choi matrices use the unnormalized convention
//! `J = Σᵢⱼ |i⟩⟨j| ⊗ N(|i⟩⟨j|)` with the input system first, so `tr J = d_in`.
//! Randomness comes from ChaCha8 seeded with a `u64`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    c, hermitian_eigen, hermitian_fn, hermitian_part, identity, kron, max_abs, max_abs_diff,
    min_eigenvalue, partial_trace, pauli_x, pauli_y, pauli_z, CMat, CMatJson, DensityOperator,
    PSD_TOL,
};

/// Completeness tolerance for Kraus sets.
pub const KRAUS_TOL: f64 = 1e-10;
/// Choi eigenvalues at or below this are dropped when extracting Kraus operators.
pub const KRAUS_RANK_TOL: f64 = 1e-9;
const CHOI_TP_TOL: f64 = 1e-9;
const PROB_TOL: f64 = 1e-12;

pub type Rng64 = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    d_in: usize,
    d_out: usize,
    ops: Vec<CMat>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::Domain("empty Kraus set".into()))?;
        let (d_out, d_in) = first.shape();
        if d_in == 0 || d_out == 0 {
            return Err(Error::Dimension("zero-dimensional Kraus operator".into()));
        }
        if ops.iter().any(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::Dimension("Kraus operators have different shapes".into()));
        }
        let mut sum = CMat::zeros(d_in, d_in);
        for k in &ops {
            sum += k.adjoint() * k;
        }
        let err = max_abs_diff(&sum, &identity(d_in));
        if err > KRAUS_TOL {
            return Err(Error::Domain(format!("Kraus completeness violated by {err:.3e}")));
        }
        Ok(Self { d_in, d_out, ops })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn identity(d: usize) -> Self {
        Self { d_in: d, d_out: d, ops: vec![identity(d)] }
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        check_unitary(&u)?;
        Self::new(vec![u])
    }

    /// Applies the channel to an arbitrary operator (linear extension).
    pub fn apply_matrix(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.ops {
            out += k * m * k.adjoint();
        }
        out
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.d_in {
            return Err(Error::Dimension(format!("state dim {} vs channel input {}", rho.dim(), self.d_in)));
        }
        DensityOperator::from_approx(&self.apply_matrix(rho.matrix()), vec![self.d_out])
    }

    pub fn choi(&self) -> ChoiMatrix {
        choi_from_kraus(self)
    }

    /// Kraus operators of minimal number, extracted from the Choi matrix.
    pub fn minimal(&self) -> Result<Self> {
        kraus_from_choi(&self.choi())
    }

    pub fn complementary(&self) -> KrausChannel {
        complementary(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d_in: usize,
    d_out: usize,
    matrix: CMat,
}

impl ChoiMatrix {
    pub fn new(matrix: CMat, d_in: usize, d_out: usize) -> Result<Self> {
        if d_in == 0 || d_out == 0 || matrix.nrows() != d_in * d_out || matrix.ncols() != d_in * d_out {
            return Err(Error::Dimension(format!(
                "Choi matrix {}x{} for d_in={d_in}, d_out={d_out}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = crate::qmat::hermiticity_error(&matrix);
        if herm > 1e-10 {
            return Err(Error::Domain(format!("Choi matrix not Hermitian ({herm:.2e})")));
        }
        let lmin = min_eigenvalue(&matrix);
        if lmin < -PSD_TOL {
            return Err(Error::Domain(format!("not completely positive (min eigenvalue {lmin:.3e})")));
        }
        let tb = partial_trace(&matrix, &[d_in, d_out], &[0])?;
        let err = max_abs_diff(&tb, &identity(d_in));
        if err > CHOI_TP_TOL {
            return Err(Error::Domain(format!("not trace preserving (deviation {err:.3e})")));
        }
        Ok(Self { d_in, d_out, matrix })
    }

    /// Projects an approximately valid Choi matrix (e.g. solver output) onto
    /// a CPTP map: negative eigenvalues are clipped and trace preservation is
    /// restored by `(T^{-1/2} ⊗ I) J (T^{-1/2} ⊗ I)` with `T = tr_out J`.
    pub fn from_approx(matrix: &CMat, d_in: usize, d_out: usize) -> Result<Self> {
        if matrix.nrows() != d_in * d_out {
            return Err(Error::Dimension("Choi matrix dimension mismatch".into()));
        }
        let psd = hermitian_fn(&hermitian_part(matrix), |l| l.max(0.0));
        let t = partial_trace(&psd, &[d_in, d_out], &[0])?;
        let tmin = min_eigenvalue(&t);
        if tmin <= 0.0 {
            return Err(Error::Domain("input marginal of Choi matrix is singular".into()));
        }
        let t_inv_sqrt = hermitian_fn(&t, |l| 1.0 / l.sqrt());
        let s = kron(&t_inv_sqrt, &identity(d_out));
        let fixed = hermitian_part(&(&s * psd * &s));
        Self::new(fixed, d_in, d_out)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// `J / d_in`, a density operator on input ⊗ output.
    pub fn normalized_matrix(&self) -> CMat {
        self.matrix.unscale(self.d_in as f64)
    }

    pub fn normalized_state(&self) -> Result<DensityOperator> {
        DensityOperator::from_approx(&self.normalized_matrix(), vec![self.d_in, self.d_out])
    }

    /// Block `N(|i⟩⟨j|)`.
    pub fn block(&self, i: usize, j: usize) -> CMat {
        let d = self.d_out;
        self.matrix.view((i * d, j * d), (d, d)).into_owned()
    }

    /// Linear action on an arbitrary `d_in × d_in` operator.
    pub fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        if m.nrows() != self.d_in || m.ncols() != self.d_in {
            return Err(Error::Dimension(format!("operator dim {} vs channel input {}", m.nrows(), self.d_in)));
        }
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for i in 0..self.d_in {
            for j in 0..self.d_in {
                let v = m[(i, j)];
                if v != c(0.0, 0.0) {
                    out += self.block(i, j) * v;
                }
            }
        }
        Ok(out)
    }

    pub fn to_kraus(&self) -> Result<KrausChannel> {
        kraus_from_choi(self)
    }

    pub fn rank(&self) -> usize {
        hermitian_eigen(&self.matrix).eigenvalues.iter().filter(|&&l| l > KRAUS_RANK_TOL).count()
    }
}

pub fn choi_from_kraus(k: &KrausChannel) -> ChoiMatrix {
    let (di, dout) = (k.d_in, k.d_out);
    let mut j = CMat::zeros(di * dout, di * dout);
    for op in &k.ops {
        // |K⟩⟩ = Σ_a |a⟩ ⊗ K|a⟩
        let v = crate::qmat::CVec::from_fn(di * dout, |idx, _| op[(idx % dout, idx / dout)]);
        j += &v * v.adjoint();
    }
    ChoiMatrix { d_in: di, d_out: dout, matrix: hermitian_part(&j) }
}

pub fn kraus_from_choi(j: &ChoiMatrix) -> Result<KrausChannel> {
    let s = hermitian_eigen(&j.matrix);
    if s.min() < -PSD_TOL {
        return Err(Error::Domain(format!("not completely positive (min eigenvalue {:.3e})", s.min())));
    }
    let (di, dout) = (j.d_in, j.d_out);
    let mut ops = Vec::new();
    for (k, &l) in s.eigenvalues.iter().enumerate() {
        if l <= KRAUS_RANK_TOL {
            continue;
        }
        let v = s.eigenvectors.column(k);
        let amp = l.sqrt();
        ops.push(CMat::from_fn(dout, di, |b, a| v[a * dout + b] * amp));
    }
    if ops.is_empty() {
        return Err(Error::Domain("Choi matrix has no support".into()));
    }
    // Truncation can perturb completeness slightly; restore it exactly.
    let mut sum = CMat::zeros(di, di);
    for op in &ops {
        sum += op.adjoint() * op;
    }
    let fix = hermitian_fn(&sum, |l| 1.0 / l.sqrt());
    let ops = ops.into_iter().map(|op| op * &fix).collect();
    KrausChannel::new(ops)
}

/// Complementary channel to the environment spanned by the Kraus index:
/// `(N^c(ρ))_{mn} = tr[K_n† K_m ρ]`.
pub fn complementary(k: &KrausChannel) -> KrausChannel {
    let r = k.ops.len();
    let ops = (0..k.d_out)
        .map(|b| CMat::from_fn(r, k.d_in, |m, a| k.ops[m][(b, a)]))
        .collect();
    KrausChannel { d_in: k.d_in, d_out: r, ops }
}

pub fn apply(j: &ChoiMatrix, rho: &DensityOperator) -> Result<DensityOperator> {
    let out = j.apply_matrix(rho.matrix())?;
    DensityOperator::from_approx(&out, vec![j.d_out])
}

/// Choi matrix of `j2 ∘ j1`.
pub fn compose(j2: &ChoiMatrix, j1: &ChoiMatrix) -> Result<ChoiMatrix> {
    if j1.d_out != j2.d_in {
        return Err(Error::Dimension(format!("cannot compose {}→{} after {}→{}", j2.d_in, j2.d_out, j1.d_in, j1.d_out)));
    }
    let (di, dout) = (j1.d_in, j2.d_out);
    let mut m = CMat::zeros(di * dout, di * dout);
    for i in 0..di {
        for jj in 0..di {
            let blk = j2.apply_matrix(&j1.block(i, jj))?;
            m.view_mut((i * dout, jj * dout), (dout, dout)).copy_from(&blk);
        }
    }
    ChoiMatrix::new(hermitian_part(&m), di, dout)
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{what} = {p} outside [0,1]")));
    }
    Ok(())
}

/// `ρ ↦ (1−p) ρ + p I/d`.
pub fn depolarizing(d: usize, p: f64) -> Result<KrausChannel> {
    check_prob(p, "depolarizing parameter")?;
    if d == 0 {
        return Err(Error::Dimension("dimension 0".into()));
    }
    // Kraus set from the Weyl–Heisenberg basis: (1 − p + p/d²) on the identity,
    // p/d² on each of the other d² − 1 unitaries.
    let omega = std::f64::consts::TAU / d as f64;
    let mut ops = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let w = if a == 0 && b == 0 { 1.0 - p + p / (d * d) as f64 } else { p / (d * d) as f64 };
            if w == 0.0 {
                continue;
            }
            let u = CMat::from_fn(d, d, |row, col| {
                if row == (col + a) % d {
                    let ph = omega * (b * col) as f64;
                    c(ph.cos(), ph.sin())
                } else {
                    c(0.0, 0.0)
                }
            });
            ops.push(u * c(w.sqrt(), 0.0));
        }
    }
    KrausChannel::new(ops)
}

/// Qubit amplitude damping with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_prob(gamma, "damping rate")?;
    let k0 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)]);
    let k1 = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    KrausChannel::new(vec![k0, k1])
}

/// Multilevel amplitude damping. `rates[(j, i)]` for `i < j` is the decay rate
/// from level `j` to level `i`; entries on or above the diagonal are ignored.
pub fn mad_channel(d: usize, rates: &DMatrix<f64>) -> Result<KrausChannel> {
    if d < 2 || rates.nrows() != d || rates.ncols() != d {
        return Err(Error::Dimension(format!("rate matrix must be {d}x{d} with d ≥ 2")));
    }
    let mut ops = Vec::new();
    let mut k0 = CMat::zeros(d, d);
    k0[(0, 0)] = c(1.0, 0.0);
    for j in 1..d {
        let mut xi = 0.0;
        for i in 0..j {
            let g = rates[(j, i)];
            check_prob(g, &format!("rate γ_{j}{i}"))?;
            xi += g;
            if g > 0.0 {
                let mut k = CMat::zeros(d, d);
                k[(i, j)] = c(g.sqrt(), 0.0);
                ops.push(k);
            }
        }
        if xi > 1.0 + PROB_TOL {
            return Err(Error::Domain(format!("total decay from level {j} is {xi} > 1")));
        }
        k0[(j, j)] = c((1.0 - xi).max(0.0).sqrt(), 0.0);
    }
    ops.insert(0, k0);
    KrausChannel::new(ops)
}

/// Lower-triangular rate matrix from `(j, i, γ)` triples.
pub fn mad_rates(d: usize, entries: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    for &(j, i, g) in entries {
        m[(j, i)] = g;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliParams([f64; 4]);

impl PauliParams {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Domain(format!("Pauli probabilities {p:?} must be nonnegative")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > PROB_TOL {
            return Err(Error::Domain(format!("Pauli probabilities sum to {s}")));
        }
        Ok(Self(p))
    }

    /// Covariant family `p1 = p2 = (1 − p0 − p3)/2`.
    pub fn covariant(p0: f64, p3: f64) -> Result<Self> {
        let p1 = (1.0 - p0 - p3) / 2.0;
        if p1 < -PROB_TOL {
            return Err(Error::Domain(format!("p0 + p3 = {} exceeds 1", p0 + p3)));
        }
        Self::new([p0, p1.max(0.0), p1.max(0.0), p3])
    }

    pub fn probs(&self) -> [f64; 4] {
        self.0
    }

    pub fn p(&self, i: usize) -> f64 {
        self.0[i]
    }
}

pub fn pauli_matrices() -> [CMat; 4] {
    [identity(2), pauli_x(), pauli_y(), pauli_z()]
}

/// `ρ ↦ Σ pᵢ σᵢ ρ σᵢ` with four Kraus operators `√pᵢ σᵢ`.
pub fn pauli(p: &PauliParams, covariant: bool) -> Result<KrausChannel> {
    if covariant && (p.0[1] - p.0[2]).abs() > PROB_TOL {
        return Err(Error::Domain(format!("covariant Pauli channel needs p1 = p2, got {} and {}", p.0[1], p.0[2])));
    }
    let ops = pauli_matrices().into_iter().zip(p.0).map(|(s, w)| s * c(w.sqrt(), 0.0)).collect();
    KrausChannel::new(ops)
}

pub fn check_unitary(u: &CMat) -> Result<()> {
    if !u.is_square() || u.nrows() == 0 {
        return Err(Error::Dimension("unitary must be square".into()));
    }
    let err = max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()));
    if err > KRAUS_TOL {
        return Err(Error::Domain(format!("matrix is not unitary (deviation {err:.3e})")));
    }
    Ok(())
}

/// `ρ ↦ Σ pᵢ Uᵢ ρ Uᵢ†`.
pub fn mixed_unitary(unitaries: &[CMat], probs: &[f64]) -> Result<KrausChannel> {
    if unitaries.len() != probs.len() || unitaries.is_empty() {
        return Err(Error::Dimension(format!("{} unitaries for {} probabilities", unitaries.len(), probs.len())));
    }
    if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > PROB_TOL {
        return Err(Error::Domain(format!("invalid probability vector {probs:?}")));
    }
    for u in unitaries {
        check_unitary(u)?;
    }
    let ops = unitaries.iter().zip(probs).map(|(u, &p)| u * c(p.sqrt(), 0.0)).collect();
    KrausChannel::new(ops)
}

fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix,
/// with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary_rng(d: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let z = r[(k, k)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        q.column_mut(k).scale_mut(1.0);
        for i in 0..d {
            q[(i, k)] *= ph;
        }
    }
    q
}

pub fn haar_unitary(d: usize, seed: u64) -> CMat {
    haar_unitary_rng(d, &mut rng_from_seed(seed))
}

/// `GG†/tr(GG†)` with `G` a `(dA·dB) × rank` Ginibre matrix.
pub fn hs_random_state_rng(da: usize, db: usize, rank: usize, rng: &mut impl Rng) -> Result<DensityOperator> {
    let d = da * db;
    if rank == 0 || rank > d {
        return Err(Error::Domain(format!("rank {rank} outside 1..={d}")));
    }
    let g = ginibre(d, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::from_approx(&m.unscale(tr), vec![da, db])
}

pub fn hs_random_state(da: usize, db: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    hs_random_state_rng(da, db, rank, &mut rng_from_seed(seed))
}

/// Random qubit channel with `r` Kraus operators, drawn as a Haar isometry.
pub fn random_channel_rng(d_in: usize, d_out: usize, r: usize, rng: &mut impl Rng) -> Result<KrausChannel> {
    let big = d_out * r;
    if big < d_in {
        return Err(Error::Dimension("isometry needs d_out·r ≥ d_in".into()));
    }
    let u = haar_unitary_rng(big, rng);
    let ops = (0..r)
        .map(|k| CMat::from_fn(d_out, d_in, |b, a| u[(k * d_out + b, a)]))
        .collect();
    let k = KrausChannel { d_in, d_out, ops };
    // renormalize away rounding
    let mut sum = CMat::zeros(d_in, d_in);
    for op in &k.ops {
        sum += op.adjoint() * op;
    }
    let fix = hermitian_fn(&sum, |l| 1.0 / l.sqrt());
    KrausChannel::new(k.ops.into_iter().map(|op| op * &fix).collect())
}

/// `(N_A ⊗ N_B)(Φ_d)`.
pub fn noisy_mes(na: &ChoiMatrix, nb: &ChoiMatrix) -> Result<DensityOperator> {
    if na.d_in != nb.d_in {
        return Err(Error::Dimension(format!("input dims {} and {} differ", na.d_in, nb.d_in)));
    }
    let d = na.d_in;
    let mut m = CMat::zeros(na.d_out * nb.d_out, na.d_out * nb.d_out);
    for i in 0..d {
        for j in 0..d {
            m += kron(&na.block(i, j), &nb.block(i, j));
        }
    }
    DensityOperator::from_approx(&m.unscale(d as f64), vec![na.d_out, nb.d_out])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub kind: String,
    pub d_in: usize,
    pub d_out: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<CMatJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<CMatJson>,
}

impl From<&KrausChannel> for ChannelJson {
    fn from(k: &KrausChannel) -> Self {
        Self {
            kind: "kraus".into(),
            d_in: k.d_in,
            d_out: k.d_out,
            kraus: Some(k.ops.iter().map(CMatJson::from).collect()),
            choi: None,
        }
    }
}

impl From<&ChoiMatrix> for ChannelJson {
    fn from(j: &ChoiMatrix) -> Self {
        Self { kind: "choi".into(), d_in: j.d_in, d_out: j.d_out, kraus: None, choi: Some(CMatJson::from(&j.matrix)) }
    }
}

impl ChannelJson {
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let k = match (self.kind.as_str(), &self.kraus, &self.choi) {
            ("kraus", Some(ops), _) => {
                KrausChannel::new(ops.iter().map(|m| m.to_matrix()).collect::<Result<Vec<_>>>()?)?
            }
            ("choi", _, Some(m)) => ChoiMatrix::new(m.to_matrix()?, self.d_in, self.d_out)?.to_kraus()?,
            (kind, _, _) => return Err(Error::Domain(format!("channel JSON of kind {kind:?} lacks its payload"))),
        };
        if k.d_in != self.d_in || k.d_out != self.d_out {
            return Err(Error::Dimension("declared channel dims do not match payload".into()));
        }
        Ok(k)
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Domain(format!("bad number {t:?}: {e}"))))
        .collect()
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|e| Error::Domain(format!("bad integer {s:?}: {e}")))
}

fn expect_len(v: &[f64], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Domain(format!("{what} takes {n} parameters, got {}", v.len())));
    }
    Ok(())
}

/// Parses a named constructor:
///
/// * `id:d`
/// * `depol:d,p`
/// * `ad:gamma`
/// * `pauli:p0,p1,p2,p3`
/// * `covpauli:p0,p3`
/// * `mad:d:g10,g20,g21,g30,g31,g32,...` (rates row by row, `i < j`)
/// * `mixu:seed:p0,p1,...` (qubit, Haar unitaries)
pub fn parse_channel(spec: &str) -> Result<KrausChannel> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match name {
        "id" | "identity" => Ok(KrausChannel::identity(parse_usize(rest)?)),
        "depol" | "depolarizing" => {
            let v = parse_floats(rest)?;
            expect_len(&v, 2, "depol")?;
            if v[0] < 1.0 || v[0].fract() != 0.0 {
                return Err(Error::Domain(format!("bad dimension {}", v[0])));
            }
            depolarizing(v[0] as usize, v[1])
        }
        "ad" | "amplitude-damping" => {
            let v = parse_floats(rest)?;
            expect_len(&v, 1, "ad")?;
            amplitude_damping(v[0])
        }
        "pauli" => {
            let v = parse_floats(rest)?;
            expect_len(&v, 4, "pauli")?;
            pauli(&PauliParams::new([v[0], v[1], v[2], v[3]])?, false)
        }
        "covpauli" => {
            let v = parse_floats(rest)?;
            expect_len(&v, 2, "covpauli")?;
            pauli(&PauliParams::covariant(v[0], v[1])?, true)
        }
        "mad" => {
            let (d, rates) = rest
                .split_once(':')
                .ok_or_else(|| Error::Domain("mad expects mad:d:rates".into()))?;
            let d = parse_usize(d)?;
            let v = parse_floats(rates)?;
            expect_len(&v, d * (d - 1) / 2, "mad rates")?;
            let mut entries = Vec::new();
            let mut k = 0;
            for j in 1..d {
                for i in 0..j {
                    entries.push((j, i, v[k]));
                    k += 1;
                }
            }
            mad_channel(d, &mad_rates(d, &entries))
        }
        "mixu" => {
            let (seed, probs) = rest
                .split_once(':')
                .ok_or_else(|| Error::Domain("mixu expects mixu:seed:probs".into()))?;
            let seed: u64 = seed.trim().parse().map_err(|e| Error::Domain(format!("bad seed: {e}")))?;
            let probs = parse_floats(probs)?;
            let mut rng = rng_from_seed(seed);
            let us: Vec<CMat> = probs.iter().map(|_| haar_unitary_rng(2, &mut rng)).collect();
            mixed_unitary(&us, &probs)
        }
        other => Err(Error::Domain(format!("unknown channel constructor {other:?}"))),
    }
}

/// Largest entry of the Hermitian part's deviation; convenience for tests.
pub fn choi_distance(a: &ChoiMatrix, b: &ChoiMatrix) -> f64 {
    max_abs(&(a.matrix() - b.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{from_real_diag, ket, max_entangled, outer};
    use proptest::prelude::*;

    fn dm(v: &[f64]) -> DensityOperator {
        DensityOperator::new(from_real_diag(v), vec![v.len()]).unwrap()
    }

    #[test]
    fn choi_examples() {
        let j = KrausChannel::identity(2).choi();
        assert!(max_abs_diff(j.matrix(), &max_entangled(2).scale(2.0)) < 1e-15);
        let dep = depolarizing(2, 1.0).unwrap().choi();
        assert!(max_abs_diff(dep.matrix(), &identity(4).scale(0.5)) < 1e-14);
        let ad = amplitude_damping(1.0).unwrap().choi();
        let want = kron(&identity(2), &from_real_diag(&[1.0, 0.0]));
        assert!(max_abs_diff(ad.matrix(), &want) < 1e-15);
        let tb = partial_trace(ad.matrix(), &[2, 2], &[0]).unwrap();
        assert!(max_abs_diff(&tb, &identity(2)) < 1e-15);
    }

    #[test]
    fn kraus_from_choi_examples() {
        let k = KrausChannel::identity(2).choi().to_kraus().unwrap();
        assert_eq!(k.ops().len(), 1);
        let op = &k.ops()[0];
        let phase = op[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(max_abs_diff(&(op / phase), &identity(2)) < 1e-12);

        let p = pauli(&PauliParams::new([0.5, 0.5, 0.0, 0.0]).unwrap(), false).unwrap();
        let k = p.choi().to_kraus().unwrap();
        assert_eq!(k.ops().len(), 2);
        let mut norms: Vec<f64> = k.ops().iter().map(|o| (o.adjoint() * o).trace().re / 2.0).collect();
        norms.sort_by(f64::total_cmp);
        assert!((norms[0] - 0.5).abs() < 1e-12 && (norms[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn complementary_examples() {
        let c1 = complementary(&KrausChannel::identity(2));
        assert_eq!(c1.d_out(), 1);
        let out = c1.apply_matrix(&from_real_diag(&[0.3, 0.7]));
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-15);

        for gamma in [0.1, 0.3, 0.8] {
            let ad = amplitude_damping(gamma).unwrap();
            let mut got = crate::qmat::eigenvalues_hermitian(ad.complementary().choi().matrix());
            let mut want = crate::qmat::eigenvalues_hermitian(amplitude_damping(1.0 - gamma).unwrap().choi().matrix());
            got.sort_by(f64::total_cmp);
            want.sort_by(f64::total_cmp);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-8);
            }
        }

        let p = [0.4, 0.3, 0.2, 0.1];
        let pc = pauli(&PauliParams::new(p).unwrap(), false).unwrap().complementary();
        assert_eq!(pc.d_out(), 4);
        let mut e = crate::qmat::eigenvalues_hermitian(&pc.apply_matrix(&identity(2).scale(0.5)));
        e.sort_by(|a, b| b.total_cmp(a));
        for (g, w) in e.iter().zip(p) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn complementary_twice_preserves_choi_spectrum() {
        let mut rng = rng_from_seed(7);
        let n = random_channel_rng(2, 2, 3, &mut rng).unwrap();
        let cc = n.complementary().complementary();
        let mut a = crate::qmat::eigenvalues_hermitian(n.choi().matrix());
        let mut b = crate::qmat::eigenvalues_hermitian(cc.choi().matrix());
        a.retain(|&x| x > 1e-9);
        b.retain(|&x| x > 1e-9);
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn apply_examples() {
        let rho = DensityOperator::new(
            CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, -0.2), c(0.1, 0.2), c(0.4, 0.0)]),
            vec![2],
        )
        .unwrap();
        let out = apply(&KrausChannel::identity(2).choi(), &rho).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
        let out = apply(&depolarizing(2, 1.0).unwrap().choi(), &rho).unwrap();
        assert!(max_abs_diff(out.matrix(), &identity(2).scale(0.5)) < 1e-14);
        let p = [0.4, 0.3, 0.2, 0.1];
        let ch = pauli(&PauliParams::new(p).unwrap(), false).unwrap().choi();
        let out = apply(&ch, &dm(&[1.0, 0.0])).unwrap();
        assert!(max_abs_diff(out.matrix(), &from_real_diag(&[0.5, 0.5])) < 1e-14);
        assert!(apply(&ch, &dm(&[0.5, 0.25, 0.25])).is_err());
    }

    #[test]
    fn compose_examples() {
        let id = KrausChannel::identity(2).choi();
        let ad = amplitude_damping(0.3).unwrap().choi();
        assert!(choi_distance(&compose(&id, &ad).unwrap(), &ad) < 1e-14);
        assert!(choi_distance(&compose(&ad, &id).unwrap(), &ad) < 1e-14);
        let (p, q) = (0.2, 0.35);
        let dd = compose(&depolarizing(2, p).unwrap().choi(), &depolarizing(2, q).unwrap().choi()).unwrap();
        assert!(choi_distance(&dd, &depolarizing(2, p + q - p * q).unwrap().choi()) < 1e-14);
        let u = haar_unitary(2, 3);
        let uu = compose(
            &KrausChannel::unitary(u.adjoint()).unwrap().choi(),
            &KrausChannel::unitary(u).unwrap().choi(),
        )
        .unwrap();
        assert!(choi_distance(&uu, &id) < 1e-12);
        assert!(compose(&depolarizing(3, 0.1).unwrap().choi(), &id).is_err());
    }

    #[test]
    fn depolarizing_examples() {
        let rho = dm(&[1.0, 0.0]);
        let out = depolarizing(2, 0.3).unwrap().apply(&rho).unwrap();
        assert!(max_abs_diff(out.matrix(), &from_real_diag(&[0.85, 0.15])) < 1e-14);
        let out = depolarizing(3, 0.0).unwrap().apply(&dm(&[0.2, 0.3, 0.5])).unwrap();
        assert!(max_abs_diff(out.matrix(), &from_real_diag(&[0.2, 0.3, 0.5])) < 1e-14);
        let out = depolarizing(3, 1.0).unwrap().apply(&dm(&[0.2, 0.3, 0.5])).unwrap();
        assert!(max_abs_diff(out.matrix(), &identity(3).scale(1.0 / 3.0)) < 1e-14);
        assert!(depolarizing(2, 1.5).is_err());
    }

    #[test]
    fn amplitude_damping_examples() {
        let one = dm(&[0.0, 1.0]);
        assert!(max_abs_diff(amplitude_damping(0.0).unwrap().apply(&one).unwrap().matrix(), one.matrix()) < 1e-15);
        let out = amplitude_damping(1.0).unwrap().apply(&one).unwrap();
        assert!(max_abs_diff(out.matrix(), &from_real_diag(&[1.0, 0.0])) < 1e-15);
        let out = amplitude_damping(0.1).unwrap().apply(&one).unwrap();
        assert!(max_abs_diff(out.matrix(), &from_real_diag(&[0.1, 0.9])) < 1e-15);
        assert!(amplitude_damping(-0.1).is_err());
        assert_eq!(amplitude_damping(0.4).unwrap().ops().len(), 2);
    }

    #[test]
    fn mad_examples() {
        let zero = mad_channel(3, &DMatrix::zeros(3, 3)).unwrap();
        assert!(choi_distance(&zero.choi(), &KrausChannel::identity(3).choi()) < 1e-15);

        let qutrit = mad_channel(3, &mad_rates(3, &[(1, 0, 0.1), (2, 0, 0.1), (2, 1, 0.0)])).unwrap();
        assert_eq!(qutrit.ops().len(), 3);
        let out = qutrit.apply_matrix(&outer(&ket(3, 2)));
        assert!(max_abs_diff(&out, &from_real_diag(&[0.1, 0.0, 0.9])) < 1e-15);

        let qudit = mad_channel(
            4,
            &mad_rates(4, &[(1, 0, 0.1), (2, 0, 0.1), (3, 0, 0.1), (2, 1, 0.1), (3, 1, 0.0), (3, 2, 0.0)]),
        )
        .unwrap();
        let mut sum = CMat::zeros(4, 4);
        for k in qudit.ops() {
            sum += k.adjoint() * k;
        }
        assert!(max_abs_diff(&sum, &identity(4)) < 1e-12);

        assert!(mad_channel(3, &mad_rates(3, &[(2, 0, 0.6), (2, 1, 0.6)])).is_err());
    }

    #[test]
    fn pauli_examples() {
        let id = pauli(&PauliParams::new([1.0, 0.0, 0.0, 0.0]).unwrap(), false).unwrap();
        assert!(choi_distance(&id.choi(), &KrausChannel::identity(2).choi()) < 1e-15);
        let full = pauli(&PauliParams::new([0.25; 4]).unwrap(), false).unwrap();
        assert!(choi_distance(&full.choi(), &depolarizing(2, 1.0).unwrap().choi()) < 1e-14);
        let cov = PauliParams::covariant(0.8, 0.05).unwrap();
        assert!((cov.p(1) - 0.075).abs() < 1e-15 && (cov.p(2) - 0.075).abs() < 1e-15);
        assert!(pauli(&cov, true).is_ok());
        assert!(pauli(&PauliParams::new([0.7, 0.2, 0.05, 0.05]).unwrap(), true).is_err());
        assert!(PauliParams::new([0.5, 0.5, 0.1, -0.1]).is_err());
        assert!(PauliParams::new([0.5, 0.5, 0.1, 0.0]).is_err());
    }

    #[test]
    fn pauli_choi_matches_explicit_matrix() {
        let p = [0.58, 0.22, 0.15, 0.05];
        let j = pauli(&PauliParams::new(p).unwrap(), false).unwrap().choi().normalized_matrix();
        let h = |v: f64| c(v / 2.0, 0.0);
        let z = c(0.0, 0.0);
        let want = CMat::from_row_slice(
            4,
            4,
            &[
                h(p[0] + p[3]), z, z, h(p[0] - p[3]),
                z, h(p[1] + p[2]), h(p[1] - p[2]), z,
                z, h(p[1] - p[2]), h(p[1] + p[2]), z,
                h(p[0] - p[3]), z, z, h(p[0] + p[3]),
            ],
        );
        assert!(max_abs_diff(&j, &want) < 1e-12);
    }

    #[test]
    fn mixed_unitary_examples() {
        let u = haar_unitary(2, 11);
        let single = mixed_unitary(&[u.clone()], &[1.0]).unwrap();
        assert!(choi_distance(&single.choi(), &KrausChannel::unitary(u).unwrap().choi()) < 1e-14);
        let p = PauliParams::new([0.4, 0.3, 0.2, 0.1]).unwrap();
        let mu = mixed_unitary(&pauli_matrices(), &p.probs()).unwrap();
        assert!(choi_distance(&mu.choi(), &pauli(&p, false).unwrap().choi()) < 1e-15);
        let mut rng = rng_from_seed(5);
        let us: Vec<CMat> = (0..4).map(|_| haar_unitary_rng(2, &mut rng)).collect();
        let ch = mixed_unitary(&us, &[0.58, 0.22, 0.15, 0.05]).unwrap();
        assert!(ChoiMatrix::new(ch.choi().matrix().clone(), 2, 2).is_ok());
        assert!(mixed_unitary(&[from_real_diag(&[1.0, 0.5])], &[1.0]).is_err());
    }

    #[test]
    fn haar_examples() {
        let u1 = haar_unitary(1, 9);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert_eq!(haar_unitary(3, 42), haar_unitary(3, 42));
        for d in 1..6 {
            check_unitary(&haar_unitary(d, d as u64)).unwrap();
        }
    }

    #[test]
    fn haar_first_moment() {
        let mut rng = rng_from_seed(2024);
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| haar_unitary_rng(2, &mut rng)[(0, 0)].norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
    }

    #[test]
    fn hs_state_examples() {
        let pure = hs_random_state(2, 2, 1, 1).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        assert_eq!(hs_random_state(2, 3, 4, 8).unwrap(), hs_random_state(2, 3, 4, 8).unwrap());
        assert!(hs_random_state(2, 2, 5, 1).is_err());
        assert!(hs_random_state(2, 2, 0, 1).is_err());
    }

    #[test]
    fn hs_mean_purity_matches_induced_measure() {
        // E tr ρ² = (d + k)/(d k + 1) for the induced measure with d = 4, k = 4
        let mut rng = rng_from_seed(77);
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| hs_random_state_rng(2, 2, 4, &mut rng).unwrap().purity()).sum::<f64>() / n as f64;
        let want = 8.0 / 17.0;
        assert!((mean - want).abs() < 0.01, "{mean} vs {want}");
    }

    #[test]
    fn noisy_mes_examples() {
        let id = KrausChannel::identity(2).choi();
        let s = noisy_mes(&id, &id).unwrap();
        assert!(max_abs_diff(s.matrix(), &max_entangled(2)) < 1e-15);
        let s = noisy_mes(&id, &depolarizing(2, 1.0).unwrap().choi()).unwrap();
        let iso = DensityOperator::isotropic(2, 0.25).unwrap();
        assert!(max_abs_diff(s.matrix(), iso.matrix()) < 1e-14);
        let ad = amplitude_damping(0.1).unwrap();
        let dp = depolarizing(2, 0.2).unwrap();
        let s = noisy_mes(&ad.choi(), &dp.choi()).unwrap();
        // direct (N_A ⊗ N_B)(Φ) from Kraus operators
        let mut want = CMat::zeros(4, 4);
        for ka in ad.ops() {
            for kb in dp.ops() {
                let k = kron(ka, kb);
                want += &k * max_entangled(2) * k.adjoint();
            }
        }
        assert!(max_abs_diff(s.matrix(), &want) < 1e-14);
        assert!(noisy_mes(&id, &KrausChannel::identity(3).choi()).is_err());
    }

    #[test]
    fn parse_and_json() {
        let k = parse_channel("pauli:0.9,0.05,0.03,0.02").unwrap();
        assert_eq!(k.ops().len(), 4);
        assert!(parse_channel("covpauli:0.8,0.05").is_ok());
        assert!(parse_channel("mad:3:0.1,0.1,0").is_ok());
        assert_eq!(parse_channel("mixu:3:0.58,0.22,0.15,0.05").unwrap(), parse_channel("mixu:3:0.58,0.22,0.15,0.05").unwrap());
        assert!(parse_channel("ad:0.3").is_ok());
        assert!(parse_channel("depol:2,0.1").is_ok());
        assert_eq!(parse_channel("id:3").unwrap().d_in(), 3);
        assert!(parse_channel("bogus:1").is_err());
        assert!(parse_channel("pauli:0.5,0.5").is_err());

        let j = ChannelJson::from(&k);
        let s = serde_json::to_string(&j).unwrap();
        assert!(s.contains("\"kind\":\"kraus\""));
        let back: ChannelJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_kraus().unwrap(), k);
        let cj = ChannelJson::from(&k.choi());
        let via = cj.to_kraus().unwrap();
        assert!(choi_distance(&via.choi(), &k.choi()) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn choi_kraus_round_trip(seed in any::<u64>(), r in 1usize..5, din in 1usize..4, dout in 1usize..4) {
            prop_assume!(dout * r >= din);
            let mut rng = rng_from_seed(seed);
            let k = random_channel_rng(din, dout, r, &mut rng).unwrap();
            let j = k.choi();
            prop_assert!(ChoiMatrix::new(j.matrix().clone(), din, dout).is_ok());
            let back = kraus_from_choi(&j).unwrap().choi();
            prop_assert!(choi_distance(&back, &j) < 1e-8);
        }

        #[test]
        fn compose_is_associative(seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let a = random_channel_rng(2, 3, 2, &mut rng).unwrap().choi();
            let b = random_channel_rng(3, 2, 3, &mut rng).unwrap().choi();
            let cc = random_channel_rng(2, 2, 2, &mut rng).unwrap().choi();
            let left = compose(&cc, &compose(&b, &a).unwrap()).unwrap();
            let right = compose(&compose(&cc, &b).unwrap(), &a).unwrap();
            prop_assert!(choi_distance(&left, &right) < 1e-9);
            // and matches sequential application on a basis
            for i in 0..2 {
                for jx in 0..2 {
                    let e = crate::qmat::unit(2, i, jx);
                    let seq = cc.apply_matrix(&b.apply_matrix(&a.apply_matrix(&e).unwrap()).unwrap()).unwrap();
                    let direct = left.apply_matrix(&e).unwrap();
                    prop_assert!(max_abs_diff(&seq, &direct) < 1e-9);
                }
            }
        }
    }
}
