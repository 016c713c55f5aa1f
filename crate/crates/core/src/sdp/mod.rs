//! Block-structured Hermitian semidefinite programs.
//!
//! A problem is a list of Hermitian matrix variables (PSD or free), a linear
//! objective `Σ Re tr(Cᵢ Xᵢ)` and affine equality constraints
//! `Σⱼ 𝒜ᵢⱼ(Xⱼ) = Bᵢ`, where each `𝒜ᵢⱼ` is a [`HermMap`]. Problems are compiled
//! into sparse rows over an orthonormal Hermitian basis of each constraint's
//! output space and solved with the homogeneous self-dual interior-point method
//! in [`ipm`].

mod compile;
pub mod dump;
pub mod embed;
mod hermmap;
mod ipm;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{hermiticity_error, max_abs, CMat};

pub use embed::{embed_hermitian, extract_hermitian, RealSdp};
pub use hermmap::HermMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    Psd,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintId(pub usize);

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub dim: usize,
    pub cone: Cone,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, HermMap)>,
    pub rhs: CMat,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    pub objective: Vec<Option<CMat>>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub gap: f64,
    pub feas: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gap: 1e-8, feas: 1e-8, max_iter: 200, step_fraction: 0.98 }
    }
}

impl Tolerances {
    pub fn with_gap_feas(tol: f64) -> Self {
        Self { gap: tol, feas: tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::PrimalInfeasible => "primal-infeasible",
            SolveStatus::DualInfeasible => "dual-infeasible",
            SolveStatus::NumericalFailure => "numerical-failure",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solver output.
///
/// For `Optimal` the duals `Yᵢ` satisfy `C − Σᵢ 𝒜ᵢ*(Yᵢ) ⪰ 0` on PSD variables
/// (with the opposite sign when maximizing) and `dual_value = Σᵢ Re tr(Yᵢ Bᵢ)`.
/// For `PrimalInfeasible` the duals hold a normalized Farkas ray; for
/// `DualInfeasible` the variable values hold an improving primal ray.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    pub variable_values: BTreeMap<String, CMat>,
    pub duals: Vec<CMat>,
    pub max_residual: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, name: &str) -> &CMat {
        &self.variable_values[name]
    }

    pub fn dual(&self, c: ConstraintId) -> &CMat {
        &self.duals[c.0]
    }
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self { sense, variables: Vec::new(), objective: Vec::new(), constraints: Vec::new() }
    }

    pub fn minimize() -> Self {
        Self::new(Sense::Minimize)
    }

    pub fn maximize() -> Self {
        Self::new(Sense::Maximize)
    }

    pub fn add_var(&mut self, name: &str, dim: usize, cone: Cone) -> VarId {
        self.variables.push(Variable { name: name.to_string(), dim, cone });
        self.objective.push(None);
        VarId(self.variables.len() - 1)
    }

    pub fn psd(&mut self, name: &str, dim: usize) -> VarId {
        self.add_var(name, dim, Cone::Psd)
    }

    pub fn free(&mut self, name: &str, dim: usize) -> VarId {
        self.add_var(name, dim, Cone::Free)
    }

    pub fn set_objective(&mut self, var: VarId, coeff: CMat) {
        self.objective[var.0] = Some(coeff);
    }

    /// Objective term `scale · tr X`.
    pub fn objective_trace(&mut self, var: VarId, scale: f64) {
        let d = self.variables[var.0].dim;
        self.set_objective(var, CMat::identity(d, d).scale(scale));
    }

    pub fn add_constraint(&mut self, name: &str, terms: Vec<(VarId, HermMap)>, rhs: CMat) -> ConstraintId {
        self.constraints.push(Constraint { name: name.to_string(), terms, rhs });
        ConstraintId(self.constraints.len() - 1)
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = std::collections::BTreeSet::new();
        for v in &self.variables {
            if v.dim == 0 {
                return Err(Error::Model(format!("variable {} has dimension 0", v.name)));
            }
            if !names.insert(v.name.as_str()) {
                return Err(Error::Model(format!("duplicate variable name {}", v.name)));
            }
        }
        for (v, coeff) in self.variables.iter().zip(&self.objective) {
            if let Some(cm) = coeff {
                if cm.nrows() != v.dim || cm.ncols() != v.dim {
                    return Err(Error::Model(format!("objective for {} has wrong shape", v.name)));
                }
                check_hermitian(cm, &format!("objective of {}", v.name))?;
            }
        }
        for con in &self.constraints {
            let m = con.rhs.nrows();
            if m == 0 || con.rhs.ncols() != m {
                return Err(Error::Model(format!("constraint {} has a non-square rhs", con.name)));
            }
            check_hermitian(&con.rhs, &format!("rhs of {}", con.name))?;
            if con.terms.is_empty() {
                return Err(Error::Model(format!("constraint {} has no terms", con.name)));
            }
            for (var, map) in &con.terms {
                let v = self
                    .variables
                    .get(var.0)
                    .ok_or_else(|| Error::Model(format!("constraint {} uses unknown variable", con.name)))?;
                let out = map.out_dim(v.dim)?;
                if out != m {
                    return Err(Error::Model(format!(
                        "constraint {}: term on {} has output dimension {out}, rhs is {m}",
                        con.name, v.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sum of the constraint's left-hand side maps applied to `values`.
    pub fn constraint_lhs(&self, c: &Constraint, values: &BTreeMap<String, CMat>) -> Result<CMat> {
        let mut acc = CMat::zeros(c.rhs.nrows(), c.rhs.ncols());
        for (var, map) in &c.terms {
            acc += map.apply(&values[&self.variables[var.0].name])?;
        }
        Ok(acc)
    }

    /// Largest violation of dual feasibility for multipliers `duals`, relative
    /// to the size of `A*(Y)`: the negative part of the slack's spectrum for
    /// PSD variables, the whole slack for free ones. `sign` is `+1` when
    /// minimizing and `-1` when maximizing.
    pub(crate) fn dual_slack_violation(&self, duals: &[CMat], sign: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        for (vi, v) in self.variables.iter().enumerate() {
            let mut aty = CMat::zeros(v.dim, v.dim);
            for (con, y) in self.constraints.iter().zip(duals) {
                for (var, map) in &con.terms {
                    if var.0 == vi {
                        aty += map.adjoint(y, v.dim)?;
                    }
                }
            }
            let mut slack = -aty.clone();
            if let Some(cm) = &self.objective[vi] {
                slack += (cm + cm.adjoint()).scale(0.5);
            }
            let slack = slack.scale(sign);
            let scale = 1.0 + max_abs(&aty);
            let violation = match v.cone {
                Cone::Psd => (-crate::qmat::min_eigenvalue(&slack)).max(0.0),
                Cone::Free => max_abs(&slack),
            };
            worst = worst.max(violation / scale);
        }
        Ok(worst)
    }

    pub fn objective_value(&self, values: &BTreeMap<String, CMat>) -> f64 {
        self.variables
            .iter()
            .zip(&self.objective)
            .filter_map(|(v, c)| c.as_ref().map(|c| crate::qmat::inner_re(c, &values[&v.name])))
            .sum()
    }
}

fn check_hermitian(m: &CMat, what: &str) -> Result<()> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Model(format!("{what} has non-finite entries")));
    }
    let err = hermiticity_error(m);
    if err > 1e-12 * (1.0 + max_abs(m)) {
        return Err(Error::Model(format!("{what} is not Hermitian (deviation {err:.2e})")));
    }
    Ok(())
}

/// Solves `p` to the requested tolerances.
///
/// Ill-posed models are reported as `Err`; everything the solver itself
/// concludes (including failure to converge) is a [`SolveStatus`].
pub fn solve(p: &SdpProblem, tol: &Tolerances) -> Result<SdpSolution> {
    p.validate()?;
    let compiled = compile::compile(p)?;
    let raw = ipm::solve(&compiled.sdp, tol);
    compiled.extract(p, raw, tol)
}
