//! R- and cR-transforms of multilinear function series.
//!
//! `cr_from_moments(β, γ)` solves, degree by degree,
//!
//! ```text
//! β_n(b_1..b_n) = Σ_{1 = j_1 < … < j_k ≤ n+1} cR_{k-1}(c_2, …, c_k) · T
//! c_t = b_{j_{t-1}}                                          if j_t = j_{t-1} + 1
//!     = b_{j_{t-1}} γ_{j_t-j_{t-1}-2}(b_{j_{t-1}+1}..b_{j_t-2}) b_{j_t-1}   otherwise
//! T   = 1 if j_k = n+1, else b_{j_k} β_{n-j_k}(b_{j_k+1}..b_n)
//! ```
//!
//! where `β` holds Φ-moments and `γ` Ψ-moments. Grouping the index sets by
//! their gaps turns the right-hand side into `(cR ∘ σ) · τ` with
//! `σ = I + IγI` and `τ = 1 + Iβ`, which is how the tensors are assembled.
//! The closed form `[β(1 + Iβ)⁻¹] ∘ (I + IγI)^⟨-1⟩` is provided separately
//! as [`cr_analytic`].

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraContext;
use crate::error::{CfreeError, Result};
use crate::mfs::{compose_degree, MultilinearSeries};
use crate::moments::{sum_spec, MomentSpec};
use crate::tensor;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Component `p` of `σ = I + IγI`; reads `γ` up to degree `p - 2`.
fn sigma_component(ctx: AlgebraContext, gamma: &[Vec<C64>], p: usize) -> Vec<C64> {
    let dim = ctx.dim();
    let id = tensor::identity_map(dim);
    match p {
        0 => vec![ZERO; dim],
        1 => id,
        _ => {
            let left = tensor::product(ctx.d(), &id, 1, &gamma[p - 2], p - 2);
            tensor::product(ctx.d(), &left, p - 1, &id, 1)
        }
    }
}

/// `τ_j = (1 + Iβ)_j`.
fn tau_component(ctx: AlgebraContext, beta: &[Vec<C64>], j: usize) -> Vec<C64> {
    if j == 0 {
        return ctx.identity().into_entries();
    }
    tensor::product(ctx.d(), &tensor::identity_map(ctx.dim()), 1, &beta[j - 1], j - 1)
}

/// Which side of the recurrence is unknown.
enum Solve<'a> {
    /// `β` given, produce `cR`.
    Cumulants { beta: &'a [Vec<C64>], gamma: &'a [Vec<C64>] },
    /// `cR` given together with `γ`, produce `β`.
    Moments { cr: &'a [Vec<C64>], gamma: &'a [Vec<C64>] },
    /// `cR` given, `γ = β` produced alongside.
    SelfConsistent { cr: &'a [Vec<C64>] },
}

fn run_recurrence(ctx: AlgebraContext, solve: Solve<'_>, top: usize) -> Vec<Vec<C64>> {
    let dim = ctx.dim();
    let mut cr: Vec<Vec<C64>> = Vec::with_capacity(top + 1);
    let mut beta: Vec<Vec<C64>> = Vec::with_capacity(top + 1);
    let mut sigma: Vec<Vec<C64>> = Vec::with_capacity(top + 1);
    let mut tau: Vec<Vec<C64>> = Vec::with_capacity(top + 1);
    // p[m] = (cR ∘ σ)_m for completed degrees.
    let mut p: Vec<Vec<C64>> = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let gamma: &[Vec<C64>] = match &solve {
            Solve::Cumulants { gamma, .. } | Solve::Moments { gamma, .. } => gamma,
            Solve::SelfConsistent { .. } => &beta,
        };
        sigma.push(sigma_component(ctx, gamma, n));
        let beta_known: &[Vec<C64>] = match &solve {
            Solve::Cumulants { beta, .. } => beta,
            _ => &beta,
        };
        tau.push(tau_component(ctx, beta_known, n));

        // every index set except j = (1, 2, …, n+1)
        let mut rest = vec![ZERO; tensor::len_for(dim, n)];
        let partial = if n == 0 { vec![ZERO; dim] } else { compose_degree(dim, &cr, &sigma, n, 1) };
        tensor::axpy(&mut rest, ONE, &partial);
        for (m, pm) in p.iter().enumerate() {
            let term = tensor::product(ctx.d(), pm, m, &tau[n - m], n - m);
            tensor::axpy(&mut rest, ONE, &term);
        }

        let (cr_n, beta_n) = match &solve {
            Solve::Cumulants { beta, .. } => {
                let mut c = beta[n].clone();
                tensor::axpy(&mut c, -ONE, &rest);
                (c, beta[n].clone())
            }
            Solve::Moments { cr: given, .. } | Solve::SelfConsistent { cr: given } => {
                let mut b = rest.clone();
                tensor::axpy(&mut b, ONE, &given[n]);
                (given[n].clone(), b)
            }
        };
        let mut pn = partial;
        tensor::axpy(&mut pn, ONE, &cr_n);
        p.push(pn);
        cr.push(cr_n);
        beta.push(beta_n);
    }
    match solve {
        Solve::Cumulants { .. } => cr,
        _ => beta,
    }
}

fn check_pair(a: &MultilinearSeries, b: &MultilinearSeries) -> Result<()> {
    if a.ctx() != b.ctx() {
        return Err(CfreeError::ContextMismatch);
    }
    Ok(())
}

/// `cR_{β,γ}` by the recurrence; known to degree `min(N_β, N_γ + 2)`.
pub fn cr_from_moments(beta: &MultilinearSeries, gamma: &MultilinearSeries) -> Result<MultilinearSeries> {
    check_pair(beta, gamma)?;
    let top = beta.truncation().min(gamma.truncation() + 2);
    let comps =
        run_recurrence(beta.ctx(), Solve::Cumulants { beta: beta.components(), gamma: gamma.components() }, top);
    MultilinearSeries::from_components(beta.ctx(), comps)
}

/// `R_γ = cR_{γ,γ}`.
pub fn r_from_moments(gamma: &MultilinearSeries) -> Result<MultilinearSeries> {
    cr_from_moments(gamma, gamma)
}

/// Inverts [`cr_from_moments`]: the moments `β` to degree `truncation`.
pub fn moments_from_cr(
    cr: &MultilinearSeries,
    gamma: &MultilinearSeries,
    truncation: usize,
) -> Result<MultilinearSeries> {
    check_pair(cr, gamma)?;
    let available = cr.truncation().min(gamma.truncation() + 2);
    if truncation > available {
        return Err(CfreeError::Truncation { requested: truncation, available });
    }
    let comps = run_recurrence(cr.ctx(), Solve::Moments { cr: cr.components(), gamma: gamma.components() }, truncation);
    MultilinearSeries::from_components(cr.ctx(), comps)
}

/// Inverts [`r_from_moments`]: the moments `γ` with `R_γ = r`.
pub fn moments_from_r(r: &MultilinearSeries, truncation: usize) -> Result<MultilinearSeries> {
    if truncation > r.truncation() {
        return Err(CfreeError::Truncation { requested: truncation, available: r.truncation() });
    }
    let comps = run_recurrence(r.ctx(), Solve::SelfConsistent { cr: r.components() }, truncation);
    MultilinearSeries::from_components(r.ctx(), comps)
}

/// `I + IγI`.
fn sigma_series(gamma: &MultilinearSeries) -> Result<MultilinearSeries> {
    MultilinearSeries::identity(gamma.ctx(), gamma.truncation() + 2).add(&gamma.sandwich_i())
}

/// `[β(1 + Iβ)⁻¹] ∘ (I + IγI)^⟨-1⟩`.
pub fn cr_analytic(beta: &MultilinearSeries, gamma: &MultilinearSeries) -> Result<MultilinearSeries> {
    check_pair(beta, gamma)?;
    let one = MultilinearSeries::one(beta.ctx(), beta.truncation() + 1);
    let inv = one.add(&beta.left_i_mul())?.mult_inverse()?;
    let outer = beta.mul(&inv)?;
    outer.compose(&sigma_series(gamma)?.comp_inverse()?)
}

/// The two candidate closed forms for `R_α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RClosedForm {
    /// `(1 + αI)⁻¹ ∘ (I + IαI)^⟨-1⟩`.
    InverseOnly,
    /// `[α(1 + Iα)⁻¹] ∘ (I + IαI)^⟨-1⟩`.
    LeadingFactor,
}

impl RClosedForm {
    pub fn formula(self) -> &'static str {
        match self {
            RClosedForm::InverseOnly => "(1+aI)^-1 o (I+IaI)^<-1>",
            RClosedForm::LeadingFactor => "[a(1+Ia)^-1] o (I+IaI)^<-1>",
        }
    }

    pub fn evaluate(self, alpha: &MultilinearSeries) -> Result<MultilinearSeries> {
        let ctx = alpha.ctx();
        let n = alpha.truncation();
        let inner = sigma_series(alpha)?.comp_inverse()?;
        let outer = match self {
            RClosedForm::InverseOnly => {
                MultilinearSeries::one(ctx, n + 1).add(&alpha.right_i_mul())?.mult_inverse()?
            }
            RClosedForm::LeadingFactor => {
                let inv = MultilinearSeries::one(ctx, n + 1).add(&alpha.left_i_mul())?.mult_inverse()?;
                alpha.mul(&inv)?
            }
        };
        outer.compose(&inner)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RClosedFormReport {
    pub inverse_only_deviation: f64,
    pub leading_factor_deviation: f64,
    /// The unique candidate within `match_tol` while the other is off by
    /// more than `mismatch_tol`.
    pub winner: Option<RClosedForm>,
}

/// Compares both closed forms against [`r_from_moments`].
pub fn resolve_r_closed_form(alpha: &MultilinearSeries, match_tol: f64, mismatch_tol: f64) -> Result<RClosedFormReport> {
    let r = r_from_moments(alpha)?;
    let a = RClosedForm::InverseOnly.evaluate(alpha)?.max_deviation(&r)?;
    let b = RClosedForm::LeadingFactor.evaluate(alpha)?.max_deviation(&r)?;
    let winner = if a < match_tol && b > mismatch_tol {
        Some(RClosedForm::InverseOnly)
    } else if b < match_tol && a > mismatch_tol {
        Some(RClosedForm::LeadingFactor)
    } else {
        None
    };
    Ok(RClosedFormReport { inverse_only_deviation: a, leading_factor_deviation: b, winner })
}

/// `cR_X`: Φ-moments in the β role, Ψ-moments in the γ role.
pub fn cr_of(spec: &MomentSpec) -> Result<MultilinearSeries> {
    cr_from_moments(&spec.mfrak, &spec.m)
}

/// `R_X` of the Ψ-moments.
pub fn r_of(spec: &MomentSpec) -> Result<MultilinearSeries> {
    r_from_moments(&spec.m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub truncation: usize,
    pub cr_deviations: Vec<f64>,
    pub r_deviations: Vec<f64>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Builds `X + Y` with the moment oracle and compares `cR` and `R` with the
/// sums of the individual transforms.
pub fn additivity_check(x: &MomentSpec, y: &MomentSpec, truncation: usize, tol: f64) -> Result<AdditivityReport> {
    let x = x.truncated(truncation)?;
    let y = y.truncated(truncation)?;
    let s = sum_spec(&x, &y, truncation)?;
    let cr_deviations = cr_of(&s)?.degree_deviations(&cr_of(&x)?.add(&cr_of(&y)?)?)?;
    let r_deviations = r_of(&s)?.degree_deviations(&r_of(&x)?.add(&r_of(&y)?)?)?;
    let max_deviation = cr_deviations.iter().chain(&r_deviations).cloned().fold(0.0, f64::max);
    Ok(AdditivityReport { truncation, cr_deviations, r_deviations, max_deviation, passed: max_deviation <= tol })
}
