//! Truncated full Fock bimodule over `BξB` with creation, annihilation and
//! the field operator `S = A₁ + A₂`.
//!
//! Level `n ≥ 1` holds `a_1ξ ⊗ ⋯ ⊗ a_nξ · b`, stored as a tensor in
//! `B^{⊗(n+1)}`; right coefficients of a factor are absorbed into the next
//! one. Level 0 is `B` itself.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{matmul, psd_check, AlgebraContext, AlgebraElement, BlockMatrix, PsdReport};
use crate::error::{CfreeError, Result};
use crate::mfs::MultilinearSeries;
use crate::moments::MomentSpec;
use crate::random::{gaussian_entries, random_element};
use crate::tensor;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `η(a, b) = ⟨aξ, bξ⟩ = τ(a* b)` for a linear map `τ : B → B`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceForm {
    ctx: AlgebraContext,
    tau: Vec<C64>,
}

impl CovarianceForm {
    /// From the degree-1 component of a series, `τ = ω_1`.
    pub fn from_series(series: &MultilinearSeries) -> Result<Self> {
        Ok(Self { ctx: series.ctx(), tau: series.component(1)?.to_vec() })
    }

    /// `η(a, b) = Φ(X a* b X)`.
    pub fn phi_of(spec: &MomentSpec) -> Result<Self> {
        Self::from_series(&spec.mfrak)
    }

    /// `η(a, b) = Ψ(X a* b X)`.
    pub fn psi_of(spec: &MomentSpec) -> Result<Self> {
        Self::from_series(&spec.m)
    }

    /// Scalar form `η(a, b) = c ā b` on `B = C`.
    pub fn scalar(c: f64) -> Self {
        Self { ctx: AlgebraContext::scalar(), tau: vec![C64::new(c, 0.0)] }
    }

    /// `τ(a) = Σ_r V_r* a V_r` with Gaussian `V_r`.
    pub fn random_completely_positive<R: Rng + ?Sized>(rng: &mut R, ctx: AlgebraContext, kraus: usize) -> Self {
        let d = ctx.d();
        let vs: Vec<AlgebraElement> = (0..kraus).map(|_| random_element(rng, d).scale(C64::new(1.0 / d as f64, 0.0))).collect();
        let dim = ctx.dim();
        let mut tau = vec![ZERO; dim * dim];
        for i in 0..dim {
            let e = ctx.basis(i);
            let mut out = AlgebraElement::zero(d);
            for v in &vs {
                out = &out + &(&(&v.adjoint() * &e) * v);
            }
            for (o, z) in out.entries().iter().enumerate() {
                tau[o * dim + i] = *z;
            }
        }
        Self { ctx, tau }
    }

    pub fn ctx(&self) -> AlgebraContext {
        self.ctx
    }

    pub fn tau(&self, a: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::from_vec_unchecked(self.ctx.d(), tensor::evaluate(self.ctx.dim(), &self.tau, &[a.entries()]))
    }

    pub fn eta(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        self.tau(&(&a.adjoint() * b))
    }

    /// `[η(b_i, b_j)]` for the given tuple.
    pub fn gram(&self, bs: &[AlgebraElement]) -> Result<BlockMatrix> {
        BlockMatrix::from_fn(bs.len(), |i, j| self.eta(&bs[i], &bs[j]))
    }

    /// Worst report over `samples` random tuples of length `k`.
    pub fn sampled_positivity<R: Rng + ?Sized>(&self, rng: &mut R, samples: usize, k: usize, tol: f64) -> Result<PsdReport> {
        let mut worst: Option<PsdReport> = None;
        for _ in 0..samples {
            let bs: Vec<_> = (0..k).map(|_| random_element(rng, self.ctx.d())).collect();
            let report = psd_check(&self.gram(&bs)?, tol);
            if worst.as_ref().is_none_or(|w| report.min_eigenvalue < w.min_eigenvalue || !report.is_positive()) {
                let stop = !report.is_positive();
                worst = Some(report);
                if stop {
                    break;
                }
            }
        }
        worst.ok_or_else(|| CfreeError::InvalidConfig("no samples".into()))
    }
}

/// Vector in the Fock bimodule truncated at level `depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    ctx: AlgebraContext,
    levels: Vec<Vec<C64>>,
}

impl FockVector {
    pub fn zero(ctx: AlgebraContext, depth: usize) -> Self {
        let dim = ctx.dim();
        Self { ctx, levels: (0..=depth).map(|n| vec![ZERO; tensor::len_for(dim, n)]).collect() }
    }

    /// `b` at level 0.
    pub fn vacuum(ctx: AlgebraContext, depth: usize, b: &AlgebraElement) -> Self {
        let mut v = Self::zero(ctx, depth);
        v.levels[0] = b.entries().to_vec();
        v
    }

    pub fn from_levels(ctx: AlgebraContext, levels: Vec<Vec<C64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(CfreeError::InvalidConfig("a Fock vector needs level 0".into()));
        }
        for (n, l) in levels.iter().enumerate() {
            let expected = tensor::len_for(ctx.dim(), n);
            if l.len() != expected {
                return Err(CfreeError::DimensionMismatch { expected, actual: l.len() });
            }
            if l.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(CfreeError::NonFinite);
            }
        }
        Ok(Self { ctx, levels })
    }

    /// Gaussian entries on levels `0..=filled`, zero above.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, ctx: AlgebraContext, depth: usize, filled: usize) -> Self {
        let mut v = Self::zero(ctx, depth);
        for n in 0..=filled.min(depth) {
            v.levels[n] = gaussian_entries(rng, v.levels[n].len(), 1.0);
        }
        v
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> Option<&[C64]> {
        self.levels.get(n).map(Vec::as_slice)
    }

    pub fn vacuum_part(&self) -> AlgebraElement {
        AlgebraElement::from_vec_unchecked(self.ctx.d(), self.levels[0].clone())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(CfreeError::ContextMismatch);
        }
        if self.depth() != other.depth() {
            return Err(CfreeError::DimensionMismatch { expected: self.depth(), actual: other.depth() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self { ctx: self.ctx, levels })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { ctx: self.ctx, levels: self.levels.iter().map(|l| l.iter().map(|z| z * c).collect()).collect() }
    }

    /// `b · v`: acts on the first factor of each level.
    pub fn left_mul(&self, b: &AlgebraElement) -> Self {
        let levels = self.levels.iter().enumerate().map(|(n, l)| left_mul_level(self.ctx, b.entries(), l, n)).collect();
        Self { ctx: self.ctx, levels }
    }

    /// `v · b`: acts on the last factor of each level.
    pub fn right_mul(&self, b: &AlgebraElement) -> Self {
        let (d, dim) = (self.ctx.d(), self.ctx.dim());
        let levels = self
            .levels
            .iter()
            .map(|l| {
                let mut out = vec![ZERO; l.len()];
                for (src, dst) in l.chunks(dim).zip(out.chunks_mut(dim)) {
                    matmul(d, src, b.entries(), dst);
                }
                out
            })
            .collect();
        Self { ctx: self.ctx, levels }
    }

    /// Creation `A₁ v = ξ v`.
    pub fn a1(&self) -> Result<Self> {
        let top = self.depth();
        if self.levels[top].iter().any(|z| *z != ZERO) {
            return Err(CfreeError::DepthOverflow { depth: top });
        }
        let dim = self.ctx.dim();
        let id = self.ctx.identity().into_entries();
        let mut out = Self::zero(self.ctx, top);
        for n in 0..top {
            // prepend the unit as first factor
            let len = self.levels[n].len();
            let target = &mut out.levels[n + 1];
            for (i, u) in id.iter().enumerate() {
                if *u == ZERO {
                    continue;
                }
                for (j, v) in self.levels[n].iter().enumerate() {
                    target[i * len + j] = u * v;
                }
            }
            debug_assert_eq!(target.len(), dim * len);
        }
        Ok(out)
    }

    /// Annihilation `A₂(a_1ξ ⊗ a_2ξ ⊗ ⋯) = τ(a_1) a_2ξ ⊗ ⋯`.
    pub fn a2(&self, eta: &CovarianceForm) -> Self {
        let dim = self.ctx.dim();
        let mut out = Self::zero(self.ctx, self.depth());
        for n in 1..=self.depth() {
            let src = &self.levels[n];
            let rest = src.len() / dim;
            let target = &mut out.levels[n - 1];
            for i in 0..dim {
                let block = &src[i * rest..(i + 1) * rest];
                if block.iter().all(|z| *z == ZERO) {
                    continue;
                }
                let t = eta.tau(&self.ctx.basis(i));
                // t · (remaining tensor), acting on its first factor
                let moved = left_mul_level(self.ctx, t.entries(), block, n - 1);
                for (dst, v) in target.iter_mut().zip(&moved) {
                    *dst += v;
                }
            }
        }
        out
    }

    /// `S v = A₁ v + A₂ v`.
    pub fn s_apply(&self, eta: &CovarianceForm) -> Result<Self> {
        self.a1()?.add(&self.a2(eta))
    }
}

/// Left multiplication of a level-`n` tensor by `b` (on its first factor).
fn left_mul_level(ctx: AlgebraContext, b: &[C64], level: &[C64], n: usize) -> Vec<C64> {
    let d = ctx.d();
    let dim = ctx.dim();
    if n == 0 {
        let mut out = vec![ZERO; dim];
        matmul(d, b, level, &mut out);
        return out;
    }
    let rest = level.len() / dim;
    let mut out = vec![ZERO; level.len()];
    // (b a)_{pr} = Σ_q b_{pq} a_{qr}
    for p in 0..d {
        for q in 0..d {
            let c = b[p * d + q];
            if c == ZERO {
                continue;
            }
            for r in 0..d {
                let src = &level[(q * d + r) * rest..(q * d + r + 1) * rest];
                let dst = &mut out[(p * d + r) * rest..(p * d + r + 1) * rest];
                for (x, y) in dst.iter_mut().zip(src) {
                    *x += c * y;
                }
            }
        }
    }
    out
}

fn pair_level(ctx: AlgebraContext, eta: &CovarianceForm, u: &[C64], v: &[C64], n: usize) -> AlgebraElement {
    let d = ctx.d();
    if n == 0 {
        let a = AlgebraElement::from_vec_unchecked(d, u.to_vec());
        let b = AlgebraElement::from_vec_unchecked(d, v.to_vec());
        return &a.adjoint() * &b;
    }
    let dim = ctx.dim();
    let rest = u.len() / dim;
    let mut total = AlgebraElement::zero(d);
    for i in 0..dim {
        let ui = &u[i * rest..(i + 1) * rest];
        if ui.iter().all(|z| *z == ZERO) {
            continue;
        }
        let mut w = vec![ZERO; rest];
        for k in 0..dim {
            let vk = &v[k * rest..(k + 1) * rest];
            if vk.iter().all(|z| *z == ZERO) {
                continue;
            }
            let c = eta.eta(&ctx.basis(i), &ctx.basis(k));
            let moved = left_mul_level(ctx, c.entries(), vk, n - 1);
            tensor::axpy(&mut w, C64::new(1.0, 0.0), &moved);
        }
        total = &total + &pair_level(ctx, eta, ui, &w, n - 1);
    }
    total
}

/// `⟨u, v⟩`; levels are orthogonal.
pub fn fock_pairing(u: &FockVector, v: &FockVector, eta: &CovarianceForm) -> Result<AlgebraElement> {
    u.check(v)?;
    if eta.ctx() != u.ctx {
        return Err(CfreeError::ContextMismatch);
    }
    let mut total = AlgebraElement::zero(u.ctx.d());
    for n in 0..=u.depth() {
        total = &total + &pair_level(u.ctx, eta, &u.levels[n], &v.levels[n], n);
    }
    Ok(total)
}

/// `Σ_t b_{t,0} ξ b_{t,1} ξ ⋯ ξ b_{t,n_t}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeffs: Vec<AlgebraElement>,
}

impl Polynomial {
    pub fn new(terms: Vec<Vec<AlgebraElement>>) -> Result<Self> {
        if terms.iter().any(Vec::is_empty) {
            return Err(CfreeError::MalformedWord("a monomial needs at least one coefficient".into()));
        }
        Ok(Self { terms: terms.into_iter().map(|coeffs| Monomial { coeffs }).collect() })
    }

    /// `ξ^n` with unit coefficients.
    pub fn power(d: usize, n: usize) -> Self {
        Self { terms: vec![Monomial { coeffs: vec![AlgebraElement::identity(d); n + 1] }] }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, max_degree: usize, terms: usize) -> Self {
        let terms = (0..terms)
            .map(|_| {
                let deg = rng.random_range(0..=max_degree);
                Monomial { coeffs: (0..=deg).map(|_| random_element(rng, d)).collect() }
            })
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|m| m.coeffs.len() - 1).max().unwrap_or(0)
    }

    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|m| Monomial { coeffs: m.coeffs.iter().rev().map(AlgebraElement::adjoint).collect() })
            .collect();
        Self { terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut coeffs = a.coeffs[..a.coeffs.len() - 1].to_vec();
                coeffs.push(&a.coeffs[a.coeffs.len() - 1] * &b.coeffs[0]);
                coeffs.extend(b.coeffs[1..].iter().cloned());
                terms.push(Monomial { coeffs });
            }
        }
        Self { terms }
    }
}

/// `⟨1, p(S) 1⟩` evaluated in the Fock bimodule truncated at `depth`.
pub fn fock_expectation(eta: &CovarianceForm, p: &Polynomial, depth: usize) -> Result<AlgebraElement> {
    let ctx = eta.ctx();
    let mut total = AlgebraElement::zero(ctx.d());
    for m in &p.terms {
        for c in &m.coeffs {
            ctx.check(c)?;
        }
        let last = m.coeffs.len() - 1;
        let mut v = FockVector::vacuum(ctx, depth, &m.coeffs[last]);
        for i in (0..last).rev() {
            v = v.s_apply(eta)?.left_mul(&m.coeffs[i]);
        }
        total = &total + &v.vacuum_part();
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionReport {
    pub phi_min_eigenvalue: f64,
    pub psi_min_eigenvalue: f64,
    pub passed: bool,
}

/// Samples `b_i` and checks `[𝔐_1(b_i* b_j)]` and `[M_1(b_i* b_j)]` for
/// positivity, as single values and as Gram matrices of size `k`.
pub fn criterion_check<R: Rng + ?Sized>(
    spec: &MomentSpec,
    rng: &mut R,
    samples: usize,
    k: usize,
    tol: f64,
) -> Result<CriterionReport> {
    let phi = CovarianceForm::phi_of(spec)?;
    let psi = CovarianceForm::psi_of(spec)?;
    let d = spec.ctx().d();
    let mut passed = true;
    let mut mins = [f64::INFINITY; 2];
    for _ in 0..samples {
        let bs: Vec<_> = (0..k.max(1)).map(|_| random_element(rng, d)).collect();
        for (slot, form) in [&phi, &psi].into_iter().enumerate() {
            let single = BlockMatrix::new(1, vec![form.eta(&bs[0], &bs[0])])?;
            for h in [single, form.gram(&bs)?] {
                let report = psd_check(&h, tol);
                passed &= report.is_positive();
                mins[slot] = mins[slot].min(report.min_eigenvalue);
            }
        }
    }
    Ok(CriterionReport { phi_min_eigenvalue: mins[0], psi_min_eigenvalue: mins[1], passed })
}
