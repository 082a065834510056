//! Truncated multilinear function series over `B = M_d(C)`.
//!
//! A series `ω = (ω_0, ω_1, …, ω_N)` stores `ω_0 ∈ B` and, for `n ≥ 1`, the
//! coefficient tensor of the multilinear map `ω_n : Bⁿ → B` (see
//! [`crate::tensor`] for the layout). Components above the truncation
//! degree `N` are unknown, never zero: every operation returns the largest
//! degree it can compute exactly and reading beyond it is an error.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{condition_number, AlgebraContext, AlgebraElement, SubalgebraKind, SINGULAR_CONDITION};
use crate::error::{CfreeError, Result};
use crate::tensor;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct MultilinearSeries {
    ctx: AlgebraContext,
    components: Vec<Vec<C64>>,
}

impl MultilinearSeries {
    pub fn from_components(ctx: AlgebraContext, components: Vec<Vec<C64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(CfreeError::InvalidConfig("a series needs at least its constant term".into()));
        }
        let dim = ctx.dim();
        for (n, c) in components.iter().enumerate() {
            let expected = tensor::len_for(dim, n);
            if c.len() != expected {
                return Err(CfreeError::DimensionMismatch { expected, actual: c.len() });
            }
            if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(CfreeError::NonFinite);
            }
        }
        Ok(Self { ctx, components })
    }

    pub fn zero(ctx: AlgebraContext, truncation: usize) -> Self {
        let dim = ctx.dim();
        let components = (0..=truncation).map(|n| vec![ZERO; tensor::len_for(dim, n)]).collect();
        Self { ctx, components }
    }

    /// The multiplicative unit `1 = (1, 0, 0, …)`.
    pub fn one(ctx: AlgebraContext, truncation: usize) -> Self {
        Self::constant(ctx, &ctx.identity(), truncation)
    }

    /// The compositional unit `I = (0, id, 0, …)`.
    pub fn identity(ctx: AlgebraContext, truncation: usize) -> Self {
        let mut s = Self::zero(ctx, truncation);
        if truncation >= 1 {
            s.components[1] = tensor::identity_map(ctx.dim());
        }
        s
    }

    pub fn constant(ctx: AlgebraContext, b: &AlgebraElement, truncation: usize) -> Self {
        let mut s = Self::zero(ctx, truncation);
        s.components[0] = b.entries().to_vec();
        s
    }

    /// Scalar series over `B = C`: component `n` is the map
    /// `(b_1..b_n) ↦ c_n b_1⋯b_n`.
    pub fn from_scalars(coefficients: &[C64]) -> Result<Self> {
        let components = coefficients.iter().map(|&c| vec![c]).collect();
        Self::from_components(AlgebraContext::scalar(), components)
    }

    pub fn from_real_scalars(coefficients: &[f64]) -> Result<Self> {
        let c: Vec<C64> = coefficients.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_scalars(&c)
    }

    /// Materialises a multilinear map from its values on matrix units. `f`
    /// is called with `n` arguments for each degree `n ≤ truncation` and
    /// must be multilinear.
    pub fn from_fn(
        ctx: AlgebraContext,
        truncation: usize,
        mut f: impl FnMut(&[AlgebraElement]) -> Result<AlgebraElement>,
    ) -> Result<Self> {
        let dim = ctx.dim();
        let mut components = Vec::with_capacity(truncation + 1);
        for n in 0..=truncation {
            let inner = dim.pow(n as u32);
            let mut t = vec![ZERO; dim * inner];
            let mut args: Vec<AlgebraElement> = Vec::with_capacity(n);
            for idx in 0..inner {
                args.clear();
                let mut rem = idx;
                let mut digits = vec![0; n];
                for slot in (0..n).rev() {
                    digits[slot] = rem % dim;
                    rem /= dim;
                }
                args.extend(digits.iter().map(|&i| ctx.basis(i)));
                let value = f(&args)?;
                ctx.check(&value)?;
                for (out, v) in value.entries().iter().enumerate() {
                    t[out * inner + idx] = *v;
                }
            }
            components.push(t);
        }
        Self::from_components(ctx, components)
    }

    pub fn ctx(&self) -> AlgebraContext {
        self.ctx
    }

    /// Highest degree known exactly.
    pub fn truncation(&self) -> usize {
        self.components.len() - 1
    }

    pub fn component(&self, n: usize) -> Result<&[C64]> {
        self.components
            .get(n)
            .map(Vec::as_slice)
            .ok_or(CfreeError::Truncation { requested: n, available: self.truncation() })
    }

    pub fn components(&self) -> &[Vec<C64>] {
        &self.components
    }

    pub fn constant_term(&self) -> AlgebraElement {
        AlgebraElement::from_vec_unchecked(self.ctx.d(), self.components[0].clone())
    }

    /// `ω_n(b_1, …, b_n)` with `n = args.len()`.
    pub fn eval(&self, args: &[AlgebraElement]) -> Result<AlgebraElement> {
        let t = self.component(args.len())?;
        for a in args {
            self.ctx.check(a)?;
        }
        let refs: Vec<&[C64]> = args.iter().map(AlgebraElement::entries).collect();
        Ok(AlgebraElement::from_vec_unchecked(self.ctx.d(), tensor::evaluate(self.ctx.dim(), t, &refs)))
    }

    pub fn truncated(&self, truncation: usize) -> Result<Self> {
        if truncation > self.truncation() {
            return Err(CfreeError::Truncation { requested: truncation, available: self.truncation() });
        }
        Ok(Self { ctx: self.ctx, components: self.components[..=truncation].to_vec() })
    }

    fn check_ctx(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(CfreeError::ContextMismatch);
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check_ctx(other)?;
        let n = self.truncation().min(other.truncation());
        let components = (0..=n)
            .map(|k| self.components[k].iter().zip(&other.components[k]).map(|(a, b)| f(*a, *b)).collect())
            .collect();
        Ok(Self { ctx: self.ctx, components })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        let components = self.components.iter().map(|t| t.iter().map(|z| z * c).collect()).collect();
        Self { ctx: self.ctx, components }
    }

    /// Formal product: `(αβ)_n(b) = Σ_k α_k(b_1..b_k) β_{n-k}(b_{k+1}..b_n)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        let d = self.ctx.d();
        let top = self.truncation().min(other.truncation());
        let mut components = Vec::with_capacity(top + 1);
        for n in 0..=top {
            let mut acc = vec![ZERO; tensor::len_for(self.ctx.dim(), n)];
            for k in 0..=n {
                let term = tensor::product(d, &self.components[k], k, &other.components[n - k], n - k);
                tensor::axpy(&mut acc, C64::new(1.0, 0.0), &term);
            }
            components.push(acc);
        }
        Ok(Self { ctx: self.ctx, components })
    }

    /// Formal composition `α ∘ β`; requires `β_0 = 0`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check_ctx(inner)?;
        if inner.components[0].iter().any(|z| *z != ZERO) {
            return Err(CfreeError::NonzeroConstantTerm("the inner series of a composition"));
        }
        let top = self.truncation().min(inner.truncation());
        let mut components = vec![self.components[0].clone()];
        for n in 1..=top {
            components.push(compose_degree(self.ctx.dim(), &self.components, &inner.components, n, 1));
        }
        Ok(Self { ctx: self.ctx, components })
    }

    /// Inverse for the formal product; requires an invertible constant term.
    pub fn mult_inverse(&self) -> Result<Self> {
        let d = self.ctx.d();
        let inv = self.constant_term().checked_inverse("constant term")?;
        let mut components = vec![inv.entries().to_vec()];
        for n in 1..=self.truncation() {
            let mut acc = vec![ZERO; tensor::len_for(self.ctx.dim(), n)];
            for k in 1..=n {
                let term = tensor::product(d, &self.components[k], k, &components[n - k], n - k);
                tensor::axpy(&mut acc, C64::new(-1.0, 0.0), &term);
            }
            components.push(tensor::product(d, inv.entries(), 0, &acc, n));
        }
        Ok(Self { ctx: self.ctx, components })
    }

    /// Inverse for formal composition; requires `α_0 = 0` and `α_1`
    /// invertible as a linear map on `B`.
    pub fn comp_inverse(&self) -> Result<Self> {
        if self.components[0].iter().any(|z| *z != ZERO) {
            return Err(CfreeError::NonzeroConstantTerm("compositional inversion"));
        }
        let top = self.truncation();
        if top == 0 {
            return Ok(self.clone());
        }
        let dim = self.ctx.dim();
        let linear = DMatrix::from_row_slice(dim, dim, &self.components[1]);
        let condition = condition_number(linear.clone());
        if condition.is_nan() || condition > SINGULAR_CONDITION {
            return Err(CfreeError::Singular { what: "linear part", condition });
        }
        let inv = linear.try_inverse().ok_or(CfreeError::Singular { what: "linear part", condition })?;
        let inv: Vec<C64> = (0..dim).flat_map(|r| (0..dim).map(move |c| (r, c))).map(|(r, c)| inv[(r, c)]).collect();
        let mut components = vec![vec![ZERO; dim], inv.clone()];
        for n in 2..=top {
            let rest = compose_degree(dim, &self.components, &components, n, 2);
            let mut next = tensor::map_output(dim, &inv, &rest, n);
            next.iter_mut().for_each(|z| *z = -*z);
            components.push(next);
        }
        Ok(Self { ctx: self.ctx, components })
    }

    /// `Iβ`: `(Iβ)_0 = 0`, `(Iβ)_n(b) = b_1 β_{n-1}(b_2..b_n)`.
    pub fn left_i_mul(&self) -> Self {
        let dim = self.ctx.dim();
        let id = tensor::identity_map(dim);
        let mut components = vec![vec![ZERO; dim]];
        for (k, c) in self.components.iter().enumerate() {
            components.push(tensor::product(self.ctx.d(), &id, 1, c, k));
        }
        Self { ctx: self.ctx, components }
    }

    /// `βI`: `(βI)_0 = 0`, `(βI)_n(b) = β_{n-1}(b_1..b_{n-1}) b_n`.
    pub fn right_i_mul(&self) -> Self {
        let dim = self.ctx.dim();
        let id = tensor::identity_map(dim);
        let mut components = vec![vec![ZERO; dim]];
        for (k, c) in self.components.iter().enumerate() {
            components.push(tensor::product(self.ctx.d(), c, k, &id, 1));
        }
        Self { ctx: self.ctx, components }
    }

    /// `IβI`: zero in degrees 0 and 1, `b_1 β_{n-2}(b_2..b_{n-1}) b_n` above.
    /// Known two degrees beyond `β`.
    pub fn sandwich_i(&self) -> Self {
        let dim = self.ctx.dim();
        let left = self.left_i_mul();
        let id = tensor::identity_map(dim);
        let mut components = vec![vec![ZERO; dim], vec![ZERO; dim * dim]];
        for k in 1..left.components.len() {
            components.push(tensor::product(self.ctx.d(), &left.components[k], k, &id, 1));
        }
        Self { ctx: self.ctx, components }
    }

    /// Dilation: component `n` scaled by `λ^(n+1)`, the moment series of `λX`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(CfreeError::InvalidConfig(format!("dilation factor must be finite and non-negative, got {lambda}")));
        }
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(n, t)| {
                let f = lambda.powi(n as i32 + 1);
                t.iter().map(|z| z * f).collect()
            })
            .collect();
        Ok(Self { ctx: self.ctx, components })
    }

    /// Post-composes every component with the expectation onto `D`.
    pub fn project_onto_d(&self) -> Self {
        if self.ctx.kind() == SubalgebraKind::Full {
            return self.clone();
        }
        let dim = self.ctx.dim();
        let mut pinch = vec![ZERO; dim * dim];
        for i in 0..dim {
            let projected = self.ctx.project(&self.ctx.basis(i));
            for (out, v) in projected.entries().iter().enumerate() {
                pinch[out * dim + i] = *v;
            }
        }
        let components =
            self.components.iter().enumerate().map(|(n, t)| tensor::map_output(dim, &pinch, t, n)).collect();
        Self { ctx: self.ctx, components }
    }

    /// Max entry deviation per shared degree.
    pub fn degree_deviations(&self, other: &Self) -> Result<Vec<f64>> {
        self.check_ctx(other)?;
        let n = self.truncation().min(other.truncation());
        Ok((0..=n).map(|k| tensor::max_abs_diff(&self.components[k], &other.components[k])).collect())
    }

    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        Ok(self.degree_deviations(other)?.into_iter().fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `Σ_{k ≥ k_min} Σ_{p_1+…+p_k = n} α_k(β_{p_1}(…), …, β_{p_k}(…))`, built
/// right to left with a table indexed by the inner degree used so far.
pub(crate) fn compose_degree(dim: usize, outer: &[Vec<C64>], inner: &[Vec<C64>], n: usize, k_min: usize) -> Vec<C64> {
    let mut acc = vec![ZERO; tensor::len_for(dim, n)];
    for k in k_min.max(1)..=n.min(outer.len() - 1) {
        // states[m]: α_k with its last (k - j) slots substituted, consuming m inputs.
        let mut states: Vec<Option<Vec<C64>>> = vec![None; n + 1];
        states[0] = Some(outer[k].clone());
        for slot in (0..k).rev() {
            let mut next: Vec<Option<Vec<C64>>> = vec![None; n + 1];
            for (m, state) in states.iter().enumerate() {
                let Some(t) = state else { continue };
                let inputs = slot + 1 + m;
                for p in 1..inner.len() {
                    let total = m + p;
                    if total + slot > n || (slot == 0 && total != n) {
                        continue;
                    }
                    let sub = tensor::substitute(dim, t, inputs, slot, &inner[p], p);
                    match &mut next[total] {
                        Some(existing) => tensor::axpy(existing, C64::new(1.0, 0.0), &sub),
                        slot_state @ None => *slot_state = Some(sub),
                    }
                }
            }
            states = next;
        }
        if let Some(t) = &states[n] {
            tensor::axpy(&mut acc, C64::new(1.0, 0.0), t);
        }
    }
    acc
}

#[derive(Serialize, Deserialize)]
struct ComponentJson {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    d: usize,
    #[serde(rename = "N")]
    truncation: usize,
    #[serde(default = "default_kind")]
    d_kind: SubalgebraKind,
    components: Vec<ComponentJson>,
}

fn default_kind() -> SubalgebraKind {
    SubalgebraKind::Full
}

impl Serialize for MultilinearSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            d: self.ctx.d(),
            truncation: self.truncation(),
            d_kind: self.ctx.kind(),
            components: self
                .components
                .iter()
                .enumerate()
                .map(|(n, t)| ComponentJson { n, re: t.iter().map(|z| z.re).collect(), im: t.iter().map(|z| z.im).collect() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultilinearSeries {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = SeriesJson::deserialize(de)?;
        let ctx = AlgebraContext::new(raw.d, raw.d_kind).map_err(D::Error::custom)?;
        let mut components = vec![None; raw.truncation + 1];
        for c in raw.components {
            if c.re.len() != c.im.len() {
                return Err(D::Error::custom("re and im lengths differ"));
            }
            let slot = components.get_mut(c.n).ok_or_else(|| D::Error::custom("component degree above N"))?;
            *slot = Some(c.re.iter().zip(&c.im).map(|(&a, &b)| C64::new(a, b)).collect::<Vec<_>>());
        }
        let components = components
            .into_iter()
            .enumerate()
            .map(|(n, c)| c.ok_or_else(|| D::Error::custom(format!("missing component {n}"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        MultilinearSeries::from_components(ctx, components).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_element, random_series, seeded, SeriesShape};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn scalar_coeffs(s: &MultilinearSeries) -> Vec<C64> {
        s.components().iter().map(|t| t[0]).collect()
    }

    #[test]
    fn eval_units() {
        let ctx = AlgebraContext::full(2);
        let mut rng = seeded(1);
        let b = random_element(&mut rng, 2);
        assert_eq!(MultilinearSeries::identity(ctx, 3).eval(&[b.clone()]).unwrap(), b);
        assert_eq!(MultilinearSeries::one(ctx, 3).eval(&[]).unwrap(), ctx.identity());
        let err = MultilinearSeries::one(ctx, 2).eval(&[b.clone(), b.clone(), b]).unwrap_err();
        assert!(matches!(err, CfreeError::Truncation { requested: 3, available: 2 }));
    }

    #[test]
    fn eval_is_linear_in_each_slot() {
        let ctx = AlgebraContext::full(2);
        let mut rng = seeded(2);
        let w = random_series(&mut rng, ctx, 3, SeriesShape::default());
        let args: Vec<_> = (0..3).map(|_| random_element(&mut rng, 2)).collect();
        let lambda = C64::new(0.7, -1.3);
        for slot in 0..3 {
            let mut scaled = args.clone();
            scaled[slot] = scaled[slot].scale(lambda);
            let lhs = w.eval(&scaled).unwrap();
            let rhs = w.eval(&args).unwrap().scale(lambda);
            assert!(lhs.distance(&rhs) < 1e-12);

            let extra = random_element(&mut rng, 2);
            let mut summed = args.clone();
            summed[slot] = &summed[slot] + &extra;
            let mut only = args.clone();
            only[slot] = extra;
            let lhs = w.eval(&summed).unwrap();
            let rhs = &w.eval(&args).unwrap() + &w.eval(&only).unwrap();
            assert!(lhs.distance(&rhs) < 1e-12);
        }
    }

    #[test]
    fn sum_examples() {
        let ctx = AlgebraContext::full(2);
        let mut rng = seeded(3);
        let a = random_series(&mut rng, ctx, 4, SeriesShape::default());
        let b = random_series(&mut rng, ctx, 3, SeriesShape::default());
        assert_eq!(a.add(&MultilinearSeries::zero(ctx, 4)).unwrap(), a);
        assert!(a.add(&a.scale(c(-1.0))).unwrap().max_abs() == 0.0);
        let s = a.add(&b).unwrap();
        assert_eq!(s.truncation(), 3);
        let args: Vec<_> = (0..3).map(|_| random_element(&mut rng, 2)).collect();
        let lhs = s.eval(&args).unwrap();
        let rhs = &a.eval(&args).unwrap() + &b.eval(&args).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
        let other = MultilinearSeries::zero(AlgebraContext::full(3), 2);
        assert!(matches!(a.add(&other), Err(CfreeError::ContextMismatch)));
    }

    #[test]
    fn product_examples() {
        let ctx = AlgebraContext::full(2);
        let mut rng = seeded(4);
        let a = random_series(&mut rng, ctx, 4, SeriesShape::default());
        assert!(MultilinearSeries::one(ctx, 4).mul(&a).unwrap().max_deviation(&a).unwrap() < 1e-15);

        let m = c(1.7);
        let s = MultilinearSeries::from_scalars(&[c(1.0), m, c(0.0)]).unwrap();
        assert_eq!(s.mul(&s).unwrap().component(1).unwrap()[0], m * 2.0);

        // (Iβ)_n(b) = b_1 β_{n-1}(b_2..b_n)
        let ib = MultilinearSeries::identity(ctx, 4).mul(&a).unwrap();
        let args: Vec<_> = (0..4).map(|_| random_element(&mut rng, 2)).collect();
        let expected = &args[0] * &a.eval(&args[1..]).unwrap();
        assert!(ib.eval(&args).unwrap().distance(&expected) < 1e-12);
        assert!(ib.max_deviation(&a.left_i_mul()).unwrap() < 1e-15);
    }

    #[test]
    fn composition_examples() {
        let ctx = AlgebraContext::full(2);
        let mut rng = seeded(5);
        let a = random_series(&mut rng, ctx, 4, SeriesShape::default());
        let b = random_series(&mut rng, ctx, 4, SeriesShape { centered: true, ..Default::default() });
        let id = MultilinearSeries::identity(ctx, 4);
        assert!(a.compose(&id).unwrap().max_deviation(&a).unwrap() < 1e-14);
        assert!(id.compose(&b).unwrap().max_deviation(&b).unwrap() < 1e-14);
        assert!(matches!(a.compose(&a), Err(CfreeError::NonzeroConstantTerm(_))));

        let (x, y) = (c(0.3), c(-1.1));
        let alpha = MultilinearSeries::from_scalars(&[c(0.0), c(1.0), x, c(0.0)]).unwrap();
        let beta = MultilinearSeries::from_scalars(&[c(0.0), c(1.0), y, c(0.0)]).unwrap();
        let comp = alpha.compose(&beta).unwrap();
        assert!((comp.component(2).unwrap()[0] - (x + y)).norm() < 1e-15);

        // direct nested evaluation at degree 3
        let args: Vec<_> = (0..3).map(|_| random_element(&mut rng, 2)).collect();
        let ab = a.compose(&b).unwrap();
        let b1 = |s: &[AlgebraElement]| b.eval(s).unwrap();
        let mut expected = a.eval(&[b1(&args)]).unwrap();
        expected = &expected + &a.eval(&[b1(&args[..1]), b1(&args[1..])]).unwrap();
        expected = &expected + &a.eval(&[b1(&args[..2]), b1(&args[2..])]).unwrap();
        expected = &expected + &a.eval(&[b1(&args[..1]), b1(&args[1..2]), b1(&args[2..])]).unwrap();
        assert!(ab.eval(&args).unwrap().distance(&expected) < 1e-12);
    }

    #[test]
    fn multiplicative_inverse() {
        let ctx = AlgebraContext::full(2);
        let one = MultilinearSeries::one(ctx, 4);
        assert!(one.mult_inverse().unwrap().max_deviation(&one).unwrap() < 1e-15);

        let m = c(0.8);
        let s = MultilinearSeries::from_scalars(&[c(1.0), m, c(0.0), c(0.0)]).unwrap();
        let inv = scalar_coeffs(&s.mult_inverse().unwrap());
        assert!((inv[1] + m).norm() < 1e-15);
        assert!((inv[2] - m * m).norm() < 1e-15);

        let mut rng = seeded(6);
        for _ in 0..10 {
            let a = random_series(&mut rng, ctx, 5, SeriesShape { unit_constant: true, ..Default::default() });
            let inv = a.mult_inverse().unwrap();
            assert!(a.mul(&inv).unwrap().max_deviation(&MultilinearSeries::one(ctx, 5)).unwrap() < 1e-10);
            assert!(inv.mul(&a).unwrap().max_deviation(&MultilinearSeries::one(ctx, 5)).unwrap() < 1e-10);
        }
        let singular = MultilinearSeries::zero(ctx, 2);
        assert!(matches!(singular.mult_inverse(), Err(CfreeError::Singular { .. })));
    }

    #[test]
    fn compositional_inverse() {
        let ctx = AlgebraContext::full(2);
        let id = MultilinearSeries::identity(ctx, 5);
        assert!(id.comp_inverse().unwrap().max_deviation(&id).unwrap() < 1e-15);

        let cc = c(0.6);
        let s = MultilinearSeries::from_scalars(&[c(0.0), c(1.0), cc, c(0.0)]).unwrap();
        let inv = scalar_coeffs(&s.comp_inverse().unwrap());
        let expected = [c(0.0), c(1.0), -cc, cc * cc * 2.0];
        for (a, b) in inv.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-14);
        }

        let mut rng = seeded(7);
        for _ in 0..10 {
            let a = random_series(&mut rng, ctx, 5, SeriesShape { centered: true, unit_linear_part: true, ..Default::default() });
            let inv = a.comp_inverse().unwrap();
            assert!(a.compose(&inv).unwrap().max_deviation(&id).unwrap() < 1e-9);
            assert!(inv.compose(&a).unwrap().max_deviation(&id).unwrap() < 1e-9);
        }
        let not_centered = MultilinearSeries::one(ctx, 3);
        assert!(matches!(not_centered.comp_inverse(), Err(CfreeError::NonzeroConstantTerm(_))));
        let singular = MultilinearSeries::zero(ctx, 3);
        assert!(matches!(singular.comp_inverse(), Err(CfreeError::Singular { .. })));
    }

    #[test]
    fn i_multiplications() {
        let ctx = AlgebraContext::full(2);
        let one = MultilinearSeries::one(ctx, 3);
        assert!(one.left_i_mul().max_deviation(&MultilinearSeries::identity(ctx, 4)).unwrap() == 0.0);

        let mut rng = seeded(8);
        let beta = random_series(&mut rng, ctx, 3, SeriesShape::default());
        let s = beta.sandwich_i();
        assert_eq!(s.truncation(), 5);
        let b = random_element(&mut rng, 2);
        assert_eq!(s.eval(&[b]).unwrap(), AlgebraElement::zero(2));
        let args: Vec<_> = (0..3).map(|_| random_element(&mut rng, 2)).collect();
        let expected = &(&args[0] * &beta.eval(&args[1..2]).unwrap()) * &args[2];
        assert!(s.eval(&args).unwrap().distance(&expected) < 1e-12);

        let id = MultilinearSeries::identity(ctx, 3);
        let via_products = id.mul(&beta).unwrap().mul(&id).unwrap();
        assert!(via_products.max_deviation(&s).unwrap() < 1e-14);
        assert!(beta.right_i_mul().max_deviation(&beta.mul(&id).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn dilation() {
        let ctx = AlgebraContext::full(2);
        let mut rng = seeded(9);
        let w = random_series(&mut rng, ctx, 3, SeriesShape::default());
        assert_eq!(w.dilate(1.0).unwrap(), w);
        assert_eq!(w.dilate(0.0).unwrap().max_abs(), 0.0);
        let half = w.dilate(0.5).unwrap();
        let ratio = half.component(2).unwrap()[5] / w.component(2).unwrap()[5];
        assert!((ratio - c(0.125)).norm() < 1e-15);
        assert!(w.dilate(-1.0).is_err());
    }

    #[test]
    fn json_roundtrip_and_index_order() {
        let ctx = AlgebraContext::full(2);
        let mut rng = seeded(10);
        let w = random_series(&mut rng, ctx, 2, SeriesShape::default());
        let text = serde_json::to_string(&w).unwrap();
        let back: MultilinearSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w);

        let id = MultilinearSeries::identity(ctx, 1);
        let v = serde_json::to_value(&id).unwrap();
        assert_eq!(v["N"], 1);
        let re = v["components"][1]["re"].as_array().unwrap();
        // (out, in) row-major: identity has ones at out*4 + in with out == in
        assert_eq!(re[0], 1.0);
        assert_eq!(re[5], 1.0);
        assert_eq!(re[1], 0.0);
    }
}
