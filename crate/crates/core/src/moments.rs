//! The c-free product with amalgamation over `B` as a moment oracle.
//!
//! Each generator is described by a [`MomentSpec`]: its Ψ-moment series `M`
//! and Φ-moment series `𝔐`, with `M_n(b_1..b_n) = Ψ(X b_1 X ⋯ b_n X)`.
//! [`CFreeProduct`] evaluates Ψ and Φ on mixed [`Word`]s by centering
//! maximal same-label runs and recursing on strictly shorter words.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraContext, AlgebraElement, BlockMatrix, SubalgebraKind};
use crate::error::{CfreeError, Result};
use crate::mfs::MultilinearSeries;
use crate::random::{complex_gaussian, random_hermitian, random_series, seeded, SeriesShape};

pub const DEFAULT_WORD_CAP: usize = 10;

/// Moment data of one generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub label: String,
    /// Ψ-moments.
    #[serde(rename = "M")]
    pub m: MultilinearSeries,
    /// Φ-moments.
    #[serde(rename = "Mfrak")]
    pub mfrak: MultilinearSeries,
}

impl MomentSpec {
    pub fn new(label: impl Into<String>, m: MultilinearSeries, mfrak: MultilinearSeries) -> Result<Self> {
        if m.ctx() != mfrak.ctx() {
            return Err(CfreeError::ContextMismatch);
        }
        if m.truncation() != mfrak.truncation() {
            return Err(CfreeError::Truncation { requested: m.truncation(), available: mfrak.truncation() });
        }
        Ok(Self { label: label.into(), m, mfrak })
    }

    /// The zero element: every moment vanishes.
    pub fn zero(ctx: AlgebraContext, label: impl Into<String>, truncation: usize) -> Self {
        let z = MultilinearSeries::zero(ctx, truncation);
        Self { label: label.into(), m: z.clone(), mfrak: z }
    }

    /// Scalar (`d = 1`) spec from the sequences `Ψ(X^{n+1})` and `Φ(X^{n+1})`.
    pub fn scalar(label: impl Into<String>, psi: &[f64], phi: &[f64]) -> Result<Self> {
        Self::new(label, MultilinearSeries::from_real_scalars(psi)?, MultilinearSeries::from_real_scalars(phi)?)
    }

    /// Random (not necessarily positive) moment data. With `D ≠ B` the
    /// Ψ-series is projected onto `D`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        ctx: AlgebraContext,
        label: impl Into<String>,
        truncation: usize,
        centered: bool,
    ) -> Self {
        let shape = SeriesShape { centered, ..Default::default() };
        let m = random_series(rng, ctx, truncation, shape).project_onto_d();
        let mfrak = random_series(rng, ctx, truncation, shape);
        Self { label: label.into(), m, mfrak }
    }

    pub fn ctx(&self) -> AlgebraContext {
        self.m.ctx()
    }

    pub fn truncation(&self) -> usize {
        self.m.truncation()
    }

    pub fn is_centered(&self, tol: f64) -> bool {
        self.m.constant_term().max_abs() <= tol && self.mfrak.constant_term().max_abs() <= tol
    }

    /// Moment data of `λX`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        Ok(Self { label: self.label.clone(), m: self.m.dilate(lambda)?, mfrak: self.mfrak.dilate(lambda)? })
    }

    pub fn truncated(&self, truncation: usize) -> Result<Self> {
        Ok(Self { label: self.label.clone(), m: self.m.truncated(truncation)?, mfrak: self.mfrak.truncated(truncation)? })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// `b_0 x_{i_1} b_1 ⋯ x_{i_n} b_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WordJson", into = "WordJson")]
pub struct Word {
    coeffs: Vec<AlgebraElement>,
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct WordJson {
    coeffs: Vec<AlgebraElement>,
    labels: Vec<String>,
}

impl TryFrom<WordJson> for Word {
    type Error = CfreeError;
    fn try_from(w: WordJson) -> Result<Self> {
        Word::new(w.coeffs, w.labels)
    }
}

impl From<Word> for WordJson {
    fn from(w: Word) -> Self {
        WordJson { coeffs: w.coeffs, labels: w.labels }
    }
}

impl Word {
    pub fn new(coeffs: Vec<AlgebraElement>, labels: Vec<String>) -> Result<Self> {
        if coeffs.len() != labels.len() + 1 {
            return Err(CfreeError::MalformedWord(format!(
                "{} coefficients for {} generators",
                coeffs.len(),
                labels.len()
            )));
        }
        let d = coeffs[0].d();
        if let Some(bad) = coeffs.iter().find(|c| c.d() != d) {
            return Err(CfreeError::DimensionMismatch { expected: d * d, actual: bad.d() * bad.d() });
        }
        Ok(Self { coeffs, labels })
    }

    pub fn constant(b: AlgebraElement) -> Self {
        Self { coeffs: vec![b], labels: vec![] }
    }

    /// Generators with unit coefficients.
    pub fn from_labels<S: AsRef<str>>(d: usize, labels: &[S]) -> Self {
        Self {
            coeffs: vec![AlgebraElement::identity(d); labels.len() + 1],
            labels: labels.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn coeffs(&self) -> &[AlgebraElement] {
        &self.coeffs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of generator letters.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn d(&self) -> usize {
        self.coeffs[0].d()
    }

    /// `w*`: reversed letters, adjoint coefficients.
    pub fn adjoint(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().rev().map(AlgebraElement::adjoint).collect(),
            labels: self.labels.iter().rev().cloned().collect(),
        }
    }

    /// Product of words; the touching coefficients multiply.
    pub fn then(&self, other: &Word) -> Self {
        let mut coeffs = self.coeffs.clone();
        let last = coeffs.pop().expect("words have a coefficient");
        coeffs.push(&last * &other.coeffs[0]);
        coeffs.extend(other.coeffs[1..].iter().cloned());
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Self { coeffs, labels }
    }

    pub fn left_mul(&self, b: &AlgebraElement) -> Self {
        let mut w = self.clone();
        w.coeffs[0] = b * &w.coeffs[0];
        w
    }

    pub fn right_mul(&self, b: &AlgebraElement) -> Self {
        let mut w = self.clone();
        let last = w.coeffs.len() - 1;
        w.coeffs[last] = &w.coeffs[last] * b;
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Psi,
    Phi,
}

/// Word with generators replaced by indices into the family.
#[derive(Clone)]
struct RawWord {
    letters: Vec<usize>,
    coeffs: Vec<AlgebraElement>,
}

type MemoKey = (Vec<usize>, Vec<u64>);

impl RawWord {
    // Exact bit patterns, so memoised and direct evaluation agree to the last bit.
    fn key(&self) -> MemoKey {
        let bits = self
            .coeffs
            .iter()
            .flat_map(|c| c.entries().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]))
            .collect();
        (self.letters.clone(), bits)
    }

    /// Maximal runs of letters from one algebra, as inclusive letter ranges.
    fn runs(&self, algebra: &[usize]) -> Vec<(usize, usize)> {
        let mut runs = Vec::new();
        let mut start = 0;
        for i in 1..=self.letters.len() {
            if i == self.letters.len() || algebra[self.letters[i]] != algebra[self.letters[start]] {
                runs.push((start, i - 1));
                start = i;
            }
        }
        runs
    }

    /// Replaces every run selected by `mask` by its value, merging coefficients.
    fn substitute(&self, runs: &[(usize, usize)], mask: u64, values: &[AlgebraElement]) -> RawWord {
        let mut letters = Vec::new();
        let mut coeffs = Vec::new();
        let mut acc = self.coeffs[0].clone();
        for (j, &(s, e)) in runs.iter().enumerate() {
            if mask >> j & 1 == 1 {
                acc = &(&acc * &values[j]) * &self.coeffs[e + 1];
            } else {
                coeffs.push(acc);
                letters.push(self.letters[s]);
                for i in s + 1..=e {
                    coeffs.push(self.coeffs[i].clone());
                    letters.push(self.letters[i]);
                }
                acc = self.coeffs[e + 1].clone();
            }
        }
        coeffs.push(acc);
        RawWord { letters, coeffs }
    }
}

/// Ψ and Φ on the c-free product of a finite family of generators.
pub struct CFreeProduct {
    ctx: AlgebraContext,
    specs: Vec<MomentSpec>,
    index: HashMap<String, usize>,
    // algebra of each letter; letters of `inner` share algebra 0
    algebra: Vec<usize>,
    inner: Option<Box<CFreeProduct>>,
    // generators evaluated exactly from a matrix model instead of a series
    models: Vec<Option<MatrixModel>>,
    memo_enabled: bool,
    word_cap: usize,
    psi_memo: Mutex<HashMap<MemoKey, AlgebraElement>>,
    phi_memo: Mutex<HashMap<MemoKey, AlgebraElement>>,
}

impl CFreeProduct {
    pub fn new(specs: Vec<MomentSpec>) -> Result<Self> {
        let first = specs.first().ok_or_else(|| CfreeError::InvalidConfig("empty family".into()))?;
        let ctx = first.ctx();
        let mut index = HashMap::new();
        for (i, s) in specs.iter().enumerate() {
            if s.ctx() != ctx {
                return Err(CfreeError::ContextMismatch);
            }
            if index.insert(s.label.clone(), i).is_some() {
                return Err(CfreeError::DuplicateLabel(s.label.clone()));
            }
        }
        Ok(Self {
            ctx,
            algebra: (0..specs.len()).collect(),
            models: vec![None; specs.len()],
            specs,
            index,
            inner: None,
            memo_enabled: true,
            word_cap: DEFAULT_WORD_CAP,
            psi_memo: Mutex::new(HashMap::new()),
            phi_memo: Mutex::new(HashMap::new()),
        })
    }

    /// The product `inner ⊛ others`: all generators of `inner` form one
    /// algebra whose words are evaluated by `inner` itself.
    pub fn grouped(inner: CFreeProduct, others: Vec<MomentSpec>) -> Result<Self> {
        let k = inner.specs.len();
        let mut specs = inner.specs.clone();
        specs.extend(others);
        let mut product = Self::new(specs)?;
        product.algebra = (0..product.specs.len()).map(|i| if i < k { 0 } else { i - k + 1 }).collect();
        product.word_cap = product.word_cap.max(inner.word_cap);
        product.inner = Some(Box::new(inner));
        Ok(product)
    }

    /// Product of matrix models. Runs of each generator are evaluated from the
    /// model at any length; `specs()` holds their degree-1 data only.
    pub fn from_models(models: Vec<(String, MatrixModel)>) -> Result<Self> {
        let specs = models.iter().map(|(label, model)| model.spec(label.clone(), 1)).collect::<Result<Vec<_>>>()?;
        let mut product = Self::new(specs)?;
        product.models = models.into_iter().map(|(_, model)| Some(model)).collect();
        Ok(product)
    }

    pub fn with_memo(mut self, enabled: bool) -> Self {
        self.memo_enabled = enabled;
        self
    }

    pub fn with_word_cap(mut self, cap: usize) -> Self {
        self.word_cap = cap;
        self
    }

    pub fn ctx(&self) -> AlgebraContext {
        self.ctx
    }

    pub fn specs(&self) -> &[MomentSpec] {
        &self.specs
    }

    pub fn word_cap(&self) -> usize {
        self.word_cap
    }

    pub fn spec(&self, label: &str) -> Result<&MomentSpec> {
        self.index.get(label).map(|&i| &self.specs[i]).ok_or_else(|| CfreeError::UnknownLabel(label.into()))
    }

    fn raw(&self, w: &Word) -> Result<RawWord> {
        if w.len() > self.word_cap {
            return Err(CfreeError::WordTooLong { len: w.len(), cap: self.word_cap });
        }
        for c in &w.coeffs {
            self.ctx.check(c)?;
        }
        let letters = w
            .labels
            .iter()
            .map(|l| self.index.get(l).copied().ok_or_else(|| CfreeError::UnknownLabel(l.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(RawWord { letters, coeffs: w.coeffs.clone() })
    }

    pub fn psi_word(&self, w: &Word) -> Result<AlgebraElement> {
        self.expectation(w, Expectation::Psi)
    }

    pub fn phi_word(&self, w: &Word) -> Result<AlgebraElement> {
        self.expectation(w, Expectation::Phi)
    }

    pub fn expectation(&self, w: &Word, which: Expectation) -> Result<AlgebraElement> {
        let raw = self.raw(w)?;
        let guard = (raw.letters.len() * raw.letters.len()).max(1);
        self.eval(&raw, which, 0, guard)
    }

    /// `[E(w_i* w_j)]_{i,j}`.
    pub fn gram_matrix(&self, words: &[Word], which: Expectation) -> Result<BlockMatrix> {
        let k = words.len();
        let mut blocks = Vec::with_capacity(k * k);
        for wi in words {
            let adj = wi.adjoint();
            for wj in words {
                blocks.push(self.expectation(&adj.then(wj), which)?);
            }
        }
        BlockMatrix::new(k, blocks)
    }

    /// Value of the run `s..=e` of a single generator without its outer coefficients.
    fn run_value(&self, w: &RawWord, s: usize, e: usize, which: Expectation) -> Result<AlgebraElement> {
        if let Some(inner) = self.inner.as_deref().filter(|_| self.algebra[w.letters[s]] == 0) {
            let one = AlgebraElement::identity(self.ctx.d());
            let mut coeffs = vec![one.clone()];
            coeffs.extend(w.coeffs[s + 1..=e].iter().cloned());
            coeffs.push(one);
            let run = RawWord { letters: w.letters[s..=e].to_vec(), coeffs };
            let guard = (run.letters.len() * run.letters.len()).max(1);
            return inner.eval(&run, which, 0, guard);
        }
        if let Some(model) = &self.models[w.letters[s]] {
            let args = &w.coeffs[s + 1..=e];
            return Ok(match which {
                Expectation::Psi => model.psi(args),
                Expectation::Phi => model.phi(args),
            });
        }
        let spec = &self.specs[w.letters[s]];
        let series = match which {
            Expectation::Psi => &spec.m,
            Expectation::Phi => &spec.mfrak,
        };
        series.eval(&w.coeffs[s + 1..=e])
    }

    fn memo(&self, which: Expectation) -> &Mutex<HashMap<MemoKey, AlgebraElement>> {
        match which {
            Expectation::Psi => &self.psi_memo,
            Expectation::Phi => &self.phi_memo,
        }
    }

    fn eval(&self, w: &RawWord, which: Expectation, depth: usize, guard: usize) -> Result<AlgebraElement> {
        if depth > guard {
            return Err(CfreeError::DepthGuard(guard));
        }
        if w.letters.is_empty() {
            return Ok(w.coeffs[0].clone());
        }
        let runs = w.runs(&self.algebra);
        let last = w.coeffs.len() - 1;
        if runs.len() == 1 {
            let v = self.run_value(w, 0, last - 1, which)?;
            return Ok(&(&w.coeffs[0] * &v) * &w.coeffs[last]);
        }
        let key = self.memo_enabled.then(|| w.key());
        if let Some(key) = &key {
            if let Some(v) = self.memo(which).lock().expect("memo lock").get(key) {
                return Ok(v.clone());
            }
        }

        let psi_values =
            runs.iter().map(|&(s, e)| self.run_value(w, s, e, Expectation::Psi)).collect::<Result<Vec<_>>>()?;
        let mut total = match which {
            Expectation::Psi => AlgebraElement::zero(self.ctx.d()),
            Expectation::Phi => {
                // fully Ψ-centred alternating word: Φ factorises
                let mut acc = w.coeffs[0].clone();
                for (j, &(s, e)) in runs.iter().enumerate() {
                    let centred = &self.run_value(w, s, e, Expectation::Phi)? - &psi_values[j];
                    acc = &(&acc * &centred) * &w.coeffs[e + 1];
                }
                acc
            }
        };
        for mask in 1u64..(1 << runs.len()) {
            let shorter = w.substitute(&runs, mask, &psi_values);
            let v = self.eval(&shorter, which, depth + 1, guard)?;
            if mask.count_ones() % 2 == 1 {
                total = &total + &v;
            } else {
                total = &total - &v;
            }
        }
        if let Some(key) = key {
            self.memo(which).lock().expect("memo lock").insert(key, total.clone());
        }
        Ok(total)
    }

    /// Moment data of the element `P = Σ_t term_t`, each term a word over the
    /// family: component `n` is `E(P b_1 P ⋯ b_n P)` for both expectations.
    pub fn polynomial_spec(&self, label: impl Into<String>, terms: &[Word], truncation: usize) -> Result<MomentSpec> {
        if terms.is_empty() {
            return Err(CfreeError::InvalidConfig("a polynomial needs at least one term".into()));
        }
        let raw_terms = terms.iter().map(|t| self.raw(t)).collect::<Result<Vec<_>>>()?;
        let series = |which: Expectation| {
            MultilinearSeries::from_fn(self.ctx, truncation, |args| {
                let slots = args.len() + 1;
                let mut total = AlgebraElement::zero(self.ctx.d());
                let mut choice = vec![0usize; slots];
                loop {
                    let mut word = raw_terms[choice[0]].clone();
                    for (k, arg) in args.iter().enumerate() {
                        let next = &raw_terms[choice[k + 1]];
                        let tail = word.coeffs.pop().expect("nonempty");
                        word.coeffs.push(&(&tail * arg) * &next.coeffs[0]);
                        word.coeffs.extend(next.coeffs[1..].iter().cloned());
                        word.letters.extend(&next.letters);
                    }
                    if word.letters.len() > self.word_cap {
                        return Err(CfreeError::WordTooLong { len: word.letters.len(), cap: self.word_cap });
                    }
                    let guard = (word.letters.len() * word.letters.len()).max(1);
                    total = &total + &self.eval(&word, which, 0, guard)?;
                    // mixed-radix increment
                    let mut pos = slots;
                    loop {
                        if pos == 0 {
                            return Ok(total);
                        }
                        pos -= 1;
                        choice[pos] += 1;
                        if choice[pos] < raw_terms.len() {
                            break;
                        }
                        choice[pos] = 0;
                    }
                }
            })
        };
        MomentSpec::new(label, series(Expectation::Psi)?, series(Expectation::Phi)?)
    }
}

/// Moment data of `X + Y` for c-free `X`, `Y`, up to degree `truncation`.
pub fn sum_spec(x: &MomentSpec, y: &MomentSpec, truncation: usize) -> Result<MomentSpec> {
    let need = truncation + 1;
    let product = CFreeProduct::new(vec![x.clone(), y.clone()])?.with_word_cap(need.max(DEFAULT_WORD_CAP));
    let d = x.ctx().d();
    let terms = [Word::from_labels(d, &[&x.label]), Word::from_labels(d, &[&y.label])];
    product.polynomial_spec(format!("{}+{}", x.label, y.label), &terms, truncation)
}

/// Random Hermitian matrix model: `X` acts on `C^d ⊗ C^m` and `B = M_d ⊗ 1`.
/// Φ is the normalised partial trace over `C^m`; Ψ is the partial trace
/// weighted by a random density `ρ` on `C^m`, followed by the expectation
/// onto `D`.
#[derive(Clone, Debug)]
pub struct MatrixModel {
    ctx: AlgebraContext,
    m: usize,
    x: DMatrix<C64>,
    rho: DMatrix<C64>,
}

impl MatrixModel {
    pub fn sample(ctx: AlgebraContext, m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(CfreeError::InvalidConfig("inner dimension must be positive".into()));
        }
        let mut rng = seeded(seed);
        let n = ctx.d() * m;
        let x = DMatrix::from_row_slice(n, n, &random_hermitian(&mut rng, n));
        let g = DMatrix::from_fn(m, m, |_, _| complex_gaussian(&mut rng));
        let mut rho = &g * g.adjoint();
        let tr = rho.trace();
        rho /= tr;
        Ok(Self { ctx, m, x, rho })
    }

    /// Shifts `X` so that both `Φ(X)` and the ρ-weighted trace of `X` vanish.
    pub fn centered(mut self) -> Self {
        let shift = self.embed(&self.phi_raw(&self.x));
        self.x -= shift;
        if self.m > 1 {
            let m = self.m as f64;
            let purity = (&self.rho * &self.rho).trace().re;
            let h = (&self.rho - DMatrix::identity(self.m, self.m) * C64::new(1.0 / m, 0.0)) / C64::new(purity - 1.0 / m, 0.0);
            let c = self.rho_trace(&self.x);
            self.x -= c.kronecker(&h);
        }
        self
    }

    pub fn ctx(&self) -> AlgebraContext {
        self.ctx
    }

    pub fn inner_dim(&self) -> usize {
        self.m
    }

    fn embed(&self, b: &DMatrix<C64>) -> DMatrix<C64> {
        b.kronecker(&DMatrix::identity(self.m, self.m))
    }

    fn phi_raw(&self, y: &DMatrix<C64>) -> DMatrix<C64> {
        let (d, m) = (self.ctx.d(), self.m);
        DMatrix::from_fn(d, d, |p, q| (0..m).map(|a| y[(p * m + a, q * m + a)]).sum::<C64>() / m as f64)
    }

    fn rho_trace(&self, y: &DMatrix<C64>) -> DMatrix<C64> {
        let (d, m) = (self.ctx.d(), self.m);
        DMatrix::from_fn(d, d, |p, q| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..m {
                for b in 0..m {
                    acc += self.rho[(b, a)] * y[(p * m + a, q * m + b)];
                }
            }
            acc
        })
    }

    fn to_element(&self, b: &DMatrix<C64>) -> AlgebraElement {
        let d = self.ctx.d();
        AlgebraElement::from_vec_unchecked(d, (0..d * d).map(|i| b[(i / d, i % d)]).collect())
    }

    /// `X (b_1⊗1) X ⋯ (b_n⊗1) X`.
    fn word(&self, args: &[AlgebraElement]) -> DMatrix<C64> {
        let mut acc = self.x.clone();
        for b in args {
            acc = acc * self.embed(&b.to_dmatrix()) * &self.x;
        }
        acc
    }

    pub fn phi(&self, args: &[AlgebraElement]) -> AlgebraElement {
        self.to_element(&self.phi_raw(&self.word(args)))
    }

    pub fn psi(&self, args: &[AlgebraElement]) -> AlgebraElement {
        self.ctx.project(&self.to_element(&self.rho_trace(&self.word(args))))
    }

    pub fn spec(&self, label: impl Into<String>, truncation: usize) -> Result<MomentSpec> {
        let m = MultilinearSeries::from_fn(self.ctx, truncation, |args| Ok(self.psi(args)))?;
        let mfrak = MultilinearSeries::from_fn(self.ctx, truncation, |args| Ok(self.phi(args)))?;
        MomentSpec::new(label, m, mfrak)
    }
}

/// Moment data of a seeded Hermitian matrix model.
pub fn matrix_model_spec(ctx: AlgebraContext, m: usize, seed: u64, truncation: usize) -> Result<MomentSpec> {
    MatrixModel::sample(ctx, m, seed)?.spec(format!("X{seed}"), truncation)
}

/// Largest distance, over `words` and both expectations, between direct
/// evaluation in the product of three generators and evaluation with either
/// adjacent pair grouped into one algebra.
pub fn grouping_deviation(specs: [&MomentSpec; 3], words: &[Word]) -> Result<f64> {
    let [a, b, c] = specs.map(|s| s.clone());
    let cap = words.iter().map(Word::len).max().unwrap_or(0).max(DEFAULT_WORD_CAP);
    let direct = CFreeProduct::new(vec![a.clone(), b.clone(), c.clone()])?.with_word_cap(cap);
    let left = CFreeProduct::grouped(CFreeProduct::new(vec![a.clone(), b.clone()])?.with_word_cap(cap), vec![c.clone()])?;
    let right = CFreeProduct::grouped(CFreeProduct::new(vec![b, c])?.with_word_cap(cap), vec![a])?;
    let mut worst: f64 = 0.0;
    for w in words {
        for which in [Expectation::Psi, Expectation::Phi] {
            let v = direct.expectation(w, which)?;
            let scale = v.max_abs().max(1.0);
            for grouped in [&left, &right] {
                worst = worst.max(grouped.expectation(w, which)?.distance(&v) / scale);
            }
        }
    }
    Ok(worst)
}

/// Random words over `labels` with `1..=max_len` letters, no run longer than
/// `max_run`, and Gaussian coefficients.
pub fn random_words<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    labels: &[&str],
    count: usize,
    max_len: usize,
    max_run: usize,
) -> Vec<Word> {
    let mut words = Vec::with_capacity(count);
    while words.len() < count {
        let len = rng.random_range(1..=max_len.max(1));
        let mut letters: Vec<String> = Vec::with_capacity(len);
        let mut run = 0;
        while letters.len() < len {
            let l = labels[rng.random_range(0..labels.len())];
            let same = letters.last().is_some_and(|p| p == l);
            if same && run >= max_run {
                continue;
            }
            run = if same { run + 1 } else { 1 };
            letters.push(l.to_string());
        }
        let coeffs = (0..=len).map(|_| crate::random::random_element(rng, d)).collect();
        words.push(Word { coeffs, labels: letters });
    }
    words
}

/// Whether every Ψ value lies in `D` (checked on basis arguments).
pub fn psi_is_d_valued(spec: &MomentSpec, tol: f64) -> bool {
    let ctx = spec.ctx();
    ctx.kind() == SubalgebraKind::Full || spec.m.project_onto_d().max_deviation(&spec.m).is_ok_and(|dev| dev <= tol)
}
