//! The base algebra `B = M_d(C)`, its subalgebra `D` and positivity checks.
//!
//! Elements are stored row-major; the matrix unit `E_pq` has flat index
//! `p * d + q`, which is also the basis index used by every tensor in
//! [`crate::mfs`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{CfreeError, Result};

/// Which subalgebra `D ⊆ B` the Ψ-side expectation lands in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubalgebraKind {
    Full,
    Diagonal,
    Scalar,
}

impl std::str::FromStr for SubalgebraKind {
    type Err = CfreeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "diagonal" => Ok(Self::Diagonal),
            "scalar" => Ok(Self::Scalar),
            other => Err(CfreeError::InvalidConfig(format!("unknown subalgebra kind `{other}`"))),
        }
    }
}

impl fmt::Display for SubalgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::Diagonal => "diagonal",
            Self::Scalar => "scalar",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraContext {
    d: usize,
    kind: SubalgebraKind,
}

impl AlgebraContext {
    pub fn new(d: usize, kind: SubalgebraKind) -> Result<Self> {
        if d == 0 {
            return Err(CfreeError::InvalidConfig("matrix size d must be positive".into()));
        }
        Ok(Self { d, kind })
    }

    /// `B = M_d(C)` with `D = B`.
    pub fn full(d: usize) -> Self {
        Self::new(d, SubalgebraKind::Full).expect("d > 0")
    }

    /// The scalar base algebra `B = D = C`.
    pub fn scalar() -> Self {
        Self::full(1)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> SubalgebraKind {
        self.kind
    }

    /// Dimension of `B` as a vector space, `d²`.
    pub fn dim(&self) -> usize {
        self.d * self.d
    }

    pub fn identity(&self) -> AlgebraElement {
        AlgebraElement::identity(self.d)
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement::zero(self.d)
    }

    pub fn basis(&self, index: usize) -> AlgebraElement {
        AlgebraElement::matrix_unit(self.d, index)
    }

    pub fn check(&self, b: &AlgebraElement) -> Result<()> {
        if b.d != self.d {
            return Err(CfreeError::DimensionMismatch { expected: self.d, actual: b.d });
        }
        Ok(())
    }

    /// The conditional expectation `B → D` (a pinching).
    pub fn expectation_onto_d(&self, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(b)?;
        Ok(self.project(b))
    }

    pub(crate) fn project(&self, b: &AlgebraElement) -> AlgebraElement {
        let d = self.d;
        match self.kind {
            SubalgebraKind::Full => b.clone(),
            SubalgebraKind::Diagonal => {
                let mut out = AlgebraElement::zero(d);
                for p in 0..d {
                    out.entries[p * d + p] = b.entries[p * d + p];
                }
                out
            }
            SubalgebraKind::Scalar => AlgebraElement::scalar(d, b.trace() / d as f64),
        }
    }

    /// True when `b` is fixed by the expectation onto `D`, up to `tol`.
    pub fn is_in_subalgebra(&self, b: &AlgebraElement, tol: f64) -> bool {
        self.project(b).distance(b) <= tol
    }
}

/// A `d × d` complex matrix.
#[derive(Clone, PartialEq)]
pub struct AlgebraElement {
    d: usize,
    entries: Vec<C64>,
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[C64]> = self.entries.chunks(self.d).collect();
        f.debug_struct("AlgebraElement").field("d", &self.d).field("rows", &rows).finish()
    }
}

impl AlgebraElement {
    pub fn from_entries(d: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != d * d {
            return Err(CfreeError::DimensionMismatch { expected: d * d, actual: entries.len() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CfreeError::NonFinite);
        }
        Ok(Self { d, entries })
    }

    pub(crate) fn from_vec_unchecked(d: usize, entries: Vec<C64>) -> Self {
        debug_assert_eq!(entries.len(), d * d);
        Self { d, entries }
    }

    /// Builds an element from real rows, e.g. `[[1., 5.], [7., 2.]]`.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.len();
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(CfreeError::DimensionMismatch { expected: d, actual: row.len() });
            }
            entries.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::from_entries(d, entries)
    }

    pub fn zero(d: usize) -> Self {
        Self { d, entries: vec![C64::new(0.0, 0.0); d * d] }
    }

    pub fn identity(d: usize) -> Self {
        Self::scalar(d, C64::new(1.0, 0.0))
    }

    pub fn scalar(d: usize, c: C64) -> Self {
        let mut out = Self::zero(d);
        for p in 0..d {
            out.entries[p * d + p] = c;
        }
        out
    }

    pub fn matrix_unit(d: usize, index: usize) -> Self {
        let mut out = Self::zero(d);
        out.entries[index] = C64::new(1.0, 0.0);
        out
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Row-major entries; also the coordinates in the matrix-unit basis.
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    pub fn get(&self, p: usize, q: usize) -> C64 {
        self.entries[p * self.d + q]
    }

    pub fn adjoint(&self) -> Self {
        let d = self.d;
        let mut out = Self::zero(d);
        for p in 0..d {
            for q in 0..d {
                out.entries[q * d + p] = self.entries[p * d + q].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.d).map(|p| self.entries[p * self.d + p]).sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { d: self.d, entries: self.entries.iter().map(|z| z * c).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()) <= tol
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.d, self.d, &self.entries)
    }

    /// Ratio of extreme singular values; `inf` for exactly singular input.
    pub fn condition_number(&self) -> f64 {
        condition_number(self.to_dmatrix())
    }

    pub fn inverse(&self) -> Option<Self> {
        let inv = self.to_dmatrix().try_inverse()?;
        let mut entries = Vec::with_capacity(self.d * self.d);
        for p in 0..self.d {
            for q in 0..self.d {
                entries.push(inv[(p, q)]);
            }
        }
        Some(Self { d: self.d, entries })
    }

    /// Inverse, refusing matrices with condition number above `1e12`.
    pub fn checked_inverse(&self, what: &'static str) -> Result<Self> {
        let condition = self.condition_number();
        if condition.is_nan() || condition > SINGULAR_CONDITION {
            return Err(CfreeError::Singular { what, condition });
        }
        self.inverse().ok_or(CfreeError::Singular { what, condition })
    }
}

pub(crate) const SINGULAR_CONDITION: f64 = 1e12;

pub(crate) fn condition_number(m: DMatrix<C64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub(crate) fn matmul(d: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    for p in 0..d {
        for r in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for q in 0..d {
                acc += a[p * d + q] * b[q * d + r];
            }
            out[p * d + r] = acc;
        }
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;

    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.d, rhs.d, "algebra elements of different size");
        let mut out = AlgebraElement::zero(self.d);
        matmul(self.d, &self.entries, &rhs.entries, &mut out.entries);
        out
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;

    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.d, rhs.d, "algebra elements of different size");
        AlgebraElement {
            d: self.d,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;

    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.d, rhs.d, "algebra elements of different size");
        AlgebraElement {
            d: self.d,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        self.scale(C64::new(-1.0, 0.0))
    }
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    d: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for AlgebraElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            self.entries.chunks(self.d).map(|row| row.iter().map(f).collect()).collect()
        };
        ElementJson { d: self.d, re: rows(|z| z.re), im: rows(|z| z.im) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = ElementJson::deserialize(de)?;
        let d = raw.d;
        if raw.re.len() != d || raw.im.len() != d {
            return Err(D::Error::custom("re/im must have d rows"));
        }
        let mut entries = Vec::with_capacity(d * d);
        for (re, im) in raw.re.iter().zip(&raw.im) {
            if re.len() != d || im.len() != d {
                return Err(D::Error::custom("re/im rows must have d entries"));
            }
            entries.extend(re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)));
        }
        AlgebraElement::from_entries(d, entries).map_err(D::Error::custom)
    }
}

/// An element of `M_k(B)`, blocks stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    k: usize,
    d: usize,
    blocks: Vec<AlgebraElement>,
}

impl BlockMatrix {
    pub fn new(k: usize, blocks: Vec<AlgebraElement>) -> Result<Self> {
        if blocks.len() != k * k {
            return Err(CfreeError::DimensionMismatch { expected: k * k, actual: blocks.len() });
        }
        let d = blocks.first().map_or(1, |b| b.d);
        if let Some(bad) = blocks.iter().find(|b| b.d != d) {
            return Err(CfreeError::DimensionMismatch { expected: d, actual: bad.d });
        }
        Ok(Self { k, d, blocks })
    }

    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> AlgebraElement) -> Result<Self> {
        let mut blocks = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                blocks.push(f(i, j));
            }
        }
        Self::new(k, blocks)
    }

    pub fn identity(k: usize, d: usize) -> Self {
        Self::from_fn(k, |i, j| if i == j { AlgebraElement::identity(d) } else { AlgebraElement::zero(d) })
            .expect("consistent blocks")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.blocks[i * self.k + j]
    }

    /// The `(k·d) × (k·d)` complex matrix; row `(i, p)` sits at `i * d + p`.
    pub fn flatten(&self) -> DMatrix<C64> {
        let (k, d) = (self.k, self.d);
        DMatrix::from_fn(k * d, k * d, |r, c| self.blocks[(r / d) * k + c / d].get(r % d, c % d))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdVerdict {
    Positive,
    NotPositive,
    NotHermitian,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsdReport {
    pub verdict: PsdVerdict,
    pub hermitian_defect: f64,
    pub min_eigenvalue: f64,
    pub spectral_radius: f64,
}

impl PsdReport {
    pub fn is_positive(&self) -> bool {
        self.verdict == PsdVerdict::Positive
    }
}

/// Positive iff Hermitian within `tol` (max-entry norm) and the smallest
/// eigenvalue is at least `-tol * (1 + spectral radius)`.
pub fn psd_check(h: &BlockMatrix, tol: f64) -> PsdReport {
    let m = h.flatten();
    let hermitian_defect = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let sym = (&m + m.adjoint()).map(|z| z * 0.5);
    let eigenvalues = sym.symmetric_eigenvalues();
    let min_eigenvalue = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let spectral_radius = eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let verdict = if hermitian_defect > tol {
        PsdVerdict::NotHermitian
    } else if min_eigenvalue < -tol * (1.0 + spectral_radius) {
        PsdVerdict::NotPositive
    } else {
        PsdVerdict::Positive
    };
    PsdReport { verdict, hermitian_defect, min_eigenvalue, spectral_radius }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_element, seeded};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn pinching_examples() {
        let scalar = AlgebraContext::new(2, SubalgebraKind::Scalar).unwrap();
        let diag = AlgebraContext::new(2, SubalgebraKind::Diagonal).unwrap();
        let id = AlgebraElement::identity(2);
        assert_eq!(scalar.expectation_onto_d(&id).unwrap(), id);

        let b = AlgebraElement::from_real_rows(&[[1.0, 5.0], [7.0, 2.0]]).unwrap();
        let expected = AlgebraElement::from_real_rows(&[[1.0, 0.0], [0.0, 2.0]]).unwrap();
        assert_eq!(diag.expectation_onto_d(&b).unwrap(), expected);

        let nilpotent = AlgebraElement::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(scalar.expectation_onto_d(&nilpotent).unwrap(), AlgebraElement::zero(2));
    }

    #[test]
    fn pinching_rejects_wrong_size() {
        let ctx = AlgebraContext::full(2);
        assert!(matches!(
            ctx.expectation_onto_d(&AlgebraElement::identity(3)),
            Err(CfreeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pinching_is_idempotent_and_bimodular() {
        let mut rng = seeded(11);
        for kind in [SubalgebraKind::Full, SubalgebraKind::Diagonal, SubalgebraKind::Scalar] {
            let ctx = AlgebraContext::new(3, kind).unwrap();
            for _ in 0..1000 {
                let b = random_element(&mut rng, 3);
                let once = ctx.project(&b);
                assert_eq!(ctx.project(&once), once);
            }
            for _ in 0..100 {
                let b = random_element(&mut rng, 3);
                let d1 = ctx.project(&random_element(&mut rng, 3));
                let d2 = ctx.project(&random_element(&mut rng, 3));
                let lhs = ctx.project(&(&(&d1 * &b) * &d2));
                let rhs = &(&d1 * &ctx.project(&b)) * &d2;
                assert!(lhs.distance(&rhs) < 1e-12, "{kind}");
            }
        }
        let full = AlgebraContext::full(2);
        let b = random_element(&mut rng, 2);
        assert_eq!(full.project(&b), b);
    }

    #[test]
    fn psd_examples() {
        assert!(psd_check(&BlockMatrix::identity(3, 2), 1e-9).is_positive());
        let one = |x: f64| AlgebraElement::scalar(1, c(x));
        let h = BlockMatrix::new(2, vec![one(1.0), one(2.0), one(2.0), one(1.0)]).unwrap();
        let report = psd_check(&h, 1e-9);
        assert_eq!(report.verdict, PsdVerdict::NotPositive);
        assert!((report.min_eigenvalue + 1.0).abs() < 1e-12);

        let skew = BlockMatrix::new(2, vec![one(1.0), one(2.0), one(0.0), one(1.0)]).unwrap();
        assert_eq!(psd_check(&skew, 1e-9).verdict, PsdVerdict::NotHermitian);
    }

    #[test]
    fn gram_of_random_elements_is_positive() {
        let mut rng = seeded(3);
        for _ in 0..50 {
            let vs: Vec<_> = (0..5).map(|_| random_element(&mut rng, 2)).collect();
            let g = BlockMatrix::from_fn(5, |i, j| &vs[i].adjoint() * &vs[j]).unwrap();
            assert!(psd_check(&g, 1e-9).is_positive());
        }
    }

    #[test]
    fn json_form() {
        let b = AlgebraElement::from_entries(2, vec![c(1.0), C64::new(0.0, 2.0), c(3.0), c(4.0)]).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        assert_eq!(text, r#"{"d":2,"re":[[1.0,0.0],[3.0,4.0]],"im":[[0.0,2.0],[0.0,0.0]]}"#);
        let back: AlgebraElement = serde_json::from_str(&text).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<AlgebraElement>(r#"{"d":2,"re":[[1.0]],"im":[[0.0]]}"#).is_err());
    }

    #[test]
    fn inverse_and_condition() {
        let b = AlgebraElement::from_real_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        let inv = b.checked_inverse("b").unwrap();
        assert!((&b * &inv).distance(&AlgebraElement::identity(2)) < 1e-14);
        let singular = AlgebraElement::from_real_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(singular.checked_inverse("s"), Err(CfreeError::Singular { .. })));
    }
}
