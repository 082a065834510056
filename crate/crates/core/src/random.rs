//! Seeded random inputs: Gaussian-entry matrices, Hermitised ensembles and
//! random multilinear series.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraContext, AlgebraElement};
use crate::mfs::MultilinearSeries;

pub type CfreeRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> CfreeRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_entries<R: Rng + ?Sized>(rng: &mut R, len: usize, std: f64) -> Vec<C64> {
    (0..len).map(|_| complex_gaussian(rng) * std).collect()
}

pub fn random_element<R: Rng + ?Sized>(rng: &mut R, d: usize) -> AlgebraElement {
    AlgebraElement::from_vec_unchecked(d, gaussian_entries(rng, d * d, 1.0))
}

/// `(G + G*) / 2` for a Gaussian `G`, scaled so the spectrum stays `O(1)`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let g = gaussian_entries(rng, n * n, 1.0 / (n as f64).sqrt());
    let mut h = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] = (g[i * n + j] + g[j * n + i].conj()) * 0.5;
        }
    }
    h
}

/// Shape of a random series.
#[derive(Clone, Copy, Debug)]
pub struct SeriesShape {
    /// Entry scale of degree-`n` tensors is `scale / d^n`.
    pub scale: f64,
    /// Force the constant term to zero.
    pub centered: bool,
    /// Add the identity map to the degree-1 component (keeps it invertible).
    pub unit_linear_part: bool,
    /// Add the unit to the constant term.
    pub unit_constant: bool,
}

impl Default for SeriesShape {
    fn default() -> Self {
        Self { scale: 0.4, centered: false, unit_linear_part: false, unit_constant: false }
    }
}

pub fn random_series<R: Rng + ?Sized>(
    rng: &mut R,
    ctx: AlgebraContext,
    truncation: usize,
    shape: SeriesShape,
) -> MultilinearSeries {
    let dim = ctx.dim();
    let mut components = Vec::with_capacity(truncation + 1);
    for n in 0..=truncation {
        let len = dim.pow(n as u32 + 1);
        let std = shape.scale / (ctx.d() as f64).powi(n as i32);
        let mut t = gaussian_entries(rng, len, std);
        if n == 0 {
            if shape.centered {
                t.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            }
            if shape.unit_constant {
                for p in 0..ctx.d() {
                    t[p * ctx.d() + p] += 1.0;
                }
            }
        }
        if n == 1 && shape.unit_linear_part {
            for i in 0..dim {
                t[i * dim + i] += 1.0;
            }
        }
        components.push(t);
    }
    MultilinearSeries::from_components(ctx, components).expect("shapes are consistent")
}
