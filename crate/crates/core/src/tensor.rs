//! Dense kernels on coefficient tensors of multilinear maps `Bⁿ → B`.
//!
//! A map with `n` inputs over `B = M_d(C)` is stored as `D^(n+1)` complex
//! numbers, `D = d²`, indexed `(out, i_1, …, i_n)` row-major: the output
//! basis index is the most significant.

use num_complex::Complex64 as C64;

use crate::algebra::matmul;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub(crate) fn len_for(dim: usize, inputs: usize) -> usize {
    dim.pow(inputs as u32 + 1)
}

/// The identity map `b ↦ b` as a one-input tensor.
pub(crate) fn identity_map(dim: usize) -> Vec<C64> {
    let mut t = vec![ZERO; dim * dim];
    for i in 0..dim {
        t[i * dim + i] = C64::new(1.0, 0.0);
    }
    t
}

/// Tensor of `(b_1..b_{ka+kb}) ↦ a(b_1..b_ka) · b(b_{ka+1}..)` (product in `B`).
pub(crate) fn product(d: usize, a: &[C64], ka: usize, b: &[C64], kb: usize) -> Vec<C64> {
    let dim = d * d;
    let ia = dim.pow(ka as u32);
    let ib = dim.pow(kb as u32);
    debug_assert_eq!(a.len(), dim * ia);
    debug_assert_eq!(b.len(), dim * ib);
    let gather = |t: &[C64], inner: usize| -> Vec<C64> {
        let mut g = vec![ZERO; t.len()];
        for out in 0..dim {
            for i in 0..inner {
                g[i * dim + out] = t[out * inner + i];
            }
        }
        g
    };
    let ga = gather(a, ia);
    let gb = gather(b, ib);
    let total = ia * ib;
    let mut result = vec![ZERO; dim * total];
    let mut buf = vec![ZERO; dim];
    for i in 0..ia {
        let am = &ga[i * dim..(i + 1) * dim];
        if am.iter().all(|z| *z == ZERO) {
            continue;
        }
        for j in 0..ib {
            let bm = &gb[j * dim..(j + 1) * dim];
            matmul(d, am, bm, &mut buf);
            let col = i * ib + j;
            for (out, v) in buf.iter().enumerate() {
                result[out * total + col] = *v;
            }
        }
    }
    result
}

/// Replaces input `slot` (0-based) of an `n`-input tensor `t` by the output
/// of the `p`-input tensor `s`; the result has `n - 1 + p` inputs.
pub(crate) fn substitute(dim: usize, t: &[C64], n: usize, slot: usize, s: &[C64], p: usize) -> Vec<C64> {
    debug_assert!(slot < n);
    let a_len = dim.pow(slot as u32 + 1);
    let c_len = dim.pow((n - 1 - slot) as u32);
    let p_len = dim.pow(p as u32);
    debug_assert_eq!(t.len(), a_len * dim * c_len);
    debug_assert_eq!(s.len(), dim * p_len);
    let mut result = vec![ZERO; a_len * p_len * c_len];
    for a in 0..a_len {
        for x in 0..dim {
            let tv = &t[(a * dim + x) * c_len..(a * dim + x + 1) * c_len];
            if tv.iter().all(|z| *z == ZERO) {
                continue;
            }
            let srow = &s[x * p_len..(x + 1) * p_len];
            for (q, &sq) in srow.iter().enumerate() {
                if sq == ZERO {
                    continue;
                }
                let dst = &mut result[(a * p_len + q) * c_len..(a * p_len + q + 1) * c_len];
                for (r, v) in dst.iter_mut().zip(tv) {
                    *r += sq * v;
                }
            }
        }
    }
    result
}

/// Applies the linear map `l` (a one-input tensor) to the output of `t`.
pub(crate) fn map_output(dim: usize, l: &[C64], t: &[C64], n: usize) -> Vec<C64> {
    substitute(dim, l, 1, 0, t, n)
}

/// Evaluates an `args.len()`-input tensor on coordinate vectors.
pub(crate) fn evaluate(dim: usize, t: &[C64], args: &[&[C64]]) -> Vec<C64> {
    let mut cur: Vec<C64> = t.to_vec();
    for arg in args.iter().rev() {
        let rows = cur.len() / dim;
        let mut next = vec![ZERO; rows];
        for (r, out) in next.iter_mut().enumerate() {
            let row = &cur[r * dim..(r + 1) * dim];
            *out = row.iter().zip(arg.iter()).map(|(a, b)| a * b).sum();
        }
        cur = next;
    }
    cur
}

pub(crate) fn axpy(acc: &mut [C64], alpha: C64, x: &[C64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += alpha * v;
    }
}

pub(crate) fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraElement;
    use crate::random::{gaussian_entries, random_element, seeded};

    // Direct evaluation through basis expansion, independent of the kernels.
    fn eval_direct(d: usize, t: &[C64], args: &[AlgebraElement]) -> AlgebraElement {
        let dim = d * d;
        let n = args.len();
        let inner = dim.pow(n as u32);
        let mut out = vec![ZERO; dim];
        for idx in 0..inner {
            let mut coeff = C64::new(1.0, 0.0);
            let mut rem = idx;
            for j in (0..n).rev() {
                coeff *= args[j].entries()[rem % dim];
                rem /= dim;
            }
            for o in 0..dim {
                out[o] += t[o * inner + idx] * coeff;
            }
        }
        AlgebraElement::from_entries(d, out).unwrap()
    }

    #[test]
    fn product_matches_pointwise_product() {
        let mut rng = seeded(5);
        let d = 2;
        let a = gaussian_entries(&mut rng, len_for(4, 2), 1.0);
        let b = gaussian_entries(&mut rng, len_for(4, 1), 1.0);
        let ab = product(d, &a, 2, &b, 1);
        let args: Vec<_> = (0..3).map(|_| random_element(&mut rng, d)).collect();
        let lhs = eval_direct(d, &ab, &args);
        let rhs = &eval_direct(d, &a, &args[..2]) * &eval_direct(d, &b, &args[2..]);
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn substitute_matches_nested_evaluation() {
        let mut rng = seeded(6);
        let d = 2;
        let t = gaussian_entries(&mut rng, len_for(4, 3), 1.0);
        let s = gaussian_entries(&mut rng, len_for(4, 2), 1.0);
        let r = substitute(4, &t, 3, 1, &s, 2);
        let args: Vec<_> = (0..4).map(|_| random_element(&mut rng, d)).collect();
        let inner = eval_direct(d, &s, &args[1..3]);
        let lhs = eval_direct(d, &r, &args);
        let rhs = eval_direct(d, &t, &[args[0].clone(), inner, args[3].clone()]);
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn evaluate_matches_direct() {
        let mut rng = seeded(7);
        let t = gaussian_entries(&mut rng, len_for(4, 3), 1.0);
        let args: Vec<_> = (0..3).map(|_| random_element(&mut rng, 2)).collect();
        let refs: Vec<&[C64]> = args.iter().map(|a| a.entries()).collect();
        let fast = AlgebraElement::from_entries(2, evaluate(4, &t, &refs)).unwrap();
        assert!(fast.distance(&eval_direct(2, &t, &args)) < 1e-12);
    }
}
