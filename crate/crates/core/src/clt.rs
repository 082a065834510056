//! Central limit machinery: pair-partition evaluation of the limit
//! expectations and the exact scaling of cR under `X ↦ X/√N`.

use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{CfreeError, Result};
use crate::mfs::MultilinearSeries;
use crate::moments::{sum_spec, MomentSpec};
use crate::partitions::{enumerate_nc_pairings, NonCrossingPartition};
use crate::transforms::{cr_from_moments, moments_from_cr, moments_from_r, r_from_moments};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    /// Limit of the Ψ-distribution.
    Nu,
    /// Limit of the Φ-distribution.
    Mu,
}

struct PairEval<'a> {
    psi_cov: &'a MultilinearSeries,
    phi_cov: &'a MultilinearSeries,
    partner: Vec<usize>,
    args: &'a [AlgebraElement],
}

impl PairEval<'_> {
    fn unit(&self) -> AlgebraElement {
        self.psi_cov.ctx().identity()
    }

    // positions lo..=hi, generator i followed by args[i - 1]
    fn eval(&self, lo: usize, hi: usize, outer: bool) -> Result<AlgebraElement> {
        if lo > hi {
            return Ok(self.unit());
        }
        let k = self.partner[lo];
        let b = |i: usize| &self.args[i - 1];
        let arg = if k == lo + 1 {
            b(lo).clone()
        } else {
            let inner = self.eval(lo + 1, k - 1, false)?;
            &(b(lo) * &inner) * b(k - 1)
        };
        let cov = if outer { self.phi_cov } else { self.psi_cov };
        let head = cov.eval(&[arg])?;
        if k == hi {
            return Ok(head);
        }
        let tail = self.eval(k + 1, hi, outer)?;
        Ok(&(&head * b(k)) * &tail)
    }
}

fn pair_eval<'a>(spec: &'a MomentSpec, pi: &NonCrossingPartition, args: &'a [AlgebraElement]) -> Result<PairEval<'a>> {
    if pi.n() != args.len() + 1 {
        return Err(CfreeError::InvalidPartition(format!(
            "{} points for a word with {} generators",
            pi.n(),
            args.len() + 1
        )));
    }
    Ok(PairEval { psi_cov: &spec.m, phi_cov: &spec.mfrak, partner: pi.partners()?, args })
}

/// `V_π(b_1..b_n)`: every block carries the Ψ-covariance `M_1`.
pub fn v_pi(spec: &MomentSpec, pi: &NonCrossingPartition, args: &[AlgebraElement]) -> Result<AlgebraElement> {
    pair_eval(spec, pi, args)?.eval(1, pi.n(), false)
}

/// `W_π(b_1..b_n)`: outer blocks carry `𝔐_1`, interior blocks `M_1`.
pub fn w_pi(spec: &MomentSpec, pi: &NonCrossingPartition, args: &[AlgebraElement]) -> Result<AlgebraElement> {
    pair_eval(spec, pi, args)?.eval(1, pi.n(), true)
}

/// `ν(ξ b_1 ξ ⋯ b_n ξ)` or `μ(…)` as a sum over `NC₂(n+1)`.
pub fn limit_moment(spec: &MomentSpec, which: Limit, args: &[AlgebraElement]) -> Result<AlgebraElement> {
    let mut total = AlgebraElement::zero(spec.ctx().d());
    for pi in enumerate_nc_pairings(args.len() + 1) {
        let term = match which {
            Limit::Nu => v_pi(spec, &pi, args)?,
            Limit::Mu => w_pi(spec, &pi, args)?,
        };
        total = &total + &term;
    }
    Ok(total)
}

/// The limit moment series to degree `truncation`.
pub fn limit_series(spec: &MomentSpec, which: Limit, truncation: usize) -> Result<MultilinearSeries> {
    MultilinearSeries::from_fn(spec.ctx(), truncation, |args| limit_moment(spec, which, args))
}

/// `(0, 𝔐_1, 0, …)` and `(0, M_1, 0, …)` to degree `truncation`.
pub fn one_term_transforms(spec: &MomentSpec, truncation: usize) -> Result<(MultilinearSeries, MultilinearSeries)> {
    let keep = |s: &MultilinearSeries| {
        let mut comps = MultilinearSeries::zero(s.ctx(), truncation).components().to_vec();
        if truncation >= 1 {
            comps[1] = s.component(1)?.to_vec();
        }
        MultilinearSeries::from_components(s.ctx(), comps)
    };
    Ok((keep(&spec.mfrak)?, keep(&spec.m)?))
}

/// Limit moments from the one-term transforms: `ν = moments_from_r((0, M_1, 0, …))`
/// and `μ = moments_from_cr((0, 𝔐_1, 0, …), ν)`.
pub fn limit_series_from_transforms(
    spec: &MomentSpec,
    truncation: usize,
) -> Result<(MultilinearSeries, MultilinearSeries)> {
    let (cr, r) = one_term_transforms(spec, truncation)?;
    let nu = moments_from_r(&r, truncation)?;
    let mu = moments_from_cr(&cr, &nu, truncation)?;
    Ok((nu, mu))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n_copies: usize,
    /// `|N cR_{X/√N, n} − N^{(1-n)/2} cR_{X, n}|` per degree `n`.
    pub cr_scaling_deviations: Vec<f64>,
    pub r_scaling_deviations: Vec<f64>,
    /// Distance of the degree-1 components from `𝔐_1` and `M_1`.
    pub cr_linear_deviation: f64,
    pub r_linear_deviation: f64,
    /// Largest entry of the components of degree `≠ 1`.
    pub higher_degree_size: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingReport {
    pub degree: usize,
    pub rows: Vec<ScalingRow>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// cR and R of `S_N = (X_1 + … + X_N)/√N` for c-free copies, via
/// additivity and dilation, against the exact scaling law.
pub fn clt_scaling_check(spec: &MomentSpec, n_values: &[usize], degree: usize, tol: f64) -> Result<ScalingReport> {
    if !spec.is_centered(0.0) {
        return Err(CfreeError::NotCentered(spec.label.clone()));
    }
    let spec = spec.truncated(degree)?;
    let cr_x = cr_from_moments(&spec.mfrak, &spec.m)?;
    let r_x = r_from_moments(&spec.m)?;
    let mut rows = Vec::with_capacity(n_values.len());
    let mut max_deviation: f64 = 0.0;
    for &n in n_values {
        if n == 0 {
            return Err(CfreeError::InvalidConfig("number of copies must be positive".into()));
        }
        let nf = n as f64;
        let scaled = spec.dilate(1.0 / nf.sqrt())?;
        let cr_s = cr_from_moments(&scaled.mfrak, &scaled.m)?.scale(nf.into());
        let r_s = r_from_moments(&scaled.m)?.scale(nf.into());
        let law = |s: &MultilinearSeries| -> Vec<Vec<num_complex::Complex64>> {
            s.components()
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let f = nf.powf((1.0 - k as f64) / 2.0);
                    t.iter().map(|z| z * f).collect()
                })
                .collect()
        };
        let cr_law = MultilinearSeries::from_components(spec.ctx(), law(&cr_x))?;
        let r_law = MultilinearSeries::from_components(spec.ctx(), law(&r_x))?;
        let cr_scaling_deviations = cr_s.degree_deviations(&cr_law)?;
        let r_scaling_deviations = r_s.degree_deviations(&r_law)?;
        let linear = |s: &MultilinearSeries, t: &MultilinearSeries| -> Result<f64> {
            Ok(crate::tensor::max_abs_diff(s.component(1)?, t.component(1)?))
        };
        let (cr_linear_deviation, r_linear_deviation) =
            if degree >= 1 { (linear(&cr_s, &spec.mfrak)?, linear(&r_s, &spec.m)?) } else { (0.0, 0.0) };
        let higher_degree_size = cr_s
            .components()
            .iter()
            .chain(r_s.components())
            .enumerate()
            .filter(|(k, _)| k % (degree + 1) != 1)
            .flat_map(|(_, t)| t.iter().map(|z| z.norm()))
            .fold(0.0, f64::max);
        max_deviation = cr_scaling_deviations
            .iter()
            .chain(&r_scaling_deviations)
            .chain([&cr_linear_deviation, &r_linear_deviation])
            .fold(max_deviation, |a, &b| a.max(b));
        rows.push(ScalingRow {
            n_copies: n,
            cr_scaling_deviations,
            r_scaling_deviations,
            cr_linear_deviation,
            r_linear_deviation,
            higher_degree_size,
        });
    }
    Ok(ScalingReport { degree, rows, max_deviation, passed: max_deviation <= tol })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_copies: usize,
    pub psi_error: f64,
    pub phi_error: f64,
}

/// Moments of `S_N` built directly with the moment oracle by summing `N`
/// c-free copies, compared with the limit at degree `degree`.
pub fn direct_convergence(spec: &MomentSpec, n_values: &[usize], degree: usize) -> Result<Vec<ConvergenceRow>> {
    let spec = spec.truncated(degree)?;
    let nu = limit_series(&spec, Limit::Nu, degree)?;
    let mu = limit_series(&spec, Limit::Mu, degree)?;
    let mut rows = Vec::new();
    for &n in n_values {
        if n == 0 {
            return Err(CfreeError::InvalidConfig("number of copies must be positive".into()));
        }
        let mut acc = spec.clone().with_label("s");
        for i in 1..n {
            acc = sum_spec(&acc, &spec.clone().with_label(format!("x{i}")), degree)?.with_label("s");
        }
        let s = acc.dilate(1.0 / (n as f64).sqrt())?;
        let psi_error = crate::tensor::max_abs_diff(s.m.component(degree)?, nu.component(degree)?);
        let phi_error = crate::tensor::max_abs_diff(s.mfrak.component(degree)?, mu.component(degree)?);
        rows.push(ConvergenceRow { n_copies: n, psi_error, phi_error });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraContext;
    use crate::random::{random_element, seeded};
    use num_complex::Complex64 as C64;

    fn scalar_spec(a: f64, c: f64, n: usize) -> MomentSpec {
        let mut psi = vec![0.0; n + 1];
        let mut phi = vec![0.0; n + 1];
        psi[1] = a;
        phi[1] = c;
        MomentSpec::scalar("x", &psi, &phi).unwrap()
    }

    fn ones(n: usize) -> Vec<AlgebraElement> {
        vec![AlgebraElement::identity(1); n]
    }

    fn value(e: AlgebraElement) -> C64 {
        e.get(0, 0)
    }

    #[test]
    fn pair_values() {
        let mut rng = seeded(1);
        let ctx = AlgebraContext::full(2);
        let spec = MomentSpec::random(&mut rng, ctx, "x", 2, true);
        let b: Vec<_> = (0..3).map(|_| random_element(&mut rng, 2)).collect();
        let single = NonCrossingPartition::new(vec![vec![1, 2]]).unwrap();
        assert_eq!(v_pi(&spec, &single, &b[..1]).unwrap(), spec.m.eval(&b[..1]).unwrap());
        assert_eq!(w_pi(&spec, &single, &b[..1]).unwrap(), spec.mfrak.eval(&b[..1]).unwrap());

        let nested = NonCrossingPartition::new(vec![vec![1, 4], vec![2, 3]]).unwrap();
        let inner = spec.m.eval(&b[1..2]).unwrap();
        let expected = spec.m.eval(&[&(&b[0] * &inner) * &b[2]]).unwrap();
        assert!(v_pi(&spec, &nested, &b).unwrap().distance(&expected) < 1e-14);
        let expected = spec.mfrak.eval(&[&(&b[0] * &inner) * &b[2]]).unwrap();
        assert!(w_pi(&spec, &nested, &b).unwrap().distance(&expected) < 1e-14);

        let crossing_free = NonCrossingPartition::new(vec![vec![1, 2], vec![3, 4]]).unwrap();
        let expected = &(&spec.mfrak.eval(&b[..1]).unwrap() * &b[1]) * &spec.mfrak.eval(&b[2..3]).unwrap();
        assert!(w_pi(&spec, &crossing_free, &b).unwrap().distance(&expected) < 1e-14);
        assert!(v_pi(&spec, &nested, &b[..2]).is_err());
    }

    #[test]
    fn scalar_pair_values() {
        let spec = scalar_spec(3.0, 2.0, 2);
        let nested = NonCrossingPartition::new(vec![vec![1, 4], vec![2, 3]]).unwrap();
        let disjoint = NonCrossingPartition::new(vec![vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(value(w_pi(&spec, &nested, &ones(3)).unwrap()), C64::new(6.0, 0.0));
        assert_eq!(value(w_pi(&spec, &disjoint, &ones(3)).unwrap()), C64::new(4.0, 0.0));
        let unit = scalar_spec(1.0, 1.0, 2);
        for pi in enumerate_nc_pairings(6) {
            assert_eq!(value(v_pi(&unit, &pi, &ones(5)).unwrap()), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn scalar_limits() {
        let unit = scalar_spec(1.0, 1.0, 2);
        for (len, cat) in [(2, 1.0), (4, 2.0), (6, 5.0), (8, 14.0)] {
            assert_eq!(value(limit_moment(&unit, Limit::Nu, &ones(len - 1)).unwrap()), C64::new(cat, 0.0));
            assert_eq!(value(limit_moment(&unit, Limit::Mu, &ones(len - 1)).unwrap()), C64::new(cat, 0.0));
        }
        assert_eq!(value(limit_moment(&unit, Limit::Nu, &ones(4)).unwrap()), C64::new(0.0, 0.0));
        let spec = scalar_spec(1.0, 2.0, 2);
        assert_eq!(value(limit_moment(&spec, Limit::Mu, &ones(3)).unwrap()), C64::new(6.0, 0.0));
    }

    #[test]
    fn limits_ignore_higher_moments() {
        let mut rng = seeded(2);
        let ctx = AlgebraContext::full(2);
        let spec = MomentSpec::random(&mut rng, ctx, "x", 4, true);
        let mut perturbed = MomentSpec::random(&mut rng, ctx, "x", 4, true);
        let mut m = perturbed.m.components().to_vec();
        m[1] = spec.m.component(1).unwrap().to_vec();
        let mut mf = perturbed.mfrak.components().to_vec();
        mf[1] = spec.mfrak.component(1).unwrap().to_vec();
        perturbed = MomentSpec::new("x", MultilinearSeries::from_components(ctx, m).unwrap(), MultilinearSeries::from_components(ctx, mf).unwrap()).unwrap();
        let b: Vec<_> = (0..3).map(|_| random_element(&mut rng, 2)).collect();
        for which in [Limit::Nu, Limit::Mu] {
            assert_eq!(limit_moment(&spec, which, &b).unwrap(), limit_moment(&perturbed, which, &b).unwrap());
        }
    }

    #[test]
    fn pair_sums_match_transform_limits() {
        let mut rng = seeded(3);
        let ctx = AlgebraContext::full(2);
        let spec = MomentSpec::random(&mut rng, ctx, "x", 1, true);
        let (nu, mu) = limit_series_from_transforms(&spec, 5).unwrap();
        assert!(limit_series(&spec, Limit::Nu, 5).unwrap().max_deviation(&nu).unwrap() < 1e-10);
        assert!(limit_series(&spec, Limit::Mu, 5).unwrap().max_deviation(&mu).unwrap() < 1e-10);
    }

    #[test]
    fn scaling_law_is_exact() {
        let mut rng = seeded(4);
        let ctx = AlgebraContext::full(2);
        let spec = MomentSpec::random(&mut rng, ctx, "x", 4, true);
        let report = clt_scaling_check(&spec, &[1, 4, 100], 4, 1e-10).unwrap();
        assert!(report.passed, "{report:?}");
        let not_centered = MomentSpec::random(&mut rng, ctx, "x", 4, false);
        assert!(matches!(clt_scaling_check(&not_centered, &[1], 4, 1e-10), Err(CfreeError::NotCentered(_))));
    }

    #[test]
    fn direct_sums_approach_the_limit_like_one_over_n() {
        let spec = MomentSpec::scalar("x", &[0.0, 1.0, 0.3, 4.0], &[0.0, 2.0, -0.2, 9.0]).unwrap();
        let rows = direct_convergence(&spec, &[1, 2, 4, 8], 3).unwrap();
        let base = rows[0].psi_error;
        assert!(base > 1e-3);
        for r in &rows {
            assert!((r.psi_error * r.n_copies as f64 - base).abs() < 1e-9 * base.max(1.0));
            assert!((r.phi_error * r.n_copies as f64 - rows[0].phi_error).abs() < 1e-9 * rows[0].phi_error.max(1.0));
        }
    }
}
