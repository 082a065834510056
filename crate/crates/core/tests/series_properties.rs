use cfree_core::algebra::{AlgebraContext, AlgebraElement, SubalgebraKind};
use cfree_core::mfs::MultilinearSeries;
use cfree_core::random::{random_series, seeded, SeriesShape};
use cfree_core::transforms::{cr_from_moments, moments_from_cr, moments_from_r, r_from_moments};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn ctx_strategy() -> impl Strategy<Value = AlgebraContext> {
    prop_oneof![
        Just(AlgebraContext::scalar()),
        Just(AlgebraContext::full(2)),
        Just(AlgebraContext::new(2, SubalgebraKind::Diagonal).unwrap()),
    ]
}

fn draw(seed: u64, ctx: AlgebraContext, n: usize, shape: SeriesShape) -> [MultilinearSeries; 3] {
    let mut rng = seeded(seed);
    [(); 3].map(|_| random_series(&mut rng, ctx, n, shape))
}

const PLAIN: SeriesShape = SeriesShape { scale: 0.4, centered: false, unit_linear_part: false, unit_constant: false };
const CENTRED: SeriesShape = SeriesShape { centered: true, ..PLAIN };

// Truncated power series arithmetic on plain coefficient vectors.
fn cauchy(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len()).map(|n| (0..=n).map(|k| a[k] * b[n - k]).sum()).collect()
}

fn power_compose(f: &[f64], g: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    let mut power = vec![0.0; f.len()];
    power[0] = 1.0;
    for &fk in f {
        out.iter_mut().zip(&power).for_each(|(o, p)| *o += fk * p);
        power = cauchy(&power, g);
    }
    out
}

fn scalars(s: &MultilinearSeries) -> Vec<f64> {
    s.components().iter().map(|t| t[0].re).collect()
}

fn real_scalar(seed: u64, n: usize) -> Vec<f64> {
    let s = random_series(&mut seeded(seed), AlgebraContext::scalar(), n, PLAIN);
    scalars(&s)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn product_and_composition_associate(seed in any::<u64>(), ctx in ctx_strategy()) {
        let [a, b, c] = draw(seed, ctx, 3, PLAIN);
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        prop_assert!(ab_c.max_deviation(&a.mul(&b.mul(&c).unwrap()).unwrap()).unwrap() < 1e-10);
        let [_, b, c] = draw(seed ^ 1, ctx, 3, CENTRED);
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        prop_assert!(left.max_deviation(&a.compose(&b.compose(&c).unwrap()).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn distributivity(seed in any::<u64>(), ctx in ctx_strategy()) {
        let [a, b, c] = draw(seed, ctx, 3, PLAIN);
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(lhs.max_deviation(&rhs).unwrap() < 1e-12);
        let [_, _, c] = draw(seed, ctx, 3, CENTRED);
        let lhs = a.add(&b).unwrap().compose(&c).unwrap();
        let rhs = a.compose(&c).unwrap().add(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(lhs.max_deviation(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn scalar_series_are_power_series(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (f, mut g) = (real_scalar(s1, 6), real_scalar(s2, 6));
        let (fs, gs) = (MultilinearSeries::from_real_scalars(&f).unwrap(), MultilinearSeries::from_real_scalars(&g).unwrap());
        prop_assert!(close(&scalars(&fs.mul(&gs).unwrap()), &cauchy(&f, &g), 1e-12));
        g[0] = 0.0;
        let gs = MultilinearSeries::from_real_scalars(&g).unwrap();
        prop_assert!(close(&scalars(&fs.compose(&gs).unwrap()), &power_compose(&f, &g), 1e-12));
    }

    #[test]
    fn inverses(seed in any::<u64>(), ctx in ctx_strategy()) {
        let n = 3;
        let one = MultilinearSeries::one(ctx, n);
        let id = MultilinearSeries::identity(ctx, n);
        let [a, _, _] = draw(seed, ctx, n, SeriesShape { unit_constant: true, ..PLAIN });
        let inv = a.mult_inverse().unwrap();
        prop_assert!(a.mul(&inv).unwrap().max_deviation(&one).unwrap() < 1e-10);
        prop_assert!(inv.mul(&a).unwrap().max_deviation(&one).unwrap() < 1e-10);
        let [a, _, _] = draw(seed, ctx, n, SeriesShape { unit_linear_part: true, ..CENTRED });
        let inv = a.comp_inverse().unwrap();
        prop_assert!(a.compose(&inv).unwrap().max_deviation(&id).unwrap() < 1e-10);
        prop_assert!(inv.compose(&a).unwrap().max_deviation(&id).unwrap() < 1e-10);
    }

    #[test]
    fn transforms_round_trip(seed in any::<u64>(), ctx in ctx_strategy()) {
        let [beta, gamma, _] = draw(seed, ctx, 4, PLAIN);
        let cr = cr_from_moments(&beta, &gamma).unwrap();
        prop_assert!(moments_from_cr(&cr, &gamma, 4).unwrap().max_deviation(&beta).unwrap() < 1e-10);
        let r = r_from_moments(&gamma).unwrap();
        prop_assert!(moments_from_r(&r, 4).unwrap().max_deviation(&gamma).unwrap() < 1e-10);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), ctx in ctx_strategy()) {
        let [a, _, _] = draw(seed, ctx, 2, PLAIN);
        let back: MultilinearSeries = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(back.components(), a.components());
        prop_assert_eq!(back.ctx(), a.ctx());
    }
}

#[test]
fn scalar_inverse_of_geometric_series() {
    // 1/(1 - z) = 1 + z + z² + …
    let s = MultilinearSeries::from_real_scalars(&[1.0, -1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(close(&scalars(&s.mult_inverse().unwrap()), &[1.0; 5], 0.0));
    // z/(1 + z) inverts z/(1 - z) under composition
    let f = MultilinearSeries::from_real_scalars(&[0.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
    assert!(close(&scalars(&f.comp_inverse().unwrap()), &[0.0, 1.0, -1.0, 1.0, -1.0], 1e-15));
}

#[test]
fn evaluation_is_multilinear() {
    let ctx = AlgebraContext::full(2);
    let [a, _, _] = draw(5, ctx, 2, PLAIN);
    let mut rng = seeded(6);
    let b: Vec<AlgebraElement> = (0..3).map(|_| cfree_core::random::random_element(&mut rng, 2)).collect();
    let lam = C64::new(0.3, -1.2);
    let lhs = a.eval(&[&b[0] + &b[1].scale(lam), b[2].clone()]).unwrap();
    let rhs = &a.eval(&[b[0].clone(), b[2].clone()]).unwrap() + &a.eval(&[b[1].clone(), b[2].clone()]).unwrap().scale(lam);
    assert!(lhs.distance(&rhs) < 1e-12);
}
