use std::f64::consts::PI;

use proptest::prelude::*;
use qgen::datasets::Dataset;
use qgen::gradients::{expectation, finite_difference_grad, grad_vector, parameter_shift_grad, DiagonalObservable};
use qgen::mle::nll_grad;
use qgen::{BitString, InputKind, LayeredAnsatz};

fn obs(n: usize, f: impl Fn(usize) -> f64) -> DiagonalObservable {
    DiagonalObservable::new(n, (0..1 << n).map(f).collect()).unwrap()
}

#[test]
fn shift_rule_matches_finite_differences_over_seeds() {
    for seed in 0..20u64 {
        let n = 2 + (seed % 3) as usize;
        let a = LayeredAnsatz::new(n, 2, InputKind::Plus).unwrap();
        let p = a.random_params(2.0, seed).unwrap();
        let o = obs(n, |i| ((i * 7 + seed as usize) % 5) as f64 - 2.0);
        let g = grad_vector(&a, &p, &o).unwrap();
        for (i, gi) in g.iter().enumerate() {
            let fd = finite_difference_grad(&a, &p, &o, i, 1e-5).unwrap();
            assert!((gi - fd).abs() < 1e-6, "seed {seed} param {i}: {gi} vs {fd}");
        }
    }
}

#[test]
fn central_differences_converge_at_second_order() {
    let a = LayeredAnsatz::new(3, 2, InputKind::Zero).unwrap();
    let p = a.random_params(1.5, 11).unwrap();
    let o = obs(3, |i| (i as f64).cos());
    let exact = grad_vector(&a, &p, &o).unwrap();
    for i in [0, 3, 4, 9] {
        let e1 = (finite_difference_grad(&a, &p, &o, i, 0.02).unwrap() - exact[i]).abs();
        let e2 = (finite_difference_grad(&a, &p, &o, i, 0.01).unwrap() - exact[i]).abs();
        if e1 > 1e-9 {
            let ratio = e1 / e2;
            assert!((3.5..4.5).contains(&ratio), "param {i}: error ratio {ratio}");
        }
    }
}

#[test]
fn probability_gradients_sum_to_zero() {
    let a = LayeredAnsatz::new(3, 2, InputKind::Zero).unwrap();
    let p = a.random_params(PI, 4).unwrap();
    let mut total = vec![0.0; p.len()];
    for x in 0..8 {
        let g = grad_vector(&a, &p, &DiagonalObservable::one_hot(3, x).unwrap()).unwrap();
        total.iter_mut().zip(g).for_each(|(t, v)| *t += v);
    }
    assert!(total.iter().all(|t| t.abs() < 1e-12));
}

#[test]
fn nll_gradient_vanishes_at_point_mass_optimum() {
    let a = LayeredAnsatz::new(1, 1, InputKind::Zero).unwrap();
    let data = Dataset::new(1, vec![BitString::new(1, 1).unwrap(); 5]).unwrap();
    let g = nll_grad(&a, &[PI], &data, 1e-12).unwrap();
    assert!(g[0].abs() < 1e-12);
    // Away from the optimum the gradient pushes θ towards π.
    assert!(nll_grad(&a, &[2.0], &data, 1e-12).unwrap()[0] < 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_is_linear_in_the_observable(seed in 0u64..1000, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let a = LayeredAnsatz::new(2, 2, InputKind::Zero).unwrap();
        let p = a.random_params(PI, seed).unwrap();
        let f = obs(2, |i| i as f64);
        let h = obs(2, |i| if i % 2 == 0 { 1.0 } else { -0.5 });
        let mix = obs(2, |i| alpha * f.values()[i] + beta * h.values()[i]);
        let gf = grad_vector(&a, &p, &f).unwrap();
        let gh = grad_vector(&a, &p, &h).unwrap();
        let gm = grad_vector(&a, &p, &mix).unwrap();
        for k in 0..p.len() {
            prop_assert!((gm[k] - alpha * gf[k] - beta * gh[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn expectation_is_periodic_in_rotation_angles(seed in 0u64..1000, k in 0usize..4) {
        let a = LayeredAnsatz::new(2, 1, InputKind::Zero).unwrap();
        let mut p = a.random_params(PI, seed).unwrap();
        let o = obs(2, |i| i as f64);
        let e0 = expectation(&a, &p, &o).unwrap();
        let g0 = parameter_shift_grad(&a, &p, &o, k).unwrap();
        p[k] += 4.0 * PI;
        prop_assert!((expectation(&a, &p, &o).unwrap() - e0).abs() < 1e-12);
        prop_assert!((parameter_shift_grad(&a, &p, &o, k).unwrap() - g0).abs() < 1e-12);
    }
}
