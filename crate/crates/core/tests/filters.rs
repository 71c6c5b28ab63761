mod common;

use common::*;
use mcckf::bench::run_filter;
use mcckf::filters::forms::*;
use mcckf::filters::{
    compute_l, kf_step, mcc_kf_step_lemma, ConventionalState, Filter, FilterKind, FilterState, KernelConfig,
};
use mcckf::linalg::Matrix;
use mcckf::model::{
    build_example1, example1_noise, simulate, trial_rng, NoiseCase, NoiseParams, NoiseSpec, StateSpaceModel,
};
use rand::Rng;

fn gaussian_noise(model: &StateSpaceModel) -> (NoiseSpec, NoiseSpec) {
    (
        NoiseSpec::zero_mean_gaussian(model.q().clone()),
        NoiseSpec::zero_mean_gaussian(model.r().clone()),
    )
}

fn measurements(model: &StateSpaceModel, steps: usize, seed: u64) -> Vec<Vec<f64>> {
    let (w, v) = gaussian_noise(model);
    simulate(model, &w, &v, steps, &mut trial_rng(seed, 0)).unwrap().measurements
}

#[test]
fn gain_and_covariance_forms_agree_with_oracle() {
    let mut r = rng(11);
    for _ in 0..200 {
        let n = r.random_range(1..=6);
        let m = r.random_range(1..=4);
        let l = r.random_range(1e-3..=2.0);
        let (p, rr, h) = (random_spd(&mut r, n, 0.2), random_spd(&mut r, m, 0.2), random_matrix(&mut r, m, n));
        // oracle: P⁺ = (P⁻¹ + L Hᵀ R⁻¹ H)⁻¹, K = P⁺ L Hᵀ R⁻¹
        let rinv = inverse(&rr);
        let info = add(&inverse(&p), &scale(&mm(&mm(&tr(&h), &rinv), &h), l));
        let p_post = from_rows(&inverse(&info));
        let k_oracle = from_rows(&scale(&mm(&mm(&to_rows(&p_post), &tr(&h)), &rinv), l));

        let (pm, hm, rm) = (from_rows(&p), from_rows(&h), from_rows(&rr));
        let k_info = gain_information_form(&pm, &hm, &rm, l).unwrap();
        let (k_inn, _) = gain_innovation_form(&pm, &hm, &rm, l).unwrap();
        assert!(rel_diff_m(&k_info, &k_oracle) < 1e-10);
        assert!(rel_diff_m(&k_inn, &k_oracle) < 1e-10);
        assert!(rel_diff_m(&gain_posterior_form(&p_post, &hm, &rm, l).unwrap(), &k_oracle) < 1e-10);

        let p1 = covariance_information_form(&pm, &hm, &rm, l).unwrap();
        let p2 = covariance_short_form(&pm, &k_inn, &hm).symmetrize();
        let p3 = covariance_scaled_joseph(&pm, &k_inn, &hm, &rm, l);
        for candidate in [&p1, &p2, &p3] {
            assert!(rel_diff_m(candidate, &p_post) < 1e-10);
        }
    }
}

#[test]
fn unscaled_joseph_differs_unless_l_is_one() {
    let p = Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.0]]);
    let h = Matrix::from_rows(&[[1.0, 0.5]]);
    let r = Matrix::from_rows(&[[0.4]]);
    let (k, _) = gain_innovation_form(&p, &h, &r, 0.6).unwrap();
    let scaled = covariance_scaled_joseph(&p, &k, &h, &r, 0.6);
    assert!(rel_diff_m(&covariance_joseph(&p, &k, &h, &r), &scaled) > 1e-3);
    let (k1, _) = gain_innovation_form(&p, &h, &r, 1.0).unwrap();
    let a = covariance_joseph(&p, &k1, &h, &r);
    assert!(rel_diff_m(&a, &covariance_scaled_joseph(&p, &k1, &h, &r, 1.0)) < 1e-15);
}

#[test]
fn scaled_joseph_step_matches_information_form() {
    let mut r = rng(5);
    for _ in 0..20 {
        let model = random_model(&mut r, 4, 2);
        let p = random_spd(&mut r, 4, 0.3);
        let state = ConventionalState {
            x: vec![0.5; 4],
            p: from_rows(&p),
            step: 0,
        };
        let kernel = KernelConfig::fixed(r.random_range(0.5..3.0)).unwrap();
        let z = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let (_, out) = mcc_kf_step_lemma(&state, &model, &z, kernel).unwrap();
        let f = to_rows(model.f());
        let p_prior = add(&mm(&mm(&f, &p), &tr(&f)), &to_rows(model.q()));
        let h = to_rows(model.h());
        let info = add(
            &inverse(&p_prior),
            &scale(&mm(&mm(&tr(&h), &inverse(&to_rows(model.r()))), &h), out.gain_scale),
        );
        assert!(rel_diff_m(&out.p_post, &from_rows(&inverse(&info))) < 1e-10);
    }
}

#[test]
fn array_forms_match_conventional_on_random_models() {
    let mut r = rng(99);
    for trial in 0..5 {
        let model = random_model(&mut r, 4, 2);
        let zs = measurements(&model, 100, trial);
        let runs: Vec<_> = [FilterKind::ImccKf, FilterKind::SrImccKf, FilterKind::EsrImccKf]
            .into_iter()
            .map(|k| run_filter(Filter::new(k, KernelConfig::Adaptive), &model, &zs))
            .collect();
        for k in 0..zs.len() {
            for other in &runs[1..] {
                assert!(rel_diff(&runs[0][k].x_post, &other[k].x_post, 1e-300) < 1e-8, "step {k}");
                assert!(rel_diff_m(&runs[0][k].p_post, &other[k].p_post) < 1e-8, "step {k}");
            }
        }
    }
}

#[test]
fn huge_bandwidth_reduces_to_kalman_filter() {
    let model = build_example1();
    let (w, v) = example1_noise(NoiseCase::Case1, &NoiseParams::default());
    let zs = simulate(&model, &w, &v, 100, &mut trial_rng(8, 0)).unwrap().measurements;
    let kf = run_filter(Filter::new(FilterKind::Kf, KernelConfig::Adaptive), &model, &zs);
    let wide = KernelConfig::fixed(1e8).unwrap();
    for kind in FilterKind::CORRENTROPY {
        let out = run_filter(Filter::new(kind, wide), &model, &zs);
        for (a, b) in kf.iter().zip(&out) {
            assert!(rel_diff(&a.x_post, &b.x_post, 1e-300) < 1e-10, "{kind} step {}", a.step);
            assert!(rel_diff_m(&a.p_post, &b.p_post) < 1e-10, "{kind}");
        }
    }
}

#[test]
fn adaptive_gain_scale_is_constant() {
    let model = build_example1();
    let (w, v) = example1_noise(NoiseCase::Case2, &NoiseParams::default());
    let zs = simulate(&model, &w, &v, 60, &mut trial_rng(2, 3)).unwrap().measurements;
    let target = (-0.5_f64).exp();
    for kind in FilterKind::CORRENTROPY {
        for out in run_filter(Filter::new(kind, KernelConfig::Adaptive), &model, &zs) {
            assert!((out.gain_scale - target).abs() <= 1e-14, "{kind}");
        }
    }
    let e = [0.3, -0.2];
    let l = compute_l(&e, model.r(), &[0.0; 4], model.p0(), KernelConfig::Adaptive).unwrap();
    assert_eq!(l, target);
}

#[test]
fn factored_covariances_are_exactly_symmetric() {
    let model = build_example1();
    let zs = measurements(&model, 30, 4);
    for kind in [FilterKind::SrImccKf, FilterKind::EsrImccKf] {
        let f = Filter::new(kind, KernelConfig::Adaptive);
        let mut s = f.init(&model).unwrap();
        for z in &zs {
            (s, _) = f.step(&s, &model, z);
            let FilterState::Factored(fs) = &s else {
                panic!("unexpected state")
            };
            let p = fs.covariance();
            assert_eq!(p, p.transpose());
            assert!(p.diag().iter().all(|&d| d >= 0.0));
        }
    }
}

#[test]
fn inversion_counts_by_variant() {
    let model = build_example1();
    let zs = measurements(&model, 3, 1);
    let count = |kind| run_filter(Filter::new(kind, KernelConfig::Adaptive), &model, &zs)[0].ops;
    assert_eq!(count(FilterKind::MccKf).state_inversions, 2);
    assert_eq!(count(FilterKind::MccKf).measurement_inversions, 1);
    assert_eq!(count(FilterKind::MccKfLemma).state_inversions, 2);
    assert_eq!(count(FilterKind::ImccKf).state_inversions, 0);
    assert_eq!(count(FilterKind::ImccKf).measurement_inversions, 1);
    for kind in [FilterKind::SrImccKf, FilterKind::EsrImccKf] {
        let ops = count(kind);
        assert_eq!((ops.state_inversions, ops.measurement_inversions), (0, 0));
        assert_eq!(ops.triangularizations, 2);
    }
}

#[test]
fn mcc_with_unit_scaling_is_kf_on_scalar_model() {
    let one = Matrix::from_rows(&[[1.0]]);
    let model = StateSpaceModel::new(
        one.clone(),
        one.clone(),
        one.clone(),
        Matrix::from_rows(&[[0.0]]),
        one.clone(),
        vec![0.0],
        one,
    )
    .unwrap();
    let s = mcckf::filters::init_conventional(&model);
    let (kf, _) = kf_step(&s, &model, &[2.0]).unwrap();
    let wide = KernelConfig::Fixed(1e200);
    for kind in FilterKind::CORRENTROPY {
        let f = Filter::new(kind, wide);
        let (st, out) = f.step(&f.init(&model).unwrap(), &model, &[2.0]);
        assert!(!out.failed);
        assert!((st.estimate().unwrap()[0] - kf.x[0]).abs() < 1e-15, "{kind}");
        assert!((out.p_post[(0, 0)] - 0.5).abs() < 1e-15, "{kind}");
    }
}
