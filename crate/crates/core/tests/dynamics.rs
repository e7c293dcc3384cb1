use dlab_core::evolve::{apriori_bound, integrate, integrate_observed, IntegratorConfig, Scheme, Status};
use dlab_core::model::{Params21, Rational, Regime, State21};
use dlab_core::spectral::{make_grid, Field, FieldKind};
use dlab_core::waves::kdv_profile;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn soliton_run(dt: f64) -> (Field, Field) {
    let prm = Params21::reference();
    let grid = make_grid(80.0, 512).unwrap();
    let v0 = kdv_profile(Rational::integer(1).unwrap(), 1.0, 1.0, &grid).unwrap();
    let zero = Field::zeros(&grid, FieldKind::Complex);
    let s0 = State21::new(zero.clone(), zero, v0.clone(), 0.0).unwrap();
    let cfg = IntegratorConfig {
        dt,
        ..IntegratorConfig::default()
    };
    let run = integrate(&s0, &prm, &cfg, 1.0).unwrap();
    assert_eq!(run.status, Status::Completed);
    let last = run.states.last().unwrap();
    assert!((last.time() - 1.0).abs() < 1e-12);
    (last.v().clone(), v0.translate(-1.0))
}

#[test]
fn kdv_soliton_is_transported_at_fourth_order() {
    let (fine, exact) = soliton_run(1e-3);
    assert!(fine.sub(&exact).max_abs() <= 1e-6);
    let (coarse, _) = soliton_run(4e-3);
    let (mid, _) = soliton_run(2e-3);
    let slope = (coarse.sub(&mid).max_abs() / mid.sub(&fine).max_abs()).log2();
    assert!((slope - 4.0).abs() <= 0.3, "slope {slope}");
}

#[test]
fn split_step_also_transports_the_soliton() {
    let prm = Params21::reference();
    let grid = make_grid(80.0, 512).unwrap();
    let v0 = kdv_profile(Rational::integer(1).unwrap(), 1.0, 1.0, &grid).unwrap();
    let zero = Field::zeros(&grid, FieldKind::Complex);
    let s0 = State21::new(zero.clone(), zero, v0.clone(), 0.0).unwrap();
    let cfg = IntegratorConfig {
        dt: 1e-3,
        scheme: Scheme::Strang,
        ..IntegratorConfig::default()
    };
    let run = integrate(&s0, &prm, &cfg, 1.0).unwrap();
    let err = run.states.last().unwrap().v().sub(&v0.translate(-1.0)).max_abs();
    assert!(err < 1e-4, "err {err}");
}

fn random_params(rng: &mut ChaCha8Rng) -> Params21 {
    let powers = [(1, 1), (9, 7), (11, 9), (5, 4)];
    loop {
        let (num, den) = powers[rng.gen_range(0..powers.len())];
        let Ok(p) = Rational::new(num, den) else { continue };
        let prm = Params21::new(
            [rng.gen_range(0.0..1.5), rng.gen_range(0.0..1.5)],
            [rng.gen_range(0.2..1.5), rng.gen_range(0.2..1.5)],
            rng.gen_range(0.5..1.5),
            [rng.gen_range(0.5..3.5), rng.gen_range(0.5..3.5)],
            p,
        );
        if let Ok(prm) = prm {
            if prm.regime() == Regime::GlobalGuaranteed {
                return prm;
            }
        }
    }
}

#[test]
fn random_runs_stay_below_the_apriori_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid = make_grid(40.0, 256).unwrap();
    for run in 0..10 {
        let prm = random_params(&mut rng);
        let (a1, a2, a3) = (rng.gen_range(0.3..1.2), rng.gen_range(0.3..1.2), rng.gen_range(0.3..1.5));
        let (k1, k2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let x0 = rng.gen_range(-3.0..3.0);
        let u1 = Field::from_complex_fn(&grid, |x| Complex64::from_polar(a1 / x.cosh(), k1 * x));
        let u2 = Field::from_complex_fn(&grid, |x| Complex64::from_polar(a2 / (x - x0).cosh(), k2 * x));
        let v = Field::from_real_fn(&grid, |x| a3 / ((x + x0).cosh() * (x + x0).cosh()));
        let s0 = State21::new(u1, u2, v, 0.0).unwrap();
        let bound = apriori_bound(&s0, &prm).unwrap();
        let cfg = IntegratorConfig {
            dt: 1e-3,
            monitor_stride: 50,
            ..IntegratorConfig::default()
        };
        let mut worst: f64 = 0.0;
        let out = integrate_observed(&s0, &prm, &cfg, 2.0, |s: &State21, _| {
            let total: f64 = s.fields().iter().map(Field::h1_norm2).sum();
            worst = worst.max(total);
        })
        .unwrap();
        assert_eq!(out.status, Status::Completed, "run {run}");
        assert!(worst <= bound, "run {run}: {worst} > {bound}");
    }
}
