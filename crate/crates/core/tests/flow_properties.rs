//! Property suites for the flow layer: the theta group law on the quotient,
//! the beta cocycle, monotonicity and speed bounds, the alpha inverse, and
//! an independent integration oracle for beta.

mod common;

use std::sync::{Arc, OnceLock};

use common::{random_element, rng};
use horolab::flows::{horocycle_flow, project, SpeedField, TimeChange};
use horolab::fuchsian::{
    enumerate_ball, quotient_dist, same_orbit_witness, BallParams, FuchsianBall, FuchsianGroup,
};
use horolab::psl2::{GroupElement, PointH2};
use rand::Rng;

fn group() -> &'static Arc<FuchsianGroup> {
    static GROUP: OnceLock<Arc<FuchsianGroup>> = OnceLock::new();
    GROUP.get_or_init(|| Arc::new(FuchsianGroup::bolza().unwrap()))
}

fn ball() -> &'static FuchsianBall {
    static BALL: OnceLock<FuchsianBall> = OnceLock::new();
    BALL.get_or_init(|| {
        enumerate_ball(
            group(),
            &BallParams {
                max_word_len: 2,
                max_displacement: None,
                max_elements: 1_000_000,
            },
        )
        .unwrap()
    })
}

fn sin_field() -> TimeChange {
    TimeChange::new(SpeedField::sinusoidal(0.5, 0.0).unwrap(), 1e-3).unwrap()
}

#[test]
fn theta_group_law_has_zero_bracket() {
    let mut rng = rng(0xF1_0001);
    for _ in 0..1_000 {
        let x = project(random_element(&mut rng, 1.0), group());
        let s = rng.gen_range(-2.0..2.0);
        let t = rng.gen_range(-2.0..2.0);
        let one_step = horocycle_flow(&x, s + t);
        let two_step = horocycle_flow(&horocycle_flow(&x, s), t);
        let qd = quotient_dist(&one_step, &two_step, ball()).unwrap();
        assert!(
            qd.bracket.hi < 1e-12,
            "flow law residual {} at s {s}, t {t}",
            qd.bracket.hi
        );
        assert!(qd.bracket.lo <= qd.bracket.hi);
    }
}

#[test]
fn cohorbital_distance_is_bounded_by_the_shift() {
    let mut rng = rng(0xF1_0002);
    for _ in 0..100 {
        let x = project(random_element(&mut rng, 1.0), group());
        let tau = rng.gen_range(-0.5..0.5);
        let y = horocycle_flow(&x, tau);
        let t = rng.gen_range(-20.0..20.0);
        let qd = quotient_dist(&horocycle_flow(&x, t), &horocycle_flow(&y, t), ball()).unwrap();
        assert!(qd.bracket.hi <= tau.abs() + 1e-12);
    }
}

#[test]
fn beta_cocycle_residual_stays_small() {
    let x = project(GroupElement::IDENTITY, group());
    let tc = sin_field();
    for &s in &[-10.0, -3.7, 0.9, 10.0] {
        for &t in &[-10.0, -0.4, 2.3, 10.0] {
            let glued = tc.beta(s, &x) + tc.beta(t, &tc.psi(s, &x));
            let direct = tc.beta(t + s, &x);
            assert!(
                (direct - glued).abs() < 1e-8,
                "cocycle residual {} at s {s}, t {t}",
                (direct - glued).abs()
            );
        }
    }
}

#[test]
fn beta_is_strictly_increasing_on_grids() {
    let mut rng = rng(0xF1_0003);
    let tc = sin_field();
    for _ in 0..5 {
        let x = project(random_element(&mut rng, 1.0), group());
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=40 {
            let t = -5.0 + 0.25 * i as f64;
            let b = tc.beta(t, &x);
            assert!(b > prev, "beta not increasing at t {t}");
            prev = b;
        }
    }
}

#[test]
fn beta_respects_speed_bounds_on_random_points() {
    let mut rng = rng(0xF1_0004);
    let tc = sin_field();
    let (f_min, f_max) = tc.speed.bounds();
    for _ in 0..50 {
        let x = project(random_element(&mut rng, 1.0), group());
        let t = rng.gen_range(0.0..8.0);
        let b = tc.beta(t, &x);
        assert!(b >= f_min * t - 1e-10 && b <= f_max * t + 1e-10);
    }
}

/// Independent fixed-step RK4 written against the psl2 primitives only, at
/// half the library step, Richardson-extrapolated with the quarter step.
fn oracle_beta(rep: &GroupElement, t: f64, step: f64) -> f64 {
    let speed = |b: f64| {
        let z = rep.compose(&GroupElement::horocycle(b)).mobius(&PointH2::I);
        1.0 + 0.5 * z.x.sin()
    };
    let integrate = |h_target: f64| {
        let n = (t.abs() / h_target).ceil().max(1.0) as usize;
        let h = t / n as f64;
        let mut b = 0.0;
        for _ in 0..n {
            let k1 = speed(b);
            let k2 = speed(b + 0.5 * h * k1);
            let k3 = speed(b + 0.5 * h * k2);
            let k4 = speed(b + h * k3);
            b += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        b
    };
    let coarse = integrate(step);
    let fine = integrate(0.5 * step);
    fine + (fine - coarse) / 15.0
}

#[test]
fn beta_matches_refined_step_oracle() {
    let tc = sin_field();
    let x = project(GroupElement::IDENTITY, group());
    let expected = oracle_beta(x.rep(), 1.0, 0.5e-3);
    let got = tc.beta(1.0, &x);
    assert!(
        (got - expected).abs() < 1e-8,
        "beta {got} vs oracle {expected}"
    );
}

#[test]
fn alpha_inverts_beta() {
    let mut rng = rng(0xF1_0005);
    let tc = TimeChange::new(SpeedField::sinusoidal(0.5, 0.0).unwrap(), 1e-2).unwrap();
    for _ in 0..100 {
        let x = project(random_element(&mut rng, 1.0), group());
        let t = rng.gen_range(-3.0..3.0);
        let roundtrip = tc.alpha(tc.beta(t, &x), &x);
        assert!((roundtrip - t).abs() < 1e-8, "roundtrip {roundtrip} vs {t}");
    }
}

#[test]
fn alpha_is_small_inside_the_speed_window() {
    // |alpha(t, x)| < eps whenever |t| < rho with rho = f_min * eps: the
    // quantitative realization of the small-time reparametrization bound for
    // bounded speed fields.
    let mut rng = rng(0xF1_0006);
    let tc = TimeChange::new(SpeedField::sinusoidal(0.5, 0.3).unwrap(), 1e-2).unwrap();
    let (f_min, _) = tc.speed.bounds();
    let eps = 0.5;
    let rho = f_min * eps;
    for _ in 0..20 {
        let x = project(random_element(&mut rng, 1.0), group());
        for i in -4i32..=4 {
            let t = 0.95 * rho * i as f64 / 4.0;
            let a = tc.alpha(t, &x);
            assert!(a.abs() < eps, "alpha {a} at t {t}");
        }
    }
}

#[test]
fn psi_points_stay_on_the_theta_orbit() {
    let mut rng = rng(0xF1_0007);
    let tc = TimeChange::new(SpeedField::sinusoidal(0.4, 1.0).unwrap(), 1e-2).unwrap();
    let (_, f_max) = tc.speed.bounds();
    let horizon = 5.0;
    for _ in 0..20 {
        let x = project(random_element(&mut rng, 0.5), group());
        let u = rng.gen_range(0.0..horizon);
        let y = tc.psi(u, &x);
        let witness = same_orbit_witness(&x, &y, ball(), 1e-6)
            .unwrap()
            .expect("psi point must sit on the theta orbit");
        assert!(witness.tau >= -1e-9 && witness.tau <= f_max * horizon + 1e-9);
        assert!((witness.tau - tc.beta(u, &x)).abs() < 1e-9);
    }
}

#[test]
fn constant_speed_time_change_reproduces_theta() {
    let mut rng = rng(0xF1_0008);
    let tc = TimeChange::new(SpeedField::constant(1.0).unwrap(), 1e-3).unwrap();
    for _ in 0..50 {
        let x = project(random_element(&mut rng, 1.0), group());
        let t = rng.gen_range(-5.0..5.0);
        let psi_point = tc.psi(t, &x);
        let theta_point = horocycle_flow(&x, t);
        let qd = quotient_dist(&psi_point, &theta_point, ball()).unwrap();
        assert!(qd.bracket.hi < 1e-10);
    }
}

#[test]
fn projection_commutes_with_the_flow() {
    let mut rng = rng(0xF1_0009);
    for _ in 0..100 {
        let g = random_element(&mut rng, 1.5);
        let t = rng.gen_range(-5.0..5.0);
        let a = project(horolab::flows::flow_on_g(&g, t), group());
        let b = horocycle_flow(&project(g, group()), t);
        assert_eq!(a.rep(), b.rep());
    }
}
