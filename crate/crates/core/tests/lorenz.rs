use lorenz_code::lorenz::{integrate, plan_steps, IntegrationSpec, LorenzSetup, State3};
use lorenz_code::Literal;
use mpreal::MpReal;

fn lit(s: &str) -> Literal {
    s.parse().unwrap()
}

fn run(h: &str, t: &str, p: u32) -> State3 {
    integrate(&LorenzSetup::classic().spec(&lit(h), &lit(t), p).unwrap()).unwrap()
}

/// Componentwise `|a − b|` as f64 after widening both to `p` bits.
fn gap(a: &State3, b: &State3, p: u32) -> [f64; 3] {
    let (a, b) = (a.to_precision(p).unwrap(), b.to_precision(p).unwrap());
    let d = |u: &MpReal, v: &MpReal| u.sub(v).unwrap().abs().to_f64();
    [d(&a.x, &b.x), d(&a.y, &b.y), d(&a.z, &b.z)]
}

fn rel_x(a: &State3, b: &State3) -> f64 {
    let (xa, xb) = (a.x.to_f64(), b.x.to_f64());
    (xa - xb).abs() / xa.abs().max(xb.abs())
}

#[test]
fn integration_is_bit_identical_across_repeats() {
    let spec = LorenzSetup::classic().spec(&lit("0.01"), &lit("0.5"), 256).unwrap();
    let first = integrate(&spec).unwrap();
    for _ in 0..100 {
        assert_eq!(integrate(&spec).unwrap(), first);
    }
}

#[test]
fn fourth_order_convergence() {
    // the error ratio for halved steps approaches 2^4 once h is small
    let reference = run("0.0000390625", "1", 512);
    let err = |h: &str| gap(&run(h, "1", 256), &reference, 512)[0];
    let ratios: Vec<f64> = [("0.005", "0.0025"), ("0.0025", "0.00125"), ("0.00125", "0.000625")]
        .iter()
        .map(|(a, b)| err(a) / err(b))
        .collect();
    assert!((14.0..=18.0).contains(&ratios[2]), "{ratios:?}");
    assert!(ratios.windows(2).all(|w| (w[1] - 16.0).abs() < (w[0] - 16.0).abs()), "{ratios:?}");
}

#[test]
fn step_sensitivity_past_divergence() {
    let a = run("0.01", "250", 256);
    let b = run("0.010001", "250", 256);
    assert!(rel_x(&a, &b) > 0.1, "{} vs {}", a.x.to_f64(), b.x.to_f64());
}

#[test]
fn precision_sensitivity_past_divergence() {
    let a = run("0.01", "250", 256);
    let b = run("0.01", "250", 260);
    assert!(rel_x(&a, &b) > 0.1, "{} vs {}", a.x.to_f64(), b.x.to_f64());
}

#[test]
fn stepping_rule_examples() {
    let p = 256;
    let plan = plan_steps(&lit("0.03").at(p).unwrap(), &lit("0.1").at(p).unwrap()).unwrap();
    assert_eq!(plan.full_steps, 3);
    let h_last = plan.partial.unwrap().to_f64();
    assert!((h_last - 0.01).abs() < 1e-15, "{h_last}");
    let plan = plan_steps(&lit("0.01").at(p).unwrap(), &lit("1").at(p).unwrap()).unwrap();
    assert_eq!((plan.full_steps, plan.partial), (100, None));
}

#[test]
fn base_orbit_stays_finite_and_bounded() {
    let s = run("0.01", "200", 256);
    for v in s.to_f64() {
        assert!(v.is_finite() && v.abs() < 100.0, "{v}");
    }
}

#[test]
fn mixed_precision_inputs_are_rejected() {
    let setup = LorenzSetup::classic();
    let spec = IntegrationSpec::new(
        setup.params(256).unwrap(),
        setup.initial(128).unwrap(),
        lit("0.01").at(256).unwrap(),
        lit("1").at(256).unwrap(),
    );
    assert!(spec.is_err() || integrate(&spec.unwrap()).is_err());
}
