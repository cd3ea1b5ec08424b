use std::f64::consts::PI;

use menshov_core::measure::cantor_cdf;
use menshov_core::{
    claim_run, coefficient, mset_intervals, mset_mass, ClaimParams, EpsSchedule, Interval,
    MSetSpec, Measure, MeasureSpec, SearchLimits, StepFunction, TWO_PI,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn unit() -> Interval {
    Interval { lo: 0.0, hi: 1.0 }
}

/// Ternary-digit evaluation of the level-`levels` Cantor CDF.
fn cantor_oracle(x: f64, levels: u32) -> f64 {
    let (mut x, mut acc, mut half) = (x.clamp(0.0, 1.0), 0.0, 0.5);
    if x == 1.0 {
        return 1.0;
    }
    for _ in 0..levels {
        x *= 3.0;
        let digit = x.floor().min(2.0);
        x -= digit;
        if digit == 1.0 {
            return acc + half;
        }
        if digit == 2.0 {
            acc += half;
        }
        half *= 0.5;
    }
    acc + 2.0 * half * x
}

/// Knots of a piecewise-linear CDF on `[0, 1]`.
const KNOTS: [(f64, f64); 5] = [(0.0, 0.0), (0.2, 0.1), (0.5, 0.6), (0.7, 0.65), (1.0, 1.0)];

/// `∫ e^{−2πijt} dF` for the piecewise-uniform density of [`KNOTS`].
fn table_coefficient(j: i64) -> Complex64 {
    if j == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let w = -2.0 * PI * j as f64;
    KNOTS
        .windows(2)
        .map(|k| {
            let density = (k[1].1 - k[0].1) / (k[1].0 - k[0].0);
            let e = |t: f64| Complex64::from_polar(1.0, w * t);
            density * (e(k[1].0) - e(k[0].0)) / Complex64::new(0.0, w)
        })
        .sum()
}

fn table_measure() -> Measure {
    Measure::cdf_table(unit(), &KNOTS).unwrap()
}

#[test]
fn cdf_table_coefficients_match_closed_form_within_bound() {
    let nu = table_measure();
    for j in [-7i64, -1, 1, 2, 5, 13, 40, 101] {
        let c = coefficient(&nu, j, 64).unwrap();
        let want = table_coefficient(j);
        assert!(
            (c.value - want).norm() <= c.error,
            "j={j}: {} vs {want}, bound {}",
            c.value,
            c.error
        );
    }
}

#[test]
fn atomic_coefficients_are_exact() {
    let atoms = [(0.1, 0.25), (0.35, 0.5), (0.9, 0.25)];
    let nu = Measure::atomic(unit(), &atoms).unwrap();
    for j in [1i64, 3, 17, -4] {
        let want: Complex64 = atoms
            .iter()
            .map(|&(x, m)| m * Complex64::from_polar(1.0, -2.0 * PI * j as f64 * x))
            .sum();
        let c = coefficient(&nu, j, 16).unwrap();
        assert!((c.value - want).norm() < 1e-14);
        assert_eq!(c.error, 0.0);
    }
}

#[test]
fn mset_mass_of_cdf_table_matches_direct_sum() {
    let nu = table_measure();
    let f = |x: f64| {
        let i = KNOTS
            .partition_point(|k| k.0 <= x)
            .clamp(1, KNOTS.len() - 1);
        let (a, b) = (KNOTS[i - 1], KNOTS[i]);
        a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
    };
    let spec = MSetSpec::new(Interval { lo: 0.15, hi: 0.95 }, 37, 0.25, 0.4).unwrap();
    let direct: f64 = mset_intervals(&spec)
        .unwrap()
        .iter()
        .map(|p| f(p.hi) - f(p.lo))
        .sum();
    assert!((mset_mass(&nu, &spec).unwrap() - direct).abs() < 1e-13);
}

#[test]
fn measure_spec_round_trips_through_json() {
    let spec = MeasureSpec::cantor([0.0, TWO_PI], 40, 2.0);
    let text = serde_json::to_string(&spec).unwrap();
    let back: MeasureSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
    let mu = Measure::from_spec(&back).unwrap();
    assert!((mu.interval_mass(0.0, TWO_PI).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn claim_chain_inequality() {
    for nu in 9..2000u32 {
        let v = nu as f64;
        assert!((1.0 - 2.0 / v) * (1.0 - 5.0 / v) >= 1.0 - 7.0 / v);
    }
}

proptest! {
    #[test]
    fn cantor_cdf_matches_ternary_oracle(x in 0.0f64..=1.0) {
        prop_assert!((cantor_cdf(x, 40) - cantor_oracle(x, 40)).abs() < 1e-12);
    }

    #[test]
    fn claim_mass_is_additive_over_cells(
        values in prop::collection::vec(-3.0f64..3.0, 1..5),
        nu in 9u32..24,
    ) {
        let mu = Measure::lebesgue(Interval { lo: 0.0, hi: TWO_PI }, 1.0).unwrap();
        let phi = StepFunction::equal_cells(values).unwrap();
        let res = claim_run(&phi, &mu, &ClaimParams {
            nu,
            eps: EpsSchedule::Constant { eps: 0.5 },
            limits: SearchLimits::default(),
        }).unwrap();
        let sum: f64 = res.cells.iter().map(|c| c.mu_e).sum();
        prop_assert!((res.mu_e - sum).abs() < 1e-12);
        let direct: f64 = res.e_intervals().iter().map(|p| p.hi - p.lo).sum();
        prop_assert!((res.mu_e - direct).abs() < 1e-12);
        prop_assert!(res.certified);
        prop_assert!(res.mu_e >= (1.0 - 7.0 / nu as f64) * TWO_PI);
        for c in &res.cells {
            prop_assert!(c.window.lo >= c.cell.lo && c.window.hi <= c.cell.hi);
            prop_assert!(c.layout.e.iter().all(|p| c.window.lo <= p.lo && p.hi <= c.window.hi));
            prop_assert!(c.checks.all());
        }
    }
}
