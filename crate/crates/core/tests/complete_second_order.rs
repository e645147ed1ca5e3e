//! The exact quench overlaps agree with second-order perturbation theory once
//! the second-order corrections to the dressed states are kept. The printed
//! closed forms for `a_0_11`, `a_2_11` and `a_2_00` keep only products of
//! first-order coefficients and miss these terms.

use std::f64::consts::SQRT_2;

use dynlamb::oracle::{exact_quench_amplitudes, OracleConfig};
use dynlamb::quench::{quench_amplitudes, AmplitudeSet};
use dynlamb::{FockCutoff, QuenchSpec, SystemParams};

/// Full second-order overlaps `<n; q1 q2|_{ω2} |0; 00>_{ω1}`.
fn complete_second_order(e0: f64, lam: f64, w1: f64, w2: f64) -> [f64; 3] {
    let l2 = lam * lam;
    let a_0_11 =
        l2 * (2.0 / ((w2 - e0) * (w1 + e0)) + 1.0 / (e0 * (w1 + e0)) - 1.0 / (e0 * (w2 - e0)));
    let d = 1.0 / (w1 + e0) - 1.0 / (w2 + e0);
    let a_2_11 = SQRT_2 * l2 * d * d;
    let a_2_00 = SQRT_2
        * l2
        * (-2.0 / ((w2 - e0) * (w1 + e0)) + 1.0 / (w1 * (w1 + e0)) + 1.0 / (w2 * (w2 - e0)));
    [a_0_11, a_2_11, a_2_00]
}

fn exact(e0: f64, lam: f64, w1: f64, w2: f64) -> AmplitudeSet {
    let p = SystemParams::new(e0, lam).unwrap();
    let q = QuenchSpec::new(w1, w2).unwrap();
    let config = OracleConfig {
        cutoff: FockCutoff::new(20),
        ..Default::default()
    };
    exact_quench_amplitudes(&p, &q, &config).unwrap().amplitudes
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn exact_overlaps_follow_complete_second_order() {
    for (e0, w1, w2) in [
        (3.0, 5.0, 4.4),
        (3.721, 5.0, 4.2),
        (2.0, 3.0, 6.0),
        (3.0, 1.5, 2.2),
    ] {
        let errs = |lam: f64| {
            let a = exact(e0, lam, w1, w2);
            let pt = complete_second_order(e0, lam, w1, w2);
            [
                rel(pt[0], a.a_0_11),
                rel(pt[1], a.a_2_11),
                rel(pt[2], a.a_2_00),
            ]
        };
        let (full, half) = (errs(0.01), errs(0.005));
        for i in 0..3 {
            assert!(full[i] < 0.05, "{e0} {w1} {w2}: {full:?}");
            assert!(
                full[i] / half[i] >= 1.8,
                "{e0} {w1} {w2}: {full:?} vs {half:?}"
            );
        }
    }
}

#[test]
fn printed_forms_miss_a_lambda_independent_factor() {
    // the ratio to the exact overlap does not approach 1 as λ → 0
    let (e0, w1, w2) = (3.0, 5.0, 4.4);
    let ratio = |lam: f64| {
        let p = SystemParams::new(e0, lam).unwrap();
        let q = QuenchSpec::new(w1, w2).unwrap();
        let printed = quench_amplitudes(&p, &q).unwrap();
        let a = exact(e0, lam, w1, w2);
        [
            printed.a_0_11 / a.a_0_11,
            printed.a_2_11 / a.a_2_11,
            printed.a_2_00 / a.a_2_00,
        ]
    };
    let (r1, r2) = (ratio(0.01), ratio(0.0025));
    for i in 0..3 {
        assert!((r1[i] / r2[i] - 1.0).abs() < 1e-2, "{r1:?} {r2:?}");
        assert!((r1[i] - 1.0).abs() > 1.0, "{r1:?}");
    }
}

#[test]
fn first_order_amplitude_matches_printed_form() {
    let (e0, w1, w2) = (3.0, 5.0, 4.4);
    let p = SystemParams::new(e0, 0.01).unwrap();
    let q = QuenchSpec::new(w1, w2).unwrap();
    let printed = quench_amplitudes(&p, &q).unwrap();
    let a = exact(e0, 0.01, w1, w2);
    assert!(rel(printed.a_1_10, a.a_1_10) < 1e-4);
}
