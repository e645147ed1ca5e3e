//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dynlamb::dynamics::{dressed_ground, evolve, EvolveConfig, RampProtocol, RampShape};
use dynlamb::entanglement::{conditional_concurrences, Conditioning};
use dynlamb::hamiltonian::{h0, interaction, InteractionVariant};
use dynlamb::hilbert::build_basis;
use dynlamb::oracle::{
    diagonalize, dressed_energy, exact_quench_amplitudes, sudden_quench_table, OracleConfig,
};
use dynlamb::perturbation::{perturbed_energy, perturbed_state};
use dynlamb::quench::{
    dle_probabilities, quench_amplitudes, w_10_from_lamb_shifts, w_11_from_lamb_shifts,
};
use dynlamb::{BasisLabel, CavityFrequency, FockCutoff, QuenchSpec, SystemParams};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn rel_to(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

fn showcase() -> (SystemParams, QuenchSpec) {
    (
        SystemParams::new(3.721 * TAU, 0.2 * TAU).unwrap(),
        QuenchSpec::new(5.0 * TAU, 3.75 * TAU).unwrap(),
    )
}

fn weak_point(lambda: f64) -> (SystemParams, QuenchSpec) {
    (
        SystemParams::new(3.0 * TAU, lambda * TAU).unwrap(),
        QuenchSpec::new(5.0 * TAU, 4.4 * TAU).unwrap(),
    )
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (p, q) = showcase();
    let w = dle_probabilities(&p, &q).unwrap();
    let c = conditional_concurrences(&p, &q, Conditioning::Raw).unwrap();
    let elapsed = start.elapsed();
    let checks = [
        ("w_10", w.w_10, 1.472e-5, 1e-3),
        ("w_01", w.w_01, 1.472e-5, 1e-3),
        ("w_11", w.w_11, 0.1, 1e-2),
        ("C_1", c.c_1, 2.945e-5, 1e-3),
        ("C_2", c.c_2, 1.553e-3, 1e-3),
    ];
    let mut pass = elapsed < Duration::from_secs(1);
    let mut detail = Vec::new();
    for (name, value, reference, tol) in checks {
        let dev = rel_to(value, reference);
        pass &= dev <= tol;
        detail.push(format!("{name}={value:.6e} (dev {dev:.1e} <= {tol:.0e})"));
    }
    detail.push(format!("{elapsed:.2?}"));
    Outcome {
        pass,
        detail: detail.join(", "),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let away = |rng: &mut ChaCha8Rng| loop {
        let r: f64 = rng.random_range(0.2..3.0);
        if (r - 1.0).abs() > 0.05 {
            return r;
        }
    };
    let mut worst = [0.0f64; 6];
    let mut sets = 0;
    while sets < 500 {
        let e0 = rng.random_range(0.5..10.0);
        let lam = e0 * rng.random_range(0.001..0.3);
        let (r1, r2) = (away(&mut rng), away(&mut rng));
        if (r1 - r2).abs() <= 0.01 {
            continue;
        }
        sets += 1;
        let p = SystemParams::new(e0, lam).unwrap();
        let q = QuenchSpec::new(r1 * e0, r2 * e0).unwrap();
        let a = quench_amplitudes(&p, &q).unwrap();
        let w = dle_probabilities(&p, &q).unwrap();
        let c = conditional_concurrences(&p, &q, Conditioning::Raw).unwrap();
        let errs = [
            rel(c.c_1, 2.0 * w.w_10),
            rel(w.w_10, w_10_from_lamb_shifts(&p, &q).unwrap()),
            rel(w.w_11, w_11_from_lamb_shifts(&p, &q).unwrap()),
            rel(c.c_2, 2.0 * (a.a_2_00 * a.a_2_11).abs()),
            rel(a.a_1_10, a.a_1_01),
            rel(w.w_10, w.w_01),
        ];
        for (m, e) in worst.iter_mut().zip(errs) {
            *m = m.max(e);
        }
    }
    let names = [
        "C1=2w10",
        "w10 Lamb",
        "w11 Lamb",
        "C2=2|a200 a211|",
        "a110=a101",
        "w10=w01",
    ];
    let pass = worst.iter().all(|&e| e <= 1e-12);
    let detail = names
        .iter()
        .zip(worst)
        .map(|(n, e)| format!("{n} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome {
        pass,
        detail: format!("{sets} parameter sets, worst relative error: {detail}"),
    }
}

fn criterion_3() -> Outcome {
    let (p, q) = showcase();
    let w = dle_probabilities(&p, &q).unwrap();
    let ratio = (w.w_11 - w.w_10 * w.w_01).abs() / w.w_11;
    Outcome {
        pass: ratio > 0.99,
        detail: format!("|w11 - w10 w01|/w11 = {ratio:.12}"),
    }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let config = OracleConfig {
        cutoff: FockCutoff::new(20),
        ..Default::default()
    };
    let errors = |lambda: f64| {
        let (p, q) = weak_point(lambda);
        let closed = quench_amplitudes(&p, &q).unwrap().values();
        let exact = exact_quench_amplitudes(&p, &q, &config).unwrap();
        let rel: Vec<f64> = closed
            .iter()
            .zip(exact.amplitudes.values())
            .map(|(c, e)| rel_to(*c, e))
            .collect();
        let forbidden = exact
            .table
            .iter()
            .filter(|(l, _)| l.parity() < 0)
            .map(|(_, a)| a.abs())
            .fold(0.0, f64::max);
        (rel, forbidden)
    };
    let (full, forbidden) = errors(0.01);
    let (half, forbidden_half) = errors(0.005);
    let elapsed = start.elapsed();
    let names = ["a_1_10", "a_1_01", "a_0_11", "a_2_11", "a_2_00"];
    let mut pass = elapsed < Duration::from_secs(30) && forbidden.max(forbidden_half) < 1e-12;
    let mut detail = Vec::new();
    for i in 0..5 {
        let shrink = full[i] / half[i];
        let ok = full[i] <= 0.05 && shrink >= 1.8;
        pass &= ok;
        detail.push(format!(
            "{} rel {:.2e} shrink {:.2}{}",
            names[i],
            full[i],
            shrink,
            if ok { "" } else { " (x)" }
        ));
    }
    detail.push(format!(
        "forbidden max {:.1e}",
        forbidden.max(forbidden_half)
    ));
    detail.push(format!("{elapsed:.2?}"));
    Outcome {
        pass,
        detail: detail.join(", "),
    }
}

fn criterion_5() -> Outcome {
    let cutoff = FockCutoff::new(20);
    let labels: Vec<BasisLabel> = build_basis(FockCutoff::new(2));
    let mut worst_ratio = (f64::INFINITY, f64::NEG_INFINITY);
    for omega in [5.0 * TAU, 4.4 * TAU] {
        let omega = CavityFrequency::new(omega).unwrap();
        let err = |lambda: f64| -> Vec<f64> {
            let (p, _) = weak_point(lambda);
            let spec = diagonalize(&p, omega, cutoff).unwrap();
            labels
                .iter()
                .map(|&l| {
                    (dressed_energy(&spec, l).unwrap() - perturbed_energy(l, &p, omega).unwrap())
                        .abs()
                })
                .collect()
        };
        for (a, b) in err(0.01).into_iter().zip(err(0.005)) {
            let r = a / b;
            worst_ratio = (worst_ratio.0.min(r), worst_ratio.1.max(r));
        }
    }

    let mut worst_coeff = 0.0f64;
    let small = FockCutoff::new(6);
    for lambda in [0.01, 0.2] {
        let (p, q) = weak_point(lambda);
        for omega in [q.omega1, q.omega2] {
            let h = h0(&p, omega, small);
            let v = interaction(&p, small, InteractionVariant::Total);
            for base in build_basis(FockCutoff::new(4)) {
                let state = perturbed_state(base, &p, omega).unwrap();
                let e_base = h.element(base, base).re;
                for m in build_basis(small).into_iter().filter(|&m| m != base) {
                    let element = v.element(m, base).re;
                    let gap = e_base - h.element(m, m).re;
                    let oracle = if element == 0.0 { 0.0 } else { element / gap };
                    worst_coeff = worst_coeff.max(rel(state.coefficient(m), oracle));
                }
            }
        }
    }
    let pass = (12.0..=20.0).contains(&worst_ratio.0)
        && (12.0..=20.0).contains(&worst_ratio.1)
        && worst_coeff <= 1e-12;
    Outcome {
        pass,
        detail: format!(
            "eigenvalue error ratio under lambda/2 in [{:.3}, {:.3}] over {} labels x 2 frequencies, coefficient rel err {:.1e}",
            worst_ratio.0,
            worst_ratio.1,
            labels.len(),
            worst_coeff
        ),
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let (p, q) = weak_point(0.01);
    let w1 = q.omega1.value();
    let cutoff = FockCutoff::new(20);
    let initial = dressed_ground(&p, q.omega1, cutoff).unwrap();
    let config = EvolveConfig::default();
    let run = |shape, tau, config: &EvolveConfig| {
        let protocol = RampProtocol::new(shape, q.omega1, q.omega2, tau, 0.0).unwrap();
        evolve(&initial, &protocol, &p, cutoff, config).unwrap()
    };
    let sudden = run(RampShape::Linear, 1e-3 / w1, &config);
    let driveless = run(
        RampShape::Linear,
        1e-3 / w1,
        &EvolveConfig {
            drive: false,
            ..config
        },
    );
    let adiabatic = run(RampShape::Smoothstep, 1e3 / w1, &config);

    let table = sudden_quench_table(&p, &q, cutoff, 2).unwrap();
    let prob = |l: BasisLabel| table[&l].norm_sqr();
    let l = |n, a, b| BasisLabel::new(n, a, b);
    let sectors = [
        ("w_10", sudden.w_10(), prob(l(1, 1, 0))),
        ("w_01", sudden.w_01(), prob(l(1, 0, 1))),
        ("w_11", sudden.w_11(), prob(l(0, 1, 1)) + prob(l(2, 1, 1))),
        ("P_2_00", sudden.probability(l(2, 0, 0)), prob(l(2, 0, 0))),
    ];
    let sudden_err = sectors
        .iter()
        .map(|(_, a, b)| rel_to(*a, *b))
        .fold(0.0, f64::max);

    let exact = exact_quench_amplitudes(
        &p,
        &q,
        &OracleConfig {
            cutoff,
            ..Default::default()
        },
    )
    .unwrap()
    .amplitudes;
    let bare = [
        (driveless.w_10(), exact.a_1_10.powi(2)),
        (driveless.w_01(), exact.a_1_01.powi(2)),
        (
            driveless.w_11(),
            exact.a_0_11.powi(2) + exact.a_2_11.powi(2),
        ),
    ];
    let bare_err = bare.iter().map(|(a, b)| rel_to(*a, *b)).fold(0.0, f64::max);

    let ratio = adiabatic.total_excitation() / sudden.total_excitation();
    let runs = [&sudden, &driveless, &adiabatic];
    let norm = runs.iter().map(|r| r.norm_drift).fold(0.0, f64::max);
    let parity = runs.iter().map(|r| r.parity_drift).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = sudden_err <= 0.01
        && bare_err <= 0.01
        && ratio < 0.01
        && norm <= 1e-8
        && parity <= 1e-10
        && elapsed < Duration::from_secs(300);
    Outcome {
        pass,
        detail: format!(
            "sudden vs oracle sudden projection {sudden_err:.1e}, driveless vs bare projection {bare_err:.1e}, \
             adiabatic/sudden excitation {ratio:.1e}, norm drift {norm:.1e}, parity drift {parity:.1e}, {elapsed:.1?}"
        ),
    }
}

fn sweep_csv(args: &[String], workers: &str) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_dynlamb"))
        .arg("sweep")
        .args(args)
        .env("DYNLAMB_WORKERS", workers)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn criterion_7() -> Outcome {
    let args = |values: [f64; 6], unit: &str| -> Vec<String> {
        let [w1, w2, e0, lam, a, b] = values;
        vec![
            format!("--omega1={w1}"),
            format!("--omega2={w2}"),
            format!("--e0={e0}"),
            format!("--lambda={lam}"),
            format!("--unit={unit}"),
            format!("--sweep=omega2={a}:{b}:10"),
        ]
    };
    let linear = [5.0, 3.75, 3.721, 0.2, 3.75, 4.6];
    let angular = linear.map(|x| x * TAU);
    let lin_args = args(linear, "ghz_linear");
    let first = sweep_csv(&lin_args, "1");
    let second = sweep_csv(&lin_args, "1");
    let parallel = sweep_csv(&lin_args, "4");
    let ang = sweep_csv(&args(angular, "angular"), "2");

    let dimensionless = |csv: &str| -> Vec<String> {
        csv.lines()
            .skip(1)
            .map(|l| {
                l.split_once(',')
                    .map(|(_, rest)| rest.to_string())
                    .unwrap_or_default()
            })
            .collect()
    };
    let rows = first.lines().count() - 1;
    let deterministic = first == second && first == parallel;
    let invariant = dimensionless(&first) == dimensionless(&ang);
    Outcome {
        pass: deterministic && invariant && rows == 10,
        detail: format!(
            "repeat/worker-count byte-identical: {deterministic}, ghz_linear vs angular dimensionless columns bit-identical: {invariant}, rows {rows}"
        ),
    }
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("reference-value reproduction", criterion_1),
        ("exact identities", criterion_2),
        ("non-factorization", criterion_3),
        ("oracle equivalence", criterion_4),
        ("spectral consistency", criterion_5),
        ("dynamics limits", criterion_6),
        ("determinism and unit invariance", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{status}] {name}: {}", i + 1, outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
