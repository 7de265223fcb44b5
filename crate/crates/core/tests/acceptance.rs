//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pumpent::channels::{is_majorized_by, mixed_unitary_channel};
use pumpent::matrix::{c64, haar_unitary, ComplexMatrix, Spectrum};
use pumpent::polarization::PolarizationMatrix;
use pumpent::rng::seeded;
use pumpent::scheme::{build_density_matrix, build_density_matrix_oracle, is_two_d, SchemeParams};
use pumpent::sweep::{
    run_sweep, run_sweep_to_csv, saturating_config, verify_bounds, SweepConfig, SweepMode,
};
use pumpent::twoqubit::{construct_max_entangled_state, TwoQubitState};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Sorted spectrum drawn uniformly from the simplex. Every fifth draw zeroes
/// some eigenvalues to cover rank-deficient states.
fn random_spectrum<R: Rng>(rng: &mut R, i: usize) -> Spectrum {
    let mut v: Vec<f64> = (0..4).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    if i.is_multiple_of(5) {
        let keep = 1 + i / 5 % 3;
        v[keep..].iter_mut().for_each(|x| *x = 0.0);
    }
    let total: f64 = v.iter().sum();
    Spectrum::from_unsorted(v.iter().map(|x| x / total).collect()).unwrap()
}

fn tight_formula(l: &[f64]) -> f64 {
    (l[0] - l[2] - 2.0 * (l[1] * l[3]).sqrt()).max(0.0)
}

fn general_sweep(n: u64, mode: SweepMode, seed: u64) -> Outcome {
    let cfg = SweepConfig::new(n, seed, mode).with_workers(1);
    let start = Instant::now();
    let records = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let report = verify_bounds(&records);
    let mut detail = format!(
        "n={} general_violations={} two_d_violations={} worst_slack={:.3e} ({:.1?})",
        report.records,
        report.general_violations,
        report.two_d_violations,
        report.worst_slack,
        elapsed
    );
    let mut ok = report.records == n && report.violations() == 0;
    if mode == SweepMode::TwoD {
        let not_two_d = records
            .iter()
            .filter(|r| {
                !build_density_matrix(&r.params)
                    .map(|s| is_two_d(&s, 1e-9))
                    .unwrap_or(false)
            })
            .count();
        detail += &format!(" not_two_d={not_two_d}");
        ok &= report.two_d_records == n && not_two_d == 0;
    }
    check(ok, detail)
}

fn criterion_1() -> Outcome {
    general_sweep(100_000, SweepMode::General, 1)
}

fn criterion_2() -> Outcome {
    general_sweep(100_000, SweepMode::TwoD, 2)
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let (_, c) = saturating_config(p).map_err(|e| e.to_string())?;
        worst = worst.max((c - (1.0 + p) / 2.0).abs());
    }
    check(worst <= 1e-9, format!("max |C - (1+P)/2| = {worst:.3e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = seeded(4);
    let mut worst_tight = 0.0f64;
    let mut worst_orbit = f64::NEG_INFINITY;
    for i in 0..1000 {
        let spec = random_spectrum(&mut rng, i);
        let bound = tight_formula(spec.values());
        let rho = construct_max_entangled_state(&spec).map_err(|e| e.to_string())?;
        let c = rho.concurrence().map_err(|e| e.to_string())?.value;
        worst_tight = worst_tight.max((c - bound).abs());
        for _ in 0..100 {
            let u = haar_unitary(4, &mut rng).map_err(|e| e.to_string())?;
            let rotated =
                TwoQubitState::new(rho.matrix().conjugate_by(&u)).map_err(|e| e.to_string())?;
            let c = rotated.concurrence().map_err(|e| e.to_string())?.value;
            worst_orbit = worst_orbit.max(c - bound);
        }
    }
    check(
        worst_tight <= 1e-9 && worst_orbit <= 1e-9,
        format!("tightness error {worst_tight:.3e}, max orbit excess {worst_orbit:.3e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = seeded(5);
    let mut failures = 0usize;
    let mut worst = f64::INFINITY;
    let pumps: Vec<ComplexMatrix> = (0..100)
        .map(|_| {
            let p: f64 = rng.random();
            let u = haar_unitary(2, &mut rng).unwrap();
            let j = ComplexMatrix::diag_real(&[(1.0 + p) / 2.0, (1.0 - p) / 2.0])
                .unwrap()
                .conjugate_by(&u);
            PolarizationMatrix::new(j).unwrap().embed().unwrap().sigma
        })
        .collect();
    for _ in 0..1000 {
        let k = rng.random_range(1..=6);
        let ch = mixed_unitary_channel(k, &mut rng).map_err(|e| e.to_string())?;
        for sigma in &pumps {
            let rho = ch.apply(sigma).map_err(|e| e.to_string())?;
            let report = is_majorized_by(&rho, sigma, 1e-9).map_err(|e| e.to_string())?;
            worst = worst.min(report.worst_slack);
            failures += usize::from(!report.holds);
        }
    }
    check(
        failures == 0,
        format!("100000 pairs, {failures} failures, worst slack {worst:.3e}"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = seeded(6);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p = SchemeParams {
            t: rng.random(),
            theta1: rng.random::<f64>() * PI,
            theta2: rng.random::<f64>() * PI,
            alpha1: rng.random::<f64>() * 2.0 * PI,
            alpha2: rng.random::<f64>() * 2.0 * PI,
            mu: rng.random(),
            gamma0: rng.random::<f64>() * 2.0 * PI,
            pump_p: rng.random(),
        };
        let a = build_density_matrix(&p).map_err(|e| e.to_string())?;
        let b = build_density_matrix_oracle(&p).map_err(|e| e.to_string())?;
        worst = worst.max(a.matrix().max_abs_diff(b.matrix()));
    }
    check(worst <= 1e-12, format!("max entry difference {worst:.3e}"))
}

fn criterion_7() -> Outcome {
    let h = FRAC_1_SQRT_2;
    let bells = [
        [h, 0.0, 0.0, h],
        [h, 0.0, 0.0, -h],
        [0.0, h, h, 0.0],
        [0.0, h, -h, 0.0],
    ];
    let bell_states: Vec<TwoQubitState> = bells
        .iter()
        .map(|b| TwoQubitState::pure(&b.map(|x| c64(x, 0.0))).unwrap())
        .collect();

    let mut werner_err = 0.0f64;
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let rho = ComplexMatrix::from_fn(4, |i, j| {
            let bell = if (i == 0 || i == 3) && (j == 0 || j == 3) {
                0.5
            } else {
                0.0
            };
            let mixed = if i == j { 0.25 } else { 0.0 };
            c64(p * bell + (1.0 - p) * mixed, 0.0)
        })
        .unwrap();
        let c = TwoQubitState::new(rho)
            .unwrap()
            .concurrence()
            .map_err(|e| e.to_string())?
            .value;
        werner_err = werner_err.max((c - ((3.0 * p - 1.0) / 2.0).max(0.0)).abs());
    }
    let bell_err = bell_states
        .iter()
        .map(|s| (s.concurrence().unwrap().value - 1.0).abs())
        .fold(0.0, f64::max);

    let mut rng = seeded(7);
    let mut product_max = 0.0f64;
    for _ in 0..100 {
        let a = haar_unitary(2, &mut rng).unwrap().column(0);
        let b = haar_unitary(2, &mut rng).unwrap().column(0);
        let psi = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
        product_max = product_max.max(
            TwoQubitState::pure(&psi)
                .unwrap()
                .concurrence()
                .unwrap()
                .value,
        );
    }
    check(
        werner_err <= 1e-10 && bell_err <= 1e-10 && product_max <= 1e-10,
        format!("Werner error {werner_err:.3e}, Bell error {bell_err:.3e}, max product C {product_max:.3e}"),
    )
}

fn criterion_8() -> Outcome {
    let cfg = SweepConfig::new(1_000_000, 8, SweepMode::General).with_workers(4);
    let start = Instant::now();
    let report = run_sweep_to_csv(&cfg, io::sink()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let gaps: Vec<f64> = report
        .deciles
        .iter()
        .map(|d| d.general_gap().unwrap_or(f64::INFINITY))
        .collect();
    let shown: Vec<String> = gaps.iter().map(|g| format!("{g:.3}")).collect();
    check(
        gaps.iter().all(|&g| g <= 0.05) && elapsed < Duration::from_secs(120),
        format!(
            "decile gaps [{}] (limit 0.05), {elapsed:.1?}",
            shown.join(", ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut outputs = Vec::new();
    for workers in [1, 2, 8] {
        let cfg = SweepConfig::new(50_000, 9, SweepMode::General).with_workers(workers);
        let mut buf = Vec::new();
        run_sweep_to_csv(&cfg, &mut buf).map_err(|e| e.to_string())?;
        outputs.push(buf);
    }
    check(
        outputs.windows(2).all(|w| w[0] == w[1]),
        format!("{} bytes per run, workers 1, 2, 8", outputs[0].len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("general bound", criterion_1),
        ("2D bound", criterion_2),
        ("saturation", criterion_3),
        ("unitary-orbit tightness", criterion_4),
        ("majorization", criterion_5),
        ("oracle equivalence", criterion_6),
        ("concurrence oracle", criterion_7),
        ("envelope coverage", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} ({name}): PASS  {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL  {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
