use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pumpent::matrix::ComplexMatrix;
use pumpent::polarization::PolarizationMatrix;
use pumpent::sweep::{read_csv, write_csv};
use pumpent::twoqubit::TwoQubitState;
use tempfile::TempDir;

fn pumpent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pumpent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no `{key}` line in:\n{out}"))
        .to_string()
}

fn write_json<T: serde::Serialize>(dir: &TempDir, name: &str, value: &T) -> String {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn concurrence_of_bell_state() {
    let dir = TempDir::new().unwrap();
    let bell = write_json(&dir, "bell.json", &TwoQubitState::bell_phi_plus());
    let o = pumpent(&["concurrence", "--in", &bell]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let c: f64 = field(&out, "concurrence").parse().unwrap();
    assert!((c - 1.0).abs() <= 1e-12);
    let s: Vec<f64> = field(&out, "s")
        .split(' ')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(s.len(), 4);
    assert!(s.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn concurrence_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let not_psd = ComplexMatrix::diag_real(&[0.7, 0.7, -0.2, -0.2]).unwrap();
    let bad = write_json(&dir, "bad.json", &not_psd);
    let o = pumpent(&["concurrence", "--in", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());

    let o = pumpent(&["concurrence", "--in", &path(&dir, "missing.json")]);
    assert_eq!(o.status.code(), Some(1));

    let garbage = path(&dir, "garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(
        pumpent(&["concurrence", "--in", &garbage]).status.code(),
        Some(1)
    );
}

#[test]
fn scheme_analytic_and_oracle_agree() {
    let dir = TempDir::new().unwrap();
    let params = path(&dir, "params.json");
    fs::write(
        &params,
        r#"{"t":0.3,"theta1":0.4,"theta2":1.1,"alpha1":2.0,"alpha2":5.0,"mu":0.8,"gamma0":1.3,"pump_p":0.7}"#,
    )
    .unwrap();
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    assert_eq!(
        pumpent(&["scheme", "--params", &params, "--out", &a])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        pumpent(&["scheme", "--params", &params, "--oracle", "--out", &b])
            .status
            .code(),
        Some(0)
    );
    let read = |p: &str| -> TwoQubitState {
        serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
    };
    assert!(read(&a).matrix().max_abs_diff(read(&b).matrix()) <= 1e-12);
}

#[test]
fn scheme_rejects_unknown_fields_and_ranges() {
    let dir = TempDir::new().unwrap();
    let params = path(&dir, "params.json");
    let out = path(&dir, "rho.json");
    fs::write(
        &params,
        r#"{"t":0.3,"theta1":0,"theta2":0,"alpha1":0,"alpha2":0,"mu":0.8,"gamma0":0,"pump_p":0.7,"extra":1}"#,
    )
    .unwrap();
    assert_eq!(
        pumpent(&["scheme", "--params", &params, "--out", &out])
            .status
            .code(),
        Some(1)
    );
    fs::write(
        &params,
        r#"{"t":1.3,"theta1":0,"theta2":0,"alpha1":0,"alpha2":0,"mu":0.8,"gamma0":0,"pump_p":0.7}"#,
    )
    .unwrap();
    assert_eq!(
        pumpent(&["scheme", "--params", &params, "--out", &out])
            .status
            .code(),
        Some(1)
    );
    assert!(!Path::new(&out).exists());
}

#[test]
fn sweep_then_verify() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "results.csv");
    let o = pumpent(&[
        "sweep", "--n", "2000", "--seed", "11", "--mode", "general", "--out", &csv,
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("records: 2000"));

    let o = pumpent(&["verify", "--in", &csv]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("violations_general: 0"));
}

#[test]
fn verify_flags_violations() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "results.csv");
    pumpent(&[
        "sweep", "--n", "50", "--seed", "3", "--mode", "two_d", "--out", &csv,
    ]);
    let mut records = read_csv(fs::File::open(&csv).unwrap()).unwrap();
    records[7].concurrence = records[7].bound_general + 1e-3;
    let violating = path(&dir, "violating.csv");
    write_csv(&records, fs::File::create(&violating).unwrap()).unwrap();

    let o = pumpent(&["verify", "--in", &violating]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("violations_general: 1"));
    assert!(out.contains("violations_two_d: 1"));
}

#[test]
fn verify_rejects_malformed_csv() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "bad.csv");
    fs::write(&csv, "sample_id,pump_p\n0,0.5\n").unwrap();
    assert_eq!(pumpent(&["verify", "--in", &csv]).status.code(), Some(1));
}

#[test]
fn sweep_bytes_independent_of_workers() {
    let dir = TempDir::new().unwrap();
    let runs: Vec<Vec<u8>> = ["1", "2", "8"]
        .iter()
        .map(|w| {
            let csv = path(&dir, &format!("w{w}.csv"));
            let o = pumpent(&[
                "sweep",
                "--n",
                "3000",
                "--seed",
                "5",
                "--mode",
                "general",
                "--workers",
                w,
                "--out",
                &csv,
            ]);
            assert_eq!(o.status.code(), Some(0));
            fs::read(&csv).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn sweep_rejects_bad_config() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "r.csv");
    assert_eq!(
        pumpent(&["sweep", "--n", "0", "--seed", "1", "--mode", "general", "--out", &csv])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        pumpent(&[
            "sweep",
            "--n",
            "10",
            "--seed",
            "1",
            "--mode",
            "general",
            "--workers",
            "0",
            "--out",
            &csv
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        pumpent(&["sweep", "--n", "-3", "--seed", "1", "--mode", "general", "--out", &csv])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn saturate_reaches_bound() {
    let o = pumpent(&["saturate", "--pump-p", "0.6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let c: f64 = field(&out, "concurrence").parse().unwrap();
    assert!((c - 0.8).abs() <= 1e-9);
    assert_eq!(
        pumpent(&["saturate", "--pump-p", "-0.1"]).status.code(),
        Some(1)
    );
}

#[test]
fn pump_round_trip() {
    for p in ["0", "0.25", "0.3", "0.7071067811865476", "1"] {
        let o = pumpent(&["pump", "--p", p]);
        assert_eq!(o.status.code(), Some(0));
        let j: PolarizationMatrix = serde_json::from_slice(&o.stdout).unwrap();
        assert!((j.degree_of_polarization() - p.parse::<f64>().unwrap()).abs() <= 1e-15);
    }
    let o = pumpent(&["pump", "--pump-p", "0.4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(pumpent(&["pump", "--p", "1.5"]).status.code(), Some(1));
}

fn identity_channel() -> serde_json::Value {
    serde_json::json!({ "operators": [ComplexMatrix::identity(4).unwrap()] })
}

#[test]
fn channel_verify_passes_for_unitary_channel() {
    let dir = TempDir::new().unwrap();
    let ch = write_json(&dir, "ch.json", &identity_channel());
    let j = PolarizationMatrix::canonical(0.4).unwrap();
    let src = write_json(&dir, "sigma.json", &j);
    let o = pumpent(&["channel-verify", "--channel", &ch, "--source", &src]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "unital"), "true");

    let sigma = j.embed().unwrap().sigma;
    let target = write_json(&dir, "rho.json", &sigma);
    let src4 = write_json(&dir, "sigma4.json", &sigma);
    let o = pumpent(&[
        "channel-verify",
        "--channel",
        &ch,
        "--source",
        &src4,
        "--target",
        &target,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "majorized"), "true");
    let bound: f64 = field(&out, "bound_general").parse().unwrap();
    assert!((bound - 0.7).abs() <= 1e-12);
}

#[test]
fn channel_verify_flags_failures() {
    let dir = TempDir::new().unwrap();
    // amplitude damping on the first qubit, trace preserving but not unital
    let g: f64 = 0.5;
    let k0 = ComplexMatrix::diag_real(&[1.0, 1.0, (1.0 - g).sqrt(), (1.0 - g).sqrt()]).unwrap();
    let k1 = ComplexMatrix::from_fn(4, |i, j| {
        let v = if (i, j) == (0, 2) || (i, j) == (1, 3) {
            g.sqrt()
        } else {
            0.0
        };
        pumpent::matrix::c64(v, 0.0)
    })
    .unwrap();
    let ch = write_json(
        &dir,
        "damp.json",
        &serde_json::json!({ "operators": [k0, k1] }),
    );
    let src = write_json(
        &dir,
        "sigma.json",
        &PolarizationMatrix::canonical(0.2).unwrap(),
    );
    let o = pumpent(&["channel-verify", "--channel", &ch, "--source", &src]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert_eq!(field(&out, "trace_preserving"), "true");
    assert_eq!(field(&out, "unital"), "false");

    // a pure Bell target is not majorized by a mixed source and exceeds its bound
    let id = write_json(&dir, "id.json", &identity_channel());
    let bell = write_json(&dir, "bell.json", &TwoQubitState::bell_phi_plus());
    let o = pumpent(&[
        "channel-verify",
        "--channel",
        &id,
        "--source",
        &src,
        "--target",
        &bell,
    ]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert_eq!(field(&out, "majorized"), "false");
    assert_eq!(field(&out, "within_bound"), "false");

    let not_kraus = write_json(&dir, "bad.json", &serde_json::json!({ "operators": [] }));
    assert_eq!(
        pumpent(&["channel-verify", "--channel", &not_kraus, "--source", &src])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_version_and_usage_errors() {
    for sub in [
        "concurrence",
        "scheme",
        "sweep",
        "verify",
        "saturate",
        "channel-verify",
        "pump",
    ] {
        let o = pumpent(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub} --help");
        assert!(!o.stdout.is_empty());
    }
    let o = pumpent(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(pumpent::rng::RNG_ALGORITHM));

    let o = pumpent(&["verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert_eq!(pumpent(&[]).status.code(), Some(1));
}
