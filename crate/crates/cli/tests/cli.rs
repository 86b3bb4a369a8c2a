use std::path::Path;
use std::process::{Command, Output};

use compute_forward::{
    extended_gcd, likelihood_profile, ChannelState, Constellation, DecoderSetup,
};

fn cnf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnf"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> Output {
    let out = dir.join(name);
    let mut args = vec!["simulate", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    cnf(&args)
}

#[test]
fn rate_golden_instance() {
    let o = cnf(&["rate", "--h", "-1.274,0.602", "--snr-db", "40"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("a1,a2,quadratic_form,rate_bits,rate_clamped\n"));
    let row = &data_rows(&text)[0];
    assert_eq!(&row[..2], ["2", "-1"]);
    let rate: f64 = row[3].parse().unwrap();
    assert!((rate - 8.52238536631585).abs() < 1e-9);
}

#[test]
fn rate_equal_gains_and_vanishing_snr() {
    let o = cnf(&["rate", "--h", "0.5,0.5", "--snr-db", "20"]);
    assert_eq!(&data_rows(&stdout(&o))[0][..2], ["1", "1"]);
    let o = cnf(&["rate", "--h", "1,0", "--snr-db", "-100"]);
    let row = &data_rows(&stdout(&o))[0];
    assert_eq!(&row[..2], ["1", "0"]);
    assert!(row[3].parse::<f64>().unwrap() < 1e-9);
}

#[test]
fn rate_three_sources() {
    let o = cnf(&["rate", "--h", "1.0,-2.0,0.5", "--snr-db", "30"]);
    assert!(o.status.success());
    assert_eq!(data_rows(&stdout(&o))[0].len(), 6);
}

#[test]
fn likelihood_peaks_at_the_true_equation() {
    let o = cnf(&[
        "likelihood",
        "--h",
        "-1.274,0.602",
        "--snr-db",
        "40",
        "--sm",
        "3",
        "--x1",
        "-2",
        "--x2",
        "3",
    ]);
    assert!(o.status.success());
    let rows = data_rows(&stdout(&o));
    let best = rows
        .iter()
        .max_by(|a, b| {
            a[1].parse::<f64>()
                .unwrap()
                .total_cmp(&b[1].parse().unwrap())
        })
        .unwrap();
    assert_eq!(best[0], "-7");
}

#[test]
fn likelihood_scores_match_the_library() {
    let y = 0.731;
    let o = cnf(&[
        "likelihood",
        "--h",
        "0.9,-1.7",
        "--snr-db",
        "10",
        "--sm",
        "2",
        "--y",
        "0.731",
    ]);
    assert!(o.status.success());
    let ch = ChannelState::new(vec![0.9, -1.7], 10.0, 0.1).unwrap();
    let a = compute_forward::best_coefficients(&ch).unwrap().a;
    let setup = DecoderSetup::new(
        ch,
        extended_gcd(a[0], a[1]).unwrap(),
        Constellation::new(2).unwrap(),
    )
    .unwrap();
    let lib = likelihood_profile(&setup, y);
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), lib.len());
    for (row, (lambda, score)) in rows.iter().zip(lib) {
        assert_eq!(row[0].parse::<i64>().unwrap(), lambda);
        assert_eq!(row[1].parse::<f64>().unwrap(), score);
    }
}

#[test]
fn noiseless_observation_has_a_zero_metric() {
    let y = (-1.274f64 * -2.0 + 0.602 * 3.0).to_string();
    let o = cnf(&[
        "likelihood",
        "--h",
        "-1.274,0.602",
        "--snr-db",
        "40",
        "--sm",
        "3",
        "--y",
        &y,
    ]);
    let rows = data_rows(&stdout(&o));
    let min = rows
        .iter()
        .map(|r| r[2].parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(min < 1e-12);
}

#[test]
fn simulate_is_reproducible_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--sm",
        "3",
        "--snr-db-start",
        "10",
        "--snr-db-stop",
        "20",
        "--snr-db-step",
        "5",
        "--trials",
        "2000",
        "--seed",
        "42",
    ];
    assert!(simulate(dir.path(), "a.csv", &args).status.success());
    assert!(simulate(dir.path(), "b.csv", &args).status.success());
    let mut serial = args.to_vec();
    serial.push("--serial");
    assert!(simulate(dir.path(), "c.csv", &serial).status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(a, std::fs::read(dir.path().join("c.csv")).unwrap());
    assert!(a.starts_with(b"snr_db,trials,errors,error_rate,ambiguous_count\n"));

    let manifest = std::fs::read_to_string(dir.path().join("a.csv.manifest")).unwrap();
    for key in ["command=simulate", "seed=42", "version=", "timestamp="] {
        assert!(manifest.contains(key), "{key} missing from {manifest}");
    }
}

#[test]
fn simulate_reports_diversity_in_band() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(
        dir.path(),
        "d.csv",
        &[
            "--sm",
            "5",
            "--decoder",
            "ida",
            "--snr-db-start",
            "20",
            "--snr-db-stop",
            "40",
            "--snr-db-step",
            "2.5",
            "--trials",
            "20000",
            "--seed",
            "1",
        ],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let d: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("fitted_diversity="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.75..=1.25).contains(&d), "diversity {d}");
}

#[test]
fn bad_inputs_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        simulate(
            dir.path(),
            "z.csv",
            &[
                "--sm",
                "3",
                "--trials",
                "0",
                "--snr-db-start",
                "0",
                "--snr-db-stop",
                "1",
                "--snr-db-step",
                "1"
            ]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        cnf(&["rate", "--h", "1", "--snr-db", "10"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cnf(&[
            "likelihood",
            "--h",
            "1,1",
            "--snr-db",
            "10",
            "--sm",
            "2",
            "--x1",
            "3",
            "--x2",
            "0"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        cnf(&["simulate", "--decoder", "nope"]).status.code(),
        Some(2)
    );
}

#[test]
fn unwritable_output_exits_with_io_code() {
    let o = cnf(&[
        "simulate",
        "--sm",
        "2",
        "--snr-db-start",
        "0",
        "--snr-db-stop",
        "0",
        "--snr-db-step",
        "1",
        "--trials",
        "10",
        "--out",
        "/nonexistent/dir/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
