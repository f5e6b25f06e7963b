use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use floquet_core::circuit::{standard_orderings, Boundary, OrderingKind};
use floquet_core::rng::derive_stream;
use floquet_spectra::config::circuit_spec_to_toml;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_floquet-spectra"));
    c.env_remove("FLOQUET_SPECTRA_WORKERS");
    c
}

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(c: &mut Command) -> Output {
    c.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

#[test]
fn sff_writes_csv_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["sff", "--config", &data("cue4.toml"), "--out"]).arg(dir.path()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("cue4_sff.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,mean,stderr,n,prediction,z");
    assert_eq!(lines.len(), 10);
    assert!(lines[1].starts_with("0,1.6000000000000000e1,"));
    assert!(lines[6].contains(",4.0000000000000000e0,"));
}

#[test]
fn csv_is_identical_across_worker_counts() {
    let read = |workers: &str, env: bool| {
        let dir = tempfile::tempdir().unwrap();
        let mut c = bin();
        c.args(["sff", "--config", &data("brickwork_l4.toml"), "--out"]).arg(dir.path());
        if env {
            c.env("FLOQUET_SPECTRA_WORKERS", workers);
        } else {
            c.args(["--workers", workers]);
        }
        assert_eq!(code(&run(&mut c)), 0);
        fs::read(dir.path().join("brickwork_sff.csv")).unwrap()
    };
    let one = read("1", false);
    assert_eq!(one, read("4", false));
    assert_eq!(one, read("3", true));
}

#[test]
fn seed_flag_changes_output() {
    let read = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = run(bin().args(["sff", "--config", &data("brickwork_l4.toml"), "--seed", seed, "--out"]).arg(dir.path()));
        assert_eq!(code(&o), 0);
        fs::read(dir.path().join("brickwork_sff.csv")).unwrap()
    };
    assert_ne!(read("1"), read("2"));
}

#[test]
fn r2_plot_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["r2", "--config", &data("cue4.toml"), "--out"]).arg(dir.path()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(dir.path().join("cue4_r2.csv")).unwrap();
    assert!(csv.starts_with("bin,lo,hi,mean,stderr,n,cue_prediction,sigma_prediction,z\n"));
    assert_eq!(csv.lines().count(), 17);
    assert!(!dir.path().join("cue4_r2.svg").exists());

    let o = run(bin().args(["r2", "--config", &data("brickwork_l4.toml"), "--plot", "--out"]).arg(dir.path()));
    assert_eq!(code(&o), 0);
    let svg = fs::read_to_string(dir.path().join("brickwork_r2.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    // circuits report predictions without z-scores
    let csv = fs::read_to_string(dir.path().join("brickwork_r2.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "model = \"single_cue\"\ncue_dim = 4\nt_list = []\nn_samples = 10\nmaster_seed = 1\n").unwrap();
    let o = run(bin().args(["sff", "--config"]).arg(&bad));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("t_list"));
    let o = run(bin().args(["sff", "--config"]).arg(dir.path().join("missing.toml")));
    assert_eq!(code(&o), 2);
}

#[test]
fn invalid_circuit_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    let mut s = standard_orderings(OrderingKind::Brickwork, 1, 4, 2, Boundary::Open, derive_stream(0, 0)).unwrap();
    s.bonds[0].substep = s.bonds[1].substep;
    fs::write(&spec, circuit_spec_to_toml(&s)).unwrap();
    let o = run(bin().args(["validate-circuit", "--config"]).arg(&spec));
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("SharedSubstepAtSite"));
}

#[test]
fn validate_circuit_accepts_standard_orderings() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    let s = standard_orderings(OrderingKind::Random, 2, 3, 2, Boundary::Periodic, derive_stream(5, 0)).unwrap();
    fs::write(&spec, circuit_spec_to_toml(&s)).unwrap();
    let o = run(bin().args(["validate-circuit", "--config"]).arg(&spec));
    assert_eq!(code(&o), 0);
    fs::write(&spec, "dimension = [").unwrap();
    assert_eq!(code(&run(bin().args(["validate-circuit", "--config"]).arg(&spec))), 2);
}

#[test]
fn wg_table_command() {
    let o = run(bin().args(["wg-table", "--q", "3", "--max-p", "2"]));
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for line in ["1 1/3", "1,1 1/8", "2 -1/24"] {
        assert!(text.lines().any(|l| l == line), "{line}");
    }
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["wg-table", "--q", "4", "--max-p", "3", "--out"]).arg(dir.path()));
    assert_eq!(code(&o), 0);
    let file = fs::read_to_string(dir.path().join("wg-table-q4-p3.txt")).unwrap();
    assert_eq!(floquet_core::weingarten::parse_table(&file).unwrap().max_p(), 3);
    assert_eq!(code(&run(bin().args(["wg-table", "--q", "2", "--max-p", "3"]))), 2);
}

#[test]
fn verify_suites_pass() {
    for suite in ["weingarten", "moments", "asymptotics"] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(bin().args(["verify", suite, "--out"]).arg(dir.path()));
        assert_eq!(code(&o), 0, "{suite}");
        let csv = fs::read_to_string(dir.path().join(format!("verify_{suite}.csv"))).unwrap();
        assert!(csv.starts_with("suite,check,status,detail\n"));
        assert!(!csv.contains(",fail,"));
        assert!(Path::new(&dir.path().join(format!("verify_{suite}.csv"))).exists());
    }
    let o = run(bin().args(["verify", "ordering", "--samples", "300", "--workers", "2"]));
    assert_eq!(code(&o), 0);
}
