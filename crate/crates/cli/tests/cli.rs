use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_duffing-readout"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn circuit_map_preset_writes_configured_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["circuit-map", "--preset", "fig0", "--points", "41"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("fig0_circuit_map.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "phi_ex[Phi0],alpha_over_Omega,g_over_Omega,Omega[rad/s]");
    assert_eq!(lines.len(), 42);
    // g/Ω starts below α/Ω and ends above it
    let cols = |l: &str| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>();
    let first = cols(lines[1]);
    let last = cols(lines[41]);
    assert!(first[2] < first[1] && last[2] > last[1]);
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = |jobs: &'static str| {
        vec!["sweep", "--preset", "fig3", "--points", "6", "--from", "0.978", "--to", "0.982", "--nfock", "10", "--jobs", jobs, "--out", "-"]
    };
    let a = run(dir.path(), &args("1"));
    let b = run(dir.path(), &args("2"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1 + 2 * 6);
    assert!(text.lines().nth(1).unwrap().contains(",up,"));
    assert!(text.lines().nth(7).unwrap().contains(",down,"));
}

#[test]
fn empty_mode_list_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.cfg", "[sweep]\nmodes = []\npoints = 10\n");
    let o = run(dir.path(), &["sweep", "--config", &cfg, "--out", "-"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write(dir.path(), "bad.cfg", "[model]\nalpah = 0.01\n");
    let flux = write(dir.path(), "flux.cfg", "[circuit]\nC_s_pF = 7.65\nI_c0_nA = 200\nphi_ex = 0.5\n");
    for args in [
        vec!["sweep", "--config", bad_key.as_str()],
        vec!["sweep", "--config", flux.as_str()],
        vec!["sweep", "--preset", "fig9"],
        vec!["sweep", "--modes", "sideways"],
        vec!["sweep", "--from", "1.0", "--to", "0.9"],
        vec!["sweep", "--config", "/nonexistent/x.cfg"],
        vec!["spectrum", "--operator", "chi3"],
    ] {
        let o = run(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn oracle_failure_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["oracle-compare", "--omega-ex", "0.98", "--nfock", "3", "--reference-nfock", "10", "--out", "-"],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).lines().nth(1).unwrap().contains(",FAIL,"));
    let o = run(dir.path(), &["oracle-compare", "--omega-ex", "0.97,0.98", "--nfock", "8", "--out", "-"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches(",PASS,").count(), 2);
}

#[test]
fn resonances_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["resonances", "--preset", "fig1", "--n-max", "3", "--nfock", "12", "--out", "-"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("N,omega_center[Omega],omega_N[Omega],gap[Omega],gap_rabi_formula[Omega]"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn spectrum_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["spectrum", "--operator", "chi", "--from", "-1.1", "--to", "1.1", "--points", "11", "--nfock", "8", "--out", "-"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 12);
    for line in text.lines().skip(1) {
        let s: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(s >= 0.0);
    }
    let o = run(
        dir.path(),
        &["metrics", "--preset", "fig5", "--points", "3", "--from", "0.978", "--to", "0.98", "--nfock", "8", "--out", "-"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().contains("Gamma[Omega],Gamma_over_gamma,T_meas[2pi/Omega],efficiency"));
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains(",nan,"));
}

#[test]
fn quasienergies_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["quasienergies", "--modes", "detector-only", "--nfock", "6", "--points", "4", "--out", "-"],
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 6 * 4);
}
