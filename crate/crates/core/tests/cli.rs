use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use secmimo::experiment::{OPTIMIZE_PHI_HEADER, SWEEP_N_HEADER, SWEEP_PHI_HEADER};

fn secmimo(args: &[&str], conf: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secmimo"))
        .args(args)
        .arg("--config")
        .arg(conf)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_conf(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn sweep_n_emits_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "a.conf", "N = 32,64,128,256\nL = 10\n");
    let out = dir.path().join("a.csv");
    let o = secmimo(&["sweep-n", "--seed", "3", "--trials", "50"], &conf, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], SWEEP_N_HEADER);
    assert_eq!(lines.len(), 21);
    assert!(text.ends_with('\n') && !text.contains('\r'));
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 9);
        for v in &f[2..] {
            v.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn seed_changes_monte_carlo_but_not_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "a.conf", "N = 32\nschemes = HZF\n");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(
        secmimo(&["sweep-n", "--seed", "1", "--trials", "40"], &conf, &a)
            .status
            .success()
    );
    assert!(
        secmimo(&["sweep-n", "--seed", "2", "--trials", "40"], &conf, &b)
            .status
            .success()
    );
    let row = |p: &Path| -> Vec<String> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(String::from)
            .collect()
    };
    let (ra, rb) = (row(&a), row(&b));
    assert_eq!(ra[2], rb[2]);
    assert_ne!(ra[3], rb[3]);
}

#[test]
fn sweep_phi_header_and_domain_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(
        dir.path(),
        "p.conf",
        "N = 128\nL = 8,12\nschemes = HZF,HMF\ngrid_step = 0.05\n",
    );
    let out = dir.path().join("p.csv");
    let o = secmimo(&["sweep-phi"], &conf, &out);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_PHI_HEADER);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 2 * 19);
    for r in &rows {
        if r[0] == "8" {
            assert_eq!((r[3], r[4], r[5]), ("0", "", "0"));
        } else {
            assert_eq!(r[5], "1");
        }
    }
}

#[test]
fn optimize_phi_summary_orders_zf_above_mf() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "o.conf", "N = 128\nL = 10\nschemes = HZF,HMF\n");
    let out = dir.path().join("o.csv");
    let o = secmimo(&["optimize-phi"], &conf, &out);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), OPTIMIZE_PHI_HEADER);
    assert_eq!(text.lines().count(), 1 + 2 * 99);
    let stdout = String::from_utf8(o.stdout).unwrap();
    let phi: Vec<f64> = stdout
        .lines()
        .map(|l| l.split(", ").nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(stdout.starts_with("HZF, 10, "));
    assert!(phi[0] > phi[1]);
}

#[test]
fn optimize_phi_without_eavesdropper_hits_grid_top() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "o.conf", "M = 0\nschemes = FZF\n");
    let out = dir.path().join("o.csv");
    let o = secmimo(&["optimize-phi"], &conf, &out);
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .starts_with("FZF, 10, 0.99,"));
}

#[test]
fn grid_halving_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let star = |step: &str| -> f64 {
        let conf = write_conf(
            dir.path(),
            "s.conf",
            &format!("schemes = HZF\ngrid_step = {step}\n"),
        );
        let o = secmimo(&["optimize-phi"], &conf, &dir.path().join("s.csv"));
        String::from_utf8(o.stdout)
            .unwrap()
            .trim()
            .split(", ")
            .nth(3)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((star("0.01") - star("0.005")).abs() < 1e-3);
}

#[test]
fn config_errors_exit_2_and_leave_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let bad = write_conf(dir.path(), "bad.conf", "N = 8\nL = 10\n");
    let o = secmimo(&["sweep-n", "--trials", "5"], &bad, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("L < N"));
    let garbled = write_conf(dir.path(), "g.conf", "N = 32\nwhat\n");
    assert_eq!(secmimo(&["sweep-n"], &garbled, &out).status.code(), Some(2));
    let undefined = write_conf(dir.path(), "u.conf", "L = 8\n");
    assert_eq!(
        secmimo(&["optimize-phi"], &undefined, &out).status.code(),
        Some(2)
    );
    assert_eq!(
        fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .path()
                    .extension()
                    .is_some_and(|x| x == "csv" || x == "partial")
            })
            .count(),
        0
    );
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");

    let ok = write_conf(dir.path(), "ok.conf", "# defaults\n");
    let o = secmimo(&["validate", "--trials", "1000"], &ok, &out);
    let report = fs::read_to_string(&out).unwrap();
    assert_eq!(o.status.code(), Some(0), "{report}");
    assert!(report.contains("PASS determinism"));

    let domain = write_conf(dir.path(), "d.conf", "L = 8\n");
    let o = secmimo(&["validate", "--trials", "50"], &domain, &out);
    assert_eq!(o.status.code(), Some(3));
    let report = fs::read_to_string(&out).unwrap();
    assert!(report.contains("FAIL config") && report.contains("L−K>M"));

    let tampered = write_conf(dir.path(), "t.conf", "tol.hzf.gain = 0.001\n");
    let o = secmimo(&["validate", "--trials", "1000"], &tampered, &out);
    assert_eq!(o.status.code(), Some(3));
    assert!(fs::read_to_string(&out).unwrap().contains("FAIL hzf.gain"));
}
