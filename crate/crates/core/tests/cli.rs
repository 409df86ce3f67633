use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn covertower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covertower")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn gtilde_writes_table_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "bundle.N = 4\n");
    let out = d.path().join("out");
    let o = covertower(&["gtilde", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(out.join("gtilde.csv")).unwrap().lines().count(), 1002);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("gtilde_manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["bundle"]["N"], 4);
    assert_eq!(m["config"]["sampling"]["master_seed"], 5);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn usage_errors_exit_four() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    assert_eq!(code(&covertower(&["stability", "--out", out, "--depth", "1"])), 4);
    assert_eq!(code(&covertower(&["stability", "--out", out, "--N", "3"])), 4);
    assert_eq!(code(&covertower(&["teleport", "--out", out])), 4);
    let cfg = write_config(d.path(), "lattice.colour = 3\n");
    assert_eq!(code(&covertower(&["gtilde", "--config", &cfg, "--out", out])), 4);
    assert_eq!(code(&covertower(&["equidist", "--out", out, "--samples", "10"])), 4);
}

#[test]
fn stability_and_kernel_table_pass() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "tower.depth = 3\nstability.sweep = [2, 4]\n");
    let out = d.path().join("out");
    let o = covertower(&["stability", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(out.join("stability.csv")).unwrap();
    assert!(csv.starts_with("j,tau_j,I_j,N,gap,fitted_sigma,trunc_rtol\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    let o = covertower(&["kernel-table", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(out.join("density.csv").exists());
}

#[test]
fn equidist_output_is_bitwise_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "sampling.levels = [0]\nsampling.n_samples = 100\noutput.dump_zeros = true\n");
    let runs: Vec<(String, String)> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = d.path().join(name);
            let o = covertower(&["equidist", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "99"]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
            (
                fs::read_to_string(out.join("equidist.csv")).unwrap(),
                fs::read_to_string(out.join("zeros.csv")).unwrap(),
            )
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert!(runs[0].0.starts_with("j,psi_id,theory_mean,emp_mean,emp_stderr,samples,seed\n"));
    assert_eq!(runs[0].1.lines().count(), 1 + 2 * 100);
}

#[test]
fn constant_form_variance_rows_vanish() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        "tower.depth = 3\nforms.presets = [\"one\"]\nsampling.n_samples = 50\nvariance.empirical_levels = [0]\n",
    );
    let out = d.path().join("out");
    let o = covertower(&["variance", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(out.join("variance.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "j,tau_j,N,psi_id,theory_var,emp_var,emp_stderr,paper_bound,samples,seed");
    for row in lines {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[3], "one");
        assert_eq!(cells[4].parse::<f64>().unwrap(), 0.0);
        assert_eq!(cells[7].parse::<f64>().unwrap(), 0.0);
        if !cells[5].is_empty() {
            assert_eq!(cells[5].parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn single_level_asconv_prints_gate_only() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("out");
    let o = covertower(&["asconv", "--out", out.to_str().unwrap(), "--depth", "1"]);
    assert_eq!(code(&o), 0);
    assert!(out.join("asconv_gate.csv").exists());
    assert!(!out.join("asconv.csv").exists());
}
