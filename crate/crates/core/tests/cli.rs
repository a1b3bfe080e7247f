use std::process::Command;

use eigbound::cli::report::{format_sig, Rounding, CSV_HEADER};
use eigbound::cli::{compute, run_convergence, run_pipeline, RunConfig, RunFlags};
use eigbound::potential::PotentialSpec;

fn write_config(dir: &std::path::Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn pipeline_runs_exactly_two_solves_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(PotentialSpec::ring_v1(1.0), 4.0, 12, 3).unwrap();
    let flags = RunFlags { rigor: false, export_mesh: true, export_matrices: true };
    let report = run_pipeline(&cfg, flags, Some(dir.path())).unwrap();
    assert_eq!(report.eigensolves, 2);
    assert_eq!(report.exit_code(), 0);
    assert_eq!(report.rows.len(), 3);
    for f in ["bounds.csv", "bounds.json", "mesh.txt", "p1_dirichlet_A.mtx", "p1_dirichlet_B.mtx", "cecr_neumann_A.mtx", "cecr_neumann_B.mtx"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn csv_and_json_carry_the_same_values() {
    let cfg = RunConfig::new(PotentialSpec::harmonic(), 5.0, 10, 3).unwrap();
    let (report, _) = compute(&cfg, RunFlags::default());
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["schema_version"], 1);
    let csv = report.to_csv();
    for (line, row) in csv.lines().skip(1).zip(json["rows"].as_array().unwrap()) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], format_sig(row["lower"].as_f64().unwrap(), Rounding::Nearest));
        assert_eq!(cols[2], format_sig(row["nu"].as_f64().unwrap(), Rounding::Nearest));
        assert_eq!(cols[3], format_sig(row["upper"].as_f64().unwrap(), Rounding::Nearest));
        assert_eq!(cols[7], "true");
    }
    assert!(json["mesh"]["h_max"].as_f64().unwrap() > 0.0);
    assert_eq!(json["sigma_r"].as_f64().unwrap(), 25.0);
    assert!(json["config"]["potential"]["kind"] == "harmonic");
}

#[test]
fn reports_are_deterministic() {
    let cfg = RunConfig::new(PotentialSpec::double_well_v2(1.0), 3.0, 10, 3).unwrap();
    let a = compute(&cfg, RunFlags::default()).0;
    let b = compute(&cfg, RunFlags::default()).0;
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn rigor_rounds_outward() {
    let cfg = RunConfig::new(PotentialSpec::harmonic(), 5.0, 10, 2).unwrap();
    let (report, _) = compute(&cfg, RunFlags { rigor: true, ..Default::default() });
    let plain = compute(&cfg, RunFlags::default()).0;
    assert!(report.ch.unwrap() > plain.ch.unwrap());
    for (line, row) in report.to_csv().lines().skip(1).zip(&report.rows) {
        let cols: Vec<&str> = line.split(',').collect();
        assert!(cols[1].parse::<f64>().unwrap() <= row.lower.unwrap());
        assert!(cols[3].parse::<f64>().unwrap() >= row.upper);
    }
}

#[test]
fn small_radius_gives_partial_validity() {
    let cfg = RunConfig::new(PotentialSpec::double_well_v2(1.0), 2.0, 12, 5).unwrap();
    let (report, _) = compute(&cfg, RunFlags::default());
    assert_eq!(report.sigma_r, Some(2.75));
    assert_eq!(report.exit_code(), 2);
    for r in &report.rows {
        assert_eq!(r.valid, r.upper < 2.75);
        assert!(r.upper.is_finite());
    }
    assert!(report.notes.iter().any(|n| n.contains("increase R")));
    assert!(report.to_csv().lines().nth(2).unwrap().starts_with("2,,"));
}

#[test]
fn custom_without_sigma_keeps_upper_bounds() {
    let spec = PotentialSpec::custom([((2, 0), 1.0), ((0, 2), 1.0)], None).unwrap();
    let cfg = RunConfig::new(spec, 4.0, 8, 2).unwrap();
    let (report, _) = compute(&cfg, RunFlags::default());
    assert_eq!(report.exit_code(), 2);
    assert!(report.rows.iter().all(|r| !r.valid && r.upper > 0.0));
}

#[test]
fn convergence_orders_by_mesh_size() {
    let cfg = RunConfig::new(PotentialSpec::harmonic(), 5.0, 8, 2).unwrap();
    let report = run_convergence(&cfg, &[16, 8, 12], RunFlags::default()).unwrap();
    let h: Vec<f64> = report.runs.iter().map(|r| r.h_max.unwrap()).collect();
    assert!(h.windows(2).all(|w| w[0] > w[1]), "{h:?}");
    let ratios: Vec<f64> = report.summary.iter().filter(|r| r.k == 1).filter_map(|r| r.width_ratio).collect();
    assert_eq!(ratios.len(), 2);
    assert!(ratios.iter().all(|&r| r < 1.0), "{ratios:?}");
    assert_eq!(report.exit_code(), 0);
    assert!(run_convergence(&cfg, &[8], RunFlags::default()).is_err());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bin = env!("CARGO_BIN_EXE_bound");
    let ok = write_config(
        dir.path(),
        "[potential]\nkind = \"harmonic\"\n[domain]\nradius = 5.0\nn_rings = 8\n[solver]\nk = 2\n",
    );
    let run = Command::new(bin).args(["run", "--config"]).arg(&ok).arg("--out-dir").arg(&out).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("liu x") && stdout.contains("exterior x"));
    assert!(out.join("bounds.json").exists());

    let partial = write_config(
        dir.path(),
        "[potential]\nkind = \"double_well_v2\"\na = 1.0\n[domain]\nradius = 2.0\nn_rings = 8\n",
    );
    let run = Command::new(bin).args(["run", "--config"]).arg(&partial).arg("--out-dir").arg(&out).output().unwrap();
    assert_eq!(run.status.code(), Some(2));

    let bad = write_config(
        dir.path(),
        "[potential]\nkind = \"double_well_v2\"\na = 1.0\n[domain]\nradius = 1.0\nn_rings = 8\n",
    );
    let run = Command::new(bin).args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("validity domain"));

    let conv = write_config(
        dir.path(),
        "[potential]\nkind = \"harmonic\"\n[domain]\nradius = 5.0\nn_rings = 8\n[discretization]\nconvergence_rings = [6, 12]\n[solver]\nk = 1\n",
    );
    let run = Command::new(bin).args(["converge", "--config"]).arg(&conv).arg("--out-dir").arg(&out).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("convergence.csv").exists());
}

#[test]
fn shipped_configs_load() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        count += 1;
    }
    assert!(count >= 5);
}
