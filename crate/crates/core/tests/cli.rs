use std::fs;
use std::process::{Command, Output};

fn heunwell(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heunwell"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("HEUNWELL_THREADS", t),
        None => cmd.env_remove("HEUNWELL_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_reports_three_levels() {
    let o = heunwell(&["solve", "--w1", "15", "--w2", "12", "--w3", "1"], None);
    assert!(o.status.success());
    let text = stdout(&o);
    let energies: Vec<f64> = text
        .lines()
        .map(|l| l.split('=').nth(1).unwrap().trim().parse().unwrap())
        .collect();
    assert_eq!(energies.len(), 3);
    for (e, printed) in energies.iter().zip([0.311, 2.434, 3.875]) {
        assert!((e - printed).abs() < 5e-3);
    }
}

#[test]
fn repulsive_well_has_no_states() {
    let o = heunwell(&["solve", "--w1", "0", "--w2", "5", "--w3", "0"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "no bound states");
}

#[test]
fn exit_codes() {
    assert_eq!(heunwell(&["solve", "--w1", "1"], None).status.code(), Some(1));
    assert_eq!(
        heunwell(
            &["solve", "--w1", "1", "--w2", "0", "--w3", "0", "--format", "xml"],
            None
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(heunwell(&["bogus"], None).status.code(), Some(1));
    assert_eq!(
        heunwell(&["solve", "--w1", "1", "--w2", "0", "--w3", "0"], Some("zero"))
            .status
            .code(),
        Some(1)
    );
    let o = heunwell(
        &[
            "solve",
            "--w1",
            "15",
            "--w2",
            "12",
            "--w3",
            "1",
            "--max-terms",
            "4",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str, extra: &[&str]| {
        let path = dir.path().join(name);
        let mut args = extra.to_vec();
        let p = path.to_str().unwrap().to_string();
        args.extend(["-o", &p]);
        assert!(heunwell(&args, Some(threads)).status.success());
        fs::read(&path).unwrap()
    };
    let sweep = [
        "wronskian-sweep",
        "--w1",
        "15",
        "--w2",
        "12",
        "--w3",
        "1",
        "--points",
        "200",
        "--format",
        "json",
    ];
    assert_eq!(run("a.json", "1", &sweep), run("b.json", "3", &sweep));
    let map = ["threshold", "--w1", "10", "--resolution", "12"];
    assert_eq!(run("a.csv", "1", &map), run("b.csv", "4", &map));
}

#[test]
fn csv_headers() {
    let dir = tempfile::tempdir().unwrap();
    let header = |args: &[&str]| {
        let o = heunwell(args, None);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o).lines().next().unwrap().to_string()
    };
    let well = ["--w1", "15", "--w2", "12", "--w3", "1"];
    let with = |cmd: &str, extra: &[&str]| {
        let mut v = vec![cmd];
        v.extend(well);
        v.extend(extra);
        v.into_iter().map(String::from).collect::<Vec<_>>()
    };
    assert_eq!(
        header(
            &with("wronskian-sweep", &["--points", "5"])
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()
        ),
        "E,W"
    );
    assert_eq!(
        header(
            &with("wavefunction", &["--level", "2"])
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()
        ),
        "n,E,z,psi"
    );
    assert_eq!(
        header(&["threshold", "--w1", "5", "--resolution", "3"]),
        "w1,w2,w3,count"
    );
    assert_eq!(
        header(&["qes", "--w1", "4", "--w3", "12"]),
        "order,s,w1,w2,w3,E,residual,E_solver"
    );

    let curves = dir.path().join("curves.csv");
    let o = heunwell(
        &[
            "threshold",
            "--w1",
            "5",
            "--resolution",
            "8",
            "--curves",
            curves.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success());
    let text = fs::read_to_string(curves).unwrap();
    assert!(text.starts_with("w1,curve,level,critical,w2,w3\n"));
}

#[test]
fn json_solve_carries_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solve.json");
    let o = heunwell(
        &[
            "solve",
            "--w1",
            "15",
            "--w2",
            "12",
            "--w3",
            "1",
            "--format",
            "json",
            "-o",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["energies"].as_array().unwrap().len(), 3);
    assert_eq!(v["wronskian_residuals"].as_array().unwrap().len(), 3);
    assert_eq!(v["brackets"].as_array().unwrap().len(), 3);
    assert!(v["diagnostics"]["max_terms_left"].as_u64().unwrap() > 0);
    assert_eq!(v["well"]["w1"], 15.0);
}

#[test]
fn config_file_and_dimensional_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "v1 = 3.75\nv2 = 3\nv3 = 0.25\nlength = 2\nformat = \"csv\"\n",
    )
    .unwrap();
    let from_file = heunwell(&["solve", "--config", cfg.to_str().unwrap()], None);
    let direct = heunwell(&["solve", "--w1", "15", "--w2", "12", "--w3", "1"], None);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file), stdout(&direct));
}

#[test]
fn oracle_prints_both_spectra() {
    let o = heunwell(
        &["oracle", "--w1", "0", "--w2", "-12", "--w3", "0", "-k", "3"],
        None,
    );
    assert!(o.status.success());
    let rows: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for (row, exact) in rows.iter().zip([1.0, 4.0, 9.0]) {
        assert!((row[0] - exact).abs() < 1e-6 && (row[1] - exact).abs() < 1e-4);
    }
}
