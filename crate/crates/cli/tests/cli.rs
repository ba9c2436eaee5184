use std::path::Path;
use std::process::{Command, Output};

use mwsrpdt_core::instances::write_instance;
use mwsrpdt_core::{Instance, InstanceParts, InstanceType, Service, TaskTime};

fn mwsrpdt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwsrpdt")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn one_task(hours: f64) -> Instance {
    Instance::new(InstanceParts {
        teams: 1,
        day_length: 8.0,
        coords: vec![(0, 0), (10, 10)],
        services: vec![Service::new(0, 1, vec![])],
        requested: vec![0],
        times: vec![vec![vec![TaskTime::Finite(hours)]]],
        instance_type: InstanceType::A,
        seed: 0,
    })
    .unwrap()
}

#[test]
fn generate_names_files_by_type_size_and_id() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        mwsrpdt(dir.path(), &["generate", "--n", "5", "--type", "C", "--seed", "9", "--count", "2", "--out-dir", "x"]);
    assert!(o.status.success());
    assert!(dir.path().join("x/C_5_0.mwsrpdt").exists());
    assert!(dir.path().join("x/C_5_1.mwsrpdt").exists());
    let second = std::fs::read_to_string(dir.path().join("x/C_5_1.mwsrpdt")).unwrap();
    let direct =
        mwsrpdt_core::instances::generate(&mwsrpdt_core::GeneratorConfig::new(5, InstanceType::C, 10)).unwrap();
    assert_eq!(second, write_instance(&direct));
}

#[test]
fn solve_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("one.mwsrpdt"), write_instance(&one_task(1.0))).unwrap();
    let o = mwsrpdt(dir.path(), &["solve", "--instance", "one.mwsrpdt", "--algo", "constructive", "--out", "s.sol"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "type,n,id,tasks,algo,ants,iters,seed,ub,fprime,seconds");
    assert!(lines.next().unwrap().starts_with("A,2,0,1,constructive,0,0,0,1,0.13"));
    let v = mwsrpdt(dir.path(), &["validate", "--instance", "one.mwsrpdt", "--solution", "s.sol"]);
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("one.mwsrpdt"), write_instance(&one_task(1.0))).unwrap();
    std::fs::write(d.join("long.mwsrpdt"), write_instance(&one_task(9.0))).unwrap();
    std::fs::write(d.join("bad.sol"), "SOLUTION 1 0.5\n1 1 2 0 0 0.5\nEND\n").unwrap();

    assert_eq!(mwsrpdt(d, &["solve", "--instance", "one.mwsrpdt", "--algo", "zz"]).status.code(), Some(2));
    assert_eq!(mwsrpdt(d, &["solve", "--instance", "one.mwsrpdt", "--param", "rho=3"]).status.code(), Some(2));
    assert_eq!(mwsrpdt(d, &["solve", "--instance", "missing.mwsrpdt"]).status.code(), Some(3));
    assert_eq!(mwsrpdt(d, &["solve", "--instance", "long.mwsrpdt", "--algo", "constructive"]).status.code(), Some(4));
    assert_eq!(mwsrpdt(d, &["solve", "--instance", "long.mwsrpdt", "--algo", "acs"]).status.code(), Some(4));
    assert_eq!(mwsrpdt(d, &["validate", "--instance", "one.mwsrpdt", "--solution", "bad.sol"]).status.code(), Some(1));
    assert_eq!(mwsrpdt(d, &["oracle", "--instance", "one.mwsrpdt", "--max-tasks", "0"]).status.code(), Some(1));
    assert_eq!(
        mwsrpdt(d, &["export-mip", "--instance", "one.mwsrpdt", "--horizon", "0", "--out", "m.lp"]).status.code(),
        Some(2)
    );
}

#[test]
fn params_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("one.mwsrpdt"), write_instance(&one_task(1.0))).unwrap();
    std::fs::write(d.join("c.toml"), "num_ants = 3\n[mmas]\nmax_iter = 4\nseed = 11\n").unwrap();
    let row = |args: &[&str]| {
        let mut all = vec!["solve", "--instance", "one.mwsrpdt", "--algo", "mmas"];
        all.extend_from_slice(args);
        let o = mwsrpdt(d, &all);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let line = stdout(&o).lines().nth(1).unwrap().to_string();
        let f: Vec<String> = line.split(',').map(str::to_string).collect();
        (f[5].clone(), f[6].clone(), f[7].clone())
    };
    assert_eq!(row(&[]), ("100".into(), "100".into(), "0".into()));
    assert_eq!(row(&["--config", "c.toml"]), ("3".into(), "4".into(), "11".into()));
    assert_eq!(row(&["--config", "c.toml", "--iters", "2"]), ("3".into(), "2".into(), "11".into()));
    assert_eq!(
        row(&["--config", "c.toml", "--iters", "2", "--param", "max_iter=5"]),
        ("3".into(), "5".into(), "11".into())
    );
}

#[test]
fn bench_respects_thread_cap_and_orders_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(mwsrpdt(d, &["generate", "--n", "6", "--type", "A", "--count", "4", "--out-dir", "i"]).status.success());
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_mwsrpdt"))
            .args(["bench", "--dir", "i", "--algos", "constructive,acs", "--ants", "3", "--iters", "3"])
            .env("MWSRPDT_THREADS", threads)
            .current_dir(d)
            .output()
            .unwrap();
        assert!(o.status.success());
        stdout(&o).lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>()
    };
    let one = run("1");
    assert_eq!(one.len(), 1 + 4 * 2);
    let ids: Vec<&str> = one[1..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(ids, ["0", "0", "1", "1", "2", "2", "3", "3"]);
    assert_eq!(one, run("3"));
    let bad = Command::new(env!("CARGO_BIN_EXE_mwsrpdt"))
        .args(["bench", "--dir", "i"])
        .env("MWSRPDT_THREADS", "0")
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
