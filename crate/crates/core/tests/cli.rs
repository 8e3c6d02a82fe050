use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn xgrad(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xgrad"))
        .args(args)
        .env("XGRAD_OUTPUT_DIR", out_dir)
        .output()
        .unwrap()
}

#[test]
fn run_honors_the_output_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("q.cfg");
    fs::write(&cfg, "problem=quadratic\noptimizer=adam\nepochs=2\niters_per_epoch=5\noutput=nested/q.csv\n").unwrap();
    let out = dir.path().join("out");
    let res = xgrad(&["run", cfg.to_str().unwrap()], &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(out.join("q.csv")).unwrap();
    assert!(text.starts_with("epoch,iteration,lr,train_loss,eval_loss,grad_norm,pred_gap,wall_ms\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 11);
}

#[test]
fn sweep_writes_members_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("l.json");
    fs::write(&cfg, r#"{"problem": "linreg", "optimizer": "adam", "epochs": 3, "batch": 50, "output": "lin.csv"}"#).unwrap();
    let res = xgrad(&["sweep", cfg.to_str().unwrap(), "--s", "0,2"], dir.path());
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["lin_s0.csv", "lin_s2.csv", "lin_sweep.csv", "lin_sweep.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn gradcheck_reports_and_rejects_unknown_problems() {
    let dir = tempfile::tempdir().unwrap();
    let res = xgrad(&["gradcheck", "rosenbrock", "--seed", "3"], dir.path());
    assert!(res.status.success());
    let report = fs::read_to_string(dir.path().join("gradcheck_rosenbrock_seed3.txt")).unwrap();
    assert!(report.contains("stationary point") && report.ends_with("result: PASS\n"));

    let res = xgrad(&["gradcheck", "resnet50"], dir.path());
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("problem"));
}

#[test]
fn bad_configs_and_aborts_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "problem=quadratic\noptimizer=adam\ns=-1\nepochs=10\n").unwrap();
    let res = xgrad(&["run", bad.to_str().unwrap()], dir.path());
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("prediction_steps"));

    let blowup = dir.path().join("blowup.cfg");
    fs::write(&blowup, "problem=rosenbrock\noptimizer=sgd\nlr=1\nepochs=1\niters_per_epoch=100\n").unwrap();
    let res = xgrad(&["run", blowup.to_str().unwrap()], dir.path());
    assert_eq!(res.status.code(), Some(1));
}
