use std::fs;
use std::path::Path;

use xgrad::harness::{self, read_metrics, ExperimentConfig, Schedule};

fn config(dir: &Path, text: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::parse(text).unwrap();
    c.output = dir.join(c.output.file_name().unwrap());
    c
}

#[test]
fn adam_solves_the_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "problem=quadratic\noptimizer=adam\nlr=1e-2\nepochs=1\niters_per_epoch=500\n");
    let report = harness::run_to(&c, &c.output).unwrap();
    let last = report.records.last().unwrap();
    assert_eq!(last.iteration, 500);
    assert!(last.train_loss - report.optimum.unwrap() <= 1e-10);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "problem=mlp\noptimizer=adamw\ns=3\nepochs=4\nbatch=16\nseed=5\n");
    harness::run_to(&c, &dir.path().join("a.csv")).unwrap();
    harness::run_to(&c, &dir.path().join("b.csv")).unwrap();
    assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn bilinear_sgd_diverges_and_prediction_contracts() {
    let dir = tempfile::tempdir().unwrap();
    let base = "problem=bilinear\noptimizer=sgd\nlr=0.1\nepochs=1\niters_per_epoch=200\n";
    let plain = harness::run_to(&config(dir.path(), base), &dir.path().join("s0.csv")).unwrap();
    assert!(plain.records.windows(2).all(|w| w[1].grad_norm > w[0].grad_norm));
    let c = config(dir.path(), &format!("{base}s=1\n"));
    let predicted = harness::run_to(&c, &dir.path().join("s1.csv")).unwrap();
    let after = &predicted.records[1..];
    assert!(after.windows(2).all(|w| w[1].grad_norm < w[0].grad_norm));
}

#[test]
fn lr_column_follows_the_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        dir.path(),
        "problem=linreg\noptimizer=sgdm\nlr=0.05\nepochs=12\nbatch=64\nmilestones=4,9\nfactor=0.5\nlog_every=3\n",
    );
    let report = harness::run_to(&c, &c.output).unwrap();
    let (records, _) = read_metrics(fs::File::open(&c.output).unwrap()).unwrap();
    assert_eq!(records, report.records);
    assert!(records.windows(2).all(|w| w[0].iteration < w[1].iteration));
    for r in &records {
        let passed = [4, 9].iter().filter(|&&m| m < r.epoch).count() as i32;
        assert_eq!(r.lr, 0.05 * 0.5f64.powi(passed), "epoch {}", r.epoch);
    }
    assert_eq!(records.last().unwrap().epoch, 12);
    assert!(matches!(c.schedule, Schedule::StepDecay { .. }));
}

#[test]
fn numeric_abort_goes_to_the_trailer() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "problem=rosenbrock\noptimizer=sgd\nlr=1\nepochs=1\niters_per_epoch=100\n");
    let report = harness::run_to(&c, &c.output).unwrap();
    let (it, _) = report.abort.clone().expect("plain SGD at lr=1 blows up");
    let (records, trailer) = read_metrics(fs::File::open(&c.output).unwrap()).unwrap();
    assert_eq!(records.len() as u64, it - 1);
    assert!(trailer.iter().any(|l| l.starts_with(&format!("status=aborted iteration={it} "))), "{trailer:?}");
}

#[test]
fn sweep_members_match_direct_runs() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "problem=logistic\noptimizer=adam\nepochs=40\nbatch=50\noutput=lg.csv\n");
    let sweep = harness::sweep(&c, &[0, 2]).unwrap();
    assert_eq!(sweep.rows.len(), 2);
    assert!(sweep.all_succeeded());
    assert!(sweep.rows[0].mean_pred_gap.is_none() && sweep.rows[1].mean_pred_gap.is_some());

    let direct = harness::run_to(&c, &dir.path().join("direct.csv")).unwrap();
    assert_eq!(fs::read(dir.path().join("lg_s0.csv")).unwrap(), fs::read(&direct.output).unwrap());

    let table = fs::read_to_string(&sweep.table_csv).unwrap();
    assert!(table.starts_with("s,status,final_eval_loss,best_eval_loss,final_train_loss,iters_to_tol,mean_pred_gap\n"));
    assert_eq!(table.lines().count(), 3);
    assert!(fs::read_to_string(&sweep.table_txt).unwrap().contains("mean_pred_gap"));
}

#[test]
fn singleton_sweep_is_the_run_summary() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "problem=quadratic\noptimizer=rmsprop\nepochs=2\niters_per_epoch=50\noutput=q.csv\n");
    let sweep = harness::sweep(&c, &[0]).unwrap();
    let direct = harness::run_to(&c, &dir.path().join("direct.csv")).unwrap();
    let row = &sweep.rows[0];
    assert_eq!(row.final_eval_loss, direct.final_eval_loss());
    assert_eq!(row.best_eval_loss, direct.best_eval_loss());
    assert_eq!(row.final_train_loss, direct.final_train_loss());
    assert_eq!(row.iters_to_tol, direct.iters_to_tolerance(c.tolerance));
    assert!(harness::sweep(&c, &[]).is_err());
}

#[test]
fn aborted_members_do_not_stop_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "problem=rosenbrock\noptimizer=sgd\nlr=0.5\nepochs=1\niters_per_epoch=50\noutput=r.csv\n");
    let sweep = harness::sweep(&c, &[0, 1]).unwrap();
    assert_eq!(sweep.rows.len(), 2);
    assert!(sweep.rows.iter().all(|r| r.status == "aborted"));
    assert!(!sweep.all_succeeded());
}
