use qcbc_core::engine::ParamValue;
use qcbc_core::{run_plan, Error, Experiment, ExperimentPlan};

#[test]
fn plan_file_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.toml");
    std::fs::write(
        &path,
        r#"
experiment = "amp"
name = "gains"
seed = 42
trials = 20000
G = [2, 16]
kind = ["ql", "mp"]
"#,
    )
    .unwrap();
    let plan = ExperimentPlan::from_file(&path).unwrap();
    assert_eq!(plan.experiment, Experiment::Amp);
    assert_eq!(plan.grid.len(), 4);
    assert_eq!(plan.grid[1]["kind"], ParamValue::Text("mp".into()));

    let result = run_plan(&plan).unwrap();
    assert_eq!(result.points.len(), 4);
    assert_eq!(result.master_seed, 42);
    assert!(result.pass, "{result:#?}");
    let mp = &result.points[1];
    let summary = mp.stats.as_ref().unwrap();
    assert!((summary.var_x - 1.25).abs() < 5.0 * summary.se_var_x);
}

#[test]
fn result_round_trips_through_json() {
    let plan = ExperimentPlan::new(Experiment::Gamma, 1, 5000).with_point([("N", 10.0), ("phase_var", 0.01)]);
    let result = run_plan(&plan).unwrap();
    let text = serde_json::to_string(&result).unwrap();
    let back: qcbc_core::ExperimentResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back, result);
}

#[test]
fn bad_plans_are_rejected() {
    assert!(matches!(ExperimentPlan::parse("seed = 1\nN = 2"), Err(Error::Plan(_))));
    assert!(matches!(
        ExperimentPlan::parse("experiment = \"warp\"\nseed = 1\nN = 2"),
        Err(Error::UnknownExperiment(_))
    ));
    let missing = ExperimentPlan::parse("experiment = \"cbc\"\nseed = 1\nN = 2").unwrap();
    assert!(run_plan(&missing).is_err());
    let unphysical = ExperimentPlan::parse("experiment = \"cbc\"\nseed = 1\nN = 2\nn = 100\nxi = 0.5").unwrap();
    assert!(run_plan(&unphysical).is_err());
}
