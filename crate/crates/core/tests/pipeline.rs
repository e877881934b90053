use std::fs;

use combandit_core::environments::build_gap_instance;
use combandit_core::harness::{load_sidecars, run_experiment, summarize, write_trace, InstanceRef};
use combandit_core::{ExperimentConfig, Instance, PolicySpec, ScalingModel};

fn gap_config(policy: PolicySpec, horizons: Vec<usize>, seeds: Vec<u64>) -> ExperimentConfig {
    let inst = build_gap_instance(4, 2, 8, 0.2, 2).unwrap();
    ExperimentConfig::new(policy, InstanceRef::Inline(Instance::Graph(inst).to_file_spec()), horizons, seeds)
}

#[test]
fn traces_round_trip_through_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let config = gap_config(PolicySpec::CombElim, vec![200, 400, 800], (0..10).collect());
    let traces = run_experiment(config).unwrap();
    assert_eq!(traces.len(), 30);
    for trace in &traces {
        assert_eq!(trace.cumulative.len(), trace.meta.horizon);
        assert!(trace.cumulative.windows(2).all(|w| w[1] >= w[0]));
        write_trace(dir.path(), trace, false).unwrap();
    }
    let metas = load_sidecars(dir.path()).unwrap();
    assert_eq!(metas.len(), 30);
    let groups = summarize(&metas);
    assert_eq!(groups.len(), 1);
    assert_eq!(groups[0].runs, 30);
    let fit = groups[0].log_t.as_ref().unwrap();
    assert_eq!(fit.model, ScalingModel::LogT);
    assert!(fit.slope.is_finite());
}

#[test]
fn config_json_round_trip_runs_identically() {
    let config = gap_config(PolicySpec::CombUcb { width_l: Some(1.5) }, vec![300], vec![7]);
    let json = serde_json::to_string(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.json");
    fs::write(&path, json).unwrap();
    let reloaded = ExperimentConfig::load(&path).unwrap();
    let a = run_experiment(config).unwrap();
    let b = run_experiment(reloaded).unwrap();
    assert_eq!(a[0].cumulative, b[0].cumulative);
}

#[test]
fn oracle_has_no_regret_on_any_seed() {
    let traces = run_experiment(gap_config(PolicySpec::Oracle, vec![500], (0..5).collect())).unwrap();
    assert!(traces.iter().all(|t| t.final_regret() == 0.0));
}
