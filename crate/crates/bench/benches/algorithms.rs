use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use combandit_core::constrained_elim::{kappa_exact, ConstrainedElimination, DecisionSet};
use combandit_core::environments::{random_unit_vector, ContextSource, NoiseKind};
use combandit_core::graph_elimination::log_width_param;
use combandit_core::harness::{run_graph_policy, run_linear_policy};
use combandit_core::linear_hier_elim::RidgeState;
use combandit_core::rng::{stream, StreamPurpose};
use combandit_core::{
    CombArmElimination, CombUcb, FeedbackGraph, GraphBanditInstance, HierarchicalElimination, LinearBanditInstance,
    RewardKind,
};

const HORIZON: usize = 2000;
const DELTA: f64 = 0.05;

fn graph_instance(k: usize, clique: usize, budget: usize) -> GraphBanditInstance {
    let means = (0..k).map(|i| 0.2 + 0.6 * ((i * 7) % k) as f64 / k as f64).collect();
    let graph = FeedbackGraph::consecutive_cliques(&vec![clique; k / clique]).unwrap();
    GraphBanditInstance::new(means, graph, budget, RewardKind::Bernoulli).unwrap()
}

fn graph_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("graph_run");
    group.sample_size(20);
    for &k in &[20usize, 80] {
        let inst = graph_instance(k, 4, 3);
        let best = inst.optimal_value();
        group.bench_with_input(BenchmarkId::new("comb-elim", k), &inst, |b, inst| {
            b.iter(|| {
                let mut p = CombArmElimination::new(inst.graph().clone(), 3, HORIZON, DELTA).unwrap();
                black_box(run_graph_policy(&mut p, inst, HORIZON, 1, best, |_, _, _| Ok(())).unwrap())
            })
        });
        let l = log_width_param(k, HORIZON, DELTA).unwrap().sqrt();
        group.bench_with_input(BenchmarkId::new("comb-ucb", k), &inst, |b, inst| {
            b.iter(|| {
                let mut p = CombUcb::new(k, 3, l).unwrap();
                black_box(run_graph_policy(&mut p, inst, HORIZON, 1, best, |_, _, _| Ok(())).unwrap())
            })
        });
        let decisions = DecisionSet::partition(k, 4).unwrap();
        let inst4 = graph_instance(k, 4, 4);
        let best4 = inst4.optimal_value();
        group.bench_with_input(BenchmarkId::new("constrained-elim", k), &inst4, |b, inst| {
            b.iter(|| {
                let mut p =
                    ConstrainedElimination::new(decisions.clone(), inst.graph().clone(), HORIZON, DELTA).unwrap();
                black_box(run_graph_policy(&mut p, inst, HORIZON, 1, best4, |_, _, _| Ok(())).unwrap())
            })
        });
    }
    group.finish();
}

fn hier_elim_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("hier_elim_run");
    group.sample_size(10);
    for &d in &[5usize, 20] {
        let theta = random_unit_vector(d, &mut stream(3, StreamPurpose::Instance));
        let inst =
            LinearBanditInstance::new(theta, ContextSource::IidSphere { num_arms: 20 }, NoiseKind::BoundedUniform, 3)
                .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &inst, |b, inst| {
            b.iter(|| {
                let mut p = HierarchicalElimination::new(20, d, 3, HORIZON).unwrap();
                black_box(run_linear_policy(&mut p, inst, HORIZON, 1, |_, _, _, _| Ok(())).unwrap())
            })
        });
    }
    group.finish();
}

fn ridge(c: &mut Criterion) {
    let mut group = c.benchmark_group("ridge");
    for &d in &[5usize, 20, 50] {
        let mut rng = stream(5, StreamPurpose::Contexts);
        let xs: Vec<Vec<f64>> = (0..200).map(|_| random_unit_vector(d, &mut rng)).collect();
        let mut state = RidgeState::new(d, 1.0, 2.0).unwrap();
        for (i, x) in xs.iter().enumerate() {
            state.push(x, (i % 3) as f64 / 3.0);
        }
        state.refit().unwrap();
        group.bench_with_input(BenchmarkId::new("refit", d), &d, |b, _| {
            b.iter(|| {
                let mut s = state.clone();
                s.push(&xs[0], 0.5);
                s.refit().unwrap();
                black_box(s)
            })
        });
        group.bench_with_input(BenchmarkId::new("width", d), &d, |b, _| {
            b.iter(|| xs.iter().map(|x| state.width(black_box(x))).sum::<f64>())
        });
    }
    group.finish();
}

fn kappa(c: &mut Criterion) {
    let graph = FeedbackGraph::consecutive_cliques(&[3, 3, 3, 3]).unwrap();
    let raw: Vec<Vec<usize>> = (0..12).map(|i| vec![i, (i + 1) % 12, (i + 5) % 12]).collect();
    let decisions = DecisionSet::new(raw, 12).unwrap();
    c.bench_function("kappa_exact_12", |b| b.iter(|| black_box(kappa_exact(&decisions, &graph).unwrap())));
}

criterion_group!(benches, graph_runs, hier_elim_run, ridge, kappa);
criterion_main!(benches);
