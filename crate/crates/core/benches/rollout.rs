use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use recovery_core::damage::{DamageScenario, DamageState};
use recovery_core::network::{DemandModel, EpnTree, Network, ServiceMode};
use recovery_core::par::Execution;
use recovery_core::planner::{random_order, rollout_plan, score_candidate, PlannerConfig, Pooling, Scratch};
use recovery_core::runner::{ExperimentConfig, Inputs};
use recovery_core::sim::{Objective, RecoveryModel, ScoreTracker, SimState};
use recovery_core::testbed;

fn testbed_inputs() -> Inputs {
    let cfg = ExperimentConfig::default();
    let bed = testbed::generate(0);
    let tree = EpnTree::build(bed.components.clone()).unwrap();
    let demand = DemandModel::build(&bed.cells, &bed.retailers, cfg.demand.decay, &bed.travel_minutes).unwrap();
    let net = Network::new(tree, bed.cells.clone(), bed.retailers.clone(), demand).unwrap();
    Inputs::new(&cfg, net, bed.fragilities, bed.restoration).unwrap()
}

fn playout(c: &mut Criterion) {
    let inputs = testbed_inputs();
    let net = &inputs.network;
    let days = net
        .tree
        .components()
        .iter()
        .map(|comp| inputs.restoration.restoration_time(comp.class, DamageState::Complete).unwrap())
        .collect();
    let scenario = DamageScenario::from_repair_days(days);
    let model = RecoveryModel::new(net, ServiceMode::HouseholdsAndRetailers, 10).unwrap();
    let state = SimState::new(&model, &scenario).unwrap();
    let ranked = random_order(model.component_count(), 0).sort_by_rank(state.damaged());
    let tracker = ScoreTracker::new(Objective::f2(), model.total_population(), state.level());
    let mut scratch = Scratch::new(&model);
    c.bench_function("playout_full_damage_f2", |b| {
        b.iter(|| score_candidate(&model, &state, tracker, &ranked, None, &mut scratch))
    });
}

/// Whole rollout plans with candidates scored in sequence and on the pool.
fn candidate_scoring(c: &mut Criterion) {
    let inputs = testbed_inputs();
    let model = RecoveryModel::new(&inputs.network, ServiceMode::HouseholdsAndRetailers, 10).unwrap();
    let scenario = inputs.scenario(1).unwrap();
    let order = random_order(model.component_count(), 1);
    let mut group = c.benchmark_group("rollout_plan");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let cfg = PlannerConfig {
            pooling: Pooling::RandomCap,
            cap: 200,
            seed: 1,
            execution: exec,
            ..PlannerConfig::new(Objective::f1(0.8))
        };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &cfg, |b, cfg| {
            b.iter(|| rollout_plan(&model, &scenario, &order, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, playout, candidate_scoring);
criterion_main!(benches);
