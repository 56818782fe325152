use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{BaseKind, ExperimentConfig};
use super::plotdata::emit_plot_data;
use crate::damage::{component_intensities, generate_scenario, DamageScenario, FragilitySet, RestorationTable};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::hazard::{nearest_site, FieldSampler, Site};
use crate::io;
use crate::network::{ComponentClass, DemandModel, EpnTree, Network};
use crate::par::{self, Execution};
use crate::planner::{base_plan, importance_order, random_order, rollout_plan, PlanResult, PlannerConfig, PriorityOrder};
use crate::sim::{evaluate_f1, evaluate_f2, F2Normalization, Objective, RecoveryModel};

/// Loaded, validated inputs shared by every scenario.
pub struct Inputs {
    pub network: Network,
    pub fragilities: FragilitySet,
    pub restoration: RestorationTable,
    pub sites: Vec<Site>,
    /// Hazard site index per component.
    pub nearest: Vec<usize>,
    pub sampler: FieldSampler,
}

/// Hazard sites on a square grid covering the network, or one per
/// component when `spacing` is zero.
pub fn hazard_sites(tree: &EpnTree, spacing: f64, vs30: f64) -> Vec<Site> {
    let points: Vec<Point> = tree.components().iter().map(|c| c.location).collect();
    if spacing <= 0.0 {
        return points.into_iter().map(|location| Site { location, vs30 }).collect();
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &points {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let nx = ((x1 - x0) / spacing).ceil() as usize + 1;
    let ny = ((y1 - y0) / spacing).ceil() as usize + 1;
    let mut sites = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            sites.push(Site {
                location: Point::new(x0 + i as f64 * spacing, y0 + j as f64 * spacing),
                vs30,
            });
        }
    }
    sites
}

impl Inputs {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let d = &cfg.data;
        let tree = EpnTree::build(io::load_components(&d.components)?)?;
        let cells = io::load_cells(&d.cells)?;
        let retailers = io::load_retailers(&d.retailers)?;
        let minutes = io::load_travel_times(&d.travel_times, &cells, &retailers)?;
        let demand = DemandModel::build(&cells, &retailers, cfg.demand.decay, &minutes)?;
        let network = Network::new(tree, cells, retailers, demand)?;
        let fragilities = io::load_fragilities(&d.fragility)?;
        let restoration = io::load_restoration(&d.restoration)?;
        Self::new(cfg, network, fragilities, restoration)
    }

    pub fn new(
        cfg: &ExperimentConfig,
        network: Network,
        fragilities: FragilitySet,
        restoration: RestorationTable,
    ) -> Result<Self> {
        cfg.validate()?;
        let tree = &network.tree;
        let mut classes: Vec<ComponentClass> = tree.components().iter().map(|c| c.class).collect();
        classes.sort_unstable();
        classes.dedup();
        for class in classes {
            fragilities.get(class)?;
            restoration.restoration_time(class, crate::damage::DamageState::Undamaged)?;
        }
        let sites = hazard_sites(tree, cfg.hazard.site_spacing_km, cfg.hazard.vs30);
        let nearest = tree
            .components()
            .iter()
            .map(|c| nearest_site(&sites, &c.location).expect("at least one site"))
            .collect();
        let sampler = FieldSampler::new(&cfg.event, &sites, &cfg.attenuation)?;
        Ok(Self {
            network,
            fragilities,
            restoration,
            sites,
            nearest,
            sampler,
        })
    }

    /// Damage for one scenario seed.
    pub fn scenario(&self, seed: u64) -> Result<DamageScenario> {
        let field = self.sampler.sample(seed);
        let tree = &self.network.tree;
        let classes: Vec<ComponentClass> = tree.components().iter().map(|c| c.class).collect();
        let ids: Vec<u32> = tree.components().iter().map(|c| c.id).collect();
        generate_scenario(
            &component_intensities(&field, &self.nearest),
            &classes,
            &ids,
            &self.fragilities,
            &self.restoration,
            seed,
        )
    }
}

/// Base and rollout results for one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    /// 1-based.
    pub index: usize,
    pub seed: u64,
    pub damaged: usize,
    pub base: PlanResult,
    pub rollout: PlanResult,
}

/// Per-scenario summary row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scenario: usize,
    pub seed: u64,
    pub damaged: usize,
    pub base_value: f64,
    pub rollout_value: f64,
    /// Positive when rollout is better.
    pub improvement: f64,
    pub base_days_to_gamma: f64,
    pub rollout_days_to_gamma: f64,
    pub base_f2: f64,
    pub rollout_f2: f64,
    pub base_total_days: f64,
    pub rollout_total_days: f64,
    pub rollout_epochs: usize,
    pub candidates_scored: usize,
    pub log10_table_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

impl Aggregate {
    /// Population mean and standard deviation.
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        if xs.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub objective: Objective,
    pub rows: Vec<SummaryRow>,
    pub base_value: Aggregate,
    pub rollout_value: Aggregate,
    pub base_days_to_gamma: Aggregate,
    pub rollout_days_to_gamma: Aggregate,
}

fn value_or_full(p: &PlanResult, f: impl Fn(&PlanResult) -> Result<f64>, full: f64) -> Result<f64> {
    if p.trajectory.epochs.is_empty() {
        Ok(full)
    } else {
        f(p)
    }
}

impl RunSummary {
    pub fn new(
        objective: Objective,
        gamma: f64,
        normalization: F2Normalization,
        outcomes: &[ScenarioOutcome],
    ) -> Result<Self> {
        let mut rows = Vec::with_capacity(outcomes.len());
        for o in outcomes {
            let p = o.base.trajectory.total_population;
            let days = |r: &PlanResult| value_or_full(r, |r| evaluate_f1(&r.trajectory, gamma), 0.0);
            let f2 = |r: &PlanResult| {
                value_or_full(r, |r| evaluate_f2(&r.trajectory, normalization), p)
            };
            let improvement = if objective.is_maximized() {
                o.rollout.value - o.base.value
            } else {
                o.base.value - o.rollout.value
            };
            rows.push(SummaryRow {
                scenario: o.index,
                seed: o.seed,
                damaged: o.damaged,
                base_value: o.base.value,
                rollout_value: o.rollout.value,
                improvement,
                base_days_to_gamma: days(&o.base)?,
                rollout_days_to_gamma: days(&o.rollout)?,
                base_f2: f2(&o.base)?,
                rollout_f2: f2(&o.rollout)?,
                base_total_days: o.base.trajectory.final_clock(),
                rollout_total_days: o.rollout.trajectory.final_clock(),
                rollout_epochs: o.rollout.trajectory.epochs.len(),
                candidates_scored: o.rollout.candidate_counts.iter().sum(),
                log10_table_size: o.rollout.log10_table_size,
            });
        }
        Ok(Self {
            objective,
            base_value: Aggregate::of(rows.iter().map(|r| r.base_value)),
            rollout_value: Aggregate::of(rows.iter().map(|r| r.rollout_value)),
            base_days_to_gamma: Aggregate::of(rows.iter().map(|r| r.base_days_to_gamma)),
            rollout_days_to_gamma: Aggregate::of(rows.iter().map(|r| r.rollout_days_to_gamma)),
            rows,
        })
    }

    /// `summary.csv`: one row per scenario, then `mean` and `std` rows.
    /// Numbers use Rust's shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "scenario,seed,damaged,base_value,rollout_value,improvement,base_days_to_gamma,\
             rollout_days_to_gamma,base_f2,rollout_f2,base_total_days,rollout_total_days,\
             rollout_epochs,candidates_scored,log10_table_size\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.scenario,
                r.seed,
                r.damaged,
                r.base_value,
                r.rollout_value,
                r.improvement,
                r.base_days_to_gamma,
                r.rollout_days_to_gamma,
                r.base_f2,
                r.rollout_f2,
                r.base_total_days,
                r.rollout_total_days,
                r.rollout_epochs,
                r.candidates_scored,
                r.log10_table_size
            );
        }
        let agg = |name: &str, pick: fn(&Aggregate) -> f64| {
            format!(
                "{name},,,{},{},,{},{},,,,,,,\n",
                pick(&self.base_value),
                pick(&self.rollout_value),
                pick(&self.base_days_to_gamma),
                pick(&self.rollout_days_to_gamma)
            )
        };
        s.push_str(&agg("mean", |a| a.mean));
        s.push_str(&agg("std", |a| a.std));
        s
    }
}

/// The priority order behind the base heuristic of one scenario.
pub fn base_order(cfg: &ExperimentConfig, network: &Network, seed: u64) -> PriorityOrder {
    match cfg.plan.base {
        BaseKind::Random => random_order(network.tree.len(), seed),
        BaseKind::Smart => importance_order(network, cfg.plan.mode),
    }
}

/// Seed of scenario `index` (1-based).
pub fn scenario_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add(index as u64)
}

/// Plans one scenario with the base heuristic and with rollout over it.
pub fn run_scenario(cfg: &ExperimentConfig, inputs: &Inputs, index: usize, exec: Execution) -> Result<ScenarioOutcome> {
    let seed = scenario_seed(cfg.run.seed, index);
    let scenario = inputs.scenario(seed)?;
    let model = RecoveryModel::new(&inputs.network, cfg.plan.mode, cfg.plan.resources)?;
    let objective = cfg.plan.objective();
    let order = base_order(cfg, &inputs.network, seed);
    let base = base_plan(&model, &scenario, &order, objective)?;
    let planner = PlannerConfig {
        objective,
        pooling: cfg.plan.pooling,
        cap: cfg.plan.cap,
        lookahead: cfg.plan.lookahead,
        seed,
        execution: exec,
    };
    let rollout = rollout_plan(&model, &scenario, &order, &planner)?;
    if objective.loss(rollout.value) > objective.loss(base.value) {
        return Err(Error::ImprovementViolated {
            scenario: index,
            base: base.value,
            rollout: rollout.value,
        });
    }
    Ok(ScenarioOutcome {
        index,
        seed,
        damaged: scenario.damaged_count(),
        base,
        rollout,
    })
}

/// Runs every scenario, on the rayon pool when parallel.
pub fn run_scenarios(cfg: &ExperimentConfig, inputs: &Inputs, exec: Execution) -> Result<Vec<ScenarioOutcome>> {
    let indices: Vec<usize> = (1..=cfg.run.scenarios).collect();
    par::map(&indices, exec, |&i| run_scenario(cfg, inputs, i, exec))
        .into_iter()
        .collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    crate_version: &'a str,
    config: &'a ExperimentConfig,
    scenario_seeds: Vec<u64>,
    parallel: bool,
    threads: usize,
    hazard_sites: usize,
    components: usize,
    total_population: f64,
    outputs: Vec<String>,
}

/// Loads inputs, runs the experiment and writes every output file into
/// `cfg.run.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let inputs = Inputs::load(cfg)?;
    let exec = Execution::Parallel;
    let outcomes = with_threads(cfg.run.threads, || run_scenarios(cfg, &inputs, exec))?;
    let summary = RunSummary::new(
        cfg.plan.objective(),
        cfg.plan.gamma,
        cfg.plan.f2_normalization,
        &outcomes,
    )?;
    write_outputs(cfg, &inputs, &outcomes, &summary)?;
    Ok(summary)
}

pub fn write_outputs(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    outcomes: &[ScenarioOutcome],
    summary: &RunSummary,
) -> Result<()> {
    let out = &cfg.run.out;
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    let mut outputs = Vec::new();
    if cfg.run.trajectories {
        for o in outcomes {
            for (policy, plan) in [("base", &o.base), ("rollout", &o.rollout)] {
                let name = format!("trajectory_{}_{policy}.csv", o.index);
                io::write_trajectory(&out.join(&name), &plan.trajectory)?;
                outputs.push(name);
            }
        }
    }
    io::write_text(&out.join("summary.csv"), &summary.to_csv())?;
    outputs.push("summary.csv".into());
    outputs.extend(emit_plot_data(outcomes, summary, out)?);
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        scenario_seeds: outcomes.iter().map(|o| o.seed).collect(),
        parallel: cfg!(feature = "parallel"),
        threads: cfg.run.threads,
        hazard_sites: inputs.sites.len(),
        components: inputs.network.tree.len(),
        total_population: inputs.network.total_population(),
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    io::write_text(&out.join("manifest.json"), &(json + "\n"))
}

/// Runs `f` on a dedicated pool of `threads` workers (0: rayon's default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

/// Writes the bundled testbed and a matching config into `dir`.
pub fn write_testbed(dir: &Path, seed: u64) -> Result<()> {
    crate::testbed::generate(seed).write(dir)?;
    let mut cfg = ExperimentConfig::default();
    cfg.run.out = "out".into();
    io::write_text(&dir.join("config.toml"), &cfg.to_toml())
}
