//! Random instances, episode execution, and batch experiments.
//!
//! An instance is drawn by rejection sampling: cylinders fall uniformly into
//! the workspace until they fit without overlap, the deepest one becomes the
//! target, and the whole draw is repeated until the scene satisfies the
//! case's visibility demands and is solvable at all (the ground-truth
//! traversability graph connects the robot to the target). Everything is
//! driven by one seeded generator, so a seed pins the instance bit for bit.
//!
//! Episodes wrap the planners with a wall-clock budget and collect the
//! metrics that the experiment tables report; batches run a seed range and
//! aggregate, keeping every episode's event log so the aggregation can be
//! audited later.

use crate::baselines::{distance_planner, vfh_local_planner, DistanceConfig, VfhConfig};
use crate::corridor::DEFAULT_GRID_RESOLUTION;
use crate::eventlog::{EventLog, RunStatus};
use crate::geometry::{
    disc_overlaps, Disc, GeometryError, ObjectId, ObjectSpec, Point, Workspace,
};
use crate::motion::{MotionOracle, OracleKind};
use crate::occlusion::{detected_objects, CameraModel, OcclusionError};
use crate::planner::{reloc_planner, PlanCtx, PlannerConfig, PlannerError};
use crate::scenario::{Scenario, ScenarioError};
use crate::tgraph::{gen_graph, Node};
use crate::world::WorldError;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Fresh placements drawn before giving up on a configuration.
const SCENE_TRIES: usize = 400;

/// Positions tried for one object within a single placement.
const PLACEMENT_TRIES: usize = 200;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad instance configuration: {0}")]
    BadConfig(String),
    #[error("could not generate a case {case} instance with {n_objects} objects in {attempts} attempts")]
    Rejected {
        case: Case,
        n_objects: usize,
        attempts: usize,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Occlusion(#[from] OcclusionError),
    #[error(transparent)]
    Corridor(#[from] crate::corridor::CorridorError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Initial-knowledge regime of an episode.
///
/// Case I: every object is known from the start. Case II: a fixed fraction
/// of the non-target objects starts hidden behind others; the target is
/// visible. Case III: knowledge is exactly what the camera sees, so the
/// target itself may start hidden.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Case {
    I,
    II,
    III,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Case {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Case::I),
            "II" | "2" => Ok(Case::II),
            "III" | "3" => Ok(Case::III),
            other => Err(format!("unknown case '{other}' (expected I, II, or III)")),
        }
    }
}

/// Which planner runs the episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Proposed,
    Distance,
    Vfh,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Proposed => "proposed",
            Method::Distance => "distance",
            Method::Vfh => "vfh",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "proposed" => Ok(Method::Proposed),
            "distance" => Ok(Method::Distance),
            "vfh" => Ok(Method::Vfh),
            other => Err(format!(
                "unknown method '{other}' (expected proposed, distance, or vfh)"
            )),
        }
    }
}

/// Everything that defines one random instance. Lengths in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceConfig {
    pub n_objects: usize,
    pub length: f64,
    pub width: f64,
    pub diameter_range: (f64, f64),
    pub height_range: (f64, f64),
    pub robot_home: Point,
    pub robot_radius: f64,
    pub safety_margin: f64,
    pub camera: Point,
    pub camera_height: f64,
    pub case: Case,
    /// Fraction of objects hidden in Case II; ignored elsewhere.
    pub hidden_fraction: f64,
    pub seed: u64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig {
            n_objects: 12,
            length: 0.9,
            width: 0.45,
            diameter_range: (0.05, 0.06),
            height_range: (0.06, 0.07),
            robot_home: Point::new(0.45, -0.1),
            robot_radius: 0.05,
            safety_margin: 0.005,
            camera: Point::new(0.45, -0.2),
            camera_height: 0.5,
            case: Case::I,
            hidden_fraction: 0.2,
            seed: 0,
        }
    }
}

impl InstanceConfig {
    pub fn workspace(&self) -> Result<Workspace, GeometryError> {
        Workspace::new(
            self.length,
            self.width,
            self.robot_home,
            self.robot_radius,
            self.safety_margin,
        )
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::BadConfig(msg));
        if self.n_objects == 0 {
            return bad("need at least one object".into());
        }
        let (dlo, dhi) = self.diameter_range;
        if !(0.0 < dlo && dlo <= dhi) || dhi >= self.length.min(self.width) {
            return bad(format!("diameter range ({dlo}, {dhi}) does not fit"));
        }
        let (hlo, hhi) = self.height_range;
        if !(0.0 < hlo && hlo <= hhi) {
            return bad(format!("height range ({hlo}, {hhi}) is empty"));
        }
        if self.camera_height <= hhi {
            return bad(format!(
                "camera height {} cannot see over objects up to {hhi}",
                self.camera_height
            ));
        }
        if !(0.0..=1.0).contains(&self.hidden_fraction) {
            return bad(format!(
                "hidden fraction {} outside [0, 1]",
                self.hidden_fraction
            ));
        }
        Ok(())
    }
}

/// Uniform draw that tolerates a pinned (lo == hi) range.
fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// One attempt at dropping all objects in without overlap.
fn place_objects(cfg: &InstanceConfig, rng: &mut ChaCha8Rng) -> Option<Vec<ObjectSpec>> {
    let mut placed: Vec<ObjectSpec> = Vec::with_capacity(cfg.n_objects);
    for id in 1..=cfg.n_objects as ObjectId {
        let mut done = false;
        for _ in 0..PLACEMENT_TRIES {
            let radius = draw(rng, cfg.diameter_range.0, cfg.diameter_range.1) / 2.0;
            let height = draw(rng, cfg.height_range.0, cfg.height_range.1);
            let center = Point::new(
                draw(rng, radius, cfg.length - radius),
                draw(rng, radius, cfg.width - radius),
            );
            let disc = Disc::new(center, radius);
            if placed
                .iter()
                .all(|o| !disc_overlaps(o.footprint(), disc))
            {
                placed.push(ObjectSpec {
                    id,
                    center,
                    radius,
                    height,
                    is_target: false,
                    hidden: false,
                });
                done = true;
                break;
            }
        }
        if !done {
            return None;
        }
    }
    Some(placed)
}

/// Draws a reproducible instance for the configuration.
///
/// The deepest object (largest y, farthest from the open edge) is the
/// target: anything nearer the front would not need decluttering. Scenes
/// are redrawn until the case's visibility demands hold and the ground
/// truth graph connects the robot to the target, so a generated instance
/// is always solvable for a planner that knows everything.
pub fn generate_instance(cfg: &InstanceConfig) -> Result<Scenario, HarnessError> {
    cfg.validate()?;
    let workspace = cfg.workspace()?;
    let camera = CameraModel::new(cfg.camera, cfg.camera_height);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    for _ in 0..SCENE_TRIES {
        let mut objects = match place_objects(cfg, &mut rng) {
            Some(v) => v,
            None => continue,
        };
        let deepest = objects
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.center.y.total_cmp(&b.1.center.y))
            .map(|(k, _)| k)
            .expect("n_objects >= 1");
        objects[deepest].is_target = true;
        let target_id = objects[deepest].id;

        match cfg.case {
            Case::I => {}
            Case::II => {
                let visible = detected_objects(&objects, &camera, &workspace)?;
                if !visible.contains(&target_id) {
                    continue;
                }
                let quota = (cfg.hidden_fraction * cfg.n_objects as f64).ceil() as usize;
                let occluded: Vec<ObjectId> = objects
                    .iter()
                    .filter(|o| o.id != target_id && !visible.contains(&o.id))
                    .map(|o| o.id)
                    .collect();
                if occluded.len() < quota {
                    continue;
                }
                let chosen: BTreeSet<ObjectId> = occluded
                    .choose_multiple(&mut rng, quota)
                    .copied()
                    .collect();
                for o in &mut objects {
                    o.hidden = chosen.contains(&o.id);
                }
            }
            Case::III => {
                let visible = detected_objects(&objects, &camera, &workspace)?;
                for o in &mut objects {
                    o.hidden = !visible.contains(&o.id);
                }
            }
        }

        let graph = gen_graph(&objects, &[], &workspace, DEFAULT_GRID_RESOLUTION)?;
        if crate::planner::reloc_path(&graph, Node::Robot, Node::Object(target_id))?.is_none() {
            continue;
        }

        return Ok(Scenario::new(workspace, camera, objects)?);
    }
    Err(HarnessError::Rejected {
        case: cfg.case,
        n_objects: cfg.n_objects,
        attempts: SCENE_TRIES,
    })
}

/// What one episode produced. `relocated` counts every pick-and-place,
/// the final target grasp included; the times cover planning only (grid
/// construction, graph building, searches), since simulated motions execute
/// in no time at all.
#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub method: Method,
    pub case: Case,
    pub n_objects: usize,
    pub seed: u64,
    pub success: bool,
    pub relocated: usize,
    pub replans: u32,
    pub time_total_s: f64,
    pub time_per_action_s: f64,
    pub reason: Option<String>,
    pub log: EventLog,
}

/// Header of [`RunMetrics::csv_row`] lines.
pub const METRICS_HEADER: &str =
    "method,case,n,seed,success,relocated,replans,time_total_s,time_per_action_s";

impl RunMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6},{:.6}",
            self.method,
            self.case,
            self.n_objects,
            self.seed,
            u8::from(self.success),
            self.relocated,
            self.replans,
            self.time_total_s,
            self.time_per_action_s
        )
    }
}

/// Runs one planner over one instance under a wall-clock budget.
pub fn run_episode(
    scenario: &Scenario,
    case: Case,
    method: Method,
    oracle: &mut dyn MotionOracle,
    budget: Option<Duration>,
    planner: PlannerConfig,
    seed: u64,
) -> Result<RunMetrics, HarnessError> {
    let mut world = scenario.clone().into_world()?;
    let n_objects = world.remaining_count();
    let workspace = &scenario.workspace;
    let mut ctx = PlanCtx::new(planner);
    let started = Instant::now();
    if let Some(budget) = budget {
        ctx = ctx.with_deadline(started + budget);
    }
    let outcome = match method {
        Method::Proposed => reloc_planner(&mut world, oracle, workspace, &mut ctx),
        Method::Distance => distance_planner(
            &mut world,
            oracle,
            workspace,
            &DistanceConfig::default(),
            &mut ctx,
        ),
        Method::Vfh => vfh_local_planner(
            &mut world,
            oracle,
            workspace,
            &VfhConfig::default(),
            &mut ctx,
        ),
    };
    let time_total_s = started.elapsed().as_secs_f64();
    let relocated = outcome.relocated.len();
    Ok(RunMetrics {
        method,
        case,
        n_objects,
        seed,
        success: outcome.status == RunStatus::Done,
        relocated,
        replans: outcome.replans,
        time_total_s,
        time_per_action_s: time_total_s / relocated.max(1) as f64,
        reason: outcome.reason,
        log: ctx.log,
    })
}

/// A batch: a seed range of instances, each run by every method.
#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub instance: InstanceConfig,
    /// Instances drawn, with seeds `instance.seed .. instance.seed + repetitions`.
    pub repetitions: u32,
    pub methods: Vec<Method>,
    pub oracle: OracleKind,
    pub budget: Option<Duration>,
    pub planner: PlannerConfig,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            instance: InstanceConfig::default(),
            repetitions: 20,
            methods: vec![Method::Proposed, Method::Distance, Method::Vfh],
            oracle: OracleKind::Always,
            budget: Some(Duration::from_secs(60)),
            planner: PlannerConfig::default(),
        }
    }
}

/// All episodes of a batch, in (seed, method) order.
#[derive(Debug, Clone)]
pub struct BatchResult {
    pub episodes: Vec<RunMetrics>,
}

pub fn run_batch(cfg: &BatchConfig) -> Result<BatchResult, HarnessError> {
    let mut episodes = Vec::new();
    for rep in 0..cfg.repetitions {
        let seed = cfg.instance.seed.wrapping_add(rep as u64);
        let icfg = InstanceConfig {
            seed,
            ..cfg.instance.clone()
        };
        let scenario = generate_instance(&icfg)?;
        for &method in &cfg.methods {
            let mut oracle = cfg.oracle.build(seed);
            episodes.push(run_episode(
                &scenario,
                cfg.instance.case,
                method,
                oracle.as_mut(),
                cfg.budget,
                cfg.planner.clone(),
                seed,
            )?);
        }
    }
    Ok(BatchResult { episodes })
}

/// Mean and sample standard deviation; (0, 0) on an empty slice.
fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Header of the per-method aggregate table.
pub const AGGREGATE_HEADER: &str = "method,case,n,episodes,success_rate,relocated_mean,\
relocated_std,relocated_failed_mean,replans_mean,time_per_action_s_mean";

impl BatchResult {
    /// One row per episode, under [`METRICS_HEADER`].
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from(METRICS_HEADER);
        out.push('\n');
        for e in &self.episodes {
            out.push_str(&e.csv_row());
            out.push('\n');
        }
        out
    }

    /// Per-method summary under [`AGGREGATE_HEADER`]. Means of relocation
    /// counts, replans, and times cover successful episodes only, matching
    /// how the experiment tables are usually read; failed episodes
    /// contribute the separate `relocated_failed_mean` column. Cells whose
    /// population is empty stay empty.
    pub fn aggregate_csv(&self) -> String {
        let mut out = String::from(AGGREGATE_HEADER);
        out.push('\n');
        let mut methods: Vec<Method> = self.episodes.iter().map(|e| e.method).collect();
        methods.sort();
        methods.dedup();
        let fmt = |v: f64| format!("{v:.6}");
        for method in methods {
            let runs: Vec<&RunMetrics> = self
                .episodes
                .iter()
                .filter(|e| e.method == method)
                .collect();
            let done: Vec<&&RunMetrics> = runs.iter().filter(|e| e.success).collect();
            let failed: Vec<&&RunMetrics> = runs.iter().filter(|e| !e.success).collect();
            let (rel_mean, rel_std) =
                mean_std(&done.iter().map(|e| e.relocated as f64).collect::<Vec<_>>());
            let (rel_failed, _) =
                mean_std(&failed.iter().map(|e| e.relocated as f64).collect::<Vec<_>>());
            let (replans_mean, _) =
                mean_std(&done.iter().map(|e| e.replans as f64).collect::<Vec<_>>());
            let (tpa_mean, _) = mean_std(
                &done
                    .iter()
                    .map(|e| e.time_per_action_s)
                    .collect::<Vec<_>>(),
            );
            let or_empty = |present: bool, v: f64| if present { fmt(v) } else { String::new() };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                method,
                runs[0].case,
                runs[0].n_objects,
                runs.len(),
                fmt(done.len() as f64 / runs.len() as f64),
                or_empty(!done.is_empty(), rel_mean),
                or_empty(done.len() > 1, rel_std),
                or_empty(!failed.is_empty(), rel_failed),
                or_empty(!done.is_empty(), replans_mean),
                or_empty(!done.is_empty(), tpa_mean),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::Event;
    use crate::motion::Verdict;

    fn cfg(case: Case, seed: u64) -> InstanceConfig {
        InstanceConfig {
            case,
            seed,
            ..InstanceConfig::default()
        }
    }

    #[test]
    fn same_seed_reproduces_the_same_instance() {
        let a = generate_instance(&cfg(Case::II, 7)).unwrap();
        let b = generate_instance(&cfg(Case::II, 7)).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&cfg(Case::II, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_dimensions_respect_the_ranges() {
        let mut diameters = Vec::new();
        let mut heights = Vec::new();
        for seed in 0..84 {
            let sc = generate_instance(&cfg(Case::I, seed)).unwrap();
            for o in &sc.objects {
                diameters.push(2.0 * o.radius);
                heights.push(o.height);
            }
        }
        assert!(diameters.len() >= 1000);
        let (dlo, dhi) = InstanceConfig::default().diameter_range;
        let (hlo, hhi) = InstanceConfig::default().height_range;
        assert!(diameters.iter().all(|&d| (dlo..=dhi).contains(&d)));
        assert!(heights.iter().all(|&h| (hlo..=hhi).contains(&h)));
        let mean = diameters.iter().sum::<f64>() / diameters.len() as f64;
        assert!(
            (mean - 0.055).abs() < 0.0005,
            "diameter mean drifted to {mean}"
        );
    }

    #[test]
    fn case_one_knows_every_object_up_front() {
        let sc = generate_instance(&cfg(Case::I, 3)).unwrap();
        assert_eq!(sc.objects.len(), 12);
        assert!(sc.objects.iter().all(|o| !o.hidden));
        assert_eq!(sc.objects.iter().filter(|o| o.is_target).count(), 1);
        let target = sc.objects.iter().find(|o| o.is_target).unwrap();
        let deepest = sc
            .objects
            .iter()
            .map(|o| o.center.y)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(target.center.y, deepest, "target is the deepest object");
    }

    #[test]
    fn case_two_hides_the_exact_quota_of_occluded_obstacles() {
        for seed in 0..5 {
            let sc = generate_instance(&cfg(Case::II, seed)).unwrap();
            let hidden: Vec<ObjectId> =
                sc.objects.iter().filter(|o| o.hidden).map(|o| o.id).collect();
            assert_eq!(hidden.len(), 3, "ceil(0.2 * 12)");
            let target = sc.objects.iter().find(|o| o.is_target).unwrap();
            assert!(!target.hidden, "the target stays visible in this case");
            // Every hidden object is genuinely occluded at time zero: a
            // fresh sense pass over the full ground truth reveals nothing.
            let workspace = sc.workspace.clone();
            let mut world = sc.into_world().unwrap();
            assert_eq!(world.sense(&workspace).unwrap(), vec![]);
        }
    }

    #[test]
    fn case_three_knowledge_is_exactly_what_the_camera_sees() {
        let sc = generate_instance(&cfg(Case::III, 11)).unwrap();
        let visible = detected_objects(&sc.objects, &sc.camera, &sc.workspace).unwrap();
        for o in &sc.objects {
            assert_eq!(o.hidden, !visible.contains(&o.id), "object {}", o.id);
        }
        let workspace = sc.workspace.clone();
        let mut world = sc.into_world().unwrap();
        assert_eq!(world.sense(&workspace).unwrap(), vec![]);
    }

    #[test]
    fn generated_instances_are_solvable_with_a_perfect_motion_planner() {
        for seed in 0..5 {
            let sc = generate_instance(&cfg(Case::I, seed)).unwrap();
            let mut oracle = OracleKind::Always.build(seed);
            let m = run_episode(
                &sc,
                Case::I,
                Method::Proposed,
                oracle.as_mut(),
                None,
                PlannerConfig::default(),
                seed,
            )
            .unwrap();
            assert!(m.success, "seed {seed}: {:?}", m.reason);
            assert!(m.relocated >= 1);
        }
    }

    #[test]
    fn episode_metrics_agree_with_their_event_log() {
        let sc = generate_instance(&cfg(Case::I, 2)).unwrap();
        let run = || {
            let mut oracle = OracleKind::Always.build(2);
            run_episode(
                &sc,
                Case::I,
                Method::Proposed,
                oracle.as_mut(),
                Some(Duration::from_secs(60)),
                PlannerConfig::default(),
                2,
            )
            .unwrap()
        };
        let m = run();
        match m.log.outcome().expect("episode logged an outcome") {
            Event::Outcome {
                status,
                relocated,
                replans,
                ..
            } => {
                assert_eq!(*status == RunStatus::Done, m.success);
                assert_eq!(relocated.len(), m.relocated);
                assert_eq!(*replans, m.replans);
            }
            other => panic!("wrong outcome event {other:?}"),
        }
        assert!(m.time_total_s >= 0.0);
        assert!(
            (m.time_per_action_s - m.time_total_s / m.relocated.max(1) as f64).abs() < 1e-12
        );
        let again = run();
        assert_eq!(m.log.to_text(), again.log.to_text(), "episodes replay bit for bit");
    }

    #[test]
    fn removals_are_always_attempted_detected_and_sensed_in_order() {
        // Case III stresses the invariants most: the belief starts small and
        // grows by sensing; nothing may be removed before it is believed in.
        let sc = generate_instance(&cfg(Case::III, 5)).unwrap();
        let mut belief: BTreeSet<ObjectId> = sc
            .objects
            .iter()
            .filter(|o| !o.hidden)
            .map(|o| o.id)
            .collect();
        let mut oracle = OracleKind::Always.build(5);
        let m = run_episode(
            &sc,
            Case::III,
            Method::Proposed,
            oracle.as_mut(),
            Some(Duration::from_secs(60)),
            PlannerConfig::default(),
            5,
        )
        .unwrap();
        let events = m.log.events();
        for (k, e) in events.iter().enumerate() {
            match e {
                Event::Removed { object, .. } => {
                    assert!(belief.contains(object), "removed unseen object {object}");
                    belief.remove(object);
                    match &events[k - 1] {
                        Event::Attempt {
                            object: tried,
                            verdict,
                            ..
                        } => {
                            assert_eq!(tried, object);
                            assert_eq!(*verdict, Verdict::Success);
                        }
                        other => panic!("removal not preceded by its attempt: {other:?}"),
                    }
                }
                Event::Revealed { objects, .. } => {
                    for id in objects {
                        assert!(belief.insert(*id), "object {id} revealed twice");
                    }
                }
                _ => {}
            }
        }
    }

    #[test]
    fn batches_share_instances_across_methods_and_aggregate_cleanly() {
        let batch = BatchConfig {
            instance: cfg(Case::I, 40),
            repetitions: 2,
            methods: vec![Method::Proposed, Method::Distance],
            oracle: OracleKind::Always,
            budget: Some(Duration::from_secs(60)),
            planner: PlannerConfig::default(),
        };
        let result = run_batch(&batch).unwrap();
        assert_eq!(result.episodes.len(), 4);
        assert_eq!(result.episodes[0].seed, result.episodes[1].seed);
        assert_eq!(result.episodes[0].method, Method::Proposed);
        assert_eq!(result.episodes[1].method, Method::Distance);
        assert_eq!(result.episodes[2].seed, 41);

        let metrics = result.metrics_csv();
        let lines: Vec<&str> = metrics.lines().collect();
        assert_eq!(lines[0], METRICS_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("proposed,I,12,40,1,"));

        // The aggregate rows must be recomputable from the episode rows.
        let aggregate = result.aggregate_csv();
        for row in aggregate.lines().skip(1) {
            let cells: Vec<&str> = row.split(',').collect();
            let method: Method = cells[0].parse().unwrap();
            let done: Vec<&RunMetrics> = result
                .episodes
                .iter()
                .filter(|e| e.method == method && e.success)
                .collect();
            let expect =
                done.iter().map(|e| e.relocated as f64).sum::<f64>() / done.len() as f64;
            let got: f64 = cells[5].parse().unwrap();
            assert!((got - expect).abs() < 1e-9);
            let rate: f64 = cells[4].parse().unwrap();
            assert!((rate - 1.0).abs() < 1e-9, "always-succeed oracle");
        }

        let empty = run_batch(&BatchConfig {
            repetitions: 0,
            ..batch
        })
        .unwrap();
        assert_eq!(empty.metrics_csv(), format!("{METRICS_HEADER}\n"));
        assert_eq!(empty.aggregate_csv(), format!("{AGGREGATE_HEADER}\n"));
    }

    #[test]
    fn impossible_configurations_are_rejected_with_context() {
        let err = generate_instance(&InstanceConfig {
            n_objects: 0,
            ..InstanceConfig::default()
        })
        .unwrap_err();
        assert!(matches!(err, HarnessError::BadConfig(_)));

        // A workspace that cannot physically hold the requested clutter.
        let err = generate_instance(&InstanceConfig {
            n_objects: 200,
            ..InstanceConfig::default()
        })
        .unwrap_err();
        assert!(matches!(err, HarnessError::Rejected { .. }));

        // Case II needs an occluded non-target object; one lone object
        // cannot satisfy that.
        let err = generate_instance(&InstanceConfig {
            n_objects: 1,
            case: Case::II,
            ..InstanceConfig::default()
        })
        .unwrap_err();
        assert!(matches!(
            err,
            HarnessError::Rejected {
                case: Case::II,
                n_objects: 1,
                ..
            }
        ));
    }

    #[test]
    fn case_and_method_names_round_trip() {
        for case in [Case::I, Case::II, Case::III] {
            assert_eq!(case.to_string().parse::<Case>().unwrap(), case);
        }
        for m in [Method::Proposed, Method::Distance, Method::Vfh] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("IV".parse::<Case>().is_err());
        assert!("astar".parse::<Method>().is_err());
    }
}
