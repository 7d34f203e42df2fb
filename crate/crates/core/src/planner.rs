//! Relocation planning and execution with replanning.
//!
//! Retrieval runs on the traversability graph: a minimum-hop path from the
//! robot node to the target names exactly the objects that must come out and
//! in what order. Execution is interleaved with the motion oracle. A failed
//! extraction does not invalidate the whole model, it only proves the robot
//! cannot reach that one object right now, so only the robot-to-object edge
//! is dropped and the order is recomputed. A successful extraction changes
//! the scene, so the robot re-senses and the graph is rebuilt from scratch
//! (which also forgets any dropped edges; the next failure will rediscover
//! them if they still hold). Rebuilds and oracle queries carry the vacated
//! slots as eased zones, so extracting the head of a plan never severs the
//! corridors that certified the rest of it.
//!
//! When the target has never been seen, [`reloc_planner`] first runs search
//! rounds: among currently accessible objects it removes the one whose
//! absence would uncover the most shadow volume, until the target shows up
//! or no accessible object can be removed. Retrieval then proceeds as above.

use crate::corridor::DEFAULT_GRID_RESOLUTION;
use crate::eventlog::{Event, EventLog, RebuildCause, RunStatus};
use crate::geometry::{ObjectId, ObjectSpec, Workspace};
use crate::motion::{MotionOracle, MotionQuery, Verdict};
use crate::occlusion::revealed_volumes;
use crate::tgraph::{accessible_objects, gen_graph, Node, TGraph};
use crate::world::WorldState;
use std::collections::{BTreeMap, VecDeque};
use std::time::Instant;
use thiserror::Error;

/// Reason string an episode reports when it exceeds its deadline.
pub const TIMEOUT_REASON: &str = "timeout";

#[derive(Debug, Error, PartialEq)]
pub enum PlannerError {
    #[error("node {0} is not in the graph")]
    MissingNode(Node),
}

/// A minimum-hop relocation order.
#[derive(Debug, Clone, PartialEq)]
pub struct RelocationPlan {
    /// Node path from the start, robot node included.
    pub nodes: Vec<Node>,
    /// Objects to extract, in order. The last entry is the goal node.
    pub order: Vec<ObjectId>,
    /// Euclidean length of the node path.
    pub length: f64,
}

impl RelocationPlan {
    /// Number of objects the plan extracts.
    pub fn hops(&self) -> usize {
        self.order.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub status: RunStatus,
    /// Extraction order over the whole episode, target included on success.
    pub relocated: Vec<ObjectId>,
    /// How many times execution deviated from the pending order.
    pub replans: u32,
    pub reason: Option<String>,
}

impl PlanOutcome {
    pub fn timed_out(&self) -> bool {
        self.reason.as_deref() == Some(TIMEOUT_REASON)
    }
}

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub grid_resolution: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            grid_resolution: DEFAULT_GRID_RESOLUTION,
        }
    }
}

/// Mutable episode context threaded through the planners: configuration,
/// the event log, an optional wall-clock deadline, and the iteration
/// counter that numbers log events across planning phases.
#[derive(Debug)]
pub struct PlanCtx {
    pub config: PlannerConfig,
    pub log: EventLog,
    pub deadline: Option<Instant>,
    pub iteration: u32,
}

impl PlanCtx {
    pub fn new(config: PlannerConfig) -> Self {
        PlanCtx {
            config,
            log: EventLog::new(),
            deadline: None,
            iteration: 0,
        }
    }

    pub fn with_deadline(mut self, deadline: Instant) -> Self {
        self.deadline = Some(deadline);
        self
    }

    pub fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Minimum-hop path from `from` to `target`. Ties go to the shortest
/// Euclidean length, then to the lexicographically smallest node sequence,
/// so equal-length layouts plan identically everywhere. Returns `Ok(None)`
/// when the nodes are disconnected.
pub fn reloc_path(
    g: &TGraph,
    from: Node,
    target: Node,
) -> Result<Option<RelocationPlan>, PlannerError> {
    if !g.contains(from) {
        return Err(PlannerError::MissingNode(from));
    }
    if !g.contains(target) {
        return Err(PlannerError::MissingNode(target));
    }

    let mut dist: BTreeMap<Node, usize> = BTreeMap::new();
    dist.insert(from, 0);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        for v in g.neighbors(u) {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                e.insert(du + 1);
                queue.push_back(v);
            }
        }
    }
    let Some(&hops) = dist.get(&target) else {
        return Ok(None);
    };

    // Dynamic program over breadth-first layers: every predecessor of a
    // layer-k node sits in layer k-1, so the best prefix is already known.
    let mut best: BTreeMap<Node, (f64, Vec<Node>)> = BTreeMap::new();
    best.insert(from, (0.0, vec![from]));
    for layer in 1..=hops {
        let members: Vec<Node> = g.nodes().filter(|v| dist.get(v) == Some(&layer)).collect();
        for v in members {
            let pv = g.pose(v).expect("graph nodes carry poses");
            let mut choice: Option<(f64, Vec<Node>)> = None;
            for u in g.neighbors(v) {
                if dist.get(&u) != Some(&(layer - 1)) {
                    continue;
                }
                let Some((len_u, path_u)) = best.get(&u) else {
                    continue;
                };
                let cand_len = len_u + g.pose(u).expect("graph nodes carry poses").distance(pv);
                let mut cand_path = path_u.clone();
                cand_path.push(v);
                let replace = match &choice {
                    None => true,
                    Some((len_c, path_c)) => {
                        cand_len < *len_c || (cand_len == *len_c && cand_path < *path_c)
                    }
                };
                if replace {
                    choice = Some((cand_len, cand_path));
                }
            }
            if let Some(c) = choice {
                best.insert(v, c);
            }
        }
    }

    let (length, nodes) = best.remove(&target).expect("target is reachable");
    let order: Vec<ObjectId> = nodes
        .iter()
        .skip(1)
        .filter_map(|n| match n {
            Node::Object(id) => Some(*id),
            Node::Robot => None,
        })
        .collect();
    Ok(Some(RelocationPlan {
        nodes,
        order,
        length,
    }))
}

pub(crate) fn finish(
    ctx: &mut PlanCtx,
    world: &WorldState,
    status: RunStatus,
    replans: u32,
    reason: Option<String>,
) -> PlanOutcome {
    let relocated = world.removed().to_vec();
    ctx.log.push(Event::Outcome {
        it: ctx.iteration,
        status,
        relocated: relocated.clone(),
        replans,
        reason: reason.clone().unwrap_or_default(),
    });
    PlanOutcome {
        status,
        relocated,
        replans,
        reason,
    }
}

pub(crate) fn query_oracle(
    world: &WorldState,
    oracle: &mut dyn MotionOracle,
    workspace: &Workspace,
    object: ObjectId,
) -> Result<Verdict, String> {
    let spec = world
        .spec(object)
        .expect("attempted object is still in the world")
        .clone();
    let obstacles: Vec<ObjectSpec> = world
        .detected_specs()
        .into_iter()
        .filter(|o| o.id != object)
        .collect();
    let eased = world.vacated_zones(workspace);
    oracle
        .query(&MotionQuery {
            object: &spec,
            obstacles: &obstacles,
            workspace,
            eased: &eased,
        })
        .map_err(|e| format!("oracle error: {e}"))
}

/// Retrieves a detected target, adapting to motion failures.
///
/// Each iteration attempts the head of the current order. Success extracts
/// the object, re-senses, and rebuilds the graph; failure only removes the
/// robot-to-object edge. The order is recomputed either way, and `replans`
/// counts the iterations where the recomputed order differs from what was
/// already pending. Fails when no path to the target remains, on oracle or
/// sensing errors, and on deadline expiry.
pub fn base_planner(
    world: &mut WorldState,
    oracle: &mut dyn MotionOracle,
    workspace: &Workspace,
    ctx: &mut PlanCtx,
) -> PlanOutcome {
    if !world.target_remaining() {
        return finish(ctx, world, RunStatus::Done, 0, None);
    }
    if !world.target_detected() {
        return finish(
            ctx,
            world,
            RunStatus::Fail,
            0,
            Some("target not detected".into()),
        );
    }
    let target = world.target_id();
    let target_node = Node::Object(target);
    let mut replans = 0u32;

    let mut graph = match gen_graph(
        &world.detected_specs(),
        &world.vacated_zones(workspace),
        workspace,
        ctx.config.grid_resolution,
    ) {
        Ok(g) => g,
        Err(e) => {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                replans,
                Some(format!("grid error: {e}")),
            )
        }
    };
    ctx.log.push(Event::Rebuild {
        it: ctx.iteration,
        cause: RebuildCause::Initial,
        nodes: graph.node_count(),
        edges: graph.edge_count(),
    });

    let mut plan = match reloc_path(&graph, Node::Robot, target_node) {
        Ok(Some(p)) => p,
        Ok(None) => {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                replans,
                Some("no path to target".into()),
            )
        }
        Err(e) => {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                replans,
                Some(format!("planning error: {e}")),
            )
        }
    };
    ctx.log.push(Event::Plan {
        it: ctx.iteration,
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        path: plan.nodes.clone(),
        order: plan.order.clone(),
    });

    loop {
        if ctx.timed_out() {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                replans,
                Some(TIMEOUT_REASON.into()),
            );
        }
        ctx.iteration += 1;
        let it = ctx.iteration;
        let object = plan.order[0];
        let verdict = match query_oracle(world, oracle, workspace, object) {
            Ok(v) => v,
            Err(reason) => return finish(ctx, world, RunStatus::Fail, replans, Some(reason)),
        };
        ctx.log.push(Event::Attempt {
            it,
            object,
            target: object == target,
            verdict,
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            plan: plan.order.clone(),
        });
        let pending: Vec<ObjectId> = plan.order[1..].to_vec();

        match verdict {
            Verdict::Success => {
                world.remove(object).expect("attempted object exists");
                ctx.log.push(Event::Removed {
                    it,
                    object,
                    target: object == target,
                });
                if object == target {
                    return finish(ctx, world, RunStatus::Done, replans, None);
                }
                let newly = match world.sense(workspace) {
                    Ok(n) => n,
                    Err(e) => {
                        return finish(
                            ctx,
                            world,
                            RunStatus::Fail,
                            replans,
                            Some(format!("sensing error: {e}")),
                        )
                    }
                };
                if !newly.is_empty() {
                    ctx.log.push(Event::Revealed {
                        it,
                        objects: newly.clone(),
                    });
                }
                graph = match gen_graph(
                    &world.detected_specs(),
                    &world.vacated_zones(workspace),
                    workspace,
                    ctx.config.grid_resolution,
                ) {
                    Ok(g) => g,
                    Err(e) => {
                        return finish(
                            ctx,
                            world,
                            RunStatus::Fail,
                            replans,
                            Some(format!("grid error: {e}")),
                        )
                    }
                };
                ctx.log.push(Event::Rebuild {
                    it,
                    cause: RebuildCause::Removal,
                    nodes: graph.node_count(),
                    edges: graph.edge_count(),
                });
                if !newly.is_empty() {
                    // The belief already contained the reveals when the
                    // graph above was rebuilt, so this rebuild coincides
                    // with it; the separate record keeps the trigger visible
                    // to replay tools.
                    ctx.log.push(Event::Rebuild {
                        it,
                        cause: RebuildCause::Reveal,
                        nodes: graph.node_count(),
                        edges: graph.edge_count(),
                    });
                }
            }
            Verdict::Failure => {
                let (next, _) = graph.remove_edge(Node::Robot, Node::Object(object));
                graph = next;
                ctx.log.push(Event::EdgeRemoved {
                    it,
                    a: Node::Robot,
                    b: Node::Object(object),
                });
            }
        }

        plan = match reloc_path(&graph, Node::Robot, target_node) {
            Ok(Some(p)) => p,
            Ok(None) => {
                return finish(
                    ctx,
                    world,
                    RunStatus::Fail,
                    replans,
                    Some("no path to target".into()),
                )
            }
            Err(e) => {
                return finish(
                    ctx,
                    world,
                    RunStatus::Fail,
                    replans,
                    Some(format!("planning error: {e}")),
                )
            }
        };
        if plan.order != pending {
            replans += 1;
        }
        ctx.log.push(Event::Plan {
            it,
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            path: plan.nodes.clone(),
            order: plan.order.clone(),
        });
    }
}

/// Full episode planner: searches for an undetected target first, then
/// retrieves it with [`base_planner`].
///
/// Each search round rebuilds the graph, scores every accessible object by
/// the shadow volume its removal would uncover, and attempts extractions in
/// descending score order until one succeeds. Candidates that fail leave
/// the round's accessible set; a round with no successful extraction fails
/// the episode.
pub fn reloc_planner(
    world: &mut WorldState,
    oracle: &mut dyn MotionOracle,
    workspace: &Workspace,
    ctx: &mut PlanCtx,
) -> PlanOutcome {
    while !world.target_detected() {
        if ctx.timed_out() {
            return finish(ctx, world, RunStatus::Fail, 0, Some(TIMEOUT_REASON.into()));
        }
        ctx.iteration += 1;
        let it = ctx.iteration;
        let detected = world.detected_specs();
        let graph = match gen_graph(
            &detected,
            &world.vacated_zones(workspace),
            workspace,
            ctx.config.grid_resolution,
        ) {
            Ok(g) => g,
            Err(e) => {
                return finish(
                    ctx,
                    world,
                    RunStatus::Fail,
                    0,
                    Some(format!("grid error: {e}")),
                )
            }
        };
        ctx.log.push(Event::Rebuild {
            it,
            cause: RebuildCause::Search,
            nodes: graph.node_count(),
            edges: graph.edge_count(),
        });
        let accessible = accessible_objects(&graph);
        if accessible.is_empty() {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                0,
                Some("search exhausted accessible objects".into()),
            );
        }
        let mut ranked = match revealed_volumes(&accessible, &detected, &world.camera, workspace) {
            Ok(v) => v,
            Err(e) => {
                return finish(
                    ctx,
                    world,
                    RunStatus::Fail,
                    0,
                    Some(format!("occlusion error: {e}")),
                )
            }
        };
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ctx.log.push(Event::Search {
            it,
            chosen: ranked[0].0,
            scores: ranked.clone(),
        });

        let mut progressed = false;
        for i in 0..ranked.len() {
            if ctx.timed_out() {
                return finish(ctx, world, RunStatus::Fail, 0, Some(TIMEOUT_REASON.into()));
            }
            let object = ranked[i].0;
            let verdict = match query_oracle(world, oracle, workspace, object) {
                Ok(v) => v,
                Err(reason) => return finish(ctx, world, RunStatus::Fail, 0, Some(reason)),
            };
            ctx.log.push(Event::Attempt {
                it,
                object,
                target: false,
                verdict,
                nodes: graph.node_count(),
                edges: graph.edge_count(),
                plan: ranked[i..].iter().map(|(id, _)| *id).collect(),
            });
            match verdict {
                Verdict::Success => {
                    world.remove(object).expect("attempted object exists");
                    ctx.log.push(Event::Removed {
                        it,
                        object,
                        target: false,
                    });
                    let newly = match world.sense(workspace) {
                        Ok(n) => n,
                        Err(e) => {
                            return finish(
                                ctx,
                                world,
                                RunStatus::Fail,
                                0,
                                Some(format!("sensing error: {e}")),
                            )
                        }
                    };
                    if !newly.is_empty() {
                        ctx.log.push(Event::Revealed { it, objects: newly });
                    }
                    progressed = true;
                    break;
                }
                Verdict::Failure => {
                    ctx.log.push(Event::Drop { it, object });
                }
            }
        }
        if !progressed {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                0,
                Some("search exhausted accessible objects".into()),
            );
        }
    }
    base_planner(world, oracle, workspace, ctx)
}
