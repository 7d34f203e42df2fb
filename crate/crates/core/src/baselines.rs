//! Comparison planners: a swept-corridor method and a sight-line method.
//!
//! Both retrieve the target by clearing whatever their geometric heuristic
//! says is in the way, widening that heuristic after every motion failure.
//! Neither reasons about which objects are actually necessary to move, which
//! is exactly the contrast the graph planner is measured against. They share
//! the motion oracle interface, the belief rules (only detected objects are
//! ever touched, sensing runs after every removal), and the event-log
//! schema, so one comparison pipeline covers all methods.
//!
//! Divergences from the methods these are modeled on are deliberate
//! simplifications: both methods work in rounds that end at the first
//! successful extraction, moving on to the next candidate when motion
//! refuses one, so a refused object is retried only after the scene has
//! changed. The corridor method recomputes its swept path every round; the
//! sight-line method re-derives the blocker chain and always gives the
//! target itself a try before reaching for collateral. The originals' full
//! machinery is out of scope here; only the widening rules (2 cm per
//! failure from 6 cm, 10 degrees per failure from 90) are kept exact.

use crate::corridor::{CorridorQuery, GridOccupancy};
use crate::eventlog::{Event, RunStatus, WidenParam};
use crate::geometry::{ObjectId, ObjectSpec, Point, Segment, Workspace};
use crate::motion::{MotionOracle, Verdict};
use crate::planner::{finish, query_oracle, PlanCtx, PlanOutcome, TIMEOUT_REASON};
use crate::world::WorldState;
use std::collections::BTreeSet;

/// Swept-corridor configuration. The width grows by `width_increment` after
/// every motion failure, starting from `initial_width`.
#[derive(Debug, Clone)]
pub struct DistanceConfig {
    pub initial_width: f64,
    pub width_increment: f64,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig {
            initial_width: 0.06,
            width_increment: 0.02,
        }
    }
}

/// Sight-line configuration, in degrees. The window grows by
/// `angle_increment_deg` after every motion failure, starting from
/// `initial_angle_deg` and clamped at 360.
#[derive(Debug, Clone)]
pub struct VfhConfig {
    pub initial_angle_deg: f64,
    pub angle_increment_deg: f64,
}

impl Default for VfhConfig {
    fn default() -> Self {
        VfhConfig {
            initial_angle_deg: 90.0,
            angle_increment_deg: 10.0,
        }
    }
}

/// Distance from a point to a polyline, along with the arc position of the
/// closest approach (used to order objects front to back along a path).
fn polyline_distance(path: &[Point], p: Point) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    let mut arc = 0.0;
    for pair in path.windows(2) {
        let seg = Segment::new(pair[0], pair[1]);
        let d = seg.distance_to_point(p);
        if d < best.0 {
            // Arc position of the projection onto this segment.
            let dx = pair[1].x - pair[0].x;
            let dy = pair[1].y - pair[0].y;
            let len_sq = dx * dx + dy * dy;
            let t = if len_sq > 0.0 {
                (((p.x - pair[0].x) * dx + (p.y - pair[0].y) * dy) / len_sq).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = (d, arc + t * len_sq.sqrt());
        }
        arc += pair[0].distance(pair[1]);
    }
    best
}

/// Retrieves the target by sweeping a corridor of growing width along the
/// shortest hand path and clearing everything inside it, front to back.
///
/// The hand path treats every object as removable, so only the walls
/// constrain it. An episode fails on timeout or when a motion failure
/// arrives with the width already covering the whole workspace.
pub fn distance_planner(
    world: &mut WorldState,
    oracle: &mut dyn MotionOracle,
    workspace: &Workspace,
    cfg: &DistanceConfig,
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
    // Once the half-width spans the workspace diagonal every object is
    // already inside the band; widening past that cannot change anything.
    let max_width = 2.0 * workspace.extent.width().hypot(workspace.extent.height());
    let mut width = cfg.initial_width;
    let mut widenings = 0u32;

    loop {
        if ctx.timed_out() {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                widenings,
                Some(TIMEOUT_REASON.into()),
            );
        }
        let goal = world
            .spec(target)
            .expect("target is still in the world")
            .center;
        let query = CorridorQuery {
            moving_radius: workspace.robot_radius,
            start: workspace.robot_home,
            goal,
            obstacles: &[],
            workspace,
            eased: &[],
        };
        let grid = match GridOccupancy::build(&query, ctx.config.grid_resolution) {
            Ok(g) => g,
            Err(e) => {
                return finish(
                    ctx,
                    world,
                    RunStatus::Fail,
                    widenings,
                    Some(format!("grid error: {e}")),
                )
            }
        };
        let Some(path) = grid.shortest_path(workspace.robot_home, goal) else {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                widenings,
                Some("no corridor for the hand".into()),
            );
        };

        // Band membership: every detected object whose disc intersects the
        // path swept to the current width, ordered front to back; the
        // target always closes the list.
        let mut band: Vec<(f64, ObjectId)> = Vec::new();
        for spec in world.detected_specs() {
            if spec.id == target {
                continue;
            }
            let (dist, arc) = polyline_distance(&path, spec.center);
            if dist < spec.radius + width / 2.0 {
                band.push((arc, spec.id));
            }
        }
        band.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let order: Vec<ObjectId> = band
            .iter()
            .map(|&(_, id)| id)
            .chain(std::iter::once(target))
            .collect();

        // One pass over the band, front to back. A failure widens the band
        // for later passes and the pass moves on to the next object; the first
        // extraction ends the pass so the hand path reflects the new scene.
        // A pass that started at full width and still moved nothing has run
        // out of options: the band already contains every object the swept
        // path can touch, and each was just refused in this exact scene.
        let full_width_at_start = width >= max_width;
        let mut progressed = false;
        for (i, &object) in order.iter().enumerate() {
            if ctx.timed_out() {
                return finish(
                    ctx,
                    world,
                    RunStatus::Fail,
                    widenings,
                    Some(TIMEOUT_REASON.into()),
                );
            }
            ctx.iteration += 1;
            let it = ctx.iteration;
            let verdict = match query_oracle(world, oracle, workspace, object) {
                Ok(v) => v,
                Err(reason) => {
                    return finish(ctx, world, RunStatus::Fail, widenings, Some(reason))
                }
            };
            ctx.log.push(Event::Attempt {
                it,
                object,
                target: object == target,
                verdict,
                nodes: 0,
                edges: 0,
                plan: order[i..].to_vec(),
            });
            match verdict {
                Verdict::Success => {
                    world.remove(object).expect("attempted object exists");
                    ctx.log.push(Event::Removed {
                        it,
                        object,
                        target: object == target,
                    });
                    if object == target {
                        return finish(ctx, world, RunStatus::Done, widenings, None);
                    }
                    let newly = match world.sense(workspace) {
                        Ok(n) => n,
                        Err(e) => {
                            return finish(
                                ctx,
                                world,
                                RunStatus::Fail,
                                widenings,
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
                    if width < max_width {
                        width = (width + cfg.width_increment).min(max_width);
                        widenings += 1;
                        ctx.log.push(Event::Widen {
                            it,
                            param: WidenParam::Width,
                            value: width,
                        });
                    }
                }
            }
        }
        if !progressed && full_width_at_start {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                widenings,
                Some("no path at maximum width".into()),
            );
        }
    }
}

/// One blocker test for the sight-line planner: within the angular window
/// around the robot-to-goal bearing, in front of the goal, and close enough
/// to the sight segment that the hand would brush it.
fn blocks(
    home: Point,
    goal: Point,
    candidate: &ObjectSpec,
    window_rad: f64,
    hand_clearance: f64,
) -> bool {
    if !in_wedge(home, goal, candidate, window_rad) {
        return false;
    }
    let sight = Segment::new(home, goal);
    sight.distance_to_point(candidate.center) < candidate.radius + hand_clearance
}

/// Angular-window membership: within `window_rad` of the robot-to-goal
/// bearing and in front of the goal along the sight direction.
fn in_wedge(home: Point, goal: Point, candidate: &ObjectSpec, window_rad: f64) -> bool {
    let goal_bearing = (goal.y - home.y).atan2(goal.x - home.x);
    let cand_bearing = (candidate.center.y - home.y).atan2(candidate.center.x - home.x);
    let mut diff = (cand_bearing - goal_bearing).abs();
    if diff > std::f64::consts::PI {
        diff = 2.0 * std::f64::consts::PI - diff;
    }
    if diff > window_rad / 2.0 {
        return false;
    }
    let goal_dist = home.distance(goal);
    let along = ((candidate.center.x - home.x) * (goal.x - home.x)
        + (candidate.center.y - home.y) * (goal.y - home.y))
        / goal_dist;
    along < goal_dist
}

/// Builds one round's removal order: the target's transitive sight-line
/// blocker chain first (members with a strictly clear line of their own
/// before the mutually tangled rest, each group nearest the robot first),
/// then the target itself, then every other object inside the angular
/// window, nearest first. The motion oracle arbitrates each nomination, so
/// tangled or even model-blocked candidates are still worth proposing: real
/// extraction corridors can curve around objects the straight sight line
/// cannot.
fn removal_order(
    world: &WorldState,
    workspace: &Workspace,
    target: ObjectId,
    window_rad: f64,
) -> Vec<ObjectId> {
    let home = workspace.robot_home;
    let hand_clearance = workspace.robot_radius + workspace.safety_margin;
    let specs = world.detected_specs();
    let center_of = |id: ObjectId| -> Point {
        specs
            .iter()
            .find(|o| o.id == id)
            .expect("chain member is detected")
            .center
    };

    let mut chain: Vec<ObjectId> = Vec::new();
    let mut seen: BTreeSet<ObjectId> = BTreeSet::new();
    seen.insert(target);
    let mut frontier = vec![target];
    while let Some(goal) = frontier.pop() {
        let goal_center = center_of(goal);
        for o in &specs {
            if !seen.contains(&o.id) && blocks(home, goal_center, o, window_rad, hand_clearance) {
                seen.insert(o.id);
                chain.push(o.id);
                frontier.push(o.id);
            }
        }
    }

    let mut clear: Vec<(f64, ObjectId)> = Vec::new();
    let mut tangled: Vec<(f64, ObjectId)> = Vec::new();
    for &id in &chain {
        let c = center_of(id);
        let own_line_clear = !specs
            .iter()
            .any(|o| o.id != id && blocks(home, c, o, window_rad, hand_clearance));
        let bucket = if own_line_clear {
            &mut clear
        } else {
            &mut tangled
        };
        bucket.push((home.distance(c), id));
    }
    let by_distance =
        |a: &(f64, ObjectId), b: &(f64, ObjectId)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    clear.sort_by(by_distance);
    tangled.sort_by(by_distance);

    let mut order: Vec<ObjectId> = clear
        .into_iter()
        .chain(tangled)
        .map(|(_, id)| id)
        .collect();
    order.push(target);

    // Additional removal candidates found in the window; widening grows
    // this pool.
    let target_center = center_of(target);
    let mut extras: Vec<(f64, ObjectId)> = specs
        .iter()
        .filter(|o| !seen.contains(&o.id) && in_wedge(home, target_center, o, window_rad))
        .map(|o| (home.distance(o.center), o.id))
        .collect();
    extras.sort_by(by_distance);
    order.extend(extras.into_iter().map(|(_, id)| id));
    order
}

/// Retrieves the target by clearing its sight line, greedily and locally.
///
/// Aim at the target; objects inside the angular window around the bearing
/// and near the sight segment form the blocker chain, ordered most
/// accessible first, followed by the target itself and then anything else
/// the window admits. Each round attempts that order until one
/// extraction succeeds, and every motion failure widens the window by the
/// configured increment; the next round sees the new scene and the wider
/// window. A round that starts with the window already at 360 degrees and
/// still moves nothing has run out of recoveries, and the episode fails.
pub fn vfh_local_planner(
    world: &mut WorldState,
    oracle: &mut dyn MotionOracle,
    workspace: &Workspace,
    cfg: &VfhConfig,
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
    let mut angle_deg = cfg.initial_angle_deg.min(360.0);
    let mut widenings = 0u32;

    loop {
        if ctx.timed_out() {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                widenings,
                Some(TIMEOUT_REASON.into()),
            );
        }
        let full_window_at_start = angle_deg >= 360.0;
        let order = removal_order(world, workspace, target, angle_deg.to_radians());
        let mut progressed = false;
        for (i, &object) in order.iter().enumerate() {
            if ctx.timed_out() {
                return finish(
                    ctx,
                    world,
                    RunStatus::Fail,
                    widenings,
                    Some(TIMEOUT_REASON.into()),
                );
            }
            ctx.iteration += 1;
            let it = ctx.iteration;
            let verdict = match query_oracle(world, oracle, workspace, object) {
                Ok(v) => v,
                Err(reason) => {
                    return finish(ctx, world, RunStatus::Fail, widenings, Some(reason))
                }
            };
            ctx.log.push(Event::Attempt {
                it,
                object,
                target: object == target,
                verdict,
                nodes: 0,
                edges: 0,
                plan: order[i..].to_vec(),
            });
            match verdict {
                Verdict::Success => {
                    world.remove(object).expect("attempted object exists");
                    ctx.log.push(Event::Removed {
                        it,
                        object,
                        target: object == target,
                    });
                    if object == target {
                        return finish(ctx, world, RunStatus::Done, widenings, None);
                    }
                    let newly = match world.sense(workspace) {
                        Ok(n) => n,
                        Err(e) => {
                            return finish(
                                ctx,
                                world,
                                RunStatus::Fail,
                                widenings,
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
                    if angle_deg < 360.0 {
                        angle_deg = (angle_deg + cfg.angle_increment_deg).min(360.0);
                        widenings += 1;
                        ctx.log.push(Event::Widen {
                            it,
                            param: WidenParam::AngleDeg,
                            value: angle_deg,
                        });
                    }
                }
            }
        }
        if !progressed && full_window_at_start {
            return finish(
                ctx,
                world,
                RunStatus::Fail,
                widenings,
                Some("angular window exhausted".into()),
            );
        }
    }
}
