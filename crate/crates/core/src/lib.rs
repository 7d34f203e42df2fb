//! Task-level planning for retrieving a target object from dense clutter.
//!
//! A robot reaches into a shelf-like workspace that is open on one side and
//! must grasp a target cylinder standing among other movable cylinders. When
//! the clutter is dense the target cannot be extracted directly, so obstructing
//! objects are relocated out of the workspace first. This crate plans which
//! objects to relocate and in what order, replans when a commanded motion turns
//! out to be infeasible, and handles workspaces that are only partially visible
//! because objects occlude each other from the sensor.
//!
//! The planner reasons on a traversability graph: nodes are object footprints
//! plus the robot hand, and an edge states that the hand, while carrying the
//! largest remaining object, can move between the two footprints without
//! hitting anything else. Shortest paths on that graph give the minimal number
//! of relocations, which keeps the plan cheap and the replanning loop fast.
//!
//! Module map:
//!
//! * [`geometry`]: planar primitives, workspace model, grasp envelope.
//! * [`corridor`]: grid-based corridor existence queries for a moving disc.
//! * [`occlusion`]: camera shadow regions, detection, revealed-volume metric.
//! * [`tgraph`]: traversability graph construction and queries.
//! * [`planner`]: relocation path extraction, replanning loop, search loop.
//! * [`motion`]: motion feasibility oracles (stub, scripted, geometric).
//! * [`baselines`]: distance-based and heading-window comparison planners.
//! * [`world`]: ground truth plus the robot's belief during an episode.
//! * [`harness`]: instance generation, episode orchestration, batch metrics.
//! * [`scenario`]: plain-text scenario file format.
//! * [`eventlog`]: deterministic per-iteration event records.
//! * [`render`]: SVG views of scenes, graphs, shadows, and episode replays.

pub mod baselines;
pub mod corridor;
pub mod eventlog;
pub mod geometry;
pub mod harness;
pub mod motion;
pub mod occlusion;
pub mod planner;
pub mod render;
pub mod scenario;
pub mod tgraph;
pub mod world;

#[cfg(doctest)]
mod booktests;
