//! The traversability graph: which footprints the loaded hand can move
//! between.
//!
//! Nodes are the remaining objects plus one robot node at the home pose. An
//! edge between two nodes states that the hand, carrying the largest
//! remaining object, can travel between their poses without touching any
//! other object or wall. Both endpoint objects are ignored by the check: the
//! carried object vacates one pose and settles the question for the other.
//! Sizing every corridor for the largest object makes edges conservative, so
//! any relocation order read off the graph works no matter which objects it
//! moves.
//!
//! The graph is immutable; removing an edge yields a new graph. Planners
//! rebuild from scratch whenever the world changes, so an edge removed after
//! a failed motion only stays gone until the next rebuild.
//!
//! Rebuilds after extractions pass the vacated slots as eased zones. A
//! minimum-hop plan is a relay — each object travels through the poses ahead
//! of it on the path — so the corridors that certified the plan run through
//! slots that empty as the plan executes. Keeping those slots eased makes
//! rebuilt graphs honor every corridor the hand has already driven: without
//! it, extracting an object from a wall-hugging slot could disconnect the
//! rest of the path it was supposed to open.

use crate::corridor::{ClearanceField, CorridorError};
use crate::geometry::{Disc, GraspedRadius, ObjectId, ObjectSpec, Point, Workspace};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Graph node: a movable object or the robot hand at its home pose.
///
/// The derived order puts objects first (ascending id) and the robot last,
/// which fixes neighbor order in dumps and tie-breaking scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Object(ObjectId),
    Robot,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Object(id) => write!(f, "{id}"),
            Node::Robot => write!(f, "R"),
        }
    }
}

/// Undirected traversability graph over one snapshot of the scene.
#[derive(Debug, Clone, PartialEq)]
pub struct TGraph {
    poses: BTreeMap<Node, Point>,
    adjacency: BTreeMap<Node, BTreeSet<Node>>,
    /// Swept radius the edges were checked with.
    pub grasp_radius: f64,
}

impl TGraph {
    /// Assembles a graph from explicit parts. Edges mentioning unknown nodes
    /// are ignored; self-loops are never stored.
    pub fn from_parts(poses: BTreeMap<Node, Point>, edges: &[(Node, Node)], grasp_radius: f64) -> TGraph {
        let mut adjacency: BTreeMap<Node, BTreeSet<Node>> =
            poses.keys().map(|&n| (n, BTreeSet::new())).collect();
        for &(a, b) in edges {
            if a == b || !poses.contains_key(&a) || !poses.contains_key(&b) {
                continue;
            }
            adjacency.get_mut(&a).unwrap().insert(b);
            adjacency.get_mut(&b).unwrap().insert(a);
        }
        TGraph {
            poses,
            adjacency,
            grasp_radius,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.poses.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.poses.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn contains(&self, n: Node) -> bool {
        self.poses.contains_key(&n)
    }

    pub fn pose(&self, n: Node) -> Option<Point> {
        self.poses.get(&n).copied()
    }

    pub fn has_edge(&self, a: Node, b: Node) -> bool {
        self.adjacency.get(&a).map(|s| s.contains(&b)).unwrap_or(false)
    }

    pub fn neighbors(&self, n: Node) -> impl Iterator<Item = Node> + '_ {
        self.adjacency.get(&n).into_iter().flatten().copied()
    }

    /// A copy of the graph without the edge, and whether it was present.
    /// Removing an absent edge is not an error; it returns `false`.
    pub fn remove_edge(&self, a: Node, b: Node) -> (TGraph, bool) {
        let mut next = self.clone();
        let mut removed = false;
        if let Some(s) = next.adjacency.get_mut(&a) {
            removed |= s.remove(&b);
        }
        if let Some(s) = next.adjacency.get_mut(&b) {
            removed |= s.remove(&a);
        }
        (next, removed)
    }

    /// Adjacency listing, one line per node: the node id, a colon, then its
    /// neighbors in ascending order with the robot last.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (node, nbrs) in &self.adjacency {
            out.push_str(&node.to_string());
            out.push(':');
            for n in nbrs {
                out.push(' ');
                out.push_str(&n.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Builds the traversability graph for the given objects. The swept radius is
/// recomputed from the largest radius present, so a shrinking scene loosens
/// the corridors on the next build. `eased` lists the slots vacated so far
/// this episode (see the module docs); pass an empty slice for a fresh scene.
pub fn gen_graph(
    objects: &[ObjectSpec],
    eased: &[Disc],
    workspace: &Workspace,
    resolution: f64,
) -> Result<TGraph, CorridorError> {
    let r_max = objects.iter().map(|o| o.radius).fold(0.0, f64::max);
    let grasp_radius =
        GraspedRadius::new(r_max, workspace.robot_radius, workspace.safety_margin).value();
    let field = ClearanceField::build(workspace, objects, resolution)?.with_eased(eased);

    let mut poses: BTreeMap<Node, Point> = objects
        .iter()
        .map(|o| (Node::Object(o.id), o.center))
        .collect();
    poses.insert(Node::Robot, workspace.robot_home);
    let nodes: Vec<Node> = poses.keys().copied().collect();

    let mut edges = Vec::new();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            let mut exclude: Vec<ObjectId> = Vec::with_capacity(2);
            if let Node::Object(id) = a {
                exclude.push(id);
            }
            if let Node::Object(id) = b {
                exclude.push(id);
            }
            if field.corridor(grasp_radius, poses[&a], poses[&b], &exclude) {
                edges.push((a, b));
            }
        }
    }
    Ok(TGraph::from_parts(poses, &edges, grasp_radius))
}

/// Objects directly reachable by the empty hand according to the graph: the
/// object nodes adjacent to the robot node, ascending.
pub fn accessible_objects(g: &TGraph) -> Vec<ObjectId> {
    g.neighbors(Node::Robot)
        .filter_map(|n| match n {
            Node::Object(id) => Some(id),
            Node::Robot => None,
        })
        .collect()
}
