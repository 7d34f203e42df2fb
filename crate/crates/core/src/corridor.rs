//! Corridor existence for a disc moving through the cluttered workspace.
//!
//! Whether the hand, possibly carrying an object, can move between two poses
//! is decided on an occupancy grid. A cell is free when its center keeps at
//! least the moving radius of clearance from every obstacle disc and every
//! wall segment, and a corridor exists when the start and goal cells are
//! 4-connected through free cells. Wall clearance (only) is eased within one
//! moving radius of the endpoints, because a pose near a wall is still
//! graspable from the aisle side; see [`GridOccupancy::build`]. A query can
//! carry additional eased zones: callers pass the slots of already-extracted
//! objects so that a passage once certified through a slot stays open after
//! the slot empties (the zone keeps the swept radius it was proven at, which
//! is why it is a [`Disc`] and not a bare point). The grid covers the
//! workspace plus an apron around it, so paths may leave through the open
//! edge and approach the robot home pose, but cannot sneak across a wall
//! from outside.
//!
//! The grid is conservative up to its resolution: answers for queries whose
//! tightest passage is within one cell of the moving diameter can flip when
//! the grid is refined. Callers that need grid-independent answers must keep
//! such marginal queries out, which [`ClearanceField::bottleneck`] exists to
//! measure.

use crate::geometry::{Disc, ObjectId, ObjectSpec, Point, Rect, Workspace};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use thiserror::Error;

/// Default cell size in meters. Small against the 0.10 m scale of the
/// narrowest interesting passages, large enough to keep graph construction
/// cheap.
pub const DEFAULT_GRID_RESOLUTION: f64 = 0.005;

/// Margin added around the workspace and robot home when laying out a grid,
/// in meters. Fixed (rather than resolution-dependent) so that refining the
/// grid does not move its boundary.
const GRID_APRON: f64 = 0.06;

#[derive(Debug, Error, PartialEq)]
pub enum CorridorError {
    #[error("grid resolution {0} must be positive and at most the smaller workspace dimension")]
    BadResolution(f64),
}

/// One corridor existence question: can a disc of `moving_radius` travel from
/// `start` to `goal` without touching any obstacle or wall?
#[derive(Debug, Clone)]
pub struct CorridorQuery<'a> {
    pub moving_radius: f64,
    pub start: Point,
    pub goal: Point,
    pub obstacles: &'a [Disc],
    pub workspace: &'a Workspace,
    /// Zones where wall clearance is forgiven in addition to the endpoint
    /// zones: each disc marks a slot the hand is known to maneuver in, at
    /// the swept radius recorded in the disc. Empty for one-off queries;
    /// planners pass the slots vacated by earlier extractions.
    pub eased: &'a [Disc],
}

/// Shared cell geometry of the two grid types.
#[derive(Debug, Clone, Copy)]
struct GridGeom {
    origin: Point,
    resolution: f64,
    nx: usize,
    ny: usize,
}

impl GridGeom {
    fn over(w: &Workspace, extra: &[Point], resolution: f64) -> Result<GridGeom, CorridorError> {
        let e = w.extent;
        if !(resolution > 0.0) || resolution > e.width().min(e.height()) {
            return Err(CorridorError::BadResolution(resolution));
        }
        let mut min_x = e.min.x.min(w.robot_home.x);
        let mut min_y = e.min.y.min(w.robot_home.y);
        let mut max_x = e.max.x.max(w.robot_home.x);
        let mut max_y = e.max.y.max(w.robot_home.y);
        for p in extra {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        let origin = Point::new(min_x - GRID_APRON, min_y - GRID_APRON);
        let nx = ((max_x + GRID_APRON - origin.x) / resolution).ceil() as usize;
        let ny = ((max_y + GRID_APRON - origin.y) / resolution).ceil() as usize;
        Ok(GridGeom {
            origin,
            resolution,
            nx,
            ny,
        })
    }

    fn cell_of(&self, p: Point) -> Option<usize> {
        let ix = ((p.x - self.origin.x) / self.resolution).floor();
        let iy = ((p.y - self.origin.y) / self.resolution).floor();
        if ix < 0.0 || iy < 0.0 {
            return None;
        }
        let (ix, iy) = (ix as usize, iy as usize);
        if ix >= self.nx || iy >= self.ny {
            return None;
        }
        Some(iy * self.nx + ix)
    }

    fn center_of(&self, idx: usize) -> Point {
        let ix = idx % self.nx;
        let iy = idx / self.nx;
        Point::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
        )
    }

    fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// 4-neighbors in a fixed order, for deterministic searches.
    fn neighbors4(&self, idx: usize, out: &mut [usize; 4]) -> usize {
        let ix = idx % self.nx;
        let iy = idx / self.nx;
        let mut n = 0;
        if ix > 0 {
            out[n] = idx - 1;
            n += 1;
        }
        if ix + 1 < self.nx {
            out[n] = idx + 1;
            n += 1;
        }
        if iy > 0 {
            out[n] = idx - self.nx;
            n += 1;
        }
        if iy + 1 < self.ny {
            out[n] = idx + self.nx;
            n += 1;
        }
        n
    }
}

fn wall_clearance(w: &Workspace, p: Point) -> f64 {
    w.walls
        .iter()
        .map(|s| s.distance_to_point(p))
        .fold(f64::INFINITY, f64::min)
}

/// Occupancy bitmap for one fixed moving radius and obstacle set.
#[derive(Debug, Clone)]
pub struct GridOccupancy {
    geom: GridGeom,
    free: Vec<bool>,
}

impl GridOccupancy {
    /// Lays out the grid over the query's workspace (including its start and
    /// goal) and marks every cell whose center keeps `moving_radius` of
    /// clearance from all obstacles and walls. Tangency is free.
    ///
    /// Wall clearance is eased near the endpoints: cells inside the
    /// workspace within one moving radius of the start or goal only need to
    /// clear the obstacle discs. The moving disc is an over-approximation
    /// of a hand that grips the object from the aisle side, so a pose close
    /// to a wall is still graspable; the easing lets the disc escape the
    /// wall margin the way a local steering method would, without ever
    /// crossing a wall (cells beyond the walls are never eased). The query's
    /// explicit `eased` zones are applied the same way, each at its own
    /// recorded radius.
    pub fn build(q: &CorridorQuery, resolution: f64) -> Result<GridOccupancy, CorridorError> {
        let geom = GridGeom::over(q.workspace, &[q.start, q.goal], resolution)?;
        let mut free = vec![false; geom.cells()];
        for (idx, slot) in free.iter_mut().enumerate() {
            let c = geom.center_of(idx);
            let near_obstacle = q
                .obstacles
                .iter()
                .any(|o| c.distance(o.center) - o.radius < q.moving_radius);
            if near_obstacle {
                continue;
            }
            *slot = wall_clearance(q.workspace, c) >= q.moving_radius
                || (q.workspace.extent.contains(c)
                    && (c.distance(q.start) <= q.moving_radius
                        || c.distance(q.goal) <= q.moving_radius
                        || q.eased.iter().any(|z| c.distance(z.center) <= z.radius)));
        }
        Ok(GridOccupancy { geom, free })
    }

    pub fn resolution(&self) -> f64 {
        self.geom.resolution
    }

    /// Whether the cell containing `p` is free. Points outside the grid are
    /// not free.
    pub fn is_free_at(&self, p: Point) -> bool {
        self.geom.cell_of(p).map(|i| self.free[i]).unwrap_or(false)
    }

    /// Flood fill: true when the cells of `a` and `b` are both free and
    /// 4-connected through free cells.
    pub fn connected(&self, a: Point, b: Point) -> bool {
        let (sa, sb) = match (self.geom.cell_of(a), self.geom.cell_of(b)) {
            (Some(sa), Some(sb)) => (sa, sb),
            _ => return false,
        };
        if !self.free[sa] || !self.free[sb] {
            return false;
        }
        if sa == sb {
            return true;
        }
        let mut seen = vec![false; self.free.len()];
        let mut queue = VecDeque::new();
        seen[sa] = true;
        queue.push_back(sa);
        let mut nbuf = [0usize; 4];
        while let Some(idx) = queue.pop_front() {
            if idx == sb {
                return true;
            }
            let n = self.geom.neighbors4(idx, &mut nbuf);
            for &nb in &nbuf[..n] {
                if self.free[nb] && !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        false
    }

    /// Shortest free path from `a` to `b` under 8-connected moves, as a
    /// polyline of cell centers with the exact endpoints substituted at the
    /// ends. Step costs 5 (orthogonal) and 7 (diagonal) approximate Euclidean
    /// length while keeping the search integral and deterministic.
    pub fn shortest_path(&self, a: Point, b: Point) -> Option<Vec<Point>> {
        let (sa, sb) = match (self.geom.cell_of(a), self.geom.cell_of(b)) {
            (Some(sa), Some(sb)) => (sa, sb),
            _ => return None,
        };
        if !self.free[sa] || !self.free[sb] {
            return None;
        }
        if sa == sb {
            return Some(vec![a, b]);
        }
        let n = self.free.len();
        let mut dist = vec![u64::MAX; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[sa] = 0;
        heap.push(Reverse((0u64, sa)));
        while let Some(Reverse((d, idx))) = heap.pop() {
            if d > dist[idx] {
                continue;
            }
            if idx == sb {
                break;
            }
            let ix = (idx % self.geom.nx) as isize;
            let iy = (idx / self.geom.nx) as isize;
            // Fixed neighbor order keeps equal-cost choices deterministic.
            for (dx, dy, step) in [
                (-1isize, 0isize, 5u64),
                (1, 0, 5),
                (0, -1, 5),
                (0, 1, 5),
                (-1, -1, 7),
                (1, -1, 7),
                (-1, 1, 7),
                (1, 1, 7),
            ] {
                let (jx, jy) = (ix + dx, iy + dy);
                if jx < 0 || jy < 0 || jx as usize >= self.geom.nx || jy as usize >= self.geom.ny {
                    continue;
                }
                let j = jy as usize * self.geom.nx + jx as usize;
                if !self.free[j] {
                    continue;
                }
                let nd = d + step;
                if nd < dist[j] {
                    dist[j] = nd;
                    prev[j] = idx;
                    heap.push(Reverse((nd, j)));
                }
            }
        }
        if dist[sb] == u64::MAX {
            return None;
        }
        let mut cells = vec![sb];
        let mut cur = sb;
        while cur != sa {
            cur = prev[cur];
            cells.push(cur);
        }
        cells.reverse();
        let mut path: Vec<Point> = cells.iter().map(|&i| self.geom.center_of(i)).collect();
        path[0] = a;
        let last = path.len() - 1;
        path[last] = b;
        Some(path)
    }
}

/// Decides one corridor query on a fresh grid of the given resolution.
pub fn corridor_exists(q: &CorridorQuery, resolution: f64) -> Result<bool, CorridorError> {
    Ok(GridOccupancy::build(q, resolution)?.connected(q.start, q.goal))
}

/// Whether the hand can reach the pose `p` from the robot home. Any obstacle
/// disc centered at `p` is the object being reached for and is dropped from
/// the obstacle set.
pub fn point_accessible(
    p: Point,
    moving_radius: f64,
    obstacles: &[Disc],
    workspace: &Workspace,
    resolution: f64,
) -> Result<bool, CorridorError> {
    let rest: Vec<Disc> = obstacles
        .iter()
        .filter(|o| o.center.distance_sq(p) > 1e-18)
        .copied()
        .collect();
    let q = CorridorQuery {
        moving_radius,
        start: workspace.robot_home,
        goal: p,
        obstacles: &rest,
        workspace,
        eased: &[],
    };
    corridor_exists(&q, resolution)
}

/// How many nearest obstacle clearances each cell keeps. Three distinct
/// owners are enough to answer queries that exclude up to two objects.
const NEAR_K: usize = 3;

/// Clearance grid shared across many corridor queries over one scene.
///
/// Graph construction asks hundreds of corridor questions that differ only in
/// which two objects are ignored; this stores, per cell, the wall clearance
/// and the three smallest object clearances with distinct owners, so each
/// query is a flood fill with no per-cell geometry.
#[derive(Debug, Clone)]
pub struct ClearanceField {
    geom: GridGeom,
    extent: Rect,
    wall: Vec<f64>,
    near: Vec<[(f64, ObjectId); NEAR_K]>,
    /// Cells inside explicitly eased zones (empty unless [`Self::with_eased`]
    /// was called); their wall clearance is forgiven at any query radius.
    eased: Vec<bool>,
}

impl ClearanceField {
    pub fn build(
        workspace: &Workspace,
        objects: &[ObjectSpec],
        resolution: f64,
    ) -> Result<ClearanceField, CorridorError> {
        let geom = GridGeom::over(workspace, &[], resolution)?;
        let cells = geom.cells();
        let mut wall = vec![0.0; cells];
        let mut near = vec![[(f64::INFINITY, ObjectId::MAX); NEAR_K]; cells];
        for idx in 0..cells {
            let c = geom.center_of(idx);
            wall[idx] = wall_clearance(workspace, c);
            let slots = &mut near[idx];
            for o in objects {
                let clear = c.distance(o.center) - o.radius;
                if clear >= slots[NEAR_K - 1].0 {
                    continue;
                }
                let mut k = NEAR_K - 1;
                slots[k] = (clear, o.id);
                while k > 0 && slots[k].0 < slots[k - 1].0 {
                    slots.swap(k, k - 1);
                    k -= 1;
                }
            }
        }
        Ok(ClearanceField {
            geom,
            extent: workspace.extent,
            wall,
            near,
            eased: vec![false; cells],
        })
    }

    /// Marks the given zones as eased, like a [`CorridorQuery`]'s `eased`
    /// list: cells inside the workspace and inside any zone keep their wall
    /// clearance forgiven for every subsequent [`Self::corridor`] call.
    pub fn with_eased(mut self, zones: &[Disc]) -> ClearanceField {
        for (idx, slot) in self.eased.iter_mut().enumerate() {
            let c = self.geom.center_of(idx);
            *slot = self.extent.contains(c)
                && zones.iter().any(|z| c.distance(z.center) <= z.radius);
        }
        self
    }

    /// Clearance of the cell center from every object not in `exclude`.
    fn object_clearance(&self, idx: usize, exclude: &[ObjectId]) -> f64 {
        debug_assert!(exclude.len() < NEAR_K);
        for &(d, owner) in &self.near[idx] {
            if !exclude.contains(&owner) {
                return d;
            }
        }
        f64::INFINITY
    }

    /// Clearance of the cell center from walls and from every object not in
    /// `exclude`.
    fn clearance(&self, idx: usize, exclude: &[ObjectId]) -> f64 {
        self.wall[idx].min(self.object_clearance(idx, exclude))
    }

    /// Corridor existence for a disc of `radius`, ignoring the objects in
    /// `exclude` (at most two: the endpoints of a graph edge). Applies the
    /// same endpoint wall easing as [`GridOccupancy::build`], plus any zones
    /// installed by [`Self::with_eased`].
    pub fn corridor(&self, radius: f64, a: Point, b: Point, exclude: &[ObjectId]) -> bool {
        let (sa, sb) = match (self.geom.cell_of(a), self.geom.cell_of(b)) {
            (Some(sa), Some(sb)) => (sa, sb),
            _ => return false,
        };
        let free = |idx: usize| {
            if self.object_clearance(idx, exclude) < radius {
                return false;
            }
            if self.wall[idx] >= radius || self.eased[idx] {
                return true;
            }
            let c = self.geom.center_of(idx);
            self.extent.contains(c) && (c.distance(a) <= radius || c.distance(b) <= radius)
        };
        if !free(sa) || !free(sb) {
            return false;
        }
        if sa == sb {
            return true;
        }
        let mut seen = vec![false; self.geom.cells()];
        let mut queue = VecDeque::new();
        seen[sa] = true;
        queue.push_back(sa);
        let mut nbuf = [0usize; 4];
        while let Some(idx) = queue.pop_front() {
            if idx == sb {
                return true;
            }
            let n = self.geom.neighbors4(idx, &mut nbuf);
            for &nb in &nbuf[..n] {
                if !seen[nb] && free(nb) {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        false
    }

    /// The widest-corridor radius between two poses: the maximum over paths
    /// of the minimum cell clearance along the path. `-inf` when either pose
    /// is off the grid. [`ClearanceField::corridor`] answers true for radii
    /// up to this value; near wall-adjacent endpoints it can answer true a
    /// little beyond it, because this maximin does not model the endpoint
    /// wall easing that `corridor` applies.
    pub fn bottleneck(&self, a: Point, b: Point, exclude: &[ObjectId]) -> f64 {
        let (sa, sb) = match (self.geom.cell_of(a), self.geom.cell_of(b)) {
            (Some(sa), Some(sb)) => (sa, sb),
            _ => return f64::NEG_INFINITY,
        };
        let n = self.geom.cells();
        let mut best = vec![f64::NEG_INFINITY; n];
        let mut heap: BinaryHeap<(OrdF64, Reverse<usize>)> = BinaryHeap::new();
        best[sa] = self.clearance(sa, exclude);
        heap.push((OrdF64(best[sa]), Reverse(sa)));
        let mut nbuf = [0usize; 4];
        while let Some((OrdF64(width), Reverse(idx))) = heap.pop() {
            if width < best[idx] {
                continue;
            }
            if idx == sb {
                return width;
            }
            let k = self.geom.neighbors4(idx, &mut nbuf);
            for &nb in &nbuf[..k] {
                let w = width.min(self.clearance(nb, exclude));
                if w > best[nb] {
                    best[nb] = w;
                    heap.push((OrdF64(w), Reverse(nb)));
                }
            }
        }
        best[sb]
    }
}

/// Total order on f64 for heap keys. Clearances are never NaN.
#[derive(PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GraspedRadius;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_workspace() -> Workspace {
        Workspace::new(0.9, 0.45, Point::new(0.45, -0.1), 0.05, 0.005).unwrap()
    }

    fn obj(id: ObjectId, x: f64, y: f64, r: f64) -> ObjectSpec {
        ObjectSpec {
            id,
            center: Point::new(x, y),
            radius: r,
            height: 0.065,
            is_target: false,
            hidden: false,
        }
    }

    #[test]
    fn rejects_bad_resolution() {
        let w = sample_workspace();
        let q = CorridorQuery {
            moving_radius: 0.05,
            start: Point::new(0.2, 0.2),
            goal: Point::new(0.7, 0.2),
            obstacles: &[],
            workspace: &w,
            eased: &[],
        };
        assert!(matches!(
            corridor_exists(&q, 0.0),
            Err(CorridorError::BadResolution(_))
        ));
        assert!(matches!(
            corridor_exists(&q, 0.5),
            Err(CorridorError::BadResolution(_))
        ));
    }

    #[test]
    fn empty_workspace_is_traversable() {
        let w = sample_workspace();
        let q = CorridorQuery {
            moving_radius: 0.085,
            start: w.robot_home,
            goal: Point::new(0.45, 0.3),
            obstacles: &[],
            workspace: &w,
            eased: &[],
        };
        assert!(corridor_exists(&q, DEFAULT_GRID_RESOLUTION).unwrap());
    }

    #[test]
    fn pose_in_collision_is_unreachable_not_an_error() {
        let w = sample_workspace();
        let blocker = Disc::new(Point::new(0.45, 0.3), 0.04);
        let q = CorridorQuery {
            moving_radius: 0.05,
            start: w.robot_home,
            goal: Point::new(0.46, 0.3), // inside the inflated blocker
            obstacles: &[blocker],
            workspace: &w,
            eased: &[],
        };
        assert!(!corridor_exists(&q, DEFAULT_GRID_RESOLUTION).unwrap());
    }

    /// Two bulky obstacles leave a vertical slot exactly as wide as the
    /// moving disc, with the slot centerline aligned on a grid column; both
    /// obstacles reach past the side walls so there is no way around. The
    /// tangent slot must count as passable, and narrowing it by 2 mm must
    /// close it.
    #[test]
    fn tangent_slot_is_passable_and_narrower_is_not() {
        let w = sample_workspace();
        let radius = 0.05;
        // Grid origin is at -GRID_APRON, so centers sit at -0.0575 + 0.005 k;
        // x = 0.2025 is the center of column k = 52.
        let slot_x = 0.2025;
        let start = Point::new(slot_x, 0.05);
        let goal = Point::new(slot_x, 0.35);
        let build = |squeeze: f64| {
            let left = Disc::new(Point::new(slot_x - 0.15 - radius + squeeze, 0.2), 0.15);
            let right = Disc::new(Point::new(slot_x + 0.35 + radius - squeeze, 0.2), 0.35);
            [left, right]
        };
        let obstacles = build(0.0);
        let q = CorridorQuery {
            moving_radius: radius,
            start,
            goal,
            obstacles: &obstacles,
            workspace: &w,
            eased: &[],
        };
        assert!(corridor_exists(&q, DEFAULT_GRID_RESOLUTION).unwrap());
        let narrowed = build(0.001);
        let q = CorridorQuery {
            moving_radius: radius,
            start,
            goal,
            obstacles: &narrowed,
            workspace: &w,
            eased: &[],
        };
        assert!(!corridor_exists(&q, DEFAULT_GRID_RESOLUTION).unwrap());
    }

    #[test]
    fn walls_block_reentry_from_outside() {
        let w = sample_workspace();
        // A bar of obstacles sealing the whole opening: the only way from the
        // home pose to the goal would be across a wall, which must not work.
        let bar: Vec<Disc> = (0..6)
            .map(|i| Disc::new(Point::new(0.05 + 0.16 * i as f64, 0.08), 0.08))
            .collect();
        let q = CorridorQuery {
            moving_radius: 0.05,
            start: w.robot_home,
            goal: Point::new(0.45, 0.35),
            obstacles: &bar,
            workspace: &w,
            eased: &[],
        };
        assert!(!corridor_exists(&q, DEFAULT_GRID_RESOLUTION).unwrap());
    }

    #[test]
    fn symmetry_and_monotonicity_under_added_obstacles() {
        let w = sample_workspace();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..60 {
            let mut obstacles: Vec<Disc> = (0..rng.gen_range(0..8))
                .map(|_| {
                    Disc::new(
                        Point::new(rng.gen_range(0.05..0.85), rng.gen_range(0.05..0.4)),
                        rng.gen_range(0.02..0.06),
                    )
                })
                .collect();
            let start = Point::new(rng.gen_range(0.05..0.85), rng.gen_range(0.05..0.4));
            let goal = Point::new(rng.gen_range(0.05..0.85), rng.gen_range(0.05..0.4));
            let radius = rng.gen_range(0.02..0.09);
            let q = CorridorQuery {
                moving_radius: radius,
                start,
                goal,
                obstacles: &obstacles,
                workspace: &w,
                eased: &[],
            };
            let forward = corridor_exists(&q, 0.01).unwrap();
            let q_rev = CorridorQuery {
                moving_radius: radius,
                start: goal,
                goal: start,
                obstacles: &obstacles,
                workspace: &w,
                eased: &[],
            };
            assert_eq!(forward, corridor_exists(&q_rev, 0.01).unwrap());
            obstacles.push(Disc::new(
                Point::new(rng.gen_range(0.05..0.85), rng.gen_range(0.05..0.4)),
                rng.gen_range(0.02..0.06),
            ));
            let q_more = CorridorQuery {
                moving_radius: radius,
                start,
                goal,
                obstacles: &obstacles,
                workspace: &w,
                eased: &[],
            };
            let after = corridor_exists(&q_more, 0.01).unwrap();
            assert!(!(after && !forward), "adding an obstacle opened a corridor");
        }
    }

    /// A packed front row whose gaps are narrower than the grasped envelope
    /// makes the rear object inaccessible; removing one front object opens it.
    #[test]
    fn packed_front_row_blocks_rear_object() {
        let w = sample_workspace();
        let rear = obj(9, 0.45, 0.35, 0.03);
        let row: Vec<ObjectSpec> = (0..5)
            .map(|i| obj(i, 0.09 + 0.18 * i as f64, 0.15, 0.03))
            .collect();
        let moving = GraspedRadius::new(rear.radius, w.robot_radius, w.safety_margin).value();
        let mut discs: Vec<Disc> = row.iter().map(|o| o.footprint()).collect();
        discs.push(rear.footprint());
        assert!(
            !point_accessible(rear.center, moving, &discs, &w, DEFAULT_GRID_RESOLUTION).unwrap()
        );
        let mut open: Vec<Disc> = row
            .iter()
            .filter(|o| o.id != 2)
            .map(|o| o.footprint())
            .collect();
        open.push(rear.footprint());
        assert!(point_accessible(rear.center, moving, &open, &w, DEFAULT_GRID_RESOLUTION).unwrap());
    }

    #[test]
    fn clearance_field_matches_fresh_grids() {
        let w = sample_workspace();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..25 {
            let objects: Vec<ObjectSpec> = (0..6)
                .map(|i| {
                    obj(
                        i,
                        rng.gen_range(0.08..0.82),
                        rng.gen_range(0.08..0.38),
                        rng.gen_range(0.02..0.04),
                    )
                })
                .collect();
            let field = ClearanceField::build(&w, &objects, 0.01).unwrap();
            for _ in 0..6 {
                let i = rng.gen_range(0..objects.len());
                let j = rng.gen_range(0..objects.len());
                if i == j {
                    continue;
                }
                let radius = rng.gen_range(0.03..0.09);
                let exclude = [objects[i].id, objects[j].id];
                let rest: Vec<Disc> = objects
                    .iter()
                    .filter(|o| !exclude.contains(&o.id))
                    .map(|o| o.footprint())
                    .collect();
                let q = CorridorQuery {
                    moving_radius: radius,
                    start: objects[i].center,
                    goal: objects[j].center,
                    obstacles: &rest,
                    workspace: &w,
                    eased: &[],
                };
                assert_eq!(
                    field.corridor(radius, objects[i].center, objects[j].center, &exclude),
                    corridor_exists(&q, 0.01).unwrap()
                );
            }
        }
    }

    #[test]
    fn bottleneck_agrees_with_corridor_threshold() {
        let w = sample_workspace();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut upper_checked = 0;
        for _ in 0..20 {
            let objects: Vec<ObjectSpec> = (0..5)
                .map(|i| {
                    obj(
                        i,
                        rng.gen_range(0.08..0.82),
                        rng.gen_range(0.08..0.38),
                        rng.gen_range(0.02..0.04),
                    )
                })
                .collect();
            let field = ClearanceField::build(&w, &objects, 0.01).unwrap();
            let a = w.robot_home;
            let b = objects[0].center;
            let width = field.bottleneck(a, b, &[objects[0].id]);
            assert!(width.is_finite());
            // Easing only adds freedom, so the lower side always holds.
            assert!(field.corridor(width - 1e-9, a, b, &[objects[0].id]));
            // Above the bottleneck the corridor must vanish, except where the
            // endpoint easing can fire. When both endpoints clear the walls
            // by twice the probe radius, every cell of either easing zone is
            // already wall-free at that radius, the easing is a no-op, and
            // the threshold is exact.
            let margin = 2.0 * (width + 1e-9) + 0.02;
            if wall_clearance(&w, a) >= margin && wall_clearance(&w, b) >= margin {
                assert!(!field.corridor(width + 1e-9, a, b, &[objects[0].id]));
                upper_checked += 1;
            }
        }
        assert!(upper_checked >= 6, "only {upper_checked} wall-distant scenes");
    }

    /// A pose closer to a wall than the moving radius is still reachable:
    /// the wall margin is eased near corridor endpoints, because a disc that
    /// over-approximates the hand can stand there and slide out sideways.
    /// The easing never lets a corridor start beyond a wall.
    #[test]
    fn wall_adjacent_pose_is_reachable_but_not_through_the_wall() {
        let w = sample_workspace();
        let inside = Point::new(0.45, 0.40); // 0.05 m from the back wall
        let q = CorridorQuery {
            moving_radius: 0.09,
            start: w.robot_home,
            goal: inside,
            obstacles: &[],
            workspace: &w,
            eased: &[],
        };
        assert!(corridor_exists(&q, DEFAULT_GRID_RESOLUTION).unwrap());

        let beyond = Point::new(0.45, 0.50); // 0.05 m behind the back wall
        let q = CorridorQuery {
            moving_radius: 0.09,
            start: w.robot_home,
            goal: beyond,
            obstacles: &[],
            workspace: &w,
            eased: &[],
        };
        assert!(!corridor_exists(&q, DEFAULT_GRID_RESOLUTION).unwrap());

        let field = ClearanceField::build(&w, &[], 0.01).unwrap();
        assert!(field.corridor(0.09, w.robot_home, inside, &[]));
        assert!(!field.corridor(0.09, w.robot_home, beyond, &[]));
    }

    #[test]
    fn shortest_path_stays_free_and_reaches_goal() {
        let w = sample_workspace();
        let obstacles = [
            Disc::new(Point::new(0.3, 0.2), 0.06),
            Disc::new(Point::new(0.55, 0.25), 0.05),
        ];
        let q = CorridorQuery {
            moving_radius: w.robot_radius,
            start: w.robot_home,
            goal: Point::new(0.45, 0.38),
            obstacles: &obstacles,
            workspace: &w,
            eased: &[],
        };
        let grid = GridOccupancy::build(&q, DEFAULT_GRID_RESOLUTION).unwrap();
        let path = grid.shortest_path(q.start, q.goal).unwrap();
        assert_eq!(path[0], q.start);
        assert_eq!(*path.last().unwrap(), q.goal);
        for p in &path[1..path.len() - 1] {
            assert!(grid.is_free_at(*p));
        }
        // Consecutive waypoints stay within one diagonal cell step, plus the
        // half-cell slack of the substituted exact endpoints.
        for pair in path.windows(2) {
            assert!(pair[0].distance(pair[1]) <= DEFAULT_GRID_RESOLUTION * 2.2);
        }
    }
}
