//! Planar primitives for the decluttering domain.
//!
//! Objects are upright cylinders resting on a horizontal surface, the hand
//! approaches horizontally, and nothing ever moves vertically inside the
//! workspace, so every collision question reduces to discs and segments in the
//! plane. Heights are kept on [`ObjectSpec`] only for the occlusion model.
//!
//! All lengths are in meters. Throughout the crate, tangency counts as
//! collision free: two discs overlap only when their center distance is
//! strictly below the sum of radii.

use thiserror::Error;

/// Identifier of a movable object within one scene.
pub type ObjectId = u32;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("workspace extent must be positive, got {length} x {width}")]
    BadExtent { length: f64, width: f64 },
    #[error("robot radius and safety margin must be positive, got r_r={robot_radius}, r_s={safety_margin}")]
    BadRadii { robot_radius: f64, safety_margin: f64 },
    #[error("robot home {0:?} must lie outside the workspace, beyond the open edge (y < 0)")]
    RobotHomeInside(Point),
}

/// A point in the workspace plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Footprint of a cylinder, or the swept disc of the hand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Point,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Point, radius: f64) -> Self {
        Disc { center, radius }
    }
}

/// Closed segment between two points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    /// Distance from `p` to the closest point of the segment.
    pub fn distance_to_point(&self, p: Point) -> f64 {
        let dx = self.b.x - self.a.x;
        let dy = self.b.y - self.a.y;
        let len_sq = dx * dx + dy * dy;
        if len_sq == 0.0 {
            return self.a.distance(p);
        }
        let t = ((p.x - self.a.x) * dx + (p.y - self.a.y) * dy) / len_sq;
        let t = t.clamp(0.0, 1.0);
        let closest = Point::new(self.a.x + t * dx, self.a.y + t * dy);
        closest.distance(p)
    }
}

/// Axis-aligned rectangle given by its min and max corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Rect { min, max }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// One movable cylinder.
///
/// `hidden` marks objects that the robot has not seen at the start of an
/// episode; it is an annotation of the initial belief, not of the physics.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub id: ObjectId,
    pub center: Point,
    pub radius: f64,
    pub height: f64,
    pub is_target: bool,
    pub hidden: bool,
}

impl ObjectSpec {
    pub fn footprint(&self) -> Disc {
        Disc::new(self.center, self.radius)
    }
}

/// The shelf surface: a rectangle closed by walls on three sides and open
/// along the bottom edge (`y = 0`), where the robot reaches in from.
///
/// The extent always has its min corner at the origin. The robot home pose is
/// the disposal pose as well: relocated objects are carried there and leave
/// the workspace for good.
#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    pub extent: Rect,
    /// The side the robot enters through, from `(0, 0)` to `(length, 0)`.
    pub open_edge: Segment,
    /// The three closed sides: left, back, right.
    pub walls: [Segment; 3],
    pub robot_home: Point,
    pub robot_radius: f64,
    pub safety_margin: f64,
}

impl Workspace {
    /// Builds a workspace of the given extent. `length` runs along x, `width`
    /// along y; the open edge is the full `y = 0` side and `robot_home` must
    /// lie beyond it.
    pub fn new(
        length: f64,
        width: f64,
        robot_home: Point,
        robot_radius: f64,
        safety_margin: f64,
    ) -> Result<Self, GeometryError> {
        if !(length > 0.0 && width > 0.0) {
            return Err(GeometryError::BadExtent { length, width });
        }
        if !(robot_radius > 0.0 && safety_margin > 0.0) {
            return Err(GeometryError::BadRadii {
                robot_radius,
                safety_margin,
            });
        }
        if robot_home.y >= 0.0 {
            return Err(GeometryError::RobotHomeInside(robot_home));
        }
        let o = Point::new(0.0, 0.0);
        let bl = Point::new(0.0, width);
        let br = Point::new(length, width);
        let r = Point::new(length, 0.0);
        Ok(Workspace {
            extent: Rect::new(o, br),
            open_edge: Segment::new(o, r),
            walls: [
                Segment::new(o, bl),
                Segment::new(bl, br),
                Segment::new(br, r),
            ],
            robot_home,
            robot_radius,
            safety_margin,
        })
    }

    /// Where relocated objects are brought: the robot home pose.
    pub fn disposal_pose(&self) -> Point {
        self.robot_home
    }

    pub fn length(&self) -> f64 {
        self.extent.width()
    }

    pub fn width(&self) -> f64 {
        self.extent.height()
    }
}

/// Radius of the swept disc of the hand while it carries an object: the
/// object radius plus the hand radius plus the safety margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspedRadius(f64);

impl GraspedRadius {
    pub fn new(object_radius: f64, robot_radius: f64, safety_margin: f64) -> Self {
        GraspedRadius(object_radius + robot_radius + safety_margin)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// True when the discs properly intersect. Tangent discs do not overlap.
pub fn disc_overlaps(a: Disc, b: Disc) -> bool {
    let r = a.radius + b.radius;
    a.center.distance_sq(b.center) < r * r
}

/// True when the disc lies entirely inside the workspace rectangle, walls and
/// open edge included. Touching the boundary is allowed.
pub fn disc_in_workspace(d: Disc, w: &Workspace) -> bool {
    let e = w.extent;
    d.center.x - d.radius >= e.min.x
        && d.center.x + d.radius <= e.max.x
        && d.center.y - d.radius >= e.min.y
        && d.center.y + d.radius <= e.max.y
}

/// Signed clearance between a segment and a disc: the distance from the
/// segment to the disc center minus the radius. Negative when they intersect,
/// zero when tangent.
pub fn segment_disc_clearance(s: Segment, d: Disc) -> f64 {
    s.distance_to_point(d.center) - d.radius
}
