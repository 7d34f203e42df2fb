//! Camera shadows, detection, and the revealed-volume metric.
//!
//! The camera looks into the workspace from outside the open edge. Every
//! object casts a shadow: the part of the workspace from which the straight
//! sight line to the camera crosses the object's footprint disc. The shadow
//! begins at the disc itself and is bounded by the two rays tangent to it, so
//! its planar shape is a wedge clipped to the workspace rectangle. Hidden
//! objects are the ones whose entire boundary lies in other objects' shadows.
//!
//! Shadow volume is planar shadow area times a reference height (the mean
//! object height of the scene); it ranks candidate objects during the search
//! for an undetected target: removing the object whose disappearance uncovers
//! the most volume is the greediest way to gain information.
//!
//! Areas are computed by an angular sweep from the camera. Between any two of
//! the sweep's breakpoints (wedge boundaries, rectangle corners, field-of-view
//! limits) the shadowed radial interval varies smoothly, so a composite
//! Simpson rule over each piece converges fast. Membership tests
//! ([`ShadowRegion::contains`]) use plain segment-disc intersection and share
//! no code with the sweep, which keeps Monte-Carlo cross-checks independent.

use crate::geometry::{Disc, ObjectId, ObjectSpec, Point, Rect, Workspace};
use std::collections::BTreeSet;
use thiserror::Error;

/// Default number of boundary samples when deciding whether an object is
/// detected: one per degree.
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 360;

/// Simpson step target for the angular sweep, in radians.
const SWEEP_STEP: f64 = 2e-4;

#[derive(Debug, Error, PartialEq)]
pub enum OcclusionError {
    #[error("camera planar position {0:?} must lie outside the workspace rectangle")]
    CameraInsideWorkspace(Point),
    #[error("camera sits inside the footprint of object {0}")]
    CameraInsideObject(ObjectId),
    #[error("object {0} is not part of the given scene")]
    UnknownObject(ObjectId),
}

/// Camera pose and sensing parameters. The planar position must be outside
/// the workspace rectangle; the height is above the surface and must exceed
/// every object height (checked where scenes are loaded or generated, since
/// the planar shadow model never needs it directly).
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub planar: Point,
    pub height: f64,
    /// Field of view as a counterclockwise angle interval in radians;
    /// `None` sees in every direction.
    pub fov: Option<(f64, f64)>,
    pub boundary_samples: usize,
}

impl CameraModel {
    pub fn new(planar: Point, height: f64) -> Self {
        CameraModel {
            planar,
            height,
            fov: None,
            boundary_samples: DEFAULT_BOUNDARY_SAMPLES,
        }
    }

    fn sees_direction(&self, angle: f64) -> bool {
        match self.fov {
            None => true,
            Some((start, end)) => {
                let tau = std::f64::consts::TAU;
                let span = (end - start).rem_euclid(tau);
                let off = (angle - start).rem_euclid(tau);
                off <= span
            }
        }
    }

    fn sees_point(&self, p: Point) -> bool {
        self.fov.is_none()
            || self.sees_direction((p.y - self.planar.y).atan2(p.x - self.planar.x))
    }
}

/// One object's shadow wedge: the casting disc and the absolute angle
/// interval of its tangent rays as seen from the camera.
#[derive(Debug, Clone, Copy)]
struct Wedge {
    disc: Disc,
    lo: f64,
    hi: f64,
}

/// The workspace region hidden behind a set of objects.
#[derive(Debug, Clone)]
pub struct ShadowRegion {
    camera: CameraModel,
    extent: Rect,
    wedges: Vec<Wedge>,
    pub area: f64,
    /// `area` times the reference height used to build the region.
    pub volume: f64,
    pub reference_height: f64,
}

impl ShadowRegion {
    /// Whether `p` is hidden: inside the workspace, within the field of view,
    /// and with its sight line crossing some casting disc. A sight line that
    /// only grazes a disc tangentially does not hide the point.
    pub fn contains(&self, p: Point) -> bool {
        if !self.extent.contains(p) || !self.camera.sees_point(p) {
            return false;
        }
        let sight = crate::geometry::Segment::new(self.camera.planar, p);
        self.wedges
            .iter()
            .any(|w| crate::geometry::segment_disc_clearance(sight, w.disc) < 0.0)
    }

    /// Outline polygons of the individual wedges, clipped to the workspace,
    /// for rendering. Arcs are flattened at `arc_step` radians.
    pub fn wedge_outlines(&self, arc_step: f64) -> Vec<Vec<Point>> {
        let cam = self.camera.planar;
        let mut out = Vec::new();
        for w in &self.wedges {
            let steps = (((w.hi - w.lo) / arc_step).ceil() as usize).max(2);
            let mut near = Vec::new();
            let mut far = Vec::new();
            for k in 0..=steps {
                let ang = w.lo + (w.hi - w.lo) * k as f64 / steps as f64;
                if !self.camera.sees_direction(ang) {
                    continue;
                }
                let u = (ang.cos(), ang.sin());
                let (r0, r1) = match ray_rect(cam, u, self.extent) {
                    Some(hit) => hit,
                    None => continue,
                };
                let entry = match ray_disc_entry(cam, u, w.disc) {
                    Some(t) => t,
                    None => continue,
                };
                let lo = entry.max(r0);
                if lo >= r1 {
                    continue;
                }
                near.push(Point::new(cam.x + lo * u.0, cam.y + lo * u.1));
                far.push(Point::new(cam.x + r1 * u.0, cam.y + r1 * u.1));
            }
            if near.len() >= 2 {
                far.reverse();
                near.extend(far);
                out.push(near);
            }
        }
        out
    }
}

/// Parameters of the ray `cam + t * u` entering and leaving the rectangle,
/// or `None` when it misses. Only the part with `t > 0` counts.
fn ray_rect(cam: Point, u: (f64, f64), rect: Rect) -> Option<(f64, f64)> {
    let mut t_min = 0.0_f64;
    let mut t_max = f64::INFINITY;
    for (c, d, lo, hi) in [
        (cam.x, u.0, rect.min.x, rect.max.x),
        (cam.y, u.1, rect.min.y, rect.max.y),
    ] {
        if d.abs() < 1e-15 {
            if c < lo || c > hi {
                return None;
            }
            continue;
        }
        let (a, b) = ((lo - c) / d, (hi - c) / d);
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        t_min = t_min.max(a);
        t_max = t_max.min(b);
        if t_min >= t_max {
            return None;
        }
    }
    Some((t_min, t_max))
}

/// Parameter at which the ray enters the disc, or `None` when it misses or
/// the disc lies behind the camera. Grazing counts as entering at the tangent
/// point so the sweep integrand is continuous up to wedge boundaries.
fn ray_disc_entry(cam: Point, u: (f64, f64), disc: Disc) -> Option<f64> {
    let cx = disc.center.x - cam.x;
    let cy = disc.center.y - cam.y;
    let s = cx * u.0 + cy * u.1;
    if s <= 0.0 {
        return None;
    }
    let h_sq = (cx * cx + cy * cy) - s * s;
    let r_sq = disc.radius * disc.radius;
    if h_sq > r_sq {
        return None;
    }
    Some(s - (r_sq - h_sq).max(0.0).sqrt())
}

fn wrap_pi(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut x = a.rem_euclid(tau);
    if x > std::f64::consts::PI {
        x -= tau;
    }
    x
}

/// Builds the wedge list, or an error when the camera placement is invalid
/// with respect to the given objects.
fn wedges_for(
    objects: &[ObjectSpec],
    cam: &CameraModel,
    w: &Workspace,
) -> Result<Vec<Wedge>, OcclusionError> {
    if w.extent.contains(cam.planar) {
        return Err(OcclusionError::CameraInsideWorkspace(cam.planar));
    }
    let mut wedges = Vec::with_capacity(objects.len());
    for o in objects {
        let d = cam.planar.distance(o.center);
        if d <= o.radius {
            return Err(OcclusionError::CameraInsideObject(o.id));
        }
        let dir = (o.center.y - cam.planar.y).atan2(o.center.x - cam.planar.x);
        let half = (o.radius / d).asin();
        wedges.push(Wedge {
            disc: o.footprint(),
            lo: dir - half,
            hi: dir + half,
        });
    }
    Ok(wedges)
}

/// Shadow area of the union of the given wedges, by angular sweep.
fn union_area(wedges: &[Wedge], cam: &CameraModel, extent: Rect) -> f64 {
    if wedges.is_empty() {
        return 0.0;
    }
    // Angles are handled relative to the rectangle center direction; the
    // camera is outside the convex rectangle, so every relevant direction
    // falls in a contiguous relative interval narrower than a half turn.
    let center = Point::new(
        (extent.min.x + extent.max.x) / 2.0,
        (extent.min.y + extent.max.y) / 2.0,
    );
    let base = (center.y - cam.planar.y).atan2(center.x - cam.planar.x);
    let corners = [
        extent.min,
        Point::new(extent.max.x, extent.min.y),
        extent.max,
        Point::new(extent.min.x, extent.max.y),
    ];
    let corner_rel: Vec<f64> = corners
        .iter()
        .map(|c| wrap_pi((c.y - cam.planar.y).atan2(c.x - cam.planar.x) - base))
        .collect();
    let rect_lo = corner_rel.iter().cloned().fold(f64::INFINITY, f64::min);
    let rect_hi = corner_rel.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut breaks: Vec<f64> = Vec::new();
    breaks.push(rect_lo);
    breaks.push(rect_hi);
    breaks.extend(corner_rel.iter().cloned());
    for w in wedges {
        breaks.push(wrap_pi(w.lo - base).clamp(rect_lo, rect_hi));
        breaks.push(wrap_pi(w.hi - base).clamp(rect_lo, rect_hi));
    }
    if let Some((f_start, f_end)) = cam.fov {
        for f in [f_start, f_end] {
            let rel = wrap_pi(f - base);
            if rel > rect_lo && rel < rect_hi {
                breaks.push(rel);
            }
        }
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let shadow_len_sq = |rel: f64| -> f64 {
        let ang = base + rel;
        if !cam.sees_direction(ang) {
            return 0.0;
        }
        let u = (ang.cos(), ang.sin());
        let (r0, r1) = match ray_rect(cam.planar, u, extent) {
            Some(hit) => hit,
            None => return 0.0,
        };
        let mut entry = f64::INFINITY;
        for w in wedges {
            if let Some(t) = ray_disc_entry(cam.planar, u, w.disc) {
                entry = entry.min(t);
            }
        }
        let lo = entry.max(r0);
        if lo >= r1 {
            0.0
        } else {
            r1 * r1 - lo * lo
        }
    };

    let mut area = 0.0;
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let span = b - a;
        if span < 1e-12 {
            continue;
        }
        // Skip pieces no wedge reaches; the integrand is zero there.
        let mid = (a + b) / 2.0;
        let covered = wedges.iter().any(|w| {
            let lo = wrap_pi(w.lo - base);
            let hi = wrap_pi(w.hi - base);
            mid >= lo && mid <= hi
        });
        if !covered {
            continue;
        }
        let mut n = ((span / SWEEP_STEP).ceil() as usize).clamp(16, 4096);
        if n % 2 == 1 {
            n += 1;
        }
        let h = span / n as f64;
        let mut sum = shadow_len_sq(a) + shadow_len_sq(b);
        for k in 1..n {
            let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += weight * shadow_len_sq(a + k as f64 * h);
        }
        area += sum * h / 3.0 / 2.0;
    }
    area
}

fn region_with_reference_height(
    objects: &[ObjectSpec],
    cam: &CameraModel,
    w: &Workspace,
    reference_height: f64,
) -> Result<ShadowRegion, OcclusionError> {
    let wedges = wedges_for(objects, cam, w)?;
    let area = union_area(&wedges, cam, w.extent);
    Ok(ShadowRegion {
        camera: cam.clone(),
        extent: w.extent,
        wedges,
        area,
        volume: area * reference_height,
        reference_height,
    })
}

fn mean_height(objects: &[ObjectSpec]) -> f64 {
    if objects.is_empty() {
        return 0.0;
    }
    objects.iter().map(|o| o.height).sum::<f64>() / objects.len() as f64
}

/// The region of the workspace hidden behind the given objects. The volume
/// uses the mean height of these objects as reference height.
pub fn shadow_region(
    objects: &[ObjectSpec],
    cam: &CameraModel,
    w: &Workspace,
) -> Result<ShadowRegion, OcclusionError> {
    region_with_reference_height(objects, cam, w, mean_height(objects))
}

/// Objects with at least one visible boundary point: a boundary sample is
/// visible when it is within the field of view and no other object's disc
/// crosses its sight line.
pub fn detected_objects(
    objects: &[ObjectSpec],
    cam: &CameraModel,
    w: &Workspace,
) -> Result<BTreeSet<ObjectId>, OcclusionError> {
    // Validates camera placement against the same rules as shadow_region.
    wedges_for(objects, cam, w)?;
    let samples = cam.boundary_samples.max(1);
    let mut seen = BTreeSet::new();
    for o in objects {
        let visible = (0..samples).any(|k| {
            let ang = std::f64::consts::TAU * k as f64 / samples as f64;
            let p = Point::new(
                o.center.x + o.radius * ang.cos(),
                o.center.y + o.radius * ang.sin(),
            );
            if !cam.sees_point(p) {
                return false;
            }
            let sight = crate::geometry::Segment::new(cam.planar, p);
            objects.iter().all(|other| {
                other.id == o.id
                    || crate::geometry::segment_disc_clearance(sight, other.footprint()) >= 0.0
            })
        });
        if visible {
            seen.insert(o.id);
        }
    }
    Ok(seen)
}

/// How much shadow volume disappears when `object` is removed from the scene:
/// the shadow volume of all objects minus the shadow volume of the others.
/// Both use the full scene's mean height as reference, so candidates are
/// compared on one scale. Clamped at zero against integration noise.
pub fn revealed_volume(
    object: ObjectId,
    objects: &[ObjectSpec],
    cam: &CameraModel,
    w: &Workspace,
) -> Result<f64, OcclusionError> {
    let volumes = revealed_volumes(&[object], objects, cam, w)?;
    Ok(volumes[0].1)
}

/// Revealed volume for each candidate, sharing one full-scene sweep.
pub fn revealed_volumes(
    candidates: &[ObjectId],
    objects: &[ObjectSpec],
    cam: &CameraModel,
    w: &Workspace,
) -> Result<Vec<(ObjectId, f64)>, OcclusionError> {
    let h_ref = mean_height(objects);
    let full = region_with_reference_height(objects, cam, w, h_ref)?;
    let mut out = Vec::with_capacity(candidates.len());
    for &id in candidates {
        if !objects.iter().any(|o| o.id == id) {
            return Err(OcclusionError::UnknownObject(id));
        }
        let rest: Vec<ObjectSpec> = objects.iter().filter(|o| o.id != id).cloned().collect();
        let without = region_with_reference_height(&rest, cam, w, h_ref)?;
        out.push((id, (full.volume - without.volume).max(0.0)));
    }
    Ok(out)
}
