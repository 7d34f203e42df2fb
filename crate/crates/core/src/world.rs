//! Ground truth and belief for one retrieval episode.
//!
//! [`WorldState`] owns the remaining objects (ground truth), which of them
//! the robot has detected so far (belief), and the camera that separates the
//! two. Planners read the belief, never the ground truth; hidden objects
//! only enter the picture through [`WorldState::sense`].
//!
//! Detection is cumulative: once an object has been seen it stays in the
//! belief even if a later rearrangement occludes it again.

use crate::geometry::{Disc, GraspedRadius, ObjectId, ObjectSpec, Point, Workspace};
use crate::occlusion::{detected_objects, CameraModel, OcclusionError};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("duplicate object id {0}")]
    DuplicateId(ObjectId),
    #[error("no object is marked as the target")]
    NoTarget,
    #[error("objects {0} and {1} are both marked as the target")]
    MultipleTargets(ObjectId, ObjectId),
    #[error("unknown object id {0}")]
    UnknownObject(ObjectId),
}

#[derive(Debug, Clone)]
pub struct WorldState {
    objects: BTreeMap<ObjectId, ObjectSpec>,
    detected: BTreeSet<ObjectId>,
    removed: Vec<ObjectId>,
    /// Pose of every extracted object, with the largest radius that was
    /// still in the workspace at extraction time. See [`Self::vacated_zones`].
    vacated: Vec<(Point, f64)>,
    target: ObjectId,
    pub camera: CameraModel,
}

impl WorldState {
    /// Builds an episode state. Objects flagged `hidden` start outside the
    /// belief; exactly one object must be flagged as the target.
    pub fn new(
        objects: impl IntoIterator<Item = ObjectSpec>,
        camera: CameraModel,
    ) -> Result<Self, WorldError> {
        let mut map = BTreeMap::new();
        let mut detected = BTreeSet::new();
        let mut target = None;
        for spec in objects {
            if spec.is_target {
                match target {
                    None => target = Some(spec.id),
                    Some(first) => return Err(WorldError::MultipleTargets(first, spec.id)),
                }
            }
            if !spec.hidden {
                detected.insert(spec.id);
            }
            let id = spec.id;
            if map.insert(id, spec).is_some() {
                return Err(WorldError::DuplicateId(id));
            }
        }
        let target = target.ok_or(WorldError::NoTarget)?;
        Ok(WorldState {
            objects: map,
            detected,
            removed: Vec::new(),
            vacated: Vec::new(),
            target,
            camera,
        })
    }

    pub fn target_id(&self) -> ObjectId {
        self.target
    }

    /// The target is known to the planner (it may still be remaining or
    /// already retrieved).
    pub fn target_detected(&self) -> bool {
        self.detected.contains(&self.target)
    }

    pub fn target_remaining(&self) -> bool {
        self.objects.contains_key(&self.target)
    }

    pub fn spec(&self, id: ObjectId) -> Option<&ObjectSpec> {
        self.objects.get(&id)
    }

    /// All objects still in the workspace, in id order.
    pub fn remaining(&self) -> impl Iterator<Item = &ObjectSpec> {
        self.objects.values()
    }

    pub fn remaining_count(&self) -> usize {
        self.objects.len()
    }

    /// The planner's view of the scene: detected objects still in the
    /// workspace, in id order.
    pub fn detected_specs(&self) -> Vec<ObjectSpec> {
        self.objects
            .values()
            .filter(|o| self.detected.contains(&o.id))
            .cloned()
            .collect()
    }

    pub fn detected_ids(&self) -> &BTreeSet<ObjectId> {
        &self.detected
    }

    /// Extraction order so far, including the target if it has been grasped.
    pub fn removed(&self) -> &[ObjectId] {
        &self.removed
    }

    /// Takes an object out of the workspace (and out of everything it was
    /// occluding or blocking). The vacated pose is remembered together with
    /// the largest radius present at this moment, which bounds the swept
    /// radius of every corridor certified through the slot so far.
    pub fn remove(&mut self, id: ObjectId) -> Result<ObjectSpec, WorldError> {
        if !self.objects.contains_key(&id) {
            return Err(WorldError::UnknownObject(id));
        }
        let largest = self.objects.values().map(|o| o.radius).fold(0.0, f64::max);
        let spec = self.objects.remove(&id).expect("presence checked above");
        self.removed.push(id);
        self.vacated.push((spec.center, largest));
        Ok(spec)
    }

    /// The easing zones left behind by extractions: one disc per vacated
    /// slot, sized to the grasped envelope that was possible when the slot
    /// emptied. Corridors certified earlier ran through these zones at most
    /// at that radius, and later queries only ever shrink their radii (the
    /// largest remaining object can only get smaller), so a passage the
    /// hand has driven once stays open in every later graph and oracle
    /// query. Without this, taking an object out of a wall-hugging slot
    /// could disconnect poses that were reachable a moment before.
    pub fn vacated_zones(&self, workspace: &Workspace) -> Vec<Disc> {
        self.vacated
            .iter()
            .map(|&(center, largest)| {
                let radius =
                    GraspedRadius::new(largest, workspace.robot_radius, workspace.safety_margin)
                        .value();
                Disc::new(center, radius)
            })
            .collect()
    }

    /// One camera pass over the remaining ground truth. Newly visible
    /// objects join the belief; the return value lists them in id order.
    pub fn sense(&mut self, workspace: &Workspace) -> Result<Vec<ObjectId>, OcclusionError> {
        let scene: Vec<ObjectSpec> = self.objects.values().cloned().collect();
        let visible = detected_objects(&scene, &self.camera, workspace)?;
        let newly: Vec<ObjectId> = visible.difference(&self.detected).copied().collect();
        self.detected.extend(visible);
        Ok(newly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn camera() -> CameraModel {
        CameraModel::new(Point::new(0.45, -0.2), 0.5)
    }

    fn workspace() -> Workspace {
        Workspace::new(0.9, 0.45, Point::new(0.45, -0.1), 0.05, 0.005).unwrap()
    }

    fn obj(id: ObjectId, x: f64, y: f64, target: bool, hidden: bool) -> ObjectSpec {
        ObjectSpec {
            id,
            center: Point::new(x, y),
            radius: 0.028,
            height: 0.065,
            is_target: target,
            hidden,
        }
    }

    #[test]
    fn construction_validates_ids_and_target() {
        let cam = camera();
        let err = WorldState::new(vec![obj(1, 0.2, 0.2, false, false)], cam.clone());
        assert_eq!(err.unwrap_err(), WorldError::NoTarget);
        let err = WorldState::new(
            vec![obj(1, 0.2, 0.2, true, false), obj(1, 0.6, 0.2, false, false)],
            cam.clone(),
        );
        assert_eq!(err.unwrap_err(), WorldError::DuplicateId(1));
        let err = WorldState::new(
            vec![obj(1, 0.2, 0.2, true, false), obj(2, 0.6, 0.2, true, false)],
            cam,
        );
        assert_eq!(err.unwrap_err(), WorldError::MultipleTargets(1, 2));
    }

    #[test]
    fn hidden_objects_stay_out_of_the_belief_until_sensed() {
        let world = WorldState::new(
            vec![obj(1, 0.2, 0.2, false, false), obj(2, 0.6, 0.2, true, true)],
            camera(),
        )
        .unwrap();
        assert!(!world.target_detected());
        assert!(world.target_remaining());
        let ids: Vec<ObjectId> = world.detected_specs().iter().map(|o| o.id).collect();
        assert_eq!(ids, vec![1]);
        assert_eq!(world.remaining_count(), 2);
    }

    /// Removing the only occluder makes the object behind it visible on the
    /// next sense, and the belief keeps it even if the view closes again.
    #[test]
    fn sense_reveals_cumulatively() {
        let front = obj(1, 0.45, 0.1, false, false);
        let back = obj(2, 0.45, 0.3, true, true);
        let mut world = WorldState::new(vec![front, back], camera()).unwrap();
        let w = workspace();
        assert_eq!(world.sense(&w).unwrap(), Vec::<ObjectId>::new());
        world.remove(1).unwrap();
        assert_eq!(world.sense(&w).unwrap(), vec![2]);
        assert!(world.target_detected());
        // A second pass finds nothing new.
        assert_eq!(world.sense(&w).unwrap(), Vec::<ObjectId>::new());
    }

    #[test]
    fn removal_tracks_order_and_rejects_unknown_ids() {
        let mut world = WorldState::new(
            vec![
                obj(1, 0.2, 0.2, false, false),
                obj(2, 0.45, 0.2, false, false),
                obj(3, 0.7, 0.2, true, false),
            ],
            camera(),
        )
        .unwrap();
        world.remove(2).unwrap();
        world.remove(3).unwrap();
        assert_eq!(world.removed(), &[2, 3]);
        assert!(!world.target_remaining());
        assert!(world.target_detected(), "belief outlives removal");
        assert_eq!(world.remove(2).unwrap_err(), WorldError::UnknownObject(2));
        let ids: Vec<ObjectId> = world.remaining().map(|o| o.id).collect();
        assert_eq!(ids, vec![1]);
    }

    /// Each vacated slot keeps the grasped envelope of its extraction
    /// moment: the big object counts while present (even for the removal of
    /// a small one), and stops counting once it is the thing removed.
    #[test]
    fn vacated_zones_freeze_the_extraction_time_envelope() {
        let mut big = obj(1, 0.2, 0.2, false, false);
        big.radius = 0.04;
        let mut small = obj(2, 0.5, 0.2, false, false);
        small.radius = 0.02;
        let mut last = obj(3, 0.7, 0.2, true, false);
        last.radius = 0.03;
        let mut world = WorldState::new(vec![big, small, last], camera()).unwrap();
        let w = workspace();
        assert!(world.vacated_zones(&w).is_empty());

        world.remove(2).unwrap();
        world.remove(1).unwrap();
        world.remove(3).unwrap();
        let zones = world.vacated_zones(&w);
        assert_eq!(zones.len(), 3);
        // robot radius 0.05 + safety margin 0.005 on top of the largest
        // radius remaining at each extraction: 0.04, 0.04, then 0.03.
        assert_eq!(zones[0].center, Point::new(0.5, 0.2));
        assert!((zones[0].radius - 0.095).abs() < 1e-12);
        assert_eq!(zones[1].center, Point::new(0.2, 0.2));
        assert!((zones[1].radius - 0.095).abs() < 1e-12);
        assert_eq!(zones[2].center, Point::new(0.7, 0.2));
        assert!((zones[2].radius - 0.085).abs() < 1e-12);
    }
}
