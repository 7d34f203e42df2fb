//! Scene files: a line-oriented text format for scenes on disk.
//!
//! Files are written in centimeters, the natural unit at shelf scale, and
//! converted to meters exactly once at load; everything downstream works in
//! meters. A file looks like:
//!
//! ```text
//! # three cylinders, one hidden
//! workspace 90 45
//! robot 45 -10 5
//! margin 0.5
//! camera 45 -20 50
//! object 1 30 20 2.5 6.5
//! object 2 45 31 3.0 6.0 hidden
//! object 3 60 20 2.5 6.2 target
//! ```
//!
//! Order of lines does not matter, `#` starts a comment, blank lines are
//! skipped. The `margin` line may be omitted (default 0.5 cm) and `fov`
//! takes two angles in degrees when the camera is not omnidirectional.
//! [`Scenario::to_text`] writes the canonical form: fixed line order,
//! objects sorted by id, six decimals. Loading a canonical file and saving
//! it again reproduces it byte for byte.

use crate::geometry::{
    disc_in_workspace, disc_overlaps, GeometryError, ObjectId, ObjectSpec, Point, Workspace,
};
use crate::occlusion::CameraModel;
use crate::world::{WorldError, WorldState};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Safety margin used when a file has no `margin` line, in meters.
const DEFAULT_SAFETY_MARGIN: f64 = 0.005;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("missing required line '{0}'")]
    Missing(&'static str),
    #[error("line {line}: second '{what}' line")]
    Duplicate { line: usize, what: &'static str },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("object {id} does not fit inside the workspace")]
    ObjectOutside { id: ObjectId },
    #[error("objects {a} and {b} overlap")]
    Overlap { a: ObjectId, b: ObjectId },
    #[error("camera at height {height} cannot see over object {id} of height {object_height}")]
    CameraTooLow {
        height: f64,
        id: ObjectId,
        object_height: f64,
    },
    #[error("camera planar position must lie outside the workspace rectangle")]
    CameraInside,
    #[error("scene has no target object")]
    NoTarget,
    #[error("objects {0} and {1} both claim to be the target")]
    TwoTargets(ObjectId, ObjectId),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// A complete scene: the workspace, the camera, and the ground-truth object
/// set (hidden objects included). This is the unit that files store and the
/// instance generator produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub workspace: Workspace,
    pub camera: CameraModel,
    /// All objects, sorted by id, hidden ones included.
    pub objects: Vec<ObjectSpec>,
}

impl Scenario {
    /// Assembles and validates a scenario. Objects are sorted by id.
    pub fn new(
        workspace: Workspace,
        camera: CameraModel,
        mut objects: Vec<ObjectSpec>,
    ) -> Result<Scenario, ScenarioError> {
        objects.sort_by_key(|o| o.id);
        let s = Scenario {
            workspace,
            camera,
            objects,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let mut target = None;
        for (k, o) in self.objects.iter().enumerate() {
            if !disc_in_workspace(o.footprint(), &self.workspace) {
                return Err(ScenarioError::ObjectOutside { id: o.id });
            }
            if o.is_target {
                match target {
                    None => target = Some(o.id),
                    Some(first) => return Err(ScenarioError::TwoTargets(first, o.id)),
                }
            }
            if self.camera.height <= o.height {
                return Err(ScenarioError::CameraTooLow {
                    height: self.camera.height,
                    id: o.id,
                    object_height: o.height,
                });
            }
            for other in &self.objects[..k] {
                if disc_overlaps(o.footprint(), other.footprint()) {
                    return Err(ScenarioError::Overlap {
                        a: other.id,
                        b: o.id,
                    });
                }
            }
        }
        if target.is_none() {
            return Err(ScenarioError::NoTarget);
        }
        if self.workspace.extent.contains(self.camera.planar) {
            return Err(ScenarioError::CameraInside);
        }
        Ok(())
    }

    /// Consumes the scenario into the initial world state. The camera
    /// decides nothing here; hidden flags were fixed when the scene was
    /// made.
    pub fn into_world(self) -> Result<WorldState, WorldError> {
        WorldState::new(self.objects, self.camera)
    }

    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut workspace_dims: Option<(f64, f64)> = None;
        let mut robot: Option<(Point, f64)> = None;
        let mut margin: Option<f64> = None;
        let mut camera: Option<(Point, f64)> = None;
        let mut fov: Option<(f64, f64)> = None;
        let mut objects: Vec<ObjectSpec> = Vec::new();
        let mut seen_ids = BTreeSet::new();

        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.split_whitespace();
            let keyword = parts.next().unwrap();
            let mut rest = Fields {
                parts,
                line,
                keyword,
            };
            match keyword {
                "workspace" => {
                    if workspace_dims.is_some() {
                        return Err(ScenarioError::Duplicate {
                            line,
                            what: "workspace",
                        });
                    }
                    workspace_dims = Some((rest.cm()?, rest.cm()?));
                    rest.done()?;
                }
                "robot" => {
                    if robot.is_some() {
                        return Err(ScenarioError::Duplicate {
                            line,
                            what: "robot",
                        });
                    }
                    robot = Some((Point::new(rest.cm()?, rest.cm()?), rest.cm()?));
                    rest.done()?;
                }
                "margin" => {
                    if margin.is_some() {
                        return Err(ScenarioError::Duplicate {
                            line,
                            what: "margin",
                        });
                    }
                    margin = Some(rest.cm()?);
                    rest.done()?;
                }
                "camera" => {
                    if camera.is_some() {
                        return Err(ScenarioError::Duplicate {
                            line,
                            what: "camera",
                        });
                    }
                    camera = Some((Point::new(rest.cm()?, rest.cm()?), rest.cm()?));
                    rest.done()?;
                }
                "fov" => {
                    if fov.is_some() {
                        return Err(ScenarioError::Duplicate { line, what: "fov" });
                    }
                    let a: f64 = rest.num()?;
                    let b: f64 = rest.num()?;
                    fov = Some((a.to_radians(), b.to_radians()));
                    rest.done()?;
                }
                "object" => {
                    let id: ObjectId = rest.num()?;
                    if !seen_ids.insert(id) {
                        return Err(ScenarioError::Parse {
                            line,
                            reason: format!("object id {id} appears twice"),
                        });
                    }
                    let center = Point::new(rest.cm()?, rest.cm()?);
                    let radius = rest.cm()?;
                    let height = rest.cm()?;
                    let mut is_target = false;
                    let mut hidden = false;
                    for flag in rest.parts.by_ref() {
                        match flag {
                            "target" => is_target = true,
                            "hidden" => hidden = true,
                            other => {
                                return Err(ScenarioError::Parse {
                                    line,
                                    reason: format!("unknown object flag '{other}'"),
                                })
                            }
                        }
                    }
                    objects.push(ObjectSpec {
                        id,
                        center,
                        radius,
                        height,
                        is_target,
                        hidden,
                    });
                }
                other => {
                    return Err(ScenarioError::Parse {
                        line,
                        reason: format!("unknown keyword '{other}'"),
                    })
                }
            }
        }

        let (length, width) = workspace_dims.ok_or(ScenarioError::Missing("workspace"))?;
        let (home, r_r) = robot.ok_or(ScenarioError::Missing("robot"))?;
        let (planar, height) = camera.ok_or(ScenarioError::Missing("camera"))?;
        let workspace = Workspace::new(
            length,
            width,
            home,
            r_r,
            margin.unwrap_or(DEFAULT_SAFETY_MARGIN),
        )?;
        let mut cam = CameraModel::new(planar, height);
        cam.fov = fov;
        Scenario::new(workspace, cam, objects)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Scenario::parse(&text)
    }

    /// The canonical text form, in centimeters.
    pub fn to_text(&self) -> String {
        let cm = |m: f64| format!("{:.6}", m * 100.0);
        let mut out = String::new();
        let w = &self.workspace;
        let _ = writeln!(
            out,
            "workspace {} {}",
            cm(w.length()),
            cm(w.width())
        );
        let _ = writeln!(
            out,
            "robot {} {} {}",
            cm(w.robot_home.x),
            cm(w.robot_home.y),
            cm(w.robot_radius)
        );
        let _ = writeln!(out, "margin {}", cm(w.safety_margin));
        let _ = writeln!(
            out,
            "camera {} {} {}",
            cm(self.camera.planar.x),
            cm(self.camera.planar.y),
            cm(self.camera.height)
        );
        if let Some((a, b)) = self.camera.fov {
            let _ = writeln!(out, "fov {:.6} {:.6}", a.to_degrees(), b.to_degrees());
        }
        for o in &self.objects {
            let _ = write!(
                out,
                "object {} {} {} {} {}",
                o.id,
                cm(o.center.x),
                cm(o.center.y),
                cm(o.radius),
                cm(o.height)
            );
            if o.is_target {
                out.push_str(" target");
            }
            if o.hidden {
                out.push_str(" hidden");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_text()).map_err(|source| ScenarioError::Write {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Cursor over the fields of one line, producing uniform parse errors.
struct Fields<'a> {
    parts: std::str::SplitWhitespace<'a>,
    line: usize,
    keyword: &'a str,
}

impl Fields<'_> {
    fn num<T: std::str::FromStr>(&mut self) -> Result<T, ScenarioError> {
        let tok = self.parts.next().ok_or_else(|| ScenarioError::Parse {
            line: self.line,
            reason: format!("'{}' needs more fields", self.keyword),
        })?;
        tok.parse().map_err(|_| ScenarioError::Parse {
            line: self.line,
            reason: format!("bad number '{tok}'"),
        })
    }

    /// A length field: centimeters in the file, meters in memory.
    fn cm(&mut self) -> Result<f64, ScenarioError> {
        Ok(self.num::<f64>()? * 0.01)
    }

    fn done(mut self) -> Result<(), ScenarioError> {
        match self.parts.next() {
            None => Ok(()),
            Some(extra) => Err(ScenarioError::Parse {
                line: self.line,
                reason: format!("unexpected trailing field '{extra}'"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# a small scene
workspace 90 45
robot 45 -10 5
camera 45 -20 50

object 2 45 31 3.0 6.0 hidden target
object 1 30 20 2.5 6.5
";

    #[test]
    fn parses_units_flags_and_defaults() {
        let s = Scenario::parse(SAMPLE).unwrap();
        assert_eq!(s.workspace.length(), 0.9);
        assert_eq!(s.workspace.width(), 0.45);
        assert_eq!(s.workspace.robot_home, Point::new(0.45, -0.1));
        assert_eq!(s.workspace.robot_radius, 0.05);
        assert_eq!(s.workspace.safety_margin, DEFAULT_SAFETY_MARGIN);
        assert_eq!(s.camera.planar, Point::new(0.45, -0.2));
        assert_eq!(s.camera.height, 0.5);
        assert_eq!(s.camera.fov, None);
        assert_eq!(s.objects.len(), 2);
        assert_eq!(s.objects[0].id, 1, "objects come out sorted");
        assert_eq!(s.objects[0].center, Point::new(0.3, 0.2));
        assert_eq!(s.objects[0].radius, 0.025);
        assert!(!s.objects[0].is_target);
        assert!(s.objects[1].is_target);
        assert!(s.objects[1].hidden);

        let world = s.into_world().unwrap();
        assert_eq!(world.target_id(), 2);
        assert!(!world.target_detected());
    }

    #[test]
    fn canonical_form_round_trips() {
        let s = Scenario::parse(SAMPLE).unwrap();
        let text = s.to_text();
        let again = Scenario::parse(&text).unwrap();
        for (a, b) in s.objects.iter().zip(&again.objects) {
            assert!((a.center.x - b.center.x).abs() < 1e-8);
            assert!((a.center.y - b.center.y).abs() < 1e-8);
            assert!((a.radius - b.radius).abs() < 1e-8);
            assert!((a.height - b.height).abs() < 1e-8);
        }
        assert_eq!(again.to_text(), text, "canonical form is a fixed point");
    }

    #[test]
    fn save_and_load_through_a_file() {
        let s = Scenario::parse(SAMPLE).unwrap();
        let dir = std::env::temp_dir().join("declutter-scenario-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("scene.txt");
        s.save(&path).unwrap();
        let back = Scenario::load(&path).unwrap();
        assert_eq!(back.to_text(), s.to_text());
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn rejects_malformed_lines() {
        let cases: &[(&str, &str)] = &[
            ("workspace 90", "needs more fields"),
            ("workspace 90 45 3", "trailing field"),
            ("workspace 90 x", "bad number"),
            ("shelf 90 45", "unknown keyword"),
            ("object 1 30 20 2.5 6.5 shiny", "unknown object flag"),
        ];
        for (line, needle) in cases {
            // Field errors fire while scanning, before any missing-line
            // checks, so the bad line can stand alone.
            let err = Scenario::parse(line).unwrap_err().to_string();
            assert!(err.contains(needle), "{line}: {err}");
        }
        let twice = format!("{SAMPLE}camera 45 -20 50\n");
        let err = Scenario::parse(&twice).unwrap_err();
        assert!(matches!(err, ScenarioError::Duplicate { what: "camera", .. }));
        let dup = format!("{SAMPLE}object 1 60 20 2.5 6.5\n");
        let err = Scenario::parse(&dup).unwrap_err().to_string();
        assert!(err.contains("appears twice"));
    }

    #[test]
    fn rejects_invalid_scenes() {
        let missing = "workspace 90 45\nrobot 45 -10 5\n";
        assert!(matches!(
            Scenario::parse(missing).unwrap_err(),
            ScenarioError::Missing("camera")
        ));

        let no_target = SAMPLE.replace(" hidden target", " hidden");
        assert!(matches!(
            Scenario::parse(&no_target).unwrap_err(),
            ScenarioError::NoTarget
        ));

        let two = format!("{SAMPLE}object 3 60 20 2.5 6.5 target\n");
        assert!(matches!(
            Scenario::parse(&two).unwrap_err(),
            ScenarioError::TwoTargets(2, 3)
        ));

        let outside = format!("{SAMPLE}object 3 89 20 2.5 6.5\n");
        assert!(matches!(
            Scenario::parse(&outside).unwrap_err(),
            ScenarioError::ObjectOutside { id: 3 }
        ));

        let overlap = format!("{SAMPLE}object 3 32 21 2.5 6.5\n");
        assert!(matches!(
            Scenario::parse(&overlap).unwrap_err(),
            ScenarioError::Overlap { a: 1, b: 3 }
        ));

        let low_cam = SAMPLE.replace("camera 45 -20 50", "camera 45 -20 6.2");
        assert!(matches!(
            Scenario::parse(&low_cam).unwrap_err(),
            ScenarioError::CameraTooLow { id: 1, .. }
        ));

        let inside_cam = SAMPLE.replace("camera 45 -20 50", "camera 45 22 50");
        assert!(matches!(
            Scenario::parse(&inside_cam).unwrap_err(),
            ScenarioError::CameraInside
        ));
    }
}
