//! Motion feasibility oracles.
//!
//! The task planner never computes robot motions; it only asks "can this
//! object be picked and carried out right now?" and adapts when the answer is
//! no. That question is behind the [`MotionOracle`] trait so tests can script
//! failures deterministically and the simulation can answer it geometrically.
//!
//! Oracles are queried against the robot's belief: the obstacles in a query
//! are the detected remaining objects, because a real motion planner would
//! plan against the observed scene too.

use crate::corridor::{corridor_exists, CorridorError, CorridorQuery, DEFAULT_GRID_RESOLUTION};
use crate::geometry::{Disc, GraspedRadius, ObjectId, ObjectSpec, Workspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Success,
    Failure,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Success => write!(f, "success"),
            Verdict::Failure => write!(f, "failure"),
        }
    }
}

#[derive(Debug, Error)]
pub enum MotionError {
    #[error(transparent)]
    Grid(#[from] CorridorError),
    #[error("fault table line {line}: {reason}")]
    FaultTable { line: usize, reason: String },
    #[error("unknown oracle spec {0:?}, expected always, fault:<file>, disc2d, or flaky:<p>")]
    UnknownOracle(String),
    #[error("cannot read fault table {path}: {source}")]
    FaultTableIo {
        path: String,
        source: std::io::Error,
    },
}

/// One pick-and-extract feasibility question.
#[derive(Debug, Clone)]
pub struct MotionQuery<'a> {
    /// The object to pick up and carry out of the workspace.
    pub object: &'a ObjectSpec,
    /// Everything else the motion must avoid.
    pub obstacles: &'a [ObjectSpec],
    pub workspace: &'a Workspace,
    /// Slots vacated by earlier extractions this episode. Geometric oracles
    /// may maneuver there despite wall proximity, exactly as the planner's
    /// graph does, so the two never disagree about a slot the hand has
    /// already worked in.
    pub eased: &'a [Disc],
}

pub trait MotionOracle {
    fn query(&mut self, q: &MotionQuery) -> Result<Verdict, MotionError>;
    /// Short stable name for logs and metrics rows.
    fn name(&self) -> &'static str;
}

/// Every motion is feasible. Isolates task-level planning in tests.
#[derive(Debug, Clone, Default)]
pub struct AlwaysSucceed;

impl MotionOracle for AlwaysSucceed {
    fn query(&mut self, _q: &MotionQuery) -> Result<Verdict, MotionError> {
        Ok(Verdict::Success)
    }

    fn name(&self) -> &'static str {
        "always"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultRule {
    /// Fail the next `n` queries for the object, then succeed.
    Count(u32),
    Always,
}

/// Deterministic failures from a per-object table. Objects without a rule
/// always succeed.
#[derive(Debug, Clone, Default)]
pub struct ScriptedFault {
    rules: BTreeMap<ObjectId, FaultRule>,
}

impl ScriptedFault {
    pub fn new(rules: impl IntoIterator<Item = (ObjectId, FaultRule)>) -> Self {
        ScriptedFault {
            rules: rules.into_iter().collect(),
        }
    }

    /// Parses a fault table: one `object_id fail_count` or `object_id always`
    /// per line, with `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, MotionError> {
        let mut rules = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.split_whitespace();
            let id: ObjectId = parts
                .next()
                .unwrap()
                .parse()
                .map_err(|_| MotionError::FaultTable {
                    line,
                    reason: "expected an object id".into(),
                })?;
            let rule = match parts.next() {
                Some("always") => FaultRule::Always,
                Some(n) => FaultRule::Count(n.parse().map_err(|_| MotionError::FaultTable {
                    line,
                    reason: "expected a fail count or `always`".into(),
                })?),
                None => {
                    return Err(MotionError::FaultTable {
                        line,
                        reason: "missing fail count".into(),
                    })
                }
            };
            if parts.next().is_some() {
                return Err(MotionError::FaultTable {
                    line,
                    reason: "trailing tokens".into(),
                });
            }
            rules.insert(id, rule);
        }
        Ok(ScriptedFault { rules })
    }
}

impl MotionOracle for ScriptedFault {
    fn query(&mut self, q: &MotionQuery) -> Result<Verdict, MotionError> {
        match self.rules.get_mut(&q.object.id) {
            Some(FaultRule::Always) => Ok(Verdict::Failure),
            Some(FaultRule::Count(n)) if *n > 0 => {
                *n -= 1;
                Ok(Verdict::Failure)
            }
            _ => Ok(Verdict::Success),
        }
    }

    fn name(&self) -> &'static str {
        "fault"
    }
}

/// Geometric feasibility in the plane: the empty hand must reach the object
/// from home, and the loaded hand must carry it back out.
#[derive(Debug, Clone)]
pub struct Disc2dOracle {
    pub resolution: f64,
}

impl Default for Disc2dOracle {
    fn default() -> Self {
        Disc2dOracle {
            resolution: DEFAULT_GRID_RESOLUTION,
        }
    }
}

impl MotionOracle for Disc2dOracle {
    fn query(&mut self, q: &MotionQuery) -> Result<Verdict, MotionError> {
        let discs: Vec<Disc> = q.obstacles.iter().map(|o| o.footprint()).collect();
        let w = q.workspace;
        let reach = CorridorQuery {
            moving_radius: w.robot_radius,
            start: w.robot_home,
            goal: q.object.center,
            obstacles: &discs,
            workspace: w,
            eased: q.eased,
        };
        if !corridor_exists(&reach, self.resolution)? {
            return Ok(Verdict::Failure);
        }
        let loaded = GraspedRadius::new(q.object.radius, w.robot_radius, w.safety_margin).value();
        let extract = CorridorQuery {
            moving_radius: loaded,
            start: q.object.center,
            goal: w.robot_home,
            obstacles: &discs,
            workspace: w,
            eased: q.eased,
        };
        Ok(if corridor_exists(&extract, self.resolution)? {
            Verdict::Success
        } else {
            Verdict::Failure
        })
    }

    fn name(&self) -> &'static str {
        "disc2d"
    }
}

/// Randomized fault injection: the first query for each object fails with
/// the given probability, later queries always succeed. Deterministic for a
/// fixed seed.
#[derive(Debug, Clone)]
pub struct FlakyFirstQuery {
    prob: f64,
    rng: ChaCha8Rng,
    tried: BTreeSet<ObjectId>,
}

impl FlakyFirstQuery {
    pub fn new(prob: f64, seed: u64) -> Self {
        FlakyFirstQuery {
            prob,
            rng: ChaCha8Rng::seed_from_u64(seed),
            tried: BTreeSet::new(),
        }
    }
}

impl MotionOracle for FlakyFirstQuery {
    fn query(&mut self, q: &MotionQuery) -> Result<Verdict, MotionError> {
        if self.tried.insert(q.object.id) && self.rng.gen_bool(self.prob) {
            return Ok(Verdict::Failure);
        }
        Ok(Verdict::Success)
    }

    fn name(&self) -> &'static str {
        "flaky"
    }
}

/// How to build a fresh oracle for each episode of a batch.
#[derive(Debug, Clone)]
pub enum OracleKind {
    Always,
    Scripted(ScriptedFault),
    Disc2d,
    Flaky(f64),
}

impl OracleKind {
    /// Parses a command-line oracle spec: `always`, `fault:<file>`,
    /// `disc2d`, or `flaky:<p>`.
    pub fn parse(spec: &str) -> Result<Self, MotionError> {
        if spec == "always" {
            return Ok(OracleKind::Always);
        }
        if spec == "disc2d" {
            return Ok(OracleKind::Disc2d);
        }
        if let Some(path) = spec.strip_prefix("fault:") {
            let text =
                std::fs::read_to_string(path).map_err(|source| MotionError::FaultTableIo {
                    path: path.to_string(),
                    source,
                })?;
            return Ok(OracleKind::Scripted(ScriptedFault::parse(&text)?));
        }
        if let Some(p) = spec.strip_prefix("flaky:") {
            let prob: f64 = p
                .parse()
                .map_err(|_| MotionError::UnknownOracle(spec.to_string()))?;
            if !(0.0..=1.0).contains(&prob) {
                return Err(MotionError::UnknownOracle(spec.to_string()));
            }
            return Ok(OracleKind::Flaky(prob));
        }
        Err(MotionError::UnknownOracle(spec.to_string()))
    }

    /// Fresh oracle state for one episode. The seed only matters for
    /// randomized oracles.
    pub fn build(&self, seed: u64) -> Box<dyn MotionOracle> {
        match self {
            OracleKind::Always => Box::new(AlwaysSucceed),
            OracleKind::Scripted(template) => Box::new(template.clone()),
            OracleKind::Disc2d => Box::new(Disc2dOracle::default()),
            OracleKind::Flaky(p) => Box::new(FlakyFirstQuery::new(*p, seed)),
        }
    }
}
