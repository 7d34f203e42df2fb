//! Append-only episode log with a plain-text round-trip format.
//!
//! Every planner decision lands here as one typed event, and every event
//! serializes to one `kind key=value ...` line. The format is deterministic
//! (no timestamps, fixed field order, fixed float precision) so two runs
//! with the same seed produce byte-identical logs, and it parses back so
//! tools can replay an episode without rerunning the planner.
//!
//! Lines starting with `#` are comments; writers may prepend configuration
//! headers that replay tools skip.

use crate::geometry::ObjectId;
use crate::motion::Verdict;
use crate::tgraph::Node;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {reason}")]
pub struct LogParseError {
    pub line: usize,
    pub reason: String,
}

/// Final status of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Done,
    Fail,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Done => write!(f, "done"),
            RunStatus::Fail => write!(f, "fail"),
        }
    }
}

/// Why the traversability graph was rebuilt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RebuildCause {
    /// First build of an episode phase.
    Initial,
    /// An object was extracted.
    Removal,
    /// Sensing added objects to the belief.
    Reveal,
    /// Start of a search round for an undetected target.
    Search,
}

impl fmt::Display for RebuildCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RebuildCause::Initial => write!(f, "initial"),
            RebuildCause::Removal => write!(f, "removal"),
            RebuildCause::Reveal => write!(f, "reveal"),
            RebuildCause::Search => write!(f, "search"),
        }
    }
}

/// Which widening rule a baseline applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidenParam {
    /// Swept corridor width in meters.
    Width,
    /// Angular window in degrees.
    AngleDeg,
}

impl fmt::Display for WidenParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WidenParam::Width => write!(f, "width"),
            WidenParam::AngleDeg => write!(f, "angle_deg"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// A relocation order was computed on the current graph.
    Plan {
        it: u32,
        nodes: usize,
        edges: usize,
        path: Vec<Node>,
        order: Vec<ObjectId>,
    },
    /// The motion oracle was asked to extract an object.
    Attempt {
        it: u32,
        object: ObjectId,
        target: bool,
        verdict: Verdict,
        nodes: usize,
        edges: usize,
        plan: Vec<ObjectId>,
    },
    /// The object left the workspace.
    Removed {
        it: u32,
        object: ObjectId,
        target: bool,
    },
    /// Sensing added these objects to the belief.
    Revealed { it: u32, objects: Vec<ObjectId> },
    /// The graph was rebuilt from the current belief.
    Rebuild {
        it: u32,
        cause: RebuildCause,
        nodes: usize,
        edges: usize,
    },
    /// A failed extraction disconnected the robot from one object.
    EdgeRemoved { it: u32, a: Node, b: Node },
    /// Search round: revealed-volume scores and the chosen candidate.
    Search {
        it: u32,
        chosen: ObjectId,
        scores: Vec<(ObjectId, f64)>,
    },
    /// A search candidate failed and left the accessible set for this round.
    Drop { it: u32, object: ObjectId },
    /// A baseline widened its search parameter after a motion failure.
    Widen { it: u32, param: WidenParam, value: f64 },
    /// Episode result.
    Outcome {
        it: u32,
        status: RunStatus,
        relocated: Vec<ObjectId>,
        replans: u32,
        reason: String,
    },
}

fn ids_csv(ids: &[ObjectId]) -> String {
    ids.iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn nodes_csv(nodes: &[Node]) -> String {
    nodes
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn scores_csv(scores: &[(ObjectId, f64)]) -> String {
    scores
        .iter()
        .map(|(id, v)| format!("{id}:{v:.9}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Plan {
                it,
                nodes,
                edges,
                path,
                order,
            } => write!(
                f,
                "plan it={it} nodes={nodes} edges={edges} path={} order={}",
                nodes_csv(path),
                ids_csv(order)
            ),
            Event::Attempt {
                it,
                object,
                target,
                verdict,
                nodes,
                edges,
                plan,
            } => write!(
                f,
                "attempt it={it} obj={object} target={target} verdict={verdict} \
                 nodes={nodes} edges={edges} plan={}",
                ids_csv(plan)
            ),
            Event::Removed { it, object, target } => {
                write!(f, "removed it={it} obj={object} target={target}")
            }
            Event::Revealed { it, objects } => {
                write!(f, "revealed it={it} objs={}", ids_csv(objects))
            }
            Event::Rebuild {
                it,
                cause,
                nodes,
                edges,
            } => write!(f, "rebuild it={it} cause={cause} nodes={nodes} edges={edges}"),
            Event::EdgeRemoved { it, a, b } => write!(f, "edge_removed it={it} a={a} b={b}"),
            Event::Search { it, chosen, scores } => {
                write!(f, "search it={it} chosen={chosen} scores={}", scores_csv(scores))
            }
            Event::Drop { it, object } => write!(f, "drop it={it} obj={object}"),
            Event::Widen { it, param, value } => {
                write!(f, "widen it={it} param={param} value={value:.6}")
            }
            Event::Outcome {
                it,
                status,
                relocated,
                replans,
                reason,
            } => write!(
                f,
                "outcome it={it} status={status} relocated={} replans={replans} reason={reason}",
                ids_csv(relocated)
            ),
        }
    }
}

/// Pulls `key=value` tokens off a line in declaration order.
struct Fields<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Fields<'a> {
    fn take(&mut self, key: &str) -> Result<&'a str, LogParseError> {
        let rest = self.rest.trim_start();
        let prefix = format!("{key}=");
        let tail = rest.strip_prefix(&prefix).ok_or_else(|| LogParseError {
            line: self.line,
            reason: format!("expected field {key}"),
        })?;
        let end = tail.find(' ').unwrap_or(tail.len());
        self.rest = &tail[end..];
        Ok(&tail[..end])
    }

    /// Like `take`, but consumes the remainder of the line. Only valid for
    /// the final field, which may contain spaces.
    fn take_rest(&mut self, key: &str) -> Result<&'a str, LogParseError> {
        let rest = self.rest.trim_start();
        let prefix = format!("{key}=");
        let tail = rest.strip_prefix(&prefix).ok_or_else(|| LogParseError {
            line: self.line,
            reason: format!("expected field {key}"),
        })?;
        self.rest = "";
        Ok(tail)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, LogParseError> {
        let raw = self.take(key)?;
        raw.parse().map_err(|_| LogParseError {
            line: self.line,
            reason: format!("bad value {raw:?} for {key}"),
        })
    }

    fn ids(&mut self, key: &str) -> Result<Vec<ObjectId>, LogParseError> {
        let raw = self.take(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|tok| {
                tok.parse().map_err(|_| LogParseError {
                    line: self.line,
                    reason: format!("bad object id {tok:?} in {key}"),
                })
            })
            .collect()
    }

    fn node(&mut self, key: &str) -> Result<Node, LogParseError> {
        let raw = self.take(key)?;
        parse_node(raw, self.line, key)
    }

    fn nodes(&mut self, key: &str) -> Result<Vec<Node>, LogParseError> {
        let raw = self.take(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|tok| parse_node(tok, self.line, key))
            .collect()
    }

    fn done(self) -> Result<(), LogParseError> {
        if self.rest.trim().is_empty() {
            Ok(())
        } else {
            Err(LogParseError {
                line: self.line,
                reason: format!("trailing input {:?}", self.rest.trim()),
            })
        }
    }
}

fn parse_node(tok: &str, line: usize, key: &str) -> Result<Node, LogParseError> {
    if tok == "R" {
        return Ok(Node::Robot);
    }
    tok.parse()
        .map(Node::Object)
        .map_err(|_| LogParseError {
            line,
            reason: format!("bad node {tok:?} in {key}"),
        })
}

impl Event {
    pub fn parse_line(text: &str, line: usize) -> Result<Event, LogParseError> {
        let text = text.trim_end();
        let (kind, rest) = text.split_once(' ').unwrap_or((text, ""));
        let mut f = Fields { rest, line };
        let event = match kind {
            "plan" => Event::Plan {
                it: f.parse("it")?,
                nodes: f.parse("nodes")?,
                edges: f.parse("edges")?,
                path: f.nodes("path")?,
                order: f.ids("order")?,
            },
            "attempt" => Event::Attempt {
                it: f.parse("it")?,
                object: f.parse("obj")?,
                target: f.parse("target")?,
                verdict: match f.take("verdict")? {
                    "success" => Verdict::Success,
                    "failure" => Verdict::Failure,
                    other => {
                        return Err(LogParseError {
                            line,
                            reason: format!("bad verdict {other:?}"),
                        })
                    }
                },
                nodes: f.parse("nodes")?,
                edges: f.parse("edges")?,
                plan: f.ids("plan")?,
            },
            "removed" => Event::Removed {
                it: f.parse("it")?,
                object: f.parse("obj")?,
                target: f.parse("target")?,
            },
            "revealed" => Event::Revealed {
                it: f.parse("it")?,
                objects: f.ids("objs")?,
            },
            "rebuild" => Event::Rebuild {
                it: f.parse("it")?,
                cause: match f.take("cause")? {
                    "initial" => RebuildCause::Initial,
                    "removal" => RebuildCause::Removal,
                    "reveal" => RebuildCause::Reveal,
                    "search" => RebuildCause::Search,
                    other => {
                        return Err(LogParseError {
                            line,
                            reason: format!("bad rebuild cause {other:?}"),
                        })
                    }
                },
                nodes: f.parse("nodes")?,
                edges: f.parse("edges")?,
            },
            "edge_removed" => Event::EdgeRemoved {
                it: f.parse("it")?,
                a: f.node("a")?,
                b: f.node("b")?,
            },
            "search" => Event::Search {
                it: f.parse("it")?,
                chosen: f.parse("chosen")?,
                scores: {
                    let raw = f.take("scores")?;
                    let mut scores = Vec::new();
                    if !raw.is_empty() {
                        for tok in raw.split(',') {
                            let (id, v) = tok.split_once(':').ok_or_else(|| LogParseError {
                                line,
                                reason: format!("bad score {tok:?}"),
                            })?;
                            let id = id.parse().map_err(|_| LogParseError {
                                line,
                                reason: format!("bad score id {id:?}"),
                            })?;
                            let v = v.parse().map_err(|_| LogParseError {
                                line,
                                reason: format!("bad score value {v:?}"),
                            })?;
                            scores.push((id, v));
                        }
                    }
                    scores
                },
            },
            "drop" => Event::Drop {
                it: f.parse("it")?,
                object: f.parse("obj")?,
            },
            "widen" => Event::Widen {
                it: f.parse("it")?,
                param: match f.take("param")? {
                    "width" => WidenParam::Width,
                    "angle_deg" => WidenParam::AngleDeg,
                    other => {
                        return Err(LogParseError {
                            line,
                            reason: format!("bad widen param {other:?}"),
                        })
                    }
                },
                value: f.parse("value")?,
            },
            "outcome" => Event::Outcome {
                it: f.parse("it")?,
                status: match f.take("status")? {
                    "done" => RunStatus::Done,
                    "fail" => RunStatus::Fail,
                    other => {
                        return Err(LogParseError {
                            line,
                            reason: format!("bad status {other:?}"),
                        })
                    }
                },
                relocated: f.ids("relocated")?,
                replans: f.parse("replans")?,
                reason: f.take_rest("reason")?.to_string(),
            },
            other => {
                return Err(LogParseError {
                    line,
                    reason: format!("unknown event kind {other:?}"),
                })
            }
        };
        if !matches!(event, Event::Outcome { .. }) {
            f.done()?;
        }
        Ok(event)
    }
}

/// The events of one episode, in order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        EventLog::default()
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The final outcome event, if the episode ran to a verdict.
    pub fn outcome(&self) -> Option<&Event> {
        self.events
            .iter()
            .rev()
            .find(|e| matches!(e, Event::Outcome { .. }))
    }

    /// One line per event, each terminated by a newline.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&event.to_string());
            out.push('\n');
        }
        out
    }

    /// Inverse of [`EventLog::to_text`]. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self, LogParseError> {
        let mut events = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            events.push(Event::parse_line(line, idx + 1)?);
        }
        Ok(EventLog { events })
    }
}
