//! Text map format.
//!
//! ```text
//! kind=gridworld episodes=200 max_steps=50
//! S..P
//! .F..
//! ...T
//! ```
//!
//! The header line is optional for in-memory maps; defaults apply when it is
//! missing. Map files on disk must carry it.

use std::path::Path;

use super::{Cell, EnvKind, Facing, Grid, Pos, TaskSpec};
use crate::error::{Error, Result};

pub const DEFAULT_EPISODES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapHeader {
    pub kind: EnvKind,
    pub episodes: usize,
    pub max_steps: usize,
}

impl MapHeader {
    fn defaults(kind: EnvKind) -> Self {
        MapHeader {
            kind,
            episodes: DEFAULT_EPISODES,
            max_steps: kind.default_max_steps(),
        }
    }

    fn parse(line: &str, line_no: usize) -> Result<Self> {
        let mut kind = None;
        let mut episodes = None;
        let mut max_steps = None;
        for (i, field) in line.split_whitespace().enumerate() {
            let column = line.find(field).unwrap_or(0) + 1;
            let (key, value) = field.split_once('=').ok_or_else(|| {
                Error::parse(line_no, column, format!("header field #{} `{field}` is not key=value", i + 1))
            })?;
            let number = || {
                value.parse::<usize>().map_err(|_| {
                    Error::parse(line_no, column, format!("`{key}` must be a non-negative integer"))
                })
            };
            match key {
                "kind" => {
                    kind = Some(value.parse::<EnvKind>().map_err(|_| {
                        Error::parse(line_no, column, format!("unknown kind `{value}`"))
                    })?)
                }
                "episodes" => episodes = Some(number()?),
                "max_steps" => max_steps = Some(number()?),
                other => {
                    return Err(Error::parse(line_no, column, format!("unknown header key `{other}`")))
                }
            }
        }
        let kind = kind.ok_or_else(|| Error::parse(line_no, 1, "header is missing `kind`"))?;
        let mut header = MapHeader::defaults(kind);
        if let Some(e) = episodes {
            header.episodes = e;
        }
        if let Some(m) = max_steps {
            header.max_steps = m;
        }
        Ok(header)
    }
}

/// Parses a map of the given kind. A header line, if present, must agree on
/// the kind.
pub fn load_task(map_text: &str, kind: EnvKind) -> Result<TaskSpec> {
    parse(map_text, Some(kind), false, "task")
}

/// Reads a map file; the task id is the file stem.
pub fn load_task_file(path: &Path) -> Result<TaskSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::file(path, "map file name is not valid UTF-8"))?;
    parse(&text, None, true, id).map_err(|e| match e {
        Error::Parse { .. } => Error::file(path, e.to_string()),
        other => other,
    })
}

fn parse(text: &str, kind: Option<EnvKind>, require_header: bool, id: &str) -> Result<TaskSpec> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let mut rows: Vec<(usize, &str)> = Vec::new();
    let mut header = None;

    if let Some((n, first)) = lines.next() {
        if first.trim_start().starts_with("kind=") {
            header = Some(MapHeader::parse(first, n)?);
        } else {
            rows.push((n, first));
        }
    }
    rows.extend(lines);
    while rows.last().is_some_and(|(_, r)| r.trim().is_empty()) {
        rows.pop();
    }

    let header = match (header, kind) {
        (Some(h), Some(k)) if h.kind != k => {
            return Err(Error::parse(1, 1, format!("header says {} but {k} was requested", h.kind)))
        }
        (Some(h), _) => h,
        (None, _) if require_header => {
            return Err(Error::parse(1, 1, "missing header line `kind=... episodes=... max_steps=...`"))
        }
        (None, Some(k)) => MapHeader::defaults(k),
        (None, None) => unreachable!("callers pass a kind when no header is required"),
    };

    if rows.is_empty() {
        return Err(Error::parse(1, 1, "map has no rows"));
    }
    let width = rows[0].1.chars().count();
    if width == 0 {
        return Err(Error::parse(rows[0].0, 1, "empty map row"));
    }

    let mut cells = Vec::with_capacity(width * rows.len());
    let mut start: Option<(Pos, Facing)> = None;
    let mut goal: Option<Pos> = None;
    let mut boxes = Vec::new();
    let (start_name, goal_name) = match header.kind {
        EnvKind::GridWorld => ("start", "treasure"),
        EnvKind::BlockDude => ("agent", "exit"),
    };

    for (y, &(line_no, row)) in rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(Error::parse(
                line_no,
                1,
                format!("row has {} cells, expected {width}", row.chars().count()),
            ));
        }
        for (x, ch) in row.chars().enumerate() {
            let pos = Pos::new(x as i32, y as i32);
            let column = x + 1;
            let mut mark_start = |facing: Facing| -> Result<()> {
                if start.replace((pos, facing)).is_some() {
                    return Err(Error::parse(line_no, column, format!("duplicate {start_name}")));
                }
                Ok(())
            };
            let cell = match (header.kind, ch) {
                (_, '.') => Cell::Free,
                (EnvKind::GridWorld, 'S') => {
                    mark_start(Facing::Right)?;
                    Cell::Free
                }
                (EnvKind::GridWorld, 'P') => Cell::Pit,
                (EnvKind::GridWorld, 'F') => Cell::Fire,
                (EnvKind::GridWorld, 'T') | (EnvKind::BlockDude, 'x') => {
                    if goal.replace(pos).is_some() {
                        return Err(Error::parse(line_no, column, format!("duplicate {goal_name}")));
                    }
                    if header.kind == EnvKind::GridWorld {
                        Cell::Treasure
                    } else {
                        Cell::Exit
                    }
                }
                (EnvKind::BlockDude, '#') => Cell::Solid,
                (EnvKind::BlockDude, 'b') => {
                    boxes.push(pos);
                    Cell::Free
                }
                (EnvKind::BlockDude, '<') => {
                    mark_start(Facing::Left)?;
                    Cell::Free
                }
                (EnvKind::BlockDude, '>') => {
                    mark_start(Facing::Right)?;
                    Cell::Free
                }
                (kind, other) => {
                    return Err(Error::parse(
                        line_no,
                        column,
                        format!("unknown character `{other}` in {kind} map"),
                    ))
                }
            };
            cells.push(cell);
        }
    }

    let last_line = rows.last().map_or(1, |r| r.0);
    let (start, facing) =
        start.ok_or_else(|| Error::parse(last_line, 1, format!("missing {start_name}")))?;
    let goal = goal.ok_or_else(|| Error::parse(last_line, 1, format!("missing {goal_name}")))?;
    let grid = Grid::new(width, rows.len(), cells)?;
    TaskSpec::new(
        id,
        header.kind,
        grid,
        start,
        facing,
        goal,
        boxes,
        header.episodes,
        header.max_steps,
    )
    .map_err(|e| match e {
        Error::Contract(msg) => Error::parse(1, 1, msg),
        other => other,
    })
}
