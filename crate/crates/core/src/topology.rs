//! Unit-disk deployments: positions, seeded generation with an exact
//! connectivity target, and the line-oriented topology file format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{kappa, Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Field {
    pub width: f64,
    pub height: f64,
}

impl Field {
    pub const fn new(width: f64, height: f64) -> Self {
        Field { width, height }
    }

    pub fn contains(&self, p: Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

pub fn euclidean_cost(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// The unit-disk link rule.
#[inline]
pub fn in_range(a: Position, b: Position, range: f64) -> bool {
    euclidean_cost(a, b) <= range
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(
        "no topology with kappa = {k} after {attempts} attempts (n = {n}, range = {range} m, field = {width} x {height} m)"
    )]
    GenerationFailed {
        n: usize,
        k: usize,
        range: f64,
        width: f64,
        height: f64,
        attempts: usize,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("node ids must be dense 0..n-1; id {0} is missing")]
    MissingNode(NodeId),
    #[error("node {id} at ({x}, {y}) lies outside the {width} x {height} field")]
    OutsideField {
        id: NodeId,
        x: f64,
        y: f64,
        width: f64,
        height: f64,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A deployment: node `i` sits at `positions[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub field: Field,
    pub range: f64,
    pub sensing_range: f64,
    /// Connectivity the deployment was generated for (0 when unknown).
    pub k: usize,
    pub seed: u64,
    pub positions: Vec<Position>,
}

impl Topology {
    pub fn new(field: Field, range: f64, positions: Vec<Position>) -> Self {
        Topology {
            field,
            range,
            sensing_range: range,
            k: 0,
            seed: 0,
            positions,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn graph(&self) -> Graph {
        unit_disk_graph(&self.positions, self.range)
    }
}

pub fn unit_disk_graph(positions: &[Position], range: f64) -> Graph {
    let mut g = Graph::new(positions.len());
    for (i, &a) in positions.iter().enumerate() {
        for (j, &b) in positions.iter().enumerate().skip(i + 1) {
            if in_range(a, b, range) {
                g.add_edge(i.into(), j.into()).expect("i < j");
            }
        }
    }
    g
}

/// Rounds to the nine significant digits used on disk, so that generated
/// positions survive a save/load cycle unchanged.
pub fn round_sig9(v: f64) -> f64 {
    format!("{v:.8e}").parse().expect("formatted float parses")
}

fn fmt_coord(v: f64) -> String {
    // Display prints the shortest string that parses back to the same f64.
    format!("{}", round_sig9(v))
}

/// Knobs for [`generate`].
#[derive(Debug, Clone, Copy)]
pub struct GenerateParams {
    pub n: usize,
    pub k: usize,
    pub field: Field,
    pub range: f64,
    pub seed: u64,
    pub max_attempts: usize,
}

/// Rejection sampling for a deployment whose unit-disk graph has kappa exactly
/// `k`. Points are scattered uniformly over a centred sub-square whose side is
/// tuned between attempts towards the density that yields kappa = k.
pub fn generate(p: GenerateParams) -> Result<Topology, TopologyError> {
    if p.range <= 0.0 || p.range.is_nan() {
        return Err(TopologyError::InvalidParameters("range must be positive".into()));
    }
    if p.n < p.k + 1 {
        return Err(TopologyError::InvalidParameters(format!(
            "{} nodes cannot be {}-connected",
            p.n, p.k
        )));
    }
    if !(p.field.width > 0.0 && p.field.height > 0.0) {
        return Err(TopologyError::InvalidParameters("empty field".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let disk = std::f64::consts::PI * p.range * p.range;
    let mut target_degree = 1.5 * p.k as f64 + 3.0;
    for _ in 0..p.max_attempts {
        let side = (p.n as f64 * disk / target_degree).sqrt();
        let (w, h) = (side.min(p.field.width), side.min(p.field.height));
        let (ox, oy) = ((p.field.width - w) / 2.0, (p.field.height - h) / 2.0);
        let positions: Vec<Position> = (0..p.n)
            .map(|_| {
                let x = round_sig9(ox + rng.gen::<f64>() * w);
                let y = round_sig9(oy + rng.gen::<f64>() * h);
                Position::new(x.clamp(0.0, p.field.width), y.clamp(0.0, p.field.height))
            })
            .collect();
        let got = kappa(&unit_disk_graph(&positions, p.range));
        if got == p.k {
            return Ok(Topology {
                field: p.field,
                range: p.range,
                sensing_range: p.range,
                k: p.k,
                seed: p.seed,
                positions,
            });
        }
        if got < p.k {
            target_degree *= 1.06;
        } else {
            target_degree /= 1.06;
        }
    }
    Err(TopologyError::GenerationFailed {
        n: p.n,
        k: p.k,
        range: p.range,
        width: p.field.width,
        height: p.field.height,
        attempts: p.max_attempts,
    })
}

pub fn to_text(t: &Topology) -> String {
    let mut out = String::new();
    writeln!(out, "field {} {}", fmt_coord(t.field.width), fmt_coord(t.field.height)).unwrap();
    writeln!(out, "range {}", fmt_coord(t.range)).unwrap();
    if t.sensing_range != t.range {
        writeln!(out, "sensing {}", fmt_coord(t.sensing_range)).unwrap();
    }
    writeln!(out, "k {}", t.k).unwrap();
    writeln!(out, "seed {}", t.seed).unwrap();
    for (i, p) in t.positions.iter().enumerate() {
        writeln!(out, "node {i} {} {}", fmt_coord(p.x), fmt_coord(p.y)).unwrap();
    }
    out
}

pub fn save(t: &Topology, path: impl AsRef<Path>) -> Result<(), TopologyError> {
    fs::write(path, to_text(t))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Topology, TopologyError> {
    from_text(&fs::read_to_string(path)?)
}

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    tokens: Vec<(usize, &'a str)>,
    at: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    tokens.push((s, &text[s..i]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            tokens.push((s, &text[s..]));
        }
        Cursor {
            line,
            text,
            tokens,
            at: 0,
        }
    }

    fn error(&self, column: usize, message: impl Into<String>) -> TopologyError {
        TopologyError::Parse {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn next<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, TopologyError> {
        let Some(&(col, tok)) = self.tokens.get(self.at) else {
            return Err(self.error(self.text.len() + 1, format!("expected {what}")));
        };
        self.at += 1;
        tok.parse()
            .map_err(|_| self.error(col + 1, format!("invalid {what} '{tok}'")))
    }

    fn finish(&self) -> Result<(), TopologyError> {
        match self.tokens.get(self.at) {
            Some(&(col, tok)) => Err(self.error(col + 1, format!("unexpected token '{tok}'"))),
            None => Ok(()),
        }
    }
}

pub fn from_text(text: &str) -> Result<Topology, TopologyError> {
    let mut field = None;
    let mut range = None;
    let mut sensing = None;
    let mut k = 0usize;
    let mut seed = 0u64;
    let mut nodes: Vec<Option<Position>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut cur = Cursor::new(i + 1, content);
        let Some(&(col, keyword)) = cur.tokens.first() else {
            continue;
        };
        cur.at = 1;
        match keyword {
            "field" => field = Some(Field::new(cur.next("width")?, cur.next("height")?)),
            "range" => range = Some(cur.next::<f64>("range")?),
            "sensing" => sensing = Some(cur.next::<f64>("sensing range")?),
            "k" => k = cur.next("k")?,
            "seed" => seed = cur.next("seed")?,
            "node" => {
                let id: u32 = cur.next("node id")?;
                let p = Position::new(cur.next("x")?, cur.next("y")?);
                let slot = id as usize;
                if slot >= nodes.len() {
                    nodes.resize(slot + 1, None);
                }
                if nodes[slot].replace(p).is_some() {
                    return Err(TopologyError::DuplicateNode(NodeId(id)));
                }
            }
            other => return Err(cur.error(col + 1, format!("unknown keyword '{other}'"))),
        }
        cur.finish()?;
    }
    let field = field.ok_or_else(|| TopologyError::Parse {
        line: 0,
        column: 0,
        message: "missing 'field' line".into(),
    })?;
    let range = range.ok_or_else(|| TopologyError::Parse {
        line: 0,
        column: 0,
        message: "missing 'range' line".into(),
    })?;
    let mut positions = Vec::with_capacity(nodes.len());
    for (i, p) in nodes.into_iter().enumerate() {
        let p = p.ok_or(TopologyError::MissingNode(NodeId::from(i)))?;
        if !field.contains(p) {
            return Err(TopologyError::OutsideField {
                id: NodeId::from(i),
                x: p.x,
                y: p.y,
                width: field.width,
                height: field.height,
            });
        }
        positions.push(p);
    }
    Ok(Topology {
        field,
        range,
        sensing_range: sensing.unwrap_or(range),
        k,
        seed,
        positions,
    })
}
