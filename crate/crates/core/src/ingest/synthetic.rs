//! Rule-labeled Mini-ARC-style tasks whose answer is known by construction.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digest::seed_from;
use crate::grid::{Grid, MINI_ARC_MAX_DIM};
use crate::task::{BenchmarkKind, Exemplar, Task, TaskInput, TaskOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RuleKind {
    Identity,
    HorizontalMirror,
    ColorSwap(u8, u8),
    Rotate90,
}

impl RuleKind {
    pub fn apply(self, grid: &Grid) -> Grid {
        match self {
            RuleKind::Identity => grid.clone(),
            RuleKind::HorizontalMirror => grid.mirror_horizontal(),
            RuleKind::Rotate90 => grid.rotate90(),
            RuleKind::ColorSwap(a, b) => grid.map_colors(|c| {
                if c == a {
                    b
                } else if c == b {
                    a
                } else {
                    c
                }
            }),
        }
    }

    /// Plain-language statement of the rule.
    pub fn describe(self) -> String {
        match self {
            RuleKind::Identity => "the output equals the input".to_string(),
            RuleKind::HorizontalMirror => "mirror the grid left to right".to_string(),
            RuleKind::Rotate90 => "rotate the grid 90 degrees clockwise".to_string(),
            RuleKind::ColorSwap(a, b) => format!("swap colors {a} and {b}"),
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::Identity => f.write_str("identity"),
            RuleKind::HorizontalMirror => f.write_str("hmirror"),
            RuleKind::Rotate90 => f.write_str("rot90"),
            RuleKind::ColorSwap(a, b) => write!(f, "colorswap-{a}-{b}"),
        }
    }
}

impl FromStr for RuleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(RuleKind::Identity),
            "hmirror" => Ok(RuleKind::HorizontalMirror),
            "rot90" => Ok(RuleKind::Rotate90),
            _ => {
                let bad = || format!("unknown rule `{s}`");
                let rest = s.strip_prefix("colorswap-").ok_or_else(bad)?;
                let (a, b) = rest.split_once('-').ok_or_else(bad)?;
                let a: u8 = a.parse().map_err(|_| bad())?;
                let b: u8 = b.parse().map_err(|_| bad())?;
                if a > 9 || b > 9 || a == b {
                    return Err(format!("colorswap needs two distinct colors in 0..=9, got {a} and {b}"));
                }
                Ok(RuleKind::ColorSwap(a, b))
            }
        }
    }
}

impl TryFrom<String> for RuleKind {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RuleKind> for String {
    fn from(r: RuleKind) -> String {
        r.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticRule {
    pub kind: RuleKind,
    pub seed: u64,
}

/// Recovers the rule from a synthetic task id (`syn.{rule}.s{seed}.{idx}`).
pub fn rule_from_task_id(id: &str) -> Option<RuleKind> {
    let mut parts = id.split('.');
    if parts.next()? != "syn" {
        return None;
    }
    parts.next()?.parse().ok()
}

const MAX_DRAWS: usize = 10_000;

/// `count` tasks with `n_demos` demonstrations each, all following `rule`.
///
/// Inputs within a task are pairwise distinct and, except for the identity
/// rule, are never fixed points of the rule, so every demonstration actually
/// shows the transformation. Tiny grids may not offer enough such inputs;
/// then fewer distinct inputs are drawn and duplicates are allowed.
pub fn gen_synthetic(rule: SyntheticRule, n_demos: usize, dims: (usize, usize), count: usize) -> Vec<Task> {
    let (rows, cols) = dims;
    assert!(n_demos >= 1, "n_demos must be at least 1");
    assert!(
        (1..=MINI_ARC_MAX_DIM).contains(&rows) && (1..=MINI_ARC_MAX_DIM).contains(&cols),
        "grid dims must lie within 1..=5"
    );
    (0..count)
        .map(|idx| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_from(&[
                rule.kind.to_string().as_bytes(),
                &rule.seed.to_le_bytes(),
                &(idx as u64).to_le_bytes(),
                &(rows as u64).to_le_bytes(),
                &(cols as u64).to_le_bytes(),
            ]));
            let inputs = draw_inputs(&mut rng, rule.kind, rows, cols, n_demos + 1);
            let mut pairs = inputs.into_iter().map(|g| {
                let out = rule.kind.apply(&g);
                (g, out)
            });
            let demos = pairs
                .by_ref()
                .take(n_demos)
                .map(|(i, o)| Exemplar {
                    input: TaskInput::Grid(i),
                    output: TaskOutput::Grid(o),
                })
                .collect();
            let (test_in, test_out) = pairs.next().expect("n_demos + 1 inputs drawn");
            Task::new(
                format!("syn.{}.s{}.{idx:04}", rule.kind, rule.seed),
                BenchmarkKind::MiniArc,
                demos,
                TaskInput::Grid(test_in),
                TaskOutput::Grid(test_out),
            )
        })
        .collect()
}

fn random_grid(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Grid {
    Grid::from_fn(rows, cols, |_, _| if rng.random_bool(0.5) { 0 } else { rng.random_range(1..=9) })
        .expect("dims checked")
}

fn draw_inputs(rng: &mut ChaCha8Rng, kind: RuleKind, rows: usize, cols: usize, n: usize) -> Vec<Grid> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut draws = 0;
    while out.len() < n {
        let mut g = random_grid(rng, rows, cols);
        if let RuleKind::ColorSwap(a, _) = kind {
            // Make sure at least one swapped color is present.
            if !g.cells().iter().any(|c| kind.apply(&Grid::filled(1, 1, *c).expect("1x1")).get(0, 0) != *c) {
                g = g.with_cell(rng.random_range(0..rows), rng.random_range(0..cols), a);
            }
        }
        draws += 1;
        let informative = kind == RuleKind::Identity || kind.apply(&g) != g;
        if draws > MAX_DRAWS || (informative && seen.insert(g.clone())) {
            out.push(g);
        }
    }
    out
}
