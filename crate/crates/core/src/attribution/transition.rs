//! How each sampled task's category changes between two configurations.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::pipeline::ConfigId;

use super::record::{AttributionRecord, ErrorCategory};
use super::AttributionError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Side {
    pub run_id: String,
    pub config_id: ConfigId,
}

/// `counts[i][j]`: tasks in category `ALL[i]` under A and `ALL[j]` under B.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub a: Side,
    pub b: Side,
    pub counts: [[u64; 5]; 5],
}

impl TransitionMatrix {
    pub fn get(&self, from: ErrorCategory, to: ErrorCategory) -> u64 {
        self.counts[from.index()][to.index()]
    }

    pub fn row_sums(&self) -> [u64; 5] {
        self.counts.map(|row| row.iter().sum())
    }

    pub fn col_sums(&self) -> [u64; 5] {
        let mut out = [0; 5];
        for row in &self.counts {
            for (j, v) in row.iter().enumerate() {
                out[j] += v;
            }
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.row_sums().iter().sum()
    }
}

fn by_task(records: &[AttributionRecord]) -> Result<BTreeMap<&str, &AttributionRecord>, AttributionError> {
    let mut map = BTreeMap::new();
    for r in records {
        if map.insert(r.task_id.as_str(), r).is_some() {
            return Err(AttributionError::DuplicateTask(r.task_id.clone()));
        }
    }
    Ok(map)
}

fn side(records: &[AttributionRecord]) -> Side {
    records
        .first()
        .map(|r| Side {
            run_id: r.run_id.clone(),
            config_id: r.config_id,
        })
        .unwrap_or(Side {
            run_id: String::new(),
            config_id: ConfigId::A,
        })
}

/// Requires both record sets to cover exactly the same task ids, one record each.
pub fn transition(records_a: &[AttributionRecord], records_b: &[AttributionRecord]) -> Result<TransitionMatrix, AttributionError> {
    let a = by_task(records_a)?;
    let b = by_task(records_b)?;
    let ids_a: BTreeSet<&str> = a.keys().copied().collect();
    let ids_b: BTreeSet<&str> = b.keys().copied().collect();
    if ids_a != ids_b {
        return Err(AttributionError::SampleMismatch {
            only_a: ids_a.difference(&ids_b).map(|s| s.to_string()).collect(),
            only_b: ids_b.difference(&ids_a).map(|s| s.to_string()).collect(),
        });
    }
    let mut counts = [[0u64; 5]; 5];
    for (id, ra) in &a {
        counts[ra.category.index()][b[id].category.index()] += 1;
    }
    Ok(TransitionMatrix {
        a: side(records_a),
        b: side(records_b),
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowNode {
    pub id: String,
    pub side: String,
    pub category: ErrorCategory,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowEdge {
    pub source: String,
    pub target: String,
    pub weight: u64,
}

/// Node and edge lists for a flow chart: five nodes per side, one edge per
/// non-zero matrix cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub a: Side,
    pub b: Side,
    pub nodes: Vec<FlowNode>,
    pub edges: Vec<FlowEdge>,
}

pub fn flow(matrix: &TransitionMatrix) -> Flow {
    let node_id = |side: &str, c: ErrorCategory| format!("{side}:{c}");
    let rows = matrix.row_sums();
    let cols = matrix.col_sums();
    let mut nodes = Vec::with_capacity(10);
    for (side, sums) in [("a", rows), ("b", cols)] {
        for c in ErrorCategory::ALL {
            nodes.push(FlowNode {
                id: node_id(side, c),
                side: side.to_string(),
                category: c,
                count: sums[c.index()],
            });
        }
    }
    let mut edges = Vec::new();
    for from in ErrorCategory::ALL {
        for to in ErrorCategory::ALL {
            let weight = matrix.get(from, to);
            if weight > 0 {
                edges.push(FlowEdge {
                    source: node_id("a", from),
                    target: node_id("b", to),
                    weight,
                });
            }
        }
    }
    Flow {
        a: matrix.a.clone(),
        b: matrix.b.clone(),
        nodes,
        edges,
    }
}

/// Markdown rendering of the matrix, A categories down, B across.
pub fn transition_markdown(matrix: &TransitionMatrix) -> String {
    let mut out = format!("| {} ({}) \\ {} ({}) |", matrix.a.run_id, matrix.a.config_id, matrix.b.run_id, matrix.b.config_id);
    for c in ErrorCategory::ALL {
        out.push_str(&format!(" {} |", c.title()));
    }
    out.push_str(" Total |\n|---|");
    out.push_str(&"---:|".repeat(6));
    out.push('\n');
    let rows = matrix.row_sums();
    for from in ErrorCategory::ALL {
        out.push_str(&format!("| {} |", from.title()));
        for to in ErrorCategory::ALL {
            out.push_str(&format!(" {} |", matrix.get(from, to)));
        }
        out.push_str(&format!(" {} |\n", rows[from.index()]));
    }
    out.push_str("| Total |");
    for v in matrix.col_sums() {
        out.push_str(&format!(" {v} |"));
    }
    out.push_str(&format!(" {} |\n", matrix.total()));
    out
}
