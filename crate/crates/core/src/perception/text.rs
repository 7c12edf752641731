//! Nested-list text form of grids: `[[0, 1], [2, 3]]`.

use crate::grid::{Grid, GridError};
use crate::task::{ParseFailure, ParseFailureKind};

/// Rows outermost, entries separated by `", "`.
pub fn serialize_grid(grid: &Grid) -> String {
    let mut out = String::with_capacity(grid.rows() * (grid.cols() * 3 + 4));
    out.push('[');
    for r in 0..grid.rows() {
        if r > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for (c, v) in grid.row(r).iter().enumerate() {
            if c > 0 {
                out.push_str(", ");
            }
            out.push((b'0' + v) as char);
        }
        out.push(']');
    }
    out.push(']');
    out
}

/// Extracts the last nested integer list in `text` that forms a valid grid.
///
/// Candidates are scanned left to right without overlap. If no candidate is a
/// valid grid, the failure reason is taken from the last candidate.
pub fn parse_grid(text: &str) -> Result<Grid, ParseFailure> {
    let bytes = text.as_bytes();
    let mut candidates = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'[' {
            if let Some((rows, end)) = nested_list(bytes, i) {
                candidates.push(rows);
                i = end;
                continue;
            }
        }
        i += 1;
    }
    let mut last_failure = None;
    for rows in candidates.iter().rev() {
        match Grid::from_rows(rows) {
            Ok(grid) => return Ok(grid),
            Err(err) => {
                if last_failure.is_none() {
                    last_failure = Some(err);
                }
            }
        }
    }
    Err(match last_failure {
        None => ParseFailure::new(ParseFailureKind::NoListFound, ""),
        Some(err) => {
            let kind = match err {
                GridError::Empty | GridError::Ragged { .. } => ParseFailureKind::RaggedRows,
                GridError::ColorOutOfRange { .. } => ParseFailureKind::OutOfRange,
                GridError::TooLarge { .. } => ParseFailureKind::TooLarge,
            };
            ParseFailure::new(kind, err.to_string())
        }
    })
}

fn skip_ws(b: &[u8], mut i: usize) -> usize {
    while i < b.len() && b[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

/// `[ row (, row)* ]` starting at `start`; returns rows and the index past `]`.
fn nested_list(b: &[u8], start: usize) -> Option<(Vec<Vec<i64>>, usize)> {
    let mut i = skip_ws(b, start + 1);
    let mut rows = Vec::new();
    loop {
        let (row, next) = int_list(b, i)?;
        rows.push(row);
        i = skip_ws(b, next);
        match b.get(i)? {
            b',' => i = skip_ws(b, i + 1),
            b']' => return Some((rows, i + 1)),
            _ => return None,
        }
    }
}

/// `[ int (, int)* ]` or `[]`.
fn int_list(b: &[u8], start: usize) -> Option<(Vec<i64>, usize)> {
    if b.get(start) != Some(&b'[') {
        return None;
    }
    let mut i = skip_ws(b, start + 1);
    let mut out = Vec::new();
    if b.get(i) == Some(&b']') {
        return Some((out, i + 1));
    }
    loop {
        let digits_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == digits_start {
            return None;
        }
        let digits = &b[digits_start..i];
        let value = if digits.len() > 9 {
            i64::MAX
        } else {
            std::str::from_utf8(digits).ok()?.parse().ok()?
        };
        out.push(value);
        i = skip_ws(b, i);
        match b.get(i)? {
            b',' => i = skip_ws(b, i + 1),
            b']' => return Some((out, i + 1)),
            _ => return None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    #[test]
    fn serializes_like_the_reference_listing() {
        let g = grid(&[&[0, 0, 0, 0, 0], &[3, 3, 0, 0, 0], &[0, 0, 3, 0, 0], &[0, 0, 0, 1, 1], &[0, 0, 0, 4, 1]]);
        assert_eq!(
            serialize_grid(&g),
            "[[0, 0, 0, 0, 0], [3, 3, 0, 0, 0], [0, 0, 3, 0, 0], [0, 0, 0, 1, 1], [0, 0, 0, 4, 1]]"
        );
        assert_eq!(serialize_grid(&grid(&[&[7]])), "[[7]]");
    }

    #[test]
    fn parses_single_candidate() {
        assert_eq!(parse_grid("The answer is [[3, 0], [0, 3]]").unwrap(), grid(&[&[3, 0], &[0, 3]]));
    }

    #[test]
    fn last_candidate_wins() {
        assert_eq!(parse_grid("First I tried [[1]] but the answer is [[2]]").unwrap(), grid(&[&[2]]));
    }

    #[test]
    fn ragged_rows_fail() {
        let err = parse_grid("[[1, 2], [3]]").unwrap_err();
        assert_eq!(err.kind, ParseFailureKind::RaggedRows);
    }

    #[test]
    fn out_of_range_fails() {
        assert_eq!(parse_grid("[[1, 12]]").unwrap_err().kind, ParseFailureKind::OutOfRange);
        assert_eq!(parse_grid("[[1, 99999999999999]]").unwrap_err().kind, ParseFailureKind::OutOfRange);
    }

    #[test]
    fn prose_without_list_fails() {
        assert_eq!(parse_grid("I cannot tell.").unwrap_err().kind, ParseFailureKind::NoListFound);
        assert_eq!(parse_grid("[1, 2, 3]").unwrap_err().kind, ParseFailureKind::NoListFound);
        assert_eq!(parse_grid("[[a]]").unwrap_err().kind, ParseFailureKind::NoListFound);
    }

    #[test]
    fn tolerates_whitespace_and_newlines() {
        let text = "Output:\n[\n  [1,2],\n  [3, 4 ]\n]\n";
        assert_eq!(parse_grid(text).unwrap(), grid(&[&[1, 2], &[3, 4]]));
    }

    #[test]
    fn valid_earlier_candidate_beats_invalid_later_one() {
        assert_eq!(parse_grid("[[1]] then [[1], [2, 3]]").unwrap(), grid(&[&[1]]));
    }

    #[test]
    fn triple_nesting_finds_inner_grid() {
        assert_eq!(parse_grid("[[[5]]]").unwrap(), grid(&[&[5]]));
    }

    proptest! {
        #[test]
        fn parse_inverts_serialize(rows in 1usize..=30, cols in 1usize..=30, seed in any::<u64>()) {
            let mut state = seed;
            let g = Grid::from_fn(rows, cols, |_, _| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % 10) as u8
            }).unwrap();
            prop_assert_eq!(parse_grid(&serialize_grid(&g)).unwrap(), g);
        }
    }
}
