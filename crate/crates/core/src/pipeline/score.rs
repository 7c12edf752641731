use crate::task::{Parsed, Prediction, TaskOutput, Verdict, VerdictDetail};

/// Exact scoring. Grids must match cell for cell, dimensions included;
/// labels must be the same label; parse failures are always wrong.
pub fn score(prediction: &Prediction, gold: &TaskOutput) -> Verdict {
    score_parsed(&prediction.parsed, gold)
}

pub fn score_parsed(parsed: &Parsed, gold: &TaskOutput) -> Verdict {
    match (parsed, gold) {
        (Parsed::Failure(_), _) => Verdict {
            correct: false,
            detail: VerdictDetail::ParseFailure,
        },
        (Parsed::Output(TaskOutput::Label(p)), TaskOutput::Label(g)) => Verdict {
            correct: p == g,
            detail: VerdictDetail::LabelMatch,
        },
        (Parsed::Output(p), g) => Verdict {
            correct: p == g,
            detail: VerdictDetail::ExactMatch,
        },
    }
}
