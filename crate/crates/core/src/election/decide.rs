//! The election decision procedure: per-round tallies with the intersection
//! filter and tag authentication, averaged over rounds, decided on the margin
//! against twice the complaint average.

use serde::{Deserialize, Serialize};

use crate::ballot::Edge;
use crate::{Error, Result};

use super::round::RoundTranscript;

/// Winner bit or a tie / drowned-margin outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Winner(u8),
    Undecided,
}

/// Numbers of one tallyman's election.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TallyOutcome {
    pub avg0: f64,
    pub avg1: f64,
    pub margin: f64,
    pub avg_complaints: f64,
    pub outcome: Outcome,
}

/// Agreement verdict across tallymen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    Discrepancy,
}

/// Full election result document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectionResult {
    pub avg0: f64,
    pub avg1: f64,
    pub margin: f64,
    pub avg_complaints: f64,
    /// Majority outcome across tallymen (the single outcome when t = 1).
    pub outcome: Outcome,
    pub per_tallyman: Vec<TallyOutcome>,
    pub consistency: Consistency,
    pub notes: Vec<String>,
}

/// Per-round tally recomputed from public data only: a tag contributes iff it
/// survives the intersection filter (recomputed in broadcast order) and its
/// authentication extras are complete and correct.
pub(crate) fn recount_round(t: &RoundTranscript) -> (u32, u32, Vec<bool>, Vec<bool>) {
    let mut counted_edges: Vec<Edge> = Vec::new();
    let mut counted_flags = Vec::with_capacity(t.tags.len());
    let mut verified_flags = Vec::with_capacity(t.tags.len());
    let (mut zeros, mut ones) = (0u32, 0u32);
    for record in &t.tags {
        let counted = !counted_edges.iter().any(|e| e.intersects(&record.tag.edge));
        if counted {
            counted_edges.push(record.tag.edge);
        }
        let verified = record.tag.extras.len() == t.required_extras()
            && crate::ballot::verify_tag(&record.tag, &t.x);
        counted_flags.push(counted);
        verified_flags.push(verified);
        if counted && verified {
            // Independent decode route: straight from the x bits.
            let parity = t.x.bit(record.tag.edge.i as usize) ^ t.x.bit(record.tag.edge.j as usize);
            if parity ^ record.tag.agreement {
                ones += 1;
            } else {
                zeros += 1;
            }
        }
    }
    (zeros, ones, counted_flags, verified_flags)
}

pub(crate) fn tally(transcripts: &[RoundTranscript]) -> Result<TallyOutcome> {
    if transcripts.is_empty() {
        return Err(Error::InvalidArgument("decide needs at least one transcript".into()));
    }
    let rounds = transcripts.len() as f64;
    let mut zeros = 0u64;
    let mut ones = 0u64;
    let mut complaints = 0u64;
    for t in transcripts {
        let (z, o, _, _) = recount_round(t);
        zeros += z as u64;
        ones += o as u64;
        complaints += t.complaints as u64;
    }
    let avg0 = zeros as f64 / rounds;
    let avg1 = ones as f64 / rounds;
    let margin = avg0 - avg1;
    let avg_complaints = complaints as f64 / rounds;
    let outcome = if margin.abs() > 2.0 * avg_complaints && margin != 0.0 {
        // Winner (1 − sign(margin)) / 2.
        Outcome::Winner(if margin > 0.0 { 0 } else { 1 })
    } else {
        Outcome::Undecided
    };
    Ok(TallyOutcome {
        avg0,
        avg1,
        margin,
        avg_complaints,
        outcome,
    })
}

/// Decide one tallyman's election from its round transcripts.
pub fn decide(transcripts: &[RoundTranscript]) -> Result<ElectionResult> {
    let section = tally(transcripts)?;
    Ok(assemble(vec![section]))
}

/// Combine per-tallyman tallies into the published result: top-level numbers
/// mirror the first tallyman, the outcome is the majority outcome, and any
/// disagreement raises a discrepancy (the exposure mechanism for dishonest
/// tallymen).
pub(crate) fn assemble(sections: Vec<TallyOutcome>) -> ElectionResult {
    let all_equal = sections
        .iter()
        .all(|s| s.outcome == sections[0].outcome);
    let outcome = majority_outcome(&sections);
    let first = sections[0].clone();
    ElectionResult {
        avg0: first.avg0,
        avg1: first.avg1,
        margin: first.margin,
        avg_complaints: first.avg_complaints,
        outcome,
        per_tallyman: sections,
        consistency: if all_equal {
            Consistency::Consistent
        } else {
            Consistency::Discrepancy
        },
        notes: vec![
            "votes dropped by edge collisions are not re-cast; round averaging absorbs them"
                .to_string(),
        ],
    }
}

fn majority_outcome(sections: &[TallyOutcome]) -> Outcome {
    let t = sections.len();
    let count = |o: Outcome| sections.iter().filter(|s| s.outcome == o).count();
    for candidate in [Outcome::Winner(0), Outcome::Winner(1), Outcome::Undecided] {
        if count(candidate) * 2 > t {
            return candidate;
        }
    }
    Outcome::Undecided
}
