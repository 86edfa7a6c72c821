//! Voter-side and auditor-side verification: a voter checks that its own tag
//! was counted and decodes to its vote; anyone replays the public decision
//! function and compares it with the published result.

use crate::ballot::VoteTag;

use super::decide::{assemble, recount_round, tally, ElectionResult};
use super::round::RoundTranscript;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub vote_counted: bool,
    pub outcome_valid: bool,
}

/// Verify a single-tallyman result against its transcripts.
pub fn verify_transcript(
    result: &ElectionResult,
    transcripts: &[RoundTranscript],
    my_tag: &VoteTag,
    my_vote: bool,
) -> VerifyOutcome {
    VerifyOutcome {
        vote_counted: vote_counted(transcripts, my_tag, my_vote),
        outcome_valid: section_valid(result, 0, transcripts)
            && top_level_consistent(result),
    }
}

/// Verify one tallyman's section of a multi-tallyman result.
pub fn verify_section(
    result: &ElectionResult,
    section: usize,
    transcripts: &[RoundTranscript],
    my_tag: &VoteTag,
    my_vote: bool,
) -> VerifyOutcome {
    VerifyOutcome {
        vote_counted: vote_counted(transcripts, my_tag, my_vote),
        outcome_valid: section_valid(result, section, transcripts),
    }
}

fn vote_counted(transcripts: &[RoundTranscript], my_tag: &VoteTag, my_vote: bool) -> bool {
    transcripts.iter().any(|t| {
        t.tags.iter().any(|record| {
            record.tag == *my_tag
                && record.counted
                && record.verified
                && record.decoded_vote == my_vote
        })
    })
}

/// Replays the whole public pipeline: stored per-tag flags must match their
/// recomputation and the stored tally must match a fresh `decide` bit for bit.
fn section_valid(result: &ElectionResult, section: usize, transcripts: &[RoundTranscript]) -> bool {
    let Some(stored) = result.per_tallyman.get(section) else {
        return false;
    };
    for t in transcripts {
        let (_, _, counted, verified) = recount_round(t);
        for (record, (c, v)) in t.tags.iter().zip(counted.iter().zip(&verified)) {
            let decoded = match crate::ballot::decode_vote(&record.tag, &t.x) {
                Ok(d) => d,
                Err(_) => return false,
            };
            if record.counted != *c || record.verified != *v || record.decoded_vote != decoded {
                return false;
            }
        }
    }
    let Ok(recomputed) = tally(transcripts) else {
        return false;
    };
    recomputed.avg0 == stored.avg0
        && recomputed.avg1 == stored.avg1
        && recomputed.margin == stored.margin
        && recomputed.avg_complaints == stored.avg_complaints
        && recomputed.outcome == stored.outcome
}

/// For single-tallyman results the top level must mirror its only section.
fn top_level_consistent(result: &ElectionResult) -> bool {
    if result.per_tallyman.len() != 1 {
        return true;
    }
    let rebuilt = assemble(result.per_tallyman.clone());
    rebuilt.avg0 == result.avg0
        && rebuilt.margin == result.margin
        && rebuilt.avg_complaints == result.avg_complaints
        && rebuilt.outcome == result.outcome
        && rebuilt.consistency == result.consistency
}
