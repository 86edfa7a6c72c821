//! Line-oriented transcript record format: one record per broadcast tag plus
//! per-round records for the revealed x and the complaint sum. The queue
//! assignment and announcement streams are deliberately absent — the file
//! carries exactly the public data an external auditor needs.

use serde::{Deserialize, Serialize};

use crate::ballot::{Edge, RandomString, VoteTag};
use crate::anonnet::QueuePermutation;
use crate::{Error, Result};

use super::round::{RoundEvents, RoundTranscript, TagRecord};

pub const TRANSCRIPT_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtraRecord {
    pub i: u32,
    pub j: u32,
    pub p: u8,
}

/// One line of a transcript file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TranscriptRecord {
    Header {
        schema: u32,
        voters: u32,
        bits: u32,
        rounds: u32,
        tag_copies: u32,
        tallyman: u32,
    },
    Tag {
        round: u32,
        position: u32,
        i: u32,
        j: u32,
        a: u8,
        extras: Vec<ExtraRecord>,
        counted: bool,
        decoded_vote: u8,
    },
    X {
        round: u32,
        x: String,
    },
    Complaints {
        round: u32,
        sum: u32,
    },
}

/// Flatten transcripts into the record stream.
pub fn to_records(
    transcripts: &[RoundTranscript],
    voters: usize,
    bits: usize,
    tallyman: usize,
) -> Vec<TranscriptRecord> {
    let tag_copies = transcripts.first().map(|t| t.tag_copies).unwrap_or(1);
    let mut records = vec![TranscriptRecord::Header {
        schema: TRANSCRIPT_SCHEMA,
        voters: voters as u32,
        bits: bits as u32,
        rounds: transcripts.len() as u32,
        tag_copies,
        tallyman: tallyman as u32,
    }];
    for t in transcripts {
        for record in &t.tags {
            records.push(TranscriptRecord::Tag {
                round: t.round,
                position: record.position,
                i: record.tag.edge.i,
                j: record.tag.edge.j,
                a: record.tag.agreement as u8,
                extras: record
                    .tag
                    .extras
                    .iter()
                    .map(|(e, p)| ExtraRecord {
                        i: e.i,
                        j: e.j,
                        p: *p as u8,
                    })
                    .collect(),
                counted: record.counted,
                decoded_vote: record.decoded_vote as u8,
            });
        }
        records.push(TranscriptRecord::X {
            round: t.round,
            x: t.x.to_hex(),
        });
        records.push(TranscriptRecord::Complaints {
            round: t.round,
            sum: t.complaints,
        });
    }
    records
}

/// Rebuild auditable transcripts from a record stream. Announcement streams
/// and the queue assignment are not part of the file; the rebuilt rounds
/// carry empty events and an identity placeholder queue, which the public
/// decision and verification functions never consult.
pub fn from_records(records: &[TranscriptRecord]) -> Result<Vec<RoundTranscript>> {
    let Some(TranscriptRecord::Header {
        schema,
        voters,
        bits,
        rounds,
        tag_copies,
        ..
    }) = records.first()
    else {
        return Err(Error::InvalidArgument("transcript stream missing header".into()));
    };
    if *schema != TRANSCRIPT_SCHEMA {
        return Err(Error::InvalidArgument(format!(
            "unsupported transcript schema {schema}"
        )));
    }
    let n = *bits as usize;
    let mut tags: Vec<Vec<(u32, VoteTag, bool, bool)>> = vec![Vec::new(); *rounds as usize];
    let mut xs: Vec<Option<RandomString>> = vec![None; *rounds as usize];
    let mut complaints: Vec<Option<u32>> = vec![None; *rounds as usize];
    for record in &records[1..] {
        match record {
            TranscriptRecord::Header { .. } => {
                return Err(Error::InvalidArgument("duplicate transcript header".into()))
            }
            TranscriptRecord::Tag {
                round,
                position,
                i,
                j,
                a,
                extras,
                counted,
                decoded_vote,
            } => {
                let slot = tags
                    .get_mut(*round as usize)
                    .ok_or_else(|| Error::InvalidArgument(format!("round {round} out of range")))?;
                let tag = VoteTag {
                    edge: Edge::new(*i, *j)?,
                    agreement: *a != 0,
                    extras: extras
                        .iter()
                        .map(|e| Ok((Edge::new(e.i, e.j)?, e.p != 0)))
                        .collect::<Result<Vec<_>>>()?,
                };
                slot.push((*position, tag, *counted, *decoded_vote != 0));
            }
            TranscriptRecord::X { round, x } => {
                let slot = xs
                    .get_mut(*round as usize)
                    .ok_or_else(|| Error::InvalidArgument(format!("round {round} out of range")))?;
                *slot = Some(RandomString::from_hex(x, n)?);
            }
            TranscriptRecord::Complaints { round, sum } => {
                let slot = complaints
                    .get_mut(*round as usize)
                    .ok_or_else(|| Error::InvalidArgument(format!("round {round} out of range")))?;
                *slot = Some(*sum);
            }
        }
    }
    let placeholder_queue = QueuePermutation::new((0..*voters).collect())?;
    let mut out = Vec::with_capacity(*rounds as usize);
    for round in 0..*rounds as usize {
        let x = xs[round]
            .take()
            .ok_or_else(|| Error::InvalidArgument(format!("round {round} missing x record")))?;
        let sum = complaints[round]
            .ok_or_else(|| Error::InvalidArgument(format!("round {round} missing complaints")))?;
        let mut round_tags = std::mem::take(&mut tags[round]);
        round_tags.sort_by_key(|(position, ..)| *position);
        let tag_records = round_tags
            .into_iter()
            .map(|(position, tag, counted, decoded_vote)| {
                let verified = tag.extras.len() == (*tag_copies as usize).saturating_sub(1)
                    && crate::ballot::verify_tag(&tag, &x);
                TagRecord {
                    position,
                    tag,
                    counted,
                    verified,
                    decoded_vote,
                }
            })
            .collect();
        out.push(RoundTranscript {
            round: round as u32,
            tag_copies: *tag_copies,
            queue: placeholder_queue.clone(),
            slot_rounds: vec![],
            tags: tag_records,
            x,
            complaints: sum,
            events: RoundEvents::default(),
        });
    }
    Ok(out)
}
