//! The full voting protocol: rounds, the decision procedure, transcripts,
//! verification, and multi-tallyman cross-checking.

use rand::Rng;

use crate::rng::master_rng;
use crate::Result;

mod config;
mod decide;
mod records;
mod round;
mod verify;

pub use config::{ElectionConfig, NoiseSpec, TransferSpec};
pub use decide::{decide, Consistency, ElectionResult, Outcome, TallyOutcome};
pub use records::{from_records, to_records, ExtraRecord, TranscriptRecord, TRANSCRIPT_SCHEMA};
pub use round::{
    run_voting_round, tag_from_bits, tag_to_bits, AnonymityView, RoundEvents, RoundOutcome,
    RoundTranscript, SumRecord, TagRecord, VoterPrivate,
};
pub use verify::{verify_section, verify_transcript, VerifyOutcome};

/// Everything produced by one tallyman's election instance.
#[derive(Clone, Debug)]
pub struct TallymanRun {
    pub rounds: Vec<RoundOutcome>,
}

impl TallymanRun {
    pub fn transcripts(&self) -> Vec<RoundTranscript> {
        self.rounds.iter().map(|r| r.transcript.clone()).collect()
    }
}

/// Result plus the full per-tallyman round record.
#[derive(Clone, Debug)]
pub struct ElectionRun {
    pub result: ElectionResult,
    pub tallymen: Vec<TallymanRun>,
}

/// Run a full election: r rounds with fresh randomness per round, decided by
/// the margin test. With t > 1 tallymen, t independent elections run on the
/// same votes (each with private randomness) and the outcomes are compared.
pub fn run_election(
    cfg: &ElectionConfig,
    votes: &[bool],
    rng: &mut impl Rng,
) -> Result<ElectionRun> {
    cfg.validate()?;
    let mut sections = Vec::with_capacity(cfg.tallymen);
    let mut tallymen = Vec::with_capacity(cfg.tallymen);
    for tallyman in 0..cfg.tallymen {
        // Independent private randomness per tallyman.
        let mut tallyman_rng = master_rng(rng.gen());
        let mut rounds = Vec::with_capacity(cfg.rounds as usize);
        for round in 0..cfg.rounds {
            rounds.push(round::run_voting_round_for_tallyman(
                cfg,
                votes,
                round,
                tallyman,
                &mut tallyman_rng,
            )?);
        }
        let transcripts: Vec<RoundTranscript> =
            rounds.iter().map(|r| r.transcript.clone()).collect();
        sections.push(decide::tally(&transcripts)?);
        tallymen.push(TallymanRun { rounds });
    }
    Ok(ElectionRun {
        result: decide::assemble(sections),
        tallymen,
    })
}

#[cfg(test)]
mod tests;
