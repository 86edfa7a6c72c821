use super::*;
use crate::adversary::{AdversarySpec, ForgerSpec, TamperMode};
use crate::anonnet::QueuePermutation;
use crate::ballot::{Edge, RandomString, VoteTag};
use crate::rng::stream_rng;
use round::{RoundEvents, TagRecord};

fn tag(i: u32, j: u32, a: bool) -> VoteTag {
    VoteTag {
        edge: Edge::new(i, j).unwrap(),
        agreement: a,
        extras: vec![],
    }
}

/// Hand-built round: tags in broadcast order against a fixed x, with counted
/// and decoded fields filled the way the round runner would.
fn synthetic_round(round: u32, x_bits: &str, tags: Vec<VoteTag>, complaints: u32) -> RoundTranscript {
    let x = RandomString::new(x_bits.chars().map(|c| c == '1').collect()).unwrap();
    let mut records = Vec::new();
    let mut counted_edges: Vec<Edge> = Vec::new();
    for (position, t) in tags.into_iter().enumerate() {
        let counted = !counted_edges.iter().any(|e| e.intersects(&t.edge));
        if counted {
            counted_edges.push(t.edge);
        }
        let decoded_vote = crate::ballot::decode_vote(&t, &x).unwrap();
        records.push(TagRecord {
            position: position as u32,
            tag: t,
            counted,
            verified: true,
            decoded_vote,
        });
    }
    let voters = records.len().max(1);
    RoundTranscript {
        round,
        tag_copies: 1,
        queue: QueuePermutation::new((0..voters as u32).collect()).unwrap(),
        slot_rounds: vec![1; voters],
        tags: records,
        x,
        complaints,
        events: RoundEvents::default(),
    }
}

#[test]
fn decide_single_round_majority() {
    // Counted votes (0, 0, 1), zero complaints → margin 1, winner 0.
    let x = "10110010";
    let xs = RandomString::new(x.chars().map(|c| c == '1').collect()).unwrap();
    let mk = |i: u32, j: u32, v: bool| tag(i, j, xs.parity(Edge::new(i, j).unwrap()) ^ v);
    let t = synthetic_round(
        0,
        x,
        vec![mk(0, 1, false), mk(2, 3, false), mk(4, 5, true)],
        0,
    );
    let result = decide(&[t]).unwrap();
    assert_eq!(result.outcome, Outcome::Winner(0));
    assert_eq!(result.margin, 1.0);
    assert_eq!(result.avg0, 2.0);
    assert_eq!(result.avg1, 1.0);
    assert_eq!(result.consistency, Consistency::Consistent);
}

#[test]
fn decide_tie_is_undecided() {
    let x = "10110010";
    let xs = RandomString::new(x.chars().map(|c| c == '1').collect()).unwrap();
    let mk = |i: u32, j: u32, v: bool| tag(i, j, xs.parity(Edge::new(i, j).unwrap()) ^ v);
    let t = synthetic_round(0, x, vec![mk(0, 1, false), mk(2, 3, true)], 0);
    let result = decide(&[t]).unwrap();
    assert_eq!(result.outcome, Outcome::Undecided);
    assert_eq!(result.margin, 0.0);
}

#[test]
fn decide_margin_must_clear_twice_the_complaints() {
    // Margin 0.5 with avg complaints 0.4 → 0.5 < 0.8 → Undecided.
    let x = "10110010";
    let xs = RandomString::new(x.chars().map(|c| c == '1').collect()).unwrap();
    let mk = |i: u32, j: u32, v: bool| tag(i, j, xs.parity(Edge::new(i, j).unwrap()) ^ v);
    let mut rounds = Vec::new();
    for r in 0..10 {
        let tags = if r < 5 {
            vec![mk(0, 1, false)]
        } else {
            vec![]
        };
        let complaints = if r < 4 { 1 } else { 0 };
        rounds.push(synthetic_round(r, x, tags, complaints));
    }
    let result = decide(&rounds).unwrap();
    assert_eq!(result.avg0, 0.5);
    assert_eq!(result.avg_complaints, 0.4);
    assert_eq!(result.outcome, Outcome::Undecided);
}

#[test]
fn colliding_tags_drop_the_later_broadcast() {
    let x = "10110010";
    let t = synthetic_round(
        0,
        x,
        vec![tag(0, 1, false), tag(1, 2, false), tag(4, 5, true)],
        0,
    );
    assert!(t.tags[0].counted);
    assert!(!t.tags[1].counted, "second tag shares vertex 1");
    assert!(t.tags[2].counted);
    // A tag colliding only with an *uncounted* tag is still counted.
    let t2 = synthetic_round(
        0,
        x,
        vec![tag(0, 1, false), tag(1, 2, false), tag(2, 3, true)],
        0,
    );
    assert!(t2.tags[2].counted, "vertex 2 only appears in a dropped tag");
}

#[test]
fn honest_round_counts_every_vote() {
    let mut cfg = ElectionConfig::basic(3, 64, 1);
    cfg.trusted_tallyman = true;
    let votes = [false, false, true];
    // Collisions are possible at any n; find a collision-free round and
    // check it end to end.
    for seed in 0..20u64 {
        let mut rng = stream_rng(seed, 60);
        let outcome = run_voting_round(&cfg, &votes, 0, &mut rng).unwrap();
        let t = &outcome.transcript;
        if !t.tags.iter().all(|r| r.counted) {
            continue;
        }
        assert_eq!(t.tags.len(), 3);
        for slot in 0..3 {
            let party = t.queue.party_at(slot) as usize;
            assert_eq!(t.tags[slot].decoded_vote, votes[party]);
            assert!(t.tags[slot].verified);
        }
        assert_eq!(t.complaints, 0);
        let result = decide(&[t.clone()]).unwrap();
        assert_eq!(result.outcome, Outcome::Winner(0));
        return;
    }
    panic!("no collision-free round in 20 seeds");
}

#[test]
fn untrusted_round_with_ideal_resources_matches_trusted_semantics() {
    let mut cfg = ElectionConfig::basic(3, 8, 1);
    cfg.trusted_tallyman = false;
    let votes = [true, false, true];
    let mut rng = stream_rng(61, 0);
    let outcome = run_voting_round(&cfg, &votes, 0, &mut rng).unwrap();
    let t = &outcome.transcript;
    // Transfers happened (coin announcements present) and every counted tag
    // decodes to its voter's vote.
    assert!(!t.events.coin_sums.is_empty());
    assert!(!t.events.transfer_bits.is_empty());
    for slot in 0..3 {
        let party = t.queue.party_at(slot) as usize;
        if t.tags[slot].counted {
            assert_eq!(t.tags[slot].decoded_vote, votes[party]);
        }
    }
}

#[test]
fn unanimous_votes_give_exact_negative_margin() {
    // Single voter: no collisions are possible, margin is −1 exactly.
    let mut cfg = ElectionConfig::basic(1, 4, 3);
    cfg.trusted_tallyman = true;
    let mut rng = stream_rng(62, 0);
    let run = run_election(&cfg, &[true], &mut rng).unwrap();
    assert_eq!(run.result.outcome, Outcome::Winner(1));
    assert_eq!(run.result.margin, -1.0);

    // Five voters: on a collision-free election the margin is −N exactly.
    let mut cfg = ElectionConfig::basic(5, 256, 2);
    cfg.trusted_tallyman = true;
    for seed in 0..30u64 {
        let mut rng = stream_rng(seed, 63);
        let run = run_election(&cfg, &[true; 5], &mut rng).unwrap();
        let clean = run
            .tallymen[0]
            .rounds
            .iter()
            .all(|r| r.transcript.tags.iter().all(|t| t.counted));
        if clean {
            assert_eq!(run.result.margin, -5.0);
            assert_eq!(run.result.outcome, Outcome::Winner(1));
            return;
        }
    }
    panic!("no collision-free election in 30 seeds");
}

#[test]
fn majority_election_end_to_end() {
    let mut cfg = ElectionConfig::basic(5, 512, 5);
    cfg.trusted_tallyman = true;
    let votes = [false, false, false, true, true];
    let mut rng = stream_rng(64, 0);
    let run = run_election(&cfg, &votes, &mut rng).unwrap();
    assert_eq!(run.result.outcome, Outcome::Winner(0));
    assert!(run.result.margin > 0.0);
}

#[test]
fn dishonest_tallyman_is_exposed_by_discrepancy() {
    let mut cfg = ElectionConfig::basic(4, 64, 3);
    cfg.trusted_tallyman = true;
    cfg.tallymen = 2;
    cfg.adversary = Some(AdversarySpec::TallymanForger {
        tallyman: 1,
        target: true,
        extra_votes: 8,
    });
    let votes = [false, false, false, true];
    let mut discrepancies = 0;
    for seed in 0..10u64 {
        let mut rng = stream_rng(seed, 65);
        let run = run_election(&cfg, &votes, &mut rng).unwrap();
        if run.result.consistency == Consistency::Discrepancy {
            discrepancies += 1;
            assert_ne!(
                run.result.per_tallyman[0].outcome,
                run.result.per_tallyman[1].outcome
            );
        }
    }
    assert!(discrepancies >= 8, "only {discrepancies}/10 flagged");
}

#[test]
fn voter_forger_extras_are_recorded_and_filtered() {
    let mut cfg = ElectionConfig::basic(4, 64, 1);
    cfg.trusted_tallyman = true;
    cfg.adversary = Some(AdversarySpec::Forger(ForgerSpec {
        controlled: vec![0],
        votes_attempted: 4,
        target: true,
    }));
    let mut rng = stream_rng(66, 0);
    let outcome = run_voting_round(&cfg, &[false, false, true, false], 0, &mut rng).unwrap();
    let t = &outcome.transcript;
    assert_eq!(t.tags.len(), 4 + 3);
    // Forged tags are broadcast last with observed-disjoint edges, so they
    // all survive the filter.
    for record in &t.tags[4..] {
        assert!(record.counted);
    }
    // The controlled voter votes the target.
    assert_eq!(outcome.voters[0].vote, true);
}

#[test]
fn tampered_ballot_triggers_the_victims_complaint() {
    let mut cfg = ElectionConfig::basic(3, 8, 1);
    cfg.trusted_tallyman = true;
    cfg.adversary = Some(AdversarySpec::BallotTamper {
        slot: 0,
        tamper: TamperMode::PhaseFlip { label: 3 },
    });
    let mut straddled = 0;
    for seed in 0..400u64 {
        let mut rng = stream_rng(seed, 67);
        let outcome = run_voting_round(&cfg, &[false, true, false], 0, &mut rng).unwrap();
        let victim = outcome.transcript.queue.party_at(0) as usize;
        let private = &outcome.voters[victim];
        if private.tag.edge.touches(3) {
            straddled += 1;
            assert!(
                private.complaint,
                "straddling edge must fire a complaint (seed {seed})"
            );
            assert!(outcome.transcript.complaints >= 1);
        }
    }
    assert!(straddled > 30, "phase-flip label never straddled: {straddled}");
}

#[test]
fn verify_accepts_honest_runs_and_rejects_mutations() {
    let mut cfg = ElectionConfig::basic(3, 64, 2);
    cfg.trusted_tallyman = true;
    let votes = [false, true, false];
    let mut rng = stream_rng(68, 0);
    let run = run_election(&cfg, &votes, &mut rng).unwrap();
    let transcripts = run.tallymen[0].transcripts();
    let me = &run.tallymen[0].rounds[0].voters[1];
    let verdict = verify_transcript(&run.result, &transcripts, &me.tag, true);
    assert!(verdict.outcome_valid);
    // The voter's tag is found iff it was counted; either way the audit holds.
    if transcripts[0]
        .tags
        .iter()
        .any(|r| r.tag == me.tag && r.counted)
    {
        assert!(verdict.vote_counted);
    }

    // Wrong claimed vote → not counted, outcome still valid.
    let verdict = verify_transcript(&run.result, &transcripts, &me.tag, false);
    assert!(!verdict.vote_counted);
    assert!(verdict.outcome_valid);

    // Tampered published margin → invalid.
    let mut forged_result = run.result.clone();
    forged_result.per_tallyman[0].margin += 1.0;
    forged_result.margin += 1.0;
    let verdict = verify_transcript(&forged_result, &transcripts, &me.tag, true);
    assert!(!verdict.outcome_valid);

    // Tampered transcript fields → invalid.
    let mut mutated = transcripts.clone();
    mutated[0].tags[0].decoded_vote = !mutated[0].tags[0].decoded_vote;
    assert!(!verify_transcript(&run.result, &mutated, &me.tag, true).outcome_valid);

    let mut mutated = transcripts.clone();
    mutated[1].tags[1].counted = !mutated[1].tags[1].counted;
    assert!(!verify_transcript(&run.result, &mutated, &me.tag, true).outcome_valid);

    let mut mutated = transcripts.clone();
    mutated[0].tags[0].tag.agreement = !mutated[0].tags[0].tag.agreement;
    assert!(!verify_transcript(&run.result, &mutated, &me.tag, true).outcome_valid);

    let mut mutated = transcripts.clone();
    mutated[0].complaints += 1;
    assert!(!verify_transcript(&run.result, &mutated, &me.tag, true).outcome_valid);
}

#[test]
fn audit_recomputation_matches_decide_bit_for_bit() {
    let mut cfg = ElectionConfig::basic(4, 64, 3);
    cfg.trusted_tallyman = true;
    for seed in 0..5u64 {
        let mut rng = stream_rng(seed, 69);
        let run = run_election(&cfg, &[false, true, true, false], &mut rng).unwrap();
        let transcripts = run.tallymen[0].transcripts();
        let redecided = decide(&transcripts).unwrap();
        assert_eq!(redecided.per_tallyman[0], run.result.per_tallyman[0]);
        let any_tag = &transcripts[0].tags[0].tag.clone();
        let verdict = verify_transcript(&run.result, &transcripts, any_tag, false);
        assert!(verdict.outcome_valid);
    }
}

#[test]
fn transcript_records_roundtrip_through_serialization() {
    let mut cfg = ElectionConfig::basic(3, 64, 2);
    cfg.trusted_tallyman = true;
    let mut rng = stream_rng(70, 0);
    let run = run_election(&cfg, &[true, false, false], &mut rng).unwrap();
    let transcripts = run.tallymen[0].transcripts();
    let records = to_records(&transcripts, cfg.voters, cfg.bits, 0);
    let lines: Vec<String> = records
        .iter()
        .map(|r| serde_json::to_string(r).unwrap())
        .collect();
    let parsed: Vec<TranscriptRecord> = lines
        .iter()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records, parsed);
    let rebuilt = from_records(&parsed).unwrap();
    // The rebuilt public record supports the same decision and audit.
    let original = decide(&transcripts).unwrap();
    let redecided = decide(&rebuilt).unwrap();
    assert_eq!(original.per_tallyman[0], redecided.per_tallyman[0]);
    let me = &run.tallymen[0].rounds[0].voters[0];
    let v1 = verify_transcript(&original, &transcripts, &me.tag, me.vote);
    let v2 = verify_transcript(&original, &rebuilt, &me.tag, me.vote);
    assert_eq!(v1.outcome_valid, v2.outcome_valid);
    assert_eq!(v1.vote_counted, v2.vote_counted);
}

#[test]
fn tag_bit_serialization_roundtrips() {
    let t = VoteTag {
        edge: Edge::new(3, 17).unwrap(),
        agreement: true,
        extras: vec![
            (Edge::new(0, 9).unwrap(), false),
            (Edge::new(20, 31).unwrap(), true),
        ],
    };
    let bits = tag_to_bits(&t, 32);
    assert_eq!(bits.len(), (2 * 5 + 1) * 3);
    let back = tag_from_bits(&bits, 2, 32);
    assert_eq!(t, back);
}

#[test]
fn short_or_wrong_tags_are_rejected_under_the_extension() {
    let mut cfg = ElectionConfig::basic(2, 32, 1);
    cfg.tag_copies = 3;
    cfg.trusted_tallyman = true;
    let mut rng = stream_rng(71, 0);
    let outcome = run_voting_round(&cfg, &[false, true], 0, &mut rng).unwrap();
    for record in &outcome.transcript.tags {
        let complete = record.tag.extras.len() == 2;
        if record.verified {
            assert!(complete);
            assert!(record
                .tag
                .extras
                .iter()
                .all(|(e, p)| outcome.transcript.x.parity(*e) == *p));
        }
    }
}

#[test]
fn config_validation_catches_bad_setups() {
    assert!(ElectionConfig::basic(0, 8, 1).validate().is_err());
    assert!(ElectionConfig::basic(4, 7, 1).validate().is_err());
    assert!(ElectionConfig::basic(4, 6, 1).validate().is_err()); // below 2N
    let mut cfg = ElectionConfig::basic(3, 12, 1);
    cfg.noise = Some(NoiseSpec { p: 0.1 });
    assert!(cfg.validate().is_err()); // noise needs power-of-two n
    cfg.bits = 16;
    assert!(cfg.validate().is_ok());
}
