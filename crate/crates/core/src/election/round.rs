//! One voting round: queue, ballot delivery, measurement, anonymous tag
//! broadcast, x reveal, decoding, and the anonymous complaint sum.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{forge, tamper_ballot, AdversarySpec};
use crate::anonnet::{
    broadcast_bit, build_queue, secure_sum, transfer_channel_use, ChannelModel, QueuePermutation,
    RingConfig, SumRun, TransferResource, UseBranch,
};
use crate::ballot::{
    encode_ballot, encode_ballot_padded, measure_ballot, random_matching, BallotOutcome, Edge,
    RandomString, VoteTag,
};
use crate::qsim::{bitflip_channel, pauli_on_bit, NoiseParams, Pauli, PureState};
use crate::{Error, Result};

use super::config::ElectionConfig;

/// Announcement record of one secure sum, in ring-party order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumRecord {
    pub modulus: u32,
    pub value: u32,
    pub announcements: Vec<u32>,
    pub keygen_attempts: u32,
}

impl SumRecord {
    fn from_run(run: &SumRun, modulus: usize) -> Self {
        SumRecord {
            modulus: modulus as u32,
            value: run.value as u32,
            announcements: run.announcements.clone(),
            keygen_attempts: run.keygen_attempts,
        }
    }
}

/// Public announcement streams of one round, in causal order per phase.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundEvents {
    pub queue_sums: Vec<SumRecord>,
    pub coin_sums: Vec<SumRecord>,
    /// X-measurement bits announced per GHZ use (transfer or verification).
    pub transfer_bits: Vec<Vec<bool>>,
    pub broadcast_sums: Vec<SumRecord>,
    pub complaint_sum: Option<SumRecord>,
}

/// One broadcast tag as it appears in the public record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagRecord {
    pub position: u32,
    pub tag: VoteTag,
    /// Intersection filter: true iff this tag's edge is disjoint from every
    /// counted earlier edge.
    pub counted: bool,
    /// Tag-extension authentication: extras complete and correct against x.
    pub verified: bool,
    /// (x_i ⊕ x_j) ⊕ a, computable by anyone once x is revealed.
    pub decoded_vote: bool,
}

/// Ordered public record of one voting round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTranscript {
    pub round: u32,
    /// Protocol parameter: extras required per tag (tag_copies − 1).
    pub tag_copies: u32,
    /// Slot-to-party assignment. Simulator-internal: the assignment is never
    /// published (announcing it would void anonymity) and is excluded from
    /// the public view and the transcript file format.
    pub queue: QueuePermutation,
    /// Queue rounds spent per slot (public timing side channel).
    pub slot_rounds: Vec<u32>,
    pub tags: Vec<TagRecord>,
    /// Revealed at round end.
    pub x: RandomString,
    /// Output of the anonymous complaint sum.
    pub complaints: u32,
    pub events: RoundEvents,
}

/// Adversary-visible projection of a round: everything broadcast, nothing
/// private (no queue assignment, no votes, no measured parities).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnonymityView<'a> {
    pub slot_rounds: &'a [u32],
    pub tags: &'a [TagRecord],
    pub x: &'a RandomString,
    pub complaints: u32,
    pub events: &'a RoundEvents,
}

impl RoundTranscript {
    pub fn public_view(&self) -> AnonymityView<'_> {
        AnonymityView {
            slot_rounds: &self.slot_rounds,
            tags: &self.tags,
            x: &self.x,
            complaints: self.complaints,
            events: &self.events,
        }
    }

    /// Number of extras a complete tag must carry in this round.
    pub fn required_extras(&self) -> usize {
        self.tag_copies.saturating_sub(1) as usize
    }
}

/// Per-voter private state accumulated during a round.
#[derive(Clone, Debug, PartialEq)]
pub struct VoterPrivate {
    pub vote: bool,
    pub tag: VoteTag,
    /// Parity the voter believes it measured for its voted edge.
    pub measured_parity: bool,
    /// Ballot measurement returned an invalid (padded) outcome.
    pub corrupted: bool,
    /// Complaint bit contributed to the anonymous sum.
    pub complaint: bool,
}

/// A round's public transcript plus the simulator-private voter state.
#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub transcript: RoundTranscript,
    pub voters: Vec<VoterPrivate>,
}

fn label_bits(n: usize) -> usize {
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

fn push_label(bits: &mut Vec<bool>, label: u32, width: usize) {
    for k in (0..width).rev() {
        bits.push(label & (1 << k) != 0);
    }
}

fn pop_label(bits: &[bool], pos: &mut usize, width: usize) -> u32 {
    let mut label = 0u32;
    for _ in 0..width {
        label = (label << 1) | (bits[*pos] as u32);
        *pos += 1;
    }
    label
}

/// Serialize a tag to broadcast bits: i, j (⌈log₂n⌉ bits each, most
/// significant first), the agreement bit, then the extras in order.
pub fn tag_to_bits(tag: &VoteTag, n: usize) -> Vec<bool> {
    let width = label_bits(n);
    let mut bits = Vec::with_capacity((2 * width + 1) * (1 + tag.extras.len()));
    push_label(&mut bits, tag.edge.i, width);
    push_label(&mut bits, tag.edge.j, width);
    bits.push(tag.agreement);
    for (e, p) in &tag.extras {
        push_label(&mut bits, e.i, width);
        push_label(&mut bits, e.j, width);
        bits.push(*p);
    }
    bits
}

/// Reconstruct a tag from broadcast bits. Corrupted announcements can yield
/// out-of-range or degenerate labels; every party applies the same clamp so
/// the public record stays well-formed (the vote then simply fails checks).
pub fn tag_from_bits(bits: &[bool], extras: usize, n: usize) -> VoteTag {
    let width = label_bits(n);
    let mut pos = 0;
    let read_edge = |pos: &mut usize| {
        let i = pop_label(bits, pos, width) % n as u32;
        let mut j = pop_label(bits, pos, width) % n as u32;
        if i == j {
            j = (i + 1) % n as u32;
        }
        Edge::new(i, j).expect("clamped labels are distinct")
    };
    let edge = read_edge(&mut pos);
    let agreement = bits[pos];
    pos += 1;
    let mut extra_pairs = Vec::with_capacity(extras);
    for _ in 0..extras {
        let e = read_edge(&mut pos);
        let p = bits[pos];
        pos += 1;
        extra_pairs.push((e, p));
    }
    VoteTag {
        edge,
        agreement,
        extras: extra_pairs,
    }
}

struct BroadcastPhase {
    records: Vec<SumRecord>,
}

impl BroadcastPhase {
    fn broadcast_tag(
        &mut self,
        tag: &VoteTag,
        sender: usize,
        extras: usize,
        n: usize,
        ring: &RingConfig,
        rng: &mut impl Rng,
    ) -> Result<VoteTag> {
        let bits = tag_to_bits(tag, n);
        let mut received = Vec::with_capacity(bits.len());
        for &bit in &bits {
            let (out, run) = broadcast_bit(sender, bit, ring, rng)?;
            self.records.push(SumRecord::from_run(&run, 2));
            received.push(out);
        }
        Ok(tag_from_bits(&received, extras, n))
    }
}

/// A voter measures its ballot copies: one voted edge from the first copy and
/// disjoint extra parities from the rest. An invalid outcome on the first
/// copy degrades the vote to an unbiased coin on a random edge of the same
/// matching (the complaint flags it); colliding or invalid extras are dropped
/// and leave the tag short, which authentication later rejects.
fn measure_copies(
    copies: &[PureState],
    n: usize,
    vote: bool,
    rng: &mut impl Rng,
) -> Result<(VoteTag, bool, bool)> {
    let first_matching = random_matching(n, rng)?;
    let (main_edge, parity, corrupted) =
        match measure_ballot(&copies[0], &first_matching, rng)? {
            BallotOutcome::Edge { edge, parity } => (edge, parity, false),
            BallotOutcome::Invalid { .. } => {
                let e = first_matching.pairs()[rng.gen_range(0..first_matching.pairs().len())];
                (e, rng.gen_bool(0.5), true)
            }
        };
    let mut extras: Vec<(Edge, bool)> = Vec::with_capacity(copies.len() - 1);
    for copy in &copies[1..] {
        let m = random_matching(n, rng)?;
        if let BallotOutcome::Edge { edge, parity } = measure_ballot(copy, &m, rng)? {
            let disjoint = !edge.intersects(&main_edge)
                && extras.iter().all(|(e, _)| !e.intersects(&edge));
            if disjoint {
                extras.push((edge, parity));
            }
        }
    }
    let tag = VoteTag {
        edge: main_edge,
        agreement: parity ^ vote,
        extras,
    };
    Ok((tag, parity, corrupted))
}

/// Run one voting round.
///
/// Builds the queue, delivers `tag_copies` ballots per voter (directly in
/// trusted mode, by anonymous transfer otherwise), measures, broadcasts the
/// tags bitwise over the anonymous channel in queue order (adversarial tags
/// appended last), reveals x, decodes, applies the intersection filter in
/// broadcast order, and aggregates complaints anonymously.
pub fn run_voting_round(
    cfg: &ElectionConfig,
    votes: &[bool],
    round: u32,
    rng: &mut impl Rng,
) -> Result<RoundOutcome> {
    run_voting_round_for_tallyman(cfg, votes, round, 0, rng)
}

pub(crate) fn run_voting_round_for_tallyman(
    cfg: &ElectionConfig,
    votes: &[bool],
    round: u32,
    tallyman: usize,
    rng: &mut impl Rng,
) -> Result<RoundOutcome> {
    run_round_inner(cfg, votes, round, tallyman, rng).map_err(|e| e.in_round(round))
}

fn run_round_inner(
    cfg: &ElectionConfig,
    votes: &[bool],
    round: u32,
    tallyman: usize,
    rng: &mut impl Rng,
) -> Result<RoundOutcome> {
    cfg.validate()?;
    let nv = cfg.voters;
    let n = cfg.bits;
    if votes.len() != nv {
        return Err(Error::InvalidArgument(format!(
            "need one vote per voter: {} votes for {nv} voters",
            votes.len()
        )));
    }

    let channel = cfg
        .adversary
        .as_ref()
        .map(AdversarySpec::channel)
        .unwrap_or(ChannelModel::Ideal);
    let ring = RingConfig::new(nv)?.with_channel(channel);
    let mut events = RoundEvents::default();

    // Adversary roles for this round.
    let forger = match &cfg.adversary {
        Some(AdversarySpec::Forger(spec)) => Some(spec.clone()),
        _ => None,
    };
    let tallyman_forger = match &cfg.adversary {
        Some(AdversarySpec::TallymanForger {
            tallyman: t,
            target,
            extra_votes,
        }) if *t == tallyman => Some((*target, *extra_votes)),
        _ => None,
    };
    let ballot_tamper = match &cfg.adversary {
        Some(AdversarySpec::BallotTamper { slot, tamper }) => Some((*slot, *tamper)),
        _ => None,
    };

    // Effective votes: controlled voters vote the forger's target.
    let mut effective_votes = votes.to_vec();
    if let Some(spec) = &forger {
        for &v in &spec.controlled {
            effective_votes[v as usize] = spec.target;
        }
    }

    let x = RandomString::random(n, rng)?;

    // Anonymous queue.
    let queue_run = build_queue(&ring, rng)?;
    events.queue_sums = queue_run
        .sums
        .iter()
        .map(|s| SumRecord::from_run(s, ring.modulus))
        .collect();
    let queue = queue_run.permutation;

    // Ballot preparation and delivery, in queue order.
    let padded = cfg.needs_padding();
    let transport_qubits = cfg.transport_qubits();
    let resource = if cfg.trusted_tallyman {
        None
    } else {
        let res = match cfg.transfer.test_bits {
            Some(bits) => TransferResource::with_test_bits(nv, cfg.transfer.fidelity, bits)?,
            None => TransferResource::new(nv, cfg.transfer.fidelity)?,
        };
        Some(res)
    };
    let noise = match cfg.noise {
        Some(spec) => Some(NoiseParams::new(spec.p, transport_qubits)?),
        None => None,
    };

    let mut delivered: Vec<Vec<PureState>> = vec![Vec::new(); nv];
    for slot in 0..nv {
        let party = queue.party_at(slot) as usize;
        for copy in 0..cfg.tag_copies {
            let mut state = if padded {
                encode_ballot_padded(&x)
            } else {
                encode_ballot(&x)
            };
            if let Some((tampered_slot, mode)) = ballot_tamper {
                if tampered_slot == slot && copy == 0 {
                    state = tamper_ballot(&state, mode, rng)?;
                }
            }
            if let Some(res) = &resource {
                let use_cap = 400 * nv.max(2);
                for qubit in 0..transport_qubits {
                    let mut attempts = 0;
                    loop {
                        attempts += 1;
                        if attempts > use_cap {
                            return Err(Error::Unavailable {
                                attempts: use_cap,
                                context: "anonymous transfer starved of usable resources".into(),
                            });
                        }
                        let usage = transfer_channel_use(party, res, rng)?;
                        events
                            .coin_sums
                            .extend(usage.coin_sums.iter().map(|s| SumRecord::from_run(s, 2)));
                        events.transfer_bits.push(usage.announcements.clone());
                        match usage.branch {
                            UseBranch::Verify { .. } => continue,
                            UseBranch::Transfer { pauli } => {
                                if pauli != Pauli::I {
                                    state = pauli_on_bit(&state, qubit, pauli)?;
                                }
                                break;
                            }
                        }
                    }
                }
            }
            if let Some(np) = &noise {
                state = bitflip_channel(&state, np, rng)?;
            }
            delivered[party].push(state);
        }
    }

    // Measurement.
    let mut voter_tags: Vec<VoteTag> = Vec::with_capacity(nv);
    let mut measured_parities = Vec::with_capacity(nv);
    let mut corrupted_flags = Vec::with_capacity(nv);
    for party in 0..nv {
        let (tag, parity, corrupted) =
            measure_copies(&delivered[party], n, effective_votes[party], rng)?;
        voter_tags.push(tag);
        measured_parities.push(parity);
        corrupted_flags.push(corrupted);
    }

    // Broadcast phase, in queue order; adversarial extras appended last.
    let bit_ring = RingConfig::bit_broadcast(nv)?.with_channel(channel);
    let mut phase = BroadcastPhase {
        records: Vec::new(),
    };
    let extras_required = cfg.tag_copies - 1;
    let mut broadcast: Vec<VoteTag> = Vec::with_capacity(nv);
    for slot in 0..nv {
        let party = queue.party_at(slot) as usize;
        let received = phase.broadcast_tag(
            &voter_tags[party],
            party,
            voter_tags[party].extras.len(),
            n,
            &bit_ring,
            rng,
        )?;
        broadcast.push(received);
    }
    if let Some(spec) = &forger {
        // The forger broadcasts last, after observing every honest edge.
        let observed: Vec<Edge> = broadcast.iter().flat_map(|t| t.edges()).collect();
        let forged = forge(&spec_for_extras_only(spec), &[], n, &observed, rng)?;
        let sender = spec.controlled.first().copied().unwrap_or(0) as usize;
        for tag in &forged.tags {
            let tag = with_guessed_extras(tag.clone(), extras_required, n, &broadcast, rng)?;
            let received = phase.broadcast_tag(&tag, sender, tag.extras.len(), n, &bit_ring, rng)?;
            broadcast.push(received);
        }
    }
    if let Some((target, extra_votes)) = tallyman_forger {
        // A dishonest tallyman knows x: its injected tags carry correct
        // parities. They enter the public record directly (the tallyman
        // publishes classically; it holds no ring position).
        let observed: Vec<Edge> = broadcast.iter().flat_map(|t| t.edges()).collect();
        let mut used = vec![false; n];
        for e in &observed {
            used[e.i as usize] = true;
            used[e.j as usize] = true;
        }
        let mut free: Vec<u32> = (0..n as u32).filter(|&l| !used[l as usize]).collect();
        free.shuffle(rng);
        let mut injected = 0;
        while injected < extra_votes && free.len() >= 2 * cfg.tag_copies {
            let mut edges = Vec::with_capacity(cfg.tag_copies);
            for _ in 0..cfg.tag_copies {
                let i = free.pop().expect("len checked");
                let j = free.pop().expect("len checked");
                edges.push(Edge::new(i, j)?);
            }
            let main = edges[0];
            let extras: Vec<(Edge, bool)> =
                edges[1..].iter().map(|e| (*e, x.parity(*e))).collect();
            broadcast.push(VoteTag {
                edge: main,
                agreement: x.parity(main) ^ target,
                extras,
            });
            injected += 1;
        }
    }
    events.broadcast_sums = phase.records;

    // x reveal: decoding, authentication, intersection filter.
    let mut tags = Vec::with_capacity(broadcast.len());
    let mut counted_edges: Vec<Edge> = Vec::new();
    for (position, tag) in broadcast.iter().enumerate() {
        let counted = !counted_edges.iter().any(|e| e.intersects(&tag.edge));
        if counted {
            counted_edges.push(tag.edge);
        }
        let verified =
            tag.extras.len() == extras_required && crate::ballot::verify_tag(tag, &x);
        let decoded_vote = crate::ballot::decode_vote(tag, &x)?;
        tags.push(TagRecord {
            position: position as u32,
            tag: tag.clone(),
            counted,
            verified,
            decoded_vote,
        });
    }

    // Complaints: dropped, corrupted, rejected, or parity-mismatched votes.
    let controlled: Vec<u32> = forger.as_ref().map(|f| f.controlled.clone()).unwrap_or_default();
    let mut complaint_bits = vec![0usize; nv];
    let mut voters_private = Vec::with_capacity(nv);
    for party in 0..nv {
        let slot = queue.slot_of(party as u32);
        let record = &tags[slot];
        let mut complaint = corrupted_flags[party]
            || !record.counted
            || !record.verified
            || record.tag != voter_tags[party]
            || measured_parities[party] != x.parity(voter_tags[party].edge);
        if controlled.contains(&(party as u32)) {
            complaint = false;
        }
        complaint_bits[party] = complaint as usize;
        voters_private.push(VoterPrivate {
            vote: effective_votes[party],
            tag: voter_tags[party].clone(),
            measured_parity: measured_parities[party],
            corrupted: corrupted_flags[party],
            complaint,
        });
    }
    // Widened modulus 2M keeps the complaint count from wrapping when every
    // voter complains.
    let complaint_ring = ring.clone().with_modulus(2 * ring.modulus)?;
    let complaint_run = secure_sum(&complaint_bits, &complaint_ring, rng)?;
    events.complaint_sum = Some(SumRecord::from_run(&complaint_run, complaint_ring.modulus));

    Ok(RoundOutcome {
        transcript: RoundTranscript {
            round,
            tag_copies: cfg.tag_copies as u32,
            queue,
            slot_rounds: queue_run.slot_rounds,
            tags,
            x,
            complaints: complaint_run.value as u32,
            events,
        },
        voters: voters_private,
    })
}

/// Forger spec reduced to its extra (guessed) votes; used after the honest
/// tags of the controlled voters were already broadcast from their slots.
fn spec_for_extras_only(spec: &crate::adversary::ForgerSpec) -> crate::adversary::ForgerSpec {
    crate::adversary::ForgerSpec {
        controlled: vec![],
        votes_attempted: spec.extra_votes(),
        target: spec.target,
    }
}

/// Attach guessed extra parities to a forged tag when the tag extension is
/// active, drawing fresh disjoint edges from the unused labels.
fn with_guessed_extras(
    tag: VoteTag,
    extras_required: usize,
    n: usize,
    observed: &[VoteTag],
    rng: &mut impl Rng,
) -> Result<VoteTag> {
    if extras_required == 0 {
        return Ok(tag);
    }
    let mut used = vec![false; n];
    for t in observed {
        for e in t.edges() {
            used[e.i as usize] = true;
            used[e.j as usize] = true;
        }
    }
    used[tag.edge.i as usize] = true;
    used[tag.edge.j as usize] = true;
    let mut free: Vec<u32> = (0..n as u32).filter(|&l| !used[l as usize]).collect();
    free.shuffle(rng);
    let mut extras = Vec::with_capacity(extras_required);
    while extras.len() < extras_required && free.len() >= 2 {
        let i = free.pop().expect("len checked");
        let j = free.pop().expect("len checked");
        extras.push((Edge::new(i, j)?, rng.gen_bool(0.5)));
    }
    Ok(VoteTag { extras, ..tag })
}
