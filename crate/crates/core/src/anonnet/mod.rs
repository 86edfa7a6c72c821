//! Entanglement-based anonymous primitives over a ring of parties.
//!
//! Parties 0..N form a ring; link k carries a maximally entangled qudit pair
//! between party k and party k+1 (mod N). A round either produces key shares
//! whose sum vanishes mod M (everyone Bell-measures) or becomes a test round
//! (someone measures in the generalized X basis) whose correlation checks
//! expose channel tampering. Secure sums, anonymous bit broadcast, and the
//! anonymous queue are built on top.
//!
//! Each pair is simulated independently with the statevector engine; the
//! protocol's operations factor across pairs, so the factored simulation is
//! exact. In a key round both halves of a link are measured in Z (perfectly
//! correlated for the ideal pair) and each party's share is the generalized
//! CNOT label arithmetic applied to its two collapsed halves. In a test round
//! both halves are measured in the QFT basis; the checkable correlation is
//! the telescoped X-parity over each segment between consecutive testers,
//! which is the sum of per-link defects (α_k + β_k) mod M.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qsim::{
    epr_qudit, gen_cnot_label, measure_part, measure_part_computational, qft_basis, PureState,
};
use crate::stats::{wilson_interval, Z_999};
use crate::{Error, Result};

pub mod purify;
pub mod transfer;

pub use purify::{linearized_fidelity, purification_plan, purify_round_exact, PurificationPlan, PurifyStep};
pub use transfer::{
    anonymous_transfer, transfer_channel_use, verification_failure_probability, ChannelUse,
    TransferOutcome, TransferResource, UseBranch,
};

/// Behavior of the quantum channel carrying ring entanglement, plus classical
/// announcement integrity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    /// Noiseless distribution, reliable announcements.
    Ideal,
    /// Intercept-resend eavesdropper on one ring link: the transiting half is
    /// measured in the computational basis and the collapsed state forwarded.
    InterceptResend { link: usize },
    /// Classical denial-of-service noise: each announcement is replaced by a
    /// uniform value with probability p. Wastes rounds; never silently
    /// corrupts a queue assignment.
    AnnouncementNoise { p: f64 },
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel::Ideal
    }
}

/// Ring parameters: party count, announcement modulus, per-party test
/// probability, and the channel model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingConfig {
    pub parties: usize,
    pub modulus: usize,
    pub test_prob: f64,
    #[serde(default)]
    pub channel: ChannelModel,
}

impl RingConfig {
    /// Standard ring for N parties: M = 2^⌈log₂N⌉ (at least 2), testing with
    /// probability 1/N, ideal channel.
    pub fn new(parties: usize) -> Result<Self> {
        if parties == 0 {
            return Err(Error::InvalidArgument("ring needs at least one party".into()));
        }
        let modulus = parties.next_power_of_two().max(2);
        Ok(RingConfig {
            parties,
            modulus,
            test_prob: 1.0 / parties as f64,
            channel: ChannelModel::Ideal,
        })
    }

    /// Binary ring used for one-bit anonymous broadcast (M = 2).
    pub fn bit_broadcast(parties: usize) -> Result<Self> {
        let mut cfg = RingConfig::new(parties)?;
        cfg.modulus = 2;
        Ok(cfg)
    }

    pub fn with_channel(mut self, channel: ChannelModel) -> Self {
        self.channel = channel;
        self
    }

    pub fn with_modulus(mut self, modulus: usize) -> Result<Self> {
        if !modulus.is_power_of_two() || modulus < 2 {
            return Err(Error::InvalidArgument(format!(
                "modulus must be a power of two >= 2, got {modulus}"
            )));
        }
        self.modulus = modulus;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.parties == 0 {
            return Err(Error::InvalidArgument("empty ring".into()));
        }
        if !self.modulus.is_power_of_two() || self.modulus < 2 {
            return Err(Error::InvalidArgument("modulus must be a power of two >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.test_prob) {
            return Err(Error::InvalidArgument("test_prob out of [0,1]".into()));
        }
        Ok(())
    }
}

/// One party's key share from a completed generation round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyShare {
    pub party: u32,
    pub z: u32,
}

/// Result of the correlation checks in a test round.
///
/// Each check covers the maximal segment of links between two consecutive
/// testers (when every party tests, segments are single links). `f_min` is
/// the fraction of passed checks with a Wilson 99.9% interval attached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub tested_links: u32,
    pub passed: u32,
    pub f_min: f64,
    pub f_min_interval: (f64, f64),
}

impl FidelityReport {
    pub fn tamper_detected(&self) -> bool {
        self.passed < self.tested_links
    }
}

/// Outcome of one key-generation round.
#[derive(Clone, Debug)]
pub enum KeygenOutcome {
    Keys(Vec<KeyShare>),
    Test(FidelityReport),
}

/// One keygen round with its public side information (who announced a test).
#[derive(Clone, Debug)]
pub struct KeygenRound {
    pub outcome: KeygenOutcome,
    pub testers: Vec<bool>,
}

/// Measure both halves of one ring link. Returns the pair of outcomes in
/// (party-k half, party-k+1 half) order; `x_basis` selects QFT vs Z.
fn measure_link(cfg: &RingConfig, link: usize, x_basis: bool, rng: &mut impl Rng) -> Result<(usize, usize)> {
    let m = cfg.modulus;
    let mut state = epr_qudit(m)?;
    if let ChannelModel::InterceptResend { link: attacked } = cfg.channel {
        if attacked == link {
            // The eavesdropper measures the transiting half in the
            // computational basis and forwards the collapsed state.
            let (c, rest) = measure_part_computational(&state, 1, rng)?;
            state = rest.tensor(&PureState::basis_state(vec![m], c)?)?;
        }
    }
    if x_basis {
        let qft = qft_basis(m)?;
        let (a, rest) = measure_part(&state, 0, &qft, rng)?;
        let (b, _) = measure_part(&rest, 0, &qft, rng)?;
        Ok((a, b))
    } else {
        let (a, rest) = measure_part_computational(&state, 0, rng)?;
        let (b, _) = measure_part_computational(&rest, 0, rng)?;
        Ok((a, b))
    }
}

/// Key shares from the collapsed link values: party k holds the half of link
/// k−1 (value i_k) and the half of link k (value j_k) and announces the
/// generalized-CNOT target label z_k = (j_k + (M−1)·i_k) mod M.
pub(crate) fn shares_from_link_values(values_j: &[usize], values_i: &[usize], m: usize) -> Vec<KeyShare> {
    let n = values_j.len();
    (0..n)
        .map(|k| {
            let i_k = values_i[(k + n - 1) % n];
            let j_k = values_j[k];
            let (_, z) = gen_cnot_label(i_k, j_k, m);
            KeyShare {
                party: k as u32,
                z: z as u32,
            }
        })
        .collect()
}

/// One round of ring key generation.
///
/// Every party independently tests with probability `test_prob`. If anyone
/// tests the round yields a [`FidelityReport`] and no key material; otherwise
/// every party Bell-measures and the returned shares satisfy Σ z_k ≡ 0 (mod M)
/// with each share marginally uniform.
pub fn keygen(cfg: &RingConfig, rng: &mut impl Rng) -> Result<KeygenRound> {
    cfg.validate()?;
    let n = cfg.parties;
    let m = cfg.modulus;
    if n == 1 {
        // Degenerate self-ring: the single party's share is fixed at zero
        // and there is no link to test.
        return Ok(KeygenRound {
            outcome: KeygenOutcome::Keys(vec![KeyShare { party: 0, z: 0 }]),
            testers: vec![false],
        });
    }
    let testers: Vec<bool> = (0..n).map(|_| rng.gen_bool(cfg.test_prob)).collect();
    if testers.iter().any(|&t| t) {
        // Test round: X-sector outcomes per link, telescoped segment checks.
        let mut defects = Vec::with_capacity(n);
        for link in 0..n {
            let (alpha, beta) = measure_link(cfg, link, true, rng)?;
            defects.push((alpha + beta) % m);
        }
        let tester_idx: Vec<usize> = (0..n).filter(|&k| testers[k]).collect();
        let mut tested = 0u32;
        let mut passed = 0u32;
        for (pos, &t) in tester_idx.iter().enumerate() {
            let t_next = tester_idx[(pos + 1) % tester_idx.len()];
            // Segment of links from t up to (but excluding) t_next, cyclically.
            let span = if tester_idx.len() == 1 {
                n
            } else {
                (t_next + n - t) % n
            };
            let defect: usize = (0..span).map(|o| defects[(t + o) % n]).sum();
            tested += 1;
            if defect % m == 0 {
                passed += 1;
            }
        }
        let f_min = passed as f64 / tested as f64;
        let interval = wilson_interval(passed as u64, tested as u64, Z_999);
        return Ok(KeygenRound {
            outcome: KeygenOutcome::Test(FidelityReport {
                tested_links: tested,
                passed,
                f_min,
                f_min_interval: interval,
            }),
            testers,
        });
    }
    // Key round: Z-sector values per link; X outcomes of the Bell
    // measurements stay private and unused.
    let mut values_j = Vec::with_capacity(n); // link k, party k's half
    let mut values_i = Vec::with_capacity(n); // link k, party k+1's half
    for link in 0..n {
        let (j, i) = measure_link(cfg, link, false, rng)?;
        values_j.push(j);
        values_i.push(i);
    }
    let shares = shares_from_link_values(&values_j, &values_i, m);
    Ok(KeygenRound {
        outcome: KeygenOutcome::Keys(shares),
        testers,
    })
}

/// Public record of one secure-sum execution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SumRun {
    /// Σ inputs mod M, as computed by every party from the announcements.
    pub value: usize,
    /// Per-party masked announcements (z_l + b_l) mod M; marginally uniform.
    pub announcements: Vec<u32>,
    /// Keygen rounds consumed, including discarded test rounds.
    pub keygen_attempts: u32,
    /// Fidelity reports from any test rounds along the way.
    pub tests: Vec<FidelityReport>,
}

/// Multiparty secure sum: repeat keygen until a key round, then every party
/// announces its masked input and all parties learn only the total mod M.
pub fn secure_sum(inputs: &[usize], cfg: &RingConfig, rng: &mut impl Rng) -> Result<SumRun> {
    cfg.validate()?;
    if inputs.len() != cfg.parties {
        return Err(Error::InvalidArgument(format!(
            "need one input per party: {} inputs for {} parties",
            inputs.len(),
            cfg.parties
        )));
    }
    let m = cfg.modulus;
    if inputs.iter().any(|&b| b >= m) {
        return Err(Error::InvalidArgument("inputs must lie in [0, M)".into()));
    }
    let cap = 50 * cfg.parties.max(1) as u32;
    let mut attempts = 0u32;
    let mut tests = Vec::new();
    let shares = loop {
        attempts += 1;
        if attempts > cap {
            return Err(Error::Unavailable {
                attempts: attempts as usize - 1,
                context: "secure sum: no key round within the retry budget".into(),
            });
        }
        match keygen(cfg, rng)?.outcome {
            KeygenOutcome::Keys(shares) => break shares,
            KeygenOutcome::Test(report) => tests.push(report),
        }
    };
    let announce_noise = match cfg.channel {
        ChannelModel::AnnouncementNoise { p } => p,
        _ => 0.0,
    };
    let announcements: Vec<u32> = shares
        .iter()
        .zip(inputs)
        .map(|(share, &b)| {
            let honest = (share.z as usize + b) % m;
            if announce_noise > 0.0 && rng.gen_bool(announce_noise) {
                rng.gen_range(0..m) as u32
            } else {
                honest as u32
            }
        })
        .collect();
    let value = announcements.iter().map(|&a| a as usize).sum::<usize>() % m;
    Ok(SumRun {
        value,
        announcements,
        keygen_attempts: attempts,
        tests,
    })
}

/// Anonymous one-bit broadcast: a binary secure sum where only the designated
/// sender contributes its bit.
pub fn broadcast_bit(
    sender: usize,
    bit: bool,
    cfg: &RingConfig,
    rng: &mut impl Rng,
) -> Result<(bool, SumRun)> {
    if cfg.modulus != 2 {
        return Err(Error::InvalidArgument(
            "bit broadcast requires a binary ring (M = 2)".into(),
        ));
    }
    if sender >= cfg.parties {
        return Err(Error::InvalidArgument(format!("no party {sender}")));
    }
    let mut inputs = vec![0usize; cfg.parties];
    inputs[sender] = bit as usize;
    let run = secure_sum(&inputs, cfg, rng)?;
    Ok((run.value == 1, run))
}

/// Slot-to-party assignment produced by the anonymous queue.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueuePermutation {
    order: Vec<u32>,
}

impl QueuePermutation {
    pub fn new(order: Vec<u32>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &p in &order {
            if p as usize >= n || seen[p as usize] {
                return Err(Error::InvalidArgument("queue order must be a bijection".into()));
            }
            seen[p as usize] = true;
        }
        Ok(QueuePermutation { order })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Party holding broadcast slot `slot`.
    pub fn party_at(&self, slot: usize) -> u32 {
        self.order[slot]
    }

    pub fn slot_of(&self, party: u32) -> usize {
        self.order.iter().position(|&p| p == party).expect("bijection")
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }
}

/// Full public record of a queue construction.
#[derive(Clone, Debug)]
pub struct QueueRun {
    pub permutation: QueuePermutation,
    /// Total secure-sum rounds used.
    pub rounds_used: u32,
    /// Rounds spent filling each slot (public timing).
    pub slot_rounds: Vec<u32>,
    /// Announcement record of every secure-sum round, in order.
    pub sums: Vec<SumRun>,
}

/// Build the anonymous queue: slot i is claimed when exactly one unqueued
/// party attempts (each with probability 1/(N−i+1)) and the secure sum of the
/// attempt bits equals 1. Only the attempter learns it holds the slot.
pub fn build_queue(cfg: &RingConfig, rng: &mut impl Rng) -> Result<QueueRun> {
    cfg.validate()?;
    let n = cfg.parties;
    if cfg.modulus < n {
        return Err(Error::InvalidArgument(
            "queue needs M >= N so attempt counts are unambiguous".into(),
        ));
    }
    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut queued = vec![false; n];
    let mut slot_rounds = Vec::with_capacity(n);
    let mut sums = Vec::new();
    let mut total_rounds = 0u32;
    let cap = 500 * n as u32;
    for slot in 0..n {
        let unqueued = n - slot;
        let attempt_prob = 1.0 / unqueued as f64;
        let mut rounds_this_slot = 0u32;
        loop {
            total_rounds += 1;
            rounds_this_slot += 1;
            if total_rounds > cap {
                return Err(Error::Unavailable {
                    attempts: total_rounds as usize - 1,
                    context: format!("queue stalled while filling slot {slot}"),
                });
            }
            let attempts: Vec<bool> = (0..n)
                .map(|p| !queued[p] && rng.gen_bool(attempt_prob))
                .collect();
            let inputs: Vec<usize> = attempts.iter().map(|&a| a as usize).collect();
            let run = secure_sum(&inputs, cfg, rng)?;
            let value = run.value;
            sums.push(run);
            if value == 1 && attempts.iter().filter(|&&a| a).count() == 1 {
                let winner = attempts.iter().position(|&a| a).expect("one attempter") as u32;
                queued[winner as usize] = true;
                order.push(winner);
                slot_rounds.push(rounds_this_slot);
                break;
            }
        }
    }
    Ok(QueueRun {
        permutation: QueuePermutation::new(order)?,
        rounds_used: total_rounds,
        slot_rounds,
        sums,
    })
}

/// Exact per-slot success probability (1 − 1/(N−i+1))^{N−i} for 1-based slot i.
pub fn queue_slot_success_prob(n: usize, slot_1based: usize) -> f64 {
    let u = (n - slot_1based + 1) as f64;
    (1.0 - 1.0 / u).powi((u - 1.0) as i32)
}

/// Expected total queue rounds Σ_i 1/p_i.
pub fn queue_expected_rounds(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / queue_slot_success_prob(n, i)).sum()
}

#[cfg(test)]
mod tests;
