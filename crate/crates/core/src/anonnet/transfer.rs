//! Anonymous state transfer from the tallyman to a queue-designated voter.
//!
//! One GHZ resource over N voters + tallyman is consumed per use. The voters
//! first flip anonymous coins (each broadcasts the AND of S random bits); if
//! no coin comes up the resource is spent on an all-X parity verification,
//! otherwise the non-receivers X-measure and announce, the receiver corrects,
//! and a Bell pair between tallyman and receiver is left for teleportation.
//! Infidelity is modeled as a single-qubit Pauli tamper applied with
//! probability 1−F before use; through the Clifford distillation/teleport
//! pipeline the tamper lands on the delivered qubit as an exact Pauli.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{broadcast_bit, RingConfig, SumRun};
use crate::qsim::{
    bell_basis, epr_qudit, ghz, measure_part, pauli_on_part, plus_minus_basis, Pauli, PureState,
};
use crate::{Error, Result};

/// GHZ resource description for anonymous transfer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferResource {
    /// Number of voters; the GHZ has voters + 1 qubits (tallyman included).
    pub voters: usize,
    /// Fidelity of the distributed GHZ states, in [0, 1].
    pub ghz_fidelity: f64,
    /// S: each voter's use/test coin is the AND of S fair bits.
    pub test_bits: usize,
}

impl TransferResource {
    pub fn new(voters: usize, ghz_fidelity: f64) -> Result<Self> {
        let bits = 2 * (usize::BITS - (voters.max(2) - 1).leading_zeros()) as usize;
        TransferResource::with_test_bits(voters, ghz_fidelity, bits.max(2))
    }

    pub fn with_test_bits(voters: usize, ghz_fidelity: f64, test_bits: usize) -> Result<Self> {
        if voters < 2 {
            return Err(Error::InvalidArgument("transfer needs at least 2 voters".into()));
        }
        if voters + 1 > 24 {
            return Err(Error::ResourceLimit {
                requested: 1usize << (voters + 1).min(63),
                cap: crate::qsim::STATE_CAP,
            });
        }
        if !(0.0..=1.0).contains(&ghz_fidelity) {
            return Err(Error::InvalidArgument("fidelity out of [0,1]".into()));
        }
        if test_bits == 0 {
            return Err(Error::InvalidArgument("test_bits must be positive".into()));
        }
        Ok(TransferResource {
            voters,
            ghz_fidelity,
            test_bits,
        })
    }

    pub fn parties(&self) -> usize {
        self.voters + 1
    }
}

/// Result of one resource use, as seen by the protocol.
#[derive(Clone, Debug)]
pub enum TransferOutcome {
    /// The payload arrived (transfer branch).
    Delivered(PureState),
    /// The resource was consumed by verification (test branch).
    Verified { pass: bool },
}

/// Public record of one resource use plus the effective delivered channel.
#[derive(Clone, Debug)]
pub struct ChannelUse {
    /// Transfer branch: the exact Pauli applied to the teleported qubit.
    /// Verification branch: the parity-check result.
    pub branch: UseBranch,
    /// Per-voter coin values made public by the anonymous broadcasts.
    pub coins: Vec<bool>,
    /// Announcement records of the coin broadcasts.
    pub coin_sums: Vec<SumRun>,
    /// X-measurement bits announced during distillation or verification
    /// (includes the receiver's dummy bit in the transfer branch).
    pub announcements: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UseBranch {
    Transfer { pauli: Pauli },
    Verify { pass: bool },
}

fn tampered_ghz(resource: &TransferResource, rng: &mut impl Rng) -> Result<PureState> {
    let state = ghz(resource.parties())?;
    if resource.ghz_fidelity < 1.0 && rng.gen_bool(1.0 - resource.ghz_fidelity) {
        let qubit = rng.gen_range(0..resource.parties());
        let pauli = [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)];
        return pauli_on_part(&state, qubit, pauli);
    }
    Ok(state)
}

/// Anonymous coin phase: every voter broadcasts the AND of S fair bits over a
/// binary ring. The resource is used for transfer iff any coin is 1.
fn coin_phase(resource: &TransferResource, rng: &mut impl Rng) -> Result<(Vec<bool>, Vec<SumRun>)> {
    let ring = RingConfig::bit_broadcast(resource.voters)?;
    let mut coins = Vec::with_capacity(resource.voters);
    let mut sums = Vec::with_capacity(resource.voters);
    for voter in 0..resource.voters {
        let coin = (0..resource.test_bits).all(|_| rng.gen_bool(0.5));
        let (bit, run) = broadcast_bit(voter, coin, &ring, rng)?;
        coins.push(bit);
        sums.push(run);
    }
    Ok((coins, sums))
}

/// All-X parity verification of the (possibly tampered) GHZ: pass iff the
/// number of − outcomes is even.
fn verify_ghz(state: PureState, rng: &mut impl Rng) -> Result<(bool, Vec<bool>)> {
    let pm = plus_minus_basis();
    let mut outcomes = Vec::new();
    let mut rest = state;
    let parties = rest.parts().len();
    for _ in 0..parties {
        let (minus, next) = measure_part(&rest, 0, &pm, rng)?;
        outcomes.push(minus);
        rest = next;
    }
    let pass = outcomes.iter().filter(|&&m| m).count() % 2 == 0;
    Ok((pass, outcomes))
}

/// Exact failure probability of the all-X parity check on a given state:
/// ⟨(I − X⊗…⊗X)/2⟩. Oracle for frequency tests.
pub fn verification_failure_probability(state: &PureState) -> f64 {
    // X⊗…⊗X maps |i⟩ to |!i⟩ bitwise; expectation = Σ conj(a_rev(i)) a_i.
    let dim = state.dim();
    let amps = state.amplitudes();
    let mut exp = 0.0;
    for i in 0..dim {
        exp += (amps[dim - 1 - i].conj() * amps[i]).re;
    }
    (1.0 - exp) / 2.0
}

/// Distill a Bell pair between tallyman (part 0) and the receiver: all other
/// voters X-measure and announce; the receiver announces a dummy bit and
/// corrects the phase using the announced parity.
fn distill_pair(
    state: PureState,
    receiver: usize,
    rng: &mut impl Rng,
) -> Result<(PureState, Vec<bool>)> {
    let parties = state.parts().len();
    let receiver_part = receiver + 1; // part 0 is the tallyman
    let pm = plus_minus_basis();
    let mut rest = state;
    let mut announced = vec![false; parties - 1]; // per voter, in index order
    let mut parity = false;
    // Measure highest part indices first so earlier indices stay stable.
    for part in (1..parties).rev() {
        if part == receiver_part {
            continue;
        }
        let (minus, next) = measure_part(&rest, part, &pm, rng)?;
        announced[part - 1] = minus;
        parity ^= minus;
        rest = next;
    }
    // The receiver hides among the announcers with a dummy coin.
    announced[receiver_part - 1] = rng.gen_bool(0.5);
    let pair = if parity {
        pauli_on_part(&rest, 1, Pauli::Z)?
    } else {
        rest
    };
    Ok((pair, announced))
}

/// Teleport a single-qubit payload through a (T, R) pair: Bell measurement on
/// (payload, T half), announced corrections applied at R.
fn teleport(payload: &PureState, pair: &PureState, rng: &mut impl Rng) -> Result<PureState> {
    if payload.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            got: payload.dim(),
        });
    }
    let joint = payload.tensor(pair)?.regroup(vec![4, 2])?;
    let ((phase, flip), rest) = measure_part(&joint, 0, &bell_basis(), rng)?;
    let mut out = rest;
    if flip {
        out = pauli_on_part(&out, 0, Pauli::X)?;
    }
    if phase {
        out = pauli_on_part(&out, 0, Pauli::Z)?;
    }
    Ok(out)
}

/// One resource use with an arbitrary single-qubit payload (multi-qubit
/// payloads iterate over transport qubits).
pub fn anonymous_transfer(
    payload: &PureState,
    receiver: usize,
    resource: &TransferResource,
    rng: &mut impl Rng,
) -> Result<TransferOutcome> {
    let usage = transfer_channel_use(receiver, resource, rng)?;
    match usage.branch {
        UseBranch::Verify { pass } => Ok(TransferOutcome::Verified { pass }),
        UseBranch::Transfer { pauli } => {
            let delivered = crate::qsim::pauli_on_bit(payload, 0, pauli)?;
            Ok(TransferOutcome::Delivered(delivered))
        }
    }
}

/// One resource use, reporting the effective Pauli channel on the teleported
/// qubit. The Pauli is identified exactly by teleporting half of a reference
/// Bell pair through the distilled pair and matching the resulting two-qubit
/// state against the four Pauli-twisted Bell states.
pub fn transfer_channel_use(
    receiver: usize,
    resource: &TransferResource,
    rng: &mut impl Rng,
) -> Result<ChannelUse> {
    if receiver >= resource.voters {
        return Err(Error::InvalidArgument(format!("no voter {receiver}")));
    }
    let (coins, coin_sums) = coin_phase(resource, rng)?;
    let state = tampered_ghz(resource, rng)?;
    if !coins.iter().any(|&c| c) {
        let (pass, announcements) = verify_ghz(state, rng)?;
        return Ok(ChannelUse {
            branch: UseBranch::Verify { pass },
            coins,
            coin_sums,
            announcements,
        });
    }
    let (pair, announcements) = distill_pair(state, receiver, rng)?;
    // Probe teleport: send half of |φ+⟩ and read off the residual Pauli.
    let probe = epr_qudit(2)?.regroup(vec![2, 2])?;
    let joint = probe.tensor(&pair)?; // parts: ref, probe half, T, R
    let merged = joint.regroup(vec![2, 4, 2])?;
    let ((phase, flip), rest) = measure_part(&merged, 1, &bell_basis(), rng)?;
    let mut out = rest; // parts: ref, delivered
    if flip {
        out = pauli_on_part(&out, 1, Pauli::X)?;
    }
    if phase {
        out = pauli_on_part(&out, 1, Pauli::Z)?;
    }
    let pauli = identify_pauli(&out)?;
    Ok(ChannelUse {
        branch: UseBranch::Transfer { pauli },
        coins,
        coin_sums,
        announcements,
    })
}

fn identify_pauli(two_qubit: &PureState) -> Result<Pauli> {
    let reference = epr_qudit(2)?.regroup(vec![2, 2])?;
    for pauli in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
        let candidate = pauli_on_part(&reference, 1, pauli)?;
        if two_qubit.fidelity(&candidate) > 1.0 - 1e-9 {
            return Ok(pauli);
        }
    }
    Err(Error::InvalidArgument(
        "delivered channel is not a Pauli; tamper model violated".into(),
    ))
}
