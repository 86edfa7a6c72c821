//! Threat models exercising the protocol's security claims.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::anonnet::ChannelModel;
use crate::ballot::{Edge, VoteTag};
use crate::election::ElectionConfig;
use crate::qsim::{pauli_on_bit, Pauli, PureState};
use crate::{Error, Result};

pub mod game;
pub mod povm;

pub use game::{
    play_anonymity_game, play_anonymity_games, AdvantageReport, AnnouncementStats, AnonymityGame,
    Strategy,
};

/// A coalition holding `controlled` voters' ballots that tries to push
/// `votes_attempted` ≥ k decoded votes toward `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForgerSpec {
    pub controlled: Vec<u32>,
    pub votes_attempted: usize,
    pub target: bool,
}

impl ForgerSpec {
    pub fn extra_votes(&self) -> usize {
        self.votes_attempted.saturating_sub(self.controlled.len())
    }
}

/// Ballot tampering applied by a dishonest tallyman before distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TamperMode {
    /// Flip the sign of one basis label's amplitude.
    PhaseFlip { label: u32 },
    /// Depolarize one transport qubit (uniform random Pauli trajectory).
    DepolarizeQubit { qubit: usize },
}

/// Adversary selection for an election run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversarySpec {
    /// Malicious voters forging extra vote tags, broadcast after the honest
    /// tags with edges chosen disjoint from everything observed.
    Forger(ForgerSpec),
    /// Intercept-resend eavesdropper on one ring link.
    Eavesdropper { link: usize },
    /// A dishonest tallyman injecting correct-parity tags for `target` into
    /// its own election instance.
    TallymanForger {
        tallyman: usize,
        target: bool,
        extra_votes: usize,
    },
    /// The tallyman tampers with the ballot copies sent to one queue slot.
    BallotTamper { slot: usize, tamper: TamperMode },
    /// Classical announcement noise (denial-of-service model).
    AnnouncementNoise { p: f64 },
}

impl AdversarySpec {
    pub fn validate(&self, cfg: &ElectionConfig) -> Result<()> {
        match self {
            AdversarySpec::Forger(spec) => {
                if spec.votes_attempted < spec.controlled.len() {
                    return Err(Error::InvalidArgument(
                        "votes_attempted must be at least the controlled count".into(),
                    ));
                }
                if spec.controlled.iter().any(|&v| v as usize >= cfg.voters) {
                    return Err(Error::InvalidArgument("controlled voter out of range".into()));
                }
            }
            AdversarySpec::Eavesdropper { link } => {
                if *link >= cfg.voters {
                    return Err(Error::InvalidArgument("eavesdropped link out of range".into()));
                }
            }
            AdversarySpec::TallymanForger { tallyman, .. } => {
                if *tallyman >= cfg.tallymen {
                    return Err(Error::InvalidArgument("tallyman index out of range".into()));
                }
            }
            AdversarySpec::BallotTamper { slot, tamper } => {
                if *slot >= cfg.voters {
                    return Err(Error::InvalidArgument("tampered slot out of range".into()));
                }
                match tamper {
                    TamperMode::PhaseFlip { label } => {
                        if *label as usize >= cfg.ballot_dim() {
                            return Err(Error::InvalidArgument("phase-flip label out of range".into()));
                        }
                    }
                    TamperMode::DepolarizeQubit { qubit } => {
                        if *qubit >= cfg.transport_qubits() {
                            return Err(Error::InvalidArgument("depolarized qubit out of range".into()));
                        }
                        if !cfg.bits.is_power_of_two() {
                            return Err(Error::InvalidArgument(
                                "qubit tampering requires a power-of-two ballot length".into(),
                            ));
                        }
                    }
                }
            }
            AdversarySpec::AnnouncementNoise { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidArgument("announcement noise p out of [0,1]".into()));
                }
            }
        }
        Ok(())
    }

    /// Ring channel implied by this adversary, if any.
    pub fn channel(&self) -> ChannelModel {
        match self {
            AdversarySpec::Eavesdropper { link } => ChannelModel::InterceptResend { link: *link },
            AdversarySpec::AnnouncementNoise { p } => ChannelModel::AnnouncementNoise { p: *p },
            _ => ChannelModel::Ideal,
        }
    }
}

/// Eavesdropping modes on a ring link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EavesdropMode {
    InterceptResend,
}

/// Channel model for an eavesdropper at the given ring position.
pub fn eavesdrop(link: usize, mode: EavesdropMode) -> ChannelModel {
    match mode {
        EavesdropMode::InterceptResend => ChannelModel::InterceptResend { link },
    }
}

/// Output of the forger: its tags in broadcast order plus how many requested
/// forgeries had to be dropped for lack of disjoint edges.
#[derive(Clone, Debug)]
pub struct ForgeOutput {
    pub tags: Vec<VoteTag>,
    pub truncated: usize,
}

/// Forge vote tags from `measured` honest ballot results.
///
/// Emits one honest tag per measured ballot (agreement encodes `target`) and
/// `votes_attempted − k` forged tags whose edges avoid everything in `avoid`,
/// the honest edges, and each other. Forged parities are fair coins: the
/// information-theoretic ceiling for parity forgery, instantiated directly.
pub fn forge(
    spec: &ForgerSpec,
    measured: &[(Edge, bool)],
    n: usize,
    avoid: &[Edge],
    rng: &mut impl Rng,
) -> Result<ForgeOutput> {
    if measured.len() != spec.controlled.len() {
        return Err(Error::InvalidArgument(format!(
            "forger holds {} ballots for {} controlled voters",
            measured.len(),
            spec.controlled.len()
        )));
    }
    let mut tags = Vec::with_capacity(spec.votes_attempted);
    let mut used = vec![false; n];
    for e in avoid.iter().chain(measured.iter().map(|(e, _)| e)) {
        if (e.j as usize) < n {
            used[e.i as usize] = true;
            used[e.j as usize] = true;
        }
    }
    for (edge, parity) in measured {
        tags.push(VoteTag {
            edge: *edge,
            agreement: parity ^ spec.target,
            extras: vec![],
        });
    }
    let mut free: Vec<u32> = (0..n as u32).filter(|&l| !used[l as usize]).collect();
    free.shuffle(rng);
    let mut forged = 0;
    while forged < spec.extra_votes() && free.len() >= 2 {
        let i = free.pop().expect("len checked");
        let j = free.pop().expect("len checked");
        let guess = rng.gen_bool(0.5);
        tags.push(VoteTag {
            edge: Edge::new(i, j)?,
            agreement: guess ^ spec.target,
            extras: vec![],
        });
        forged += 1;
    }
    Ok(ForgeOutput {
        truncated: spec.extra_votes() - forged,
        tags,
    })
}

/// Tamper with a ballot state.
pub fn tamper_ballot(
    ballot: &PureState,
    mode: TamperMode,
    rng: &mut impl Rng,
) -> Result<PureState> {
    match mode {
        TamperMode::PhaseFlip { label } => {
            if label as usize >= ballot.dim() {
                return Err(Error::InvalidArgument(format!(
                    "phase-flip label {label} out of range for dim {}",
                    ballot.dim()
                )));
            }
            let mut out = ballot.clone();
            out.amps_mut()[label as usize] = -out.amps_mut()[label as usize];
            Ok(out)
        }
        TamperMode::DepolarizeQubit { qubit } => {
            let pauli = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)];
            pauli_on_bit(ballot, qubit, pauli)
        }
    }
}
