//! Election configuration: the knobs of one protocol instance.

use serde::{Deserialize, Serialize};

use crate::adversary::AdversarySpec;
use crate::{Error, Result};

/// Bit-flip noise on ballot transport.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p: f64,
}

/// Anonymous-transfer resource parameters (untrusted tallyman mode).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferSpec {
    /// GHZ fidelity in [0, 1]; 1.0 is the ideal resource.
    #[serde(default = "default_fidelity")]
    pub fidelity: f64,
    /// Override for the per-voter test-coin width S (default 2·⌈log₂N⌉).
    #[serde(default)]
    pub test_bits: Option<usize>,
}

fn default_fidelity() -> f64 {
    1.0
}

impl Default for TransferSpec {
    fn default() -> Self {
        TransferSpec {
            fidelity: 1.0,
            test_bits: None,
        }
    }
}

/// Configuration of one election.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectionConfig {
    /// Number of voters N.
    pub voters: usize,
    /// Ballot string length n (even, at least 2N).
    pub bits: usize,
    /// Rounds r of the repetition scheme.
    pub rounds: u32,
    /// Ballot copies per voter s; 1 is the base protocol, s > 1 adds the
    /// authenticated tag extension with s−1 extra parities.
    #[serde(default = "default_one")]
    pub tag_copies: usize,
    /// Independent tallymen t; outcomes are cross-checked when t > 1.
    #[serde(default = "default_one")]
    pub tallymen: usize,
    /// Trusted mode delivers ballots directly instead of anonymous transfer.
    #[serde(default)]
    pub trusted_tallyman: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversarySpec>,
    #[serde(default)]
    pub transfer: TransferSpec,
    #[serde(default)]
    pub seed: u64,
}

fn default_one() -> usize {
    1
}

impl ElectionConfig {
    /// Minimal config with the practical floor n = 2N and defaults elsewhere.
    pub fn basic(voters: usize, bits: usize, rounds: u32) -> Self {
        ElectionConfig {
            voters,
            bits,
            rounds,
            tag_copies: 1,
            tallymen: 1,
            trusted_tallyman: false,
            noise: None,
            adversary: None,
            transfer: TransferSpec::default(),
            seed: 0,
        }
    }

    /// True when ballots must live in a power-of-two space so that transport
    /// Pauli errors and bit-flip noise act within it.
    pub fn needs_padding(&self) -> bool {
        self.noise.is_some() || (!self.trusted_tallyman && self.transfer.fidelity < 1.0)
    }

    /// Ballot state dimension after optional padding.
    pub fn ballot_dim(&self) -> usize {
        if self.needs_padding() {
            self.bits.next_power_of_two()
        } else {
            self.bits
        }
    }

    /// Qubits used to transport one ballot copy.
    pub fn transport_qubits(&self) -> usize {
        (usize::BITS - (self.ballot_dim() - 1).leading_zeros()) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.voters == 0 {
            return Err(Error::InvalidArgument("need at least one voter".into()));
        }
        if self.bits < 2 || self.bits % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "ballot length must be even and >= 2, got {}",
                self.bits
            )));
        }
        if self.bits < 2 * self.voters {
            return Err(Error::InvalidArgument(format!(
                "ballot length {} below the practical floor 2N = {}",
                self.bits,
                2 * self.voters
            )));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidArgument("need at least one round".into()));
        }
        if self.tag_copies == 0 {
            return Err(Error::InvalidArgument("tag_copies must be >= 1".into()));
        }
        if self.tallymen == 0 {
            return Err(Error::InvalidArgument("tallymen must be >= 1".into()));
        }
        if let Some(noise) = &self.noise {
            if !(0.0..=1.0).contains(&noise.p) {
                return Err(Error::InvalidArgument("noise p out of [0,1]".into()));
            }
            if !self.bits.is_power_of_two() {
                return Err(Error::InvalidArgument(
                    "bit-flip noise requires a power-of-two ballot length".into(),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.transfer.fidelity) {
            return Err(Error::InvalidArgument("transfer fidelity out of [0,1]".into()));
        }
        if !self.trusted_tallyman && self.transfer.fidelity < 1.0 && !self.bits.is_power_of_two() {
            return Err(Error::InvalidArgument(
                "noisy anonymous transfer requires a power-of-two ballot length".into(),
            ));
        }
        if let Some(adv) = &self.adversary {
            adv.validate(self)?;
        }
        Ok(())
    }
}
