//! The hidden-matching ballot.
//!
//! A ballot encodes the tallyman's random string `x` as phases of a uniform
//! superposition over `n` labels. Measuring in a pairwise-matching basis
//! yields one edge (i, j) and the parity x_i ⊕ x_j — the only information a
//! single copy gives up. Tags wrap a measured edge with the vote-encrypting
//! agreement bit and, in the extended scheme, extra authenticated parities.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qsim::{measure, OrthoBasis, PureState};
use crate::{Error, Result};

/// The tallyman's random bit string; length must be even and at least 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomString {
    bits: Vec<bool>,
}

impl RandomString {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.len() < 2 || bits.len() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "random string length must be even and >= 2, got {}",
                bits.len()
            )));
        }
        Ok(RandomString { bits })
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "random string length must be even and >= 2, got {n}"
            )));
        }
        Ok(RandomString {
            bits: (0..n).map(|_| rng.gen_bool(0.5)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// x_i ⊕ x_j.
    pub fn parity(&self, edge: Edge) -> bool {
        self.bits[edge.i as usize] ^ self.bits[edge.j as usize]
    }

    /// Bitwise complement, which encodes to the same state up to global phase.
    pub fn complement(&self) -> RandomString {
        RandomString {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Hex encoding: bit 0 is the most significant bit of the first byte;
    /// the final byte is zero-padded. Used by the transcript format.
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        for chunk in self.bits.chunks(8) {
            let mut byte = 0u8;
            for (k, &b) in chunk.iter().enumerate() {
                if b {
                    byte |= 1 << (7 - k);
                }
            }
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn from_hex(hex: &str, n: usize) -> Result<Self> {
        if hex.len() % 2 != 0 {
            return Err(Error::InvalidArgument("odd hex string".into()));
        }
        let mut bits = Vec::with_capacity(n);
        for pair in hex.as_bytes().chunks(2) {
            let s = std::str::from_utf8(pair)
                .map_err(|_| Error::InvalidArgument("bad hex".into()))?;
            let byte = u8::from_str_radix(s, 16)
                .map_err(|e| Error::InvalidArgument(format!("bad hex: {e}")))?;
            for k in 0..8 {
                bits.push(byte & (1 << (7 - k)) != 0);
            }
        }
        if bits.len() < n {
            return Err(Error::InvalidArgument("hex too short for n".into()));
        }
        bits.truncate(n);
        RandomString::new(bits)
    }
}

/// An unordered pair of labels in normal form i < j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
}

impl Edge {
    pub fn new(a: u32, b: u32) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidArgument(format!("degenerate edge ({a},{a})")));
        }
        Ok(Edge {
            i: a.min(b),
            j: a.max(b),
        })
    }

    pub fn touches(&self, label: u32) -> bool {
        self.i == label || self.j == label
    }

    pub fn intersects(&self, other: &Edge) -> bool {
        self.touches(other.i) || self.touches(other.j)
    }
}

/// A perfect matching: n/2 disjoint pairs covering {0, …, n−1}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pairs: Vec<Edge>,
}

impl Matching {
    pub fn new(pairs: Vec<Edge>) -> Result<Self> {
        let n = pairs.len() * 2;
        let mut seen = vec![false; n];
        for e in &pairs {
            for v in [e.i, e.j] {
                let v = v as usize;
                if v >= n || seen[v] {
                    return Err(Error::InvalidArgument(
                        "pairs must exactly cover the label set".into(),
                    ));
                }
                seen[v] = true;
            }
        }
        Ok(Matching { pairs })
    }

    pub fn n(&self) -> usize {
        self.pairs.len() * 2
    }

    pub fn pairs(&self) -> &[Edge] {
        &self.pairs
    }
}

/// A broadcast vote record: the measured edge, the agreement bit a = p ⊕ v,
/// and any extra authenticated parities of the tag extension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTag {
    pub edge: Edge,
    pub agreement: bool,
    pub extras: Vec<(Edge, bool)>,
}

impl VoteTag {
    /// All edges of the tag: the voted edge followed by the extras.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        std::iter::once(self.edge).chain(self.extras.iter().map(|(e, _)| *e))
    }

    fn edges_disjoint(&self) -> bool {
        let all: Vec<Edge> = self.edges().collect();
        for (k, a) in all.iter().enumerate() {
            for b in &all[k + 1..] {
                if a.intersects(b) {
                    return false;
                }
            }
        }
        true
    }
}

/// Encode `x` as the ballot state with amplitudes (−1)^{x_i}/√n.
pub fn encode_ballot(x: &RandomString) -> PureState {
    encode_with_dim(x, x.n())
}

/// Encode `x` padded to the next power of two, so bit-flip noise and Pauli
/// transport errors act within the space. Labels ≥ n carry zero amplitude.
pub fn encode_ballot_padded(x: &RandomString) -> PureState {
    encode_with_dim(x, x.n().next_power_of_two())
}

fn encode_with_dim(x: &RandomString, dim: usize) -> PureState {
    let norm = 1.0 / (x.n() as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for i in 0..x.n() {
        amps[i] = Complex64::new(if x.bit(i) { -norm } else { norm }, 0.0);
    }
    PureState::from_raw(vec![dim], amps)
}

/// Uniform perfect matching of n labels, by pairing consecutive elements of a
/// uniform random permutation.
pub fn random_matching(n: usize, rng: &mut impl Rng) -> Result<Matching> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "matching needs even n >= 2, got {n}"
        )));
    }
    let mut labels: Vec<u32> = (0..n as u32).collect();
    labels.shuffle(rng);
    let pairs = labels
        .chunks(2)
        .map(|c| Edge::new(c[0], c[1]).expect("shuffle yields distinct labels"))
        .collect();
    Ok(Matching { pairs })
}

/// Outcome label of a matching-basis measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BallotOutcome {
    /// Edge (i, j) with parity p: the (|i⟩+|j⟩)/√2 branch is p = 0, the
    /// (|i⟩−|j⟩)/√2 branch is p = 1.
    Edge { edge: Edge, parity: bool },
    /// A padded label outside the ballot range; surfaces transport corruption.
    Invalid { label: u32 },
}

/// The full measurement basis for a matching over a (possibly padded) space:
/// (|i⟩±|j⟩)/√2 per pair, plus singleton computational vectors on padded
/// labels, labeled invalid.
pub fn matching_basis(m: &Matching, dim: usize) -> Result<OrthoBasis<BallotOutcome>> {
    let n = m.n();
    if dim < n {
        return Err(Error::DimMismatch {
            expected: n,
            got: dim,
        });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut vectors = Vec::with_capacity(dim);
    let mut labels = Vec::with_capacity(dim);
    for e in m.pairs() {
        for (sign, parity) in [(s, false), (-s, true)] {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[e.i as usize] = Complex64::new(s, 0.0);
            v[e.j as usize] = Complex64::new(sign, 0.0);
            vectors.push(v);
            labels.push(BallotOutcome::Edge { edge: *e, parity });
        }
    }
    for l in n..dim {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[l] = Complex64::new(1.0, 0.0);
        vectors.push(v);
        labels.push(BallotOutcome::Invalid { label: l as u32 });
    }
    Ok(OrthoBasis::new_unchecked(vectors, labels))
}

/// Measure a ballot state in the basis of matching `m`.
///
/// Uses the sparsity of the matching basis (two nonzero components per
/// vector) for an O(n) exact Born sample; `ballot_outcome_probabilities`
/// exposes the same distribution for oracle checks against the dense path.
pub fn measure_ballot(
    state: &PureState,
    m: &Matching,
    rng: &mut impl Rng,
) -> Result<BallotOutcome> {
    let probs = ballot_outcome_probabilities(state, m)?;
    let r: f64 = rng.gen();
    let mut cum = 0.0;
    let mut last = None;
    for (outcome, p) in &probs {
        if *p > 0.0 {
            last = Some(*outcome);
        }
        cum += p;
        if r < cum {
            return Ok(*outcome);
        }
    }
    Ok(last.expect("ballot distribution is non-degenerate"))
}

/// Exact outcome distribution of `measure_ballot`, in basis order.
pub fn ballot_outcome_probabilities(
    state: &PureState,
    m: &Matching,
) -> Result<Vec<(BallotOutcome, f64)>> {
    let n = m.n();
    let dim = state.dim();
    if dim < n {
        return Err(Error::DimMismatch {
            expected: n,
            got: dim,
        });
    }
    let amps = state.amplitudes();
    let mut out = Vec::with_capacity(n + (dim - n));
    for e in m.pairs() {
        let ai = amps[e.i as usize];
        let aj = amps[e.j as usize];
        out.push((
            BallotOutcome::Edge {
                edge: *e,
                parity: false,
            },
            (ai + aj).norm_sqr() / 2.0,
        ));
        out.push((
            BallotOutcome::Edge {
                edge: *e,
                parity: true,
            },
            (ai - aj).norm_sqr() / 2.0,
        ));
    }
    for l in n..dim {
        out.push((
            BallotOutcome::Invalid { label: l as u32 },
            amps[l].norm_sqr(),
        ));
    }
    Ok(out)
}

/// Build a vote tag: agreement = p ⊕ v, extras copied verbatim.
pub fn make_tag(
    edge: Edge,
    parity: bool,
    vote: bool,
    extras: Vec<(Edge, bool)>,
) -> Result<VoteTag> {
    let tag = VoteTag {
        edge,
        agreement: parity ^ vote,
        extras,
    };
    if !tag.edges_disjoint() {
        return Err(Error::InvalidArgument(
            "tag extras must be pairwise disjoint and disjoint from the voted edge".into(),
        ));
    }
    Ok(tag)
}

/// Decode a broadcast tag once x is revealed: v = (x_i ⊕ x_j) ⊕ a.
pub fn decode_vote(tag: &VoteTag, x: &RandomString) -> Result<bool> {
    if tag.edge.j as usize >= x.n() {
        return Err(Error::InvalidArgument(format!(
            "tag edge ({}, {}) out of range for n = {}",
            tag.edge.i,
            tag.edge.j,
            x.n()
        )));
    }
    Ok(x.parity(tag.edge) ^ tag.agreement)
}

/// Authenticate a tag against the revealed x: every extra parity must equal
/// x_i ⊕ x_j and all edges (voted + extras) must be pairwise disjoint.
pub fn verify_tag(tag: &VoteTag, x: &RandomString) -> bool {
    if !tag.edges_disjoint() {
        return false;
    }
    tag.extras.iter().all(|(e, p)| {
        (e.j as usize) < x.n() && x.parity(*e) == *p
    })
}

/// Dense-path cross-check used by tests: the sparse ballot distribution must
/// match `qsim::outcome_probabilities` on the materialized matching basis.
pub fn measure_ballot_dense(
    state: &PureState,
    m: &Matching,
    rng: &mut impl Rng,
) -> Result<BallotOutcome> {
    let basis = matching_basis(m, state.dim())?;
    let (label, _) = measure(state, &basis, rng)?;
    Ok(label)
}

/// Enumerate all perfect matchings of n labels (for oracle tests; n ≤ 12).
pub fn enumerate_matchings(n: usize) -> Result<Vec<Matching>> {
    if n < 2 || n % 2 != 0 || n > 12 {
        return Err(Error::InvalidArgument(format!(
            "matching enumeration supports even 2 <= n <= 12, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut free: Vec<u32> = (0..n as u32).collect();
    let mut acc = Vec::new();
    fn rec(free: &mut Vec<u32>, acc: &mut Vec<Edge>, out: &mut Vec<Matching>) {
        if free.is_empty() {
            out.push(Matching { pairs: acc.clone() });
            return;
        }
        let a = free[0];
        for k in 1..free.len() {
            let b = free[k];
            let mut rest: Vec<u32> = free[1..].to_vec();
            rest.remove(k - 1);
            acc.push(Edge::new(a, b).unwrap());
            rec(&mut rest, acc, out);
            acc.pop();
        }
    }
    rec(&mut free, &mut acc, &mut out);
    Ok(out)
}
