//! Minimal dense pure-state engine.
//!
//! States are immutable complex amplitude vectors over one or more qudit
//! parts; every operation returns a new state. Mixed behavior (noise,
//! tampering) is realized by trajectory sampling with an injected RNG, so all
//! statistics below the 1e-9 numerical tolerance are exact Born statistics.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hard cap on statevector size (amplitude count).
pub const STATE_CAP: usize = 1 << 24;

/// Numerical tolerance for normalization and orthonormality checks.
pub const TOL: f64 = 1e-9;

/// A normalized pure state over one or more qudit parts.
///
/// `parts` records the tensor factorization; amplitudes are stored row-major
/// with part 0 most significant. Total dimension is the product of the parts.
#[derive(Clone, Debug)]
pub struct PureState {
    parts: Vec<usize>,
    amps: Vec<Complex64>,
}

impl PureState {
    /// Build a state from a parts descriptor and amplitudes, checking the
    /// dimension product, the size cap, and normalization within 1e-9.
    pub fn new(parts: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        let dim: usize = parts.iter().product();
        if parts.is_empty() || parts.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(
                "parts descriptor must be non-empty with positive dims".into(),
            ));
        }
        if dim > STATE_CAP {
            return Err(Error::ResourceLimit {
                requested: dim,
                cap: STATE_CAP,
            });
        }
        if amps.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: amps.len(),
            });
        }
        let state = PureState { parts, amps };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > TOL {
            return Err(Error::InvalidArgument(format!(
                "state not normalized: |psi|^2 = {n}"
            )));
        }
        Ok(state)
    }

    /// Computational basis state `index` of the given register shape.
    pub fn basis_state(parts: Vec<usize>, index: usize) -> Result<Self> {
        let dim: usize = parts.iter().product();
        if dim > STATE_CAP {
            return Err(Error::ResourceLimit {
                requested: dim,
                cap: STATE_CAP,
            });
        }
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dim {dim}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { parts, amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩| — 1 for states equal up to global phase.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm()
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let dim = self.dim() * other.dim();
        if dim > STATE_CAP {
            return Err(Error::ResourceLimit {
                requested: dim,
                cap: STATE_CAP,
            });
        }
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        let mut amps = Vec::with_capacity(dim);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState { parts, amps })
    }

    /// Reinterpret the register with a new factorization of the same total
    /// dimension (e.g. fuse two adjacent qubits into one dim-4 part).
    pub fn regroup(&self, parts: Vec<usize>) -> Result<Self> {
        let dim: usize = parts.iter().product();
        if dim != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: dim,
            });
        }
        Ok(PureState {
            parts,
            amps: self.amps.clone(),
        })
    }

    pub(crate) fn from_raw(parts: Vec<usize>, amps: Vec<Complex64>) -> Self {
        PureState { parts, amps }
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }
}

/// An orthonormal measurement basis with one opaque label per vector.
#[derive(Clone, Debug)]
pub struct OrthoBasis<L> {
    dim: usize,
    vectors: Vec<Vec<Complex64>>,
    labels: Vec<L>,
}

impl<L: Clone> OrthoBasis<L> {
    /// Build a basis, checking pairwise orthonormality within 1e-9.
    pub fn new(vectors: Vec<Vec<Complex64>>, labels: Vec<L>) -> Result<Self> {
        if vectors.is_empty() || vectors.len() != labels.len() {
            return Err(Error::InvalidArgument(
                "basis needs one label per vector".into(),
            ));
        }
        let dim = vectors[0].len();
        if vectors.len() != dim || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidArgument(
                "basis must contain dim vectors of length dim".into(),
            ));
        }
        for (i, vi) in vectors.iter().enumerate() {
            for (j, vj) in vectors.iter().enumerate().skip(i) {
                let ip: Complex64 = vi.iter().zip(vj).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (ip.norm() - expect).abs() > TOL {
                    return Err(Error::InvalidArgument(format!(
                        "basis vectors {i},{j} not orthonormal: |<i|j>| = {}",
                        ip.norm()
                    )));
                }
            }
        }
        Ok(OrthoBasis {
            dim,
            vectors,
            labels,
        })
    }

    /// Internal constructor for bases that are orthonormal by construction.
    pub(crate) fn new_unchecked(vectors: Vec<Vec<Complex64>>, labels: Vec<L>) -> Self {
        let dim = vectors[0].len();
        OrthoBasis {
            dim,
            vectors,
            labels,
        }
    }
}

impl<L> OrthoBasis<L> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    /// Gram matrix entries ⟨v_i|v_j⟩, for orthonormality checks in tests.
    pub fn gram(&self) -> Vec<Vec<Complex64>> {
        self.vectors
            .iter()
            .map(|vi| {
                self.vectors
                    .iter()
                    .map(|vj| vi.iter().zip(vj).map(|(a, b)| a.conj() * b).sum())
                    .collect()
            })
            .collect()
    }
}

/// Computational (Z) basis of the given dimension, labeled by index.
pub fn computational_basis(dim: usize) -> OrthoBasis<usize> {
    let mut vectors = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = Complex64::new(1.0, 0.0);
        vectors.push(v);
    }
    OrthoBasis::new_unchecked(vectors, (0..dim).collect())
}

/// Generalized X basis: the quantum Fourier transform of the computational
/// basis. Vector `k` has components e^{2πi·kj/M}/√M.
pub fn qft_basis(m: usize) -> Result<OrthoBasis<usize>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("qft_basis needs M >= 2, got {m}")));
    }
    let norm = 1.0 / (m as f64).sqrt();
    let mut vectors = Vec::with_capacity(m);
    for k in 0..m {
        let mut v = Vec::with_capacity(m);
        for j in 0..m {
            let phase = 2.0 * std::f64::consts::PI * (k as f64) * (j as f64) / (m as f64);
            v.push(Complex64::from_polar(norm, phase));
        }
        vectors.push(v);
    }
    Ok(OrthoBasis::new_unchecked(vectors, (0..m).collect()))
}

/// Qubit {+,−} basis labeled false = +, true = −.
pub fn plus_minus_basis() -> OrthoBasis<bool> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    OrthoBasis::new_unchecked(
        vec![
            vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
            vec![Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        ],
        vec![false, true],
    )
}

/// Two-qubit Bell basis labeled by (phase bit, parity bit):
/// (0,0)=|00⟩+|11⟩, (0,1)=|01⟩+|10⟩, (1,0)=|00⟩−|11⟩, (1,1)=|01⟩−|10⟩.
pub fn bell_basis() -> OrthoBasis<(bool, bool)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    let p = Complex64::new(s, 0.0);
    let n = Complex64::new(-s, 0.0);
    OrthoBasis::new_unchecked(
        vec![
            vec![p, z, z, p],
            vec![z, p, p, z],
            vec![p, z, z, n],
            vec![z, p, n, z],
        ],
        vec![(false, false), (false, true), (true, false), (true, true)],
    )
}

/// Maximally entangled two-qudit pair Σ|i⟩|i⟩/√M.
pub fn epr_qudit(m: usize) -> Result<PureState> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("epr_qudit needs M >= 2, got {m}")));
    }
    let dim = m * m;
    if dim > STATE_CAP {
        return Err(Error::ResourceLimit {
            requested: dim,
            cap: STATE_CAP,
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let a = Complex64::new(1.0 / (m as f64).sqrt(), 0.0);
    for i in 0..m {
        amps[i * m + i] = a;
    }
    Ok(PureState {
        parts: vec![m, m],
        amps,
    })
}

/// The basis-label map of the generalized CNOT: |i⟩|j⟩ → |i⟩|(j+(M−1)i) mod M⟩.
pub fn gen_cnot_label(i: usize, j: usize, m: usize) -> (usize, usize) {
    (i, (j + (m - 1) * i) % m)
}

/// Generalized controlled-NOT on a two-qudit register of dimension M².
pub fn gen_cnot(state: &PureState, m: usize) -> Result<PureState> {
    if state.parts() != [m, m] {
        return Err(Error::DimMismatch {
            expected: m * m,
            got: state.dim(),
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); state.dim()];
    for i in 0..m {
        for j in 0..m {
            let (_, j2) = gen_cnot_label(i, j, m);
            amps[i * m + j2] = state.amps[i * m + j];
        }
    }
    Ok(PureState {
        parts: vec![m, m],
        amps,
    })
}

/// k-qubit GHZ state (|0…0⟩+|1…1⟩)/√2. Capped at 24 qubits.
pub fn ghz(k: usize) -> Result<PureState> {
    if k < 1 {
        return Err(Error::InvalidArgument("ghz needs k >= 1".into()));
    }
    if k > 24 {
        return Err(Error::ResourceLimit {
            requested: 1usize << k.min(63),
            cap: STATE_CAP,
        });
    }
    let dim = 1usize << k;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[0] = a;
    amps[dim - 1] = a;
    Ok(PureState {
        parts: vec![2; k],
        amps,
    })
}

/// Per-qubit bit-flip noise probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub qubit_count: usize,
}

impl NoiseParams {
    pub fn new(p: f64, qubit_count: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("noise p out of [0,1]: {p}")));
        }
        if qubit_count == 0 {
            return Err(Error::InvalidArgument("qubit_count must be positive".into()));
        }
        Ok(NoiseParams { p, qubit_count })
    }
}

/// One trajectory of the bit-flip channel X_p applied independently per qubit:
/// with probability p the amplitudes of i and i XOR 2^q are swapped.
pub fn bitflip_channel(
    state: &PureState,
    noise: &NoiseParams,
    rng: &mut impl Rng,
) -> Result<PureState> {
    let dim = state.dim();
    if dim != 1usize << noise.qubit_count {
        return Err(Error::DimMismatch {
            expected: 1usize << noise.qubit_count,
            got: dim,
        });
    }
    let mut out = state.clone();
    for q in 0..noise.qubit_count {
        if rng.gen_bool(noise.p) {
            flip_bit(out.amps_mut(), q);
        }
    }
    Ok(out)
}

fn flip_bit(amps: &mut [Complex64], bit: usize) {
    let mask = 1usize << bit;
    for i in 0..amps.len() {
        if i & mask == 0 {
            amps.swap(i, i | mask);
        }
    }
}

/// Single-qubit Pauli operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Apply a Pauli to label-bit `bit` of a power-of-two register.
pub fn pauli_on_bit(state: &PureState, bit: usize, pauli: Pauli) -> Result<PureState> {
    let dim = state.dim();
    if !dim.is_power_of_two() || 1usize << bit >= dim {
        return Err(Error::InvalidArgument(format!(
            "pauli_on_bit needs a power-of-two register containing bit {bit}"
        )));
    }
    let mut out = state.clone();
    let mask = 1usize << bit;
    let amps = out.amps_mut();
    match pauli {
        Pauli::I => {}
        Pauli::X => flip_bit(amps, bit),
        Pauli::Z => {
            for (i, a) in amps.iter_mut().enumerate() {
                if i & mask != 0 {
                    *a = -*a;
                }
            }
        }
        Pauli::Y => {
            // Y = iXZ
            for (i, a) in amps.iter_mut().enumerate() {
                let ph = if i & mask != 0 {
                    Complex64::new(0.0, -1.0)
                } else {
                    Complex64::new(0.0, 1.0)
                };
                *a *= ph;
            }
            flip_bit(amps, bit);
        }
    }
    Ok(out)
}

/// Apply a Pauli to qubit part `part` of an all-qubit register.
pub fn pauli_on_part(state: &PureState, part: usize, pauli: Pauli) -> Result<PureState> {
    let k = state.parts().len();
    if part >= k || state.parts().iter().any(|&d| d != 2) {
        return Err(Error::InvalidArgument(
            "pauli_on_part needs an all-qubit register".into(),
        ));
    }
    // Part 0 is most significant in the row-major layout.
    pauli_on_bit(state, k - 1 - part, pauli)
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let r: f64 = rng.gen();
    let mut cum = 0.0;
    let mut last_nonzero = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = k;
        }
        cum += p;
        if r < cum {
            return k;
        }
    }
    // Float slop at the top of the cumulative walk.
    last_nonzero
}

/// Projective measurement of the whole register in an orthonormal basis.
/// Returns the outcome label and the normalized projected state.
pub fn measure<L: Clone>(
    state: &PureState,
    basis: &OrthoBasis<L>,
    rng: &mut impl Rng,
) -> Result<(L, PureState)> {
    if basis.dim() != state.dim() {
        return Err(Error::DimMismatch {
            expected: state.dim(),
            got: basis.dim(),
        });
    }
    let overlaps: Vec<Complex64> = basis
        .vectors()
        .iter()
        .map(|v| v.iter().zip(state.amplitudes()).map(|(b, a)| b.conj() * a).sum())
        .collect();
    let probs: Vec<f64> = overlaps.iter().map(|o| o.norm_sqr()).collect();
    let k = sample_index(&probs, rng);
    let phase = overlaps[k] / overlaps[k].norm();
    let amps = basis.vectors()[k].iter().map(|b| b * phase).collect();
    Ok((
        basis.labels()[k].clone(),
        PureState {
            parts: state.parts.clone(),
            amps,
        },
    ))
}

/// Exact Born probabilities of a full-register measurement, as an oracle for
/// frequency checks.
pub fn outcome_probabilities<L>(state: &PureState, basis: &OrthoBasis<L>) -> Result<Vec<f64>> {
    if basis.dim() != state.dim() {
        return Err(Error::DimMismatch {
            expected: state.dim(),
            got: basis.dim(),
        });
    }
    Ok(basis
        .vectors()
        .iter()
        .map(|v| {
            v.iter()
                .zip(state.amplitudes())
                .map(|(b, a)| b.conj() * a)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect())
}

fn part_strides(parts: &[usize], part: usize) -> (usize, usize, usize) {
    let before: usize = parts[..part].iter().product();
    let dp = parts[part];
    let after: usize = parts[part + 1..].iter().product();
    (before, dp, after)
}

/// Measure one tensor factor in a basis of its dimension. Returns the outcome
/// label and the state of the remaining parts (the measured part is removed).
pub fn measure_part<L: Clone>(
    state: &PureState,
    part: usize,
    basis: &OrthoBasis<L>,
    rng: &mut impl Rng,
) -> Result<(L, PureState)> {
    if part >= state.parts().len() {
        return Err(Error::InvalidArgument(format!("no part {part}")));
    }
    let (before, dp, after) = part_strides(state.parts(), part);
    if basis.dim() != dp {
        return Err(Error::DimMismatch {
            expected: dp,
            got: basis.dim(),
        });
    }
    let rest = before * after;
    // Contract ⟨b_k| along the measured axis for each outcome.
    let mut reduced: Vec<Vec<Complex64>> = Vec::with_capacity(dp);
    let mut probs = Vec::with_capacity(dp);
    for v in basis.vectors() {
        let mut red = vec![Complex64::new(0.0, 0.0); rest];
        for b in 0..before {
            for (i, vi) in v.iter().enumerate() {
                let base = (b * dp + i) * after;
                let out = b * after;
                for a in 0..after {
                    red[out + a] += vi.conj() * state.amps[base + a];
                }
            }
        }
        probs.push(red.iter().map(|c| c.norm_sqr()).sum());
        reduced.push(red);
    }
    let k = sample_index(&probs, rng);
    let norm = probs[k].sqrt();
    let mut amps = std::mem::take(&mut reduced[k]);
    for a in &mut amps {
        *a /= norm;
    }
    let mut parts = state.parts.clone();
    parts.remove(part);
    if parts.is_empty() {
        parts.push(1);
        amps = vec![Complex64::new(1.0, 0.0)];
    }
    Ok((basis.labels()[k].clone(), PureState { parts, amps }))
}

/// Fast path for computational-basis measurement of one part: the outcome
/// distribution is the marginal of |amplitude|² over that axis.
pub fn measure_part_computational(
    state: &PureState,
    part: usize,
    rng: &mut impl Rng,
) -> Result<(usize, PureState)> {
    if part >= state.parts().len() {
        return Err(Error::InvalidArgument(format!("no part {part}")));
    }
    let (before, dp, after) = part_strides(state.parts(), part);
    let mut probs = vec![0.0; dp];
    for b in 0..before {
        for i in 0..dp {
            let base = (b * dp + i) * after;
            for a in 0..after {
                probs[i] += state.amps[base + a].norm_sqr();
            }
        }
    }
    let k = sample_index(&probs, rng);
    let norm = probs[k].sqrt();
    let rest = before * after;
    let mut amps = vec![Complex64::new(0.0, 0.0); rest];
    for b in 0..before {
        let base = (b * dp + k) * after;
        let out = b * after;
        for a in 0..after {
            amps[out + a] = state.amps[base + a] / norm;
        }
    }
    let mut parts = state.parts.clone();
    parts.remove(part);
    if parts.is_empty() {
        parts.push(1);
        amps = vec![Complex64::new(1.0, 0.0)];
    }
    Ok((k, PureState { parts, amps }))
}
