//! The anonymity distinguishing game: the adversary fixes a vote
//! configuration and a permutation of the honest voters, a hidden coin b
//! selects which of the two runs, and a strategy guesses b from the public
//! transcript alone. Any measurable advantage over 1/2 is an anonymity leak.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::election::{run_voting_round, AnonymityView, ElectionConfig};
use crate::rng::stream_rng;
use crate::stats::{wilson_interval, Z_999};
use crate::{Error, Result};

/// Game instance: honest set, their vote permutation, the base configuration,
/// and the trial budget.
#[derive(Clone, Debug)]
pub struct AnonymityGame {
    /// Honest voter indices (the permutation's domain).
    pub honest: Vec<u32>,
    /// Image of each honest voter under the adversary's permutation π
    /// (parallel to `honest`).
    pub permutation: Vec<u32>,
    /// Base vote configuration for every voter.
    pub base_votes: Vec<bool>,
    pub trials: u32,
}

impl AnonymityGame {
    /// Swap game: π transposes two honest voters, the sharpest two-voter
    /// distinguishing task when their base votes differ.
    pub fn swap(base_votes: Vec<bool>, a: u32, b: u32, trials: u32) -> Self {
        let honest: Vec<u32> = (0..base_votes.len() as u32).collect();
        let permutation = honest
            .iter()
            .map(|&v| {
                if v == a {
                    b
                } else if v == b {
                    a
                } else {
                    v
                }
            })
            .collect();
        AnonymityGame {
            honest,
            permutation,
            base_votes,
            trials,
        }
    }

    pub fn validate(&self, cfg: &ElectionConfig) -> Result<()> {
        if self.base_votes.len() != cfg.voters {
            return Err(Error::InvalidArgument("base_votes must cover every voter".into()));
        }
        if self.honest.len() != self.permutation.len() {
            return Err(Error::InvalidArgument(
                "permutation must be parallel to the honest set".into(),
            ));
        }
        let mut seen = vec![false; cfg.voters];
        for &img in &self.permutation {
            if img as usize >= cfg.voters || seen[img as usize] {
                return Err(Error::InvalidArgument("permutation must be a bijection".into()));
            }
            seen[img as usize] = true;
            if !self.honest.contains(&img) {
                return Err(Error::InvalidArgument("π must map the honest set to itself".into()));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("game needs at least one trial".into()));
        }
        Ok(())
    }

    /// Vote configuration for hidden bit b: base votes, or the honest votes
    /// pulled back through π.
    pub fn votes_for(&self, b: bool) -> Vec<bool> {
        if !b {
            return self.base_votes.clone();
        }
        let mut votes = self.base_votes.clone();
        for (&voter, &image) in self.honest.iter().zip(&self.permutation) {
            votes[voter as usize] = self.base_votes[image as usize];
        }
        votes
    }
}

/// A distinguisher over public transcripts. Strategies see only the
/// [`AnonymityView`] (plus the game description they chose themselves);
/// private voter state is not reachable through that type.
pub trait Strategy: Sync {
    fn name(&self) -> &'static str;
    fn guess(&self, view: &AnonymityView<'_>, game: &AnonymityGame) -> bool;
}

/// Advantage estimate for one strategy.
#[derive(Clone, Debug)]
pub struct AdvantageReport {
    pub strategy: String,
    pub trials: u32,
    pub correct: u32,
    /// Pr[guess = b] − 1/2.
    pub advantage: f64,
    /// Wilson 99.9% interval on the advantage.
    pub ci: (f64, f64),
}

/// Announcement counts per (modulus, party, value), pooled over trials.
#[derive(Clone, Debug, Default)]
pub struct AnnouncementStats {
    pub counts: BTreeMap<u32, Vec<Vec<u64>>>,
}

impl AnnouncementStats {
    fn record(&mut self, modulus: u32, announcements: &[u32]) {
        let parties = announcements.len();
        let table = self
            .counts
            .entry(modulus)
            .or_insert_with(|| vec![vec![0u64; modulus as usize]; parties]);
        if table.len() < parties {
            table.resize(parties, vec![0u64; modulus as usize]);
        }
        for (party, &value) in announcements.iter().enumerate() {
            table[party][value as usize] += 1;
        }
    }

    fn absorb(&mut self, view: &AnonymityView<'_>) {
        for sum in view
            .events
            .queue_sums
            .iter()
            .chain(&view.events.broadcast_sums)
            .chain(&view.events.coin_sums)
            .chain(view.events.complaint_sum.as_ref())
        {
            self.record(sum.modulus, &sum.announcements);
        }
    }

    fn merge(mut self, other: AnnouncementStats) -> AnnouncementStats {
        for (modulus, table) in other.counts {
            match self.counts.get_mut(&modulus) {
                None => {
                    self.counts.insert(modulus, table);
                }
                Some(mine) => {
                    if mine.len() < table.len() {
                        mine.resize(table.len(), vec![0u64; modulus as usize]);
                    }
                    for (party, row) in table.into_iter().enumerate() {
                        for (value, count) in row.into_iter().enumerate() {
                            mine[party][value] += count;
                        }
                    }
                }
            }
        }
        self
    }

    /// All (modulus, party, chi2, df) entries with enough samples to test.
    pub fn chi2_entries(&self) -> Vec<(u32, usize, f64, usize)> {
        let mut out = Vec::new();
        for (modulus, table) in &self.counts {
            for (party, row) in table.iter().enumerate() {
                let total: u64 = row.iter().sum();
                if total < 50 * *modulus as u64 {
                    continue;
                }
                out.push((*modulus, party, crate::stats::chi2_uniform(row), *modulus as usize - 1));
            }
        }
        out
    }
}

/// Play the game for one strategy.
pub fn play_anonymity_game(
    game: &AnonymityGame,
    strategy: &dyn Strategy,
    cfg: &ElectionConfig,
    seed: u64,
) -> Result<AdvantageReport> {
    let (mut reports, _) = play_anonymity_games(game, &[strategy], cfg, seed)?;
    Ok(reports.remove(0))
}

/// Play the game feeding every trial's transcript to all strategies, and
/// pool the announcement statistics. Trials run in parallel on independent
/// RNG streams; aggregation is order-independent, so results are
/// deterministic in (game, cfg, seed).
pub fn play_anonymity_games(
    game: &AnonymityGame,
    strategies: &[&dyn Strategy],
    cfg: &ElectionConfig,
    seed: u64,
) -> Result<(Vec<AdvantageReport>, AnnouncementStats)> {
    cfg.validate()?;
    game.validate(cfg)?;
    let trials = game.trials;
    let votes0 = game.votes_for(false);
    let votes1 = game.votes_for(true);

    struct Acc {
        correct: Vec<u64>,
        stats: AnnouncementStats,
        error: Option<Error>,
    }
    let identity = || Acc {
        correct: vec![0u64; strategies.len()],
        stats: AnnouncementStats::default(),
        error: None,
    };
    let acc = (0..trials as u64)
        .into_par_iter()
        .fold(identity, |mut acc, trial| {
            if acc.error.is_some() {
                return acc;
            }
            let mut rng = stream_rng(seed, trial);
            use rand::Rng;
            let b = rng.gen_bool(0.5);
            let votes = if b { &votes1 } else { &votes0 };
            match run_voting_round(cfg, votes, 0, &mut rng) {
                Err(e) => acc.error = Some(e),
                Ok(outcome) => {
                    let view = outcome.transcript.public_view();
                    acc.stats.absorb(&view);
                    for (k, strategy) in strategies.iter().enumerate() {
                        if strategy.guess(&view, game) == b {
                            acc.correct[k] += 1;
                        }
                    }
                }
            }
            acc
        })
        .reduce(identity, |mut a, b| {
            if a.error.is_none() {
                if let Some(e) = b.error {
                    a.error = Some(e);
                }
            }
            for (x, y) in a.correct.iter_mut().zip(&b.correct) {
                *x += *y;
            }
            a.stats = a.stats.merge(b.stats);
            a
        });
    if let Some(e) = acc.error {
        return Err(e);
    }
    let reports = strategies
        .iter()
        .zip(&acc.correct)
        .map(|(strategy, &correct)| {
            let (lo, hi) = wilson_interval(correct, trials as u64, Z_999);
            AdvantageReport {
                strategy: strategy.name().to_string(),
                trials,
                correct: correct as u32,
                advantage: correct as f64 / trials as f64 - 0.5,
                ci: (lo - 0.5, hi - 0.5),
            }
        })
        .collect();
    Ok((reports, acc.stats))
}

/// The two voters a swap-style permutation moves (first moved pair).
fn moved_pair(game: &AnonymityGame) -> Option<(u32, u32)> {
    game.honest
        .iter()
        .zip(&game.permutation)
        .find(|(v, img)| v != img)
        .map(|(v, img)| (*v, *img))
}

/// Compares the two swapped voters' masked announcement totals across every
/// secure sum of the round.
pub struct AnnouncementMatcher;

impl Strategy for AnnouncementMatcher {
    fn name(&self) -> &'static str {
        "announcement-matcher"
    }

    fn guess(&self, view: &AnonymityView<'_>, game: &AnonymityGame) -> bool {
        let Some((u, v)) = moved_pair(game) else {
            return false;
        };
        let mut score = 0i64;
        for sum in view
            .events
            .queue_sums
            .iter()
            .chain(&view.events.broadcast_sums)
        {
            let (u, v) = (u as usize, v as usize);
            if u < sum.announcements.len() && v < sum.announcements.len() {
                score += sum.announcements[u] as i64 - sum.announcements[v] as i64;
            }
        }
        score > 0
    }
}

/// Uses the queue timing: rounds per slot and which sums succeeded, matched
/// against the swapped voters' announcements during queue construction.
pub struct QueueTimingMatcher;

impl Strategy for QueueTimingMatcher {
    fn name(&self) -> &'static str {
        "queue-timing-matcher"
    }

    fn guess(&self, view: &AnonymityView<'_>, game: &AnonymityGame) -> bool {
        let Some((u, v)) = moved_pair(game) else {
            return false;
        };
        let mut score = 0i64;
        for sum in &view.events.queue_sums {
            if sum.value == 1 {
                let (u, v) = (u as usize, v as usize);
                if u < sum.announcements.len() && v < sum.announcements.len() {
                    score += sum.announcements[u] as i64 - sum.announcements[v] as i64;
                }
            }
        }
        let odd_rounds = view.slot_rounds.iter().filter(|&&r| r % 2 == 1).count();
        score > 0 || (score == 0 && odd_rounds % 2 == 1)
    }
}

/// Ignores everything but the public tally of the round.
pub struct OutcomeOnlyGuesser;

impl Strategy for OutcomeOnlyGuesser {
    fn name(&self) -> &'static str {
        "outcome-only"
    }

    fn guess(&self, view: &AnonymityView<'_>, _game: &AnonymityGame) -> bool {
        let mut ones = 0i64;
        let mut zeros = 0i64;
        for record in view.tags {
            if record.counted && record.verified {
                if record.decoded_vote {
                    ones += 1;
                } else {
                    zeros += 1;
                }
            }
        }
        ones > zeros
    }
}

/// Correlates the transfer-phase announcement bits of the swapped voters,
/// hunting for the receiver's dummy bit.
pub struct ReceiverCorrelation;

impl Strategy for ReceiverCorrelation {
    fn name(&self) -> &'static str {
        "receiver-correlation"
    }

    fn guess(&self, view: &AnonymityView<'_>, game: &AnonymityGame) -> bool {
        let Some((u, v)) = moved_pair(game) else {
            return false;
        };
        let mut score = 0i64;
        for bits in &view.events.transfer_bits {
            let (u, v) = (u as usize, v as usize);
            if u < bits.len() && v < bits.len() {
                score += bits[u] as i64 - bits[v] as i64;
            }
        }
        score > 0
    }
}

/// Canary for the leak guard: tries to reconstruct private votes from every
/// public field it can reach. Its advantage must be statistically zero.
pub struct CanaryStrategy;

impl Strategy for CanaryStrategy {
    fn name(&self) -> &'static str {
        "canary"
    }

    fn guess(&self, view: &AnonymityView<'_>, game: &AnonymityGame) -> bool {
        let Some((u, v)) = moved_pair(game) else {
            return false;
        };
        // Fuse every stream with a deterministic mix and key on the swapped
        // pair; with no private leakage this is a fancy coin.
        let mut h: u64 = 0x9e3779b97f4a7c15;
        let mut mix = |x: u64| {
            h ^= x.wrapping_mul(0xff51afd7ed558ccd);
            h = h.rotate_left(31).wrapping_mul(0xc4ceb9fe1a85ec53);
        };
        mix(u as u64);
        mix(v as u64);
        mix(view.complaints as u64);
        for (k, bit) in view.x.bits().iter().enumerate() {
            if *bit {
                mix(k as u64);
            }
        }
        for record in view.tags {
            mix(record.tag.edge.i as u64);
            mix(record.tag.edge.j as u64);
            mix(record.tag.agreement as u64);
            mix(record.decoded_vote as u64);
        }
        for sum in view.events.queue_sums.iter().chain(&view.events.broadcast_sums) {
            for &a in &sum.announcements {
                mix(a as u64);
            }
        }
        h & 1 == 1
    }
}

/// The built-in distinguishers the acceptance gate runs.
pub fn builtin_strategies() -> Vec<Box<dyn Strategy>> {
    vec![
        Box::new(AnnouncementMatcher),
        Box::new(QueueTimingMatcher),
        Box::new(OutcomeOnlyGuesser),
    ]
}
