//! Seeded Monte Carlo runs of the non-interactive protocol.
//!
//! Trials are split into shards of [`SHARD_SIZE`]. Shard `s` draws from a
//! ChaCha8 stream seeded with `seed` and stream number `s`, so every draw is
//! fixed by `(seed, shard, position)` regardless of how shards are scheduled.
//! Each trial takes one 64-bit word for the inputs (bit 0 is `x0`, bit 1 is
//! `x1`, bit 2 is `c`, bit 3 is the sender's guess) and one uniform
//! `(word >> 11) · 2⁻⁵³` for the measurement outcome.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discrimination::{helstrom_binary, srm_povm, Povm};
use crate::error::{Error, Result};
use crate::states::{bits_of, build_states, index_of, pair_mixtures, BitChoice, OverlapPair};

pub const SHARD_SIZE: u64 = 65_536;

/// Outcome probabilities below this are treated as exactly zero.
pub const PROB_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMode {
    Honest,
    CheatReceiver,
    CheatSender,
}

impl SimMode {
    pub fn name(self) -> &'static str {
        match self {
            SimMode::Honest => "honest",
            SimMode::CheatReceiver => "cheat-receiver",
            SimMode::CheatSender => "cheat-sender",
        }
    }
}

impl std::str::FromStr for SimMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "honest" => Ok(SimMode::Honest),
            "cheat-receiver" => Ok(SimMode::CheatReceiver),
            "cheat-sender" => Ok(SimMode::CheatSender),
            other => Err(format!(
                "unknown mode '{other}' (expected honest, cheat-receiver or cheat-sender)"
            )),
        }
    }
}

/// What the measuring or guessing party reported in one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// Honest receiver's value for the selected bit.
    Bit(u8),
    /// Cheating receiver's guess of both bits.
    Pair(u8, u8),
    /// The square-root measurement's null element fired.
    Inconclusive,
    /// Cheating sender's guess of `c`.
    ChoiceGuess(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialRecord {
    pub alice_bits: (u8, u8),
    pub bob_choice: u8,
    pub outcome: Outcome,
    pub correct: bool,
}

/// A Monte Carlo estimate of a probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub estimate: f64,
    /// `√(estimate (1 − estimate) / n_trials)`.
    pub std_error: f64,
    pub n_trials: u64,
    pub seed: u64,
    pub hits: u64,
}

impl SimEstimate {
    pub fn from_counts(hits: u64, n_trials: u64, seed: u64) -> Self {
        let estimate = if n_trials == 0 {
            0.0
        } else {
            hits as f64 / n_trials as f64
        };
        let std_error = if n_trials == 0 {
            0.0
        } else {
            (estimate * (1.0 - estimate) / n_trials as f64).sqrt()
        };
        SimEstimate {
            estimate,
            std_error,
            n_trials,
            seed,
            hits,
        }
    }

    /// `|estimate − target|` in units of the standard error. Zero error with an
    /// exact match gives 0, zero error with a mismatch gives infinity.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.estimate - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Honest-run results: overall failure rate and the rate for each bit choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HonestEstimate {
    pub p_f: SimEstimate,
    pub p_f0: SimEstimate,
    pub p_f1: SimEstimate,
}

/// Sender-cheating results and the transcript-independence check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenderEstimate {
    pub p_s: SimEstimate,
    /// Trials where the sender's view differed between the `c = 0` and `c = 1`
    /// branches. Always zero for the non-interactive protocol.
    pub transcript_mismatches: u64,
}

/// Born probabilities of a POVM on each family state, floored and renormalized.
#[derive(Debug, Clone)]
struct OutcomeTable {
    probs: [Vec<f64>; 4],
}

impl OutcomeTable {
    fn new(ov: &OverlapPair, povm: &Povm) -> Self {
        let fam = build_states(ov);
        OutcomeTable {
            probs: std::array::from_fn(|k| {
                clean_probabilities(&povm.probabilities_pure(fam.state(k)))
            }),
        }
    }
}

fn clean_probabilities(raw: &[f64]) -> Vec<f64> {
    let floored: Vec<f64> = raw
        .iter()
        .map(|&p| if p < PROB_FLOOR { 0.0 } else { p })
        .collect();
    let total: f64 = floored.iter().sum();
    floored.iter().map(|p| p / total).collect()
}

/// Inverse-CDF draw over `probs` in element order.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last = i;
        if u < cum {
            return i;
        }
    }
    last
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

fn shard_count(n: u64) -> u64 {
    n.div_ceil(SHARD_SIZE)
}

fn shard_len(n: u64, shard: u64) -> u64 {
    (n - shard * SHARD_SIZE).min(SHARD_SIZE)
}

/// Bytes the sender holds at the end of a trial: her bits and the index of
/// the state she sent. Nothing travels back from the receiver.
fn sender_view(x0: u8, x1: u8, received: &[u8]) -> Vec<u8> {
    let mut view = vec![x0, x1, index_of(x0, x1) as u8];
    view.extend_from_slice(received);
    view
}

/// One run of the protocol with receiver choice `c`: the sender's view, and
/// the honest receiver's bit.
fn protocol_round(tables: &[OutcomeTable; 2], x0: u8, x1: u8, c: u8, u: f64) -> (Vec<u8>, u8) {
    let k = index_of(x0, x1);
    let bit = sample_index(&tables[c as usize].probs[k], u) as u8;
    // the receiver sends no message
    (sender_view(x0, x1, &[]), bit)
}

struct Context {
    mode: SimMode,
    helstrom: Option<[OutcomeTable; 2]>,
    srm: Option<OutcomeTable>,
}

impl Context {
    fn new(ov: &OverlapPair, mode: SimMode) -> Self {
        let (helstrom, srm) = match mode {
            SimMode::Honest | SimMode::CheatSender => {
                let fam = build_states(ov);
                let table = |choice| {
                    let (r0, r1) = pair_mixtures(&fam, choice);
                    let d = helstrom_binary(&r0, 0.5, &r1, 0.5).expect("bit mixtures are valid");
                    OutcomeTable::new(ov, &d.povm)
                };
                (
                    Some([table(BitChoice::First), table(BitChoice::Second)]),
                    None,
                )
            }
            SimMode::CheatReceiver => (
                None,
                Some(OutcomeTable::new(ov, &srm_povm(&build_states(ov)))),
            ),
        };
        Context {
            mode,
            helstrom,
            srm,
        }
    }

    /// Runs one trial; the second value is the transcript check for sender mode.
    fn trial(&self, rng: &mut ChaCha8Rng) -> (TrialRecord, bool) {
        let w = rng.next_u64();
        let (x0, x1, c) = ((w & 1) as u8, ((w >> 1) & 1) as u8, ((w >> 2) & 1) as u8);
        let u = uniform(rng);
        match self.mode {
            SimMode::Honest => {
                let tables = self.helstrom.as_ref().expect("honest tables");
                let (_, bit) = protocol_round(tables, x0, x1, c, u);
                let truth = BitChoice::from_bit(c).select((x0, x1));
                let rec = TrialRecord {
                    alice_bits: (x0, x1),
                    bob_choice: c,
                    outcome: Outcome::Bit(bit),
                    correct: bit == truth,
                };
                (rec, true)
            }
            SimMode::CheatReceiver => {
                let table = self.srm.as_ref().expect("srm table");
                let k = index_of(x0, x1);
                let idx = sample_index(&table.probs[k], u);
                let outcome = if idx < 4 {
                    let (g0, g1) = bits_of(idx);
                    Outcome::Pair(g0, g1)
                } else {
                    Outcome::Inconclusive
                };
                let rec = TrialRecord {
                    alice_bits: (x0, x1),
                    bob_choice: c,
                    outcome,
                    correct: idx == k,
                };
                (rec, true)
            }
            SimMode::CheatSender => {
                let tables = self.helstrom.as_ref().expect("honest tables");
                let (view0, _) = protocol_round(tables, x0, x1, 0, u);
                let (view1, _) = protocol_round(tables, x0, x1, 1, u);
                let view = if c == 0 { &view0 } else { &view1 };
                let guess = alice_guess(view, ((w >> 3) & 1) as u8);
                let rec = TrialRecord {
                    alice_bits: (x0, x1),
                    bob_choice: c,
                    outcome: Outcome::ChoiceGuess(guess),
                    correct: guess == c,
                };
                (rec, view0 == view1)
            }
        }
    }
}

/// The sender's best guess of `c`: her view carries no information about it,
/// so she flips her own coin.
fn alice_guess(_view: &[u8], coin: u8) -> u8 {
    coin
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    hits: u64,
    trials_c: [u64; 2],
    hits_c: [u64; 2],
    mismatches: u64,
}

impl Tally {
    fn add(mut self, o: Tally) -> Tally {
        self.hits += o.hits;
        for c in 0..2 {
            self.trials_c[c] += o.trials_c[c];
            self.hits_c[c] += o.hits_c[c];
        }
        self.mismatches += o.mismatches;
        self
    }
}

fn run(ov: &OverlapPair, mode: SimMode, n: u64, seed: u64, count_failures: bool) -> Result<Tally> {
    if n == 0 {
        return Err(Error::NoTrials);
    }
    let ctx = Context::new(ov, mode);
    let tally = (0..shard_count(n))
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(seed, s);
            let mut t = Tally::default();
            for _ in 0..shard_len(n, s) {
                let (rec, same_view) = ctx.trial(&mut rng);
                let hit = rec.correct != count_failures;
                let c = rec.bob_choice as usize;
                t.trials_c[c] += 1;
                if hit {
                    t.hits += 1;
                    t.hits_c[c] += 1;
                }
                if !same_view {
                    t.mismatches += 1;
                }
            }
            t
        })
        .reduce(Tally::default, Tally::add);
    Ok(tally)
}

/// Honest receiver: estimates `p_f` overall and for each bit choice.
pub fn run_honest(ov: &OverlapPair, n: u64, seed: u64) -> Result<HonestEstimate> {
    let t = run(ov, SimMode::Honest, n, seed, true)?;
    Ok(HonestEstimate {
        p_f: SimEstimate::from_counts(t.hits, n, seed),
        p_f0: SimEstimate::from_counts(t.hits_c[0], t.trials_c[0], seed),
        p_f1: SimEstimate::from_counts(t.hits_c[1], t.trials_c[1], seed),
    })
}

/// Cheating receiver using the square-root measurement: estimates `p_r`.
pub fn run_cheating_receiver(ov: &OverlapPair, n: u64, seed: u64) -> Result<SimEstimate> {
    let t = run(ov, SimMode::CheatReceiver, n, seed, false)?;
    Ok(SimEstimate::from_counts(t.hits, n, seed))
}

/// Cheating sender guessing `c` from her own view: estimates `p_s`.
pub fn run_cheating_sender(ov: &OverlapPair, n: u64, seed: u64) -> Result<SenderEstimate> {
    let t = run(ov, SimMode::CheatSender, n, seed, false)?;
    Ok(SenderEstimate {
        p_s: SimEstimate::from_counts(t.hits, n, seed),
        transcript_mismatches: t.mismatches,
    })
}

/// The full trial stream, in trial order.
pub fn trial_records(
    ov: &OverlapPair,
    mode: SimMode,
    n: u64,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    if n == 0 {
        return Err(Error::NoTrials);
    }
    let ctx = Context::new(ov, mode);
    let shards: Vec<Vec<TrialRecord>> = (0..shard_count(n))
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(seed, s);
            (0..shard_len(n, s))
                .map(|_| ctx.trial(&mut rng).0)
                .collect()
        })
        .collect();
    Ok(shards.into_iter().flatten().collect())
}

/// Outcome counts from `n` inverse-CDF draws over `probs`, using the same
/// sharded stream layout as the protocol runs.
pub fn sample_counts(probs: &[f64], n: u64, seed: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::NoTrials);
    }
    let probs = clean_probabilities(probs);
    let counts = (0..shard_count(n))
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(seed, s);
            let mut c = vec![0u64; probs.len()];
            for _ in 0..shard_len(n, s) {
                c[sample_index(&probs, uniform(&mut rng))] += 1;
            }
            c
        })
        .reduce(
            || vec![0u64; probs.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}
