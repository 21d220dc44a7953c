//! Encoding over `L` parallel prefix-erasure channels.
//!
//! The information vector `u` is sent as `x_l = A_l u` on channel `l`. Each
//! channel delivers a prefix of `k_l` symbols and erases the rest. Decoding
//! solves the stacked system built from the surviving prefixes; for UDMs it
//! succeeds whenever `sum k_l >= n`.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::gf::{Elem, Field};
use crate::linalg::{stack_prefixes, FieldVector, LinalgError};
use crate::udm::{enumerate_exact_tuples, ErasureTuple, UdmFamily};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("insufficient symbols: received {received}, need {needed}")]
    InsufficientSymbols { received: usize, needed: usize },
    #[error("received symbols do not determine the information vector (rank {rank} < {needed})")]
    RankDeficient { rank: usize, needed: usize },
    #[error("received symbols are inconsistent (stacked row {row})")]
    Inconsistent { row: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed observation: {0}")]
    Parse(String),
    #[error(transparent)]
    Linalg(LinalgError),
}

impl From<LinalgError> for CodecError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::RankDeficient { rank, needed } => {
                CodecError::RankDeficient { rank, needed }
            }
            LinalgError::Inconsistent { row } => CodecError::Inconsistent { row },
            LinalgError::DimensionMismatch(msg) => CodecError::DimensionMismatch(msg),
            other => CodecError::Linalg(other),
        }
    }
}

/// What one channel delivered: its first `symbols.len()` symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelObservation {
    pub symbols: Vec<Elem>,
}

impl ChannelObservation {
    pub fn k(&self) -> usize {
        self.symbols.len()
    }
}

/// Surviving prefixes of all `L` channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelOutput {
    pub channels: Vec<ChannelObservation>,
}

impl ChannelOutput {
    pub fn tuple(&self) -> Vec<usize> {
        self.channels.iter().map(ChannelObservation::k).collect()
    }

    pub fn weight(&self) -> usize {
        self.channels.iter().map(ChannelObservation::k).sum()
    }

    /// One line per channel: `k=<k>: s0 s1 ... s_{k-1}`.
    pub fn render(&self) -> String {
        self.channels
            .iter()
            .map(|c| {
                let mut line = format!("k={}:", c.k());
                for s in &c.symbols {
                    line.push(' ');
                    line.push_str(&s.to_string());
                }
                line.push('\n');
                line
            })
            .collect()
    }

    /// Like [`render`](Self::render) with each erased position shown as `?`,
    /// padding every channel to length `n`. [`parse`](Self::parse) accepts
    /// both forms.
    pub fn render_with_erasures(&self, n: usize) -> String {
        self.channels
            .iter()
            .map(|c| {
                let mut line = format!("k={}:", c.k());
                for s in &c.symbols {
                    line.push(' ');
                    line.push_str(&s.to_string());
                }
                for _ in c.k()..n {
                    line.push_str(" ?");
                }
                line.push('\n');
                line
            })
            .collect()
    }

    pub fn parse(text: &str, field: &Field) -> Result<ChannelOutput, CodecError> {
        let mut channels = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| CodecError::Parse(format!("line {}: {what}", lineno + 1));
            let (head, rest) = line
                .split_once(':')
                .ok_or_else(|| bad("expected `k=<int>:`"))?;
            let k: usize = head
                .trim()
                .strip_prefix("k=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad("expected `k=<int>`"))?;
            let mut symbols = Vec::with_capacity(k);
            let mut erased = false;
            for tok in rest.split_whitespace() {
                if tok == "?" {
                    erased = true;
                    continue;
                }
                if erased {
                    return Err(bad("symbol after an erasure"));
                }
                let v: u64 = tok
                    .parse()
                    .map_err(|_| bad(&format!("bad symbol {tok:?}")))?;
                symbols.push(field.element(v).map_err(|e| bad(&e.to_string()))?);
            }
            if symbols.len() != k {
                return Err(bad(&format!("k={k} but {} symbols", symbols.len())));
            }
            channels.push(ChannelObservation { symbols });
        }
        Ok(ChannelOutput { channels })
    }
}

impl fmt::Display for ChannelOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `x_l = A_l u` for every channel.
pub fn encode(family: &UdmFamily, u: &FieldVector) -> Result<Vec<FieldVector>, CodecError> {
    if u.len() != family.block_len() {
        return Err(CodecError::DimensionMismatch(format!(
            "information vector has length {}, expected {}",
            u.len(),
            family.block_len()
        )));
    }
    Ok(family
        .matrices()
        .iter()
        .map(|a| a.matvec(u))
        .collect::<Result<Vec<_>, _>>()?)
}

/// Keeps the first `k_l` symbols of each `x_l`.
pub fn erase(x: &[FieldVector], k: &ErasureTuple) -> Result<ChannelOutput, CodecError> {
    if x.len() != k.len() {
        return Err(CodecError::DimensionMismatch(format!(
            "{} channels but a tuple of length {}",
            x.len(),
            k.len()
        )));
    }
    let channels = x
        .iter()
        .zip(k.as_slice())
        .map(|(xl, &kl)| {
            if kl > xl.len() {
                return Err(CodecError::DimensionMismatch(format!(
                    "prefix {kl} longer than channel block {}",
                    xl.len()
                )));
            }
            Ok(ChannelObservation {
                symbols: xl.as_slice()[..kl].to_vec(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChannelOutput { channels })
}

/// Recovers `u` from the surviving prefixes.
pub fn decode(family: &UdmFamily, obs: &ChannelOutput) -> Result<FieldVector, CodecError> {
    let n = family.block_len();
    if obs.channels.len() != family.num_channels() {
        return Err(CodecError::DimensionMismatch(format!(
            "{} observed channels, family has {}",
            obs.channels.len(),
            family.num_channels()
        )));
    }
    let ks = obs.tuple();
    if let Some(&k) = ks.iter().find(|&&k| k > n) {
        return Err(CodecError::DimensionMismatch(format!(
            "prefix {k} longer than n = {n}"
        )));
    }
    let received = obs.weight();
    if received < n {
        return Err(CodecError::InsufficientSymbols {
            received,
            needed: n,
        });
    }
    let stacked = stack_prefixes(family.matrices(), &ks)?;
    let y = FieldVector::new(
        family.field(),
        obs.channels
            .iter()
            .flat_map(|c| c.symbols.iter().copied())
            .collect(),
    )?;
    Ok(stacked.solve(&y)?)
}

/// How erasure tuples are drawn in [`simulate`].
#[derive(Clone, Debug, PartialEq)]
pub enum PatternSource {
    /// Each `k_l` uniform on `[0, n]`, independently.
    UniformBox,
    /// Uniform over tuples with `sum k_l = n`.
    UniformExact,
    /// Each symbol is erased with probability `erasure_prob`; channel `l`
    /// delivers everything before its first erasure.
    TruncatedGeometric { erasure_prob: f64 },
    /// The same tuple every trial.
    Fixed(Vec<usize>),
}

impl PatternSource {
    fn draw(&self, rng: &mut ChaCha8Rng, channels: usize, n: usize) -> Vec<usize> {
        match self {
            PatternSource::UniformBox => (0..channels).map(|_| rng.random_range(0..=n)).collect(),
            PatternSource::UniformExact => {
                // Stars and bars: L-1 bar positions among n+L-1 slots.
                let slots = n + channels - 1;
                let mut bars = sample(rng, slots, channels - 1).into_vec();
                bars.sort_unstable();
                let mut ks = Vec::with_capacity(channels);
                let mut prev = 0;
                for b in bars {
                    ks.push(b - prev);
                    prev = b + 1;
                }
                ks.push(slots - prev);
                ks
            }
            PatternSource::TruncatedGeometric { erasure_prob } => (0..channels)
                .map(|_| {
                    (0..n)
                        .take_while(|_| !rng.random_bool(*erasure_prob))
                        .count()
                })
                .collect(),
            PatternSource::Fixed(ks) => ks.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimulationStats {
    pub trials: u64,
    pub successes: u64,
    pub failures_insufficient: u64,
    /// Failures with enough symbols; only possible for non-UDM families.
    pub failures_rank: u64,
    /// Successful decodes that returned a wrong vector. Always zero unless
    /// the linear algebra is broken.
    pub wrong_decodes: u64,
    /// Sum over trials of `sum k_l`.
    pub total_weight: u64,
    /// Trials per tuple weight `sum k_l`.
    pub weight_histogram: BTreeMap<usize, u64>,
}

impl SimulationStats {
    pub fn mean_weight(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.total_weight as f64 / self.trials as f64
        }
    }

    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }

    fn merge(mut self, other: SimulationStats) -> SimulationStats {
        self.trials += other.trials;
        self.successes += other.successes;
        self.failures_insufficient += other.failures_insufficient;
        self.failures_rank += other.failures_rank;
        self.wrong_decodes += other.wrong_decodes;
        self.total_weight += other.total_weight;
        for (w, c) in other.weight_histogram {
            *self.weight_histogram.entry(w).or_default() += c;
        }
        self
    }
}

/// Runs `trials` independent encode/erase/decode rounds with random `u`.
///
/// Trial `t` draws from its own ChaCha stream `t` under `seed`, so the
/// result does not depend on how trials are scheduled across threads.
pub fn simulate(
    family: &UdmFamily,
    trials: u64,
    source: &PatternSource,
    seed: u64,
) -> Result<SimulationStats, CodecError> {
    let (channels, n) = (family.num_channels(), family.block_len());
    if let PatternSource::Fixed(ks) = source {
        ErasureTuple::new(ks.clone(), n)
            .map_err(|e| CodecError::DimensionMismatch(e.to_string()))?;
        if ks.len() != channels {
            return Err(CodecError::DimensionMismatch(format!(
                "fixed tuple of length {} for {channels} channels",
                ks.len()
            )));
        }
    }
    if let PatternSource::TruncatedGeometric { erasure_prob } = source {
        if !(0.0..=1.0).contains(erasure_prob) {
            return Err(CodecError::DimensionMismatch(format!(
                "erasure probability {erasure_prob} outside [0, 1]"
            )));
        }
    }
    let q = family.field().order();
    let run = |trial: u64| -> SimulationStats {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let u: Vec<Elem> = (0..n)
            .map(|_| {
                family
                    .field()
                    .element(rng.random_range(0..q) as u64)
                    .expect("below q")
            })
            .collect();
        let u = FieldVector::new(family.field(), u).expect("valid elements");
        let ks = source.draw(&mut rng, channels, n);
        let weight = ks.iter().sum::<usize>();
        let mut stats = SimulationStats {
            trials: 1,
            total_weight: weight as u64,
            ..Default::default()
        };
        stats.weight_histogram.insert(weight, 1);
        let k = ErasureTuple::new(ks, n).expect("drawn tuples are in range");
        let x = encode(family, &u).expect("u has length n");
        let obs = erase(&x, &k).expect("tuple matches the family");
        match decode(family, &obs) {
            Ok(decoded) if decoded == u => stats.successes = 1,
            Ok(_) => stats.wrong_decodes = 1,
            Err(CodecError::InsufficientSymbols { .. }) => stats.failures_insufficient = 1,
            Err(_) => stats.failures_rank = 1,
        }
        stats
    };
    Ok((0..trials)
        .into_par_iter()
        .map(run)
        .reduce(SimulationStats::default, SimulationStats::merge))
}

/// Every `u` in GF(q)^n against every tuple in `K^{=n}_L`; returns the
/// number of round trips checked, or the first failing `(u, k)`.
pub fn exhaustive_round_trip(
    family: &UdmFamily,
) -> Result<u64, (Vec<u32>, ErasureTuple, CodecError)> {
    let (channels, n) = (family.num_channels(), family.block_len());
    let f = family.field();
    let q = f.order() as u64;
    let total = q.pow(n as u32);
    let tuples: Vec<ErasureTuple> = enumerate_exact_tuples(channels, n).collect();
    let mut checked = 0;
    for idx in 0..total {
        let mut x = idx;
        let values: Vec<u32> = (0..n)
            .map(|_| {
                let v = (x % q) as u32;
                x /= q;
                v
            })
            .collect();
        let u = FieldVector::from_values(f, &values).expect("digits below q");
        let coded = encode(family, &u).expect("u has length n");
        for k in &tuples {
            let obs = erase(&coded, k).expect("tuple matches the family");
            match decode(family, &obs) {
                Ok(d) if d == u => checked += 1,
                Ok(d) => {
                    let msg = format!("decoded {:?}", d.values());
                    return Err((values, k.clone(), CodecError::Parse(msg)));
                }
                Err(e) => return Err((values, k.clone(), e)),
            }
        }
    }
    Ok(checked)
}
