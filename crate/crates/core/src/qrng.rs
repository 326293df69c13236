//! Measurement sampling, entropy estimation and Toeplitz hashing.
//!
//! [`pipeline_compare`] runs the two routes to uniform bits side by side:
//! measure every copy and hash the raw outcomes (path A), or distill first and
//! measure the resulting `|Psi_2>` copies (path B).
//!
//! Extracting at the Shannon rate is a demonstration choice: it is only
//! justified asymptotically for i.i.d. sources, and the single monobit test
//! is a sanity check rather than a certification.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distill::distill_simulate;
use crate::error::{Error, Result};
use crate::rng;
use crate::state::{shannon_entropy, ProbabilityVector, PureState};

/// Default gap between target entropy and extraction rate, bits/symbol.
pub const DEFAULT_MARGIN: f64 = 0.02;
/// Relative length agreement required between the two pipeline paths.
pub const LENGTH_AGREEMENT: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutcomeStream {
    symbols: Vec<u32>,
    source_dim: usize,
    seed: u64,
}

impl OutcomeStream {
    pub fn new(symbols: Vec<u32>, source_dim: usize, seed: u64) -> Result<Self> {
        if source_dim == 0 {
            return Err(Error::InvalidInput("stream dimension must be positive".into()));
        }
        if let Some(s) = symbols.iter().find(|&&s| s as usize >= source_dim) {
            return Err(Error::InvalidInput(format!("symbol {s} out of range for dimension {source_dim}")));
        }
        Ok(Self { symbols, source_dim, seed })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `dim=<d> seed=<s>` header, then one symbol per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("dim={} seed={}\n", self.source_dim, self.seed);
        for s in &self.symbols {
            writeln!(out, "{s}").expect("writing to a String");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty stream file".into()))?;
        let (mut dim, mut seed) = (None, None);
        for field in header.split_whitespace() {
            let bad = || Error::Format(format!("bad header field '{field}'"));
            let (key, value) = field.split_once('=').ok_or_else(bad)?;
            match key {
                "dim" => dim = Some(value.parse::<usize>().map_err(|_| bad())?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        let (Some(dim), Some(seed)) = (dim, seed) else {
            return Err(Error::Format("header needs dim and seed".into()));
        };
        let symbols = lines
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| l.trim().parse::<u32>().map_err(|_| Error::Format(format!("line {}: '{l}'", i + 2))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols, dim, seed)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    fn require_binary(&self) -> Result<()> {
        if self.source_dim != 2 {
            return Err(Error::InvalidInput(format!("expected a binary stream, got dimension {}", self.source_dim)));
        }
        Ok(())
    }
}

/// `n` i.i.d. draws from `p` by inverse CDF.
pub fn sample_distribution(p: &ProbabilityVector, n: usize, seed: u64) -> OutcomeStream {
    let cdf: Vec<f64> = p
        .as_slice()
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    // Rounding mass past the last cumulative value belongs to the last
    // outcome that actually has probability.
    let top = p.as_slice().iter().rposition(|&x| x > 0.0).unwrap_or(0);
    let mut rng = rng::seeded(seed);
    let symbols = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            cdf.partition_point(|&c| c <= u).min(top) as u32
        })
        .collect();
    OutcomeStream { symbols, source_dim: p.len(), seed }
}

/// Computational-basis measurement of `n` copies of `psi`.
pub fn sample_measurement(psi: &PureState, n: usize, seed: u64) -> OutcomeStream {
    sample_distribution(&psi.probabilities(), n, seed)
}

fn frequencies(stream: &OutcomeStream) -> Vec<f64> {
    let mut counts = vec![0usize; stream.source_dim];
    for &s in &stream.symbols {
        counts[s as usize] += 1;
    }
    counts.iter().map(|&c| c as f64 / stream.len() as f64).collect()
}

/// Plug-in Shannon entropy of the symbol frequencies.
pub fn empirical_entropy(stream: &OutcomeStream) -> Result<f64> {
    if stream.is_empty() {
        return Err(Error::InvalidInput("entropy of an empty stream".into()));
    }
    Ok(shannon_entropy(&ProbabilityVector::from_unchecked(frequencies(stream))))
}

/// Frequency-test statistic `(#1 - #0) / sqrt(n)`; zero for an empty stream.
pub fn monobit_z(bits: &OutcomeStream) -> Result<f64> {
    bits.require_binary()?;
    let n = bits.len();
    if n == 0 {
        return Ok(0.0);
    }
    let ones = bits.symbols.iter().filter(|&&b| b == 1).count();
    Ok((2.0 * ones as f64 - n as f64) / (n as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractionReport {
    pub input_length: usize,
    pub output_length: usize,
    pub target_rate: f64,
    pub monobit_z: f64,
}

fn pack(bits: impl Iterator<Item = bool>, len: usize) -> Vec<u64> {
    let mut words = vec![0u64; len.div_ceil(64) + 1];
    for (i, b) in bits.enumerate() {
        if b {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// Multiplies `bits` by a seeded `out x in` Toeplitz matrix over GF(2), with
/// `out = floor(in * rate)`.
///
/// The matrix is `T[i][j] = t[i + in - 1 - j]` for a seeded bit string `t` of
/// length `out + in - 1`. Row `i` is then the window `t[i..i + in]` against
/// the reversed input, which is evaluated on packed words.
pub fn toeplitz_extract(bits: &OutcomeStream, rate: f64, seed: u64) -> Result<(OutcomeStream, ExtractionReport)> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::RateOutOfRange(rate));
    }
    bits.require_binary()?;
    let n_in = bits.len();
    let n_out = (n_in as f64 * rate).floor() as usize;
    let output = if n_out == 0 {
        Vec::new()
    } else {
        let mut rng = rng::seeded(seed);
        let t_len = n_out + n_in - 1;
        let t = pack((0..t_len).map(|_| rng.random::<bool>()), t_len);
        let y = pack(bits.symbols.iter().rev().map(|&b| b == 1), n_in);
        let words = n_in.div_ceil(64);
        let tail_mask = match n_in % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        };
        (0..n_out)
            .into_par_iter()
            .map(|i| {
                let (q, s) = (i / 64, i % 64);
                let mut parity = 0u32;
                for w in 0..words {
                    let lo = t[q + w] >> s;
                    let hi = if s == 0 { 0 } else { t.get(q + w + 1).map_or(0, |x| x << (64 - s)) };
                    let mut window = lo | hi;
                    if w + 1 == words {
                        window &= tail_mask;
                    }
                    parity ^= (window & y[w]).count_ones() & 1;
                }
                parity
            })
            .collect()
    };
    let out = OutcomeStream { symbols: output, source_dim: 2, seed };
    let report = ExtractionReport {
        input_length: n_in,
        output_length: out.len(),
        target_rate: rate,
        monobit_z: monobit_z(&out)?,
    };
    Ok((out, report))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyKind {
    #[default]
    Shannon,
    /// `-log2 max_i p_i`, a stricter rate.
    Min,
}

impl std::str::FromStr for EntropyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shannon" => Ok(Self::Shannon),
            "min" => Ok(Self::Min),
            _ => Err(Error::InvalidConfig(format!("unknown entropy kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub n_groups: usize,
    pub group_n: usize,
    pub seed: u64,
    pub entropy_kind: EntropyKind,
    /// Per-symbol entropy of the measured source.
    pub target_entropy: f64,
    /// Path A extraction rate, `target_entropy - margin`.
    pub extraction_rate: f64,
    pub path_a_bits: usize,
    pub path_b_bits: usize,
    pub path_a_monobit_z: f64,
    pub path_b_monobit_z: f64,
    /// `|a - b| / max(a, b)`, zero when both are empty.
    pub relative_gap: f64,
    pub lengths_agree: bool,
}

/// Path A: measure `n_groups * group_n` copies and hash at
/// `target_entropy - margin`. Path B: distill in groups of `group_n`, then
/// measure the `r` resulting `|Psi_2>` copies.
pub fn pipeline_compare(
    psi: &PureState,
    n_groups: usize,
    group_n: usize,
    seed: u64,
    margin: f64,
    kind: EntropyKind,
) -> Result<PipelineReport> {
    if psi.dim() != 2 {
        return Err(Error::DimensionNot2(psi.dim()));
    }
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::InvalidConfig(format!("margin {margin} outside [0, 1)")));
    }
    let p = psi.probabilities();
    let target_entropy = match kind {
        EntropyKind::Shannon => shannon_entropy(&p),
        EntropyKind::Min => p.min_entropy(),
    };
    let extraction_rate = (target_entropy - margin).min(1.0);

    let raw = sample_measurement(psi, n_groups * group_n, rng::substream(seed, 0).random());
    let (path_a_bits, path_a_monobit_z) = if extraction_rate > 0.0 {
        let (_, report) = toeplitz_extract(&raw, extraction_rate, rng::substream(seed, 1).random())?;
        (report.output_length, report.monobit_z)
    } else {
        (0, 0.0)
    };

    let distilled = distill_simulate(psi, group_n, n_groups, rng::substream(seed, 2).random())?;
    let path_b = sample_measurement(&PureState::maximally_coherent(2), distilled.r as usize, rng::substream(seed, 3).random());
    let path_b_bits = path_b.len();
    let path_b_monobit_z = monobit_z(&path_b)?;

    let largest = path_a_bits.max(path_b_bits) as f64;
    let relative_gap = if largest == 0.0 { 0.0 } else { path_a_bits.abs_diff(path_b_bits) as f64 / largest };
    Ok(PipelineReport {
        n_groups,
        group_n,
        seed,
        entropy_kind: kind,
        target_entropy,
        extraction_rate,
        path_a_bits,
        path_b_bits,
        path_a_monobit_z,
        path_b_monobit_z,
        relative_gap,
        lengths_agree: relative_gap <= LENGTH_AGREEMENT,
    })
}
