use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::landscape::Landscape;
use super::sampleset::{Sample, SampleSet};
use crate::error::{Error, Result};

pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 24;

/// Energies within this of the minimum count as ground-state ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spectrum {
    /// Every assignment.
    Full,
    /// All ground states only.
    Ground,
    /// The `n` lowest assignments plus any ground-state ties beyond them.
    Lowest(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceOptions {
    pub limit: usize,
    pub spectrum: Spectrum,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            limit: DEFAULT_BRUTE_FORCE_LIMIT,
            spectrum: Spectrum::Ground,
        }
    }
}

#[derive(PartialEq)]
struct Ranked(f64, u64);

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

fn decode(code: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| code >> i & 1 == 1).collect()
}

/// Exhaustive enumeration in Gray-code order with incremental energies.
/// Returned energies are recomputed exactly; samples are sorted by energy,
/// then by bitstring.
pub fn brute_force(model: &impl Landscape, options: &BruteForceOptions) -> Result<SampleSet> {
    let n = model.num_vars();
    if n > options.limit || n >= 64 {
        return Err(Error::LimitExceeded {
            num_vars: n,
            limit: options.limit.min(63),
        });
    }
    let poly = model.compile();
    let mut bits = vec![false; n];
    let mut energy = poly.energy(&bits);
    let total: u64 = 1 << n;

    // Ground candidates use a loose margin so accumulated rounding cannot hide a tie.
    let margin = 1e-6;
    let mut min_seen = energy;
    let mut ground: Vec<u64> = vec![0];
    let mut all: Vec<Ranked> = Vec::new();
    let mut lowest: BinaryHeap<Ranked> = BinaryHeap::new();
    let keep =
        |code: u64, e: f64, all: &mut Vec<Ranked>, lowest: &mut BinaryHeap<Ranked>| match options
            .spectrum
        {
            Spectrum::Full => all.push(Ranked(e, code)),
            Spectrum::Ground => {}
            Spectrum::Lowest(k) => {
                lowest.push(Ranked(e, code));
                if lowest.len() > k {
                    lowest.pop();
                }
            }
        };
    keep(0, energy, &mut all, &mut lowest);

    let mut code: u64 = 0;
    for step in 1..total {
        let v = step.trailing_zeros() as usize;
        energy += poly.flip_delta(&bits, v);
        bits[v] = !bits[v];
        code ^= 1 << v;
        if energy < min_seen - margin {
            ground.retain(|_| false);
        }
        if energy <= min_seen + margin {
            ground.push(code);
        }
        min_seen = min_seen.min(energy);
        keep(code, energy, &mut all, &mut lowest);
    }

    let exact = |code: u64| poly.energy(&decode(code, n));
    let ground_exact: Vec<(f64, u64)> = ground.iter().map(|&c| (exact(c), c)).collect();
    let e_min = ground_exact
        .iter()
        .map(|g| g.0)
        .fold(f64::INFINITY, f64::min);
    let mut chosen: Vec<(f64, u64)> = match options.spectrum {
        Spectrum::Full => all.into_iter().map(|r| (exact(r.1), r.1)).collect(),
        Spectrum::Ground => Vec::new(),
        Spectrum::Lowest(_) => lowest.into_iter().map(|r| (exact(r.1), r.1)).collect(),
    };
    for g in ground_exact {
        if g.0 <= e_min + TIE_TOLERANCE && !chosen.iter().any(|c| c.1 == g.1) {
            chosen.push(g);
        }
    }
    let mut samples: Vec<Sample> = chosen
        .into_iter()
        .map(|(e, c)| Sample {
            bits: decode(c, n),
            energy: e,
            multiplicity: 1,
        })
        .collect();
    samples.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then_with(|| a.bits.cmp(&b.bits))
    });
    Ok(SampleSet::new("brute-force", samples))
}

/// Ground-state energy by exhaustive search.
pub fn ground_energy(model: &impl Landscape, limit: usize) -> Result<f64> {
    let set = brute_force(
        model,
        &BruteForceOptions {
            limit,
            spectrum: Spectrum::Ground,
        },
    )?;
    Ok(set.min_energy().expect("at least one assignment"))
}
