//! Low-energy ensemble analysis: quantile cut, inclusion frequencies, and
//! selection of stable reasons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{bitstring, Sample, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    #[default]
    Threshold,
    GroundState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityParams {
    pub low_energy_quantile: f64,
    pub tau: f64,
    pub mode: SelectionMode,
}

impl Default for StabilityParams {
    fn default() -> Self {
        Self {
            low_energy_quantile: 0.25,
            tau: 0.5,
            mode: SelectionMode::Threshold,
        }
    }
}

impl StabilityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.low_energy_quantile > 0.0 && self.low_energy_quantile <= 1.0) {
            return Err(Error::Config(format!(
                "low_energy_quantile must be in (0, 1], got {}",
                self.low_energy_quantile
            )));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!(
                "tau must be in [0, 1], got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub mode: SelectionMode,
    pub tau: f64,
    pub low_energy_quantile: f64,
    pub frequencies: Vec<f64>,
    pub threshold_energy: f64,
    /// Distinct samples in the low-energy subset.
    pub subset_size: usize,
    /// Multiplicity-weighted size of the low-energy subset.
    pub subset_weight: u64,
    pub threshold_selection: Vec<usize>,
    pub ground_state_selection: Vec<usize>,
    /// The reasons actually used, per mode (after any fallback).
    pub selected: Vec<usize>,
    #[serde(with = "bitstring")]
    pub ground_state: Vec<bool>,
    pub ground_energy: f64,
    pub warnings: Vec<String>,
}

/// Nearest-rank quantile over the multiplicity-weighted energies: the
/// threshold is the energy of the `ceil(q * W)`-th lightest unit of weight.
/// Every sample at or below it is returned, in input order.
pub fn low_energy_subset(samples: &SampleSet, quantile: f64) -> Result<(SampleSet, f64)> {
    if samples.is_empty() || samples.total_weight() == 0 {
        return Err(Error::Input("sample set is empty".into()));
    }
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(Error::Input(format!(
            "quantile must be in (0, 1], got {quantile}"
        )));
    }
    let total = samples.total_weight();
    let rank = ((quantile * total as f64) - 1e-9).ceil().max(1.0) as u64;
    let mut order: Vec<&Sample> = samples.samples.iter().collect();
    order.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let mut cumulative = 0;
    let mut threshold = order.last().expect("nonempty").energy;
    for s in order {
        cumulative += s.multiplicity;
        if cumulative >= rank {
            threshold = s.energy;
            break;
        }
    }
    let subset = SampleSet {
        solver_id: samples.solver_id.clone(),
        metadata: samples.metadata.clone(),
        samples: samples
            .samples
            .iter()
            .filter(|s| s.energy <= threshold)
            .cloned()
            .collect(),
    };
    Ok((subset, threshold))
}

/// Multiplicity-weighted fraction of samples with each bit set.
pub fn inclusion_frequencies(subset: &SampleSet) -> Result<Vec<f64>> {
    let total = subset.total_weight();
    let first = subset
        .samples
        .first()
        .ok_or_else(|| Error::Input("subset is empty".into()))?;
    let n = first.bits.len();
    let mut counts = vec![0u64; n];
    for s in &subset.samples {
        if s.bits.len() != n {
            return Err(Error::Input("samples have differing lengths".into()));
        }
        for (c, &b) in counts.iter_mut().zip(&s.bits) {
            if b {
                *c += s.multiplicity;
            }
        }
    }
    Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Builds the report from frequencies and the ensemble's ground state.
pub fn select_stable(
    frequencies: &[f64],
    ground: &Sample,
    threshold_energy: f64,
    subset: &SampleSet,
    params: &StabilityParams,
) -> Result<StabilityReport> {
    params.validate()?;
    let threshold_selection: Vec<usize> = frequencies
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= params.tau)
        .map(|(i, _)| i)
        .collect();
    let ground_state_selection: Vec<usize> = ground
        .bits
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect();
    let mut warnings = Vec::new();
    let selected = match params.mode {
        SelectionMode::GroundState => ground_state_selection.clone(),
        SelectionMode::Threshold if threshold_selection.is_empty() => {
            warnings.push(format!(
                "no reason reached tau = {}; fell back to the ground-state selection",
                params.tau
            ));
            ground_state_selection.clone()
        }
        SelectionMode::Threshold => threshold_selection.clone(),
    };
    if selected.is_empty() {
        warnings.push("selection is empty".into());
    }
    Ok(StabilityReport {
        mode: params.mode,
        tau: params.tau,
        low_energy_quantile: params.low_energy_quantile,
        frequencies: frequencies.to_vec(),
        threshold_energy,
        subset_size: subset.len(),
        subset_weight: subset.total_weight(),
        threshold_selection,
        ground_state_selection,
        selected,
        ground_state: ground.bits.clone(),
        ground_energy: ground.energy,
        warnings,
    })
}

/// Quantile cut, frequencies, and selection in one step.
pub fn analyze(samples: &SampleSet, params: &StabilityParams) -> Result<StabilityReport> {
    params.validate()?;
    let (subset, threshold) = low_energy_subset(samples, params.low_energy_quantile)?;
    let freqs = inclusion_frequencies(&subset)?;
    let ground = samples.best().expect("nonempty after subset");
    select_stable(&freqs, ground, threshold, &subset, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(entries: &[(&str, f64, u64)]) -> SampleSet {
        SampleSet::new(
            "test",
            entries
                .iter()
                .map(|(b, e, m)| Sample {
                    bits: bitstring::parse(b).unwrap(),
                    energy: *e,
                    multiplicity: *m,
                })
                .collect(),
        )
    }

    #[test]
    fn degenerate_spectrum_returns_everything() {
        let s = set(&[("00", 1.0, 1), ("01", 1.0, 2), ("11", 1.0, 1)]);
        for q in [0.01, 0.25, 1.0] {
            assert_eq!(low_energy_subset(&s, q).unwrap().0.len(), 3);
        }
    }

    #[test]
    fn nearest_rank_examples() {
        let s = set(&[
            ("00", 0.0, 1),
            ("01", 1.0, 1),
            ("10", 2.0, 1),
            ("11", 3.0, 1),
        ]);
        let (sub, t) = low_energy_subset(&s, 0.25).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(sub.len(), 1);

        let w = set(&[("10", 10.0, 1), ("01", 0.0, 3)]);
        let (sub, t) = low_energy_subset(&w, 0.25).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(sub.total_weight(), 3);
        assert_eq!(sub.samples[0].bits, vec![false, true]);
    }

    #[test]
    fn empty_set_is_an_error() {
        assert!(low_energy_subset(&set(&[]), 0.25).is_err());
        assert!(inclusion_frequencies(&set(&[])).is_err());
    }

    #[test]
    fn frequency_examples() {
        assert_eq!(
            inclusion_frequencies(&set(&[("101", 0.0, 1)])).unwrap(),
            vec![1.0, 0.0, 1.0]
        );
        assert_eq!(
            inclusion_frequencies(&set(&[("10", 0.0, 1), ("01", 0.0, 1)])).unwrap(),
            vec![0.5, 0.5]
        );
        assert_eq!(
            inclusion_frequencies(&set(&[("11", 0.0, 1), ("10", 0.0, 4)])).unwrap(),
            vec![1.0, 0.2]
        );
    }

    #[test]
    fn selection_examples() {
        let ground = Sample {
            bits: vec![false, true],
            energy: -1.0,
            multiplicity: 1,
        };
        let sub = set(&[("01", -1.0, 1)]);
        let p = StabilityParams::default();
        let r = select_stable(&[0.9, 0.4], &ground, -1.0, &sub, &p).unwrap();
        assert_eq!(r.selected, vec![0]);
        assert_eq!(r.ground_state_selection, vec![1]);

        let all = select_stable(
            &[0.9, 0.0],
            &ground,
            -1.0,
            &sub,
            &StabilityParams { tau: 0.0, ..p },
        )
        .unwrap();
        assert_eq!(all.selected, vec![0, 1]);

        let gs = select_stable(
            &[0.9, 0.4],
            &ground,
            -1.0,
            &sub,
            &StabilityParams {
                mode: SelectionMode::GroundState,
                ..p
            },
        )
        .unwrap();
        assert_eq!(gs.selected, vec![1]);
    }

    #[test]
    fn empty_threshold_selection_falls_back() {
        let ground = Sample {
            bits: vec![true, false],
            energy: -1.0,
            multiplicity: 1,
        };
        let sub = set(&[("10", -1.0, 1)]);
        let r = select_stable(
            &[0.3, 0.2],
            &ground,
            -1.0,
            &sub,
            &StabilityParams::default(),
        )
        .unwrap();
        assert_eq!(r.selected, vec![0]);
        assert_eq!(r.warnings.len(), 1);
    }

    fn arb_set() -> impl Strategy<Value = SampleSet> {
        proptest::collection::vec(
            (
                proptest::collection::vec(any::<bool>(), 5),
                -5i32..5,
                1u64..4,
            ),
            1..30,
        )
        .prop_map(|v| {
            SampleSet::new(
                "p",
                v.into_iter()
                    .map(|(bits, e, m)| Sample {
                        bits,
                        energy: e as f64 * 0.5,
                        multiplicity: m,
                    })
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn weighting_consistency(s in arb_set(), q in 0.05f64..1.0) {
            let expanded = SampleSet::new("p", s.samples.iter().flat_map(|x| {
                (0..x.multiplicity).map(move |_| Sample { multiplicity: 1, ..x.clone() })
            }).collect());
            let (a, ta) = low_energy_subset(&s, q).unwrap();
            let (b, tb) = low_energy_subset(&expanded, q).unwrap();
            prop_assert_eq!(ta, tb);
            prop_assert_eq!(inclusion_frequencies(&a).unwrap(), inclusion_frequencies(&b).unwrap());
        }

        #[test]
        fn ground_state_is_in_subset(s in arb_set(), q in 0.01f64..1.0) {
            let (sub, _) = low_energy_subset(&s, q).unwrap();
            let g = s.best().unwrap();
            prop_assert!(sub.samples.iter().any(|x| x == g));
        }

        #[test]
        fn frequencies_are_bounded(s in arb_set()) {
            let f = inclusion_frequencies(&s).unwrap();
            prop_assert!(f.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }
}
