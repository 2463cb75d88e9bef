use serde::{Deserialize, Serialize};

use super::AnnealSchedule;

/// Bits serialize as a `0`/`1` string, index 0 leftmost.
pub mod bitstring {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn to_string(bits: &[bool]) -> String {
        bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn parse(s: &str) -> Result<Vec<bool>, String> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid character `{other}` at position {i}")),
            })
            .collect()
    }

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_string(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(with = "bitstring")]
    pub bits: Vec<bool>,
    pub energy: f64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<AnnealSchedule>,
    /// Samples came from the pair-reduced model (energies are re-scored on the original).
    #[serde(default)]
    pub reduced: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adapter_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub solver_id: String,
    pub metadata: SolverMetadata,
    pub samples: Vec<Sample>,
}

impl SampleSet {
    pub fn new(solver_id: impl Into<String>, samples: Vec<Sample>) -> Self {
        Self {
            solver_id: solver_id.into(),
            metadata: SolverMetadata::default(),
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.samples.iter().map(|s| s.multiplicity).sum()
    }

    /// Lowest-energy sample; ties go to the earliest listed.
    pub fn best(&self) -> Option<&Sample> {
        self.samples
            .iter()
            .reduce(|a, b| if b.energy < a.energy { b } else { a })
    }

    pub fn min_energy(&self) -> Option<f64> {
        self.best().map(|s| s.energy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstrings_round_trip_through_json() {
        let s = Sample {
            bits: vec![true, false, true],
            energy: -1.5,
            multiplicity: 2,
        };
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"101\""));
        assert_eq!(serde_json::from_str::<Sample>(&j).unwrap(), s);
        assert!(bitstring::parse("10x").unwrap_err().contains("position 2"));
    }

    #[test]
    fn best_prefers_first_of_ties() {
        let set = SampleSet::new(
            "t",
            vec![
                Sample {
                    bits: vec![false],
                    energy: 0.0,
                    multiplicity: 1,
                },
                Sample {
                    bits: vec![true],
                    energy: -1.0,
                    multiplicity: 1,
                },
                Sample {
                    bits: vec![false],
                    energy: -1.0,
                    multiplicity: 3,
                },
            ],
        );
        assert_eq!(set.best().unwrap().bits, vec![true]);
        assert_eq!(set.total_weight(), 5);
    }
}
