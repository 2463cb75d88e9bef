use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HuboParams;
use crate::error::{Error, Result};

/// Coefficients with magnitude at or below this are dropped when pruning.
pub const PRUNE_TOLERANCE: f64 = 1e-12;

pub const HUBO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<HuboParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_hash: Option<String>,
}

/// Sparse polynomial over binary variables:
/// `H(x) = offset + sum_S w_S prod_{i in S} x_i`.
///
/// Term keys are sorted, duplicate-free, nonempty index lists.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HuboModel {
    num_vars: usize,
    offset: f64,
    terms: BTreeMap<Vec<usize>, f64>,
    pub metadata: ModelMetadata,
}

pub(crate) fn canonical_key(vars: &[usize], num_vars: usize) -> Result<Vec<usize>> {
    if vars.is_empty() {
        return Err(Error::Input(
            "term must reference at least one variable".into(),
        ));
    }
    let mut key = vars.to_vec();
    key.sort_unstable();
    if key.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Input(format!("term {vars:?} repeats a variable")));
    }
    if let Some(&v) = key.last().filter(|&&v| v >= num_vars) {
        return Err(Error::Input(format!(
            "term {vars:?} references variable {v} but the model has {num_vars}"
        )));
    }
    Ok(key)
}

impl HuboModel {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Largest stored term order (0 for a constant-only model).
    pub fn max_order(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, vars: &[usize]) -> f64 {
        let mut key = vars.to_vec();
        key.sort_unstable();
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    /// Adds `coeff` to the term over `vars`, removing it if the sum becomes zero.
    pub fn add_term(&mut self, vars: &[usize], coeff: f64) -> Result<()> {
        if !coeff.is_finite() {
            return Err(Error::Input(format!("non-finite coefficient on {vars:?}")));
        }
        let key = canonical_key(vars, self.num_vars)?;
        let slot = self.terms.entry(key.clone()).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.terms.remove(&key);
        }
        Ok(())
    }

    /// Sets the coefficient of `vars`, replacing any existing value.
    pub fn set_term(&mut self, vars: &[usize], coeff: f64) -> Result<()> {
        let key = canonical_key(vars, self.num_vars)?;
        if coeff == 0.0 {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, coeff);
        }
        Ok(())
    }

    /// Drops terms with `|w| <= tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, w| w.abs() > tol);
    }

    pub fn terms_of_order(&self, order: usize) -> impl Iterator<Item = (&Vec<usize>, &f64)> {
        self.terms.iter().filter(move |(k, _)| k.len() == order)
    }

    pub fn max_abs_of_order(&self, order: usize) -> f64 {
        self.terms_of_order(order)
            .map(|(_, w)| w.abs())
            .fold(0.0, f64::max)
    }

    /// Multiplies every coefficient and the offset by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.offset *= factor;
        for w in out.terms.values_mut() {
            *w *= factor;
        }
        out
    }

    /// Energy of an assignment: sum of `w_S` over terms whose variables are all set.
    pub fn evaluate(&self, assignment: &[bool]) -> Result<f64> {
        if assignment.len() != self.num_vars {
            return Err(Error::Input(format!(
                "assignment has {} bits, model has {} variables",
                assignment.len(),
                self.num_vars
            )));
        }
        Ok(self.evaluate_unchecked(assignment))
    }

    pub(crate) fn evaluate_unchecked(&self, assignment: &[bool]) -> f64 {
        self.offset
            + self
                .terms
                .iter()
                .filter(|(k, _)| k.iter().all(|&i| assignment[i]))
                .map(|(_, w)| w)
                .sum::<f64>()
    }

    /// Terms ordered by (order, indices) for export.
    fn export_order(&self) -> Vec<(&Vec<usize>, f64)> {
        let mut v: Vec<_> = self.terms.iter().map(|(k, w)| (k, *w)).collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// JSON export with every float written to 17 significant digits.
    pub fn to_json(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"schema_version\": {HUBO_SCHEMA_VERSION},");
        let _ = writeln!(out, "  \"num_vars\": {},", self.num_vars);
        let _ = writeln!(out, "  \"max_order\": {},", self.max_order());
        if self.offset != 0.0 {
            let _ = writeln!(out, "  \"offset\": {},", format_f64(self.offset));
        }
        if self.metadata != ModelMetadata::default() {
            let _ = writeln!(
                out,
                "  \"metadata\": {},",
                serde_json::to_string(&self.metadata)?
            );
        }
        out.push_str("  \"terms\": [");
        let terms = self.export_order();
        for (n, (vars, w)) in terms.iter().enumerate() {
            let vars: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
            let sep = if n + 1 == terms.len() { "" } else { "," };
            let _ = write!(
                out,
                "\n    {{\"vars\": [{}], \"coeff\": {}}}{sep}",
                vars.join(", "),
                format_f64(*w)
            );
        }
        out.push_str(if terms.is_empty() {
            "]\n}\n"
        } else {
            "\n  ]\n}\n"
        });
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: HuboDoc = serde_json::from_str(text)?;
        if doc.schema_version != HUBO_SCHEMA_VERSION {
            return Err(Error::Input(format!(
                "unsupported hubo schema_version {}",
                doc.schema_version
            )));
        }
        let mut model = HuboModel::new(doc.num_vars);
        model.offset = doc.offset;
        model.metadata = doc.metadata;
        for t in doc.terms {
            model.add_term(&t.vars, t.coeff)?;
        }
        if model.max_order() > doc.max_order {
            return Err(Error::Input(format!(
                "model declares max_order {} but contains a term of order {}",
                doc.max_order,
                model.max_order()
            )));
        }
        Ok(model)
    }

    pub fn content_hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_json()?.as_bytes())))
    }
}

/// Scientific notation with 17 significant digits; parses back to the same bits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Deserialize)]
struct HuboDoc {
    #[serde(default = "default_schema_version")]
    schema_version: u32,
    num_vars: usize,
    max_order: usize,
    #[serde(default)]
    offset: f64,
    #[serde(default)]
    metadata: ModelMetadata,
    terms: Vec<TermDoc>,
}

#[derive(Deserialize)]
struct TermDoc {
    vars: Vec<usize>,
    coeff: f64,
}

fn default_schema_version() -> u32 {
    HUBO_SCHEMA_VERSION
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn keys_are_canonical() {
        let mut m = HuboModel::new(4);
        m.add_term(&[2, 0, 1], 1.5).unwrap();
        assert_eq!(m.coeff(&[1, 2, 0]), 1.5);
        assert!(m.add_term(&[1, 1], 1.0).is_err());
        assert!(m.add_term(&[4], 1.0).is_err());
        assert!(m.add_term(&[], 1.0).is_err());
        m.add_term(&[0, 1, 2], -1.5).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn evaluate_examples() {
        let mut m = HuboModel::new(1);
        m.add_term(&[0], -1.0).unwrap();
        assert_eq!(m.evaluate(&[true]).unwrap(), -1.0);
        assert_eq!(m.evaluate(&[false]).unwrap(), 0.0);
        assert!(m.evaluate(&[true, false]).is_err());
    }

    #[test]
    fn json_shape() {
        let mut m = HuboModel::new(3);
        m.add_term(&[0, 1], 0.1).unwrap();
        m.add_term(&[2], -2.0).unwrap();
        let s = m.to_json().unwrap();
        assert!(s.contains("\"max_order\": 2"));
        assert!(s.contains("{\"vars\": [2], \"coeff\": -2.0000000000000000e0}"));
        assert!(s.find("[2]").unwrap() < s.find("[0, 1]").unwrap());
        assert_eq!(HuboModel::from_json(&s).unwrap(), m);
        assert_eq!(
            HuboModel::from_json(&HuboModel::new(2).to_json().unwrap()).unwrap(),
            HuboModel::new(2)
        );
    }

    proptest! {
        #[test]
        fn float_format_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            prop_assert_eq!(format_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }

        #[test]
        fn json_round_trip(terms in proptest::collection::vec((proptest::collection::btree_set(0usize..6, 1..4), -10.0f64..10.0), 0..20)) {
            let mut m = HuboModel::new(6);
            for (vars, w) in terms {
                let v: Vec<usize> = vars.into_iter().collect();
                m.add_term(&v, w).unwrap();
            }
            m.set_offset(0.25);
            prop_assert_eq!(HuboModel::from_json(&m.to_json().unwrap()).unwrap(), m);
        }
    }
}
