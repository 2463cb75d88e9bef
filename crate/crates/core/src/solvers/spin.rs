use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hubo::{model::canonical_key, HuboModel, PRUNE_TOLERANCE};

/// Polynomial over spins `z_i in {-1, +1}` plus a constant.
///
/// Assignments are carried as binary bits with `x_i = (1 - z_i) / 2`, so a set
/// bit means `z_i = -1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpinModel {
    num_vars: usize,
    constant: f64,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl SpinModel {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn set_constant(&mut self, c: f64) {
        self.constant = c;
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.terms
    }

    pub fn max_order(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn coeff(&self, vars: &[usize]) -> f64 {
        let mut key = vars.to_vec();
        key.sort_unstable();
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, vars: &[usize], coeff: f64) -> Result<()> {
        if vars.is_empty() {
            self.constant += coeff;
            return Ok(());
        }
        let key = canonical_key(vars, self.num_vars)?;
        *self.terms.entry(key).or_insert(0.0) += coeff;
        Ok(())
    }

    fn prune(&mut self) {
        self.terms.retain(|_, w| w.abs() > PRUNE_TOLERANCE);
    }

    pub fn evaluate_spins(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.num_vars {
            return Err(Error::Input(format!(
                "spin assignment has {} entries, model has {} variables",
                spins.len(),
                self.num_vars
            )));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Input("spins must be +1 or -1".into()));
        }
        Ok(self.constant
            + self
                .terms
                .iter()
                .map(|(k, w)| w * k.iter().map(|&i| spins[i] as f64).product::<f64>())
                .sum::<f64>())
    }

    /// Evaluates on binary bits (`true` means `z = -1`).
    pub fn evaluate(&self, bits: &[bool]) -> Result<f64> {
        let spins: Vec<i8> = bits.iter().map(|&b| if b { -1 } else { 1 }).collect();
        self.evaluate_spins(&spins)
    }
}

/// Calls `f(subset)` for every subset of `vars`, including the empty one.
fn for_each_subset(vars: &[usize], mut f: impl FnMut(&[usize])) {
    let mut buf = Vec::with_capacity(vars.len());
    for mask in 0u32..(1u32 << vars.len()) {
        buf.clear();
        buf.extend(
            vars.iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &v)| v),
        );
        f(&buf);
    }
}

/// Substitutes `x_i = (1 - z_i) / 2` and expands every product.
pub fn binary_to_spin(model: &HuboModel) -> SpinModel {
    let mut out = SpinModel::new(model.num_vars());
    out.constant = model.offset();
    for (vars, &w) in model.terms() {
        let scale = w / f64::from(1u32 << vars.len());
        for_each_subset(vars, |sub| {
            let sign = if sub.len() % 2 == 0 { 1.0 } else { -1.0 };
            out.add_term(sub, sign * scale)
                .expect("subset of a valid key");
        });
    }
    out.prune();
    out
}

/// Substitutes `z_i = 1 - 2 x_i`; inverse of [`binary_to_spin`].
pub fn spin_to_binary(model: &SpinModel) -> HuboModel {
    let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut offset = model.constant;
    for (vars, &w) in &model.terms {
        for_each_subset(vars, |sub| {
            let c = w * (-2.0f64).powi(sub.len() as i32);
            if sub.is_empty() {
                offset += c;
            } else {
                *acc.entry(sub.to_vec()).or_insert(0.0) += c;
            }
        });
    }
    let mut out = HuboModel::new(model.num_vars);
    out.set_offset(offset);
    for (k, w) in acc {
        if w.abs() > PRUNE_TOLERANCE {
            out.set_term(&k, w).expect("keys come from a valid model");
        }
    }
    out
}

/// Replaces each cubic term `c z_i z_j z_k` with
/// `c/2 (z_i z_j + z_i z_k + z_j z_k) - c/2`, merging into existing pair
/// terms and the constant. Exact when at most one of the three spins is -1;
/// off by `2|c|` otherwise.
pub fn reduce_cubic_to_quadratic(model: &SpinModel) -> Result<SpinModel> {
    if let Some(k) = model.terms.keys().find(|k| k.len() > 3) {
        return Err(Error::Input(format!(
            "term {k:?} has order {}; only cubic terms can be reduced",
            k.len()
        )));
    }
    let mut out = SpinModel::new(model.num_vars);
    out.constant = model.constant;
    for (vars, &c) in &model.terms {
        if vars.len() < 3 {
            out.add_term(vars, c)?;
            continue;
        }
        let half = 0.5 * c;
        let (i, j, k) = (vars[0], vars[1], vars[2]);
        out.add_term(&[i, j], half)?;
        out.add_term(&[i, k], half)?;
        out.add_term(&[j, k], half)?;
        out.constant -= half;
    }
    out.prune();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hubo(num_vars: usize, terms: &[(&[usize], f64)]) -> HuboModel {
        let mut m = HuboModel::new(num_vars);
        for (v, w) in terms {
            m.add_term(v, *w).unwrap();
        }
        m
    }

    #[test]
    fn one_variable_identity() {
        let s = binary_to_spin(&hubo(1, &[(&[0], 1.0)]));
        assert_eq!(s.constant(), 0.5);
        assert_eq!(s.coeff(&[0]), -0.5);
    }

    #[test]
    fn pair_expansion() {
        let s = binary_to_spin(&hubo(2, &[(&[0, 1], 1.0)]));
        assert_eq!(s.constant(), 0.25);
        assert_eq!(s.coeff(&[0]), -0.25);
        assert_eq!(s.coeff(&[1]), -0.25);
        assert_eq!(s.coeff(&[0, 1]), 0.25);
    }

    #[test]
    fn cubic_expansion() {
        let s = binary_to_spin(&hubo(3, &[(&[0, 1, 2], 1.0)]));
        assert_eq!(s.constant(), 0.125);
        for i in 0..3 {
            assert_eq!(s.coeff(&[i]), -0.125);
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(s.coeff(&[i, j]), 0.125);
        }
        assert_eq!(s.coeff(&[0, 1, 2]), -0.125);
    }

    #[test]
    fn spin_to_binary_examples() {
        let mut s = SpinModel::new(1);
        s.set_constant(0.5);
        s.add_term(&[0], -0.5).unwrap();
        let b = spin_to_binary(&s);
        assert_eq!(b.offset(), 0.0);
        assert_eq!(b.coeff(&[0]), 1.0);
        assert_eq!(b.len(), 1);

        let mut c = SpinModel::new(3);
        c.set_constant(-2.0);
        let b = spin_to_binary(&c);
        assert!(b.is_empty());
        assert_eq!(b.offset(), -2.0);
    }

    #[test]
    fn reduction_hand_values() {
        let mut s = SpinModel::new(3);
        s.add_term(&[0, 1, 2], 2.0).unwrap();
        let r = reduce_cubic_to_quadratic(&s).unwrap();
        assert_eq!(r.max_order(), 2);
        assert_eq!(s.evaluate_spins(&[1, 1, 1]).unwrap(), 2.0);
        assert_eq!(r.evaluate_spins(&[1, 1, 1]).unwrap(), 2.0);
        assert_eq!(s.evaluate_spins(&[1, -1, -1]).unwrap(), 2.0);
        assert_eq!(r.evaluate_spins(&[1, -1, -1]).unwrap(), -2.0);
    }

    #[test]
    fn reduction_leaves_lower_orders_and_rejects_quartic() {
        let mut s = SpinModel::new(4);
        s.add_term(&[0], 1.0).unwrap();
        s.add_term(&[1, 2], -0.5).unwrap();
        assert_eq!(reduce_cubic_to_quadratic(&s).unwrap(), s);
        s.add_term(&[0, 1, 2, 3], 1.0).unwrap();
        assert!(reduce_cubic_to_quadratic(&s).is_err());
    }
}
