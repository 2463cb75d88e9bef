use super::spin::SpinModel;
use crate::hubo::HuboModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Binary,
    Spin,
}

/// A polynomial flattened for fast single-variable flip updates. State is
/// always a vector of bits; in the spin basis bit `b` stands for `z = 1 - 2b`.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    basis: Basis,
    num_vars: usize,
    constant: f64,
    coeffs: Vec<f64>,
    term_start: Vec<usize>,
    term_vars: Vec<usize>,
    incident_start: Vec<usize>,
    incident: Vec<usize>,
}

impl CompiledPoly {
    fn build<'a>(
        basis: Basis,
        num_vars: usize,
        constant: f64,
        terms: impl Iterator<Item = (&'a Vec<usize>, &'a f64)>,
    ) -> Self {
        let mut coeffs = Vec::new();
        let mut term_start = vec![0];
        let mut term_vars = Vec::new();
        let mut degree = vec![0usize; num_vars];
        for (vars, &w) in terms {
            coeffs.push(w);
            term_vars.extend_from_slice(vars);
            term_start.push(term_vars.len());
            for &v in vars {
                degree[v] += 1;
            }
        }
        let mut incident_start = Vec::with_capacity(num_vars + 1);
        incident_start.push(0);
        for d in &degree {
            incident_start.push(incident_start.last().unwrap() + d);
        }
        let mut fill = incident_start.clone();
        let mut incident = vec![0; *incident_start.last().unwrap()];
        for t in 0..coeffs.len() {
            for &v in &term_vars[term_start[t]..term_start[t + 1]] {
                incident[fill[v]] = t;
                fill[v] += 1;
            }
        }
        Self {
            basis,
            num_vars,
            constant,
            coeffs,
            term_start,
            term_vars,
            incident_start,
            incident,
        }
    }

    pub fn from_hubo(model: &HuboModel) -> Self {
        Self::build(
            Basis::Binary,
            model.num_vars(),
            model.offset(),
            model.terms().iter(),
        )
    }

    pub fn from_spin(model: &SpinModel) -> Self {
        Self::build(
            Basis::Spin,
            model.num_vars(),
            model.constant(),
            model.terms().iter(),
        )
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    fn vars(&self, t: usize) -> &[usize] {
        &self.term_vars[self.term_start[t]..self.term_start[t + 1]]
    }

    pub fn energy(&self, bits: &[bool]) -> f64 {
        let mut e = self.constant;
        for t in 0..self.coeffs.len() {
            let vars = self.vars(t);
            let value = match self.basis {
                Basis::Binary => {
                    if vars.iter().all(|&v| bits[v]) {
                        1.0
                    } else {
                        0.0
                    }
                }
                Basis::Spin => {
                    let negatives = vars.iter().filter(|&&v| bits[v]).count();
                    if negatives % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            e += self.coeffs[t] * value;
        }
        e
    }

    /// Energy change from flipping variable `v`.
    #[inline]
    pub fn flip_delta(&self, bits: &[bool], v: usize) -> f64 {
        let mut acc = 0.0;
        let terms = &self.incident[self.incident_start[v]..self.incident_start[v + 1]];
        match self.basis {
            Basis::Binary => {
                for &t in terms {
                    if self.vars(t).iter().all(|&u| u == v || bits[u]) {
                        acc += self.coeffs[t];
                    }
                }
                // x_v: 0 -> 1 adds the active terms, 1 -> 0 removes them.
                if bits[v] {
                    -acc
                } else {
                    acc
                }
            }
            Basis::Spin => {
                for &t in terms {
                    let odd = self.vars(t).iter().filter(|&&u| u != v && bits[u]).count() % 2 == 1;
                    acc += if odd { -self.coeffs[t] } else { self.coeffs[t] };
                }
                // z_v -> -z_v changes each term by -2 z_v * (rest of product).
                let z = if bits[v] { -1.0 } else { 1.0 };
                -2.0 * z * acc
            }
        }
    }
}

/// Assignment plus a per-term counter that makes flip deltas O(degree).
/// The counter is the number of unset variables (binary basis) or set
/// variables (spin basis) in each term.
#[derive(Debug, Clone)]
pub struct FlipState {
    bits: Vec<bool>,
    counts: Vec<u32>,
}

impl FlipState {
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }
}

impl CompiledPoly {
    pub fn state(&self, bits: Vec<bool>) -> FlipState {
        let counts = (0..self.coeffs.len())
            .map(|t| {
                let vars = self.vars(t);
                match self.basis {
                    Basis::Binary => vars.iter().filter(|&&u| !bits[u]).count() as u32,
                    Basis::Spin => vars.iter().filter(|&&u| bits[u]).count() as u32,
                }
            })
            .collect();
        FlipState { bits, counts }
    }

    /// Same value as `flip_delta`, read from the cached counters.
    #[inline]
    pub fn state_delta(&self, state: &FlipState, v: usize) -> f64 {
        let terms = &self.incident[self.incident_start[v]..self.incident_start[v + 1]];
        let mut acc = 0.0;
        match self.basis {
            Basis::Binary => {
                // The term is active apart from v when no other variable is unset.
                let own = u32::from(!state.bits[v]);
                for &t in terms {
                    if state.counts[t] == own {
                        acc += self.coeffs[t];
                    }
                }
                if state.bits[v] {
                    -acc
                } else {
                    acc
                }
            }
            Basis::Spin => {
                // Each incident term flips sign: delta = -2 * w * (-1)^count.
                for &t in terms {
                    if state.counts[t] & 1 == 0 {
                        acc += self.coeffs[t];
                    } else {
                        acc -= self.coeffs[t];
                    }
                }
                -2.0 * acc
            }
        }
    }

    #[inline]
    pub fn apply_flip(&self, state: &mut FlipState, v: usize) {
        let terms = &self.incident[self.incident_start[v]..self.incident_start[v + 1]];
        let was_set = state.bits[v];
        state.bits[v] = !was_set;
        // Binary counts unset variables, spin counts set ones.
        let increment = match self.basis {
            Basis::Binary => was_set,
            Basis::Spin => !was_set,
        };
        for &t in terms {
            if increment {
                state.counts[t] += 1;
            } else {
                state.counts[t] -= 1;
            }
        }
    }
}

/// Anything the solvers can minimize.
pub trait Landscape {
    fn num_vars(&self) -> usize;
    fn compile(&self) -> CompiledPoly;
}

impl Landscape for HuboModel {
    fn num_vars(&self) -> usize {
        HuboModel::num_vars(self)
    }

    fn compile(&self) -> CompiledPoly {
        CompiledPoly::from_hubo(self)
    }
}

impl Landscape for SpinModel {
    fn num_vars(&self) -> usize {
        SpinModel::num_vars(self)
    }

    fn compile(&self) -> CompiledPoly {
        CompiledPoly::from_spin(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::spin::binary_to_spin;

    #[test]
    fn deltas_match_energy_differences() {
        let mut m = HuboModel::new(5);
        m.add_term(&[0], -1.0).unwrap();
        m.add_term(&[0, 3], 0.7).unwrap();
        m.add_term(&[1, 2, 4], -0.4).unwrap();
        m.add_term(&[2, 3, 4], 1.3).unwrap();
        m.set_offset(0.2);
        for poly in [m.compile(), binary_to_spin(&m).compile()] {
            for code in 0u32..32 {
                let bits: Vec<bool> = (0..5).map(|i| code >> i & 1 == 1).collect();
                assert!((poly.energy(&bits) - m.evaluate(&bits).unwrap()).abs() < 1e-12);
                for v in 0..5 {
                    let mut flipped = bits.clone();
                    flipped[v] = !flipped[v];
                    let direct = poly.energy(&flipped) - poly.energy(&bits);
                    assert!((poly.flip_delta(&bits, v) - direct).abs() < 1e-12);
                    let mut state = poly.state(bits.clone());
                    assert!((poly.state_delta(&state, v) - direct).abs() < 1e-12);
                    poly.apply_flip(&mut state, v);
                    let fresh = poly.state(flipped.clone());
                    assert_eq!(state.counts, fresh.counts);
                    assert_eq!(state.bits(), &flipped[..]);
                }
            }
        }
    }
}
