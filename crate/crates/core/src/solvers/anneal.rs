use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::landscape::{CompiledPoly, Landscape};
use super::sampleset::{Sample, SampleSet, SolverMetadata};
use super::spin::{binary_to_spin, reduce_cubic_to_quadratic};
use crate::error::{Error, Result};
use crate::hubo::HuboModel;

/// Geometric cooling from `t_start` to `t_end` over `sweeps`; one sweep is
/// `num_vars` uniformly chosen single-variable flip proposals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    /// `None` picks `2 * max|w| * term_count / num_vars` for the model at hand.
    #[serde(default)]
    pub t_start: Option<f64>,
    pub t_end: f64,
    pub sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            t_start: None,
            t_end: 1e-3,
            sweeps: 2000,
            restarts: 64,
            seed: 0,
        }
    }
}

impl AnnealSchedule {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be > 0, got {}",
                self.t_end
            )));
        }
        if let Some(t) = self.t_start {
            if !(t > self.t_end && t.is_finite()) {
                return Err(Error::Config(format!(
                    "t_start ({t}) must exceed t_end ({})",
                    self.t_end
                )));
            }
        }
        if self.sweeps == 0 || self.restarts == 0 {
            return Err(Error::Config("sweeps and restarts must be positive".into()));
        }
        Ok(())
    }

    /// Fills in the heuristic starting temperature for `poly`.
    pub(crate) fn resolve(&self, poly: &CompiledPoly) -> Result<AnnealSchedule> {
        self.validate()?;
        let t_start = self.t_start.unwrap_or_else(|| {
            let n = poly.num_vars().max(1) as f64;
            let heuristic = 2.0 * poly.max_abs_coeff() * poly.num_terms() as f64 / n;
            heuristic.max(10.0 * self.t_end)
        });
        Ok(AnnealSchedule {
            t_start: Some(t_start),
            ..*self
        })
    }

    fn temperature(&self, sweep: usize) -> f64 {
        let t0 = self.t_start.expect("resolved schedule");
        if self.sweeps == 1 {
            return t0;
        }
        let frac = sweep as f64 / (self.sweeps - 1) as f64;
        t0 * (self.t_end / t0).powf(frac)
    }
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    let mut x = seed ^ (restart as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

struct RestartOutcome {
    bits: Vec<bool>,
    energy: f64,
    best_trace: Vec<f64>,
}

fn run_restart(
    poly: &CompiledPoly,
    schedule: &AnnealSchedule,
    restart: usize,
    trace: bool,
) -> RestartOutcome {
    let n = poly.num_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(schedule.seed, restart));
    let bits: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let mut energy = poly.energy(&bits);
    let mut state = poly.state(bits);
    let mut best = energy;
    let mut best_trace = Vec::with_capacity(if trace { schedule.sweeps } else { 0 });
    for sweep in 0..schedule.sweeps {
        let t = schedule.temperature(sweep);
        for _ in 0..n {
            let v = rng.gen_range(0..n);
            let delta = poly.state_delta(&state, v);
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp() {
                poly.apply_flip(&mut state, v);
                energy += delta;
            }
        }
        best = best.min(energy);
        if trace {
            best_trace.push(best);
        }
    }
    let bits = state.into_bits();
    RestartOutcome {
        energy: poly.energy(&bits),
        bits,
        best_trace,
    }
}

fn anneal_inner(
    model: &impl Landscape,
    schedule: &AnnealSchedule,
    trace: bool,
) -> Result<(SampleSet, Vec<Vec<f64>>)> {
    if model.num_vars() == 0 {
        return Err(Error::EmptyModel);
    }
    let poly = model.compile();
    let schedule = schedule.resolve(&poly)?;
    let outcomes: Vec<RestartOutcome> = (0..schedule.restarts)
        .into_par_iter()
        .map(|r| run_restart(&poly, &schedule, r, trace))
        .collect();
    let mut traces = Vec::new();
    let samples = outcomes
        .into_iter()
        .map(|o| {
            traces.push(o.best_trace);
            Sample {
                bits: o.bits,
                energy: o.energy,
                multiplicity: 1,
            }
        })
        .collect();
    let mut set = SampleSet::new("sa", samples);
    set.metadata = SolverMetadata {
        schedule: Some(schedule),
        ..Default::default()
    };
    Ok((set, traces))
}

/// Metropolis simulated annealing directly on the model's polynomial, any order.
/// Returns the final state of each restart, ordered by restart index.
pub fn anneal(model: &impl Landscape, schedule: &AnnealSchedule) -> Result<SampleSet> {
    anneal_inner(model, schedule, false).map(|(s, _)| s)
}

/// As [`anneal`], also returning each restart's best-so-far energy after every sweep.
pub fn anneal_traced(
    model: &impl Landscape,
    schedule: &AnnealSchedule,
) -> Result<(SampleSet, Vec<Vec<f64>>)> {
    anneal_inner(model, schedule, true)
}

/// Anneals the binary model natively.
pub fn solve_native(model: &HuboModel, schedule: &AnnealSchedule) -> Result<SampleSet> {
    let mut set = anneal(model, schedule)?;
    set.solver_id = "sa-hubo".into();
    Ok(set)
}

/// Anneals the pair-reduced spin form, then re-scores every state on the original model.
pub fn solve_reduced(model: &HuboModel, schedule: &AnnealSchedule) -> Result<SampleSet> {
    let reduced = reduce_cubic_to_quadratic(&binary_to_spin(model))?;
    let mut set = anneal(&reduced, schedule)?;
    for s in &mut set.samples {
        s.energy = model.evaluate_unchecked(&s.bits);
    }
    set.solver_id = "sa-qubo".into();
    set.metadata.reduced = true;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> AnnealSchedule {
        AnnealSchedule {
            sweeps: 200,
            restarts: 8,
            ..Default::default()
        }
    }

    #[test]
    fn one_bit_landscape() {
        let mut m = HuboModel::new(1);
        m.add_term(&[0], -1.0).unwrap();
        for seed in 0..5 {
            let set = solve_native(&m, &quick().with_seed(seed)).unwrap();
            assert!(set
                .samples
                .iter()
                .all(|s| s.bits == vec![true] && s.energy == -1.0));
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let mut m = HuboModel::new(6);
        m.add_term(&[0, 1, 2], -1.0).unwrap();
        m.add_term(&[3, 4], 0.5).unwrap();
        m.add_term(&[5], 0.3).unwrap();
        let a = solve_native(&m, &quick().with_seed(42)).unwrap();
        let b = solve_native(&m, &quick().with_seed(42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert!(a.metadata.schedule.unwrap().t_start.is_some());
    }

    #[test]
    fn best_so_far_is_monotone() {
        let mut m = HuboModel::new(8);
        for i in 0..8 {
            m.add_term(&[i], if i % 2 == 0 { -0.5 } else { 0.4 })
                .unwrap();
            m.add_term(&[i, (i + 1) % 8], 0.3).unwrap();
            m.add_term(&[i, (i + 2) % 8, (i + 5) % 8], -0.2).unwrap();
        }
        let (_, traces) = anneal_traced(&m, &quick()).unwrap();
        for t in traces {
            assert_eq!(t.len(), 200);
            assert!(t.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn schedule_validation() {
        let bad = AnnealSchedule {
            t_start: Some(1e-4),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(AnnealSchedule {
            sweeps: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(anneal(&HuboModel::new(0), &quick()).is_err());
    }

    #[test]
    fn reduced_path_rescoring_uses_original_model() {
        let mut m = HuboModel::new(3);
        m.add_term(&[0, 1, 2], -2.0).unwrap();
        m.add_term(&[0], 0.5).unwrap();
        let set = solve_reduced(&m, &quick()).unwrap();
        assert!(set.metadata.reduced);
        for s in &set.samples {
            assert_eq!(s.energy, m.evaluate(&s.bits).unwrap());
        }
    }
}
