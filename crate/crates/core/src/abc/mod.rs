//! Artificial bee colony search over pluggable encodings.
//!
//! Each cycle runs three phases over a population of `colony_size` food
//! sources:
//!
//! 1. employed bees perturb every source once and keep the better of the two;
//! 2. onlooker bees pick sources in proportion to their fitness
//!    `1 / (1 + cost)` and perturb those the same way;
//! 3. a scout replaces the most stagnant source once it has gone `limit`
//!    trials without improvement.
//!
//! Costs are minimized. The best source ever seen is memorized and returned.

mod encoding;

pub use encoding::{binary_step, index_step, BinaryEncoding, Encoding, IndexEncoding};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Something the colony can optimize.
pub trait AbcProblem {
    type Encoding: Encoding;

    fn encoding(&self) -> &Self::Encoding;

    /// Non-negative, finite cost of a feasible solution.
    fn cost(&self, solution: &Solution<Self>) -> f64;
}

pub type Solution<P> = <<P as AbcProblem>::Encoding as Encoding>::Solution;

/// Adapter turning an encoding and a closure into an [`AbcProblem`].
pub struct FnProblem<E, F> {
    pub encoding: E,
    pub cost: F,
}

impl<E, F> AbcProblem for FnProblem<E, F>
where
    E: Encoding,
    F: Fn(&E::Solution) -> f64,
{
    type Encoding = E;

    fn encoding(&self) -> &E {
        &self.encoding
    }

    fn cost(&self, solution: &E::Solution) -> f64 {
        (self.cost)(solution)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AbcParams {
    /// Number of food sources (SN).
    pub sn: usize,
    /// Maximum number of cycles (MCN).
    pub mcn: usize,
    /// Trials without improvement before a source is abandoned.
    /// `None` means `sn * dimension`.
    pub limit: Option<usize>,
    pub seed: u64,
}

impl Default for AbcParams {
    fn default() -> Self {
        Self {
            sn: 30,
            mcn: 200,
            limit: None,
            seed: 0,
        }
    }
}

impl AbcParams {
    pub fn validate(&self) -> Result<()> {
        if self.sn < 2 {
            return Err(Error::InvalidValue(format!(
                "abc.sn must be at least 2 (got {})",
                self.sn
            )));
        }
        if self.mcn < 1 {
            return Err(Error::InvalidValue("abc.mcn must be at least 1".into()));
        }
        if self.limit == Some(0) {
            return Err(Error::InvalidValue("abc.limit must be at least 1".into()));
        }
        Ok(())
    }

    pub fn effective_limit(&self, dimension: usize) -> usize {
        self.limit.unwrap_or(self.sn * dimension.max(1))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<S> {
    pub solution: S,
    pub cost: f64,
    pub trials: usize,
}

/// Notifications emitted while the colony runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbcEvent {
    /// A perturbed source was compared against the one it came from.
    Greedy {
        index: usize,
        old_cost: f64,
        new_cost: f64,
        accepted: bool,
    },
    /// An abandoned source was replaced by a fresh random one.
    Scout {
        index: usize,
        old_cost: f64,
        new_cost: f64,
    },
    CycleEnd {
        cycle: usize,
        best_cost: f64,
    },
}

#[derive(Debug, Clone)]
pub struct AbcOutcome<S> {
    pub best: Candidate<S>,
    /// Best-so-far cost after each cycle.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

/// Fitness-proportional onlooker probabilities with `fit = 1 / (1 + cost)`.
pub fn selection_probability(costs: &[f64]) -> Vec<f64> {
    let fits: Vec<f64> = costs.iter().map(|c| 1.0 / (1.0 + c)).collect();
    let total: f64 = fits.iter().sum();
    fits.iter().map(|f| f / total).collect()
}

pub fn run_abc<P: AbcProblem>(problem: &P, params: &AbcParams) -> Result<AbcOutcome<Solution<P>>> {
    run_abc_with(problem, params, &[], |_| {})
}

/// Runs the colony, seeding the population with `initial` (extra entries
/// are ignored) and reporting every decision to `observer`.
pub fn run_abc_with<P, O>(
    problem: &P,
    params: &AbcParams,
    initial: &[Solution<P>],
    mut observer: O,
) -> Result<AbcOutcome<Solution<P>>>
where
    P: AbcProblem,
    O: FnMut(&AbcEvent),
{
    params.validate()?;
    let enc = problem.encoding();
    if enc.dimension() == 0 {
        return Err(Error::EmptyUniverse);
    }
    let sn = params.sn;
    let limit = params.effective_limit(enc.dimension());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut evaluations = 0usize;

    let eval = |s: &Solution<P>, evaluations: &mut usize| {
        *evaluations += 1;
        problem.cost(s)
    };

    let mut pop: Vec<Candidate<Solution<P>>> = Vec::with_capacity(sn);
    for i in 0..sn {
        let solution = match initial.get(i) {
            Some(s) if enc.is_feasible(s) => s.clone(),
            _ => enc.random_solution(&mut rng),
        };
        let cost = eval(&solution, &mut evaluations);
        pop.push(Candidate {
            solution,
            cost,
            trials: 0,
        });
    }

    let mut best = best_of(&pop).clone();
    let mut history = Vec::with_capacity(params.mcn);

    for cycle in 0..params.mcn {
        for i in 0..sn {
            let k = other_index(i, sn, &mut rng);
            let v = enc.neighbor(&pop[i].solution, &pop[k].solution, &mut rng);
            let cost = if v == pop[i].solution {
                pop[i].cost
            } else {
                eval(&v, &mut evaluations)
            };
            greedy(&mut pop[i], i, v, cost, &mut observer);
        }

        let costs: Vec<f64> = pop.iter().map(|c| c.cost).collect();
        let probs = selection_probability(&costs);

        for _ in 0..sn {
            let i = roulette(&probs, &mut rng);
            let k = other_index(i, sn, &mut rng);
            let v = enc.neighbor(&pop[i].solution, &pop[k].solution, &mut rng);
            let cost = if v == pop[i].solution {
                pop[i].cost
            } else {
                eval(&v, &mut evaluations)
            };
            greedy(&mut pop[i], i, v, cost, &mut observer);
        }

        let cycle_best = best_of(&pop);
        if cycle_best.cost < best.cost {
            best = cycle_best.clone();
        }

        // Single scout: the most stagnant source, if it hit the limit.
        let (stale, trials) = pop
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.trials))
            .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if trials >= limit {
            let solution = enc.random_solution(&mut rng);
            let cost = eval(&solution, &mut evaluations);
            observer(&AbcEvent::Scout {
                index: stale,
                old_cost: pop[stale].cost,
                new_cost: cost,
            });
            pop[stale] = Candidate {
                solution,
                cost,
                trials: 0,
            };
            if cost < best.cost {
                best = pop[stale].clone();
            }
        }

        history.push(best.cost);
        observer(&AbcEvent::CycleEnd {
            cycle,
            best_cost: best.cost,
        });
    }

    best.trials = 0;
    Ok(AbcOutcome {
        best,
        history,
        evaluations,
    })
}

fn best_of<S>(pop: &[Candidate<S>]) -> &Candidate<S> {
    pop.iter()
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .expect("non-empty population")
}

fn greedy<S, O: FnMut(&AbcEvent)>(c: &mut Candidate<S>, index: usize, v: S, cost: f64, observer: &mut O) {
    let accepted = cost < c.cost;
    observer(&AbcEvent::Greedy {
        index,
        old_cost: c.cost,
        new_cost: cost,
        accepted,
    });
    if accepted {
        c.solution = v;
        c.cost = cost;
        c.trials = 0;
    } else {
        c.trials += 1;
    }
}

fn other_index<R: Rng + ?Sized>(i: usize, n: usize, rng: &mut R) -> usize {
    let k = rng.gen_range(0..n - 1);
    if k >= i {
        k + 1
    } else {
        k
    }
}

fn roulette<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    probs.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn probabilities_examples() {
        assert_eq!(selection_probability(&[3.0; 4]), vec![0.25; 4]);
        let p = selection_probability(&[0.0, 1.0]);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn probabilities_normalize(costs in proptest::collection::vec(0.0f64..1e6, 1..50)) {
            let p = selection_probability(&costs);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|x| *x > 0.0));
        }
    }

    #[test]
    fn finds_all_zero_bits() {
        let problem = FnProblem {
            encoding: BinaryEncoding::new(20, 0.5),
            cost: |s: &Vec<bool>| s.iter().filter(|b| **b).count() as f64,
        };
        let params = AbcParams {
            sn: 10,
            mcn: 100,
            limit: None,
            seed: 7,
        };
        let out = run_abc(&problem, &params).unwrap();
        assert_eq!(out.best.cost, 0.0);
        assert!(out.best.solution.iter().all(|b| !b));
    }

    #[test]
    fn finds_index_optimum() {
        // Exhaustive scan over the 10 x 10 grid: (3, 3) is the unique zero,
        // but two distinct indices are required, so the optimum has cost 1.
        let cost = |s: &Vec<usize>| {
            let a = s[0] as f64 - 3.0;
            let b = s[1] as f64 - 3.0;
            a * a + b * b
        };
        let exhaustive = (0..10)
            .flat_map(|i| (0..10).filter(move |&j| j != i).map(move |j| vec![i, j]))
            .map(|s| cost(&s))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(exhaustive, 1.0);

        let problem = FnProblem {
            encoding: IndexEncoding::new(2, 10),
            cost,
        };
        let out = run_abc(
            &problem,
            &AbcParams {
                sn: 10,
                mcn: 100,
                limit: Some(20),
                seed: 3,
            },
        )
        .unwrap();
        assert_eq!(out.best.cost, exhaustive);
        assert!(out.best.solution.contains(&3));
    }

    #[test]
    fn history_is_monotone_and_greedy_never_worsens() {
        let problem = FnProblem {
            encoding: IndexEncoding::new(4, 30),
            cost: |s: &Vec<usize>| s.iter().map(|&x| (x as f64 - 11.5).abs()).sum::<f64>(),
        };
        let mut bad = 0;
        let out = run_abc_with(
            &problem,
            &AbcParams {
                sn: 8,
                mcn: 60,
                limit: Some(5),
                seed: 1,
            },
            &[],
            |e| {
                if let AbcEvent::Greedy {
                    old_cost,
                    new_cost,
                    accepted: true,
                    ..
                } = e
                {
                    if new_cost > old_cost {
                        bad += 1;
                    }
                }
            },
        )
        .unwrap();
        assert_eq!(bad, 0);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn deterministic_per_seed() {
        let problem = FnProblem {
            encoding: BinaryEncoding::new(30, 0.5),
            cost: |s: &Vec<bool>| s.iter().enumerate().filter(|(i, b)| **b == (i % 3 == 0)).count() as f64,
        };
        let p = AbcParams {
            sn: 6,
            mcn: 30,
            limit: None,
            seed: 99,
        };
        let a = run_abc(&problem, &p).unwrap();
        let b = run_abc(&problem, &p).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn warm_start_is_kept() {
        let problem = FnProblem {
            encoding: IndexEncoding::new(2, 50),
            cost: |s: &Vec<usize>| (s[0] + s[1]) as f64,
        };
        let out = run_abc_with(
            &problem,
            &AbcParams {
                sn: 4,
                mcn: 1,
                limit: None,
                seed: 0,
            },
            &[vec![0, 1]],
            |_| {},
        )
        .unwrap();
        assert_eq!(out.best.cost, 1.0);
    }

    #[test]
    fn rejects_bad_params_and_empty_problems() {
        let problem = FnProblem {
            encoding: BinaryEncoding::new(0, 0.5),
            cost: |_: &Vec<bool>| 0.0,
        };
        assert!(matches!(
            run_abc(&problem, &AbcParams::default()),
            Err(Error::EmptyUniverse)
        ));
        let problem = FnProblem {
            encoding: BinaryEncoding::new(3, 0.5),
            cost: |_: &Vec<bool>| 0.0,
        };
        assert!(run_abc(
            &problem,
            &AbcParams {
                sn: 1,
                ..Default::default()
            }
        )
        .is_err());
        assert!(run_abc(
            &problem,
            &AbcParams {
                mcn: 0,
                ..Default::default()
            }
        )
        .is_err());
        assert!(run_abc(
            &problem,
            &AbcParams {
                limit: Some(0),
                ..Default::default()
            }
        )
        .is_err());
    }
}
