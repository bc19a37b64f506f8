//! Index maps `r : ℕ → {0, …, N−1}` choosing which generator acts at each
//! step.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulePolicy {
    /// Independent uniform draws.
    SeededUniform { seed: u64 },
    /// `0, 1, …, N−1, 0, 1, …`.
    RoundRobin,
    /// A Markov chain on generator indices with a uniformly drawn first
    /// state. Rows of `transition` are probability vectors.
    Markov {
        transition: Vec<Vec<f64>>,
        seed: u64,
    },
    /// A fixed prefix followed by `fallback`. Without a fallback the prefix
    /// repeats forever.
    Scripted {
        prefix: Vec<usize>,
        fallback: Option<Box<SchedulePolicy>>,
    },
}

impl SchedulePolicy {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            SchedulePolicy::SeededUniform { .. } | SchedulePolicy::RoundRobin => Ok(()),
            SchedulePolicy::Markov { transition, .. } => {
                if transition.len() != n || transition.iter().any(|r| r.len() != n) {
                    return Err(Error::Schedule(format!(
                        "markov transition matrix must be {n}×{n}"
                    )));
                }
                for (i, row) in transition.iter().enumerate() {
                    if row.iter().any(|&v| !v.is_finite() || v < 0.0) {
                        return Err(Error::Schedule(format!(
                            "markov row {} has a negative or non-finite entry",
                            i + 1
                        )));
                    }
                    let s: f64 = row.iter().sum();
                    if (s - 1.0).abs() > 1e-9 {
                        return Err(Error::Schedule(format!(
                            "markov row {} sums to {s}, not 1",
                            i + 1
                        )));
                    }
                }
                Ok(())
            }
            SchedulePolicy::Scripted { prefix, fallback } => {
                if let Some(&bad) = prefix.iter().find(|&&k| k >= n) {
                    return Err(Error::Schedule(format!(
                        "scripted index {} is out of range 1..={n}",
                        bad + 1
                    )));
                }
                match fallback {
                    Some(f) => f.validate(n),
                    None if prefix.is_empty() => Err(Error::Schedule(
                        "scripted schedule needs a nonempty prefix or a fallback".into(),
                    )),
                    None => Ok(()),
                }
            }
        }
    }

    fn is_fair(&self, n: usize) -> bool {
        match self {
            SchedulePolicy::SeededUniform { .. } | SchedulePolicy::RoundRobin => true,
            SchedulePolicy::Markov { transition, .. } => irreducible(transition),
            SchedulePolicy::Scripted { prefix, fallback } => match fallback {
                Some(f) => f.is_fair(n),
                None => (0..n).all(|k| prefix.contains(&k)),
            },
        }
    }
}

/// Strong connectivity of the directed graph of positive transitions.
fn irreducible(t: &[Vec<f64>]) -> bool {
    let n = t.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let w = if forward { t[i][j] } else { t[j][i] };
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    n > 0 && reach(true) && reach(false)
}

/// A validated policy over a fixed number of generators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordSchedule {
    policy: SchedulePolicy,
    n_generators: usize,
}

impl WordSchedule {
    pub fn new(policy: SchedulePolicy, n_generators: usize) -> Result<Self> {
        if n_generators == 0 {
            return Err(Error::Schedule("need at least one generator".into()));
        }
        policy.validate(n_generators)?;
        Ok(Self {
            policy,
            n_generators,
        })
    }

    pub fn seeded_uniform(seed: u64, n_generators: usize) -> Result<Self> {
        Self::new(SchedulePolicy::SeededUniform { seed }, n_generators)
    }

    pub fn round_robin(n_generators: usize) -> Result<Self> {
        Self::new(SchedulePolicy::RoundRobin, n_generators)
    }

    /// Scripted prefix (0-based) that repeats.
    pub fn scripted(prefix: Vec<usize>, n_generators: usize) -> Result<Self> {
        Self::new(
            SchedulePolicy::Scripted {
                prefix,
                fallback: None,
            },
            n_generators,
        )
    }

    pub fn policy(&self) -> &SchedulePolicy {
        &self.policy
    }

    pub fn n_generators(&self) -> usize {
        self.n_generators
    }

    /// Whether every index is used infinitely often (almost surely, for the
    /// random policies).
    pub fn is_fair(&self) -> bool {
        self.policy.is_fair(self.n_generators)
    }

    /// The infinite index stream.
    pub fn indices(&self) -> ScheduleIter {
        ScheduleIter {
            state: State::start(&self.policy, self.n_generators),
        }
    }
}

#[derive(Debug, Clone)]
enum State {
    Uniform {
        rng: ChaCha8Rng,
        n: usize,
    },
    RoundRobin {
        next: usize,
        n: usize,
    },
    Markov {
        rng: ChaCha8Rng,
        transition: Vec<Vec<f64>>,
        current: Option<usize>,
    },
    Scripted {
        prefix: Vec<usize>,
        pos: usize,
        fallback: Option<Box<State>>,
    },
}

impl State {
    fn start(policy: &SchedulePolicy, n: usize) -> State {
        match policy {
            SchedulePolicy::SeededUniform { seed } => State::Uniform {
                rng: rng::stream(*seed, rng::SCHEDULE),
                n,
            },
            SchedulePolicy::RoundRobin => State::RoundRobin { next: 0, n },
            SchedulePolicy::Markov { transition, seed } => State::Markov {
                rng: rng::stream(*seed, rng::SCHEDULE),
                transition: transition.clone(),
                current: None,
            },
            SchedulePolicy::Scripted { prefix, fallback } => State::Scripted {
                prefix: prefix.clone(),
                pos: 0,
                fallback: fallback.as_ref().map(|f| Box::new(State::start(f, n))),
            },
        }
    }

    fn next_index(&mut self) -> usize {
        match self {
            State::Uniform { rng, n } => rng.random_range(0..*n),
            State::RoundRobin { next, n } => {
                let k = *next;
                *next = (k + 1) % *n;
                k
            }
            State::Markov {
                rng,
                transition,
                current,
            } => {
                let k = match *current {
                    None => rng.random_range(0..transition.len()),
                    Some(i) => {
                        let u: f64 = rng.random();
                        let row = &transition[i];
                        let mut acc = 0.0;
                        let mut pick = row.iter().rposition(|&w| w > 0.0).unwrap_or(0);
                        for (j, &w) in row.iter().enumerate() {
                            acc += w;
                            if u < acc && w > 0.0 {
                                pick = j;
                                break;
                            }
                        }
                        pick
                    }
                };
                *current = Some(k);
                k
            }
            State::Scripted {
                prefix,
                pos,
                fallback,
            } => {
                if *pos < prefix.len() {
                    *pos += 1;
                    return prefix[*pos - 1];
                }
                match fallback {
                    Some(f) => f.next_index(),
                    None => {
                        *pos = 1;
                        prefix[0]
                    }
                }
            }
        }
    }
}

/// Infinite iterator over generator indices.
#[derive(Debug, Clone)]
pub struct ScheduleIter {
    state: State,
}

impl Iterator for ScheduleIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        Some(self.state.next_index())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn take(s: &WordSchedule, k: usize) -> Vec<usize> {
        s.indices().take(k).collect()
    }

    #[test]
    fn round_robin_cycles() {
        let s = WordSchedule::round_robin(3).unwrap();
        assert_eq!(take(&s, 7), vec![0, 1, 2, 0, 1, 2, 0]);
        assert!(s.is_fair());
    }

    #[test]
    fn scripted_repeats_without_fallback() {
        let s = WordSchedule::scripted(vec![1], 2).unwrap();
        assert_eq!(take(&s, 3), vec![1, 1, 1]);
        assert!(!s.is_fair());
        let s = WordSchedule::scripted(vec![0, 1, 1], 2).unwrap();
        assert_eq!(take(&s, 6), vec![0, 1, 1, 0, 1, 1]);
        assert!(s.is_fair());
    }

    #[test]
    fn scripted_then_fallback() {
        let s = WordSchedule::new(
            SchedulePolicy::Scripted {
                prefix: vec![1, 1],
                fallback: Some(Box::new(SchedulePolicy::RoundRobin)),
            },
            3,
        )
        .unwrap();
        assert_eq!(take(&s, 6), vec![1, 1, 0, 1, 2, 0]);
        assert!(s.is_fair());
    }

    #[test]
    fn uniform_is_reproducible_and_fair_in_windows() {
        let n = 4;
        let s = WordSchedule::seeded_uniform(11, n).unwrap();
        let a = take(&s, 10_000);
        assert_eq!(a, take(&s, 10_000));
        assert_ne!(
            a,
            take(&WordSchedule::seeded_uniform(12, n).unwrap(), 10_000)
        );
        for w in a.windows(100 * n) {
            for k in 0..n {
                assert!(w.contains(&k));
            }
        }
    }

    #[test]
    fn markov_validation_and_fairness() {
        let t = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let s = WordSchedule::new(
            SchedulePolicy::Markov {
                transition: t,
                seed: 3,
            },
            2,
        )
        .unwrap();
        assert!(s.is_fair());
        let v = take(&s, 6);
        assert!(v.windows(2).all(|w| w[0] != w[1]));
        let absorbing = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        let s = WordSchedule::new(
            SchedulePolicy::Markov {
                transition: absorbing,
                seed: 3,
            },
            2,
        )
        .unwrap();
        assert!(!s.is_fair());
        let bad = vec![vec![0.7, 0.7], vec![0.5, 0.5]];
        assert!(WordSchedule::new(
            SchedulePolicy::Markov {
                transition: bad,
                seed: 0
            },
            2
        )
        .is_err());
    }

    #[test]
    fn rejects_bad_scripts() {
        assert!(WordSchedule::scripted(vec![2], 2).is_err());
        assert!(WordSchedule::scripted(vec![], 2).is_err());
        assert!(WordSchedule::round_robin(0).is_err());
    }
}
