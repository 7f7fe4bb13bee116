use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Ranges for random hyperparameter search; lr and weight decay are log-uniform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub dropout: (f64, f64),
    pub lr_max: (f64, f64),
    pub weight_decay: (f64, f64),
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self { dropout: (0.0, 0.5), lr_max: (3.5e-4, 1.5e-3), weight_decay: (1e-5, 1e-2) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub dropout: f64,
    pub lr_max: f64,
    pub weight_decay: f64,
    pub score: f64,
}

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// Draws `trials` configurations and scores each with `objective`.
pub fn random_search<F>(trials: usize, seed: u64, space: &SearchSpace, mut objective: F) -> Result<Vec<Trial>>
where
    F: FnMut(&Trial) -> Result<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for index in 0..trials {
        let mut t = Trial {
            index,
            dropout: rng.gen_range(space.dropout.0..=space.dropout.1),
            lr_max: log_uniform(&mut rng, space.lr_max),
            weight_decay: log_uniform(&mut rng, space.weight_decay),
            score: f64::NAN,
        };
        t.score = objective(&t)?;
        out.push(t);
    }
    Ok(out)
}

pub fn best_trial(trials: &[Trial]) -> Option<&Trial> {
    trials.iter().filter(|t| t.score.is_finite()).max_by(|a, b| a.score.total_cmp(&b.score))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_stay_in_range_and_repeat() {
        let s = SearchSpace::default();
        let a = random_search(50, 3, &s, |t| Ok(-t.lr_max)).unwrap();
        assert!(a.iter().all(|t| (0.0..=0.5).contains(&t.dropout)
            && (3.5e-4..=1.5e-3).contains(&t.lr_max)
            && (1e-5..=1e-2).contains(&t.weight_decay)));
        assert_eq!(a, random_search(50, 3, &s, |t| Ok(-t.lr_max)).unwrap());
        let best = best_trial(&a).unwrap();
        assert!(a.iter().all(|t| t.lr_max >= best.lr_max));
    }
}
