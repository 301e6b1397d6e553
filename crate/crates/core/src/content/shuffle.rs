use super::Question;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Presentation order for a question's choices: `perm[position]` is the
/// canonical index shown at that position. Deterministic in `(q.id, seed)`.
pub fn shuffle_choices(q: &Question, seed: u64) -> Vec<usize> {
    let mut h = Sha256::new();
    h.update(q.id.as_str().as_bytes());
    h.update(seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(h.finalize().into());
    let mut perm: Vec<usize> = (0..q.choices.len()).collect();
    perm.shuffle(&mut rng);
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::Choice;

    fn question(k: usize) -> Question {
        let choices = (0..k)
            .map(|i| Choice {
                text: format!("c{i}"),
                correct: i == 0,
            })
            .collect();
        if k < 2 {
            // The constructor enforces k >= 2; build the degenerate case by hand.
            return Question {
                id: "single".into(),
                stem: "s".into(),
                choices,
                explanation: String::new(),
                image_url: None,
            };
        }
        Question::new("s", choices, "e").unwrap()
    }

    #[test]
    fn single_choice() {
        assert_eq!(shuffle_choices(&question(1), 42), vec![0]);
    }

    #[test]
    fn deterministic() {
        let q = question(5);
        assert_eq!(shuffle_choices(&q, 7), shuffle_choices(&q, 7));
    }

    #[test]
    fn always_a_permutation() {
        let q = question(6);
        for seed in 0..500 {
            let mut p = shuffle_choices(&q, seed);
            p.sort_unstable();
            assert_eq!(p, (0..6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn correct_choice_position_is_uniform() {
        // 40,000 seeds, k = 4: expected 10,000 per position, sd = sqrt(40000 * 1/4 * 3/4) ~ 86.6,
        // so +-400 is well outside a 3-sigma band.
        let q = question(4);
        let mut counts = [0usize; 4];
        for seed in 0..40_000u64 {
            let perm = shuffle_choices(&q, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let pos = perm.iter().position(|&c| c == 0).unwrap();
            counts[pos] += 1;
        }
        for c in counts {
            assert!((9_600..=10_400).contains(&c), "{counts:?}");
        }
    }
}
