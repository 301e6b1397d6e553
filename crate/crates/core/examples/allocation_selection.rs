//! Allocates a private subset of a 500-question bank to two students and
//! shows how the next question tracks the student's grade.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::collections::HashSet;
use tutorweb::allocation::{select_next, StudentLectureState, DEFAULT_MAX_ALLOCATION};
use tutorweb::content::QuestionId;
use tutorweb::grading::Grade;

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let bank: Vec<QuestionId> = (0..500).map(|i| QuestionId::from(format!("q{i:03}").as_str())).collect();

    let mut ann = StudentLectureState::new("ann".into(), "c.t.l".into());
    let mut bob = StudentLectureState::new("bob".into(), "c.t.l".into());
    ann.allocate(&bank, DEFAULT_MAX_ALLOCATION, &mut rng).unwrap();
    bob.allocate(&bank, DEFAULT_MAX_ALLOCATION, &mut rng).unwrap();
    let a: HashSet<_> = ann.allocation.iter().map(|q| &q.question).collect();
    let shared = bob.allocation.iter().filter(|q| a.contains(&q.question)).count();
    println!("allocation size {}, shared with bob: {shared}", ann.allocation.len());
    println!("first token: {}", ann.allocation[0].token);

    // difficulty: the question number scaled into (0, 1)
    let difficulty = |q: &QuestionId| q.as_str()[1..].parse::<f64>().unwrap() / 500.0;
    for g in [0.0, 2.5, 5.0, 7.5, 10.0] {
        ann.grade = Grade::new(g);
        let picks: Vec<f64> = (0..2000)
            .map(|_| difficulty(&select_next(&ann, difficulty, &mut rng).unwrap().question))
            .collect();
        let mean = picks.iter().sum::<f64>() / picks.len() as f64;
        println!("grade {g:>4}: mean difficulty of next question {mean:.3}");
    }
}
