//! Window growth of the tapered grade, and how it differs from the fixed
//! 8-answer window on a student who starts badly and then improves.

use tutorweb::grading::{compute_grade, compute_grade_legacy, window_size, AnswerHistory, AnswerOutcome, GradePolicy};

fn main() {
    let policy = GradePolicy::default();
    println!("answers  window");
    for n in [1, 4, 8, 16, 17, 20, 30, 40, 60, 100, 500] {
        println!("{n:>7}  {:>6}", window_size(n, &policy));
    }

    // 20 wrong answers, then 40 right, then an unlucky streak of 4
    let pattern: Vec<bool> = std::iter::repeat_n(false, 20)
        .chain(std::iter::repeat_n(true, 40))
        .chain(std::iter::repeat_n(false, 4))
        .collect();
    let mut h = AnswerHistory::new();
    println!("\n  n  correct  tapered  fixed-8");
    for (i, &c) in pattern.iter().enumerate() {
        h.push(AnswerOutcome::answered(c));
        if (i + 1) % 4 == 0 {
            println!(
                "{:>3}  {:>7}  {:>7.2}  {:>7.2}",
                i + 1,
                c,
                compute_grade(&h, &policy).value(),
                compute_grade_legacy(&h).value()
            );
        }
    }

    // a heavier last answer makes the grade react faster
    let heavy = GradePolicy { last_answer_weight: 3.0, ..policy };
    println!("\nlast answer weight 3: {:.2}", compute_grade(&h, &heavy).value());
}
