#![allow(dead_code)]

use tutorweb::content::{serialize_tex_questions, Choice, Question};
use tutorweb::sync::AnswerRecord;
use tutorweb::allocation::AllocationToken;

/// `n` distinct four-choice questions; question `i` has its correct answer
/// at index `i % 4`.
pub fn questions(n: usize) -> Vec<Question> {
    (0..n)
        .map(|i| {
            let choices = (0..4)
                .map(|c| Choice { text: format!("option {c} of {i}"), correct: c == i % 4 })
                .collect();
            Question::new(format!("Question number {i}?"), choices, format!("Because {i}.")).unwrap()
        })
        .collect()
}

pub fn tex_bank(n: usize) -> String {
    serialize_tex_questions(&questions(n))
}

pub fn answer(token: &AllocationToken, seq: u64, chosen: usize, time_taken: f64) -> AnswerRecord {
    AnswerRecord {
        token: token.clone(),
        client_seq: seq,
        chosen_index: Some(chosen),
        time_taken,
        timed_out: false,
        client_timestamp: 1_700_000_000_000 + seq as i64,
    }
}
