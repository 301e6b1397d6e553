//! A device answers offline, then uploads its queue in pieces, out of
//! order and more than once. The server ends up in the same state as if
//! every answer had arrived in order.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tutorweb::content::{Choice, LecturePath, Question};
use tutorweb::grading::GradePolicy;
use tutorweb::pacing::TimeoutPolicy;
use tutorweb::sync::{AnswerRecord, LectureSettings, NewUser, SyncService, UploadBatch};

fn main() {
    let svc = SyncService::in_memory(Some("admin")).with_rng_seed(1);
    let path: LecturePath = "arith/basics/add".parse().unwrap();
    let questions = (1..=12)
        .map(|i| {
            let choices = (0..3)
                .map(|d| Choice { text: (i + i + d).to_string(), correct: d == 0 })
                .collect();
            Question::new(format!("{i} + {i} = ?"), choices, format!("Double {i}.")).unwrap()
        })
        .collect();
    let settings = LectureSettings { grade_policy: GradePolicy::default(), timeout_policy: TimeoutPolicy::default() };
    svc.import_questions(&path, questions, settings).unwrap();

    let admin = svc.authenticate("admin").unwrap();
    let token = svc
        .create_user(&admin, NewUser { id: "ann".into(), class: Some("1a".into()), tutor_of: vec![], admin: false })
        .unwrap();
    let ann = svc.authenticate(&token).unwrap();
    let lecture = path.lecture_id();
    let alloc = svc.get_allocation(&"ann".into(), &lecture).unwrap();
    println!("allocated {} questions; grade {}", alloc.questions.len(), alloc.grade);

    // answered offline: every third answer wrong
    let queue: Vec<AnswerRecord> = (1..=24u64)
        .map(|seq| {
            let q = &alloc.questions[seq as usize % alloc.questions.len()];
            let right = q.choices.iter().position(|c| c.correct).unwrap();
            AnswerRecord {
                token: q.token.clone(),
                client_seq: seq,
                chosen_index: Some(if seq % 3 == 0 { (right + 1) % 3 } else { right }),
                time_taken: 6.0,
                timed_out: false,
                client_timestamp: 1_700_000_000_000 + 7_000 * seq as i64,
            }
        })
        .collect();

    let mut uploads: Vec<Vec<AnswerRecord>> = queue.chunks(5).map(|c| c.to_vec()).collect();
    uploads.push(uploads[1].clone());
    uploads.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    for batch in uploads {
        let seqs: Vec<u64> = batch.iter().map(|r| r.client_seq).collect();
        let ack = svc
            .ingest_batch(&ann, UploadBatch { student_id: "ann".into(), lecture_id: lecture.clone(), records: batch })
            .unwrap();
        let accepted = ack.statuses.iter().filter(|s| s.status == tutorweb::sync::RecordStatus::Accepted).count();
        println!("upload {seqs:?}: {accepted} new, grade {:.2} after {}", ack.grade, ack.answered);
    }

    print!("\nexport:\n{}", svc.export_answers(&admin, Some(&lecture)).unwrap().lines().take(3).collect::<Vec<_>>().join("\n"));
    println!("\n...");
}
