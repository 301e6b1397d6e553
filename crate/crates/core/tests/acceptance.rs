//! Acceptance gate. Prints one PASS/FAIL line per criterion with the
//! measured value, its tolerance and the runtime against its budget, and
//! exits non-zero if any criterion fails.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use std::collections::HashSet;
use std::time::{Duration, Instant};
use tutorweb::allocation::{AllocationToken, StudentId};
use tutorweb::analytics::{
    compare_schemes, fit_pass_probability, simulate_session, LogisticFit, PopulationSpec, Scheme, SimLecture,
    SimPersona,
};
use tutorweb::content::{Choice, LectureId, LecturePath, Question};
use tutorweb::grading::{compute_grade, window_size, AnswerHistory, AnswerOutcome, GradePolicy, GradeTracker};
use tutorweb::pacing::{timeout_seconds, Timeout, TimeoutPolicy};
use tutorweb::grading::Grade;
use tutorweb::sync::{
    AnswerRecord, Caller, FileJournal, LectureSettings, NewUser, RecordStatus, SyncService, UploadBatch,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---- grading -------------------------------------------------------------

fn oracle_window(n: usize) -> usize {
    match n {
        0..=7 => n,
        8..=16 => 8,
        _ => (n / 2).clamp(8, 30),
    }
}

fn oracle_grade(correct: &[bool]) -> f64 {
    let w = oracle_window(correct.len());
    if w == 0 {
        return 0.0;
    }
    let tail = &correct[correct.len() - w..];
    10.0 * (tail.iter().filter(|&&c| c).count() as f64 / w as f64)
}

fn grading_oracle() -> Outcome {
    let p = GradePolicy::default();
    let anchors = [(16, 8), (60, 30), (61, 30), (100, 30), (1000, 30), (100_000, 30)];
    for (n, w) in anchors {
        if window_size(n, &p) != w {
            return Err(format!("window_size({n}) = {} (expected {w})", window_size(n, &p)));
        }
    }
    for n in 0..5000 {
        if window_size(n, &p) != oracle_window(n) {
            return Err(format!("window_size({n}) disagrees with the closed form"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20140101);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(0..=200);
        let acc = rng.random_range(0.0..1.0);
        let outcomes: Vec<AnswerOutcome> = (0..n)
            .map(|_| {
                let timed_out = rng.random_bool(0.1);
                AnswerOutcome::new(rng.random_bool(acc), timed_out, 5.0)
            })
            .collect();
        let effective: Vec<bool> = outcomes.iter().map(|o| o.correct && !o.timed_out).collect();
        let expect = oracle_grade(&effective);
        let h = AnswerHistory::from(outcomes);
        let mut tracker = GradeTracker::new(p);
        let mut tracked = Grade::ZERO;
        for &c in &effective {
            tracked = tracker.push(c);
        }
        if compute_grade(&h, &p).value() != expect || tracked.value() != expect {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("10^4 histories, {mismatches} mismatches (exact equality); anchors w(16)=8 w(60)=30 w(>=60)=30"))
}

// ---- pacing --------------------------------------------------------------

fn secs(t: Timeout) -> f64 {
    t.seconds().unwrap_or(f64::INFINITY)
}

fn pacing_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut policies = vec![TimeoutPolicy::default()];
    for _ in 0..200 {
        let t_min = rng.random_range(1.0..60.0);
        policies.push(TimeoutPolicy {
            enabled: true,
            t_min,
            t_max: t_min + rng.random_range(0.0..300.0),
            g_min: rng.random_range(0.0..10.0),
            width: rng.random_range(0.1..10.0),
        });
    }
    let mut worst_sym: f64 = 0.0;
    for p in &policies {
        let at_min = secs(timeout_seconds(Grade::new(p.g_min), p));
        if at_min != p.t_min {
            return Err(format!("t(gMin) = {at_min} != tMin = {}", p.t_min));
        }
        for i in 0..=1000 {
            let g = i as f64 / 100.0;
            let t = secs(timeout_seconds(Grade::new(g), p));
            if !(p.t_min <= t && t <= p.t_max) {
                return Err(format!("t({g}) = {t} outside [{}, {}]", p.t_min, p.t_max));
            }
            let d = (g - p.g_min).abs();
            let (lo, hi) = (p.g_min - d, p.g_min + d);
            if lo >= 0.0 && hi <= 10.0 {
                let a = secs(timeout_seconds(Grade::new(lo), p));
                let b = secs(timeout_seconds(Grade::new(hi), p));
                worst_sym = worst_sym.max((a - b).abs());
            }
        }
    }
    if worst_sym >= 1e-9 {
        return Err(format!("symmetry error {worst_sym:e} >= 1e-9"));
    }
    // degenerate limits
    let flat = TimeoutPolicy { t_max: 42.0, t_min: 42.0, ..TimeoutPolicy::default() };
    let constant = TimeoutPolicy::constant(30.0);
    for i in 0..=100 {
        let g = Grade::new(i as f64 / 10.0);
        if secs(timeout_seconds(g, &flat)) != 42.0 || secs(timeout_seconds(g, &constant)) != 30.0 {
            return Err("constant limit is not constant".into());
        }
        if timeout_seconds(g, &TimeoutPolicy::disabled()) != Timeout::Unlimited {
            return Err("disabled policy is not unlimited".into());
        }
    }
    check(
        true,
        format!("{} policies: t(gMin)=tMin exactly, bounds hold, max symmetry error {worst_sym:.1e} (< 1e-9), constant/disabled degenerate", policies.len()),
    )
}

// ---- guessing resistance -------------------------------------------------

fn guessing_resistance() -> Outcome {
    // Each scheme is read once its window has reached full size (n = 8
    // for fixed-8, n = 60 for the taper); before that the taper shares
    // fixed-8's short windows.
    let full_window = |p: &GradePolicy| (1..).find(|&n| window_size(n, p) == p.max_window).unwrap();
    let lecture = SimLecture::spread(150, -1.5, 1.5, 4);
    let guesser = SimPersona::guesser();
    let rate = |s: &Scheme| {
        let from = full_window(&s.grade_policy);
        let hits = (0..200u64)
            .filter(|&seed| {
                let r = simulate_session(&guesser, &lecture, &s.grade_policy, &s.timeout_policy, 500, seed);
                r.max_grade_from(from).value() >= 7.5
            })
            .count();
        (hits as f64 / 200.0, from)
    };
    let (fixed, f_from) = rate(&Scheme::fixed8());
    let (taper, t_from) = rate(&Scheme::taper_timeout());
    check(
        fixed > 0.5 && taper < 0.01,
        format!("P(grade >= 7.5 within 500 answers, k=4, 200 seeds): fixed-8 {fixed:.3} from n={f_from} (> 0.5), taper {taper:.3} from n={t_from} (< 0.01)"),
    )
}

// ---- scheme consistency --------------------------------------------------

fn scheme_consistency() -> Outcome {
    let lecture = SimLecture::spread(150, -1.5, 1.5, 4);
    let schemes = [Scheme::taper_timeout(), Scheme::fixed8()];
    let cmp = compare_schemes(&PopulationSpec::default(), &lecture, &schemes, 100, 10, 2014).map_err(|e| e.to_string())?;
    let a = cmp.get("taper+timeout").unwrap();
    let b = cmp.get("fixed8").unwrap();
    let gap = a.auc_mean - b.auc_mean;
    let se = (a.auc_se.powi(2) + b.auc_se.powi(2)).sqrt();
    check(
        gap > 2.0 * se,
        format!(
            "500 students, 40% guessers, 10 reps: AUC taper+timeout {:.4}, fixed-8 {:.4}, gap {gap:.4} = {:.1} SE (> 2 SE)",
            a.auc_mean,
            b.auc_mean,
            gap / se
        ),
    )
}

// ---- logistic fit --------------------------------------------------------

fn logistic_recovery() -> Outcome {
    let truth = LogisticFit { beta0: -5.0, beta1: 1.0, converged: true, iterations: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts: Vec<(f64, bool)> = (0..100_000)
        .map(|_| {
            let g = rng.random_range(0.0..10.0);
            (g, rng.random_bool(truth.probability(g)))
        })
        .collect();
    let fit = fit_pass_probability(&pts).map_err(|e| e.to_string())?;
    let e0 = (fit.beta0 - truth.beta0).abs() / truth.beta0.abs();
    let e1 = (fit.beta1 - truth.beta1).abs() / truth.beta1.abs();

    let mut sym = Vec::new();
    for g in 0..=10 {
        for _ in 0..5 {
            sym.push((g as f64, true));
            sym.push((g as f64, false));
        }
    }
    let flat = fit_pass_probability(&sym).map_err(|e| e.to_string())?;

    let grid: Vec<f64> = (0..=1000).map(|i| fit.probability(i as f64 / 100.0)).collect();
    let monotone = grid.windows(2).all(|w| w[1] > w[0]);
    let (p0, p10) = (grid[0], grid[1000]);
    check(
        e0 < 0.05 && e1 < 0.05 && flat.beta1.abs() < 1e-6 && monotone && p0 < 0.01 && p10 > 0.99,
        format!(
            "10^5 points: beta0 {:.4} ({:.2}% off), beta1 {:.4} ({:.2}% off) (< 5%); symmetric |beta1| {:.1e} (< 1e-6); monotone {monotone}, P(0) {p0:.4} (< 0.01), P(10) {p10:.4} (> 0.99)",
            fit.beta0,
            100.0 * e0,
            fit.beta1,
            100.0 * e1,
            flat.beta1.abs()
        ),
    )
}

// ---- sync protocol -------------------------------------------------------

fn bank(n: usize) -> Vec<Question> {
    (0..n)
        .map(|i| {
            let choices = (0..4).map(|c| Choice { text: format!("{c}/{i}"), correct: c == i % 4 }).collect();
            Question::new(format!("q{i}"), choices, "e").unwrap()
        })
        .collect()
}

fn settings() -> LectureSettings {
    LectureSettings { grade_policy: GradePolicy::default(), timeout_policy: TimeoutPolicy::default() }
}

fn setup(svc: &SyncService, students: &[&str]) -> (LectureId, Vec<Caller>) {
    let path: LecturePath = "a/b/c".parse().unwrap();
    svc.import_questions(&path, bank(40), settings()).unwrap();
    let admin = svc.authenticate("root").unwrap();
    let callers = students
        .iter()
        .map(|s| {
            let t = svc
                .create_user(&admin, NewUser { id: (*s).into(), class: None, tutor_of: vec![], admin: false })
                .unwrap();
            svc.authenticate(&t).unwrap()
        })
        .collect();
    (path.lecture_id(), callers)
}

fn device_session(svc: &SyncService, student: &StudentId, lecture: &LectureId, n: u64, seed: u64) -> (Vec<AnswerRecord>, Vec<bool>) {
    let alloc = svc.get_allocation(student, lecture).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut correct = Vec::new();
    let recs = (1..=n)
        .map(|seq| {
            let q = &alloc.questions[rng.random_range(0..alloc.questions.len())];
            let chosen = rng.random_range(0..4);
            correct.push(q.choices[chosen].correct);
            AnswerRecord {
                token: q.token.clone(),
                client_seq: seq,
                chosen_index: Some(chosen),
                time_taken: rng.random_range(1.0..10.0),
                timed_out: false,
                client_timestamp: seq as i64,
            }
        })
        .collect();
    (recs, correct)
}

fn upload(svc: &SyncService, who: &Caller, student: &StudentId, lecture: &LectureId, records: Vec<AnswerRecord>) -> tutorweb::sync::Ack {
    svc.ingest_batch(who, UploadBatch { student_id: student.clone(), lecture_id: lecture.clone(), records })
        .unwrap()
}

fn sync_suite() -> Outcome {
    let ann = StudentId::from("ann");
    // duplicated and reordered deliveries
    for seed in 0..50u64 {
        let svc = SyncService::in_memory(Some("root")).with_rng_seed(seed);
        let (lec, who) = setup(&svc, &["ann"]);
        let (recs, correct) = device_session(&svc, &ann, &lec, 60, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut batches: Vec<Vec<AnswerRecord>> = recs.chunks(rng.random_range(1..8)).map(|c| c.to_vec()).collect();
        let extra: Vec<_> = batches.choose_multiple(&mut rng, 5).cloned().collect();
        batches.extend(extra);
        batches.shuffle(&mut rng);
        let mut ack = None;
        for b in batches {
            ack = Some(upload(&svc, &who[0], &ann, &lec, b));
        }
        let ack = ack.unwrap();
        let expect = oracle_grade(&correct);
        if ack.answered != 60 || ack.grade != expect {
            return Err(format!("seed {seed}: answered {} grade {} vs oracle 60 / {expect}", ack.answered, ack.grade));
        }
    }
    // crash between batches, then the device resends everything
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (lec, recs, correct) = {
        let (j, entries) = FileJournal::open(dir.path()).map_err(|e| e.to_string())?;
        let svc = SyncService::open(Box::new(j), entries, Some("root")).map_err(|e| e.to_string())?;
        let (lec, who) = setup(&svc, &["ann"]);
        let (recs, correct) = device_session(&svc, &ann, &lec, 60, 99);
        for b in recs[..37].chunks(4) {
            upload(&svc, &who[0], &ann, &lec, b.to_vec());
        }
        (lec, recs, correct)
    };
    let (j, entries) = FileJournal::open(dir.path()).map_err(|e| e.to_string())?;
    let svc = SyncService::open(Box::new(j), entries, Some("root")).map_err(|e| e.to_string())?;
    let recovered = svc.stored_answers(&ann, &lec).len();
    let ack = upload(&svc, &Caller::User(ann.clone()), &ann, &lec, recs);
    if recovered != 37 || ack.answered != 60 || ack.grade != oracle_grade(&correct) {
        return Err(format!("crash replay: recovered {recovered}/37, answered {}, grade {}", ack.answered, ack.grade));
    }

    // token uniqueness
    let mut rng = ChaCha20Rng::from_os_rng();
    let mut seen = HashSet::with_capacity(1_000_000);
    for _ in 0..1_000_000 {
        let t = AllocationToken::generate(&mut rng);
        if t.as_str().len() != AllocationToken::LEN || !seen.insert(t) {
            return Err("duplicate or malformed token".into());
        }
    }

    // cross-student token use
    let svc = SyncService::in_memory(Some("root"));
    let (lec, who) = setup(&svc, &["ann", "bob"]);
    let bob = StudentId::from("bob");
    let (bob_recs, _) = device_session(&svc, &bob, &lec, 3, 1);
    svc.get_allocation(&ann, &lec).unwrap();
    let ack = upload(&svc, &who[0], &ann, &lec, bob_recs);
    let all_rejected = ack.statuses.iter().all(|s| s.status == RecordStatus::rejected("unknown_token"));
    if !all_rejected || ack.answered != 0 {
        return Err("answer on another student's token was accepted".into());
    }
    check(
        true,
        "50 duplicated+reordered deliveries and a crash-replay match the in-order oracle; 10^6 unique tokens; cross-student tokens rejected".into(),
    )
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("grading oracle suite", Duration::from_secs(10), grading_oracle),
        ("pacing suite", Duration::from_secs(1), pacing_suite),
        ("guessing resistance", Duration::from_secs(60), guessing_resistance),
        ("scheme consistency", Duration::from_secs(300), scheme_consistency),
        ("logistic fit recovery", Duration::from_secs(60), logistic_recovery),
        ("sync protocol suite", Duration::from_secs(120), sync_suite),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let in_time = took <= budget;
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {name}: {detail} [{:.2}s / {}s budget{}]",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
