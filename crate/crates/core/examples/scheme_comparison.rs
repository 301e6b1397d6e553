//! Compares taper+timeout, taper only and the fixed 8-answer window on a
//! simulated cohort of learners and guessers.
//!
//! Run: `cargo run --release --example scheme_comparison -- [students] [reps] [answers] [seed]`

use tutorweb::analytics::{compare_schemes, PopulationSpec, Scheme, SimLecture};

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let students = args.first().copied().unwrap_or(500) as usize;
    let reps = args.get(1).copied().unwrap_or(10) as usize;
    let answers = args.get(2).copied().unwrap_or(100) as usize;
    let seed = args.get(3).copied().unwrap_or(2014);

    let population = PopulationSpec { students, ..Default::default() };
    let lecture = SimLecture::spread(150, -1.5, 1.5, 4);
    let cmp = compare_schemes(&population, &lecture, &Scheme::standard(), answers, reps, seed)
        .expect("comparison runs");

    println!("{students} students x {reps} reps, {answers} answers each\n");
    println!("{:<14} {:>8} {:>8}", "scheme", "AUC", "SE");
    for s in &cmp.schemes {
        println!("{:<14} {:>8.4} {:>8.4}", s.scheme, s.auc_mean, s.auc_se);
    }
    let a = cmp.get("taper+timeout").unwrap();
    let b = cmp.get("fixed8").unwrap();
    let gap = a.auc_mean - b.auc_mean;
    let se = (a.auc_se.powi(2) + b.auc_se.powi(2)).sqrt();
    println!("\ntaper+timeout - fixed8 = {gap:.4} ({:.1} combined SE)", gap / se);

    let mastered = cmp.rows.iter().filter(|r| r.scheme == "fixed8" && r.mastered).count();
    println!("mastered: {mastered} of {}", students * reps);
}
