//! How often a pure guesser on four-choice questions reaches a grade of
//! 7.5 under the fixed 8-answer window and under the tapered window.

use tutorweb::analytics::{simulate_session, Scheme, SimLecture, SimPersona};
use tutorweb::grading::window_size;

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let lecture = SimLecture::spread(150, -1.5, 1.5, 4);
    let guesser = SimPersona::guesser();
    for scheme in [Scheme::fixed8(), Scheme::taper_timeout()] {
        let p = &scheme.grade_policy;
        let full = (1..).find(|&n| window_size(n, p) == p.max_window).unwrap();
        let mut hits = 0;
        let mut final_sum = 0.0;
        for seed in 0..seeds {
            let r = simulate_session(&guesser, &lecture, p, &scheme.timeout_policy, 500, seed);
            hits += (r.max_grade_from(full).value() >= 7.5) as u32;
            final_sum += r.grade.value();
        }
        println!(
            "{:<14} reached 7.5 in {:>5.1}% of sessions; mean final grade {:.2}",
            scheme.name,
            100.0 * hits as f64 / seeds as f64,
            final_sum / seeds as f64
        );
    }
}
