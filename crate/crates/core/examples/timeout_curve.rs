//! The per-question time limit as a function of the current grade.

use tutorweb::grading::Grade;
use tutorweb::pacing::{timeout_seconds, TimeoutPolicy};

fn main() {
    let default = TimeoutPolicy::default();
    let narrow = TimeoutPolicy { width: 1.0, ..default };
    println!("grade  width=2  width=1");
    for i in 0..=20 {
        let g = Grade::new(i as f64 / 2.0);
        let a = timeout_seconds(g, &default).seconds().unwrap();
        let b = timeout_seconds(g, &narrow).seconds().unwrap();
        println!("{:>5.1}  {a:>7.1}  {b:>7.1}", g.value());
    }
    println!("\ndisabled: {:?}", timeout_seconds(Grade::new(5.0), &TimeoutPolicy::disabled()));
}
