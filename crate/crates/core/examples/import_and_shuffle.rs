//! Parses a TeX question file, shows the content-hash ids and a per-seed
//! choice order, and imports the questions into a catalog twice.
//!
//! Run: `cargo run --example import_and_shuffle -- [file.tex]`

use tutorweb::content::{parse_tex_questions, shuffle_choices, Catalog, LecturePath};

const SAMPLE: &str = r"% two questions on limits
\question{What is $\lim_{x\to 0} \frac{\sin x}{x}$?}
\truechoice{$1$}
\falsechoice{$0$}
\falsechoice{$\infty$}
\falsechoice{It does not exist}
\explanation{Squeeze $\sin x / x$ between $\cos x$ and $1$.}

\question{Which of these functions is continuous at $0$?}
\falsechoice{$1/x$}
\truechoice{$|x|$}
\falsechoice{$\mathrm{sgn}(x)$}
\explanation{$|x| \to 0 = |0|$ from both sides.}
";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).expect("readable file"),
        None => SAMPLE.to_owned(),
    };
    let questions = match parse_tex_questions(&text) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("line {}: {e}", e.line());
            std::process::exit(1);
        }
    };

    for q in &questions {
        println!("{}  {}", q.id, q.stem);
        for seed in 0..3 {
            let order = shuffle_choices(q, seed);
            let shown: Vec<String> = order
                .iter()
                .map(|&i| format!("{}{}", q.choices[i].text, if q.choices[i].correct { "*" } else { "" }))
                .collect();
            println!("  seed {seed}: {}", shown.join(" | "));
        }
    }

    let mut catalog = Catalog::new();
    let path: LecturePath = "calculus/limits/intro".parse().unwrap();
    let first = catalog.import(&path, questions.clone()).unwrap();
    let again = catalog.import(&path, questions).unwrap();
    println!("\nfirst import: added {}, skipped {}", first.added, first.skipped);
    println!("re-import:    added {}, skipped {}", again.added, again.skipped);
}
