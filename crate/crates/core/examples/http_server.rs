//! Serves the sync API over an in-memory store with one demo lecture and
//! one student, printing their bearer token.
//!
//! Run: `cargo run --example http_server -- [port]`, then e.g.
//! `curl -X POST -H "Authorization: Bearer <token>" localhost:8080/api/lecture/demo.week1.intro/allocation`

use std::sync::Arc;
use tutorweb::content::{parse_tex_questions, LecturePath};
use tutorweb::grading::GradePolicy;
use tutorweb::pacing::TimeoutPolicy;
use tutorweb::sync::{router, LectureSettings, NewUser, SyncService};

const BANK: &str = r"\question{$2^{10}$ is}
\truechoice{1024}
\falsechoice{1000}
\falsechoice{2048}
\explanation{Ten doublings.}

\question{$\log_2 8$ is}
\falsechoice{2}
\truechoice{3}
\falsechoice{4}
\explanation{$2^3 = 8$.}
";

#[tokio::main]
async fn main() {
    let port: u16 = std::env::args().nth(1).and_then(|p| p.parse().ok()).unwrap_or(8080);
    let svc = Arc::new(SyncService::in_memory(Some("admin")));
    let path: LecturePath = "demo/week1/intro".parse().unwrap();
    let settings = LectureSettings { grade_policy: GradePolicy::default(), timeout_policy: TimeoutPolicy::default() };
    svc.import_questions(&path, parse_tex_questions(BANK).unwrap(), settings).unwrap();
    let admin = svc.authenticate("admin").unwrap();
    let token = svc
        .create_user(&admin, NewUser { id: "demo".into(), class: Some("demo".into()), tutor_of: vec![], admin: false })
        .unwrap();

    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await.expect("port is free");
    println!("listening on {}", listener.local_addr().unwrap());
    println!("student token: {token}   admin token: admin");
    axum::serve(listener, router(svc)).await.unwrap();
}
