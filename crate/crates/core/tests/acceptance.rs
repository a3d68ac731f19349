//! Acceptance criteria 1 to 11, one line each. Exits nonzero if any criterion fails.

fn main() {
    let seed = std::env::var("AL_ACCEPTANCE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(2024);
    let report = alh::suite::run_suite(seed);
    println!("acceptance (seed {seed})");
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    println!("{} of {} criteria passed", report.criteria.len() - failed, report.criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
