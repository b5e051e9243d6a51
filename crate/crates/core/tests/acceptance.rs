//! One line per criterion; exits non-zero if any fails.

use wallcross::acceptance::{run_all, Context};

fn main() {
    let outcomes = run_all(&Context::default());
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: {} passed", outcomes.len());
}
