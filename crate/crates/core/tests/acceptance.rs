use fermilab::verify::{run_each, DEFAULT_SEED};

fn main() {
    let results = run_each(DEFAULT_SEED, |c| println!("{}", c.line()));
    let failed = results.iter().filter(|c| !c.pass).count();
    println!("acceptance: {} passed, {} failed", results.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
