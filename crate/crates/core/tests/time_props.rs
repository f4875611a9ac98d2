#[path = "support/time_algebra.rs"]
mod time_algebra;

const CASES: u32 = 10_000;

fn law(name: &str) {
    let (_, f) = time_algebra::laws().into_iter().find(|(n, _)| *n == name).unwrap();
    if let Err(e) = f(CASES) {
        panic!("{name}: {e}");
    }
}

#[test]
fn monus_truncation() {
    law("monus truncation");
}

#[test]
fn delta_additivity() {
    law("delta additivity");
}

#[test]
fn mte_and_delta() {
    law("mte and delta");
}
