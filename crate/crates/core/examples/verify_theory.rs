//! Check the sufficiency, necessity and bottleneck inequalities on random
//! discrete systems by exact enumeration.

use usib::info_theory::{run_theory_suite, Cardinalities};

pub fn run_example() -> usib::Result<bool> {
    let report = run_theory_suite(40, 3, Cardinalities::default())?;
    print!("{}", report.table());
    Ok(report.passed())
}

fn main() -> usib::Result<()> {
    run_example()?;
    Ok(())
}
