//! Recomputes every oracle value and rewrites `golden.json`.
//!
//!     cargo run --release --example mint_golden

#[path = "../tests/common/golden_cases.rs"]
mod golden_cases;

use adia::oracle::OracleReport;

fn main() -> adia::Result<()> {
    let mut reports = Vec::new();
    for case in golden_cases::cases() {
        let oracle = (case.oracle)()?;
        let library = (case.library)()?;
        let report = OracleReport::new(case.quantity, oracle, library, case.tolerance).with_parameters((case.parameters)());
        println!(
            "{:<48} oracle {:<24e} delta {:.2e} {}",
            report.quantity,
            report.oracle_value,
            report.abs_delta,
            if report.pass { "ok" } else { "MISMATCH" }
        );
        reports.push(report);
    }
    std::fs::write(golden_cases::GOLDEN_FILE, serde_json::to_string_pretty(&reports)? + "\n")?;
    println!("wrote {} records to {}", reports.len(), golden_cases::GOLDEN_FILE);
    Ok(())
}
