//! A small Monte-Carlo sweep over the attachment parameters.
//!
//! Prints the fraction of samples whose sections show no curves in each
//! cell, then the average over each row.

use sectionscope::kamscan::{scan, ScanConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScanConfig {
        eps1_range: [0.0, 1.0],
        eps2_range: [0.0, 1.0],
        grid_step: 0.5,
        samples_per_cell: 4,
        t_end: 500.0,
        seed: 3,
        ..ScanConfig::default()
    };
    let result = scan(&cfg, 0)?;
    print!("eps1\\eps2");
    for e2 in &result.eps2 {
        print!("{e2:>7.2}");
    }
    println!("   mean");
    for (i, row) in result.proportions().iter().enumerate() {
        print!("{:>9.2}", result.eps1[i]);
        for p in row {
            print!("{p:>7.2}");
        }
        println!("{:>7.2}", result.marginal[i]);
    }
    Ok(())
}
