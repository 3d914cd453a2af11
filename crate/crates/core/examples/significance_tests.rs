// Student-t tail, t-tests, Pearson correlation and a least-squares fit.

use std::error::Error;

use vocabprobe::stats::{self, TTestVariant};

// Printed accuracy grids for 18th- and 20th-century works, widths 64..512 by
// squeeze ratios 1/2..1/16.
const EARLY: [f64; 16] = [
    0.801, 0.731, 0.608, 0.406, 0.814, 0.790, 0.739, 0.620, 0.803, 0.808, 0.790, 0.745, 0.795, 0.800, 0.802, 0.786,
];
const LATE: [f64; 16] = [
    0.855, 0.831, 0.783, 0.663, 0.845, 0.839, 0.832, 0.788, 0.836, 0.840, 0.836, 0.831, 0.838, 0.839, 0.837, 0.836,
];

pub fn run_example() -> Result<(), Box<dyn Error>> {
    println!("P(T > 1 | df 1) = {:.6}", stats::student_t_sf(1.0, 1.0));
    println!("P(T > 2 | df 2) = {:.6}", stats::student_t_sf(2.0, 2.0));

    for variant in [TTestVariant::Pooled, TTestVariant::Welch] {
        let r = stats::t_test(&EARLY, &LATE, variant)?;
        println!("{variant:?}: t = {:.4}, df = {:.2}, p = {:.4}", r.t_statistic, r.degrees_of_freedom, r.p_value);
    }

    let x: Vec<f64> = (1..=10).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0 + if *v as i32 % 2 == 0 { 0.3 } else { -0.3 }).collect();
    let c = stats::pearson(&x, &y)?;
    let fit = stats::linear_fit(&x, &y)?;
    println!("r = {:.4} (p {:.2e}), y = {:.3} x + {:.3}, r2 {:.4}", c.r, c.p_value, fit.slope, fit.intercept, fit.r_squared);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
