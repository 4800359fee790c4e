//! Bound-state energies of an asymmetric double well.
//!
//! cargo run --release --example solve_spectrum -- 15 12 1

use heunwell::eigensolver::{find_eigenvalues, SolveOptions};
use heunwell::model::{energy_search_ceiling, potential_minimum, WellParameters, DEFAULT_Z_CAP};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse())
        .collect::<Result<_, _>>()?;
    let (w1, w2, w3) = match args[..] {
        [a, b, c] => (a, b, c),
        [] => (15.0, 12.0, 1.0),
        _ => return Err("expected three numbers: w1 w2 w3".into()),
    };
    let well = WellParameters::new(w1, w2, w3)?;
    let (z_min, u_min) = potential_minimum(&well, DEFAULT_Z_CAP);
    println!("well ({w1}, {w2}, {w3}): U_min = {u_min:.6} at z = {z_min:.4}");
    println!("scanning E in (0, {:.4}]", energy_search_ceiling(&well));

    let res = find_eigenvalues(&well, &SolveOptions::default())?;
    if res.is_empty() {
        println!("no bound states");
    }
    for (n, (e, w)) in res.energies.iter().zip(&res.wronskian_residuals).enumerate() {
        println!("E{n} = {e:.10}   |W| = {w:.1e}");
    }
    for w in &res.diagnostics.warnings {
        eprintln!("warning: {w}");
    }

    // The same well given in dimensional form: w_i = L² V_i.
    let dimensional = WellParameters::from_dimensional(w1 / 4.0, w2 / 4.0, w3 / 4.0, 2.0)?;
    let again = find_eigenvalues(&dimensional, &SolveOptions::default())?;
    let width = dimensional.width().unwrap_or(1.0);
    for (n, e) in again.energies.iter().enumerate() {
        println!(
            "eps{n} = {:.10} (L = {width})",
            heunwell::model::Energy(*e).epsilon(width)
        );
    }
    Ok(())
}
