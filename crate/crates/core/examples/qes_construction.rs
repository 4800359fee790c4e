//! Wells whose series terminates: pick w1, w3 and a degree N, solve for w2,
//! and compare the closed-form level with the general solver.

use heunwell::eigensolver::{find_eigenvalues, SolveOptions};
use heunwell::frobenius::SSign;
use heunwell::qes::{analytic_energy, solve_w2_for_termination};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SolveOptions::default();
    for (w1, w3, order) in [(4.0, 12.0, 0), (4.0, 8.0, 0), (4.0, 12.0, 1), (9.0, 30.0, 2)] {
        let Some(e) = analytic_energy(w1, w3, order, SSign::Plus)? else {
            println!("w1 = {w1}, w3 = {w3}, N = {order}: no admissible state");
            continue;
        };
        for sol in solve_w2_for_termination(w1, w3, order, SSign::Plus)? {
            let spectrum = find_eigenvalues(&sol.well, &opts)?;
            let closest = spectrum
                .energies
                .iter()
                .copied()
                .min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()));
            println!(
                "w1 = {w1}, w3 = {w3}, N = {order}: w2 = {:.10}  E = {e}  c_(N+1) = {:.1e}  solver {:?}",
                sol.well.w2, sol.residual, closest
            );
            println!("    polynomial {:?}", sol.polynomial);
        }
    }
    Ok(())
}
