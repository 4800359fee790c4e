//! The normalized Wronskian across the bound-state window. Its zeros are the
//! energies; the raw Wronskian does not depend on where the two series meet.

use heunwell::eigensolver::{evaluate_wronskian, SolveOptions};
use heunwell::frobenius::SBranch;
use heunwell::model::{energy_search_ceiling, WellParameters};
use heunwell::numeric::linspace;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let well = WellParameters::new(15.0, 12.0, 1.0)?;
    let opts = SolveOptions::default();
    let ceiling = energy_search_ceiling(&well);

    println!("E,W");
    let mut previous: Option<f64> = None;
    let mut zeros = Vec::new();
    for e in linspace(0.01, ceiling, 60) {
        let w = evaluate_wronskian(&well, e, opts.z_match, opts.s_branch, &opts.series)?;
        println!("{e:.4},{:.6e}", w.normalized);
        if previous.is_some_and(|p| (p >= 0.0) != (w.normalized >= 0.0)) {
            zeros.push(e);
        }
        previous = Some(w.normalized);
    }
    println!("sign changes just below E = {zeros:.3?}");

    println!("raw W at E = 1.7 for three match points:");
    for z in [0.1, 0.2, 0.35] {
        let w = evaluate_wronskian(&well, 1.7, z, SBranch::Balanced, &opts.series)?;
        println!(
            "  z = {z:<5} W = {:.12e}  terms {}+{}",
            w.raw, w.terms_left, w.terms_right
        );
    }
    Ok(())
}
