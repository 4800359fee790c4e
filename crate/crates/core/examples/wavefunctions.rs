//! Normalized eigenfunctions, their node counts and, for the symmetric
//! well, their parity.

use heunwell::eigensolver::{assemble_wavefunction, find_eigenvalues, SolveOptions};
use heunwell::model::WellParameters;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SolveOptions::default();
    for (w1, w2, w3) in [(15.0, 12.0, 1.0), (15.0, 12.0, 0.0)] {
        let well = WellParameters::new(w1, w2, w3)?;
        println!("well ({w1}, {w2}, {w3})");
        for e in find_eigenvalues(&well, &opts)?.energies {
            let wave = assemble_wavefunction(&well, e, &opts)?;
            let signs: Vec<bool> = wave
                .psi
                .iter()
                .filter(|v| v.abs() > 1e-6)
                .map(|v| *v > 0.0)
                .collect();
            let nodes = signs.windows(2).filter(|s| s[0] != s[1]).count();
            let n = wave.psi.len();
            let parity = (0..n)
                .map(|i| (wave.psi[i].abs() - wave.psi[n - 1 - i].abs()).abs())
                .fold(0.0, f64::max);
            let peak = wave
                .psi
                .iter()
                .zip(&wave.z)
                .max_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
                .map(|p| *p.1);
            println!(
                "  E = {e:.6}  nodes {nodes}  norm {:.10}  peak at z = {:.3}  max||psi(z)|-|psi(-z)|| = {parity:.1e}",
                wave.norm(),
                peak.unwrap_or(0.0)
            );
        }
    }
    Ok(())
}
