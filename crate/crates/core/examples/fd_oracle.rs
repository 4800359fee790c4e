//! Finite-difference spectrum next to the series solver, for the reference well (15, 12, 1)
//! and the Pöschl-Teller limit with levels 1, 4, 9.

use heunwell::eigensolver::{find_eigenvalues, SolveOptions};
use heunwell::model::WellParameters;
use heunwell::oracle::{fd_count_negative, fd_spectrum, fd_spectrum_adaptive, FdGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (w1, w2, w3) in [(15.0, 12.0, 1.0), (0.0, -12.0, 0.0), (7.9, -1.05, -8.96)] {
        let well = WellParameters::new(w1, w2, w3)?;
        let grid = FdGrid::default();
        let plain = fd_spectrum(&well, &grid, 10)?;
        let adaptive = fd_spectrum_adaptive(&well, 0.005, 25.0, 4000.0, 10)?;
        let series = find_eigenvalues(&well, &SolveOptions::default())?;
        println!(
            "well ({w1}, {w2}, {w3}): Sturm count {} on the default box",
            fd_count_negative(&well, &grid)?
        );
        println!(
            "  {:>3} {:>16} {:>16} {:>16}",
            "n", "series", "fd (adaptive)", "fd (h = 0.00625)"
        );
        for n in 0..adaptive.len().max(series.len()) {
            let cell = |v: Option<&f64>| v.map_or("-".to_string(), |e| format!("{e:.10}"));
            println!(
                "  {n:>3} {:>16} {:>16} {:>16}",
                cell(series.energies.get(n)),
                cell(adaptive.get(n)),
                cell(plain.get(n))
            );
        }
    }
    Ok(())
}
