//! Bound-state counts over (w2, w3) at fixed w1, drawn as a character map,
//! with the curve on which the first level appears.

use heunwell::eigensolver::SolveOptions;
use heunwell::threshold::threshold_scan;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w1 = 5.0;
    let opts = SolveOptions {
        grid_points: 800,
        ..Default::default()
    };
    let map = threshold_scan(w1, (-30.0, 30.0), (-30.0, 30.0), 25, &opts)?;

    println!("w1 = {w1}; rows are w3 from +30 down to -30, columns w2 from -30 to +30");
    for j in (0..map.w3_axis.len()).rev() {
        let row: String = (0..map.w2_axis.len())
            .map(|i| match map.count(i, j) {
                Some(c) if c < 10 => char::from(b'0' + c as u8),
                Some(_) => '+',
                None => '?',
            })
            .collect();
        println!("{:>6.1} {row}", map.w3_axis[j]);
    }
    for curve in map.critical_curves.iter().filter(|c| c.critical) {
        let (first, last) = (curve.points[0], curve.points[curve.points.len() - 1]);
        println!(
            "first level appears along {} points from ({:.2}, {:.2}) to ({:.2}, {:.2})",
            curve.points.len(),
            first.0,
            first.1,
            last.0,
            last.1
        );
    }
    Ok(())
}
