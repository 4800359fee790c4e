//! The confluent Heun series on its own: coefficients, sums and a
//! terminating case.

use heunwell::heun::{
    coefficients, eval_heun, terminating_delta, termination_residual, HeunParameters, SeriesControl,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctl = SeriesControl::default();
    let hp = HeunParameters::new(1.5, 0.5, 0.5, -2.0, 0.75);
    println!("coefficients {:?}", coefficients(&hp, 8));
    for xi in [0.1, 0.5, 0.9] {
        let r = eval_heun(&hp, xi, &ctl)?;
        println!(
            "H({xi}) = {:.15}  H' = {:.15}  terms {}",
            r.value, r.derivative, r.terms_used
        );
    }

    // delta chosen so that c_1 = 0 on the N = 0 branch; then eta can be tuned
    // so the whole series collapses to c_0 = 1.
    let order = 0;
    let mut hp = hp;
    hp.delta = terminating_delta(&hp, order);
    let sum = hp.beta + hp.gamma - hp.alpha;
    hp.eta = 0.5 * hp.beta * (hp.alpha - hp.gamma) - 0.5 * sum;
    println!(
        "delta = {}  c_1 = {:e}",
        hp.delta,
        termination_residual(&hp, order)
    );
    println!("terminating coefficients {:?}", coefficients(&hp, 6));
    Ok(())
}
