//! Confluent Heun function by its power series about `ξ = 0`.
//!
//! `H(α, β, γ, δ, η; ξ) = Σ c_n ξⁿ` solves
//!
//! ```text
//! H'' + [α + (1+β)/ξ + (1+γ)/(ξ-1)] H' + (μξ + ν)/(ξ(ξ-1)) H = 0
//! ```
//!
//! with `μ = δ + α(β+γ+2)/2` and `ν = η + β/2 + (γ-α)(β+1)/2`. The
//! coefficients obey `A_n c_n = B_n c_{n-1} + C_n c_{n-2}` with `c_{-1} = 0`
//! and `c_0 = 1`. The series converges for `|ξ| < 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeunParameters {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eta: f64,
}

impl HeunParameters {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, eta: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            delta,
            eta,
        }
    }

    pub fn mu(&self) -> f64 {
        self.delta + self.alpha * (self.beta + self.gamma + 2.0) / 2.0
    }

    pub fn nu(&self) -> f64 {
        self.eta + self.beta / 2.0 + (self.gamma - self.alpha) * (self.beta + 1.0) / 2.0
    }
}

/// Truncation control for [`eval_heun`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub max_terms: usize,
    pub tail_tol: f64,
    /// Number of consecutive small terms required before stopping.
    pub tail_window: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            max_terms: 5000,
            tail_tol: 1e-14,
            tail_window: 4,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if self.tail_window < 2 || self.max_terms < self.tail_window {
            return Err(Error::Config(format!(
                "series control needs max_terms >= tail_window >= 2 (got {} and {})",
                self.max_terms, self.tail_window
            )));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::Config(format!(
                "tail_tol must be > 0, got {}",
                self.tail_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    /// `dH/dξ`.
    pub derivative: f64,
    pub terms_used: usize,
    /// Largest term magnitude inside the final window.
    pub tail_estimate: f64,
    pub converged: bool,
}

impl SeriesResult {
    /// Turns a non-converged result into [`Error::NotConverged`].
    pub fn checked(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                terms: self.terms_used,
                tail: self.tail_estimate,
            })
        }
    }
}

/// `(A_n, B_n, C_n)` for `n ≥ 1`.
///
/// `C_n` uses the expanded numerator `δ + α((β+γ)/2 + n - 1)` so that
/// `α = 0` needs no special casing.
pub fn recurrence_coeffs(hp: &HeunParameters, n: usize) -> (f64, f64, f64) {
    debug_assert!(n >= 1);
    let HeunParameters {
        alpha,
        beta,
        gamma,
        delta,
        eta,
    } = *hp;
    let nf = n as f64;
    let a = 1.0 + beta / nf;
    let sum = beta + gamma - alpha;
    let b = 1.0 + (sum - 1.0) / nf + (eta - 0.5 * sum - 0.5 * beta * (alpha - gamma)) / (nf * nf);
    let c = (delta + alpha * (0.5 * (beta + gamma) + nf - 1.0)) / (nf * nf);
    (a, b, c)
}

/// Iterator over the series coefficients `c_0, c_1, …`.
#[derive(Debug, Clone)]
pub struct Coefficients {
    hp: HeunParameters,
    n: usize,
    prev: f64,
    prev2: f64,
}

impl Iterator for Coefficients {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let c = if self.n == 0 {
            1.0
        } else {
            let (a, b, c) = recurrence_coeffs(&self.hp, self.n);
            (b * self.prev + c * self.prev2) / a
        };
        self.prev2 = self.prev;
        self.prev = c;
        self.n += 1;
        Some(c)
    }
}

pub fn coefficient_iter(hp: &HeunParameters) -> Coefficients {
    Coefficients {
        hp: *hp,
        n: 0,
        prev: 0.0,
        prev2: 0.0,
    }
}

/// The first `count` coefficients `c_0 … c_{count-1}`.
pub fn coefficients(hp: &HeunParameters, count: usize) -> Vec<f64> {
    coefficient_iter(hp).take(count).collect()
}

fn check_beta(hp: &HeunParameters) -> Result<()> {
    if !(hp.beta > -1.0) {
        return Err(Error::Domain(format!(
            "series branch needs beta > -1, got {}",
            hp.beta
        )));
    }
    Ok(())
}

/// Sums the series and its term-wise derivative at `xi`.
///
/// Stops once `tail_window` consecutive terms of both the value and the
/// derivative series fall below `tail_tol · max(1, |partial sum|)`. When
/// `max_terms` runs out the partial sums are returned with
/// `converged = false`.
pub fn eval_heun(hp: &HeunParameters, xi: f64, ctl: &SeriesControl) -> Result<SeriesResult> {
    if !(xi.abs() < 1.0) {
        return Err(Error::Domain(format!("|xi| must be < 1, got {xi}")));
    }
    check_beta(hp)?;
    ctl.validate()?;

    let mut value = CompensatedSum::new();
    let mut derivative = CompensatedSum::new();
    value.add(1.0);

    let mut coeffs = coefficient_iter(hp);
    coeffs.next();
    // ξ^(n-1) for the current n.
    let mut power_below = 1.0;
    let mut small_run = 0usize;
    let mut window_max = 0.0f64;
    let mut terms_used = 1;

    for n in 1..ctl.max_terms {
        let c = coeffs.next().expect("coefficient iterator is infinite");
        let dterm = n as f64 * c * power_below;
        power_below *= xi;
        let term = c * power_below;
        value.add(term);
        derivative.add(dterm);
        terms_used = n + 1;

        let v = value.value();
        let d = derivative.value();
        if !(v.is_finite() && d.is_finite()) {
            return Ok(SeriesResult {
                value: v,
                derivative: d,
                terms_used,
                tail_estimate: f64::INFINITY,
                converged: false,
            });
        }
        let small =
            term.abs() <= ctl.tail_tol * v.abs().max(1.0) && dterm.abs() <= ctl.tail_tol * d.abs().max(1.0);
        if small {
            small_run += 1;
            window_max = window_max.max(term.abs());
            if small_run >= ctl.tail_window {
                return Ok(SeriesResult {
                    value: v,
                    derivative: d,
                    terms_used,
                    tail_estimate: window_max,
                    converged: true,
                });
            }
        } else {
            small_run = 0;
            window_max = 0.0;
        }
    }

    Ok(SeriesResult {
        value: value.value(),
        derivative: derivative.value(),
        terms_used,
        tail_estimate: window_max.max(f64::EPSILON),
        converged: false,
    })
}

/// `c_{N+1}` from the recurrence, unnormalized.
///
/// Together with `δ = -α(N + 1 + (β+γ)/2)` (which forces `C_{N+2} = 0`)
/// a vanishing residual means the series truncates to a degree-`N`
/// polynomial.
pub fn termination_residual(hp: &HeunParameters, order: usize) -> f64 {
    coefficient_iter(hp)
        .nth(order + 1)
        .expect("coefficient iterator is infinite")
}

/// Value of `δ` that makes `C_{N+2}` vanish.
pub fn terminating_delta(hp: &HeunParameters, order: usize) -> f64 {
    -hp.alpha * (order as f64 + 1.0 + 0.5 * (hp.beta + hp.gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrence_coefficients_at_zero_parameters() {
        let zero = HeunParameters::new(0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(recurrence_coeffs(&zero, 1), (1.0, 0.0, 0.0));
        let hp = HeunParameters { beta: 1.0, ..zero };
        assert_eq!(recurrence_coeffs(&hp, 2).0, 1.5);
        let hp = HeunParameters { delta: 2.0, ..zero };
        assert!((recurrence_coeffs(&hp, 3).2 - 2.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn c_n_matches_quotient_form_when_alpha_nonzero() {
        let hp = HeunParameters::new(1.7, 0.4, -0.3, 2.2, 0.9);
        for n in 1..10 {
            let nf = n as f64;
            let quotient =
                hp.alpha / (nf * nf) * (hp.delta / hp.alpha + (hp.beta + hp.gamma) / 2.0 + nf - 1.0);
            assert!((recurrence_coeffs(&hp, n).2 - quotient).abs() < 1e-14);
        }
    }

    #[test]
    fn value_at_origin() {
        let hp = HeunParameters::new(1.3, 0.5, 0.2, -0.7, 2.0);
        let r = eval_heun(&hp, 0.0, &SeriesControl::default()).unwrap();
        let (a1, b1, _) = recurrence_coeffs(&hp, 1);
        assert_eq!(r.value, 1.0);
        assert!((r.derivative - b1 / a1).abs() < 1e-15);
        assert!(r.converged);
    }

    #[test]
    fn all_zero_parameters_give_constant() {
        let zero = HeunParameters::new(0.0, 0.0, 0.0, 0.0, 0.0);
        let r = eval_heun(&zero, 0.7, &SeriesControl::default()).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.derivative, 0.0);
        assert!(r.converged);
        assert_eq!(termination_residual(&zero, 0), 0.0);
    }

    #[test]
    fn domain_errors() {
        let hp = HeunParameters::new(0.0, 0.0, 0.0, 0.0, 0.0);
        let ctl = SeriesControl::default();
        assert!(matches!(eval_heun(&hp, 1.0, &ctl), Err(Error::Domain(_))));
        assert!(matches!(eval_heun(&hp, -1.2, &ctl), Err(Error::Domain(_))));
        let bad = HeunParameters { beta: -1.0, ..hp };
        assert!(matches!(eval_heun(&bad, 0.5, &ctl), Err(Error::Domain(_))));
        let bad_ctl = SeriesControl {
            tail_window: 1,
            ..ctl
        };
        assert!(eval_heun(&hp, 0.5, &bad_ctl).is_err());
    }

    #[test]
    fn term_cap_reports_not_converged() {
        let hp = HeunParameters::new(3.0, 0.5, 0.5, 1.0, 2.0);
        let ctl = SeriesControl {
            max_terms: 8,
            ..Default::default()
        };
        let r = eval_heun(&hp, 0.95, &ctl).unwrap();
        assert!(!r.converged);
        assert_eq!(r.terms_used, 8);
        assert!(matches!(r.checked(), Err(Error::NotConverged { terms: 8, .. })));
    }

    #[test]
    fn converged_tail_is_below_tolerance() {
        let hp = HeunParameters::new(-7.0, 1.1, 1.1, -2.0, -10.0);
        let ctl = SeriesControl::default();
        for &xi in &[0.1, 0.4, 0.6, 0.8] {
            let r = eval_heun(&hp, xi, &ctl).unwrap();
            assert!(r.converged);
            assert!(r.tail_estimate <= ctl.tail_tol * r.value.abs().max(1.0));
        }
    }

    #[test]
    fn terminating_delta_truncates_once_residual_vanishes() {
        // N = 0: c1 = B1/A1, so choose eta to make B1 vanish.
        let mut hp = HeunParameters::new(2.0, 0.6, 0.6, 0.0, 0.0);
        hp.delta = terminating_delta(&hp, 0);
        let (_, b1, _) = recurrence_coeffs(&hp, 1);
        hp.eta -= b1;
        assert!(termination_residual(&hp, 0).abs() < 1e-14);
        let cs = coefficients(&hp, 12);
        assert!(cs[1..].iter().all(|c| c.abs() < 1e-14), "{cs:?}");
    }
}
