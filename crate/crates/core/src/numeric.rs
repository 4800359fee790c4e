//! Small numerical building blocks shared by the solver modules.

/// Neumaier (improved Kahan) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Bisection on a bracket `[lo, hi]` whose endpoint values `f_lo`, `f_hi`
/// have opposite signs. Stops once the bracket is narrower than `tol`.
///
/// Returns the midpoint of the final bracket. Errors from `f` abort the
/// search.
pub fn bisect<F, E>(mut f: F, mut lo: f64, mut hi: f64, mut f_lo: f64, tol: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    // 200 halvings exhaust any f64 bracket.
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Composite Simpson rule on uniformly spaced samples. Falls back to the
/// trapezoid rule on the last interval when the sample count is even.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let intervals = if (n - 1).is_multiple_of(2) { n - 1 } else { n - 2 };
            let mut acc = CompensatedSum::new();
            acc.add(values[0]);
            acc.add(values[intervals]);
            for (i, v) in values.iter().enumerate().take(intervals).skip(1) {
                acc.add(if i % 2 == 1 { 4.0 * v } else { 2.0 * v });
            }
            let mut total = acc.value() * h / 3.0;
            if intervals < n - 1 {
                total += 0.5 * h * (values[n - 2] + values[n - 1]);
            }
            total
        }
    }
}

/// `n` uniformly spaced points covering `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-13).abs() < 1e-25);
    }

    #[test]
    fn bisect_finds_sqrt_two() {
        let f = |x: f64| Ok::<_, ()>(x * x - 2.0);
        let root = bisect(f, 0.0, 2.0, -2.0, 1e-14).unwrap();
        assert!((root - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let xs = linspace(0.0, 2.0, 11);
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x - x).collect();
        assert!((simpson(&ys, 0.2) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn linspace_hits_endpoints() {
        let xs = linspace(-1.0, 1.0, 5);
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
