//! Shell series with certified tails.

use std::ops::Add;

use crate::error::{Error, Result};

/// Hard cap on the number of shells any single series may sum.
pub(crate) const MAX_SHELLS: i64 = 1_000_000;

/// Pairwise (cascade) summation in the given order.
pub fn pairwise_sum<T: Copy + Add<Output = T> + Default>(terms: &[T]) -> T {
    match terms.len() {
        0 => T::default(),
        1 => terms[0],
        len if len <= 8 => terms[1..].iter().fold(terms[0], |acc, &x| acc + x),
        len => {
            let (lo, hi) = terms.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// `ln` of the majorant term `p^{n j} exp(-tau p^{j beta})`.
pub(crate) fn ln_majorant_term(ln_p: f64, n: f64, beta: f64, tau: f64, j: i64) -> f64 {
    n * j as f64 * ln_p - tau * (beta * j as f64 * ln_p).exp()
}

/// Certified bound on `sum_{j > last} p^{n j} exp(-tau p^{j beta})`, or `None`
/// when the term ratio at `last + 1` is not yet below one.
///
/// The ratio of consecutive majorant terms is
/// `p^n exp(-tau p^{j beta} (p^beta - 1))`, which decreases in `j`, so once it
/// drops below one the tail is dominated by a geometric series.
pub(crate) fn exp_tail_bound(ln_p: f64, n: f64, beta: f64, tau: f64, last: i64) -> Option<f64> {
    let j = last + 1;
    let ln_ratio = n * ln_p - tau * (beta * j as f64 * ln_p).exp() * (beta * ln_p).exp_m1();
    if ln_ratio >= 0.0 {
        return None;
    }
    let first = ln_majorant_term(ln_p, n, beta, tau, j).exp();
    Some(first / -ln_ratio.exp_m1())
}

/// Result of summing `sum_{j >= start} p^{n j} exp(-t A(p^j))`.
#[derive(Debug, Clone)]
pub(crate) struct ExpSeries {
    pub sum: f64,
    pub tail: f64,
    /// Last shell summed explicitly.
    pub last: i64,
}

/// Sums `p^{n j} exp(-t A(p^j))` for `j = start, start + 1, ...` until the
/// certified tail drops to `tol` or `stop` is reached (inclusive). When `stop`
/// is hit first the returned tail is zero.
///
/// The tail uses `A(p^j) >= c0 p^{j beta}`, valid for `j >= 1`.
pub(crate) fn exp_shell_series(
    ln_p: f64,
    n: f64,
    beta: f64,
    c0: f64,
    t: f64,
    start: i64,
    stop: Option<i64>,
    tol: f64,
    mut eval: impl FnMut(i64) -> Result<f64>,
) -> Result<ExpSeries> {
    debug_assert!(start >= 1);
    let tau = t * c0;
    let mut terms = Vec::new();
    let mut j = start;
    loop {
        let a = eval(j)?;
        terms.push((n * j as f64 * ln_p - t * a).exp());
        if stop == Some(j) {
            return Ok(ExpSeries {
                sum: pairwise_sum(&terms),
                tail: 0.0,
                last: j,
            });
        }
        if let Some(tail) = exp_tail_bound(ln_p, n, beta, tau, j) {
            if tail <= tol {
                return Ok(ExpSeries {
                    sum: pairwise_sum(&terms),
                    tail,
                    last: j,
                });
            }
        }
        if j - start >= MAX_SHELLS {
            return Err(Error::NoConvergence {
                tol,
                shells: terms.len() as u32,
            });
        }
        j += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn tail_bound_dominates_the_true_tail() {
        let ln2 = 2f64.ln();
        for &t in &[0.01, 0.25, 1.0, 4.0] {
            for last in 1..12 {
                let Some(bound) = exp_tail_bound(ln2, 1.0, 1.0, t, last) else {
                    continue;
                };
                let truth: f64 = ((last + 1)..(last + 200))
                    .map(|j| ln_majorant_term(ln2, 1.0, 1.0, t, j).exp())
                    .sum();
                assert!(truth <= bound * (1.0 + 1e-12), "t={t} last={last}");
            }
        }
    }

    #[test]
    fn series_reaches_tolerance() {
        let ln2 = 2f64.ln();
        let s = exp_shell_series(ln2, 1.0, 1.0, 1.0, 1.0, 1, None, 1e-15, |j| {
            Ok(2f64.powi(j as i32))
        })
        .unwrap();
        // 2 * trace of the Taibleson operator at t = 1.
        assert!((s.sum / 2.0 - 0.173_309_311_807_291_48).abs() < 1e-15);
        assert!(s.tail <= 1e-15);
    }
}
