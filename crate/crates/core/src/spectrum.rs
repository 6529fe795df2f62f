//! Eigenvalues, multiplicities and the counting function on the mean-zero
//! subspace of the unit ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::GlobalParams;
use crate::symbols::RadialSymbol;

/// Eigenvalue data of one frequency shell `||xi||_p = p^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub m: u32,
    pub lambda: f64,
    pub multiplicity: u128,
}

/// `p^{n m} - p^{n (m - 1)}`, the number of wavelets at shell `m >= 1`.
pub fn multiplicity(params: &GlobalParams, m: u32) -> Result<u128> {
    if m == 0 {
        return Err(Error::invalid("m", "shell index starts at 1"));
    }
    let pn = params.p_pow_n();
    let lower = pn
        .checked_pow(m - 1)
        .ok_or(Error::MultiplicityOverflow(m))?;
    let upper = lower
        .checked_mul(pn)
        .ok_or(Error::MultiplicityOverflow(m))?;
    Ok(upper - lower)
}

/// Lines for `m = 1, 2, ...` in shell order (not sorted by eigenvalue).
///
/// The iterator stops with an error item when the symbol cannot be evaluated
/// or the multiplicity no longer fits in 128 bits.
pub fn spectrum_iter(symbol: &RadialSymbol) -> impl Iterator<Item = Result<SpectralLine>> + '_ {
    let params = *symbol.params();
    (1u32..).map(move |m| {
        let multiplicity = multiplicity(&params, m)?;
        let lambda = symbol.eval(i64::from(m))?;
        Ok(SpectralLine {
            m,
            lambda,
            multiplicity,
        })
    })
}

/// The last shell whose certified lower bound `c0 p^{m beta}` is at most `t`.
fn last_feasible_shell(symbol: &RadialSymbol, t: f64) -> u32 {
    let c = symbol.certificate();
    let ln_p = symbol.params().ln_p();
    if t < c.c0 {
        return 0;
    }
    let mut m = ((t / c.c0).ln() / (c.beta * ln_p)).floor().max(0.0) as u32;
    // Guard against rounding in the logarithm on either side.
    while m > 0 && c.lower(symbol.params().p_f64(), i64::from(m)) > t {
        m -= 1;
    }
    while c.lower(symbol.params().p_f64(), i64::from(m) + 1) <= t {
        m += 1;
    }
    m
}

/// `N(T)`: eigenvalues `<= T` counted with multiplicity.
///
/// Every shell allowed by the certificate is inspected, so the count is exact
/// for non-monotone symbols too.
pub fn counting_function(symbol: &RadialSymbol, t: f64) -> Result<u128> {
    if !(t >= 0.0) {
        return Err(Error::invalid("T", format!("must be nonnegative, got {t}")));
    }
    let last = last_feasible_shell(symbol, t);
    let params = symbol.params();
    let mut total: u128 = 0;
    for m in 1..=last {
        if symbol.eval(i64::from(m))? <= t {
            total = total
                .checked_add(multiplicity(params, m)?)
                .ok_or(Error::MultiplicityOverflow(m))?;
        }
    }
    Ok(total)
}

/// Least-squares fit of `log N(T)` against `log T` at `T = lambda_m`.
///
/// Only an `O(T^{n/beta})` bound on `N` is known; the slope is an empirical
/// estimate of the growth exponent, not a proved asymptotic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub shells: usize,
}

pub const MIN_GROWTH_SHELLS: usize = 5;

pub fn growth_exponent_estimate(symbol: &RadialSymbol, t_max: f64) -> Result<GrowthEstimate> {
    let last = last_feasible_shell(symbol, t_max);
    let mut points = Vec::new();
    for m in 1..=last {
        let lambda = symbol.eval(i64::from(m))?;
        if lambda > t_max {
            continue;
        }
        let count = counting_function(symbol, lambda)?;
        points.push((lambda.ln(), (count as f64).ln()));
    }
    if points.len() < MIN_GROWTH_SHELLS {
        return Err(Error::TooFewShells {
            found: points.len(),
            needed: MIN_GROWTH_SHELLS,
        });
    }
    let k = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::TooFewShells {
            found: 1,
            needed: MIN_GROWTH_SHELLS,
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(GrowthEstimate {
        slope,
        intercept,
        residual,
        shells: points.len(),
    })
}
