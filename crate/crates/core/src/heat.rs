//! Heat kernels, the heat trace and its Mellin transform.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::padic::{GlobalParams, Order};
use crate::series::{exp_shell_series, ln_majorant_term, pairwise_sum};
use crate::symbols::RadialSymbol;
use crate::zeta::zeta_series;

/// Relative change between successive quadrature refinements at which the
/// Mellin integral is accepted.
pub const QUADRATURE_RTOL: f64 = 1e-6;

/// Relative agreement required by [`mellin_check`].
pub const MELLIN_RTOL: f64 = 1e-4;

const GAUSS_POINTS: usize = 20;
const MAX_PANELS: usize = 1 << 14;

/// `K(x, t)` depends on `x` only through `ord(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub ordx: Order,
    pub t: f64,
    pub tol: f64,
}

impl KernelQuery {
    pub fn new(ordx: Order, t: f64, tol: f64) -> Result<Self> {
        check_time(t)?;
        check_tol(tol)?;
        Ok(KernelQuery { ordx, t, tol })
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTime(t))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "tol",
            format!("must be positive, got {tol}"),
        ))
    }
}

/// `(1 - p^{-n}) sum_{j >= 1} p^{n j} exp(-t A_j)` with `A_j` from `eval`,
/// certified through `A_j >= c0 p^{j beta}`.
fn trace_series(
    params: &GlobalParams,
    beta: f64,
    c0: f64,
    t: f64,
    tol: f64,
    eval: impl FnMut(i64) -> Result<f64>,
) -> Result<Enclosure> {
    let sphere = params.unit_sphere_volume();
    let series = exp_shell_series(
        params.ln_p(),
        params.n() as f64,
        beta,
        c0,
        t,
        1,
        None,
        tol / sphere,
        eval,
    )?;
    Ok(Enclosure::new(sphere * series.sum, sphere * series.tail))
}

/// `Tr e^{-t A} = sum_{m >= 1} mult_m e^{-t A(p^m)}`.
pub fn heat_trace(symbol: &RadialSymbol, t: f64, tol: f64) -> Result<Enclosure> {
    check_time(t)?;
    check_tol(tol)?;
    let c = symbol.certificate();
    trace_series(symbol.params(), c.beta, c.c0, t, tol, |j| symbol.eval(j))
}

/// The trace with `A(p^j)` replaced by `c p^{j beta}`; with `c = c0` this is
/// an upper majorant of the true trace, with `c = c1` a lower one.
pub fn power_trace(
    params: &GlobalParams,
    beta: f64,
    c: f64,
    t: f64,
    tol: f64,
) -> Result<Enclosure> {
    check_time(t)?;
    check_tol(tol)?;
    let p = params.p_f64();
    trace_series(params, beta, c, t, tol, |j| Ok(c * p.powf(j as f64 * beta)))
}

/// `K(x, t)` on the unit ball.
///
/// Zero for `ord(x) < 0`; for `ord(x) = m >= 0` the finite sum
/// `(1 - p^{-n}) sum_{j=1}^m p^{n j} e^{-t A(p^j)} - p^{n m} e^{-t A(p^{m+1})}`;
/// for `x = 0` the full series. Very large finite `m` are truncated like the
/// series, with the truncation in the bound.
pub fn heat_kernel(symbol: &RadialSymbol, q: KernelQuery) -> Result<Enclosure> {
    check_time(q.t)?;
    check_tol(q.tol)?;
    let params = symbol.params();
    let c = symbol.certificate();
    let m = match q.ordx {
        Order::Infinite => return heat_trace(symbol, q.t, q.tol),
        Order::Finite(m) if m < 0 => return Ok(Enclosure::exact(0.0)),
        Order::Finite(m) => m,
    };
    let ln_p = params.ln_p();
    let n = params.n() as f64;
    let sphere = params.unit_sphere_volume();
    let boundary = |a: f64| (n * m as f64 * ln_p - q.t * a).exp();
    if m == 0 {
        return Ok(Enclosure::exact(-boundary(symbol.eval(1)?)));
    }
    let series = exp_shell_series(
        ln_p,
        n,
        c.beta,
        c.c0,
        q.t,
        1,
        Some(m),
        q.tol / (2.0 * sphere),
        |j| symbol.eval(j),
    )?;
    if series.last == m {
        let value = sphere * series.sum - boundary(symbol.eval(m + 1)?);
        return Ok(Enclosure::exact(value));
    }
    // Truncated before shell m: the boundary term is below p^{-n} times a tail term.
    let boundary_bound = (ln_majorant_term(ln_p, n, c.beta, q.t * c.c0, m + 1) - n * ln_p).exp();
    Ok(Enclosure::new(
        sphere * series.sum,
        sphere * series.tail + boundary_bound,
    ))
}

/// `Z(x, t) = int_{Q_p^n} chi(-xi . x) e^{-t A(||xi||)} d^n xi` over the full space.
///
/// Shells `j >= 1` give [`heat_kernel`]; shells `j <= 0` are summed down to a
/// floor `L` with `p^{n L} <= tol / 2`, the rest bounded by the total volume
/// `p^{n L}` of the ball `||xi|| <= p^L`. The symbol must be defined on the
/// shells `j <= 0` it is asked for.
pub fn full_space_kernel(
    symbol: &RadialSymbol,
    ordx: Order,
    t: f64,
    tol: f64,
) -> Result<Enclosure> {
    check_time(t)?;
    check_tol(tol)?;
    let params = symbol.params();
    let ln_p = params.ln_p();
    let n = params.n() as f64;
    let floor = ((tol / 2.0).ln() / (n * ln_p)).floor() as i64;
    if let Order::Finite(m) = ordx {
        if m < floor {
            // Everything lives below the floor: |Z| <= p^{n m} + p^{n m}.
            return Ok(Enclosure::new(0.0, 2.0 * (n * m as f64 * ln_p).exp()));
        }
    }
    let upper = heat_kernel(symbol, KernelQuery::new(ordx, t, tol / 2.0)?)?;
    let sphere = params.unit_sphere_volume();
    let mut terms = Vec::new();
    for j in (floor + 1)..=0 {
        let weight = match ordx {
            Order::Finite(m) if j == m + 1 => -(n * m as f64 * ln_p).exp(),
            Order::Finite(m) if j > m + 1 => continue,
            _ => sphere * (n * j as f64 * ln_p).exp(),
        };
        terms.push(weight * (-t * symbol.eval(j)?).exp());
    }
    let lower_tail = (n * floor as f64 * ln_p).exp();
    Ok(Enclosure::new(
        pairwise_sum(&terms) + upper.value,
        upper.bound + lower_tail,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketRow {
    pub t: f64,
    pub trace: Enclosure,
    /// `t^{n/beta} Tr(t)`.
    pub scaled: f64,
    /// The majorant trace with `A` replaced by `c0 p^{j beta}`.
    pub majorant: Enclosure,
    pub below_majorant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceBracket {
    pub rows: Vec<BracketRow>,
    pub min_scaled: f64,
    pub max_scaled: f64,
    pub all_below_majorant: bool,
}

/// Evaluates `t^{n/beta} Tr(t)` on a grid together with the upper majorant.
///
/// The trace decays exponentially for large `t`, so a lower bracket
/// `C t^{-n/beta}` can only hold on bounded `t` ranges; callers choose the grid.
pub fn trace_bracket(symbol: &RadialSymbol, t_grid: &[f64], tol: f64) -> Result<TraceBracket> {
    let params = symbol.params();
    let c = symbol.certificate();
    let exponent = params.n() as f64 / c.beta;
    let rows: Vec<BracketRow> = t_grid
        .par_iter()
        .map(|&t| {
            let trace = heat_trace(symbol, t, tol)?;
            let majorant = power_trace(params, c.beta, c.c0, t, tol)?;
            Ok(BracketRow {
                t,
                trace,
                scaled: t.powf(exponent) * trace.value,
                majorant,
                below_majorant: trace.lo() <= majorant.hi() * (1.0 + 1e-12),
            })
        })
        .collect::<Result<_>>()?;
    let min_scaled = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    let max_scaled = rows
        .iter()
        .map(|r| r.scaled)
        .fold(f64::NEG_INFINITY, f64::max);
    let all_below_majorant = rows.iter().all(|r| r.below_majorant);
    Ok(TraceBracket {
        rows,
        min_scaled,
        max_scaled,
        all_below_majorant,
    })
}

/// Comparison of `int_0^inf Tr(t) t^{s-1} dt` against `Gamma(s) zeta(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinReport {
    pub s: f64,
    /// Quadrature over `[cut_low, cut_high]`.
    pub lhs: f64,
    /// `Gamma(s) zeta(s)`.
    pub rhs: f64,
    pub relerr: f64,
    pub cut_low: f64,
    pub cut_high: f64,
    /// Certified bound on the integral over `(0, cut_low)`.
    pub head_bound: f64,
    /// Certified bound on the integral over `(cut_high, inf)`.
    pub tail_bound: f64,
    /// Integrated trace truncation bounds.
    pub trace_bound: f64,
    /// Relative change at the last quadrature refinement.
    pub quadrature_change: f64,
    pub panels: usize,
    pub pass: bool,
}

/// Integrates the trace against `t^{s-1}` after substituting `t = e^u`.
///
/// The head uses `Tr(t) <= C' t^{-n/beta}` with
/// `C' = c0^{-n/beta} (1 - p^{-n}) [Gamma(n/beta) / (beta ln p) + (n / (beta e))^{n/beta}]`
/// (integral plus maximum of the unimodal shell terms); the tail uses
/// `Tr(t) <= Tr_c0(b) e^{-(t - b) c0 p^beta}` for `t >= b`.
pub fn mellin_check(symbol: &RadialSymbol, s: f64, tol: f64) -> Result<MellinReport> {
    check_tol(tol)?;
    let params = symbol.params();
    let c = symbol.certificate();
    let n = params.n() as f64;
    let ln_p = params.ln_p();
    let d = n / c.beta;
    let boundary = d.max(1.0);
    if !(s > boundary && s.is_finite()) {
        return Err(Error::DivergentRegion { abscissa: boundary });
    }
    let zeta = zeta_series(symbol, Complex64::new(s, 0.0), 1e-14)?;
    let rhs = gamma(s) * zeta.value.value.re;
    let cut_target = 1e-9 * rhs.abs();

    let c_prime = c.c0.powf(-d)
        * params.unit_sphere_volume()
        * (gamma(d) / (c.beta * ln_p) + (d / std::f64::consts::E).powf(d));
    let head = |a: f64| c_prime * a.powf(s - d) / (s - d);
    let cut_low = ((cut_target * (s - d) / c_prime).ln() / (s - d))
        .exp()
        .min(1.0);
    let head_bound = head(cut_low);

    let decay = c.c0 * params.p_f64().powf(c.beta);
    let tail = |b: f64| -> Result<Option<f64>> {
        if decay <= (s - 1.0) / b {
            return Ok(None);
        }
        let maj = power_trace(params, c.beta, c.c0, b, 1e-300_f64.max(tol * 1e-6))?;
        Ok(Some(maj.hi() * b.powf(s - 1.0) / (decay - (s - 1.0) / b)))
    };
    let mut cut_high = 1.0;
    let tail_bound = loop {
        if let Some(bound) = tail(cut_high)? {
            if bound <= cut_target {
                break bound;
            }
        }
        cut_high *= 2.0;
        if cut_high > 1e6 {
            return Err(Error::NoConvergence {
                tol: cut_target,
                shells: 0,
            });
        }
    };

    let rule = GaussLegendre::new(NonZeroUsize::new(GAUSS_POINTS).expect("nonzero"));
    let (u0, u1) = (cut_low.ln(), cut_high.ln());
    let integrate = |panels: usize| -> Result<(f64, f64)> {
        let width = (u1 - u0) / panels as f64;
        let pieces: Vec<(f64, f64)> = (0..panels)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (u0 + k as f64 * width, u0 + (k + 1) as f64 * width);
                let half = 0.5 * (b - a);
                let mut value = 0.0;
                let mut bound = 0.0;
                for &(x, w) in rule.as_node_weight_pairs() {
                    let u = a + half * (x + 1.0);
                    let tr = heat_trace(symbol, u.exp(), tol)?;
                    let jac = (s * u).exp();
                    value += w * half * tr.value * jac;
                    bound += w * half * tr.bound * jac;
                }
                Ok((value, bound))
            })
            .collect::<Result<_>>()?;
        let values: Vec<f64> = pieces.iter().map(|p| p.0).collect();
        let bounds: Vec<f64> = pieces.iter().map(|p| p.1).collect();
        Ok((pairwise_sum(&values), pairwise_sum(&bounds)))
    };

    let mut panels = 8;
    let mut lhs = integrate(panels)?.0;
    let mut trace_bound;
    let quadrature_change = loop {
        let (next, next_bound) = integrate(2 * panels)?;
        panels *= 2;
        let change = (next - lhs).abs() / next.abs();
        lhs = next;
        trace_bound = next_bound;
        if change <= QUADRATURE_RTOL {
            break change;
        }
        if panels >= MAX_PANELS {
            return Err(Error::NoConvergence {
                tol: QUADRATURE_RTOL,
                shells: panels as u32,
            });
        }
    };
    let relerr = (lhs - rhs).abs() / rhs.abs();
    Ok(MellinReport {
        s,
        lhs,
        rhs,
        relerr,
        cut_low,
        cut_high,
        head_bound,
        tail_bound,
        trace_bound,
        quadrature_change,
        panels,
        pass: relerr <= MELLIN_RTOL,
    })
}
