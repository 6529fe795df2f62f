//! Spectral zeta function: certified series, the closed form for power
//! symbols and the pole lattice.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::padic::GlobalParams;
use crate::series::{pairwise_sum, MAX_SHELLS};
use crate::spectrum::multiplicity;
use crate::symbols::{RadialSymbol, SymbolKind};

/// Default absolute tolerance for series truncation.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Relative agreement required when recognising a power law in a table.
const POWER_LAW_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaSeries {
    pub value: Enclosure<Complex64>,
    pub shells_used: u32,
    /// `n / beta`; the series converges for `Re(s)` above it.
    pub abscissa: f64,
}

/// `sum_m mult_m A(p^m)^{-s}` truncated at the first `M` whose certified tail
/// `(1 - p^{-n}) c0^{-sigma} q^{M+1} / (1 - q)`, `q = p^{n - beta sigma}`, is
/// at most `tol`.
pub fn zeta_series(symbol: &RadialSymbol, s: Complex64, tol: f64) -> Result<ZetaSeries> {
    if !(tol > 0.0) {
        return Err(Error::invalid(
            "tol",
            format!("must be positive, got {tol}"),
        ));
    }
    let params = symbol.params();
    let cert = symbol.certificate();
    let n = params.n() as f64;
    let ln_p = params.ln_p();
    let abscissa = n / cert.beta;
    let sigma = s.re;
    if !(sigma > abscissa) {
        return Err(Error::DivergentRegion { abscissa });
    }
    let ln_q = (n - cert.beta * sigma) * ln_p;
    // ln of (1 - p^{-n}) c0^{-sigma} / (1 - q); tail after M is exp(ln_c + (M + 1) ln_q).
    let ln_c = params.unit_sphere_volume().ln() - sigma * cert.c0.ln() - (-ln_q.exp_m1()).ln();
    let needed = ((tol.ln() - ln_c) / ln_q).ceil() - 1.0;
    let shells = needed.max(1.0);
    if shells > MAX_SHELLS as f64 {
        return Err(Error::NoConvergence {
            tol,
            shells: MAX_SHELLS as u32,
        });
    }
    let shells = shells as u32;
    let tail = (ln_c + f64::from(shells + 1) * ln_q).exp();

    let terms: Vec<Complex64> = (1..=shells)
        .into_par_iter()
        .map(|m| {
            let lambda = symbol.eval(i64::from(m))?;
            // mult_m = (1 - p^{-n}) p^{n m}, kept in log space.
            let ln_mult = params.unit_sphere_volume().ln() + n * f64::from(m) * ln_p;
            Ok((Complex64::from(ln_mult) - s * lambda.ln()).exp())
        })
        .collect::<Result<_>>()?;
    Ok(ZetaSeries {
        value: Enclosure::new(pairwise_sum(&terms), tail),
        shells_used: shells,
        abscissa,
    })
}

/// The closed form of the zeta function of `A(p^m) = p^{m beta}`:
/// a rational function of `v = p^{-beta s}` with integer coefficients,
/// `zeta = (p^n - 1) v / (1 - p^n v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaClosedForm {
    pub p: u32,
    pub n: usize,
    pub beta: f64,
    /// Coefficients in ascending powers of `v`.
    pub numerator: Vec<i128>,
    pub denominator: Vec<i128>,
}

pub fn taibleson_zeta_closed(params: &GlobalParams, beta: f64) -> Result<ZetaClosedForm> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(
            "beta",
            format!("must be positive, got {beta}"),
        ));
    }
    let pn = i128::try_from(params.p_pow_n())
        .map_err(|_| Error::invalid("n", "p^n does not fit in 127 bits"))?;
    Ok(ZetaClosedForm {
        p: params.p(),
        n: params.n(),
        beta,
        numerator: vec![0, pn - 1],
        denominator: vec![1, -pn],
    })
}

fn horner(coeffs: &[i128], v: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * v + c as f64)
}

impl ZetaClosedForm {
    pub fn lattice(&self) -> PoleLattice {
        PoleLattice::power(self.p, self.n, self.beta, PoleKind::Taibleson)
    }

    /// `p^{-beta s}`.
    pub fn variable(&self, s: Complex64) -> Complex64 {
        (-s * self.beta * f64::from(self.p).ln()).exp()
    }

    /// Evaluates the meromorphic continuation; poles are reported as errors.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        self.lattice().check_pole(s)?;
        let v = self.variable(s);
        Ok(horner(&self.numerator, v) / horner(&self.denominator, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleKind {
    /// The zeta function is exactly the power-law closed form.
    Taibleson,
    /// Power law from some shell on; finitely many shells add an entire term.
    EventuallyPower,
}

/// Candidate poles `n / beta + 2 pi i k / (beta ln p)`, `k` integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleLattice {
    pub p: u32,
    pub n: usize,
    pub beta: f64,
    pub abscissa: f64,
    pub spacing: f64,
    pub kind: PoleKind,
    /// First shell of the power law `A(p^m) = c p^{m beta}`.
    pub power_from: u32,
    pub power_constant: f64,
    /// Shells `1 .. power_from` as `(lambda_m, multiplicity)`; their
    /// contribution to zeta is entire.
    pub correction: Vec<(f64, u128)>,
}

impl PoleLattice {
    fn power(p: u32, n: usize, beta: f64, kind: PoleKind) -> Self {
        let ln_p = f64::from(p).ln();
        PoleLattice {
            p,
            n,
            beta,
            abscissa: n as f64 / beta,
            spacing: 2.0 * PI / (beta * ln_p),
            kind,
            power_from: 1,
            power_constant: 1.0,
            correction: Vec::new(),
        }
    }

    /// The lattice point `k`.
    pub fn pole(&self, k: i64) -> Complex64 {
        Complex64::new(self.abscissa, self.spacing * k as f64)
    }

    /// Errors with [`Error::Pole`] if `s` is (to rounding) a lattice point.
    pub fn check_pole(&self, s: Complex64) -> Result<()> {
        let k = (s.im / self.spacing).round();
        let scale = 1.0 + s.norm();
        let near = (s.re - self.abscissa).abs() <= 1e-12 * scale
            && (s.im - k * self.spacing).abs() <= 1e-12 * scale;
        if near {
            Err(Error::Pole {
                re: s.re,
                im: s.im,
                k: k as i64,
            })
        } else {
            Ok(())
        }
    }

    /// The entire part contributed by the non-power shells.
    pub fn correction_term(&self, s: Complex64) -> Complex64 {
        let terms: Vec<Complex64> = self
            .correction
            .iter()
            .map(|&(lambda, mult)| ((mult as f64).ln() - s * lambda.ln()).exp())
            .collect();
        pairwise_sum(&terms)
    }

    /// The meromorphic continuation
    /// `correction(s) + c^{-s} (1 - p^{-n}) r^{m0} / (1 - r)`, `r = p^{n - beta s}`.
    pub fn continuation(&self, s: Complex64) -> Result<Complex64> {
        self.check_pole(s)?;
        let ln_p = f64::from(self.p).ln();
        let n = self.n as f64;
        let ln_r = (Complex64::from(n) - s * self.beta) * ln_p;
        let r = ln_r.exp();
        let sphere = 1.0 - (-n * ln_p).exp();
        let head = (ln_r * f64::from(self.power_from) - s * self.power_constant.ln()).exp();
        Ok(self.correction_term(s) + head * sphere / (Complex64::from(1.0) - r))
    }
}

/// The pole lattice of a symbol whose zeta function continues meromorphically:
/// Taibleson symbols, and table symbols that are exactly `c p^{m beta}` on a
/// run of at least two shells reaching the end of the table. The power law is
/// assumed to continue past the table. Other symbols are declined.
pub fn pole_lattice(symbol: &RadialSymbol) -> Result<PoleLattice> {
    let params = symbol.params();
    let beta = symbol.beta();
    match symbol.kind() {
        SymbolKind::Taibleson => Ok(PoleLattice::power(
            params.p(),
            params.n(),
            beta,
            PoleKind::Taibleson,
        )),
        SymbolKind::Table => {
            let table = symbol.table().expect("table symbol");
            let p = params.p_f64();
            let shells: Vec<(u32, f64)> = table
                .iter()
                .filter(|(&j, _)| j >= 1)
                .map(|(&j, &v)| (j as u32, v / p.powf(j as f64 * beta)))
                .collect();
            let Some(&(last, c)) = shells.last() else {
                return Err(Error::NotEventuallyPower(
                    "table has no shells m >= 1".into(),
                ));
            };
            // Walk down while the shells stay contiguous and the ratio stays put.
            let mut from = last;
            for &(j, ratio) in shells.iter().rev().skip(1) {
                if j + 1 != from || (ratio - c).abs() > POWER_LAW_RTOL * c {
                    break;
                }
                from = j;
            }
            if from == last {
                return Err(Error::NotEventuallyPower(format!(
                    "no power-law run c p^(m beta) at the end of the table (last shell {last})"
                )));
            }
            let correction = (1..from)
                .map(|m| Ok((symbol.eval(i64::from(m))?, multiplicity(params, m)?)))
                .collect::<Result<Vec<_>>>()?;
            let mut lattice =
                PoleLattice::power(params.p(), params.n(), beta, PoleKind::EventuallyPower);
            lattice.power_from = from;
            lattice.power_constant = c;
            lattice.correction = correction;
            Ok(lattice)
        }
        kind => Err(Error::NotEventuallyPower(format!(
            "{kind} symbols are not eventually a pure power; no continuation is claimed"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{counting_function, spectrum_iter};
    use crate::symbols::{
        damped_symbol, symbol_from_table, taibleson_symbol, walpha_symbol, WAlphaSpec,
    };

    fn params(p: u32, n: usize) -> GlobalParams {
        GlobalParams::new(p, n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// The closed form written out directly, independent of the polynomial form.
    fn closed_oracle(p: f64, n: f64, beta: f64, s: Complex64) -> Complex64 {
        let r = (Complex64::from(n) - s * beta) * p.ln();
        let r = r.exp();
        (1.0 - p.powf(-n)) * r / (Complex64::from(1.0) - r)
    }

    #[test]
    fn zeta_examples() {
        let s = taibleson_symbol(params(2, 1), 1.0).unwrap();
        let z = zeta_series(&s, c(2.0, 0.0), 1e-13).unwrap();
        assert!((z.value.value - c(0.5, 0.0)).norm() <= z.value.bound + 1e-14);
        let z = zeta_series(&s, c(3.0, 0.0), 1e-13).unwrap();
        assert!((z.value.value - c(1.0 / 6.0, 0.0)).norm() <= z.value.bound + 1e-14);
        assert_eq!(z.abscissa, 1.0);
        assert_eq!(
            zeta_series(&s, c(1.0, 3.0), 1e-12).unwrap_err(),
            Error::DivergentRegion { abscissa: 1.0 }
        );
    }

    #[test]
    fn series_matches_closed_form() {
        for p in [2u32, 3] {
            for n in [1usize, 2] {
                for beta in [1.0, 2.0] {
                    let g = params(p, n);
                    let sym = taibleson_symbol(g, beta).unwrap();
                    let closed = taibleson_zeta_closed(&g, beta).unwrap();
                    let a = n as f64 / beta;
                    for s in [c(2.0, 0.0), c(3.0, 0.0), c(1.5, 4.0), c(a + 0.25, 0.0)] {
                        if s.re <= a {
                            continue;
                        }
                        let series = zeta_series(&sym, s, DEFAULT_TOL).unwrap();
                        let exact = closed.eval(s).unwrap();
                        assert!((series.value.value - exact).norm() <= series.value.bound + 1e-12);
                        assert!(
                            (exact - closed_oracle(f64::from(p), n as f64, beta, s)).norm()
                                <= 1e-12 * exact.norm()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_poles() {
        let g = params(2, 1);
        let closed = taibleson_zeta_closed(&g, 1.0).unwrap();
        assert!((closed.eval(c(2.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        assert!(matches!(
            closed.eval(c(1.0, 0.0)),
            Err(Error::Pole { k: 0, .. })
        ));
        let s = c(1.0, 2.0 * PI / 2f64.ln());
        assert!(matches!(closed.eval(s), Err(Error::Pole { k: 1, .. })));
        assert!(closed.eval(c(1.0, 1.0)).is_ok());
    }

    #[test]
    fn lattice_examples() {
        let l = taibleson_zeta_closed(&params(2, 1), 1.0).unwrap().lattice();
        assert_eq!(l.abscissa, 1.0);
        assert!((l.spacing - 9.064_720_283_654_388).abs() < 1e-12);
        let l = pole_lattice(&taibleson_symbol(params(3, 2), 2.0).unwrap()).unwrap();
        assert_eq!(l.abscissa, 1.0);
        assert!((l.spacing - 2.0 * PI / (2.0 * 3f64.ln())).abs() < 1e-15);
        let damped = damped_symbol(params(2, 1), 1.0, 1.0, 2.0).unwrap();
        assert!(matches!(
            pole_lattice(&damped),
            Err(Error::NotEventuallyPower(_))
        ));
        let w = walpha_symbol(params(2, 1), WAlphaSpec::pure_power(2, 2.0), 1e-12).unwrap();
        assert!(pole_lattice(&w).is_err());
    }

    #[test]
    fn eventually_power_table() {
        let g = params(2, 1);
        let mut entries = vec![(1, 2.5), (2, 3.0)];
        entries.extend((3..=80).map(|m| (m, 1.5 * 2f64.powi(m as i32))));
        let sym = symbol_from_table(g, &entries, 1.0, 0.5, 2.0).unwrap();
        let lattice = pole_lattice(&sym).unwrap();
        assert_eq!(lattice.kind, PoleKind::EventuallyPower);
        assert_eq!(lattice.power_from, 3);
        assert_eq!(lattice.correction, vec![(2.5, 1), (3.0, 2)]);
        for s in [c(2.0, 0.0), c(2.5, 3.0)] {
            let series = zeta_series(&sym, s, 1e-12).unwrap();
            let cont = lattice.continuation(s).unwrap();
            assert!((series.value.value - cont).norm() <= series.value.bound + 1e-12);
        }
        assert!(matches!(
            lattice.continuation(c(1.0, 0.0)),
            Err(Error::Pole { .. })
        ));
        let plain = symbol_from_table(g, &[(1, 2.0), (2, 5.0)], 1.0, 0.5, 2.0).unwrap();
        assert!(matches!(
            pole_lattice(&plain),
            Err(Error::NotEventuallyPower(_))
        ));
    }

    #[test]
    fn zeta_consistent_with_counting_jumps() {
        let sym = damped_symbol(params(3, 1), 1.5, 1.0, 2.0).unwrap();
        let sigma = 2.0;
        let series = zeta_series(&sym, c(sigma, 0.0), 1e-13).unwrap();
        let lines: Vec<_> = spectrum_iter(&sym)
            .take(series.shells_used as usize)
            .collect::<Result<_>>()
            .unwrap();
        let jumps: f64 = lines
            .iter()
            .map(|l| {
                let below = counting_function(&sym, l.lambda * (1.0 - 1e-12)).unwrap();
                let at = counting_function(&sym, l.lambda).unwrap();
                (at - below) as f64 * l.lambda.powf(-sigma)
            })
            .sum();
        assert!((series.value.value.re - jumps).abs() <= series.value.bound + 1e-12);
    }
}
