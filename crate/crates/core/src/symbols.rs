//! Radial symbols `A(p^j)` with a growth certificate
//! `c0 p^{j beta} <= A(p^j) <= c1 p^{j beta}` for `j >= 1`.
//!
//! Symbols are only ever evaluated shell by shell. Every evaluation at a shell
//! `j >= 1` is checked against the certificate; a violation is a hard error.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::padic::GlobalParams;

/// Relative slack used when checking floating values against a certificate.
const CERTIFICATE_SLACK: f64 = 1e-10;

/// Maximum number of shells summed for one W_alpha symbol value.
const WALPHA_MAX_TERMS: usize = 200_000;

/// Growth constants `(beta, c0, c1)` of a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolCertificate {
    pub beta: f64,
    pub c0: f64,
    pub c1: f64,
}

impl SymbolCertificate {
    pub fn new(beta: f64, c0: f64, c1: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(
                "beta",
                format!("must be positive, got {beta}"),
            ));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::invalid("c0", format!("must be positive, got {c0}")));
        }
        if !(c1 >= c0 && c1.is_finite()) {
            return Err(Error::invalid(
                "c1",
                format!("must satisfy c0 <= c1, got c0 = {c0}, c1 = {c1}"),
            ));
        }
        Ok(SymbolCertificate { beta, c0, c1 })
    }

    /// `c0 p^{j beta}`.
    pub fn lower(&self, p: f64, j: i64) -> f64 {
        self.c0 * p.powf(j as f64 * self.beta)
    }

    /// `c1 p^{j beta}`.
    pub fn upper(&self, p: f64, j: i64) -> f64 {
        self.c1 * p.powf(j as f64 * self.beta)
    }

    fn check(&self, p: f64, j: i64, value: Enclosure) -> Result<()> {
        if j < 1 {
            return Ok(());
        }
        let lower = self.lower(p, j);
        let upper = self.upper(p, j);
        let ok = value.hi() >= lower * (1.0 - CERTIFICATE_SLACK)
            && value.lo() <= upper * (1.0 + CERTIFICATE_SLACK);
        if ok {
            Ok(())
        } else {
            Err(Error::CertificateViolation {
                shell: j,
                value: value.value,
                lower,
                upper,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Taibleson,
    Damped,
    Walpha,
    Table,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolKind::Taibleson => "taibleson",
            SymbolKind::Damped => "damped",
            SymbolKind::Walpha => "walpha",
            SymbolKind::Table => "table",
        })
    }
}

type WeightFn = Arc<dyn Fn(i64) -> Option<f64> + Send + Sync>;

/// The radial weight `w_alpha` of a W_alpha operator, given shell by shell,
/// with constants `cw0 p^{j alpha} <= w(p^j) <= cw1 p^{j alpha}`.
#[derive(Clone)]
pub struct WAlphaSpec {
    pub alpha: f64,
    pub kappa: f64,
    pub cw0: f64,
    pub cw1: f64,
    weight: WeightFn,
}

impl fmt::Debug for WAlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WAlphaSpec")
            .field("alpha", &self.alpha)
            .field("kappa", &self.kappa)
            .field("cw0", &self.cw0)
            .field("cw1", &self.cw1)
            .finish_non_exhaustive()
    }
}

impl WAlphaSpec {
    /// `w(y) = ||y||_p^alpha`, `kappa = 1`.
    pub fn pure_power(p: u32, alpha: f64) -> Self {
        let pf = f64::from(p);
        WAlphaSpec {
            alpha,
            kappa: 1.0,
            cw0: 1.0,
            cw1: 1.0,
            weight: Arc::new(move |j| Some(pf.powf(j as f64 * alpha))),
        }
    }

    /// A weight given by a function of the shell index. Returning `None`
    /// means the weight is unknown there; the tail is then bracketed by the
    /// certificate alone.
    pub fn from_fn(
        alpha: f64,
        cw0: f64,
        cw1: f64,
        weight: impl Fn(i64) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        WAlphaSpec {
            alpha,
            kappa: 1.0,
            cw0,
            cw1,
            weight: Arc::new(weight),
        }
    }

    pub fn from_table(alpha: f64, cw0: f64, cw1: f64, entries: &[(i64, f64)]) -> Self {
        let table: BTreeMap<i64, f64> = entries.iter().copied().collect();
        Self::from_fn(alpha, cw0, cw1, move |j| table.get(&j).copied())
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn weight(&self, j: i64) -> Option<f64> {
        (self.weight)(j)
    }
}

enum Source {
    Taibleson,
    Damped { a: f64, b: f64 },
    WAlpha { spec: WAlphaSpec, tol: f64 },
    Table(BTreeMap<i64, f64>),
}

/// A radial symbol `A(||xi||_p)` evaluated on shells `||xi||_p = p^j`.
///
/// Values are memoized per shell behind a lock; concurrent `eval` calls
/// return identical values.
pub struct RadialSymbol {
    params: GlobalParams,
    certificate: SymbolCertificate,
    source: Source,
    cache: RwLock<HashMap<i64, Enclosure>>,
}

impl fmt::Debug for RadialSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialSymbol")
            .field("kind", &self.kind())
            .field("params", &self.params)
            .field("certificate", &self.certificate)
            .finish_non_exhaustive()
    }
}

impl RadialSymbol {
    fn with_source(params: GlobalParams, certificate: SymbolCertificate, source: Source) -> Self {
        RadialSymbol {
            params,
            certificate,
            source,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn params(&self) -> &GlobalParams {
        &self.params
    }

    pub fn certificate(&self) -> &SymbolCertificate {
        &self.certificate
    }

    pub fn beta(&self) -> f64 {
        self.certificate.beta
    }

    pub fn kind(&self) -> SymbolKind {
        match self.source {
            Source::Taibleson => SymbolKind::Taibleson,
            Source::Damped { .. } => SymbolKind::Damped,
            Source::WAlpha { .. } => SymbolKind::Walpha,
            Source::Table(_) => SymbolKind::Table,
        }
    }

    /// Tabulated entries, for table symbols.
    pub fn table(&self) -> Option<&BTreeMap<i64, f64>> {
        match &self.source {
            Source::Table(t) => Some(t),
            _ => None,
        }
    }

    /// `A(p^j)`.
    pub fn eval(&self, j: i64) -> Result<f64> {
        self.eval_enclosure(j).map(|e| e.value)
    }

    /// `A(p^j)` with its evaluation error bound (nonzero only for W_alpha).
    pub fn eval_enclosure(&self, j: i64) -> Result<Enclosure> {
        if let Some(hit) = self.cache.read().expect("symbol cache poisoned").get(&j) {
            return Ok(*hit);
        }
        let value = self.compute(j)?;
        if !(value.value > 0.0 && value.value.is_finite()) {
            return Err(Error::NonPositiveSymbol {
                shell: j,
                value: value.value,
            });
        }
        self.certificate.check(self.params.p_f64(), j, value)?;
        self.cache
            .write()
            .expect("symbol cache poisoned")
            .insert(j, value);
        Ok(value)
    }

    fn compute(&self, j: i64) -> Result<Enclosure> {
        let p = self.params.p_f64();
        let beta = self.certificate.beta;
        match &self.source {
            Source::Taibleson => Ok(Enclosure::exact(p.powf(j as f64 * beta))),
            Source::Damped { a, b } => {
                let radius = p.powf(j as f64);
                Ok(Enclosure::exact(
                    p.powf(j as f64 * beta) * (b - a * (-radius).exp()),
                ))
            }
            Source::WAlpha { spec, tol } => walpha_value(&self.params, spec, j, *tol),
            Source::Table(t) => t
                .get(&j)
                .copied()
                .map(Enclosure::exact)
                .ok_or(Error::MissingShell(j)),
        }
    }
}

/// The Taibleson symbol `A(p^j) = p^{j beta}`, certificate `(beta, 1, 1)`.
pub fn taibleson_symbol(params: GlobalParams, beta: f64) -> Result<RadialSymbol> {
    let certificate = SymbolCertificate::new(beta, 1.0, 1.0)?;
    Ok(RadialSymbol::with_source(
        params,
        certificate,
        Source::Taibleson,
    ))
}

/// `A(p^j) = p^{j beta} (B - A e^{-p^j})` with `B > A > 0`,
/// certificate `(beta, B - A, B)`.
pub fn damped_symbol(params: GlobalParams, beta: f64, a: f64, b: f64) -> Result<RadialSymbol> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid("A", format!("must be positive, got {a}")));
    }
    if !(b > a && b.is_finite()) {
        return Err(Error::invalid("B", format!("must exceed A = {a}, got {b}")));
    }
    let certificate = SymbolCertificate::new(beta, b - a, b)?;
    Ok(RadialSymbol::with_source(
        params,
        certificate,
        Source::Damped { a, b },
    ))
}

/// The symbol `kappa A_{w_alpha}(p^gamma)` of a W_alpha operator.
///
/// Values are shell sums of `int (1 - chi(y.xi)) / w(||y||) d^n y` truncated
/// with a certified geometric tail of at most `tol`. The certificate has
/// exponent `alpha - n` and constants derived from `cw0`, `cw1`; they bound
/// every shell, not just the ones evaluated.
pub fn walpha_symbol(params: GlobalParams, spec: WAlphaSpec, tol: f64) -> Result<RadialSymbol> {
    let n = params.n() as f64;
    if !(spec.alpha > n && spec.alpha.is_finite()) {
        return Err(Error::invalid(
            "alpha",
            format!(
                "must exceed n = {n} for the shell series to converge, got {}",
                spec.alpha
            ),
        ));
    }
    if !(spec.kappa > 0.0 && spec.kappa.is_finite()) {
        return Err(Error::invalid(
            "kappa",
            format!("must be positive, got {}", spec.kappa),
        ));
    }
    if !(spec.cw0 > 0.0 && spec.cw1 >= spec.cw0 && spec.cw1.is_finite()) {
        return Err(Error::invalid(
            "cw0",
            "weight constants must satisfy 0 < cw0 <= cw1",
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(
            "tol",
            format!("must be positive, got {tol}"),
        ));
    }
    let p = params.p_f64();
    let q = p.powf(n - spec.alpha);
    // A(p^gamma) = kappa * q * p^{gamma (alpha - n)} * [w-dependent factor in
    // [1/cw1, 1/cw0]] * (1 + (1 - p^{-n}) q / (1 - q)).
    let shape = 1.0 + params.unit_sphere_volume() * q / (1.0 - q);
    let c0 = spec.kappa * q * shape / spec.cw1;
    let c1 = spec.kappa * q * shape / spec.cw0;
    let certificate = SymbolCertificate::new(spec.alpha - n, c0, c1)?;
    Ok(RadialSymbol::with_source(
        params,
        certificate,
        Source::WAlpha { spec, tol },
    ))
}

/// A lookup-backed symbol. Every entry at a shell `j >= 1` is checked against
/// the certificate at load time.
pub fn symbol_from_table(
    params: GlobalParams,
    entries: &[(i64, f64)],
    beta: f64,
    c0: f64,
    c1: f64,
) -> Result<RadialSymbol> {
    let certificate = SymbolCertificate::new(beta, c0, c1)?;
    let mut table = BTreeMap::new();
    for &(j, value) in entries {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveSymbol { shell: j, value });
        }
        if table.insert(j, value).is_some() {
            return Err(Error::invalid(
                "table",
                format!("duplicate entry for shell {j}"),
            ));
        }
        certificate.check(params.p_f64(), j, Enclosure::exact(value))?;
    }
    Ok(RadialSymbol::with_source(
        params,
        certificate,
        Source::Table(table),
    ))
}

/// Parses `j value` pairs, one per line. Blank lines and `#` comments are skipped.
pub fn parse_table(text: &str) -> Result<Vec<(i64, f64)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(j), Some(v), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse(format!(
                "line {}: expected `j value`",
                lineno + 1
            )));
        };
        let j = j
            .parse::<i64>()
            .map_err(|e| Error::Parse(format!("line {}: shell index `{j}`: {e}", lineno + 1)))?;
        let v = v
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("line {}: value `{v}`: {e}", lineno + 1)))?;
        out.push((j, v));
    }
    Ok(out)
}

fn walpha_value(
    params: &GlobalParams,
    spec: &WAlphaSpec,
    gamma: i64,
    tol: f64,
) -> Result<Enclosure> {
    let p = params.p_f64();
    let n = params.n() as f64;
    let sphere = params.unit_sphere_volume();
    let q = p.powf(n - spec.alpha);

    let weight_at = |j: i64| -> Result<Option<f64>> {
        let Some(w) = spec.weight(j) else {
            return Ok(None);
        };
        let base = p.powf(j as f64 * spec.alpha);
        let (lo, hi) = (spec.cw0 * base, spec.cw1 * base);
        if !(w > 0.0) || w < lo * (1.0 - CERTIFICATE_SLACK) || w > hi * (1.0 + CERTIFICATE_SLACK) {
            return Err(Error::CertificateViolation {
                shell: j,
                value: w,
                lower: lo,
                upper: hi,
            });
        }
        Ok(Some(w))
    };

    // Shells with j <= -gamma contribute nothing; j = 1 - gamma contributes the
    // full sphere-plus-boundary term p^{nj}.
    let first = 1 - gamma;
    let w_first = weight_at(first)?.ok_or(Error::MissingShell(first))?;
    let mut terms = vec![p.powf(n * first as f64) / w_first];
    let mut prev_w = w_first;
    let mut last = first;
    // Tail of sum_{j > J} p^{nj}(1 - p^{-n}) / w(p^j) with w bracketed by cw0, cw1.
    let tail = |last: i64, c: f64| sphere / c * q.powf((last + 1) as f64) / (1.0 - q);
    while spec.kappa * tail(last, spec.cw0) > tol / 2.0 {
        if terms.len() > WALPHA_MAX_TERMS {
            return Err(Error::NoConvergence {
                tol,
                shells: terms.len() as u32,
            });
        }
        let j = last + 1;
        let Some(w) = weight_at(j)? else { break };
        if w <= prev_w {
            return Err(Error::WeightNotIncreasing(last, j));
        }
        terms.push(p.powf(n * j as f64) * sphere / w);
        prev_w = w;
        last = j;
    }
    let upper = tail(last, spec.cw0);
    let lower = tail(last, spec.cw1);
    let partial = crate::series::pairwise_sum(&terms);
    let value = spec.kappa * (partial + 0.5 * (upper + lower));
    let bound = spec.kappa * 0.5 * (upper - lower);
    if bound > tol {
        return Err(Error::NoConvergence {
            tol,
            shells: terms.len() as u32,
        });
    }
    Ok(Enclosure::new(value, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: u32, n: usize) -> GlobalParams {
        GlobalParams::new(p, n).unwrap()
    }

    /// Independent shell-sum oracle for the W_alpha symbol: plain summation
    /// of the shell decomposition far past any tolerance.
    fn walpha_oracle(p: f64, n: f64, alpha: f64, w: impl Fn(i64) -> f64, gamma: i64) -> f64 {
        let first = 1 - gamma;
        let mut total = p.powf(n * first as f64) / w(first);
        for j in (first + 1)..(first + 400) {
            total += p.powf(n * j as f64) * (1.0 - p.powf(-n)) / w(j);
        }
        let _ = alpha;
        total
    }

    #[test]
    fn taibleson_values() {
        let s = taibleson_symbol(params(2, 1), 1.0).unwrap();
        assert_eq!(s.eval(3).unwrap(), 8.0);
        assert_eq!(s.eval(0).unwrap(), 1.0);
        let s = taibleson_symbol(params(3, 1), 2.0).unwrap();
        assert_eq!(s.eval(2).unwrap(), 81.0);
        assert!(taibleson_symbol(params(3, 1), 0.0).is_err());
    }

    #[test]
    fn damped_values() {
        let s = damped_symbol(params(2, 1), 1.0, 1.0, 2.0).unwrap();
        assert!((s.eval(1).unwrap() - 3.729_329_433_526_774_6).abs() < 1e-12);
        let ratio = s.eval(30).unwrap() / 2f64.powi(30);
        assert!((ratio - 2.0).abs() < 1e-12);
        assert_eq!(s.certificate().c0, 1.0);
        assert_eq!(s.certificate().c1, 2.0);
        assert!(matches!(
            damped_symbol(params(2, 1), 1.0, 1.0, 1.0),
            Err(Error::InvalidParameter { name: "B", .. })
        ));
    }

    #[test]
    fn walpha_concrete_values() {
        let spec = WAlphaSpec::pure_power(2, 2.0);
        let s = walpha_symbol(params(2, 1), spec, 1e-14).unwrap();
        let e1 = s.eval_enclosure(1).unwrap();
        assert!((e1.value - 1.5).abs() <= e1.bound + 1e-14);
        let e2 = s.eval_enclosure(2).unwrap();
        assert!((e2.value - 3.0).abs() <= e2.bound + 1e-14);
        // Oracle agreement.
        let oracle = walpha_oracle(2.0, 1.0, 2.0, |j| 4f64.powi(j as i32), 1);
        assert!((oracle - 1.5).abs() < 1e-14);
    }

    #[test]
    fn walpha_rejects_divergent_tail() {
        let spec = WAlphaSpec::pure_power(2, 1.0);
        assert!(matches!(
            walpha_symbol(params(2, 1), spec, 1e-12),
            Err(Error::InvalidParameter { name: "alpha", .. })
        ));
    }

    #[test]
    fn walpha_pure_power_scaling() {
        for (p, n, alpha) in [(2u32, 1usize, 2.0), (3, 1, 2.5), (2, 2, 3.5), (5, 1, 1.5)] {
            let s = walpha_symbol(params(p, n), WAlphaSpec::pure_power(p, alpha), 1e-13).unwrap();
            let scale = f64::from(p).powf(alpha - n as f64);
            for gamma in 1..=8 {
                let ratio = s.eval(gamma + 1).unwrap() / s.eval(gamma).unwrap();
                assert!(
                    (ratio / scale - 1.0).abs() < 1e-10,
                    "p={p} n={n} alpha={alpha} gamma={gamma}"
                );
            }
        }
    }

    #[test]
    fn walpha_matches_oracle_for_non_power_weight() {
        // w(p^j) = p^{2j} (2 + sin j), increasing for this range, cw in [1, 3].
        let w = |j: i64| 2f64.powf(3.0 * j as f64) * (2.0 + 0.5 * (j as f64).tanh());
        let spec = WAlphaSpec::from_fn(3.0, 1.0, 3.0, move |j| Some(w(j)));
        let s = walpha_symbol(params(2, 1), spec, 1e-13).unwrap();
        for gamma in 1..6 {
            let e = s.eval_enclosure(gamma).unwrap();
            let oracle = walpha_oracle(2.0, 1.0, 3.0, w, gamma);
            assert!(
                (e.value - oracle).abs() <= e.bound + 1e-12 * oracle,
                "gamma={gamma}"
            );
        }
    }

    #[test]
    fn walpha_decreases_when_weight_grows() {
        let small = WAlphaSpec::pure_power(3, 2.0);
        let big = WAlphaSpec::from_fn(2.0, 1.5, 1.5, |j| Some(1.5 * 3f64.powf(2.0 * j as f64)));
        let a = walpha_symbol(params(3, 1), small, 1e-13).unwrap();
        let b = walpha_symbol(params(3, 1), big, 1e-13).unwrap();
        for gamma in 1..6 {
            assert!(b.eval(gamma).unwrap() < a.eval(gamma).unwrap());
        }
    }

    #[test]
    fn walpha_truncated_table_brackets_the_tail() {
        let entries: Vec<(i64, f64)> = (-5..=60).map(|j| (j, 4f64.powi(j as i32))).collect();
        let spec = WAlphaSpec::from_table(2.0, 1.0, 1.0, &entries);
        let s = walpha_symbol(params(2, 1), spec, 1e-12).unwrap();
        let e = s.eval_enclosure(1).unwrap();
        assert!((e.value - 1.5).abs() <= e.bound + 1e-14);
        // A short table cannot reach the tolerance with unequal constants.
        let short: Vec<(i64, f64)> = (0..=5).map(|j| (j, 4f64.powi(j as i32))).collect();
        let spec = WAlphaSpec::from_table(2.0, 1.0, 2.0, &short);
        let s = walpha_symbol(params(2, 1), spec, 1e-12).unwrap();
        assert!(matches!(s.eval(1), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn table_symbol_examples() {
        let s = symbol_from_table(params(2, 1), &[(1, 2.0), (2, 4.0)], 1.0, 1.0, 1.0).unwrap();
        assert_eq!(s.eval(2).unwrap(), 4.0);
        match symbol_from_table(params(2, 1), &[(1, 5.0)], 1.0, 1.0, 1.0) {
            Err(Error::CertificateViolation { shell, .. }) => assert_eq!(shell, 1),
            other => panic!("expected a certificate violation, got {other:?}"),
        }
        let empty = symbol_from_table(params(2, 1), &[], 1.0, 1.0, 1.0).unwrap();
        assert_eq!(empty.eval(1), Err(Error::MissingShell(1)));
    }

    #[test]
    fn table_parsing() {
        let rows = parse_table("# shell value\n1 2.0\n\n2   4e0 # four\n").unwrap();
        assert_eq!(rows, vec![(1, 2.0), (2, 4.0)]);
        let err = parse_table("1 2\nx 3\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(parse_table("1 2 3").is_err());
    }

    #[test]
    fn certificate_holds_on_every_queried_shell() {
        let syms = [
            taibleson_symbol(params(3, 2), 1.5).unwrap(),
            damped_symbol(params(2, 1), 2.0, 0.5, 3.0).unwrap(),
            walpha_symbol(params(2, 1), WAlphaSpec::pure_power(2, 3.0), 1e-13).unwrap(),
        ];
        for s in &syms {
            let c = *s.certificate();
            let p = s.params().p_f64();
            for j in 1..30 {
                let v = s.eval(j).unwrap();
                assert!(v >= c.lower(p, j) * (1.0 - 1e-10) && v <= c.upper(p, j) * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn concurrent_evaluation_is_consistent() {
        let s = Arc::new(damped_symbol(params(3, 1), 1.0, 1.0, 4.0).unwrap());
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let s = Arc::clone(&s);
                std::thread::spawn(move || (1..50).map(|j| s.eval(j).unwrap()).collect::<Vec<_>>())
            })
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert!(results.windows(2).all(|w| w[0] == w[1]));
    }
}
