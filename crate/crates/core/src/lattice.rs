//! The level-K quotient `Z_p^n / p^K Z_p^n` as an exact finite model.
//!
//! Cosets are integer tuples `x in [0, p^K)^n`, enumerated lexicographically:
//! `index = x_1 p^{K(n-1)} + ... + x_n`. Functions constant on cosets are
//! vectors over that enumeration, integrated against the Haar weight `p^{-nK}`.
//! Frequencies `xi = eta / p^K` use the same enumeration for `eta`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::heat::{heat_kernel, KernelQuery};
use crate::padic::{GlobalParams, Order, PointAddress, UnitPhase};
use crate::series::{exp_tail_bound, pairwise_sum};
use crate::spectrum::multiplicity;
use crate::symbols::RadialSymbol;

/// Tolerance for treating a floating level-K function as mean-zero.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

/// Size limits for the dense constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCaps {
    /// Largest `p^{nK}` for which functions are built.
    pub max_cosets: usize,
    /// Largest side of a dense matrix over cosets or wavelets.
    pub max_matrix_side: usize,
}

impl Default for LevelCaps {
    fn default() -> Self {
        LevelCaps {
            max_cosets: 4096,
            max_matrix_side: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeLevel {
    params: GlobalParams,
    k: u32,
    side: u64,
    count: usize,
    caps: LevelCaps,
}

impl LatticeLevel {
    pub fn new(params: GlobalParams, k: u32) -> Result<Self> {
        Self::with_caps(params, k, LevelCaps::default())
    }

    pub fn with_caps(params: GlobalParams, k: u32, caps: LevelCaps) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("K", "level must be at least 1"));
        }
        let too_many = |needed: u128| Error::LevelCapExceeded {
            what: "cosets",
            needed,
            cap: caps.max_cosets,
        };
        let side = u128::from(params.p())
            .checked_pow(k)
            .ok_or_else(|| too_many(u128::MAX))?;
        let count = side
            .checked_pow(params.n() as u32)
            .ok_or_else(|| too_many(u128::MAX))?;
        if count > caps.max_cosets as u128 {
            return Err(too_many(count));
        }
        Ok(LatticeLevel {
            params,
            k,
            side: side as u64,
            count: count as usize,
            caps,
        })
    }

    pub fn params(&self) -> &GlobalParams {
        &self.params
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `p^K`, the number of residues per coordinate.
    pub fn side(&self) -> u64 {
        self.side
    }

    /// `p^{nK}`.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn haar_weight(&self) -> f64 {
        1.0 / self.count as f64
    }

    /// The coset tuple at an enumeration index.
    pub fn coset(&self, index: usize) -> Vec<u64> {
        let n = self.params.n();
        let mut out = vec![0; n];
        let mut rest = index as u64;
        for slot in out.iter_mut().rev() {
            *slot = rest % self.side;
            rest /= self.side;
        }
        out
    }

    pub fn index(&self, coset: &[u64]) -> usize {
        coset
            .iter()
            .fold(0u64, |acc, &x| acc * self.side + x % self.side) as usize
    }

    /// `ord` of a coset representative, capped at `K` (`Infinite` for 0).
    pub fn coset_order(&self, coset: &[u64]) -> Order {
        let p = u64::from(self.params.p());
        coset
            .iter()
            .filter(|&&x| x % self.side != 0)
            .map(|&x| {
                let mut x = x % self.side;
                let mut v = 0i64;
                while x % p == 0 {
                    x /= p;
                    v += 1;
                }
                Order::Finite(v)
            })
            .min()
            .unwrap_or(Order::Infinite)
    }

    /// Frequency shell `j` of `xi = eta / p^K`: `||xi||_p = p^j`, `0` for `eta = 0`.
    pub fn frequency_shell(&self, eta: &[u64]) -> u32 {
        match self.coset_order(eta) {
            Order::Infinite => 0,
            Order::Finite(v) => self.k - v as u32,
        }
    }

    fn check_matrix_side(&self, needed: usize) -> Result<()> {
        if needed > self.caps.max_matrix_side {
            Err(Error::LevelCapExceeded {
                what: "matrix rows",
                needed: needed as u128,
                cap: self.caps.max_matrix_side,
            })
        } else {
            Ok(())
        }
    }

    /// Per-axis table `exp(2 pi i r / p^K)`.
    fn roots(&self) -> Vec<Complex64> {
        (0..self.side)
            .map(|r| Complex64::from_polar(1.0, TAU * r as f64 / self.side as f64))
            .collect()
    }

    /// Separable character sums `out(eta) = sum_x f(x) exp(sign 2 pi i eta.x / p^K)`.
    fn character_transform(&self, values: &[Complex64], sign: i64) -> Vec<Complex64> {
        let roots = self.roots();
        let side = self.side as usize;
        let mut data = values.to_vec();
        let mut stride = 1usize;
        for _axis in 0..self.params.n() {
            let block = stride * side;
            let mut next = vec![Complex64::new(0.0, 0.0); data.len()];
            next.par_chunks_mut(block)
                .zip(data.par_chunks(block))
                .for_each(|(out, inp)| {
                    for offset in 0..stride {
                        for eta in 0..side {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for x in 0..side {
                                let r = ((eta * x) as i64 * sign).rem_euclid(side as i64) as usize;
                                acc += inp[offset + x * stride] * roots[r];
                            }
                            out[offset + eta * stride] = acc;
                        }
                    }
                });
            data = next;
            stride = block;
        }
        data
    }

    /// Coefficients `F(eta) = p^{-nK} sum_x f(x) chi(-eta.x / p^K)`.
    pub fn fourier(&self, f: &LevelKFunction) -> Vec<Complex64> {
        let w = self.haar_weight();
        self.character_transform(&f.values, -1)
            .into_iter()
            .map(|z| z * w)
            .collect()
    }

    /// `f(x) = sum_eta F(eta) chi(eta.x / p^K)`.
    pub fn inverse_fourier(&self, coefficients: &[Complex64]) -> LevelKFunction {
        LevelKFunction {
            level: *self,
            values: self.character_transform(coefficients, 1),
        }
    }

    /// Shell of each frequency in enumeration order.
    pub fn frequency_shells(&self) -> Vec<u32> {
        (0..self.count)
            .map(|i| self.frequency_shell(&self.coset(i)))
            .collect()
    }
}

/// A function constant on level-K cosets.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelKFunction {
    pub level: LatticeLevel,
    pub values: Vec<Complex64>,
}

impl LevelKFunction {
    pub fn new(level: LatticeLevel, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != level.count() {
            return Err(Error::DimensionMismatch {
                expected: level.count(),
                found: values.len(),
            });
        }
        Ok(LevelKFunction { level, values })
    }

    pub fn zero(level: LatticeLevel) -> Self {
        LevelKFunction {
            level,
            values: vec![Complex64::new(0.0, 0.0); level.count()],
        }
    }

    pub fn integral(&self) -> Complex64 {
        pairwise_sum(&self.values) * self.level.haar_weight()
    }

    /// `<f, g> = int f conj(g)`.
    pub fn inner(&self, other: &LevelKFunction) -> Complex64 {
        let terms: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .collect();
        pairwise_sum(&terms) * self.level.haar_weight()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn max_abs_diff(&self, other: &LevelKFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> LevelKFunction {
        LevelKFunction {
            level: self.level,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &LevelKFunction) -> LevelKFunction {
        LevelKFunction {
            level: self.level,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Removes the mean, giving an element of the mean-zero subspace.
    pub fn project_mean_zero(&self) -> LevelKFunction {
        let mean = self.integral();
        LevelKFunction {
            level: self.level,
            values: self.values.iter().map(|v| v - mean).collect(),
        }
    }

    fn check_mean_zero(&self) -> Result<()> {
        let integral = self.integral().norm();
        let scale = self.values.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if integral > MEAN_ZERO_TOL * scale {
            Err(Error::NotMeanZero(integral))
        } else {
            Ok(())
        }
    }
}

/// A wavelet `omega_{gamma b k}` at shell `m = 1 - gamma`.
///
/// `b = r p^gamma` is stored through the integer tuple `r in [0, p^{m-1})^n`.
/// On `Z_p^n` the wavelet is supported on `x = r mod p^{m-1}` and equals
/// `p^{n(m-1)/2} chi(k.(x - r) / p^m)` there.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WaveletIndex {
    pub gamma: i64,
    pub r: Vec<u64>,
    pub k: Vec<u32>,
}

impl WaveletIndex {
    pub fn new(params: &GlobalParams, gamma: i64, r: Vec<u64>, k: Vec<u32>) -> Result<Self> {
        if gamma > 0 {
            return Err(Error::invalid(
                "gamma",
                format!("must be <= 0 for wavelets inside the ball, got {gamma}"),
            ));
        }
        let n = params.n();
        for len in [r.len(), k.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        let modulus = u64::from(params.p())
            .checked_pow((-gamma) as u32)
            .ok_or_else(|| Error::invalid("gamma", "scale does not fit in 64 bits"))?;
        if r.iter().any(|&ri| ri >= modulus) {
            return Err(Error::invalid(
                "b",
                format!("translation digits must lie below p^{}", -gamma),
            ));
        }
        if k.iter().any(|&ki| ki >= params.p()) {
            return Err(Error::invalid("k", "entries must lie in 0..p"));
        }
        if k.iter().all(|&ki| ki == 0) {
            return Err(Error::invalid("k", "must be nonzero"));
        }
        Ok(WaveletIndex { gamma, r, k })
    }

    /// Shell `m = 1 - gamma` of the eigenvalue `A(p^m)`.
    pub fn shell(&self) -> u32 {
        (1 - self.gamma) as u32
    }
}

/// All wavelets with shells `1..=K`: by shell, then `r`, then `k`, each
/// lexicographically. The family has `p^{nK} - 1` members.
pub fn wavelet_family(level: &LatticeLevel) -> Vec<WaveletIndex> {
    let params = level.params();
    let n = params.n();
    let p = u64::from(params.p());
    let mut out = Vec::with_capacity(level.count() - 1);
    for m in 1..=level.k() {
        let span = p.pow(m - 1);
        for r_index in 0..span.pow(n as u32) {
            let r = digits_of(r_index, span, n);
            for k_index in 1..p.pow(n as u32) {
                let k = digits_of(k_index, p, n)
                    .into_iter()
                    .map(|d| d as u32)
                    .collect();
                out.push(WaveletIndex {
                    gamma: 1 - i64::from(m),
                    r: r.clone(),
                    k,
                });
            }
        }
    }
    out
}

fn digits_of(mut index: u64, base: u64, n: usize) -> Vec<u64> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// Exact description of a wavelet on the level: squared amplitude exponent
/// `n(m - 1)` and, per coset, the phase numerator over `p` or `None` off the
/// support.
#[derive(Debug, Clone)]
struct PhasePattern {
    shell: u32,
    amp_exp: u32,
    phases: Vec<Option<u32>>,
    support: Vec<usize>,
}

fn phase_pattern(idx: &WaveletIndex, level: &LatticeLevel) -> Result<PhasePattern> {
    let params = level.params();
    if idx.r.len() != params.n() || idx.k.len() != params.n() {
        return Err(Error::DimensionMismatch {
            expected: params.n(),
            found: idx.r.len(),
        });
    }
    let m = 1 - idx.gamma;
    if m < 1 {
        return Err(Error::invalid("gamma", "must be <= 0"));
    }
    if m > i64::from(level.k()) {
        return Err(Error::ScaleTooFine {
            gamma: idx.gamma,
            level: level.k(),
        });
    }
    let m = m as u32;
    let p = u64::from(params.p());
    let span = p.pow(m - 1);
    let mut phases = vec![None; level.count()];
    let mut support = Vec::new();
    for (index, slot) in phases.iter_mut().enumerate() {
        let x = level.coset(index);
        if x.iter()
            .zip(&idx.r)
            .any(|(&xi, &ri)| (xi + span - ri % span) % span != 0)
        {
            continue;
        }
        let phase = x
            .iter()
            .zip(&idx.r)
            .zip(&idx.k)
            .map(|((&xi, &ri), &ki)| {
                let u = ((xi + level.side() - ri) % level.side()) / span;
                u64::from(ki) * (u % p)
            })
            .sum::<u64>()
            % p;
        *slot = Some(phase as u32);
        support.push(index);
    }
    Ok(PhasePattern {
        shell: m,
        amp_exp: params.n() as u32 * (m - 1),
        phases,
        support,
    })
}

impl PhasePattern {
    fn to_function(&self, level: &LatticeLevel) -> LevelKFunction {
        let p = level.params().p();
        let amp = level.params().p_f64().powf(f64::from(self.amp_exp) / 2.0);
        let values = self
            .phases
            .iter()
            .map(|ph| match ph {
                Some(a) => UnitPhase::from_u64(p, u64::from(*a), 1).to_complex() * amp,
                None => Complex64::new(0.0, 0.0),
            })
            .collect();
        LevelKFunction {
            level: *level,
            values,
        }
    }
}

/// Evaluates a wavelet at every coset representative.
pub fn wavelet_eval(idx: &WaveletIndex, level: &LatticeLevel) -> Result<LevelKFunction> {
    Ok(phase_pattern(idx, level)?.to_function(level))
}

/// The same wavelet computed from its definition with exact p-adic arithmetic:
/// `p^{-n gamma/2} chi(p^{-1} k.(p^gamma x - b)) [||p^gamma x - b|| <= 1]`.
pub fn wavelet_eval_by_definition(
    idx: &WaveletIndex,
    level: &LatticeLevel,
) -> Result<LevelKFunction> {
    let params = *level.params();
    let m = 1 - idx.gamma;
    if m > i64::from(level.k()) {
        return Err(Error::ScaleTooFine {
            gamma: idx.gamma,
            level: level.k(),
        });
    }
    let top = i64::from(level.k());
    let b_coords: Vec<(i128, i128)> = idx.r.iter().map(|&r| (i128::from(r), 1)).collect();
    let b = PointAddress::from_rationals(&params, &b_coords, 0, top)?.shift(idx.gamma);
    let k_coords: Vec<(i128, i128)> = idx.k.iter().map(|&k| (i128::from(k), 1)).collect();
    let k_over_p = PointAddress::from_rationals(&params, &k_coords, 0, 1)?.shift(-1);
    let amp = params
        .p_f64()
        .powf(-(params.n() as f64) * idx.gamma as f64 / 2.0);
    let values = (0..level.count())
        .map(|index| {
            let coords: Vec<(i128, i128)> = level
                .coset(index)
                .iter()
                .map(|&x| (i128::from(x), 1))
                .collect();
            let x = PointAddress::from_rationals(&params, &coords, 0, top)?;
            let y = x.shift(idx.gamma).sub(&b)?;
            if y.ord() < Order::Finite(0) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let phase = k_over_p.dot(&y, 4 * level.k() as usize + 8)?;
            Ok(phase.character() * amp)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelKFunction {
        level: *level,
        values,
    })
}

/// The Gram matrix of the wavelet family.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub matrix: DMatrix<Complex64>,
    /// Every entry was decided exactly as 0 or 1 from phase counts.
    pub exact: bool,
}

impl GramMatrix {
    pub fn max_identity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((self.matrix[(i, j)] - target).norm());
            }
        }
        err
    }
}

/// Pairwise inner products of the wavelet family.
///
/// An entry is exactly zero when the phase differences over the common
/// support are equidistributed mod `p` (the only vanishing sums of `p`-th
/// roots of unity), and exactly one on the diagonal when
/// `p^{n(m-1)} |support| = p^{nK}`. Other entries are evaluated in floating
/// point and clear the `exact` flag.
pub fn gram_matrix(level: &LatticeLevel) -> Result<GramMatrix> {
    level.check_matrix_side(level.count() - 1)?;
    let family = wavelet_family(level);
    let patterns: Vec<PhasePattern> = family
        .iter()
        .map(|w| phase_pattern(w, level))
        .collect::<Result<_>>()?;
    let p = level.params().p();
    let size = patterns.len();
    let count = level.count() as u128;
    let roots: Vec<Complex64> = (0..p)
        .map(|a| UnitPhase::from_u64(p, u64::from(a), 1).to_complex())
        .collect();
    let rows: Vec<(Vec<Complex64>, bool)> = (0..size)
        .into_par_iter()
        .map(|i| {
            let a = &patterns[i];
            let mut hist = vec![0u64; p as usize];
            let mut row = vec![Complex64::new(0.0, 0.0); size];
            let mut exact = true;
            for (j, b) in patterns.iter().enumerate() {
                hist.iter_mut().for_each(|h| *h = 0);
                let (small, large) = if a.support.len() <= b.support.len() {
                    (a, b)
                } else {
                    (b, a)
                };
                let mut overlap = 0u64;
                for &x in &small.support {
                    if let Some(pl) = large.phases[x] {
                        let ps = small.phases[x].expect("support point");
                        let (pa, pb) = if std::ptr::eq(small, a) {
                            (ps, pl)
                        } else {
                            (pl, ps)
                        };
                        hist[((pa + p - pb) % p) as usize] += 1;
                        overlap += 1;
                    }
                }
                if overlap == 0 || hist.iter().all(|&h| h == hist[0]) {
                    continue;
                }
                let diagonal_one = i == j
                    && hist[0] == overlap
                    && u128::from(p).pow(a.amp_exp) * u128::from(overlap) == count;
                row[j] = if diagonal_one {
                    Complex64::new(1.0, 0.0)
                } else {
                    exact = false;
                    let amp = level
                        .params()
                        .p_f64()
                        .powf(f64::from(a.amp_exp + b.amp_exp) / 2.0);
                    let sum: Complex64 = hist.iter().zip(&roots).map(|(&h, z)| z * h as f64).sum();
                    sum * amp * level.haar_weight()
                };
            }
            (row, exact)
        })
        .collect();
    let exact = rows.iter().all(|r| r.1);
    let matrix = DMatrix::from_fn(size, size, |i, j| rows[i].0[j]);
    Ok(GramMatrix { matrix, exact })
}

/// Applies the multiplier `mult(j)` at frequency shell `j >= 1`; the zero
/// frequency is annihilated.
pub fn fourier_multiplier_apply(
    level: &LatticeLevel,
    f: &LevelKFunction,
    mult: impl Fn(u32) -> Result<f64>,
) -> Result<LevelKFunction> {
    if f.values.len() != level.count() {
        return Err(Error::DimensionMismatch {
            expected: level.count(),
            found: f.values.len(),
        });
    }
    let table = (0..=level.k())
        .map(|j| if j == 0 { Ok(0.0) } else { mult(j) })
        .collect::<Result<Vec<_>>>()?;
    let shells = level.frequency_shells();
    let coefficients: Vec<Complex64> = level
        .fourier(f)
        .into_iter()
        .zip(&shells)
        .map(|(c, &j)| c * table[j as usize])
        .collect();
    Ok(level.inverse_fourier(&coefficients))
}

/// `A f` for mean-zero `f`: the symbol acts by `A(||xi||_p)` on frequencies.
pub fn fourier_diagonal_apply(
    symbol: &RadialSymbol,
    level: &LatticeLevel,
    f: &LevelKFunction,
) -> Result<LevelKFunction> {
    f.check_mean_zero()?;
    fourier_multiplier_apply(level, f, |j| symbol.eval(i64::from(j)))
}

fn check_nonnegative_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("t", format!("must be nonnegative, got {t}")))
    }
}

fn shell_decays(symbol: &RadialSymbol, level: &LatticeLevel, t: f64) -> Result<Vec<f64>> {
    (1..=level.k())
        .map(|j| Ok((-t * symbol.eval(i64::from(j))?).exp()))
        .collect()
}

/// Matrix of `T(t)` on coset values: `M[x, y] = p^{-nK} k_t(x - y)` with
/// `k_t(z) = sum_{eta != 0} e^{-t A(||eta/p^K||)} chi(eta.z / p^K)`.
///
/// `M(t)` kills constants and at `t = 0` is the identity on mean-zero vectors.
pub fn semigroup_matrix(
    symbol: &RadialSymbol,
    level: &LatticeLevel,
    t: f64,
) -> Result<DMatrix<f64>> {
    check_nonnegative_time(t)?;
    level.check_matrix_side(level.count())?;
    let decays = shell_decays(symbol, level, t)?;
    let shells = level.frequency_shells();
    let multipliers: Vec<Complex64> = shells
        .iter()
        .map(|&j| Complex64::from(if j == 0 { 0.0 } else { decays[j as usize - 1] }))
        .collect();
    let kernel = level.inverse_fourier(&multipliers);
    let kernel: Vec<f64> = kernel.values.iter().map(|z| z.re).collect();
    Ok(difference_matrix(level, |z| {
        kernel[z] * level.haar_weight()
    }))
}

/// `M[x, y] = entry(index of x - y mod p^K)`.
fn difference_matrix(level: &LatticeLevel, entry: impl Fn(usize) -> f64 + Sync) -> DMatrix<f64> {
    let count = level.count();
    let side = level.side();
    let rows: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = level.coset(i);
            (0..count)
                .map(|j| {
                    let y = level.coset(j);
                    let diff: Vec<u64> = x
                        .iter()
                        .zip(&y)
                        .map(|(&a, &b)| (a + side - b) % side)
                        .collect();
                    entry(level.index(&diff))
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(count, count, |i, j| rows[i][j])
}

/// Average of `K(x, t)` over the coset `b + p^K Z_p^n`.
///
/// For `ord(b) < 0` the coset lies outside the ball and the average is 0; for
/// `0 <= ord(b) < K` the kernel is constant on the coset. For `b` in
/// `p^K Z_p^n` only the frequencies `||xi|| <= p^K` survive the averaging,
/// leaving the finite sum `sum_{j=1}^K mult_j e^{-t A(p^j)}`.
pub fn kernel_coset_average(
    symbol: &RadialSymbol,
    level: &LatticeLevel,
    b: &PointAddress,
    t: f64,
    tol: f64,
) -> Result<Enclosure> {
    if b.dim() != level.params().n() {
        return Err(Error::DimensionMismatch {
            expected: level.params().n(),
            found: b.dim(),
        });
    }
    let ordb = b.ord();
    if ordb >= Order::Finite(i64::from(level.k())) {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        return zero_coset_average(symbol, level, t);
    }
    heat_kernel(symbol, KernelQuery::new(ordb, t, tol)?)
}

fn zero_coset_average(symbol: &RadialSymbol, level: &LatticeLevel, t: f64) -> Result<Enclosure> {
    let decays = shell_decays(symbol, level, t)?;
    let terms = decays
        .iter()
        .enumerate()
        .map(|(j, d)| Ok(multiplicity(level.params(), j as u32 + 1)? as f64 * d))
        .collect::<Result<Vec<_>>>()?;
    Ok(Enclosure::exact(pairwise_sum(&terms)))
}

/// Coset averages of `K(., t)` in enumeration order.
pub fn kernel_coset_averages(
    symbol: &RadialSymbol,
    level: &LatticeLevel,
    t: f64,
    tol: f64,
) -> Result<Vec<Enclosure>> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    // One evaluation per order class.
    let mut by_order: BTreeMap<Order, Enclosure> = BTreeMap::new();
    (0..level.count())
        .map(|i| {
            let ord = level.coset_order(&level.coset(i));
            if let Some(e) = by_order.get(&ord) {
                return Ok(*e);
            }
            let e = match ord {
                Order::Infinite => zero_coset_average(symbol, level, t)?,
                o => heat_kernel(symbol, KernelQuery::new(o, t, tol)?)?,
            };
            by_order.insert(ord, e);
            Ok(e)
        })
        .collect()
}

/// `M(t)` built as convolution with the kernel's coset averages:
/// `(K * f)(x) = sum_y p^{-nK} avg_{x - y + p^K Z_p^n} K f(y)`.
pub fn semigroup_matrix_by_convolution(
    symbol: &RadialSymbol,
    level: &LatticeLevel,
    t: f64,
    tol: f64,
) -> Result<(DMatrix<f64>, f64)> {
    level.check_matrix_side(level.count())?;
    let averages = kernel_coset_averages(symbol, level, t, tol)?;
    let bound = averages.iter().map(|e| e.bound).fold(0.0, f64::max) * level.haar_weight();
    let w = level.haar_weight();
    Ok((difference_matrix(level, |z| averages[z].value * w), bound))
}

/// A single verification outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub check: String,
    pub params: BTreeMap<String, f64>,
    pub max_error: f64,
    pub certified_bound: f64,
    pub pass: bool,
}

impl VerificationRecord {
    fn new(
        check: &str,
        params: &[(&str, f64)],
        max_error: f64,
        certified_bound: f64,
        pass: bool,
    ) -> Self {
        VerificationRecord {
            check: check.to_string(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            max_error,
            certified_bound,
            pass,
        }
    }
}

fn level_params(level: &LatticeLevel) -> Vec<(&'static str, f64)> {
    vec![
        ("p", f64::from(level.params().p())),
        ("n", level.params().n() as f64),
        ("K", f64::from(level.k())),
    ]
}

/// `(1 - p^{-n}) sum_{j > K} p^{n j} e^{-t c0 p^{j beta}}`.
pub fn mercer_tail_bound(symbol: &RadialSymbol, level: &LatticeLevel, t: f64) -> f64 {
    let params = level.params();
    let c = symbol.certificate();
    let (ln_p, n) = (params.ln_p(), params.n() as f64);
    let tau = t * c.c0;
    let mut last = i64::from(level.k());
    let mut head = 0.0;
    // Sum explicitly until the geometric bound applies.
    loop {
        if let Some(tail) = exp_tail_bound(ln_p, n, c.beta, tau, last) {
            return params.unit_sphere_volume() * (head + tail);
        }
        last += 1;
        head += crate::series::ln_majorant_term(ln_p, n, c.beta, tau, last).exp();
    }
}

/// Compares `K(x - y, t)` at coset representatives with the wavelet sum over
/// shells `m <= K`. Off the diagonal the two agree exactly; on the diagonal
/// the wavelet sum misses the shells `j > K`.
pub fn mercer_check(
    symbol: &RadialSymbol,
    level: &LatticeLevel,
    t: f64,
    tol: f64,
) -> Result<VerificationRecord> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    level.check_matrix_side(level.count())?;
    let family = wavelet_family(level);
    let patterns: Vec<PhasePattern> = family
        .iter()
        .map(|w| phase_pattern(w, level))
        .collect::<Result<_>>()?;
    let decays = shell_decays(symbol, level, t)?;
    let count = level.count();
    let mut sum = DMatrix::<Complex64>::zeros(count, count);
    for pattern in &patterns {
        let f = pattern.to_function(level);
        let d = decays[pattern.shell as usize - 1];
        for &x in &pattern.support {
            for &y in &pattern.support {
                sum[(x, y)] += f.values[x] * f.values[y].conj() * d;
            }
        }
    }
    let mut by_order: BTreeMap<Order, Enclosure> = BTreeMap::new();
    let side = level.side();
    let mut max_dev = 0.0f64;
    let mut kernel_bound = 0.0f64;
    for x in 0..count {
        let cx = level.coset(x);
        for y in 0..count {
            let cy = level.coset(y);
            let diff: Vec<u64> = cx
                .iter()
                .zip(&cy)
                .map(|(&a, &b)| (a + side - b) % side)
                .collect();
            let ord = level.coset_order(&diff);
            let k = match by_order.get(&ord) {
                Some(e) => *e,
                None => {
                    let e = heat_kernel(symbol, KernelQuery::new(ord, t, tol)?)?;
                    by_order.insert(ord, e);
                    e
                }
            };
            kernel_bound = kernel_bound.max(k.bound);
            max_dev = max_dev.max((sum[(x, y)] - k.value).norm());
        }
    }
    let tail = mercer_tail_bound(symbol, level, t);
    let certified = tail + kernel_bound;
    let mut params = level_params(level);
    params.push(("t", t));
    Ok(VerificationRecord::new(
        "mercer",
        &params,
        max_dev,
        certified,
        max_dev <= certified + 1e-10,
    ))
}

fn max_entry(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// `||M(t) M(s) - M(t + s)||_max`.
pub fn semigroup_law_check(
    symbol: &RadialSymbol,
    level: &LatticeLevel,
    t: f64,
    s: f64,
) -> Result<VerificationRecord> {
    let mt = semigroup_matrix(symbol, level, t)?;
    let ms = semigroup_matrix(symbol, level, s)?;
    let mts = semigroup_matrix(symbol, level, t + s)?;
    let err = max_entry(&(&mt * &ms - &mts));
    let mut params = level_params(level);
    params.extend([("t", t), ("s", s)]);
    Ok(VerificationRecord::new(
        "semigroup-law",
        &params,
        err,
        0.0,
        err <= 1e-12,
    ))
}

/// Largest singular value of `M(t)` against `max_{j <= K} e^{-t A(p^j)}`.
pub fn contraction_check(
    symbol: &RadialSymbol,
    level: &LatticeLevel,
    t: f64,
) -> Result<VerificationRecord> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let m = semigroup_matrix(symbol, level, t)?;
    let norm = m.singular_values().iter().copied().fold(0.0, f64::max);
    let expected = shell_decays(symbol, level, t)?
        .into_iter()
        .fold(0.0, f64::max);
    let err = (norm - expected).abs();
    let mut params = level_params(level);
    params.push(("t", t));
    Ok(VerificationRecord::new(
        "contraction",
        &params,
        err,
        0.0,
        err <= 1e-10 && norm < 1.0,
    ))
}

/// `||(M(t) f - f) / t + A f||` along a grid of `t -> 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub rows: Vec<(f64, f64)>,
    /// Slope of `log error` against `log t`; `None` when all errors vanish.
    pub slope: Option<f64>,
    pub pass: bool,
}

pub fn generator_check(
    symbol: &RadialSymbol,
    level: &LatticeLevel,
    f: &LevelKFunction,
    t_grid: &[f64],
) -> Result<GeneratorReport> {
    f.check_mean_zero()?;
    let af = fourier_diagonal_apply(symbol, level, f)?;
    let rows = t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(Error::NonPositiveTime(t));
            }
            let decays = shell_decays(symbol, level, t)?;
            let mtf = fourier_multiplier_apply(level, f, |j| Ok(decays[j as usize - 1]))?;
            let diff = mtf
                .add(&f.scale(Complex64::from(-1.0)))
                .scale(Complex64::from(1.0 / t))
                .add(&af);
            Ok((t, diff.l2_norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = af.l2_norm().max(f.l2_norm()).max(1.0);
    if rows.iter().all(|r| r.1 <= 1e-12 * scale) {
        return Ok(GeneratorReport {
            rows,
            slope: None,
            pass: true,
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.1 > 0.0)
        .map(|r| (r.0.ln(), r.1.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { Some(sxy / sxx) } else { None };
    let pass = slope.is_some_and(|s| (s - 1.0).abs() <= 0.1);
    Ok(GeneratorReport { rows, slope, pass })
}

/// A fixed mean-zero test function with components at every shell.
pub fn probe_function(level: &LatticeLevel) -> LevelKFunction {
    let values = (0..level.count())
        .map(|i| {
            let x = i as f64;
            Complex64::new(
                (1.7 * x + 0.3).cos() + 0.25 * (0.11 * x * x).sin(),
                (0.9 * x).sin(),
            )
        })
        .collect();
    LevelKFunction {
        level: *level,
        values,
    }
    .project_mean_zero()
}

/// Runs every level-K identity for one symbol and returns one record each.
pub fn verify_suite(
    symbol: &RadialSymbol,
    level: &LatticeLevel,
    t: f64,
    tol: f64,
) -> Result<Vec<VerificationRecord>> {
    let base = level_params(level);
    let with_t = {
        let mut v = base.clone();
        v.push(("t", t));
        v
    };
    let mut out = Vec::new();

    let gram = gram_matrix(level)?;
    let err = gram.max_identity_error();
    out.push(VerificationRecord::new(
        "gram-identity",
        &base,
        err,
        0.0,
        err <= 1e-12,
    ));

    let family = wavelet_family(level);
    let mut eig_err = 0.0f64;
    let mut fn_err = 0.0f64;
    let mut wavelets = Vec::with_capacity(family.len());
    for idx in &family {
        let w = wavelet_eval(idx, level)?;
        let lambda = symbol.eval(i64::from(idx.shell()))?;
        let aw = fourier_diagonal_apply(symbol, level, &w)?;
        eig_err = eig_err.max(aw.max_abs_diff(&w.scale(Complex64::from(lambda))) / lambda.max(1.0));
        fn_err = fn_err
            .max(w.integral().norm())
            .max((w.l2_norm() - 1.0).abs());
        wavelets.push(w);
    }
    out.push(VerificationRecord::new(
        "eigenfunction",
        &base,
        eig_err,
        0.0,
        eig_err <= 1e-12,
    ));
    out.push(VerificationRecord::new(
        "wavelet-normalization",
        &base,
        fn_err,
        0.0,
        fn_err <= 1e-12,
    ));

    let f = probe_function(level);
    let mut recon = LevelKFunction::zero(*level);
    for w in &wavelets {
        recon = recon.add(&w.scale(f.inner(w)));
    }
    let err = recon.max_abs_diff(&f);
    out.push(VerificationRecord::new(
        "completeness",
        &base,
        err,
        0.0,
        err <= 1e-12,
    ));

    let m = semigroup_matrix(symbol, level, t)?;
    let expected = pairwise_sum(
        &shell_decays(symbol, level, t)?
            .iter()
            .enumerate()
            .map(|(j, d)| Ok(multiplicity(level.params(), j as u32 + 1)? as f64 * d))
            .collect::<Result<Vec<_>>>()?,
    );
    let err = (m.trace() - expected).abs();
    out.push(VerificationRecord::new(
        "finite-trace",
        &with_t,
        err,
        0.0,
        err <= 1e-12,
    ));

    let fv = nalgebra::DVector::from_iterator(level.count(), f.values.iter().copied());
    let mc = m.map(Complex64::from);
    let image = LevelKFunction {
        level: *level,
        values: (mc * fv).iter().copied().collect(),
    };
    let err = image.integral().norm();
    out.push(VerificationRecord::new(
        "mean-zero-preservation",
        &with_t,
        err,
        0.0,
        err <= 1e-14,
    ));

    let (conv, bound) = semigroup_matrix_by_convolution(symbol, level, t, tol)?;
    let err = max_entry(&(&conv - &m));
    out.push(VerificationRecord::new(
        "convolution-fourier",
        &with_t,
        err,
        bound,
        err <= bound + 1e-10,
    ));

    let averages = kernel_coset_averages(symbol, level, t, tol)?;
    let total =
        pairwise_sum(&averages.iter().map(|e| e.value).collect::<Vec<_>>()) * level.haar_weight();
    let bound = averages.iter().map(|e| e.bound).sum::<f64>() * level.haar_weight();
    out.push(VerificationRecord::new(
        "kernel-zero-mean",
        &with_t,
        total.abs(),
        bound,
        total.abs() <= bound + 1e-12,
    ));

    out.push(mercer_check(symbol, level, t, tol)?);
    out.push(semigroup_law_check(symbol, level, 0.5 * t, 0.5 * t)?);
    out.push(contraction_check(symbol, level, t)?);

    // First-order regime needs t lambda_max small.
    let lambda_max = (1..=level.k())
        .map(|j| symbol.eval(i64::from(j)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(1.0f64, f64::max);
    let grid: Vec<f64> = (4..=12).map(|k| 2f64.powi(-k) / lambda_max).collect();
    let gen = generator_check(symbol, level, &f, &grid)?;
    let err = gen.rows.last().map_or(0.0, |r| r.1);
    let mut gp = base.clone();
    gp.push(("slope", gen.slope.unwrap_or(f64::NAN)));
    out.push(VerificationRecord::new(
        "generator",
        &gp,
        err,
        0.0,
        gen.pass,
    ));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{damped_symbol, symbol_from_table, taibleson_symbol};
    use proptest::prelude::*;

    fn params(p: u32, n: usize) -> GlobalParams {
        GlobalParams::new(p, n).unwrap()
    }

    fn level(p: u32, n: usize, k: u32) -> LatticeLevel {
        LatticeLevel::new(params(p, n), k).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::from(x)
    }

    #[test]
    fn enumeration_round_trips() {
        let l = level(3, 2, 2);
        assert_eq!(l.count(), 81);
        assert_eq!(l.coset(10), vec![1, 1]);
        for i in 0..l.count() {
            assert_eq!(l.index(&l.coset(i)), i);
        }
        assert_eq!(l.haar_weight() * l.count() as f64, 1.0);
        assert!(matches!(
            LatticeLevel::new(params(2, 1), 13),
            Err(Error::LevelCapExceeded { what: "cosets", .. })
        ));
    }

    #[test]
    fn wavelet_example() {
        let l = level(2, 1, 2);
        let idx = WaveletIndex::new(l.params(), 0, vec![0], vec![1]).unwrap();
        let w = wavelet_eval(&idx, &l).unwrap();
        let expect = [1.0, -1.0, 1.0, -1.0];
        for (v, e) in w.values.iter().zip(expect) {
            assert!((v - c(e)).norm() < 1e-15);
        }
        assert!(w.integral().norm() < 1e-16);
        assert!((w.l2_norm() - 1.0).abs() < 1e-15);
        let fine = WaveletIndex::new(l.params(), -2, vec![0], vec![1]).unwrap();
        assert_eq!(
            wavelet_eval(&fine, &l),
            Err(Error::ScaleTooFine {
                gamma: -2,
                level: 2
            })
        );
        assert!(WaveletIndex::new(l.params(), 0, vec![0], vec![0]).is_err());
    }

    #[test]
    fn wavelets_agree_with_definition() {
        for (p, n, k) in [(2u32, 1usize, 3u32), (3, 1, 2), (2, 2, 2), (3, 2, 1)] {
            let l = level(p, n, k);
            for idx in wavelet_family(&l) {
                let a = wavelet_eval(&idx, &l).unwrap();
                let b = wavelet_eval_by_definition(&idx, &l).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-13, "{idx:?}");
            }
        }
    }

    #[test]
    fn family_sizes() {
        for (p, n, k) in [(2u32, 1usize, 3u32), (3, 1, 2), (2, 2, 3), (3, 2, 2)] {
            let l = level(p, n, k);
            assert_eq!(wavelet_family(&l).len(), l.count() - 1);
        }
    }

    #[test]
    fn gram_is_exact_identity() {
        for (p, n, k) in [
            (2u32, 1usize, 3u32),
            (3, 1, 2),
            (2, 1, 1),
            (2, 2, 3),
            (3, 2, 2),
        ] {
            let g = gram_matrix(&level(p, n, k)).unwrap();
            assert!(g.exact, "p={p} n={n} K={k}");
            assert_eq!(g.max_identity_error(), 0.0);
        }
    }

    #[test]
    fn eigenfunction_identity() {
        for (p, n, k) in [(2u32, 1usize, 3u32), (3, 1, 3), (2, 2, 3), (3, 2, 2)] {
            let l = level(p, n, k);
            let s = damped_symbol(*l.params(), 1.3, 1.0, 2.0).unwrap();
            for idx in wavelet_family(&l) {
                let w = wavelet_eval(&idx, &l).unwrap();
                let lambda = s.eval(i64::from(idx.shell())).unwrap();
                let aw = fourier_diagonal_apply(&s, &l, &w).unwrap();
                assert!(aw.max_abs_diff(&w.scale(c(lambda))) <= 1e-12 * lambda.max(1.0));
            }
        }
    }

    #[test]
    fn diagonal_apply_rejects_constants() {
        let l = level(2, 1, 2);
        let s = taibleson_symbol(*l.params(), 1.0).unwrap();
        let one = LevelKFunction::new(l, vec![c(1.0); 4]).unwrap();
        assert!(matches!(
            fourier_diagonal_apply(&s, &l, &one),
            Err(Error::NotMeanZero(_))
        ));
    }

    #[test]
    fn semigroup_matrix_examples() {
        let l = level(2, 1, 2);
        let s = taibleson_symbol(*l.params(), 1.0).unwrap();
        let m0 = semigroup_matrix(&s, &l, 0.0).unwrap();
        let f = probe_function(&l);
        let fv = nalgebra::DVector::from_iterator(4, f.values.iter().copied());
        assert!((m0.map(Complex64::from) * &fv - &fv).camax() < 1e-15);
        let m1 = semigroup_matrix(&s, &l, 1.0).unwrap();
        assert!((m1.trace() - 0.171_966_561_014_081_05).abs() < 1e-15);
        assert!(semigroup_matrix(&s, &l, -1.0).is_err());
    }

    #[test]
    fn coset_averages() {
        let l = level(2, 1, 3);
        let s = taibleson_symbol(*l.params(), 1.0).unwrap();
        let b = PointAddress::from_integers(l.params(), &[1]).unwrap();
        let e = kernel_coset_average(&s, &l, &b, 1.0, 1e-12).unwrap();
        assert!((e.value + (-2f64).exp()).abs() < 1e-16);
        let outside = PointAddress::scalar(2, 1, 2, -1, 3).unwrap();
        assert_eq!(
            kernel_coset_average(&s, &l, &outside, 1.0, 1e-12)
                .unwrap()
                .value,
            0.0
        );
        let avgs = kernel_coset_averages(&s, &l, 1.0, 1e-12).unwrap();
        let total: f64 = avgs.iter().map(|e| e.value).sum::<f64>() * l.haar_weight();
        assert!(total.abs() < 1e-15);
    }

    #[test]
    fn convolution_matches_fourier() {
        for (p, n, k) in [(2u32, 1usize, 3u32), (3, 1, 2), (2, 2, 2)] {
            let l = level(p, n, k);
            let s = damped_symbol(*l.params(), 1.0, 1.0, 2.0).unwrap();
            let (conv, _) = semigroup_matrix_by_convolution(&s, &l, 0.7, 1e-12).unwrap();
            let four = semigroup_matrix(&s, &l, 0.7).unwrap();
            assert!(max_entry(&(conv - four)) < 1e-12);
        }
    }

    #[test]
    fn mercer_examples() {
        let l = level(2, 1, 3);
        let s = taibleson_symbol(*l.params(), 1.0).unwrap();
        let r = mercer_check(&s, &l, 1.0, 1e-13).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.certified_bound - 9.002_816_003_807_217e-7).abs() < 1e-12);
        assert!((r.max_error - 9.002_816_003_807_217e-7).abs() < 1e-12);
        let l1 = level(2, 1, 1);
        let r = mercer_check(&s, &l1, 4.0, 1e-14).unwrap();
        assert!(r.pass && (r.certified_bound - 2.250_704_000_951_804e-7).abs() < 1e-13);
        // Without the tail allowance the truncation shows at small t.
        let l2 = level(2, 1, 2);
        let r = mercer_check(&s, &l2, 0.01, 1e-12).unwrap();
        assert!(r.max_error > 1e-10 + 1.0);
        assert!(r.pass);
    }

    #[test]
    fn semigroup_and_contraction() {
        let l = level(2, 1, 3);
        let s = taibleson_symbol(*l.params(), 1.0).unwrap();
        assert!(semigroup_law_check(&s, &l, 0.5, 0.5).unwrap().pass);
        let d = damped_symbol(*l.params(), 1.0, 1.0, 2.0).unwrap();
        assert!(semigroup_law_check(&d, &l, 2.0, 2.0).unwrap().pass);
        let r = contraction_check(&s, &l, 1.0).unwrap();
        assert!(r.pass, "{r:?}");
        let mut prev = 0.0;
        for k in 0..10 {
            let t = 2f64.powi(-k);
            let m = semigroup_matrix(&s, &l, t).unwrap();
            let norm = m.singular_values().max();
            assert!(norm < 1.0 && norm > prev);
            prev = norm;
        }
        // Non-monotone symbol: the norm comes from shell 2.
        let table =
            symbol_from_table(*l.params(), &[(1, 3.9), (2, 3.5), (3, 9.0)], 1.0, 0.5, 2.0).unwrap();
        let m = semigroup_matrix(&table, &l, 1.0).unwrap();
        assert!((m.singular_values().max() - (-3.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn generator_converges_at_first_order() {
        let l = level(3, 1, 2);
        let s = taibleson_symbol(*l.params(), 1.0).unwrap();
        let idx = WaveletIndex::new(l.params(), 0, vec![0], vec![2]).unwrap();
        let w = wavelet_eval(&idx, &l).unwrap();
        let grid: Vec<f64> = (4..=12).map(|k| 2f64.powi(-k)).collect();
        let r = generator_check(&s, &l, &w, &grid).unwrap();
        assert!(r.pass, "{r:?}");
        let lambda = 3.0f64;
        for &(t, e) in &r.rows {
            let scalar = ((-t * lambda).exp() - 1.0) / t + lambda;
            assert!((e - scalar).abs() < 1e-9);
        }
        let zero = generator_check(&s, &l, &LevelKFunction::zero(l), &grid).unwrap();
        assert!(zero.pass && zero.slope.is_none());
    }

    #[test]
    fn full_suite_passes() {
        for (p, n, k) in [(2u32, 1usize, 3u32), (3, 1, 2), (2, 2, 2)] {
            let l = level(p, n, k);
            let s = damped_symbol(*l.params(), 1.0, 1.0, 2.0).unwrap();
            for rec in verify_suite(&s, &l, 1.0, 1e-12).unwrap() {
                assert!(rec.pass, "{rec:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn reconstruction_and_mean_zero(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 27)) {
            let l = level(3, 1, 3);
            let f = LevelKFunction::new(l, values.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
                .unwrap()
                .project_mean_zero();
            let mut recon = LevelKFunction::zero(l);
            for idx in wavelet_family(&l) {
                let w = wavelet_eval(&idx, &l).unwrap();
                recon = recon.add(&w.scale(f.inner(&w)));
            }
            prop_assert!(recon.max_abs_diff(&f) <= 1e-12);
            let s = taibleson_symbol(*l.params(), 1.5).unwrap();
            let m = semigroup_matrix(&s, &l, 0.3).unwrap().map(Complex64::from);
            let fv = nalgebra::DVector::from_iterator(l.count(), f.values.iter().copied());
            let image = LevelKFunction::new(l, (m * fv).iter().copied().collect()).unwrap();
            prop_assert!(image.integral().norm() <= 1e-14);
        }
    }
}
