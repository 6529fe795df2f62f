//! Fixtures shared by the benchmarks.

use padic_heat::{damped_symbol, taibleson_symbol, GlobalParams, LatticeLevel, RadialSymbol};

pub fn params(p: u32, n: usize) -> GlobalParams {
    GlobalParams::new(p, n).expect("valid parameters")
}

pub fn taibleson(p: u32, n: usize, beta: f64) -> RadialSymbol {
    taibleson_symbol(params(p, n), beta).expect("valid symbol")
}

pub fn damped(p: u32, n: usize) -> RadialSymbol {
    damped_symbol(params(p, n), 1.0, 1.0, 2.0).expect("valid symbol")
}

pub fn level(p: u32, n: usize, k: u32) -> LatticeLevel {
    LatticeLevel::new(params(p, n), k).expect("level within caps")
}
