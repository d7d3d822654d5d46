//! Discrete Grünwald-Letnikov sums and the exact finite-N weights.

use crate::error::{Error, Result};
use crate::jets::CatalogFn;
use crate::specials::binom_general;
use crate::summation::CompensatedSum;

use twofloat::TwoFloat;

/// Largest natural logarithm whose exponential is a finite f64.
const LN_MAX: f64 = 709.782_712_893_384;

/// Uniform grid `x - j h`, `h = x / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    x: f64,
    n_grid: usize,
}

impl GridSpec {
    pub fn new(x: f64, n_grid: usize) -> Result<Self> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::invalid(format!("grid end point must be finite and > 0, got {x}")));
        }
        if n_grid == 0 {
            return Err(Error::invalid("grid needs at least one point"));
        }
        Ok(Self { x, n_grid })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    pub fn h(&self) -> f64 {
        self.x / self.n_grid as f64
    }
}

/// `h^{-q} Σ_{j=0}^{N-1} (-1)^j C(q, j) f(x - j h)`.
///
/// The signed binomials follow `c_j = c_{j-1} (j - 1 - q) / j`. The left end
/// point `f(0)` is never sampled.
pub fn gl_sum(f: &CatalogFn, q: f64, grid: &GridSpec) -> Result<f64> {
    if !q.is_finite() || q < 0.0 {
        return Err(Error::invalid(format!("order must be finite and >= 0, got {q}")));
    }
    let h = grid.h();
    let x = grid.x();
    let mut coeff = 1.0;
    let mut acc = CompensatedSum::new();
    for j in 0..grid.n_grid() {
        if j > 0 {
            let jf = j as f64;
            coeff *= (jf - 1.0 - q) / jf;
        }
        acc.add(coeff * f.eval(x - j as f64 * h)?);
    }
    Ok(acc.value() * h.powf(-q))
}

/// Which side of the inner-sum identity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSumMode {
    Direct,
    Closed,
}

fn binom_integer(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Direct: `Σ_{j=k}^{N-1} (-1)^{j-k} C(j, k) C(q, j)`.
/// Closed: `(-1)^{N-k+1} (N-k)/(q-k) C(N, k) C(q, N)`.
pub fn inner_sum(q: f64, k: usize, n: usize, mode: InnerSumMode) -> Result<f64> {
    if n == 0 || k >= n {
        return Err(Error::invalid(format!("inner sum needs k < N, got k = {k}, N = {n}")));
    }
    match mode {
        InnerSumMode::Direct => {
            // double-double: near-integer q cancels by up to seven digits
            let mut c = TwoFloat::from(1.0);
            let mut acc = TwoFloat::from(0.0);
            for j in 0..n {
                if j > 0 {
                    c = c * (TwoFloat::from(q) - (j - 1) as f64) / j as f64;
                }
                if j >= k {
                    let term = c * binom_integer(j, k);
                    acc = if (j - k).is_multiple_of(2) { acc + term } else { acc - term };
                }
            }
            Ok(f64::from(acc))
        }
        InnerSumMode::Closed => {
            let d = q - k as f64;
            if d == 0.0 {
                return Err(Error::invalid("closed inner sum is undefined for q = k"));
            }
            let sign = if (n - k + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            Ok(sign * (n - k) as f64 / d * binom_integer(n, k) * binom_general(q, n))
        }
    }
}

/// Exact finite-N weight of `f^(k)(x)`,
/// `(-1)^{N-k+1} (N-k) h^{k-q} / (q-k) · C(N, k) · C(q, N)`,
/// accumulated as a logarithm with a separate sign.
pub fn weight_exact(q: f64, k: usize, n: usize, h: f64) -> Result<f64> {
    if !q.is_finite() || (q - q.round()).abs() < 1e-12 {
        return Err(Error::invalid(format!("exact weight needs non-integer q, got {q}")));
    }
    if k >= n {
        return Err(Error::invalid(format!("exact weight needs k < N, got k = {k}, N = {n}")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!("step must be finite and > 0, got {h}")));
    }
    let kf = k as f64;
    let mut negative = (n - k + 1) % 2 == 1;
    let mut log_mag = ((n - k) as f64).ln() + (kf - q) * h.ln() - (q - kf).abs().ln();
    if q < kf {
        negative = !negative;
    }
    let kk = k.min(n - k);
    for i in 0..kk {
        log_mag += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    for i in 0..n {
        let factor = q - i as f64;
        if factor < 0.0 {
            negative = !negative;
        }
        log_mag += factor.abs().ln() - ((i + 1) as f64).ln();
    }
    if log_mag > LN_MAX {
        return Err(Error::Overflow(format!(
            "exact weight log-magnitude {log_mag} exceeds f64 range"
        )));
    }
    let mag = log_mag.exp();
    Ok(if negative { -mag } else { mag })
}
