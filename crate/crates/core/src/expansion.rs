//! Truncated integer-derivative series for fractional derivatives.
//!
//! For order `q > 0` and base point `a < x` every definition shares the weight
//!
//! ```text
//! w_k(x) = C(q, k) (x - a)^(k - q) / Γ(k - q + 1)
//! ```
//!
//! * Grünwald-Letnikov (base fixed at 0) and Riemann-Liouville:
//!   `Σ_k w_k f^(k)(x)`.
//! * Caputo: each `f^(j)(x)` is replaced by the bracket
//!   `f^(j)(x) - Σ_{k=j}^{n-1} f^(k)(a) (x - a)^(k - j) / (k - j)!`
//!   with `n = ⌈q⌉`.
//!
//! "N terms" always means indices `k = 0..N-1`. Terms are summed in
//! ascending `k`, so repeated runs are bit-identical.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::jets::{CatalogFn, Jet, MAX_ORDER};
use crate::specials::{binom_general, gamma, hermite, recip_gamma, sin_pi};

/// Tolerance under which a fractional order is treated as an integer.
pub const INTEGER_TOLERANCE: f64 = 1e-12;

/// A fractional order q > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order {
    q: f64,
    integer: bool,
}

impl Order {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 {
            return Err(Error::invalid(format!("fractional order must be finite and > 0, got {q}")));
        }
        let integer = (q - q.round()).abs() < INTEGER_TOLERANCE;
        Ok(Self {
            q: if integer { q.round() } else { q },
            integer,
        })
    }

    /// The order; snapped to the nearest integer when within tolerance.
    pub fn value(&self) -> f64 {
        self.q
    }

    pub fn is_integer(&self) -> bool {
        self.integer
    }

    /// ⌈q⌉: the number of base-point derivatives a Caputo derivative removes.
    pub fn ceiling(&self) -> usize {
        if self.integer {
            self.q as usize
        } else {
            self.q.floor() as usize + 1
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Definition {
    GrunwaldLetnikov,
    RiemannLiouville,
    Caputo,
}

impl Definition {
    pub fn short_name(&self) -> &'static str {
        match self {
            Definition::GrunwaldLetnikov => "gl",
            Definition::RiemannLiouville => "rl",
            Definition::Caputo => "caputo",
        }
    }
}

impl fmt::Display for Definition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Definition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gl" | "grunwald-letnikov" => Ok(Definition::GrunwaldLetnikov),
            "rl" | "riemann-liouville" => Ok(Definition::RiemannLiouville),
            "caputo" | "c" => Ok(Definition::Caputo),
            other => Err(Error::invalid(format!("unknown definition `{other}` (expected gl, rl or caputo)"))),
        }
    }
}

/// Which derivative to expand, around which base point, with how many terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionConfig {
    pub definition: Definition,
    pub base: f64,
    pub n_terms: usize,
    pub order: Order,
}

impl ExpansionConfig {
    pub fn new(definition: Definition, order: Order, base: f64, n_terms: usize) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::invalid("the series needs at least one term"));
        }
        if n_terms - 1 > MAX_ORDER {
            return Err(Error::invalid(format!("at most {} terms are supported", MAX_ORDER + 1)));
        }
        if !base.is_finite() {
            return Err(Error::invalid("base point must be finite"));
        }
        if definition == Definition::GrunwaldLetnikov && base != 0.0 {
            return Err(Error::invalid(format!("the Grünwald-Letnikov series has base 0, got {base}")));
        }
        Ok(Self {
            definition,
            base,
            n_terms,
            order,
        })
    }

    pub fn grunwald_letnikov(q: f64, n_terms: usize) -> Result<Self> {
        Self::new(Definition::GrunwaldLetnikov, Order::new(q)?, 0.0, n_terms)
    }

    pub fn riemann_liouville(q: f64, base: f64, n_terms: usize) -> Result<Self> {
        Self::new(Definition::RiemannLiouville, Order::new(q)?, base, n_terms)
    }

    pub fn caputo(q: f64, base: f64, n_terms: usize) -> Result<Self> {
        Self::new(Definition::Caputo, Order::new(q)?, base, n_terms)
    }

    pub fn with_terms(mut self, n_terms: usize) -> Result<Self> {
        self = Self::new(self.definition, self.order, self.base, n_terms)?;
        Ok(self)
    }
}

/// One term of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub k: usize,
    pub weight: f64,
    /// f^(k)(x), or the Caputo bracket for that index.
    pub derivative_value: f64,
    pub contribution: f64,
}

/// Partial sum plus the per-term trace that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEvaluation {
    pub value: f64,
    pub terms: Vec<SeriesTerm>,
}

/// Weight of f^(k)(x) in binomial/reciprocal-gamma form. For integer `q`
/// the reciprocal gamma and the binomial vanish exactly for every `k != q`.
pub fn series_weight(q: Order, k: usize, x: f64, a: f64) -> Result<f64> {
    if !(x > a) {
        return Err(Error::domain(format!("series needs x > base, got x = {x}, base = {a}")));
    }
    let qv = q.value();
    let kf = k as f64;
    Ok(binom_general(qv, k) * (x - a).powf(kf - qv) * recip_gamma(kf - qv + 1.0))
}

/// The same weight in sinc/gamma form,
/// `sin[π(q-k)] Γ(q+1) (x-a)^(k-q) / (π (q-k) Γ(k+1))`.
/// Kept as an independent algebraic route for cross-checks.
pub fn sinc_gamma_weight(q: Order, k: usize, x: f64, a: f64) -> Result<f64> {
    if !(x > a) {
        return Err(Error::domain(format!("series needs x > base, got x = {x}, base = {a}")));
    }
    let qv = q.value();
    let kf = k as f64;
    let d = qv - kf;
    let sinc = if d == 0.0 { 1.0 } else { sin_pi(d) / (PI * d) };
    Ok(sinc * gamma(qv + 1.0)? * recip_gamma(kf + 1.0) * (x - a).powf(kf - qv))
}

/// Series evaluated from precomputed jets.
///
/// `jet_x` must reach order `n_terms - 1` at `x`; `base_jet` is required for
/// Caputo and must reach order `⌈q⌉ - 1` at the base point.
pub fn series_from_jets(jet_x: &Jet, base_jet: Option<&Jet>, cfg: &ExpansionConfig) -> Result<SeriesEvaluation> {
    let x = jet_x.point();
    let a = cfg.base;
    if !(x > a) {
        return Err(Error::domain(format!("series needs x > base, got x = {x}, base = {a}")));
    }
    if jet_x.order() + 1 < cfg.n_terms {
        return Err(Error::invalid(format!(
            "jet of order {} cannot supply {} terms",
            jet_x.order(),
            cfg.n_terms
        )));
    }
    let derivs = jet_x.derivatives();
    let base_derivs = match cfg.definition {
        Definition::Caputo => {
            let n = cfg.order.ceiling();
            let bj = base_jet.ok_or_else(|| Error::invalid("Caputo series needs the base-point jet"))?;
            if bj.order() + 1 < n {
                return Err(Error::invalid("base-point jet too short for the Caputo correction"));
            }
            Some(bj.derivatives()[..n].to_vec())
        }
        _ => None,
    };
    let mut terms = Vec::with_capacity(cfg.n_terms);
    let mut value = 0.0;
    for k in 0..cfg.n_terms {
        let weight = series_weight(cfg.order, k, x, a)?;
        let mut d = derivs[k];
        if let Some(bd) = &base_derivs {
            // f^(k)(x) minus the base-point Taylor polynomial's k-th derivative
            let mut inv_fact = 1.0;
            let mut pow = 1.0;
            for (i, &fa) in bd.iter().enumerate().skip(k) {
                if i > k {
                    inv_fact /= (i - k) as f64;
                    pow *= x - a;
                }
                d -= fa * pow * inv_fact;
            }
        }
        let contribution = if d.is_finite() && weight.is_finite() {
            weight * d
        } else {
            // k! overflows past k = 170 while the weight underflows
            scaled_contribution(cfg.order.value(), k, x - a, jet_x.coeffs()[k])
        };
        value += contribution;
        terms.push(SeriesTerm {
            k,
            weight,
            derivative_value: d,
            contribution,
        });
    }
    Ok(SeriesEvaluation { value, terms })
}

/// `Γ(k+1) / Γ(k+1-q)` without forming either gamma past k = 150.
fn gamma_ratio(k: usize, q: f64) -> f64 {
    const DIRECT: usize = 150;
    let m = k.min(DIRECT);
    let mut r = gamma((m + 1) as f64).unwrap_or(f64::INFINITY) * recip_gamma((m + 1) as f64 - q);
    for j in DIRECT + 1..=k {
        r *= j as f64 / (j as f64 - q);
    }
    r
}

/// `C(q, k) Γ(k+1)/Γ(k+1-q) · c_k · dx^{k-q}` for a Taylor coefficient
/// `c_k`, with the power combined in log space.
fn scaled_contribution(q: f64, k: usize, dx: f64, c_k: f64) -> f64 {
    if c_k == 0.0 {
        return 0.0;
    }
    let lead = binom_general(q, k) * gamma_ratio(k, q);
    lead * c_k.signum() * (c_k.abs().ln() + (k as f64 - q) * dx.ln()).exp()
}

/// Truncated fractional derivative of a catalog function at `x`.
pub fn frac_derivative(f: &CatalogFn, x: f64, cfg: &ExpansionConfig) -> Result<SeriesEvaluation> {
    if !(x > cfg.base) {
        return Err(Error::domain(format!("series needs x > base, got x = {x}, base = {}", cfg.base)));
    }
    let jet_x = f.jet(x, cfg.n_terms - 1)?;
    let base_jet = match cfg.definition {
        Definition::Caputo => Some(f.jet(cfg.base, cfg.order.ceiling() - 1)?),
        _ => None,
    };
    series_from_jets(&jet_x, base_jet.as_ref(), cfg)
}

/// Caputo derivative through the Riemann-Liouville series of
/// `f - T_{n-1}`, where `T_{n-1}` is the Taylor polynomial of `f` at `a`.
pub fn caputo_from_rl(f: &CatalogFn, x: f64, q: Order, a: f64, n_terms: usize) -> Result<f64> {
    let cfg = ExpansionConfig::new(Definition::RiemannLiouville, q, a, n_terms)?;
    if !(x > a) {
        return Err(Error::domain(format!("series needs x > base, got x = {x}, base = {a}")));
    }
    let n = q.ceiling();
    let jet_x = f.jet(x, n_terms - 1)?;
    let taylor_at_base = f.jet(a, n - 1)?;
    let poly_at_x = taylor_at_base.polynomial_jet_at(n - 1, x, n_terms - 1);
    let remainder = &jet_x - &poly_at_x;
    Ok(series_from_jets(&remainder, None, &cfg)?.value)
}

/// Grünwald-Letnikov series of e^{-x²} written through Hermite polynomials,
/// `e^{-x²} Σ_k w_k(x) H_k(-x)`.
pub fn gaussian_hermite_series(x: f64, q: Order, n_terms: usize) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("Hermite form needs x > 0, got {x}")));
    }
    if n_terms == 0 {
        return Err(Error::invalid("the series needs at least one term"));
    }
    let mut sum = 0.0;
    for k in 0..n_terms {
        sum += series_weight(q, k, x, 0.0)? * hermite(k, -x);
    }
    Ok((-x * x).exp() * sum)
}
