//! Truncated Taylor jets and the closed catalog of differentiable functions.
//!
//! A [`Jet`] at `x` stores `c_k = f^(k)(x) / k!` for `k = 0..=order`.
//! Catalog functions build their jets from exact recurrences, so
//! `f^(k)(x) = k! c_k` carries no finite-difference error.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::specials::binom_general;

/// Highest supported jet order.
pub const MAX_ORDER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    point: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    /// Builds a jet from raw Taylor coefficients. All must be finite.
    pub fn from_coeffs(point: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("a jet needs at least one coefficient"));
        }
        if coeffs.len() > MAX_ORDER + 1 {
            return Err(Error::invalid(format!("jet order {} exceeds {MAX_ORDER}", coeffs.len() - 1)));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Overflow(format!("jet coefficient {k} at x = {point} is not finite")));
        }
        Ok(Self { point, coeffs })
    }

    /// The identity function t ↦ t expanded at `point`.
    pub fn variable(point: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = point;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Self { point, coeffs }
    }

    pub fn constant(point: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self { point, coeffs }
    }

    pub fn point(&self) -> f64 {
        self.point
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// f^(k)(point) = k! c_k; zero beyond the jet order.
    pub fn derivative_value(&self, k: usize) -> f64 {
        match self.coeffs.get(k) {
            Some(&c) => c * factorial(k),
            None => 0.0,
        }
    }

    /// All derivatives f^(k)(point), k = 0..=order.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                if k > 0 {
                    fact *= k as f64;
                }
                c * fact
            })
            .collect()
    }

    /// Jet of f' at the same point; order drops by one.
    pub fn derivative(&self) -> Jet {
        let coeffs = if self.order() == 0 {
            vec![0.0]
        } else {
            (1..self.coeffs.len()).map(|k| k as f64 * self.coeffs[k]).collect()
        };
        Jet { point: self.point, coeffs }
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            point: self.point,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// exp of a jet: e_0 = exp(u_0), k e_k = Σ_{j=1..k} j u_j e_{k-j}.
    pub fn exp(&self) -> Jet {
        let n = self.coeffs.len();
        let mut e = vec![0.0; n];
        e[0] = self.coeffs[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.coeffs[j] * e[k - j]).sum();
            e[k] = s / k as f64;
        }
        Jet { point: self.point, coeffs: e }
    }

    /// Evaluates the truncated Taylor polynomial at `point + t`.
    pub fn eval_offset(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Treats the first `degree + 1` coefficients as a polynomial in
    /// `(y - point)` and returns that polynomial's jet at `at`.
    pub fn polynomial_jet_at(&self, degree: usize, at: f64, order: usize) -> Jet {
        let degree = degree.min(self.order());
        let d = at - self.point;
        let coeffs = (0..=order)
            .map(|m| {
                if m > degree {
                    return 0.0;
                }
                // c'_m = Σ_{k>=m} c_k C(k, m) d^(k-m)
                let mut s = 0.0;
                let mut dp = 1.0;
                for k in m..=degree {
                    s += self.coeffs[k] * binom_general(k as f64, m) * dp;
                    dp *= d;
                }
                s
            })
            .collect();
        Jet { point: at, coeffs }
    }

    fn check_compatible(&self, other: &Jet) {
        assert!(
            self.point == other.point,
            "jets expanded at different points ({} vs {})",
            self.point,
            other.point
        );
    }
}

fn factorial(k: usize) -> f64 {
    (2..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Jet {
            point: self.point,
            coeffs: (0..n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Jet {
            point: self.point,
            coeffs: (0..n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(),
        }
    }
}

/// Cauchy product, truncated to the shorter order.
impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|i| self.coeffs[i] * rhs.coeffs[k - i]).sum())
            .collect();
        Jet { point: self.point, coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// The closed set of functions whose jets are available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogFn {
    Sech,
    Tanh,
    Sin,
    Cos,
    /// e^{-x²}
    Gaussian,
    Exp,
    /// x^p
    Power(f64),
    Constant(f64),
}

impl CatalogFn {
    fn is_integer_power(p: f64) -> bool {
        p == p.round()
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::domain(format!("{self} evaluated at non-finite x = {x}")));
        }
        if let CatalogFn::Power(p) = *self {
            if !Self::is_integer_power(p) && x <= 0.0 {
                return Err(Error::domain(format!("x^{p} needs x > 0, got x = {x}")));
            }
            if Self::is_integer_power(p) && p < 0.0 && x == 0.0 {
                return Err(Error::domain(format!("x^{p} is singular at 0")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match *self {
            CatalogFn::Sech => 1.0 / x.cosh(),
            CatalogFn::Tanh => x.tanh(),
            CatalogFn::Sin => x.sin(),
            CatalogFn::Cos => x.cos(),
            CatalogFn::Gaussian => (-x * x).exp(),
            CatalogFn::Exp => x.exp(),
            CatalogFn::Power(p) => {
                if Self::is_integer_power(p) && p.abs() < i32::MAX as f64 {
                    x.powi(p as i32)
                } else {
                    x.powf(p)
                }
            }
            CatalogFn::Constant(c) => c,
        })
    }

    /// Exact Taylor jet of the function at `x` to the given order.
    pub fn jet(&self, x: f64, order: usize) -> Result<Jet> {
        if order > MAX_ORDER {
            return Err(Error::invalid(format!("jet order {order} exceeds {MAX_ORDER}")));
        }
        self.check_domain(x)?;
        let n = order + 1;
        let coeffs = match *self {
            CatalogFn::Constant(c) => {
                let mut v = vec![0.0; n];
                v[0] = c;
                v
            }
            CatalogFn::Exp => {
                let e = x.exp();
                let mut v = Vec::with_capacity(n);
                let mut c = e;
                for k in 0..n {
                    if k > 0 {
                        c /= k as f64;
                    }
                    v.push(c);
                }
                v
            }
            CatalogFn::Sin | CatalogFn::Cos => {
                let (s, c) = x.sin_cos();
                // derivative cycle of sin: s, c, -s, -c
                let cycle = if matches!(self, CatalogFn::Sin) { [s, c, -s, -c] } else { [c, -s, -c, s] };
                let mut inv_fact = 1.0;
                (0..n)
                    .map(|k| {
                        if k > 0 {
                            inv_fact /= k as f64;
                        }
                        cycle[k % 4] * inv_fact
                    })
                    .collect()
            }
            CatalogFn::Gaussian => {
                // g' = -2 u g with u = x + t:  (k+1) g_{k+1} = -2 (x g_k + g_{k-1})
                let mut v = vec![0.0; n];
                v[0] = (-x * x).exp();
                for k in 0..order {
                    let prev = if k > 0 { v[k - 1] } else { 0.0 };
                    v[k + 1] = -2.0 * (x * v[k] + prev) / (k + 1) as f64;
                }
                v
            }
            CatalogFn::Sech | CatalogFn::Tanh => {
                let (s, t) = sech_tanh_coeffs(x, order);
                if matches!(self, CatalogFn::Sech) {
                    s
                } else {
                    t
                }
            }
            CatalogFn::Power(p) => power_coeffs(p, x, order),
        };
        Jet::from_coeffs(x, coeffs)
    }

    /// f^(k)(x).
    pub fn derivative(&self, x: f64, k: usize) -> Result<f64> {
        Ok(self.jet(x, k)?.derivative_value(k))
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

/// Coupled recurrence s' = -s t, t' = s² for sech and tanh.
fn sech_tanh_coeffs(x: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order + 1;
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    s[0] = 1.0 / x.cosh();
    t[0] = x.tanh();
    for k in 0..order {
        let st: f64 = (0..=k).map(|i| s[i] * t[k - i]).sum();
        let ss: f64 = (0..=k).map(|i| s[i] * s[k - i]).sum();
        s[k + 1] = -st / (k + 1) as f64;
        t[k + 1] = ss / (k + 1) as f64;
    }
    (s, t)
}

/// c_k = C(p, k) x^(p-k), with exact zeros past an integer exponent.
fn power_coeffs(p: f64, x: f64, order: usize) -> Vec<f64> {
    let n = order + 1;
    let integer = p == p.round();
    if integer && p >= 0.0 {
        let deg = p as usize;
        return (0..n)
            .map(|k| if k > deg { 0.0 } else { binom_general(p, k) * x.powi((deg - k) as i32) })
            .collect();
    }
    (0..n)
        .map(|k| {
            let e = p - k as f64;
            let xp = if integer { x.powi(e as i32) } else { x.powf(e) };
            binom_general(p, k) * xp
        })
        .collect()
}

impl fmt::Display for CatalogFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogFn::Sech => write!(f, "sech"),
            CatalogFn::Tanh => write!(f, "tanh"),
            CatalogFn::Sin => write!(f, "sin"),
            CatalogFn::Cos => write!(f, "cos"),
            CatalogFn::Gaussian => write!(f, "gaussian"),
            CatalogFn::Exp => write!(f, "exp"),
            CatalogFn::Power(p) => write!(f, "power:{p}"),
            CatalogFn::Constant(c) => write!(f, "constant:{c}"),
        }
    }
}

impl FromStr for CatalogFn {
    type Err = Error;

    /// Accepts `sech`, `tanh`, `sin`, `cos`, `gaussian`, `exp`,
    /// `power:<p>` and `constant:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (tag, param) = match s.split_once(':') {
            Some((t, p)) => (t, Some(p)),
            None => (s.as_str(), None),
        };
        let parse_param = |p: Option<&str>| -> Result<f64> {
            let p = p.ok_or_else(|| Error::invalid(format!("`{tag}` needs a parameter, e.g. {tag}:2")))?;
            p.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad parameter `{p}` for `{tag}`")))
        };
        let f = match tag {
            "sech" => CatalogFn::Sech,
            "tanh" => CatalogFn::Tanh,
            "sin" => CatalogFn::Sin,
            "cos" => CatalogFn::Cos,
            "gaussian" | "gauss" => CatalogFn::Gaussian,
            "exp" => CatalogFn::Exp,
            "power" | "pow" => CatalogFn::Power(parse_param(param)?),
            "constant" | "const" => CatalogFn::Constant(parse_param(param)?),
            other => return Err(Error::invalid(format!("unknown function `{other}`"))),
        };
        if param.is_some() && !matches!(f, CatalogFn::Power(_) | CatalogFn::Constant(_)) {
            return Err(Error::invalid(format!("`{tag}` takes no parameter")));
        }
        Ok(f)
    }
}

/// Compares a backward shift against the binomial shift operator.
///
/// Returns `(f(x - j h), Σ_m C(j, m) (-h)^m f^(m)(x))`, the second value
/// being `(1 - h d/dx)^j f` evaluated through a jet of order `j`.
pub fn shift_check(f: &CatalogFn, x: f64, j: usize, h: f64) -> Result<(f64, f64)> {
    let direct = f.eval(x - j as f64 * h)?;
    let jet = f.jet(x, j)?;
    let derivs = jet.derivatives();
    let mut hp = 1.0;
    let mut op = 0.0;
    for (m, d) in derivs.iter().enumerate() {
        op += binom_general(j as f64, m) * hp * d;
        hp *= -h;
    }
    Ok((direct, op))
}
