//! Linear fractional differential equations reduced to ordinary ones.
//!
//! Two problems are supported, both with a Caputo derivative of order `q`
//! (default 1/2) truncated after `N` series terms (default 3):
//!
//! * constant coefficient: `D^q f + λ f = 0`, `f(0) = f0`, `f(∞) = 0`;
//!   exact solution `f0 · E_q(-λ x^q)`;
//! * variable coefficient: `D^{1/2} f + λ f / x = 0`, with the reference
//!   solution `exp(λ² - λ²/x) / √x`.
//!
//! Truncation turns each into `c2 f'' + c1 f' + c0 f + s = 0` with
//! coefficients that are short sums of powers of `x`. The constant problem
//! is solved by shooting; the variable one in the reciprocal frame `y = 1/x`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::expansion::Order;
use crate::metrics::rel_error;
use crate::specials::{binom_general, gamma, mittag_leffler, recip_gamma};

/// Leading coefficients smaller than this are treated as singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-14;

/// `coef · x^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub power: f64,
}

/// A finite sum of monomials with real powers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerSum {
    terms: Vec<Monomial>,
}

impl PowerSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coef: f64, power: f64) -> Self {
        let mut p = Self::zero();
        p.push(coef, power);
        p
    }

    /// Adds `coef · x^power`, merging with an equal power.
    pub fn push(&mut self, coef: f64, power: f64) {
        if coef == 0.0 {
            return;
        }
        match self.terms.iter_mut().find(|m| m.power == power) {
            Some(m) => m.coef += coef,
            None => self.terms.push(Monomial { coef, power }),
        }
        self.terms.retain(|m| m.coef != 0.0);
        self.terms.sort_by(|a, b| a.power.total_cmp(&b.power));
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|m| {
                if m.power == 0.0 {
                    m.coef
                } else if m.power == m.power.round() && m.power.abs() < 64.0 {
                    m.coef * x.powi(m.power as i32)
                } else {
                    m.coef * x.powf(m.power)
                }
            })
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::zero();
        for m in &self.terms {
            out.push(m.coef * factor, m.power);
        }
        out
    }

    /// `x^shift · p(x)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = Self::zero();
        for m in &self.terms {
            out.push(m.coef, m.power + shift);
        }
        out
    }

    /// `p(1/y)` as a power sum in `y`.
    pub fn reciprocal(&self) -> Self {
        let mut out = Self::zero();
        for m in &self.terms {
            out.push(m.coef, -m.power);
        }
        out
    }

    pub fn plus(&self, other: &PowerSum) -> Self {
        let mut out = self.clone();
        for m in &other.terms {
            out.push(m.coef, m.power);
        }
        out
    }
}

impl fmt::Display for PowerSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, m) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*t^{}", m.coef, m.power)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    Value,
    Slope,
}

/// `f(location) = value` or `f'(location) = value`; the location may be
/// `0` or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub location: f64,
    pub kind: ConditionKind,
    pub value: f64,
}

/// Independent variable of a system: `x` itself or `y = 1/x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Direct,
    Reciprocal,
}

/// Coefficients of `c2 f'' + c1 f' + c0 f + source = 0` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeCoefficients {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub source: f64,
}

/// A linear ODE of order one or two that RK4 can integrate.
pub trait LinearOde {
    fn coefficients(&self, x: f64) -> OdeCoefficients;

    /// 2 when `c2` is present, 1 when only `c1` is.
    fn order(&self) -> usize {
        2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSystem {
    pub frame: Frame,
    pub c2: PowerSum,
    pub c1: PowerSum,
    pub c0: PowerSum,
    pub source: PowerSum,
    pub conditions: Vec<Condition>,
}

impl OdeSystem {
    pub fn residual(&self, x: f64, f: f64, df: f64, d2f: f64) -> f64 {
        self.c2.eval(x) * d2f + self.c1.eval(x) * df + self.c0.eval(x) * f + self.source.eval(x)
    }

    pub fn condition(&self, kind: ConditionKind, location: f64) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.kind == kind && c.location == location)
    }
}

impl LinearOde for OdeSystem {
    fn coefficients(&self, x: f64) -> OdeCoefficients {
        OdeCoefficients {
            c2: self.c2.eval(x),
            c1: self.c1.eval(x),
            c0: self.c0.eval(x),
            source: self.source.eval(x),
        }
    }

    fn order(&self) -> usize {
        if !self.c2.is_zero() {
            2
        } else if !self.c1.is_zero() {
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdeKind {
    ConstantCoeff,
    VariableCoeff,
}

impl fmt::Display for FdeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FdeKind::ConstantCoeff => "constant",
            FdeKind::VariableCoeff => "variable",
        })
    }
}

impl FromStr for FdeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constant" => Ok(FdeKind::ConstantCoeff),
            "variable" => Ok(FdeKind::VariableCoeff),
            other => Err(Error::invalid(format!("unknown equation kind `{other}` (expected constant or variable)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdeProblem {
    pub kind: FdeKind,
    pub lambda: f64,
    pub q: Order,
    pub n_terms: usize,
    /// f(0); 1 for the constant problem, 0 (the limit of the reference
    /// solution) for the variable one.
    pub f0: f64,
}

impl FdeProblem {
    pub fn new(kind: FdeKind, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::invalid("lambda must be finite"));
        }
        Ok(Self {
            kind,
            lambda,
            q: Order::new(0.5)?,
            n_terms: 3,
            f0: match kind {
                FdeKind::ConstantCoeff => 1.0,
                FdeKind::VariableCoeff => 0.0,
            },
        })
    }

    pub fn constant(lambda: f64) -> Result<Self> {
        Self::new(FdeKind::ConstantCoeff, lambda)
    }

    pub fn variable(lambda: f64) -> Result<Self> {
        Self::new(FdeKind::VariableCoeff, lambda)
    }

    pub fn with_truncation(mut self, q: f64, n_terms: usize) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::invalid("the truncation needs at least one term"));
        }
        self.q = Order::new(q)?;
        self.n_terms = n_terms;
        Ok(self)
    }

    /// Small-x value of the constant problem's exact solution,
    /// `f0 (1 - λ ε^q / Γ(1+q) + λ² ε^{2q} / Γ(1+2q))`.
    pub fn short_distance_value(&self, eps: f64) -> Result<f64> {
        let q = self.q.value();
        let z = self.lambda * eps.powf(q);
        Ok(self.f0 * (1.0 - z / gamma(1.0 + q)? + z * z / gamma(1.0 + 2.0 * q)?))
    }
}

/// Truncated ODE, multiplied through by `√π x^q` (constant) or
/// `√π x^{q+1}` (variable). With the defaults this is
///
/// ```text
/// -x²/6 f'' + x f' + (1 + λ√(πx)) f - f(0) = 0
/// -x³/6 f'' + x² f' + (x + λ√(πx)) f - f(0) x = 0
/// ```
pub fn build_truncated_ode(p: &FdeProblem) -> Result<OdeSystem> {
    let q = p.q.value();
    let n = p.q.ceiling();
    if p.kind == FdeKind::VariableCoeff && (q != 0.5 || p.n_terms != 3) {
        return Err(Error::Unsupported(format!(
            "the variable-coefficient reduction is defined for q = 1/2 with 3 terms, got q = {q}, N = {}",
            p.n_terms
        )));
    }
    let shift = match p.kind {
        FdeKind::ConstantCoeff => 0.0,
        FdeKind::VariableCoeff => 1.0,
    };
    let root_pi = PI.sqrt();
    let mut c = [PowerSum::zero(), PowerSum::zero(), PowerSum::zero()];
    let mut source = PowerSum::zero();
    for k in 0..p.n_terms {
        let w = binom_general(q, k) * recip_gamma(k as f64 - q + 1.0);
        if w == 0.0 {
            continue;
        }
        if k > 2 {
            return Err(Error::Unsupported(format!(
                "{} terms at q = {q} give an ODE of order {k}; at most 2 is supported",
                p.n_terms
            )));
        }
        if k < n && n >= 2 {
            return Err(Error::Unsupported(format!(
                "q = {q} needs f'(0), which the boundary conditions do not supply"
            )));
        }
        c[k].push(root_pi * w, k as f64 + shift);
        if k == 0 {
            source.push(-root_pi * w * p.f0, shift);
        }
    }
    c[0].push(root_pi * p.lambda, q);
    let [c0, c1, c2] = c;
    if c1.is_zero() && c2.is_zero() {
        return Err(Error::Unsupported(format!(
            "{} terms at q = {q} leave no derivative in the truncated equation",
            p.n_terms
        )));
    }
    let conditions = match p.kind {
        FdeKind::ConstantCoeff => vec![
            Condition { location: 0.0, kind: ConditionKind::Value, value: p.f0 },
            Condition { location: f64::INFINITY, kind: ConditionKind::Value, value: 0.0 },
        ],
        FdeKind::VariableCoeff => vec![
            Condition { location: f64::INFINITY, kind: ConditionKind::Value, value: 0.0 },
            Condition {
                location: 1.0,
                kind: ConditionKind::Slope,
                value: exact_variable_slope(p.lambda, 1.0)?,
            },
        ],
    };
    Ok(OdeSystem {
        frame: Frame::Direct,
        c2,
        c1,
        c0,
        source,
        conditions,
    })
}

/// Rewrites a system in `y = 1/x` and rescales it so the leading
/// coefficient is `y²`. With `f'(x) = -y² g'(y)` and
/// `f''(x) = y⁴ g'' + 2y³ g'`.
pub fn substitute_reciprocal(sys: &OdeSystem) -> Result<OdeSystem> {
    if sys.frame != Frame::Direct {
        return Err(Error::Unsupported("system is already in the reciprocal frame".into()));
    }
    let lead = match sys.c2.terms() {
        [m] => *m,
        _ => {
            return Err(Error::Unsupported(
                "reciprocal substitution needs a single-monomial leading coefficient".into(),
            ))
        }
    };
    let c2r = sys.c2.reciprocal();
    let c1r = sys.c1.reciprocal();
    let y2 = c2r.shifted(4.0);
    let y1 = c2r.shifted(3.0).scaled(2.0).plus(&c1r.shifted(2.0).scaled(-1.0));
    // y⁴ c2(1/y) = coef · y^{4 - power}; normalise to y².
    let norm_shift = 2.0 - (4.0 - lead.power);
    let norm = 1.0 / lead.coef;
    let tr = |p: &PowerSum| p.shifted(norm_shift).scaled(norm);
    let mut conditions = Vec::with_capacity(sys.conditions.len());
    for c in &sys.conditions {
        let location = if c.location == 0.0 {
            f64::INFINITY
        } else if c.location.is_infinite() {
            0.0
        } else {
            1.0 / c.location
        };
        let value = match c.kind {
            ConditionKind::Value => c.value,
            ConditionKind::Slope => {
                if c.location == 0.0 || c.location.is_infinite() {
                    return Err(Error::Unsupported("slope conditions at 0 or ∞ cannot be transformed".into()));
                }
                -c.location * c.location * c.value
            }
        };
        conditions.push(Condition { location, kind: c.kind, value });
    }
    Ok(OdeSystem {
        frame: Frame::Reciprocal,
        c2: tr(&y2),
        c1: tr(&y1),
        c0: tr(&sys.c0.reciprocal()),
        source: tr(&sys.source.reciprocal()),
        conditions,
    })
}

/// One integration node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub x: f64,
    pub f: f64,
    pub df: f64,
}

/// RK4 nodes, ordered by increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Nodes are uniform in `ln x`; interpolation then runs in `ln x`.
    pub log_spaced: bool,
}

impl Trajectory {
    fn from_nodes(mut points: Vec<TrajectoryPoint>, log_spaced: bool) -> Self {
        if points.len() > 1 && points[0].x > points[points.len() - 1].x {
            points.reverse();
        }
        Self { points, log_spaced }
    }

    pub fn first(&self) -> &TrajectoryPoint {
        &self.points[0]
    }

    pub fn last(&self) -> &TrajectoryPoint {
        &self.points[self.points.len() - 1]
    }

    /// Cubic Hermite interpolation of `(f, f')` at `x`.
    pub fn sample(&self, x: f64) -> Result<(f64, f64)> {
        let (lo, hi) = (self.first().x, self.last().x);
        if !(x >= lo && x <= hi) {
            return Err(Error::domain(format!("x = {x} outside the integrated range [{lo}, {hi}]")));
        }
        let i = match self.points.binary_search_by(|p| p.x.total_cmp(&x)) {
            Ok(i) => return Ok((self.points[i].f, self.points[i].df)),
            Err(i) => i.clamp(1, self.points.len() - 1) - 1,
        };
        let (a, b) = (self.points[i], self.points[i + 1]);
        let map = |v: f64| if self.log_spaced { v.ln() } else { v };
        // slopes with respect to the interpolation variable
        let slope = |p: &TrajectoryPoint| if self.log_spaced { p.x * p.df } else { p.df };
        let (s0, s1, s) = (map(a.x), map(b.x), map(x));
        let h = s1 - s0;
        let t = (s - s0) / h;
        let (m0, m1) = (slope(&a) * h, slope(&b) * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let f = (2.0 * t3 - 3.0 * t2 + 1.0) * a.f + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * b.f + (t3 - t2) * m1;
        let dfdt = (6.0 * t2 - 6.0 * t) * a.f + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * b.f + (3.0 * t2 - 2.0 * t) * m1;
        let dfds = dfdt / h;
        Ok((f, if self.log_spaced { dfds / x } else { dfds }))
    }
}

fn second_derivative<S: LinearOde + ?Sized>(sys: &S, x: f64, f: f64, df: f64) -> Result<f64> {
    let c = sys.coefficients(x);
    if c.c2.abs() < SINGULAR_TOLERANCE {
        return Err(Error::SingularCoefficient { x });
    }
    Ok(-(c.c1 * df + c.c0 * f + c.source) / c.c2)
}

fn first_derivative<S: LinearOde + ?Sized>(sys: &S, x: f64, f: f64) -> Result<f64> {
    let c = sys.coefficients(x);
    if c.c1.abs() < SINGULAR_TOLERANCE {
        return Err(Error::SingularCoefficient { x });
    }
    Ok(-(c.c0 * f + c.source) / c.c1)
}

fn rk4_step<F>(rhs: &F, t: f64, u: [f64; 2], h: f64) -> Result<[f64; 2]>
where
    F: Fn(f64, [f64; 2]) -> Result<[f64; 2]>,
{
    let k1 = rhs(t, u)?;
    let k2 = rhs(t + 0.5 * h, [u[0] + 0.5 * h * k1[0], u[1] + 0.5 * h * k1[1]])?;
    let k3 = rhs(t + 0.5 * h, [u[0] + 0.5 * h * k2[0], u[1] + 0.5 * h * k2[1]])?;
    let k4 = rhs(t + h, [u[0] + h * k3[0], u[1] + h * k3[1]])?;
    Ok([
        u[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        u[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

fn check_span(start: f64, end: f64, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::invalid("RK4 needs at least one step"));
    }
    if !start.is_finite() || !end.is_finite() || start == end {
        return Err(Error::invalid(format!("bad integration interval [{start}, {end}]")));
    }
    Ok(())
}

/// Classical fixed-step RK4 from `start` to `end` (either direction).
/// `initial` is `(f, f')` at `start`; for first-order systems `f'` is
/// ignored and recomputed from the equation.
pub fn rk4_integrate<S: LinearOde + ?Sized>(
    sys: &S,
    start: f64,
    end: f64,
    steps: usize,
    initial: (f64, f64),
) -> Result<Trajectory> {
    check_span(start, end, steps)?;
    let order = sys.order();
    let rhs = |x: f64, u: [f64; 2]| -> Result<[f64; 2]> {
        match order {
            2 => Ok([u[1], second_derivative(sys, x, u[0], u[1])?]),
            1 => Ok([first_derivative(sys, x, u[0])?, 0.0]),
            _ => Err(Error::Unsupported("system has no derivative terms".into())),
        }
    };
    let h = (end - start) / steps as f64;
    let mut u = [initial.0, initial.1];
    let mut nodes = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let x = if i == steps { end } else { start + i as f64 * h };
        let df = if order == 1 { first_derivative(sys, x, u[0])? } else { u[1] };
        nodes.push(TrajectoryPoint { x, f: u[0], df });
        if i < steps {
            u = rk4_step(&rhs, x, u, h)?;
        }
    }
    Ok(Trajectory::from_nodes(nodes, false))
}

/// RK4 with steps uniform in `t = ln x`, on the state `(f, x f')`.
/// Both ends must be positive. Resolves the power-law behaviour near
/// `x = 0` and `x = ∞` that uniform steps cannot.
pub fn rk4_integrate_log<S: LinearOde + ?Sized>(
    sys: &S,
    start: f64,
    end: f64,
    steps: usize,
    initial: (f64, f64),
) -> Result<Trajectory> {
    check_span(start, end, steps)?;
    if !(start > 0.0 && end > 0.0) {
        return Err(Error::domain("log-frame integration needs a positive interval"));
    }
    let order = sys.order();
    let rhs = |t: f64, u: [f64; 2]| -> Result<[f64; 2]> {
        let x = t.exp();
        match order {
            2 => {
                let d2 = second_derivative(sys, x, u[0], u[1] / x)?;
                Ok([u[1], u[1] + x * x * d2])
            }
            1 => Ok([x * first_derivative(sys, x, u[0])?, 0.0]),
            _ => Err(Error::Unsupported("system has no derivative terms".into())),
        }
    };
    let (t0, t1) = (start.ln(), end.ln());
    let h = (t1 - t0) / steps as f64;
    let mut u = [initial.0, start * initial.1];
    let mut nodes = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = if i == steps { t1 } else { t0 + i as f64 * h };
        let x = if i == steps { end } else if i == 0 { start } else { t.exp() };
        let df = if order == 1 { first_derivative(sys, x, u[0])? } else { u[1] / x };
        nodes.push(TrajectoryPoint { x, f: u[0], df });
        if i < steps {
            u = rk4_step(&rhs, t, u, h)?;
        }
    }
    Ok(Trajectory::from_nodes(nodes, true))
}

/// Settings for [`shoot_bvp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Offset from the singular origin where `f(eps)` is imposed.
    pub eps: f64,
    /// Far end where the decay condition is imposed.
    pub x_max: f64,
    pub steps: usize,
    /// Search interval for `f(x_max)`.
    pub bracket: (f64, f64),
    /// Far-field decay `f ~ x^{-p}`, fixing `f'(x_max) = -p f(x_max) / x_max`.
    pub decay_exponent: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            x_max: 20.0,
            steps: 100_000,
            bracket: (-1e3, 1e3),
            decay_exponent: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingSolution {
    pub trajectory: Trajectory,
    pub far_value: f64,
    pub slope_at_eps: f64,
    pub iterations: usize,
}

/// Two-point problem `f(eps) = start_value`, algebraic decay at `x_max`.
///
/// Integrates from `x_max` back to `eps` in the log frame and bisects on
/// `f(x_max)`. Backwards, the mode that grows like `x^r` with large `r`
/// decays, so the far-field slope guess only perturbs the solution near
/// `x_max`. If the constant `start_value` solves the equation it is
/// returned unchanged.
pub fn shoot_bvp(sys: &OdeSystem, start_value: f64, cfg: &ShootingConfig) -> Result<ShootingSolution> {
    if !(cfg.eps > 0.0) || !(cfg.x_max > cfg.eps) {
        return Err(Error::invalid(format!("need 0 < eps < x_max, got {} and {}", cfg.eps, cfg.x_max)));
    }
    if sys.order() != 2 {
        return Err(Error::Unsupported("shooting expects a second-order system".into()));
    }
    let constant_solves = (0..=16).all(|i| {
        let x = cfg.eps * (cfg.x_max / cfg.eps).powf(i as f64 / 16.0);
        sys.residual(x, start_value, 0.0, 0.0) == 0.0
    });
    if constant_solves {
        let points = [cfg.eps, cfg.x_max]
            .iter()
            .map(|&x| TrajectoryPoint { x, f: start_value, df: 0.0 })
            .collect();
        return Ok(ShootingSolution {
            trajectory: Trajectory::from_nodes(points, true),
            far_value: start_value,
            slope_at_eps: 0.0,
            iterations: 0,
        });
    }
    let far_slope = -cfg.decay_exponent / cfg.x_max;
    let run = |v: f64| rk4_integrate_log(sys, cfg.x_max, cfg.eps, cfg.steps, (v, v * far_slope));
    // The map v -> f(eps) is affine, so two runs determine it exactly.
    let at0 = run(0.0)?.first().f;
    let at1 = run(1.0)?.first().f;
    let miss = |v: f64| at0 + v * (at1 - at0) - start_value;
    let (mut lo, mut hi) = cfg.bracket;
    let (mut m_lo, m_hi) = (miss(lo), miss(hi));
    if !(m_lo * m_hi <= 0.0) {
        return Err(Error::BracketFailure { lo, hi });
    }
    let mut iterations = 0;
    while iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let m = miss(mid);
        if m == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (m < 0.0) == (m_lo < 0.0) {
            lo = mid;
            m_lo = m;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let v = 0.5 * (lo + hi);
    let trajectory = run(v)?;
    let slope_at_eps = trajectory.first().df;
    Ok(ShootingSolution {
        trajectory,
        far_value: v,
        slope_at_eps,
        iterations,
    })
}

/// `E_q(-λ x^q)`.
pub fn exact_constant(lambda: f64, q: Order, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("exact solution needs x >= 0, got {x}")));
    }
    let qv = q.value();
    mittag_leffler(qv, 1.0, -lambda * x.powf(qv))
}

/// `exp(λ² - λ²/x) / √x`, normalised to `f(1) = 1`.
pub fn exact_variable(lambda: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("exact solution needs x > 0, got {x}")));
    }
    let l2 = lambda * lambda;
    Ok((l2 - l2 / x).exp() / x.sqrt())
}

/// Derivative of [`exact_variable`]: `f(x) (λ²/x² - 1/(2x))`.
pub fn exact_variable_slope(lambda: f64, x: f64) -> Result<f64> {
    let l2 = lambda * lambda;
    Ok(exact_variable(lambda, x)? * (l2 / (x * x) - 0.5 / x))
}

/// Settings shared by both pipelines of [`solve_and_compare`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Start offset from the singular point (`x = 0`, or `y = 0` in the
    /// reciprocal frame).
    pub eps: f64,
    pub x_max: f64,
    pub steps: usize,
    pub bracket: (f64, f64),
}

impl Default for SolveConfig {
    fn default() -> Self {
        let s = ShootingConfig::default();
        Self {
            eps: s.eps,
            x_max: s.x_max,
            steps: s.steps,
            bracket: s.bracket,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub problem: FdeProblem,
    pub config: SolveConfig,
    pub grid: Vec<f64>,
    pub numeric: Vec<f64>,
    pub exact: Vec<f64>,
    pub rel_error: Vec<f64>,
    /// Named scalars describing how the solution was obtained.
    pub diagnostics: Vec<(String, f64)>,
}

impl SolveReport {
    pub fn max_abs_error(&self) -> f64 {
        self.rel_error.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

/// Integrates the truncated ODE and compares it with the exact solution on
/// `grid`.
pub fn solve_and_compare(p: &FdeProblem, grid: &[f64], cfg: &SolveConfig) -> Result<SolveReport> {
    if grid.is_empty() {
        return Err(Error::invalid("empty comparison grid"));
    }
    let mut diagnostics = Vec::new();
    let (numeric, exact): (Vec<f64>, Vec<f64>) = match p.kind {
        FdeKind::ConstantCoeff => {
            let sys = build_truncated_ode(p)?;
            let hi = grid.iter().cloned().fold(f64::MIN, f64::max);
            let lo = grid.iter().cloned().fold(f64::MAX, f64::min);
            if lo < cfg.eps {
                return Err(Error::domain(format!("grid starts at {lo}, below eps = {}", cfg.eps)));
            }
            let start_value = p.short_distance_value(cfg.eps)?;
            let trajectory = if sys.order() == 1 {
                let end = hi.max(cfg.eps * 2.0);
                rk4_integrate_log(&sys, cfg.eps, end, cfg.steps, (start_value, 0.0))?
            } else {
                if hi > cfg.x_max {
                    return Err(Error::domain(format!("grid ends at {hi}, beyond x_max = {}", cfg.x_max)));
                }
                let shot = shoot_bvp(
                    &sys,
                    start_value,
                    &ShootingConfig {
                        eps: cfg.eps,
                        x_max: cfg.x_max,
                        steps: cfg.steps,
                        bracket: cfg.bracket,
                        decay_exponent: p.q.value(),
                    },
                )?;
                diagnostics.push(("far_value".to_string(), shot.far_value));
                diagnostics.push(("slope_at_eps".to_string(), shot.slope_at_eps));
                shot.trajectory
            };
            let mut num = Vec::with_capacity(grid.len());
            let mut ex = Vec::with_capacity(grid.len());
            for &x in grid {
                num.push(trajectory.sample(x)?.0);
                ex.push(p.f0 * exact_constant(p.lambda, p.q, x)?);
            }
            (num, ex)
        }
        FdeKind::VariableCoeff => {
            let ysys = substitute_reciprocal(&build_truncated_ode(p)?)?;
            let slope = ysys
                .condition(ConditionKind::Slope, 1.0)
                .ok_or_else(|| Error::invalid("missing slope condition at y = 1"))?
                .value;
            let lo = grid.iter().cloned().fold(f64::MAX, f64::min);
            let hi = grid.iter().cloned().fold(f64::MIN, f64::max);
            if !(lo > 0.0) || 1.0 / hi < cfg.eps {
                return Err(Error::domain(format!(
                    "grid [{lo}, {hi}] must lie in (0, 1/eps] for the reciprocal frame"
                )));
            }
            let y_end = (1.0 / lo).max(1.0);
            // g(eps) = 0 with unit slope selects the branch regular at y = 0.
            let raw = rk4_integrate_log(&ysys, cfg.eps, y_end, cfg.steps, (0.0, 1.0))?;
            let raw_slope = raw.sample(1.0)?.1;
            if raw_slope == 0.0 {
                return Err(Error::SingularCoefficient { x: 1.0 });
            }
            let scale = slope / raw_slope;
            diagnostics.push(("slope_condition".to_string(), slope));
            diagnostics.push(("branch_scale".to_string(), scale));
            let mut num = Vec::with_capacity(grid.len());
            let mut ex = Vec::with_capacity(grid.len());
            for &x in grid {
                num.push(scale * raw.sample(1.0 / x)?.0);
                ex.push(exact_variable(p.lambda, x)?);
            }
            (num, ex)
        }
    };
    let rel = exact.iter().zip(&numeric).map(|(&a, &b)| rel_error(a, b).value).collect();
    Ok(SolveReport {
        problem: *p,
        config: *cfg,
        grid: grid.to_vec(),
        numeric,
        exact,
        rel_error: rel,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specials::fox_wright;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    struct Manufactured {
        omega2: f64,
    }

    impl LinearOde for Manufactured {
        // f'' + ω² f = (1 + ω²) e^{-x}, solved by e^{-x}
        fn coefficients(&self, x: f64) -> OdeCoefficients {
            OdeCoefficients {
                c2: 1.0,
                c1: 0.0,
                c0: self.omega2,
                source: -(1.0 + self.omega2) * (-x).exp(),
            }
        }
    }

    fn harmonic() -> OdeSystem {
        OdeSystem {
            frame: Frame::Direct,
            c2: PowerSum::monomial(1.0, 0.0),
            c1: PowerSum::zero(),
            c0: PowerSum::monomial(1.0, 0.0),
            source: PowerSum::zero(),
            conditions: Vec::new(),
        }
    }

    #[test]
    fn power_sum_algebra() {
        let mut p = PowerSum::monomial(2.0, 1.0);
        p.push(3.0, 0.5);
        p.push(-2.0, 1.0);
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.eval(4.0), 6.0);
        let r = PowerSum::monomial(1.0, 2.0).reciprocal().shifted(1.0);
        assert_eq!(r.eval(0.5), 2.0);
    }

    #[test]
    fn constant_case_matches_literal_polynomials() {
        let p = FdeProblem::constant(1.3).unwrap();
        let sys = build_truncated_ode(&p).unwrap();
        let mut rng = StdRng::seed_from_u64(25);
        for _ in 0..50 {
            let x: f64 = rng.random_range(1e-6..=10.0);
            assert!(close(sys.c2.eval(x), -x * x / 6.0, 1e-12));
            assert!(close(sys.c1.eval(x), x, 1e-12));
            assert!(close(sys.c0.eval(x), (PI * x).sqrt() * 1.3 + 1.0, 1e-12));
            assert!(close(sys.source.eval(x), -1.0, 1e-12));
        }
        // c2/√π at x = 1 is the raw k = 2 weight
        let w2 = crate::expansion::series_weight(p.q, 2, 1.0, 0.0).unwrap();
        assert!(close(sys.c2.eval(1.0), w2 * PI.sqrt(), 1e-15));
        assert!(close(w2 * PI.sqrt(), -1.0 / 6.0, 1e-14));
    }

    #[test]
    fn variable_case_matches_literal_polynomials() {
        let mut p = FdeProblem::variable(0.7).unwrap();
        p.f0 = 2.0;
        let sys = build_truncated_ode(&p).unwrap();
        let mut rng = StdRng::seed_from_u64(34);
        for _ in 0..50 {
            let x: f64 = rng.random_range(1e-6..=10.0);
            assert!(close(sys.c2.eval(x), -x.powi(3) / 6.0, 1e-12));
            assert!(close(sys.c1.eval(x), x * x, 1e-12));
            assert!(close(sys.c0.eval(x), x + (PI * x).sqrt() * 0.7, 1e-12));
            assert!(close(sys.source.eval(x), -2.0 * x, 1e-12));
        }
    }

    #[test]
    fn reciprocal_frame_coefficients() {
        let p = FdeProblem::variable(1.0).unwrap();
        let y = substitute_reciprocal(&build_truncated_ode(&p).unwrap()).unwrap();
        assert_eq!(y.frame, Frame::Reciprocal);
        for yy in [0.01, 0.3, 1.0, 2.5] {
            assert!(close(y.c2.eval(yy), yy * yy, 1e-12));
            assert!(close(y.c1.eval(yy), 8.0 * yy, 1e-12));
            assert!(close(y.c0.eval(yy), -6.0 * ((PI * yy).sqrt() + 1.0), 1e-12));
            assert_eq!(y.source.eval(yy), 0.0);
        }
        let slope = y.condition(ConditionKind::Slope, 1.0).unwrap();
        assert!(close(slope.value, -0.5, 1e-15));
        assert_eq!(y.condition(ConditionKind::Value, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn substitution_preserves_residuals() {
        let p = FdeProblem::variable(1.0).unwrap();
        let x_sys = build_truncated_ode(&p).unwrap();
        let y_sys = substitute_reciprocal(&x_sys).unwrap();
        let mut rng = StdRng::seed_from_u64(50);
        for _ in 0..50 {
            let x: f64 = rng.random_range(0.2..10.0);
            let y = 1.0 / x;
            // test function f(x) = sin x, g(y) = sin(1/y)
            let (f, df, d2f) = (x.sin(), x.cos(), -x.sin());
            let g = f;
            let dg = -x * x * df;
            let d2g = x.powi(4) * d2f + 2.0 * x.powi(3) * df;
            let rx = x_sys.residual(x, f, df, d2f);
            // The y-frame equation is the x-frame one times -6y.
            let ry = y_sys.residual(y, g, dg, d2g);
            assert!(close(ry, -6.0 * y * rx, 1e-10), "x={x}: {ry} vs {}", -6.0 * y * rx);
        }
    }

    #[test]
    fn unsupported_truncations() {
        let p = FdeProblem::constant(1.0).unwrap().with_truncation(0.5, 4).unwrap();
        assert!(matches!(build_truncated_ode(&p), Err(Error::Unsupported(_))));
        let p = FdeProblem::constant(1.0).unwrap().with_truncation(1.5, 3).unwrap();
        assert!(matches!(build_truncated_ode(&p), Err(Error::Unsupported(_))));
        let p = FdeProblem::variable(1.0).unwrap().with_truncation(0.5, 2).unwrap();
        assert!(matches!(build_truncated_ode(&p), Err(Error::Unsupported(_))));
        let p = FdeProblem::constant(1.0).unwrap().with_truncation(0.5, 1).unwrap();
        assert!(matches!(build_truncated_ode(&p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rk4_polynomial_and_sine() {
        let flat = OdeSystem {
            c0: PowerSum::zero(),
            ..harmonic()
        };
        let t = rk4_integrate(&flat, 0.0, 1.0, 10, (1.0, 2.0)).unwrap();
        assert!((t.last().f - 3.0).abs() < 4.0 * f64::EPSILON, "{}", t.last().f);
        let t = rk4_integrate(&harmonic(), 0.0, PI, 1000, (0.0, 1.0)).unwrap();
        assert!(t.last().f.abs() < 1e-9);
        let e1 = rk4_integrate(&harmonic(), 0.0, PI, 50, (0.0, 1.0)).unwrap().last().f.abs();
        let e2 = rk4_integrate(&harmonic(), 0.0, PI, 100, (0.0, 1.0)).unwrap().last().f.abs();
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rk4_fourth_order_on_manufactured_solution() {
        let sys = Manufactured { omega2: 25.0 };
        let err = |steps| {
            let t = rk4_integrate(&sys, 0.0, 10.0, steps, (1.0, -1.0)).unwrap();
            (t.last().f - (-10.0f64).exp()).abs()
        };
        let e = [err(100), err(1_000), err(10_000)];
        // steps^-4: each tenfold refinement divides the error by 1e4, within 2x
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!((5e3..2e4).contains(&ratio), "errors {e:?}");
        }
    }

    #[test]
    fn singular_leading_coefficient() {
        let sys = OdeSystem {
            c2: PowerSum::monomial(1.0, 2.0),
            ..harmonic()
        };
        assert!(matches!(
            rk4_integrate(&sys, 0.0, 1.0, 10, (1.0, 0.0)),
            Err(Error::SingularCoefficient { .. })
        ));
        assert!(rk4_integrate(&harmonic(), 0.0, 1.0, 0, (1.0, 0.0)).is_err());
    }

    #[test]
    fn log_frame_matches_uniform_frame() {
        let a = rk4_integrate(&harmonic(), 0.5, 3.0, 4000, (0.5f64.sin(), 0.5f64.cos())).unwrap();
        let b = rk4_integrate_log(&harmonic(), 0.5, 3.0, 4000, (0.5f64.sin(), 0.5f64.cos())).unwrap();
        assert!((a.last().f - 3.0f64.sin()).abs() < 1e-11);
        assert!((b.last().f - 3.0f64.sin()).abs() < 1e-11);
        let (f, df) = b.sample(1.7).unwrap();
        assert!((f - 1.7f64.sin()).abs() < 1e-9);
        assert!((df - 1.7f64.cos()).abs() < 1e-7);
        assert!(b.sample(3.5).is_err());
    }

    #[test]
    fn exact_solution_examples() {
        let half = Order::new(0.5).unwrap();
        assert_eq!(exact_constant(1.0, half, 0.0).unwrap(), 1.0);
        assert!(close(exact_constant(1.0, half, 1.0).unwrap(), 0.427_583_576_155_807, 1e-13));
        assert!(close(exact_constant(1.0, Order::new(1.0).unwrap(), 2.0).unwrap(), (-2.0f64).exp(), 1e-14));
        for l in [0.3, 1.0, 2.0] {
            assert!(close(exact_variable(l, 1.0).unwrap(), 1.0, 1e-15));
        }
        assert!(close(exact_variable(1.0, 4.0).unwrap(), 0.75f64.exp() / 2.0, 1e-15));
        assert!(close(exact_variable(1.0, 4.0).unwrap(), 1.058_500_008, 1e-8));
        assert!(exact_variable(1.0, 0.0).is_err());
        assert!(exact_constant(1.0, half, -1.0).is_err());
    }

    #[test]
    fn fox_wright_form_has_the_reference_shape() {
        // C x^{-1/2} 0Ψ1[(1/2, -1/2); 2λ x^{-1/2}], normalised at x = 1
        let lambda: f64 = 1.0;
        let raw = |x: f64| x.powf(-0.5) * fox_wright(&[], &[(0.5, -0.5)], 2.0 * lambda * x.powf(-0.5)).unwrap();
        let c = 1.0 / raw(1.0);
        for i in 0..20 {
            let x = 0.5 + 0.5 * i as f64;
            let v = c * raw(x);
            assert!(close(v, exact_variable(lambda, x).unwrap(), 1e-9), "x={x}");
        }
    }

    fn exact_variable_jet(lambda: f64, x: f64) -> (f64, f64, f64) {
        let f = exact_variable(lambda, x).unwrap();
        let l2 = lambda * lambda;
        let r = l2 / (x * x) - 0.5 / x;
        (f, f * r, f * (r * r - 2.0 * l2 / x.powi(3) + 0.5 / (x * x)))
    }

    #[test]
    fn reference_solution_fits_the_opposite_coupling() {
        // The reference solution leaves a large residual in the truncated
        // equation as built, and a small one when the sign of λ is flipped.
        let literal = build_truncated_ode(&FdeProblem::variable(1.0).unwrap()).unwrap();
        let flipped = build_truncated_ode(&FdeProblem::variable(-1.0).unwrap()).unwrap();
        for x in [1.0, 2.0, 4.0] {
            let (f, df, d2f) = exact_variable_jet(1.0, x);
            let scale = (PI * x).sqrt() * f;
            let r_lit = literal.residual(x, f, df, d2f) / scale;
            let r_flip = flipped.residual(x, f, df, d2f) / scale;
            assert!(r_lit.abs() > 1.5, "x={x}: {r_lit}");
            assert!(r_flip.abs() < 0.2, "x={x}: {r_flip}");
        }
    }

    #[test]
    fn exact_constant_solution_nearly_solves_the_truncation() {
        // f = e^x erfc(√x), f' = f - (πx)^{-1/2}, f'' = f' + x^{-3/2}/(2√π)
        let sys = build_truncated_ode(&FdeProblem::constant(1.0).unwrap()).unwrap();
        let half = Order::new(0.5).unwrap();
        let (mut worst_operator, mut worst_cleared) = (0.0f64, 0.0f64);
        for i in 0..=98 {
            let x = 0.1 + 0.05 * i as f64;
            let f = exact_constant(1.0, half, x).unwrap();
            let df = f - 1.0 / (PI * x).sqrt();
            let d2f = df + x.powf(-1.5) / (2.0 * PI.sqrt());
            let r = sys.residual(x, f, df, d2f).abs() / f;
            worst_cleared = worst_cleared.max(r);
            worst_operator = worst_operator.max(r / (PI * x).sqrt());
        }
        // D^q f + λ f, before clearing the √(πx) denominators
        assert!(worst_operator < 0.05, "{worst_operator}");
        // the cleared equation multiplies the residual by √(πx) ≈ 4 at x = 5
        assert!(worst_cleared > 0.1 && worst_cleared < 0.15, "{worst_cleared}");
    }

    #[test]
    fn integer_order_reduces_to_exponential_decay() {
        let p = FdeProblem::constant(1.5).unwrap().with_truncation(1.0, 2).unwrap();
        let sys = build_truncated_ode(&p).unwrap();
        assert_eq!(sys.order(), 1);
        let grid: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
        let rep = solve_and_compare(&p, &grid, &SolveConfig::default()).unwrap();
        for (x, e) in rep.grid.iter().zip(&rep.rel_error) {
            assert!(e.abs() < 1e-8, "x={x}: {e}");
        }
    }

    #[test]
    fn zero_lambda_is_constant() {
        let p = FdeProblem::constant(0.0).unwrap();
        let rep = solve_and_compare(&p, &[0.1, 1.0, 10.0], &SolveConfig::default()).unwrap();
        assert!(rep.numeric.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn shooting_is_bracket_independent() {
        let p = FdeProblem::constant(1.0).unwrap();
        let sys = build_truncated_ode(&p).unwrap();
        let start = p.short_distance_value(1e-4).unwrap();
        let base = ShootingConfig { steps: 20_000, ..ShootingConfig::default() };
        let a = shoot_bvp(&sys, start, &base).unwrap();
        let b = shoot_bvp(&sys, start, &ShootingConfig { bracket: (-3.0, 50.0), ..base }).unwrap();
        assert!((a.slope_at_eps - b.slope_at_eps).abs() < 1e-8);
        assert!(matches!(
            shoot_bvp(&sys, start, &ShootingConfig { bracket: (5.0, 6.0), ..base }),
            Err(Error::BracketFailure { .. })
        ));
    }

    #[test]
    fn constant_solution_decays_below_exact() {
        let p = FdeProblem::constant(1.0).unwrap();
        let sys = build_truncated_ode(&p).unwrap();
        let start = p.short_distance_value(1e-4).unwrap();
        let s = shoot_bvp(&sys, start, &ShootingConfig { steps: 20_000, ..ShootingConfig::default() }).unwrap();
        assert!(s.trajectory.points.windows(2).all(|w| w[1].f <= w[0].f));
        // three-term truncation undershoots by about 2% at x = 1
        let f1 = s.trajectory.sample(1.0).unwrap().0;
        let exact = 0.427_583_576_155_807;
        assert!(f1 < exact && exact - f1 < 0.025 * exact, "{f1}");
    }
}
