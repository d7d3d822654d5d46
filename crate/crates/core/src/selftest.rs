//! Fast invariant checks behind the `selftest` command.

use std::f64::consts::PI;

use crate::error::Result;
use crate::expansion::{caputo_from_rl, frac_derivative, series_weight, sinc_gamma_weight, ExpansionConfig, Order};
use crate::fde::{build_truncated_ode, substitute_reciprocal, FdeProblem};
use crate::gl_discrete::{inner_sum, weight_exact, InnerSumMode};
use crate::jets::CatalogFn;
use crate::specials::{fox_wright, mittag_leffler};

use rand::{rngs::StdRng, Rng, SeedableRng};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed discrepancy, against the threshold in `name`.
    pub detail: String,
}

fn unit(rng: &mut StdRng) -> f64 {
    rng.random::<f64>()
}

fn non_integer(rng: &mut StdRng, hi: f64) -> f64 {
    loop {
        let q = rng.random_range(0.0..hi);
        if (q - q.round()).abs() > 1e-3 {
            return q;
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

fn outcome(name: &'static str, worst: Result<f64>, threshold: f64) -> CheckOutcome {
    match worst {
        Ok(w) => CheckOutcome {
            name,
            passed: w < threshold,
            detail: format!("{w:.3e} (limit {threshold:.0e})"),
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn catalog() -> [CatalogFn; 8] {
    [
        CatalogFn::Sech,
        CatalogFn::Tanh,
        CatalogFn::Sin,
        CatalogFn::Cos,
        CatalogFn::Gaussian,
        CatalogFn::Exp,
        CatalogFn::Power(3.0),
        CatalogFn::Constant(2.0),
    ]
}

fn weight_forms() -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let q = Order::new(non_integer(&mut rng, 4.0))?;
        let k = (unit(&mut rng) * 31.0) as usize;
        let x = 5.0 * unit(&mut rng) + 1e-3;
        worst = worst.max(rel(series_weight(q, k, x, 0.0)?, sinc_gamma_weight(q, k, x, 0.0)?));
    }
    Ok(worst)
}

fn integer_collapse() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for q in [1.0, 2.0, 3.0] {
        for f in catalog() {
            let x = 1.3;
            let exact = f.derivative(x, q as usize)?;
            let cfg = ExpansionConfig::caputo(q, 0.0, 8)?;
            let v = frac_derivative(&f, x, &cfg)?.value;
            worst = worst.max(if exact == 0.0 { v.abs() } else { rel(v, exact) });
        }
    }
    Ok(worst)
}

fn inner_sum_identity() -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let q = non_integer(&mut rng, 4.0);
        let n = 1 + (unit(&mut rng) * 25.0) as usize;
        let k = ((unit(&mut rng) * n as f64) as usize).min(n - 1);
        let d = inner_sum(q, k, n, InnerSumMode::Direct)?;
        let c = inner_sum(q, k, n, InnerSumMode::Closed)?;
        worst = worst.max(rel(d, c));
    }
    Ok(worst)
}

fn weight_limit() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (q, k) in [(0.5, 0), (0.5, 1), (1.5, 1)] {
        let oracle = series_weight(Order::new(q)?, k, 1.0, 0.0)?;
        for n in [1_000usize, 10_000] {
            let w = weight_exact(q, k, n, 1.0 / n as f64)?;
            // scaled by N so the limit is 10 for every N
            worst = worst.max(rel(w, oracle) * n as f64);
        }
    }
    Ok(worst)
}

fn fox_wright_reduction() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..=60 {
        let z = -3.0 + 0.1 * i as f64;
        let v = fox_wright(&[], &[(0.5, -0.5)], z)?;
        worst = worst.max((v - (-z * z / 4.0).exp() / PI.sqrt()).abs());
    }
    Ok(worst)
}

fn mittag_leffler_erfc() -> Result<f64> {
    // e · erfc(1)
    Ok(rel(mittag_leffler(0.5, 1.0, -1.0)?, 0.427_583_576_155_807))
}

fn caputo_bridge() -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for f in catalog() {
        for _ in 0..5 {
            let q = Order::new(non_integer(&mut rng, 2.0))?;
            let x = 5.0 * unit(&mut rng) + 1e-2;
            let cfg = ExpansionConfig::new(crate::expansion::Definition::Caputo, q, 0.0, 12)?;
            let a = frac_derivative(&f, x, &cfg)?.value;
            let b = caputo_from_rl(&f, x, q, 0.0, 12)?;
            worst = worst.max(if a == 0.0 && b == 0.0 { 0.0 } else { rel(a, b) });
        }
    }
    Ok(worst)
}

fn reconstruction() -> Result<f64> {
    let lambda = 1.0;
    let c = build_truncated_ode(&FdeProblem::constant(lambda)?)?;
    let v = build_truncated_ode(&FdeProblem::variable(lambda)?)?;
    let y = substitute_reciprocal(&v)?;
    let mut worst: f64 = 0.0;
    for i in 1..=50 {
        let x = 0.2 * i as f64;
        let s = (PI * x).sqrt();
        for (got, want) in [
            (c.c2.eval(x), -x * x / 6.0),
            (c.c1.eval(x), x),
            (c.c0.eval(x), 1.0 + s * lambda),
            (c.source.eval(x), -1.0),
            (v.c2.eval(x), -x.powi(3) / 6.0),
            (v.c1.eval(x), x * x),
            (v.c0.eval(x), x + s * lambda),
            (y.c2.eval(x), x * x),
            (y.c1.eval(x), 8.0 * x),
            (y.c0.eval(x), -6.0 * (s + 1.0)),
        ] {
            worst = worst.max(rel(got, want));
        }
    }
    Ok(worst)
}

/// Runs every check; none takes more than a fraction of a second.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        outcome("weight forms agree (1e-10)", weight_forms(), 1e-10),
        outcome("integer orders collapse (1e-12)", integer_collapse(), 1e-12),
        outcome("inner-sum identity (1e-10)", inner_sum_identity(), 1e-10),
        outcome("exact weight limit, N * gap (10)", weight_limit(), 10.0),
        outcome("Fox-Wright Gaussian reduction (1e-10 abs)", fox_wright_reduction(), 1e-10),
        outcome("Mittag-Leffler erfc identity (1e-13)", mittag_leffler_erfc(), 1e-13),
        outcome("Caputo via RL bridge (1e-10)", caputo_bridge(), 1e-10),
        outcome("truncated ODE coefficients (1e-12)", reconstruction(), 1e-12),
    ]
}
