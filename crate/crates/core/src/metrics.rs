//! Relative errors and truncation sweeps.

use crate::error::{Error, Result};
use crate::expansion::{frac_derivative, Definition, ExpansionConfig, Order};
use crate::gl_discrete::{gl_sum, GridSpec};
use crate::grid::Grid;
use crate::jets::CatalogFn;
use crate::specials::recip_gamma;

/// Grid points this close to a root of either compared curve are left out
/// of summary statistics.
pub const ROOT_EXCLUSION: f64 = 1e-3;

pub const DEFAULT_REFERENCE_TERMS: usize = 40;
pub const DEFAULT_REFERENCE_GRID: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelError {
    pub value: f64,
    /// Both arguments were zero; `value` is 0 by convention.
    pub undefined: bool,
}

/// `(a - b) / ((|a| + |b|) / 2)`, in `[-2, 2]`.
pub fn rel_error(a: f64, b: f64) -> RelError {
    let mean = 0.5 * (a.abs() + b.abs());
    if mean == 0.0 {
        return RelError { value: 0.0, undefined: true };
    }
    RelError { value: (a - b) / mean, undefined: false }
}

/// How the "exact" curve of a sweep is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// The same series with many more terms.
    Series { n_terms: usize },
    /// The discrete Grünwald-Letnikov sum (base 0), with the base-point
    /// Taylor terms removed for Caputo.
    GrunwaldLetnikov { n_grid: usize },
}

impl Reference {
    /// Series with 40 terms, except for the Gaussian whose series diverges.
    pub fn default_for(f: &CatalogFn) -> Self {
        match f {
            CatalogFn::Gaussian => Reference::GrunwaldLetnikov { n_grid: DEFAULT_REFERENCE_GRID },
            _ => Reference::Series { n_terms: DEFAULT_REFERENCE_TERMS },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Reference::Series { n_terms } => format!("series with {n_terms} terms"),
            Reference::GrunwaldLetnikov { n_grid } => format!("discrete GL sum on {n_grid} points"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub function: CatalogFn,
    pub definition: Definition,
    pub base: f64,
    pub orders: Vec<f64>,
    pub truncations: Vec<usize>,
    pub grid: Vec<f64>,
    pub reference: Reference,
}

impl SweepSpec {
    pub fn new(function: CatalogFn, definition: Definition, orders: Vec<f64>, truncations: Vec<usize>, grid: Vec<f64>) -> Self {
        let reference = Reference::default_for(&function);
        Self {
            function,
            definition,
            base: 0.0,
            orders,
            truncations,
            grid,
            reference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowSummary {
    pub mean_abs: f64,
    pub max_abs: f64,
    /// Points dropped from the statistics as root neighbours.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub q: f64,
    pub n_terms: usize,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub summary: RowSummary,
}

impl SweepRow {
    /// `log10 |ε|`, floored at the smallest normal f64 so exact agreement
    /// stays finite.
    pub fn log10_errors(&self) -> Vec<f64> {
        self.errors.iter().map(|e| e.abs().max(f64::MIN_POSITIVE).log10()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Reference curve for each order, aligned with `spec.orders`.
    pub references: Vec<Vec<f64>>,
    /// One row per (order, truncation), orders outermost.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, q: f64, n_terms: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.q == q && r.n_terms == n_terms)
    }
}

/// Points within [`ROOT_EXCLUSION`] of a zero or sign change of `values`,
/// locating crossings by linear interpolation.
pub fn root_neighbourhood(grid: &[f64], values: &[f64]) -> Vec<bool> {
    let mut roots = Vec::new();
    for i in 0..values.len() {
        if values[i] == 0.0 {
            roots.push(grid[i]);
        }
        if i + 1 < values.len() && values[i] * values[i + 1] < 0.0 {
            let t = values[i] / (values[i] - values[i + 1]);
            roots.push(grid[i] + t * (grid[i + 1] - grid[i]));
        }
    }
    grid.iter()
        .map(|&x| roots.iter().any(|r| (x - r).abs() <= ROOT_EXCLUSION))
        .collect()
}

/// Mean and max of `|ε|` outside the root neighbourhoods of `a` and `b`.
pub fn summarize(grid: &[f64], a: &[f64], b: &[f64], errors: &[f64]) -> RowSummary {
    let near_a = root_neighbourhood(grid, a);
    let near_b = root_neighbourhood(grid, b);
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    let mut kept = 0usize;
    for i in 0..errors.len() {
        if near_a[i] || near_b[i] {
            continue;
        }
        sum += errors[i].abs();
        max = max.max(errors[i].abs());
        kept += 1;
    }
    RowSummary {
        mean_abs: if kept == 0 { f64::NAN } else { sum / kept as f64 },
        max_abs: max,
        excluded: errors.len() - kept,
    }
}

fn reference_curve(spec: &SweepSpec, q: Order) -> Result<Vec<f64>> {
    match spec.reference {
        Reference::Series { n_terms } => {
            let cfg = ExpansionConfig::new(spec.definition, q, spec.base, n_terms)?;
            spec.grid
                .iter()
                .map(|&x| frac_derivative(&spec.function, x, &cfg).map(|e| e.value))
                .collect()
        }
        Reference::GrunwaldLetnikov { n_grid } => {
            if spec.base != 0.0 {
                return Err(Error::Unsupported("the discrete GL reference has base 0".into()));
            }
            let n = q.ceiling();
            let base_derivs = match spec.definition {
                Definition::Caputo => spec.function.jet(0.0, n - 1)?.derivatives(),
                _ => Vec::new(),
            };
            let qv = q.value();
            spec.grid
                .iter()
                .map(|&x| {
                    let rl = gl_sum(&spec.function, qv, &GridSpec::new(x, n_grid)?)?;
                    let correction: f64 = base_derivs
                        .iter()
                        .enumerate()
                        .map(|(k, d)| d * x.powf(k as f64 - qv) * recip_gamma(k as f64 - qv + 1.0))
                        .sum();
                    Ok(rl - correction)
                })
                .collect()
        }
    }
}

/// Truncated series against a reference curve for every (q, N) pair.
pub fn truncation_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.grid.is_empty() || spec.orders.is_empty() || spec.truncations.is_empty() {
        return Err(Error::invalid("sweep needs at least one order, truncation and grid point"));
    }
    if let Reference::Series { n_terms } = spec.reference {
        let max_n = spec.truncations.iter().copied().max().unwrap_or(0);
        if n_terms < max_n {
            return Err(Error::invalid(format!(
                "reference series ({n_terms} terms) must be at least as long as every truncation (max {max_n})"
            )));
        }
    }
    let mut references = Vec::with_capacity(spec.orders.len());
    let mut rows = Vec::new();
    for &qv in &spec.orders {
        let q = Order::new(qv)?;
        let reference = reference_curve(spec, q)?;
        for &n in &spec.truncations {
            let cfg = ExpansionConfig::new(spec.definition, q, spec.base, n)?;
            let values = spec
                .grid
                .iter()
                .map(|&x| frac_derivative(&spec.function, x, &cfg).map(|e| e.value))
                .collect::<Result<Vec<_>>>()?;
            let errors: Vec<f64> = reference
                .iter()
                .zip(&values)
                .map(|(&a, &b)| rel_error(a, b).value)
                .collect();
            let summary = summarize(&spec.grid, &reference, &values, &errors);
            rows.push(SweepRow {
                q: qv,
                n_terms: n,
                values,
                errors,
                summary,
            });
        }
        references.push(reference);
    }
    Ok(SweepResult {
        spec: spec.clone(),
        references,
        rows,
    })
}

/// The default claim domain, `[0.1, 5]` on 512 points.
pub fn default_domain() -> Vec<f64> {
    Grid::new(0.1, 5.0, 512, false).map(|g| g.points()).unwrap_or_default()
}

/// Mean `|ε|` of the N-term Caputo (q = 1/2) series against the 40-term
/// one over `domain`, root neighbourhoods excluded.
pub fn average_error_claim(f: &CatalogFn, n_terms: usize, domain: &[f64]) -> Result<f64> {
    let mut spec = SweepSpec::new(*f, Definition::Caputo, vec![0.5], vec![n_terms], domain.to_vec());
    spec.reference = Reference::Series {
        n_terms: DEFAULT_REFERENCE_TERMS.max(n_terms),
    };
    Ok(truncation_sweep(&spec)?.rows[0].summary.mean_abs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rel_error_examples() {
        assert_eq!(rel_error(3.5, 3.5).value, 0.0);
        assert_eq!(rel_error(1.0, 0.0).value, 2.0);
        assert!((rel_error(2.0, 1.0).value - 2.0 / 3.0).abs() < 1e-16);
        let z = rel_error(0.0, 0.0);
        assert!(z.undefined);
        assert_eq!(z.value, 0.0);
    }

    proptest! {
        #[test]
        fn rel_error_antisymmetric(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            prop_assert_eq!(rel_error(a, b).value, -rel_error(b, a).value);
        }

        #[test]
        fn rel_error_scale_invariant(a in -1e3f64..1e3, b in -1e3f64..1e3, c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]) {
            prop_assume!(a.abs() + b.abs() > 1e-9);
            let lhs = rel_error(c * a, c * b).value;
            let rhs = c.signum() * rel_error(a, b).value;
            prop_assert!((lhs - rhs).abs() <= 1e-15 * 2.0 + 1e-15 * rhs.abs());
        }

        #[test]
        fn rel_error_bounded(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let e = rel_error(a, b).value;
            prop_assert!((-2.0..=2.0).contains(&e));
        }
    }

    #[test]
    fn root_neighbourhoods() {
        let grid = [0.0, 1.0, 2.0, 2.0005, 3.0];
        let values = [1.0, 0.5, 0.0005, -0.0005, -1.0];
        let near = root_neighbourhood(&grid, &values);
        assert_eq!(near, vec![false, false, true, true, false]);
    }

    #[test]
    fn identical_truncation_has_zero_error() {
        let spec = SweepSpec {
            reference: Reference::Series { n_terms: 12 },
            ..SweepSpec::new(CatalogFn::Sech, Definition::Caputo, vec![0.5], vec![12], default_domain())
        };
        let r = truncation_sweep(&spec).unwrap();
        assert!(r.rows[0].errors.iter().all(|&e| e == 0.0));
        assert!(r.rows[0].log10_errors().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn short_reference_rejected() {
        let spec = SweepSpec {
            reference: Reference::Series { n_terms: 5 },
            ..SweepSpec::new(CatalogFn::Sin, Definition::Caputo, vec![0.5], vec![3, 8], vec![1.0])
        };
        assert!(truncation_sweep(&spec).is_err());
    }

    #[test]
    fn gaussian_reference_is_discrete_sum() {
        let mut spec = SweepSpec::new(CatalogFn::Gaussian, Definition::Caputo, vec![1.5], vec![3], vec![0.5, 1.0]);
        assert_eq!(spec.reference, Reference::GrunwaldLetnikov { n_grid: DEFAULT_REFERENCE_GRID });
        spec.reference = Reference::GrunwaldLetnikov { n_grid: 20_000 };
        let discrete = reference_curve(&spec, Order::new(1.5).unwrap()).unwrap();
        let converged = ExpansionConfig::caputo(1.5, 0.0, 40).unwrap();
        for (&x, d) in spec.grid.iter().zip(&discrete) {
            let s = frac_derivative(&CatalogFn::Gaussian, x, &converged).unwrap().value;
            assert!((d - s).abs() < 1e-3 * s.abs(), "x = {x}: {d} vs {s}");
        }
        // three terms miss D^1.5 exp(-x²) by 6% at x = 0.5 and far more at x = 1
        let r = truncation_sweep(&spec).unwrap();
        let e = &r.rows[0].errors;
        assert!(e[0].abs() > 0.03 && e[0].abs() < 0.1 && e[1].abs() > e[0].abs(), "{e:?}");
    }

    #[test]
    fn reference_lengths_agree_only_near_the_origin() {
        // the series converges geometrically with ratio x / |x ± iπ/2|
        for f in [CatalogFn::Sech, CatalogFn::Tanh] {
            let gap = |x: f64| {
                let a = frac_derivative(&f, x, &ExpansionConfig::caputo(0.5, 0.0, 25).unwrap()).unwrap().value;
                let b = frac_derivative(&f, x, &ExpansionConfig::caputo(0.5, 0.0, 40).unwrap()).unwrap().value;
                (a - b).abs()
            };
            for i in 0..=22 {
                let x = 0.1 + 0.05 * i as f64;
                assert!(gap(x) < 1e-6, "{f} x = {x}: {:e}", gap(x));
            }
            assert!(gap(5.0) > 1e-5);
        }
    }

    #[test]
    fn worst_error_shrinks_with_more_terms() {
        for f in [CatalogFn::Sech, CatalogFn::Tanh] {
            let spec = SweepSpec::new(f, Definition::Caputo, vec![0.5], vec![1, 2, 3, 5, 8], default_domain());
            let r = truncation_sweep(&spec).unwrap();
            let worst: Vec<f64> = r.rows.iter().map(|row| row.summary.max_abs).collect();
            assert!(worst.windows(2).all(|w| w[1] <= w[0]), "{f}: {worst:?}");
        }
    }

    #[test]
    fn gaussian_error_saturates_on_two_to_four() {
        // rel_error is capped at 2 once the partial sum dwarfs the reference,
        // so N = 40 cannot exceed N = 20 there
        let grid: Vec<f64> = (0..=40).map(|i| 2.0 + 0.05 * i as f64).collect();
        let mut spec = SweepSpec::new(CatalogFn::Gaussian, Definition::Caputo, vec![1.5], vec![20, 40], grid);
        spec.reference = Reference::GrunwaldLetnikov { n_grid: 20_000 };
        let r = truncation_sweep(&spec).unwrap();
        let (n20, n40) = (r.rows[0].summary.max_abs, r.rows[1].summary.max_abs);
        assert!(n20 > 1.9 && n40 <= n20, "{n20} vs {n40}");
    }

    #[test]
    fn cos_fifteen_terms() {
        let spec = SweepSpec::new(CatalogFn::Cos, Definition::Caputo, vec![0.5], vec![15], default_domain());
        let r = truncation_sweep(&spec).unwrap();
        assert!(r.rows[0].summary.max_abs < 0.1, "{:?}", r.rows[0].summary);
    }

    #[test]
    fn sin_more_terms_smaller_average() {
        let d = default_domain();
        let two = average_error_claim(&CatalogFn::Sin, 2, &d).unwrap();
        let ten = average_error_claim(&CatalogFn::Sin, 10, &d).unwrap();
        assert!(ten < two, "{ten} vs {two}");
    }
}
