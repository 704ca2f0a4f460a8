//! Small adapters around the `argmin` solvers used by the shooting and
//! section code, plus grid helpers for one-dimensional global scans.

use argmin::core::{CostFunction, Executor, Gradient, State};
use argmin::solver::brent::BrentRoot;
use argmin::solver::goldensectionsearch::GoldenSectionSearch;
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::neldermead::NelderMead;
use argmin::solver::quasinewton::LBFGS;

use crate::error::{GeoError, Result};

struct Scalar<F>(F);

impl<F: Fn(f64) -> f64> CostFunction for Scalar<F> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, x: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(*x))
    }
}

struct Multi<F>(F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Multi<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(x))
    }
}

struct Smooth<F, G> {
    f: F,
    g: G,
}

impl<F: Fn(&[f64]) -> f64, G> CostFunction for Smooth<F, G> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.f)(x))
    }
}

impl<F, G: Fn(&[f64]) -> Vec<f64>> Gradient for Smooth<F, G> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok((self.g)(x))
    }
}

fn solver_error(e: argmin::core::Error) -> GeoError {
    GeoError::InvalidArgument(format!("optimizer failure: {e}"))
}

/// Golden-section minimisation of `f` on `[lo, hi]` down to an absolute
/// bracket width of `tol`. Returns `(x*, f(x*))`.
///
/// argmin's stopping rule is relative to `|x|`, so the search runs on the
/// affine copy `s ∈ [1, 2]` of the interval.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(hi > lo) || !(tol > 0.0) {
        return Err(GeoError::InvalidArgument(format!("bad golden-section bracket [{lo}, {hi}]")));
    }
    let width = hi - lo;
    let to_x = move |s: f64| lo + (s - 1.0) * width;
    let rel = (tol / width / 3.0).max(1e-15);
    let iters = ((width / tol).ln() / 0.481_211_825).ceil() as u64 + 5;
    let solver = GoldenSectionSearch::new(1.0, 2.0)
        .and_then(|s| s.with_tolerance(rel))
        .map_err(solver_error)?;
    let res = Executor::new(Scalar(|s: f64| f(to_x(s))), solver)
        .configure(|st| st.param(1.5).max_iters(iters))
        .run()
        .map_err(solver_error)?;
    let s = *res.state().get_best_param().unwrap_or(&1.5);
    Ok((to_x(s), res.state().get_best_cost()))
}

/// Brent root of `f` on a sign-changing bracket.
pub fn brent_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64, max_iters: u64) -> Result<f64> {
    let res = Executor::new(Scalar(&f), BrentRoot::new(lo, hi, tol))
        .configure(|st| st.param(0.5 * (lo + hi)).max_iters(max_iters))
        .run()
        .map_err(solver_error)?;
    Ok(*res.state().get_best_param().unwrap_or(&(0.5 * (lo + hi))))
}

/// Nelder–Mead from `x0` with an axis-aligned initial simplex of size `step`.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: f64,
    sd_tol: f64,
    max_iters: u64,
) -> Result<(Vec<f64>, f64)> {
    let mut simplex = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(sd_tol).map_err(solver_error)?;
    let res = Executor::new(Multi(f), solver)
        .configure(|st| st.max_iters(max_iters))
        .run()
        .map_err(solver_error)?;
    let best = res.state().get_best_param().cloned().unwrap_or_else(|| x0.to_vec());
    Ok((best, res.state().get_best_cost()))
}

/// L-BFGS with a Moré–Thuente line search.
pub fn lbfgs<F, G>(f: F, grad: G, x0: Vec<f64>, grad_tol: f64, max_iters: u64) -> Result<(Vec<f64>, f64, u64)>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), 10)
        .with_tolerance_grad(grad_tol)
        .and_then(|s| s.with_tolerance_cost(0.0))
        .map_err(solver_error)?;
    let res = Executor::new(Smooth { f, g: grad }, solver)
        .configure(|st| st.param(x0).max_iters(max_iters))
        .run()
        .map_err(solver_error)?;
    let st = res.state();
    let best = st
        .get_best_param()
        .cloned()
        .ok_or(GeoError::NoConvergence { best_error: f64::INFINITY })?;
    Ok((best, st.get_best_cost(), st.get_iter()))
}

/// Central-difference gradient.
pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            let xi = y[i];
            y[i] = xi + h;
            let fp = f(&y);
            y[i] = xi - h;
            let fm = f(&y);
            y[i] = xi;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Indices of the local minima of a periodic sample sequence whose value is
/// within `slack` of the global minimum, best first.
pub fn periodic_minima(values: &[f64], slack: f64) -> Vec<usize> {
    let n = values.len();
    let best = values.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    let mut idx: Vec<usize> = (0..n)
        .filter(|&i| {
            let v = values[i];
            v.is_finite()
                && v <= best + slack
                && v <= values[(i + n - 1) % n]
                && v <= values[(i + 1) % n]
        })
        .collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    // plateaus give runs of equal neighbours; keep one index per run
    let mut out: Vec<usize> = Vec::new();
    for i in idx {
        if !out.iter().any(|&j| (i + n - j) % n == 1 || (j + n - i) % n == 1) {
            out.push(i);
        }
    }
    out
}
