//! Dinkelbach's method for `max N(x) / D(x)` with `D > 0`.

use crate::error::{Error, Result};

pub trait FractionalProgram {
    type Point: Clone;
    fn numerator(&self, x: &Self::Point) -> Result<f64>;
    fn denominator(&self, x: &Self::Point) -> Result<f64>;
    /// Approximately maximizes `N − λD`, starting from (and never doing
    /// worse than) `start`.
    fn maximize_parametric(&self, lambda: f64, start: &Self::Point) -> Result<Self::Point>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DinkelbachConfig {
    /// Stop once `N(x) − λD(x)` at the new iterate falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DinkelbachConfig {
    fn default() -> Self {
        DinkelbachConfig { tol: 1e-7, max_iter: 50 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DinkelbachOutcome<P> {
    pub point: P,
    pub lambda: f64,
    /// λ at every iteration, starting with the ratio at the initial point.
    pub lambdas: Vec<f64>,
    /// `N(x) − λD(x)` of the last parametric solve.
    pub residual: f64,
    pub converged: bool,
}

impl<P> DinkelbachOutcome<P> {
    pub fn record(&self, block: &'static str, slot: Option<usize>) -> DinkelbachRecord {
        DinkelbachRecord {
            block,
            slot,
            lambdas: self.lambdas.clone(),
            residual: self.residual,
            converged: self.converged,
        }
    }
}

/// What one Dinkelbach invocation did, kept for convergence reports.
#[derive(Debug, Clone, PartialEq)]
pub struct DinkelbachRecord {
    pub block: &'static str,
    pub slot: Option<usize>,
    pub lambdas: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
}

impl DinkelbachRecord {
    pub fn lambdas_nondecreasing(&self) -> bool {
        self.lambdas.windows(2).all(|w| w[1] >= w[0])
    }
}

fn ratio<F: FractionalProgram + ?Sized>(prob: &F, x: &F::Point) -> Result<f64> {
    let d = prob.denominator(x)?;
    if !(d > 0.0) {
        return Err(Error::Numeric(format!("denominator {d} is not positive")));
    }
    Ok(prob.numerator(x)? / d)
}

pub fn dinkelbach<F: FractionalProgram + ?Sized>(
    prob: &F,
    x0: F::Point,
    cfg: &DinkelbachConfig,
) -> Result<DinkelbachOutcome<F::Point>> {
    let mut x = x0;
    let mut lambda = ratio(prob, &x)?;
    let mut lambdas = vec![lambda];
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        let y = prob.maximize_parametric(lambda, &x)?;
        residual = prob.numerator(&y)? - lambda * prob.denominator(&y)?;
        let next = ratio(prob, &y)?;
        if next < lambda {
            // an inexact inner solve went backwards; keep the incumbent
            residual = residual.max(0.0);
            break;
        }
        x = y;
        lambda = next;
        lambdas.push(lambda);
        if residual < cfg.tol {
            return Ok(DinkelbachOutcome { point: x, lambda, lambdas, residual, converged: true });
        }
    }
    Ok(DinkelbachOutcome { point: x, lambda, lambdas, residual, converged: false })
}
