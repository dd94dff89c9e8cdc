//! Projected gradient ascent with an Armijo test along the projection arc.
//!
//! The first trial step has length `init_step`; later iterations start from
//! the Barzilai–Borwein step, which copes far better with badly scaled
//! objectives than a fixed trial length.
//!
//! Points are flat real vectors; complex and matrix variables are stacked as
//! real and imaginary parts so the Euclidean inner product matches the
//! natural one.

use crate::error::{Error, Result};

pub trait Objective {
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// A feasible point close to `x`. Must be the identity on feasible points.
    fn project(&self, x: Vec<f64>) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentConfig {
    pub max_iter: usize,
    /// Length of the first trial displacement `‖t·g‖`.
    pub init_step: f64,
    /// Sufficient-increase constant κ.
    pub armijo: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
    /// Stop once an accepted step improves the value by less than
    /// `tol · max(1, |f|)`.
    pub tol: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            max_iter: 100,
            init_step: 1.0,
            armijo: 0.1,
            shrink: 0.5,
            max_backtracks: 30,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// `true` when a stopping test fired before `max_iter`.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes `obj` from the feasible point `x0`. The returned value is never
/// below `obj.value(x0)`.
pub fn projected_ascent<O: Objective + ?Sized>(obj: &O, x0: Vec<f64>, cfg: &AscentConfig) -> Result<AscentOutcome> {
    let mut x = x0;
    let mut f = obj.value(&x)?;
    if !f.is_finite() {
        return Err(Error::Numeric(format!("objective is {f} at the starting point")));
    }
    // previous displacement and gradient, for the Barzilai–Borwein step
    let mut last: Option<(Vec<f64>, Vec<f64>)> = None;
    for it in 0..cfg.max_iter {
        let g = obj.gradient(&x)?;
        let gnorm = dot(&g, &g).sqrt();
        if !gnorm.is_finite() {
            return Err(Error::Numeric("non-finite gradient".into()));
        }
        if gnorm == 0.0 {
            return Ok(AscentOutcome { x, value: f, iterations: it, converged: true });
        }
        let mut t = cfg.init_step / gnorm;
        if let Some((s_prev, g_prev)) = &last {
            let ss = dot(s_prev, s_prev);
            let sy: f64 = s_prev.iter().zip(g_prev.iter().zip(&g)).map(|(s, (a, b))| s * (a - b)).sum();
            if sy > 0.0 && (ss / sy).is_finite() {
                t = ss / sy;
            }
        }
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + t * b).collect();
            let y = obj.project(trial)?;
            let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let gain = dot(&g, &d);
            if gain <= 0.0 {
                // projection cancels the step: x is stationary on the set
                break;
            }
            let fy = obj.value(&y)?;
            if fy.is_finite() && fy >= f + cfg.armijo * gain {
                accepted = Some((y, fy));
                break;
            }
            t *= cfg.shrink;
        }
        match accepted {
            Some((y, fy)) => {
                let improvement = fy - f;
                let step: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
                last = Some((step, g));
                x = y;
                f = fy;
                if improvement <= cfg.tol * f.abs().max(1.0) {
                    return Ok(AscentOutcome { x, value: f, iterations: it + 1, converged: true });
                }
            }
            None => return Ok(AscentOutcome { x, value: f, iterations: it, converged: true }),
        }
    }
    Ok(AscentOutcome { x, value: f, iterations: cfg.max_iter, converged: false })
}
