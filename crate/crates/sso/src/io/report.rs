use serde::{Deserialize, Serialize};
use sso_core::solver::{SolveResult, Status};
use sso_core::SupportMatrix;

use super::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualsJson {
    pub supp: f64,
    pub zrow: f64,
}

/// Contents of `result.json` written by `sso solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: String,
    pub n: usize,
    pub p: usize,
    pub f_final: f64,
    pub iterations: usize,
    /// `"converged"` or `"max_iters"`.
    pub status: String,
    pub wall_ms: f64,
    pub residuals: ResidualsJson,
    /// `(row, col)` of every nonzero, by increasing row.
    pub support: Vec<(usize, usize)>,
    pub values: Vec<f64>,
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIters => "max_iters",
    }
}

impl SolveReport {
    pub fn new(problem: &str, res: &SolveResult, wall_ms: f64) -> Self {
        let x = &res.x_final;
        let (support, values) = x
            .entries()
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|e| ((i, e.col), e.val)))
            .unzip();
        SolveReport {
            problem: problem.to_string(),
            n: x.n_rows(),
            p: x.n_cols(),
            f_final: res.f_final,
            iterations: res.iterations,
            status: status_name(res.status).to_string(),
            wall_ms,
            residuals: ResidualsJson {
                supp: res.residuals.supp_residual,
                zrow: res.residuals.zrow_residual,
            },
            support,
            values,
        }
    }

    /// Rebuilds the final iterate; fails if it is not feasible.
    pub fn point(&self) -> Result<SupportMatrix> {
        if self.support.len() != self.values.len() {
            return Err(super::IoError::Shape(format!(
                "{} support pairs but {} values",
                self.support.len(),
                self.values.len()
            )));
        }
        let mut entries = vec![None; self.n];
        for (&(i, j), &v) in self.support.iter().zip(&self.values) {
            let slot = entries.get_mut(i).ok_or_else(|| {
                super::IoError::Shape(format!("support row {i} out of range for n = {}", self.n))
            })?;
            *slot = Some((j, v));
        }
        Ok(SupportMatrix::new(self.n, self.p, entries)?)
    }
}

/// `fopt.json` written next to a planted instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumSidecar {
    pub f_opt: f64,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub seed: u64,
    pub sigma: Vec<f64>,
}
