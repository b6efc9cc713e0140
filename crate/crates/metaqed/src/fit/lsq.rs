//! Levenberg-Marquardt driver over closures with a central-difference Jacobian.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt, TerminationReason};
use nalgebra::{storage::Owned, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Result of a converged minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct LsqOutcome {
    pub params: Vec<f64>,
    /// Root-mean-square residual.
    pub rms: f64,
    pub evaluations: usize,
}

/// Iteration budget: the solver stops after `PATIENCE (n + 1)` residual
/// evaluations for n parameters.
const PATIENCE: usize = 200;
/// Central-difference step, absolute, in the fit's own parameterization.
const JACOBIAN_STEP: f64 = 1e-6;

struct Problem<'a, F> {
    residuals: &'a F,
    x: DVector<f64>,
    current: Option<DVector<f64>>,
    m: usize,
}

impl<F> Problem<'_, F>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    fn eval(&self, x: &[f64]) -> Option<DVector<f64>> {
        let r = (self.residuals)(x)?;
        (r.len() == self.m && r.iter().all(|v| v.is_finite())).then(|| DVector::from_vec(r))
    }
}

impl<F> LeastSquaresProblem<f64, Dyn, Dyn> for Problem<'_, F>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.x.copy_from(x);
        self.current = self.eval(x.as_slice());
    }

    fn params(&self) -> DVector<f64> {
        self.x.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        self.current.clone()
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let n = self.x.len();
        let mut jac = DMatrix::zeros(self.m, n);
        let mut probe = self.x.clone();
        for j in 0..n {
            let x0 = probe[j];
            probe[j] = x0 + JACOBIAN_STEP;
            let plus = self.eval(probe.as_slice())?;
            probe[j] = x0 - JACOBIAN_STEP;
            let minus = self.eval(probe.as_slice())?;
            probe[j] = x0;
            jac.set_column(j, &((plus - minus) / (2.0 * JACOBIAN_STEP)));
        }
        Some(jac)
    }
}

/// Minimizes the sum of squared `residuals` starting from `x0`.
///
/// `residuals` returns `None` for parameters outside its domain. Running out
/// of iterations or a numerical breakdown yields [`Error::FitFailure`]
/// carrying the best parameters reached.
pub fn minimize<F>(residuals: F, x0: &[f64]) -> Result<LsqOutcome>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let start = residuals(x0)
        .filter(|r| r.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Numerical("residuals undefined at the initial parameters".into()))?;
    let m = start.len();
    if m < x0.len() {
        return Err(Error::Domain(format!("{m} residuals cannot determine {} parameters", x0.len())));
    }
    let problem = Problem {
        residuals: &residuals,
        x: DVector::from_column_slice(x0),
        current: Some(DVector::from_vec(start)),
        m,
    };
    let (problem, report) = LevenbergMarquardt::new().with_patience(PATIENCE).minimize(problem);
    let params = problem.x.as_slice().to_vec();
    let rms = match &problem.current {
        Some(r) => (r.norm_squared() / m as f64).sqrt(),
        None => f64::NAN,
    };
    let converged = matches!(
        report.termination,
        TerminationReason::ResidualsZero
            | TerminationReason::Orthogonal
            | TerminationReason::Converged { .. }
            | TerminationReason::NoImprovementPossible(_)
    );
    if converged && rms.is_finite() {
        Ok(LsqOutcome { params, rms, evaluations: report.number_of_evaluations })
    } else {
        Err(Error::FitFailure { evaluations: report.number_of_evaluations, residual: rms, best: params })
    }
}
