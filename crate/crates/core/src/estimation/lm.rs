//! Levenberg–Marquardt least squares with central-difference Jacobians.

use super::FitError;

/// Finite-difference step relative to `max(|p|, 1)`.
const REL_STEP: f64 = 1e-6;
/// Damping beyond which no step can reduce the cost at working precision.
const LAMBDA_MAX: f64 = 1e20;
const LAMBDA_MIN: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub lambda0: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-10,
            lambda0: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ZeroResidual,
    /// Scaled gradient `max_j |J_jᵀr| / (‖J_j‖·‖r‖)` at or below `tol`.
    Gradient,
    /// Relative cost decrease of an accepted step at or below `tol`.
    CostChange,
    /// Lightly damped step below `tol` relative to `max(|p|, 1)`.
    Step,
    /// Damping saturated: no representable step lowers the cost.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmDiagnostics {
    pub iterations: usize,
    pub accepted_steps: usize,
    pub evaluations: usize,
    /// `½‖r‖²` at the returned parameters.
    pub cost: f64,
    pub scaled_gradient: f64,
    pub lambda: f64,
    pub termination: Termination,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    pub params: Vec<f64>,
    /// `s²·(JᵀJ)⁻¹` with `s² = ‖r‖²/(m − n)`, row-major `n × n`.
    pub covariance: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub diagnostics: LmDiagnostics,
}

impl LmResult {
    pub fn residual_rms(&self) -> f64 {
        let n = self.residuals.len() as f64;
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / n).sqrt()
    }

    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.params.len())
            .map(|i| self.covariance[i][i].max(0.0).sqrt())
            .collect()
    }
}

fn half_sq(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn all_finite(r: &[f64]) -> bool {
    r.iter().all(|v| v.is_finite())
}

/// Central-difference Jacobian, one column per parameter.
pub fn fd_jacobian<F>(residuals: &F, p: &[f64]) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut work = p.to_vec();
    (0..p.len())
        .map(|j| {
            let h = REL_STEP * p[j].abs().max(1.0);
            work[j] = p[j] + h;
            let up = residuals(&work);
            let h_up = work[j] - p[j];
            work[j] = p[j] - h;
            let dn = residuals(&work);
            let h_dn = p[j] - work[j];
            work[j] = p[j];
            let span = h_up + h_dn;
            up.iter().zip(&dn).map(|(a, b)| (a - b) / span).collect()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normal_equations(jac: &[Vec<f64>], r: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = jac.len();
    let mut jtj = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..=i {
            let v = dot(&jac[i], &jac[k]);
            jtj[i][k] = v;
            jtj[k][i] = v;
        }
    }
    let jtr = jac.iter().map(|c| dot(c, r)).collect();
    (jtj, jtr)
}

/// In-place lower Cholesky factor. On failure returns the pivot index.
fn cholesky(a: &mut [Vec<f64>]) -> Result<(), usize> {
    let n = a.len();
    for j in 0..n {
        let mut d = a[j][j];
        for v in &a[j][..j] {
            d -= v * v;
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(j);
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for (x, y) in a[i][..j].iter().zip(&a[j][..j]) {
                s -= x * y;
            }
            a[i][j] = s / d;
        }
    }
    Ok(())
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i][k] * y[k];
        }
        y[i] /= l[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k][i] * y[k];
        }
        y[i] /= l[i][i];
    }
    y
}

fn relative_step(step: &[f64], p: &[f64]) -> f64 {
    step.iter()
        .zip(p)
        .map(|(d, x)| d.abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}

fn damped_step(jtj: &[Vec<f64>], jtr: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let mut a = jtj.to_vec();
    for j in 0..a.len() {
        a[j][j] += lambda * jtj[j][j];
    }
    cholesky(&mut a).ok()?;
    let neg: Vec<f64> = jtr.iter().map(|g| -g).collect();
    Some(cholesky_solve(&a, &neg))
}

fn scaled_gradient(jtj: &[Vec<f64>], jtr: &[f64], cost: f64) -> f64 {
    let r_norm = (2.0 * cost).sqrt();
    jtr.iter()
        .enumerate()
        .map(|(j, g)| {
            let c = jtj[j][j].sqrt() * r_norm;
            if c > 0.0 {
                g.abs() / c
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

fn covariance(jtj: &[Vec<f64>], s2: f64) -> Result<Vec<Vec<f64>>, FitError> {
    let n = jtj.len();
    let mut l = jtj.to_vec();
    cholesky(&mut l).map_err(|index| FitError::SingularNormalMatrix { index })?;
    let mut cov = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = cholesky_solve(&l, &e);
        for (row, c) in cov.iter_mut().zip(&col) {
            row[j] = s2 * c;
        }
    }
    for (i, j) in (1..n).flat_map(|i| (0..i).map(move |j| (i, j))) {
        let v = 0.5 * (cov[i][j] + cov[j][i]);
        cov[i][j] = v;
        cov[j][i] = v;
    }
    Ok(cov)
}

/// Minimizes `½‖r(p)‖²` from `init`.
///
/// Hitting `max_iter` is not an error: the result comes back with
/// `converged == false` and callers decide what to do with it.
pub fn lm_minimize<F>(residuals: F, init: &[f64], options: &LmOptions) -> Result<LmResult, FitError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if init.is_empty() || !all_finite(init) {
        return Err(FitError::InvalidInput("initial parameters must be finite and non-empty"));
    }
    if !(options.tol > 0.0 && options.lambda0 > 0.0 && options.lambda0.is_finite()) {
        return Err(FitError::InvalidInput("tol and lambda0 must be positive"));
    }
    let n = init.len();
    let mut p = init.to_vec();
    let mut r = residuals(&p);
    if r.is_empty() {
        return Err(FitError::InvalidInput("no residuals"));
    }
    if !all_finite(&r) {
        return Err(FitError::NonFiniteResidual);
    }
    let m = r.len();
    let mut evaluations = 1;
    let mut cost = half_sq(&r);
    let mut lambda = options.lambda0;
    let mut iterations = 0;
    let mut accepted_steps = 0;

    let mut jac = fd_jacobian(&residuals, &p);
    evaluations += 2 * n;
    let (mut jtj, mut jtr) = normal_equations(&jac, &r);
    let mut grad = scaled_gradient(&jtj, &jtr, cost);

    let termination = loop {
        if cost == 0.0 {
            break Termination::ZeroResidual;
        }
        if grad <= options.tol {
            break Termination::Gradient;
        }
        if iterations >= options.max_iter {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let mut a = jtj.clone();
        for j in 0..n {
            a[j][j] += lambda * jtj[j][j];
        }
        if let Err(index) = cholesky(&mut a) {
            if jtj[index][index] == 0.0 {
                return Err(FitError::SingularNormalMatrix { index });
            }
            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                break Termination::Stalled;
            }
            continue;
        }
        let neg: Vec<f64> = jtr.iter().map(|g| -g).collect();
        let step = cholesky_solve(&a, &neg);
        if lambda <= options.lambda0 && relative_step(&step, &p) <= options.tol {
            break Termination::Step;
        }
        let trial: Vec<f64> = p.iter().zip(&step).map(|(x, d)| x + d).collect();
        let r_trial = residuals(&trial);
        evaluations += 1;
        let cost_trial = half_sq(&r_trial);
        if all_finite(&trial) && all_finite(&r_trial) && cost_trial < cost {
            let rel = (cost - cost_trial) / cost;
            p = trial;
            r = r_trial;
            cost = cost_trial;
            lambda = (lambda / 10.0).max(LAMBDA_MIN);
            accepted_steps += 1;
            jac = fd_jacobian(&residuals, &p);
            evaluations += 2 * n;
            (jtj, jtr) = normal_equations(&jac, &r);
            grad = scaled_gradient(&jtj, &jtr, cost);
            if rel <= options.tol {
                break Termination::CostChange;
            }
        } else {
            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                break Termination::Stalled;
            }
        }
    };

    let converged = match termination {
        Termination::MaxIterations => false,
        // Stalling is fine when the residual sits at rounding level: the
        // moderately damped step is then negligible.
        Termination::Stalled => {
            grad <= options.tol.sqrt() || damped_step(&jtj, &jtr, options.lambda0)
                .is_some_and(|d| relative_step(&d, &p) <= options.tol.sqrt())
        }
        _ => true,
    };
    let s2 = if m > n { 2.0 * cost / (m - n) as f64 } else { 0.0 };
    let covariance = covariance(&jtj, s2)?;
    Ok(LmResult {
        params: p,
        covariance,
        residuals: r,
        diagnostics: LmDiagnostics {
            iterations,
            accepted_steps,
            evaluations,
            cost,
            scaled_gradient: grad,
            lambda,
            termination,
            converged,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn linear_problem() -> (DMatrix<f64>, DVector<f64>) {
        let a = DMatrix::from_row_slice(
            6,
            3,
            &[
                1.0, 0.5, -2.0, 0.3, 2.0, 1.0, -1.0, 0.7, 0.2, 2.5, -0.4, 1.1, 0.9, 0.1, -0.6, -0.2,
                1.3, 0.8,
            ],
        );
        let y = DVector::from_row_slice(&[1.0, -2.0, 0.5, 3.0, 0.1, -0.7]);
        (a, y)
    }

    #[test]
    fn linear_matches_normal_equations() {
        let (a, y) = linear_problem();
        let at = a.transpose();
        let exact = (&at * &a).cholesky().unwrap().solve(&(&at * &y));
        let res = lm_minimize(
            |p| {
                let v = &a * DVector::from_row_slice(p) - &y;
                v.iter().copied().collect()
            },
            &[0.0, 0.0, 0.0],
            &LmOptions::default(),
        )
        .unwrap();
        assert!(res.diagnostics.converged);
        assert!(res.diagnostics.accepted_steps <= 2, "{:?}", res.diagnostics);
        for i in 0..3 {
            assert!((res.params[i] - exact[i]).abs() < 1e-10 * exact[i].abs().max(1.0));
        }
        // Covariance of a linear model is s²(AᵀA)⁻¹.
        let inv = (&at * &a).try_inverse().unwrap();
        let s2 = 2.0 * res.diagnostics.cost / 3.0;
        for i in 0..3 {
            for j in 0..3 {
                assert!((res.covariance[i][j] - s2 * inv[(i, j)]).abs() < 1e-8 * s2 * inv[(i, i)].abs());
            }
        }
    }

    #[test]
    fn rosenbrock_from_standard_start() {
        let res = lm_minimize(
            |p| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]],
            &[-1.2, 1.0],
            &LmOptions::default(),
        )
        .unwrap();
        assert!(res.diagnostics.converged, "{:?}", res.diagnostics);
        assert!((res.params[0] - 1.0).abs() < 1e-8);
        assert!((res.params[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn start_at_optimum_takes_no_steps() {
        let res = lm_minimize(
            |p| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]],
            &[1.0, 1.0],
            &LmOptions::default(),
        )
        .unwrap();
        assert_eq!(res.diagnostics.accepted_steps, 0);
        assert_eq!(res.diagnostics.termination, Termination::ZeroResidual);
        assert_eq!(res.params, vec![1.0, 1.0]);

        // Non-zero residual at the least-squares optimum.
        let (a, y) = linear_problem();
        let at = a.transpose();
        let exact = (&at * &a).cholesky().unwrap().solve(&(&at * &y));
        let res = lm_minimize(
            |p| {
                let v = &a * DVector::from_row_slice(p) - &y;
                v.iter().copied().collect()
            },
            exact.as_slice(),
            &LmOptions::default(),
        )
        .unwrap();
        assert_eq!(res.diagnostics.accepted_steps, 0);
        assert_eq!(res.diagnostics.iterations, 0);
    }

    #[test]
    fn errors() {
        let r = lm_minimize(|_| vec![f64::NAN], &[1.0], &LmOptions::default());
        assert_eq!(r.unwrap_err(), FitError::NonFiniteResidual);

        // Second parameter has no influence on the residuals.
        let r = lm_minimize(|p| vec![p[0] - 1.0, p[0] + 1.0], &[0.0, 3.0], &LmOptions::default());
        assert_eq!(r.unwrap_err(), FitError::SingularNormalMatrix { index: 1 });
    }

    #[test]
    fn max_iter_is_flagged() {
        let opts = LmOptions {
            max_iter: 2,
            ..LmOptions::default()
        };
        let res = lm_minimize(
            |p| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]],
            &[-1.2, 1.0],
            &opts,
        )
        .unwrap();
        assert!(!res.diagnostics.converged);
        assert_eq!(res.diagnostics.termination, Termination::MaxIterations);
    }

    fn analytic(p: &[f64], t: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        // r_i = a·exp(−b·t_i)·sin(c·t_i) + d·t_i²
        let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
        let r = t
            .iter()
            .map(|&x| a * (-b * x).exp() * (c * x).sin() + d * x * x)
            .collect();
        let cols = vec![
            t.iter().map(|&x| (-b * x).exp() * (c * x).sin()).collect(),
            t.iter().map(|&x| -x * a * (-b * x).exp() * (c * x).sin()).collect(),
            t.iter().map(|&x| x * a * (-b * x).exp() * (c * x).cos()).collect(),
            t.iter().map(|&x| x * x).collect(),
        ];
        (r, cols)
    }

    proptest! {
        #[test]
        fn fd_jacobian_matches_analytic(
            a in 0.5f64..3.0, b in 0.1f64..2.0, c in 0.5f64..4.0, d in -2.0f64..2.0
        ) {
            let t: Vec<f64> = (0..25).map(|i| 0.1 * i as f64).collect();
            let p = [a, b, c, d];
            let fd = fd_jacobian(&|q: &[f64]| analytic(q, &t).0, &p);
            let (_, exact) = analytic(&p, &t);
            for (col_fd, col_ex) in fd.iter().zip(&exact) {
                let scale = col_ex.iter().map(|v| v.abs()).fold(0.0, f64::max);
                for (x, y) in col_fd.iter().zip(col_ex) {
                    prop_assert!((x - y).abs() <= 1e-5 * scale, "{x} vs {y}");
                }
            }
        }
    }
}
