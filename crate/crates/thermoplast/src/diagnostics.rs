//! Solution-quality functionals computed from completed trajectories:
//! energy-type bounds, the regularization balance identity, stress-rate and
//! low-integrability temperature norms, Cauchy distances between stress
//! fields of different regularization strengths, truncation tails and the
//! renormalized weak-form residual of the temperature equation.
//!
//! Everything here is pure post-processing: the same trajectory always
//! produces bitwise-identical numbers.

use crate::assemble::strain;
use crate::coupled::RunResult;
use crate::error::SimError;
use crate::grid::{scalar_at_qp, scalar_gradient_at_qp, Grid, QpScalarField, ScalarField, TensorField};
use crate::plastic::truncate;
use crate::tensor::{deviator, inner, ElasticityTensor};

/// One row of the per-step diagnostics time series. Accumulated integrals
/// are over [0, t].
#[derive(Debug, Clone, PartialEq)]
pub struct DiagRow {
    pub step: usize,
    pub t: f64,
    /// int |T(t)|^2 dx
    pub stress_energy: f64,
    /// int_0^t int |eps(u_t)|^2 dx dtau
    pub viscous_work: f64,
    /// int |theta(t)| dx
    pub theta_mass: f64,
    /// int_0^t int |grad T_K(theta)|^2 dx dtau
    pub trunc_gradient: f64,
    /// smallest pointwise dissipation (eps_p rate : stress) of the step
    pub dissipation_min: f64,
    /// int M_lambda(t) dx
    pub m_lambda: f64,
    /// | lhs - rhs | of the balance identity at t
    pub m_lambda_residual: f64,
    /// dominant term magnitude of the balance identity at t
    pub m_lambda_dominant: f64,
    /// accumulated L2-L2 norm of the discrete stress rate up to t
    pub stress_rate_norm: f64,
    /// accumulated low-integrability temperature norm up to t
    pub boccardo_norm: f64,
    pub picard_iters: usize,
}

/// Summary block of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagSummary {
    pub dissipation_min: f64,
    pub max_trace_eps_p: f64,
    pub stress_rate_norm: f64,
    pub boccardo_norm: f64,
    /// (bump height M, residual) pairs of the renormalized identity.
    pub renorm_residuals: Vec<(f64, f64)>,
    /// (K, tail norm) pairs of the truncation-tail decay.
    pub trunc_tail: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub rows: Vec<DiagRow>,
    pub summary: DiagSummary,
}

/// Energy-type quantities at one instant plus their accumulators; the four
/// terms of the uniform energy bound.
pub fn stress_energy(grid: &Grid, stress: &TensorField) -> f64 {
    let w = grid.qp_weight();
    stress.iter().map(|t| w * inner(t, t)).sum()
}

pub fn theta_mass(grid: &Grid, theta: &ScalarField) -> f64 {
    let w = grid.qp_weight();
    scalar_at_qp(grid, theta).iter().map(|v| w * v.abs()).sum()
}

/// int |grad theta|^2 over the set {|theta| < K} (the gradient of the
/// truncated field, kinks masked to zero).
pub fn truncated_gradient_sq(grid: &Grid, theta: &ScalarField, height: f64) -> f64 {
    let vals = scalar_at_qp(grid, theta);
    let grads = scalar_gradient_at_qp(grid, theta);
    let w = grid.qp_weight();
    vals.iter()
        .zip(&grads)
        .map(|(v, g)| {
            if v.abs() < height {
                w * (g.0 * g.0 + g.1 * g.1)
            } else {
                0.0
            }
        })
        .sum()
}

/// D^{-1}-weighted squared distance between two stress fields on one grid.
pub fn cauchy_metric(
    grid: &Grid,
    a: &TensorField,
    b: &TensorField,
    d: &ElasticityTensor,
) -> Result<f64, SimError> {
    if a.len() != grid.n_qp() || b.len() != grid.n_qp() {
        return Err(SimError::Mismatch(format!(
            "stress fields of length {} and {} on a grid with {} quadrature points",
            a.len(),
            b.len(),
            grid.n_qp()
        )));
    }
    let w = grid.qp_weight();
    Ok(a.iter()
        .zip(b)
        .map(|(ta, tb)| {
            let diff = ta.sub(tb);
            w * inner(&d.apply_inv(&diff), &diff)
        })
        .sum())
}

/// Discrete L^q(0,T; W^{1,q}) norm of a nodal temperature history,
/// (sum_n dt sum_qp w (|theta|^q + |grad theta|^q))^{1/q}; q < 5/4.
pub fn boccardo_norm(
    grid: &Grid,
    thetas: &[ScalarField],
    dt: f64,
    q: f64,
) -> Result<f64, SimError> {
    if !(1.0..1.25).contains(&q) {
        return Err(SimError::config(format!(
            "temperature norm exponent must lie in [1, 5/4), got {q}"
        )));
    }
    let w = grid.qp_weight();
    let mut acc = 0.0;
    for theta in thetas.iter().skip(1) {
        let vals = scalar_at_qp(grid, theta);
        let grads = scalar_gradient_at_qp(grid, theta);
        let step: f64 = vals
            .iter()
            .zip(&grads)
            .map(|(v, g)| {
                let gn = (g.0 * g.0 + g.1 * g.1).sqrt();
                w * (v.abs().powf(q) + gn.powf(q))
            })
            .sum();
        acc += dt * step;
    }
    Ok(acc.powf(1.0 / q))
}

/// Accumulated discrete L2(0,T; L2) norm of (T^n - T^{n-1})/dt.
pub fn stress_rate_norm(grid: &Grid, stresses: &[TensorField], dt: f64) -> f64 {
    let w = grid.qp_weight();
    let mut acc = 0.0;
    for pair in stresses.windows(2) {
        let step: f64 = pair[1]
            .iter()
            .zip(&pair[0])
            .map(|(a, b)| {
                let rate = a.sub(b).scale(1.0 / dt);
                w * inner(&rate, &rate)
            })
            .sum();
        acc += dt * step;
    }
    acc.sqrt()
}

/// Truncation-tail table: for each K the discrete L2(0,T; H1) norm of
/// T_{K+C}(theta) - T_K(theta), with the gradient supported on the open
/// shell {K < |theta| < K + C}.
pub fn trunc_tail(
    grid: &Grid,
    thetas: &[ScalarField],
    dt: f64,
    k_list: &[f64],
    c: f64,
) -> Result<Vec<(f64, f64)>, SimError> {
    if !(c > 0.0) {
        return Err(SimError::config("tail offset C must be positive"));
    }
    for w in k_list.windows(2) {
        if !(w[1] > w[0]) {
            return Err(SimError::config("tail heights must be ascending"));
        }
    }
    let w = grid.qp_weight();
    let mut out = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let mut acc = 0.0;
        for theta in thetas.iter().skip(1) {
            let vals = scalar_at_qp(grid, theta);
            let grads = scalar_gradient_at_qp(grid, theta);
            let step: f64 = vals
                .iter()
                .zip(&grads)
                .map(|(v, g)| {
                    let diff = truncate(*v, k + c) - truncate(*v, k);
                    let a = v.abs();
                    let grad_part = if a > k && a < k + c {
                        g.0 * g.0 + g.1 * g.1
                    } else {
                        0.0
                    };
                    w * (diff * diff + grad_part)
                })
                .sum();
            acc += dt * step;
        }
        out.push((k, acc.sqrt()));
    }
    Ok(out)
}

/// Rows of the regularization balance identity
/// int M_lambda(t) + int_0^t int D^{-1} T_t : T_t = int_0^t int eps(u_t) : T_t,
/// computed with discrete time differences; M_lambda = (|PT| - k)_+^2 / (4 lambda).
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceRow {
    pub t: f64,
    pub m_lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub dominant: f64,
}

pub fn m_lambda_balance(
    grid: &Grid,
    states: &[crate::model::State],
    d: &ElasticityTensor,
    yield_k: f64,
    lambda: f64,
    dt: f64,
) -> Vec<BalanceRow> {
    let w = grid.qp_weight();
    let m_of = |stress: &TensorField| -> f64 {
        stress
            .iter()
            .map(|t| {
                let excess = (deviator(t).norm() - yield_k).max(0.0);
                w * excess * excess / (4.0 * lambda)
            })
            .sum()
    };
    let mut rows = Vec::with_capacity(states.len());
    let mut dinv_acc = 0.0;
    let mut work_acc = 0.0;
    let mut strain_prev = strain(grid, &states[0].u);
    rows.push(BalanceRow {
        t: states[0].t,
        m_lambda: m_of(&states[0].stress),
        lhs: m_of(&states[0].stress),
        rhs: 0.0,
        residual: m_of(&states[0].stress),
        dominant: m_of(&states[0].stress),
    });
    for n in 1..states.len() {
        let strain_new = strain(grid, &states[n].u);
        let mut dinv_step = 0.0;
        let mut work_step = 0.0;
        for q in 0..grid.n_qp() {
            let t_rate = states[n].stress[q]
                .sub(&states[n - 1].stress[q])
                .scale(1.0 / dt);
            let e_rate = strain_new[q].sub(&strain_prev[q]).scale(1.0 / dt);
            dinv_step += w * inner(&d.apply_inv(&t_rate), &t_rate);
            work_step += w * inner(&e_rate, &t_rate);
        }
        dinv_acc += dt * dinv_step;
        work_acc += dt * work_step;
        strain_prev = strain_new;
        let m_val = m_of(&states[n].stress);
        let lhs = m_val + dinv_acc;
        let rhs = work_acc;
        rows.push(BalanceRow {
            t: states[n].t,
            m_lambda: m_val,
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            dominant: m_val.abs().max(dinv_acc.abs()).max(work_acc.abs()),
        });
    }
    rows
}

/// Renormalization test composition: smooth S with compactly supported
/// derivative. Implementors provide S, S' and S''.
pub trait RenormComposer {
    fn s(&self, r: f64) -> f64;
    fn s_prime(&self, r: f64) -> f64;
    fn s_second(&self, r: f64) -> f64;
}

/// Cubic-smoothstep bump: S'(r) = 1 - 3 rho^2 + 2 rho^3 with rho = |r|/M,
/// supported on [-M, M]; S is its odd antiderivative, saturating at M/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SBump {
    pub m: f64,
}

impl RenormComposer for SBump {
    fn s(&self, r: f64) -> f64 {
        let m = self.m;
        let a = r.abs();
        let v = if a <= m {
            let rho = a / m;
            m * (rho - rho.powi(3) + 0.5 * rho.powi(4))
        } else {
            0.5 * m
        };
        v * r.signum()
    }

    fn s_prime(&self, r: f64) -> f64 {
        let rho = r.abs() / self.m;
        if rho >= 1.0 {
            0.0
        } else {
            1.0 - 3.0 * rho * rho + 2.0 * rho * rho * rho
        }
    }

    fn s_second(&self, r: f64) -> f64 {
        let rho = r.abs() / self.m;
        if rho >= 1.0 {
            0.0
        } else {
            (6.0 * rho * rho - 6.0 * rho) / self.m * r.signum()
        }
    }
}

/// Space-time test function phi(x, y, t) = (a0 + a1 x + a2 y + a3 x y) * (1 - t/T)^2,
/// vanishing at the final time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub coeffs: [f64; 4],
    pub t_end: f64,
}

impl TestFunction {
    fn poly(&self, x: f64, y: f64) -> f64 {
        let [a0, a1, a2, a3] = self.coeffs;
        a0 + a1 * x + a2 * y + a3 * x * y
    }

    fn poly_grad(&self, x: f64, y: f64) -> (f64, f64) {
        let [_, a1, a2, a3] = self.coeffs;
        (a1 + a3 * y, a2 + a3 * x)
    }

    fn cutoff(&self, t: f64) -> f64 {
        let s = 1.0 - t / self.t_end;
        s * s
    }

    pub fn value(&self, x: f64, y: f64, t: f64) -> f64 {
        self.poly(x, y) * self.cutoff(t)
    }

    pub fn grad(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let (gx, gy) = self.poly_grad(x, y);
        let c = self.cutoff(t);
        (gx * c, gy * c)
    }
}

/// Histories feeding the renormalized residual: the full temperature, the
/// boundary lift and the applied heat source per step.
pub struct RenormInput<'a> {
    pub theta_hat: &'a [ScalarField],
    pub theta_tilde: &'a [ScalarField],
    /// Source at quadrature points; entry n corresponds to step n -> n+1.
    pub sources: &'a [QpScalarField],
    pub dt: f64,
}

/// Residual of the renormalized weak identity, tested with S(theta - theta_tilde)
/// and phi: the time term is assembled with exact increments of phi so that
/// adding a constant to S cancels exactly against the initial-data term.
/// Normalized by the largest participating integral.
pub fn renorm_residual(
    grid: &Grid,
    input: &RenormInput,
    s: &dyn RenormComposer,
    phi: &TestFunction,
) -> f64 {
    let n_steps = input.sources.len();
    assert!(input.theta_hat.len() > n_steps);
    assert!(input.theta_tilde.len() > n_steps);
    let w = grid.qp_weight();
    let qp_xy: Vec<(f64, f64)> = {
        let mut v = vec![(0.0, 0.0); grid.n_qp()];
        for cy in 0..grid.ny() {
            for cx in 0..grid.nx() {
                let base = 4 * grid.cell_index(cx, cy);
                for q in 0..4 {
                    v[base + q] = grid.qp_coords(cx, cy, q);
                }
            }
        }
        v
    };
    let diff_at = |n: usize| -> ScalarField {
        input.theta_hat[n]
            .iter()
            .zip(&input.theta_tilde[n])
            .map(|(a, b)| a - b)
            .collect()
    };

    // -int int S(d) phi_t via telescoping increments of phi
    let mut term_time = 0.0;
    for n in 1..=n_steps {
        let d = diff_at(n);
        let vals = scalar_at_qp(grid, &d);
        let t_new = n as f64 * input.dt;
        let t_old = t_new - input.dt;
        for q in 0..grid.n_qp() {
            let (x, y) = qp_xy[q];
            let dphi = phi.value(x, y, t_new) - phi.value(x, y, t_old);
            term_time -= w * s.s(vals[q]) * dphi;
        }
    }

    // -int S(theta_0) phi(0)
    let mut term_initial = 0.0;
    {
        let d0 = diff_at(0);
        let vals = scalar_at_qp(grid, &d0);
        for q in 0..grid.n_qp() {
            let (x, y) = qp_xy[q];
            term_initial -= w * s.s(vals[q]) * phi.value(x, y, 0.0);
        }
    }

    // int int S'(d) grad d . grad phi  and  int int S''(d) |grad d|^2 phi
    let mut term_grad = 0.0;
    let mut term_second = 0.0;
    // int int psi S'(d) phi
    let mut term_source = 0.0;
    for n in 1..=n_steps {
        let d = diff_at(n);
        let vals = scalar_at_qp(grid, &d);
        let grads = scalar_gradient_at_qp(grid, &d);
        let t = n as f64 * input.dt;
        let src = &input.sources[n - 1];
        for q in 0..grid.n_qp() {
            let (x, y) = qp_xy[q];
            let sp = s.s_prime(vals[q]);
            let ss = s.s_second(vals[q]);
            let (gx, gy) = grads[q];
            let (px, py) = phi.grad(x, y, t);
            let pv = phi.value(x, y, t);
            term_grad += input.dt * w * sp * (gx * px + gy * py);
            term_second += input.dt * w * ss * (gx * gx + gy * gy) * pv;
            term_source += input.dt * w * src[q] * sp * pv;
        }
    }

    let numerator = (term_time + term_initial + term_grad + term_second - term_source).abs();
    // the time and initial terms pair up (a constant added to S cancels
    // between them), so they enter the normalization as one evolution term
    let dominant = (term_time + term_initial)
        .abs()
        .max(term_grad.abs())
        .max(term_second.abs())
        .max(term_source.abs());
    if dominant <= f64::EPSILON {
        numerator
    } else {
        numerator / dominant
    }
}

/// Controls of the full report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportParams {
    pub trunc_height: f64,
    pub boccardo_q: f64,
    pub tail_heights: Vec<f64>,
    pub tail_offset: f64,
    pub bump_heights: Vec<f64>,
}

impl Default for ReportParams {
    fn default() -> Self {
        Self {
            trunc_height: 5.0,
            boccardo_q: 1.2,
            tail_heights: vec![1.0, 2.0, 5.0, 10.0],
            tail_offset: 1.0,
            bump_heights: vec![1.0, 2.0, 5.0, 10.0],
        }
    }
}

/// Assemble the complete per-step table and summary for one run.
pub fn build_report(run: &RunResult, params: &ReportParams) -> Result<DiagnosticsReport, SimError> {
    let cfg = &run.cfg;
    let grid = cfg.grid();
    let d = cfg.elasticity();
    let dt = cfg.dt;
    let w = grid.qp_weight();
    let states = &run.states;

    let balance = m_lambda_balance(&grid, states, &d, cfg.yield_k, cfg.lambda, dt);

    let mut rows = Vec::with_capacity(states.len());
    let mut viscous_acc = 0.0;
    let mut trunc_acc = 0.0;
    let mut rate_acc = 0.0;
    let mut bocc_acc = 0.0;
    let mut strain_prev = strain(&grid, &states[0].u);
    let mut dissipation_global = f64::INFINITY;
    let mut max_trace = 0.0f64;
    let q_exp = params.boccardo_q;
    for n in 0..states.len() {
        let s = &states[n];
        let mut dissipation_min = f64::INFINITY;
        if n > 0 {
            let strain_new = strain(&grid, &s.u);
            let mut visc_step = 0.0;
            let mut rate_step = 0.0;
            for q in 0..grid.n_qp() {
                let e_rate = strain_new[q].sub(&strain_prev[q]).scale(1.0 / dt);
                visc_step += w * inner(&e_rate, &e_rate);
                let t_rate = s.stress[q].sub(&states[n - 1].stress[q]).scale(1.0 / dt);
                rate_step += w * inner(&t_rate, &t_rate);
                let p_rate = s.eps_p[q].sub(&states[n - 1].eps_p[q]).scale(1.0 / dt);
                let dis = inner(&p_rate, &s.stress[q]);
                dissipation_min = dissipation_min.min(dis);
                max_trace = max_trace.max(s.eps_p[q].trace().abs());
            }
            viscous_acc += dt * visc_step;
            rate_acc += dt * rate_step;
            trunc_acc += dt * truncated_gradient_sq(&grid, &s.theta, params.trunc_height);
            let vals = scalar_at_qp(&grid, &s.theta);
            let grads = scalar_gradient_at_qp(&grid, &s.theta);
            let bocc_step: f64 = vals
                .iter()
                .zip(&grads)
                .map(|(v, g)| {
                    let gn = (g.0 * g.0 + g.1 * g.1).sqrt();
                    w * (v.abs().powf(q_exp) + gn.powf(q_exp))
                })
                .sum();
            bocc_acc += dt * bocc_step;
            strain_prev = strain_new;
            dissipation_global = dissipation_global.min(dissipation_min);
        } else {
            dissipation_min = 0.0;
        }
        rows.push(DiagRow {
            step: n,
            t: s.t,
            stress_energy: stress_energy(&grid, &s.stress),
            viscous_work: viscous_acc,
            theta_mass: theta_mass(&grid, &s.theta),
            trunc_gradient: trunc_acc,
            dissipation_min,
            m_lambda: balance[n].m_lambda,
            m_lambda_residual: balance[n].residual,
            m_lambda_dominant: balance[n].dominant,
            stress_rate_norm: rate_acc.sqrt(),
            boccardo_norm: bocc_acc.powf(1.0 / q_exp),
            picard_iters: if n > 0 { run.picard_iters[n - 1] } else { 0 },
        });
    }

    let theta_hats: Vec<ScalarField> = (0..states.len()).map(|n| run.theta_hat(n)).collect();
    let tail = trunc_tail(&grid, &theta_hats, dt, &params.tail_heights, params.tail_offset)?;
    let phi = TestFunction {
        coeffs: [1.0, 0.5, -0.25, 0.75],
        t_end: cfg.t_end,
    };
    let input = RenormInput {
        theta_hat: &theta_hats,
        theta_tilde: &run.theta_tilde,
        sources: &run.heat_sources,
        dt,
    };
    let renorm: Vec<(f64, f64)> = params
        .bump_heights
        .iter()
        .map(|&m| (m, renorm_residual(&grid, &input, &SBump { m }, &phi)))
        .collect();

    Ok(DiagnosticsReport {
        summary: DiagSummary {
            dissipation_min: if dissipation_global.is_finite() {
                dissipation_global
            } else {
                0.0
            },
            max_trace_eps_p: max_trace,
            stress_rate_norm: rows.last().map(|r| r.stress_rate_norm).unwrap_or(0.0),
            boccardo_norm: rows.last().map(|r| r.boccardo_norm).unwrap_or(0.0),
            renorm_residuals: renorm,
            trunc_tail: tail,
        },
        rows,
    })
}
