//! One time step of the regularized coupled system and the outer time loop.
//!
//! A step advances three fields. Inside a damped fixed-point loop on the
//! temperature iterate theta*:
//!
//! 1. mechanical sweep — solve the viscously regularized momentum balance
//!    with the current plastic strain and thermal load, form the elastic
//!    trial stress from the previous time level, close the flow rule with
//!    the pointwise stress return, and update the plastic strain by the
//!    forward rule eps_p_new = eps_p_old + dt * Y_lambda(T); the sweep is
//!    repeated until the plastic iterate settles, which makes the converged
//!    step semi-implicit in the flow rule;
//! 2. heat step — implicit Euler with the truncated dissipation and
//!    truncated thermal-coupling source evaluated at the current iterate.
//!
//! Both coupling terms are truncated at the same height 1/lambda as the
//! Yosida parameter.

use crate::assemble::{
    apply_vector_dirichlet, assemble_elasticity, assemble_laplacian_neumann, assemble_mass,
    body_force_load, divergence_at_qp, divergence_scalar_weighted_load, scalar_source_load,
    strain, tensor_weighted_load,
};
use crate::error::SimError;
use crate::grid::{scalar_at_qp, Grid, QpScalarField, ScalarField, TensorField, VectorField};
use crate::lift::{solve_tilde_theta, steps_for, NeumannData};
use crate::model::{ModelConfig, State};
use crate::plastic::{in_k, truncate, viscous_return, yosida, YieldSurface, YosidaParam};
use crate::sparse::{solve_spd_from, SparseMatrix};
use crate::tensor::{inner, ElasticityTensor};

/// Forward plastic update eps_p_new = eps_p_old + dt * Y_lambda(T_iter),
/// evaluated pointwise at quadrature points. The increment is traceless.
pub fn plastic_update(
    t_iter: &TensorField,
    eps_p_old: &TensorField,
    ys: &YieldSurface,
    yp: &YosidaParam,
    dt: f64,
) -> TensorField {
    assert_eq!(t_iter.len(), eps_p_old.len());
    t_iter
        .iter()
        .zip(eps_p_old)
        .map(|(t, ep)| ep.add_scaled(dt, &yosida(t, ys, yp)))
        .collect()
}

/// Convergence info of one completed time step.
#[derive(Debug, Clone)]
pub struct StepInfo {
    pub picard_iters: usize,
    pub picard_history: Vec<f64>,
    pub mech_sweeps: usize,
    /// Heat-equation right-hand side actually applied, at quadrature points.
    pub heat_source_qp: QpScalarField,
}

/// Matrices and model objects shared by every step of one run.
pub struct Stepper {
    grid: Grid,
    d: ElasticityTensor,
    ys: YieldSurface,
    yp: YosidaParam,
    cfg: ModelConfig,
    elast: SparseMatrix,
    elast_system: SparseMatrix,
    mass: SparseMatrix,
    heat_system: SparseMatrix,
}

impl Stepper {
    pub fn new(cfg: &ModelConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let grid = cfg.grid();
        let d = cfg.elasticity();
        let elast = assemble_elasticity(&grid, &d);
        let elast_system = elast.scale(1.0 + 1.0 / cfg.dt);
        let mass = assemble_mass(&grid);
        let stiff = assemble_laplacian_neumann(&grid);
        let heat_system = mass.add_scaled(cfg.dt, &stiff);
        Ok(Self {
            grid,
            d,
            ys: cfg.yield_surface(),
            yp: cfg.yosida(),
            cfg: cfg.clone(),
            elast,
            elast_system,
            mass,
            heat_system,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    fn trunc_height(&self) -> f64 {
        self.yp.trunc_height()
    }

    /// Thermal-stress values f(T_{1/lambda}(theta* + theta_tilde)) at
    /// quadrature points.
    fn thermal_stress_qp(
        &self,
        theta_iter: &ScalarField,
        theta_tilde: &ScalarField,
    ) -> QpScalarField {
        let summed: ScalarField = theta_iter
            .iter()
            .zip(theta_tilde)
            .map(|(a, b)| a + b)
            .collect();
        let height = self.trunc_height();
        scalar_at_qp(&self.grid, &summed)
            .into_iter()
            .map(|v| self.cfg.f_spec.eval(truncate(v, height)))
            .collect()
    }

    /// Implicit-Euler solve of the viscously regularized momentum balance:
    /// (1 + 1/dt) A u = loads(eps_p, thermal stress, body force) + (1/dt) A u_old.
    pub fn elastic_visco_step(
        &self,
        state: &State,
        eps_p_iter: &TensorField,
        theta_iter: &ScalarField,
        theta_tilde: &ScalarField,
        t_next: f64,
        warm: Option<&VectorField>,
    ) -> Result<VectorField, SimError> {
        let f_qp = self.thermal_stress_qp(theta_iter, theta_tilde);
        self.elastic_visco_step_with_fqp(state, eps_p_iter, &f_qp, t_next, warm)
    }

    fn elastic_visco_step_with_fqp(
        &self,
        state: &State,
        eps_p_iter: &TensorField,
        f_qp: &QpScalarField,
        t_next: f64,
        warm: Option<&VectorField>,
    ) -> Result<VectorField, SimError> {
        let d_eps_p: TensorField = eps_p_iter.iter().map(|e| self.d.apply(e)).collect();
        let mut rhs = tensor_weighted_load(&self.grid, &d_eps_p);
        let f_load = divergence_scalar_weighted_load(&self.grid, f_qp);
        let body = self.cfg.body_force.at_qp(&self.grid, t_next);
        let body_load = body_force_load(&self.grid, &body);
        let au_old = self.elast.mul_vec(&state.u);
        let inv_dt = 1.0 / self.cfg.dt;
        for i in 0..rhs.len() {
            rhs[i] += f_load[i] + body_load[i] + inv_dt * au_old[i];
        }
        apply_vector_dirichlet(&self.grid, &mut rhs);
        solve_spd_from(
            &self.elast_system,
            &rhs,
            warm.map(|v| v.as_slice()),
            self.cfg.cg.tol,
            self.cfg.cg.maxit,
            self.cfg.cg.jacobi,
        )
        .map_err(|e| match e {
            SimError::Solve {
                context,
                residual,
                iterations,
            } => SimError::Solve {
                context: format!("momentum solve at t = {t_next}: {context}"),
                residual,
                iterations,
            },
            other => other,
        })
    }

    /// Implicit-Euler heat step with homogeneous Neumann data:
    /// (M + dt K) theta_new = M theta_old + dt * load(RHS), where RHS is
    /// -f(T_{1/lambda}(theta* + theta_tilde)) div u_t + T_{1/lambda}(eps_p_t : T).
    /// Returns the new field together with the applied source values.
    pub fn heat_step(
        &self,
        theta_old: &ScalarField,
        theta_iter: &ScalarField,
        theta_tilde: &ScalarField,
        eps_p_rate: &TensorField,
        t_iter: &TensorField,
        div_u_rate: &QpScalarField,
        warm: Option<&ScalarField>,
    ) -> Result<(ScalarField, QpScalarField), SimError> {
        let f_qp = self.thermal_stress_qp(theta_iter, theta_tilde);
        let height = self.trunc_height();
        let source: QpScalarField = (0..self.grid.n_qp())
            .map(|q| {
                let dissipation = inner(&eps_p_rate[q], &t_iter[q]);
                -f_qp[q] * div_u_rate[q] + truncate(dissipation, height)
            })
            .collect();
        let load = scalar_source_load(&self.grid, &source);
        let mut rhs = self.mass.mul_vec(theta_old);
        for (r, b) in rhs.iter_mut().zip(&load) {
            *r += self.cfg.dt * b;
        }
        let theta_new = solve_spd_from(
            &self.heat_system,
            &rhs,
            warm.map(|v| v.as_slice()),
            self.cfg.cg.tol,
            self.cfg.cg.maxit,
            self.cfg.cg.jacobi,
        )?;
        Ok((theta_new, source))
    }

    /// Mechanical sweep for a frozen temperature iterate: repeat
    /// (momentum solve, trial stress, stress return, forward plastic update)
    /// until the plastic iterate settles.
    fn mechanical_sweep(
        &self,
        state: &State,
        theta_iter: &ScalarField,
        theta_tilde: &ScalarField,
        t_next: f64,
        warm_u: &VectorField,
        warm_eps_p: &TensorField,
    ) -> Result<(VectorField, TensorField, TensorField, usize), SimError> {
        let f_qp = self.thermal_stress_qp(theta_iter, theta_tilde);
        let mut eps_p_iter = warm_eps_p.clone();
        let mut u = warm_u.clone();
        let mu = self.d.lame_second();
        for sweep in 1..=self.cfg.mech_max {
            u = self.elastic_visco_step_with_fqp(state, &eps_p_iter, &f_qp, t_next, Some(&u))?;
            let eps = strain(&self.grid, &u);
            // trial stress from the previous time level, then the pointwise
            // implicit stress return; the forward update at the returned
            // stress reproduces T = D(eps(u) - eps_p) identically
            let mut stress = Vec::with_capacity(self.grid.n_qp());
            for q in 0..self.grid.n_qp() {
                let trial = self.d.apply(&eps[q].sub(&state.eps_p[q]));
                stress.push(viscous_return(&trial, &self.ys, &self.yp, mu, self.cfg.dt));
            }
            let eps_p_new = plastic_update(&stress, &state.eps_p, &self.ys, &self.yp, self.cfg.dt);
            let delta = eps_p_new
                .iter()
                .zip(&eps_p_iter)
                .map(|(a, b)| a.sub(b).norm())
                .fold(0.0f64, f64::max);
            eps_p_iter = eps_p_new;
            if delta <= self.cfg.mech_tol {
                return Ok((u, eps_p_iter, stress, sweep));
            }
        }
        Err(SimError::Solve {
            context: format!("mechanical sweep did not settle at t = {t_next}"),
            residual: f64::NAN,
            iterations: self.cfg.mech_max,
        })
    }

    /// Discrete L^r norm of a nodal field (quadrature in space).
    pub fn lr_norm(&self, field: &ScalarField) -> f64 {
        let r = self.cfg.picard_exponent;
        crate::assemble::lp_integral(&self.grid, field, r).powf(1.0 / r)
    }

    /// One full time step: damped fixed-point iteration of
    /// (mechanical sweep, heat step) on the temperature iterate.
    pub fn picard_step(
        &self,
        state: &State,
        theta_tilde_next: &ScalarField,
        step_index: usize,
    ) -> Result<(State, StepInfo), SimError> {
        let t_next = state.t + self.cfg.dt;
        let damping = self.cfg.picard_damping;
        let mut theta_star = state.theta.clone();
        let mut warm_u = state.u.clone();
        let mut warm_eps_p = state.eps_p.clone();
        let mut warm_theta = state.theta.clone();
        let mut history = Vec::new();
        let mut mech_total = 0;
        for iter in 1..=self.cfg.picard_max {
            let (u, eps_p, stress, sweeps) = self.mechanical_sweep(
                state,
                &theta_star,
                theta_tilde_next,
                t_next,
                &warm_u,
                &warm_eps_p,
            )?;
            mech_total += sweeps;
            let inv_dt = 1.0 / self.cfg.dt;
            let eps_p_rate: TensorField = eps_p
                .iter()
                .zip(&state.eps_p)
                .map(|(a, b)| a.sub(b).scale(inv_dt))
                .collect();
            let du_rate: VectorField = u
                .iter()
                .zip(&state.u)
                .map(|(a, b)| (a - b) * inv_dt)
                .collect();
            let div_u_rate = divergence_at_qp(&self.grid, &du_rate);
            let (theta_new, source) = self.heat_step(
                &state.theta,
                &theta_star,
                theta_tilde_next,
                &eps_p_rate,
                &stress,
                &div_u_rate,
                Some(&warm_theta),
            )?;
            let theta_next: ScalarField = theta_new
                .iter()
                .zip(&theta_star)
                .map(|(new, old)| damping * new + (1.0 - damping) * old)
                .collect();
            let diff: ScalarField = theta_next
                .iter()
                .zip(&theta_star)
                .map(|(a, b)| a - b)
                .collect();
            let update = self.lr_norm(&diff);
            history.push(update);
            warm_u = u.clone();
            warm_eps_p = eps_p.clone();
            warm_theta = theta_new.clone();
            theta_star = theta_next;
            if update < self.cfg.picard_tol {
                let new_state = State {
                    t: t_next,
                    u: u.clone(),
                    u_prev: state.u.clone(),
                    eps_p,
                    theta: theta_star,
                    stress,
                };
                return Ok((
                    new_state,
                    StepInfo {
                        picard_iters: iter,
                        picard_history: history,
                        mech_sweeps: mech_total,
                        heat_source_qp: source,
                    },
                ));
            }
        }
        Err(SimError::Picard {
            step: step_index,
            history,
        })
    }

    /// Fixed-point residual of the monolithic step equations at a completed
    /// state: apply one more (mechanical sweep, heat step) pass starting
    /// from the returned temperature and measure the L^r norm of the
    /// temperature correction. A converged step keeps this below a small
    /// multiple of the stop tolerance.
    pub fn fixed_point_residual(
        &self,
        prev: &State,
        next: &State,
        theta_tilde_next: &ScalarField,
    ) -> Result<f64, SimError> {
        let t_next = prev.t + self.cfg.dt;
        let (u, eps_p, stress, _) =
            self.mechanical_sweep(prev, &next.theta, theta_tilde_next, t_next, &next.u, &next.eps_p)?;
        let inv_dt = 1.0 / self.cfg.dt;
        let eps_p_rate: TensorField = eps_p
            .iter()
            .zip(&prev.eps_p)
            .map(|(a, b)| a.sub(b).scale(inv_dt))
            .collect();
        let du_rate: VectorField = u
            .iter()
            .zip(&prev.u)
            .map(|(a, b)| (a - b) * inv_dt)
            .collect();
        let div_u_rate = divergence_at_qp(&self.grid, &du_rate);
        let (theta_new, _) = self.heat_step(
            &prev.theta,
            &next.theta,
            theta_tilde_next,
            &eps_p_rate,
            &stress,
            &div_u_rate,
            Some(&next.theta),
        )?;
        let diff: ScalarField = theta_new
            .iter()
            .zip(&next.theta)
            .map(|(a, b)| a - b)
            .collect();
        Ok(self.lr_norm(&diff))
    }
}

/// Trajectory of a full run plus per-step bookkeeping consumed by the
/// diagnostics layer.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub cfg: ModelConfig,
    pub states: Vec<State>,
    pub theta_tilde: Vec<ScalarField>,
    /// Applied heat sources at quadrature points, one entry per step.
    pub heat_sources: Vec<QpScalarField>,
    pub picard_iters: Vec<usize>,
}

impl RunResult {
    pub fn n_steps(&self) -> usize {
        self.states.len() - 1
    }

    /// Full temperature theta_hat = theta + theta_tilde at step n.
    pub fn theta_hat(&self, n: usize) -> ScalarField {
        self.states[n]
            .theta
            .iter()
            .zip(&self.theta_tilde[n])
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// Run the coupled simulation over [0, t_end]; a step failure aborts the
/// run and returns the trajectory completed so far together with the step
/// index that failed, so partial outputs can still be flushed.
pub fn run_simulation_partial(
    cfg: &ModelConfig,
) -> Result<(RunResult, Option<(usize, SimError)>), SimError> {
    cfg.validate()?;
    if cfg.dt > cfg.lambda {
        if cfg.allow_dt_above_lambda {
            eprintln!(
                "warning: dt = {} exceeds lambda = {}; the flow-rule stiffness 1/(2 lambda) is not resolved",
                cfg.dt, cfg.lambda
            );
        } else {
            return Err(SimError::config(format!(
                "dt = {} exceeds lambda = {}; reduce dt or set time.allow_dt_above_lambda",
                cfg.dt, cfg.lambda
            )));
        }
    }
    let grid = cfg.grid();
    let n_steps = steps_for(cfg.t_end, cfg.dt)?;
    let stepper = Stepper::new(cfg)?;
    let g = NeumannData::from_spec(&grid, &cfg.flux, cfg.t_end, cfg.dt)?;
    let theta_tilde = solve_tilde_theta(&grid, &g, cfg.t_end, cfg.dt, &cfg.cg)?;
    let theta0 = cfg.theta0.nodal(&grid);
    let initial = State::initial(&grid, theta0);
    let ys = cfg.yield_surface();
    for (q, t) in initial.stress.iter().enumerate() {
        if !in_k(t, &ys) {
            return Err(SimError::config(format!(
                "initial stress violates |P T| <= k at quadrature point {q}"
            )));
        }
    }
    let mut states = vec![initial];
    let mut heat_sources = Vec::with_capacity(n_steps);
    let mut picard_iters = Vec::with_capacity(n_steps);
    let mut failure = None;
    for n in 1..=n_steps {
        match stepper.picard_step(states.last().unwrap(), &theta_tilde[n], n) {
            Ok((next, info)) => {
                heat_sources.push(info.heat_source_qp);
                picard_iters.push(info.picard_iters);
                states.push(next);
            }
            Err(e) => {
                failure = Some((n, e));
                break;
            }
        }
    }
    let completed = states.len();
    Ok((
        RunResult {
            cfg: cfg.clone(),
            states,
            theta_tilde: theta_tilde.into_iter().take(completed).collect(),
            heat_sources,
            picard_iters,
        },
        failure,
    ))
}

/// Run the coupled simulation over [0, t_end], failing outright if any step
/// does not converge.
pub fn run_simulation(cfg: &ModelConfig) -> Result<RunResult, SimError> {
    match run_simulation_partial(cfg)? {
        (result, None) => Ok(result),
        (_, Some((_, e))) => Err(e),
    }
}

/// Per-lambda runs of the same scenario plus Cauchy distances between
/// consecutive members. Individual failures are recorded and the sweep
/// continues.
pub struct SweepResult {
    pub lambdas: Vec<f64>,
    pub runs: Vec<Result<RunResult, SimError>>,
}

impl SweepResult {
    /// Cauchy metric between the stress fields of consecutive successful
    /// runs at a given step index; `None` where a member failed.
    pub fn cauchy_at(&self, step: usize, d: &ElasticityTensor, grid: &Grid) -> Vec<Option<f64>> {
        let mut out = Vec::new();
        for pair in self.runs.windows(2) {
            match (&pair[0], &pair[1]) {
                (Ok(a), Ok(b)) => {
                    let m = crate::diagnostics::cauchy_metric(
                        grid,
                        &a.states[step].stress,
                        &b.states[step].stress,
                        d,
                    )
                    .expect("sweep members share one grid");
                    out.push(Some(m));
                }
                _ => out.push(None),
            }
        }
        out
    }
}

pub fn lambda_sweep(cfg: &ModelConfig, lambdas: &[f64]) -> Result<SweepResult, SimError> {
    if lambdas.is_empty() {
        return Err(SimError::config("lambda sweep needs at least one value"));
    }
    for w in lambdas.windows(2) {
        if !(w[1] <= w[0]) {
            return Err(SimError::config(
                "lambda sweep values must be descending",
            ));
        }
    }
    if !(lambdas[lambdas.len() - 1] > 0.0) {
        return Err(SimError::config("lambda sweep values must be positive"));
    }
    let runs: Vec<Result<RunResult, SimError>> = lambdas
        .iter()
        .map(|&lambda| run_simulation(&cfg.with_lambda(lambda)))
        .collect();
    Ok(SweepResult {
        lambdas: lambdas.to_vec(),
        runs,
    })
}
