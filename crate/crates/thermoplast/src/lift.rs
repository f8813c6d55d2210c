//! Boundary-lift heat problem: the temperature carries an inhomogeneous
//! Neumann flux, so the coupled solver works with the homogenized unknown
//! theta = theta_hat - theta_tilde where theta_tilde solves
//!
//! ```text
//! theta_tilde_t - Laplace(theta_tilde) = 0,   d(theta_tilde)/dn = g,   theta_tilde(0) = 0.
//! ```
//!
//! The whole trajectory is precomputed on the simulation time grid before
//! the coupling loop starts.

use crate::assemble::{assemble_laplacian_neumann, assemble_mass, boundary_load};
use crate::error::SimError;
use crate::grid::{Grid, ScalarField};
use crate::sparse::{solve_spd_from, CgParams, SparseMatrix};

/// Analytic boundary-flux families; reproducible scenarios without a data
/// pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxSpec {
    Zero,
    /// Uniform value on the whole boundary.
    Constant(f64),
    /// value * sin(2 pi freq t), uniform in space.
    SinT { value: f64, freq: f64 },
    /// value * (x - lx/2): mean-zero over the boundary of the rectangle.
    LinearX { value: f64 },
}

impl FluxSpec {
    pub fn eval(&self, grid: &Grid, node: usize, t: f64) -> f64 {
        match *self {
            FluxSpec::Zero => 0.0,
            FluxSpec::Constant(v) => v,
            FluxSpec::SinT { value, freq } => value * (2.0 * std::f64::consts::PI * freq * t).sin(),
            FluxSpec::LinearX { value } => {
                let (x, _) = grid.node_coords(node);
                value * (x - 0.5 * grid.lx())
            }
        }
    }
}

/// Time-sampled Neumann data on boundary nodes (zero at interior nodes).
#[derive(Debug, Clone)]
pub struct NeumannData {
    samples: Vec<ScalarField>,
    dt: f64,
}

impl NeumannData {
    pub fn from_spec(grid: &Grid, spec: &FluxSpec, t_end: f64, dt: f64) -> Result<Self, SimError> {
        let n_steps = steps_for(t_end, dt)?;
        let boundary = grid.boundary_nodes();
        let mut samples = Vec::with_capacity(n_steps + 1);
        for n in 0..=n_steps {
            let t = n as f64 * dt;
            let mut field = grid.zero_scalar();
            for &b in &boundary {
                let v = spec.eval(grid, b, t);
                if !v.is_finite() {
                    return Err(SimError::config(format!(
                        "boundary flux not finite at node {b}, t = {t}"
                    )));
                }
                field[b] = v;
            }
            samples.push(field);
        }
        Ok(Self { samples, dt })
    }

    pub fn from_samples(samples: Vec<ScalarField>, dt: f64) -> Result<Self, SimError> {
        if samples.len() < 2 {
            return Err(SimError::config("Neumann data needs at least 2 time samples"));
        }
        if samples
            .iter()
            .any(|s| s.iter().any(|v| !v.is_finite()))
        {
            return Err(SimError::config("Neumann data contains non-finite values"));
        }
        Ok(Self { samples, dt })
    }

    pub fn sample(&self, n: usize) -> &ScalarField {
        &self.samples[n]
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Number of implicit-Euler steps; dt must divide t_end within rounding.
pub fn steps_for(t_end: f64, dt: f64) -> Result<usize, SimError> {
    if !(dt > 0.0) || !(t_end >= dt) {
        return Err(SimError::config(format!(
            "need 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(SimError::config(format!(
            "dt = {dt} does not divide t_end = {t_end}"
        )));
    }
    Ok(n as usize)
}

/// Implicit-Euler trajectory of the lift problem. Index n holds
/// theta_tilde at t = n*dt; the initial field is identically zero.
pub fn solve_tilde_theta(
    grid: &Grid,
    g: &NeumannData,
    t_end: f64,
    dt: f64,
    cg: &CgParams,
) -> Result<Vec<ScalarField>, SimError> {
    let n_steps = steps_for(t_end, dt)?;
    if g.n_samples() < n_steps + 1 {
        return Err(SimError::Mismatch(format!(
            "Neumann data covers {} samples, need {}",
            g.n_samples(),
            n_steps + 1
        )));
    }
    let mass = assemble_mass(grid);
    let stiff = assemble_laplacian_neumann(grid);
    let system = mass.add_scaled(dt, &stiff);
    let mut trajectory = Vec::with_capacity(n_steps + 1);
    trajectory.push(grid.zero_scalar());
    for n in 1..=n_steps {
        let prev = trajectory.last().unwrap();
        let b = boundary_load(grid, g.sample(n));
        let mut rhs = mass.mul_vec(prev);
        for (r, bi) in rhs.iter_mut().zip(&b) {
            *r += dt * bi;
        }
        let next = solve_spd_from(&system, &rhs, Some(prev), cg.tol, cg.maxit, cg.jacobi)?;
        trajectory.push(next);
    }
    Ok(trajectory)
}

/// Discrete norms entering the lift stability estimate: the time-derivative
/// L2-L2 norm and the L-infinity-in-time H1 norm of theta_tilde against the
/// H1-L2 norm of the flux. Only the ratio is meaningful; no constant is
/// claimed.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftReport {
    pub theta_t_l2l2: f64,
    pub theta_linf_h1: f64,
    pub g_h1l2: f64,
}

impl LiftReport {
    pub fn ratio(&self) -> f64 {
        if self.g_h1l2 == 0.0 {
            0.0
        } else {
            (self.theta_t_l2l2 + self.theta_linf_h1) / self.g_h1l2
        }
    }
}

/// Squared L2 norm over the boundary with two-point edge quadrature.
pub fn boundary_l2_sq(grid: &Grid, g: &ScalarField) -> f64 {
    let gauss = 1.0 / 3.0f64.sqrt();
    let half = 0.5 * grid.h();
    let mut acc = 0.0;
    for (a, b) in grid.boundary_edges() {
        for &xi in &[-gauss, gauss] {
            let na = 0.5 * (1.0 - xi);
            let nb = 0.5 * (1.0 + xi);
            let v = na * g[a] + nb * g[b];
            acc += half * v * v;
        }
    }
    acc
}

pub fn lift_estimate_report(
    grid: &Grid,
    trajectory: &[ScalarField],
    g: &NeumannData,
) -> LiftReport {
    let mass = assemble_mass(grid);
    let stiff = assemble_laplacian_neumann(grid);
    let dt = g.dt();
    let mut dtheta_acc = 0.0;
    let mut linf_h1 = 0.0f64;
    for n in 0..trajectory.len() {
        let th = &trajectory[n];
        let h1_sq = mass.quadratic_form(th) + stiff.quadratic_form(th);
        linf_h1 = linf_h1.max(h1_sq.max(0.0).sqrt());
        if n > 0 {
            let rate: Vec<f64> = th
                .iter()
                .zip(&trajectory[n - 1])
                .map(|(a, b)| (a - b) / dt)
                .collect();
            dtheta_acc += dt * mass.quadratic_form(&rate);
        }
    }
    let mut g_acc = 0.0;
    for n in 1..trajectory.len().min(g.n_samples()) {
        g_acc += dt * boundary_l2_sq(grid, g.sample(n));
        let rate: Vec<f64> = g
            .sample(n)
            .iter()
            .zip(g.sample(n - 1))
            .map(|(a, b)| (a - b) / dt)
            .collect();
        g_acc += dt * boundary_l2_sq(grid, &rate);
    }
    LiftReport {
        theta_t_l2l2: dtheta_acc.max(0.0).sqrt(),
        theta_linf_h1: linf_h1,
        g_h1l2: g_acc.max(0.0).sqrt(),
    }
}

/// Total heat content  int theta dx  of a nodal field.
pub fn total_heat(mass: &SparseMatrix, theta: &ScalarField) -> f64 {
    mass.mul_vec(theta).iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_grid() -> Grid {
        Grid::new(8, 8, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_flux_gives_zero_trajectory() {
        let grid = unit_grid();
        let dt = 0.05;
        let g = NeumannData::from_spec(&grid, &FluxSpec::Zero, 0.2, dt).unwrap();
        let traj = solve_tilde_theta(&grid, &g, 0.2, dt, &CgParams::default()).unwrap();
        assert_eq!(traj.len(), 5);
        for th in &traj {
            assert!(th.iter().all(|&v| v == 0.0));
        }
        let report = lift_estimate_report(&grid, &traj, &g);
        assert_eq!(report.theta_t_l2l2, 0.0);
        assert_eq!(report.theta_linf_h1, 0.0);
        assert_eq!(report.g_h1l2, 0.0);
    }

    #[test]
    fn constant_flux_heat_growth() {
        // testing the implicit step against 1: total heat grows by
        // c * |boundary| per unit time, exactly in the discrete identity
        let grid = unit_grid();
        let dt = 0.025;
        let t_end = 0.2;
        let c = 1.7;
        let g = NeumannData::from_spec(&grid, &FluxSpec::Constant(c), t_end, dt).unwrap();
        let cg = CgParams {
            tol: 1e-13,
            ..CgParams::default()
        };
        let traj = solve_tilde_theta(&grid, &g, t_end, dt, &cg).unwrap();
        let mass = assemble_mass(&grid);
        for (n, th) in traj.iter().enumerate() {
            let t = n as f64 * dt;
            let expect = c * grid.boundary_length() * t;
            let got = total_heat(&mass, th);
            if n == 0 {
                assert_eq!(got, 0.0);
            } else {
                assert_relative_eq!(got, expect, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn mean_zero_flux_keeps_mean_zero() {
        let grid = unit_grid();
        let dt = 0.05;
        let g = NeumannData::from_spec(&grid, &FluxSpec::LinearX { value: 2.0 }, 0.3, dt).unwrap();
        let cg = CgParams {
            tol: 1e-13,
            ..CgParams::default()
        };
        let traj = solve_tilde_theta(&grid, &g, 0.3, dt, &cg).unwrap();
        let mass = assemble_mass(&grid);
        // growth rate of the mean equals (int_boundary g)/|Omega| = 0
        for th in &traj {
            assert!(total_heat(&mass, th).abs() <= 1e-10);
        }
        // and the field itself is nontrivial
        let last = traj.last().unwrap();
        assert!(last.iter().any(|&v| v.abs() > 1e-6));
    }

    #[test]
    fn trajectory_linear_in_data() {
        let grid = Grid::new(6, 6, 1.0, 1.0).unwrap();
        let dt = 0.05;
        let t_end = 0.2;
        let cg = CgParams {
            tol: 1e-13,
            ..CgParams::default()
        };
        let g1 = NeumannData::from_spec(&grid, &FluxSpec::Constant(1.0), t_end, dt).unwrap();
        let g2 =
            NeumannData::from_spec(&grid, &FluxSpec::SinT { value: 0.8, freq: 1.3 }, t_end, dt)
                .unwrap();
        let sum_samples: Vec<ScalarField> = (0..g1.n_samples())
            .map(|n| {
                g1.sample(n)
                    .iter()
                    .zip(g2.sample(n))
                    .map(|(a, b)| a + b)
                    .collect()
            })
            .collect();
        let gsum = NeumannData::from_samples(sum_samples, dt).unwrap();
        let t1 = solve_tilde_theta(&grid, &g1, t_end, dt, &cg).unwrap();
        let t2 = solve_tilde_theta(&grid, &g2, t_end, dt, &cg).unwrap();
        let tsum = solve_tilde_theta(&grid, &gsum, t_end, dt, &cg).unwrap();
        for n in 0..t1.len() {
            for i in 0..t1[n].len() {
                assert_relative_eq!(tsum[n][i], t1[n][i] + t2[n][i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn report_scales_linearly() {
        let grid = unit_grid();
        let dt = 0.05;
        let t_end = 0.2;
        let cg = CgParams {
            tol: 1e-13,
            ..CgParams::default()
        };
        let g1 = NeumannData::from_spec(&grid, &FluxSpec::SinT { value: 1.0, freq: 0.7 }, t_end, dt)
            .unwrap();
        let g2 = NeumannData::from_spec(&grid, &FluxSpec::SinT { value: 2.0, freq: 0.7 }, t_end, dt)
            .unwrap();
        let r1 = {
            let t = solve_tilde_theta(&grid, &g1, t_end, dt, &cg).unwrap();
            lift_estimate_report(&grid, &t, &g1)
        };
        let r2 = {
            let t = solve_tilde_theta(&grid, &g2, t_end, dt, &cg).unwrap();
            lift_estimate_report(&grid, &t, &g2)
        };
        assert_relative_eq!(r2.theta_t_l2l2, 2.0 * r1.theta_t_l2l2, max_relative = 1e-9);
        assert_relative_eq!(r2.theta_linf_h1, 2.0 * r1.theta_linf_h1, max_relative = 1e-9);
        assert_relative_eq!(r2.g_h1l2, 2.0 * r1.g_h1l2, max_relative = 1e-10);
    }

    #[test]
    fn ratio_stable_under_refinement() {
        let dt = 0.05;
        let t_end = 0.4;
        let cg = CgParams {
            tol: 1e-12,
            ..CgParams::default()
        };
        let mut ratios = Vec::new();
        for &n in &[8usize, 16] {
            let grid = Grid::new(n, n, 1.0, 1.0).unwrap();
            let g =
                NeumannData::from_spec(&grid, &FluxSpec::SinT { value: 1.0, freq: 0.5 }, t_end, dt)
                    .unwrap();
            let traj = solve_tilde_theta(&grid, &g, t_end, dt, &cg).unwrap();
            ratios.push(lift_estimate_report(&grid, &traj, &g).ratio());
        }
        let rel = (ratios[1] - ratios[0]).abs() / ratios[0];
        assert!(rel < 0.2, "ratio drift {rel} between resolutions");
    }

    #[test]
    fn discrete_energy_dissipation() {
        // 0.5 int (theta^{n+1})^2 <= 0.5 int (theta^n)^2 + dt * boundary work
        let grid = unit_grid();
        let dt = 0.05;
        let t_end = 0.3;
        let g = NeumannData::from_spec(&grid, &FluxSpec::SinT { value: 1.5, freq: 1.0 }, t_end, dt)
            .unwrap();
        let traj = solve_tilde_theta(&grid, &g, t_end, dt, &CgParams::default()).unwrap();
        let mass = assemble_mass(&grid);
        for n in 1..traj.len() {
            let e_new = 0.5 * mass.quadratic_form(&traj[n]);
            let e_old = 0.5 * mass.quadratic_form(&traj[n - 1]);
            let b = boundary_load(&grid, g.sample(n));
            let work: f64 = b.iter().zip(&traj[n]).map(|(bi, ti)| bi * ti).sum();
            assert!(e_new <= e_old + dt * work + 1e-10);
        }
    }

    #[test]
    fn rejects_short_or_bad_data() {
        let grid = unit_grid();
        assert!(NeumannData::from_samples(vec![grid.zero_scalar()], 0.1).is_err());
        assert!(steps_for(1.0, 0.3).is_err());
        assert_eq!(steps_for(1.0, 0.25).unwrap(), 4);
    }
}
