//! Model data: the thermal-stress nonlinearity, analytic load and initial
//! data families, and the validated configuration consumed by the solver.

use crate::error::SimError;
use crate::grid::{Grid, ScalarField, TensorField, VectorField};
use crate::lift::FluxSpec;
use crate::plastic::{YieldSurface, YosidaParam};
use crate::sparse::CgParams;
use crate::tensor::ElasticityTensor;

/// Thermal part of the Cauchy stress, sigma = T - f(theta) Id.
///
/// The default piecewise-power variant is
///
/// ```text
/// f(r) = M ((1 + r)^alpha - 1)          for r >= 0,
/// f(r) = -C ((1 - r)^(1/2) - 1)         for r < 0,
/// ```
///
/// continuous at 0, with sublinear growth |f(r)| <= a + M |r|^alpha
/// (alpha in (1/2, 5/6)) and square-root growth on the negative axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalStressKind {
    PiecewisePower,
    /// Decoupled variant for purely mechanical runs.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalStressFunction {
    pub kind: ThermalStressKind,
    /// Additive growth constant; defaults to the scale M.
    pub a: f64,
    /// Scale M of the positive branch.
    pub m: f64,
    /// Growth exponent, restricted to (1/2, 5/6).
    pub alpha: f64,
    /// Scale of the negative branch.
    pub c_neg: f64,
}

impl ThermalStressFunction {
    pub fn piecewise_power(m: f64, alpha: f64, c_neg: f64) -> Result<Self, SimError> {
        let f = Self {
            kind: ThermalStressKind::PiecewisePower,
            a: m,
            m,
            alpha,
            c_neg,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn zero() -> Self {
        Self {
            kind: ThermalStressKind::Zero,
            a: 0.0,
            m: 0.0,
            alpha: 0.7,
            c_neg: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.a < 0.0 || self.m < 0.0 {
            return Err(SimError::config(format!(
                "thermal stress constants must be nonnegative: a = {}, M = {}",
                self.a, self.m
            )));
        }
        if !(self.alpha > 0.5 && self.alpha < 5.0 / 6.0) {
            return Err(SimError::config(format!(
                "alpha must lie in the open interval (1/2, 5/6), got {}",
                self.alpha
            )));
        }
        if !(self.c_neg > 0.0) {
            return Err(SimError::config(format!(
                "negative-branch constant must be positive, got {}",
                self.c_neg
            )));
        }
        Ok(())
    }

    /// Evaluate f(r).
    pub fn eval(&self, r: f64) -> f64 {
        match self.kind {
            ThermalStressKind::Zero => 0.0,
            ThermalStressKind::PiecewisePower => {
                if r >= 0.0 {
                    self.m * ((1.0 + r).powf(self.alpha) - 1.0)
                } else {
                    -self.c_neg * ((1.0 - r).sqrt() - 1.0)
                }
            }
        }
    }
}

/// Analytic body-force families; the ramped shear profile is the standard
/// way to drive the deviatoric stress through the yield limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BodyForceSpec {
    Zero,
    Constant {
        fx: f64,
        fy: f64,
    },
    /// amplitude * min(t/ramp_time, 1) * (sin(pi y / ly), 0)
    ShearRamp {
        amplitude: f64,
        ramp_time: f64,
    },
    /// Gaussian bump in space pushing in x, constant in time.
    Bump {
        amplitude: f64,
        width: f64,
    },
}

impl BodyForceSpec {
    pub fn eval(&self, grid: &Grid, x: f64, y: f64, t: f64) -> (f64, f64) {
        match *self {
            BodyForceSpec::Zero => (0.0, 0.0),
            BodyForceSpec::Constant { fx, fy } => (fx, fy),
            BodyForceSpec::ShearRamp {
                amplitude,
                ramp_time,
            } => {
                let ramp = if ramp_time > 0.0 {
                    (t / ramp_time).min(1.0)
                } else {
                    1.0
                };
                (
                    amplitude * ramp * (std::f64::consts::PI * y / grid.ly()).sin(),
                    0.0,
                )
            }
            BodyForceSpec::Bump { amplitude, width } => {
                let cx = 0.5 * grid.lx();
                let cy = 0.5 * grid.ly();
                let r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                (amplitude * (-r2 / (width * width)).exp(), 0.0)
            }
        }
    }

    /// Body force sampled at every quadrature point at time t.
    pub fn at_qp(&self, grid: &Grid, t: f64) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); grid.n_qp()];
        for cy in 0..grid.ny() {
            for cx in 0..grid.nx() {
                let base = 4 * grid.cell_index(cx, cy);
                for q in 0..4 {
                    let (x, y) = grid.qp_coords(cx, cy, q);
                    out[base + q] = self.eval(grid, x, y, t);
                }
            }
        }
        out
    }
}

/// Initial temperature families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialThetaSpec {
    Constant(f64),
    /// Centered Gaussian bump amplitude * exp(-|x - c|^2 / width^2).
    Bump { amplitude: f64, width: f64 },
}

impl InitialThetaSpec {
    pub fn nodal(&self, grid: &Grid) -> ScalarField {
        (0..grid.n_nodes())
            .map(|n| {
                let (x, y) = grid.node_coords(n);
                match *self {
                    InitialThetaSpec::Constant(c) => c,
                    InitialThetaSpec::Bump { amplitude, width } => {
                        let cx = 0.5 * grid.lx();
                        let cy = 0.5 * grid.ly();
                        let r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                        amplitude * (-r2 / (width * width)).exp()
                    }
                }
            })
            .collect()
    }
}

/// Fully validated model parameters. Everything has a default, so an empty
/// configuration is runnable.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub lame_first: f64,
    pub lame_second: f64,
    pub yield_k: f64,
    pub lambda: f64,
    pub f_spec: ThermalStressFunction,
    pub body_force: BodyForceSpec,
    pub flux: FluxSpec,
    pub theta0: InitialThetaSpec,
    pub t_end: f64,
    pub dt: f64,
    pub allow_dt_above_lambda: bool,
    pub cg: CgParams,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub picard_damping: f64,
    /// Exponent r of the discrete L^r norm used in the fixed-point stop
    /// criterion; kept inside (1, 2).
    pub picard_exponent: f64,
    /// Stop tolerance of the inner mechanical iteration (max plastic-strain
    /// update between sweeps).
    pub mech_tol: f64,
    pub mech_max: usize,
    /// Truncation height K for the masked-gradient diagnostic.
    pub diag_trunc_k: f64,
    /// Exponent of the low-integrability temperature norm, in [1, 5/4).
    pub boccardo_q: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            nx: 32,
            ny: 32,
            lx: 1.0,
            ly: 1.0,
            lame_first: 1.0,
            lame_second: 1.0,
            yield_k: 0.3,
            lambda: 0.05,
            f_spec: ThermalStressFunction {
                kind: ThermalStressKind::PiecewisePower,
                a: 1.0,
                m: 1.0,
                alpha: 0.7,
                c_neg: 1.0,
            },
            body_force: BodyForceSpec::Zero,
            flux: FluxSpec::Zero,
            theta0: InitialThetaSpec::Constant(0.0),
            t_end: 0.5,
            dt: 5e-3,
            allow_dt_above_lambda: false,
            cg: CgParams::default(),
            picard_tol: 1e-9,
            picard_max: 60,
            picard_damping: 1.0,
            picard_exponent: 1.2,
            mech_tol: 1e-12,
            mech_max: 400,
            diag_trunc_k: 5.0,
            boccardo_q: 1.2,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        Grid::new(self.nx, self.ny, self.lx, self.ly)?;
        ElasticityTensor::new(self.lame_first, self.lame_second)
            .map_err(SimError::config)?;
        YieldSurface::new(self.yield_k).map_err(SimError::config)?;
        YosidaParam::new(self.lambda).map_err(SimError::config)?;
        self.f_spec.validate()?;
        if !(self.dt > 0.0) || !(self.t_end >= self.dt) {
            return Err(SimError::config(format!(
                "need 0 < dt <= t_end, got dt = {}, t_end = {}",
                self.dt, self.t_end
            )));
        }
        if !(self.picard_tol > 0.0) {
            return Err(SimError::config("picard tolerance must be positive"));
        }
        if !(self.picard_damping > 0.0 && self.picard_damping <= 1.0) {
            return Err(SimError::config(format!(
                "picard damping must lie in (0, 1], got {}",
                self.picard_damping
            )));
        }
        if !(self.picard_exponent > 1.0 && self.picard_exponent < 2.0) {
            return Err(SimError::config(format!(
                "picard norm exponent must lie in (1, 2), got {}",
                self.picard_exponent
            )));
        }
        if !(self.boccardo_q >= 1.0 && self.boccardo_q < 1.25) {
            return Err(SimError::config(format!(
                "temperature norm exponent must lie in [1, 5/4), got {}",
                self.boccardo_q
            )));
        }
        if !(self.diag_trunc_k > 0.0) {
            return Err(SimError::config("diagnostic truncation height must be positive"));
        }
        if !(self.mech_tol > 0.0) || self.mech_max == 0 {
            return Err(SimError::config("mechanical sub-iteration controls invalid"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.nx, self.ny, self.lx, self.ly).expect("validated grid")
    }

    pub fn elasticity(&self) -> ElasticityTensor {
        ElasticityTensor::new(self.lame_first, self.lame_second).expect("validated tensor")
    }

    pub fn yield_surface(&self) -> YieldSurface {
        YieldSurface::new(self.yield_k).expect("validated yield limit")
    }

    pub fn yosida(&self) -> YosidaParam {
        YosidaParam::new(self.lambda).expect("validated lambda")
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut c = self.clone();
        c.lambda = lambda;
        c
    }
}

/// Solution fields at one time level. The cached stress satisfies
/// T = D(eps(u) - eps_p) at every quadrature point.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: VectorField,
    pub u_prev: VectorField,
    pub eps_p: TensorField,
    pub theta: ScalarField,
    pub stress: TensorField,
}

impl State {
    pub fn initial(grid: &Grid, theta0: ScalarField) -> Self {
        Self {
            t: 0.0,
            u: grid.zero_vector(),
            u_prev: grid.zero_vector(),
            eps_p: grid.zero_tensor(),
            theta: theta0,
            stress: grid.zero_tensor(),
        }
    }
}
