//! Manufactured-solution convergence studies for the two assembled
//! operators: plane-strain elasticity with homogeneous Dirichlet data and
//! the Neumann diffusion operator with mean pinning. Errors are measured in
//! the mass-weighted nodal L2 norm against the interpolated exact solution.

use crate::assemble::{
    apply_vector_dirichlet, assemble_elasticity, assemble_laplacian_neumann, assemble_mass,
    body_force_load, scalar_source_load,
};
use crate::error::SimError;
use crate::grid::{Grid, QpScalarField};
use crate::sparse::{solve_spd, CgParams, SparseMatrix};
use crate::tensor::ElasticityTensor;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct MmsStudy {
    pub name: String,
    pub hs: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of log2(error) against log2(h).
    pub observed_order: f64,
}

/// Least-squares slope of log2(e) vs log2(h); with the standard halving
/// sequence this is the mean of the pairwise orders.
pub fn observed_order(hs: &[f64], errors: &[f64]) -> f64 {
    assert_eq!(hs.len(), errors.len());
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.log2()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(1e-300).log2()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let num: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let den: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    num / den
}

fn mass_norm_sq(mass: &SparseMatrix, v: &[f64]) -> f64 {
    mass.quadratic_form(v).max(0.0)
}

/// u = (sin(pi x) sin(pi y), 0) on the unit square; the matching body force
/// for -div(2 mu eps(u) + lambda div(u) Id) is
/// F = ((3 mu + lambda) pi^2 sin sin, -(mu + lambda) pi^2 cos cos).
pub fn elasticity_mms(
    resolutions: &[usize],
    d: &ElasticityTensor,
    cg: &CgParams,
) -> Result<MmsStudy, SimError> {
    let mu = d.lame_second();
    let lam = d.lame_first();
    let mut hs = Vec::new();
    let mut errors = Vec::new();
    for &n in resolutions {
        let grid = Grid::new(n, n, 1.0, 1.0)?;
        let a = assemble_elasticity(&grid, d);
        let mut f = vec![(0.0, 0.0); grid.n_qp()];
        for cy in 0..grid.ny() {
            for cx in 0..grid.nx() {
                let base = 4 * grid.cell_index(cx, cy);
                for q in 0..4 {
                    let (x, y) = grid.qp_coords(cx, cy, q);
                    f[base + q] = (
                        (3.0 * mu + lam) * PI * PI * (PI * x).sin() * (PI * y).sin(),
                        -(mu + lam) * PI * PI * (PI * x).cos() * (PI * y).cos(),
                    );
                }
            }
        }
        let mut rhs = body_force_load(&grid, &f);
        apply_vector_dirichlet(&grid, &mut rhs);
        let u = solve_spd(&a, &rhs, cg.tol, cg.maxit, cg.jacobi)?;
        let mut err_x = vec![0.0; grid.n_nodes()];
        let mut err_y = vec![0.0; grid.n_nodes()];
        for node in 0..grid.n_nodes() {
            let (x, y) = grid.node_coords(node);
            err_x[node] = u[2 * node] - (PI * x).sin() * (PI * y).sin();
            err_y[node] = u[2 * node + 1];
        }
        let mass = assemble_mass(&grid);
        let err = (mass_norm_sq(&mass, &err_x) + mass_norm_sq(&mass, &err_y)).sqrt();
        hs.push(grid.h());
        errors.push(err);
    }
    let order = observed_order(&hs, &errors);
    Ok(MmsStudy {
        name: "elasticity".into(),
        hs,
        errors,
        observed_order: order,
    })
}

/// theta = cos(pi x) cos(pi y) with source 2 pi^2 cos cos and natural
/// boundary data; the singular Neumann operator is pinned by projecting the
/// constant mode out of the right-hand side and aligning means afterwards.
pub fn heat_neumann_mms(resolutions: &[usize], cg: &CgParams) -> Result<MmsStudy, SimError> {
    let mut hs = Vec::new();
    let mut errors = Vec::new();
    for &n in resolutions {
        let grid = Grid::new(n, n, 1.0, 1.0)?;
        let k = assemble_laplacian_neumann(&grid);
        let mut src: QpScalarField = vec![0.0; grid.n_qp()];
        for cy in 0..grid.ny() {
            for cx in 0..grid.nx() {
                let base = 4 * grid.cell_index(cx, cy);
                for q in 0..4 {
                    let (x, y) = grid.qp_coords(cx, cy, q);
                    src[base + q] = 2.0 * PI * PI * (PI * x).cos() * (PI * y).cos();
                }
            }
        }
        let mut rhs = scalar_source_load(&grid, &src);
        let mean = rhs.iter().sum::<f64>() / rhs.len() as f64;
        for r in rhs.iter_mut() {
            *r -= mean;
        }
        let theta = solve_spd(&k, &rhs, cg.tol, cg.maxit, cg.jacobi)?;
        let mass = assemble_mass(&grid);
        let exact: Vec<f64> = (0..grid.n_nodes())
            .map(|node| {
                let (x, y) = grid.node_coords(node);
                (PI * x).cos() * (PI * y).cos()
            })
            .collect();
        // align mass-weighted means before comparing
        let area = grid.area();
        let mean_h = mass.mul_vec(&theta).iter().sum::<f64>() / area;
        let mean_e = mass.mul_vec(&exact).iter().sum::<f64>() / area;
        let err_vec: Vec<f64> = theta
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - mean_h) - (b - mean_e))
            .collect();
        let err = mass_norm_sq(&mass, &err_vec).sqrt();
        hs.push(grid.h());
        errors.push(err);
    }
    let order = observed_order(&hs, &errors);
    Ok(MmsStudy {
        name: "heat_neumann".into(),
        hs,
        errors,
        observed_order: order,
    })
}

/// Harmonic linear field theta = a + b x + c y driven purely by its
/// boundary flux: the Q1 space contains it, so the pinned Neumann solve
/// reproduces the nodal interpolant to solver precision at any resolution.
pub fn linear_exactness(resolution: usize, cg: &CgParams) -> Result<f64, SimError> {
    let grid = Grid::new(resolution, resolution, 1.0, 1.0)?;
    let k = assemble_laplacian_neumann(&grid);
    let (b, c) = (0.8, -0.6);
    let exact: Vec<f64> = (0..grid.n_nodes())
        .map(|node| {
            let (x, y) = grid.node_coords(node);
            b * x + c * y
        })
        .collect();
    // the outward normal flux is constant per side but jumps at corners, so
    // the load is assembled edge-wise: each endpoint receives flux * h / 2
    let mut rhs = vec![0.0; grid.n_nodes()];
    for (na, nb) in grid.boundary_edges() {
        let (xa, ya) = grid.node_coords(na);
        let (_, yb) = grid.node_coords(nb);
        let flux = if ya == yb {
            if ya == 0.0 {
                -c
            } else {
                c
            }
        } else if xa == 0.0 {
            -b
        } else {
            b
        };
        rhs[na] += flux * 0.5 * grid.h();
        rhs[nb] += flux * 0.5 * grid.h();
    }
    let mean = rhs.iter().sum::<f64>() / rhs.len() as f64;
    for r in rhs.iter_mut() {
        *r -= mean;
    }
    let theta = solve_spd(&k, &rhs, cg.tol, cg.maxit, cg.jacobi)?;
    let mass = assemble_mass(&grid);
    let area = grid.area();
    let mean_h = mass.mul_vec(&theta).iter().sum::<f64>() / area;
    let mean_e = mass.mul_vec(&exact).iter().sum::<f64>() / area;
    let max_err = theta
        .iter()
        .zip(&exact)
        .map(|(a, b)| ((a - mean_h) - (b - mean_e)).abs())
        .fold(0.0f64, f64::max);
    Ok(max_err)
}
