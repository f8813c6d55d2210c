//! Galerkin assembly of the elasticity, diffusion and mass operators plus
//! the load vectors used by the coupled solver. Vector fields carry two
//! degrees of freedom per node (interleaved); the whole boundary is
//! Dirichlet for the displacement and natural for the temperature.

use crate::grid::{
    scalar_at_qp, shape_gradients, shape_values, Grid, QpScalarField, ScalarField, TensorField,
    VectorField, QP_REF,
};
use crate::sparse::{SparseMatrix, TripletBuffer};
use crate::tensor::{ElasticityTensor, SymTensor};

/// Stiffness matrix of the bilinear form  int D eps(v) : eps(w) dx  on the
/// interleaved vector dofs, with homogeneous Dirichlet rows/columns on the
/// whole boundary eliminated symmetrically.
pub fn assemble_elasticity(grid: &Grid, d: &ElasticityTensor) -> SparseMatrix {
    let ndof = 2 * grid.n_nodes();
    let mut buf = TripletBuffer::new(ndof);
    let w = grid.qp_weight();
    let two_mu = 2.0 * d.lame_second();
    let lam = d.lame_first();
    for cy in 0..grid.ny() {
        for cx in 0..grid.nx() {
            let nodes = grid.cell_nodes(cx, cy);
            let mut k = [[0.0f64; 8]; 8];
            for &(xi, eta) in QP_REF.iter() {
                let sg = shape_gradients(xi, eta, grid.h());
                // strain of local dof (a, c): c = 0 -> (gax, 0, gay/2),
                // c = 1 -> (0, gay, gax/2); trace gax or gay
                let mut exx = [0.0f64; 8];
                let mut eyy = [0.0f64; 8];
                let mut exy = [0.0f64; 8];
                for a in 0..4 {
                    let (gx, gy) = sg[a];
                    exx[2 * a] = gx;
                    exy[2 * a] = 0.5 * gy;
                    eyy[2 * a + 1] = gy;
                    exy[2 * a + 1] = 0.5 * gx;
                }
                for p in 0..8 {
                    for q in 0..8 {
                        let tr_p = exx[p] + eyy[p];
                        let tr_q = exx[q] + eyy[q];
                        k[p][q] += w
                            * (two_mu
                                * (exx[p] * exx[q]
                                    + eyy[p] * eyy[q]
                                    + 2.0 * exy[p] * exy[q])
                                + lam * tr_p * tr_q);
                    }
                }
            }
            for p in 0..8 {
                let gp = 2 * nodes[p / 2] + p % 2;
                for q in 0..8 {
                    let gq = 2 * nodes[q / 2] + q % 2;
                    buf.push(gp, gq, k[p][q]);
                }
            }
        }
    }
    let mut dirichlet = vec![false; ndof];
    for n in 0..grid.n_nodes() {
        if grid.is_boundary_node(n) {
            dirichlet[2 * n] = true;
            dirichlet[2 * n + 1] = true;
        }
    }
    buf.compress(dirichlet)
}

/// Stiffness matrix of  int grad v . grad w dx  without boundary
/// elimination; constants are in the kernel.
pub fn assemble_laplacian_neumann(grid: &Grid) -> SparseMatrix {
    let n = grid.n_nodes();
    let mut buf = TripletBuffer::new(n);
    let w = grid.qp_weight();
    for cy in 0..grid.ny() {
        for cx in 0..grid.nx() {
            let nodes = grid.cell_nodes(cx, cy);
            let mut k = [[0.0f64; 4]; 4];
            for &(xi, eta) in QP_REF.iter() {
                let sg = shape_gradients(xi, eta, grid.h());
                for a in 0..4 {
                    for b in 0..4 {
                        k[a][b] += w * (sg[a].0 * sg[b].0 + sg[a].1 * sg[b].1);
                    }
                }
            }
            for a in 0..4 {
                for b in 0..4 {
                    buf.push(nodes[a], nodes[b], k[a][b]);
                }
            }
        }
    }
    buf.compress(vec![false; n])
}

/// Consistent mass matrix  int v w dx ; 2x2 Gauss integrates the bilinear
/// products exactly, so the total sum of entries is the domain area.
pub fn assemble_mass(grid: &Grid) -> SparseMatrix {
    let n = grid.n_nodes();
    let mut buf = TripletBuffer::new(n);
    let w = grid.qp_weight();
    for cy in 0..grid.ny() {
        for cx in 0..grid.nx() {
            let nodes = grid.cell_nodes(cx, cy);
            let mut m = [[0.0f64; 4]; 4];
            for &(xi, eta) in QP_REF.iter() {
                let sv = shape_values(xi, eta);
                for a in 0..4 {
                    for b in 0..4 {
                        m[a][b] += w * sv[a] * sv[b];
                    }
                }
            }
            for a in 0..4 {
                for b in 0..4 {
                    buf.push(nodes[a], nodes[b], m[a][b]);
                }
            }
        }
    }
    buf.compress(vec![false; n])
}

/// Plane-strain symmetric gradient of a nodal displacement field at every
/// quadrature point, embedded as a 3D tensor (zz = xz = yz = 0).
pub fn strain(grid: &Grid, u: &VectorField) -> TensorField {
    assert_eq!(u.len(), 2 * grid.n_nodes());
    let mut out = vec![SymTensor::ZERO; grid.n_qp()];
    for cy in 0..grid.ny() {
        for cx in 0..grid.nx() {
            let nodes = grid.cell_nodes(cx, cy);
            let base = 4 * grid.cell_index(cx, cy);
            for (q, &(xi, eta)) in QP_REF.iter().enumerate() {
                let sg = shape_gradients(xi, eta, grid.h());
                let mut exx = 0.0;
                let mut eyy = 0.0;
                let mut exy = 0.0;
                for a in 0..4 {
                    let ux = u[2 * nodes[a]];
                    let uy = u[2 * nodes[a] + 1];
                    let (gx, gy) = sg[a];
                    exx += gx * ux;
                    eyy += gy * uy;
                    exy += 0.5 * (gy * ux + gx * uy);
                }
                out[base + q] = SymTensor::new(exx, eyy, 0.0, exy, 0.0, 0.0);
            }
        }
    }
    out
}

/// In-plane divergence at quadrature points (the trace of the plane-strain
/// tensor).
pub fn divergence_at_qp(grid: &Grid, u: &VectorField) -> QpScalarField {
    strain(grid, u).iter().map(|e| e.trace()).collect()
}

/// Load vector  int s div(v) dx = int s Id : eps(v) dx  against vector test
/// functions, from quadrature-point values of s.
pub fn divergence_scalar_weighted_load(grid: &Grid, s: &QpScalarField) -> Vec<f64> {
    assert_eq!(s.len(), grid.n_qp());
    let mut load = vec![0.0; 2 * grid.n_nodes()];
    let w = grid.qp_weight();
    for cy in 0..grid.ny() {
        for cx in 0..grid.nx() {
            let nodes = grid.cell_nodes(cx, cy);
            let base = 4 * grid.cell_index(cx, cy);
            for (q, &(xi, eta)) in QP_REF.iter().enumerate() {
                let sg = shape_gradients(xi, eta, grid.h());
                let sval = s[base + q];
                for a in 0..4 {
                    load[2 * nodes[a]] += w * sval * sg[a].0;
                    load[2 * nodes[a] + 1] += w * sval * sg[a].1;
                }
            }
        }
    }
    load
}

/// Load vector  int tau : eps(v) dx  for a quadrature-point tensor field.
pub fn tensor_weighted_load(grid: &Grid, tau: &TensorField) -> Vec<f64> {
    assert_eq!(tau.len(), grid.n_qp());
    let mut load = vec![0.0; 2 * grid.n_nodes()];
    let w = grid.qp_weight();
    for cy in 0..grid.ny() {
        for cx in 0..grid.nx() {
            let nodes = grid.cell_nodes(cx, cy);
            let base = 4 * grid.cell_index(cx, cy);
            for (q, &(xi, eta)) in QP_REF.iter().enumerate() {
                let sg = shape_gradients(xi, eta, grid.h());
                let t = &tau[base + q];
                for a in 0..4 {
                    let (gx, gy) = sg[a];
                    // eps(v) for dof (a,0) is (gx, 0, gy/2); contraction
                    // counts xy twice
                    load[2 * nodes[a]] += w * (t.xx * gx + t.xy * gy);
                    load[2 * nodes[a] + 1] += w * (t.yy * gy + t.xy * gx);
                }
            }
        }
    }
    load
}

/// Load vector  int F . v dx  for a body force given at quadrature points.
pub fn body_force_load(grid: &Grid, f: &[(f64, f64)]) -> Vec<f64> {
    assert_eq!(f.len(), grid.n_qp());
    let mut load = vec![0.0; 2 * grid.n_nodes()];
    let w = grid.qp_weight();
    for cy in 0..grid.ny() {
        for cx in 0..grid.nx() {
            let nodes = grid.cell_nodes(cx, cy);
            let base = 4 * grid.cell_index(cx, cy);
            for (q, &(xi, eta)) in QP_REF.iter().enumerate() {
                let sv = shape_values(xi, eta);
                let (fx, fy) = f[base + q];
                for a in 0..4 {
                    load[2 * nodes[a]] += w * sv[a] * fx;
                    load[2 * nodes[a] + 1] += w * sv[a] * fy;
                }
            }
        }
    }
    load
}

/// Load vector  int s v dx  against scalar test functions.
pub fn scalar_source_load(grid: &Grid, s: &QpScalarField) -> Vec<f64> {
    assert_eq!(s.len(), grid.n_qp());
    let mut load = vec![0.0; grid.n_nodes()];
    let w = grid.qp_weight();
    for cy in 0..grid.ny() {
        for cx in 0..grid.nx() {
            let nodes = grid.cell_nodes(cx, cy);
            let base = 4 * grid.cell_index(cx, cy);
            for (q, &(xi, eta)) in QP_REF.iter().enumerate() {
                let sv = shape_values(xi, eta);
                for a in 0..4 {
                    load[nodes[a]] += w * sv[a] * s[base + q];
                }
            }
        }
    }
    load
}

/// Boundary load  int_dOmega g v ds  with two-point Gauss quadrature per
/// edge; g is given at boundary nodes (zero elsewhere) and interpolated
/// linearly along each edge.
pub fn boundary_load(grid: &Grid, g: &ScalarField) -> Vec<f64> {
    assert_eq!(g.len(), grid.n_nodes());
    let mut load = vec![0.0; grid.n_nodes()];
    let gauss = 1.0 / 3.0f64.sqrt();
    let half = 0.5 * grid.h();
    for (a, b) in grid.boundary_edges() {
        for &xi in &[-gauss, gauss] {
            let na = 0.5 * (1.0 - xi);
            let nb = 0.5 * (1.0 + xi);
            let gval = na * g[a] + nb * g[b];
            load[a] += half * na * gval;
            load[b] += half * nb * gval;
        }
    }
    load
}

/// Zero the Dirichlet (boundary) entries of a vector-dof load.
pub fn apply_vector_dirichlet(grid: &Grid, load: &mut [f64]) {
    assert_eq!(load.len(), 2 * grid.n_nodes());
    for n in 0..grid.n_nodes() {
        if grid.is_boundary_node(n) {
            load[2 * n] = 0.0;
            load[2 * n + 1] = 0.0;
        }
    }
}

/// Discrete L2 norm induced by the mass matrix.
pub fn mass_norm(mass: &SparseMatrix, v: &[f64]) -> f64 {
    mass.quadratic_form(v).max(0.0).sqrt()
}

/// Quadrature of  int |theta|^p dx  for a nodal field.
pub fn lp_integral(grid: &Grid, field: &ScalarField, p: f64) -> f64 {
    let at_qp = scalar_at_qp(grid, field);
    let w = grid.qp_weight();
    at_qp.iter().map(|v| w * v.abs().powf(p)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::solve_spd;
    use crate::tensor::inner;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    /// Direct quadrature-loop oracle for the elasticity quadratic form.
    fn elasticity_form_oracle(grid: &Grid, d: &ElasticityTensor, u: &VectorField) -> f64 {
        let eps = strain(grid, u);
        let w = grid.qp_weight();
        eps.iter().map(|e| w * inner(&d.apply(e), e)).sum()
    }

    #[test]
    fn operators_are_symmetric() {
        let grid = Grid::new(4, 4, 1.0, 1.0).unwrap();
        let d = ElasticityTensor::new(1.0, 1.0).unwrap();
        assert!(assemble_elasticity(&grid, &d).asymmetry() <= 1e-12);
        assert!(assemble_laplacian_neumann(&grid).asymmetry() <= 1e-12);
        assert!(assemble_mass(&grid).asymmetry() <= 1e-12);
    }

    #[test]
    fn elasticity_zero_field_and_positivity() {
        let grid = Grid::new(4, 4, 1.0, 1.0).unwrap();
        let d = ElasticityTensor::new(1.2, 0.8).unwrap();
        let a = assemble_elasticity(&grid, &d);
        assert_eq!(a.mul_vec(&grid.zero_vector()), grid.zero_vector());
        // uniform translation restricted to interior dofs: boundary pinning
        // makes the quadratic form strictly positive
        let mut u = grid.zero_vector();
        for n in 0..grid.n_nodes() {
            if !grid.is_boundary_node(n) {
                u[2 * n] = 1.0;
            }
        }
        assert!(a.quadratic_form(&u) > 0.0);
    }

    #[test]
    fn elasticity_matches_quadrature_oracle() {
        let grid = Grid::new(5, 5, 1.0, 1.0).unwrap();
        let d = ElasticityTensor::new(0.7, 1.4).unwrap();
        let a = assemble_elasticity(&grid, &d);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            // interior-supported field so Dirichlet elimination is invisible
            let mut u = grid.zero_vector();
            for n in 0..grid.n_nodes() {
                if !grid.is_boundary_node(n) {
                    u[2 * n] = rng.gen_range(-1.0..1.0);
                    u[2 * n + 1] = rng.gen_range(-1.0..1.0);
                }
            }
            let form = a.quadratic_form(&u);
            let oracle = elasticity_form_oracle(&grid, &d, &u);
            assert_relative_eq!(form, oracle, epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn laplacian_kernel_and_row_sums() {
        let grid = Grid::new(6, 6, 1.0, 1.0).unwrap();
        let k = assemble_laplacian_neumann(&grid);
        let ones = vec![1.0; grid.n_nodes()];
        let kv = k.mul_vec(&ones);
        for v in kv {
            assert!(v.abs() <= 1e-13);
        }
        for i in 0..grid.n_nodes() {
            assert!(k.row_sum(i).abs() <= 1e-13);
        }
    }

    #[test]
    fn laplacian_matches_quadrature_oracle() {
        let grid = Grid::new(5, 5, 1.0, 1.0).unwrap();
        let k = assemble_laplacian_neumann(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let f = random_vector(&mut rng, grid.n_nodes());
            let form = k.quadratic_form(&f);
            let grads = crate::grid::scalar_gradient_at_qp(&grid, &f);
            let w = grid.qp_weight();
            let oracle: f64 = grads.iter().map(|g| w * (g.0 * g.0 + g.1 * g.1)).sum();
            assert_relative_eq!(form, oracle, epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn mass_total_and_hat_mass() {
        let grid = Grid::new(8, 8, 2.0, 2.0).unwrap();
        let m = assemble_mass(&grid);
        assert_relative_eq!(m.total_sum(), grid.area(), epsilon = 1e-12);
        // row sum at an interior node integrates the hat function: h^2
        let interior = grid.node(3, 4);
        assert_relative_eq!(m.row_sum(interior), grid.h() * grid.h(), epsilon = 1e-13);
        // SPD on random fields
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let f = random_vector(&mut rng, grid.n_nodes());
            if f.iter().any(|&v| v != 0.0) {
                assert!(m.quadratic_form(&f) > 0.0);
            }
        }
    }

    #[test]
    fn strain_of_linear_fields() {
        let grid = Grid::new(4, 4, 1.0, 1.0).unwrap();
        // constant displacement: zero strain
        let mut u = grid.zero_vector();
        for n in 0..grid.n_nodes() {
            u[2 * n] = 0.7;
            u[2 * n + 1] = -0.3;
        }
        for e in strain(&grid, &u) {
            assert!(e.norm() <= 1e-13);
        }
        // u = (x, 0): eps = diag(1, 0, 0)
        let mut u = grid.zero_vector();
        for n in 0..grid.n_nodes() {
            let (x, _) = grid.node_coords(n);
            u[2 * n] = x;
        }
        for e in strain(&grid, &u) {
            assert!(e.sub(&SymTensor::diag(1.0, 0.0, 0.0)).norm() <= 1e-12);
        }
        // u = (y, x): only eps_xy = 1
        let mut u = grid.zero_vector();
        for n in 0..grid.n_nodes() {
            let (x, y) = grid.node_coords(n);
            u[2 * n] = y;
            u[2 * n + 1] = x;
        }
        for e in strain(&grid, &u) {
            assert!(e.sub(&SymTensor::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)).norm() <= 1e-12);
        }
    }

    #[test]
    fn divergence_load_cases() {
        let grid = Grid::new(4, 4, 1.0, 1.0).unwrap();
        // s = 0 -> zero load
        let zero = divergence_scalar_weighted_load(&grid, &grid.zero_qp_scalar());
        assert!(zero.iter().all(|&v| v == 0.0));
        // constant s on a uniform grid: interior entries cancel by symmetry
        let s = vec![2.5; grid.n_qp()];
        let load = divergence_scalar_weighted_load(&grid, &s);
        for n in 0..grid.n_nodes() {
            if !grid.is_boundary_node(n) {
                assert!(load[2 * n].abs() <= 1e-13);
                assert!(load[2 * n + 1].abs() <= 1e-13);
            }
        }
        // random s: agreement with the direct quadrature oracle through the
        // identity  load . v = int s div(v)
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let s: QpScalarField = (0..grid.n_qp()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let load = divergence_scalar_weighted_load(&grid, &s);
        for _ in 0..10 {
            let v = random_vector(&mut rng, 2 * grid.n_nodes());
            let dot: f64 = load.iter().zip(&v).map(|(a, b)| a * b).sum();
            let div = divergence_at_qp(&grid, &v);
            let w = grid.qp_weight();
            let oracle: f64 = div.iter().zip(&s).map(|(d, sv)| w * d * sv).sum();
            assert_relative_eq!(dot, oracle, epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn tensor_load_consistent_with_divergence_load() {
        // tau = s * Id must reproduce the divergence-weighted load
        let grid = Grid::new(4, 4, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let s: QpScalarField = (0..grid.n_qp()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let tau: TensorField = s.iter().map(|&v| SymTensor::identity().scale(v)).collect();
        let a = tensor_weighted_load(&grid, &tau);
        let b = divergence_scalar_weighted_load(&grid, &s);
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn boundary_load_integrates_constants() {
        let grid = Grid::new(4, 4, 1.0, 1.0).unwrap();
        let mut g = grid.zero_scalar();
        for n in grid.boundary_nodes() {
            g[n] = 3.0;
        }
        let load = boundary_load(&grid, &g);
        let total: f64 = load.iter().sum();
        assert_relative_eq!(total, 3.0 * grid.boundary_length(), epsilon = 1e-12);
    }

    #[test]
    fn elasticity_spd_ritz_positive() {
        // smallest Ritz value from 50 CG iterations on random vectors stays
        // positive after Dirichlet elimination
        let grid = Grid::new(6, 6, 1.0, 1.0).unwrap();
        let d = ElasticityTensor::new(1.0, 1.0).unwrap();
        let a = assemble_elasticity(&grid, &d);
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        for _ in 0..5 {
            let b = random_vector(&mut rng, 2 * grid.n_nodes());
            let (lo, hi) = crate::sparse::cg_ritz_bounds(&a, &b, 50);
            assert!(lo > 0.0, "smallest Ritz value {lo}");
            assert!(hi.is_finite());
            let x = solve_spd(&a, &b, 1e-8, 5000, false).unwrap();
            if x.iter().any(|&v| v != 0.0) {
                assert!(a.quadratic_form(&x) > 0.0);
            }
        }
    }
}
