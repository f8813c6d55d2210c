//! Structured quadrilateral grid on an axis-aligned rectangle with square
//! cells, bilinear (Q1) shape functions and 2x2 Gauss quadrature.
//!
//! Nodes are numbered row-major: node(i, j) = j*(nx+1) + i. Each cell holds
//! four quadrature points in a fixed order, so quadrature-point fields are
//! plain vectors of length 4*ncells.

use crate::error::SimError;
use crate::tensor::SymTensor;

/// Scalar field with one value per node.
pub type ScalarField = Vec<f64>;
/// Vector field with interleaved components [ux0, uy0, ux1, uy1, ...].
pub type VectorField = Vec<f64>;
/// Symmetric-tensor field with one value per quadrature point.
pub type TensorField = Vec<SymTensor>;
/// Scalar values at quadrature points.
pub type QpScalarField = Vec<f64>;

const GAUSS: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

/// Reference coordinates of the 2x2 Gauss points.
pub const QP_REF: [(f64, f64); 4] = [
    (-GAUSS, -GAUSS),
    (GAUSS, -GAUSS),
    (GAUSS, GAUSS),
    (-GAUSS, GAUSS),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    h: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, SimError> {
        if nx < 2 || ny < 2 {
            return Err(SimError::config(format!(
                "grid must have at least 2 cells per axis, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0) {
            return Err(SimError::config(format!(
                "domain extents must be positive, got {lx}x{ly}"
            )));
        }
        let hx = lx / nx as f64;
        let hy = ly / ny as f64;
        if (hx - hy).abs() > 1e-12 * hx.max(hy) {
            return Err(SimError::config(format!(
                "cells must be square: lx/nx = {hx} differs from ly/ny = {hy}"
            )));
        }
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            h: hx,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_qp(&self) -> usize {
        4 * self.n_cells()
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn node_coords(&self, n: usize) -> (f64, f64) {
        let i = n % (self.nx + 1);
        let j = n / (self.nx + 1);
        (i as f64 * self.h, j as f64 * self.h)
    }

    /// Corner nodes of cell (cx, cy) in counter-clockwise order matching
    /// the reference corners (-1,-1), (1,-1), (1,1), (-1,1).
    pub fn cell_nodes(&self, cx: usize, cy: usize) -> [usize; 4] {
        [
            self.node(cx, cy),
            self.node(cx + 1, cy),
            self.node(cx + 1, cy + 1),
            self.node(cx, cy + 1),
        ]
    }

    pub fn cell_index(&self, cx: usize, cy: usize) -> usize {
        cy * self.nx + cx
    }

    /// Physical coordinates of quadrature point q of cell (cx, cy).
    pub fn qp_coords(&self, cx: usize, cy: usize, q: usize) -> (f64, f64) {
        let (xi, eta) = QP_REF[q];
        (
            (cx as f64 + 0.5 * (1.0 + xi)) * self.h,
            (cy as f64 + 0.5 * (1.0 + eta)) * self.h,
        )
    }

    /// Quadrature weight in physical coordinates (same at all points).
    pub fn qp_weight(&self) -> f64 {
        0.25 * self.h * self.h
    }

    pub fn is_boundary_node(&self, n: usize) -> bool {
        let i = n % (self.nx + 1);
        let j = n / (self.nx + 1);
        i == 0 || i == self.nx || j == 0 || j == self.ny
    }

    /// All boundary nodes in index order.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes())
            .filter(|&n| self.is_boundary_node(n))
            .collect()
    }

    /// Boundary edges as node pairs, each of length h, traversing bottom,
    /// top, left and right sides.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for i in 0..self.nx {
            edges.push((self.node(i, 0), self.node(i + 1, 0)));
            edges.push((self.node(i, self.ny), self.node(i + 1, self.ny)));
        }
        for j in 0..self.ny {
            edges.push((self.node(0, j), self.node(0, j + 1)));
            edges.push((self.node(self.nx, j), self.node(self.nx, j + 1)));
        }
        edges
    }

    pub fn boundary_length(&self) -> f64 {
        2.0 * (self.lx + self.ly)
    }

    pub fn zero_scalar(&self) -> ScalarField {
        vec![0.0; self.n_nodes()]
    }

    pub fn zero_vector(&self) -> VectorField {
        vec![0.0; 2 * self.n_nodes()]
    }

    pub fn zero_tensor(&self) -> TensorField {
        vec![SymTensor::ZERO; self.n_qp()]
    }

    pub fn zero_qp_scalar(&self) -> QpScalarField {
        vec![0.0; self.n_qp()]
    }
}

/// Q1 shape function values at reference coordinates, corner order as in
/// [`Grid::cell_nodes`].
pub fn shape_values(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

/// Physical-space shape gradients (d/dx, d/dy) for a square cell of size h.
pub fn shape_gradients(xi: f64, eta: f64, h: f64) -> [(f64, f64); 4] {
    let s = 2.0 / h; // d(xi)/dx
    [
        (-0.25 * (1.0 - eta) * s, -0.25 * (1.0 - xi) * s),
        (0.25 * (1.0 - eta) * s, -0.25 * (1.0 + xi) * s),
        (0.25 * (1.0 + eta) * s, 0.25 * (1.0 + xi) * s),
        (-0.25 * (1.0 + eta) * s, 0.25 * (1.0 - xi) * s),
    ]
}

/// Interpolate a nodal scalar field to every quadrature point.
pub fn scalar_at_qp(grid: &Grid, field: &ScalarField) -> QpScalarField {
    assert_eq!(field.len(), grid.n_nodes());
    let mut out = vec![0.0; grid.n_qp()];
    for cy in 0..grid.ny() {
        for cx in 0..grid.nx() {
            let nodes = grid.cell_nodes(cx, cy);
            let base = 4 * grid.cell_index(cx, cy);
            for (q, &(xi, eta)) in QP_REF.iter().enumerate() {
                let sv = shape_values(xi, eta);
                let mut acc = 0.0;
                for a in 0..4 {
                    acc += sv[a] * field[nodes[a]];
                }
                out[base + q] = acc;
            }
        }
    }
    out
}

/// Gradient (d/dx, d/dy) of a nodal scalar field at every quadrature point.
pub fn scalar_gradient_at_qp(grid: &Grid, field: &ScalarField) -> Vec<(f64, f64)> {
    assert_eq!(field.len(), grid.n_nodes());
    let mut out = vec![(0.0, 0.0); grid.n_qp()];
    for cy in 0..grid.ny() {
        for cx in 0..grid.nx() {
            let nodes = grid.cell_nodes(cx, cy);
            let base = 4 * grid.cell_index(cx, cy);
            for (q, &(xi, eta)) in QP_REF.iter().enumerate() {
                let sg = shape_gradients(xi, eta, grid.h());
                let mut gx = 0.0;
                let mut gy = 0.0;
                for a in 0..4 {
                    gx += sg[a].0 * field[nodes[a]];
                    gy += sg[a].1 * field[nodes[a]];
                }
                out[base + q] = (gx, gy);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1, 4, 1.0, 1.0).is_err());
        assert!(Grid::new(4, 4, 1.0, 2.0).is_err());
        assert!(Grid::new(4, 4, -1.0, -1.0).is_err());
        assert!(Grid::new(4, 8, 1.0, 2.0).is_ok());
    }

    #[test]
    fn node_and_cell_indexing() {
        let g = Grid::new(3, 2, 1.5, 1.0).unwrap();
        assert_eq!(g.n_nodes(), 12);
        assert_eq!(g.n_cells(), 6);
        assert_eq!(g.node(3, 2), 11);
        assert_eq!(g.node_coords(11), (1.5, 1.0));
        assert_eq!(g.cell_nodes(0, 0), [0, 1, 5, 4]);
    }

    #[test]
    fn boundary_enumeration() {
        let g = Grid::new(2, 2, 1.0, 1.0).unwrap();
        let b = g.boundary_nodes();
        assert_eq!(b.len(), 8); // 9 nodes, 1 interior
        assert!(!b.contains(&4));
        assert_eq!(g.boundary_edges().len(), 8);
        assert_relative_eq!(g.boundary_length(), 4.0);
    }

    #[test]
    fn shape_functions_partition_of_unity() {
        for &(xi, eta) in QP_REF.iter() {
            let sv = shape_values(xi, eta);
            assert_relative_eq!(sv.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
            let sg = shape_gradients(xi, eta, 0.25);
            let gx: f64 = sg.iter().map(|g| g.0).sum();
            let gy: f64 = sg.iter().map(|g| g.1).sum();
            assert!(gx.abs() <= 1e-14 && gy.abs() <= 1e-14);
        }
    }

    #[test]
    fn interpolation_reproduces_linears() {
        let g = Grid::new(4, 4, 1.0, 1.0).unwrap();
        let field: ScalarField = (0..g.n_nodes())
            .map(|n| {
                let (x, y) = g.node_coords(n);
                2.0 * x - 3.0 * y + 0.5
            })
            .collect();
        let at_qp = scalar_at_qp(&g, &field);
        let grads = scalar_gradient_at_qp(&g, &field);
        for cy in 0..4 {
            for cx in 0..4 {
                for q in 0..4 {
                    let idx = 4 * g.cell_index(cx, cy) + q;
                    let (x, y) = g.qp_coords(cx, cy, q);
                    assert_relative_eq!(at_qp[idx], 2.0 * x - 3.0 * y + 0.5, epsilon = 1e-13);
                    assert_relative_eq!(grads[idx].0, 2.0, epsilon = 1e-12);
                    assert_relative_eq!(grads[idx].1, -3.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn quadrature_weight_sums_to_area() {
        let g = Grid::new(5, 5, 2.0, 2.0).unwrap();
        let total = g.qp_weight() * g.n_qp() as f64;
        assert_relative_eq!(total, g.area(), epsilon = 1e-12);
    }
}
