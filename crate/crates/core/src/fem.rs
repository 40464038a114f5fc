//! Uniform meshes on (0, L) and (0, L)², continuous piecewise-linear and
//! bilinear element spaces with homogeneous Dirichlet conditions, and the
//! integrals the time stepper needs.
//!
//! Degrees of freedom are the interior nodes only. In 2D the interior node
//! `(i, j)`, `1 ≤ i, j ≤ n − 1`, has index `(i − 1) + (j − 1)(n − 1)`, which
//! gives assembled matrices of half-bandwidth `n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_banded_owned, BandedSymMatrix};
use crate::quadrature::GaussRule;

/// A point in the domain; the second coordinate is ignored in 1D.
pub type Point = [f64; 2];

/// Gauss points per element (1D) used by default for loads and norms.
pub const DEFAULT_QUAD_ORDER_1D: usize = 5;
/// Gauss points per axis (2D) used by default for loads and norms.
pub const DEFAULT_QUAD_ORDER_2D: usize = 4;

/// Uniform mesh of `n_cells` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub dim: usize,
    pub length: f64,
    pub n_cells: usize,
}

impl Mesh {
    pub fn new(dim: usize, length: f64, n_cells: usize) -> Result<Self> {
        let m = Self {
            dim,
            length,
            n_cells,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn interval(length: f64, n_cells: usize) -> Result<Self> {
        Self::new(1, length, n_cells)
    }

    pub fn square(length: f64, n_cells: usize) -> Result<Self> {
        Self::new(2, length, n_cells)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::Parameter(format!(
                "mesh dimension must be 1 or 2, got {}",
                self.dim
            )));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Parameter(format!(
                "domain length must be positive, got {}",
                self.length
            )));
        }
        if self.n_cells < 2 {
            return Err(Error::Parameter(format!(
                "need at least 2 cells per axis for an interior node, got {}",
                self.n_cells
            )));
        }
        Ok(())
    }

    /// Cell size L / n.
    pub fn h(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    /// Cell diameter: h in 1D, √2·h in 2D.
    pub fn h_diameter(&self) -> f64 {
        (self.dim as f64).sqrt() * self.h()
    }

    /// Coordinate of grid line `i`.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn n_dofs(&self) -> usize {
        (self.n_cells - 1).pow(self.dim as u32)
    }

    pub fn n_elements(&self) -> usize {
        self.n_cells.pow(self.dim as u32)
    }

    /// Half-bandwidth of the assembled matrices.
    pub fn bandwidth(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.n_cells
        }
    }

    /// Coordinates of interior degree of freedom `k`.
    pub fn dof_point(&self, k: usize) -> Point {
        let m = self.n_cells - 1;
        if self.dim == 1 {
            [self.node(k + 1), 0.0]
        } else {
            [self.node(k % m + 1), self.node(k / m + 1)]
        }
    }

    pub fn dof_points(&self) -> Vec<Point> {
        (0..self.n_dofs()).map(|k| self.dof_point(k)).collect()
    }

    fn dof_of(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.n_cells;
        let inside = |a: usize| a >= 1 && a < n;
        if self.dim == 1 {
            inside(i).then(|| i - 1)
        } else {
            (inside(i) && inside(j)).then(|| (i - 1) + (j - 1) * (n - 1))
        }
    }

    /// Local-to-global map and lower-left corner of element `e`.
    ///
    /// 2D local nodes run counterclockwise from the lower-left corner.
    fn element(&self, e: usize) -> Element {
        if self.dim == 1 {
            Element {
                dofs: [self.dof_of(e, 0), self.dof_of(e + 1, 0), None, None],
                origin: [self.node(e), 0.0],
            }
        } else {
            let (ex, ey) = (e % self.n_cells, e / self.n_cells);
            Element {
                dofs: [
                    self.dof_of(ex, ey),
                    self.dof_of(ex + 1, ey),
                    self.dof_of(ex + 1, ey + 1),
                    self.dof_of(ex, ey + 1),
                ],
                origin: [self.node(ex), self.node(ey)],
            }
        }
    }

    fn nodes_per_element(&self) -> usize {
        if self.dim == 1 {
            2
        } else {
            4
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Element {
    dofs: [Option<usize>; 4],
    origin: Point,
}

/// Quadrature points on the reference cell [0,1]^d with shape values and
/// reference gradients (divide by h for physical gradients).
struct RefRule {
    points: Vec<Point>,
    weights: Vec<f64>,
    shape: Vec<[f64; 4]>,
    grad: Vec<[[f64; 2]; 4]>,
}

impl RefRule {
    fn new(dim: usize, order: usize) -> Self {
        let g = GaussRule::new(order);
        let line: Vec<(f64, f64)> = g.mapped(0.0, 1.0).collect();
        let mut r = RefRule {
            points: Vec::new(),
            weights: Vec::new(),
            shape: Vec::new(),
            grad: Vec::new(),
        };
        if dim == 1 {
            for &(x, w) in &line {
                r.points.push([x, 0.0]);
                r.weights.push(w);
                r.shape.push([1.0 - x, x, 0.0, 0.0]);
                r.grad.push([[-1.0, 0.0], [1.0, 0.0], [0.0; 2], [0.0; 2]]);
            }
        } else {
            for &(y, wy) in &line {
                for &(x, wx) in &line {
                    r.points.push([x, y]);
                    r.weights.push(wx * wy);
                    r.shape.push([(1.0 - x) * (1.0 - y), x * (1.0 - y), x * y, (1.0 - x) * y]);
                    r.grad.push([
                        [-(1.0 - y), -(1.0 - x)],
                        [1.0 - y, -x],
                        [y, x],
                        [-y, 1.0 - x],
                    ]);
                }
            }
        }
        r
    }
}

/// Element mass and stiffness matrices for cell size h, exact.
fn element_matrices(dim: usize, h: f64) -> ([[f64; 4]; 4], [[f64; 4]; 4]) {
    if dim == 1 {
        let m = h / 6.0;
        let a = 1.0 / h;
        (
            [
                [2.0 * m, m, 0.0, 0.0],
                [m, 2.0 * m, 0.0, 0.0],
                [0.0; 4],
                [0.0; 4],
            ],
            [[a, -a, 0.0, 0.0], [-a, a, 0.0, 0.0], [0.0; 4], [0.0; 4]],
        )
    } else {
        let pattern_m = [
            [4.0, 2.0, 1.0, 2.0],
            [2.0, 4.0, 2.0, 1.0],
            [1.0, 2.0, 4.0, 2.0],
            [2.0, 1.0, 2.0, 4.0],
        ];
        let pattern_a = [
            [4.0, -1.0, -2.0, -1.0],
            [-1.0, 4.0, -1.0, -2.0],
            [-2.0, -1.0, 4.0, -1.0],
            [-1.0, -2.0, -1.0, 4.0],
        ];
        let mut me = [[0.0; 4]; 4];
        let mut ae = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                me[i][j] = pattern_m[i][j] * h * h / 36.0;
                ae[i][j] = pattern_a[i][j] / 6.0;
            }
        }
        (me, ae)
    }
}

/// Element space on a mesh with its assembled mass and stiffness matrices.
#[derive(Debug, Clone)]
pub struct FemSpace {
    mesh: Mesh,
    mass: BandedSymMatrix,
    stiffness: BandedSymMatrix,
}

impl FemSpace {
    /// Builds the space and assembles M and A.
    pub fn new(mesh: Mesh) -> Result<Self> {
        mesh.validate()?;
        let (mass, stiffness) = assemble(&mesh);
        Ok(Self {
            mesh,
            mass,
            stiffness,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_dofs()
    }

    pub fn mass(&self) -> &BandedSymMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &BandedSymMatrix {
        &self.stiffness
    }

    pub fn default_quad_order(&self) -> usize {
        if self.mesh.dim == 1 {
            DEFAULT_QUAD_ORDER_1D
        } else {
            DEFAULT_QUAD_ORDER_2D
        }
    }

    /// Visits every quadrature point: `(element, physical point, weight, rule index)`.
    fn for_each_qp(&self, quad_order: usize, mut visit: impl FnMut(&Element, Point, f64, &RefRule, usize)) {
        let rule = RefRule::new(self.mesh.dim, quad_order);
        let h = self.mesh.h();
        let jac = h.powi(self.mesh.dim as i32);
        for e in 0..self.mesh.n_elements() {
            let el = self.mesh.element(e);
            for q in 0..rule.points.len() {
                let rp = rule.points[q];
                let p = [el.origin[0] + h * rp[0], el.origin[1] + h * rp[1]];
                visit(&el, p, rule.weights[q] * jac, &rule, q);
            }
        }
    }

    /// b_i ≈ ∫ g φ_i with `quad_order` Gauss points per element axis.
    pub fn load_vector(&self, g: impl Fn(Point) -> f64, quad_order: usize) -> Vec<f64> {
        let mut b = vec![0.0; self.n_dofs()];
        let nloc = self.mesh.nodes_per_element();
        self.for_each_qp(quad_order, |el, p, w, rule, q| {
            let gv = g(p) * w;
            for a in 0..nloc {
                if let Some(i) = el.dofs[a] {
                    b[i] += gv * rule.shape[q][a];
                }
            }
        });
        b
    }

    /// g_i = ∫ ∇u · ∇φ_i by quadrature.
    pub fn gradient_load(&self, grad_u: impl Fn(Point) -> [f64; 2], quad_order: usize) -> Vec<f64> {
        let mut b = vec![0.0; self.n_dofs()];
        let nloc = self.mesh.nodes_per_element();
        let inv_h = 1.0 / self.mesh.h();
        self.for_each_qp(quad_order, |el, p, w, rule, q| {
            let gu = grad_u(p);
            for a in 0..nloc {
                if let Some(i) = el.dofs[a] {
                    let gp = rule.grad[q][a];
                    b[i] += w * inv_h * (gu[0] * gp[0] + gu[1] * gp[1]);
                }
            }
        });
        b
    }

    /// Ritz projection: solves A c = (∇u, ∇φ_i).
    pub fn ritz_project(&self, grad_u: impl Fn(Point) -> [f64; 2], quad_order: usize) -> Result<Vec<f64>> {
        let g = self.gradient_load(grad_u, quad_order);
        let chol = cholesky_banded_owned(self.stiffness.clone())?;
        Ok(chol.solve(&g))
    }

    /// Nodal interpolant at the interior nodes.
    pub fn interpolate(&self, u: impl Fn(Point) -> f64) -> Vec<f64> {
        (0..self.n_dofs()).map(|k| u(self.mesh.dof_point(k))).collect()
    }

    /// √(Σ_e ∫ (u_h − u)²) by Gauss quadrature of the given order.
    pub fn l2_norm_error(
        &self,
        coeffs: &[f64],
        u_exact: impl Fn(Point) -> f64,
        quad_order: usize,
    ) -> Result<f64> {
        if coeffs.len() != self.n_dofs() {
            return Err(Error::Usage(format!(
                "{} coefficients for a space with {} unknowns",
                coeffs.len(),
                self.n_dofs()
            )));
        }
        let nloc = self.mesh.nodes_per_element();
        let mut acc = 0.0;
        self.for_each_qp(quad_order, |el, p, w, rule, q| {
            let uh: f64 = (0..nloc)
                .filter_map(|a| el.dofs[a].map(|i| coeffs[i] * rule.shape[q][a]))
                .sum();
            let d = uh - u_exact(p);
            acc += w * d * d;
        });
        Ok(acc.sqrt())
    }

    /// L² norm of a discrete function, √(cᵀ M c).
    pub fn l2_norm(&self, coeffs: &[f64]) -> f64 {
        let mc = self.mass.matvec(coeffs);
        coeffs.iter().zip(&mc).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }

    /// All grid nodes (boundary included) with the discrete function's values.
    pub fn nodal_values(&self, coeffs: &[f64]) -> Vec<(Point, f64)> {
        let n = self.mesh.n_cells;
        let mut out = Vec::new();
        if self.mesh.dim == 1 {
            for i in 0..=n {
                let v = self.mesh.dof_of(i, 0).map_or(0.0, |k| coeffs[k]);
                out.push(([self.mesh.node(i), 0.0], v));
            }
        } else {
            for j in 0..=n {
                for i in 0..=n {
                    let v = self.mesh.dof_of(i, j).map_or(0.0, |k| coeffs[k]);
                    out.push(([self.mesh.node(i), self.mesh.node(j)], v));
                }
            }
        }
        out
    }
}

/// Assembles the mass and stiffness matrices over the interior nodes.
pub fn assemble(mesh: &Mesh) -> (BandedSymMatrix, BandedSymMatrix) {
    let nd = mesh.n_dofs();
    let bw = mesh.bandwidth();
    let mut m = BandedSymMatrix::zeros(nd, bw);
    let mut a = BandedSymMatrix::zeros(nd, bw);
    let (me, ae) = element_matrices(mesh.dim, mesh.h());
    let nloc = mesh.nodes_per_element();
    for e in 0..mesh.n_elements() {
        let el = mesh.element(e);
        for p in 0..nloc {
            let Some(i) = el.dofs[p] else { continue };
            for q in 0..nloc {
                let Some(j) = el.dofs[q] else { continue };
                // each unordered pair is visited twice; keep the lower triangle only
                if j <= i {
                    m.add(i, j, me[p][q]);
                    a.add(i, j, ae[p][q]);
                }
            }
        }
    }
    (m, a)
}
