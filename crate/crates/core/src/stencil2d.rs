//! The fourth-order compact 9-point stencil in 2D: the nine left-hand
//! coefficients `C[r][l]` and the right-hand value F at one interior node,
//! plus the leading-truncation diagnostic.

use crate::coefficients::{CoefficientBundle, CoeffSlice};

/// The nine stencil coefficients (indexed `c[r+1][l+1]` for offsets r, l in
/// {-1,0,1}), the right-hand value F, and the mesh size they were built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil2D {
    pub c: [[f64; 3]; 3],
    pub rhs: f64,
    pub h: f64,
}

impl Stencil2D {
    pub fn at(&self, r: i32, l: i32) -> f64 {
        self.c[(r + 1) as usize][(l + 1) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.c.iter().flatten().sum()
    }
}

/// Per-node inputs: the normalized coefficients a, b, d and the source f
/// with partials up to order 2.
#[derive(Debug, Clone, Copy, Default)]
pub struct StencilInput2 {
    pub a: CoeffSlice,
    pub b: CoeffSlice,
    pub d: CoeffSlice,
    pub f: CoeffSlice,
}

impl StencilInput2 {
    pub fn from_bundle(bundle: &CoefficientBundle, idx: usize) -> Self {
        StencilInput2 {
            a: bundle.a.slice(idx, 2),
            b: bundle.b.slice(idx, 2),
            d: bundle.d.slice(idx, 2),
            f: bundle.f.slice(idx, 2),
        }
    }
}

/// Evaluate the nine coefficient polynomials in h and the right-hand value.
/// Callable with h = 0 to expose the compact-Laplacian limit.
pub fn stencil_at(input: &StencilInput2, h: f64) -> Stencil2D {
    let (a, b, d, f) = (&input.a, &input.b, &input.d, &input.f);
    let h2 = h * h;
    let h3 = h2 * h;
    let h4 = h2 * h2;

    let lap_a = a.xx + a.yy;
    let lap_b = b.xx + b.yy;
    let lap_d = d.xx + d.yy;
    let ab = a.v * b.v;
    let aa = a.v * a.v;
    let bb = b.v * b.v;
    // Repeated brackets shared between opposite neighbors.
    let edge_x_h2 = aa + ab + d.v + 2.0 * a.x + a.y + b.x;
    let edge_x_h3 = a.v * (a.x + d.v) + b.v * a.y + 2.0 * d.x + lap_a;
    let edge_y_h2 = bb + ab + a.y + b.x + 2.0 * b.y + d.v;
    let edge_y_h3 = a.v * b.x + b.v * (b.y + d.v) + 2.0 * d.y + lap_b;
    let corner_h2 = ab + a.y + b.x;
    let bdy12 = b.v * d.y / 12.0;

    let c_m1_m1 = 1.0 / 6.0 - (a.v + b.v) / 12.0 * h;
    let c_m1_0 = 2.0 / 3.0 - a.v / 3.0 * h + edge_x_h2 / 12.0 * h2 - edge_x_h3 / 24.0 * h3;
    let c_m1_p1 = 1.0 / 6.0 - (a.v - b.v) / 12.0 * h - corner_h2 / 12.0 * h2;
    let c_0_m1 = 2.0 / 3.0 - b.v / 3.0 * h + edge_y_h2 / 12.0 * h2 - edge_y_h3 / 24.0 * h3
        + bdy12 * h4;
    let c_0_0 = -10.0 / 3.0
        - (aa + ab + bb - 4.0 * d.v + 2.0 * a.x + a.y + b.x + 2.0 * b.y) / 6.0 * h2
        + (a.v * d.x + lap_d) / 12.0 * h4;
    let c_0_p1 = 2.0 / 3.0 + b.v / 3.0 * h + edge_y_h2 / 12.0 * h2 + edge_y_h3 / 24.0 * h3;
    let c_p1_m1 = 1.0 / 6.0 + (a.v - b.v) / 12.0 * h - corner_h2 / 12.0 * h2 - bdy12 * h4;
    let c_p1_0 = 2.0 / 3.0 + a.v / 3.0 * h + edge_x_h2 / 12.0 * h2 + edge_x_h3 / 24.0 * h3
        + bdy12 * h4;
    let c_p1_p1 = 1.0 / 6.0 + (a.v + b.v) / 12.0 * h;

    let rhs = f.v + (a.v * f.x + b.v * f.y + f.xx + f.yy) / 12.0 * h2;

    Stencil2D {
        c: [
            [c_m1_m1, c_m1_0, c_m1_p1],
            [c_0_m1, c_0_0, c_0_p1],
            [c_p1_m1, c_p1_0, c_p1_p1],
        ],
        rhs,
        h,
    }
}

/// Partial derivatives of the manufactured solution at one node, indexed
/// `u[m][n]` for d^(m+n) u / dx^m dy^n with m+n <= 5.
pub type UPartials2 = [[f64; 6]; 6];

/// The signed per-node value of the leading truncation term (the bracketed
/// sum times h^4); the caller takes whatever norm over the domain it needs.
pub fn leading_truncation_2d(u: &UPartials2, input: &StencilInput2, h: f64) -> f64 {
    let (a, b, d) = (&input.a, &input.b, &input.d);
    let lap_a = a.xx + a.yy;
    let lap_b = b.xx + b.yy;
    let ab = a.v * b.v;
    let mixed = a.y + b.x + ab;

    let bracket = (lap_b + a.v * b.x + (b.y + d.v) * b.v + 2.0 * d.y) / 72.0 * u[0][3]
        + (2.0 * b.y + b.v * b.v + d.v) / 144.0 * u[0][4]
        + b.v / 120.0 * u[0][5]
        + b.v * d.y / 12.0 * u[1][1]
        + mixed / 36.0 * u[1][3]
        + a.v / 72.0 * u[1][4]
        - mixed / 24.0 * u[2][2]
        + b.v / 36.0 * u[2][3]
        + (lap_a + (a.x + d.v) * a.v + a.y * b.v + 2.0 * d.x) / 72.0 * u[3][0]
        + mixed / 36.0 * u[3][1]
        + a.v / 36.0 * u[3][2]
        + (a.v * a.v + 2.0 * a.x + d.v) / 144.0 * u[4][0]
        + b.v / 72.0 * u[4][1]
        + a.v / 120.0 * u[5][0];
    bracket * h.powi(4)
}
