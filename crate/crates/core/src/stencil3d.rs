//! The fourth-order compact 19-point stencil in 3D: 27 coefficients
//! `C[r][l][s]` of which the 8 cube corners vanish identically, plus the
//! right-hand value F.

use crate::coefficients::{CoefficientBundle, CoeffSlice};

/// The shared helper combinations phi_1..phi_21 evaluated at one node.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhiSet {
    pub p: [f64; 22],
}

impl PhiSet {
    pub fn get(&self, k: usize) -> f64 {
        self.p[k]
    }
}

/// Per-node inputs: normalized coefficients a, b, c, d and source f with
/// partials up to order 2.
#[derive(Debug, Clone, Copy, Default)]
pub struct StencilInput3 {
    pub a: CoeffSlice,
    pub b: CoeffSlice,
    pub c: CoeffSlice,
    pub d: CoeffSlice,
    pub f: CoeffSlice,
}

impl StencilInput3 {
    pub fn from_bundle(bundle: &CoefficientBundle, idx: usize) -> Self {
        StencilInput3 {
            a: bundle.a.slice(idx, 3),
            b: bundle.b.slice(idx, 3),
            c: bundle.c.as_ref().expect("3D bundle").slice(idx, 3),
            d: bundle.d.slice(idx, 3),
            f: bundle.f.slice(idx, 3),
        }
    }
}

/// Compute phi_1..phi_21 from the coefficient slices.
pub fn phi(input: &StencilInput3) -> PhiSet {
    let (a, b, c, d) = (&input.a, &input.b, &input.c, &input.d);
    let mut p = [0.0; 22];
    p[1] = a.v + b.v;
    p[2] = a.v + c.v;
    p[3] = b.v + c.v;
    p[4] = a.v - b.v;
    p[5] = a.v - c.v;
    p[6] = b.v - c.v;
    p[7] = a.v + b.v + c.v;
    p[8] = a.v + b.v - c.v;
    p[9] = a.x + a.y + a.z;
    p[10] = b.x + b.y + b.z;
    p[11] = c.x + c.y + c.z;
    p[12] = a.x + b.y + c.z;
    p[13] = a.x - b.x - c.x;
    p[14] = d.x + d.y + d.z;
    p[15] = a.v * d.x + b.v * d.y + c.v * d.z;
    p[16] = b.xx + b.yy;
    p[17] = d.yy + d.zz;
    p[18] = (a.xx + a.yy + a.zz) + (c.xx + c.yy + c.zz);
    p[19] = a.v * b.v + a.y + b.x;
    p[20] = a.v * c.v + a.z + c.x;
    p[21] = b.v * c.v + b.z + c.y;
    PhiSet { p }
}

/// The 27 stencil coefficients (indexed `c[r+1][l+1][s+1]`), the right-hand
/// value F, and the mesh size. Callable with h = 0 for the limit stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil3D {
    pub c: [[[f64; 3]; 3]; 3],
    pub rhs: f64,
    pub h: f64,
}

impl Stencil3D {
    pub fn at(&self, r: i32, l: i32, s: i32) -> f64 {
        self.c[(r + 1) as usize][(l + 1) as usize][(s + 1) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.c.iter().flatten().flatten().sum()
    }
}

pub fn stencil_at(input: &StencilInput3, h: f64) -> Stencil3D {
    let (a, b, c, d, f) = (&input.a, &input.b, &input.c, &input.d, &input.f);
    let ph = phi(input);
    let p = |k: usize| ph.p[k];
    let h2 = h * h;
    let h3 = h2 * h;
    let h4 = h2 * h2;

    let lap_a = a.xx + a.yy + a.zz;
    let lap_d = d.xx + d.yy + d.zz;
    // Derivatives of the phi sums, expanded through their definitions.
    let phi7x = a.x + b.x + c.x;
    let phi7y = a.y + b.y + c.y;
    let phi7z = a.z + b.z + c.z;
    let phi4x = a.x - b.x;
    let phi2z = a.z + c.z;
    let phi45x = 2.0 * a.x - b.x - c.x; // [phi4 + phi5]_x

    let sixth = 1.0 / 6.0;
    let third = 1.0 / 3.0;

    let mut out = [[[0.0f64; 3]; 3]; 3];
    let mut set = |r: i32, l: i32, s: i32, v: f64| {
        out[(r + 1) as usize][(l + 1) as usize][(s + 1) as usize] = v;
    };

    // r = -1 plane (corners stay zero)
    set(
        -1,
        -1,
        0,
        sixth - p(1) / 12.0 * h - a.v * a.x / 24.0 * h3 - (a.v * d.x + c.v * d.z) / 12.0 * h4,
    );
    set(-1, 0, -1, sixth - p(2) / 12.0 * h);
    set(
        -1,
        0,
        0,
        third - a.v / 6.0 * h + (a.v * p(7) + d.v + phi7x + p(9)) / 12.0 * h2
            - (d.v * p(1) + b.v * phi7y) / 12.0 * h3
            + c.v * d.z / 12.0 * h4,
    );
    set(
        -1,
        0,
        1,
        sixth - p(5) / 12.0 * h - p(20) / 12.0 * h2
            + (a.v * d.v + b.v * (c.y + d.v + phi7y) - a.z * c.v - 2.0 * d.x - lap_a) / 24.0 * h3,
    );
    set(
        -1,
        1,
        0,
        sixth - p(4) / 12.0 * h - p(19) / 12.0 * h2 + b.v * (b.y + d.v) / 24.0 * h3,
    );

    // r = 0 plane
    set(0, -1, -1, sixth - p(3) / 12.0 * h);
    set(
        0,
        -1,
        0,
        third - b.v / 6.0 * h + (b.v * p(7) + d.v + phi7y + p(10)) / 12.0 * h2
            - (2.0 * p(14) + p(16) + p(18)) / 12.0 * h3
            + (a.v * d.x + p(15)) / 12.0 * h4,
    );
    set(
        0,
        -1,
        1,
        sixth - p(6) / 12.0 * h - p(21) / 12.0 * h2
            + (a.v * (a.x + phi4x) - c.v * b.z - 2.0 * d.y - b.zz
                + 4.0 * p(14)
                + p(16)
                + 2.0 * p(18))
                / 24.0
                * h3,
    );
    set(
        0,
        0,
        -1,
        third - c.v / 6.0 * h + (c.v * p(7) + d.v + phi7z + p(11)) / 12.0 * h2
            - b.v * d.y / 12.0 * h4,
    );
    set(
        0,
        0,
        0,
        -4.0 - (a.v * p(7) + b.v * p(3) + c.v * c.v - 3.0 * d.v + p(9) + p(10) + p(11) + p(12))
            / 6.0
            * h2
            + (a.v * p(13) + b.v * phi7y - c.v * phi7z + d.v * p(8) - b.zz
                + 2.0 * p(14)
                + p(16)
                + p(18))
                / 12.0
                * h3,
    );
    set(
        0,
        0,
        1,
        third + c.v / 6.0 * h + (c.v * p(7) + d.v + phi7z + p(11)) / 12.0 * h2
            + (c.v * phi7z - a.v * phi45x - b.v * phi7y - d.v * p(8) + b.zz
                - 2.0 * p(14)
                - p(16)
                - p(18))
                / 12.0
                * h3
            + d.xx / 12.0 * h4,
    );
    set(
        0,
        1,
        -1,
        sixth + p(6) / 12.0 * h - p(21) / 12.0 * h2
            - (c.v * (phi2z + d.v) + a.v * c.x + 2.0 * (d.x + d.z) - b.zz + p(18)) / 24.0 * h3
            + (a.v * d.x + b.v * d.y + lap_d) / 12.0 * h4,
    );
    set(
        0,
        1,
        0,
        third + b.v / 6.0 * h + (b.v * p(7) + d.v + p(10) + phi7y) / 12.0 * h2
            + (c.v * (phi7z + d.v) - a.v * p(13)) / 12.0 * h3
            - d.xx / 12.0 * h4,
    );
    set(
        0,
        1,
        1,
        sixth + p(3) / 12.0 * h
            - (c.v * (phi7z + d.v) - a.v * (a.x + p(13)) - 2.0 * p(14) - p(16) - p(18)) / 24.0
                * h3,
    );

    // r = 1 plane (corners stay zero)
    set(
        1,
        -1,
        0,
        sixth + p(4) / 12.0 * h - p(19) / 12.0 * h2
            - (a.x * a.v + b.v * (b.y + d.v)) / 24.0 * h3
            + p(17) / 12.0 * h4,
    );
    set(
        1,
        0,
        -1,
        sixth + p(5) / 12.0 * h - p(20) / 12.0 * h2
            + (a.z * c.v - b.v * c.y + 2.0 * d.x - b.zz + lap_a) / 24.0 * h3
            - (a.v * d.x + p(17)) / 12.0 * h4,
    );
    set(
        1,
        0,
        0,
        third + a.v / 6.0 * h + (a.v * p(7) + d.v + phi7x + p(9)) / 12.0 * h2
            + (a.v * a.x + b.zz) / 12.0 * h3,
    );
    set(
        1,
        0,
        1,
        sixth + p(2) / 12.0 * h + (d.v * p(1) + b.v * phi7y - b.zz) / 24.0 * h3,
    );
    set(1, 1, 0, sixth + p(1) / 12.0 * h);

    let rhs = f.v + (a.v * f.x + b.v * f.y + c.v * f.z + f.xx + f.yy + f.zz) / 12.0 * h2;

    Stencil3D { c: out, rhs, h }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::three_d::{input_with, A, AX, B, C, D, DX};

    #[test]
    fn coefficient_extraction_against_printed_monomials() {
        let mismatches = crate::verify::check_3d_monomials();
        assert!(mismatches.is_empty(), "{mismatches:?}");
    }

    #[test]
    fn corners_are_identically_zero() {
        let mut vals = Vec::new();
        for (coeff, part) in [(0, 0), (1, 2), (2, 9), (3, 1), (0, 4), (1, 3)] {
            vals.push(((coeff, part), 1.7));
        }
        let s = stencil_at(&input_with(&vals), 0.37);
        for r in [-1, 1] {
            for l in [-1, 1] {
                for ss in [-1, 1] {
                    assert_eq!(s.at(r, l, ss), 0.0);
                }
            }
        }
    }

    #[test]
    fn laplacian_limit() {
        // a=b=c=d=0: center -4, faces 1/3, edges 1/6, corners 0.
        let s = stencil_at(&StencilInput3::default(), 0.25);
        assert_eq!(s.at(0, 0, 0), -4.0);
        let mut face_sum = 0;
        let mut edge_sum = 0;
        for r in -1i32..=1 {
            for l in -1i32..=1 {
                for t in -1i32..=1 {
                    match r.abs() + l.abs() + t.abs() {
                        1 => {
                            assert_eq!(s.at(r, l, t), 1.0 / 3.0);
                            face_sum += 1;
                        }
                        2 => {
                            assert_eq!(s.at(r, l, t), 1.0 / 6.0);
                            edge_sum += 1;
                        }
                        _ => {}
                    }
                }
            }
        }
        assert_eq!((face_sum, edge_sum), (6, 12));
        // h = 0 with arbitrary inputs: same limit.
        let input = input_with(&[(A, 2.0), (B, -1.0), (C, 0.5), (D, 3.0), (DX, 1.0)]);
        let s = stencil_at(&input, 0.0);
        assert_eq!(s.at(0, 0, 0), -4.0);
        assert_eq!(s.at(1, 0, 0), 1.0 / 3.0);
        assert_eq!(s.at(0, -1, 1), 1.0 / 6.0);
    }

    #[test]
    fn phi_values() {
        // a=b=c=0 with all partials zero: every phi = 0.
        let p0 = phi(&StencilInput3::default());
        assert!(p0.p.iter().all(|&v| v == 0.0));
        // a=1, b=2, c=3 constants.
        let p = phi(&input_with(&[(A, 1.0), (B, 2.0), (C, 3.0)]));
        assert_eq!(p.get(7), 6.0);
        assert_eq!(p.get(8), 0.0);
        assert_eq!(p.get(4), -1.0);
        assert_eq!(p.get(19), 2.0);
        // a with a_x = 1, b = c = 0.
        let p = phi(&input_with(&[(AX, 1.0)]));
        assert_eq!(p.get(9), 1.0);
        assert_eq!(p.get(12), 1.0);
        assert_eq!(p.get(13), 1.0);
        assert_eq!(p.get(18), 0.0);
    }

    #[test]
    fn printed_examples() {
        // a=1, b=2, c=3 const, d=0, h=0.1:
        // C[1][1][0] = 1/6 + phi1 h/12 = 1/6 + 0.3/12
        let input = input_with(&[(A, 1.0), (B, 2.0), (C, 3.0)]);
        let s = stencil_at(&input, 0.1);
        assert!((s.at(1, 1, 0) - (1.0 / 6.0 + 0.3 / 12.0)).abs() < 1e-15);
        // C[-1][0][-1] = 1/6 - phi2 h/12 = 1/6 - 0.4/12
        assert!((s.at(-1, 0, -1) - (1.0 / 6.0 - 0.4 / 12.0)).abs() < 1e-15);
        // F = f + h^2 lap f / 12 for a=b=c=0.
        let mut input = StencilInput3::default();
        input.f.v = 3.0;
        input.f.xx = 1.0;
        input.f.yy = 2.0;
        input.f.zz = 4.0;
        let s = stencil_at(&input, 0.1);
        assert!((s.rhs - (3.0 + 0.01 * 7.0 / 12.0)).abs() < 1e-15);
    }

    #[test]
    fn row_sum_law() {
        let mut rng = 987654321u64;
        let mut next = move || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 33) as f64 / (1u64 << 31) as f64) * 2.0 - 1.0
        };
        for _ in 0..200 {
            let mut input = StencilInput3::default();
            for slice in [&mut input.a, &mut input.b, &mut input.c, &mut input.d] {
                *slice = crate::coefficients::CoeffSlice {
                    v: next(),
                    x: next(),
                    y: next(),
                    z: next(),
                    xx: next(),
                    xy: next(),
                    xz: next(),
                    yy: next(),
                    yz: next(),
                    zz: next(),
                };
            }
            for h in [1.0 / 64.0, 1.0 / 128.0] {
                let s = stencil_at(&input, h);
                let h4_term = (input.a.v * input.d.x
                    + input.b.v * input.d.y
                    + input.c.v * input.d.z
                    + input.d.xx
                    + input.d.yy
                    + input.d.zz)
                    / 12.0
                    * h.powi(4);
                let expect = input.d.v * h * h + h4_term;
                assert!((s.sum() - expect).abs() <= 1e-13, "{} vs {}", s.sum(), expect);
                assert!((s.sum() - input.d.v * h * h).abs() <= 2.0 * h.powi(3));
            }
            // lambda = 0: d and its partials vanish, sum exactly 0.
            input.d = Default::default();
            let s = stencil_at(&input, 1.0 / 64.0);
            assert!(s.sum().abs() <= 1e-14);
        }
    }

    #[test]
    fn fourth_order_interior_residual_slope() {
        // u = cos(x+y-z) with the nonlinear catalog's coefficient shapes
        // frozen at the exact solution; R(h) must shrink at fourth order
        // between h = 1/8 and h = 1/16 (domain (-1,1), n1 = 16, 32).
        let residual_max = |n1: usize| -> f64 {
            let problem = crate::problems::example(7);
            let grid = crate::grid::make_grid(3, -1.0, 1.0, n1).unwrap();
            let exact =
                crate::grid::Field::from_fn(&grid, |p| problem.exact_value(p, 0.0).unwrap());
            let bundle =
                crate::coefficients::bundle_steady(&problem, &grid, Some(&exact)).unwrap();
            let h = grid.h;
            let mut worst = 0.0f64;
            for node in grid.interior_nodes() {
                let idx = grid.node_offset(node);
                let input = StencilInput3::from_bundle(&bundle, idx);
                let s = stencil_at(&input, h);
                let mut acc = 0.0;
                for r in -1i64..=1 {
                    for l in -1i64..=1 {
                        for t in -1i64..=1 {
                            let x = grid.coord((node.i as i64 + r) as usize);
                            let y = grid.coord((node.j as i64 + l) as usize);
                            let z = grid.coord((node.k as i64 + t) as usize);
                            acc += s.at(r as i32, l as i32, t as i32) * (x + y - z).cos();
                        }
                    }
                }
                worst = worst.max((acc / (h * h) - s.rhs).abs());
            }
            worst
        };
        let r1 = residual_max(16);
        let r2 = residual_max(32);
        let slope = (r1 / r2).log2();
        assert!((3.5..=4.5).contains(&slope), "slope {slope}");
    }
}
