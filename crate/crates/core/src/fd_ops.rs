//! One-dimensional finite-difference operators (first to third derivatives,
//! accuracy tiers 1-5, centered and one-sided) applied along grid lines,
//! plus mixed-partial composition.
//!
//! Every operator is stored as exact rational weights together with the
//! offsets of its footprint. Near a boundary the applicable variant is chosen
//! by footprint feasibility: centered first, then the least-lopsided interior
//! variant, then fully one-sided, breaking left/right ties toward the side
//! with more room.

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// One concrete stencil: `sum(w_k * s(i + off_k)) / h^deriv`.
#[derive(Debug, Clone, Copy)]
pub struct FdVariant {
    pub offsets: &'static [i8],
    /// Exact rational weights (numerator, denominator), same length as offsets.
    pub weights: &'static [(i64, i64)],
    pub accuracy: u8,
    pub centered: bool,
}

/// A family of variants implementing one derivative at one accuracy tier.
/// `tiers` are ordered by selection priority; non-centered variants also
/// stand for their mirror image.
#[derive(Debug, Clone, Copy)]
pub struct FdOperator {
    pub deriv_order: u8,
    pub tiers: &'static [FdVariant],
}

macro_rules! variant {
    ($acc:expr, $centered:expr, [$($off:expr),*], [$(($n:expr, $d:expr)),*]) => {
        FdVariant {
            offsets: &[$($off),*],
            weights: &[$(($n, $d)),*],
            accuracy: $acc,
            centered: $centered,
        }
    };
}

pub static D1_ORDER2: FdOperator = FdOperator {
    deriv_order: 1,
    tiers: &[
        variant!(2, true, [-1, 1], [(-1, 2), (1, 2)]),
        variant!(2, false, [0, 1, 2], [(-3, 2), (2, 1), (-1, 2)]),
    ],
};

pub static D1_ORDER3: FdOperator = FdOperator {
    deriv_order: 1,
    tiers: &[
        variant!(3, false, [-1, 0, 1, 2], [(-1, 3), (-1, 2), (1, 1), (-1, 6)]),
        variant!(3, false, [0, 1, 2, 3], [(-11, 6), (3, 1), (-3, 2), (1, 3)]),
    ],
};

pub static D1_ORDER4: FdOperator = FdOperator {
    deriv_order: 1,
    tiers: &[
        variant!(4, true, [-2, -1, 1, 2], [(1, 12), (-2, 3), (2, 3), (-1, 12)]),
        variant!(4, false, [-1, 0, 1, 2, 3], [(-1, 4), (-5, 6), (3, 2), (-1, 2), (1, 12)]),
        variant!(4, false, [0, 1, 2, 3, 4], [(-25, 12), (4, 1), (-3, 1), (4, 3), (-1, 4)]),
    ],
};

pub static D1_ORDER5: FdOperator = FdOperator {
    deriv_order: 1,
    tiers: &[
        variant!(
            5,
            false,
            [-2, -1, 0, 1, 2, 3],
            [(1, 20), (-1, 2), (-1, 3), (1, 1), (-1, 4), (1, 30)]
        ),
        variant!(
            5,
            false,
            [-1, 0, 1, 2, 3, 4],
            [(-1, 5), (-13, 12), (2, 1), (-1, 1), (1, 3), (-1, 20)]
        ),
        variant!(
            5,
            false,
            [0, 1, 2, 3, 4, 5],
            [(-137, 60), (5, 1), (-5, 1), (10, 3), (-5, 4), (1, 5)]
        ),
    ],
};

pub static D2_ORDER2: FdOperator = FdOperator {
    deriv_order: 2,
    tiers: &[
        variant!(2, true, [-1, 0, 1], [(1, 1), (-2, 1), (1, 1)]),
        variant!(2, false, [0, 1, 2, 3], [(2, 1), (-5, 1), (4, 1), (-1, 1)]),
    ],
};

/// Fourth-order centered, third-order near boundaries.
pub static D2_ORDER43: FdOperator = FdOperator {
    deriv_order: 2,
    tiers: &[
        variant!(4, true, [-2, -1, 0, 1, 2], [(-1, 12), (4, 3), (-5, 2), (4, 3), (-1, 12)]),
        variant!(3, false, [-1, 0, 1, 2, 3], [(11, 12), (-5, 3), (1, 2), (1, 3), (-1, 12)]),
        variant!(3, false, [0, 1, 2, 3, 4], [(35, 12), (-26, 3), (19, 2), (-14, 3), (11, 12)]),
    ],
};

pub static D2_ORDER4: FdOperator = FdOperator {
    deriv_order: 2,
    tiers: &[
        variant!(4, true, [-2, -1, 0, 1, 2], [(-1, 12), (4, 3), (-5, 2), (4, 3), (-1, 12)]),
        variant!(
            4,
            false,
            [-1, 0, 1, 2, 3, 4],
            [(5, 6), (-5, 4), (-1, 3), (7, 6), (-1, 2), (1, 12)]
        ),
        variant!(
            4,
            false,
            [0, 1, 2, 3, 4, 5],
            [(15, 4), (-77, 6), (107, 6), (-13, 1), (61, 12), (-5, 6)]
        ),
    ],
};

pub static D3_ORDER1: FdOperator = FdOperator {
    deriv_order: 3,
    tiers: &[
        variant!(1, false, [-1, 0, 1, 2], [(-1, 1), (3, 1), (-3, 1), (1, 1)]),
        variant!(1, false, [0, 1, 2, 3], [(-1, 1), (3, 1), (-3, 1), (1, 1)]),
    ],
};

pub static D3_ORDER2: FdOperator = FdOperator {
    deriv_order: 3,
    tiers: &[
        variant!(2, true, [-2, -1, 1, 2], [(-1, 2), (1, 1), (-1, 1), (1, 2)]),
        variant!(2, false, [-1, 0, 1, 2, 3], [(-3, 2), (5, 1), (-6, 1), (3, 1), (-1, 2)]),
        variant!(2, false, [0, 1, 2, 3, 4], [(-5, 2), (9, 1), (-12, 1), (7, 1), (-3, 2)]),
    ],
};

pub static D3_ORDER3: FdOperator = FdOperator {
    deriv_order: 3,
    tiers: &[
        variant!(
            3,
            false,
            [-2, -1, 0, 1, 2, 3],
            [(-1, 4), (-1, 4), (5, 2), (-7, 2), (7, 4), (-1, 4)]
        ),
        variant!(
            3,
            false,
            [-1, 0, 1, 2, 3, 4],
            [(-7, 4), (25, 4), (-17, 2), (11, 2), (-7, 4), (1, 4)]
        ),
        variant!(
            3,
            false,
            [0, 1, 2, 3, 4, 5],
            [(-17, 4), (71, 4), (-59, 2), (49, 2), (-41, 4), (7, 4)]
        ),
    ],
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum D1Scheme {
    Order2,
    Order3,
    Order4,
    Order5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum D2Scheme {
    Order2,
    Order43,
    Order4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum D3Scheme {
    Order1,
    Order2,
    Order3,
}

impl D1Scheme {
    pub fn operator(self) -> &'static FdOperator {
        match self {
            D1Scheme::Order2 => &D1_ORDER2,
            D1Scheme::Order3 => &D1_ORDER3,
            D1Scheme::Order4 => &D1_ORDER4,
            D1Scheme::Order5 => &D1_ORDER5,
        }
    }
}

impl D2Scheme {
    pub fn operator(self) -> &'static FdOperator {
        match self {
            D2Scheme::Order2 => &D2_ORDER2,
            D2Scheme::Order43 => &D2_ORDER43,
            D2Scheme::Order4 => &D2_ORDER4,
        }
    }
}

impl D3Scheme {
    pub fn operator(self) -> &'static FdOperator {
        match self {
            D3Scheme::Order1 => &D3_ORDER1,
            D3Scheme::Order2 => &D3_ORDER2,
            D3Scheme::Order3 => &D3_ORDER3,
        }
    }
}

/// Which operator tiers a run uses: `d1`/`d2`/`d3` for partial derivatives
/// of the normalized coefficient fields, `grad` for the gradient of the
/// frozen iterate in nonlinear problems.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OperatorSetting {
    pub d1: D1Scheme,
    pub d2: D2Scheme,
    pub d3: D3Scheme,
    pub grad: D1Scheme,
}

impl Default for OperatorSetting {
    fn default() -> Self {
        OperatorSetting {
            d1: D1Scheme::Order3,
            d2: D2Scheme::Order43,
            d3: D3Scheme::Order2,
            grad: D1Scheme::Order4,
        }
    }
}

/// A variant resolved at a concrete index: possibly the mirror image of a
/// canonical table entry.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedVariant {
    pub variant: &'static FdVariant,
    pub mirrored: bool,
    pub deriv_order: u8,
}

impl ResolvedVariant {
    pub fn offsets(&self) -> impl Iterator<Item = i64> + '_ {
        let m = self.mirrored;
        self.variant.offsets.iter().map(move |&o| if m { -(o as i64) } else { o as i64 })
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        // Mirroring flips the sign of odd-order derivatives.
        let sign = if self.mirrored && self.deriv_order % 2 == 1 { -1.0 } else { 1.0 };
        self.variant.weights.iter().map(move |&(n, d)| sign * n as f64 / d as f64)
    }

    fn fits(variant: &FdVariant, mirrored: bool, i: usize, last: usize) -> bool {
        variant.offsets.iter().all(|&o| {
            let o = if mirrored { -(o as i64) } else { o as i64 };
            let p = i as i64 + o;
            p >= 0 && p <= last as i64
        })
    }
}

/// Select the variant used at sample index `i` on a line of `len` samples.
pub fn select_variant(op: &'static FdOperator, i: usize, len: usize) -> Result<ResolvedVariant> {
    let last = len.checked_sub(1).ok_or(Error::NoFeasibleVariant { index: i, len })?;
    for variant in op.tiers {
        let plain = ResolvedVariant::fits(variant, false, i, last);
        if variant.centered {
            if plain {
                return Ok(ResolvedVariant { variant, mirrored: false, deriv_order: op.deriv_order });
            }
            continue;
        }
        let mirror = ResolvedVariant::fits(variant, true, i, last);
        let mirrored = match (plain, mirror) {
            (false, false) => continue,
            (true, false) => false,
            (false, true) => true,
            // Both fit: extend toward the side with more room, ties right.
            (true, true) => (last - i) < i,
        };
        return Ok(ResolvedVariant { variant, mirrored, deriv_order: op.deriv_order });
    }
    Err(Error::NoFeasibleVariant { index: i, len })
}

/// Variant selection on a continuous interval: the footprint `x + off*step`
/// must stay inside `[lo, hi]`. Used for derivatives of expressions on
/// refined auxiliary lines that are not tied to grid indices.
pub fn select_variant_continuous(
    op: &'static FdOperator,
    x: f64,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<ResolvedVariant> {
    let eps = 1e-9 * step;
    let fits = |variant: &FdVariant, mirrored: bool| {
        variant.offsets.iter().all(|&o| {
            let o = if mirrored { -(o as f64) } else { o as f64 };
            let p = x + o * step;
            p >= lo - eps && p <= hi + eps
        })
    };
    for variant in op.tiers {
        let plain = fits(variant, false);
        if variant.centered {
            if plain {
                return Ok(ResolvedVariant { variant, mirrored: false, deriv_order: op.deriv_order });
            }
            continue;
        }
        let mirror = fits(variant, true);
        let mirrored = match (plain, mirror) {
            (false, false) => continue,
            (true, false) => false,
            (false, true) => true,
            (true, true) => (hi - x) < (x - lo),
        };
        return Ok(ResolvedVariant { variant, mirrored, deriv_order: op.deriv_order });
    }
    Err(Error::NoFeasibleVariant { index: 0, len: 0 })
}

/// Apply an operator to a contiguous line of samples at index `i`.
pub fn apply_1d(op: &'static FdOperator, samples: &[f64], i: usize, h: f64) -> Result<f64> {
    apply_strided(op, samples, 0, 1, samples.len(), i, h)
}

/// Apply an operator along a strided line embedded in a flat array.
pub fn apply_strided(
    op: &'static FdOperator,
    values: &[f64],
    base: usize,
    stride: usize,
    len: usize,
    i: usize,
    h: f64,
) -> Result<f64> {
    let rv = select_variant(op, i, len)?;
    let mut acc = 0.0;
    for (off, w) in rv.offsets().zip(rv.weights()) {
        let p = (i as i64 + off) as usize;
        acc += w * values[base + p * stride];
    }
    Ok(acc / h.powi(op.deriv_order as i32))
}

/// Differentiate a full-grid field along one axis at every node.
pub fn axis_derivative_field(
    grid: &GridSpec,
    values: &[f64],
    axis: usize,
    op: &'static FdOperator,
) -> Result<Vec<f64>> {
    axis_field_impl(grid, values, axis, op, false)
}

/// Like [`axis_derivative_field`] but marks infeasible nodes NaN instead of
/// failing; boundary nodes of very coarse grids may be infeasible without
/// any interior stencil ever consuming them.
pub fn axis_derivative_field_lenient(
    grid: &GridSpec,
    values: &[f64],
    axis: usize,
    op: &'static FdOperator,
) -> Vec<f64> {
    axis_field_impl(grid, values, axis, op, true).expect("lenient sweep cannot fail")
}

fn axis_field_impl(
    grid: &GridSpec,
    values: &[f64],
    axis: usize,
    op: &'static FdOperator,
    lenient: bool,
) -> Result<Vec<f64>> {
    let n = grid.n1 + 1;
    let total = grid.num_nodes();
    debug_assert_eq!(values.len(), total);
    let mut out = vec![0.0; total];
    let stride = n.pow(axis as u32);
    // Enumerate all lines along `axis`, then walk each line.
    let lines = total / n;
    let mut line_bases = Vec::with_capacity(lines);
    match (grid.dim, axis) {
        (2, 0) => (0..n).for_each(|j| line_bases.push(j * n)),
        (2, _) => (0..n).for_each(|i| line_bases.push(i)),
        (3, 0) => {
            for k in 0..n {
                for j in 0..n {
                    line_bases.push((k * n + j) * n);
                }
            }
        }
        (3, 1) => {
            for k in 0..n {
                for i in 0..n {
                    line_bases.push(k * n * n + i);
                }
            }
        }
        _ => {
            for j in 0..n {
                for i in 0..n {
                    line_bases.push(j * n + i);
                }
            }
        }
    }
    for base in line_bases {
        for i in 0..n {
            match apply_strided(op, values, base, stride, n, i, grid.h) {
                Ok(v) => out[base + i * stride] = v,
                Err(e) if lenient => {
                    let _ = e;
                    out[base + i * stride] = f64::NAN;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// All partial derivatives of total order <= 3 at one node.
#[derive(Debug, Clone, Copy, Default)]
pub struct Partials {
    table: [f64; 20],
}

const PARTIAL_INDEX: [(u8, u8, u8); 20] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (2, 0, 0),
    (1, 1, 0),
    (1, 0, 1),
    (0, 2, 0),
    (0, 1, 1),
    (0, 0, 2),
    (3, 0, 0),
    (2, 1, 0),
    (2, 0, 1),
    (1, 2, 0),
    (1, 1, 1),
    (1, 0, 2),
    (0, 3, 0),
    (0, 2, 1),
    (0, 1, 2),
    (0, 0, 3),
];

impl Partials {
    fn slot(mx: usize, my: usize, mz: usize) -> usize {
        PARTIAL_INDEX
            .iter()
            .position(|&(a, b, c)| (a as usize, b as usize, c as usize) == (mx, my, mz))
            .expect("partial order exceeds 3")
    }

    pub fn get(&self, mx: usize, my: usize, mz: usize) -> f64 {
        self.table[Self::slot(mx, my, mz)]
    }

    pub fn set(&mut self, mx: usize, my: usize, mz: usize, v: f64) {
        self.table[Self::slot(mx, my, mz)] = v;
    }
}

struct NodeLine<'a> {
    values: &'a [f64],
    base: usize,
    stride: usize,
    len: usize,
}

fn node_line<'a>(grid: &GridSpec, values: &'a [f64], node: [usize; 3], axis: usize) -> (NodeLine<'a>, usize) {
    let n = grid.n1 + 1;
    let stride = n.pow(axis as u32);
    let offset = match grid.dim {
        2 => node[1] * n + node[0],
        _ => (node[2] * n + node[1]) * n + node[0],
    };
    let i = node[axis];
    let base = offset - i * stride;
    (NodeLine { values, base, stride, len: n }, i)
}

fn pure_derivative(
    grid: &GridSpec,
    values: &[f64],
    node: [usize; 3],
    axis: usize,
    op: &'static FdOperator,
) -> Result<f64> {
    let (line, i) = node_line(grid, values, node, axis);
    apply_strided(op, line.values, line.base, line.stride, line.len, i, grid.h)
}

/// Mixed partial by composition: the inner operator is applied at every node
/// of the outer stencil's cross-line, then the outer operator combines those
/// results.
fn composed_derivative(
    grid: &GridSpec,
    values: &[f64],
    node: [usize; 3],
    inner_axis: usize,
    inner_op: &'static FdOperator,
    outer_axis: usize,
    outer_op: &'static FdOperator,
) -> Result<f64> {
    let n = grid.n1 + 1;
    let j = node[outer_axis];
    let rv = select_variant(outer_op, j, n)?;
    let mut acc = 0.0;
    for (off, w) in rv.offsets().zip(rv.weights()) {
        let mut cross = node;
        cross[outer_axis] = (j as i64 + off) as usize;
        acc += w * pure_derivative(grid, values, cross, inner_axis, inner_op)?;
    }
    Ok(acc / grid.h.powi(outer_op.deriv_order as i32))
}

fn partials_impl(
    grid: &GridSpec,
    values: &[f64],
    node: [usize; 3],
    setting: &OperatorSetting,
) -> Result<Partials> {
    let d1 = setting.d1.operator();
    let d2 = setting.d2.operator();
    let d3 = setting.d3.operator();
    let axes = grid.dim;
    let mut p = Partials::default();

    let n = grid.n1 + 1;
    let offset = match grid.dim {
        2 => node[1] * n + node[0],
        _ => (node[2] * n + node[1]) * n + node[0],
    };
    p.set(0, 0, 0, values[offset]);

    let unit = |axis: usize, m: usize| {
        let mut e = [0usize; 3];
        e[axis] = m;
        e
    };

    for axis in 0..axes {
        let [ex, ey, ez] = unit(axis, 1);
        p.set(ex, ey, ez, pure_derivative(grid, values, node, axis, d1)?);
        let [ex, ey, ez] = unit(axis, 2);
        p.set(ex, ey, ez, pure_derivative(grid, values, node, axis, d2)?);
        let [ex, ey, ez] = unit(axis, 3);
        p.set(ex, ey, ez, pure_derivative(grid, values, node, axis, d3)?);
    }

    // Second-order mixed: w_ab = (w_a)_b with a the earlier axis.
    for a in 0..axes {
        for b in (a + 1)..axes {
            let v = composed_derivative(grid, values, node, a, d1, b, d1)?;
            let mut e = [0usize; 3];
            e[a] = 1;
            e[b] = 1;
            p.set(e[0], e[1], e[2], v);
        }
    }

    // Third-order mixed: highest pure derivative first (inner), ties by
    // axis order, e.g. w_xxy = (w_xx)_y and w_xyy = (w_yy)_x.
    for a in 0..axes {
        for b in 0..axes {
            if a == b {
                continue;
            }
            let v = composed_derivative(grid, values, node, a, d2, b, d1)?;
            let mut e = [0usize; 3];
            e[a] = 2;
            e[b] = 1;
            p.set(e[0], e[1], e[2], v);
        }
    }
    if axes == 3 {
        // w_xyz = ((w_x)_y)_z
        let j = node[2];
        let rv = select_variant(d1, j, n)?;
        let mut acc = 0.0;
        for (off, w) in rv.offsets().zip(rv.weights()) {
            let mut cross = node;
            cross[2] = (j as i64 + off) as usize;
            acc += w * composed_derivative(grid, values, cross, 0, d1, 1, d1)?;
        }
        p.set(1, 1, 1, acc / grid.h);
    }
    Ok(p)
}

/// All partial derivatives up to total order 3 of a field sampled on the
/// full 2D grid.
pub fn partials_2d(
    field: &[f64],
    node: [usize; 2],
    grid: &GridSpec,
    setting: &OperatorSetting,
) -> Result<Partials> {
    debug_assert_eq!(grid.dim, 2);
    partials_impl(grid, field, [node[0], node[1], 0], setting)
}

/// All partial derivatives up to total order 3 of a field sampled on the
/// full 3D grid.
pub fn partials_3d(
    field: &[f64],
    node: [usize; 3],
    grid: &GridSpec,
    setting: &OperatorSetting,
) -> Result<Partials> {
    debug_assert_eq!(grid.dim, 3);
    partials_impl(grid, field, node, setting)
}
