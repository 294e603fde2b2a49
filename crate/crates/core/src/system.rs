//! Global sparse assembly of -L_h u = -F with Dirichlet elimination,
//! M-matrix/sign diagnostics, and direct/iterative solvers.
//!
//! Rows store -C and the right side stores -h^2 F plus the eliminated
//! boundary couplings, so the sign conditions of the monotonicity
//! proposition are literal sign checks on stored entries.

use crate::coefficients::CoefficientBundle;
use crate::error::{Error, Result};
use crate::grid::{lex_index, GridSpec, NodeIndex};
use crate::stencil2d::{self, StencilInput2};
use crate::stencil3d::{self, StencilInput3};
use std::io::Write;

/// Pre-elimination row diagnostics kept for the M-matrix report.
#[derive(Debug, Clone, Copy)]
pub struct RowPre {
    pub diag: f64,
    pub max_offdiag: f64,
    pub row_sum: f64,
}

/// Row-compressed sparse system over the interior unknowns in lexicographic
/// order.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
    pub rhs: Vec<f64>,
    pub grid: GridSpec,
    pub pre: Vec<RowPre>,
}

impl SparseSystem {
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            out[i] = acc;
        }
    }

    pub fn residual_inf(&self, x: &[f64]) -> f64 {
        let mut r = vec![0.0; self.n];
        self.matvec(x, &mut r);
        r.iter()
            .zip(&self.rhs)
            .map(|(ax, b)| (ax - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.values[k].abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn bandwidth(&self) -> usize {
        let mut bw = 0usize;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                bw = bw.max(self.col_idx[k].abs_diff(i));
            }
        }
        bw
    }

    /// Coordinate-format export for external validation.
    pub fn write_matrix_market(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.values.len())?;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                writeln!(w, "{} {} {:.17e}", i + 1, self.col_idx[k] + 1, self.values[k])?;
            }
        }
        Ok(())
    }
}

/// Assemble the interior system from per-node stencils, moving couplings to
/// Dirichlet boundary nodes onto the right side.
pub fn assemble(
    grid: &GridSpec,
    bundle: &CoefficientBundle,
    g: &dyn Fn([f64; 3]) -> Result<f64>,
) -> Result<SparseSystem> {
    if bundle.grid != *grid {
        return Err(Error::GridMismatch {
            expected: grid.num_nodes(),
            got: bundle.grid.num_nodes(),
        });
    }
    let n = grid.num_interior();
    let h = grid.h;
    let h2 = h * h;
    let n1 = grid.n1 as i64;
    let per_row = if grid.dim == 2 { 9 } else { 19 };

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n * per_row);
    let mut values = Vec::with_capacity(n * per_row);
    let mut rhs = Vec::with_capacity(n);
    let mut pre = Vec::with_capacity(n);
    row_ptr.push(0);

    // Neighbor offsets in ascending column order (s, l, r lexicographic).
    let offsets: Vec<(i64, i64, i64)> = if grid.dim == 2 {
        let mut v = Vec::new();
        for l in -1..=1 {
            for r in -1..=1 {
                v.push((r, l, 0));
            }
        }
        v
    } else {
        let mut v = Vec::new();
        for s in -1..=1 {
            for l in -1..=1 {
                for r in -1..=1 {
                    v.push((r, l, s));
                }
            }
        }
        v
    };

    type CoeffAt = Box<dyn Fn(i64, i64, i64) -> f64>;
    for node in grid.interior_nodes() {
        let idx = grid.node_offset(node);
        let (coeff_at, f_rhs): (CoeffAt, f64) = if grid.dim == 2 {
            let s = stencil2d::stencil_at(&StencilInput2::from_bundle(bundle, idx), h);
            let rhs = s.rhs;
            (Box::new(move |r, l, _| s.at(r as i32, l as i32)), rhs)
        } else {
            let s = stencil3d::stencil_at(&StencilInput3::from_bundle(bundle, idx), h);
            let rhs = s.rhs;
            (Box::new(move |r, l, t| s.at(r as i32, l as i32, t as i32)), rhs)
        };

        let mut b = -h2 * f_rhs;
        let mut diag = 0.0;
        let mut max_off = f64::NEG_INFINITY;
        let mut row_sum = 0.0;
        for &(r, l, s) in &offsets {
            let c = coeff_at(r, l, s);
            let neg = -c;
            row_sum += neg;
            if (r, l, s) == (0, 0, 0) {
                diag = neg;
            } else if c != 0.0 || r.abs() + l.abs() + s.abs() < 3 {
                max_off = max_off.max(neg);
            }
            if c == 0.0 && (r, l, s) != (0, 0, 0) {
                continue;
            }
            let (ni, nj, nk) =
                (node.i as i64 + r, node.j as i64 + l, node.k as i64 + s);
            let interior = ni > 0
                && ni < n1
                && nj > 0
                && nj < n1
                && (grid.dim == 2 || (nk > 0 && nk < n1));
            let neighbor = NodeIndex {
                i: ni as usize,
                j: nj as usize,
                k: nk as usize,
            };
            if interior {
                col_idx.push(lex_index(neighbor, grid)?);
                values.push(neg);
            } else {
                b += c * g(grid.point(neighbor))?;
            }
        }
        rhs.push(b);
        row_ptr.push(col_idx.len());
        pre.push(RowPre { diag, max_offdiag: max_off, row_sum });
    }

    Ok(SparseSystem { n, row_ptr, col_idx, values, rhs, grid: *grid, pre })
}

/// Outcome of the sign/row-sum inspection of the assembled -L_h.
#[derive(Debug, Clone)]
pub struct MMatrixReport {
    pub sign_ok: bool,
    pub rowsum_ok: bool,
    pub min_diagonal: f64,
    pub max_offdiagonal: f64,
    pub min_rowsum: f64,
    /// Rows violating the sign condition (truncated).
    pub violating: Vec<NodeIndex>,
    pub sign_violations: usize,
    pub rowsum_violations: usize,
}

/// Evaluate the sign and row-sum conditions on the pre-elimination
/// coefficients (boundary couplings included).
pub fn check_m_matrix(sys: &SparseSystem) -> MMatrixReport {
    let mut min_diag = f64::INFINITY;
    let mut max_off = f64::NEG_INFINITY;
    let mut min_rowsum = f64::INFINITY;
    let mut violating = Vec::new();
    let mut sign_violations = 0usize;
    let mut rowsum_violations = 0usize;
    let scale = sys.pre.iter().map(|p| p.diag.abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(1.0);
    for (row, p) in sys.pre.iter().enumerate() {
        min_diag = min_diag.min(p.diag);
        max_off = max_off.max(p.max_offdiag);
        min_rowsum = min_rowsum.min(p.row_sum);
        if p.diag <= 0.0 || p.max_offdiag > tol {
            sign_violations += 1;
            if violating.len() < 16 {
                violating.push(crate::grid::node_of_lex(row, &sys.grid));
            }
        }
        if p.row_sum < -tol {
            rowsum_violations += 1;
        }
    }
    MMatrixReport {
        sign_ok: min_diag > 0.0 && max_off <= tol,
        rowsum_ok: min_rowsum >= -tol,
        min_diagonal: min_diag,
        max_offdiagonal: max_off,
        min_rowsum,
        violating,
        sign_violations,
        rowsum_violations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMethod {
    Direct,
    BiCgStab { rel_tol: f64, max_iters: usize },
    Gmres { rel_tol: f64, max_iters: usize, restart: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precond {
    None,
    Ilu0,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub method: SolveMethod,
    pub precond: Precond,
}

impl SolveConfig {
    pub fn direct() -> Self {
        SolveConfig { method: SolveMethod::Direct, precond: Precond::None }
    }

    pub fn bicgstab(rel_tol: f64) -> Self {
        SolveConfig {
            method: SolveMethod::BiCgStab { rel_tol, max_iters: 20_000 },
            precond: Precond::Ilu0,
        }
    }

    pub fn gmres(rel_tol: f64) -> Self {
        SolveConfig {
            method: SolveMethod::Gmres { rel_tol, max_iters: 20_000, restart: 60 },
            precond: Precond::Ilu0,
        }
    }

    /// Banded direct factorization while its work and storage stay small,
    /// ILU(0)-preconditioned BiCGSTAB beyond that; repeated solves (time
    /// marching, fixed-point loops) warm-start the Krylov iteration.
    pub fn auto(grid: &GridSpec) -> Self {
        let n = grid.num_interior();
        let bw = if grid.dim == 2 {
            grid.n1
        } else {
            (grid.n1 - 1) * (grid.n1 - 1) + grid.n1
        };
        let banded_doubles = n.saturating_mul(3 * bw + 1);
        if banded_doubles <= 1_000_000 {
            SolveConfig::direct()
        } else {
            SolveConfig::bicgstab(1e-12)
        }
    }
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig::direct()
    }
}

#[derive(Debug, Clone)]
pub struct SolveStats {
    pub method: &'static str,
    pub iterations: usize,
    pub residual_inf: f64,
}

pub fn solve(sys: &SparseSystem, cfg: &SolveConfig) -> Result<(Vec<f64>, SolveStats)> {
    solve_with_guess(sys, cfg, None)
}

pub fn solve_with_guess(
    sys: &SparseSystem,
    cfg: &SolveConfig,
    guess: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveStats)> {
    if sys.n == 0 {
        return Ok((vec![], SolveStats { method: "direct", iterations: 0, residual_inf: 0.0 }));
    }
    match cfg.method {
        SolveMethod::Direct => {
            let x = banded_lu_solve(sys)?;
            let res = sys.residual_inf(&x);
            Ok((x, SolveStats { method: "direct", iterations: 0, residual_inf: res }))
        }
        SolveMethod::BiCgStab { rel_tol, max_iters } => {
            bicgstab(sys, rel_tol, max_iters, cfg.precond, guess)
        }
        SolveMethod::Gmres { rel_tol, max_iters, restart } => {
            gmres(sys, rel_tol, max_iters, restart, cfg.precond, guess)
        }
    }
}

// ---------------------------------------------------------------------------
// Banded LU with partial pivoting (column-oriented band storage).

fn banded_lu_solve(sys: &SparseSystem) -> Result<Vec<f64>> {
    let n = sys.n;
    let bw = sys.bandwidth();
    let (kl, ku) = (bw, bw);
    let ldab = 2 * kl + ku + 1;
    let storage = n.checked_mul(ldab).ok_or_else(|| {
        Error::Config("banded factorization too large; use an iterative method".into())
    })?;
    if storage > 400_000_000 {
        return Err(Error::Config(
            "banded factorization exceeds the memory budget; use an iterative method".into(),
        ));
    }
    let mut ab = vec![0.0f64; storage];
    // A(i, j) lives at ab[j*ldab + kl + ku + i - j].
    for i in 0..n {
        for k in sys.row_ptr[i]..sys.row_ptr[i + 1] {
            let j = sys.col_idx[k];
            ab[j * ldab + kl + ku + i - j] = sys.values[k];
        }
    }
    let mut ipiv = vec![0usize; n];
    for j in 0..n {
        let km = kl.min(n - 1 - j);
        // Pivot search in column j, rows j..=j+km.
        let base = j * ldab + kl + ku;
        let mut p = 0usize;
        let mut pmax = ab[base].abs();
        for r in 1..=km {
            let v = ab[base + r].abs();
            if v > pmax {
                pmax = v;
                p = r;
            }
        }
        if pmax == 0.0 {
            return Err(Error::SingularMatrix(j));
        }
        ipiv[j] = j + p;
        let hi = (j + ku + kl).min(n - 1);
        if p != 0 {
            let jp = j + p;
            for c in j..=hi {
                let x = c * ldab + kl + ku + j - c;
                let y = c * ldab + kl + ku + jp - c;
                ab.swap(x, y);
            }
        }
        let piv = ab[base];
        for r in 1..=km {
            ab[base + r] /= piv;
        }
        for c in (j + 1)..=hi {
            let u = ab[c * ldab + kl + ku + j - c];
            if u != 0.0 {
                let cb = c * ldab + kl + ku + j - c;
                for r in 1..=km {
                    ab[cb + r] -= ab[base + r] * u;
                }
            }
        }
    }
    // Forward elimination with pivoting, then back substitution.
    let mut x = sys.rhs.clone();
    for j in 0..n {
        let jp = ipiv[j];
        if jp != j {
            x.swap(j, jp);
        }
        let km = kl.min(n - 1 - j);
        let base = j * ldab + kl + ku;
        let xj = x[j];
        for r in 1..=km {
            x[j + r] -= ab[base + r] * xj;
        }
    }
    for j in (0..n).rev() {
        let hi = (j + ku + kl).min(n - 1);
        let mut acc = x[j];
        for c in (j + 1)..=hi {
            acc -= ab[c * ldab + kl + ku + j - c] * x[c];
        }
        x[j] = acc / ab[j * ldab + kl + ku];
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// ILU(0) and Krylov solvers.

struct Ilu0 {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    fn build(sys: &SparseSystem) -> Result<Ilu0> {
        let n = sys.n;
        let row_ptr = sys.row_ptr.clone();
        let col_idx = sys.col_idx.clone();
        let mut values = sys.values.clone();
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                if col_idx[k] == i {
                    diag_pos[i] = k;
                }
            }
            if diag_pos[i] == usize::MAX {
                return Err(Error::SingularMatrix(i));
            }
        }
        let find = |row: usize, col: usize| -> Option<usize> {
            let lo = row_ptr[row];
            let hi = row_ptr[row + 1];
            let slice = &col_idx[lo..hi];
            slice.binary_search(&col).ok().map(|p| lo + p)
        };
        for i in 0..n {
            let row_range = row_ptr[i]..row_ptr[i + 1];
            for kk in row_range.clone() {
                let k = col_idx[kk];
                if k >= i {
                    break;
                }
                let dk = values[diag_pos[k]];
                if dk == 0.0 {
                    return Err(Error::SingularMatrix(k));
                }
                let lik = values[kk] / dk;
                values[kk] = lik;
                for kj in (diag_pos[k] + 1)..row_ptr[k + 1] {
                    let j = col_idx[kj];
                    if let Some(pos) = find(i, j) {
                        values[pos] -= lik * values[kj];
                    }
                }
            }
            if values[diag_pos[i]] == 0.0 {
                return Err(Error::SingularMatrix(i));
            }
        }
        Ok(Ilu0 { row_ptr, col_idx, values, diag_pos })
    }

    /// z = (LU)^{-1} r
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        z.copy_from_slice(r);
        for i in 0..n {
            let mut acc = z[i];
            for k in self.row_ptr[i]..self.diag_pos[i] {
                acc -= self.values[k] * z[self.col_idx[k]];
            }
            z[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for k in (self.diag_pos[i] + 1)..self.row_ptr[i + 1] {
                acc -= self.values[k] * z[self.col_idx[k]];
            }
            z[i] = acc / self.values[self.diag_pos[i]];
        }
    }
}

enum Prec {
    Identity,
    Ilu(Ilu0),
}

impl Prec {
    fn build(sys: &SparseSystem, p: Precond) -> Result<Prec> {
        Ok(match p {
            Precond::None => Prec::Identity,
            Precond::Ilu0 => Prec::Ilu(Ilu0::build(sys)?),
        })
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Prec::Identity => z.copy_from_slice(r),
            Prec::Ilu(m) => m.apply(r, z),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn bicgstab(
    sys: &SparseSystem,
    rel_tol: f64,
    max_iters: usize,
    precond: Precond,
    guess: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveStats)> {
    let n = sys.n;
    let m = Prec::build(sys, precond)?;
    let bnorm = norm2(&sys.rhs);
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats { method: "bicgstab", iterations: 0, residual_inf: 0.0 },
        ));
    }
    let mut x = guess.map(|g| g.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut r = vec![0.0; n];
    sys.matvec(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(&sys.rhs) {
        *ri = bi - *ri;
    }
    let mut rhat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);
    let mut history = Vec::new();
    let target = rel_tol * bnorm;
    for it in 1..=max_iters {
        let rho_new = dot(&rhat, &r);
        if rho_new.abs() < 1e-300 {
            // Restart with the current residual as the shadow vector.
            rhat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            p.iter_mut().for_each(|z| *z = 0.0);
            v.iter_mut().for_each(|z| *z = 0.0);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        m.apply(&p, &mut phat);
        sys.matvec(&phat, &mut v);
        let denom = dot(&rhat, &v);
        if denom.abs() < 1e-300 {
            rhat.copy_from_slice(&r);
            rho = 1.0;
            continue;
        }
        alpha = rho_new / denom;
        // s = r - alpha v (reuse r)
        for i in 0..n {
            r[i] -= alpha * v[i];
        }
        if norm2(&r) <= target {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            let res = sys.residual_inf(&x);
            return Ok((x, SolveStats { method: "bicgstab", iterations: it, residual_inf: res }));
        }
        m.apply(&r, &mut shat);
        sys.matvec(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::IterativeDivergence { tol: rel_tol, iters: it, history });
        }
        omega = dot(&t, &r) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] -= omega * t[i];
        }
        rho = rho_new;
        let rn = norm2(&r);
        if history.len() < 32 {
            history.push(rn / bnorm);
        }
        if rn <= target {
            let res = sys.residual_inf(&x);
            return Ok((x, SolveStats { method: "bicgstab", iterations: it, residual_inf: res }));
        }
        if omega.abs() < 1e-300 {
            rhat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
        }
    }
    Err(Error::IterativeDivergence { tol: rel_tol, iters: max_iters, history })
}

fn gmres(
    sys: &SparseSystem,
    rel_tol: f64,
    max_iters: usize,
    restart: usize,
    precond: Precond,
    guess: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveStats)> {
    let n = sys.n;
    let m = Prec::build(sys, precond)?;
    let bnorm = norm2(&sys.rhs);
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats { method: "gmres", iterations: 0, residual_inf: 0.0 },
        ));
    }
    let target = rel_tol * bnorm;
    let mm = restart.max(1).min(n);
    let mut x = guess.map(|g| g.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut total_iters = 0usize;
    let mut history = Vec::new();
    let mut tmp = vec![0.0; n];

    while total_iters < max_iters {
        let mut r = vec![0.0; n];
        sys.matvec(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(&sys.rhs) {
            *ri = bi - *ri;
        }
        let beta = norm2(&r);
        if beta <= target {
            let res = sys.residual_inf(&x);
            return Ok((
                x,
                SolveStats { method: "gmres", iterations: total_iters, residual_inf: res },
            ));
        }
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(mm + 1);
        v.push(r.iter().map(|z| z / beta).collect());
        let mut hess = vec![vec![0.0f64; mm]; mm + 1];
        let mut cs = vec![0.0f64; mm];
        let mut sn = vec![0.0f64; mm];
        let mut gvec = vec![0.0f64; mm + 1];
        gvec[0] = beta;
        let mut k_used = 0usize;
        for k in 0..mm {
            if total_iters >= max_iters {
                break;
            }
            total_iters += 1;
            m.apply(&v[k], &mut tmp);
            let mut w = vec![0.0; n];
            sys.matvec(&tmp, &mut w);
            for j in 0..=k {
                hess[j][k] = dot(&w, &v[j]);
                for i in 0..n {
                    w[i] -= hess[j][k] * v[j][i];
                }
            }
            hess[k + 1][k] = norm2(&w);
            if hess[k + 1][k] > 1e-300 {
                v.push(w.iter().map(|z| z / hess[k + 1][k]).collect());
            } else {
                v.push(vec![0.0; n]);
            }
            // Apply previous Givens rotations to the new column.
            for j in 0..k {
                let t1 = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                let t2 = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t1;
                hess[j + 1][k] = t2;
            }
            let denom = (hess[k][k] * hess[k][k] + hess[k + 1][k] * hess[k + 1][k]).sqrt();
            if denom == 0.0 {
                k_used = k + 1;
                break;
            }
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            gvec[k + 1] = -sn[k] * gvec[k];
            gvec[k] *= cs[k];
            k_used = k + 1;
            let resid = gvec[k + 1].abs();
            if history.len() < 32 {
                history.push(resid / bnorm);
            }
            if resid <= target {
                break;
            }
        }
        // Solve the small triangular system and update x.
        let k = k_used;
        if k == 0 {
            break;
        }
        let mut y = vec![0.0f64; k];
        for i in (0..k).rev() {
            let mut acc = gvec[i];
            for j in (i + 1)..k {
                acc -= hess[i][j] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        let mut update = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                update[i] += yj * v[j][i];
            }
        }
        m.apply(&update, &mut tmp);
        for i in 0..n {
            x[i] += tmp[i];
        }
        let res2 = {
            let mut r = vec![0.0; n];
            sys.matvec(&x, &mut r);
            r.iter()
                .zip(&sys.rhs)
                .map(|(ax, b)| (ax - b) * (ax - b))
                .sum::<f64>()
                .sqrt()
        };
        if res2 <= target {
            let res = sys.residual_inf(&x);
            return Ok((
                x,
                SolveStats { method: "gmres", iterations: total_iters, residual_inf: res },
            ));
        }
    }
    Err(Error::IterativeDivergence { tol: rel_tol, iters: total_iters, history })
}
