//! Normalized coefficient bundles: transform problem data (kappa, alpha,
//! beta, gamma, lambda, phi, time-integrator context, nonlinear iterate)
//! into the fields a, b, (c,) d, f and all their partials up to order 2.

use crate::error::{Error, Result};
use crate::fd_ops::{self, OperatorSetting};
use crate::grid::{Field, GridSpec};
use crate::problems::{CoeffSet, DerivMode, Kind, Problem};

/// Guard for the positivity check; genuinely tiny diffusion (1e-4 scale)
/// must pass, only nonpositive or subnormal values are rejected.
const KAPPA_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Integrator {
    Cn,
    Bdf3,
    Bdf4,
}

impl Integrator {
    pub fn history_len(self) -> usize {
        match self {
            Integrator::Cn => 1,
            Integrator::Bdf3 => 3,
            Integrator::Bdf4 => 4,
        }
    }

    /// Coefficient of 1/(tau*kappa) absorbed into d.
    pub fn mass_coefficient(self) -> f64 {
        match self {
            Integrator::Cn => 2.0,
            Integrator::Bdf3 => 11.0 / 6.0,
            Integrator::Bdf4 => 25.0 / 12.0,
        }
    }

    /// Offset i such that the implicit level sits at t = (n + i) tau.
    pub fn target_offset(self) -> f64 {
        match self {
            Integrator::Cn => 0.5,
            Integrator::Bdf3 => 3.0,
            Integrator::Bdf4 => 4.0,
        }
    }

    /// The history combination divided by tau that is absorbed into f
    /// (later divided by kappa). `hist` is ordered oldest first.
    pub fn history_combination(self, tau: f64, hist: &[f64]) -> f64 {
        match self {
            Integrator::Cn => 2.0 / tau * hist[0],
            Integrator::Bdf3 => (18.0 * hist[2] - 9.0 * hist[1] + 2.0 * hist[0]) / (6.0 * tau),
            Integrator::Bdf4 => {
                (48.0 * hist[3] - 36.0 * hist[2] + 16.0 * hist[1] - 3.0 * hist[0]) / (12.0 * tau)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Integrator::Cn => "cn",
            Integrator::Bdf3 => "bdf3",
            Integrator::Bdf4 => "bdf4",
        }
    }
}

/// Everything one implicit solve needs to know about its position in time:
/// the integrator, step, current base level n, and the prior fields
/// (oldest first).
pub struct TimeSliceContext<'a> {
    pub integrator: Integrator,
    pub tau: f64,
    pub level: usize,
    pub history: Vec<&'a Field>,
}

impl<'a> TimeSliceContext<'a> {
    pub fn target_time(&self) -> f64 {
        (self.level as f64 + self.integrator.target_offset()) * self.tau
    }

    pub(crate) fn validate(&self, grid: &GridSpec) -> Result<()> {
        let needed = self.integrator.history_len();
        if self.history.len() < needed {
            return Err(Error::HistoryUnderflow { needed, got: self.history.len() });
        }
        for f in &self.history {
            if f.values.len() != grid.num_nodes() {
                return Err(Error::GridMismatch {
                    expected: grid.num_nodes(),
                    got: f.values.len(),
                });
            }
        }
        Ok(())
    }
}

/// One normalized coefficient sampled on the full grid with all partials
/// up to total order 2. The z-related arrays are empty in 2D.
#[derive(Debug, Clone, Default)]
pub struct CoeffField {
    pub v: Vec<f64>,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub dz: Vec<f64>,
    pub dxx: Vec<f64>,
    pub dxy: Vec<f64>,
    pub dxz: Vec<f64>,
    pub dyy: Vec<f64>,
    pub dyz: Vec<f64>,
    pub dzz: Vec<f64>,
}

/// Values + partials of one coefficient at one node. z-entries are 0 in 2D.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoeffSlice {
    pub v: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub xx: f64,
    pub xy: f64,
    pub xz: f64,
    pub yy: f64,
    pub yz: f64,
    pub zz: f64,
}

impl CoeffField {
    pub fn slice(&self, idx: usize, dim: usize) -> CoeffSlice {
        let get = |arr: &Vec<f64>| if arr.is_empty() { 0.0 } else { arr[idx] };
        let mut s = CoeffSlice {
            v: self.v[idx],
            x: self.dx[idx],
            y: self.dy[idx],
            xx: self.dxx[idx],
            xy: get(&self.dxy),
            yy: self.dyy[idx],
            ..Default::default()
        };
        if dim == 3 {
            s.z = self.dz[idx];
            s.xz = get(&self.dxz);
            s.yz = get(&self.dyz);
            s.zz = self.dzz[idx];
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct CoefficientBundle {
    pub grid: GridSpec,
    pub a: CoeffField,
    pub b: CoeffField,
    pub c: Option<CoeffField>,
    pub d: CoeffField,
    pub f: CoeffField,
}

impl CoefficientBundle {
    pub fn dim(&self) -> usize {
        self.grid.dim
    }
}

/// Source values cached per time level: phi is iterate-independent, so the
/// fixed-point loops sample it once per implicit level.
pub struct PhiCache {
    pub values: Vec<f64>,
}

impl PhiCache {
    pub fn build(problem: &Problem, grid: &GridSpec, t: f64) -> Result<PhiCache> {
        let aux_step = grid.h / 4.0;
        let mut values = Vec::with_capacity(grid.num_nodes());
        for node in grid.nodes() {
            values.push(problem.phi(grid.point(node), t, aux_step)?);
        }
        Ok(PhiCache { values })
    }
}

/// Raw sampled values before differentiation.
struct SampledValues {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Option<Vec<f64>>,
    d: Vec<f64>,
    f: Vec<f64>,
}

fn check_kappa(k: f64, node: [usize; 3]) -> Result<()> {
    if !k.is_finite() || k < KAPPA_FLOOR {
        return Err(Error::NonpositiveKappa { node, value: k });
    }
    Ok(())
}

/// Sample the composite fields on the full grid.
fn sample_values(
    problem: &Problem,
    grid: &GridSpec,
    ctx: Option<&TimeSliceContext>,
    iterate: Option<&Field>,
    phi: Option<&PhiCache>,
) -> Result<SampledValues> {
    let n_total = grid.num_nodes();
    let t_star = ctx.map(|c| c.target_time()).unwrap_or(0.0);
    let aux_step = grid.h / 4.0;
    let phi_at = |idx: usize, p: [f64; 3]| -> Result<f64> {
        match phi {
            Some(cache) => Ok(cache.values[idx]),
            None => problem.phi(p, t_star, aux_step),
        }
    };
    let dim = grid.dim;

    let mut av = vec![0.0; n_total];
    let mut bv = vec![0.0; n_total];
    let mut cv = if dim == 3 { Some(vec![0.0; n_total]) } else { None };
    let mut dv = vec![0.0; n_total];
    let mut fv = vec![0.0; n_total];

    // Per-node history combination absorbed into f (unsteady).
    let combo: Option<Vec<f64>> = match ctx {
        Some(c) => {
            c.validate(grid)?;
            let tau = c.tau;
            let mut out = vec![0.0; n_total];
            let mut at_node = vec![0.0; c.history.len()];
            for idx in 0..n_total {
                for (s, f) in at_node.iter_mut().zip(&c.history) {
                    *s = f.values[idx];
                }
                out[idx] = c.integrator.history_combination(tau, &at_node);
            }
            Some(out)
        }
        None => None,
    };
    let mass = ctx.map(|c| c.integrator.mass_coefficient() / c.tau);

    match &problem.coeffs {
        CoeffSet::Linear { kappa, alpha, beta, gamma, lambda } => {
            if dim == 3 && gamma.is_none() {
                return Err(Error::Config("3D problems need a gamma coefficient".into()));
            }
            for node in grid.nodes() {
                let idx = grid.node_offset(node);
                let p = grid.point(node);
                let (k, kgrad) = match kappa {
                    crate::problems::Coeff::Closed(f) => {
                        let j = f(p, t_star, 1);
                        (j.value(), [j.dx(), j.dy(), if dim == 3 { j.dz() } else { 0.0 }])
                    }
                    c @ crate::problems::Coeff::Expr(_) => {
                        let v = c.value(p, t_star)?;
                        let mut g = [0.0; 3];
                        for (ax, slot) in g.iter_mut().enumerate().take(dim) {
                            *slot =
                                problem.coeff_spatial_partial(c, p, t_star, ax, 1, aux_step)?;
                        }
                        (v, g)
                    }
                };
                check_kappa(k, [node.i, node.j, node.k])?;
                av[idx] = (kgrad[0] - alpha.value(p, t_star)?) / k;
                bv[idx] = (kgrad[1] - beta.value(p, t_star)?) / k;
                if let (Some(cvec), Some(g)) = (cv.as_mut(), gamma.as_ref()) {
                    cvec[idx] = (kgrad[2] - g.value(p, t_star)?) / k;
                }
                let mut d = -lambda.value(p, t_star)? / k;
                let mut f = -phi_at(idx, p)? / k;
                if let Some(m) = mass {
                    d -= m / k;
                }
                if let Some(combo) = &combo {
                    f -= combo[idx] / k;
                }
                dv[idx] = d;
                fv[idx] = f;
            }
        }
        CoeffSet::Nonlinear { kappa, kappa_u, alpha, beta, gamma, lambda } => {
            if dim == 3 && gamma.is_none() {
                return Err(Error::Config("3D problems need a gamma coefficient".into()));
            }
            let uk = iterate.ok_or(Error::MissingIterate)?;
            if uk.values.len() != n_total {
                return Err(Error::GridMismatch { expected: n_total, got: uk.values.len() });
            }
            // Gradient of the frozen iterate via the setting's selector.
            let gop = problem.setting.grad.operator();
            let ukx = fd_ops::axis_derivative_field_lenient(grid, &uk.values, 0, gop);
            let uky = fd_ops::axis_derivative_field_lenient(grid, &uk.values, 1, gop);
            let ukz = if dim == 3 {
                Some(fd_ops::axis_derivative_field_lenient(grid, &uk.values, 2, gop))
            } else {
                None
            };
            for node in grid.nodes() {
                let idx = grid.node_offset(node);
                let p = grid.point(node);
                let u = uk.values[idx];
                let k = kappa.value(u)?;
                check_kappa(k, [node.i, node.j, node.k])?;
                let ku = kappa_u.value(u)?;
                av[idx] = (ku * ukx[idx] - alpha.value(u)?) / k;
                bv[idx] = (ku * uky[idx] - beta.value(u)?) / k;
                if let (Some(cvec), Some(g), Some(uz)) = (cv.as_mut(), gamma.as_ref(), &ukz) {
                    cvec[idx] = (ku * uz[idx] - g.value(u)?) / k;
                }
                let mut d = -lambda.value(u)? / k;
                let mut f = -phi_at(idx, p)? / k;
                if let Some(m) = mass {
                    d -= m / k;
                }
                if let Some(combo) = &combo {
                    f -= combo[idx] / k;
                }
                dv[idx] = d;
                fv[idx] = f;
            }
        }
    }

    Ok(SampledValues { a: av, b: bv, c: cv, d: dv, f: fv })
}

/// Differentiate one sampled composite field with the setting's operators.
/// Both stencils consume only pure partials of the normalized coefficients,
/// so mixed partials are not formed here. Nodes whose derivative has no
/// feasible variant (possible at boundary nodes of very coarse grids) are
/// marked NaN; they are only an error if an interior stencil ends up
/// consuming them, which the bundle validation catches afterwards.
fn fd_field(grid: &GridSpec, values: Vec<f64>, setting: &OperatorSetting) -> Result<CoeffField> {
    let d1 = setting.d1.operator();
    let d2 = setting.d2.operator();
    // Probe switch: restrict the differentiation lines to interior indices
    // (experimental comparison of boundary-variant policies).
    let sweep = |vals: &[f64], axis: usize, op: &'static fd_ops::FdOperator| -> Vec<f64> {
        if std::env::var_os("CDR_PROBE_INTERIOR_FD").is_some() {
            interior_subline_sweep(grid, vals, axis, op)
        } else {
            fd_ops::axis_derivative_field_lenient(grid, vals, axis, op)
        }
    };
    let dx = sweep(&values, 0, d1);
    let dy = sweep(&values, 1, d1);
    let dxx = sweep(&values, 0, d2);
    let dyy = sweep(&values, 1, d2);
    let (dz, dzz) = if grid.dim == 3 {
        let dz = sweep(&values, 2, d1);
        let dzz = sweep(&values, 2, d2);
        (dz, dzz)
    } else {
        (vec![], vec![])
    };
    Ok(CoeffField {
        v: values,
        dx,
        dy,
        dz,
        dxx,
        dxy: vec![],
        dxz: vec![],
        dyy,
        dyz: vec![],
        dzz,
    })
}

/// Experimental: differentiate along lines restricted to interior indices
/// 1..=n1-1 (boundary samples unused), boundary entries NaN.
fn interior_subline_sweep(
    grid: &GridSpec,
    values: &[f64],
    axis: usize,
    op: &'static fd_ops::FdOperator,
) -> Vec<f64> {
    let n = grid.n1 + 1;
    let m = n - 2;
    let stride = n.pow(axis as u32);
    let mut out = vec![f64::NAN; grid.num_nodes()];
    let mut bases = Vec::new();
    match (grid.dim, axis) {
        (2, 0) => (0..n).for_each(|j| bases.push(j * n)),
        (2, _) => (0..n).for_each(|i| bases.push(i)),
        (3, 0) => {
            for k in 0..n {
                for j in 0..n {
                    bases.push((k * n + j) * n);
                }
            }
        }
        (3, 1) => {
            for k in 0..n {
                for i in 0..n {
                    bases.push(k * n * n + i);
                }
            }
        }
        _ => {
            for j in 0..n {
                for i in 0..n {
                    bases.push(j * n + i);
                }
            }
        }
    }
    for base in bases {
        for i in 1..(n - 1) {
            out[base + i * stride] =
                fd_ops::apply_strided(op, values, base + stride, stride, m, i - 1, grid.h)
                    .unwrap_or(f64::NAN);
        }
    }
    out
}

fn validate_interior(grid: &GridSpec, bundle: &CoefficientBundle) -> Result<()> {
    let fields = [&bundle.a, &bundle.b, &bundle.d, &bundle.f];
    let all = fields
        .into_iter()
        .chain(bundle.c.as_ref())
        .flat_map(|f| [&f.v, &f.dx, &f.dy, &f.dz, &f.dxx, &f.dyy, &f.dzz])
        .filter(|arr| !arr.is_empty());
    for arr in all {
        for node in grid.interior_nodes() {
            if !arr[grid.node_offset(node)].is_finite() {
                return Err(Error::NoFeasibleVariant { index: node.i, len: grid.n1 + 1 });
            }
        }
    }
    Ok(())
}

/// Analytic path: evaluate a, b, (c,) d, f as jets per node (linear steady
/// problems with closed-form data only).
fn analytic_bundle(problem: &Problem, grid: &GridSpec) -> Result<CoefficientBundle> {
    let (kappa, alpha, beta, gamma, lambda) = match &problem.coeffs {
        CoeffSet::Linear { kappa, alpha, beta, gamma, lambda } => {
            (kappa, alpha, beta, gamma, lambda)
        }
        CoeffSet::Nonlinear { .. } => {
            return Err(Error::Config(
                "analytic derivative mode applies to linear problems only".into(),
            ))
        }
    };
    if problem.kind.is_unsteady() {
        return Err(Error::Config(
            "unsteady bundles take coefficient partials from sampled fields; use fd mode".into(),
        ));
    }
    let dim = grid.dim;
    let n_total = grid.num_nodes();
    let empty = || CoeffField {
        v: vec![0.0; n_total],
        dx: vec![0.0; n_total],
        dy: vec![0.0; n_total],
        dz: if dim == 3 { vec![0.0; n_total] } else { vec![] },
        dxx: vec![0.0; n_total],
        dxy: vec![0.0; n_total],
        dxz: if dim == 3 { vec![0.0; n_total] } else { vec![] },
        dyy: vec![0.0; n_total],
        dyz: if dim == 3 { vec![0.0; n_total] } else { vec![] },
        dzz: if dim == 3 { vec![0.0; n_total] } else { vec![] },
    };
    let mut fa = empty();
    let mut fb = empty();
    let mut fc = if dim == 3 { Some(empty()) } else { None };
    let mut fd = empty();
    let mut ff = empty();

    let store = |field: &mut CoeffField, idx: usize, j: crate::jet::Jet| {
        field.v[idx] = j.value();
        field.dx[idx] = j.deriv(1, 0, 0);
        field.dy[idx] = j.deriv(0, 1, 0);
        field.dxx[idx] = j.deriv(2, 0, 0);
        field.dxy[idx] = j.deriv(1, 1, 0);
        field.dyy[idx] = j.deriv(0, 2, 0);
        if dim == 3 {
            field.dz[idx] = j.deriv(0, 0, 1);
            field.dxz[idx] = j.deriv(1, 0, 1);
            field.dyz[idx] = j.deriv(0, 1, 1);
            field.dzz[idx] = j.deriv(0, 0, 2);
        }
    };

    for node in grid.nodes() {
        let idx = grid.node_offset(node);
        let p = grid.point(node);
        let kj = kappa.jet(p, 0.0, 3)?;
        check_kappa(kj.value(), [node.i, node.j, node.k])?;
        let krec = kj.recip();
        let aj = (kj.deriv_jet(0) - alpha.jet(p, 0.0, 2)?) * krec;
        let bj = (kj.deriv_jet(1) - beta.jet(p, 0.0, 2)?) * krec;
        store(&mut fa, idx, aj);
        store(&mut fb, idx, bj);
        if let (Some(fc), Some(g)) = (fc.as_mut(), gamma.as_ref()) {
            let cj = (kj.deriv_jet(2) - g.jet(p, 0.0, 2)?) * krec;
            store(fc, idx, cj);
        }
        let dj = -(lambda.jet(p, 0.0, 2)?) * krec;
        store(&mut fd, idx, dj);
        let phi = match &problem.source {
            crate::problems::Source::Given(c) => c.jet(p, 0.0, 2)?,
            crate::problems::Source::Manufactured => problem.phi_jet(p, 0.0, 4)?,
        };
        store(&mut ff, idx, -phi * krec);
    }

    Ok(CoefficientBundle { grid: *grid, a: fa, b: fb, c: fc, d: fd, f: ff })
}

fn fd_bundle(
    problem: &Problem,
    grid: &GridSpec,
    ctx: Option<&TimeSliceContext>,
    iterate: Option<&Field>,
    phi: Option<&PhiCache>,
) -> Result<CoefficientBundle> {
    if let Some(ctx) = ctx {
        if iterate.is_none() && closed_form_linear(problem) {
            return linear_unsteady_closed_bundle(problem, grid, ctx);
        }
    }
    let sampled = sample_values(problem, grid, ctx, iterate, phi)?;
    let setting = &problem.setting;
    let bundle = CoefficientBundle {
        grid: *grid,
        a: fd_field(grid, sampled.a, setting)?,
        b: fd_field(grid, sampled.b, setting)?,
        c: match sampled.c {
            Some(c) => Some(fd_field(grid, c, setting)?),
            None => None,
        },
        d: fd_field(grid, sampled.d, setting)?,
        f: fd_field(grid, sampled.f, setting)?,
    };
    validate_interior(grid, &bundle)?;
    Ok(bundle)
}

/// True when every coefficient and the source of a linear problem has a
/// closed form, so the time-level bundle can carry exact partials.
fn closed_form_linear(problem: &Problem) -> bool {
    use crate::problems::{Coeff, Exact, Source};
    let closed = |c: &Coeff| matches!(c, Coeff::Closed(_));
    let coeffs_ok = match &problem.coeffs {
        CoeffSet::Linear { kappa, alpha, beta, gamma, lambda } => {
            closed(kappa)
                && closed(alpha)
                && closed(beta)
                && closed(lambda)
                && gamma.as_ref().is_none_or(closed)
        }
        CoeffSet::Nonlinear { .. } => false,
    };
    let source_ok = match &problem.source {
        Source::Given(c) => closed(c),
        Source::Manufactured => matches!(problem.exact, Some(Exact::Closed { .. })),
    };
    coeffs_ok && source_ok
}

/// Linear unsteady bundle with closed-form data: a, b, (c,) d and the
/// source part of f carry exact partials; the setting's finite-difference
/// operators act only on the history part of f, which has no closed form.
fn linear_unsteady_closed_bundle(
    problem: &Problem,
    grid: &GridSpec,
    ctx: &TimeSliceContext,
) -> Result<CoefficientBundle> {
    use crate::problems::Coeff;
    let (kappa, alpha, beta, gamma, lambda) = match &problem.coeffs {
        CoeffSet::Linear { kappa, alpha, beta, gamma, lambda } => {
            (kappa, alpha, beta, gamma, lambda)
        }
        _ => return Err(Error::Config("closed-form bundle needs linear coefficients".into())),
    };
    ctx.validate(grid)?;
    let t_star = ctx.target_time();
    let tau = ctx.tau;
    let mass = ctx.integrator.mass_coefficient() / tau;
    let dim = grid.dim;
    let n_total = grid.num_nodes();
    let empty = || CoeffField {
        v: vec![0.0; n_total],
        dx: vec![0.0; n_total],
        dy: vec![0.0; n_total],
        dz: if dim == 3 { vec![0.0; n_total] } else { vec![] },
        dxx: vec![0.0; n_total],
        dxy: vec![],
        dxz: vec![],
        dyy: vec![0.0; n_total],
        dyz: vec![],
        dzz: if dim == 3 { vec![0.0; n_total] } else { vec![] },
    };
    let mut fa = empty();
    let mut fb = empty();
    let mut fc = if dim == 3 { Some(empty()) } else { None };
    let mut fd = empty();
    let mut ff = empty();
    let store = |field: &mut CoeffField, idx: usize, j: crate::jet::Jet| {
        field.v[idx] = j.value();
        field.dx[idx] = j.deriv(1, 0, 0);
        field.dy[idx] = j.deriv(0, 1, 0);
        field.dxx[idx] = j.deriv(2, 0, 0);
        field.dyy[idx] = j.deriv(0, 2, 0);
        if dim == 3 {
            field.dz[idx] = j.deriv(0, 0, 1);
            field.dzz[idx] = j.deriv(0, 0, 2);
        }
    };
    let jet_of = |c: &Coeff, p: [f64; 3], ord: usize| c.jet(p, t_star, ord);
    // History part sampled and differentiated with the setting's operators.
    let mut hist_vals = vec![0.0; n_total];
    let mut at_node = vec![0.0; ctx.history.len()];
    for node in grid.nodes() {
        let idx = grid.node_offset(node);
        let p = grid.point(node);
        for (s, f) in at_node.iter_mut().zip(&ctx.history) {
            *s = f.values[idx];
        }
        let combo = ctx.integrator.history_combination(tau, &at_node);
        let k = kappa.value(p, t_star)?;
        check_kappa(k, [node.i, node.j, node.k])?;
        hist_vals[idx] = -combo / k;
    }
    let hist = fd_field(grid, hist_vals, &problem.setting)?;
    for node in grid.nodes() {
        let idx = grid.node_offset(node);
        let p = grid.point(node);
        let kj = jet_of(kappa, p, 3)?;
        let krec = kj.recip();
        store(&mut fa, idx, (kj.deriv_jet(0) - jet_of(alpha, p, 2)?) * krec);
        store(&mut fb, idx, (kj.deriv_jet(1) - jet_of(beta, p, 2)?) * krec);
        if let (Some(fc), Some(g)) = (fc.as_mut(), gamma.as_ref()) {
            store(fc, idx, (kj.deriv_jet(2) - jet_of(g, p, 2)?) * krec);
        }
        store(&mut fd, idx, -(jet_of(lambda, p, 2)? + mass) * krec);
        let phi = match &problem.source {
            crate::problems::Source::Given(c) => c.jet(p, t_star, 2)?,
            crate::problems::Source::Manufactured => problem.phi_jet(p, t_star, 4)?,
        };
        store(&mut ff, idx, -phi * krec);
    }
    // Add the history-part FD partials onto the analytic source part.
    let add = |dst: &mut Vec<f64>, src: &Vec<f64>| {
        for (d, s) in dst.iter_mut().zip(src) {
            *d += s;
        }
    };
    add(&mut ff.v, &hist.v);
    add(&mut ff.dx, &hist.dx);
    add(&mut ff.dy, &hist.dy);
    add(&mut ff.dxx, &hist.dxx);
    add(&mut ff.dyy, &hist.dyy);
    if dim == 3 {
        add(&mut ff.dz, &hist.dz);
        add(&mut ff.dzz, &hist.dzz);
    }
    let bundle = CoefficientBundle { grid: *grid, a: fa, b: fb, c: fc, d: fd, f: ff };
    validate_interior(grid, &bundle)?;
    Ok(bundle)
}

/// Build the coefficient bundle for a steady problem. Nonlinear kinds
/// require the frozen iterate on the full grid.
pub fn bundle_steady(
    problem: &Problem,
    grid: &GridSpec,
    iterate: Option<&Field>,
) -> Result<CoefficientBundle> {
    bundle_steady_with_phi(problem, grid, iterate, None)
}

/// [`bundle_steady`] with an optional pre-sampled source: the fixed-point
/// loops reuse one phi sampling across all inner iterations.
pub fn bundle_steady_with_phi(
    problem: &Problem,
    grid: &GridSpec,
    iterate: Option<&Field>,
    phi: Option<&PhiCache>,
) -> Result<CoefficientBundle> {
    match (problem.kind, problem.deriv_mode) {
        (Kind::LinearSteady, DerivMode::Analytic) => analytic_bundle(problem, grid),
        (Kind::LinearSteady, DerivMode::Fd) => fd_bundle(problem, grid, None, None, phi),
        (Kind::NonlinearSteady, _) => fd_bundle(problem, grid, None, iterate, phi),
        _ => Err(Error::Config("bundle_steady needs a steady problem kind".into())),
    }
}

/// Build the coefficient bundle for one implicit level of an unsteady
/// problem. The mass term is absorbed into d and the history into f.
pub fn bundle_unsteady(
    problem: &Problem,
    grid: &GridSpec,
    ctx: &TimeSliceContext,
    iterate: Option<&Field>,
) -> Result<CoefficientBundle> {
    bundle_unsteady_with_phi(problem, grid, ctx, iterate, None)
}

/// [`bundle_unsteady`] with an optional pre-sampled source for the target
/// time level.
pub fn bundle_unsteady_with_phi(
    problem: &Problem,
    grid: &GridSpec,
    ctx: &TimeSliceContext,
    iterate: Option<&Field>,
    phi: Option<&PhiCache>,
) -> Result<CoefficientBundle> {
    match problem.kind {
        Kind::LinearUnsteady => fd_bundle(problem, grid, Some(ctx), None, phi),
        Kind::NonlinearUnsteady => fd_bundle(problem, grid, Some(ctx), iterate, phi),
        _ => Err(Error::Config("bundle_unsteady needs an unsteady problem kind".into())),
    }
}
