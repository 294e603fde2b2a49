//! Problem definitions: the built-in example catalog and user-configured
//! problems, with manufactured sources, boundary data, and initial data.

use crate::error::{Error, Result};
use crate::expr::{Assignment, Expr};
use crate::fd_ops::{self, D1Scheme, D2Scheme, D3Scheme, FdOperator, OperatorSetting};
use crate::jet::Jet;
use std::sync::Arc;

/// Problem class: linearity in the solution and time dependence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    LinearSteady,
    LinearUnsteady,
    NonlinearSteady,
    NonlinearUnsteady,
}

impl Kind {
    pub fn is_unsteady(self) -> bool {
        matches!(self, Kind::LinearUnsteady | Kind::NonlinearUnsteady)
    }
    pub fn is_nonlinear(self) -> bool {
        matches!(self, Kind::NonlinearSteady | Kind::NonlinearUnsteady)
    }
}

/// How the stencil's coefficient partials are produced: exactly from closed
/// forms, or by finite differences of the sampled composite fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivMode {
    Analytic,
    Fd,
}

/// Closed-form scalar field of (point, time), evaluated as a spatial jet
/// truncated to the requested order.
pub type JetFn = Arc<dyn Fn([f64; 3], f64, usize) -> Jet + Send + Sync>;
pub type UJetFn = Arc<dyn Fn(Jet) -> Jet + Send + Sync>;
pub type ValFn = Arc<dyn Fn([f64; 3], f64) -> f64 + Send + Sync>;

/// A coefficient of (x, y, z, t): closed form with exact derivatives, or a
/// config-file expression (values only; derivatives come from fd_ops).
#[derive(Clone)]
pub enum Coeff {
    Closed(JetFn),
    Expr(Expr),
}

impl Coeff {
    pub fn value(&self, p: [f64; 3], t: f64) -> Result<f64> {
        match self {
            Coeff::Closed(f) => Ok(f(p, t, 0).value()),
            Coeff::Expr(e) => e.eval(&Assignment::point_time(p, t)),
        }
    }

    pub fn jet(&self, p: [f64; 3], t: f64, order: usize) -> Result<Jet> {
        match self {
            Coeff::Closed(f) => Ok(f(p, t, order)),
            Coeff::Expr(_) => Err(Error::Config(
                "analytic derivative mode needs closed-form coefficients".into(),
            )),
        }
    }
}

/// A solution-dependent coefficient for nonlinear problems.
#[derive(Clone)]
pub enum UCoeff {
    Closed(UJetFn),
    Expr(Expr),
}

impl UCoeff {
    pub fn value(&self, u: f64) -> Result<f64> {
        match self {
            UCoeff::Closed(f) => Ok(f(Jet::constant_ord(u, 0)).value()),
            UCoeff::Expr(e) => e.eval(&Assignment::default().with_u(u)),
        }
    }

    fn jet(&self, u: Jet) -> Result<Jet> {
        match self {
            UCoeff::Closed(f) => Ok(f(u)),
            UCoeff::Expr(_) => Err(Error::Config(
                "manufactured sources for nonlinear expression problems use fd_ops".into(),
            )),
        }
    }
}

#[derive(Clone)]
pub enum CoeffSet {
    Linear {
        kappa: Coeff,
        alpha: Coeff,
        beta: Coeff,
        gamma: Option<Coeff>,
        lambda: Coeff,
    },
    Nonlinear {
        kappa: UCoeff,
        kappa_u: UCoeff,
        alpha: UCoeff,
        beta: UCoeff,
        gamma: Option<UCoeff>,
        lambda: UCoeff,
    },
}

#[derive(Clone)]
pub enum Exact {
    Closed { u: JetFn, u_t: JetFn },
    Expr(Expr),
}

#[derive(Clone)]
pub enum Source {
    /// phi derived by substituting the exact solution into the equation.
    Manufactured,
    Given(Coeff),
}

#[derive(Clone)]
pub enum BoundaryData {
    FromExact,
    Given(Coeff),
}

#[derive(Clone)]
pub enum InitialData {
    FromExact,
    Given(Coeff),
}

/// Time-step selection rule for unsteady runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRule {
    /// tau = r * h
    Ratio(f64),
    /// tau = c * h^2
    Quadratic(f64),
    Fixed(f64),
    /// Per-example tabulated (h, tau) pairs.
    Table,
}

#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub dim: usize,
    pub kind: Kind,
    pub l1: f64,
    pub l2: f64,
    pub coeffs: CoeffSet,
    pub source: Source,
    pub exact: Option<Exact>,
    pub boundary: BoundaryData,
    pub initial: Option<InitialData>,
    pub deriv_mode: DerivMode,
    pub setting: OperatorSetting,
    pub t_end: f64,
    /// (h, tau) pairs for TauRule::Table.
    pub tau_table: Vec<(f64, f64)>,
}

impl Problem {
    pub fn is_nonlinear(&self) -> bool {
        self.kind.is_nonlinear()
    }

    pub fn exact_value(&self, p: [f64; 3], t: f64) -> Result<f64> {
        match self.exact.as_ref().ok_or(Error::MissingExactSolution)? {
            Exact::Closed { u, .. } => Ok(u(p, t, 0).value()),
            Exact::Expr(e) => e.eval(&Assignment::point_time(p, t)),
        }
    }

    pub fn exact_jet(&self, p: [f64; 3], t: f64, order: usize) -> Result<Jet> {
        match self.exact.as_ref().ok_or(Error::MissingExactSolution)? {
            Exact::Closed { u, .. } => Ok(u(p, t, order)),
            Exact::Expr(_) => Err(Error::Config(
                "exact solution given as an expression has no closed-form derivatives".into(),
            )),
        }
    }

    /// Dirichlet boundary value at a point and time.
    pub fn g(&self, p: [f64; 3], t: f64) -> Result<f64> {
        match &self.boundary {
            BoundaryData::FromExact => self.exact_value(p, t),
            BoundaryData::Given(c) => c.value(p, t),
        }
    }

    /// Initial field value at t = 0 (unsteady problems).
    pub fn u0(&self, p: [f64; 3]) -> Result<f64> {
        match self.initial.as_ref().ok_or_else(|| {
            Error::Config("unsteady problem needs an initial condition".into())
        })? {
            InitialData::FromExact => self.exact_value(p, 0.0),
            InitialData::Given(c) => c.value(p, 0.0),
        }
    }

    /// Source value phi(p, t). `aux_step` is the spacing of the refined
    /// auxiliary line used when derivatives must be taken numerically
    /// (expression-defined problems).
    pub fn phi(&self, p: [f64; 3], t: f64, aux_step: f64) -> Result<f64> {
        match &self.source {
            Source::Given(c) => c.value(p, t),
            Source::Manufactured => match self.exact.as_ref().ok_or(Error::MissingExactSolution)? {
                Exact::Closed { .. } => Ok(self.phi_jet(p, t, 2)?.value()),
                Exact::Expr(e) => self.phi_from_expr(e, p, t, aux_step),
            },
        }
    }

    /// phi as a spatial jet (closed-form problems only), valid to order
    /// `u_order - 2`. For unsteady kinds only the value is meaningful
    /// because u_t enters as a constant.
    pub fn phi_jet(&self, p: [f64; 3], t: f64, u_order: usize) -> Result<Jet> {
        let exact = self.exact.as_ref().ok_or(Error::MissingExactSolution)?;
        let (u, ut) = match exact {
            Exact::Closed { u, u_t } => (u(p, t, u_order), u_t(p, t, u_order)),
            Exact::Expr(_) => {
                return Err(Error::Config(
                    "phi_jet needs a closed-form exact solution".into(),
                ))
            }
        };
        let axes = self.dim;
        let mut phi = match &self.coeffs {
            CoeffSet::Linear { kappa, alpha, beta, gamma, lambda } => {
                let k = kappa.jet(p, t, u_order)?;
                let mut div = Jet::constant(0.0);
                for ax in 0..axes {
                    div = div + (k * u.deriv_jet(ax)).deriv_jet(ax);
                }
                let mut phi = -div
                    + alpha.jet(p, t, u_order)? * u.deriv_jet(0)
                    + beta.jet(p, t, u_order)? * u.deriv_jet(1)
                    + lambda.jet(p, t, u_order)? * u;
                if let Some(g) = gamma {
                    phi = phi + g.jet(p, t, u_order)? * u.deriv_jet(2);
                }
                phi
            }
            CoeffSet::Nonlinear { kappa, alpha, beta, gamma, lambda, .. } => {
                let k = kappa.jet(u)?;
                let mut div = Jet::constant(0.0);
                for ax in 0..axes {
                    div = div + (k * u.deriv_jet(ax)).deriv_jet(ax);
                }
                let mut phi = -div
                    + alpha.jet(u)? * u.deriv_jet(0)
                    + beta.jet(u)? * u.deriv_jet(1)
                    + lambda.jet(u)? * u;
                if let Some(g) = gamma {
                    phi = phi + g.jet(u)? * u.deriv_jet(2);
                }
                phi
            }
        };
        if self.kind.is_unsteady() {
            phi = phi + ut;
        }
        Ok(phi)
    }

    /// Manufactured phi for an expression-defined exact solution, using
    /// 6-point accuracy-5 operators on a line refined 4x relative to `aux_step*4`.
    fn phi_from_expr(&self, u_expr: &Expr, p: [f64; 3], t: f64, aux_step: f64) -> Result<f64> {
        let axes = self.dim;
        let u_at = |q: [f64; 3], tt: f64| -> Result<f64> {
            u_expr.eval(&Assignment::point_time(q, tt))
        };
        let u = u_at(p, t)?;
        let mut grad = [0.0; 3];
        let mut lap = 0.0;
        for ax in 0..axes {
            grad[ax] = self.expr_spatial_partial(&|q, tt| u_at(q, tt), p, t, ax, 1, aux_step)?;
            lap += self.expr_spatial_partial(&|q, tt| u_at(q, tt), p, t, ax, 2, aux_step)?;
        }
        let ut = if self.kind.is_unsteady() {
            expr_time_derivative(&|tt| u_at(p, tt), t)?
        } else {
            0.0
        };
        match &self.coeffs {
            CoeffSet::Linear { kappa, alpha, beta, gamma, lambda } => {
                let k = kappa.value(p, t)?;
                let mut kgrad = [0.0; 3];
                for ax in 0..axes {
                    kgrad[ax] = self.coeff_spatial_partial(kappa, p, t, ax, 1, aux_step)?;
                }
                let mut phi = ut - (kgrad[0] * grad[0] + kgrad[1] * grad[1] + kgrad[2] * grad[2])
                    - k * lap
                    + alpha.value(p, t)? * grad[0]
                    + beta.value(p, t)? * grad[1]
                    + lambda.value(p, t)? * u;
                if let Some(g) = gamma {
                    phi += g.value(p, t)? * grad[2];
                }
                Ok(phi)
            }
            CoeffSet::Nonlinear { kappa, kappa_u, alpha, beta, gamma, lambda } => {
                // div(kappa(u) grad u) = kappa_u |grad u|^2 + kappa(u) lap u
                let k = kappa.value(u)?;
                let ku = kappa_u.value(u)?;
                let g2: f64 = grad.iter().take(axes).map(|v| v * v).sum();
                let mut phi = ut - ku * g2 - k * lap
                    + alpha.value(u)? * grad[0]
                    + beta.value(u)? * grad[1]
                    + lambda.value(u)? * u;
                if let Some(g) = gamma {
                    phi += g.value(u)? * grad[2];
                }
                Ok(phi)
            }
        }
    }

    fn expr_spatial_partial(
        &self,
        f: &dyn Fn([f64; 3], f64) -> Result<f64>,
        p: [f64; 3],
        t: f64,
        axis: usize,
        order: usize,
        step: f64,
    ) -> Result<f64> {
        let op: &'static FdOperator = match order {
            1 => &fd_ops::D1_ORDER5,
            _ => &fd_ops::D2_ORDER4,
        };
        let rv = fd_ops::select_variant_continuous(op, p[axis], self.l1, self.l2, step)?;
        let mut acc = 0.0;
        for (off, w) in rv.offsets().zip(rv.weights()) {
            let mut q = p;
            q[axis] += off as f64 * step;
            acc += w * f(q, t)?;
        }
        Ok(acc / step.powi(order as i32))
    }

    /// Numerical spatial partial of a coefficient given as an expression or
    /// closed form (closed forms short-circuit to the exact jet).
    pub fn coeff_spatial_partial(
        &self,
        c: &Coeff,
        p: [f64; 3],
        t: f64,
        axis: usize,
        order: usize,
        step: f64,
    ) -> Result<f64> {
        match c {
            Coeff::Closed(f) => {
                let j = f(p, t, 2);
                Ok(match (axis, order) {
                    (0, 1) => j.deriv(1, 0, 0),
                    (1, 1) => j.deriv(0, 1, 0),
                    (2, 1) => j.deriv(0, 0, 1),
                    (0, _) => j.deriv(2, 0, 0),
                    (1, _) => j.deriv(0, 2, 0),
                    _ => j.deriv(0, 0, 2),
                })
            }
            Coeff::Expr(e) => self.expr_spatial_partial(
                &|q, tt| e.eval(&Assignment::point_time(q, tt)),
                p,
                t,
                axis,
                order,
                step,
            ),
        }
    }
}

/// d/dt of a scalar function of time by a one-sided-aware accuracy-5
/// stencil on a fixed fine step; only used for expression-defined unsteady
/// problems.
fn expr_time_derivative(f: &dyn Fn(f64) -> Result<f64>, t: f64) -> Result<f64> {
    let step = 1.0 / 1024.0;
    let rv = fd_ops::select_variant_continuous(&fd_ops::D1_ORDER5, t, 0.0, f64::INFINITY, step)?;
    let mut acc = 0.0;
    for (off, w) in rv.offsets().zip(rv.weights()) {
        acc += w * f(t + off as f64 * step)?;
    }
    Ok(acc / step)
}

fn setting(d1: D1Scheme, d2: D2Scheme, d3: D3Scheme, grad: D1Scheme) -> OperatorSetting {
    OperatorSetting { d1, d2, d3, grad }
}

/// The operator settings tabulated for one example, `default` indexing into it.
pub struct ExampleSettings {
    pub list: Vec<OperatorSetting>,
    pub default: usize,
}

/// Per-example table settings, matching the reference setting columns.
pub fn example_settings(example: u8) -> ExampleSettings {
    use D1Scheme as G1;
    use D2Scheme as G2;
    use D3Scheme as G3;
    match example {
        2 => ExampleSettings {
            list: vec![setting(G1::Order2, G2::Order2, G3::Order1, G1::Order2)],
            default: 0,
        },
        3 | 7 => ExampleSettings {
            list: vec![
                setting(G1::Order2, G2::Order2, G3::Order1, G1::Order3),
                setting(G1::Order3, G2::Order43, G3::Order2, G1::Order4),
                setting(G1::Order4, G2::Order4, G3::Order3, G1::Order5),
            ],
            default: 1,
        },
        4 => ExampleSettings {
            list: vec![setting(G1::Order4, G2::Order43, G3::Order2, G1::Order4)],
            default: 0,
        },
        6 => ExampleSettings {
            list: vec![
                setting(G1::Order2, G2::Order2, G3::Order1, G1::Order2),
                setting(G1::Order3, G2::Order2, G3::Order1, G1::Order3),
                setting(G1::Order4, G2::Order43, G3::Order2, G1::Order4),
                setting(G1::Order5, G2::Order4, G3::Order3, G1::Order5),
            ],
            default: 0,
        },
        8 => ExampleSettings {
            list: vec![setting(G1::Order3, G2::Order43, G3::Order2, G1::Order4)],
            default: 0,
        },
        _ => ExampleSettings { list: vec![OperatorSetting::default()], default: 0 },
    }
}

/// Default time integrator for the unsteady examples.
pub fn example_default_scheme(example: u8) -> Option<crate::coefficients::Integrator> {
    use crate::coefficients::Integrator::*;
    match example {
        2 => Some(Bdf3),
        4 => Some(Bdf4),
        6 => Some(Bdf3),
        8 => Some(Bdf4),
        _ => None,
    }
}

fn jet2(f: impl Fn(Jet, Jet, f64) -> Jet + Send + Sync + 'static) -> JetFn {
    Arc::new(move |p, t, ord| {
        let (x, y, _) = Jet::coords_ord(p, ord);
        f(x, y, t)
    })
}

fn jet3(f: impl Fn(Jet, Jet, Jet, f64) -> Jet + Send + Sync + 'static) -> JetFn {
    Arc::new(move |p, t, ord| {
        let (x, y, z) = Jet::coords_ord(p, ord);
        f(x, y, z, t)
    })
}

fn ujet(f: impl Fn(Jet) -> Jet + Send + Sync + 'static) -> UJetFn {
    Arc::new(f)
}

/// Build one of the eight built-in problems. Settings default to the column
/// used by the reference convergence tables.
pub fn example(n: u8) -> Problem {
    let settings = example_settings(n);
    let setting = settings.list[settings.default];
    match n {
        1 => Problem {
            name: "example1".into(),
            dim: 2,
            kind: Kind::LinearSteady,
            l1: 0.0,
            l2: 1.0,
            coeffs: CoeffSet::Linear {
                kappa: Coeff::Closed(jet2(|x, y, _| {
                    ((x * 4.0).sin() * (y * 4.0).cos() + 3.0).recip()
                })),
                alpha: Coeff::Closed(jet2(|x, y, _| x.cos() * y.cos())),
                beta: Coeff::Closed(jet2(|x, y, _| x.sin() * y.sin())),
                gamma: None,
                lambda: Coeff::Closed(jet2(|x, y, _| (x + y * 2.0).exp())),
            },
            source: Source::Manufactured,
            exact: Some(Exact::Closed {
                u: jet2(|x, y, _| (x - y * 2.0).exp() * (x * 8.0 + y * 4.0).cos()),
                u_t: Arc::new(|_, _, _| Jet::constant(0.0)),
            }),
            boundary: BoundaryData::FromExact,
            initial: None,
            deriv_mode: DerivMode::Analytic,
            setting,
            t_end: 1.0,
            tau_table: vec![],
        },
        2 => Problem {
            name: "example2".into(),
            dim: 2,
            kind: Kind::LinearUnsteady,
            l1: 0.0,
            l2: 1.0,
            coeffs: CoeffSet::Linear {
                kappa: Coeff::Closed(jet2(|x, y, t| (x * 2.0 - y + t).exp())),
                alpha: Coeff::Closed(jet2(|x, y, t| (x.cos() * y.cos()).scale(t.sin()))),
                beta: Coeff::Closed(jet2(|x, y, t| (x.sin() * y.sin()).scale(t.cos()))),
                gamma: None,
                lambda: Coeff::Closed(jet2(|x, y, t| (x - y).exp() * (-x + t).sin())),
            },
            source: Source::Manufactured,
            exact: Some(Exact::Closed {
                u: jet2(|x, y, t| ((x * 100.0).sin() * (y * 100.0).sin()).scale(t.exp())),
                u_t: jet2(|x, y, t| ((x * 100.0).sin() * (y * 100.0).sin()).scale(t.exp())),
            }),
            boundary: BoundaryData::FromExact,
            initial: Some(InitialData::FromExact),
            deriv_mode: DerivMode::Fd,
            setting,
            t_end: 1.0,
            tau_table: (2..=8)
                .map(|k| ((0.5f64).powi(k), (0.5f64).powi(2 * k - 2)))
                .collect(),
        },
        3 => Problem {
            name: "example3".into(),
            dim: 2,
            kind: Kind::NonlinearSteady,
            l1: 0.0,
            l2: 1.0,
            coeffs: CoeffSet::Nonlinear {
                kappa: UCoeff::Closed(ujet(|u| u.exp().scale(1e-4))),
                kappa_u: UCoeff::Closed(ujet(|u| u.exp().scale(1e-4))),
                alpha: UCoeff::Closed(ujet(|u| u * u)),
                beta: UCoeff::Closed(ujet(|u| u.powi(3))),
                gamma: None,
                lambda: UCoeff::Closed(ujet(|u| u.neg().exp())),
            },
            source: Source::Manufactured,
            exact: Some(Exact::Closed {
                u: jet2(|x, y, _| x.sin() * y.sin()),
                u_t: Arc::new(|_, _, _| Jet::constant(0.0)),
            }),
            boundary: BoundaryData::FromExact,
            initial: None,
            deriv_mode: DerivMode::Fd,
            setting,
            t_end: 1.0,
            tau_table: vec![],
        },
        4 => Problem {
            name: "example4".into(),
            dim: 2,
            kind: Kind::NonlinearUnsteady,
            l1: 0.0,
            l2: 1.0,
            coeffs: CoeffSet::Nonlinear {
                kappa: UCoeff::Closed(ujet(|u| u.sin() + 2.0)),
                kappa_u: UCoeff::Closed(ujet(|u| u.cos())),
                alpha: UCoeff::Closed(ujet(|u| u.cos())),
                beta: UCoeff::Closed(ujet(|u| u.sin())),
                gamma: None,
                lambda: UCoeff::Closed(ujet(|u| u.scale(3.0).sin())),
            },
            source: Source::Manufactured,
            exact: Some(Exact::Closed {
                u: jet2(|x, y, t| ((x * 2.0).sin() * (y * 2.0).sin()).scale(t.exp())),
                u_t: jet2(|x, y, t| ((x * 2.0).sin() * (y * 2.0).sin()).scale(t.exp())),
            }),
            boundary: BoundaryData::FromExact,
            initial: Some(InitialData::FromExact),
            deriv_mode: DerivMode::Fd,
            setting,
            t_end: 1.0,
            tau_table: vec![],
        },
        5 => Problem {
            name: "example5".into(),
            dim: 3,
            kind: Kind::LinearSteady,
            l1: -1.0,
            l2: 1.0,
            coeffs: CoeffSet::Linear {
                kappa: Coeff::Closed(jet3(|x, y, z, _| (x * y * z).exp())),
                alpha: Coeff::Closed(jet3(|x, y, z, _| x.sin() * y.sin() * z.sin())),
                beta: Coeff::Closed(jet3(|x, y, z, _| x.cos() * y.cos() * z.cos())),
                gamma: Some(Coeff::Closed(jet3(|x, y, z, _| {
                    x * x + (y * y).scale(2.0) + (z * z).scale(4.0)
                }))),
                lambda: Coeff::Closed(jet3(|x, y, z, _| {
                    x.powi(3) + y.powi(3).scale(3.0) + z.powi(3).scale(6.0)
                })),
            },
            source: Source::Manufactured,
            exact: Some(Exact::Closed {
                u: jet3(|x, y, z, _| (x * x - y * y).exp() * z.sin()),
                u_t: Arc::new(|_, _, _| Jet::constant(0.0)),
            }),
            boundary: BoundaryData::FromExact,
            initial: None,
            deriv_mode: DerivMode::Analytic,
            setting,
            t_end: 1.0,
            tau_table: vec![],
        },
        6 => Problem {
            name: "example6".into(),
            dim: 3,
            kind: Kind::LinearUnsteady,
            l1: 0.0,
            l2: 1.0,
            coeffs: CoeffSet::Linear {
                kappa: Coeff::Closed(jet3(|x, y, z, t| {
                    (x * 2.0 - y - z + t).sin() + 2.0
                })),
                alpha: Coeff::Closed(jet3(|x, y, z, t| (x + y + z - t).exp())),
                beta: Coeff::Closed(jet3(|x, y, z, t| (x - y + z + 2.0 * t).exp())),
                gamma: Some(Coeff::Closed(jet3(|x, y, z, t| (x + y + z - 3.0 * t).sin()))),
                lambda: Coeff::Closed(jet3(|x, y, z, t| (x + y + z + 4.0 * t).cos())),
            },
            source: Source::Manufactured,
            exact: Some(Exact::Closed {
                u: jet3(|x, y, z, t| ((x + y - z) * 2.0).cos().scale(t.exp())),
                u_t: jet3(|x, y, z, t| ((x + y - z) * 2.0).cos().scale(t.exp())),
            }),
            boundary: BoundaryData::FromExact,
            initial: Some(InitialData::FromExact),
            deriv_mode: DerivMode::Fd,
            setting,
            t_end: 1.0,
            tau_table: vec![],
        },
        7 => Problem {
            name: "example7".into(),
            dim: 3,
            kind: Kind::NonlinearSteady,
            l1: -1.0,
            l2: 1.0,
            coeffs: CoeffSet::Nonlinear {
                kappa: UCoeff::Closed(ujet(|u| u.exp())),
                kappa_u: UCoeff::Closed(ujet(|u| u.exp())),
                alpha: UCoeff::Closed(ujet(|u| u.sin())),
                beta: UCoeff::Closed(ujet(|u| u.cos())),
                gamma: Some(UCoeff::Closed(ujet(|u| u * u))),
                lambda: UCoeff::Closed(ujet(|u| u.powi(3))),
            },
            source: Source::Manufactured,
            exact: Some(Exact::Closed {
                u: jet3(|x, y, z, _| (x + y - z).cos()),
                u_t: Arc::new(|_, _, _| Jet::constant(0.0)),
            }),
            boundary: BoundaryData::FromExact,
            initial: None,
            deriv_mode: DerivMode::Fd,
            setting,
            t_end: 1.0,
            tau_table: vec![],
        },
        8 => Problem {
            name: "example8".into(),
            dim: 3,
            kind: Kind::NonlinearUnsteady,
            l1: 0.0,
            l2: 1.0,
            coeffs: CoeffSet::Nonlinear {
                kappa: UCoeff::Closed(ujet(|u| u.scale(2.0).exp())),
                kappa_u: UCoeff::Closed(ujet(|u| u.scale(2.0).exp().scale(2.0))),
                alpha: UCoeff::Closed(ujet(|u| u.cos())),
                beta: UCoeff::Closed(ujet(|u| u.sin())),
                gamma: Some(UCoeff::Closed(ujet(|u| u * u))),
                lambda: UCoeff::Closed(ujet(|u| u.cos() + 3.0)),
            },
            source: Source::Manufactured,
            exact: Some(Exact::Closed {
                u: jet3(|x, y, z, t| (x + y - z).cos().scale((-t).exp())),
                u_t: jet3(|x, y, z, t| (x + y - z).cos().scale((-t).exp()).neg()),
            }),
            boundary: BoundaryData::FromExact,
            initial: Some(InitialData::FromExact),
            deriv_mode: DerivMode::Fd,
            setting,
            t_end: 1.0,
            tau_table: vec![],
        },
        _ => panic!("examples are numbered 1 through 8"),
    }
}

/// Default tau rule for an example and integrator.
pub fn example_tau_rule(example: u8, integrator: crate::coefficients::Integrator) -> TauRule {
    use crate::coefficients::Integrator::*;
    match (example, integrator) {
        (2, Cn) => TauRule::Table,
        _ => TauRule::Ratio(1.0),
    }
}
