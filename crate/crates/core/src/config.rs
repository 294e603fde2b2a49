//! Problem-config files: user problems posed with expression coefficients,
//! parsed from TOML into a [`Problem`] plus run parameters.

use crate::coefficients::Integrator;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fd_ops::{D1Scheme, D2Scheme, D3Scheme, OperatorSetting};
use crate::problems::{
    BoundaryData, Coeff, CoeffSet, DerivMode, Exact, InitialData, Kind, Problem, Source, TauRule,
    UCoeff,
};
use crate::system::SolveConfig;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub dim: usize,
    pub kind: String,
    pub domain: RawDomain,
    pub coefficients: RawCoefficients,
    pub source: RawSource,
    #[serde(default)]
    pub scheme: Option<RawScheme>,
    #[serde(default)]
    pub setting: Option<RawSetting>,
    #[serde(default)]
    pub solver: Option<RawSolver>,
    #[serde(default)]
    pub study: Option<RawStudy>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDomain {
    pub l1: f64,
    pub l2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCoefficients {
    pub kappa: String,
    pub alpha: String,
    pub beta: String,
    #[serde(default)]
    pub gamma: Option<String>,
    pub lambda: String,
    /// d kappa / d u, required for nonlinear kinds.
    #[serde(default)]
    pub kappa_u: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawSource {
    /// Exact solution; phi, g, u0 are manufactured from it when given.
    #[serde(default)]
    pub exact_u: Option<String>,
    #[serde(default)]
    pub phi: Option<String>,
    #[serde(default)]
    pub g: Option<String>,
    #[serde(default)]
    pub u0: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScheme {
    pub integrator: String,
    /// "ratio:R", "quad:C", or "fixed:V"
    #[serde(default)]
    pub tau: Option<String>,
    #[serde(default)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSetting {
    /// Accuracy tiers: d1 in {2,3,4,5}, d2 in {2,43,4}, d3 in {1,2,3},
    /// grad in {2,3,4,5}.
    #[serde(default)]
    pub d1: Option<u8>,
    #[serde(default)]
    pub d2: Option<u8>,
    #[serde(default)]
    pub d3: Option<u8>,
    #[serde(default)]
    pub grad: Option<u8>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSolver {
    pub method: String,
    #[serde(default)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStudy {
    /// Subdivision counts per axis, e.g. [8, 16, 32].
    pub n1: Vec<usize>,
}

/// Everything a `solve --config` run needs.
pub struct LoadedConfig {
    pub problem: Problem,
    pub scheme: Option<Integrator>,
    pub tau_rule: Option<TauRule>,
    pub solver: Option<SolveConfig>,
    pub n1_list: Vec<usize>,
}

fn parse_expr(name: &str, text: &str) -> Result<Expr> {
    Expr::parse(text).map_err(|e| Error::Config(format!("{name}: {e}")))
}

pub fn parse_tau_rule(text: &str) -> Result<TauRule> {
    let bad = || Error::Config(format!("tau rule `{text}`: expected ratio:R, quad:C, or fixed:V"));
    if let Some(r) = text.strip_prefix("ratio:") {
        return Ok(TauRule::Ratio(r.parse().map_err(|_| bad())?));
    }
    if let Some(c) = text.strip_prefix("quad:") {
        return Ok(TauRule::Quadratic(c.parse().map_err(|_| bad())?));
    }
    if let Some(v) = text.strip_prefix("fixed:") {
        return Ok(TauRule::Fixed(v.parse().map_err(|_| bad())?));
    }
    if text == "table" {
        return Ok(TauRule::Table);
    }
    Err(bad())
}

pub fn parse_integrator(text: &str) -> Result<Integrator> {
    Ok(match text {
        "cn" => Integrator::Cn,
        "bdf3" => Integrator::Bdf3,
        "bdf4" => Integrator::Bdf4,
        other => return Err(Error::Config(format!("unknown integrator `{other}`"))),
    })
}

pub fn parse_solver(method: &str, rel_tol: Option<f64>) -> Result<SolveConfig> {
    let tol = rel_tol.unwrap_or(1e-12);
    if !tol.is_finite() || tol <= 0.0 || tol > 1e-4 {
        return Err(Error::Config(format!("rel_tol {tol} outside (0, 1e-4]")));
    }
    Ok(match method {
        "direct" => SolveConfig::direct(),
        "bicgstab" => SolveConfig::bicgstab(tol),
        "gmres" => SolveConfig::gmres(tol),
        other => return Err(Error::Config(format!("unknown solver `{other}`"))),
    })
}

fn setting_from(raw: &Option<RawSetting>) -> Result<OperatorSetting> {
    let mut s = OperatorSetting::default();
    if let Some(raw) = raw {
        if let Some(d1) = raw.d1 {
            s.d1 = match d1 {
                2 => D1Scheme::Order2,
                3 => D1Scheme::Order3,
                4 => D1Scheme::Order4,
                5 => D1Scheme::Order5,
                o => return Err(Error::Config(format!("d1 tier {o} not in {{2,3,4,5}}"))),
            };
        }
        if let Some(d2) = raw.d2 {
            s.d2 = match d2 {
                2 => D2Scheme::Order2,
                43 => D2Scheme::Order43,
                4 => D2Scheme::Order4,
                o => return Err(Error::Config(format!("d2 tier {o} not in {{2,43,4}}"))),
            };
        }
        if let Some(d3) = raw.d3 {
            s.d3 = match d3 {
                1 => D3Scheme::Order1,
                2 => D3Scheme::Order2,
                3 => D3Scheme::Order3,
                o => return Err(Error::Config(format!("d3 tier {o} not in {{1,2,3}}"))),
            };
        }
        if let Some(g) = raw.grad {
            s.grad = match g {
                2 => D1Scheme::Order2,
                3 => D1Scheme::Order3,
                4 => D1Scheme::Order4,
                5 => D1Scheme::Order5,
                o => return Err(Error::Config(format!("grad tier {o} not in {{2,3,4,5}}"))),
            };
        }
    }
    Ok(s)
}

pub fn load_config(text: &str) -> Result<LoadedConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("TOML parse: {e}")))?;
    if raw.dim != 2 && raw.dim != 3 {
        return Err(Error::Config(format!("dim must be 2 or 3, got {}", raw.dim)));
    }
    if !raw.domain.l1.is_finite() || !raw.domain.l2.is_finite() || raw.domain.l2 <= raw.domain.l1
    {
        return Err(Error::Config("domain needs l2 > l1".into()));
    }
    let kind = match raw.kind.as_str() {
        "linear-steady" => Kind::LinearSteady,
        "linear-unsteady" => Kind::LinearUnsteady,
        "nonlinear-steady" => Kind::NonlinearSteady,
        "nonlinear-unsteady" => Kind::NonlinearUnsteady,
        other => {
            return Err(Error::Config(format!(
                "kind `{other}` not one of linear-steady, linear-unsteady, \
                 nonlinear-steady, nonlinear-unsteady"
            )))
        }
    };
    if raw.dim == 3 && raw.coefficients.gamma.is_none() {
        return Err(Error::Config("3D problems need a gamma coefficient".into()));
    }

    let coeffs = if kind.is_nonlinear() {
        let kappa_u = raw
            .coefficients
            .kappa_u
            .as_deref()
            .ok_or_else(|| Error::Config("nonlinear kinds require kappa_u".into()))?;
        CoeffSet::Nonlinear {
            kappa: UCoeff::Expr(parse_expr("kappa", &raw.coefficients.kappa)?),
            kappa_u: UCoeff::Expr(parse_expr("kappa_u", kappa_u)?),
            alpha: UCoeff::Expr(parse_expr("alpha", &raw.coefficients.alpha)?),
            beta: UCoeff::Expr(parse_expr("beta", &raw.coefficients.beta)?),
            gamma: raw
                .coefficients
                .gamma
                .as_deref()
                .map(|g| Ok::<_, Error>(UCoeff::Expr(parse_expr("gamma", g)?)))
                .transpose()?,
            lambda: UCoeff::Expr(parse_expr("lambda", &raw.coefficients.lambda)?),
        }
    } else {
        CoeffSet::Linear {
            kappa: Coeff::Expr(parse_expr("kappa", &raw.coefficients.kappa)?),
            alpha: Coeff::Expr(parse_expr("alpha", &raw.coefficients.alpha)?),
            beta: Coeff::Expr(parse_expr("beta", &raw.coefficients.beta)?),
            gamma: raw
                .coefficients
                .gamma
                .as_deref()
                .map(|g| Ok::<_, Error>(Coeff::Expr(parse_expr("gamma", g)?)))
                .transpose()?,
            lambda: Coeff::Expr(parse_expr("lambda", &raw.coefficients.lambda)?),
        }
    };

    let exact = raw
        .source
        .exact_u
        .as_deref()
        .map(|u| Ok::<_, Error>(Exact::Expr(parse_expr("exact_u", u)?)))
        .transpose()?;
    let source = match (&raw.source.phi, exact.is_some()) {
        (Some(phi), _) => Source::Given(Coeff::Expr(parse_expr("phi", phi)?)),
        (None, true) => Source::Manufactured,
        (None, false) => {
            return Err(Error::Config("need either exact_u or phi".into()));
        }
    };
    let boundary = match (&raw.source.g, exact.is_some()) {
        (Some(g), _) => BoundaryData::Given(Coeff::Expr(parse_expr("g", g)?)),
        (None, true) => BoundaryData::FromExact,
        (None, false) => return Err(Error::Config("need either exact_u or g".into())),
    };
    let initial = if kind.is_unsteady() {
        Some(match (&raw.source.u0, exact.is_some()) {
            (Some(u0), _) => InitialData::Given(Coeff::Expr(parse_expr("u0", u0)?)),
            (None, true) => InitialData::FromExact,
            (None, false) => return Err(Error::Config("unsteady kinds need exact_u or u0".into())),
        })
    } else {
        None
    };

    let scheme = raw
        .scheme
        .as_ref()
        .map(|s| parse_integrator(&s.integrator))
        .transpose()?;
    if kind.is_unsteady() && scheme.is_none() {
        return Err(Error::Config("unsteady kinds need a [scheme] block".into()));
    }
    let tau_rule = raw
        .scheme
        .as_ref()
        .and_then(|s| s.tau.as_deref())
        .map(parse_tau_rule)
        .transpose()?;
    let t_end = raw.scheme.as_ref().and_then(|s| s.t_end).unwrap_or(1.0);

    let solver = raw
        .solver
        .as_ref()
        .map(|s| parse_solver(&s.method, s.rel_tol))
        .transpose()?;

    let problem = Problem {
        name: "user-config".into(),
        dim: raw.dim,
        kind,
        l1: raw.domain.l1,
        l2: raw.domain.l2,
        coeffs,
        source,
        exact,
        boundary,
        initial,
        deriv_mode: DerivMode::Fd,
        setting: setting_from(&raw.setting)?,
        t_end,
        tau_table: vec![],
    };

    Ok(LoadedConfig {
        problem,
        scheme,
        tau_rule,
        solver,
        n1_list: raw.study.map(|s| s.n1).unwrap_or_else(|| vec![8, 16]),
    })
}
