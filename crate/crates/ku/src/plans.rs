//! Pole plans from files or named strategies, and function names.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ku_core::arnoldi::Repetition;
use ku_core::poles::{
    exp_single_pole, extended_plan, leja_order, markov_single_pole, quasi_optimal_poles,
    zolotarev_inv_sqrt_poles, zolotarev_sign_poles,
};
use ku_core::{FunctionSpec, Pole, PolePlan, SpectralWindow, C64};

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("pole file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown pole strategy `{0}`")]
    UnknownStrategy(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("strategy `{strategy}` needs {what}")]
    MissingContext {
        strategy: String,
        what: &'static str,
    },
    #[error(transparent)]
    Core(#[from] ku_core::Error),
}

/// What `--poles` asked for.
#[derive(Clone, Debug, PartialEq)]
pub enum PoleSpec {
    File(PathBuf),
    /// Polynomial Krylov: every pole infinite.
    Infinite,
    /// The single asymptotically optimal pole for a Markov function.
    Single,
    Quasi(usize),
    ZolotarevSign(usize),
    ZolotarevInvSqrt(usize),
    Exp(usize),
    Extended,
}

fn count(name: &str, param: Option<&str>) -> Result<usize, PlanError> {
    let p =
        param.ok_or_else(|| PlanError::UnknownStrategy(format!("{name} (missing :<count>)")))?;
    match p.parse::<usize>() {
        Ok(k) if k > 0 => Ok(k),
        _ => Err(PlanError::UnknownStrategy(format!("{name}:{p}"))),
    }
}

impl FromStr for PoleSpec {
    type Err = PlanError;

    /// Strategy names are matched first; anything else is a file path.
    fn from_str(s: &str) -> Result<Self, PlanError> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        Ok(match name {
            "inf" if param.is_none() => PoleSpec::Infinite,
            "single" if param.is_none() => PoleSpec::Single,
            "extended" if param.is_none() => PoleSpec::Extended,
            "quasi" => PoleSpec::Quasi(count(name, param)?),
            "zolo-sign" => PoleSpec::ZolotarevSign(count(name, param)?),
            "zolo-invsqrt" => PoleSpec::ZolotarevInvSqrt(count(name, param)?),
            "exp" => PoleSpec::Exp(count(name, param)?),
            _ => PoleSpec::File(PathBuf::from(s)),
        })
    }
}

/// Spectral information a strategy may need.
#[derive(Clone, Debug, Default)]
pub struct PlanContext {
    pub window: Option<SpectralWindow>,
    /// Smallest and largest eigenvalue modulus, for Zolotarev strategies.
    pub gap: Option<(f64, f64)>,
    pub function: Option<FunctionSpec>,
}

impl PoleSpec {
    /// Every plan is cyclic; named pole sets are put in Leja order first.
    pub fn resolve(&self, ctx: &PlanContext) -> Result<PolePlan, PlanError> {
        let missing = |what| PlanError::MissingContext {
            strategy: self.label(),
            what,
        };
        let window = || {
            ctx.window
                .as_ref()
                .ok_or_else(|| missing("a Hermitian spectral window"))
        };
        let support = || {
            ctx.function
                .as_ref()
                .and_then(|f| f.markov_support())
                .ok_or_else(|| missing("a Markov function"))
        };
        let gap = || ctx.gap.ok_or_else(|| missing("a Hermitian spectral gap"));
        let plan = match self {
            PoleSpec::File(path) => return read_pole_file(path),
            PoleSpec::Infinite => PolePlan::new(vec![Pole::Infinite]),
            PoleSpec::Single => PolePlan::new(vec![markov_single_pole(window()?, support()?)?.0]),
            PoleSpec::Quasi(m) => {
                leja_order(quasi_optimal_poles(window()?, support()?, *m)?.poles())?
            }
            PoleSpec::ZolotarevSign(k) => {
                leja_order(zolotarev_sign_poles(gap()?, k.div_ceil(2))?.poles())?
            }
            PoleSpec::ZolotarevInvSqrt(k) => {
                leja_order(zolotarev_inv_sqrt_poles(gap()?, *k)?.poles())?
            }
            PoleSpec::Exp(m) => exp_single_pole(*m)?,
            PoleSpec::Extended => extended_plan(2)?,
        };
        Ok(plan.with_repetition(Repetition::Cyclic))
    }

    fn label(&self) -> String {
        match self {
            PoleSpec::File(p) => p.display().to_string(),
            PoleSpec::Infinite => "inf".into(),
            PoleSpec::Single => "single".into(),
            PoleSpec::Quasi(m) => format!("quasi:{m}"),
            PoleSpec::ZolotarevSign(k) => format!("zolo-sign:{k}"),
            PoleSpec::ZolotarevInvSqrt(k) => format!("zolo-invsqrt:{k}"),
            PoleSpec::Exp(m) => format!("exp:{m}"),
            PoleSpec::Extended => "extended".into(),
        }
    }
}

/// One pole per line: `inf`, `re` or `re im`; `#` starts a comment.
pub fn parse_poles(text: &str) -> Result<Vec<Pole>, PlanError> {
    let mut poles = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| PlanError::Parse {
                    line,
                    message: format!("not a finite number: {t}"),
                })
        };
        let pole = match tokens.as_slice() {
            [t] if t.eq_ignore_ascii_case("inf") => Pole::Infinite,
            [re] => Pole::real(num(re)?),
            [re, im] => Pole::Finite(C64::new(num(re)?, num(im)?)),
            _ => {
                return Err(PlanError::Parse {
                    line,
                    message: "expected `inf`, `re` or `re im`".into(),
                })
            }
        };
        poles.push(pole);
    }
    if poles.is_empty() {
        return Err(PlanError::Parse {
            line: 0,
            message: "no poles".into(),
        });
    }
    Ok(poles)
}

pub fn read_pole_file(path: &Path) -> Result<PolePlan, PlanError> {
    let text = fs::read_to_string(path).map_err(|source| PlanError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(PolePlan::cyclic(parse_poles(&text)?))
}

/// `exp`, `invsqrt`, `sqrt`, `log1p-over-z`, `inv-power:<gamma>`, `sign`,
/// `inverse`.
pub fn parse_function(s: &str) -> Result<FunctionSpec, PlanError> {
    let unknown = || PlanError::UnknownFunction(s.to_string());
    Ok(match s {
        "exp" => FunctionSpec::exp(),
        "invsqrt" | "inv-sqrt" => FunctionSpec::inv_sqrt(),
        "sqrt" => FunctionSpec::sqrt(),
        "log1p-over-z" => FunctionSpec::log1p_over_z(),
        "sign" => FunctionSpec::sign(),
        "inverse" => FunctionSpec::inverse(),
        _ => {
            let g = s.strip_prefix("inv-power:").ok_or_else(unknown)?;
            let g: f64 = g.parse().map_err(|_| unknown())?;
            FunctionSpec::inv_power(g)
        }
    })
}
