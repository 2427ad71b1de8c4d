//! One flat JSON object per run. Solver keys go to `SolveConfig`, the rest to
//! `Extras`; flags are applied as key overrides before validation.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use dualwave_core::solver::SolveConfig;
use dualwave_core::{Nonlinearity, NonlinearitySpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[allow(non_snake_case)]
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Extras {
    /// Must match the subcommand when present.
    pub command: Option<String>,
    pub nonlinearity: Option<NonlinearitySpec>,
    /// Exponent of the pure power, or of the subcritical term for `m0`.
    pub p: Option<f64>,
    /// Input field in the `{N, R, M, values}` form.
    pub field: Option<PathBuf>,
    pub field_out: Option<PathBuf>,
    /// Constants of `ρ_a` given directly, e.g. `A = B = 1`.
    pub A: Option<f64>,
    pub B: Option<f64>,
    pub gn_constant: Option<f64>,
    pub sobolev: Option<f64>,
    pub gn_samples: Option<usize>,
    pub zeta0: Option<f64>,
    pub xi: Option<f64>,
    /// `ξ = xi_factor · ξ*` when `xi` is absent.
    pub xi_factor: Option<f64>,
    pub a_lo: Option<f64>,
    pub a_hi: Option<f64>,
    pub scan_points: Option<usize>,
    pub bisection_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solve: SolveConfig,
    pub extras: Extras,
}

fn keys_of<T: Serialize>(value: &T) -> BTreeSet<String> {
    match serde_json::to_value(value) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => BTreeSet::new(),
    }
}

fn typed<T: DeserializeOwned>(map: Map<String, Value>) -> Result<T, CliError> {
    serde_path_to_error::deserialize(Value::Object(map)).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." { "$".to_string() } else { format!("$.{path}") };
        CliError::Config(format!("{at}: {}", e.inner()))
    })
}

/// Parses a flag value as JSON, falling back to a plain string.
pub fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// `key=value` for `--set`.
pub fn parse_assignment(raw: &str) -> Result<(String, Value), CliError> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {raw:?}")))?;
    Ok((k.trim().to_string(), override_value(v.trim())))
}

impl RunConfig {
    pub fn from_value(value: Value, overrides: &[(String, Value)]) -> Result<Self, CliError> {
        let Value::Object(mut map) = value else {
            return Err(CliError::Config("$: the config must be a JSON object".into()));
        };
        for (k, v) in overrides {
            map.insert(k.clone(), v.clone());
        }
        let solve_keys = keys_of(&SolveConfig::default());
        let extra_keys = keys_of(&Extras::default());
        let (mut solve, mut extras) = (Map::new(), Map::new());
        for (k, v) in map {
            if solve_keys.contains(&k) {
                solve.insert(k, v);
            } else if extra_keys.contains(&k) {
                extras.insert(k, v);
            } else {
                return Err(CliError::Config(format!("$.{k}: unknown key")));
            }
        }
        let solve: SolveConfig = typed(solve)?;
        let extras: Extras = typed(extras)?;
        solve.validate().map_err(|e| match e {
            dualwave_core::Error::Config(m) => CliError::Config(format!("$.{m}")),
            other => other.into(),
        })?;
        Ok(RunConfig { solve, extras })
    }

    pub fn load(path: Option<&Path>, overrides: &[(String, Value)]) -> Result<Self, CliError> {
        let value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: invalid JSON: {e}", p.display())))?
            }
            None => Value::Object(Map::new()),
        };
        Self::from_value(value, overrides)
    }

    pub fn check_command(&self, name: &str) -> Result<(), CliError> {
        match &self.extras.command {
            Some(c) if c != name => {
                Err(CliError::Config(format!("$.command: config is for {c:?}, but the subcommand is {name:?}")))
            }
            _ => Ok(()),
        }
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, CliError> {
        match (&self.extras.nonlinearity, self.extras.p) {
            (Some(spec), _) => Ok(Nonlinearity::try_from(spec.clone())?),
            (None, Some(p)) => Ok(Nonlinearity::power(p)?),
            (None, None) => Err(CliError::Config("$.nonlinearity: required (or give p for a pure power)".into())),
        }
    }

    /// Exponent of a pure power, from `p` or a `power` nonlinearity.
    pub fn power_exponent(&self) -> Result<f64, CliError> {
        match (&self.extras.nonlinearity, self.extras.p) {
            (_, Some(p)) => Ok(p),
            (Some(NonlinearitySpec::Power { p }), None) => Ok(*p),
            (Some(_), None) => Err(CliError::Config("$.nonlinearity: this mode needs a pure power".into())),
            (None, None) => Err(CliError::Config("$.p: required".into())),
        }
    }
}

/// `lo:hi:logK` or `lo:hi:linK`, `K` points including both ends.
pub fn parse_a_grid(raw: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Config(format!("--a-grid {raw:?}: {why}"));
    let parts: Vec<&str> = raw.split(':').collect();
    let [lo, hi, spec] = parts[..] else {
        return Err(bad("expected lo:hi:logK or lo:hi:linK"));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad("lo is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad("hi is not a number"))?;
    let (log, count) = if let Some(k) = spec.strip_prefix("log") {
        (true, k)
    } else if let Some(k) = spec.strip_prefix("lin") {
        (false, k)
    } else {
        return Err(bad("spacing must be logK or linK"));
    };
    let k: usize = count.parse().map_err(|_| bad("K is not a positive integer"))?;
    if k == 0 {
        return Err(bad("K must be positive"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0) {
        return Err(bad("masses must be positive"));
    }
    if k == 1 {
        return if lo == hi { Ok(vec![lo]) } else { Err(bad("a single point needs lo = hi")) };
    }
    if !(lo < hi) {
        return Err(bad("need lo < hi"));
    }
    let frac = |i: usize| i as f64 / (k - 1) as f64;
    let grid = (0..k)
        .map(|i| match (i, log) {
            (0, _) => lo,
            (i, _) if i == k - 1 => hi,
            (i, true) => (lo.ln() + frac(i) * (hi.ln() - lo.ln())).exp(),
            (i, false) => lo + frac(i) * (hi - lo),
        })
        .collect();
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn solver_and_extra_keys_are_split() {
        let cfg = RunConfig::from_value(json!({"N": 3, "a": 0.5, "p": 3, "seed": 7}), &[]).unwrap();
        assert_eq!((cfg.solve.dim, cfg.solve.a, cfg.solve.seed), (3, 0.5, 7));
        assert_eq!(cfg.extras.p, Some(3.0));
    }

    #[test]
    fn unknown_key_names_its_path() {
        let err = RunConfig::from_value(json!({"N": 2, "tolerance": 1e-3}), &[]).unwrap_err();
        assert_eq!(err, CliError::Config("$.tolerance: unknown key".into()));
    }

    #[test]
    fn type_errors_carry_the_schema_path() {
        let err = RunConfig::from_value(json!({"nonlinearity": {"variant": "power", "p": "seven"}}), &[]).unwrap_err();
        let CliError::Config(msg) = err else { panic!() };
        assert!(msg.starts_with("$.nonlinearity"), "{msg}");
    }

    #[test]
    fn invalid_values_are_rejected_before_solving() {
        let err = RunConfig::from_value(json!({"tol_G": -1.0}), &[]).unwrap_err();
        let CliError::Config(msg) = err else { panic!() };
        assert!(msg.contains("tol_G"), "{msg}");
    }

    #[test]
    fn overrides_win() {
        let ov = vec![("a".to_string(), json!(2.0))];
        assert_eq!(RunConfig::from_value(json!({"a": 1.0}), &ov).unwrap().solve.a, 2.0);
    }

    #[test]
    fn a_grid_forms() {
        let g = parse_a_grid("0.25:8:log6").unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!((g[0], g[5]), (0.25, 8.0));
        assert!((g[1] - 0.5).abs() < 1e-12 && (g[3] - 2.0).abs() < 1e-12);
        assert_eq!(parse_a_grid("1:3:lin3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_a_grid("2:2:log1").unwrap(), vec![2.0]);
        for bad in ["1:2", "0:1:log3", "2:1:lin3", "1:2:geo3", "1:2:log0"] {
            assert!(parse_a_grid(bad).is_err(), "{bad}");
        }
    }
}
