use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::conditions::{default_eps_int, RcbfParams};
use crate::dynamics::{estimate_lipschitz_with, system_by_name, FieldBounds, SystemSpec, VectorField, DEFAULT_SAFETY_FACTOR};
use crate::geometry::{BoundaryPolicy, Domain, UnsafeSet};
use crate::oracle::{OracleConfig, OutsidePolicy};
use crate::verifier::VerifierConfig;

/// A run configuration as written by the user; every omitted value has a default.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub domain: Option<Domain>,
    pub unsafe_set: UnsafeSet,
    #[serde(default)]
    pub rcbf: RcbfSection,
    pub verifier: VerifierSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcbfSection {
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub dt: Option<f64>,
    pub eps_int: Option<f64>,
    pub lipschitz: Option<f64>,
    pub velocity: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierSection {
    pub r_min: f64,
    pub n_s: Option<usize>,
    pub n_seg: Option<usize>,
    pub max_stage3_iters: Option<usize>,
    pub initial_radius: Option<f64>,
    pub boundary: Option<BoundaryPolicy>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub resolution: Option<Resolution>,
    pub tau: Option<f64>,
    pub dt: Option<f64>,
    pub n_controls: Option<usize>,
    pub outside: Option<OutsidePolicy>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    /// Estimate `L` and `M` by sampling when the system has no closed form (default true).
    pub estimate: Option<bool>,
    pub samples: Option<usize>,
    pub factor: Option<f64>,
}

/// Where the field bounds came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsSource {
    Config,
    Analytic,
    Estimated,
}

/// A configuration with every default filled in; embedded in every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub system: SystemSpec,
    pub domain: Domain,
    pub verifier: VerifierConfig,
    pub oracle: OracleConfig,
    pub field_bounds: FieldBounds,
    pub bounds_source: BoundsSource,
    /// Dotted names of the settings that were not given and took their defaults.
    pub assumed_defaults: Vec<String>,
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub stage3_iters: Option<usize>,
    pub out: Option<PathBuf>,
}

pub struct Resolved {
    pub config: ResolvedConfig,
    pub field: Box<dyn VectorField>,
    pub workers: usize,
    pub out: PathBuf,
}

fn default_domain(field: &dyn VectorField) -> Domain {
    match field.name() {
        "dubins3d" => Domain { lower: vec![-10.0, -10.0, 0.0], upper: vec![10.0, 10.0, 2.0 * PI], periodic: vec![false, false, true] },
        _ => Domain { lower: vec![-1.0; field.dim()], upper: vec![1.0; field.dim()], periodic: Vec::new() },
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn resolve(self, overrides: &Overrides) -> Result<Resolved, CliError> {
        let mut assumed = Vec::new();
        let mut note = |name: &str| assumed.push(name.to_string());
        let cfg_err = |e: &dyn std::fmt::Display| CliError::Config(e.to_string());

        let mut system = self.system;
        for name in system.materialize().map_err(|e| cfg_err(&e))? {
            note(&name);
        }
        let field = system_by_name(&system).map_err(|e| cfg_err(&e))?;

        let mut domain = match self.domain {
            Some(d) => d,
            None => {
                note("domain");
                default_domain(field.as_ref())
            }
        };
        if domain.periodic.is_empty() && !field.periodic_axes().is_empty() && domain.lower.len() == field.dim() {
            note("domain.periodic");
            let mut mask = vec![false; field.dim()];
            for (axis, _) in field.periodic_axes() {
                mask[axis] = true;
            }
            domain.periodic = mask;
        }
        let domain = domain.validated().map_err(|e| cfg_err(&e))?;
        if domain.dim() != field.dim() {
            return Err(CliError::Config(format!("system `{}` has dimension {}, domain {}", field.name(), field.dim(), domain.dim())));
        }

        let seed = match (overrides.seed, self.seed) {
            (Some(s), _) | (None, Some(s)) => s,
            (None, None) => {
                note("seed");
                0
            }
        };

        let r = &self.rcbf;
        let mut pick = |value: Option<f64>, name: &str, default: f64| {
            value.unwrap_or_else(|| {
                note(name);
                default
            })
        };
        let tau = pick(r.tau, "rcbf.tau", 1.0);
        let alpha = pick(r.alpha, "rcbf.alpha", 0.05);
        let beta = pick(r.beta, "rcbf.beta", 0.05);
        let dt = pick(r.dt, "rcbf.dt", tau / 100.0);

        let bounds_cfg = &self.bounds;
        let (field_bounds, bounds_source) = match (r.lipschitz, r.velocity) {
            (Some(l), Some(m)) => (FieldBounds { lipschitz: l, velocity: m, certified: true }, BoundsSource::Config),
            (l, m) => {
                let base = match field.analytic_bounds(&domain) {
                    Some(b) => (b, BoundsSource::Analytic),
                    None if bounds_cfg.estimate.unwrap_or(true) => {
                        let samples = bounds_cfg.samples.unwrap_or(10_000).max(2);
                        let factor = bounds_cfg.factor.unwrap_or(DEFAULT_SAFETY_FACTOR);
                        (estimate_lipschitz_with(field.as_ref(), &domain, samples, seed, factor), BoundsSource::Estimated)
                    }
                    None => {
                        return Err(CliError::Config(format!(
                            "system `{}` has no analytic bounds and estimation is disabled",
                            field.name()
                        )))
                    }
                };
                let mut b = base.0;
                if let Some(l) = l {
                    b.lipschitz = l;
                }
                if let Some(m) = m {
                    b.velocity = m;
                }
                (b, base.1)
            }
        };
        let eps_int = pick(r.eps_int, "rcbf.eps_int", default_eps_int(field_bounds.lipschitz, tau));
        let params = RcbfParams { tau, alpha, beta, lipschitz: field_bounds.lipschitz, velocity: field_bounds.velocity, dt, eps_int };

        let v = &self.verifier;
        let mut count = |value: Option<usize>, name: &str, default: usize| {
            value.unwrap_or_else(|| {
                note(name);
                default
            })
        };
        let n_s = count(v.n_s, "verifier.n_s", 500);
        let n_seg = count(v.n_seg, "verifier.n_seg", 5);
        let max_stage3_iters = overrides.stage3_iters.unwrap_or_else(|| count(v.max_stage3_iters, "verifier.max_stage3_iters", 50));
        let boundary = v.boundary.unwrap_or_else(|| {
            note("verifier.boundary");
            BoundaryPolicy::default()
        });
        let initial_radius = Some(v.initial_radius.unwrap_or_else(|| {
            note("verifier.initial_radius");
            (0..domain.dim()).map(|i| 0.5 * domain.extent(i)).fold(0.0, f64::max)
        }));
        let verifier = VerifierConfig {
            r_min: v.r_min,
            n_s,
            n_seg,
            seed,
            max_stage3_iters,
            unsafe_set: self.unsafe_set,
            params,
            initial_radius,
            boundary,
            workers: 0,
        };
        verifier.validate(&domain, field.as_ref()).map_err(|e| cfg_err(&e))?;

        let o = &self.oracle;
        let resolution = match &o.resolution {
            Some(Resolution::Uniform(n)) => vec![*n; domain.dim()],
            Some(Resolution::PerAxis(v)) => v.clone(),
            None => {
                note("oracle.resolution");
                vec![61; domain.dim()]
            }
        };
        let oracle = OracleConfig {
            resolution,
            tau: o.tau.unwrap_or_else(|| {
                note("oracle.tau");
                tau
            }),
            dt: o.dt.unwrap_or_else(|| {
                note("oracle.dt");
                dt
            }),
            n_controls: o.n_controls.unwrap_or_else(|| {
                note("oracle.n_controls");
                5
            }),
            outside: o.outside.unwrap_or_else(|| {
                note("oracle.outside");
                OutsidePolicy::Escape
            }),
            workers: 0,
        };

        let workers = overrides.workers.or(self.workers).unwrap_or(0);
        let out = overrides.out.clone().or(self.output).unwrap_or_else(|| PathBuf::from("out"));
        let config = ResolvedConfig { system, domain, verifier, oracle, field_bounds, bounds_source, assumed_defaults: assumed };
        Ok(Resolved { config, field, workers, out })
    }
}
