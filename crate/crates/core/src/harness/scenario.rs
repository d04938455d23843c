//! Typed scenario built from a [`Config`].

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evolve::{Nonlinearity, SolverConfig};
use crate::fields::Line2D;
use crate::grid::{ComplexField, SpectralGrid};
use crate::harness::config::Config;
use crate::initial::{gaussian, plane_modulated_gaussian, random_band_limited};
use crate::interaction::{MAX_CONVOLUTION_N, MAX_PAIRWISE_N, MAX_TENSOR_N};

/// Every key a scenario understands.
pub const KNOWN_KEYS: &[&str] = &[
    "name",
    "dim",
    "p",
    "nonlinearity",
    "grid.n_points",
    "grid.box_length",
    "time.dt",
    "time.t_final",
    "time.observer_stride",
    "initial.family",
    "initial.amplitude",
    "initial.width",
    "initial.center",
    "initial.wavevector",
    "initial.depth",
    "initial.modulation",
    "initial.seed",
    "initial.band",
    "weight.epsilon",
    "weight.line.angle",
    "weight.line.offset",
    "weight.center",
    "weight.n_theta",
    "checks",
    "output.dir",
];

/// Keys accepted by `sweep`.
pub const SWEEPABLE_KEYS: &[&str] = &[
    "p",
    "grid.n_points",
    "grid.box_length",
    "time.dt",
    "time.t_final",
    "time.observer_stride",
    "initial.amplitude",
    "initial.width",
    "initial.depth",
    "initial.seed",
    "initial.band",
    "weight.epsilon",
    "weight.line.angle",
    "weight.line.offset",
    "weight.n_theta",
];

#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    Gaussian {
        amplitude: f64,
        width: f64,
        center: Vec<f64>,
        wavevector: Vec<f64>,
    },
    PlaneModulatedGaussian {
        amplitude: f64,
        width: f64,
        center: Vec<f64>,
        modulation: Vec<f64>,
        depth: f64,
    },
    RandomBandLimited {
        amplitude: f64,
        seed: u64,
        band: f64,
    },
}

impl InitialData {
    pub fn build(&self, grid: &SpectralGrid) -> Result<ComplexField> {
        match self {
            InitialData::Gaussian {
                amplitude,
                width,
                center,
                wavevector,
            } => gaussian(grid, *amplitude, *width, center, wavevector),
            InitialData::PlaneModulatedGaussian {
                amplitude,
                width,
                center,
                modulation,
                depth,
            } => plane_modulated_gaussian(grid, *amplitude, *width, center, modulation, *depth),
            InitialData::RandomBandLimited {
                amplitude,
                seed,
                band,
            } => random_band_limited(grid, *seed, *band, *amplitude),
        }
    }
}

/// Regularization length, absolute or in grid spacings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonPolicy {
    Absolute(f64),
    Spacings(f64),
}

impl EpsilonPolicy {
    pub fn resolve(self, spacing: f64) -> f64 {
        match self {
            EpsilonPolicy::Absolute(e) => e,
            EpsilonPolicy::Spacings(m) => m * spacing,
        }
    }

    /// The numeric part, used as the abscissa of sweep orders.
    pub fn magnitude(self) -> f64 {
        match self {
            EpsilonPolicy::Absolute(e) | EpsilonPolicy::Spacings(e) => e,
        }
    }
}

impl FromStr for EpsilonPolicy {
    type Err = String;

    /// `0.1` is absolute; `2h` and `h` are multiples of the grid spacing.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (number, spacings) = match s.strip_suffix('h') {
            Some("") => ("1", true),
            Some(rest) => (rest, true),
            None => (s, false),
        };
        let v: f64 = number
            .trim()
            .parse()
            .map_err(|_| format!("expected a number or a multiple of h, got `{s}`"))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(format!("epsilon must be non-negative, got `{s}`"));
        }
        Ok(if spacings {
            EpsilonPolicy::Spacings(v)
        } else {
            EpsilonPolicy::Absolute(v)
        })
    }
}

/// Checks a scenario can enable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Conservation,
    LocalLaws,
    Morawetz,
    LinStrauss,
    Pair,
    Line,
    Diag,
    TensorResidual,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Conservation,
        Check::LocalLaws,
        Check::Morawetz,
        Check::LinStrauss,
        Check::Pair,
        Check::Line,
        Check::Diag,
        Check::TensorResidual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Conservation => "conservation",
            Check::LocalLaws => "local-laws",
            Check::Morawetz => "morawetz",
            Check::LinStrauss => "lin-strauss",
            Check::Pair => "pair",
            Check::Line => "line",
            Check::Diag => "diag",
            Check::TensorResidual => "tensor-residual",
        }
    }

    /// The only dimension the check is defined in, if restricted.
    pub fn required_dim(self) -> Option<usize> {
        match self {
            Check::Conservation | Check::LocalLaws => None,
            Check::Morawetz | Check::LinStrauss | Check::Pair => Some(3),
            Check::Line | Check::TensorResidual => Some(2),
            Check::Diag => Some(1),
        }
    }

    pub fn max_n(self) -> Option<usize> {
        match self {
            Check::Pair => Some(MAX_CONVOLUTION_N),
            Check::Line | Check::Diag => Some(MAX_PAIRWISE_N),
            Check::TensorResidual => Some(MAX_TENSOR_N),
            _ => None,
        }
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Check::ALL.iter().map(|c| c.name()).collect();
                format!("unknown check `{s}` (known: {})", names.join(", "))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    pub p: f64,
    pub nonlinearity: Nonlinearity,
    pub n_points: usize,
    pub box_length: f64,
    pub dt: f64,
    pub t_final: f64,
    pub observer_stride: usize,
    pub initial: InitialData,
    pub epsilon: EpsilonPolicy,
    pub line: Line2D,
    pub weight_center: Vec<f64>,
    pub n_theta: usize,
    pub checks: Vec<Check>,
    pub output_dir: Option<PathBuf>,
}

struct Reader<'a> {
    config: &'a Config,
}

fn bad(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.config.get(key)
    }

    fn parsed<T: FromStr>(&self, key: &str, default: Option<T>) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            Some(v) => v
                .parse()
                .map_err(|e: T::Err| bad(key, format!("cannot parse `{v}`: {e}"))),
            None => default.ok_or_else(|| bad(key, "required key is missing")),
        }
    }

    fn vector(&self, key: &str, dim: usize) -> Result<Vec<f64>> {
        let Some(v) = self.raw(key) else {
            return Ok(vec![0.0; dim]);
        };
        let values = v
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| bad(key, format!("cannot parse `{v}`: {e}")))?;
        if values.len() != dim {
            return Err(bad(key, format!("expected {dim} components, got {}", values.len())));
        }
        Ok(values)
    }
}

impl Scenario {
    /// Builds and validates a scenario; the error names the offending key.
    pub fn from_config(config: &Config) -> Result<Scenario> {
        if let Some(key) = config.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(bad(key, "unknown key"));
        }
        let r = Reader { config };
        let dim: usize = r.parsed("dim", None)?;
        if !(1..=3).contains(&dim) {
            return Err(bad("dim", format!("must be 1, 2 or 3, got {dim}")));
        }
        let family = r.raw("initial.family").unwrap_or("gaussian");
        let amplitude = r.parsed("initial.amplitude", Some(1.0))?;
        let width = r.parsed("initial.width", Some(1.0))?;
        let initial = match family {
            "gaussian" => InitialData::Gaussian {
                amplitude,
                width,
                center: r.vector("initial.center", dim)?,
                wavevector: r.vector("initial.wavevector", dim)?,
            },
            "plane-modulated-gaussian" => InitialData::PlaneModulatedGaussian {
                amplitude,
                width,
                center: r.vector("initial.center", dim)?,
                modulation: r.vector("initial.modulation", dim)?,
                depth: r.parsed("initial.depth", Some(0.5))?,
            },
            "random-band-limited" => InitialData::RandomBandLimited {
                amplitude,
                seed: r.parsed("initial.seed", Some(0))?,
                band: r.parsed("initial.band", Some(2.0))?,
            },
            other => return Err(bad("initial.family", format!("unknown family `{other}`"))),
        };
        let angle: f64 = r.parsed("weight.line.angle", Some(0.0))?;
        let offset: f64 = r.parsed("weight.line.offset", Some(0.0))?;
        let checks = match r.raw("checks") {
            None => vec![Check::Conservation],
            Some(list) => {
                let mut out = Vec::new();
                for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let c: Check = name.parse().map_err(|e: String| bad("checks", e))?;
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
                out
            }
        };
        let scenario = Scenario {
            name: r.raw("name").unwrap_or("unnamed").to_string(),
            dim,
            p: r.parsed("p", Some(3.0))?,
            nonlinearity: r.parsed("nonlinearity", Some(Nonlinearity::Defocusing))?,
            n_points: r.parsed("grid.n_points", None)?,
            box_length: r.parsed("grid.box_length", None)?,
            dt: r.parsed("time.dt", None)?,
            t_final: r.parsed("time.t_final", None)?,
            observer_stride: r.parsed("time.observer_stride", Some(1))?,
            initial,
            epsilon: r.parsed("weight.epsilon", Some(EpsilonPolicy::Spacings(2.0)))?,
            line: Line2D::new([-offset * angle.sin(), offset * angle.cos()], angle),
            weight_center: r.vector("weight.center", dim)?,
            n_theta: r.parsed("weight.n_theta", Some(64))?,
            checks,
            output_dir: r.raw("output.dir").map(PathBuf::from),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Dimension restrictions, budgets and solver parameters.
    pub fn validate(&self) -> Result<()> {
        for &c in &self.checks {
            if let Some(d) = c.required_dim() {
                if d != self.dim {
                    return Err(bad(
                        "checks",
                        format!("check `{}` needs dim = {d}, scenario has dim = {}", c.name(), self.dim),
                    ));
                }
            }
            if let Some(max_n) = c.max_n() {
                if self.n_points > max_n {
                    return Err(bad(
                        "grid.n_points",
                        format!("check `{}` supports n_points <= {max_n}, got {}", c.name(), self.n_points),
                    ));
                }
            }
        }
        if self.checks.contains(&Check::Line) && self.n_theta < 4 {
            return Err(bad("weight.n_theta", "must be at least 4"));
        }
        let needs_midpoint = self
            .checks
            .iter()
            .any(|c| matches!(c, Check::LocalLaws | Check::TensorResidual));
        self.grid().map_err(|e| bad("grid.n_points", e.to_string()))?;
        let solver = self.solver_config();
        solver.validate().map_err(|e| bad("time.dt", e.to_string()))?;
        if needs_midpoint && solver.n_steps() < 2 {
            return Err(bad("time.t_final", "local-law checks need at least two steps"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.dim, self.n_points, self.box_length)
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n_points as f64
    }

    pub fn epsilon_value(&self) -> f64 {
        self.epsilon.resolve(self.spacing())
    }

    /// Steps `mid - 1, mid, mid + 1` with `mid = n_steps / 2`.
    pub fn midpoint_steps(&self) -> [usize; 3] {
        let mid = (self.base_solver_config().n_steps() / 2).max(1);
        [mid - 1, mid, mid + 1]
    }

    fn base_solver_config(&self) -> SolverConfig {
        SolverConfig::new(self.p, self.dt, self.t_final, self.observer_stride)
            .with_nonlinearity(self.nonlinearity)
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut config = self.base_solver_config();
        if self
            .checks
            .iter()
            .any(|c| matches!(c, Check::LocalLaws | Check::TensorResidual))
        {
            config = config.with_snapshots(self.midpoint_steps());
        }
        config
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Config {
        Config::parse(
            "dim = 2\ngrid.n_points = 32\ngrid.box_length = 16\ntime.dt = 0.01\ntime.t_final = 0.1\n",
        )
        .unwrap()
    }

    fn key_of(err: Error) -> String {
        match err {
            Error::Config { key, .. } => key,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn defaults() {
        let s = Scenario::from_config(&base()).unwrap();
        assert_eq!(s.checks, vec![Check::Conservation]);
        assert_eq!(s.epsilon, EpsilonPolicy::Spacings(2.0));
        assert!((s.epsilon_value() - 1.0).abs() < 1e-15);
        assert_eq!(s.nonlinearity, Nonlinearity::Defocusing);
    }

    #[test]
    fn errors_name_the_key() {
        let mut c = base();
        c.set("grid.n_pionts", "3").unwrap();
        assert_eq!(key_of(Scenario::from_config(&c).unwrap_err()), "grid.n_pionts");

        let mut c = base();
        c.set("time.dt", "fast").unwrap();
        assert_eq!(key_of(Scenario::from_config(&c).unwrap_err()), "time.dt");

        let mut c = base();
        c.set("initial.center", "1,2,3").unwrap();
        assert_eq!(key_of(Scenario::from_config(&c).unwrap_err()), "initial.center");
    }

    #[test]
    fn dimension_mismatch_names_the_check() {
        let mut c = base();
        c.set("dim", "3").unwrap();
        c.set("checks", "conservation,line").unwrap();
        let err = Scenario::from_config(&c).unwrap_err();
        assert!(err.to_string().contains("`line`"), "{err}");
        assert_eq!(key_of(err), "checks");
    }

    #[test]
    fn budget_is_enforced() {
        let mut c = base();
        c.set("grid.n_points", "128").unwrap();
        c.set("checks", "line").unwrap();
        assert_eq!(key_of(Scenario::from_config(&c).unwrap_err()), "grid.n_points");
    }

    #[test]
    fn epsilon_policies() {
        assert_eq!("h".parse(), Ok(EpsilonPolicy::Spacings(1.0)));
        assert_eq!("4h".parse(), Ok(EpsilonPolicy::Spacings(4.0)));
        assert_eq!("0.25".parse(), Ok(EpsilonPolicy::Absolute(0.25)));
        assert!("-1".parse::<EpsilonPolicy>().is_err());
        assert!("xh".parse::<EpsilonPolicy>().is_err());
    }

    #[test]
    fn line_offset_is_perpendicular() {
        let mut c = base();
        c.set("weight.line.angle", "0.5").unwrap();
        c.set("weight.line.offset", "2").unwrap();
        let s = Scenario::from_config(&c).unwrap();
        let [px, py] = s.line.point;
        let [dx, dy] = s.line.direction();
        assert!((px * dx + py * dy).abs() < 1e-15);
        assert!(((px * px + py * py).sqrt() - 2.0).abs() < 1e-15);
    }
}
