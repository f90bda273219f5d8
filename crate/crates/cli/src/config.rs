use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use framecheck::surface::{ParamPoint, Rect, SurfaceImmersion};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every check name the tolerance map may refer to, with its default threshold.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("structure_dtheta1", 1e-5),
    ("structure_dtheta2", 1e-5),
    ("structure_domega12", 1e-5),
    ("structure_domega13", 1e-5),
    ("structure_domega23", 1e-5),
    ("gauss_equation", 1e-5),
    ("connection_principal", 1e-5),
    ("connection_alpha", 1e-5),
    ("alpha_principal_consistency", 1e-10),
    ("eta1_closed", 1e-5),
    ("eta2_closed", 1e-5),
    ("sec_theta1_closed", 1e-5),
    ("csc_theta2_closed", 1e-5),
    ("sine_gordon", 1e-3),
    ("connection_eta", 1e-4),
    ("flow_commutation", 1e-6),
    ("net_inverse", 1e-6),
    ("jacobian_determinant", 1e-12),
    ("area_two_ways", 1e-4),
    ("corner_area_bound", 1.0),
    ("mobius_invariance", 1e-12),
    ("disk_area", 1e-6),
    ("picard_integral", 1e-6),
];

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceConfig {
    Pseudosphere {
        #[serde(default = "default_u_cut")]
        u_cut: f64,
        #[serde(default = "default_twist")]
        twist: f64,
        #[serde(default = "default_warp")]
        warp: f64,
    },
    Dini {
        #[serde(default = "default_dini_a")]
        a: f64,
        #[serde(default = "default_dini_b")]
        b: f64,
    },
    Sphere {
        #[serde(default = "one")]
        radius: f64,
    },
    Plane,
    Custom {
        x: String,
        y: String,
        z: String,
        domain: [f64; 4],
    },
}

fn default_u_cut() -> f64 {
    0.2
}
fn default_twist() -> f64 {
    0.5
}
fn default_warp() -> f64 {
    0.1
}
fn default_dini_a() -> f64 {
    0.8
}
fn default_dini_b() -> f64 {
    0.6
}
fn one() -> f64 {
    1.0
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig::Pseudosphere {
            u_cut: default_u_cut(),
            twist: default_twist(),
            warp: default_warp(),
        }
    }
}

impl SurfaceConfig {
    pub fn build(&self) -> Result<SurfaceImmersion, CliError> {
        let s = match self {
            SurfaceConfig::Pseudosphere { u_cut, twist, warp } => SurfaceImmersion::pseudosphere(*u_cut, *twist, *warp),
            SurfaceConfig::Dini { a, b } => SurfaceImmersion::dini(*a, *b),
            SurfaceConfig::Sphere { radius } => SurfaceImmersion::sphere(*radius),
            SurfaceConfig::Plane => Ok(SurfaceImmersion::plane()),
            SurfaceConfig::Custom { x, y, z, domain } => {
                let d = Rect::new(domain[0], domain[1], domain[2], domain[3]).map_err(|e| CliError::config("surface.domain", e))?;
                SurfaceImmersion::custom(x, y, z, d)
            }
        };
        s.map_err(|e| CliError::config("surface", e))
    }

    fn default_patch(&self, surface: &SurfaceImmersion) -> Rect {
        if matches!(self, SurfaceConfig::Pseudosphere { .. }) {
            let r = Rect::new(1.0, 1.2, 0.0, 0.2).expect("static rectangle");
            if surface.domain().contains_rect(&r) {
                return r;
            }
        }
        let d = surface.domain();
        let (cu, cv) = (0.5 * (d.u_min + d.u_max), 0.5 * (d.v_min + d.v_max));
        let half = 0.1f64.min(0.25 * (d.u_max - d.u_min)).min(0.25 * (d.v_max - d.v_min));
        Rect::new(cu - half, cu + half, cv - half, cv + half).expect("non-empty rectangle")
    }

    fn default_origin(&self, surface: &SurfaceImmersion) -> [f64; 2] {
        let d = surface.domain();
        let p = [1.5, 0.0];
        if matches!(self, SurfaceConfig::Pseudosphere { .. }) && d.contains(ParamPoint::new(p[0], p[1])) {
            return p;
        }
        [0.5 * (d.u_min + d.u_max), 0.5 * (d.v_min + d.v_max)]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Finest spacing; the coarse level uses `2h`.
    pub h: Option<f64>,
    /// Alternative to `h`: intervals along `u` at the finest level.
    pub n: Option<usize>,
    /// `[u_min, u_max, v_min, v_max]`.
    pub domain: Option<[f64; 4]>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    pub origin: Option<[f64; 2]>,
    pub a: Option<f64>,
    pub n: Option<usize>,
    /// Lattice points used for the commutation and inverse checks.
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HyperbolicConfig {
    pub radii: Option<Vec<f64>>,
    pub resolution: Option<usize>,
    pub samples: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub net: NetConfig,
    #[serde(default)]
    pub hyperbolic: HyperbolicConfig,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Allowed window for two-level convergence rates.
    pub rate_window: Option<[f64; 2]>,
    pub output: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Parse {
                field: path,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })
    }
}

/// Config with defaults filled in and cross-field invariants checked.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub surface: SurfaceImmersion,
    pub patch: Rect,
    pub h: f64,
    pub origin: ParamPoint,
    pub a: f64,
    pub n: usize,
    pub samples: usize,
    pub radii: Vec<f64>,
    pub resolution: usize,
    pub disk_samples: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub rate_window: [f64; 2],
    pub output: PathBuf,
    pub formats: Vec<Format>,
    pub seed: u64,
}

impl Resolved {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        let surface = config.surface.build()?;
        let patch = match config.grid.domain {
            Some(d) => Rect::new(d[0], d[1], d[2], d[3]).map_err(|e| CliError::config("grid.domain", e))?,
            None => config.surface.default_patch(&surface),
        };
        if !surface.domain().contains_rect(&patch) {
            let d = surface.domain();
            return Err(CliError::invalid(
                "grid.domain",
                format!(
                    "[{}, {}] x [{}, {}] is not inside the surface domain [{}, {}] x [{}, {}]",
                    patch.u_min, patch.u_max, patch.v_min, patch.v_max, d.u_min, d.u_max, d.v_min, d.v_max
                ),
            ));
        }
        let h = match (config.grid.h, config.grid.n) {
            (Some(_), Some(_)) => return Err(CliError::invalid("grid", "give either h or n, not both")),
            (Some(h), None) if h > 0.0 && h.is_finite() => h,
            (Some(h), None) => return Err(CliError::invalid("grid.h", format!("must be positive, got {h}"))),
            (None, Some(n)) if n >= 4 => (patch.u_max - patch.u_min) / n as f64,
            (None, Some(n)) => return Err(CliError::invalid("grid.n", format!("must be at least 4, got {n}"))),
            (None, None) => 1e-3,
        };

        let o = config.net.origin.unwrap_or_else(|| config.surface.default_origin(&surface));
        let origin = ParamPoint::new(o[0], o[1]);
        if !surface.domain().contains(origin) {
            return Err(CliError::invalid("net.origin", format!("({}, {}) is outside the surface domain", o[0], o[1])));
        }
        let a = config.net.a.unwrap_or(0.5);
        if !(a >= 0.0 && a.is_finite()) {
            return Err(CliError::invalid("net.a", format!("must be non-negative, got {a}")));
        }
        let n = config.net.n.unwrap_or(100);
        if a > 0.0 && (n < 4 || n % 2 != 0) {
            return Err(CliError::invalid("net.n", format!("must be even and at least 4, got {n}")));
        }
        let samples = config.net.samples.unwrap_or(50);

        let radii = config
            .hyperbolic
            .radii
            .clone()
            .unwrap_or_else(|| vec![0.3, 0.5, 1.0 / 3f64.sqrt(), 0.9, 0.99, 0.999]);
        if let Some(t) = radii.iter().find(|t| !(**t >= 0.0 && **t < 1.0)) {
            return Err(CliError::invalid("hyperbolic.radii", format!("radii must lie in [0, 1), got {t}")));
        }
        let resolution = config.hyperbolic.resolution.unwrap_or(200_000);
        if resolution < 2 {
            return Err(CliError::invalid("hyperbolic.resolution", "must be at least 2"));
        }
        let disk_samples = config.hyperbolic.samples.unwrap_or(1000);

        let mut tolerances: BTreeMap<String, f64> =
            DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in &config.tolerances {
            if !tolerances.contains_key(k) {
                return Err(CliError::invalid(&format!("tolerances.{k}"), "unknown check name"));
            }
            if !(*v >= 0.0) {
                return Err(CliError::invalid(&format!("tolerances.{k}"), format!("must be non-negative, got {v}")));
            }
            tolerances.insert(k.clone(), *v);
        }
        let rate_window = config.rate_window.unwrap_or([3.0, 5.0]);
        if !(rate_window[0] <= rate_window[1]) {
            return Err(CliError::invalid("rate_window", "lower bound exceeds upper bound"));
        }
        let mut formats = config.formats.clone().unwrap_or_else(|| vec![Format::Csv, Format::Json]);
        formats.sort();
        formats.dedup();
        Ok(Self {
            output: config.output.clone().unwrap_or_else(|| PathBuf::from("framecheck-out")),
            seed: config.seed.unwrap_or(7),
            config,
            surface,
            patch,
            h,
            origin,
            a,
            n,
            samples,
            radii,
            resolution,
            disk_samples,
            tolerances,
            rate_window,
            formats,
        })
    }

    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances[check]
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}
