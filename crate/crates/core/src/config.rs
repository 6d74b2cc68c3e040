//! Run configuration: a single TOML document describing the potential, the
//! base points, and every numerical knob, so that a run is a reproducible
//! artifact. Each emitted file embeds the hash of the validated config.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::SpherePoint;
use crate::potential::PotentialSpec;

/// How the potential is specified: exactly one of the three forms.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// Named preset: "quadratic", "zonal", "odd", or "constant".
    pub preset: Option<String>,
    /// Polynomial in x1, x2, x3, e.g. "x1^2 + 2*x2^2 + 3*x3^2".
    pub polynomial: Option<String>,
    /// Explicit harmonic coefficients as (l, m, value) triples.
    pub harmonics: Option<Vec<(usize, i64, f64)>>,
}

impl PotentialConfig {
    pub fn resolve(&self) -> Result<PotentialSpec> {
        let set = [
            self.preset.is_some(),
            self.polynomial.is_some(),
            self.harmonics.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if set != 1 {
            return Err(Error::invalid(
                "potential must set exactly one of: preset, polynomial, harmonics",
            ));
        }
        if let Some(name) = &self.preset {
            return PotentialSpec::preset(name);
        }
        if let Some(text) = &self.polynomial {
            return PotentialSpec::parse_closed_form(text);
        }
        let triples = self.harmonics.as_ref().unwrap();
        PotentialSpec::from_harmonics(triples)
    }
}

/// A base point: either a named preset or an explicit 3-vector
/// (renormalized on load).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Named(String),
    Coords([f64; 3]),
}

impl PointSpec {
    pub fn resolve(&self) -> Result<SpherePoint> {
        match self {
            PointSpec::Named(name) => match name.as_str() {
                "diag" => SpherePoint::new(1.0, 1.0, 1.0),
                "e1" => Ok(SpherePoint::x_axis()),
                "e2" => Ok(SpherePoint::y_axis()),
                "e3" => Ok(SpherePoint::z_axis()),
                other => Err(Error::invalid(format!(
                    "unknown point preset '{other}' (expected diag, e1, e2, or e3)"
                ))),
            },
            PointSpec::Coords([x, y, z]) => SpherePoint::new(*x, *y, *z),
        }
    }
}

/// Numerical tolerances, recorded in every report header.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Maximum admissible relative energy drift along a flow trajectory.
    pub energy_drift: f64,
    /// Eigenpair residual budget, relative to 1 + lambda^2.
    pub eigen_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            energy_drift: 1e-7,
            eigen_residual: 1e-8,
        }
    }
}

fn default_points() -> Vec<PointSpec> {
    vec![PointSpec::Named("diag".into())]
}
fn default_r0() -> f64 {
    0.4
}
fn default_tau0() -> f64 {
    0.5
}
fn default_radii() -> Vec<f64> {
    vec![0.01, 0.02, 0.04, 0.08]
}
fn default_p_list() -> Vec<f64> {
    vec![2.0, 4.0, 6.0, f64::INFINITY]
}
fn default_lambda_range() -> [f64; 2] {
    [10.0, 40.0]
}
fn default_scan_count() -> usize {
    200
}
fn default_flow_scan() -> usize {
    4000
}
fn default_dt() -> f64 {
    1e-3
}
fn default_n_theta() -> usize {
    256
}
fn default_grid() -> usize {
    90
}
fn default_pairs_per_cluster() -> usize {
    3
}
fn default_alpha() -> f64 {
    0.5
}
fn default_cache_dir() -> PathBuf {
    PathBuf::from("cache")
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// The full run configuration. Every field has a default, so a minimal
/// config only names a potential.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    /// Spectral truncation degree; if absent each command chooses its own.
    #[serde(default)]
    pub l_max: Option<usize>,
    /// Base points x0 under study.
    #[serde(default = "default_points")]
    pub points: Vec<PointSpec>,
    /// Localization window radius.
    #[serde(default = "default_r0")]
    pub r0: f64,
    /// Flow-average time half-window.
    #[serde(default = "default_tau0")]
    pub tau0: f64,
    /// Cap radii for the scaling sweep.
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    /// Lebesgue exponents for norm tables (inf allowed).
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    /// Frequency window [lo, hi] for the verification sweep.
    #[serde(default = "default_lambda_range")]
    pub lambda_range: [f64; 2],
    /// Center-scan size for localized mass maximization.
    #[serde(default = "default_scan_count")]
    pub scan_count: usize,
    /// Geodesic-scan size for sup flow averages.
    #[serde(default = "default_flow_scan")]
    pub flow_scan: usize,
    /// Flow integrator time step.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Angular resolution of restriction profiles.
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    /// Lat-long grid resolution (rows; columns are 2x).
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Eigenpairs sampled per cluster in verify (0 = all).
    #[serde(default = "default_pairs_per_cluster")]
    pub pairs_per_cluster: usize,
    /// Mass-comparison exponent.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Seed for any randomized scan jitter.
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)
            .map_err(|e| Error::invalid(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.potential.resolve()?;
        for p in &self.points {
            p.resolve()?;
        }
        if !(self.r0 > 0.0 && self.r0 < std::f64::consts::PI) {
            return Err(Error::invalid("r0 must lie in (0, pi)"));
        }
        if !(self.tau0 > 0.0 && self.tau0 <= 10.0) {
            return Err(Error::invalid("tau0 must lie in (0, 10]"));
        }
        if self.radii.is_empty() {
            return Err(Error::invalid("radii list must be nonempty"));
        }
        for &r in &self.radii {
            if !(r > 0.0 && r < std::f64::consts::FRAC_PI_2) {
                return Err(Error::invalid(format!(
                    "radius {r} out of range (0, pi/2)"
                )));
            }
        }
        for &p in &self.p_list {
            if !(p >= 2.0) {
                return Err(Error::invalid(format!("exponent p = {p} must be >= 2")));
            }
        }
        let [lo, hi] = self.lambda_range;
        if !(lo >= 1.0 && hi > lo) {
            return Err(Error::invalid(
                "lambda_range must satisfy 1 <= lo < hi",
            ));
        }
        if !(self.dt > 0.0 && self.dt <= 1e-2) {
            return Err(Error::invalid("dt must lie in (0, 1e-2]"));
        }
        if self.scan_count < 50 {
            return Err(Error::invalid("scan_count must be at least 50"));
        }
        if self.flow_scan < 100 {
            return Err(Error::invalid("flow_scan must be at least 100"));
        }
        if self.n_theta < 64 {
            return Err(Error::invalid("n_theta must be at least 64"));
        }
        if self.grid < 8 {
            return Err(Error::invalid("grid must be at least 8"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1]"));
        }
        if let Some(l_max) = self.l_max {
            let v = self.potential.resolve()?;
            if l_max < v.effective_degree() {
                return Err(Error::invalid(
                    "l_max must be at least the potential degree",
                ));
            }
        }
        Ok(())
    }

    pub fn resolve_potential(&self) -> Result<PotentialSpec> {
        self.potential.resolve()
    }

    pub fn resolve_points(&self) -> Result<Vec<SpherePoint>> {
        self.points.iter().map(|p| p.resolve()).collect()
    }

    /// Short hash of the canonical serialized config; embedded in every
    /// output so files are traceable to the run that produced them. The
    /// output and cache directories are plumbing, not science, so they do
    /// not enter the hash.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.cache_dir = default_cache_dir();
        canonical.out_dir = default_out_dir();
        let text = toml::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_defaults() {
        let cfg = RunConfig::from_str("[potential]\npreset = \"quadratic\"\n").unwrap();
        assert_eq!(cfg.r0, 0.4);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.points.len(), 1);
        let pt = cfg.resolve_points().unwrap()[0];
        assert!((pt.vec().x - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(cfg.p_list.last().unwrap().is_infinite());
    }

    #[test]
    fn polynomial_and_harmonics_forms() {
        let cfg =
            RunConfig::from_str("[potential]\npolynomial = \"x1^2 + 2*x2^2 + 3*x3^2\"\n")
                .unwrap();
        let v = cfg.resolve_potential().unwrap();
        let preset = PotentialSpec::preset("quadratic").unwrap();
        let p = SpherePoint::new(0.3, -0.8, 0.5).unwrap();
        assert!((v.eval(&p) - preset.eval(&p)).abs() < 1e-12);

        let cfg2 =
            RunConfig::from_str("[potential]\nharmonics = [[2, 0, 1.5], [1, -1, 0.25]]\n")
                .unwrap();
        let v2 = cfg2.resolve_potential().unwrap();
        assert_eq!(v2.effective_degree(), 2);
    }

    #[test]
    fn exactly_one_potential_form() {
        let err = RunConfig::from_str(
            "[potential]\npreset = \"zonal\"\npolynomial = \"x3\"\n",
        );
        assert!(err.is_err());
        assert!(RunConfig::from_str("[potential]\n").is_err());
    }

    // top-level keys go before the [potential] table in TOML
    #[test]
    fn invalid_fields_rejected() {
        let base = "[potential]\npreset = \"zonal\"\n";
        assert!(RunConfig::from_str(&format!("r0 = -1.0\n{base}")).is_err());
        assert!(RunConfig::from_str(&format!("radii = []\n{base}")).is_err());
        assert!(RunConfig::from_str(&format!("p_list = [1.5]\n{base}")).is_err());
        assert!(RunConfig::from_str(&format!("lambda_range = [5.0, 2.0]\n{base}")).is_err());
        assert!(RunConfig::from_str(&format!("dt = 0.5\n{base}")).is_err());
        assert!(RunConfig::from_str(&format!("points = [\"nope\"]\n{base}")).is_err());
        assert!(RunConfig::from_str(&format!("unknown_knob = 3\n{base}")).is_err());
    }

    #[test]
    fn inf_exponent_parses() {
        let cfg = RunConfig::from_str(
            "p_list = [2.0, inf]\n[potential]\npreset = \"zonal\"\n",
        )
        .unwrap();
        assert!(cfg.p_list[1].is_infinite());
    }

    #[test]
    fn hash_stable_and_sensitive() {
        let a = RunConfig::from_str("[potential]\npreset = \"quadratic\"\n").unwrap();
        let b = RunConfig::from_str("[potential]\npreset = \"quadratic\"\n").unwrap();
        let c = RunConfig::from_str("seed = 1\n[potential]\npreset = \"quadratic\"\n")
            .unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn named_points_resolve() {
        for (name, axis) in [
            ("e1", SpherePoint::x_axis()),
            ("e2", SpherePoint::y_axis()),
            ("e3", SpherePoint::z_axis()),
        ] {
            let p = PointSpec::Named(name.into()).resolve().unwrap();
            assert_eq!(p.vec(), axis.vec());
        }
        let c = PointSpec::Coords([0.0, 3.0, 4.0]).resolve().unwrap();
        assert!((c.vec().norm() - 1.0).abs() < 1e-15);
    }
}
