use std::f64::consts::TAU;
use std::path::Path;

use dlplab_core::algcurve::{complexify, HermitianBivarPoly, RealBivarPoly};
use dlplab_core::{CurveSpec, Location, MatchingPair, RationalFn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

type C = Complex64;

/// Keys shared by every command; the rest of the document is command specific.
const COMMON_KEYS: [&str; 3] = ["N", "seed", "out"];

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub command: CommandConfig,
}

/// The algebraic curve of a command, given either in real form `P(x, y)` or
/// complexified `Q(z, w)`.
pub fn resolve_q(p: &Option<RealBivarPoly>, q: &Option<HermitianBivarPoly>) -> Result<HermitianBivarPoly, CliError> {
    match (p, q) {
        (Some(p), None) => Ok(complexify(p)),
        (None, Some(q)) => Ok(q.clone()),
        _ => Err(CliError::Config("give exactly one of `p` (real form) or `q` (complexified form)".into())),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathSpec {
    Points(Vec<C>),
    Circle {
        center: C,
        radius: f64,
        #[serde(default)]
        start_angle: f64,
        #[serde(default = "one")]
        turns: f64,
        #[serde(default = "default_path_points")]
        points: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn default_path_points() -> usize {
    64
}

impl PathSpec {
    pub fn waypoints(&self) -> Vec<C> {
        match self {
            PathSpec::Points(p) => p.clone(),
            PathSpec::Circle {
                center,
                radius,
                start_angle,
                turns,
                points,
            } => (0..=*points)
                .map(|k| center + C::from_polar(*radius, start_angle + TAU * turns * k as f64 / *points as f64))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CommandConfig {
    Spectrum {
        curve: CurveSpec,
        /// on `|λ - 2|` for the constant mode
        #[serde(default = "tol_gauss")]
        tol: f64,
        #[serde(default = "tol_fixed")]
        tol_fixed: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_fixed_min: Option<usize>,
    },
    Dirichlet {
        curve: CurveSpec,
        /// boundary data is `Re F` on the curve
        data: RationalFn,
        probes: Vec<C>,
        #[serde(default = "tol_dirichlet")]
        tol: f64,
    },
    MatchVerify {
        pair: MatchingPair,
        #[serde(default = "tol_boundary")]
        tol: f64,
        #[serde(default = "tol_fixed_point")]
        fixed_tol: f64,
        #[serde(default = "tol_dichotomy")]
        dichotomy_tol: f64,
    },
    MatchMelnikov {
        r: RationalFn,
        c: f64,
        #[serde(default = "tol_boundary")]
        tol: f64,
        #[serde(default = "tol_fixed_point")]
        fixed_tol: f64,
        #[serde(default = "tol_dichotomy")]
        dichotomy_tol: f64,
    },
    MatchPowers {
        r: RationalFn,
        c: f64,
        #[serde(default = "default_n_max")]
        n_max: u32,
        #[serde(default = "tol_powers")]
        tol: f64,
    },
    BranchPoints {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<RealBivarPoly>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<HermitianBivarPoly>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
        #[serde(default = "tol_fixed_point")]
        tol: f64,
    },
    Reflect {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<RealBivarPoly>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<HermitianBivarPoly>,
        path: PathSpec,
        /// starting value of `S`, snapped to the nearest root at the path start
        w_start: C,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<C>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
        #[serde(default = "tol_fixed_point")]
        tol: f64,
    },
    TrapCheck {
        /// R-domain map; alternatively `p` or `q` with `curve` and `side`
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<RationalFn>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<RealBivarPoly>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<HermitianBivarPoly>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        curve: Option<CurveSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        side: Option<Location>,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Reciprocity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<RealBivarPoly>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<HermitianBivarPoly>,
        #[serde(default = "default_pairs")]
        pairs: usize,
        #[serde(default = "tol_fixed_point")]
        tol: f64,
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
    SphereCheck {
        #[serde(default = "default_dims")]
        dims: Vec<usize>,
        #[serde(default = "default_pairs")]
        trials: usize,
        #[serde(default = "tol_spread")]
        spread_tol: f64,
        #[serde(default = "tol_roundoff")]
        ratio_tol: f64,
        #[serde(default = "tol_roundoff")]
        identity_tol: f64,
    },
    GaussCheck {
        curve: CurveSpec,
        #[serde(default = "tol_gauss")]
        tol: f64,
    },
}

fn tol_gauss() -> f64 {
    1e-8
}
fn tol_fixed() -> f64 {
    1e-6
}
fn tol_dirichlet() -> f64 {
    1e-7
}
fn tol_boundary() -> f64 {
    1e-12
}
fn tol_fixed_point() -> f64 {
    1e-8
}
fn tol_dichotomy() -> f64 {
    1e-6
}
fn tol_powers() -> f64 {
    1e-10
}
fn tol_spread() -> f64 {
    1e-10
}
fn tol_roundoff() -> f64 {
    1e-12
}
fn default_n_max() -> u32 {
    3
}
fn default_samples() -> usize {
    100
}
fn default_pairs() -> usize {
    1000
}
fn default_half_width() -> f64 {
    3.0
}
fn default_dims() -> Vec<usize> {
    vec![3, 4, 5]
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Spectrum { .. } => "spectrum",
            CommandConfig::Dirichlet { .. } => "dirichlet",
            CommandConfig::MatchVerify { .. } => "match-verify",
            CommandConfig::MatchMelnikov { .. } => "match-melnikov",
            CommandConfig::MatchPowers { .. } => "match-powers",
            CommandConfig::BranchPoints { .. } => "branch-points",
            CommandConfig::Reflect { .. } => "reflect",
            CommandConfig::TrapCheck { .. } => "trap-check",
            CommandConfig::Reciprocity { .. } => "reciprocity",
            CommandConfig::SphereCheck { .. } => "sphere-check",
            CommandConfig::GaussCheck { .. } => "gauss-check",
        }
    }

    /// Library module that does the work, for error messages.
    pub fn module(&self) -> &'static str {
        match self {
            CommandConfig::Spectrum { .. } | CommandConfig::Dirichlet { .. } | CommandConfig::GaussCheck { .. } => {
                "potential"
            }
            CommandConfig::MatchVerify { .. } | CommandConfig::MatchMelnikov { .. } | CommandConfig::MatchPowers { .. } => {
                "matching"
            }
            CommandConfig::BranchPoints { .. }
            | CommandConfig::Reflect { .. }
            | CommandConfig::TrapCheck { .. }
            | CommandConfig::Reciprocity { .. } => "algcurve",
            CommandConfig::SphereCheck { .. } => "sphere",
        }
    }

    fn uses_seed(&self) -> bool {
        matches!(
            self,
            CommandConfig::TrapCheck { .. } | CommandConfig::Reciprocity { .. } | CommandConfig::SphereCheck { .. }
        )
    }

    fn uses_nodes(&self) -> bool {
        !matches!(
            self,
            CommandConfig::BranchPoints { .. }
                | CommandConfig::Reflect { .. }
                | CommandConfig::Reciprocity { .. }
                | CommandConfig::SphereCheck { .. }
                | CommandConfig::TrapCheck { .. }
        )
    }

    fn tolerances(&self) -> Vec<f64> {
        match self {
            CommandConfig::Spectrum { tol, tol_fixed, .. } => vec![*tol, *tol_fixed],
            CommandConfig::Dirichlet { tol, .. }
            | CommandConfig::MatchPowers { tol, .. }
            | CommandConfig::BranchPoints { tol, .. }
            | CommandConfig::Reflect { tol, .. }
            | CommandConfig::Reciprocity { tol, .. }
            | CommandConfig::GaussCheck { tol, .. } => vec![*tol],
            CommandConfig::MatchVerify {
                tol,
                fixed_tol,
                dichotomy_tol,
                ..
            }
            | CommandConfig::MatchMelnikov {
                tol,
                fixed_tol,
                dichotomy_tol,
                ..
            } => vec![*tol, *fixed_tol, *dichotomy_tol],
            CommandConfig::SphereCheck {
                spread_tol,
                ratio_tol,
                identity_tol,
                ..
            } => vec![*spread_tol, *ratio_tol, *identity_tol],
            CommandConfig::TrapCheck { .. } => vec![],
        }
    }
}

/// Scalar overrides from the command line.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path, command: &str, ov: &Overrides) -> Result<(Self, Option<String>), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let doc: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_value(doc, command, ov)
    }

    /// Splits the shared keys off, parses the rest and validates. Returns the
    /// config and the `out` entry if present.
    pub fn from_value(doc: Value, command: &str, ov: &Overrides) -> Result<(Self, Option<String>), CliError> {
        let Value::Object(mut map) = doc else {
            return Err(CliError::Config("config must be a JSON object".into()));
        };
        let mut common = std::collections::BTreeMap::new();
        for k in COMMON_KEYS {
            if let Some(v) = map.remove(k) {
                common.insert(k, v);
            }
        }
        match map.get("command") {
            None => {
                map.insert("command".into(), Value::String(command.into()));
            }
            Some(Value::String(c)) if c == command => {}
            Some(other) => {
                return Err(CliError::Config(format!("config is for command {other}, not `{command}`")));
            }
        }
        let cmd: CommandConfig =
            serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Config(e.to_string()))?;
        let field = |k: &str| -> Result<Option<u64>, CliError> {
            match common.get(k) {
                None | Some(Value::Null) => Ok(None),
                Some(v) => v
                    .as_u64()
                    .map(Some)
                    .ok_or_else(|| CliError::Config(format!("`{k}` must be a non-negative integer"))),
            }
        };
        let out = match common.get("out") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(CliError::Config("`out` must be a string".into())),
        };
        let cfg = RunConfig {
            n: ov.n.or(field("N")?.map(|v| v as usize)),
            seed: ov.seed.or(field("seed")?),
            command: cmd,
        };
        cfg.validate()?;
        Ok((cfg, out))
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(n) = self.n {
            if n < 16 || !n.is_power_of_two() {
                return Err(CliError::Config(format!("N must be a power of two >= 16, got {n}")));
            }
        }
        if self.command.uses_seed() && self.seed.is_none() {
            return Err(CliError::Config(format!("`{}` draws random samples and needs a seed", self.command.name())));
        }
        if let Some(t) = self.command.tolerances().into_iter().find(|t| !(*t > 0.0)) {
            return Err(CliError::Config(format!("tolerances must be positive, got {t}")));
        }
        Ok(())
    }

    /// Node count, defaulting to 256 for commands that sample a curve.
    pub fn nodes(&self) -> usize {
        self.n.unwrap_or(256)
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated")
    }

    /// Canonical JSON of the effective config; the report hash is taken over this.
    pub fn canonical(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(m) = &mut v {
            if !self.command.uses_nodes() {
                m.remove("N");
            }
            m.retain(|_, x| !x.is_null());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn parse(doc: Value, command: &str) -> Result<RunConfig, CliError> {
        RunConfig::from_value(doc, command, &Overrides::default()).map(|r| r.0)
    }

    fn gauss() -> Value {
        json!({ "command": "gauss-check", "curve": { "type": "circle", "center": [0, 0], "radius": 1 }, "N": 64 })
    }

    #[test]
    fn parses_with_defaults() {
        let cfg = parse(gauss(), "gauss-check").unwrap();
        assert_eq!(cfg.nodes(), 64);
        assert!(matches!(cfg.command, CommandConfig::GaussCheck { tol, .. } if tol == 1e-8));
    }

    #[test]
    fn command_field_may_be_omitted_but_must_match() {
        let mut doc = gauss();
        doc.as_object_mut().unwrap().remove("command");
        assert!(parse(doc, "gauss-check").is_ok());
        assert!(matches!(parse(gauss(), "spectrum"), Err(CliError::Config(_))));
    }

    #[test]
    fn schema_violations_are_config_errors() {
        let mut doc = gauss();
        doc["bogus"] = json!(1);
        assert!(matches!(parse(doc, "gauss-check"), Err(CliError::Config(_))));
        let mut doc = gauss();
        doc["N"] = json!(100);
        assert!(matches!(parse(doc, "gauss-check"), Err(CliError::Config(_))));
        let mut doc = gauss();
        doc["tol"] = json!(-1.0);
        assert!(matches!(parse(doc, "gauss-check"), Err(CliError::Config(_))));
        assert!(parse(json!([1, 2]), "gauss-check").is_err());
    }

    #[test]
    fn random_commands_need_a_seed() {
        let doc = json!({ "command": "sphere-check", "trials": 10 });
        assert!(matches!(parse(doc.clone(), "sphere-check"), Err(CliError::Config(_))));
        let ov = Overrides { n: None, seed: Some(5) };
        let (cfg, _) = RunConfig::from_value(doc, "sphere-check", &ov).unwrap();
        assert_eq!(cfg.seed(), 5);
    }

    #[test]
    fn flags_override_and_change_the_hash() {
        let a = parse(gauss(), "gauss-check").unwrap();
        let ov = Overrides { n: Some(128), seed: None };
        let (b, _) = RunConfig::from_value(gauss(), "gauss-check", &ov).unwrap();
        assert_eq!(b.nodes(), 128);
        assert_ne!(crate::report::config_hash(&a), crate::report::config_hash(&b));
        assert_eq!(crate::report::config_hash(&a), crate::report::config_hash(&parse(gauss(), "gauss-check").unwrap()));
    }

    #[test]
    fn out_is_not_part_of_the_config_hash() {
        let mut doc = gauss();
        doc["out"] = json!("elsewhere");
        let (cfg, out) = RunConfig::from_value(doc, "gauss-check", &Overrides::default()).unwrap();
        assert_eq!(out.as_deref(), Some("elsewhere"));
        assert_eq!(crate::report::config_hash(&cfg), crate::report::config_hash(&parse(gauss(), "gauss-check").unwrap()));
    }

    #[test]
    fn circle_path_waypoints_close() {
        let p: PathSpec = serde_json::from_value(json!({ "center": [1, 0], "radius": 0.5 })).unwrap();
        let w = p.waypoints();
        assert_eq!(w.len(), 65);
        assert!((w[0] - w[64]).norm() < 1e-14);
        let p: PathSpec = serde_json::from_value(json!([[0, 0], [1, 1]])).unwrap();
        assert_eq!(p.waypoints().len(), 2);
    }

    #[test]
    fn algebraic_curve_needs_exactly_one_form() {
        assert!(resolve_q(&None, &None).is_err());
        let p = RealBivarPoly::ellipse(2.0, 1.0);
        let q = complexify(&p);
        assert!(resolve_q(&Some(p.clone()), &Some(q)).is_err());
        assert!(resolve_q(&Some(p), &None).is_ok());
    }
}
