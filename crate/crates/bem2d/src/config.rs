//! Flat `key = value` experiment configurations and the built-in presets.
//!
//! A configuration names a curve, an equation with its wave number and
//! incoming direction, a marking strategy, and loop/quadrature controls.
//! Lines starting with `#` are comments.  Unknown and duplicate keys are
//! rejected by name so that typos cannot silently fall back to defaults.

use std::collections::HashSet;
use std::sync::Arc;

use crate::adaptive::{AdaptiveParams, Marking};
use crate::assembly::QuadConfig;
use crate::error::Error;
use crate::geometry::BoundaryCurve;
use crate::problem::{EquationKind, Problem};

/// Which of the built-in boundary curves to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Circle,
    Lshape,
    Slit,
}

/// A fully resolved experiment description.
#[derive(Clone, Debug)]
pub struct Config {
    pub curve: CurveKind,
    /// Circle radius before scaling (ignored for the other curves).
    pub radius: f64,
    /// Optional scale override; by default each curve uses a scale that
    /// keeps its diameter below one.
    pub scale: Option<f64>,
    pub equation: EquationKind,
    pub k: f64,
    pub direction: (f64, f64),
    pub marking: Marking,
    pub theta: f64,
    pub max_dofs: usize,
    pub max_levels: usize,
    pub quad: QuadConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            curve: CurveKind::Circle,
            radius: 1.0,
            scale: None,
            equation: EquationKind::WeaklySingular,
            k: 1.0,
            direction: (-1.0, 1.0),
            marking: Marking::DoerflerExpanded,
            theta: 0.4,
            max_dofs: 2048,
            max_levels: 96,
            quad: QuadConfig::default(),
        }
    }
}

fn bad(key: &str, value: &str, what: &str) -> Error {
    Error::InvalidParameter(format!("key '{key}': expected {what}, got '{value}'"))
}

fn parse_f64(key: &str, value: &str) -> Result<f64, Error> {
    value.parse().map_err(|_| bad(key, value, "a number"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, Error> {
    value
        .parse()
        .map_err(|_| bad(key, value, "a positive integer"))
}

impl Config {
    /// Parse a flat `key = value` configuration text.
    pub fn parse(text: &str) -> Result<Config, Error> {
        let mut cfg = Config::default();
        let mut seen: HashSet<String> = HashSet::new();
        let mut curve_given = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidParameter(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate key '{key}'"
                )));
            }
            match key {
                "curve" => {
                    cfg.curve = match value {
                        "circle" => CurveKind::Circle,
                        "lshape" => CurveKind::Lshape,
                        "slit" => CurveKind::Slit,
                        _ => return Err(bad(key, value, "circle, lshape or slit")),
                    };
                    curve_given = true;
                }
                "radius" => cfg.radius = parse_f64(key, value)?,
                "scale" => cfg.scale = Some(parse_f64(key, value)?),
                "equation" => {
                    cfg.equation = match value {
                        "weakly-singular" => EquationKind::WeaklySingular,
                        "hypersingular" => EquationKind::Hypersingular,
                        _ => return Err(bad(key, value, "weakly-singular or hypersingular")),
                    }
                }
                "k" => cfg.k = parse_f64(key, value)?,
                "direction_x" => cfg.direction.0 = parse_f64(key, value)?,
                "direction_y" => cfg.direction.1 = parse_f64(key, value)?,
                "marking" => {
                    cfg.marking = match value {
                        "uniform" => Marking::Uniform,
                        "doerfler" => Marking::Doerfler,
                        "doerfler-expanded" => Marking::DoerflerExpanded,
                        _ => {
                            return Err(bad(
                                key,
                                value,
                                "uniform, doerfler or doerfler-expanded",
                            ))
                        }
                    }
                }
                "theta" => cfg.theta = parse_f64(key, value)?,
                "max_dofs" => cfg.max_dofs = parse_usize(key, value)?,
                "max_levels" => cfg.max_levels = parse_usize(key, value)?,
                "quad_regular" => cfg.quad.regular = parse_usize(key, value)?,
                "quad_near" => cfg.quad.near = parse_usize(key, value)?,
                "quad_log" => cfg.quad.log = parse_usize(key, value)?,
                _ => {
                    return Err(Error::InvalidParameter(format!("unknown key '{key}'")));
                }
            }
        }
        if !curve_given {
            return Err(Error::InvalidParameter("missing required key 'curve'".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.adaptive_params().validate()?;
        // constructing curve and problem also validates radius, scale and k
        self.build_curve()?;
        self.build_problem()?;
        Ok(())
    }

    /// Instantiate the configured boundary curve.
    pub fn build_curve(&self) -> Result<Arc<BoundaryCurve>, Error> {
        let curve = match (self.curve, self.scale) {
            (CurveKind::Circle, None) => BoundaryCurve::circle(self.radius)?,
            (CurveKind::Circle, Some(s)) => BoundaryCurve::circle_scaled(self.radius, s)?,
            (CurveKind::Lshape, None) => BoundaryCurve::lshape()?,
            (CurveKind::Lshape, Some(s)) => BoundaryCurve::lshape_scaled(s)?,
            (CurveKind::Slit, None) => BoundaryCurve::slit()?,
            (CurveKind::Slit, Some(s)) => BoundaryCurve::slit_scaled(s)?,
        };
        Ok(Arc::new(curve))
    }

    /// Instantiate the configured scattering problem.
    pub fn build_problem(&self) -> Result<Problem, Error> {
        match self.equation {
            EquationKind::WeaklySingular => {
                Problem::sound_soft_plane_wave(self.k, self.direction)
            }
            EquationKind::Hypersingular => {
                Problem::sound_hard_plane_wave(self.k, self.direction)
            }
        }
    }

    pub fn adaptive_params(&self) -> AdaptiveParams {
        AdaptiveParams {
            marking: self.marking,
            theta: self.theta,
            max_dofs: self.max_dofs,
            max_levels: self.max_levels,
            quad: self.quad,
        }
    }
}

/// Names of the built-in experiment presets.
pub const PRESET_NAMES: [&str; 6] = [
    "smooth-circle",
    "lshape-nonconvex",
    "lshape-convex",
    "slit",
    "soundhard-lshape",
    "idp-trigger",
];

/// Source text of a built-in preset.
pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "smooth-circle" => Some(include_str!("../../../configs/smooth-circle.cfg")),
        "lshape-nonconvex" => Some(include_str!("../../../configs/lshape-nonconvex.cfg")),
        "lshape-convex" => Some(include_str!("../../../configs/lshape-convex.cfg")),
        "slit" => Some(include_str!("../../../configs/slit.cfg")),
        "soundhard-lshape" => Some(include_str!("../../../configs/soundhard-lshape.cfg")),
        "idp-trigger" => Some(include_str!("../../../configs/idp-trigger.cfg")),
        _ => None,
    }
}

/// Parse a built-in preset by name.
pub fn preset_config(name: &str) -> Result<Config, Error> {
    let text = preset_text(name).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "unknown preset '{name}' (available: {})",
            PRESET_NAMES.join(", ")
        ))
    })?;
    Config::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = Config::parse("curve = circle\n").unwrap();
        assert_eq!(cfg.curve, CurveKind::Circle);
        assert_eq!(cfg.k, 1.0);
        assert_eq!(cfg.marking, Marking::DoerflerExpanded);
    }

    #[test]
    fn parses_comments_and_spacing() {
        let text = "# header\n\n  curve=slit  \n theta = 0.6\nk = 0\n";
        let cfg = Config::parse(text).unwrap();
        assert_eq!(cfg.curve, CurveKind::Slit);
        assert_eq!(cfg.theta, 0.6);
        assert_eq!(cfg.k, 0.0);
    }

    #[test]
    fn rejects_unknown_key_by_name() {
        let err = Config::parse("curve = circle\nwavenumber = 2\n").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("wavenumber"), "message was: {msg}");
    }

    #[test]
    fn rejects_duplicate_key() {
        let err = Config::parse("curve = circle\ncurve = slit\n").unwrap_err();
        assert!(format!("{err}").contains("duplicate"));
    }

    #[test]
    fn rejects_missing_curve() {
        assert!(Config::parse("k = 1\n").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::parse("curve = pentagon\n").is_err());
        assert!(Config::parse("curve = circle\nk = -1\n").is_err());
        assert!(Config::parse("curve = circle\ntheta = 1.5\n").is_err());
        assert!(Config::parse("curve = circle\nmarking = random\n").is_err());
        assert!(Config::parse("curve = circle\nmax_dofs = none\n").is_err());
    }

    #[test]
    fn all_presets_parse() {
        for name in PRESET_NAMES {
            let cfg = preset_config(name).unwrap();
            assert!(cfg.max_dofs > 0, "preset {name}");
        }
        assert!(preset_config("no-such-preset").is_err());
    }

    #[test]
    fn preset_parameters_match_their_purpose() {
        let circle = preset_config("smooth-circle").unwrap();
        assert_eq!(circle.marking, Marking::Uniform);
        assert_eq!(circle.max_dofs, 2048);

        let slit = preset_config("slit").unwrap();
        assert_eq!(slit.curve, CurveKind::Slit);
        assert_eq!(slit.k, 0.0);
        assert_eq!(slit.marking, Marking::DoerflerExpanded);

        let hyp = preset_config("soundhard-lshape").unwrap();
        assert_eq!(hyp.equation, EquationKind::Hypersingular);

        let idp = preset_config("idp-trigger").unwrap();
        assert!(idp.k > 9.0 && idp.k < 10.0);
    }
}
