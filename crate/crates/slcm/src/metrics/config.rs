//! Scenario configuration: a flat `key = value` text format with `#`
//! comments, every knob defaulted.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config field {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("config line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Broadcast flavor used by the protocol's control traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroadcastMode {
    /// Optimized three-phase broadcast with relay suppression.
    Gri,
    /// Plain flooding in the go and information phases.
    Flood,
}

impl fmt::Display for BroadcastMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BroadcastMode::Gri => "gri",
            BroadcastMode::Flood => "flood",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub nodes: usize,
    pub arena_width: f64,
    pub arena_height: f64,
    pub duration: f64,
    pub insert_prob: f64,
    pub delete_prob: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub radio_range: f64,
    pub broadcast_mode: BroadcastMode,
    pub zkp_rounds: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub n_min: usize,
    pub graph_degree: usize,
    pub pol_period: f64,
    pub loss_prob: f64,
    pub processing_delay: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            nodes: 20,
            arena_width: 450.0,
            arena_height: 450.0,
            duration: 120.0,
            insert_prob: 0.01,
            delete_prob: 0.01,
            speed_min: 2.0,
            speed_max: 15.0,
            radio_range: 220.0,
            broadcast_mode: BroadcastMode::Gri,
            zkp_rounds: 20,
            seed: 42,
            epsilon: 1.0,
            n_min: 5,
            graph_degree: 6,
            pol_period: 20.0,
            loss_prob: 0.0,
            processing_delay: 0.002,
        }
    }
}

impl ScenarioConfig {
    /// Parses the flat text form on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    reason: format!("expected key = value, got {content:?}"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let bad = |reason: &str| ConfigError::Parse {
                line,
                reason: format!("{key}: {reason}"),
            };
            match key {
                "nodes" => cfg.nodes = value.parse().map_err(|_| bad("not an integer"))?,
                "arena_width" => {
                    cfg.arena_width = value.parse().map_err(|_| bad("not a number"))?
                }
                "arena_height" => {
                    cfg.arena_height = value.parse().map_err(|_| bad("not a number"))?
                }
                "duration" => cfg.duration = value.parse().map_err(|_| bad("not a number"))?,
                "insert_prob" => {
                    cfg.insert_prob = value.parse().map_err(|_| bad("not a number"))?
                }
                "delete_prob" => {
                    cfg.delete_prob = value.parse().map_err(|_| bad("not a number"))?
                }
                "speed_min" => cfg.speed_min = value.parse().map_err(|_| bad("not a number"))?,
                "speed_max" => cfg.speed_max = value.parse().map_err(|_| bad("not a number"))?,
                "radio_range" => {
                    cfg.radio_range = value.parse().map_err(|_| bad("not a number"))?
                }
                "broadcast_mode" => {
                    cfg.broadcast_mode = match value {
                        "gri" => BroadcastMode::Gri,
                        "flood" => BroadcastMode::Flood,
                        _ => return Err(bad("expected gri or flood")),
                    }
                }
                "zkp_rounds" => {
                    cfg.zkp_rounds = value.parse().map_err(|_| bad("not an integer"))?
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad("not an integer"))?,
                "epsilon" => cfg.epsilon = value.parse().map_err(|_| bad("not a number"))?,
                "n_min" => cfg.n_min = value.parse().map_err(|_| bad("not an integer"))?,
                "graph_degree" => {
                    cfg.graph_degree = value.parse().map_err(|_| bad("not an integer"))?
                }
                "pol_period" => {
                    cfg.pol_period = value.parse().map_err(|_| bad("not a number"))?
                }
                "loss_prob" => cfg.loss_prob = value.parse().map_err(|_| bad("not a number"))?,
                "processing_delay" => {
                    cfg.processing_delay = value.parse().map_err(|_| bad("not a number"))?
                }
                _ => {
                    return Err(ConfigError::Parse {
                        line,
                        reason: format!("unknown key {key:?}"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, reason: String| ConfigError::Invalid {
            field: field.into(),
            reason,
        };
        if !(5..=500).contains(&self.nodes) {
            return Err(invalid("nodes", format!("{} outside [5, 500]", self.nodes)));
        }
        for (field, p) in [
            ("insert_prob", self.insert_prob),
            ("delete_prob", self.delete_prob),
            ("loss_prob", self.loss_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(field, format!("{p} outside [0, 1]")));
            }
        }
        if self.speed_min > self.speed_max || self.speed_min < 0.0 {
            return Err(invalid(
                "speed_min",
                format!("range [{}, {}] is not ordered", self.speed_min, self.speed_max),
            ));
        }
        for (field, v) in [
            ("arena_width", self.arena_width),
            ("arena_height", self.arena_height),
            ("duration", self.duration),
            ("radio_range", self.radio_range),
            ("epsilon", self.epsilon),
            ("pol_period", self.pol_period),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(invalid(field, format!("{v} must be positive")));
            }
        }
        if self.processing_delay < 0.0 {
            return Err(invalid("processing_delay", "must be nonnegative".into()));
        }
        if self.zkp_rounds == 0 {
            return Err(invalid("zkp_rounds", "at least one round".into()));
        }
        if self.n_min < 3 {
            return Err(invalid("n_min", "a cycle needs at least 3 vertices".into()));
        }
        if self.nodes < self.n_min {
            return Err(invalid(
                "nodes",
                format!("{} below n_min {}", self.nodes, self.n_min),
            ));
        }
        if self.graph_degree < 2 || self.graph_degree >= self.nodes {
            return Err(invalid(
                "graph_degree",
                format!("{} outside [2, nodes-1]", self.graph_degree),
            ));
        }
        if !(self.nodes * self.graph_degree).is_multiple_of(2) {
            return Err(invalid(
                "graph_degree",
                "nodes * graph_degree must be even".into(),
            ));
        }
        Ok(())
    }

    /// Scales the arena so node density stays constant at `nodes`.
    pub fn with_nodes_constant_density(&self, nodes: usize) -> Self {
        let factor = (nodes as f64 / self.nodes as f64).sqrt();
        let mut out = self.clone();
        out.nodes = nodes;
        out.arena_width = self.arena_width * factor;
        out.arena_height = self.arena_height * factor;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_overrides_and_comments() {
        let cfg = ScenarioConfig::parse(
            "# scenario\nnodes = 50\nseed=7\nbroadcast_mode = flood # baseline\n",
        )
        .unwrap();
        assert_eq!(cfg.nodes, 50);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.broadcast_mode, BroadcastMode::Flood);
        assert_eq!(cfg.radio_range, 220.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ScenarioConfig::parse("nodse = 10\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
    }

    #[test]
    fn bounds_are_enforced() {
        assert!(ScenarioConfig::parse("nodes = 2\n").is_err());
        assert!(ScenarioConfig::parse("nodes = 900\n").is_err());
        assert!(ScenarioConfig::parse("insert_prob = 1.5\n").is_err());
        assert!(ScenarioConfig::parse("speed_min = 20\nspeed_max = 10\n").is_err());
    }

    #[test]
    fn odd_degree_times_odd_nodes_is_rejected() {
        assert!(ScenarioConfig::parse("nodes = 15\ngraph_degree = 5\n").is_err());
        assert!(ScenarioConfig::parse("nodes = 16\ngraph_degree = 5\n").is_ok());
    }

    #[test]
    fn density_scaling_preserves_area_per_node() {
        let base = ScenarioConfig::default();
        let scaled = base.with_nodes_constant_density(80);
        let density_base = base.nodes as f64 / (base.arena_width * base.arena_height);
        let density_scaled =
            scaled.nodes as f64 / (scaled.arena_width * scaled.arena_height);
        assert!((density_base - density_scaled).abs() < 1e-9);
    }
}
