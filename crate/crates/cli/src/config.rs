//! Run configuration from a flat `key = value` file overlaid with flags.
//!
//! Recognised keys:
//!
//! | key | example |
//! |---|---|
//! | `game` | `chsh`, `magic-square`, `mpp:3` |
//! | `channel_type` | `1` or `2` |
//! | `eta_grid` | `0:1:11` (start, stop, number of points) |
//! | `resources` | `L-exact,L-bound,Q-lower,Q-exact,NS-exact,vertex-file:<path>` |
//! | `seed` | `0` |
//! | `out` | `sweep.csv` |
//! | `vertex_file` | `vertices.csv` |
//! | `restarts`, `tolerance`, `max_iterations`, `grid_step`, `enumeration_cap` | optimizer settings |
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ngmac_core::capacity::OptimizerConfig;
use ngmac_core::ChannelType;

pub const KEYS: &[&str] = &[
    "game",
    "channel_type",
    "eta_grid",
    "resources",
    "seed",
    "out",
    "vertex_file",
    "restarts",
    "tolerance",
    "max_iterations",
    "grid_step",
    "enumeration_cap",
];

/// Parses `key = value` lines. Later duplicates override earlier ones.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected `key = value`, got `{line}`", i + 1))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            bail!("config line {}: unknown key `{key}`", i + 1);
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    parse_key_values(&text).with_context(|| format!("in {}", path.display()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl std::str::FromStr for EtaGrid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            bail!("expected `start:stop:points`, got `{s}`");
        };
        let grid = EtaGrid {
            start: a.trim().parse().with_context(|| format!("bad start `{a}`"))?,
            stop: b.trim().parse().with_context(|| format!("bad stop `{b}`"))?,
            points: n.trim().parse().with_context(|| format!("bad point count `{n}`"))?,
        };
        if grid.points < 1 {
            bail!("need at least one point");
        }
        for v in [grid.start, grid.stop] {
            if !(0.0..=1.0).contains(&v) {
                bail!("{v} is outside [0, 1]");
            }
        }
        Ok(grid)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ResourceSpec {
    LocalExact,
    LocalBound,
    QuantumLower,
    QuantumExact,
    NoSignalingExact,
    /// `None` means "the file given by `vertex_file`".
    VertexFile(Option<PathBuf>),
}

impl std::str::FromStr for ResourceSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "L-exact" => ResourceSpec::LocalExact,
            "L-bound" => ResourceSpec::LocalBound,
            "Q-lower" => ResourceSpec::QuantumLower,
            "Q-exact" => ResourceSpec::QuantumExact,
            "NS-exact" => ResourceSpec::NoSignalingExact,
            "vertex-file" => ResourceSpec::VertexFile(None),
            other => match other.strip_prefix("vertex-file:") {
                Some(path) if !path.is_empty() => ResourceSpec::VertexFile(Some(PathBuf::from(path))),
                _ => bail!(
                    "unknown resource `{other}` (expected L-exact, L-bound, Q-lower, Q-exact, NS-exact or vertex-file:<path>)"
                ),
            },
        })
    }
}

fn default_resources(game: &str) -> &'static str {
    if game == "chsh" {
        "L-exact,L-bound,Q-lower,NS-exact"
    } else {
        "L-bound,Q-exact"
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub game: String,
    pub channel_type: ChannelType,
    pub eta_grid: EtaGrid,
    pub resources: Vec<ResourceSpec>,
    pub optimizer: OptimizerConfig,
    pub out: Option<PathBuf>,
    pub vertex_file: Option<PathBuf>,
}

fn field<T>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|e| anyhow!("invalid `{key}` value `{v}`: {e}")))
        .transpose()
}

impl RunConfig {
    /// Builds a configuration from merged key-values; missing keys default.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let game = map.get("game").cloned().unwrap_or_else(|| "chsh".into());
        let channel_type = match map.get("channel_type").map(String::as_str) {
            None | Some("2") | Some("II") => ChannelType::TypeII,
            Some("1") | Some("I") => ChannelType::TypeI,
            Some(other) => bail!("invalid `channel_type` value `{other}`: expected 1 or 2"),
        };
        let eta_grid = field::<EtaGrid>(map, "eta_grid")?.unwrap_or(EtaGrid {
            start: 0.0,
            stop: 1.0,
            points: 11,
        });
        let resources_text = map
            .get("resources")
            .map(String::as_str)
            .unwrap_or_else(|| default_resources(&game));
        let resources = resources_text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<ResourceSpec>>>()
            .map_err(|e| anyhow!("invalid `resources`: {e}"))?;
        if resources.is_empty() {
            bail!("invalid `resources`: empty list");
        }
        let defaults = OptimizerConfig::default();
        let optimizer = OptimizerConfig {
            grid_step: field(map, "grid_step")?,
            restarts: field(map, "restarts")?.unwrap_or(defaults.restarts),
            tolerance: field(map, "tolerance")?.unwrap_or(defaults.tolerance),
            max_iterations: field(map, "max_iterations")?.unwrap_or(defaults.max_iterations),
            seed: field(map, "seed")?.unwrap_or(defaults.seed),
            enumeration_cap: field(map, "enumeration_cap")?.unwrap_or(defaults.enumeration_cap),
        };
        optimizer.validate().map_err(|e| anyhow!("invalid optimizer settings: {e}"))?;
        let vertex_file = map.get("vertex_file").map(PathBuf::from);
        if resources.contains(&ResourceSpec::VertexFile(None)) && vertex_file.is_none() {
            bail!("invalid `resources`: `vertex-file` needs `vertex_file` (or --vertex-file)");
        }
        Ok(Self {
            game,
            channel_type,
            eta_grid,
            resources,
            optimizer,
            out: map.get("out").map(PathBuf::from),
            vertex_file,
        })
    }

    /// File values (if any) overlaid with explicit overrides.
    pub fn load(file: Option<&Path>, overrides: &[(&str, Option<String>)]) -> Result<Self> {
        let mut map = match file {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        for (key, value) in overrides {
            if let Some(v) = value {
                map.insert((*key).to_string(), v.clone());
            }
        }
        Self::from_map(&map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_file() {
        let map = parse_key_values("# sweep\ngame = magic-square\n\nchannel-type=1\neta_grid = 0:1:5\n").unwrap();
        let cfg = RunConfig::from_map(&map).unwrap();
        assert_eq!(cfg.game, "magic-square");
        assert_eq!(cfg.channel_type, ChannelType::TypeI);
        assert_eq!(cfg.eta_grid.points, 5);
        assert_eq!(cfg.resources, vec![ResourceSpec::LocalBound, ResourceSpec::QuantumExact]);
    }

    #[test]
    fn errors_name_the_field() {
        let err = parse_key_values("colour = red").unwrap_err().to_string();
        assert!(err.contains("colour"));
        for (key, value) in [
            ("eta_grid", "0:1"),
            ("eta_grid", "0:2:3"),
            ("channel_type", "3"),
            ("resources", "L-magic"),
            ("seed", "-1"),
            ("tolerance", "0"),
        ] {
            let mut map = BTreeMap::new();
            map.insert(key.to_string(), value.to_string());
            let err = format!("{:#}", RunConfig::from_map(&map).unwrap_err());
            let named = err.contains(key) || (key == "tolerance" && err.contains("tolerance"));
            assert!(named, "{key}: {err}");
        }
    }

    #[test]
    fn overrides_win() {
        let dir = std::env::temp_dir().join(format!("ngmac-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "game = chsh\nseed = 4\n").unwrap();
        let cfg = RunConfig::load(Some(&path), &[("seed", Some("9".into())), ("game", None)]).unwrap();
        assert_eq!(cfg.optimizer.seed, 9);
        assert_eq!(cfg.game, "chsh");
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn vertex_resources() {
        assert_eq!(
            "vertex-file:v.csv".parse::<ResourceSpec>().unwrap(),
            ResourceSpec::VertexFile(Some("v.csv".into()))
        );
        let mut map = BTreeMap::new();
        map.insert("resources".into(), "vertex-file".into());
        assert!(RunConfig::from_map(&map).is_err());
    }
}
