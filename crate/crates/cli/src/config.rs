//! Flat key=value configuration files with '#' comments. Unknown keys are
//! rejected so typos fail loudly instead of silently using a default.

use std::collections::BTreeMap;
use std::path::PathBuf;

use binrbm::model::EnumCaps;
use binrbm::train::{Backend, TrainerConfig, Variant};
use binrbm::{Error, Result};

const KNOWN_KEYS: &[&str] = &[
    "n",
    "m",
    "d",
    "beta",
    "seed",
    "variant",
    "alpha",
    "s1",
    "s2",
    "epochs",
    "damping",
    "mp_tol",
    "mp_max_iters",
    "clip_bound",
    "xi_floor",
    "logz_backend",
    "quad_nodes",
    "max_visible",
    "max_weights",
    "fresh_elbo_draws",
    "data_path",
    "model_path",
    "out_dir",
    "check_tolerance",
];

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub trainer: TrainerConfig,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub d: Option<usize>,
    pub data_path: Option<PathBuf>,
    pub model_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// When set, overrides every threshold in `check` suites.
    pub check_tolerance: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trainer: TrainerConfig::new(Variant::Bayes),
            n: None,
            m: None,
            d: None,
            data_path: None,
            model_path: None,
            out_dir: PathBuf::from("."),
            check_tolerance: None,
        }
    }
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("line {}: expected key=value, got '{line}'", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Parse(format!("line {}: unknown key '{key}'", lineno + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("bad value '{v}' for key '{key}'"))),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let map = parse_kv(text)?;
        let mut cfg = ExperimentConfig::default();
        if let Some(v) = map.get("variant") {
            cfg.trainer.variant = Variant::parse(v)?;
        }
        if let Some(v) = map.get("logz_backend") {
            cfg.trainer.logz_backend = match v.as_str() {
                "bethe" => Backend::Bethe,
                "exact" => Backend::Exact,
                other => return Err(Error::Parse(format!("unknown logz_backend '{other}'"))),
            };
        }
        if let Some(v) = get(&map, "alpha")? {
            cfg.trainer.alpha = v;
        }
        if let Some(v) = get(&map, "beta")? {
            cfg.trainer.beta = v;
        }
        if let Some(v) = get(&map, "seed")? {
            cfg.trainer.seed = v;
        }
        if let Some(v) = get(&map, "s1")? {
            cfg.trainer.s1 = v;
        }
        if let Some(v) = get(&map, "s2")? {
            cfg.trainer.s2 = v;
        }
        if let Some(v) = get(&map, "epochs")? {
            cfg.trainer.epochs = v;
        }
        if let Some(v) = get(&map, "damping")? {
            cfg.trainer.damping = v;
        }
        if let Some(v) = get(&map, "mp_tol")? {
            cfg.trainer.mp_tol = v;
        }
        if let Some(v) = get(&map, "mp_max_iters")? {
            cfg.trainer.mp_max_iters = v;
        }
        if let Some(v) = get(&map, "clip_bound")? {
            cfg.trainer.clip_bound = v;
        }
        if let Some(v) = get(&map, "xi_floor")? {
            cfg.trainer.xi_floor = v;
        }
        if let Some(v) = get(&map, "quad_nodes")? {
            cfg.trainer.quad_nodes = v;
        }
        if let Some(v) = get(&map, "fresh_elbo_draws")? {
            cfg.trainer.fresh_elbo_draws = v;
        }
        let mut caps = EnumCaps::default();
        if let Some(v) = get(&map, "max_visible")? {
            caps.max_visible = v;
        }
        if let Some(v) = get(&map, "max_weights")? {
            caps.max_weights = v;
        }
        cfg.trainer.caps = caps;
        cfg.n = get(&map, "n")?;
        cfg.m = get(&map, "m")?;
        cfg.d = get(&map, "d")?;
        cfg.data_path = map.get("data_path").map(PathBuf::from);
        cfg.model_path = map.get("model_path").map(PathBuf::from);
        if let Some(v) = map.get("out_dir") {
            cfg.out_dir = PathBuf::from(v);
        }
        cfg.check_tolerance = get(&map, "check_tolerance")?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ExperimentConfig::parse(
            "# comment\nn=10\nm=2\nd=50\nbeta=1.0\nvariant=huang\nalpha=0.05 # inline\nout_dir=/tmp/x\n",
        )
        .unwrap();
        assert_eq!(cfg.n, Some(10));
        assert_eq!(cfg.trainer.variant, Variant::Huang);
        assert_eq!(cfg.trainer.alpha, 0.05);
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::parse("bogus=1\n").is_err());
        assert!(ExperimentConfig::parse("alpha=abc\n").is_err());
        assert!(ExperimentConfig::parse("variant=sgd\n").is_err());
        assert!(ExperimentConfig::parse("no equals sign\n").is_err());
    }
}
