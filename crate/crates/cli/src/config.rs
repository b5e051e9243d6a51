//! The run configuration: `key = value` lines, `#` comments, unknown keys rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use wallcross::num::parse_rat;
use wallcross::rank2::{Rank2Options, Strictness, TgWeight};
use wallcross::rank0inductive::Method2Options;
use wallcross::resolver::Policy;
use wallcross::tables::{synthetic_curve_tables, TableKind, Window};
use wallcross::{GeometryParams, Rat, TableSet};

const DEFAULTS: &[(&str, &str)] = &[
    ("geometry.h3", "5"),
    ("geometry.c2h", "50"),
    ("geometry.tors", "1"),
    ("lattice.beta_den", "2"),
    ("lattice.m_den", "6"),
    ("tables.path", ""),
    ("method2.strict", "false"),
    ("method2.kappa_min", ""),
    ("method2.kappa_max", ""),
    ("rank2.strictness", "paper"),
    ("rank2.tg_weight", "definition"),
    ("rank2.policy", "direct"),
    ("rank2.sub_n", "1"),
    ("osv.k_probe", "10"),
    ("osv.epsilon", ""),
    ("osv.two_sided", "false"),
    ("osv.beta_radius", "2"),
    ("osv.m_radius", "4"),
    ("synthetic.deg_max", "8"),
    ("synthetic.m_max", "40"),
    ("synthetic.den", "4"),
];

#[derive(Clone, Debug)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    /// Directory relative table paths are resolved against.
    base: PathBuf,
    pub geom: GeometryParams,
}

fn bad(key: &str, value: &str, what: &str) -> String {
    format!("config key {key} = {value:?}: {what}")
}

impl RunConfig {
    pub fn defaults() -> Self {
        RunConfig::parse("", Path::new(".")).expect("defaults are valid")
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        RunConfig::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let mut values: BTreeMap<String, String> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if !values.contains_key(k) {
                return Err(format!("config line {}: unknown key {k}", i + 1));
            }
            if !seen.insert(k.to_string()) {
                return Err(format!("config line {}: duplicate key {k}", i + 1));
            }
            values.insert(k.to_string(), v.to_string());
        }
        let mut cfg = RunConfig { values, base: base.to_path_buf(), geom: GeometryParams::quintic() };
        cfg.geom = GeometryParams::new(
            cfg.int("geometry.h3")?,
            cfg.int("geometry.c2h")?,
            cfg.int("geometry.tors")?,
            cfg.int("lattice.beta_den")?,
            cfg.int("lattice.m_den")?,
        )
        .map_err(|e| e.to_string())?;
        // validate everything up front
        cfg.method2_options()?;
        cfg.rank2_options()?;
        cfg.bool("osv.two_sided")?;
        cfg.int("osv.k_probe")?;
        cfg.opt_rat("osv.epsilon")?;
        cfg.rat("osv.beta_radius")?;
        cfg.rat("osv.m_radius")?;
        cfg.synthetic_window()?;
        Ok(cfg)
    }

    fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("known key")
    }

    pub fn rat(&self, key: &str) -> Result<Rat, String> {
        let v = self.get(key);
        parse_rat(v).ok_or_else(|| bad(key, v, "not a rational"))
    }

    pub fn opt_rat(&self, key: &str) -> Result<Option<Rat>, String> {
        if self.get(key).is_empty() {
            return Ok(None);
        }
        self.rat(key).map(Some)
    }

    pub fn int(&self, key: &str) -> Result<i64, String> {
        let v = self.get(key);
        v.parse().map_err(|_| bad(key, v, "not an integer"))
    }

    fn opt_int(&self, key: &str) -> Result<Option<i64>, String> {
        if self.get(key).is_empty() {
            return Ok(None);
        }
        self.int(key).map(Some)
    }

    pub fn bool(&self, key: &str) -> Result<bool, String> {
        match self.get(key) {
            "true" => Ok(true),
            "false" => Ok(false),
            v => Err(bad(key, v, "expected true or false")),
        }
    }

    pub fn method2_options(&self) -> Result<Method2Options, String> {
        let window = match (self.opt_int("method2.kappa_min")?, self.opt_int("method2.kappa_max")?) {
            (Some(lo), Some(hi)) if lo <= hi => Some((lo, hi)),
            (None, None) => None,
            _ => return Err("method2.kappa_min and method2.kappa_max must be set together, min <= max".into()),
        };
        Ok(Method2Options { strict: self.bool("method2.strict")?, kappa_window: window })
    }

    pub fn rank2_options(&self) -> Result<Rank2Options, String> {
        let strictness = parse_strictness(self.get("rank2.strictness")).ok_or_else(|| bad("rank2.strictness", self.get("rank2.strictness"), "expected paper or flip"))?;
        let tg_weight = match self.get("rank2.tg_weight") {
            "definition" => TgWeight::Definition,
            "printed" => TgWeight::Printed,
            v => return Err(bad("rank2.tg_weight", v, "expected definition or printed")),
        };
        let policy = match self.get("rank2.policy") {
            "direct" => Policy::PreferDirect,
            "inductive" => Policy::InductiveOnly,
            v => return Err(bad("rank2.policy", v, "expected direct or inductive")),
        };
        Ok(Rank2Options { strictness, tg_weight, policy, sub_n: self.int("rank2.sub_n")?, external: None })
    }

    pub fn synthetic_window(&self) -> Result<(Window, i64), String> {
        let (deg_max, m_max, den) = (self.int("synthetic.deg_max")?, self.int("synthetic.m_max")?, self.int("synthetic.den")?);
        if deg_max < 0 || m_max < 0 || den < 1 {
            return Err("synthetic.* values must be non-negative, den positive".into());
        }
        Ok((Window::new(0, deg_max, -m_max, m_max), den))
    }

    pub fn tables_path(&self) -> Option<PathBuf> {
        let p = self.get("tables.path");
        (!p.is_empty()).then(|| self.base.join(p))
    }

    /// The configured tables, or seeded synthetic ones, or the minimal table.
    pub fn tables(&self, seed: Option<u64>) -> Result<TableSet, String> {
        if let Some(seed) = seed {
            let (w, den) = self.synthetic_window()?;
            return Ok(synthetic_curve_tables(seed, &[(TableKind::Pt, w.clone()), (TableKind::Dt1, w)], den, &self.geom));
        }
        match self.tables_path() {
            Some(p) => TableSet::load(&p).map_err(|e| format!("{}: {e}", p.display())),
            None => Ok(TableSet::minimal()),
        }
    }

    /// `key = value` lines with defaults filled in, sorted by key.
    pub fn canonical(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }
}

pub fn parse_strictness(s: &str) -> Option<Strictness> {
    match s {
        "paper" => Some(Strictness::Paper),
        "flip" => Some(Strictness::Flip),
        _ => None,
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_quintic() {
        let c = RunConfig::defaults();
        assert_eq!(c.geom, GeometryParams::quintic());
        assert!(c.tables_path().is_none());
        assert_eq!(c.hash(), RunConfig::defaults().hash());
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        let base = Path::new(".");
        assert!(RunConfig::parse("geometry.h4 = 5", base).unwrap_err().contains("unknown key"));
        assert!(RunConfig::parse("geometry.h3 = 1/2", base).is_err());
        assert!(RunConfig::parse("geometry.h3", base).is_err());
        assert!(RunConfig::parse("rank2.strictness = loose", base).is_err());
        assert!(RunConfig::parse("method2.kappa_min = 1", base).is_err());
        assert!(RunConfig::parse("geometry.h3 = 5\ngeometry.h3 = 5", base).unwrap_err().contains("duplicate"));
    }

    #[test]
    fn values_change_the_hash() {
        let base = Path::new(".");
        let a = RunConfig::parse("# comment\nosv.k_probe = 12\n", base).unwrap();
        assert_eq!(a.int("osv.k_probe").unwrap(), 12);
        assert_ne!(a.hash(), RunConfig::defaults().hash());
        assert_eq!(RunConfig::parse("osv.k_probe = 10", base).unwrap().hash(), RunConfig::defaults().hash());
    }
}
