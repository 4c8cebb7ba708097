//! Run configuration: TOML with one section per stage, layered as
//! built-in defaults < config file < `key=value` overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::qaum::QaumMode;
use crate::qhbf::QhbfParams;
use crate::qlrd::QlrdParams;
use crate::qls::QlsParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalityConfig {
    pub qls: QlsParams,
    pub qlrd: QlrdParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub visible: ModalityConfig,
    pub infrared: ModalityConfig,
    pub qaum: QaumMode,
    pub qhbf: QhbfParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            visible: ModalityConfig {
                qls: QlsParams::default(),
                qlrd: QlrdParams::visible(),
            },
            infrared: ModalityConfig {
                qls: QlsParams::default(),
                qlrd: QlrdParams::infrared(),
            },
            qaum: QaumMode::default(),
            qhbf: QhbfParams::default(),
        }
    }
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_override(spec: &str) -> Result<Table> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let mut keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("bad key path `{path}`")));
    }
    let last = keys.pop().expect("split yields at least one key");
    let mut table = Table::new();
    table.insert(last.to_string(), value);
    for k in keys.into_iter().rev() {
        let mut outer = Table::new();
        outer.insert(k.to_string(), Value::Table(table));
        table = outer;
    }
    Ok(table)
}

impl PipelineConfig {
    /// Defaults overlaid with an optional TOML document and `a.b.c=value` overrides.
    pub fn resolve(document: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut table = Table::try_from(Self::default()).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(doc) = document {
            let user: Table = doc.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
            merge(&mut table, user);
        }
        for o in overrides {
            merge(&mut table, parse_override(o)?);
        }
        let cfg: Self = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let doc = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|source| {
                if source.kind() == std::io::ErrorKind::NotFound {
                    Error::MissingInput(p.to_path_buf())
                } else {
                    Error::Io {
                        path: p.to_path_buf(),
                        source,
                    }
                }
            })?),
            None => None,
        };
        Self::resolve(doc.as_deref(), overrides)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |section: &str, r: Result<()>| r.map_err(|e| Error::Config(format!("[{section}] {e}")));
        wrap("visible.qls", self.visible.qls.validate())?;
        wrap("visible.qlrd", self.visible.qlrd.validate())?;
        wrap("infrared.qls", self.infrared.qls.validate())?;
        wrap("infrared.qlrd", self.infrared.qlrd.validate())?;
        wrap("qaum", self.qaum.validate())?;
        wrap("qhbf", self.qhbf.validate())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }
}
