//! Config bundles: a factorial design plus the template set that renders it.
//!
//! Bundles are JSON files. A few named bundles ship embedded in the binary:
//! `paper-fullstack` (French, full-stack developers), `paper-fullstack-en`
//! (same design, English templates), `paper-seo` (French, SEO content
//! writing) and `desk-en` (a small English design for quick runs and tests).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::DesignConfig;
use crate::error::DesignError;
use crate::ids::content_hash;
use crate::render::TemplateSet;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigBundle {
    pub design: DesignConfig,
    pub templates: TemplateSet,
}

pub const SHIPPED_CONFIGS: [&str; 4] = [
    "paper-fullstack",
    "paper-fullstack-en",
    "paper-seo",
    "desk-en",
];

impl ConfigBundle {
    pub fn from_json(json: &str) -> Result<Self, DesignError> {
        let bundle: ConfigBundle = serde_json::from_str(json)
            .map_err(|e| DesignError::Config(format!("invalid config bundle: {e}")))?;
        bundle.validate()?;
        Ok(bundle)
    }

    /// Load one of the shipped named bundles.
    pub fn load_named(name: &str) -> Result<Self, DesignError> {
        let json = match name {
            "paper-fullstack" => include_str!("../configs/paper-fullstack.json"),
            "paper-fullstack-en" => include_str!("../configs/paper-fullstack-en.json"),
            "paper-seo" => include_str!("../configs/paper-seo.json"),
            "desk-en" => include_str!("../configs/desk-en.json"),
            other => {
                return Err(DesignError::Config(format!(
                    "unknown config `{other}`; shipped configs: {}",
                    SHIPPED_CONFIGS.join(", ")
                )))
            }
        };
        Self::from_json(json)
    }

    /// Load a bundle from a path, falling back to shipped names.
    pub fn load(spec: &str) -> Result<Self, DesignError> {
        if SHIPPED_CONFIGS.contains(&spec) {
            return Self::load_named(spec);
        }
        let path = Path::new(spec);
        let json = std::fs::read_to_string(path).map_err(|e| {
            DesignError::Config(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        Self::from_json(&json)
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        self.design.validate()?;
        // Template completeness: every (domain, level) that can render needs a phrase.
        for domain in self
            .design
            .profile_domains
            .iter()
            .chain(&self.design.brief_domains)
        {
            for level in domain.level_ids() {
                if !self.has_phrase(&domain.name, level) {
                    return Err(DesignError::Config(format!(
                        "templates lack a phrase for domain `{}` level `{level}`",
                        domain.name
                    )));
                }
            }
        }
        for (key, level) in &self.design.brief_constants {
            if !self.has_phrase(key, level) {
                return Err(DesignError::Config(format!(
                    "templates lack a phrase for brief constant `{key}` level `{level}`"
                )));
            }
        }
        Ok(())
    }

    fn has_phrase(&self, domain: &str, level: &str) -> bool {
        self.templates
            .phrases
            .get(domain)
            .is_some_and(|levels| levels.contains_key(level))
    }

    /// Stable hash of the whole bundle; used for campaign cache keys.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("bundle serializes");
        content_hash(canonical.as_bytes())
    }
}
