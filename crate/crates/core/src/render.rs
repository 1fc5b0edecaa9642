//! Deterministic document rendering.
//!
//! Templates are plain UTF-8 text with `{{placeholder}}` markers. Profile and
//! brief templates draw their bindings from per-level phrases declared in the
//! config bundle; prompt templates embed previously rendered documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::design::{BriefSpec, DesignConfig, ProfileSpec};
use crate::error::RenderError;
use crate::ids::content_hash;

/// Positional labels used by ranking prompts and their parser.
pub const RANK_LABELS: [&str; 3] = ["A", "B", "C"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateSet {
    pub locale: String,
    pub profile_template: String,
    pub brief_template: String,
    pub scoring_prompt_template: String,
    pub ranking_prompt_template: String,
    /// domain (or constant key) -> level -> localized phrase.
    pub phrases: BTreeMap<String, BTreeMap<String, String>>,
}

impl TemplateSet {
    fn phrase(&self, domain: &str, level: &str) -> Result<&str, RenderError> {
        self.phrases
            .get(domain)
            .and_then(|levels| levels.get(level))
            .map(String::as_str)
            .ok_or_else(|| {
                RenderError::Template(format!("no phrase for domain `{domain}` level `{level}`"))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    Profile,
    Brief,
    Prompt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedDocument {
    pub doc_id: String,
    pub kind: DocKind,
    pub text: String,
    pub source_id: String,
}

impl RenderedDocument {
    fn new(kind: DocKind, text: String, source_id: String) -> Self {
        RenderedDocument {
            doc_id: content_hash(text.as_bytes()),
            kind,
            text,
            source_id,
        }
    }
}

/// Replace every `{{key}}` marker; an unbound key is a template error.
fn substitute(template: &str, bindings: &BTreeMap<&str, &str>) -> Result<String, RenderError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after.find("}}").ok_or_else(|| {
            RenderError::Template("unterminated `{{` placeholder".to_string())
        })?;
        let key = after[..end].trim();
        let value = bindings.get(key).ok_or_else(|| {
            RenderError::Template(format!("unbound placeholder `{key}`"))
        })?;
        out.push_str(value);
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Render one profile document.
pub fn render_profile(
    profile: &ProfileSpec,
    config: &DesignConfig,
    templates: &TemplateSet,
) -> Result<RenderedDocument, RenderError> {
    let mut bindings = BTreeMap::new();
    for domain in &config.profile_domains {
        let level = profile.assignments.get(&domain.name).ok_or_else(|| {
            RenderError::Template(format!("profile has no assignment for `{}`", domain.name))
        })?;
        bindings.insert(
            domain.render_key.as_str(),
            templates.phrase(&domain.name, level)?,
        );
    }
    let text = substitute(&templates.profile_template, &bindings)?;
    Ok(RenderedDocument::new(
        DocKind::Profile,
        text,
        profile.profile_id.clone(),
    ))
}

/// Render one brief document. Constants render through the same phrase table.
pub fn render_brief(
    brief: &BriefSpec,
    config: &DesignConfig,
    templates: &TemplateSet,
) -> Result<RenderedDocument, RenderError> {
    let mut bindings = BTreeMap::new();
    for domain in &config.brief_domains {
        let level = brief.assignments.get(&domain.name).ok_or_else(|| {
            RenderError::Template(format!("brief has no assignment for `{}`", domain.name))
        })?;
        bindings.insert(
            domain.render_key.as_str(),
            templates.phrase(&domain.name, level)?,
        );
    }
    for (key, level) in &brief.constants {
        bindings.insert(key.as_str(), templates.phrase(key, level)?);
    }
    let text = substitute(&templates.brief_template, &bindings)?;
    Ok(RenderedDocument::new(
        DocKind::Brief,
        text,
        brief.brief_id.clone(),
    ))
}

/// Assemble the scoring prompt for one profile-brief pair.
pub fn build_scoring_prompt(
    profile_doc: &RenderedDocument,
    brief_doc: &RenderedDocument,
    templates: &TemplateSet,
) -> Result<RenderedDocument, RenderError> {
    let mut bindings = BTreeMap::new();
    bindings.insert("profile", profile_doc.text.as_str());
    bindings.insert("brief", brief_doc.text.as_str());
    let text = substitute(&templates.scoring_prompt_template, &bindings)?;
    Ok(RenderedDocument::new(
        DocKind::Prompt,
        text,
        format!("{}:{}", profile_doc.source_id, brief_doc.source_id),
    ))
}

/// Assemble the ranking prompt for a triple of profiles, preserving the given
/// presentation order. The caller controls order randomization.
pub fn build_ranking_prompt(
    profile_docs: &[RenderedDocument],
    brief_doc: &RenderedDocument,
    templates: &TemplateSet,
) -> Result<RenderedDocument, RenderError> {
    if profile_docs.len() != 3 {
        return Err(RenderError::Arity {
            expected: 3,
            got: profile_docs.len(),
        });
    }
    let mut bindings = BTreeMap::new();
    bindings.insert("profile_a", profile_docs[0].text.as_str());
    bindings.insert("profile_b", profile_docs[1].text.as_str());
    bindings.insert("profile_c", profile_docs[2].text.as_str());
    bindings.insert("brief", brief_doc.text.as_str());
    let text = substitute(&templates.ranking_prompt_template, &bindings)?;
    let source_id = format!(
        "{}+{}+{}:{}",
        profile_docs[0].source_id,
        profile_docs[1].source_id,
        profile_docs[2].source_id,
        brief_doc.source_id
    );
    Ok(RenderedDocument::new(DocKind::Prompt, text, source_id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigBundle;
    use crate::design::{enumerate_briefs, enumerate_profiles};
    use std::collections::BTreeSet;

    fn desk() -> ConfigBundle {
        ConfigBundle::load_named("desk-en").unwrap()
    }

    #[test]
    fn starter_profile_renders_platform_activity_lines() {
        let bundle = desk();
        let profiles = enumerate_profiles(&bundle.design).unwrap();
        let starter = profiles
            .iter()
            .find(|p| p.assignments[&bundle.design.features.reputation.profile_domain] == "starter")
            .unwrap();
        let doc = render_profile(starter, &bundle.design, &bundle.templates).unwrap();
        assert!(doc.text.contains("Projects signed: 1"), "{}", doc.text);
        assert!(doc.text.contains("Average client rating: 5/5"));
        assert!(doc.text.contains("badge: No"));
    }

    #[test]
    fn zero_project_profile_omits_badge_and_rating_lines() {
        let bundle = desk();
        let profiles = enumerate_profiles(&bundle.design).unwrap();
        let none = profiles
            .iter()
            .find(|p| p.assignments[&bundle.design.features.reputation.profile_domain] == "none")
            .unwrap();
        let doc = render_profile(none, &bundle.design, &bundle.templates).unwrap();
        assert!(doc.text.contains("Projects signed: 0"));
        assert!(!doc.text.contains("rating"));
        assert!(!doc.text.contains("badge"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let bundle = desk();
        let profiles = enumerate_profiles(&bundle.design).unwrap();
        let a = render_profile(&profiles[3], &bundle.design, &bundle.templates).unwrap();
        let b = render_profile(&profiles[3], &bundle.design, &bundle.templates).unwrap();
        assert_eq!(a.text, b.text);
        assert_eq!(a.doc_id, b.doc_id);
    }

    #[test]
    fn missing_phrase_is_a_template_error() {
        let bundle = desk();
        let profiles = enumerate_profiles(&bundle.design).unwrap();
        let mut templates = bundle.templates.clone();
        templates.phrases.remove(&bundle.design.features.name.profile_domain);
        assert!(matches!(
            render_profile(&profiles[0], &bundle.design, &templates),
            Err(RenderError::Template(_))
        ));
    }

    #[test]
    fn briefs_render_constants_and_distinct_docs() {
        let bundle = desk();
        let briefs = enumerate_briefs(&bundle.design).unwrap();
        let mut ids = BTreeSet::new();
        for b in &briefs {
            let doc = render_brief(b, &bundle.design, &bundle.templates).unwrap();
            assert!(doc.text.contains("€400/day"), "{}", doc.text);
            ids.insert(doc.doc_id);
        }
        assert_eq!(ids.len(), briefs.len());
    }

    #[test]
    fn scoring_prompt_contains_required_output_format() {
        let bundle = desk();
        let profiles = enumerate_profiles(&bundle.design).unwrap();
        let briefs = enumerate_briefs(&bundle.design).unwrap();
        let p = render_profile(&profiles[0], &bundle.design, &bundle.templates).unwrap();
        let b = render_brief(&briefs[0], &bundle.design, &bundle.templates).unwrap();
        let prompt = build_scoring_prompt(&p, &b, &bundle.templates).unwrap();
        assert!(prompt.text.contains("Score :"));
        assert!(prompt.text.contains("/10"));
        assert!(prompt.text.contains(&p.text));
        assert!(prompt.text.contains(&b.text));
        // Swapping the slots changes the document.
        let swapped = build_scoring_prompt(&b, &p, &bundle.templates).unwrap();
        assert_ne!(prompt.doc_id, swapped.doc_id);
    }

    #[test]
    fn ranking_prompt_preserves_presentation_order() {
        let bundle = desk();
        let profiles = enumerate_profiles(&bundle.design).unwrap();
        let briefs = enumerate_briefs(&bundle.design).unwrap();
        let docs: Vec<_> = profiles[..3]
            .iter()
            .map(|p| render_profile(p, &bundle.design, &bundle.templates).unwrap())
            .collect();
        let b = render_brief(&briefs[0], &bundle.design, &bundle.templates).unwrap();
        let prompt = build_ranking_prompt(&docs, &b, &bundle.templates).unwrap();
        let pos: Vec<_> = docs.iter().map(|d| prompt.text.find(&d.text).unwrap()).collect();
        assert!(pos[0] < pos[1] && pos[1] < pos[2]);

        let permuted = [docs[2].clone(), docs[0].clone(), docs[1].clone()];
        let prompt2 = build_ranking_prompt(&permuted, &b, &bundle.templates).unwrap();
        let pos2: Vec<_> = permuted.iter().map(|d| prompt2.text.find(&d.text).unwrap()).collect();
        assert!(pos2[0] < pos2[1] && pos2[1] < pos2[2]);
        assert_ne!(prompt.doc_id, prompt2.doc_id);
    }

    #[test]
    fn ranking_prompt_rejects_wrong_arity() {
        let bundle = desk();
        let profiles = enumerate_profiles(&bundle.design).unwrap();
        let briefs = enumerate_briefs(&bundle.design).unwrap();
        let docs: Vec<_> = profiles[..2]
            .iter()
            .map(|p| render_profile(p, &bundle.design, &bundle.templates).unwrap())
            .collect();
        let b = render_brief(&briefs[0], &bundle.design, &bundle.templates).unwrap();
        assert!(matches!(
            build_ranking_prompt(&docs, &b, &bundle.templates),
            Err(RenderError::Arity { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn rendering_is_injective_on_varied_dimensions() {
        let bundle = desk();
        let profiles = enumerate_profiles(&bundle.design).unwrap();
        let mut ids = BTreeSet::new();
        for p in &profiles {
            let doc = render_profile(p, &bundle.design, &bundle.templates).unwrap();
            assert!(ids.insert(doc.doc_id), "two profiles rendered identically");
        }
    }
}
