//! Prompt templates with `{{name}}` placeholders.
//!
//! A template file holds a `[system]` section and a `[user]` section. Leading
//! lines starting with `##` are comments listing the placeholders.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::PipelineError;
use crate::llm::ChatMessage;

pub const TEMPLATE_NAMES: [&str; 11] = [
    "researcher_odds",
    "researcher_pitch",
    "career_profiler",
    "form_assessor",
    "strategizer",
    "selector_propose",
    "selector_fix",
    "reviewer",
    "selector_revise",
    "selector_name",
    "baseline",
];

fn embedded(name: &str) -> Option<&'static str> {
    Some(match name {
        "researcher_odds" => include_str!("../../prompts/researcher_odds.tmpl"),
        "researcher_pitch" => include_str!("../../prompts/researcher_pitch.tmpl"),
        "career_profiler" => include_str!("../../prompts/career_profiler.tmpl"),
        "form_assessor" => include_str!("../../prompts/form_assessor.tmpl"),
        "strategizer" => include_str!("../../prompts/strategizer.tmpl"),
        "selector_propose" => include_str!("../../prompts/selector_propose.tmpl"),
        "selector_fix" => include_str!("../../prompts/selector_fix.tmpl"),
        "reviewer" => include_str!("../../prompts/reviewer.tmpl"),
        "selector_revise" => include_str!("../../prompts/selector_revise.tmpl"),
        "selector_name" => include_str!("../../prompts/selector_name.tmpl"),
        "baseline" => include_str!("../../prompts/baseline.tmpl"),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub name: String,
    pub system: String,
    pub user: String,
}

impl Template {
    pub fn parse(name: &str, text: &str) -> Result<Self, PipelineError> {
        let bad = |m: &str| PipelineError::Prompt(format!("template `{name}`: {m}"));
        let body: String = text
            .lines()
            .skip_while(|l| l.starts_with("##"))
            .map(|l| format!("{l}\n"))
            .collect();
        let sys_at = body.find("[system]\n").ok_or_else(|| bad("missing [system] section"))?;
        let user_at = body.find("[user]\n").ok_or_else(|| bad("missing [user] section"))?;
        if user_at < sys_at {
            return Err(bad("[system] must come before [user]"));
        }
        Ok(Template {
            name: name.to_string(),
            system: body[sys_at + 9..user_at].trim().to_string(),
            user: body[user_at + 7..].trim().to_string(),
        })
    }

    /// Names of all placeholders, in order of first appearance.
    pub fn placeholders(&self) -> Vec<String> {
        let mut out = Vec::new();
        for part in [&self.system, &self.user] {
            let mut rest = part.as_str();
            while let Some(i) = rest.find("{{") {
                let after = &rest[i + 2..];
                let Some(j) = after.find("}}") else { break };
                let key = after[..j].to_string();
                if !out.contains(&key) {
                    out.push(key);
                }
                rest = &after[j + 2..];
            }
        }
        out
    }

    fn fill(&self, text: &str, vars: &BTreeMap<&str, String>) -> Result<String, PipelineError> {
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        while let Some(i) = rest.find("{{") {
            out.push_str(&rest[..i]);
            let after = &rest[i + 2..];
            let j = after
                .find("}}")
                .ok_or_else(|| PipelineError::Prompt(format!("template `{}`: unclosed placeholder", self.name)))?;
            let key = &after[..j];
            let value = vars.get(key).ok_or_else(|| {
                PipelineError::Prompt(format!("template `{}`: no value for `{{{{{key}}}}}`", self.name))
            })?;
            out.push_str(value);
            rest = &after[j + 2..];
        }
        out.push_str(rest);
        Ok(out)
    }

    pub fn render(&self, vars: &BTreeMap<&str, String>) -> Result<Vec<ChatMessage>, PipelineError> {
        Ok(vec![
            ChatMessage::system(self.fill(&self.system, vars)?),
            ChatMessage::user(self.fill(&self.user, vars)?),
        ])
    }
}

/// The full set of agent templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    templates: BTreeMap<String, Template>,
}

impl PromptSet {
    /// Templates compiled into the library.
    pub fn embedded() -> Self {
        let templates = TEMPLATE_NAMES
            .iter()
            .map(|n| {
                let t = Template::parse(n, embedded(n).unwrap()).expect("embedded templates parse");
                (n.to_string(), t)
            })
            .collect();
        PromptSet { templates }
    }

    /// Embedded templates, overridden by any `<name>.tmpl` found in `dir`.
    pub fn with_overrides(dir: &Path) -> Result<Self, PipelineError> {
        let mut set = Self::embedded();
        for name in TEMPLATE_NAMES {
            let path = dir.join(format!("{name}.tmpl"));
            if path.exists() {
                let text = fs::read_to_string(&path).map_err(|e| PipelineError::Prompt(format!("{}: {e}", path.display())))?;
                set.templates.insert(name.to_string(), Template::parse(name, &text)?);
            }
        }
        Ok(set)
    }

    pub fn get(&self, name: &str) -> Result<&Template, PipelineError> {
        self.templates
            .get(name)
            .ok_or_else(|| PipelineError::Prompt(format!("unknown template `{name}`")))
    }

    pub fn render(&self, name: &str, vars: &BTreeMap<&str, String>) -> Result<Vec<ChatMessage>, PipelineError> {
        self.get(name)?.render(vars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_embedded_templates_parse() {
        let set = PromptSet::embedded();
        for n in TEMPLATE_NAMES {
            let t = set.get(n).unwrap();
            assert!(!t.system.is_empty() && !t.user.is_empty(), "{n}");
        }
    }

    #[test]
    fn render_and_missing_value() {
        let t = Template::parse("t", "## placeholders: who\n[system]\nBe brief.\n[user]\nHello {{who}}!\n").unwrap();
        assert_eq!(t.placeholders(), ["who"]);
        let mut vars = BTreeMap::new();
        assert!(t.render(&vars).is_err());
        vars.insert("who", "there".to_string());
        let m = t.render(&vars).unwrap();
        assert_eq!(m[0].content, "Be brief.");
        assert_eq!(m[1].content, "Hello there!");
    }

    #[test]
    fn overrides_replace_embedded() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("reviewer.tmpl"), "[system]\nS\n[user]\nU {{input}}\n").unwrap();
        let set = PromptSet::with_overrides(dir.path()).unwrap();
        assert_eq!(set.get("reviewer").unwrap().system, "S");
        assert_eq!(set.get("strategizer").unwrap(), PromptSet::embedded().get("strategizer").unwrap());
    }
}
