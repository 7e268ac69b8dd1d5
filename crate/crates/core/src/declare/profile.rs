use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use super::{compile_template, Dfa, Template, TemplateError};

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("profile channel indices must be 0..{0} without gaps or repeats")]
    NonDenseChannels(usize),
    #[error("template {0} appears more than once")]
    DuplicateTemplate(Template),
    #[error("profile is empty")]
    Empty,
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An ordered list of templates; the position of a template is its channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintProfile {
    templates: Vec<Template>,
}

impl ConstraintProfile {
    pub fn new(templates: Vec<Template>) -> Result<Self, ProfileError> {
        if templates.is_empty() {
            return Err(ProfileError::Empty);
        }
        for (i, t) in templates.iter().enumerate() {
            t.check_parameter()?;
            if templates[..i].contains(t) {
                return Err(ProfileError::DuplicateTemplate(*t));
            }
        }
        Ok(ConstraintProfile { templates })
    }

    /// The fourteen-channel profile used for the tensor datasets.
    pub fn default14() -> Self {
        use Template::*;
        ConstraintProfile {
            templates: vec![
                Absence(1),
                Exactly(1),
                Exactly(2),
                Existence(3),
                Init,
                Last,
                Precedence,
                AlternatePrecedence,
                ChainPrecedence,
                Response,
                AlternateResponse,
                ChainResponse,
                NotSuccession,
                CoExistence,
            ],
        }
    }

    /// Every template once, counted templates with parameter 1.
    pub fn all21() -> Self {
        ConstraintProfile {
            templates: Template::ALL.to_vec(),
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "default14" => Some(Self::default14()),
            "all21" => Some(Self::all21()),
            _ => None,
        }
    }

    pub const BUILTIN_NAMES: [&'static str; 2] = ["default14", "all21"];

    /// Resolves a built-in profile name, falling back to reading a profile file.
    pub fn resolve(name_or_path: &str) -> Result<Self, ProfileError> {
        match Self::builtin(name_or_path) {
            Some(p) => Ok(p),
            None => Self::read(name_or_path),
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, ProfileError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses `<channel_index>\t<template_id>` lines. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, ProfileError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| ProfileError::Malformed {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (idx, tpl) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected `<index>\\t<template>`"))?;
            let idx: usize = idx.trim().parse().map_err(|_| malformed("bad channel index"))?;
            let tpl: Template = tpl.parse()?;
            entries.push((idx, tpl));
        }
        entries.sort_by_key(|&(idx, _)| idx);
        if entries.iter().enumerate().any(|(i, &(idx, _))| i != idx) {
            return Err(ProfileError::NonDenseChannels(entries.len()));
        }
        Self::new(entries.into_iter().map(|(_, t)| t).collect())
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.templates.iter().enumerate() {
            let _ = writeln!(out, "{i}\t{t}");
        }
        out
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn channel(&self, index: usize) -> Option<Template> {
        self.templates.get(index).copied()
    }

    pub fn is_unary_channel(&self, index: usize) -> bool {
        self.templates[index].is_unary()
    }

    pub fn unary_channels(&self) -> usize {
        self.templates.iter().filter(|t| t.is_unary()).count()
    }

    pub fn binary_channels(&self) -> usize {
        self.len() - self.unary_channels()
    }

    /// Cells per window that a constraint can occupy: unary channels on the
    /// diagonal, binary channels off it.
    pub fn occupiable_cells(&self, alphabet_size: usize) -> usize {
        let a = alphabet_size;
        a * self.unary_channels() + a * a.saturating_sub(1) * self.binary_channels()
    }

    pub fn compile(&self) -> Result<CompiledProfile, TemplateError> {
        let mut unary = Vec::new();
        let mut binary = Vec::new();
        for (channel, &template) in self.templates.iter().enumerate() {
            let entry = ChannelAutomaton {
                channel: channel as u32,
                template,
                dfa: compile_template(template)?,
            };
            if template.is_unary() {
                unary.push(entry);
            } else {
                binary.push(entry);
            }
        }
        Ok(CompiledProfile {
            profile: self.clone(),
            unary,
            binary,
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ChannelAutomaton {
    pub channel: u32,
    pub template: Template,
    pub dfa: Arc<Dfa>,
}

/// A profile with its automata resolved, ready for mining.
#[derive(Debug, Clone)]
pub struct CompiledProfile {
    profile: ConstraintProfile,
    pub(crate) unary: Vec<ChannelAutomaton>,
    pub(crate) binary: Vec<ChannelAutomaton>,
}

impl CompiledProfile {
    pub fn profile(&self) -> &ConstraintProfile {
        &self.profile
    }
}
