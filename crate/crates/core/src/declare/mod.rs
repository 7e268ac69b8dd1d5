//! Declare constraint templates.
//!
//! Each template is defined operationally by a regular expression over the
//! window projected onto `{A, B, O}` (first argument, second argument, any
//! other activity). Expressions are compiled once into minimal DFAs that are
//! shared by every activity pair. [`oracle`] evaluates the same templates by
//! direct scanning and exists to cross-check the automata.

mod automaton;
pub mod oracle;
mod profile;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use thiserror::Error;

use crate::event_log::ActivityId;

pub use automaton::{Dfa, Symbol};
pub use profile::{CompiledProfile, ConstraintProfile, ProfileError};

/// Largest count parameter accepted by existence / absence / exactly.
pub const MAX_COUNT: u8 = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("{template} does not support parameter {n} (expected 1..={MAX_COUNT})")]
    UnsupportedParameter { template: &'static str, n: u8 },
    #[error("{template} takes {expected} argument(s), got {got}")]
    ArityMismatch {
        template: Template,
        expected: usize,
        got: usize,
    },
    #[error("{0} needs two distinct activities")]
    SameArguments(Template),
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("regex syntax: {0}")]
    RegexSyntax(String),
}

/// The 21 Declare templates. Counted templates carry their parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Template {
    Existence(u8),
    Absence(u8),
    Exactly(u8),
    Init,
    Last,
    RespondedExistence,
    CoExistence,
    Response,
    Precedence,
    Succession,
    AlternateResponse,
    AlternatePrecedence,
    AlternateSuccession,
    ChainResponse,
    ChainPrecedence,
    ChainSuccession,
    NotCoExistence,
    NotSuccession,
    NotChainSuccession,
    Choice,
    ExclusiveChoice,
}

impl Template {
    /// One instance of every template, counted ones with parameter 1.
    pub const ALL: [Template; 21] = [
        Template::Existence(1),
        Template::Absence(1),
        Template::Exactly(1),
        Template::Init,
        Template::Last,
        Template::RespondedExistence,
        Template::CoExistence,
        Template::Response,
        Template::Precedence,
        Template::Succession,
        Template::AlternateResponse,
        Template::AlternatePrecedence,
        Template::AlternateSuccession,
        Template::ChainResponse,
        Template::ChainPrecedence,
        Template::ChainSuccession,
        Template::NotCoExistence,
        Template::NotSuccession,
        Template::NotChainSuccession,
        Template::Choice,
        Template::ExclusiveChoice,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Template::Existence(_) => "existence",
            Template::Absence(_) => "absence",
            Template::Exactly(_) => "exactly",
            Template::Init => "init",
            Template::Last => "last",
            Template::RespondedExistence => "responded_existence",
            Template::CoExistence => "co_existence",
            Template::Response => "response",
            Template::Precedence => "precedence",
            Template::Succession => "succession",
            Template::AlternateResponse => "alternate_response",
            Template::AlternatePrecedence => "alternate_precedence",
            Template::AlternateSuccession => "alternate_succession",
            Template::ChainResponse => "chain_response",
            Template::ChainPrecedence => "chain_precedence",
            Template::ChainSuccession => "chain_succession",
            Template::NotCoExistence => "not_co_existence",
            Template::NotSuccession => "not_succession",
            Template::NotChainSuccession => "not_chain_succession",
            Template::Choice => "choice",
            Template::ExclusiveChoice => "exclusive_choice",
        }
    }

    pub fn count(&self) -> Option<u8> {
        match *self {
            Template::Existence(n) | Template::Absence(n) | Template::Exactly(n) => Some(n),
            _ => None,
        }
    }

    pub fn arity(&self) -> usize {
        if self.is_unary() {
            1
        } else {
            2
        }
    }

    pub fn is_unary(&self) -> bool {
        matches!(
            self,
            Template::Existence(_) | Template::Absence(_) | Template::Exactly(_) | Template::Init | Template::Last
        )
    }

    /// Alternate templates are only mined when their second argument occurs
    /// at least twice in the window.
    pub fn needs_repeated_second(&self) -> bool {
        matches!(self, Template::AlternateResponse | Template::AlternatePrecedence)
    }

    fn check_parameter(&self) -> Result<(), TemplateError> {
        match self.count() {
            Some(n) if !(1..=MAX_COUNT).contains(&n) => Err(TemplateError::UnsupportedParameter {
                template: self.name(),
                n,
            }),
            _ => Ok(()),
        }
    }

    /// The defining expression over `A` (first argument), `B` (second
    /// argument) and `O` (anything else).
    pub fn regex(&self) -> String {
        match *self {
            Template::Existence(n) => format!(".*(A.*){{{n}}}"),
            Template::Absence(n) => format!("[^A]*(A?[^A]*){{{}}}", n.saturating_sub(1)),
            Template::Exactly(n) => format!("[^A]*(A[^A]*){{{n}}}"),
            Template::Init => "(A.*)?".into(),
            Template::Last => ".*A".into(),
            Template::RespondedExistence => "[^A]*((A.*B.*)|(B.*A.*))?".into(),
            Template::CoExistence => "[^AB]*((A.*B.*)|(B.*A.*))?".into(),
            Template::Response => "[^A]*(A.*B)*[^A]*".into(),
            Template::Precedence => "[^B]*(A.*B)*[^B]*".into(),
            Template::Succession => "[^AB]*(A.*B)*[^AB]*".into(),
            Template::AlternateResponse => "[^A]*(A[^A]*B[^A]*)*".into(),
            Template::AlternatePrecedence => "[^B]*(A[^B]*B[^B]*)*".into(),
            Template::AlternateSuccession => "[^AB]*(A[^AB]*B[^AB]*)*".into(),
            Template::ChainResponse => "[^A]*(AB[^A]*)*".into(),
            Template::ChainPrecedence => "[^B]*(AB[^B]*)*".into(),
            Template::ChainSuccession => "[^AB]*(AB[^AB]*)*".into(),
            Template::NotCoExistence => "[^AB]*((A[^B]*)|(B[^A]*))?".into(),
            Template::NotSuccession => "[^A]*(A[^B]*)*".into(),
            Template::NotChainSuccession => "[^A]*(A+[^AB][^A]*)*A*".into(),
            Template::Choice => ".*[AB].*".into(),
            Template::ExclusiveChoice => "([^B]*A[^B]*)|([^A]*B[^A]*)".into(),
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.count() {
            Some(n) => write!(f, "{}:{n}", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for Template {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let unknown = || TemplateError::UnknownTemplate(s.to_string());
        let (name, param) = match s.split_once(':') {
            Some((name, p)) => (name, Some(p.parse::<u8>().map_err(|_| unknown())?)),
            None => (s, None),
        };
        let counted = |ctor: fn(u8) -> Template| -> Result<Template, TemplateError> {
            let t = ctor(param.ok_or_else(unknown)?);
            t.check_parameter()?;
            Ok(t)
        };
        let plain = |t: Template| if param.is_some() { Err(unknown()) } else { Ok(t) };
        match name {
            "existence" => counted(Template::Existence),
            "absence" => counted(Template::Absence),
            "exactly" => counted(Template::Exactly),
            _ => {
                let t = Template::ALL
                    .iter()
                    .find(|t| t.count().is_none() && t.name() == name)
                    .ok_or_else(unknown)?;
                plain(*t)
            }
        }
    }
}

fn cache() -> &'static RwLock<HashMap<Template, Arc<Dfa>>> {
    static CACHE: OnceLock<RwLock<HashMap<Template, Arc<Dfa>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Compiles the template's expression into a minimal DFA. Results are
/// memoized process-wide; concurrent first use compiles at most redundantly
/// and every caller observes the same automaton.
pub fn compile_template(template: Template) -> Result<Arc<Dfa>, TemplateError> {
    template.check_parameter()?;
    if let Some(dfa) = cache().read().expect("template cache poisoned").get(&template) {
        return Ok(Arc::clone(dfa));
    }
    let dfa = Arc::new(Dfa::from_regex(&template.regex())?);
    let mut guard = cache().write().expect("template cache poisoned");
    Ok(Arc::clone(guard.entry(template).or_insert(dfa)))
}

fn check_arguments(template: Template, first: ActivityId, second: Option<ActivityId>) -> Result<(), TemplateError> {
    let got = 1 + second.is_some() as usize;
    if got != template.arity() {
        return Err(TemplateError::ArityMismatch {
            template,
            expected: template.arity(),
            got,
        });
    }
    if second == Some(first) {
        return Err(TemplateError::SameArguments(template));
    }
    Ok(())
}

/// Whether `window` satisfies `template(first[, second])`, decided by the
/// compiled automaton.
pub fn evaluate_template(
    template: Template,
    first: ActivityId,
    second: Option<ActivityId>,
    window: &[ActivityId],
) -> Result<bool, TemplateError> {
    check_arguments(template, first, second)?;
    Ok(compile_template(template)?.accepts_projected(window, first, second))
}
