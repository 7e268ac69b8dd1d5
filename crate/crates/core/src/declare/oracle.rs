//! Reference semantics for the Declare templates, read directly off their
//! finite-trace temporal formulas by scanning and counting. No automata are
//! involved; this is the yardstick the compiled DFAs are tested against.

use super::{check_arguments, Template, TemplateError};
use crate::event_log::ActivityId;

/// Evaluates `template(first[, second])` on `window` by direct scanning.
pub fn oracle_evaluate_template(
    template: Template,
    first: ActivityId,
    second: Option<ActivityId>,
    window: &[ActivityId],
) -> Result<bool, TemplateError> {
    check_arguments(template, first, second)?;
    let is_a: Vec<bool> = window.iter().map(|&e| e == first).collect();
    let is_b: Vec<bool> = window.iter().map(|&e| Some(e) == second).collect();
    Ok(holds(template, &is_a, &is_b))
}

fn holds(template: Template, a: &[bool], b: &[bool]) -> bool {
    let n = a.len();
    let count_a = a.iter().filter(|&&x| x).count();
    let any_a = count_a > 0;
    let any_b = b.iter().any(|&x| x);
    let positions = |v: &[bool]| -> Vec<usize> { (0..n).filter(|&i| v[i]).collect() };

    // every A at i is eventually followed by a B
    let response = || positions(a).iter().all(|&i| (i + 1..n).any(|j| b[j]));
    // every B at j has an earlier A
    let precedence = || positions(b).iter().all(|&j| (0..j).any(|i| a[i]));
    // after every A, a B occurs before the next A
    let alt_response = || {
        positions(a)
            .iter()
            .all(|&i| (i + 1..n).find(|&j| a[j] || b[j]).is_some_and(|j| b[j]))
    };
    // before every B, an A occurs after the previous B
    let alt_precedence = || {
        positions(b)
            .iter()
            .all(|&j| (0..j).rev().find(|&i| a[i] || b[i]).is_some_and(|i| a[i]))
    };
    let chain_response = || positions(a).iter().all(|&i| i + 1 < n && b[i + 1]);
    let chain_precedence = || positions(b).iter().all(|&j| j > 0 && a[j - 1]);

    match template {
        Template::Existence(k) => count_a >= k as usize,
        Template::Absence(k) => count_a < k as usize,
        Template::Exactly(k) => count_a == k as usize,
        // vacuously true on the empty window
        Template::Init => n == 0 || a[0],
        Template::Last => n > 0 && a[n - 1],
        Template::RespondedExistence => !any_a || any_b,
        Template::CoExistence => any_a == any_b,
        Template::Response => response(),
        Template::Precedence => precedence(),
        Template::Succession => response() && precedence(),
        Template::AlternateResponse => alt_response(),
        Template::AlternatePrecedence => alt_precedence(),
        Template::AlternateSuccession => alt_response() && alt_precedence(),
        Template::ChainResponse => chain_response(),
        Template::ChainPrecedence => chain_precedence(),
        Template::ChainSuccession => chain_response() && chain_precedence(),
        Template::NotCoExistence => !(any_a && any_b),
        Template::NotSuccession => !(0..n).any(|i| a[i] && (i + 1..n).any(|j| b[j])),
        Template::NotChainSuccession => !(1..n).any(|j| a[j - 1] && b[j]),
        Template::Choice => any_a || any_b,
        Template::ExclusiveChoice => any_a != any_b,
    }
}
