//! DFA evaluation against the direct-scan oracle, plus semantic properties
//! of the template family checked over every short window.

mod common;

use common::{all_templates, all_windows, assignments, occurrences};
use pam_core::{evaluate_template, oracle_evaluate_template, Template};
use proptest::prelude::*;

fn holds(t: Template, a: usize, b: usize, w: &[usize]) -> bool {
    let second = if t.is_unary() { None } else { Some(b) };
    evaluate_template(t, a, second, w).unwrap()
}

#[test]
fn dfa_matches_oracle_on_every_short_window() {
    let mut windows = all_windows(3, 6);
    assert_eq!(windows.len(), 1_092);
    windows.push(Vec::new());
    let mut mismatches = Vec::new();
    for t in all_templates() {
        for (a, b) in assignments(t, 3) {
            for w in &windows {
                if evaluate_template(t, a, b, w).unwrap() != oracle_evaluate_template(t, a, b, w).unwrap() {
                    mismatches.push((t, a, b, w.clone()));
                }
            }
        }
    }
    assert!(mismatches.is_empty(), "{} mismatches, first {:?}", mismatches.len(), &mismatches[..1]);
}

#[test]
fn hierarchy_holds() {
    use Template::*;
    for w in all_windows(3, 6) {
        for (a, b) in [(0, 1), (1, 0), (0, 2), (2, 1)] {
            let h = |t| holds(t, a, b, &w);
            assert!(!h(ChainResponse) || h(AlternateResponse), "{w:?}");
            assert!(!h(AlternateResponse) || h(Response), "{w:?}");
            assert!(!h(ChainPrecedence) || h(AlternatePrecedence), "{w:?}");
            assert!(!h(AlternatePrecedence) || h(Precedence), "{w:?}");
            assert_eq!(h(Succession), h(Response) && h(Precedence), "{w:?}");
            assert_eq!(h(AlternateSuccession), h(AlternateResponse) && h(AlternatePrecedence), "{w:?}");
            assert!(!h(ChainSuccession) || (h(ChainResponse) && h(ChainPrecedence)), "{w:?}");
        }
    }
}

#[test]
fn count_templates_partition_occurrences() {
    let partition = [Template::Absence(1), Template::Exactly(1), Template::Exactly(2), Template::Existence(3)];
    for w in all_windows(3, 6) {
        for a in 0..3 {
            let holding: Vec<_> = partition.iter().filter(|&&t| holds(t, a, 0, &w)).collect();
            assert_eq!(holding.len(), 1, "{w:?} activity {a}: {holding:?}");
            let expected = occurrences(&w, a).min(3);
            assert_eq!(*holding[0], partition[expected]);
        }
    }
}

#[test]
fn symmetric_templates() {
    use Template::*;
    for w in all_windows(3, 6) {
        for t in [CoExistence, Choice, ExclusiveChoice, NotCoExistence] {
            assert_eq!(holds(t, 0, 1, &w), holds(t, 1, 0, &w), "{t} {w:?}");
        }
    }
}

#[test]
fn init_and_last_imply_presence() {
    for w in all_windows(3, 6) {
        for a in 0..3 {
            let absent = holds(Template::Absence(1), a, 0, &w);
            if holds(Template::Init, a, 0, &w) || holds(Template::Last, a, 0, &w) {
                assert!(!absent, "{w:?}");
            }
        }
    }
}

proptest! {
    /// Activities other than the two arguments never change a verdict.
    #[test]
    fn other_activities_are_projected_away(
        w in prop::collection::vec(0usize..6, 0..14),
        t in prop::sample::select(all_templates()),
    ) {
        let projected: Vec<usize> = w.iter().map(|&e| if e < 2 { e } else { 2 }).collect();
        let second = if t.is_unary() { None } else { Some(1) };
        prop_assert_eq!(
            evaluate_template(t, 0, second, &w).unwrap(),
            evaluate_template(t, 0, second, &projected).unwrap()
        );
        prop_assert_eq!(
            evaluate_template(t, 0, second, &w).unwrap(),
            oracle_evaluate_template(t, 0, second, &w).unwrap()
        );
    }
}

#[test]
fn alternate_succession_is_strictly_alternating() {
    use Template::*;
    let w = [0, 1, 1];
    assert!(holds(AlternateResponse, 0, 1, &w) && holds(Precedence, 0, 1, &w));
    assert!(!holds(AlternatePrecedence, 0, 1, &w));
    assert!(!holds(AlternateSuccession, 0, 1, &w));
}
