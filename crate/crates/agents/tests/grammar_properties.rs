use eig_agents::{format_line, parse_line, parse_reply};
use eig_core::slates::{Candidate, CandidateOrigin};
use eig_core::{ActionKind, ActionPayload, Evidence, RoleId};
use proptest::prelude::*;

fn id() -> impl Strategy<Value = String> {
    "[a-z]{1,4}-[0-9]{4}"
}

fn text() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9 ,.]{0,30}[A-Za-z0-9]".prop_map(|s| s.replace("::", ":"))
}

fn candidate() -> impl Strategy<Value = Candidate> {
    let role = prop::sample::select(RoleId::ALL.to_vec());
    let edge = prop::sample::select(vec![
        ActionKind::AddSupportEdge,
        ActionKind::AddDependencyEdge,
        ActionKind::AddContradictionEdge,
    ]);
    prop_oneof![
        (edge, id(), id(), prop::option::of(text()), role.clone())
            .prop_filter("distinct", |(_, a, b, _, _)| a != b)
            .prop_map(|(k, a, b, note, r)| {
                let payload = ActionPayload {
                    note,
                    ..ActionPayload::default()
                };
                Candidate::new(k, vec![a, b], payload, r, CandidateOrigin::Agent)
            }),
        (id(), text(), text(), role.clone()).prop_map(|(t, s, n, r)| Candidate::new(
            ActionKind::AttachEvidence,
            vec![t],
            ActionPayload::with_evidence(Evidence { source: s, snippet: n }),
            r,
            CandidateOrigin::Agent
        )),
        (id(), prop::option::of(text()), role.clone()).prop_map(|(t, txt, r)| Candidate::new(
            ActionKind::ProposeRepair,
            vec![t],
            txt.map(ActionPayload::with_text).unwrap_or_default(),
            r,
            CandidateOrigin::Agent
        )),
        role.prop_map(Candidate::skip),
    ]
}

fn arity_ok(c: &Candidate) -> bool {
    match c.kind {
        ActionKind::Skip => c.targets.is_empty() && c.payload.is_empty(),
        ActionKind::AttachEvidence => c.targets.len() == 1 && c.payload.evidence.is_some(),
        ActionKind::ProposeRepair => c.targets.len() == 1,
        _ => c.targets.len() == 2 && c.targets[0] != c.targets[1],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn format_then_parse_is_identity(c in candidate()) {
        let line = format_line(&c);
        prop_assert_eq!(parse_line(&line, c.proposer, 1).unwrap(), c);
    }

    #[test]
    fn arbitrary_text_never_yields_malformed_candidates(lines in prop::collection::vec("[a-z_|,: 0-9-]{0,40}", 0..12)) {
        let parsed = parse_reply(&lines.join("\n"), RoleId::ImpactReframer);
        for c in &parsed.candidates {
            prop_assert!(arity_ok(c), "{:?}", c);
        }
        let counted = lines.iter().filter(|l| !l.trim().is_empty() && !l.trim().starts_with('#')).count();
        prop_assert_eq!(parsed.candidates.len() + parsed.dropped, counted);
    }
}
