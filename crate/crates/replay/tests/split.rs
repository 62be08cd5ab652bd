use std::collections::BTreeSet;

use eig_replay::{audit_split, split_groups};
use proptest::prelude::*;

fn groups(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("grp-{i:04}")).collect()
}

#[test]
fn four_hundred_groups_split_three_to_one() {
    let split = split_groups(&groups(400), 0.75, 2024).unwrap();
    assert_eq!(split.train.len(), 300);
    assert_eq!(split.dev.len(), 100);
    let audit = audit_split(&split.train, &split.dev, groups(400).iter().map(String::as_str));
    assert!(audit.overlap.is_empty());
    assert!(audit.passed());
    assert_eq!(audit.to_string(), "train = 300, dev = 100, overlap = 0");
}

#[test]
fn unknown_row_group_is_stray() {
    let split = split_groups(&groups(8), 0.5, 0).unwrap();
    let audit = audit_split(&split.train, &split.dev, ["grp-0001", "elsewhere"]);
    assert_eq!(audit.stray_rows, ["elsewhere"]);
    assert!(!audit.passed());
}

proptest! {
    #[test]
    fn partition_is_exact_and_input_order_free(n in 0usize..200, fraction in 0.0f64..=1.0, seed in any::<u64>()) {
        let ids = groups(n);
        let split = split_groups(&ids, fraction, seed).unwrap();
        prop_assert!(split.train.is_disjoint(&split.dev));
        let union: BTreeSet<String> = split.train.union(&split.dev).cloned().collect();
        prop_assert_eq!(union, ids.iter().cloned().collect::<BTreeSet<_>>());
        prop_assert_eq!(split.train.len(), (fraction * n as f64).round() as usize);
        let mut reversed = ids.clone();
        reversed.reverse();
        prop_assert_eq!(split_groups(&reversed, fraction, seed).unwrap(), split);
    }
}
