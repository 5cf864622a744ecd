use proptest::prelude::*;

use koch_core::labels::{children, companion, degree_of, father, neighbor_partition, validate};
use koch_core::routing::{ancestor_chain, distance, route};
use koch_core::{l_max, parse_label, Bits, Label};

/// A valid label of `K_{m,t}` (hub or non-hub), built from raw choices.
fn label_in(m: u32, t: u32) -> impl Strategy<Value = Label> {
    (1u8..=3, 0..=t, any::<u64>(), any::<u64>()).prop_map(move |(subnet, birth, tail, pick)| {
        if birth == 0 {
            return Label::hub(subnet).unwrap();
        }
        let mut bits = Bits::empty().pushed(false);
        for k in 0..birth - 1 {
            bits = bits.pushed(tail >> k & 1 == 1);
        }
        let max = l_max(m, &bits).unwrap();
        Label::checked(m, subnet, bits, pick % max + 1).unwrap()
    })
}

/// Edge test from labels: hub pair, companions, or father and son.
fn adjacent(m: u32, a: &Label, b: &Label) -> bool {
    let father_of = |x: &Label, y: &Label| !x.is_hub() && father(m, x).unwrap() == *y;
    (a.is_hub() && b.is_hub() && a != b)
        || (!a.is_hub() && companion(a).unwrap() == *b)
        || father_of(a, b)
        || father_of(b, a)
}

fn network() -> impl Strategy<Value = (u32, u32)> {
    (1u32..=4, 0u32..=10)
}

fn with_labels(n: usize) -> impl Strategy<Value = (u32, u32, Vec<Label>)> {
    network().prop_flat_map(move |(m, t)| {
        (
            Just(m),
            Just(t),
            proptest::collection::vec(label_in(m, t), n),
        )
    })
}

proptest! {
    #[test]
    fn label_text_round_trips((m, t, ls) in with_labels(1)) {
        let l = ls[0];
        validate(m, t, &l).unwrap();
        prop_assert_eq!(parse_label(&l.to_string(), m).unwrap(), l);
    }

    #[test]
    fn parser_never_panics(text in "\\PC{0,24}", m in 1u32..5) {
        if let Ok(l) = parse_label(&text, m) {
            prop_assert_eq!(parse_label(&l.to_string(), m).unwrap(), l);
        }
    }

    #[test]
    fn parser_on_label_shaped_text(text in "[0-4][01]{0,12}(\\.[0-9]{1,6})?", m in 1u32..5) {
        if let Ok(l) = parse_label(&text, m) {
            prop_assert_eq!(l.to_string(), text);
        }
    }

    #[test]
    fn children_point_back_to_father((m, t, ls) in with_labels(1)) {
        let l = ls[0];
        prop_assume!(degree_of(m, t, &l).unwrap() <= 5000);
        let sons = children(m, t, &l).unwrap();
        prop_assert_eq!(sons.len() as u64 + 2, degree_of(m, t, &l).unwrap());
        for c in &sons {
            prop_assert_eq!(father(m, c).unwrap(), l);
            prop_assert!(c.birth_step() > l.birth_step());
        }
    }

    #[test]
    fn companion_is_an_involution_sharing_the_father((m, t, ls) in with_labels(1)) {
        let l = ls[0];
        prop_assume!(!l.is_hub());
        let c = companion(&l).unwrap();
        prop_assert_ne!(c, l);
        prop_assert_eq!(companion(&c).unwrap(), l);
        prop_assert_eq!(c.bits(), l.bits());
        prop_assert_eq!(father(m, &c).unwrap(), father(m, &l).unwrap());
        validate(m, t, &c).unwrap();
    }

    #[test]
    fn ancestor_chain_climbs_to_the_hub((m, _t, ls) in with_labels(1)) {
        let chain = ancestor_chain(m, &ls[0]).unwrap();
        prop_assert!(chain.last().unwrap().is_hub());
        prop_assert!(chain.windows(2).all(|w| w[1].birth_step() < w[0].birth_step()));
        prop_assert!(chain.iter().all(|c| c.subnet() == ls[0].subnet()));
    }

    #[test]
    fn routes_are_label_adjacent_walks((m, t, ls) in with_labels(2)) {
        let (a, b) = (ls[0], ls[1]);
        let r = route(m, t, &a, &b).unwrap();
        prop_assert_eq!(r.hops.first(), Some(&a));
        prop_assert_eq!(r.hops.last(), Some(&b));
        prop_assert!(r.length() <= 2 * t as usize + 1);
        prop_assert!(r.ops_used <= 2 * t + 3);
        for w in r.hops.windows(2) {
            prop_assert!(adjacent(m, &w[0], &w[1]));
        }
        let mut back = route(m, t, &b, &a).unwrap().hops;
        back.reverse();
        prop_assert_eq!(back, r.hops);
    }

    #[test]
    fn distance_is_a_metric((m, t, ls) in with_labels(3)) {
        let (a, b, c) = (ls[0], ls[1], ls[2]);
        let ab = distance(m, t, &a, &b).unwrap();
        let bc = distance(m, t, &b, &c).unwrap();
        let ac = distance(m, t, &a, &c).unwrap();
        prop_assert!(ac <= ab + bc);
        prop_assert_eq!(ab == 0, a == b);
    }

    #[test]
    fn neighbor_partition_degrees_are_ordered((m, t, ls) in with_labels(1)) {
        let l = ls[0];
        let d = degree_of(m, t, &l).unwrap();
        prop_assume!(d <= 5000);
        let p = neighbor_partition(m, t, &l).unwrap();
        prop_assert_eq!(p.len() as u64, d);
        for x in &p.lower {
            prop_assert!(degree_of(m, t, x).unwrap() < d);
        }
        for x in &p.higher {
            prop_assert!(degree_of(m, t, x).unwrap() > d);
        }
        for x in &p.equal {
            prop_assert_eq!(degree_of(m, t, x).unwrap(), d);
        }
    }
}
