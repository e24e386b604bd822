//! Parse → filter → split → evaluate, checked against set-based references.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use tridiff::evaluation::{evaluate_split, Blend};
use tridiff::ingest::{core_filter, parse, split, training_size, ObjectEvent, ParseOptions, RawRecords, TagEvent};
use tridiff::Measure;

type Edges = BTreeSet<(String, String)>;

/// Fixed-point filter over plain string sets: drop objects and tags with
/// fewer than two users, drop users missing either kind of edge, repeat.
fn reference_filter(objects: &Edges, tags: &Edges) -> (Edges, Edges) {
    let (mut obj, mut tag) = (objects.clone(), tags.clone());
    loop {
        let users_of = |e: &Edges| {
            let mut m: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
            for (u, x) in e {
                m.entry(x.clone()).or_default().insert(u.clone());
            }
            m
        };
        let (obj_users, tag_users) = (users_of(&obj), users_of(&tag));
        let next_obj: Edges = obj.iter().filter(|(_, o)| obj_users[o].len() >= 2).cloned().collect();
        let next_tag: Edges = tag.iter().filter(|(_, t)| tag_users[t].len() >= 2).cloned().collect();
        let with_obj: BTreeSet<&String> = next_obj.iter().map(|(u, _)| u).collect();
        let with_tag: BTreeSet<&String> = next_tag.iter().map(|(u, _)| u).collect();
        let keep = |u: &String| with_obj.contains(u) && with_tag.contains(u);
        let next_obj: Edges = next_obj.iter().filter(|(u, _)| keep(u)).cloned().collect();
        let next_tag: Edges = next_tag.iter().filter(|(u, _)| keep(u)).cloned().collect();
        if next_obj == obj && next_tag == tag {
            return (obj, tag);
        }
        (obj, tag) = (next_obj, next_tag);
    }
}

fn dataset_edges(ds: &tridiff::TripartiteDataset) -> (Edges, Edges) {
    let name = |m: &tridiff::EntityIndexMap, i: u32| m.id(i).unwrap().to_owned();
    let obj = ds
        .user_object()
        .edges()
        .map(|(u, o)| (name(ds.users(), u), name(ds.objects(), o)))
        .collect();
    let tag = ds
        .user_tag()
        .edges()
        .map(|(u, t)| (name(ds.users(), u), name(ds.tags(), t)))
        .collect();
    (obj, tag)
}

fn arb_records() -> impl Strategy<Value = RawRecords> {
    let obj = prop::collection::vec((0u8..12, 0u8..10), 0..60);
    let tag = prop::collection::vec((0u8..12, 0u8..6), 0..40);
    (obj, tag).prop_map(|(o, t)| RawRecords {
        object_events: o
            .into_iter()
            .map(|(u, x)| ObjectEvent {
                user: u.to_string(),
                object: format!("m{x}"),
                rating: None,
            })
            .collect(),
        tag_events: t
            .into_iter()
            .map(|(u, x)| TagEvent {
                user: u.to_string(),
                object: None,
                tag: format!("t{x}"),
            })
            .collect(),
    })
}

proptest! {
    #[test]
    fn filter_matches_reference(records in arb_records()) {
        let obj: Edges = records.object_events.iter().map(|e| (e.user.clone(), e.object.clone())).collect();
        let tag: Edges = records.tag_events.iter().map(|e| (e.user.clone(), e.tag.clone())).collect();
        let expected = reference_filter(&obj, &tag);
        let got = dataset_edges(&core_filter(&records).dataset);
        prop_assert_eq!(got, expected);
    }
}

const RATINGS: &str = "\
1::10::5::978300760
1::11::3.5::978300761
2::10::4::978300762
2::12::2::978300763
3::11::5::978300764
3::12::4::978300765
3::13::4::978300766
4::13::1::978300767
";
const TAGS: &str = "\
1::10::Comedy::1
2::12::comedy::2
3::11:: Dark ::3
4::13::dark::4
4::13::bogus-only-once::5
";

#[test]
fn movielens_format_end_to_end() {
    let parsed = parse(RATINGS, TAGS, &ParseOptions::default());
    assert!(parsed.errors.is_empty(), "{:?}", parsed.errors);
    assert_eq!(parsed.records.object_events.len(), 8);
    assert_eq!(parsed.records.object_events[1].rating, Some(3.5));

    let filtered = core_filter(&parsed.records);
    let (obj, tag) = dataset_edges(&filtered.dataset);
    let e = |u: &str, x: &str| (u.to_owned(), x.to_owned());
    // Object 10, 11, 12, 13 each have two raters; "bogus-only-once" goes.
    assert_eq!(
        obj,
        [e("1", "10"), e("1", "11"), e("2", "10"), e("2", "12"), e("3", "11"), e("3", "12"), e("3", "13"), e("4", "13")]
            .into_iter()
            .collect()
    );
    assert_eq!(
        tag,
        [e("1", "comedy"), e("2", "comedy"), e("3", "dark"), e("4", "dark")].into_iter().collect()
    );

    // With a threshold of 4 only the well-rated events remain and the
    // filter has to iterate.
    let strict = ParseOptions {
        rating_threshold: 4,
        ..ParseOptions::default()
    };
    let parsed = parse(RATINGS, TAGS, &strict);
    assert_eq!(parsed.below_threshold, 3);
    let filtered = core_filter(&parsed.records);
    let (obj, _) = dataset_edges(&filtered.dataset);
    // Raters ≥ 4: 10 {1,2}, 11 {3}, 12 {3}, 13 {3}. Only 10 survives, so user
    // 3 loses every object, then "dark" keeps only user 4, who has no object.
    assert_eq!(obj, [e("1", "10"), e("2", "10")].into_iter().collect());
    assert!(filtered.rounds >= 2);
}

#[test]
fn split_then_evaluate_on_parsed_data() {
    let parsed = parse(RATINGS, TAGS, &ParseOptions::default());
    let ds = core_filter(&parsed.records).dataset;
    let s = split(&ds, 0.75, 3).unwrap();
    assert_eq!(s.test_count(), 8 - training_size(8, 0.75));
    assert_eq!(s.training().user_object().edge_count() + s.test_count(), 8);
    assert_eq!(s.training().user_tag().edge_count(), ds.user_tag().edge_count());
    // Train and test are disjoint and together rebuild the original edges.
    let mut all: Vec<(u32, u32)> = s.training().user_object().edges().chain(s.test_edges()).collect();
    all.sort_unstable();
    assert_eq!(all, ds.user_object().edges().collect::<Vec<_>>());

    let evals = evaluate_split(&s, Measure::Diffusion, &[Blend::Lambda(0.5)], &[1, 3]).unwrap();
    let e = &evals[0];
    assert_eq!(e.ranks.len(), s.test_count());
    assert!(e.ranks.iter().all(|&(_, r)| r > 0.0 && r <= 1.0));
    assert!(e.hits[&1].hits <= e.hits[&3].hits);
}
