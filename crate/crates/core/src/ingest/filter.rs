//! Core filtering: keep objects and tags shared by at least two users, and
//! users holding at least one object and one tag, iterated to a fixed point.

use crate::dataset::TripartiteDataset;
use crate::graph::BipartiteGraph;
use crate::index::EntityIndexMap;
use crate::ingest::parse::{ObjectEvent, RawRecords, TagEvent};

/// Minimum number of distinct users an object or tag needs to survive.
pub const MIN_USERS_PER_ITEM: usize = 2;

#[derive(Debug, Clone)]
pub struct CoreFiltered {
    pub dataset: TripartiteDataset,
    /// Removal passes run before reaching the fixed point (at least 1).
    pub rounds: usize,
}

impl CoreFiltered {
    /// True when filtering removed everything.
    pub fn emptied(&self) -> bool {
        self.dataset.is_empty()
    }
}

/// Applies the core filter to parsed records.
///
/// Repeated events collapse to single binary edges. Surviving entities keep
/// the relative order in which they were first seen: users across object
/// events then tag events, objects in object events, tags in tag events.
pub fn core_filter(records: &RawRecords) -> CoreFiltered {
    let mut users = EntityIndexMap::new();
    let mut objects = EntityIndexMap::new();
    let mut tags = EntityIndexMap::new();

    let mut uo: Vec<(u32, u32)> = records
        .object_events
        .iter()
        .map(|e| (users.intern(&e.user), objects.intern(&e.object)))
        .collect();
    let mut ut: Vec<(u32, u32)> = records
        .tag_events
        .iter()
        .map(|e| (users.intern(&e.user), tags.intern(&e.tag)))
        .collect();
    uo.sort_unstable();
    uo.dedup();
    ut.sort_unstable();
    ut.dedup();

    let mut user_alive = vec![true; users.len()];
    let mut object_alive = vec![true; objects.len()];
    let mut tag_alive = vec![true; tags.len()];

    let mut rounds = 0;
    loop {
        rounds += 1;
        uo.retain(|&(u, o)| user_alive[u as usize] && object_alive[o as usize]);
        ut.retain(|&(u, t)| user_alive[u as usize] && tag_alive[t as usize]);

        let mut object_deg = vec![0usize; objects.len()];
        let mut tag_deg = vec![0usize; tags.len()];
        let mut user_obj_deg = vec![0usize; users.len()];
        let mut user_tag_deg = vec![0usize; users.len()];
        for &(u, o) in &uo {
            object_deg[o as usize] += 1;
            user_obj_deg[u as usize] += 1;
        }
        for &(u, t) in &ut {
            tag_deg[t as usize] += 1;
            user_tag_deg[u as usize] += 1;
        }

        let mut changed = false;
        for (alive, &deg) in object_alive.iter_mut().zip(&object_deg) {
            if *alive && deg < MIN_USERS_PER_ITEM {
                *alive = false;
                changed = true;
            }
        }
        for (alive, &deg) in tag_alive.iter_mut().zip(&tag_deg) {
            if *alive && deg < MIN_USERS_PER_ITEM {
                *alive = false;
                changed = true;
            }
        }
        for (u, alive) in user_alive.iter_mut().enumerate() {
            if *alive && (user_obj_deg[u] == 0 || user_tag_deg[u] == 0) {
                *alive = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let (user_map, user_remap) = compact(&users, &user_alive);
    let (object_map, object_remap) = compact(&objects, &object_alive);
    let (tag_map, tag_remap) = compact(&tags, &tag_alive);
    let remap = |edges: &[(u32, u32)], right: &[u32]| -> Vec<(u32, u32)> {
        edges
            .iter()
            .map(|&(u, x)| (user_remap[u as usize], right[x as usize]))
            .collect()
    };
    let user_object =
        BipartiteGraph::from_edges(remap(&uo, &object_remap), user_map.len(), object_map.len())
            .expect("remapped edges are in range");
    let user_tag = BipartiteGraph::from_edges(remap(&ut, &tag_remap), user_map.len(), tag_map.len())
        .expect("remapped edges are in range");
    let dataset = TripartiteDataset::new(user_map, object_map, tag_map, user_object, user_tag)
        .expect("consistent dimensions");
    CoreFiltered { dataset, rounds }
}

/// Keeps the alive entries of `map` in order; returns the new map and the
/// old-to-new index table (`u32::MAX` for removed entries).
fn compact(map: &EntityIndexMap, alive: &[bool]) -> (EntityIndexMap, Vec<u32>) {
    let mut out = EntityIndexMap::new();
    let remap = map
        .ids()
        .iter()
        .zip(alive)
        .map(|(id, &keep)| if keep { out.intern(id) } else { u32::MAX })
        .collect();
    (out, remap)
}

/// Whether `dataset` already satisfies every core-filter constraint.
pub fn is_core(dataset: &TripartiteDataset) -> bool {
    let uo = dataset.user_object();
    let ut = dataset.user_tag();
    (0..uo.right_count() as u32).all(|o| uo.right_degree(o) >= MIN_USERS_PER_ITEM)
        && (0..ut.right_count() as u32).all(|t| ut.right_degree(t) >= MIN_USERS_PER_ITEM)
        && (0..dataset.user_count() as u32).all(|u| uo.left_degree(u) >= 1 && ut.left_degree(u) >= 1)
}

impl RawRecords {
    /// Re-expresses a dataset as unrated events with external ids.
    pub fn from_dataset(dataset: &TripartiteDataset) -> Self {
        let id = |map: &EntityIndexMap, i: u32| map.id(i).unwrap_or_default().to_owned();
        RawRecords {
            object_events: dataset
                .user_object()
                .edges()
                .map(|(u, o)| ObjectEvent {
                    user: id(dataset.users(), u),
                    object: id(dataset.objects(), o),
                    rating: None,
                })
                .collect(),
            tag_events: dataset
                .user_tag()
                .edges()
                .map(|(u, t)| TagEvent {
                    user: id(dataset.users(), u),
                    object: None,
                    tag: id(dataset.tags(), t),
                })
                .collect(),
        }
    }
}
