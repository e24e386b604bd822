//! Dense index assignment for external entity identifiers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Bijection between external identifier strings and dense indices `0..len`.
///
/// Indices are handed out in first-seen order, so two maps built from the
/// same id sequence are identical.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct EntityIndexMap {
    ids: Vec<String>,
    index_of: HashMap<String, u32>,
}

impl EntityIndexMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `id`, inserting it at the end if unseen.
    pub fn intern(&mut self, id: &str) -> u32 {
        if let Some(&idx) = self.index_of.get(id) {
            return idx;
        }
        let idx = self.ids.len() as u32;
        self.ids.push(id.to_owned());
        self.index_of.insert(id.to_owned(), idx);
        idx
    }

    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.index_of.get(id).copied()
    }

    pub fn id(&self, index: u32) -> Option<&str> {
        self.ids.get(index as usize).map(String::as_str)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

impl From<Vec<String>> for EntityIndexMap {
    /// Later duplicates of an id keep the first index; callers building from
    /// a serialized map never produce duplicates.
    fn from(ids: Vec<String>) -> Self {
        let mut map = EntityIndexMap::new();
        for id in &ids {
            map.intern(id);
        }
        map
    }
}

impl From<EntityIndexMap> for Vec<String> {
    fn from(map: EntityIndexMap) -> Self {
        map.ids
    }
}

impl<S: AsRef<str>> FromIterator<S> for EntityIndexMap {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut map = EntityIndexMap::new();
        for id in iter {
            map.intern(id.as_ref());
        }
        map
    }
}
