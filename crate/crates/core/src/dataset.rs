//! Users, objects and tags together with the two user-indexed bipartite graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::index::EntityIndexMap;

/// Which of the two bipartite projections a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Object,
    Tag,
}

/// Tripartite user/object/tag data. The user index is shared by both graphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr")]
pub struct TripartiteDataset {
    users: EntityIndexMap,
    objects: EntityIndexMap,
    tags: EntityIndexMap,
    user_object: BipartiteGraph,
    user_tag: BipartiteGraph,
}

#[derive(Deserialize)]
struct DatasetRepr {
    users: EntityIndexMap,
    objects: EntityIndexMap,
    tags: EntityIndexMap,
    user_object: BipartiteGraph,
    user_tag: BipartiteGraph,
}

impl TryFrom<DatasetRepr> for TripartiteDataset {
    type Error = Error;

    fn try_from(r: DatasetRepr) -> Result<Self> {
        TripartiteDataset::new(r.users, r.objects, r.tags, r.user_object, r.user_tag)
    }
}

impl TripartiteDataset {
    pub fn new(
        users: EntityIndexMap,
        objects: EntityIndexMap,
        tags: EntityIndexMap,
        user_object: BipartiteGraph,
        user_tag: BipartiteGraph,
    ) -> Result<Self> {
        let m = users.len();
        if user_object.left_count() != m || user_tag.left_count() != m {
            return Err(Error::InvalidArgument(format!(
                "graphs must share the user index: users={m}, user-object left={}, user-tag left={}",
                user_object.left_count(),
                user_tag.left_count()
            )));
        }
        if user_object.right_count() != objects.len() {
            return Err(Error::InvalidArgument(format!(
                "user-object graph has {} objects, index map has {}",
                user_object.right_count(),
                objects.len()
            )));
        }
        if user_tag.right_count() != tags.len() {
            return Err(Error::InvalidArgument(format!(
                "user-tag graph has {} tags, index map has {}",
                user_tag.right_count(),
                tags.len()
            )));
        }
        Ok(TripartiteDataset {
            users,
            objects,
            tags,
            user_object,
            user_tag,
        })
    }

    /// Builds a dataset whose ids are the decimal indices themselves. Handy
    /// for synthetic data and tests.
    pub fn from_index_edges(
        user_count: usize,
        object_count: usize,
        tag_count: usize,
        object_edges: impl IntoIterator<Item = (u32, u32)>,
        tag_edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let numbered = |n: usize| (0..n).map(|i| i.to_string()).collect::<EntityIndexMap>();
        Self::new(
            numbered(user_count),
            numbered(object_count),
            numbered(tag_count),
            BipartiteGraph::from_edges(object_edges, user_count, object_count)?,
            BipartiteGraph::from_edges(tag_edges, user_count, tag_count)?,
        )
    }

    pub fn users(&self) -> &EntityIndexMap {
        &self.users
    }

    pub fn objects(&self) -> &EntityIndexMap {
        &self.objects
    }

    pub fn tags(&self) -> &EntityIndexMap {
        &self.tags
    }

    pub fn user_object(&self) -> &BipartiteGraph {
        &self.user_object
    }

    pub fn user_tag(&self) -> &BipartiteGraph {
        &self.user_tag
    }

    pub fn graph(&self, channel: Channel) -> &BipartiteGraph {
        match channel {
            Channel::Object => &self.user_object,
            Channel::Tag => &self.user_tag,
        }
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn tag_count(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// k(u) in the user-object graph.
    pub fn degree_user_object(&self, u: u32) -> Result<usize> {
        self.user_object.check_left(u)?;
        Ok(self.user_object.left_degree(u))
    }

    /// k'(u) in the user-tag graph.
    pub fn degree_user_tag(&self, u: u32) -> Result<usize> {
        self.user_tag.check_left(u)?;
        Ok(self.user_tag.left_degree(u))
    }

    /// Same index maps and user-tag graph, different user-object edges.
    pub(crate) fn with_user_object(&self, user_object: BipartiteGraph) -> Self {
        debug_assert_eq!(user_object.left_count(), self.user_count());
        debug_assert_eq!(user_object.right_count(), self.object_count());
        TripartiteDataset {
            users: self.users.clone(),
            objects: self.objects.clone(),
            tags: self.tags.clone(),
            user_object,
            user_tag: self.user_tag.clone(),
        }
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            users: self.user_count(),
            objects: self.object_count(),
            tags: self.tag_count(),
            user_object_edges: self.user_object.edge_count(),
            user_tag_edges: self.user_tag.edge_count(),
        }
    }
}

/// Sizes of a dataset, as reported by `tridiff ingest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub users: usize,
    pub objects: usize,
    pub tags: usize,
    pub user_object_edges: usize,
    pub user_tag_edges: usize,
}

impl std::fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "users={} objects={} tags={} user_object_edges={} user_tag_edges={}",
            self.users, self.objects, self.tags, self.user_object_edges, self.user_tag_edges
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees() {
        let ds = TripartiteDataset::from_index_edges(
            3,
            3,
            1,
            [(0, 0), (0, 1), (1, 2)],
            [(0, 0)],
        )
        .unwrap();
        assert_eq!(ds.degree_user_object(0).unwrap(), 2);
        assert_eq!(ds.degree_user_object(2).unwrap(), 0);
        assert_eq!(ds.degree_user_tag(1).unwrap(), 0);
        assert!(matches!(
            ds.degree_user_object(3),
            Err(Error::IndexOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn star_user_linked_to_everything() {
        // x1 collects every object in Y and uses every tag in Z; other users
        // hold a few edges each.
        let (y, z) = (4u32, 3u32);
        let mut objects: Vec<(u32, u32)> = (0..y).map(|o| (0, o)).collect();
        objects.extend([(1, 0), (2, 3)]);
        let mut tags: Vec<(u32, u32)> = (0..z).map(|t| (0, t)).collect();
        tags.push((1, 2));
        let ds = TripartiteDataset::from_index_edges(3, y as usize, z as usize, objects, tags)
            .unwrap();
        assert_eq!(ds.degree_user_object(0).unwrap(), y as usize);
        assert_eq!(ds.degree_user_tag(0).unwrap(), z as usize);
    }

    #[test]
    fn mismatched_user_index_rejected() {
        let users: EntityIndexMap = ["a", "b"].into_iter().collect();
        let objects: EntityIndexMap = ["o"].into_iter().collect();
        let tags: EntityIndexMap = ["t"].into_iter().collect();
        let uo = BipartiteGraph::empty(2, 1);
        let ut = BipartiteGraph::empty(3, 1);
        assert!(TripartiteDataset::new(users, objects, tags, uo, ut).is_err());
    }
}
