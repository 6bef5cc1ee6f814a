//! Implicit d-ary tree addressing.
//!
//! Vertices are addressed by their child-label sequence from the root; no
//! tree is ever materialized. The root has degree `d`, every other vertex
//! degree `d+1`. Depth is unbounded: a vertex is just its label path.

use serde::{Deserialize, Serialize};

use crate::{FrogError, Result};

/// Branching parameters of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    d: u32,
}

impl TreeParams {
    /// Requires `d >= 2`.
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(FrogError::argument(format!(
                "branching factor must be at least 2, got {d}"
            )));
        }
        Ok(TreeParams { d })
    }

    #[inline]
    pub fn d(&self) -> u32 {
        self.d
    }
}

/// Address of a tree vertex: the child-label sequence from the root.
///
/// The empty sequence is the root. By convention child 0 of the root plays
/// the role of the distinguished first child wherever one is needed; by
/// symmetry of the model this loses no generality.
///
/// Serializes as a bare JSON array of integers, the root as `[]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId {
    labels: Vec<u32>,
}

impl VertexId {
    pub fn root() -> Self {
        VertexId { labels: Vec::new() }
    }

    /// Builds a vertex from labels, checking each against the branching factor.
    pub fn new(labels: Vec<u32>, params: TreeParams) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= params.d()) {
            return Err(FrogError::argument(format!(
                "label {bad} out of range for d = {}",
                params.d()
            )));
        }
        Ok(VertexId { labels })
    }

    #[inline]
    pub fn is_root(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Child `i`, i.e. this vertex with label `i` appended.
    pub fn child(&self, i: u32, params: TreeParams) -> Result<VertexId> {
        if i >= params.d() {
            return Err(FrogError::argument(format!(
                "child label {i} out of range for d = {}",
                params.d()
            )));
        }
        let mut labels = Vec::with_capacity(self.labels.len() + 1);
        labels.extend_from_slice(&self.labels);
        labels.push(i);
        Ok(VertexId { labels })
    }

    /// Drops the last label. Errors on the root.
    pub fn parent(&self) -> Result<VertexId> {
        if self.is_root() {
            return Err(FrogError::argument("the root has no parent".to_string()));
        }
        Ok(VertexId {
            labels: self.labels[..self.labels.len() - 1].to_vec(),
        })
    }

    /// `d` at the root, `d + 1` everywhere else.
    #[inline]
    pub fn degree(&self, params: TreeParams) -> u32 {
        if self.is_root() {
            params.d()
        } else {
            params.d() + 1
        }
    }

    /// True when `other` is this vertex's parent or one of its children.
    pub fn is_neighbor(&self, other: &VertexId) -> bool {
        let (short, long) = if self.depth() + 1 == other.depth() {
            (self, other)
        } else if other.depth() + 1 == self.depth() {
            (other, self)
        } else {
            return false;
        };
        long.labels[..short.depth()] == short.labels[..]
    }

    /// Packed integer encoding: the root is 0 and child `i` of `v` is
    /// `packed(v)*d + 1 + i`. Returns `None` on overflow of `u128`.
    ///
    /// Engines cache this encoding for bounded depths as a performance
    /// detail; the label sequence remains the canonical address.
    pub fn packed(&self, params: TreeParams) -> Option<u128> {
        let d = params.d() as u128;
        let mut id: u128 = 0;
        for &l in &self.labels {
            id = id.checked_mul(d)?.checked_add(1 + l as u128)?;
        }
        Some(id)
    }

    /// Inverse of [`VertexId::packed`].
    pub fn from_packed(mut id: u128, params: TreeParams) -> VertexId {
        let d = params.d() as u128;
        let mut labels = Vec::new();
        while id > 0 {
            labels.push(((id - 1) % d) as u32);
            id = (id - 1) / d;
        }
        labels.reverse();
        VertexId { labels }
    }
}

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: u32) -> TreeParams {
        TreeParams::new(n).unwrap()
    }

    #[test]
    fn d_must_be_at_least_two() {
        assert!(TreeParams::new(1).is_err());
        assert!(TreeParams::new(0).is_err());
        assert!(TreeParams::new(2).is_ok());
    }

    #[test]
    fn child_of_root_is_distinguished_first_child() {
        let v = VertexId::root().child(0, d(2)).unwrap();
        assert_eq!(v.labels(), &[0]);
    }

    #[test]
    fn child_appends_label() {
        let v = VertexId::new(vec![0], d(3)).unwrap();
        assert_eq!(v.child(2, d(3)).unwrap().labels(), &[0, 2]);
    }

    #[test]
    fn child_label_out_of_range() {
        let v = VertexId::new(vec![0], d(3)).unwrap();
        assert!(v.child(5, d(3)).is_err());
    }

    #[test]
    fn parent_drops_last_label() {
        let v = VertexId::new(vec![0, 2], d(3)).unwrap();
        assert_eq!(v.parent().unwrap().labels(), &[0]);
        assert_eq!(
            VertexId::new(vec![0], d(3)).unwrap().parent().unwrap(),
            VertexId::root()
        );
    }

    #[test]
    fn root_has_no_parent() {
        assert!(VertexId::root().parent().is_err());
    }

    #[test]
    fn degrees() {
        assert_eq!(VertexId::root().degree(d(2)), 2);
        assert_eq!(VertexId::new(vec![0], d(2)).unwrap().degree(d(2)), 3);
        assert_eq!(VertexId::new(vec![1, 1, 0], d(5)).unwrap().degree(d(5)), 6);
    }

    #[test]
    fn packed_roundtrip_small() {
        let p = d(3);
        for id in 0..200u128 {
            let v = VertexId::from_packed(id, p);
            assert_eq!(v.packed(p), Some(id));
        }
    }

    #[test]
    fn json_roundtrip() {
        let v = VertexId::new(vec![0, 2, 1], d(3)).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[0,2,1]");
        let back: VertexId = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert_eq!(serde_json::to_string(&VertexId::root()).unwrap(), "[]");
    }
}
