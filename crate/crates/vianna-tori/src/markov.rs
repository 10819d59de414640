//! The Markov tree: triples `(a, b, c)` of positive integers with
//! `a^2 + b^2 + c^2 = 3abc`, connected by the Vieta mutations
//! `(a, b, c) -> (3bc - a, b, c)` and its two analogues.
//!
//! Entries are big integers throughout; triples grow double-exponentially
//! along the tree. Triples are treated as unordered when deduplicating, but
//! an ordered representative is kept so mutation indices stay meaningful.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MarkovError {
    /// The given entries do not satisfy the Markov equation.
    InvalidTriple(String),
    /// A malformed textual triple such as `"1,2"` or `"1,x,5"`.
    ParseError(String),
}

impl fmt::Display for MarkovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkovError::InvalidTriple(t) => write!(f, "not a Markov triple: {t}"),
            MarkovError::ParseError(s) => write!(f, "cannot parse Markov triple from {s:?}"),
        }
    }
}

impl std::error::Error for MarkovError {}

/// Does `(a, b, c)` satisfy `a^2 + b^2 + c^2 = 3abc` with positive entries?
pub fn is_markov(t: &[BigInt; 3]) -> bool {
    if t.iter().any(|x| !x.is_positive()) {
        return false;
    }
    let [a, b, c] = t;
    a * a + b * b + c * c == 3 * (a * b * c)
}

/// An ordered Markov triple. Ordering matters for mutation indices; use
/// [`MarkovTriple::sorted`] when comparing as multisets.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarkovTriple {
    entries: [BigInt; 3],
}

impl MarkovTriple {
    pub fn new(a: BigInt, b: BigInt, c: BigInt) -> Result<MarkovTriple, MarkovError> {
        let entries = [a, b, c];
        if is_markov(&entries) {
            Ok(MarkovTriple { entries })
        } else {
            Err(MarkovError::InvalidTriple(format!(
                "({}, {}, {})",
                entries[0], entries[1], entries[2]
            )))
        }
    }

    pub fn from_u64(a: u64, b: u64, c: u64) -> Result<MarkovTriple, MarkovError> {
        MarkovTriple::new(BigInt::from(a), BigInt::from(b), BigInt::from(c))
    }

    /// The tree root `(1, 1, 1)`.
    pub fn root() -> MarkovTriple {
        MarkovTriple {
            entries: [BigInt::one(), BigInt::one(), BigInt::one()],
        }
    }

    pub fn entries(&self) -> &[BigInt; 3] {
        &self.entries
    }

    pub fn sorted(&self) -> MarkovTriple {
        let mut e = self.entries.clone();
        e.sort();
        MarkovTriple { entries: e }
    }

    pub fn max_entry(&self) -> &BigInt {
        self.entries.iter().max().expect("triple is nonempty")
    }

    pub fn is_root(&self) -> bool {
        self.entries.iter().all(|x| x.is_one())
    }
}

impl fmt::Display for MarkovTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.entries[0], self.entries[1], self.entries[2])
    }
}

impl fmt::Debug for MarkovTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for MarkovTriple {
    type Err = MarkovError;

    /// Parses `"a,b,c"` with decimal entries.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(MarkovError::ParseError(s.to_string()));
        }
        let mut entries = Vec::with_capacity(3);
        for p in parts {
            entries.push(
                BigInt::from_str(p).map_err(|_| MarkovError::ParseError(s.to_string()))?,
            );
        }
        let [a, b, c]: [BigInt; 3] = entries.try_into().expect("length checked");
        MarkovTriple::new(a, b, c)
    }
}

impl Serialize for MarkovTriple {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.entries.iter().map(|x| x.to_string()).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MarkovTriple {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let strings = <[String; 3]>::deserialize(deserializer)?;
        let mut entries = Vec::with_capacity(3);
        for s in &strings {
            entries.push(BigInt::from_str(s).map_err(D::Error::custom)?);
        }
        let [a, b, c]: [BigInt; 3] = entries.try_into().expect("length checked");
        MarkovTriple::new(a, b, c).map_err(D::Error::custom)
    }
}

/// Replace entry `k` by `3 * (product of the others) - entry k`. An
/// involution for each fixed `k`.
pub fn mutate_triple(t: &MarkovTriple, k: usize) -> MarkovTriple {
    assert!(k < 3, "mutation index must be 0, 1 or 2");
    let e = &t.entries;
    let (x, y) = match k {
        0 => (&e[1], &e[2]),
        1 => (&e[0], &e[2]),
        _ => (&e[0], &e[1]),
    };
    let replaced = 3 * (x * y) - &e[k];
    let mut entries = e.clone();
    entries[k] = replaced;
    debug_assert!(is_markov(&entries), "mutation left the Markov surface");
    MarkovTriple { entries }
}

/// The unique neighbour with strictly smaller maximum entry, as a sorted
/// triple; `None` for the root.
pub fn parent_triple(t: &MarkovTriple) -> Result<Option<MarkovTriple>, MarkovError> {
    if !is_markov(&t.entries) {
        return Err(MarkovError::InvalidTriple(t.to_string()));
    }
    if t.is_root() {
        return Ok(None);
    }
    let max = t.max_entry().clone();
    let mut smaller: Vec<MarkovTriple> = (0..3)
        .map(|k| mutate_triple(t, k))
        .filter(|m| m.max_entry() < &max)
        .collect();
    // Vieta jumping: exactly one mutation decreases the maximum.
    assert_eq!(smaller.len(), 1, "non-root triple must have a unique parent");
    Ok(Some(smaller.remove(0).sorted()))
}

/// A node of the deduplicated Markov tree: the ordered triple obtained by
/// replaying `path` from `(1, 1, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkovNode {
    pub triple: MarkovTriple,
    pub path: Vec<u8>,
}

impl MarkovNode {
    pub fn replay(&self) -> MarkovTriple {
        let mut t = MarkovTriple::root();
        for &k in &self.path {
            t = mutate_triple(&t, k as usize);
        }
        t
    }
}

/// Breadth-first enumeration of all tree nodes whose maximum entry is at
/// most `max_entry`, deduplicated by sorted triple. Each retained node
/// carries the lexicographically smallest shortest path that reaches it, so
/// the output is deterministic.
pub fn enumerate_tree(max_entry: &BigInt) -> Vec<MarkovNode> {
    let mut out = Vec::new();
    if max_entry < &BigInt::one() {
        return out;
    }
    let mut seen: BTreeSet<[BigInt; 3]> = BTreeSet::new();
    let root = MarkovNode {
        triple: MarkovTriple::root(),
        path: Vec::new(),
    };
    seen.insert(root.triple.sorted().entries.clone());
    let mut queue = VecDeque::from([root.clone()]);
    out.push(root);
    while let Some(node) = queue.pop_front() {
        for k in 0..3u8 {
            let child = mutate_triple(&node.triple, k as usize);
            if child.max_entry() > max_entry {
                continue;
            }
            let key = child.sorted().entries.clone();
            if seen.insert(key) {
                let mut path = node.path.clone();
                path.push(k);
                let child_node = MarkovNode { triple: child, path };
                queue.push_back(child_node.clone());
                out.push(child_node);
            }
        }
    }
    out
}

/// The canonical tree node for `t`: the BFS representative whose sorted
/// triple matches `t`'s.
pub fn canonical_node(t: &MarkovTriple) -> Result<MarkovNode, MarkovError> {
    if !is_markov(&t.entries) {
        return Err(MarkovError::InvalidTriple(t.to_string()));
    }
    let target = t.sorted();
    let nodes = enumerate_tree(t.max_entry());
    nodes
        .into_iter()
        .find(|n| n.triple.sorted() == target)
        .ok_or_else(|| MarkovError::InvalidTriple(t.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: u64, b: u64, c: u64) -> MarkovTriple {
        MarkovTriple::from_u64(a, b, c).unwrap()
    }

    fn big(x: u64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn markov_equation_membership() {
        assert!(is_markov(&[big(1), big(1), big(1)]));
        assert!(is_markov(&[big(1), big(2), big(5)]));
        assert!(!is_markov(&[big(1), big(2), big(3)]));
        assert!(!is_markov(&[BigInt::from(-1), big(1), big(1)]));
        assert!(!is_markov(&[big(0), big(0), big(0)]));
    }

    #[test]
    fn mutation_examples_and_involution() {
        assert_eq!(mutate_triple(&t(1, 1, 1), 2), t(1, 1, 2));
        assert_eq!(mutate_triple(&t(1, 1, 2), 0), t(5, 1, 2));
        for triple in [t(1, 1, 1), t(1, 1, 2), t(1, 2, 5), t(2, 5, 29)] {
            for k in 0..3 {
                assert_eq!(mutate_triple(&mutate_triple(&triple, k), k), triple);
            }
        }
    }

    /// Oracle for the parent: try all three mutations and demand that
    /// exactly one shrinks the maximum entry.
    fn parent_by_exhaustion(t: &MarkovTriple) -> Option<MarkovTriple> {
        let max = t.max_entry().clone();
        let smaller: Vec<_> = (0..3)
            .map(|k| mutate_triple(t, k))
            .filter(|m| m.max_entry() < &max)
            .collect();
        match smaller.as_slice() {
            [] => None,
            [p] => Some(p.sorted()),
            _ => panic!("more than one decreasing mutation"),
        }
    }

    #[test]
    fn parent_matches_exhaustive_oracle() {
        assert_eq!(parent_triple(&t(1, 2, 5)).unwrap(), Some(t(1, 1, 2)));
        assert_eq!(parent_triple(&t(5, 1, 2)).unwrap(), Some(t(1, 1, 2)));
        assert_eq!(parent_triple(&t(1, 1, 1)).unwrap(), None);
        for node in enumerate_tree(&big(500)) {
            assert_eq!(
                parent_triple(&node.triple).unwrap(),
                parent_by_exhaustion(&node.triple)
            );
        }
    }

    /// Independent enumeration oracle: grow the set of sorted triples by
    /// exhaustive expansion until it stabilises.
    fn sorted_set_by_exhaustion(max: u64) -> BTreeSet<MarkovTriple> {
        let bound = big(max);
        let mut set = BTreeSet::from([t(1, 1, 1)]);
        loop {
            let mut grew = false;
            for triple in set.clone() {
                for k in 0..3 {
                    let m = mutate_triple(&triple, k).sorted();
                    if m.max_entry() <= &bound && set.insert(m) {
                        grew = true;
                    }
                }
            }
            if !grew {
                return set;
            }
        }
    }

    fn sorted_set(nodes: &[MarkovNode]) -> BTreeSet<MarkovTriple> {
        nodes.iter().map(|n| n.triple.sorted()).collect()
    }

    #[test]
    fn enumeration_matches_exhaustive_oracle() {
        assert_eq!(
            sorted_set(&enumerate_tree(&big(2))),
            BTreeSet::from([t(1, 1, 1), t(1, 1, 2)])
        );
        assert_eq!(
            sorted_set(&enumerate_tree(&big(13))),
            BTreeSet::from([t(1, 1, 1), t(1, 1, 2), t(1, 2, 5), t(1, 5, 13)])
        );
        assert_eq!(sorted_set(&enumerate_tree(&big(1))), BTreeSet::from([t(1, 1, 1)]));
        for max in [5, 29, 34, 194] {
            assert_eq!(sorted_set(&enumerate_tree(&big(max))), sorted_set_by_exhaustion(max));
        }
    }

    #[test]
    fn enumeration_nodes_are_consistent() {
        let nodes = enumerate_tree(&big(433));
        assert_eq!(nodes.len(), 11);
        for node in &nodes {
            assert!(is_markov(node.triple.entries()));
            assert_eq!(node.replay(), node.triple, "path must replay to the triple");
            if !node.path.is_empty() {
                // One step shorter along the path = the parent triple.
                let shorter = MarkovNode {
                    triple: MarkovTriple::root(),
                    path: node.path[..node.path.len() - 1].to_vec(),
                }
                .replay();
                assert_eq!(
                    parent_triple(&node.triple).unwrap().unwrap(),
                    shorter.sorted()
                );
            }
        }
    }

    #[test]
    fn enumeration_is_monotone_in_the_bound() {
        let small = sorted_set(&enumerate_tree(&big(29)));
        let large = sorted_set(&enumerate_tree(&big(433)));
        assert!(small.is_subset(&large));
    }

    #[test]
    fn parse_and_serde_round_trip() {
        let triple: MarkovTriple = "2,5,29".parse().unwrap();
        assert_eq!(triple, t(2, 5, 29));
        assert!("1,2,3".parse::<MarkovTriple>().is_err());
        assert!("1,2".parse::<MarkovTriple>().is_err());

        let node = canonical_node(&t(1, 2, 5)).unwrap();
        let json = serde_json::to_string(&node).unwrap();
        assert_eq!(json, r#"{"triple":["2","5","1"],"path":[0,1]}"#);
        let back: MarkovNode = serde_json::from_str(&json).unwrap();
        assert_eq!(back, node);
    }
}
