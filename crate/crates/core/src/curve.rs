//! Genus-labelled dual graphs of nodal curves, subcurve algebra, and chain
//! modifications.
//!
//! A curve is stored as its dual graph: one vertex per irreducible component
//! (with the geometric genus of that component), one edge per node. An edge
//! with equal ends is a loop and models an irreducible node; distinct ends
//! model a reducible node. The arithmetic genus is
//! `sum(genus_i) + #nodes - #components + 1`.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;

use crate::{Error, Result};

/// A vertex of the dual graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub genus: u32,
}

/// An edge of the dual graph. `ends` keeps the declared branch order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub ends: (usize, usize),
}

impl Node {
    pub fn is_reducible(&self) -> bool {
        self.ends.0 != self.ends.1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodalCurve {
    components: Vec<Component>,
    nodes: Vec<Node>,
    genus: i64,
}

#[derive(Default)]
pub struct CurveBuilder {
    components: Vec<(String, u32)>,
    nodes: Vec<(String, String, String)>,
}

impl CurveBuilder {
    pub fn component(mut self, name: &str, genus: u32) -> Self {
        self.components.push((name.to_owned(), genus));
        self
    }

    pub fn node(mut self, name: &str, end_a: &str, end_b: &str) -> Self {
        self.nodes
            .push((name.to_owned(), end_a.to_owned(), end_b.to_owned()));
        self
    }

    pub fn build(self) -> Result<NodalCurve> {
        if self.components.is_empty() {
            return Err(Error::DisconnectedCurve);
        }
        let mut components = Vec::with_capacity(self.components.len());
        for (name, genus) in self.components {
            if components.iter().any(|c: &Component| c.name == name) {
                return Err(Error::DuplicateName(name));
            }
            components.push(Component { name, genus });
        }
        let index_of = |name: &str| components.iter().position(|c| c.name == name);
        let mut nodes: Vec<Node> = Vec::with_capacity(self.nodes.len());
        for (name, a, b) in self.nodes {
            if nodes.iter().any(|n| n.name == name) {
                return Err(Error::DuplicateName(name));
            }
            let end_a = index_of(&a).ok_or_else(|| Error::DanglingNodeEnd {
                node: name.clone(),
                end: a.clone(),
            })?;
            let end_b = index_of(&b).ok_or_else(|| Error::DanglingNodeEnd {
                node: name.clone(),
                end: b.clone(),
            })?;
            nodes.push(Node {
                name,
                ends: (end_a, end_b),
            });
        }

        // Connectivity of the dual graph; loops do not connect anything.
        let p = components.len();
        let mut parent: Vec<usize> = (0..p).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for node in nodes.iter().filter(|n| n.is_reducible()) {
            let (a, b) = (
                find(&mut parent, node.ends.0),
                find(&mut parent, node.ends.1),
            );
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        if (0..p).any(|k| find(&mut parent, k) != root) {
            return Err(Error::DisconnectedCurve);
        }

        let genus = components.iter().map(|c| c.genus as i64).sum::<i64>() + nodes.len() as i64
            - p as i64
            + 1;
        Ok(NodalCurve {
            components,
            nodes,
            genus,
        })
    }
}

impl NodalCurve {
    pub fn builder() -> CurveBuilder {
        CurveBuilder::default()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Arithmetic genus.
    pub fn genus(&self) -> i64 {
        self.genus
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn component(&self, k: usize) -> &Component {
        &self.components[k]
    }

    pub fn node(&self, k: usize) -> &Node {
        &self.nodes[k]
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn reducible_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&k| self.nodes[k].is_reducible())
            .collect()
    }

    /// Number of nodes joining distinct components `i` and `j`.
    pub fn delta_between(&self, i: usize, j: usize) -> u32 {
        if i == j {
            return 0;
        }
        self.nodes
            .iter()
            .filter(|n| n.ends == (i, j) || n.ends == (j, i))
            .count() as u32
    }

    /// Number of non-loop edges at component `k`.
    pub fn loopless_valence(&self, k: usize) -> u32 {
        self.nodes
            .iter()
            .filter(|n| n.is_reducible() && (n.ends.0 == k || n.ends.1 == k))
            .count() as u32
    }

    pub fn subcurve(&self, members: &[usize]) -> Result<Subcurve<'_>> {
        let mut mask = 0u64;
        for &k in members {
            if k >= self.components.len() {
                return Err(Error::UnknownComponent(k));
            }
            mask |= 1 << k;
        }
        self.subcurve_of_mask(mask)
    }

    pub fn subcurve_of_mask(&self, mask: u64) -> Result<Subcurve<'_>> {
        if mask == 0 {
            return Err(Error::EmptySubcurve);
        }
        debug_assert!(mask < (1u64 << self.components.len()));
        Ok(Subcurve { curve: self, mask })
    }

    pub fn full_subcurve(&self) -> Subcurve<'_> {
        Subcurve {
            curve: self,
            mask: (1u64 << self.components.len()) - 1,
        }
    }

    /// All proper nonempty subcurves in the canonical order: increasing
    /// component count, then lexicographic member list. Witnesses and search
    /// tie-breaks refer to this order.
    pub fn proper_subcurves(&self) -> Vec<Subcurve<'_>> {
        let p = self.components.len();
        let mut out = Vec::with_capacity((1usize << p).saturating_sub(2));
        for size in 1..p {
            for members in (0..p).combinations(size) {
                let mask = members.iter().fold(0u64, |m, &k| m | (1 << k));
                out.push(Subcurve { curve: self, mask });
            }
        }
        out
    }

    /// Replace nodes by chains of rational curves. `eta` maps node indices to
    /// chain lengths (all >= 1). The arithmetic genus is preserved.
    pub fn modify(&self, eta: &BTreeMap<usize, u32>) -> Result<ModifiedCurve> {
        for (&node, &len) in eta {
            if node >= self.nodes.len() {
                return Err(Error::UnknownNode(node));
            }
            if len == 0 {
                return Err(Error::InvalidChainLength(node));
            }
        }
        let mut builder = NodalCurve::builder();
        for c in &self.components {
            builder = builder.component(&c.name, c.genus);
        }
        let mut comp_origin: Vec<CompOrigin> =
            (0..self.components.len()).map(CompOrigin::Base).collect();
        let mut chains: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut next_comp = self.components.len();
        let mut chain_names: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (&node, &len) in eta {
            let node_name = &self.nodes[node].name;
            let mut idxs = Vec::with_capacity(len as usize);
            let mut names = Vec::with_capacity(len as usize);
            for pos in 0..len {
                let name = if len == 1 {
                    format!("E[{node_name}]")
                } else {
                    format!("E[{node_name}].{}", pos + 1)
                };
                builder = builder.component(&name, 0);
                comp_origin.push(CompOrigin::Chain {
                    node,
                    position: pos,
                });
                idxs.push(next_comp);
                names.push(name);
                next_comp += 1;
            }
            chains.insert(node, idxs);
            chain_names.insert(node, names);
        }
        for (k, node) in self.nodes.iter().enumerate() {
            match chain_names.get(&k) {
                None => {
                    builder = builder.node(
                        &node.name,
                        &self.components[node.ends.0].name,
                        &self.components[node.ends.1].name,
                    );
                }
                Some(names) => {
                    let a = &self.components[node.ends.0].name;
                    let b = &self.components[node.ends.1].name;
                    let mut previous = a.clone();
                    for (pos, chain_name) in names.iter().enumerate() {
                        builder = builder.node(
                            &format!("{}.{}", node.name, pos),
                            &previous,
                            chain_name,
                        );
                        previous = chain_name.clone();
                    }
                    builder = builder.node(&format!("{}.{}", node.name, names.len()), &previous, b);
                }
            }
        }
        let curve = builder.build()?;
        debug_assert_eq!(curve.genus(), self.genus());
        Ok(ModifiedCurve {
            strict_transform: (0..self.components.len()).collect(),
            base: self.clone(),
            curve,
            chains,
            comp_origin,
        })
    }

    /// The curve with the single node `node` replaced by one rational curve.
    pub fn replace_node(&self, node: usize) -> Result<ModifiedCurve> {
        let mut eta = BTreeMap::new();
        eta.insert(node, 1);
        self.modify(&eta)
    }

    /// The curve with every reducible node replaced by one rational curve.
    pub fn replace_reducible_nodes(&self) -> Result<ModifiedCurve> {
        let eta: BTreeMap<usize, u32> = self.reducible_nodes().into_iter().map(|n| (n, 1)).collect();
        self.modify(&eta)
    }

    /// The trivial modification (no node replaced).
    pub fn identity_modification(&self) -> ModifiedCurve {
        self.modify(&BTreeMap::new())
            .expect("identity modification always valid")
    }
}

/// A nonempty reduced union of components, possibly disconnected.
#[derive(Clone, Copy)]
pub struct Subcurve<'a> {
    curve: &'a NodalCurve,
    mask: u64,
}

impl PartialEq for Subcurve<'_> {
    fn eq(&self, other: &Self) -> bool {
        debug_assert!(std::ptr::eq(self.curve, other.curve));
        self.mask == other.mask
    }
}

impl Eq for Subcurve<'_> {}

impl fmt::Debug for Subcurve<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.member_names().join(","))
    }
}

impl fmt::Display for Subcurve<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.member_names().join(","))
    }
}

impl<'a> Subcurve<'a> {
    pub fn curve(&self) -> &'a NodalCurve {
        self.curve
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.curve.component_count())
            .filter(|&k| self.contains(k))
            .collect()
    }

    pub fn member_names(&self) -> Vec<&'a str> {
        self.members()
            .into_iter()
            .map(|k| self.curve.component(k).name.as_str())
            .collect()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.mask & (1 << k) != 0
    }

    pub fn component_count(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn is_proper(&self) -> bool {
        self.mask != self.curve.full_subcurve().mask
    }

    pub fn complement(&self) -> Option<Subcurve<'a>> {
        let mask = self.curve.full_subcurve().mask & !self.mask;
        (mask != 0).then_some(Subcurve {
            curve: self.curve,
            mask,
        })
    }

    pub fn union(&self, other: &Subcurve<'a>) -> Subcurve<'a> {
        Subcurve {
            curve: self.curve,
            mask: self.mask | other.mask,
        }
    }

    /// Maximum subcurve contained in the intersection; `None` when the
    /// intersection has no components.
    pub fn meet(&self, other: &Subcurve<'a>) -> Option<Subcurve<'a>> {
        let mask = self.mask & other.mask;
        (mask != 0).then_some(Subcurve {
            curve: self.curve,
            mask,
        })
    }

    /// Closure of the set difference self - other.
    pub fn minus(&self, other: &Subcurve<'a>) -> Option<Subcurve<'a>> {
        let mask = self.mask & !other.mask;
        (mask != 0).then_some(Subcurve {
            curve: self.curve,
            mask,
        })
    }

    /// (closure(Y-Z), closure(Z-Y), Y meet Z); empty pieces are `None`.
    pub fn decompose_against(
        &self,
        other: &Subcurve<'a>,
    ) -> (
        Option<Subcurve<'a>>,
        Option<Subcurve<'a>>,
        Option<Subcurve<'a>>,
    ) {
        (self.minus(other), other.minus(self), self.meet(other))
    }

    /// Number of nodes where this subcurve meets a component-disjoint one.
    pub fn delta(&self, other: &Subcurve<'a>) -> Result<u32> {
        if self.mask & other.mask != 0 {
            return Err(Error::OverlappingSubcurves);
        }
        Ok(self
            .curve
            .nodes()
            .iter()
            .filter(|n| {
                (self.contains(n.ends.0) && other.contains(n.ends.1))
                    || (self.contains(n.ends.1) && other.contains(n.ends.0))
            })
            .count() as u32)
    }

    /// Nodes with both ends (loops included) inside the subcurve.
    pub fn internal_node_count(&self) -> u32 {
        self.curve
            .nodes()
            .iter()
            .filter(|n| self.contains(n.ends.0) && self.contains(n.ends.1))
            .count() as u32
    }

    /// Euler characteristic of the structure sheaf:
    /// `sum(1 - genus_i) - internal nodes`.
    pub fn chi_structure(&self) -> i64 {
        let vertex_part: i64 = self
            .members()
            .iter()
            .map(|&k| 1 - self.curve.component(k).genus as i64)
            .sum();
        vertex_part - self.internal_node_count() as i64
    }

    pub fn is_connected(&self) -> bool {
        let members = self.members();
        let start = members[0];
        let mut seen = 1u64 << start;
        let mut stack = vec![start];
        while let Some(k) = stack.pop() {
            for node in self.curve.nodes().iter().filter(|n| n.is_reducible()) {
                let other = if node.ends.0 == k {
                    node.ends.1
                } else if node.ends.1 == k {
                    node.ends.0
                } else {
                    continue;
                };
                if self.contains(other) && seen & (1 << other) == 0 {
                    seen |= 1 << other;
                    stack.push(other);
                }
            }
        }
        seen == self.mask
    }
}

/// Origin of a component of a modified curve under the collapse map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompOrigin {
    Base(usize),
    Chain { node: usize, position: u32 },
}

/// A curve obtained from a base curve by replacing nodes with chains of
/// rational curves, together with the collapse map back to the base.
#[derive(Clone, Debug)]
pub struct ModifiedCurve {
    base: NodalCurve,
    curve: NodalCurve,
    strict_transform: Vec<usize>,
    chains: BTreeMap<usize, Vec<usize>>,
    comp_origin: Vec<CompOrigin>,
}

impl ModifiedCurve {
    pub fn base(&self) -> &NodalCurve {
        &self.base
    }

    /// The derived curve itself.
    pub fn curve(&self) -> &NodalCurve {
        &self.curve
    }

    /// Derived index of the strict transform of a base component.
    pub fn strict_transform(&self, base_component: usize) -> usize {
        self.strict_transform[base_component]
    }

    /// Replaced base nodes with the derived indices of their chains, in node
    /// declaration order, positions in chain order.
    pub fn chains(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.chains
    }

    pub fn chain(&self, node: usize) -> Option<&[usize]> {
        self.chains.get(&node).map(|v| v.as_slice())
    }

    pub fn origin(&self, component: usize) -> CompOrigin {
        self.comp_origin[component]
    }

    pub fn is_exceptional(&self, component: usize) -> bool {
        matches!(self.comp_origin[component], CompOrigin::Chain { .. })
    }

    /// Multidegree pulled back along the collapse map: base entries on strict
    /// transforms, zero on every chain component.
    pub fn pullback_degrees(&self, on_base: &[i64]) -> Vec<i64> {
        debug_assert_eq!(on_base.len(), self.base.component_count());
        let mut out = vec![0i64; self.curve.component_count()];
        for (k, &d) in on_base.iter().enumerate() {
            out[self.strict_transform[k]] = d;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn banana() -> NodalCurve {
        NodalCurve::builder()
            .component("v1", 0)
            .component("v2", 0)
            .node("n1", "v1", "v2")
            .node("n2", "v1", "v2")
            .build()
            .unwrap()
    }

    fn triangle() -> NodalCurve {
        NodalCurve::builder()
            .component("v1", 0)
            .component("v2", 0)
            .component("v3", 0)
            .node("n12", "v1", "v2")
            .node("n13", "v1", "v3")
            .node("n23", "v2", "v3")
            .build()
            .unwrap()
    }

    #[test]
    fn banana_genus() {
        let c = banana();
        assert_eq!(c.component_count(), 2);
        assert_eq!(c.genus(), 1);
    }

    #[test]
    fn single_component_genus() {
        let c = NodalCurve::builder().component("v", 2).build().unwrap();
        assert_eq!(c.genus(), 2);
    }

    #[test]
    fn disconnected_rejected() {
        let err = NodalCurve::builder()
            .component("v1", 0)
            .component("v2", 0)
            .build()
            .unwrap_err();
        assert_eq!(err, Error::DisconnectedCurve);
    }

    #[test]
    fn duplicate_and_dangling_rejected() {
        let err = NodalCurve::builder()
            .component("v", 0)
            .component("v", 1)
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateName(_)));
        let err = NodalCurve::builder()
            .component("v", 0)
            .node("n", "v", "w")
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::DanglingNodeEnd { .. }));
    }

    #[test]
    fn delta_counts_boundary_nodes() {
        let c = banana();
        let y = c.subcurve(&[0]).unwrap();
        let z = c.subcurve(&[1]).unwrap();
        assert_eq!(y.delta(&z).unwrap(), 2);
        assert_eq!(y.delta(&y).unwrap_err(), Error::OverlappingSubcurves);

        let t = triangle();
        let y = t.subcurve(&[0]).unwrap();
        let z = t.subcurve(&[1, 2]).unwrap();
        assert_eq!(y.delta(&z).unwrap(), 2);
    }

    #[test]
    fn internal_nodes_counted() {
        let c = banana();
        assert_eq!(c.full_subcurve().internal_node_count(), 2);
        assert_eq!(c.subcurve(&[0]).unwrap().internal_node_count(), 0);

        let loop_curve = NodalCurve::builder()
            .component("v", 1)
            .node("R", "v", "v")
            .build()
            .unwrap();
        assert_eq!(loop_curve.full_subcurve().internal_node_count(), 1);
        assert_eq!(loop_curve.genus(), 2);
    }

    #[test]
    fn decompose_cases() {
        let c = banana();
        let y = c.subcurve(&[0, 1]).unwrap();
        let z = c.subcurve(&[1]).unwrap();
        let (a, b, m) = y.decompose_against(&z);
        assert_eq!(a.unwrap().members(), vec![0]);
        assert!(b.is_none());
        assert_eq!(m.unwrap().members(), vec![1]);

        let (a, b, m) = z.decompose_against(&z);
        assert!(a.is_none() && b.is_none());
        assert_eq!(m.unwrap(), z);

        let t = triangle();
        let y = t.subcurve(&[0]).unwrap();
        let z = t.subcurve(&[2]).unwrap();
        let (a, b, m) = y.decompose_against(&z);
        assert_eq!(a.unwrap(), y);
        assert_eq!(b.unwrap(), z);
        assert!(m.is_none());
    }

    #[test]
    fn modification_shapes() {
        let c = banana();
        let all = c.replace_reducible_nodes().unwrap();
        assert_eq!(all.curve().component_count(), 4);
        assert_eq!(all.curve().node_count(), 4);
        assert_eq!(all.curve().genus(), 1);

        let loop_curve = NodalCurve::builder()
            .component("v", 1)
            .node("R", "v", "v")
            .build()
            .unwrap();
        let cr = loop_curve.replace_node(0).unwrap();
        assert_eq!(cr.curve().component_count(), 2);
        assert_eq!(cr.curve().node_count(), 2);
        assert_eq!(cr.curve().genus(), 2);

        let mut eta = BTreeMap::new();
        eta.insert(0usize, 3u32);
        let long = c.modify(&eta).unwrap();
        assert_eq!(long.curve().component_count(), 5);
        assert_eq!(long.curve().genus(), 1);
        assert_eq!(long.chain(0).unwrap().len(), 3);
    }

    #[test]
    fn modification_collapse_map() {
        let c = banana();
        let m = c.replace_reducible_nodes().unwrap();
        assert_eq!(m.strict_transform(0), 0);
        assert_eq!(m.strict_transform(1), 1);
        assert!(m.is_exceptional(2) && m.is_exceptional(3));
        assert_eq!(
            m.origin(2),
            CompOrigin::Chain {
                node: 0,
                position: 0
            }
        );
        assert_eq!(m.pullback_degrees(&[3, -1]), vec![3, -1, 0, 0]);
    }

    #[test]
    fn proper_subcurves_canonical_order() {
        let t = triangle();
        let subs = t.proper_subcurves();
        let shown: Vec<Vec<usize>> = subs.iter().map(|s| s.members()).collect();
        assert_eq!(
            shown,
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2]
            ]
        );
    }

    #[test]
    fn delta_additivity_identity() {
        let t = triangle();
        let y = t.subcurve(&[0]).unwrap();
        let z = t.subcurve(&[1]).unwrap();
        let u = y.union(&z);
        assert_eq!(
            y.delta(&z).unwrap(),
            u.internal_node_count() - y.internal_node_count() - z.internal_node_count()
        );
    }

    #[test]
    fn connectivity_of_subcurves() {
        let t = triangle();
        assert!(t.subcurve(&[0, 1]).unwrap().is_connected());
        let chain = NodalCurve::builder()
            .component("a", 0)
            .component("b", 0)
            .component("c", 0)
            .node("n1", "a", "b")
            .node("n2", "b", "c")
            .build()
            .unwrap();
        assert!(!chain.subcurve(&[0, 2]).unwrap().is_connected());
    }
}
