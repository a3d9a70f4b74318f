//! Fiberwise resolution of the degree-1 Abel map.
//!
//! For every point stratum of the curve (one per component's generic smooth
//! point, one per node) the resolver builds the fiber curve (the curve
//! itself, the single-node modification, or the all-reducible-nodes
//! modification), assembles the limit multidegree from three pieces
//! (diagonal-ideal degrees, the pullback of the line bundle, and the
//! restriction of the product twister divisor), corrects every chain whose
//! beta is 2, classifies admissibility, takes the pushforward descriptor,
//! and certifies quasistability of the corrected class on the fiber with the
//! pulled-back polarization.
//!
//! The only blowup data that the degree bookkeeping depends on is, for each
//! ordered pair of distinct reducible nodes, which two strict transforms of
//! component products contain the exceptional curve over the pair. That
//! matching is the whole symbolic content of [`DesingularizationChoice`].

use std::collections::BTreeMap;

use crate::curve::{ModifiedCurve, NodalCurve};
use crate::stability::{classify, Polarization, SheafClass, StabilityReport};
use crate::twister::{find_quasistable_twister, twister_multidegree};
use crate::{EngineOptions, Error, Result};

/// Containment pattern of the exceptional curve over an ordered node pair
/// `(R, S)` with `R` on components `(i, j)` and `S` on `(k, l)` in declared
/// branch order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Matching {
    /// The exceptional curve lies in the strict transforms of
    /// `C_i x C_l` and `C_j x C_k`.
    Cross,
    /// The exceptional curve lies in the strict transforms of
    /// `C_i x C_k` and `C_j x C_l`.
    Parallel,
}

impl Matching {
    pub fn as_str(self) -> &'static str {
        match self {
            Matching::Cross => "cross",
            Matching::Parallel => "parallel",
        }
    }
}

impl std::fmt::Display for Matching {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-pair matchings of a good partial desingularization. Unset pairs
/// default to `Cross`. The diagonal pair `(R, R)` is produced by the blowup
/// along the diagonal, whose pattern is the cross one; explicit same-node
/// entries are accepted so single-blowup scenarios can be expressed, but the
/// pipeline never sets them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DesingularizationChoice {
    matchings: BTreeMap<(usize, usize), Matching>,
}

impl DesingularizationChoice {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, over: usize, at: usize, matching: Matching) -> &mut Self {
        self.matchings.insert((over, at), matching);
        self
    }

    pub fn matching(&self, over: usize, at: usize) -> Matching {
        self.matchings
            .get(&(over, at))
            .copied()
            .unwrap_or(Matching::Cross)
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), Matching> {
        &self.matchings
    }
}

/// Every matching assignment that can affect the fiber over `over`: one
/// choice per ordered pair `(over, s)` with `s` a distinct reducible node.
pub fn matching_assignments_for(curve: &NodalCurve, over: usize) -> Vec<DesingularizationChoice> {
    let others: Vec<usize> = curve
        .reducible_nodes()
        .into_iter()
        .filter(|&s| s != over)
        .collect();
    let mut out = Vec::with_capacity(1 << others.len());
    for bits in 0u32..(1 << others.len()) {
        let mut choice = DesingularizationChoice::new();
        for (pos, &s) in others.iter().enumerate() {
            let m = if bits & (1 << pos) == 0 {
                Matching::Cross
            } else {
                Matching::Parallel
            };
            choice.set(over, s, m);
        }
        out.push(choice);
    }
    out
}

/// A point stratum of the curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stratum {
    /// The generic smooth point of a component.
    Smooth(usize),
    /// A node.
    Node(usize),
}

/// The fiber of the resolved family over a stratum: the curve itself over a
/// smooth point, the single-node modification over an irreducible node, and
/// the all-reducible-nodes modification over a reducible node.
pub fn fiber_over(curve: &NodalCurve, stratum: Stratum) -> Result<ModifiedCurve> {
    match stratum {
        Stratum::Smooth(k) => {
            if k >= curve.component_count() {
                return Err(Error::UnknownComponent(k));
            }
            Ok(curve.identity_modification())
        }
        Stratum::Node(r) => {
            if r >= curve.node_count() {
                return Err(Error::UnknownNode(r));
            }
            if curve.node(r).is_reducible() {
                curve.replace_reducible_nodes()
            } else {
                curve.replace_node(r)
            }
        }
    }
}

/// Degrees of the ideal of the strict transform of the diagonal on the
/// fiber. The total is always -1, the degree of the ideal of a moving point.
pub fn diagonal_ideal_degrees(fiber: &ModifiedCurve, stratum: Stratum) -> SheafClass {
    let mut degrees = vec![0i64; fiber.curve().component_count()];
    match stratum {
        Stratum::Smooth(k) => {
            degrees[fiber.strict_transform(k)] = -1;
        }
        Stratum::Node(r) => {
            let (i, j) = fiber.base().node(r).ends;
            let chain = fiber.chain(r).expect("stratum node is replaced");
            if i != j {
                degrees[fiber.strict_transform(i)] = -1;
                degrees[fiber.strict_transform(j)] = -1;
                degrees[chain[0]] = 1;
            } else {
                degrees[fiber.strict_transform(i)] = -2;
                degrees[chain[0]] = 1;
            }
        }
    }
    SheafClass::from_vec(degrees)
}

/// Per-pair weights: `weights[i][k]` is the coefficient of component `k` in
/// the twister divisor attached to component `i`.
pub type WeightMatrix = Vec<Vec<i64>>;

/// Restriction coefficients of the product divisor
/// `sum w_{i,k} (C_i x C_k)~` to the fiber over node `r`: a coefficient per
/// strict transform and one per chain of the fiber.
fn restriction_coefficients(
    fiber: &ModifiedCurve,
    choice: &DesingularizationChoice,
    r: usize,
    weights: &WeightMatrix,
) -> (Vec<i64>, BTreeMap<usize, i64>) {
    let base = fiber.base();
    let (i, j) = base.node(r).ends;
    let p = base.component_count();
    let mut a = vec![0i64; p];
    for (k, entry) in a.iter_mut().enumerate() {
        *entry = if i != j {
            weights[i][k] + weights[j][k]
        } else {
            weights[i][k]
        };
    }
    let mut b = BTreeMap::new();
    for &s in fiber.chains().keys() {
        let value = if s == r {
            // The diagonal blowup yields the branch-crossed products, which
            // is the default Cross entry; explicit same-node entries allow
            // expressing a single product blowup instead.
            if i == j {
                weights[i][i]
            } else {
                match choice.matching(r, r) {
                    Matching::Cross => weights[i][j] + weights[j][i],
                    Matching::Parallel => weights[i][i] + weights[j][j],
                }
            }
        } else {
            let (k, l) = base.node(s).ends;
            match choice.matching(r, s) {
                Matching::Cross => weights[i][l] + weights[j][k],
                Matching::Parallel => weights[i][k] + weights[j][l],
            }
        };
        b.insert(s, value);
    }
    (a, b)
}

/// Restriction of a product divisor to the fiber over a reducible node:
/// a coefficient per component and per reducible node of the base.
pub fn restrict_product_divisor(
    curve: &NodalCurve,
    choice: &DesingularizationChoice,
    r: usize,
    weights: &WeightMatrix,
) -> Result<(Vec<i64>, BTreeMap<usize, i64>)> {
    if r >= curve.node_count() {
        return Err(Error::UnknownNode(r));
    }
    if !curve.node(r).is_reducible() {
        return Err(Error::NotReducibleNode(curve.node(r).name.clone()));
    }
    let fiber = curve.replace_reducible_nodes()?;
    Ok(restriction_coefficients(&fiber, choice, r, weights))
}

/// The twister piece of the limit class on a fiber: the fiber's own
/// Laplacian applied to the restriction coefficients.
fn twister_restriction(
    fiber: &ModifiedCurve,
    choice: &DesingularizationChoice,
    stratum: Stratum,
    weights: &WeightMatrix,
) -> SheafClass {
    match stratum {
        Stratum::Smooth(k) => {
            // the desingularization is an isomorphism here; only the divisor
            // attached to the carrying component restricts, to its own twist
            twister_multidegree(fiber.curve(), &fiber.pullback_degrees(&weights[k]))
        }
        Stratum::Node(r) => {
            let (a, b) = restriction_coefficients(fiber, choice, r, weights);
            let mut coefficients = fiber.pullback_degrees(&a);
            for (s, value) in b {
                for &comp in fiber.chain(s).expect("chain coefficients") {
                    coefficients[comp] = value;
                }
            }
            twister_multidegree(fiber.curve(), &coefficients)
        }
    }
}

fn weight_matrix(
    curve: &NodalCurve,
    e: &Polarization,
    l: &SheafClass,
    marked: usize,
    opts: &EngineOptions,
) -> Result<WeightMatrix> {
    (0..curve.component_count())
        .map(|i| {
            find_quasistable_twister(curve, e, &l.minus_point(i), marked, opts)
                .map(|t| t.coefficients)
        })
        .collect()
}

/// Limit multidegree of the moving-point family over a stratum: diagonal
/// ideal degrees, plus the pullback of the line bundle, plus the twister
/// restriction.
pub fn limit_multidegree(
    curve: &NodalCurve,
    e: &Polarization,
    l: &SheafClass,
    marked: usize,
    choice: &DesingularizationChoice,
    stratum: Stratum,
    opts: &EngineOptions,
) -> Result<(ModifiedCurve, SheafClass)> {
    let expected = curve.genus() - e.slope();
    if l.total() != expected {
        return Err(Error::DegreeMismatch {
            expected,
            actual: l.total(),
        });
    }
    let weights = weight_matrix(curve, e, l, marked, opts)?;
    let fiber = fiber_over(curve, stratum)?;
    let class = limit_on_fiber(&fiber, l, choice, stratum, &weights);
    Ok((fiber, class))
}

fn limit_on_fiber(
    fiber: &ModifiedCurve,
    l: &SheafClass,
    choice: &DesingularizationChoice,
    stratum: Stratum,
    weights: &WeightMatrix,
) -> SheafClass {
    let diagonal = diagonal_ideal_degrees(fiber, stratum);
    let pullback = SheafClass::from_vec(fiber.pullback_degrees(l.degrees()));
    let twister = twister_restriction(fiber, choice, stratum, weights);
    diagonal.plus(&pullback).plus(&twister)
}

/// Degree of a class on each maximal chain, keyed by the replaced node.
pub fn chain_degrees(fiber: &ModifiedCurve, d: &SheafClass) -> BTreeMap<usize, i64> {
    fiber
        .chains()
        .iter()
        .map(|(&node, comps)| (node, comps.iter().map(|&c| d.entry(c)).sum()))
        .collect()
}

/// Twist the class at every chain of degree +1 (beta 2, since the pulled
/// back polarization is trivial on chains) so that all chain degrees land in
/// {-1, 0}. The input must have chain degrees in {-1, 0, 1}.
pub fn chain_correction(fiber: &ModifiedCurve, limit: &SheafClass) -> Result<SheafClass> {
    let mut corrected = limit.clone();
    for (node, degree) in chain_degrees(fiber, limit) {
        if !(-1..=1).contains(&degree) {
            return Err(Error::NotAdmissible {
                node: fiber.base().node(node).name.clone(),
                degree,
            });
        }
        if degree == 1 {
            let mut indicator = vec![0i64; fiber.curve().component_count()];
            for &comp in fiber.chain(node).expect("chain exists") {
                indicator[comp] = 1;
            }
            corrected = corrected.plus(&twister_multidegree(fiber.curve(), &indicator));
        }
    }
    Ok(corrected)
}

/// Admissibility classes of a line bundle class on a modification, decided
/// by the multiset of maximal chain degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admissibility {
    /// Every chain degree is 0.
    Invertible,
    /// Chain degrees in {-1, 0}, some -1.
    NegativelyAdmissible,
    /// Chain degrees in {0, 1}, some +1.
    PositivelyAdmissible,
    /// Chain degrees in {-1, 0, 1}, both signs present.
    Admissible,
    NotAdmissible,
}

impl Admissibility {
    pub fn is_admissible(self) -> bool {
        self != Admissibility::NotAdmissible
    }

    pub fn is_negatively_admissible(self) -> bool {
        matches!(
            self,
            Admissibility::Invertible | Admissibility::NegativelyAdmissible
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Admissibility::Invertible => "invertible",
            Admissibility::NegativelyAdmissible => "negatively-admissible",
            Admissibility::PositivelyAdmissible => "positively-admissible",
            Admissibility::Admissible => "admissible",
            Admissibility::NotAdmissible => "not-admissible",
        }
    }
}

impl std::fmt::Display for Admissibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_admissibility(fiber: &ModifiedCurve, d: &SheafClass) -> Admissibility {
    let degrees = chain_degrees(fiber, d);
    if degrees.values().any(|&x| !(-1..=1).contains(&x)) {
        return Admissibility::NotAdmissible;
    }
    let has_negative = degrees.values().any(|&x| x == -1);
    let has_positive = degrees.values().any(|&x| x == 1);
    match (has_negative, has_positive) {
        (false, false) => Admissibility::Invertible,
        (true, false) => Admissibility::NegativelyAdmissible,
        (false, true) => Admissibility::PositivelyAdmissible,
        (true, true) => Admissibility::Admissible,
    }
}

/// The combinatorial image of the pushforward along the collapse map: the
/// multidegree on the base curve, the nodes where the sheaf fails to be
/// invertible, and the conserved total degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushforwardDescriptor {
    pub degrees: Vec<i64>,
    pub noninvertible_nodes: Vec<usize>,
    pub total: i64,
    /// Nodes whose chain degree is +1. The canonical pipeline only pushes
    /// forward negatively admissible classes; a nonempty list flags the
    /// descriptor as non-canonical.
    pub positive_chain_nodes: Vec<usize>,
}

impl PushforwardDescriptor {
    pub fn is_canonical(&self) -> bool {
        self.positive_chain_nodes.is_empty()
    }
}

pub fn pushforward_descriptor(
    fiber: &ModifiedCurve,
    d: &SheafClass,
) -> Result<PushforwardDescriptor> {
    let degrees_by_chain = chain_degrees(fiber, d);
    if let Some((&node, &degree)) = degrees_by_chain
        .iter()
        .find(|(_, &deg)| !(-1..=1).contains(&deg))
    {
        return Err(Error::NotAdmissible {
            node: fiber.base().node(node).name.clone(),
            degree,
        });
    }
    let degrees: Vec<i64> = (0..fiber.base().component_count())
        .map(|k| d.entry(fiber.strict_transform(k)))
        .collect();
    Ok(PushforwardDescriptor {
        degrees,
        noninvertible_nodes: degrees_by_chain
            .iter()
            .filter(|(_, &deg)| deg == -1)
            .map(|(&n, _)| n)
            .collect(),
        total: d.total(),
        positive_chain_nodes: degrees_by_chain
            .iter()
            .filter(|(_, &deg)| deg == 1)
            .map(|(&n, _)| n)
            .collect(),
    })
}

/// Everything computed for one stratum.
#[derive(Clone, Debug)]
pub struct FiberRecord {
    pub stratum: Stratum,
    pub fiber: ModifiedCurve,
    pub limit: SheafClass,
    pub corrected: SheafClass,
    pub admissibility: Admissibility,
    pub pushforward: PushforwardDescriptor,
    pub stability: StabilityReport,
}

impl FiberRecord {
    pub fn stratum_name(&self) -> String {
        match self.stratum {
            Stratum::Smooth(k) => self.fiber.base().component(k).name.clone(),
            Stratum::Node(r) => self.fiber.base().node(r).name.clone(),
        }
    }
}

/// Resolve the degree-1 Abel map of `l`: one certified record per component
/// stratum and per node stratum, in declaration order. Any failure of the
/// expected invariants (chain degree ranges, negative admissibility of the
/// corrected class, quasistability on the fiber, degree conservation) is an
/// error carrying the witness, never a silently patched record.
pub fn resolve_abel_map(
    curve: &NodalCurve,
    e: &Polarization,
    l: &SheafClass,
    marked: usize,
    choice: &DesingularizationChoice,
    opts: &EngineOptions,
) -> Result<Vec<FiberRecord>> {
    let expected = curve.genus() - e.slope();
    if l.total() != expected {
        return Err(Error::DegreeMismatch {
            expected,
            actual: l.total(),
        });
    }
    let weights = weight_matrix(curve, e, l, marked, opts)?;

    let mut strata: Vec<Stratum> = (0..curve.component_count()).map(Stratum::Smooth).collect();
    strata.extend((0..curve.node_count()).map(Stratum::Node));

    let mut records = Vec::with_capacity(strata.len());
    for stratum in strata {
        let fiber = fiber_over(curve, stratum)?;
        let limit = limit_on_fiber(&fiber, l, choice, stratum, &weights);
        let record = certify_record(curve, e, l, marked, stratum, fiber, limit, &weights, opts)?;
        records.push(record);
    }
    Ok(records)
}

#[allow(clippy::too_many_arguments)]
fn certify_record(
    curve: &NodalCurve,
    e: &Polarization,
    l: &SheafClass,
    marked: usize,
    stratum: Stratum,
    fiber: ModifiedCurve,
    limit: SheafClass,
    weights: &WeightMatrix,
    opts: &EngineOptions,
) -> Result<FiberRecord> {
    let name = match stratum {
        Stratum::Smooth(k) => curve.component(k).name.clone(),
        Stratum::Node(r) => curve.node(r).name.clone(),
    };
    let violation = |what: String| Error::PaperInvariantViolation(format!("stratum {name}: {what}"));

    let corrected = chain_correction(&fiber, &limit)
        .map_err(|err| violation(format!("limit class fails admissibility ({err})")))?;

    let admissibility = classify_admissibility(&fiber, &corrected);
    if !admissibility.is_negatively_admissible() {
        return Err(violation(format!(
            "corrected class is {admissibility}, expected negatively admissible"
        )));
    }

    if let Stratum::Smooth(k) = stratum {
        let moved = l
            .minus_point(k)
            .plus(&twister_multidegree(curve, &weights[k]));
        let expected = SheafClass::from_vec(fiber.pullback_degrees(moved.degrees()));
        if limit != expected {
            return Err(violation(
                "smooth-stratum limit differs from the twisted moving class".into(),
            ));
        }
    }

    let pushforward = pushforward_descriptor(&fiber, &corrected)
        .map_err(|err| violation(format!("pushforward rejected ({err})")))?;
    if pushforward.total != l.total() - 1 {
        return Err(violation(format!(
            "pushforward total degree {} differs from {}",
            pushforward.total,
            l.total() - 1
        )));
    }

    let stability = classify(
        fiber.curve(),
        &e.pullback(&fiber),
        &corrected,
        fiber.strict_transform(marked),
        opts,
    );
    if !stability.verdict.is_quasistable() {
        return Err(violation(format!(
            "corrected class is {} on the fiber (witness {:?})",
            stability.verdict, stability.witness
        )));
    }

    Ok(FiberRecord {
        stratum,
        fiber,
        limit,
        corrected,
        admissibility,
        pushforward,
        stability,
    })
}
