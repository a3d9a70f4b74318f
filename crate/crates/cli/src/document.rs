//! The on-disk curve description and its validation into engine types.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use jacobel_core::abel::{DesingularizationChoice, Matching};
use jacobel_core::curve::NodalCurve;
use jacobel_core::stability::{Polarization, SheafClass};
use jacobel_core::EngineOptions;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub name: String,
    pub genus: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub name: String,
    pub ends: [String; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarizationDoc {
    pub rank: i64,
    pub multidegree: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingDoc {
    /// Ordered pair of distinct reducible nodes: fiber node, then the node
    /// whose chain the matching concerns.
    pub pair: [String; 2],
    pub matching: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connected_only: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_table_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iteration_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_cap: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_cap: Option<u64>,
}

/// A self-contained curve document: the curve, the polarization, the line
/// bundle, the marked point, and optional desingularization matchings and
/// engine options.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDocument {
    pub components: Vec<ComponentDoc>,
    #[serde(default)]
    pub nodes: Vec<NodeDoc>,
    pub polarization: PolarizationDoc,
    pub line_bundle: BTreeMap<String, i64>,
    pub marked_point: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub desingularization: Vec<MatchingDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsDoc>,
}

/// Engine-ready view of a parsed document.
pub struct ResolvedDocument {
    pub document: CurveDocument,
    pub curve: NodalCurve,
    pub polarization: Polarization,
    pub line_bundle: SheafClass,
    pub marked: usize,
    pub choice: DesingularizationChoice,
    pub options: EngineOptions,
}

pub fn load(path: &Path) -> Result<ResolvedDocument, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| format!("cannot read {}: {err}", path.display()))?;
    let document: CurveDocument =
        serde_json::from_str(&text).map_err(|err| format!("malformed document: {err}"))?;
    resolve(document)
}

pub fn resolve(document: CurveDocument) -> Result<ResolvedDocument, String> {
    let mut builder = NodalCurve::builder();
    for c in &document.components {
        builder = builder.component(&c.name, c.genus);
    }
    for n in &document.nodes {
        builder = builder.node(&n.name, &n.ends[0], &n.ends[1]);
    }
    let curve = builder.build().map_err(|err| err.to_string())?;

    let to_degrees = |map: &BTreeMap<String, i64>, what: &str| -> Result<Vec<i64>, String> {
        for name in map.keys() {
            if curve.component_index(name).is_none() {
                return Err(format!("{what} names unknown component `{name}`"));
            }
        }
        curve
            .components()
            .iter()
            .map(|c| {
                map.get(&c.name)
                    .copied()
                    .ok_or_else(|| format!("{what} is missing component `{}`", c.name))
            })
            .collect()
    };

    let e_degrees = to_degrees(&document.polarization.multidegree, "polarization multidegree")?;
    let polarization = Polarization::new(&curve, document.polarization.rank, &e_degrees)
        .map_err(|err| err.to_string())?;
    let l_degrees = to_degrees(&document.line_bundle, "line_bundle")?;
    let line_bundle = SheafClass::new(&curve, &l_degrees).map_err(|err| err.to_string())?;

    let marked = curve
        .component_index(&document.marked_point)
        .ok_or_else(|| {
            format!(
                "marked_point names unknown component `{}`",
                document.marked_point
            )
        })?;

    let mut choice = DesingularizationChoice::new();
    let mut seen = std::collections::BTreeSet::new();
    for entry in &document.desingularization {
        let over = curve
            .node_index(&entry.pair[0])
            .ok_or_else(|| format!("desingularization names unknown node `{}`", entry.pair[0]))?;
        let at = curve
            .node_index(&entry.pair[1])
            .ok_or_else(|| format!("desingularization names unknown node `{}`", entry.pair[1]))?;
        if over == at {
            return Err(format!(
                "desingularization pair [{0}, {0}] is the diagonal; it has no choice",
                entry.pair[0]
            ));
        }
        for (label, index) in [(&entry.pair[0], over), (&entry.pair[1], at)] {
            if !curve.node(index).is_reducible() {
                return Err(format!(
                    "desingularization pair names irreducible node `{label}`"
                ));
            }
        }
        if !seen.insert((over, at)) {
            return Err(format!(
                "desingularization pair [{}, {}] listed twice",
                entry.pair[0], entry.pair[1]
            ));
        }
        let matching = match entry.matching.as_str() {
            "cross" => Matching::Cross,
            "parallel" => Matching::Parallel,
            other => return Err(format!("unknown matching `{other}`")),
        };
        choice.set(over, at, matching);
    }

    let mut options = EngineOptions {
        beta_table_cap: 64,
        ..EngineOptions::default()
    };
    if let Some(doc_opts) = &document.options {
        if let Some(v) = doc_opts.connected_only {
            options.connected_only = v;
        }
        if let Some(v) = doc_opts.beta_table_cap {
            options.beta_table_cap = v;
        }
        if let Some(v) = doc_opts.iteration_cap {
            options.iteration_cap = v;
        }
        if let Some(v) = doc_opts.box_cap {
            options.box_cap = v;
        }
        if let Some(v) = doc_opts.search_cap {
            options.search_cap = v;
        }
    }

    Ok(ResolvedDocument {
        document,
        curve,
        polarization,
        line_bundle,
        marked,
        choice,
        options,
    })
}
