//! The built-in test curves. Every acceptance criterion quantifies over
//! these six, and `selftest` runs against them.

use crate::curve::NodalCurve;
use crate::stability::{Polarization, SheafClass};

pub struct CorpusEntry {
    pub name: &'static str,
    pub curve: NodalCurve,
    /// The polarization driving the Abel pipeline for this entry.
    pub polarization: Polarization,
    /// Additional polarizations for the beta sweeps.
    pub extra_polarizations: Vec<Polarization>,
    /// Line bundle of total degree `g - slope`.
    pub line_bundle: SheafClass,
    /// Component carrying the marked smooth point.
    pub marked: usize,
}

pub fn corpus() -> Vec<CorpusEntry> {
    let mut entries = Vec::new();

    let banana = NodalCurve::builder()
        .component("v1", 0)
        .component("v2", 0)
        .node("n1", "v1", "v2")
        .node("n2", "v1", "v2")
        .build()
        .expect("banana");
    entries.push(CorpusEntry {
        polarization: Polarization::trivial(&banana),
        extra_polarizations: vec![
            Polarization::new(&banana, 2, &[1, 1]).expect("rank 2"),
            Polarization::new(&banana, 1, &[2, -2]).expect("rank 1"),
        ],
        line_bundle: SheafClass::new(&banana, &[1, 0]).expect("degree 1"),
        marked: 0,
        curve: banana,
        name: "banana",
    });

    let triangle = NodalCurve::builder()
        .component("v1", 0)
        .component("v2", 0)
        .component("v3", 0)
        .node("n12", "v1", "v2")
        .node("n13", "v1", "v3")
        .node("n23", "v2", "v3")
        .build()
        .expect("triangle");
    entries.push(CorpusEntry {
        polarization: Polarization::trivial(&triangle),
        extra_polarizations: vec![
            Polarization::new(&triangle, 3, &[1, 1, 1]).expect("rank 3"),
            Polarization::new(&triangle, 2, &[2, 0, 0]).expect("rank 2"),
        ],
        line_bundle: SheafClass::new(&triangle, &[0, 0, 1]).expect("degree 1"),
        marked: 0,
        curve: triangle,
        name: "triangle",
    });

    let loop_curve = NodalCurve::builder()
        .component("v", 1)
        .node("R", "v", "v")
        .build()
        .expect("loop");
    entries.push(CorpusEntry {
        polarization: Polarization::trivial(&loop_curve),
        extra_polarizations: vec![
            Polarization::new(&loop_curve, 2, &[4]).expect("rank 2"),
            Polarization::new(&loop_curve, 1, &[-1]).expect("rank 1"),
        ],
        line_bundle: SheafClass::new(&loop_curve, &[2]).expect("degree 2"),
        marked: 0,
        curve: loop_curve,
        name: "loop",
    });

    let theta = NodalCurve::builder()
        .component("v1", 0)
        .component("v2", 0)
        .node("n1", "v1", "v2")
        .node("n2", "v1", "v2")
        .node("n3", "v1", "v2")
        .build()
        .expect("theta");
    entries.push(CorpusEntry {
        polarization: Polarization::new(&theta, 2, &[1, 1]).expect("rank 2"),
        extra_polarizations: vec![
            Polarization::trivial(&theta),
            Polarization::new(&theta, 1, &[3, -1]).expect("rank 1"),
        ],
        line_bundle: SheafClass::new(&theta, &[1, 0]).expect("degree 1"),
        marked: 0,
        curve: theta,
        name: "theta",
    });

    let chain = NodalCurve::builder()
        .component("v1", 1)
        .component("v2", 0)
        .component("v3", 0)
        .component("v4", 1)
        .node("n12", "v1", "v2")
        .node("n23", "v2", "v3")
        .node("n34", "v3", "v4")
        .build()
        .expect("chain");
    entries.push(CorpusEntry {
        polarization: Polarization::trivial(&chain),
        extra_polarizations: vec![
            Polarization::new(&chain, 2, &[1, 1, 1, 1]).expect("rank 2"),
            Polarization::new(&chain, 2, &[0, 1, 1, 0]).expect("rank 2"),
        ],
        line_bundle: SheafClass::new(&chain, &[0, 1, 1, 0]).expect("degree 2"),
        marked: 0,
        curve: chain,
        name: "chain4",
    });

    let mixed = NodalCurve::builder()
        .component("v1", 0)
        .component("v2", 0)
        .node("n1", "v1", "v2")
        .node("n2", "v1", "v2")
        .node("R", "v2", "v2")
        .build()
        .expect("mixed");
    entries.push(CorpusEntry {
        polarization: Polarization::trivial(&mixed),
        extra_polarizations: vec![Polarization::new(&mixed, 2, &[1, 1]).expect("rank 2")],
        line_bundle: SheafClass::new(&mixed, &[2, 0]).expect("degree 2"),
        marked: 0,
        curve: mixed,
        name: "mixed",
    });

    entries
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_contract() {
        let entries = corpus();
        let names: Vec<&str> = entries.iter().map(|e| e.name).collect();
        assert_eq!(
            names,
            vec!["banana", "triangle", "loop", "theta", "chain4", "mixed"]
        );
        for entry in &entries {
            assert!(entry.curve.component_count() <= 6);
            // line bundle degree matches the pipeline precondition
            assert_eq!(
                entry.line_bundle.total(),
                entry.curve.genus() - entry.polarization.slope()
            );
        }
        // genus bookkeeping of the named examples
        assert_eq!(entries[0].curve.genus(), 1);
        assert_eq!(entries[1].curve.genus(), 1);
        assert_eq!(entries[2].curve.genus(), 2);
        assert_eq!(entries[3].curve.genus(), 2);
        assert_eq!(entries[4].curve.genus(), 2);
        assert_eq!(entries[5].curve.genus(), 2);
    }
}
