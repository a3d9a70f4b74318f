//! `jacobel` — quasistability certificates and resolved degree-1 Abel maps
//! for nodal curves, computed on the dual graph with exact arithmetic.
//!
//! Exit codes: 0 success, 1 invariant or expectation violation, 2 input
//! error.

mod certificate;
mod document;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jacobel_core::abel::{
    chain_correction, matching_assignments_for, pushforward_descriptor, resolve_abel_map,
    limit_multidegree, Stratum,
};
use jacobel_core::selftest;
use jacobel_core::stability::{classify, enumerate_semistable, SheafClass, Verdict};
use jacobel_core::twister::{
    exhaustive_quasistable_twister, find_quasistable_twister, spanning_tree_count,
    twister_difference,
};

use certificate::*;
use document::{load, ResolvedDocument};

#[derive(Parser)]
#[command(name = "jacobel", version, about = "Quasistability and Abel map engine for nodal curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a curve document and report its statistics
    Validate {
        file: PathBuf,
        /// Emit the certificate as JSON instead of the human table
        #[arg(long)]
        json: bool,
    },
    /// Classify a multidegree against the document's polarization
    Stability {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Comma-separated multidegree override, one entry per component
        #[arg(long)]
        multidegree: Option<String>,
        /// Fail (exit 1) unless the verdict reaches this level:
        /// stable | quasistable | semistable | not-semistable | degree-mismatch
        #[arg(long)]
        expect: Option<String>,
    },
    /// Per-component quasistable twists and twister differences
    Twister {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Re-derive every twist with the exhaustive box search
        #[arg(long)]
        oracle: bool,
    },
    /// Resolve the degree-1 Abel map over every point stratum
    Abel {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Re-derive every twist with the exhaustive box search
        #[arg(long)]
        oracle: bool,
        /// Re-run every matching assignment and require identical
        /// pushforward descriptors
        #[arg(long)]
        all_choices: bool,
    },
    /// Enumerate semistable and quasistable multidegrees of the forced degree
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the acceptance criteria on the built-in corpus
    Selftest {
        #[arg(long)]
        json: bool,
        /// Seed for the randomized uniqueness sweep
        #[arg(long)]
        seed: Option<u64>,
    },
}

enum Failure {
    /// Exit 1: an invariant the engine certifies, or an `--expect`, failed.
    Violation(String),
    /// Exit 2: the input is malformed or violates a precondition.
    Input(String),
}

fn engine_failure(err: jacobel_core::Error) -> Failure {
    use jacobel_core::Error::*;
    match err {
        PaperInvariantViolation(_) | NoQuasistableTwister(_) => Failure::Violation(err.to_string()),
        other => Failure::Input(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { file, json } => cmd_validate(&file, json),
        Command::Stability {
            file,
            json,
            multidegree,
            expect,
        } => cmd_stability(&file, json, multidegree.as_deref(), expect.as_deref()),
        Command::Twister { file, json, oracle } => cmd_twister(&file, json, oracle),
        Command::Abel {
            file,
            json,
            oracle,
            all_choices,
        } => cmd_abel(&file, json, oracle, all_choices),
        Command::Enumerate { file, json } => cmd_enumerate(&file, json),
        Command::Selftest { json, seed } => cmd_selftest(json, seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn load_document(path: &PathBuf) -> Result<ResolvedDocument, Failure> {
    load(path).map_err(Failure::Input)
}

fn cmd_validate(path: &PathBuf, json: bool) -> Result<(), Failure> {
    let doc = load_document(path)?;
    let curve = &doc.curve;
    let reducible = curve.reducible_nodes().len();
    let expected = curve.genus() - doc.polarization.slope();
    let degree_ok = doc.line_bundle.total() == expected;
    let mut warnings = Vec::new();
    if !degree_ok {
        warnings.push(format!(
            "line bundle degree {} differs from genus - slope = {}; twister and abel need the matching degree",
            doc.line_bundle.total(),
            expected
        ));
    }
    let results = ValidateResults {
        components: curve.component_count(),
        nodes: curve.node_count(),
        reducible_nodes: reducible,
        irreducible_nodes: curve.node_count() - reducible,
        genus: curve.genus(),
        polarization_rank: doc.polarization.rank(),
        polarization_degree: doc.polarization.total(),
        slope: doc.polarization.slope(),
        line_bundle_degree: doc.line_bundle.total(),
        expected_line_bundle_degree: expected,
        degree_ok,
        warnings: warnings.clone(),
    };
    let summary = format!(
        "valid curve: {} components, {} nodes, genus {}",
        results.components, results.nodes, results.genus
    );
    let cert = Certificate::new("validate", Some(doc.document.clone()), results, summary);
    if json {
        print!("{}", cert.emit());
    } else {
        println!("curve       : {} components, {} nodes ({} reducible, {} irreducible)",
            cert.results.components,
            cert.results.nodes,
            cert.results.reducible_nodes,
            cert.results.irreducible_nodes
        );
        println!("genus       : {}", cert.results.genus);
        println!(
            "polarization: rank {} degree {} (slope {})",
            cert.results.polarization_rank, cert.results.polarization_degree, cert.results.slope
        );
        println!(
            "line bundle : degree {} (expected {})",
            cert.results.line_bundle_degree, cert.results.expected_line_bundle_degree
        );
        for warning in &warnings {
            println!("warning     : {warning}");
        }
    }
    Ok(())
}

fn parse_expectation(raw: &str) -> Result<(&'static str, Box<dyn Fn(Verdict) -> bool>), Failure> {
    match raw {
        "stable" => Ok(("stable", Box::new(|v| v == Verdict::Stable))),
        "quasistable" => Ok(("quasistable", Box::new(|v: Verdict| v.is_quasistable()))),
        "semistable" => Ok(("semistable", Box::new(|v: Verdict| v.is_semistable()))),
        "not-semistable" => Ok((
            "not-semistable",
            Box::new(|v| v == Verdict::NotSemistable),
        )),
        "degree-mismatch" => Ok((
            "degree-mismatch",
            Box::new(|v| v == Verdict::DegreeMismatch),
        )),
        other => Err(Failure::Input(format!("unknown expectation `{other}`"))),
    }
}

fn cmd_stability(
    path: &PathBuf,
    json: bool,
    multidegree: Option<&str>,
    expect: Option<&str>,
) -> Result<(), Failure> {
    let doc = load_document(path)?;
    let curve = &doc.curve;

    let (class, default_class, coefficients) = match multidegree {
        Some(raw) => {
            let entries: Result<Vec<i64>, _> =
                raw.split(',').map(|s| s.trim().parse::<i64>()).collect();
            let entries =
                entries.map_err(|err| Failure::Input(format!("bad multidegree: {err}")))?;
            let class = SheafClass::new(curve, &entries)
                .map_err(|err| Failure::Input(err.to_string()))?;
            (class, false, None)
        }
        None => {
            let moving = doc.line_bundle.minus_point(doc.marked);
            let twist =
                find_quasistable_twister(curve, &doc.polarization, &moving, doc.marked, &doc.options)
                    .map_err(engine_failure)?;
            (twist.twisted.clone(), true, Some(twist.coefficients))
        }
    };

    let report = classify(curve, &doc.polarization, &class, doc.marked, &doc.options);
    let verdict = report.verdict;
    let results = StabilityResults {
        multidegree: class.degrees().to_vec(),
        default_class,
        twist_coefficients: coefficients,
        report: report_dto(curve, &report),
    };
    let summary = format!("verdict: {verdict}");
    let cert = Certificate::new("stability", Some(doc.document.clone()), results, summary);
    if json {
        print!("{}", cert.emit());
    } else {
        println!("class  : {}", degree_line(curve, class.degrees()));
        println!("verdict: {verdict}");
        if let Some(witness) = &cert.results.report.witness {
            println!(
                "witness: {{{}}} with beta {}",
                witness.subcurve.join(","),
                witness.beta
            );
        }
        if let Some(table) = &cert.results.report.beta_table {
            println!("beta table:");
            for row in table {
                println!("  {{{}}}: {}", row.subcurve.join(","), row.beta);
            }
        }
    }

    if let Some(raw) = expect {
        let (label, satisfied) = parse_expectation(raw)?;
        if !satisfied(verdict) {
            return Err(Failure::Violation(format!(
                "expected {label}, got {verdict}"
            )));
        }
    }
    Ok(())
}

fn degree_precondition(doc: &ResolvedDocument) -> Result<(), Failure> {
    let expected = doc.curve.genus() - doc.polarization.slope();
    if doc.line_bundle.total() != expected {
        return Err(Failure::Input(format!(
            "line bundle degree {} must equal genus - slope = {}",
            doc.line_bundle.total(),
            expected
        )));
    }
    Ok(())
}

fn cmd_twister(path: &PathBuf, json: bool, oracle: bool) -> Result<(), Failure> {
    let doc = load_document(path)?;
    degree_precondition(&doc)?;
    let curve = &doc.curve;
    let p = curve.component_count();

    let mut per_component = Vec::with_capacity(p);
    for i in 0..p {
        let moving = doc.line_bundle.minus_point(i);
        let twist =
            find_quasistable_twister(curve, &doc.polarization, &moving, doc.marked, &doc.options)
                .map_err(engine_failure)?;
        let oracle_agrees = if oracle {
            let coefficients = exhaustive_quasistable_twister(
                curve,
                &doc.polarization,
                &moving,
                doc.marked,
                &doc.options,
            )
            .map_err(engine_failure)?;
            let agrees = coefficients == twist.coefficients;
            if !agrees {
                return Err(Failure::Violation(format!(
                    "oracle twist {:?} for component {} disagrees with greedy {:?}",
                    coefficients,
                    curve.component(i).name,
                    twist.coefficients
                )));
            }
            Some(agrees)
        } else {
            None
        };
        per_component.push(twist_dto(curve, i, &twist, oracle_agrees));
    }

    let mut differences = Vec::new();
    for i in 0..p {
        for j in 0..p {
            if i == j || curve.delta_between(i, j) == 0 {
                continue;
            }
            let diff = twister_difference(
                curve,
                &doc.polarization,
                &doc.line_bundle,
                doc.marked,
                i,
                j,
                &doc.options,
            )
            .map_err(engine_failure)?;
            differences.push(difference_dto(curve, &diff));
        }
    }

    let summary = format!(
        "{} component twists, {} adjacent pairs certified",
        per_component.len(),
        differences.len()
    );
    let cert = Certificate::new(
        "twister",
        Some(doc.document.clone()),
        TwisterResults {
            per_component,
            differences,
        },
        summary,
    );
    if json {
        print!("{}", cert.emit());
    } else {
        println!("component twists:");
        for t in &cert.results.per_component {
            println!(
                "  {}: a={:?} twist={:?} class={:?}{}",
                t.component,
                t.coefficients,
                t.twister_multidegree,
                t.twisted_class,
                if t.via_fallback { " (fallback)" } else { "" }
            );
        }
        println!("twister differences:");
        for d in &cert.results.differences {
            println!(
                "  ({} -> {}): Z={{{}}} from {} corrected={:?}{}",
                d.from_component,
                d.to_component,
                d.subcurve.join(","),
                d.source,
                d.corrected,
                if d.tie_candidates > 1 {
                    format!(" ({} tied candidates)", d.tie_candidates)
                } else {
                    String::new()
                }
            );
        }
    }
    Ok(())
}

fn cmd_abel(path: &PathBuf, json: bool, oracle: bool, all_choices: bool) -> Result<(), Failure> {
    let doc = load_document(path)?;
    degree_precondition(&doc)?;
    let curve = &doc.curve;

    let records = resolve_abel_map(
        curve,
        &doc.polarization,
        &doc.line_bundle,
        doc.marked,
        &doc.choice,
        &doc.options,
    )
    .map_err(engine_failure)?;

    let sweep = if all_choices {
        let mut checked = 0u64;
        for r in 0..curve.node_count() {
            let assignments = matching_assignments_for(curve, r);
            if assignments.len() as u128 > doc.options.search_cap as u128 {
                return Err(Failure::Input(format!(
                    "{} matching assignments for node {} exceed the search cap",
                    assignments.len(),
                    curve.node(r).name
                )));
            }
            let mut reference = None;
            for choice in assignments {
                let (fiber, limit) = limit_multidegree(
                    curve,
                    &doc.polarization,
                    &doc.line_bundle,
                    doc.marked,
                    &choice,
                    Stratum::Node(r),
                    &doc.options,
                )
                .map_err(engine_failure)?;
                let corrected = chain_correction(&fiber, &limit).map_err(engine_failure)?;
                let push = pushforward_descriptor(&fiber, &corrected).map_err(engine_failure)?;
                checked += 1;
                match &reference {
                    None => reference = Some(push),
                    Some(expected) => {
                        if expected != &push {
                            return Err(Failure::Violation(format!(
                                "pushforward over node {} differs between matching assignments",
                                curve.node(r).name
                            )));
                        }
                    }
                }
            }
        }
        Some(SweepDto {
            assignments_checked: checked,
            identical: true,
        })
    } else {
        None
    };

    let oracle_dto = if oracle {
        let mut checked = 0u64;
        for i in 0..curve.component_count() {
            let moving = doc.line_bundle.minus_point(i);
            let greedy = find_quasistable_twister(
                curve,
                &doc.polarization,
                &moving,
                doc.marked,
                &doc.options,
            )
            .map_err(engine_failure)?;
            let exhaustive = exhaustive_quasistable_twister(
                curve,
                &doc.polarization,
                &moving,
                doc.marked,
                &doc.options,
            )
            .map_err(engine_failure)?;
            if exhaustive != greedy.coefficients {
                return Err(Failure::Violation(format!(
                    "oracle twist for component {} disagrees with the greedy search",
                    curve.component(i).name
                )));
            }
            checked += 1;
        }
        Some(OracleDto {
            twists_checked: checked,
            agree: true,
        })
    } else {
        None
    };

    let record_dtos: Vec<RecordDto> = records.iter().map(|r| record_dto(curve, r)).collect();
    let summary = format!(
        "{} strata resolved, all quasistable and negatively admissible",
        record_dtos.len()
    );
    let cert = Certificate::new(
        "abel",
        Some(doc.document.clone()),
        AbelResults {
            records: record_dtos,
            all_choices: sweep,
            oracle: oracle_dto,
        },
        summary,
    );
    if json {
        print!("{}", cert.emit());
    } else {
        for (record, dto) in records.iter().zip(&cert.results.records) {
            println!("stratum {} ({}, fiber {}):", dto.stratum, dto.kind, dto.fiber);
            println!(
                "  limit     : {}",
                degree_line(record.fiber.curve(), dto.limit.as_slice())
            );
            println!(
                "  corrected : {}",
                degree_line(record.fiber.curve(), dto.corrected.as_slice())
            );
            println!("  class     : {}", dto.admissibility);
            println!(
                "  pushforward: {} | noninvertible {{{}}} | total {}",
                degree_line(curve, &dto.pushforward.multidegree),
                dto.pushforward.noninvertible_nodes.join(","),
                dto.pushforward.total
            );
            println!("  stability : {}", dto.stability.verdict);
        }
        if let Some(sweep) = &cert.results.all_choices {
            println!(
                "all-choices: {} assignments, pushforwards identical",
                sweep.assignments_checked
            );
        }
        if let Some(oracle) = &cert.results.oracle {
            println!("oracle: {} twists re-derived, all agree", oracle.twists_checked);
        }
    }
    Ok(())
}

fn cmd_enumerate(path: &PathBuf, json: bool) -> Result<(), Failure> {
    let doc = load_document(path)?;
    let curve = &doc.curve;
    let (semi, quasi) = enumerate_semistable(curve, &doc.polarization, doc.marked, &doc.options)
        .map_err(engine_failure)?;
    let results = EnumerateResults {
        total_degree: curve.genus() - 1 - doc.polarization.slope(),
        twister_classes: spanning_tree_count(curve),
        semistable: semi.iter().map(|s| s.degrees().to_vec()).collect(),
        quasistable: quasi.iter().map(|s| s.degrees().to_vec()).collect(),
    };
    let summary = format!(
        "{} semistable, {} quasistable multidegrees of total degree {}",
        results.semistable.len(),
        results.quasistable.len(),
        results.total_degree
    );
    let cert = Certificate::new("enumerate", Some(doc.document.clone()), results, summary);
    if json {
        print!("{}", cert.emit());
    } else {
        println!(
            "total degree {} | twister classes {}",
            cert.results.total_degree, cert.results.twister_classes
        );
        println!("semistable:");
        for d in &cert.results.semistable {
            println!("  {}", degree_line(curve, d));
        }
        println!("quasistable:");
        for d in &cert.results.quasistable {
            println!("  {}", degree_line(curve, d));
        }
    }
    Ok(())
}

fn cmd_selftest(json: bool, seed: Option<u64>) -> Result<(), Failure> {
    let seed = seed.unwrap_or(selftest::DEFAULT_SEED);
    let report = selftest::run(seed);
    let results = selftest_results(&report);
    let summary = if results.passed {
        format!("all {} criteria passed", results.criteria.len())
    } else {
        "criteria failed".to_owned()
    };
    let cert = Certificate::new("selftest", None, results, summary);
    if json {
        print!("{}", cert.emit());
    } else {
        for criterion in &cert.results.criteria {
            println!(
                "criterion {} ({}): {} [{} checks]",
                criterion.id,
                criterion.name,
                if criterion.passed { "PASS" } else { "FAIL" },
                criterion.checks
            );
            for failure in &criterion.failures {
                println!("    {failure}");
            }
        }
        println!("selftest: {}", if cert.results.passed { "PASS" } else { "FAIL" });
    }
    if !report.passed() {
        return Err(Failure::Violation("selftest criteria failed".to_owned()));
    }
    Ok(())
}
