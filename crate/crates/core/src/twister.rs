//! Twisters via the dual-graph Laplacian, the unique quasistable twist, and
//! twister difference subcurves.
//!
//! A twister is the restriction to the curve of a divisor supported on the
//! special fiber of a regular smoothing, written as integer coefficients
//! `a_i` over the components. Its multidegree is the negated graph Laplacian
//! applied to `a`: each non-loop node between components `i` and `j`
//! contributes `a_j - a_i` at `i` and `a_i - a_j` at `j`. Loops contribute
//! nothing and constants are the kernel on a connected curve.

use crate::curve::{NodalCurve, Subcurve};
use crate::stability::{classify, Polarization, SheafClass};
use crate::{EngineOptions, Error, Rational, Result};

/// Multidegree of the twister with the given component coefficients.
pub fn twister_multidegree(curve: &NodalCurve, coefficients: &[i64]) -> SheafClass {
    assert_eq!(coefficients.len(), curve.component_count());
    let mut degrees = vec![0i64; coefficients.len()];
    for node in curve.nodes().iter().filter(|n| n.is_reducible()) {
        let (a, b) = node.ends;
        degrees[a] += coefficients[b] - coefficients[a];
        degrees[b] += coefficients[a] - coefficients[b];
    }
    SheafClass::from_vec(degrees)
}

/// Multidegree of `O(-Y)` for a subcurve `Y`.
pub fn removal_twist(curve: &NodalCurve, y: Subcurve<'_>) -> SheafClass {
    let coefficients: Vec<i64> = (0..curve.component_count())
        .map(|k| if y.contains(k) { -1 } else { 0 })
        .collect();
    twister_multidegree(curve, &coefficients)
}

fn normalize(mut coefficients: Vec<i64>) -> Vec<i64> {
    let min = coefficients.iter().copied().min().unwrap_or(0);
    for c in &mut coefficients {
        *c -= min;
    }
    coefficients
}

/// Result of a quasistable twist search. Coefficients are normalized so the
/// minimum is zero, which is the unique representative of the class on a
/// connected curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasistableTwist {
    pub coefficients: Vec<i64>,
    pub twisted: SheafClass,
    pub iterations: u32,
    pub via_fallback: bool,
}

/// Find the unique twister making `d` P-quasistable.
///
/// Fast path: repeatedly pick the violating proper subcurve with minimal
/// beta (ties: fewest components, then lexicographic) and twist by its
/// negative, which raises its beta by the boundary node count. An iteration
/// cap guards termination; on overflow the exhaustive box search takes over,
/// so the operation is total whenever a quasistable twist exists in the box.
pub fn find_quasistable_twister(
    curve: &NodalCurve,
    e: &Polarization,
    d: &SheafClass,
    marked: usize,
    opts: &EngineOptions,
) -> Result<QuasistableTwist> {
    let expected = curve.genus() - 1 - e.slope();
    if d.total() != expected {
        return Err(Error::DegreeMismatch {
            expected,
            actual: d.total(),
        });
    }

    let p = curve.component_count();
    let mut coefficients = vec![0i64; p];
    let mut current = d.clone();
    let subcurves = curve.proper_subcurves();

    for iteration in 0..opts.iteration_cap {
        let report = classify(curve, e, &current, marked, opts);
        if report.verdict.is_quasistable() {
            return Ok(QuasistableTwist {
                coefficients: normalize(coefficients),
                twisted: current,
                iterations: iteration,
                via_fallback: false,
            });
        }

        let betas: Vec<Rational> = subcurves
            .iter()
            .map(|y| crate::stability::beta_unchecked(e, &current, *y))
            .collect();
        let min = betas.iter().min().copied().expect("p >= 2 here");
        // Violators: the beta-minimizing subcurves when the minimum is
        // negative, otherwise the marked zero-beta subcurves. Canonical order
        // already sorts by component count then lexicographically.
        let target = subcurves
            .iter()
            .zip(&betas)
            .find(|(y, b)| {
                if min < Rational::from_integer(0) {
                    **b == min
                } else {
                    **b == Rational::from_integer(0) && y.contains(marked)
                }
            })
            .map(|(y, _)| *y)
            .expect("non-quasistable class has a violating subcurve");

        for k in target.members() {
            coefficients[k] -= 1;
        }
        current = current.plus(&removal_twist(curve, target));
    }

    let coefficients = exhaustive_quasistable_twister(curve, e, d, marked, opts)?;
    let twisted = d.plus(&twister_multidegree(curve, &coefficients));
    Ok(QuasistableTwist {
        coefficients,
        twisted,
        iterations: opts.iteration_cap,
        via_fallback: true,
    })
}

/// Exhaustive oracle: scan normalized coefficient vectors (minimum entry
/// zero) in boxes `[0, b]^p` of growing side and return the one whose twist
/// is P-quasistable. Finding two distinct working vectors would contradict
/// uniqueness of the quasistable representative and is reported, never
/// swallowed.
pub fn exhaustive_quasistable_twister(
    curve: &NodalCurve,
    e: &Polarization,
    d: &SheafClass,
    marked: usize,
    opts: &EngineOptions,
) -> Result<Vec<i64>> {
    let expected = curve.genus() - 1 - e.slope();
    if d.total() != expected {
        return Err(Error::DegreeMismatch {
            expected,
            actual: d.total(),
        });
    }
    let p = curve.component_count();
    for side in 0..=opts.box_cap {
        let volume = ((side + 1) as u128).saturating_pow(p as u32);
        if volume > opts.search_cap as u128 {
            return Err(Error::SearchTooLarge(volume));
        }
        let mut found: Vec<Vec<i64>> = Vec::new();
        let mut a = vec![0i64; p];
        'scan: loop {
            // normalized representatives on the shell of the current box;
            // inner vectors were covered by smaller sides
            if a.contains(&0) && (side == 0 || a.contains(&side)) {
                let twisted = d.plus(&twister_multidegree(curve, &a));
                if classify(curve, e, &twisted, marked, opts)
                    .verdict
                    .is_quasistable()
                {
                    found.push(a.clone());
                }
            }
            let mut k = p;
            while k > 0 {
                k -= 1;
                if a[k] < side {
                    a[k] += 1;
                    for x in a.iter_mut().skip(k + 1) {
                        *x = 0;
                    }
                    continue 'scan;
                }
            }
            break;
        }
        match found.len() {
            0 => continue,
            1 => return Ok(found.pop().expect("len checked")),
            _ => {
                return Err(Error::PaperInvariantViolation(format!(
                    "multiple quasistable twists found: {:?}",
                    found
                )))
            }
        }
    }
    Err(Error::NoQuasistableTwister(opts.box_cap))
}

/// Integer coefficients with `twist(a) = diff`, normalized, when they exist.
/// Decides twister-class equivalence of two multidegrees via their
/// difference.
pub fn solve_twister_coefficients(curve: &NodalCurve, diff: &SheafClass) -> Option<Vec<i64>> {
    let p = curve.component_count();
    assert_eq!(diff.len(), p);
    if diff.total() != 0 {
        return None;
    }
    if p == 1 {
        return (diff.entry(0) == 0).then(|| vec![0]);
    }
    // Reduced Laplacian system with the last coefficient pinned to zero.
    let n = p - 1;
    let mut m = vec![vec![Rational::from_integer(0); n + 1]; n];
    for (row, m_row) in m.iter_mut().enumerate() {
        for (col, cell) in m_row.iter_mut().enumerate().take(n) {
            let entry = if row == col {
                -(curve.loopless_valence(row) as i64)
            } else {
                curve.delta_between(row, col) as i64
            };
            *cell = Rational::from_integer(entry);
        }
        m_row[n] = Rational::from_integer(diff.entry(row));
    }
    // Gaussian elimination; the reduced Laplacian of a connected graph is
    // invertible.
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r][col] != Rational::from_integer(0))?;
        m.swap(col, pivot);
        let inv = m[col][col];
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col {
                continue;
            }
            let factor = row[col] / inv;
            for (cell, pivot_cell) in row.iter_mut().zip(&pivot_row).skip(col) {
                *cell -= factor * *pivot_cell;
            }
        }
    }
    let mut a = vec![0i64; p];
    for row in 0..n {
        let value = m[row][n] / m[row][row];
        if !value.is_integer() {
            return None;
        }
        a[row] = value.to_integer();
    }
    let candidate = normalize(a);
    (twister_multidegree(curve, &candidate) == *diff).then_some(candidate)
}

/// Number of spanning trees of the dual graph (loops ignored): the number of
/// twister classes of fixed total degree. Determinant of the reduced
/// Laplacian by fraction-free elimination.
pub fn spanning_tree_count(curve: &NodalCurve) -> i128 {
    let p = curve.component_count();
    if p == 1 {
        return 1;
    }
    let n = p - 1;
    let mut m = vec![vec![0i128; n]; n];
    for (row, m_row) in m.iter_mut().enumerate() {
        for (col, cell) in m_row.iter_mut().enumerate() {
            *cell = if row == col {
                curve.loopless_valence(row) as i128
            } else {
                -(curve.delta_between(row, col) as i128)
            };
        }
    }
    // Bareiss
    let mut previous = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return 0;
            };
            m.swap(k, swap);
            for cell in m[k].iter_mut() {
                *cell = -*cell;
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / previous;
            }
            m[i][k] = 0;
        }
        previous = m[k][k];
    }
    m[n - 1][n - 1]
}

/// Which set the twister difference subcurve came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZSource {
    /// Minimal-beta subcurves with negative beta.
    Negative,
    /// Minimal-beta subcurves with beta zero containing the marked component.
    ZeroMarked,
    /// Both sets empty: the intermediate class is already quasistable.
    Empty,
}

impl ZSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ZSource::Negative => "A",
            ZSource::ZeroMarked => "B",
            ZSource::Empty => "none",
        }
    }
}

/// Certified computation of the twister difference subcurve for an ordered
/// component pair.
#[derive(Clone, Debug)]
pub struct TwisterDifferenceResult {
    pub i: usize,
    pub j: usize,
    pub twist_i: QuasistableTwist,
    pub twist_j: QuasistableTwist,
    /// The intermediate class: the point moved to component `j` while keeping
    /// the twist of component `i`.
    pub intermediate: SheafClass,
    /// Members of the twister difference subcurve; empty when no correction
    /// is needed.
    pub subcurve: Vec<usize>,
    pub source: ZSource,
    /// Number of equally minimal candidates the tie-break had to order.
    pub tie_candidates: u32,
    /// The corrected class `intermediate (x) O(-Z)`, certified quasistable.
    pub corrected: SheafClass,
}

/// Compute the twister difference subcurve `Z` between components `i` and
/// `j` for the line bundle `l` of total degree `g - slope`, verify that the
/// corrected class is P-quasistable and that the two per-component twists
/// differ exactly by `O(-Z)`.
pub fn twister_difference(
    curve: &NodalCurve,
    e: &Polarization,
    l: &SheafClass,
    marked: usize,
    i: usize,
    j: usize,
    opts: &EngineOptions,
) -> Result<TwisterDifferenceResult> {
    let expected = curve.genus() - e.slope();
    if l.total() != expected {
        return Err(Error::DegreeMismatch {
            expected,
            actual: l.total(),
        });
    }
    if i != j && curve.delta_between(i, j) == 0 {
        return Err(Error::ComponentsNotAdjacent { i, j });
    }

    let twist_i = find_quasistable_twister(curve, e, &l.minus_point(i), marked, opts)?;
    let twist_j = find_quasistable_twister(curve, e, &l.minus_point(j), marked, opts)?;
    let intermediate = l
        .minus_point(j)
        .plus(&twister_multidegree(curve, &twist_i.coefficients));

    if i == j {
        return Ok(TwisterDifferenceResult {
            i,
            j,
            twist_j,
            intermediate: intermediate.clone(),
            corrected: intermediate,
            subcurve: Vec::new(),
            source: ZSource::Empty,
            tie_candidates: 0,
            twist_i,
        });
    }

    let subcurves = curve.proper_subcurves();
    let betas: Vec<Rational> = subcurves
        .iter()
        .map(|y| crate::stability::beta_unchecked(e, &intermediate, *y))
        .collect();
    let zero = Rational::from_integer(0);
    let min = betas.iter().min().copied().unwrap_or(zero);

    let pool: Vec<Subcurve<'_>> = if min < zero {
        subcurves
            .iter()
            .zip(&betas)
            .filter(|(_, b)| **b == min)
            .map(|(y, _)| *y)
            .collect()
    } else {
        subcurves
            .iter()
            .zip(&betas)
            .filter(|(y, b)| **b == zero && min == zero && y.contains(marked))
            .map(|(y, _)| *y)
            .collect()
    };
    let source = if pool.is_empty() {
        ZSource::Empty
    } else if min < zero {
        ZSource::Negative
    } else {
        ZSource::ZeroMarked
    };

    let (z, ties) = if pool.is_empty() {
        (None, 0u32)
    } else {
        // Canonical order sorts by component count then lexicographically, so
        // the first minimal-size member is the chosen representative.
        let smallest = pool.iter().map(|y| y.component_count()).min().unwrap();
        let ties = pool
            .iter()
            .filter(|y| y.component_count() == smallest)
            .count() as u32;
        let chosen = *pool
            .iter()
            .find(|y| y.component_count() == smallest)
            .unwrap();
        (Some(chosen), ties)
    };

    if let Some(z) = z {
        if !z.contains(j) || z.contains(i) {
            return Err(Error::PaperInvariantViolation(format!(
                "twister difference subcurve {z} for ({i},{j}) fails the shape rule"
            )));
        }
    }

    let corrected = match z {
        Some(z) => intermediate.plus(&removal_twist(curve, z)),
        None => intermediate.clone(),
    };

    let report = classify(curve, e, &corrected, marked, opts);
    if !report.verdict.is_quasistable() {
        return Err(Error::PaperInvariantViolation(format!(
            "corrected class {:?} for pair ({i},{j}) is {} (witness {:?})",
            corrected.degrees(),
            report.verdict,
            report.witness,
        )));
    }

    let via_difference = match z {
        Some(z) => twister_multidegree(curve, &twist_i.coefficients).plus(&removal_twist(curve, z)),
        None => twister_multidegree(curve, &twist_i.coefficients),
    };
    if twister_multidegree(curve, &twist_j.coefficients) != via_difference {
        return Err(Error::PaperInvariantViolation(format!(
            "twist of component {j} differs from twist of {i} corrected by -Z for pair ({i},{j})"
        )));
    }

    Ok(TwisterDifferenceResult {
        i,
        j,
        twist_i,
        twist_j,
        intermediate,
        subcurve: z.map(|z| z.members()).unwrap_or_default(),
        source,
        tie_candidates: ties,
        corrected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn banana() -> NodalCurve {
        NodalCurve::builder()
            .component("v1", 0)
            .component("v2", 0)
            .node("n1", "v1", "v2")
            .node("n2", "v1", "v2")
            .build()
            .unwrap()
    }

    fn opts() -> EngineOptions {
        EngineOptions::default()
    }

    #[test]
    fn multidegree_of_banana_coefficients() {
        let c = banana();
        let t = twister_multidegree(&c, &[1, 0]);
        assert_eq!(t.degrees(), &[-2, 2]);
    }

    #[test]
    fn constants_are_kernel() {
        let c = banana();
        assert_eq!(twister_multidegree(&c, &[3, 3]).degrees(), &[0, 0]);
    }

    #[test]
    fn loops_excluded() {
        let c = NodalCurve::builder()
            .component("v", 1)
            .node("R", "v", "v")
            .build()
            .unwrap();
        assert_eq!(twister_multidegree(&c, &[1]).degrees(), &[0]);
    }

    #[test]
    fn quasistable_twist_of_banana() {
        let c = banana();
        let e = Polarization::trivial(&c);
        let d = SheafClass::new(&c, &[-1, 1]).unwrap();
        let t = find_quasistable_twister(&c, &e, &d, 0, &opts()).unwrap();
        assert_eq!(t.coefficients, vec![0, 1]);
        assert_eq!(t.twisted.degrees(), &[1, -1]);

        // agreement with the exhaustive oracle
        let oracle = exhaustive_quasistable_twister(&c, &e, &d, 0, &opts()).unwrap();
        assert_eq!(oracle, t.coefficients);
    }

    #[test]
    fn already_quasistable_is_fixed_point() {
        let c = banana();
        let e = Polarization::trivial(&c);
        let d = SheafClass::new(&c, &[1, -1]).unwrap();
        let t = find_quasistable_twister(&c, &e, &d, 0, &opts()).unwrap();
        assert_eq!(t.coefficients, vec![0, 0]);
        assert_eq!(t.twisted, d);
    }

    #[test]
    fn single_component_twist_trivial() {
        let c = NodalCurve::builder().component("v", 2).build().unwrap();
        let e = Polarization::trivial(&c);
        let d = SheafClass::new(&c, &[1]).unwrap();
        let t = find_quasistable_twister(&c, &e, &d, 0, &opts()).unwrap();
        assert_eq!(t.coefficients, vec![0]);
    }

    #[test]
    fn degree_mismatch_rejected() {
        let c = banana();
        let e = Polarization::trivial(&c);
        let d = SheafClass::new(&c, &[1, 1]).unwrap();
        assert!(matches!(
            find_quasistable_twister(&c, &e, &d, 0, &opts()),
            Err(Error::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn class_solver_round_trip() {
        let c = banana();
        let diff = twister_multidegree(&c, &[0, 2]);
        let a = solve_twister_coefficients(&c, &diff).unwrap();
        assert_eq!(a, vec![0, 2]);
        let not_a_twist = SheafClass::new(&c, &[1, -1]).unwrap();
        assert!(solve_twister_coefficients(&c, &not_a_twist).is_none());
    }

    #[test]
    fn spanning_trees() {
        let triangle = NodalCurve::builder()
            .component("v1", 0)
            .component("v2", 0)
            .component("v3", 0)
            .node("n12", "v1", "v2")
            .node("n13", "v1", "v3")
            .node("n23", "v2", "v3")
            .build()
            .unwrap();
        assert_eq!(spanning_tree_count(&triangle), 3);
        assert_eq!(spanning_tree_count(&banana()), 2);
    }

    #[test]
    fn difference_with_correction() {
        let c = banana();
        let e = Polarization::trivial(&c);
        let l = SheafClass::new(&c, &[1, 0]).unwrap();
        // marked point on v2, pair (v1, v2)
        let r = twister_difference(&c, &e, &l, 1, 0, 1, &opts()).unwrap();
        assert_eq!(r.twist_i.coefficients, vec![0, 0]);
        assert_eq!(r.intermediate.degrees(), &[1, -1]);
        assert_eq!(r.source, ZSource::ZeroMarked);
        assert_eq!(r.subcurve, vec![1]);
        assert_eq!(r.corrected.degrees(), &[-1, 1]);
        assert_eq!(
            twister_multidegree(&c, &r.twist_j.coefficients).degrees(),
            &[-2, 2]
        );
    }

    #[test]
    fn difference_trivial_when_already_quasistable() {
        let c = banana();
        let e = Polarization::trivial(&c);
        let l = SheafClass::new(&c, &[1, 0]).unwrap();
        // marked point on v1: the moved class is already quasistable
        let r = twister_difference(&c, &e, &l, 0, 0, 1, &opts()).unwrap();
        assert_eq!(r.source, ZSource::Empty);
        assert!(r.subcurve.is_empty());
        assert_eq!(r.twist_j.coefficients, r.twist_i.coefficients);
    }

    #[test]
    fn difference_diagonal_is_empty() {
        let c = banana();
        let e = Polarization::trivial(&c);
        let l = SheafClass::new(&c, &[1, 0]).unwrap();
        let r = twister_difference(&c, &e, &l, 0, 1, 1, &opts()).unwrap();
        assert!(r.subcurve.is_empty());
        assert_eq!(r.source, ZSource::Empty);
    }
}
