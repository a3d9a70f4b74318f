//! Multidegree sheaf classes, polarizations, the beta function, and
//! exhaustive (quasi)stability classification.
//!
//! For a class of multidegree `d`, a polarization `E = (r, e)` and a
//! subcurve `Y`:
//!
//! ```text
//! chi(d_Y) = deg_Y(d) + chi(O_Y)
//! beta(Y)  = chi(d_Y) + deg_Y(e) / r
//! ```
//!
//! The class is semistable when `beta >= 0` on every proper subcurve,
//! P-quasistable when additionally `beta > 0` on every proper subcurve
//! containing the marked component, and stable when `beta > 0` everywhere.
//! Betas are exact rationals; every inequality is sharp at zero.

use num_traits::{Signed, Zero};

use crate::curve::{NodalCurve, Subcurve};
use crate::{EngineOptions, Error, Rational, Result};

/// A multidegree: one integer per component of the owning curve. Stands for
/// the class of a line bundle (or the invertible locus of a rank-1 sheaf).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SheafClass {
    degrees: Vec<i64>,
}

impl SheafClass {
    pub fn new(curve: &NodalCurve, degrees: &[i64]) -> Result<Self> {
        if degrees.len() != curve.component_count() {
            return Err(Error::WrongLength {
                expected: curve.component_count(),
                actual: degrees.len(),
            });
        }
        Ok(SheafClass {
            degrees: degrees.to_vec(),
        })
    }

    pub fn zero(curve: &NodalCurve) -> Self {
        SheafClass {
            degrees: vec![0; curve.component_count()],
        }
    }

    pub(crate) fn from_vec(degrees: Vec<i64>) -> Self {
        SheafClass { degrees }
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn entry(&self, k: usize) -> i64 {
        self.degrees[k]
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.degrees.iter().sum()
    }

    pub fn degree_on(&self, y: Subcurve<'_>) -> i64 {
        debug_assert_eq!(self.degrees.len(), y.curve().component_count());
        y.members().iter().map(|&k| self.degrees[k]).sum()
    }

    pub fn plus(&self, other: &SheafClass) -> SheafClass {
        debug_assert_eq!(self.len(), other.len());
        SheafClass {
            degrees: self
                .degrees
                .iter()
                .zip(&other.degrees)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn minus(&self, other: &SheafClass) -> SheafClass {
        debug_assert_eq!(self.len(), other.len());
        SheafClass {
            degrees: self
                .degrees
                .iter()
                .zip(&other.degrees)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// The class of `m_Q (x) self` for Q a smooth point on component `k`.
    pub fn minus_point(&self, k: usize) -> SheafClass {
        let mut degrees = self.degrees.clone();
        degrees[k] -= 1;
        SheafClass { degrees }
    }
}

/// A polarization: a rank and a multidegree with integer slope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polarization {
    rank: i64,
    degrees: Vec<i64>,
}

impl Polarization {
    pub fn new(curve: &NodalCurve, rank: i64, degrees: &[i64]) -> Result<Self> {
        if degrees.len() != curve.component_count() {
            return Err(Error::WrongLength {
                expected: curve.component_count(),
                actual: degrees.len(),
            });
        }
        let total: i64 = degrees.iter().sum();
        if rank < 1 || total % rank != 0 {
            return Err(Error::InvalidPolarization { rank, total });
        }
        Ok(Polarization {
            rank,
            degrees: degrees.to_vec(),
        })
    }

    pub fn trivial(curve: &NodalCurve) -> Self {
        Polarization {
            rank: 1,
            degrees: vec![0; curve.component_count()],
        }
    }

    pub fn rank(&self) -> i64 {
        self.rank
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn total(&self) -> i64 {
        self.degrees.iter().sum()
    }

    pub fn slope(&self) -> i64 {
        self.total() / self.rank
    }

    pub fn degree_on(&self, y: Subcurve<'_>) -> i64 {
        y.members().iter().map(|&k| self.degrees[k]).sum()
    }

    /// Pullback to a modification: the same rank, base degrees on strict
    /// transforms, degree zero on every exceptional component.
    pub fn pullback(&self, modified: &crate::curve::ModifiedCurve) -> Polarization {
        Polarization {
            rank: self.rank,
            degrees: modified.pullback_degrees(&self.degrees),
        }
    }
}

/// `chi` of the class restricted to a subcurve.
pub fn euler_char(d: &SheafClass, y: Subcurve<'_>) -> i64 {
    d.degree_on(y) + y.chi_structure()
}

/// The beta function on a proper nonempty subcurve.
pub fn beta(e: &Polarization, d: &SheafClass, y: Subcurve<'_>) -> Result<Rational> {
    if !y.is_proper() {
        return Err(Error::ImproperSubcurve);
    }
    Ok(beta_unchecked(e, d, y))
}

/// Beta without the properness guard (the full curve has beta zero exactly
/// when the total degree matches).
pub fn beta_unchecked(e: &Polarization, d: &SheafClass, y: Subcurve<'_>) -> Rational {
    Rational::from_integer(euler_char(d, y)) + Rational::new(e.degree_on(y), e.rank())
}

/// Classification verdicts, ordered: each verdict implies the ones below it
/// on the positive side (stable => quasistable => semistable).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    DegreeMismatch,
    NotSemistable,
    SemistableOnly,
    Quasistable,
    Stable,
}

impl Verdict {
    pub fn is_semistable(self) -> bool {
        self >= Verdict::SemistableOnly
    }

    pub fn is_quasistable(self) -> bool {
        self >= Verdict::Quasistable
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::DegreeMismatch => "degree-mismatch",
            Verdict::NotSemistable => "not-semistable",
            Verdict::SemistableOnly => "semistable-only",
            Verdict::Quasistable => "P-quasistable",
            Verdict::Stable => "stable",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A violating subcurve and its beta value, reproducible by re-evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub members: Vec<usize>,
    pub beta: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub verdict: Verdict,
    /// First violating proper subcurve in canonical order, for negative
    /// verdicts.
    pub witness: Option<Witness>,
    pub expected_total: i64,
    pub actual_total: i64,
    /// Beta for every proper subcurve in canonical order, when the subcurve
    /// count does not exceed the configured cap.
    pub beta_table: Option<Vec<(Vec<usize>, Rational)>>,
}

/// Exhaustive classification of a class against a polarization and marked
/// component. Brute force over all proper nonempty subcurves (connected ones
/// only when the option is set).
pub fn classify(
    curve: &NodalCurve,
    e: &Polarization,
    d: &SheafClass,
    marked: usize,
    opts: &EngineOptions,
) -> StabilityReport {
    let expected_total = curve.genus() - 1 - e.slope();
    let actual_total = d.total();
    if actual_total != expected_total {
        return StabilityReport {
            verdict: Verdict::DegreeMismatch,
            witness: None,
            expected_total,
            actual_total,
            beta_table: None,
        };
    }

    let subcurves = curve.proper_subcurves();
    let mut first_negative: Option<Witness> = None;
    let mut first_zero_marked: Option<Witness> = None;
    let mut has_zero = false;
    let mut table: Vec<(Vec<usize>, Rational)> = Vec::new();
    let want_table = opts.beta_table_cap > 0 && subcurves.len() <= opts.beta_table_cap;

    for y in &subcurves {
        if opts.connected_only && !y.is_connected() {
            continue;
        }
        let b = beta_unchecked(e, d, *y);
        if want_table {
            table.push((y.members(), b));
        }
        if b.is_negative() && first_negative.is_none() {
            first_negative = Some(Witness {
                members: y.members(),
                beta: b,
            });
        }
        if b.is_zero() {
            has_zero = true;
            if y.contains(marked) && first_zero_marked.is_none() {
                first_zero_marked = Some(Witness {
                    members: y.members(),
                    beta: b,
                });
            }
        }
    }

    let (verdict, witness) = if let Some(w) = first_negative {
        (Verdict::NotSemistable, Some(w))
    } else if let Some(w) = first_zero_marked {
        (Verdict::SemistableOnly, Some(w))
    } else if has_zero {
        (Verdict::Quasistable, None)
    } else {
        (Verdict::Stable, None)
    };

    StabilityReport {
        verdict,
        witness,
        expected_total,
        actual_total,
        beta_table: want_table.then_some(table),
    }
}

/// All semistable and all P-quasistable multidegrees of the forced total
/// degree, by exhaustive search over the beta-feasible box. The box is cut
/// out by `beta >= 0` on each single component and on its complement, which
/// every semistable class must satisfy, so the enumeration is complete.
pub fn enumerate_semistable(
    curve: &NodalCurve,
    e: &Polarization,
    marked: usize,
    opts: &EngineOptions,
) -> Result<(Vec<SheafClass>, Vec<SheafClass>)> {
    let p = curve.component_count();
    let total = curve.genus() - 1 - e.slope();
    if p == 1 {
        let class = SheafClass::from_vec(vec![total]);
        return Ok((vec![class.clone()], vec![class]));
    }

    let mut lo = Vec::with_capacity(p);
    let mut hi = Vec::with_capacity(p);
    for k in 0..p {
        let single = curve.subcurve(&[k])?;
        let complement = single.complement().expect("p > 1");
        let lower = -Rational::from_integer(single.chi_structure())
            - Rational::new(e.degree_on(single), e.rank());
        let upper = Rational::from_integer(total + complement.chi_structure())
            + Rational::new(e.degree_on(complement), e.rank());
        lo.push(lower.ceil().to_integer());
        hi.push(upper.floor().to_integer());
    }

    let mut volume: u128 = 1;
    for k in 0..p {
        if hi[k] < lo[k] {
            return Ok((Vec::new(), Vec::new()));
        }
        volume = volume.saturating_mul((hi[k] - lo[k] + 1) as u128);
    }
    if volume > opts.search_cap as u128 {
        return Err(Error::SearchTooLarge(volume));
    }

    let mut semistable = Vec::new();
    let mut quasistable = Vec::new();
    let mut point = lo.clone();
    loop {
        if point.iter().sum::<i64>() == total {
            let class = SheafClass::from_vec(point.clone());
            let report = classify(curve, e, &class, marked, &EngineOptions::default());
            if report.verdict.is_semistable() {
                semistable.push(class.clone());
            }
            if report.verdict.is_quasistable() {
                quasistable.push(class);
            }
        }
        // advance lexicographically
        let mut k = p;
        loop {
            if k == 0 {
                return Ok((semistable, quasistable));
            }
            k -= 1;
            if point[k] < hi[k] {
                point[k] += 1;
                point[k + 1..p].copy_from_slice(&lo[k + 1..p]);
                break;
            }
        }
    }
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
    fn euler_char_values() {
        let c = banana();
        let d = SheafClass::new(&c, &[0, 0]).unwrap();
        assert_eq!(euler_char(&d, c.subcurve(&[0]).unwrap()), 1);

        let d = SheafClass::new(&c, &[1, 0]).unwrap();
        // deg + chi(O_C) = deg + 1 - g = 1 + 1 - 1
        assert_eq!(euler_char(&d, c.full_subcurve()), 1);

        let single = NodalCurve::builder().component("v", 2).build().unwrap();
        let d = SheafClass::new(&single, &[3]).unwrap();
        assert_eq!(euler_char(&d, single.full_subcurve()), 2);
    }

    #[test]
    fn beta_values() {
        let c = banana();
        let e = Polarization::trivial(&c);
        let d = SheafClass::new(&c, &[-1, 1]).unwrap();
        let y = c.subcurve(&[0]).unwrap();
        assert_eq!(beta(&e, &d, y).unwrap(), Rational::from_integer(0));

        let e = Polarization::new(&c, 2, &[1, 1]).unwrap();
        assert_eq!(e.slope(), 1);
        let d = SheafClass::new(&c, &[-1, 0]).unwrap();
        assert_eq!(beta(&e, &d, y).unwrap(), Rational::new(1, 2));

        let e = Polarization::trivial(&c);
        let d = SheafClass::new(&c, &[1, -1]).unwrap();
        let z = c.subcurve(&[1]).unwrap();
        assert_eq!(beta(&e, &d, z).unwrap(), Rational::from_integer(0));

        assert_eq!(
            beta(&e, &d, c.full_subcurve()).unwrap_err(),
            Error::ImproperSubcurve
        );
    }

    #[test]
    fn classify_banana_cases() {
        let c = banana();
        let e = Polarization::trivial(&c);

        let stable = classify(&c, &e, &SheafClass::new(&c, &[0, 0]).unwrap(), 0, &opts());
        assert_eq!(stable.verdict, Verdict::Stable);

        let semi = classify(&c, &e, &SheafClass::new(&c, &[-1, 1]).unwrap(), 0, &opts());
        assert_eq!(semi.verdict, Verdict::SemistableOnly);
        let w = semi.witness.unwrap();
        assert_eq!(w.members, vec![0]);
        assert_eq!(w.beta, Rational::from_integer(0));

        let quasi = classify(&c, &e, &SheafClass::new(&c, &[1, -1]).unwrap(), 0, &opts());
        assert_eq!(quasi.verdict, Verdict::Quasistable);

        let not = classify(&c, &e, &SheafClass::new(&c, &[2, -2]).unwrap(), 0, &opts());
        assert_eq!(not.verdict, Verdict::NotSemistable);
        let w = not.witness.unwrap();
        assert_eq!(w.members, vec![1]);
        assert_eq!(w.beta, Rational::from_integer(-1));

        let mismatch = classify(&c, &e, &SheafClass::new(&c, &[1, 1]).unwrap(), 0, &opts());
        assert_eq!(mismatch.verdict, Verdict::DegreeMismatch);
    }

    #[test]
    fn witness_reproducible() {
        let c = banana();
        let e = Polarization::trivial(&c);
        let d = SheafClass::new(&c, &[2, -2]).unwrap();
        let report = classify(&c, &e, &d, 0, &opts());
        let w = report.witness.unwrap();
        let y = c.subcurve(&w.members).unwrap();
        assert_eq!(beta(&e, &d, y).unwrap(), w.beta);
    }

    #[test]
    fn enumerate_banana_sets() {
        let c = banana();
        let e = Polarization::trivial(&c);
        let (semi, quasi) = enumerate_semistable(&c, &e, 0, &opts()).unwrap();
        let vecs = |set: &[SheafClass]| -> Vec<Vec<i64>> {
            set.iter().map(|s| s.degrees().to_vec()).collect()
        };
        assert_eq!(vecs(&semi), vec![vec![-1, 1], vec![0, 0], vec![1, -1]]);
        assert_eq!(vecs(&quasi), vec![vec![0, 0], vec![1, -1]]);
    }

    #[test]
    fn enumerate_single_component() {
        let single = NodalCurve::builder().component("v", 3).build().unwrap();
        let e = Polarization::new(&single, 1, &[1]).unwrap();
        let (semi, quasi) = enumerate_semistable(&single, &e, 0, &opts()).unwrap();
        assert_eq!(semi.len(), 1);
        assert_eq!(quasi[0].degrees(), &[1]); // g - 1 - mu = 3 - 1 - 1
    }

    #[test]
    fn beta_table_gated() {
        let c = banana();
        let e = Polarization::trivial(&c);
        let d = SheafClass::new(&c, &[0, 0]).unwrap();
        let mut o = opts();
        o.beta_table_cap = 16;
        let report = classify(&c, &e, &d, 0, &o);
        let table = report.beta_table.unwrap();
        assert_eq!(table.len(), 2);
        assert!(table.iter().all(|(_, b)| *b == Rational::from_integer(1)));
    }
}
