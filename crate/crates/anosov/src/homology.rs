//! Rank pages built from censuses, and the obstruction analyzers that
//! consume them.
//!
//! The degenerate page of a census lists, per free-homotopy class and
//! degree, the number of good orbit records.  When all orbits in a class
//! share index parity, no differential can connect adjacent degrees and
//! the page already equals the limit: rank bookkeeping reduces to orbit
//! counting.  The analyzers exploit this: a page whose classes are
//! coherently even can never reproduce the odd-degree rank pattern of a
//! ball boundary, and a pair of simple hyperbolic orbits with distinct
//! prime indices floods one degree with two generators where the ball
//! pattern has one.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::census::{CensusTable, Grading, OrbitRecord, OrbitType};
use crate::error::{Error, Result};
use crate::symplectic::Parity;

/// Finding codes shared by the analyzers.
pub mod codes {
    pub const MATCH: &str = "MATCH";
    pub const MISMATCH: &str = "MISMATCH";
    pub const PARITY_CONTRADICTION: &str = "PARITY_CONTRADICTION";
    pub const MULTIPLICITY_CONFLICT: &str = "MULTIPLICITY_CONFLICT";
    pub const OBSTRUCTION_CONFIRMED: &str = "OBSTRUCTION_CONFIRMED";
    pub const INSUFFICIENT_DATA: &str = "INSUFFICIENT_DATA";
}

/// One tagged observation in an analyzer report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub code: String,
    pub detail: String,
}

impl Finding {
    fn new(code: &str, detail: impl Into<String>) -> Self {
        Finding {
            code: code.to_string(),
            detail: detail.into(),
        }
    }
}

/// Per-class, per-degree good-orbit ranks of a truncated census.
///
/// Integer-graded censuses index by the full degree; parity-graded ones
/// use the 0/1 lift (even to 0, odd to 1) and set the flag.  Only good
/// records contribute, so the total rank is the good-pair count.
#[derive(Debug, Clone, PartialEq)]
pub struct E2Page {
    truncation: f64,
    parity_lifted: bool,
    ranks: BTreeMap<(i64, i64), u64>,
    /// Per class: whether every good record carries holonomy sign +1;
    /// `None` when some record has no bundle data.
    orientable: BTreeMap<i64, Option<bool>>,
}

impl E2Page {
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// True when degrees are the 0/1 parity lift rather than full indices.
    pub fn is_parity_lifted(&self) -> bool {
        self.parity_lifted
    }

    pub fn rank(&self, class_label: i64, degree: i64) -> u64 {
        self.ranks.get(&(class_label, degree)).copied().unwrap_or(0)
    }

    pub fn ranks(&self) -> &BTreeMap<(i64, i64), u64> {
        &self.ranks
    }

    pub fn classes(&self) -> BTreeSet<i64> {
        self.ranks.keys().map(|&(label, _)| label).collect()
    }

    pub fn total_rank(&self) -> u64 {
        self.ranks.values().sum()
    }

    /// All-good-records-orientable verdict for one class, when bundle data
    /// is present on every record of the class.
    pub fn class_orientable(&self, class_label: i64) -> Option<bool> {
        self.orientable.get(&class_label).copied().flatten()
    }

    /// Rows `class_label,degree,rank`, sorted, with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class_label,degree,rank\n");
        for (&(label, degree), &rank) in &self.ranks {
            out.push_str(&format!("{label},{degree},{rank}\n"));
        }
        out
    }
}

/// Fold a census into its rank page.
///
/// Good records only; integer gradings need an index on every good record.
pub fn build_e2_page(table: &CensusTable) -> Result<E2Page> {
    let lift = table.grading() == Grading::Parity;
    let mut ranks: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    let mut orientable: BTreeMap<i64, Option<bool>> = BTreeMap::new();
    let mut missing: Vec<String> = Vec::new();
    let mut total = 0u64;
    for r in table.records().iter().filter(|r| r.good) {
        let degree = if lift {
            match r.cz_parity {
                Parity::Even => 0,
                Parity::Odd => 1,
            }
        } else {
            match r.cz_index {
                Some(ix) => ix,
                None => {
                    missing.push(format!("{}^{}", r.simple_id, r.iterate));
                    continue;
                }
            }
        };
        *ranks.entry((r.class_label, degree)).or_insert(0) += 1;
        total += 1;
        let entry = orientable.entry(r.class_label).or_insert(Some(true));
        *entry = match (entry.as_ref(), r.holonomy_sign) {
            (None, _) | (_, None) => None,
            (Some(acc), Some(sign)) => Some(*acc && sign > 0),
        };
    }
    if !missing.is_empty() {
        missing.truncate(5);
        return Err(Error::Validation(format!(
            "integer-graded page needs an index on every good record; missing on {}",
            missing.join(", ")
        )));
    }
    // The rank total must reproduce the good-pair count; recount from the
    // other end so an order-dependent fold would be caught.
    let reversed = table.records().iter().rev().filter(|r| r.good).count() as u64;
    debug_assert_eq!(total, reversed);
    debug_assert_eq!(total, table.counts().1);
    Ok(E2Page {
        truncation: table.truncation(),
        parity_lifted: lift,
        ranks,
        orientable,
    })
}

/// Coherence verdict for one class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassVerdict {
    pub class_label: i64,
    /// All populated degrees of the class share parity.
    pub coherent: bool,
    /// The common parity, when coherent.
    pub parity: Option<Parity>,
}

/// Ranks of the degenerate homology, valid once every class is coherent.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub ranks: BTreeMap<(i64, i64), u64>,
    pub class_parities: BTreeMap<i64, Parity>,
}

/// Outcome of the degeneration check on a page.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerationVerdict {
    pub classes: Vec<ClassVerdict>,
    /// Whether the contractible class is coherently even, tested only when
    /// class 0 is present, coherent, and marked fully orientable; `None`
    /// when the test does not apply.
    pub contractible_even: Option<bool>,
    /// Present exactly when every class is coherent.
    pub rank_table: Option<RankTable>,
}

impl DegenerationVerdict {
    /// Every class coherent and no contractible-parity violation.
    pub fn passed(&self) -> bool {
        self.classes.iter().all(|c| c.coherent) && self.contractible_even != Some(false)
    }
}

/// Check that each class of the page is parity-coherent, in which case the
/// vanishing-differential argument applies and the page ranks are final.
pub fn degeneration_check(page: &E2Page) -> DegenerationVerdict {
    let mut degrees_by_class: BTreeMap<i64, BTreeSet<i64>> = BTreeMap::new();
    for &(label, degree) in page.ranks().keys() {
        degrees_by_class.entry(label).or_default().insert(degree);
    }
    let mut classes = Vec::with_capacity(degrees_by_class.len());
    let mut all_coherent = true;
    for (&label, degrees) in &degrees_by_class {
        let parities: BTreeSet<bool> = degrees.iter().map(|d| d.rem_euclid(2) == 0).collect();
        let coherent = parities.len() <= 1;
        all_coherent &= coherent;
        classes.push(ClassVerdict {
            class_label: label,
            coherent,
            parity: if coherent {
                parities.first().map(|&even| if even { Parity::Even } else { Parity::Odd })
            } else {
                None
            },
        });
    }
    let contractible_even = classes
        .iter()
        .find(|c| c.class_label == 0)
        .and_then(|c| match (c.coherent, page.class_orientable(0)) {
            (true, Some(true)) => Some(c.parity == Some(Parity::Even)),
            _ => None,
        });
    let rank_table = all_coherent.then(|| RankTable {
        ranks: page.ranks().clone(),
        class_parities: classes
            .iter()
            .filter_map(|c| c.parity.map(|p| (c.class_label, p)))
            .collect(),
    });
    DegenerationVerdict {
        classes,
        contractible_even,
        rank_table,
    }
}

/// A degree where the page disagrees with the ball rank pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankMismatch {
    pub degree: i64,
    pub rank: u64,
    pub expected: u64,
}

/// A pair of simple hyperbolic orbits whose prime indices overfill one
/// degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiplicityConflict {
    pub degree: i64,
    pub prime_a: i64,
    pub id_a: String,
    pub prime_b: i64,
    pub id_b: String,
}

/// Report of the ball-pattern analyzer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereReport {
    pub analyzer: String,
    pub truncation: f64,
    pub max_degree: i64,
    /// Ranks equal the ball pattern: 1 in each odd degree from 3 to
    /// `max_degree`, 0 elsewhere up to `max_degree`.
    pub matched: bool,
    pub mismatches: Vec<RankMismatch>,
    /// The page is coherently even, so no truncation can ever match the
    /// odd-degree target.
    pub parity_contradiction: bool,
    pub multiplicity_conflicts: Vec<MultiplicityConflict>,
    /// A structural contradiction rather than a mere mismatch: either the
    /// parity contradiction or at least one multiplicity conflict.
    pub obstruction_found: bool,
    pub findings: Vec<Finding>,
}

impl SphereReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2i64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Compare a single-class census against the rank pattern of a ball
/// boundary and look for the two structural contradictions that rule the
/// pattern out entirely.
///
/// The three findings: the degree-by-degree match up to `max_degree`; the
/// parity contradiction (a coherently even page cannot meet an odd-degree
/// target at any truncation); and the multiplicity conflict (two simple
/// hyperbolic orbits with distinct prime indices at least 3 fill the
/// product degree twice under iteration, where the target has rank 1).
pub fn sphere_obstruction_analyzer(table: &CensusTable, max_degree: i64) -> Result<SphereReport> {
    if max_degree < 3 {
        return Err(Error::BadArgument(format!(
            "ball pattern starts at degree 3; max degree {max_degree} checks nothing"
        )));
    }
    let page = build_e2_page(table)?;
    let stray: BTreeSet<i64> = page
        .classes()
        .into_iter()
        .filter(|&label| label != 0)
        .collect();
    if !stray.is_empty() {
        return Err(Error::Validation(format!(
            "ball comparison needs a simply connected census; found class \
             labels {stray:?}"
        )));
    }

    let mut check_degrees: BTreeSet<i64> = page
        .ranks()
        .keys()
        .map(|&(_, degree)| degree)
        .filter(|&d| d <= max_degree)
        .collect();
    check_degrees.extend((3..=max_degree).filter(|d| d % 2 == 1));
    let mut mismatches = Vec::new();
    for d in check_degrees {
        let expected = u64::from(d >= 3 && d % 2 == 1);
        let rank = page.rank(0, d);
        if rank != expected {
            mismatches.push(RankMismatch {
                degree: d,
                rank,
                expected,
            });
        }
    }
    let matched = mismatches.is_empty();

    let populated: Vec<i64> = page.ranks().keys().map(|&(_, d)| d).collect();
    let parity_contradiction =
        !populated.is_empty() && populated.iter().all(|d| d.rem_euclid(2) == 0);

    let mut primes: BTreeMap<i64, String> = BTreeMap::new();
    for r in table.records() {
        if r.iterate != 1 || r.orbit_type != OrbitType::Hyperbolic || !r.good {
            continue;
        }
        let Some(ix) = r.cz_index else { continue };
        if ix >= 3 && is_prime(ix) {
            primes.entry(ix).or_insert_with(|| r.simple_id.clone());
        }
    }
    let mut multiplicity_conflicts = Vec::new();
    let keys: Vec<i64> = primes.keys().copied().collect();
    for (i, &p) in keys.iter().enumerate() {
        for &q in &keys[i + 1..] {
            let Some(product) = p.checked_mul(q) else { continue };
            if product <= max_degree {
                multiplicity_conflicts.push(MultiplicityConflict {
                    degree: product,
                    prime_a: p,
                    id_a: primes[&p].clone(),
                    prime_b: q,
                    id_b: primes[&q].clone(),
                });
            }
        }
    }

    let mut findings = Vec::new();
    if matched {
        findings.push(Finding::new(
            codes::MATCH,
            format!("ranks match the ball pattern through degree {max_degree}"),
        ));
    } else {
        let shown: Vec<String> = mismatches
            .iter()
            .take(5)
            .map(|m| format!("degree {}: rank {}, expected {}", m.degree, m.rank, m.expected))
            .collect();
        findings.push(Finding::new(
            codes::MISMATCH,
            format!(
                "{} degrees disagree with the ball pattern: {}{}",
                mismatches.len(),
                shown.join("; "),
                if mismatches.len() > 5 { "; ..." } else { "" }
            ),
        ));
    }
    if parity_contradiction {
        findings.push(Finding::new(
            codes::PARITY_CONTRADICTION,
            "every populated degree is even; the odd-degree ball pattern is \
             unreachable at any truncation",
        ));
    }
    for c in &multiplicity_conflicts {
        findings.push(Finding::new(
            codes::MULTIPLICITY_CONFLICT,
            format!(
                "iterates of {} (index {}) and {} (index {}) both land in \
                 degree {}, where the ball pattern has rank 1",
                c.id_a, c.prime_a, c.id_b, c.prime_b, c.degree
            ),
        ));
    }

    Ok(SphereReport {
        analyzer: "sphere".into(),
        truncation: table.truncation(),
        max_degree,
        matched,
        mismatches,
        parity_contradiction,
        obstruction_found: parity_contradiction || !multiplicity_conflicts.is_empty(),
        multiplicity_conflicts,
        findings,
    })
}

/// One orbit chosen by the bounded-rank analyzer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedOrbit {
    pub simple_id: String,
    pub period: f64,
    pub index: i64,
}

/// Report of the bounded-rank analyzer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedReport {
    pub analyzer: String,
    pub bound: u64,
    /// Orbits needed: `bound + 1`.
    pub needed: u64,
    /// Simple hyperbolic orbits available in the census.
    pub available: u64,
    pub selected: Vec<SelectedOrbit>,
    /// lcm of the selected indices, as a decimal string; absent when the
    /// census has too few orbits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lcm_degree: Option<String>,
    /// Good generators the iteration places in the lcm degree.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator_count: Option<u64>,
    /// The construction went through: the lcm degree holds more good
    /// generators than the rank bound allows.
    pub obstruction_found: bool,
    pub findings: Vec<Finding>,
}

impl BoundedReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Decide whether a census is incompatible with homology ranks bounded by
/// `bound`.
///
/// Picks the `bound + 1` simple hyperbolic orbits of smallest period,
/// forms the lcm `k` of their indices, and counts the good generators that
/// iteration places in degree `k`: each selected orbit lands there once,
/// so the rank in degree `k` exceeds the bound.  The construction needs
/// positive even indices; anything else on a selected orbit is a
/// validation error.
pub fn bounded_homology_analyzer(table: &CensusTable, bound: u64) -> Result<BoundedReport> {
    if table.grading() != Grading::Integer {
        return Err(Error::Validation(
            "the bounded-rank construction takes lcms of integer indices; \
             parity-graded censuses carry too little information"
                .into(),
        ));
    }
    let needed = bound + 1;
    let simple: Vec<&OrbitRecord> = table
        .records()
        .iter()
        .filter(|r| r.iterate == 1 && r.orbit_type == OrbitType::Hyperbolic)
        .collect();
    let available = simple.len() as u64;
    if available < needed {
        return Ok(BoundedReport {
            analyzer: "bounded".into(),
            bound,
            needed,
            available,
            selected: Vec::new(),
            lcm_degree: None,
            generator_count: None,
            obstruction_found: false,
            findings: vec![Finding::new(
                codes::INSUFFICIENT_DATA,
                format!(
                    "census has {available} simple hyperbolic orbits; the \
                     construction needs {needed}"
                ),
            )],
        });
    }
    // Records are period-sorted already, so the first `needed` are the
    // smallest-period choices.
    let chosen = &simple[..needed as usize];
    let mut selected = Vec::with_capacity(chosen.len());
    let mut k = BigUint::from(1u8);
    for r in chosen {
        let Some(ix) = r.cz_index else {
            return Err(Error::Validation(format!(
                "selected orbit {} has no index",
                r.simple_id
            )));
        };
        if ix <= 0 || ix % 2 != 0 {
            return Err(Error::Validation(format!(
                "selected orbit {} has index {}; the construction needs \
                 positive even indices",
                r.simple_id, ix
            )));
        }
        k = k.lcm(&BigUint::from(ix as u64));
        selected.push(SelectedOrbit {
            simple_id: r.simple_id.clone(),
            period: r.period,
            index: ix,
        });
    }
    let mut generator_count = 0u64;
    for r in &simple {
        let Some(ix) = r.cz_index else { continue };
        if ix > 0 && ix % 2 == 0 && (&k % BigUint::from(ix as u64)).is_zero() {
            // Even index: every iterate keeps the parity, so the degree-k
            // iterate is good.
            generator_count += 1;
        }
    }
    let confirmed = generator_count >= needed;
    let findings = if confirmed {
        vec![Finding::new(
            codes::OBSTRUCTION_CONFIRMED,
            format!(
                "degree {k} holds at least {generator_count} good generators, \
                 exceeding the rank bound {bound}"
            ),
        )]
    } else {
        Vec::new()
    };
    Ok(BoundedReport {
        analyzer: "bounded".into(),
        bound,
        needed,
        available,
        selected,
        lcm_degree: Some(k.to_string()),
        generator_count: Some(generator_count),
        obstruction_found: confirmed,
        findings,
    })
}
