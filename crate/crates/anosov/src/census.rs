//! Orbit censuses: one record per pair (simple closed orbit, iterate).
//!
//! A census truncates at a period bound `T` and carries enough grading data
//! to feed the chain-level bookkeeping: free-homotopy class label, index
//! parity (or the full index when the model provides one), good/bad status,
//! and the orientation sign of the unstable bundle when the model has one.
//!
//! Tables serialize to JSON with one record per line so that diffs and
//! byte-for-byte reproducibility checks stay readable.

use std::collections::BTreeMap;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::symplectic::Parity;

/// Linearized return-map type of an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitType {
    Hyperbolic,
    Elliptic,
    Other,
}

/// Whether a census grades by full integer index or only by parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grading {
    Integer,
    Parity,
}

/// One (simple orbit, iterate) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    /// Stable identifier of the underlying simple orbit.
    pub simple_id: String,
    /// Iterate count, 1 for the simple orbit itself.
    pub iterate: u32,
    /// Period of this iterate.
    pub period: f64,
    /// Free-homotopy class label; 0 for simply connected manifolds.
    pub class_label: i64,
    pub cz_parity: Parity,
    /// Full index when the grading is integer-level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cz_index: Option<i64>,
    /// Good means the iterate's parity matches the simple orbit's.
    pub good: bool,
    #[serde(rename = "type")]
    pub orbit_type: OrbitType,
    /// Orientation sign of the invariant bundle along the orbit, when the
    /// model carries one; +1 orientable, -1 not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holonomy_sign: Option<i8>,
}

impl OrbitRecord {
    fn validate(&self) -> Result<()> {
        if self.iterate == 0 {
            return Err(Error::Validation(format!(
                "record {}: iterate must be at least 1",
                self.simple_id
            )));
        }
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::Validation(format!(
                "record {} iterate {}: period must be positive and finite, got {}",
                self.simple_id, self.iterate, self.period
            )));
        }
        if let Some(ix) = self.cz_index {
            if Parity::of(ix) != self.cz_parity {
                return Err(Error::Validation(format!(
                    "record {} iterate {}: index {} disagrees with stored parity {}",
                    self.simple_id, self.iterate, ix, self.cz_parity
                )));
            }
        }
        if let Some(s) = self.holonomy_sign {
            if s != 1 && s != -1 {
                return Err(Error::Validation(format!(
                    "record {} iterate {}: holonomy sign must be +1 or -1, got {s}",
                    self.simple_id, self.iterate
                )));
            }
        }
        Ok(())
    }

    /// Sort key shared by every census producer, so merged shards are
    /// byte-identical regardless of how the work was split.
    fn sort_key(&self) -> (f64, i64, &str, u32) {
        (self.period, self.class_label, &self.simple_id, self.iterate)
    }
}

fn record_order(a: &OrbitRecord, b: &OrbitRecord) -> std::cmp::Ordering {
    let (pa, la, ia, ka) = a.sort_key();
    let (pb, lb, ib, kb) = b.sort_key();
    pa.total_cmp(&pb)
        .then(la.cmp(&lb))
        .then(ia.cmp(ib))
        .then(ka.cmp(&kb))
}

/// A truncated census with its model provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CensusTable {
    model: ModelSpec,
    truncation: f64,
    grading: Grading,
    records: Vec<OrbitRecord>,
}

/// On-disk shape of a census table.
#[derive(Serialize, Deserialize)]
struct CensusFile {
    model: ModelSpec,
    truncation: f64,
    grading: Grading,
    /// Total pair count, kept redundantly as a read-back check.
    p: u64,
    /// Good pair count.
    pg: u64,
    records: Vec<OrbitRecord>,
}

impl CensusTable {
    /// Validate, sort, and wrap a record list.
    pub fn new(
        model: ModelSpec,
        truncation: f64,
        grading: Grading,
        mut records: Vec<OrbitRecord>,
    ) -> Result<Self> {
        if !(truncation >= 0.0) || !truncation.is_finite() {
            return Err(Error::BadArgument(format!(
                "truncation must be a finite nonnegative time, got {truncation}"
            )));
        }
        for r in &records {
            r.validate()?;
            if grading == Grading::Integer && r.cz_index.is_none() {
                return Err(Error::Validation(format!(
                    "record {} iterate {}: integer grading needs a cz index",
                    r.simple_id, r.iterate
                )));
            }
        }
        records.sort_by(record_order);
        Ok(CensusTable {
            model,
            truncation,
            grading,
            records,
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn records(&self) -> &[OrbitRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<OrbitRecord> {
        self.records
    }

    /// `(P_T, P^g_T)`: total and good pair counts.
    pub fn counts(&self) -> (u64, u64) {
        let p = self.records.len() as u64;
        let pg = self.records.iter().filter(|r| r.good).count() as u64;
        (p, pg)
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        out.push_str(&format!(
            "  \"model\": {},\n",
            serde_json::to_string(&self.model).expect("model serializes")
        ));
        out.push_str(&format!("  \"truncation\": {},\n", json_f64(self.truncation)));
        out.push_str(&format!(
            "  \"grading\": {},\n",
            serde_json::to_string(&self.grading).expect("grading serializes")
        ));
        let (p, pg) = self.counts();
        out.push_str(&format!("  \"p\": {p},\n  \"pg\": {pg},\n"));
        out.push_str("  \"records\": [");
        for (i, r) in self.records.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("\n    ");
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
        }
        if self.records.is_empty() {
            out.push_str("]\n}\n");
        } else {
            out.push_str("\n  ]\n}\n");
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CensusFile = serde_json::from_str(text)?;
        let table = CensusTable::new(file.model, file.truncation, file.grading, file.records)?;
        let (p, pg) = table.counts();
        if p != file.p || pg != file.pg {
            return Err(Error::Validation(format!(
                "census counts (p = {p}, pg = {pg}) disagree with stored (p = {}, pg = {})",
                file.p, file.pg
            )));
        }
        Ok(table)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        w.write_all(self.to_json().as_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

/// JSON text for a float: serde's shortest round-trip form, which keeps a
/// trailing `.0` on integral values so the field stays a float on re-read.
fn json_f64(x: f64) -> String {
    serde_json::to_string(&x).expect("finite float serializes")
}

/// Mark every iterate of one simple orbit good or bad in place.
///
/// Bad means an even iterate whose parity differs from the simple orbit's;
/// those pairs are the ones a good filtration must drop, and the bound
/// `P_T <= 2 P^g_T` comes from their count.  The records may arrive in any
/// order but must all belong to one simple orbit and include iterate 1.
pub fn classify_good_bad(family: &mut [OrbitRecord]) -> Result<()> {
    let Some(base) = family.iter().find(|r| r.iterate == 1) else {
        return Err(Error::Validation(
            "good/bad classification needs the simple orbit (iterate 1)".into(),
        ));
    };
    let base_parity = base.cz_parity;
    let base_id = base.simple_id.clone();
    for r in family.iter_mut() {
        if r.simple_id != base_id {
            return Err(Error::Validation(format!(
                "good/bad classification got mixed orbits {} and {}",
                base_id, r.simple_id
            )));
        }
        r.good = !(r.iterate % 2 == 0 && r.cz_parity != base_parity);
    }
    Ok(())
}

/// Apply [`classify_good_bad`] to every simple-orbit family of a record list.
pub fn classify_table(records: &mut Vec<OrbitRecord>) -> Result<()> {
    let mut by_id: BTreeMap<String, Vec<OrbitRecord>> = BTreeMap::new();
    for r in records.drain(..) {
        by_id.entry(r.simple_id.clone()).or_default().push(r);
    }
    let mut out = Vec::new();
    for (_, mut family) in by_id {
        classify_good_bad(&mut family)?;
        out.append(&mut family);
    }
    out.sort_by(record_order);
    *records = out;
    Ok(())
}
