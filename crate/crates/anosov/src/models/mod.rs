//! Geometric models with computable orbit censuses.
//!
//! Three families are built in:
//!
//! * hyperbolic toral suspensions ([`ToralSuspension`]): a hyperbolic
//!   `SL(2, Z)` matrix suspended under a positive roof function, the basic
//!   Anosov Reeb flow with exactly countable periodic orbits;
//! * flat tori ([`FlatTorusModel`]): Morse-Bott reference geometry whose
//!   orbit components are lattice vectors, used for polynomial-growth
//!   baselines;
//! * irrational ellipsoids ([`EllipsoidModel`]): the convex counterpoint
//!   with two simple orbits and integer-graded indices.
//!
//! Model files are small tagged JSON documents; see [`ModelSpec`].

pub mod ellipsoid;
pub mod flat_torus;
pub mod suspension;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::census::CensusTable;
use crate::error::{Error, Result};

pub use ellipsoid::EllipsoidModel;
pub use flat_torus::FlatTorusModel;
pub use suspension::{MapOrbit, ToralSuspension, TorusPoint};

/// One Fourier term of a trigonometric roof function,
/// `cos * cos(2 pi (kx x + ky y)) + sin * sin(2 pi (kx x + ky y))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub kx: i64,
    pub ky: i64,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Roof function over the torus, as written in a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum RoofSpec {
    #[serde(rename = "const")]
    Const { value: f64 },
    #[serde(rename = "trig")]
    Trig {
        base: f64,
        #[serde(default)]
        terms: Vec<TrigTerm>,
    },
}

fn default_roof() -> RoofSpec {
    RoofSpec::Const { value: 1.0 }
}

/// A positive roof function with precomputed range bounds.
///
/// For trigonometric roofs the stored bounds are the rigorous envelope
/// `base -/+ sum of term amplitudes`; exact for a single term, conservative
/// otherwise.  Conservative bounds only widen period searches and squeeze
/// intervals, never narrow them.
#[derive(Debug, Clone, PartialEq)]
pub struct Roof {
    spec: RoofSpec,
    min: f64,
    max: f64,
}

impl Roof {
    pub fn from_spec(spec: RoofSpec) -> Result<Roof> {
        let (min, max) = match &spec {
            RoofSpec::Const { value } => {
                if !(*value > 0.0) || !value.is_finite() {
                    return Err(Error::Validation(format!(
                        "roof must be positive and finite, got {value}"
                    )));
                }
                (*value, *value)
            }
            RoofSpec::Trig { base, terms } => {
                let mut amp = 0.0_f64;
                for t in terms {
                    let a = (t.cos * t.cos + t.sin * t.sin).sqrt();
                    if !a.is_finite() {
                        return Err(Error::Validation("roof term amplitude is not finite".into()));
                    }
                    amp += a;
                }
                if !base.is_finite() || !(base - amp > 0.0) {
                    return Err(Error::Validation(format!(
                        "trigonometric roof can reach {}, roofs must stay positive",
                        base - amp
                    )));
                }
                (base - amp, base + amp)
            }
        };
        Ok(Roof { spec, min, max })
    }

    pub fn constant(value: f64) -> Result<Roof> {
        Roof::from_spec(RoofSpec::Const { value })
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        match &self.spec {
            RoofSpec::Const { value } => *value,
            RoofSpec::Trig { base, terms } => {
                let mut v = *base;
                for t in terms {
                    let phase =
                        2.0 * std::f64::consts::PI * (t.kx as f64 * x[0] + t.ky as f64 * x[1]);
                    v += t.cos * phase.cos() + t.sin * phase.sin();
                }
                v
            }
        }
    }

    /// Lower range bound; return times are never shorter than this.
    pub fn min(&self) -> f64 {
        self.min
    }

    /// Upper range bound.
    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.spec, RoofSpec::Const { .. })
    }

    pub fn spec(&self) -> &RoofSpec {
        &self.spec
    }

    /// The roof scaled by `c`, matching the flow rescaled by `c`.
    pub fn scaled(&self, c: f64) -> Result<Roof> {
        let spec = match &self.spec {
            RoofSpec::Const { value } => RoofSpec::Const { value: value * c },
            RoofSpec::Trig { base, terms } => RoofSpec::Trig {
                base: base * c,
                terms: terms
                    .iter()
                    .map(|t| TrigTerm {
                        kx: t.kx,
                        ky: t.ky,
                        cos: t.cos * c,
                        sin: t.sin * c,
                    })
                    .collect(),
            },
        };
        Roof::from_spec(spec)
    }
}

/// A model file: tagged union over the built-in families.
///
/// `synthetic` marks hand-written censuses (obstruction fixtures and the
/// like) that no generator reproduces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum ModelSpec {
    /// Suspension of a hyperbolic `SL(2, Z)` matrix, row-major entries.
    #[serde(rename = "cat-suspension")]
    CatSuspension {
        matrix: [i64; 4],
        #[serde(default = "default_roof")]
        roof: RoofSpec,
    },
    #[serde(rename = "flat-torus")]
    FlatTorus { n: usize },
    #[serde(rename = "ellipsoid")]
    Ellipsoid { a: f64, b: f64 },
    #[serde(rename = "synthetic")]
    Synthetic {
        #[serde(default)]
        label: String,
    },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model spec serializes")
    }
}

/// A built model, ready to enumerate orbits.
#[derive(Debug, Clone)]
pub enum Model {
    Suspension(ToralSuspension),
    FlatTorus(FlatTorusModel),
    Ellipsoid(EllipsoidModel),
}

/// Validate a spec and build the model behind it.
///
/// Synthetic specs name data with no generator and cannot be built.
pub fn build(spec: &ModelSpec) -> Result<Model> {
    match spec {
        ModelSpec::CatSuspension { matrix, roof } => {
            let a = [[matrix[0], matrix[1]], [matrix[2], matrix[3]]];
            Ok(Model::Suspension(ToralSuspension::new(
                a,
                Roof::from_spec(roof.clone())?,
            )?))
        }
        ModelSpec::FlatTorus { n } => Ok(Model::FlatTorus(FlatTorusModel::new(*n)?)),
        ModelSpec::Ellipsoid { a, b } => Ok(Model::Ellipsoid(EllipsoidModel::new(*a, *b)?)),
        ModelSpec::Synthetic { label } => Err(Error::Validation(format!(
            "synthetic model '{label}' has no generator; load its census directly"
        ))),
    }
}

impl Model {
    /// Enumerate the census up to period `t`.
    ///
    /// Flat tori have positive-dimensional orbit components rather than
    /// isolated orbits, so they have no nondegenerate census; use
    /// [`Model::pair_count`] or the perturbed counts instead.
    pub fn census(&self, t: f64) -> Result<CensusTable> {
        match self {
            Model::Suspension(s) => s.census(t),
            Model::Ellipsoid(e) => e.census(t),
            Model::FlatTorus(_) => Err(Error::Validation(
                "flat tori carry orbit components, not isolated orbits; \
                 census enumeration needs a nondegenerate model"
                    .into(),
            )),
        }
    }

    /// `P_T`: pairs (orbit, iterate) with period at most `t`, counted
    /// without materializing records.  For flat tori this counts lattice
    /// components instead.
    pub fn pair_count(&self, t: f64) -> Result<BigUint> {
        match self {
            Model::Suspension(s) => Ok(s.pair_counts(t)?.0),
            Model::Ellipsoid(e) => e.pair_count(t),
            Model::FlatTorus(ft) => ft.component_count(t),
        }
    }

    /// Good-pair count `P^g_T`; equals the component count for flat tori.
    pub fn good_pair_count(&self, t: f64) -> Result<BigUint> {
        match self {
            Model::Suspension(s) => Ok(s.pair_counts(t)?.1),
            Model::Ellipsoid(e) => e.pair_count(t),
            Model::FlatTorus(ft) => ft.component_count(t),
        }
    }

    /// The spec of this model with all lengths scaled by `c`, for the
    /// scaling identity `P^{c R}_{c T} = P^R_T`.
    pub fn scaled_spec(&self, c: f64) -> Result<ModelSpec> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::BadArgument(format!(
                "scale factor must be positive and finite, got {c}"
            )));
        }
        match self {
            Model::Suspension(s) => {
                let m = s.matrix();
                Ok(ModelSpec::CatSuspension {
                    matrix: [m[0][0], m[0][1], m[1][0], m[1][1]],
                    roof: s.roof().scaled(c)?.spec().clone(),
                })
            }
            Model::Ellipsoid(e) => Ok(ModelSpec::Ellipsoid {
                a: e.a() * c,
                b: e.b() * c,
            }),
            Model::FlatTorus(_) => Err(Error::Validation(
                "flat-torus specs fix the unit lattice and have no length to scale".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_json_round_trips() {
        let text = r#"{"type":"cat-suspension","matrix":[2,1,1,1],"roof":{"kind":"const","value":1.0}}"#;
        let spec = ModelSpec::from_json(text).unwrap();
        assert_eq!(spec, ModelSpec::from_json(&spec.to_json()).unwrap());
        build(&spec).unwrap();
    }

    #[test]
    fn roof_defaults_to_unit_constant() {
        let spec = ModelSpec::from_json(r#"{"type":"cat-suspension","matrix":[2,1,1,1]}"#).unwrap();
        match &spec {
            ModelSpec::CatSuspension { roof, .. } => {
                assert_eq!(roof, &RoofSpec::Const { value: 1.0 });
            }
            other => panic!("wrong variant {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_name_the_offender() {
        let err = ModelSpec::from_json(r#"{"type":"flat-torus","n":3,"extra":1}"#).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn nonpositive_roof_is_rejected() {
        assert!(Roof::constant(0.0).is_err());
        assert!(Roof::constant(-1.0).is_err());
        let trig = RoofSpec::Trig {
            base: 1.0,
            terms: vec![TrigTerm {
                kx: 1,
                ky: 0,
                cos: 1.5,
                sin: 0.0,
            }],
        };
        assert!(Roof::from_spec(trig).is_err());
    }

    #[test]
    fn trig_roof_bounds_are_exact_for_one_term() {
        let roof = Roof::from_spec(RoofSpec::Trig {
            base: 1.0,
            terms: vec![TrigTerm {
                kx: 1,
                ky: 0,
                cos: 0.3,
                sin: 0.0,
            }],
        })
        .unwrap();
        assert!((roof.min() - 0.7).abs() < 1e-15);
        assert!((roof.max() - 1.3).abs() < 1e-15);
        assert!((roof.value([0.0, 0.0]) - 1.3).abs() < 1e-15);
        assert!((roof.value([0.5, 0.0]) - 0.7).abs() < 1e-15);
        // ky is ignored by this term, so the roof is constant in y.
        assert!((roof.value([0.25, 0.8]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roof_scaling_scales_values_and_bounds() {
        let roof = Roof::from_spec(RoofSpec::Trig {
            base: 1.0,
            terms: vec![TrigTerm {
                kx: 2,
                ky: 1,
                cos: 0.2,
                sin: 0.1,
            }],
        })
        .unwrap();
        let scaled = roof.scaled(2.5).unwrap();
        for x in [[0.0, 0.0], [0.3, 0.7], [0.9, 0.2]] {
            assert!((scaled.value(x) - 2.5 * roof.value(x)).abs() < 1e-12);
        }
        assert!((scaled.min() - 2.5 * roof.min()).abs() < 1e-12);
    }

    #[test]
    fn synthetic_models_cannot_be_built() {
        let spec = ModelSpec::Synthetic {
            label: "fixture".into(),
        };
        assert!(build(&spec).is_err());
    }
}
