//! Text form of a model (TOML):
//!
//! ```toml
//! dimension = 3
//! fiber_quotient_order = 1
//! covering_multiplicity = 1
//!
//! [[segments]]
//! warp = "sine"
//! params = [1.0, 0.0]
//! domain = [0.0, 1.5707963267948966]
//!
//! [[ends]]
//! kind = "smooth_cap"
//!
//! [[ends]]
//! kind = "boundary"
//! ```
//!
//! `fiber = "half_sphere"` selects the hemisphere fiber (order 2 with a side boundary).

use serde::{Deserialize, Serialize};

use super::{EndCondition, Fiber, ModelManifold, Warp, WarpedSegment};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    dimension: usize,
    fiber_quotient_order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fiber: Option<String>,
    covering_multiplicity: u32,
    segments: Vec<SegmentDoc>,
    ends: Vec<EndDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentDoc {
    warp: String,
    params: Vec<f64>,
    domain: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<f64>,
}

pub fn model_to_text(m: &ModelManifold) -> String {
    let fiber = m.fiber();
    let doc = ModelDoc {
        dimension: m.dimension(),
        fiber_quotient_order: fiber.quotient_order(),
        fiber: (fiber == Fiber::HalfSphere).then(|| fiber.name().to_string()),
        covering_multiplicity: m.covering_multiplicity(),
        segments: m
            .segments()
            .iter()
            .map(|s| SegmentDoc { warp: s.warp.tag().into(), params: s.warp.params(), domain: [s.domain.0, s.domain.1] })
            .collect(),
        ends: m
            .ends()
            .iter()
            .map(|e| EndDoc {
                kind: e.name().into(),
                params: match e {
                    EndCondition::PeriodicJoin { partner } => vec![*partner as f64],
                    _ => vec![],
                },
            })
            .collect(),
    };
    toml::to_string(&doc).expect("model document serializes")
}

pub fn model_from_text(text: &str) -> Result<ModelManifold> {
    let doc: ModelDoc = toml::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))?;
    let fiber = match (doc.fiber.as_deref(), doc.fiber_quotient_order) {
        (None | Some("sphere"), 1) => Fiber::Sphere,
        (None | Some("projective"), 2) => Fiber::Projective,
        (Some("half_sphere"), 2) => Fiber::HalfSphere,
        (f, k) => {
            return Err(Error::InvalidModel(format!(
                "fiber {:?} is incompatible with fiber_quotient_order = {k}",
                f.unwrap_or("sphere")
            )))
        }
    };
    let segments = doc
        .segments
        .iter()
        .map(|s| {
            let warp = Warp::from_params(&s.warp, &s.params)?;
            WarpedSegment::new(doc.dimension, warp, (s.domain[0], s.domain[1]), fiber)
        })
        .collect::<Result<Vec<_>>>()?;
    if doc.ends.len() != 2 {
        return Err(Error::InvalidModel(format!("expected exactly two ends, found {}", doc.ends.len())));
    }
    let mut ends = [EndCondition::Boundary; 2];
    for (slot, e) in ends.iter_mut().zip(&doc.ends) {
        *slot = match (e.kind.as_str(), e.params.as_slice()) {
            ("boundary", []) => EndCondition::Boundary,
            ("smooth_cap", []) => EndCondition::SmoothCap,
            ("reflection_quotient", []) => EndCondition::ReflectionQuotient,
            ("truncated", []) => EndCondition::Truncated,
            ("periodic_join", [p]) if *p == 0.0 || *p == 1.0 => EndCondition::PeriodicJoin { partner: *p as usize },
            (k, p) => return Err(Error::InvalidModel(format!("bad end `{k}` with params {p:?}"))),
        };
    }
    ModelManifold::new(segments, ends, doc.covering_multiplicity)
}
