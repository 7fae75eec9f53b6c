//! The five inference methods an instance port serves, with their
//! parameter decoding and result encoding.

use std::sync::Arc;

use commonsense_core::error::InferenceError;
use commonsense_core::filter::NetworkRepository;
use commonsense_core::inference::{
    decompose_phrases, display_node, expand_query, get_analogy, get_context, Analogy, ContextParams, NodeEntry,
    QueryExpansion, Renderer, ScoredConcept,
};
use commonsense_core::network::ConceptNet;
use commonsense_core::normalization::MorphologyProvider;
use commonsense_core::profile::ProfileQuery;
use commonsense_core::relation::RelationKey;

use crate::xml::{Fault, Response, Value};

pub const METHODS: [&str; 5] = ["get_context", "display_node", "get_analogy", "expand_query", "decompose_phrases"];

/// Collaborators shared by every instance.
#[derive(Clone)]
pub struct Services {
    pub repository: Arc<NetworkRepository>,
    pub morphology: Arc<dyn MorphologyProvider>,
    pub renderer: Arc<Renderer>,
}

/// Runs `method` against `net`.
pub fn call(services: &Services, net: &ConceptNet, method: &str, params: &[Value]) -> Response {
    match method {
        "get_context" => {
            let (seeds, ctx) = context_params(params)?;
            let seeds: Vec<&str> = seeds.iter().map(String::as_str).collect();
            get_context(net, &seeds, ctx).map(|s| encode_scored(&s)).map_err(inference_fault)
        }
        "display_node" => {
            let [concept] = strings::<1>(params)?;
            Ok(encode_entries(&display_node(net, &concept, &services.renderer)))
        }
        "get_analogy" => {
            let target = profile_lists(params)?;
            let q = ProfileQuery::parse(&target, &services.repository.schema().vocab)
                .map_err(|e| Fault::bad_params(e.to_string()))?;
            let target = services.repository.materialize(&q).map_err(|e| Fault::server(e.to_string()))?;
            get_analogy(net, &target).map(|a| encode_analogy(&a)).map_err(inference_fault)
        }
        "expand_query" => {
            let [expression] = strings::<1>(params)?;
            Ok(encode_expansion(&expand_query(&expression, net, services.morphology.as_ref())))
        }
        "decompose_phrases" => {
            let [expression] = strings::<1>(params)?;
            Ok(Value::strings(decompose_phrases(&expression, services.morphology.as_ref())))
        }
        other => Err(Fault::unknown_method(other)),
    }
}

fn inference_fault(e: InferenceError) -> Fault {
    match e {
        InferenceError::BadDepth | InferenceError::BadDecay(_) => Fault::bad_params(e.to_string()),
        other => Fault::server(other.to_string()),
    }
}

fn strings<const N: usize>(params: &[Value]) -> Result<[String; N], Fault> {
    if params.len() != N {
        return Err(Fault::bad_params(format!("expected {N} string parameter(s), got {}", params.len())));
    }
    let mut out: [String; N] = std::array::from_fn(|_| String::new());
    for (slot, p) in out.iter_mut().zip(params) {
        *slot = p.as_str().ok_or_else(|| Fault::bad_params("expected a string parameter"))?.to_string();
    }
    Ok(out)
}

fn string_list(v: &Value) -> Result<Vec<String>, Fault> {
    v.as_array()
        .ok_or_else(|| Fault::bad_params("expected an array of strings"))?
        .iter()
        .map(|s| s.as_str().map(str::to_string).ok_or_else(|| Fault::bad_params("expected an array of strings")))
        .collect()
}

/// Five positional string arrays, or one array holding the five.
pub fn profile_lists(params: &[Value]) -> Result<Vec<Vec<String>>, Fault> {
    let lists: &[Value] = match params {
        [single] => single
            .as_array()
            .filter(|a| a.iter().all(|x| x.as_array().is_some()))
            .ok_or_else(|| Fault::bad_params("expected five arrays of profile values"))?,
        many => many,
    };
    if lists.len() != 5 {
        return Err(Fault::bad_params(format!("expected five profile lists, got {}", lists.len())));
    }
    lists.iter().map(string_list).collect()
}

/// `seeds [depth [decay]]`; seeds is a string or an array of strings.
fn context_params(params: &[Value]) -> Result<(Vec<String>, ContextParams), Fault> {
    let mut ctx = ContextParams::default();
    let seeds = match params.first() {
        Some(Value::Str(s)) => vec![s.clone()],
        Some(v @ Value::Array(_)) => string_list(v)?,
        _ => return Err(Fault::bad_params("get_context needs seeds")),
    };
    if params.len() > 3 {
        return Err(Fault::bad_params("get_context takes at most 3 parameters"));
    }
    if let Some(depth) = params.get(1) {
        let d = depth.as_i64().ok_or_else(|| Fault::bad_params("depth must be an int"))?;
        ctx.depth = usize::try_from(d).map_err(|_| Fault::bad_params("depth must be at least 1"))?;
    }
    if let Some(decay) = params.get(2) {
        ctx.decay = decay.as_f64().ok_or_else(|| Fault::bad_params("decay must be a double"))?;
    }
    Ok((seeds, ctx))
}

pub fn encode_scored(list: &[ScoredConcept]) -> Value {
    Value::Array(
        list.iter()
            .map(|c| Value::record([("concept", Value::str(c.concept.clone())), ("score", Value::Double(c.score))]))
            .collect(),
    )
}

fn encode_ids(ids: &[u64]) -> Value {
    Value::Array(ids.iter().map(|&id| Value::Int(id as i64)).collect())
}

pub fn encode_entries(entries: &[NodeEntry]) -> Value {
    Value::Array(
        entries
            .iter()
            .map(|e| {
                let r = &e.relation;
                Value::record([
                    ("type", Value::str(r.rtype.clone())),
                    ("param1", Value::str(r.param1.clone())),
                    ("param2", Value::str(r.param2.clone())),
                    ("f", Value::Int(r.f.into())),
                    ("i", Value::Int(r.i.into())),
                    ("ids", encode_ids(&e.ids)),
                    ("sentence", Value::str(e.sentence.clone())),
                ])
            })
            .collect(),
    )
}

fn encode_key(k: &RelationKey) -> Value {
    Value::record([
        ("type", Value::str(k.rtype.clone())),
        ("param1", Value::str(k.param1.clone())),
        ("param2", Value::str(k.param2.clone())),
    ])
}

pub fn encode_analogy(a: &Analogy) -> Value {
    let correspondences = a
        .correspondences
        .iter()
        .map(|c| {
            Value::record([
                ("base", Value::str(c.base.clone())),
                ("target", Value::str(c.target.clone())),
                ("systematicity", Value::Int(c.systematicity as i64)),
                ("literal", Value::Bool(c.literal)),
                (
                    "supporting",
                    Value::Array(
                        c.supporting
                            .iter()
                            .map(|(b, t)| Value::record([("base", encode_key(b)), ("target", encode_key(t))]))
                            .collect(),
                    ),
                ),
            ])
        })
        .collect();
    Value::record([
        ("correspondences", Value::Array(correspondences)),
        ("total_systematicity", Value::Int(a.total_systematicity as i64)),
    ])
}

pub fn encode_expansion(x: &QueryExpansion) -> Value {
    Value::record([
        ("lemma", Value::str(x.lemma.clone())),
        ("substring_hits", Value::strings(x.substring_hits.clone())),
        ("context", encode_scored(&x.context)),
        ("concepts", Value::strings(x.concepts())),
    ])
}
