//! JSON encoding of graphs and datasets.
//!
//! Decoding walks a `serde_json::Value` by hand so that schema errors can
//! name the exact offending field, e.g. `graphs[3].edges[7]`.

use serde_json::{json, Map, Value};

use super::{Dataset, DatasetMeta, Graph};
use crate::error::{Error, Result};

fn schema(field: impl Into<String>, detail: impl Into<String>) -> Error {
    Error::Schema {
        field: field.into(),
        detail: detail.into(),
    }
}

pub(crate) fn graph_value(g: &Graph) -> Value {
    let mut obj = Map::new();
    obj.insert("num_nodes".into(), json!(g.num_nodes()));
    obj.insert("features".into(), json!(g.feature_rows()));
    let edges: Vec<[usize; 2]> = g.edges().iter().map(|&(i, j)| [i, j]).collect();
    obj.insert("edges".into(), json!(edges));
    obj.insert("label".into(), json!(g.label()));
    obj.insert("gt_edge_mask".into(), json!(g.gt_edge_mask()));
    if let Some(w) = g.edge_weights() {
        obj.insert("edge_weights".into(), json!(w));
    }
    Value::Object(obj)
}

pub fn graph_to_json(g: &Graph) -> String {
    graph_value(g).to_string()
}

pub fn dataset_to_json(ds: &Dataset) -> String {
    let meta = ds.meta();
    json!({
        "meta": {
            "name": meta.name,
            "num_classes": meta.num_classes,
            "feature_dim": meta.feature_dim,
        },
        "graphs": ds.graphs().iter().map(graph_value).collect::<Vec<_>>(),
    })
    .to_string()
}

pub fn graph_from_json(text: &str) -> Result<Graph> {
    let value: Value = serde_json::from_str(text)?;
    parse_graph(&value, "")
}

pub fn dataset_from_json(text: &str) -> Result<Dataset> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| schema("<root>", "expected an object"))?;
    let meta_v = field(obj, "", "meta")?;
    let meta_obj = meta_v
        .as_object()
        .ok_or_else(|| schema("meta", "expected an object"))?;
    let meta = DatasetMeta {
        name: field(meta_obj, "meta.", "name")?
            .as_str()
            .ok_or_else(|| schema("meta.name", "expected a string"))?
            .to_string(),
        num_classes: as_usize(field(meta_obj, "meta.", "num_classes")?, "meta.num_classes")?,
        feature_dim: as_usize(field(meta_obj, "meta.", "feature_dim")?, "meta.feature_dim")?,
    };
    let graphs_v = field(obj, "", "graphs")?
        .as_array()
        .ok_or_else(|| schema("graphs", "expected an array"))?;
    let graphs = graphs_v
        .iter()
        .enumerate()
        .map(|(k, g)| parse_graph(g, &format!("graphs[{k}].")))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(meta, graphs)
}

fn field<'a>(obj: &'a Map<String, Value>, prefix: &str, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| schema(format!("{prefix}{key}"), "missing required key"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(path, format!("expected a non-negative integer, got {v}")))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| schema(path, format!("expected an array, got {v}")))
}

fn parse_graph(value: &Value, prefix: &str) -> Result<Graph> {
    let path = |k: &str| format!("{prefix}{k}");
    let obj = value.as_object().ok_or_else(|| {
        schema(
            if prefix.is_empty() {
                "<root>".into()
            } else {
                prefix.trim_end_matches('.').to_string()
            },
            "expected an object",
        )
    })?;

    let num_nodes = as_usize(field(obj, prefix, "num_nodes")?, &path("num_nodes"))?;

    let features = as_array(field(obj, prefix, "features")?, &path("features"))?
        .iter()
        .enumerate()
        .map(|(v, row)| {
            as_array(row, &path(&format!("features[{v}]")))?
                .iter()
                .enumerate()
                .map(|(f, x)| {
                    x.as_f64().ok_or_else(|| {
                        schema(path(&format!("features[{v}][{f}]")), "expected a number")
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let edges = as_array(field(obj, prefix, "edges")?, &path("edges"))?
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let p = path(&format!("edges[{k}]"));
            let pair = as_array(e, &p)?;
            if pair.len() != 2 {
                return Err(schema(p, "expected a pair [i, j]"));
            }
            Ok((as_usize(&pair[0], &p)?, as_usize(&pair[1], &p)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let label = match obj.get("label") {
        None | Some(Value::Null) => None,
        Some(v) => Some(as_usize(v, &path("label"))?),
    };

    let gt_edge_mask = match obj.get("gt_edge_mask") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            as_array(v, &path("gt_edge_mask"))?
                .iter()
                .enumerate()
                .map(|(k, b)| {
                    b.as_bool().ok_or_else(|| {
                        schema(path(&format!("gt_edge_mask[{k}]")), "expected a boolean")
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };

    let edge_weights = match obj.get("edge_weights") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            as_array(v, &path("edge_weights"))?
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    w.as_f64().ok_or_else(|| {
                        schema(path(&format!("edge_weights[{k}]")), "expected a number")
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };

    Graph::from_parts(
        num_nodes,
        features,
        edges,
        label,
        gt_edge_mask,
        edge_weights,
    )
    .map_err(|e| match e {
        Error::InvalidGraph(detail) => schema(
            if prefix.is_empty() {
                "<root>".into()
            } else {
                prefix.trim_end_matches('.').to_string()
            },
            detail,
        ),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_round_trip() {
        let g = Graph::new(1, vec![vec![0.25, -1.5]], vec![], None, None).unwrap();
        assert_eq!(graph_from_json(&graph_to_json(&g)).unwrap(), g);
    }

    #[test]
    fn weights_and_awkward_floats_round_trip() {
        let g = Graph::new(
            3,
            vec![vec![0.1 + 0.2], vec![1e-300], vec![-std::f64::consts::PI]],
            vec![(0, 1), (1, 2)],
            Some(2),
            Some(vec![true, false]),
        )
        .unwrap()
        .with_edge_weights(vec![1.0 / 3.0, 0.0])
        .unwrap();
        assert_eq!(graph_from_json(&graph_to_json(&g)).unwrap(), g);
    }

    #[test]
    fn missing_edges_names_the_field() {
        let err =
            graph_from_json(r#"{"num_nodes": 1, "features": [[1.0]], "label": null}"#).unwrap_err();
        match err {
            Error::Schema { field, .. } => assert_eq!(field, "edges"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn bad_entries_name_their_path() {
        let text = r#"{"meta": {"name": "x", "num_classes": 2, "feature_dim": 1},
            "graphs": [{"num_nodes": 2, "features": [[1.0],[1.0]], "edges": [[0, "a"]]}]}"#;
        match dataset_from_json(text).unwrap_err() {
            Error::Schema { field, .. } => assert_eq!(field, "graphs[0].edges[0]"),
            other => panic!("unexpected error {other}"),
        }
        let text = r#"{"meta": {"name": "x", "num_classes": 2, "feature_dim": 1},
            "graphs": [{"num_nodes": 2, "features": [[1.0],[1.0]], "edges": [[0, 0]]}]}"#;
        match dataset_from_json(text).unwrap_err() {
            Error::Schema { field, .. } => assert_eq!(field, "graphs[0]"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn malformed_json_is_an_error() {
        assert!(matches!(graph_from_json("{not json"), Err(Error::Json(_))));
    }
}
