//! JSON documents for dgLas, metrics, actions, series and families.
//!
//! Every parser reports the JSON path of the offending field. Emitters use
//! canonical orderings, so equal values always serialize to equal bytes.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::dgla::{BasisRef, BracketTable, DgLa, GradedElement, GradedMap, GradedSpace, Shape};
use crate::equivariance::{Action, GroupAction, InfinitesimalAction};
use crate::error::{Error, Result};
use crate::hodge::MetricData;
use crate::kuranishi::{FamilyDiagnostics, IdealGenerator, KuranishiFamily};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::series::{GradedSeries, Monomial, Polynomial};

pub const SCALAR_TAG: &str = "gaussian-rational";

/// Pretty-printed JSON with a trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::input(format!("invalid JSON: {e}")))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn index(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.as_object()
        .ok_or_else(|| Error::at(path, "expected an object"))?
        .get(key)
        .ok_or_else(|| Error::at(join(path, key), "missing field"))
}

fn opt_field<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.get(key).filter(|x| !x.is_null())
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a [Value]> {
    v.as_array().map(Vec::as_slice).ok_or_else(|| Error::at(path, "expected an array"))
}

fn int(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| Error::at(path, "expected an integer"))
}

fn uint(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| Error::at(path, "expected a non-negative integer"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::at(path, "expected a string"))
}

pub fn parse_scalar(v: &Value, path: &str) -> Result<Scalar> {
    serde_json::from_value::<Scalar>(v.clone()).map_err(|e| Error::at(path, e.to_string()))
}

pub fn scalar_to_json(s: &Scalar) -> Value {
    serde_json::to_value(s).expect("scalars serialize")
}

fn scalars(v: &Value, len: usize, path: &str) -> Result<Vec<Scalar>> {
    let items = array(v, path)?;
    if items.len() != len {
        return Err(Error::at(path, format!("expected {len} entries, found {}", items.len())));
    }
    items.iter().enumerate().map(|(i, x)| parse_scalar(x, &index(path, i))).collect()
}

fn scalars_to_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(scalar_to_json).collect())
}

/// A row-major matrix with the expected shape.
pub fn parse_matrix(v: &Value, rows: usize, cols: usize, path: &str) -> Result<Matrix> {
    let items = array(v, path)?;
    if items.len() != rows {
        return Err(Error::at(path, format!("expected {rows} rows, found {}", items.len())));
    }
    let data = items
        .iter()
        .enumerate()
        .map(|(r, row)| scalars(row, cols, &index(path, r)))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(data, cols).map_err(|e| Error::at(path, e.to_string()))
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| scalars_to_json(r)).collect())
}

fn parse_shape_header(v: &Value, path: &str) -> Result<(i32, i32)> {
    let degrees = field(v, "degrees", path)?;
    let dpath = join(path, "degrees");
    let min = int(field(degrees, "min", &dpath)?, &join(&dpath, "min"))?;
    let max = int(field(degrees, "max", &dpath)?, &join(&dpath, "max"))?;
    if max < min {
        return Err(Error::at(dpath, "max degree is below min degree"));
    }
    Ok((min as i32, max as i32))
}

fn degrees_json(shape: &Shape) -> Value {
    json!({ "min": shape.min_degree, "max": shape.max_degree() })
}

/// One square-or-rectangular block per listed degree.
fn parse_map_blocks(
    v: &Value,
    shape: &Shape,
    shift: i32,
    degrees: &[i32],
    path: &str,
) -> Result<GradedMap> {
    let items = array(v, path)?;
    if items.len() != degrees.len() {
        return Err(Error::at(path, format!("expected {} matrices, found {}", degrees.len(), items.len())));
    }
    let mut blocks = BTreeMap::new();
    for (i, (&q, m)) in degrees.iter().zip(items).enumerate() {
        blocks.insert(q, parse_matrix(m, shape.dim(q + shift), shape.dim(q), &index(path, i))?);
    }
    GradedMap::from_blocks(shape, shift, blocks).map_err(|e| Error::at(path, e.to_string()))
}

fn map_to_json(m: &GradedMap, shape: &Shape, degrees: &[i32]) -> Value {
    Value::Array(degrees.iter().map(|&q| matrix_to_json(&m.block_or_zero(shape, q))).collect())
}

/// A dgLa with the metric stored alongside it, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DglaDocument {
    pub dgla: DgLa,
    pub metric: Option<MetricData>,
}

impl DglaDocument {
    /// The stored metric, or the identity Gram in every degree.
    pub fn metric_or_identity(&self) -> MetricData {
        self.metric.clone().unwrap_or_else(|| MetricData::identity(self.dgla.shape()))
    }
}

fn differential_degrees(shape: &Shape) -> Vec<i32> {
    shape.degrees().filter(|&q| q < shape.max_degree()).collect()
}

pub fn parse_dgla(v: &Value) -> Result<DglaDocument> {
    if let Some(tag) = opt_field(v, "scalar") {
        let tag = string(tag, "scalar")?;
        if tag != SCALAR_TAG {
            return Err(Error::at("scalar", format!("unsupported scalar field '{tag}'")));
        }
    }
    let (min, max) = parse_shape_header(v, "")?;
    let count = (max - min + 1) as usize;
    let dims: Vec<usize> = {
        let items = array(field(v, "dims", "")?, "dims")?;
        if items.len() != count {
            return Err(Error::at("dims", format!("expected {count} entries, found {}", items.len())));
        }
        items.iter().enumerate().map(|(i, x)| uint(x, &index("dims", i))).collect::<Result<_>>()?
    };
    let basis = array(field(v, "basis", "")?, "basis")?;
    if basis.len() != count {
        return Err(Error::at("basis", format!("expected {count} name lists, found {}", basis.len())));
    }
    let mut names = Vec::with_capacity(count);
    for (i, list) in basis.iter().enumerate() {
        let path = index("basis", i);
        let list = array(list, &path)?;
        if list.len() != dims[i] {
            return Err(Error::at(&path, format!("expected {} names, found {}", dims[i], list.len())));
        }
        names.push(
            list.iter()
                .enumerate()
                .map(|(j, n)| string(n, &index(&path, j)).map(str::to_string))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let space = GradedSpace::new(min, names).map_err(|e| Error::at("basis", e.to_string()))?;
    let shape = space.shape().clone();

    let d_degrees = differential_degrees(&shape);
    let d_value = field(v, "differential", "")?;
    let d_items = array(d_value, "differential")?;
    // A trailing block for the top degree is tolerated if it is empty.
    let d_value = if d_items.len() == d_degrees.len() + 1 {
        let last = &d_items[d_items.len() - 1];
        let path = index("differential", d_items.len() - 1);
        let ok = array(last, &path)?.is_empty()
            || parse_matrix(last, array(last, &path)?.len(), shape.dim(max), &path)?.is_zero();
        if !ok {
            return Err(Error::at(path, "the top-degree differential must be zero"));
        }
        Value::Array(d_items[..d_degrees.len()].to_vec())
    } else {
        d_value.clone()
    };
    let differential = parse_map_blocks(&d_value, &shape, 1, &d_degrees, "differential")?;

    let mut table = BracketTable::new();
    let entries = array(field(v, "bracket", "")?, "bracket")?;
    for (n, e) in entries.iter().enumerate() {
        let path = index("bracket", n);
        let e = array(e, &path)?;
        if e.len() != 6 {
            return Err(Error::at(path, "bracket entries have the form [p, i, q, j, k, c]"));
        }
        let p = int(&e[0], &index(&path, 0))? as i32;
        let i = uint(&e[1], &index(&path, 1))?;
        let q = int(&e[2], &index(&path, 2))? as i32;
        let j = uint(&e[3], &index(&path, 3))?;
        let k = uint(&e[4], &index(&path, 4))?;
        let c = parse_scalar(&e[5], &index(&path, 5))?;
        for (deg, idx, slot) in [(p, i, 1), (q, j, 3)] {
            if !shape.contains(deg) {
                return Err(Error::at(index(&path, slot - 1), format!("degree {deg} out of range")));
            }
            if idx >= shape.dim(deg) {
                return Err(Error::at(index(&path, slot), format!("index {idx} out of range in degree {deg}")));
            }
        }
        if !shape.contains(p + q) {
            return Err(Error::at(&path, format!("target degree {} out of range", p + q)));
        }
        if k >= shape.dim(p + q) {
            return Err(Error::at(index(&path, 4), format!("index {k} out of range in degree {}", p + q)));
        }
        table.entry((BasisRef::new(p, i), BasisRef::new(q, j))).or_default().push((k, c));
    }
    let dgla = DgLa::new(space, differential, table)?;
    let metric = opt_field(v, "metric").map(|m| parse_metric_grams(m, &shape, "metric")).transpose()?;
    Ok(DglaDocument { dgla, metric })
}

pub fn parse_dgla_str(text: &str) -> Result<DglaDocument> {
    parse_dgla(&parse_json(text)?)
}

pub fn dgla_to_json(l: &DgLa, metric: Option<&MetricData>) -> Value {
    let shape = l.shape();
    let mut bracket = Vec::new();
    for ((a, b), terms) in l.bracket_table() {
        for (k, c) in terms {
            bracket.push(json!([a.degree, a.index, b.degree, b.index, k, scalar_to_json(c)]));
        }
    }
    let mut doc = Map::new();
    doc.insert("scalar".into(), json!(SCALAR_TAG));
    doc.insert("degrees".into(), degrees_json(shape));
    doc.insert("dims".into(), json!(shape.dims));
    doc.insert("basis".into(), json!(l.space().basis_names()));
    doc.insert("differential".into(), map_to_json(l.differential(), shape, &differential_degrees(shape)));
    doc.insert("bracket".into(), Value::Array(bracket));
    if let Some(m) = metric {
        doc.insert("metric".into(), grams_to_json(m));
    }
    Value::Object(doc)
}

fn parse_metric_grams(v: &Value, shape: &Shape, path: &str) -> Result<MetricData> {
    let items = array(v, path)?;
    if items.len() != shape.dims.len() {
        return Err(Error::at(path, format!("expected {} Gram matrices, found {}", shape.dims.len(), items.len())));
    }
    let grams = items
        .iter()
        .zip(&shape.dims)
        .enumerate()
        .map(|(i, (m, &d))| parse_matrix(m, d, d, &index(path, i)))
        .collect::<Result<Vec<_>>>()?;
    MetricData::from_grams(shape, grams)
}

fn grams_to_json(m: &MetricData) -> Value {
    Value::Array(m.grams().iter().map(matrix_to_json).collect())
}

/// Accepts `{"gram": [...]}`, `{"metric": [...]}` or a bare list of Gram
/// matrices, one per degree.
pub fn parse_metric(v: &Value, shape: &Shape) -> Result<MetricData> {
    if v.is_array() {
        return parse_metric_grams(v, shape, "");
    }
    if let Some(header) = opt_field(v, "degrees") {
        let (min, max) = parse_shape_header(&json!({ "degrees": header }), "")?;
        if min != shape.min_degree || max != shape.max_degree() {
            return Err(Error::at("degrees", "metric degree range does not match the dgLa"));
        }
    }
    for key in ["gram", "metric"] {
        if let Some(g) = opt_field(v, key) {
            return parse_metric_grams(g, shape, key);
        }
    }
    Err(Error::at("gram", "missing field"))
}

pub fn metric_to_json(m: &MetricData, shape: &Shape) -> Value {
    json!({ "degrees": degrees_json(shape), "gram": grams_to_json(m) })
}

pub fn parse_action(v: &Value, shape: &Shape) -> Result<Action> {
    let kind = string(field(v, "kind", "")?, "kind")?;
    let degrees: Vec<i32> = shape.degrees().collect();
    let parse_maps = |key: &str| -> Result<Vec<GradedMap>> {
        let items = array(field(v, key, "")?, key)?;
        items
            .iter()
            .enumerate()
            .map(|(i, m)| parse_map_blocks(m, shape, 0, &degrees, &index(key, i)))
            .collect()
    };
    match kind {
        "finite" => {
            let generators = parse_maps("generators")?;
            let orders = opt_field(v, "orders")
                .map(|o| {
                    let items = array(o, "orders")?;
                    if items.len() != generators.len() {
                        return Err(Error::at("orders", "one order per generator is required"));
                    }
                    items
                        .iter()
                        .enumerate()
                        .map(|(i, x)| match uint(x, &index("orders", i))? {
                            0 => Err(Error::at(index("orders", i), "orders must be positive")),
                            k => Ok(k as u32),
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            Ok(Action::Finite(GroupAction::new(generators, orders)))
        }
        "infinitesimal" => Ok(Action::Infinitesimal(InfinitesimalAction::new(parse_maps("derivations")?))),
        other => Err(Error::at("kind", format!("unknown action kind '{other}'"))),
    }
}

pub fn action_to_json(a: &Action, shape: &Shape) -> Value {
    let degrees: Vec<i32> = shape.degrees().collect();
    let maps = Value::Array(a.maps().iter().map(|g| map_to_json(g, shape, &degrees)).collect());
    match a {
        Action::Finite(g) => {
            let mut doc = Map::new();
            doc.insert("kind".into(), json!("finite"));
            doc.insert("generators".into(), maps);
            if let Some(o) = g.orders() {
                doc.insert("orders".into(), json!(o));
            }
            Value::Object(doc)
        }
        Action::Infinitesimal(_) => json!({ "kind": "infinitesimal", "derivations": maps }),
    }
}

fn parse_exponents(v: &Value, nvars: usize, path: &str) -> Result<Monomial> {
    let items = array(v, path)?;
    if items.len() != nvars {
        return Err(Error::at(path, format!("expected {nvars} exponents, found {}", items.len())));
    }
    let exps = items
        .iter()
        .enumerate()
        .map(|(i, x)| uint(x, &index(path, i)).map(|e| e as u32))
        .collect::<Result<Vec<_>>>()?;
    Ok(Monomial::new(exps))
}

fn parse_parameters(v: &Value, path: &str) -> Result<(Vec<String>, u32)> {
    let params = array(field(v, "parameters", path)?, &join(path, "parameters"))?
        .iter()
        .enumerate()
        .map(|(i, p)| string(p, &index(&join(path, "parameters"), i)).map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    let order = uint(field(v, "order", path)?, &join(path, "order"))?;
    Ok((params, order as u32))
}

fn parse_series_at(v: &Value, shape: &Shape, path: &str) -> Result<GradedSeries> {
    let (params, order) = parse_parameters(v, path)?;
    let mut s = GradedSeries::zero(params, order, shape.clone()).map_err(|e| Error::at(join(path, "order"), e.to_string()))?;
    let tpath = join(path, "terms");
    for (n, t) in array(field(v, "terms", path)?, &tpath)?.iter().enumerate() {
        let p = index(&tpath, n);
        let mono = parse_exponents(field(t, "exp", &p)?, s.nvars(), &join(&p, "exp"))?;
        let q = int(field(t, "degree", &p)?, &join(&p, "degree"))? as i32;
        if !shape.contains(q) {
            return Err(Error::at(join(&p, "degree"), format!("degree {q} out of range")));
        }
        let coeffs = scalars(field(t, "coeff", &p)?, shape.dim(q), &join(&p, "coeff"))?;
        let c = GradedElement::homogeneous(shape, q, coeffs)?;
        s.insert(mono, c).map_err(|e| Error::at(&p, e.to_string()))?;
    }
    Ok(s)
}

pub fn parse_series(v: &Value, shape: &Shape) -> Result<GradedSeries> {
    parse_series_at(v, shape, "")
}

fn series_terms_json(s: &GradedSeries) -> Value {
    let mut terms = Vec::new();
    for (m, c) in s.terms() {
        for q in c.support_degrees() {
            terms.push(json!({ "exp": m.exponents(), "degree": q, "coeff": scalars_to_json(c.component(q)) }));
        }
    }
    Value::Array(terms)
}

pub fn series_to_json(s: &GradedSeries) -> Value {
    json!({ "parameters": s.parameters(), "order": s.order(), "terms": series_terms_json(s) })
}

fn polynomial_to_json(p: &Polynomial, names: &[String]) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .iter()
        .map(|(m, c)| json!({ "exp": m.exponents(), "coeff": scalar_to_json(c) }))
        .collect();
    json!({ "text": p.format(names), "terms": terms })
}

fn parse_polynomial(v: &Value, nvars: usize, order: u32, path: &str) -> Result<Polynomial> {
    let mut p = Polynomial::zero(nvars, order);
    let tpath = join(path, "terms");
    for (n, t) in array(field(v, "terms", path)?, &tpath)?.iter().enumerate() {
        let tp = index(&tpath, n);
        let mono = parse_exponents(field(t, "exp", &tp)?, nvars, &join(&tp, "exp"))?;
        if mono.total_degree() > order {
            return Err(Error::at(&tp, "term exceeds the truncation order"));
        }
        p.add_term(mono, parse_scalar(field(t, "coeff", &tp)?, &join(&tp, "coeff"))?);
    }
    Ok(p)
}

fn diagnostics_to_json(d: &FamilyDiagnostics) -> Value {
    serde_json::to_value(d).expect("diagnostics serialize")
}

fn parse_diagnostics(v: &Value, path: &str) -> Result<FamilyDiagnostics> {
    let flag = |key: &str| -> Result<bool> {
        field(v, key, path)?.as_bool().ok_or_else(|| Error::at(join(path, key), "expected a boolean"))
    };
    Ok(FamilyDiagnostics {
        harmonic_part_is_linear: flag("harmonic_part_is_linear")?,
        coclosed: flag("coclosed")?,
        kuranishi_condition: flag("kuranishi_condition")?,
        elliptic_equation: flag("elliptic_equation")?,
        fixed_point_identity: flag("fixed_point_identity")?,
    })
}

pub fn family_to_json(f: &KuranishiFamily, diagnostics: Option<&FamilyDiagnostics>) -> Value {
    let names = &f.parameters;
    let obstruction: Vec<Value> =
        (0..f.obstruction_dim()).map(|j| polynomial_to_json(&f.obstruction_polynomial(j), names)).collect();
    let ideal: Vec<Value> = f
        .ideal_generators
        .iter()
        .map(|g| {
            let mut v = polynomial_to_json(&g.polynomial, names);
            v["coordinate"] = json!(g.coordinate);
            v
        })
        .collect();
    let by_order: Vec<Value> = f
        .obstruction_by_order()
        .into_iter()
        .map(|(k, ps)| json!({ "order": k, "coordinates": ps.iter().map(|p| p.format(names)).collect::<Vec<_>>() }))
        .collect();
    let mut doc = Map::new();
    doc.insert("parameters".into(), json!(names));
    doc.insert("order".into(), json!(f.order));
    doc.insert("alpha".into(), series_terms_json(&f.alpha));
    doc.insert("obstruction".into(), Value::Array(obstruction));
    doc.insert("ideal_generators".into(), Value::Array(ideal));
    doc.insert("obstruction_by_order".into(), Value::Array(by_order));
    if let Some(d) = diagnostics {
        doc.insert("diagnostics".into(), diagnostics_to_json(d));
    }
    if let Some(n) = &f.notice {
        doc.insert("notice".into(), json!(n));
    }
    Value::Object(doc)
}

/// Reads a family document produced by [`family_to_json`] for a dgLa of the
/// given shape. Ideal generators are recomputed from the obstruction.
pub fn parse_family(v: &Value, shape: &Shape) -> Result<(KuranishiFamily, Option<FamilyDiagnostics>)> {
    let (parameters, order) = parse_parameters(v, "")?;
    let alpha_doc = json!({ "parameters": parameters, "order": order, "terms": field(v, "alpha", "")? });
    let alpha = parse_series_at(&alpha_doc, shape, "alpha")?;
    let nvars = parameters.len();
    let obs = array(field(v, "obstruction", "")?, "obstruction")?;
    let oshape = Shape::new(2, vec![obs.len()]);
    let polys = obs
        .iter()
        .enumerate()
        .map(|(j, p)| parse_polynomial(p, nvars, order, &index("obstruction", j)))
        .collect::<Result<Vec<_>>>()?;
    let mut by_mono: BTreeMap<Monomial, Vec<Scalar>> = BTreeMap::new();
    for (j, p) in polys.iter().enumerate() {
        for (m, c) in p.terms() {
            by_mono.entry(m.clone()).or_insert_with(|| vec![Scalar::zero(); obs.len()])[j] = c.clone();
        }
    }
    let mut obstruction = GradedSeries::zero(parameters.clone(), order, oshape.clone())?;
    for (m, coords) in by_mono {
        obstruction
            .insert(m, GradedElement::homogeneous(&oshape, 2, coords)?)
            .map_err(|e| Error::at("obstruction", e.to_string()))?;
    }
    let ideal_generators = polys
        .into_iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(coordinate, polynomial)| IdealGenerator { coordinate, polynomial })
        .collect();
    let notice = opt_field(v, "notice").map(|n| string(n, "notice").map(str::to_string)).transpose()?;
    let diagnostics = opt_field(v, "diagnostics").map(|d| parse_diagnostics(d, "diagnostics")).transpose()?;
    Ok((KuranishiFamily { parameters, order, alpha, obstruction, ideal_generators, notice }, diagnostics))
}
