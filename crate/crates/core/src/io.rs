//! Graph files and CSV output.
//!
//! A graph file has three sections. Every entry is one line of
//! comma-separated `key = value` fields; whitespace is ignored everywhere and
//! `#` starts a comment.
//!
//! ```text
//! [vertices]
//! id = v, condition = delta:0
//! id = leaf, condition = dirichlet
//!
//! [edges]
//! id = loop, from = v, to = v, length = 3.0
//! id = tail, from = v, to = leaf, length = 1.0, potential = 0.5:2.0; 0.5:0.0
//!
//! [cuts]
//! edge = loop, t = 1.5, family = flux, params = 0.25
//! ```
//!
//! `potential` lists `length:q` pieces from `from` to `to` and defaults to
//! `q = 0`. All cuts share one family (`glued`, `flux`, `imaginary-flux`,
//! `robin` or `dirichlet`); the parametrized families take one parameter per
//! cut.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::cutting::{CutFamily, CutSet};
use crate::error::{Error, Result};
use crate::graph::{EdgePoint, MetricGraph, PotentialPiece, VertexCondition};
use crate::spectral::{Eigenpair, Spectrum};
use crate::verify::{VerificationReport, VERIFICATION_HEADER};

/// A graph together with the cuts declared in its file.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphFile {
    pub graph: MetricGraph,
    pub cuts: CutSet,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Vertices,
    Edges,
    Cuts,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn fields(line: usize, text: &str, allowed: &[&str]) -> Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    for field in text.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key = value, found `{field}`")))?;
        if !allowed.contains(&key) {
            return Err(parse_err(line, format!("unknown field `{key}`")));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(parse_err(line, format!("field `{key}` given twice")));
        }
    }
    Ok(out)
}

fn required<'a>(line: usize, map: &'a HashMap<String, String>, key: &str) -> Result<&'a str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| parse_err(line, format!("missing field `{key}`")))
}

fn number(line: usize, text: &str) -> Result<f64> {
    let x: f64 = text
        .parse()
        .map_err(|_| parse_err(line, format!("`{text}` is not a number")))?;
    if !x.is_finite() {
        return Err(parse_err(line, format!("`{text}` is not finite")));
    }
    Ok(x)
}

fn condition(line: usize, text: &str) -> Result<VertexCondition> {
    if text == "dirichlet" {
        return Ok(VertexCondition::Dirichlet);
    }
    match text.split_once(':') {
        Some(("delta", chi)) => Ok(VertexCondition::Delta(number(line, chi)?)),
        _ => Err(parse_err(line, format!("unknown condition `{text}`"))),
    }
}

struct CutLine {
    line: usize,
    point: EdgePoint,
    family: String,
    params: Vec<f64>,
}

/// Parses a graph file and validates the graph and its cuts.
pub fn parse_graph(text: &str) -> Result<GraphFile> {
    let mut graph = MetricGraph::new();
    let mut vertex_ids: HashMap<String, usize> = HashMap::new();
    let mut edge_ids: HashMap<String, usize> = HashMap::new();
    let mut cut_lines: Vec<CutLine> = Vec::new();
    let mut section = Section::None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let compact: String = content.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            continue;
        }
        if compact.starts_with('[') {
            section = match compact.as_str() {
                "[vertices]" => Section::Vertices,
                "[edges]" => Section::Edges,
                "[cuts]" => Section::Cuts,
                other => return Err(parse_err(line, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(parse_err(line, "entry before the first section")),
            Section::Vertices => {
                let f = fields(line, &compact, &["id", "condition"])?;
                let id = required(line, &f, "id")?;
                let cond = condition(line, required(line, &f, "condition")?)?;
                if vertex_ids.contains_key(id) {
                    return Err(parse_err(line, format!("duplicate vertex `{id}`")));
                }
                vertex_ids.insert(id.to_string(), graph.add_vertex(id, cond));
            }
            Section::Edges => {
                let f = fields(line, &compact, &["id", "from", "to", "length", "potential"])?;
                let id = required(line, &f, "id")?;
                let endpoint = |key: &str| -> Result<usize> {
                    let name = required(line, &f, key)?;
                    vertex_ids
                        .get(name)
                        .copied()
                        .ok_or_else(|| parse_err(line, format!("unknown vertex `{name}`")))
                };
                let (from, to) = (endpoint("from")?, endpoint("to")?);
                let length = number(line, required(line, &f, "length")?)?;
                let potential = match f.get("potential") {
                    None => vec![PotentialPiece {
                        len: length,
                        q: 0.0,
                    }],
                    Some(list) => list
                        .split(';')
                        .filter(|p| !p.is_empty())
                        .map(|p| {
                            let (len, q) = p.split_once(':').ok_or_else(|| {
                                parse_err(line, format!("potential piece `{p}` is not len:q"))
                            })?;
                            Ok(PotentialPiece {
                                len: number(line, len)?,
                                q: number(line, q)?,
                            })
                        })
                        .collect::<Result<_>>()?,
                };
                if edge_ids.contains_key(id) {
                    return Err(parse_err(line, format!("duplicate edge `{id}`")));
                }
                let e = graph.add_edge_with_potential(from, to, length, potential);
                graph.set_edge_name(e, id);
                edge_ids.insert(id.to_string(), e);
            }
            Section::Cuts => {
                let f = fields(line, &compact, &["edge", "t", "family", "params"])?;
                let name = required(line, &f, "edge")?;
                let edge = *edge_ids
                    .get(name)
                    .ok_or_else(|| parse_err(line, format!("unknown edge `{name}`")))?;
                let params = match f.get("params") {
                    None => Vec::new(),
                    Some(list) => list
                        .split(';')
                        .filter(|p| !p.is_empty())
                        .map(|p| number(line, p))
                        .collect::<Result<_>>()?,
                };
                cut_lines.push(CutLine {
                    line,
                    point: EdgePoint::new(edge, number(line, required(line, &f, "t")?)?),
                    family: f.get("family").cloned().unwrap_or_else(|| "glued".into()),
                    params,
                });
            }
        }
    }

    graph.ensure_valid()?;
    let cuts = build_cuts(&cut_lines)?;
    cuts.validate(&graph)?;
    Ok(GraphFile { graph, cuts })
}

fn build_cuts(lines: &[CutLine]) -> Result<CutSet> {
    let Some(first) = lines.first() else {
        return Ok(CutSet::empty());
    };
    let points: Vec<EdgePoint> = lines.iter().map(|c| c.point).collect();
    let mut params = Vec::with_capacity(lines.len());
    for c in lines {
        if c.family != first.family {
            return Err(parse_err(
                c.line,
                format!("family `{}` differs from `{}`", c.family, first.family),
            ));
        }
        let expected = usize::from(matches!(
            c.family.as_str(),
            "flux" | "imaginary-flux" | "robin"
        ));
        if c.params.len() != expected {
            return Err(parse_err(
                c.line,
                format!(
                    "family `{}` takes {expected} parameter(s), found {}",
                    c.family,
                    c.params.len()
                ),
            ));
        }
        params.extend(&c.params);
    }
    let family = match first.family.as_str() {
        "glued" => CutFamily::Glued,
        "dirichlet" => CutFamily::Dirichlet,
        "flux" => CutFamily::Flux(params),
        "imaginary-flux" => CutFamily::ImaginaryFlux(params),
        "robin" => CutFamily::Robin(params),
        other => return Err(parse_err(first.line, format!("unknown family `{other}`"))),
    };
    CutSet::glued(&points).with_family(family)
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<GraphFile> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_graph(&text)
}

/// Serializes a graph and its cuts; [`parse_graph`] reads the result back
/// to an equal value.
pub fn write_graph(graph: &MetricGraph, cuts: &CutSet) -> String {
    let mut out = String::from("[vertices]\n");
    for v in graph.vertices() {
        let cond = match v.condition {
            VertexCondition::Delta(chi) => format!("delta:{chi:?}"),
            VertexCondition::Dirichlet => "dirichlet".into(),
        };
        let _ = writeln!(out, "id = {}, condition = {cond}", v.name);
    }
    out.push_str("\n[edges]\n");
    for e in graph.edges() {
        let _ = write!(
            out,
            "id = {}, from = {}, to = {}, length = {:?}",
            e.name,
            graph.vertex(e.from).name,
            graph.vertex(e.to).name,
            e.length
        );
        let trivial =
            e.potential.len() == 1 && e.potential[0].q == 0.0 && e.potential[0].len == e.length;
        if !trivial {
            let pieces: Vec<String> = e
                .potential
                .iter()
                .map(|p| format!("{:?}:{:?}", p.len, p.q))
                .collect();
            let _ = write!(out, ", potential = {}", pieces.join("; "));
        }
        out.push('\n');
    }
    if !cuts.is_empty() {
        out.push_str("\n[cuts]\n");
        let params = cuts.family.params();
        for (j, c) in cuts.cuts.iter().enumerate() {
            let _ = write!(
                out,
                "edge = {}, t = {:?}, family = {}",
                graph.edge(c.edge).name,
                c.t,
                cuts.family.name()
            );
            if let Some(p) = params {
                let _ = write!(out, ", params = {:?}", p[j]);
            }
            out.push('\n');
        }
    }
    out
}

/// Formats a float for CSV output: fixed 15 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.15e}")
}

pub const SPECTRUM_HEADER: &str = "index,lambda,multiplicity,residual";
pub const EIGENFUNCTION_HEADER: &str = "edge,segment,t,f,fprime";

/// One row per eigenvalue, repeated according to multiplicity.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for (i, e) in spectrum.entries.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            format_float(e.lambda),
            e.multiplicity,
            format_float(e.residual)
        );
    }
    out
}

/// Samples with at least `per_unit` points per unit length on every segment.
/// `segment` counts the potential pieces of an edge from zero.
pub fn eigenfunction_csv(pair: &Eigenpair, graph: &MetricGraph, per_unit: f64) -> String {
    let layout = pair.layout();
    let mut out = format!("{EIGENFUNCTION_HEADER}\n");
    for (edge, seg, t, f, d) in pair.sample(per_unit) {
        let local = seg - layout.edge_segments[edge].start;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            graph.edge(edge).name,
            local,
            format_float(t),
            format_float(f),
            format_float(d)
        );
    }
    out
}

pub fn flux_scan_header(dimension: usize) -> String {
    let mut cols: Vec<String> = (1..=dimension).map(|i| format!("alpha_{i}")).collect();
    cols.push("n".into());
    cols.push("lambda".into());
    cols.join(",")
}

/// Rows of `(alpha, n, lambda)`.
pub fn flux_scan_csv(dimension: usize, rows: &[(Vec<f64>, usize, f64)]) -> String {
    let mut out = flux_scan_header(dimension);
    out.push('\n');
    for (alpha, n, lambda) in rows {
        let mut cols: Vec<String> = alpha.iter().map(|a| format_float(*a)).collect();
        cols.push(n.to_string());
        cols.push(format_float(*lambda));
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

pub fn verification_csv(reports: &[VerificationReport]) -> String {
    let mut out = format!("{VERIFICATION_HEADER}\n");
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
