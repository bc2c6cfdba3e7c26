//! JSONL corpus and graph files.
//!
//! A corpus directory holds `corpus.jsonl`, `calls.jsonl` and
//! `interactions.jsonl`. Every file starts with a single header object.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClassUnit, DependencyGraph, GraphKind, LabeledCorpus, MethodSig, TermBag};
use crate::{Error, Result};

pub const CORPUS_FORMAT: &str = "monoembed-corpus-v1";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const CALLS_FILE: &str = "calls.jsonl";
pub const INTERACTIONS_FILE: &str = "interactions.jsonl";

#[derive(Serialize, Deserialize)]
struct CorpusHeader {
    app: String,
    n: usize,
    format: String,
}

#[derive(Serialize, Deserialize)]
struct ClassRecord {
    id: usize,
    fqn: String,
    path: String,
    source: String,
    methods: Vec<MethodSig>,
    terms: TermBag,
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct GraphHeader {
    kind: GraphKind,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    src: usize,
    dst: usize,
    w: u64,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_line<T: Serialize>(out: &mut impl Write, path: &Path, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    Ok(lines)
}

pub fn write_graph(path: &Path, graph: &DependencyGraph) -> Result<()> {
    let mut out = create(path)?;
    write_line(
        &mut out,
        path,
        &GraphHeader {
            kind: graph.kind,
            n: graph.n,
        },
    )?;
    for (src, dst, w) in graph.edges() {
        write_line(&mut out, path, &EdgeRecord { src, dst, w })?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_graph(path: &Path) -> Result<DependencyGraph> {
    let lines = read_lines(path)?;
    let header: GraphHeader = serde_json::from_str(
        lines
            .first()
            .ok_or_else(|| Error::invalid(format!("{}: empty graph file", path.display())))?,
    )?;
    let mut graph = DependencyGraph::new(header.kind, header.n);
    for line in &lines[1..] {
        let e: EdgeRecord = serde_json::from_str(line)?;
        if e.w == 0 || e.src == e.dst {
            return Err(Error::invalid(format!(
                "{}: invalid edge ({}, {}, {})",
                path.display(),
                e.src,
                e.dst,
                e.w
            )));
        }
        if graph.weight(e.src, e.dst) > 0 {
            return Err(Error::invalid(format!(
                "{}: duplicate edge ({}, {})",
                path.display(),
                e.src,
                e.dst
            )));
        }
        graph.add(e.src, e.dst, e.w)?;
    }
    Ok(graph)
}

/// Writes the three corpus files into `dir`, creating it if needed.
pub fn write_corpus(dir: &Path, corpus: &LabeledCorpus) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(CORPUS_FILE);
    let mut out = create(&path)?;
    write_line(
        &mut out,
        &path,
        &CorpusHeader {
            app: corpus.app_name.clone(),
            n: corpus.classes.len(),
            format: CORPUS_FORMAT.to_string(),
        },
    )?;
    for c in &corpus.classes {
        let record = ClassRecord {
            id: c.id,
            fqn: c.fqn.clone(),
            path: c.path.clone(),
            source: c.source.clone(),
            methods: c.methods.clone(),
            terms: c.terms.clone(),
            label: corpus.labels.as_ref().map(|l| l[c.id].clone()),
        };
        write_line(&mut out, &path, &record)?;
    }
    out.flush().map_err(|e| Error::io(&path, e))?;
    write_graph(&dir.join(CALLS_FILE), &corpus.calls)?;
    write_graph(&dir.join(INTERACTIONS_FILE), &corpus.interactions)
}

pub fn read_corpus(dir: &Path) -> Result<LabeledCorpus> {
    let path = dir.join(CORPUS_FILE);
    let lines = read_lines(&path)?;
    let header: CorpusHeader = serde_json::from_str(
        lines
            .first()
            .ok_or_else(|| Error::invalid(format!("{}: empty corpus file", path.display())))?,
    )?;
    if header.format != CORPUS_FORMAT {
        return Err(Error::invalid(format!(
            "{}: unsupported format {:?}",
            path.display(),
            header.format
        )));
    }
    let mut classes = Vec::with_capacity(header.n);
    let mut labels = Vec::with_capacity(header.n);
    for line in &lines[1..] {
        let r: ClassRecord = serde_json::from_str(line)?;
        labels.push(r.label);
        classes.push(ClassUnit {
            id: r.id,
            fqn: r.fqn,
            path: r.path,
            source: r.source,
            methods: r.methods,
            terms: r.terms,
        });
    }
    if classes.len() != header.n {
        return Err(Error::invalid(format!(
            "{}: header says {} classes, found {}",
            path.display(),
            header.n,
            classes.len()
        )));
    }
    let labels = if labels.iter().all(Option::is_some) && !labels.is_empty() {
        Some(labels.into_iter().flatten().collect())
    } else if labels.iter().all(Option::is_none) {
        None
    } else {
        return Err(Error::invalid(format!(
            "{}: labels must be present on every class or on none",
            path.display()
        )));
    };
    let calls = read_graph(&dir.join(CALLS_FILE))?;
    let interactions = read_graph(&dir.join(INTERACTIONS_FILE))?;
    if calls.kind != GraphKind::Calls || interactions.kind != GraphKind::Interactions {
        return Err(Error::invalid(format!(
            "{}: graph files have the wrong kind",
            dir.display()
        )));
    }
    let corpus = LabeledCorpus {
        app_name: header.app,
        classes,
        calls,
        interactions,
        labels,
    };
    corpus.validate()?;
    Ok(corpus)
}
