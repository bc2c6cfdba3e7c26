use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use log::warn;
use rayon::prelude::*;
use regex::Regex;
use tree_sitter::{Node, Parser};
use walkdir::WalkDir;

use super::terms::{collect_tree_terms, raw_text_terms, TermBag, TermFilter};
use super::{ClassUnit, MethodSig, Visibility};
use crate::{Error, Result};

pub(crate) const TYPE_DECLARATIONS: &[&str] = &[
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
    "record_declaration",
    "annotation_type_declaration",
];

pub(crate) fn java_parser() -> Parser {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("bundled java grammar is compatible");
    parser
}

pub(crate) fn node_text<'a>(node: Node<'_>, src: &'a [u8]) -> &'a str {
    node.utf8_text(src).unwrap_or("")
}

/// Type text with all whitespace removed, so `Map<K, V>` and `Map<K,V>` agree.
pub(crate) fn type_text(node: Node<'_>, src: &[u8]) -> String {
    node_text(node, src).split_whitespace().collect()
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Globs over root-relative paths whose files are skipped.
    pub ignore_globs: Vec<String>,
    /// Globs naming files that may fall back to raw-text terms when they
    /// fail to parse. Without a match a broken file is skipped.
    pub raw_fallback_globs: Vec<String>,
    pub term_filter: TermFilter,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedClasses {
    pub classes: Vec<ClassUnit>,
    pub warnings: Vec<String>,
}

fn glob_set(patterns: &[String]) -> Result<GlobSet> {
    let mut builder = GlobSetBuilder::new();
    for p in patterns {
        let glob = Glob::new(p).map_err(|e| Error::invalid(format!("bad glob {p:?}: {e}")))?;
        builder.add(glob);
    }
    builder
        .build()
        .map_err(|e| Error::invalid(format!("bad glob set: {e}")))
}

/// Parses every `.java` file below `root` into top-level class units.
///
/// Ids are assigned by sorted fqn after all files are merged, so the result
/// does not depend on traversal or thread scheduling order.
pub fn parse_class_units(root: &Path, opts: &ParseOptions) -> Result<ParsedClasses> {
    std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let ignore = glob_set(&opts.ignore_globs)?;
    let fallback = glob_set(&opts.raw_fallback_globs)?;

    let mut files: Vec<(PathBuf, String)> = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| root.into());
            let io = e
                .into_io_error()
                .unwrap_or_else(|| std::io::Error::other("directory loop"));
            Error::io(path, io)
        })?;
        if !entry.file_type().is_file()
            || entry.path().extension().and_then(|e| e.to_str()) != Some("java")
        {
            continue;
        }
        let rel = relative_path(root, entry.path());
        if ignore.is_match(&rel) {
            continue;
        }
        files.push((entry.path().to_path_buf(), rel));
    }

    let outcomes: Vec<Result<(Vec<ClassUnit>, Vec<String>)>> = files
        .par_iter()
        .map(|(path, rel)| {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let text = String::from_utf8_lossy(&bytes).into_owned();
            Ok(parse_file(rel, &text, fallback.is_match(rel), opts.term_filter))
        })
        .collect();

    let mut classes = Vec::new();
    let mut warnings = Vec::new();
    for outcome in outcomes {
        let (mut c, mut w) = outcome?;
        classes.append(&mut c);
        warnings.append(&mut w);
    }
    let warnings_from_merge = assign_ids(&mut classes);
    warnings.extend(warnings_from_merge);
    for w in &warnings {
        warn!("{w}");
    }
    Ok(ParsedClasses { classes, warnings })
}

pub(crate) fn relative_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Sorts by fqn, suffixes duplicate fqns with `~2`, `~3`, ... and assigns
/// contiguous ids. Returns one warning per renamed class.
pub fn assign_ids(classes: &mut [ClassUnit]) -> Vec<String> {
    let mut warnings = Vec::new();
    classes.sort_by(|a, b| (&a.fqn, &a.path).cmp(&(&b.fqn, &b.path)));
    let mut i = 0;
    while i < classes.len() {
        let mut j = i + 1;
        while j < classes.len() && classes[j].fqn == classes[i].fqn {
            let renamed = format!("{}~{}", classes[j].fqn, j - i + 1);
            warnings.push(format!(
                "duplicate class {} in {}; renamed to {renamed}",
                classes[j].fqn, classes[j].path
            ));
            classes[j].fqn = renamed;
            j += 1;
        }
        i = j;
    }
    classes.sort_by(|a, b| a.fqn.cmp(&b.fqn));
    for (id, class) in classes.iter_mut().enumerate() {
        class.id = id;
    }
    warnings
}

fn parse_file(
    rel: &str,
    text: &str,
    allow_raw: bool,
    filter: TermFilter,
) -> (Vec<ClassUnit>, Vec<String>) {
    let mut parser = java_parser();
    let tree = parser.parse(text, None);
    let tree = match tree {
        Some(t) if !t.root_node().has_error() => t,
        _ if allow_raw => {
            let unit = raw_fallback_unit(rel, text, filter);
            let warning = format!("{rel}: parse error, using raw-text terms");
            return (unit.into_iter().collect(), vec![warning]);
        }
        _ => return (Vec::new(), vec![format!("{rel}: parse error, file skipped")]),
    };

    let src = text.as_bytes();
    let root = tree.root_node();
    let mut package = String::new();
    let mut preamble_range: Option<(usize, usize)> = None;
    let mut cursor = root.walk();
    for child in root.named_children(&mut cursor) {
        if matches!(child.kind(), "package_declaration" | "import_declaration") {
            if child.kind() == "package_declaration" {
                let mut c = child.walk();
                let name = child
                    .named_children(&mut c)
                    .find(|n| matches!(n.kind(), "scoped_identifier" | "identifier"));
                if let Some(name) = name {
                    package = node_text(name, src).to_string();
                }
            }
            let (s, e) = preamble_range.unwrap_or((child.start_byte(), child.end_byte()));
            preamble_range = Some((s.min(child.start_byte()), e.max(child.end_byte())));
        }
    }
    let preamble = preamble_range
        .map(|(s, e)| &text[s..e])
        .unwrap_or("");

    let mut units = Vec::new();
    let mut cursor = root.walk();
    for decl in root.named_children(&mut cursor) {
        if !TYPE_DECLARATIONS.contains(&decl.kind()) {
            continue;
        }
        let Some(name_node) = decl.child_by_field_name("name") else {
            continue;
        };
        let name = node_text(name_node, src).to_string();
        let fqn = if package.is_empty() {
            name.clone()
        } else {
            format!("{package}.{name}")
        };
        let decl_text = node_text(decl, src);
        let source = if preamble.is_empty() {
            decl_text.to_string()
        } else {
            format!("{preamble}\n\n{decl_text}")
        };
        let mut terms = TermBag::new();
        collect_tree_terms(decl, src, filter, &mut terms);
        units.push(ClassUnit {
            id: 0,
            fqn,
            path: rel.to_string(),
            source,
            methods: declared_methods(decl, &name, src),
            terms,
        });
    }
    (units, Vec::new())
}

fn raw_fallback_unit(rel: &str, text: &str, filter: TermFilter) -> Option<ClassUnit> {
    if text.trim().is_empty() {
        return None;
    }
    let package_re = Regex::new(r"(?m)^\s*package\s+([\w.]+)\s*;").expect("static regex");
    let stem = rel
        .rsplit('/')
        .next()
        .and_then(|f| f.strip_suffix(".java"))
        .unwrap_or(rel);
    let fqn = match package_re.captures(text) {
        Some(c) => format!("{}.{stem}", &c[1]),
        None => stem.to_string(),
    };
    Some(ClassUnit {
        id: 0,
        fqn,
        path: rel.to_string(),
        source: text.to_string(),
        methods: Vec::new(),
        terms: raw_text_terms(text, filter),
    })
}

/// Body node holding the direct members of a type declaration.
pub(crate) fn member_container<'t>(decl: Node<'t>) -> Option<Node<'t>> {
    let body = decl.child_by_field_name("body")?;
    if body.kind() == "enum_body" {
        let mut cursor = body.walk();
        let found = body
            .named_children(&mut cursor)
            .find(|c| c.kind() == "enum_body_declarations");
        return found;
    }
    Some(body)
}

/// Methods and constructors declared directly in `decl` (not in nested types).
pub(crate) fn declared_methods(decl: Node<'_>, class_name: &str, src: &[u8]) -> Vec<MethodSig> {
    let interface_like = matches!(
        decl.kind(),
        "interface_declaration" | "annotation_type_declaration"
    );
    let Some(body) = member_container(decl) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut cursor = body.walk();
    for member in body.named_children(&mut cursor) {
        let (name, return_type) = match member.kind() {
            "method_declaration" => {
                let Some(name) = member.child_by_field_name("name") else {
                    continue;
                };
                let ret = member
                    .child_by_field_name("type")
                    .map(|t| type_text(t, src))
                    .unwrap_or_default();
                (node_text(name, src).to_string(), ret)
            }
            "constructor_declaration" | "compact_constructor_declaration" => {
                (class_name.to_string(), class_name.to_string())
            }
            _ => continue,
        };
        let param_types = member
            .child_by_field_name("parameters")
            .map(|p| parameter_types(p, src))
            .unwrap_or_default();
        out.push(MethodSig {
            name,
            param_types,
            return_type,
            visibility: visibility(member, interface_like, src),
        });
    }
    out
}

fn parameter_types(params: Node<'_>, src: &[u8]) -> Vec<String> {
    let mut out = Vec::new();
    let mut cursor = params.walk();
    for p in params.named_children(&mut cursor) {
        match p.kind() {
            "formal_parameter" => {
                if let Some(t) = p.child_by_field_name("type") {
                    out.push(type_text(t, src));
                }
            }
            "spread_parameter" => {
                let mut c = p.walk();
                let ty = p
                    .named_children(&mut c)
                    .find(|n| !matches!(n.kind(), "modifiers" | "variable_declarator"));
                if let Some(t) = ty {
                    out.push(format!("{}...", type_text(t, src)));
                }
            }
            _ => {}
        }
    }
    out
}

fn visibility(member: Node<'_>, interface_like: bool, src: &[u8]) -> Visibility {
    let mut cursor = member.walk();
    let modifiers = member
        .children(&mut cursor)
        .find(|c| c.kind() == "modifiers");
    if let Some(m) = modifiers {
        let mut c = m.walk();
        for token in m.children(&mut c) {
            match node_text(token, src) {
                "public" => return Visibility::Public,
                "protected" => return Visibility::Protected,
                "private" => return Visibility::Private,
                _ => {}
            }
        }
    }
    if interface_like {
        Visibility::Public
    } else {
        Visibility::Package
    }
}
