//! Name-based call and interaction graphs.
//!
//! Resolution is deliberately shallow: a receiver is typed only when it is
//! a declared local, parameter or field, a class name, `this.field`, or a
//! `new T()` expression. Any other call falls back to a corpus-wide unique
//! method-name match; ambiguous names are dropped.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use tree_sitter::Node;

use super::parser::{java_parser, node_text, TYPE_DECLARATIONS};
use super::{ClassUnit, DependencyGraph, GraphKind};

const METHOD_LIKE: &[&str] = &[
    "method_declaration",
    "constructor_declaration",
    "compact_constructor_declaration",
];

pub fn build_call_graph(classes: &[ClassUnit]) -> DependencyGraph {
    build_graphs(classes).0
}

pub fn build_interaction_graph(classes: &[ClassUnit]) -> DependencyGraph {
    build_graphs(classes).1
}

/// Builds `(calls, interactions)` in one pass over the class sources.
pub fn build_graphs(classes: &[ClassUnit]) -> (DependencyGraph, DependencyGraph) {
    let index = CorpusIndex::new(classes);
    let per_class: Vec<ClassRefs> = classes
        .par_iter()
        .enumerate()
        .map(|(i, class)| analyse_class(i, class, &index))
        .collect();

    let n = classes.len();
    let mut calls = DependencyGraph::new(GraphKind::Calls, n);
    let mut interactions = DependencyGraph::new(GraphKind::Interactions, n);
    for (i, refs) in per_class.iter().enumerate() {
        for (&j, &w) in &refs.calls {
            calls.add(i, j, w).expect("resolved ids are in range");
            interactions.add(i, j, w).expect("resolved ids are in range");
        }
        for (&j, &w) in &refs.structural {
            interactions.add(i, j, w).expect("resolved ids are in range");
        }
    }
    (calls, interactions)
}

struct CorpusIndex<'a> {
    by_fqn: HashMap<&'a str, usize>,
    by_simple: HashMap<&'a str, Vec<usize>>,
    methods_by_name: HashMap<&'a str, Vec<usize>>,
    declared: Vec<HashSet<&'a str>>,
}

impl<'a> CorpusIndex<'a> {
    fn new(classes: &'a [ClassUnit]) -> Self {
        let mut by_fqn = HashMap::new();
        let mut by_simple: HashMap<&str, Vec<usize>> = HashMap::new();
        let mut methods_by_name: HashMap<&str, Vec<usize>> = HashMap::new();
        let mut declared = Vec::with_capacity(classes.len());
        for (i, c) in classes.iter().enumerate() {
            by_fqn.insert(c.fqn.as_str(), i);
            by_simple.entry(c.simple_name()).or_default().push(i);
            let names: HashSet<&str> = c.methods.iter().map(|m| m.name.as_str()).collect();
            for name in &names {
                methods_by_name.entry(name).or_default().push(i);
            }
            declared.push(names);
        }
        Self {
            by_fqn,
            by_simple,
            methods_by_name,
            declared,
        }
    }
}

#[derive(Default)]
struct ClassRefs {
    calls: BTreeMap<usize, u64>,
    /// Inheritance and declared-type references.
    structural: BTreeMap<usize, u64>,
}

struct TypeResolver<'a, 'c> {
    index: &'c CorpusIndex<'a>,
    package: String,
    explicit: HashMap<String, String>,
    wildcards: Vec<String>,
}

impl TypeResolver<'_, '_> {
    /// Resolves a type name as written (simple or qualified, no generics).
    fn resolve(&self, name: &str) -> Option<usize> {
        if name.contains('.') {
            if let Some(&id) = self.index.by_fqn.get(name) {
                return Some(id);
            }
            // Outer.Inner: nested types are folded into their top-level class
            let head = name.split('.').next()?;
            return self.resolve_simple(head);
        }
        self.resolve_simple(name)
    }

    fn resolve_simple(&self, name: &str) -> Option<usize> {
        if let Some(fqn) = self.explicit.get(name) {
            return self.index.by_fqn.get(fqn.as_str()).copied();
        }
        let local = if self.package.is_empty() {
            name.to_string()
        } else {
            format!("{}.{name}", self.package)
        };
        if let Some(&id) = self.index.by_fqn.get(local.as_str()) {
            return Some(id);
        }
        for pkg in &self.wildcards {
            if let Some(&id) = self.index.by_fqn.get(format!("{pkg}.{name}").as_str()) {
                return Some(id);
            }
        }
        match self.index.by_simple.get(name).map(Vec::as_slice) {
            Some([only]) => Some(*only),
            _ => None,
        }
    }
}

/// Name of the principal type of a type node: `List<Owner>` gives `List`,
/// `Owner[]` gives `Owner`. Primitive types give `None`.
fn primary_type(node: Node<'_>, src: &[u8]) -> Option<String> {
    match node.kind() {
        "type_identifier" => Some(node_text(node, src).to_string()),
        "scoped_type_identifier" => Some(strip_generics(node_text(node, src))),
        "generic_type" => primary_type(node.named_child(0)?, src),
        "array_type" => primary_type(node.child_by_field_name("element")?, src),
        _ => None,
    }
}

fn strip_generics(text: &str) -> String {
    let mut out = String::new();
    let mut depth = 0usize;
    for ch in text.chars() {
        match ch {
            '<' => depth += 1,
            '>' => depth = depth.saturating_sub(1),
            c if depth == 0 && !c.is_whitespace() => out.push(c),
            _ => {}
        }
    }
    out
}

/// Every type name mentioned in a type node, including generic arguments.
fn mentioned_types(node: Node<'_>, src: &[u8], out: &mut Vec<String>) {
    match node.kind() {
        "type_identifier" => out.push(node_text(node, src).to_string()),
        "scoped_type_identifier" => out.push(strip_generics(node_text(node, src))),
        _ => {
            let mut cursor = node.walk();
            for child in node.named_children(&mut cursor) {
                mentioned_types(child, src, out);
            }
        }
    }
}

/// Declared type node of a declaration-like node, if any.
fn declared_type_node(node: Node<'_>) -> Option<Node<'_>> {
    match node.kind() {
        "field_declaration"
        | "constant_declaration"
        | "local_variable_declaration"
        | "formal_parameter"
        | "enhanced_for_statement"
        | "resource" => node.child_by_field_name("type"),
        "catch_formal_parameter" => {
            let mut cursor = node.walk();
            let found = node
                .named_children(&mut cursor)
                .find(|c| c.kind() == "catch_type");
            found
        }
        "spread_parameter" => {
            let mut cursor = node.walk();
            let found = node
                .named_children(&mut cursor)
                .find(|c| !matches!(c.kind(), "modifiers" | "variable_declarator"));
            found
        }
        _ => None,
    }
}

/// Variable names introduced by a declaration-like node.
fn declared_names<'s>(node: Node<'_>, src: &'s [u8]) -> Vec<&'s str> {
    let mut names = Vec::new();
    match node.kind() {
        "field_declaration" | "constant_declaration" | "local_variable_declaration" => {
            let mut cursor = node.walk();
            for d in node.children_by_field_name("declarator", &mut cursor) {
                if let Some(name) = d.child_by_field_name("name") {
                    names.push(node_text(name, src));
                }
            }
        }
        "formal_parameter" | "enhanced_for_statement" | "resource" | "catch_formal_parameter" => {
            if let Some(name) = node.child_by_field_name("name") {
                names.push(node_text(name, src));
            }
        }
        "spread_parameter" => {
            let mut cursor = node.walk();
            for d in node.named_children(&mut cursor) {
                if d.kind() == "variable_declarator" {
                    if let Some(name) = d.child_by_field_name("name") {
                        names.push(node_text(name, src));
                    }
                }
            }
        }
        _ => {}
    }
    names
}

fn parse_import(text: &str) -> Option<(bool, String)> {
    let body = text.trim().strip_prefix("import")?.trim().trim_end_matches(';');
    if body.starts_with("static ") {
        return None;
    }
    let body: String = body.split_whitespace().collect();
    match body.strip_suffix(".*") {
        Some(pkg) => Some((true, pkg.to_string())),
        None => Some((false, body)),
    }
}

type Scope<'s> = HashMap<&'s str, Option<String>>;

struct Walker<'a, 'c, 's> {
    me: usize,
    src: &'s [u8],
    types: TypeResolver<'a, 'c>,
    fields: Scope<'s>,
    superclass: Option<usize>,
    refs: ClassRefs,
}

fn analyse_class(me: usize, class: &ClassUnit, index: &CorpusIndex<'_>) -> ClassRefs {
    let mut parser = java_parser();
    let Some(tree) = parser.parse(&class.source, None) else {
        return ClassRefs::default();
    };
    let root = tree.root_node();
    if root.has_error() {
        return ClassRefs::default();
    }
    let src = class.source.as_bytes();

    let mut explicit = HashMap::new();
    let mut wildcards = Vec::new();
    let mut decl = None;
    let mut cursor = root.walk();
    for child in root.named_children(&mut cursor) {
        if child.kind() == "import_declaration" {
            match parse_import(node_text(child, src)) {
                Some((true, pkg)) => wildcards.push(pkg),
                Some((false, fqn)) => {
                    let simple = fqn.rsplit('.').next().unwrap_or(&fqn).to_string();
                    explicit.insert(simple, fqn);
                }
                None => {}
            }
        } else if decl.is_none() && TYPE_DECLARATIONS.contains(&child.kind()) {
            decl = Some(child);
        }
    }
    let Some(decl) = decl else {
        return ClassRefs::default();
    };

    let types = TypeResolver {
        index,
        package: class.package().to_string(),
        explicit,
        wildcards,
    };
    let mut fields = Scope::new();
    collect_fields(decl, src, &mut fields);
    let superclass = decl
        .child_by_field_name("superclass")
        .and_then(|s| s.named_child(0))
        .and_then(|t| primary_type(t, src))
        .and_then(|name| types.resolve(&name));

    let mut walker = Walker {
        me,
        src,
        types,
        fields,
        superclass,
        refs: ClassRefs::default(),
    };
    let mut scopes = Vec::new();
    walker.visit(decl, &mut scopes);
    walker.refs
}

/// Fields and record components of `decl` and every nested type.
fn collect_fields<'s>(node: Node<'_>, src: &'s [u8], fields: &mut Scope<'s>) {
    match node.kind() {
        "field_declaration" | "constant_declaration" => {
            let ty = declared_type_node(node).and_then(|t| primary_type(t, src));
            for name in declared_names(node, src) {
                fields.insert(name, ty.clone());
            }
            return;
        }
        "record_declaration" => {
            if let Some(params) = node.child_by_field_name("parameters") {
                let mut cursor = params.walk();
                for p in params.named_children(&mut cursor) {
                    let ty = declared_type_node(p).and_then(|t| primary_type(t, src));
                    for name in declared_names(p, src) {
                        fields.insert(name, ty.clone());
                    }
                }
            }
        }
        k if METHOD_LIKE.contains(&k) => return,
        _ => {}
    }
    let mut cursor = node.walk();
    for child in node.named_children(&mut cursor) {
        collect_fields(child, src, fields);
    }
}

/// Locals and parameters declared inside a method body, not descending into
/// nested methods or class bodies.
fn collect_locals<'s>(node: Node<'_>, src: &'s [u8], scope: &mut Scope<'s>, top: bool) {
    if !top && (METHOD_LIKE.contains(&node.kind()) || node.kind() == "class_body") {
        return;
    }
    if let Some(ty) = declared_type_node(node) {
        if node.kind() != "field_declaration" && node.kind() != "constant_declaration" {
            let primary = if node.kind() == "catch_formal_parameter" {
                ty.named_child(0).and_then(|t| primary_type(t, src))
            } else {
                primary_type(ty, src)
            };
            for name in declared_names(node, src) {
                scope.insert(name, primary.clone());
            }
        }
    }
    let mut cursor = node.walk();
    for child in node.named_children(&mut cursor) {
        collect_locals(child, src, scope, false);
    }
}

impl<'s> Walker<'_, '_, 's> {
    fn visit(&mut self, node: Node<'_>, scopes: &mut Vec<Scope<'s>>) {
        let kind = node.kind();
        let pushed = if METHOD_LIKE.contains(&kind) {
            let mut scope = Scope::new();
            collect_locals(node, self.src, &mut scope, true);
            scopes.push(scope);
            true
        } else {
            false
        };

        if TYPE_DECLARATIONS.contains(&kind) {
            self.count_inheritance(node);
        }
        if let Some(ty) = declared_type_node(node) {
            let mut names = Vec::new();
            mentioned_types(ty, self.src, &mut names);
            for name in names {
                if let Some(j) = self.types.resolve(&name) {
                    self.bump_structural(j);
                }
            }
        }
        if kind == "method_invocation" {
            self.count_invocation(node, scopes);
        }

        let mut cursor = node.walk();
        for child in node.named_children(&mut cursor) {
            self.visit(child, scopes);
        }
        if pushed {
            scopes.pop();
        }
    }

    fn bump_structural(&mut self, j: usize) {
        if j != self.me {
            *self.refs.structural.entry(j).or_insert(0) += 1;
        }
    }

    fn count_inheritance(&mut self, decl: Node<'_>) {
        let mut cursor = decl.walk();
        for child in decl.named_children(&mut cursor) {
            let list = match child.kind() {
                "superclass" => Some(child),
                "super_interfaces" | "extends_interfaces" => child.named_child(0),
                _ => None,
            };
            let Some(list) = list else { continue };
            let mut c = list.walk();
            for ty in list.named_children(&mut c) {
                if let Some(j) = primary_type(ty, self.src).and_then(|n| self.types.resolve(&n)) {
                    self.bump_structural(j);
                }
            }
        }
    }

    fn lookup_var(&self, name: &str, scopes: &[Scope<'s>]) -> Option<Option<String>> {
        scopes
            .iter()
            .rev()
            .find_map(|s| s.get(name).cloned())
            .or_else(|| self.fields.get(name).cloned())
    }

    fn count_invocation(&mut self, node: Node<'_>, scopes: &[Scope<'s>]) {
        let Some(name) = node.child_by_field_name("name") else {
            return;
        };
        let method = node_text(name, self.src);
        let target = match node.child_by_field_name("object") {
            None => {
                if self.types.index.declared[self.me].contains(method) {
                    return;
                }
                Receiver::Unknown
            }
            Some(obj) => self.receiver(obj, scopes),
        };
        let resolved = match target {
            Receiver::Typed(Some(j)) => {
                if self.types.index.declared[j].contains(method) {
                    Some(j)
                } else {
                    None
                }
            }
            Receiver::Typed(None) | Receiver::Skip => None,
            Receiver::Unknown => match self.types.index.methods_by_name.get(method).map(Vec::as_slice) {
                Some([only]) => Some(*only),
                _ => None,
            },
        };
        if let Some(j) = resolved.filter(|&j| j != self.me) {
            *self.refs.calls.entry(j).or_insert(0) += 1;
        }
    }

    fn receiver(&self, obj: Node<'_>, scopes: &[Scope<'s>]) -> Receiver {
        match obj.kind() {
            "this" => Receiver::Skip,
            "super" => Receiver::Typed(self.superclass),
            "identifier" => {
                let name = node_text(obj, self.src);
                if let Some(ty) = self.lookup_var(name, scopes) {
                    return Receiver::Typed(ty.and_then(|t| self.types.resolve(&t)));
                }
                if name.starts_with(|c: char| c.is_ascii_uppercase()) {
                    // static call on a class name
                    Receiver::Typed(self.types.resolve(name))
                } else {
                    Receiver::Unknown
                }
            }
            "field_access" => {
                let is_this = obj
                    .child_by_field_name("object")
                    .is_some_and(|o| o.kind() == "this");
                let field = obj.child_by_field_name("field");
                match (is_this, field) {
                    (true, Some(f)) => match self.fields.get(node_text(f, self.src)) {
                        Some(ty) => Receiver::Typed(ty.as_ref().and_then(|t| self.types.resolve(t))),
                        None => Receiver::Unknown,
                    },
                    _ => match self.types.index.by_fqn.get(strip_generics(node_text(obj, self.src)).as_str()) {
                        Some(&j) => Receiver::Typed(Some(j)),
                        None => Receiver::Unknown,
                    },
                }
            }
            "object_creation_expression" => Receiver::Typed(
                obj.child_by_field_name("type")
                    .and_then(|t| primary_type(t, self.src))
                    .and_then(|n| self.types.resolve(&n)),
            ),
            _ => Receiver::Unknown,
        }
    }
}

enum Receiver {
    /// Statically typed receiver; `None` when the type is outside the corpus.
    Typed(Option<usize>),
    /// Receiver type unknown: fall back to a unique method-name match.
    Unknown,
    /// Calls on `this`.
    Skip,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::parser::assign_ids;
    use crate::code_model::{extract_terms, MethodSig, Visibility};

    /// Builds class units directly from single-class sources.
    fn corpus(sources: &[&str]) -> Vec<ClassUnit> {
        let mut parser = java_parser();
        let mut classes = Vec::new();
        for src in sources {
            let tree = parser.parse(src, None).unwrap();
            let root = tree.root_node();
            let mut cursor = root.walk();
            let mut package = String::new();
            for child in root.named_children(&mut cursor) {
                if child.kind() == "package_declaration" {
                    package = node_text(child.named_child(0).unwrap(), src.as_bytes()).into();
                }
                if TYPE_DECLARATIONS.contains(&child.kind()) {
                    let name = node_text(child.child_by_field_name("name").unwrap(), src.as_bytes());
                    let fqn = if package.is_empty() {
                        name.to_string()
                    } else {
                        format!("{package}.{name}")
                    };
                    classes.push(ClassUnit {
                        id: 0,
                        fqn,
                        path: format!("{name}.java"),
                        source: src.to_string(),
                        methods: crate::code_model::parser::declared_methods(
                            child,
                            name,
                            src.as_bytes(),
                        ),
                        terms: extract_terms(src),
                    });
                }
            }
        }
        assign_ids(&mut classes);
        classes
    }

    fn edges(g: &DependencyGraph) -> Vec<(usize, usize, u64)> {
        g.edges().collect()
    }

    #[test]
    fn typed_calls_are_counted() {
        let classes = corpus(&[
            "class A { B b; void run() { b.foo(); b.foo(); } }",
            "class B { void foo() {} }",
        ]);
        let (calls, _) = build_graphs(&classes);
        assert_eq!(edges(&calls), vec![(0, 1, 2)]);
    }

    #[test]
    fn no_cross_class_calls() {
        let classes = corpus(&["class A { void a() { a(); } }", "class B { void b() {} }"]);
        assert_eq!(build_call_graph(&classes).edge_count(), 0);
    }

    #[test]
    fn inheritance_edge() {
        let classes = corpus(&["class A extends B {}", "class B {}"]);
        let (calls, inter) = build_graphs(&classes);
        assert_eq!(calls.edge_count(), 0);
        assert_eq!(edges(&inter), vec![(0, 1, 1)]);
    }

    #[test]
    fn field_reference_plus_call() {
        let classes = corpus(&[
            "class A { B b; void run() { b.foo(); } }",
            "class B { void foo() {} }",
        ]);
        let (calls, inter) = build_graphs(&classes);
        assert_eq!(edges(&calls), vec![(0, 1, 1)]);
        assert_eq!(edges(&inter), vec![(0, 1, 2)]);
    }

    #[test]
    fn isolated_classes() {
        let classes = corpus(&["class A {}", "class B {}"]);
        assert_eq!(build_interaction_graph(&classes).edge_count(), 0);
    }

    #[test]
    fn ambiguous_names_are_dropped_unique_names_resolve() {
        let classes = corpus(&[
            "class A { void run() { make().save(); make().ship(); } Object make() { return null; } }",
            "class B { void save() {} void ship() {} }",
            "class C { void save() {} }",
        ]);
        let calls = build_call_graph(&classes);
        // save() is declared twice, ship() once
        assert_eq!(edges(&calls), vec![(0, 1, 1)]);
    }

    #[test]
    fn receiver_outside_corpus_is_ignored() {
        let classes = corpus(&[
            "class A { void run(String s) { s.ship(); } }",
            "class B { void ship() {} }",
        ]);
        assert_eq!(build_call_graph(&classes).edge_count(), 0);
    }

    #[test]
    fn static_calls_and_constructors_of_receivers() {
        let classes = corpus(&[
            "class A { void run() { B.create(); new B().ship(); } }",
            "class B { static B create() { return null; } void ship() {} }",
        ]);
        assert_eq!(edges(&build_call_graph(&classes)), vec![(0, 1, 2)]);
    }

    #[test]
    fn generic_arguments_count_as_references() {
        let classes = corpus(&[
            "import java.util.List; class A { List<B> items; void add(B[] more) {} }",
            "class B {}",
        ]);
        assert_eq!(edges(&build_interaction_graph(&classes)), vec![(0, 1, 2)]);
    }

    #[test]
    fn imports_disambiguate_simple_names() {
        let classes = corpus(&[
            "package x; import y.Item; class A { Item item; void go() { item.use(); } }",
            "package x; class Item { void use() {} }",
            "package y; public class Item { public void use() {} }",
        ]);
        let calls = build_call_graph(&classes);
        let ids: Vec<_> = classes.iter().map(|c| c.fqn.as_str()).collect();
        assert_eq!(ids, vec!["x.A", "x.Item", "y.Item"]);
        assert_eq!(edges(&calls), vec![(0, 2, 1)]);
    }

    #[test]
    fn method_signature_roundtrip_in_helper() {
        let classes = corpus(&["class A { public int f(String s) { return 0; } }"]);
        assert_eq!(
            classes[0].methods,
            vec![MethodSig {
                name: "f".into(),
                param_types: vec!["String".into()],
                return_type: "int".into(),
                visibility: Visibility::Public
            }]
        );
    }

    #[test]
    fn interaction_weight_dominates_call_weight() {
        let classes = corpus(&[
            "class A extends C { B b; void run(C c) { b.foo(); c.bar(); new B().foo(); } }",
            "class B { void foo() {} }",
            "class C { void bar() {} }",
        ]);
        let (calls, inter) = build_graphs(&classes);
        for i in 0..3 {
            for j in 0..3 {
                assert!(inter.weight(i, j) >= calls.weight(i, j));
            }
        }
    }
}
