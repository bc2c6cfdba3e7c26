//! Identifier tokenization for the semantic (bag-of-words / TF-IDF) features.
//!
//! Word lists are fixed and versioned; bump [`TERM_RULES_VERSION`] whenever
//! any of them or the splitting rules change.

use std::collections::BTreeMap;

use tree_sitter::Node;

use super::parser::{java_parser, node_text};

pub const TERM_RULES_VERSION: &str = "terms-v1";

/// Multiset of lowercase terms. Sorted so serializations are stable.
pub type TermBag = BTreeMap<String, u32>;

pub const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "false", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "null", "package", "private", "protected", "public", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "true", "try", "void", "volatile", "while",
];

pub const ENGLISH_STOPWORDS: &[&str] = &[
    "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as",
    "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
    "can", "did", "do", "does", "doing", "don", "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "if", "in", "into", "is", "it", "its", "itself", "just", "me",
    "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only",
    "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should",
    "so", "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "you", "your", "yours", "yourself", "yourselves",
];

/// Accessor/plumbing words; only dropped when [`TermFilter::drop_accessor_words`] is set.
pub const ACCESSOR_WORDS: &[&str] = &["get", "set", "impl", "util"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TermFilter {
    pub drop_accessor_words: bool,
}

impl TermFilter {
    pub fn keeps(&self, token: &str) -> bool {
        token.len() >= 2
            && token.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
            && JAVA_KEYWORDS.binary_search(&token).is_err()
            && ENGLISH_STOPWORDS.binary_search(&token).is_err()
            && !(self.drop_accessor_words && ACCESSOR_WORDS.contains(&token))
    }
}

/// Splits an identifier or free text into raw lowercase word pieces.
///
/// Non-alphanumeric ASCII characters (and any non-ASCII character) separate
/// pieces; digit runs become their own pieces; letter runs are split at
/// camelCase boundaries, keeping acronyms together (`HTTPResponse` gives
/// `http`, `response`).
pub fn split_identifier(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            split_camel(&chars[start..i], &mut out);
        } else {
            i += 1;
        }
    }
    out
}

fn split_camel(run: &[char], out: &mut Vec<String>) {
    let mut start = 0;
    for k in 1..run.len() {
        let prev = run[k - 1];
        let cur = run[k];
        let boundary = (prev.is_ascii_lowercase() && cur.is_ascii_uppercase())
            || (prev.is_ascii_uppercase()
                && cur.is_ascii_uppercase()
                && run.get(k + 1).is_some_and(|n| n.is_ascii_lowercase()));
        if boundary {
            out.push(run[start..k].iter().collect::<String>().to_ascii_lowercase());
            start = k;
        }
    }
    out.push(run[start..].iter().collect::<String>().to_ascii_lowercase());
}

/// Filtered terms of a single identifier, in order of appearance.
pub fn identifier_terms(identifier: &str, filter: TermFilter) -> Vec<String> {
    split_identifier(identifier)
        .into_iter()
        .filter(|t| filter.keeps(t))
        .collect()
}

/// Term multiset of a Java source fragment.
///
/// When the fragment parses, terms come from identifiers, type names and
/// string literals outside package/import declarations. Otherwise the raw
/// text is split as-is.
pub fn extract_terms(source: &str) -> TermBag {
    extract_terms_with(source, TermFilter::default())
}

pub fn extract_terms_with(source: &str, filter: TermFilter) -> TermBag {
    let mut parser = java_parser();
    match parser.parse(source, None) {
        Some(tree) if !tree.root_node().has_error() => {
            let mut bag = TermBag::new();
            collect_tree_terms(tree.root_node(), source.as_bytes(), filter, &mut bag);
            bag
        }
        _ => raw_text_terms(source, filter),
    }
}

pub fn raw_text_terms(text: &str, filter: TermFilter) -> TermBag {
    let mut bag = TermBag::new();
    add_terms(text, filter, &mut bag);
    bag
}

pub(crate) fn collect_tree_terms(node: Node<'_>, src: &[u8], filter: TermFilter, bag: &mut TermBag) {
    match node.kind() {
        "package_declaration" | "import_declaration" | "line_comment" | "block_comment" => {}
        "identifier" | "type_identifier" | "string_fragment" => {
            add_terms(node_text(node, src), filter, bag);
        }
        _ => {
            let mut cursor = node.walk();
            for child in node.children(&mut cursor) {
                collect_tree_terms(child, src, filter, bag);
            }
        }
    }
}

fn add_terms(text: &str, filter: TermFilter, bag: &mut TermBag) {
    for token in split_identifier(text) {
        if filter.keeps(&token) {
            *bag.entry(token).or_insert(0) += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(pairs: &[(&str, u32)]) -> TermBag {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn word_lists_are_sorted_for_binary_search() {
        assert!(JAVA_KEYWORDS.windows(2).all(|w| w[0] < w[1]));
        assert!(ENGLISH_STOPWORDS.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn pet_owner_declaration() {
        let terms = extract_terms("class PetOwner { String firstName; }");
        assert_eq!(
            terms,
            bag(&[("first", 1), ("name", 1), ("owner", 1), ("pet", 1), ("string", 1)])
        );
    }

    #[test]
    fn everything_filtered() {
        assert!(extract_terms("class A { int x; }").is_empty());
    }

    #[test]
    fn acronym_aware_split() {
        let terms = extract_terms("getHTTPResponse");
        assert_eq!(terms, bag(&[("get", 1), ("http", 1), ("response", 1)]));
    }

    #[test]
    fn snake_case_and_digits() {
        assert_eq!(
            split_identifier("MAX_retry2Count"),
            vec!["max", "retry", "2", "count"]
        );
        assert_eq!(split_identifier("oauth2Token404"), vec!["oauth", "2", "token", "404"]);
    }

    #[test]
    fn string_literals_contribute_terms() {
        let terms = extract_terms(r#"class Greeter { String s = "Hello visitors"; }"#);
        assert_eq!(terms.get("hello"), Some(&1));
        assert_eq!(terms.get("visitors"), Some(&1));
        assert_eq!(terms.get("greeter"), Some(&1));
    }

    #[test]
    fn imports_and_comments_are_ignored() {
        let terms = extract_terms(
            "package com.acme.billing;\nimport java.util.List;\n// invoice stuff\nclass Ledger {}",
        );
        assert_eq!(terms, bag(&[("ledger", 1)]));
    }

    #[test]
    fn accessor_words_are_kept_by_default() {
        assert_eq!(identifier_terms("getOwner", TermFilter::default()), vec!["get", "owner"]);
        let strict = TermFilter {
            drop_accessor_words: true,
        };
        assert_eq!(identifier_terms("getOwnerImpl", strict), vec!["owner"]);
    }

    #[test]
    fn multiplicities_are_preserved() {
        let terms = extract_terms("class Pet { Pet pet; Pet other(Pet p) { return p; } }");
        assert_eq!(terms.get("pet"), Some(&5));
        // `other` is an English stopword
        assert_eq!(terms.get("other"), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn every_term_is_sound(text in "[ -~]{0,80}") {
                for (term, count) in raw_text_terms(&text, TermFilter::default()) {
                    prop_assert!(count >= 1);
                    prop_assert!(term.len() >= 2);
                    prop_assert!(term.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()));
                    prop_assert!(!JAVA_KEYWORDS.contains(&term.as_str()));
                    prop_assert!(!ENGLISH_STOPWORDS.contains(&term.as_str()));
                }
            }
        }
    }
}
