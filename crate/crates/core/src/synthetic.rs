//! Seeded synthetic data used by tests, the acceptance suite and the CLI
//! fixtures: Gaussian blobs and template-heavy labelled corpora.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::code_model::{assign_ids, extract_terms, ClassUnit, LabeledCorpus};

/// Blob centres; pairwise distances are all at least 6.
pub const BLOB_CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [6.0, 0.0], [3.0, 6.0]];

/// `per_blob` points around each of [`BLOB_CENTERS`] with isotropic noise
/// `sigma`. Returns rows and their blob index, blob by blob.
pub fn gaussian_blobs(per_blob: usize, sigma: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    let mut rows = Vec::with_capacity(per_blob * BLOB_CENTERS.len());
    let mut labels = Vec::with_capacity(rows.capacity());
    for (b, center) in BLOB_CENTERS.iter().enumerate() {
        for _ in 0..per_blob {
            rows.push(center.iter().map(|c| c + noise.sample(&mut rng)).collect());
            labels.push(b);
        }
    }
    (rows, labels)
}

fn class_unit(fqn: &str, source: String) -> ClassUnit {
    ClassUnit {
        id: 0,
        fqn: fqn.to_string(),
        path: format!("{}.java", fqn.replace('.', "/")),
        terms: extract_terms(&source),
        source,
        methods: Vec::new(),
    }
}

fn finish(app: &str, mut classes: Vec<ClassUnit>, label_of: impl Fn(&str) -> String) -> LabeledCorpus {
    assign_ids(&mut classes);
    let labels = classes.iter().map(|c| label_of(&c.fqn)).collect();
    let mut corpus = LabeledCorpus::from_classes(app, classes);
    corpus.labels = Some(labels);
    corpus
}

/// A labelled corpus of empty classes, given as `(service, [fqn, ...])`.
pub fn labelled_corpus(app: &str, services: &[(&str, &[&str])]) -> LabeledCorpus {
    let mut classes = Vec::new();
    let mut owner = std::collections::HashMap::new();
    for (service, fqns) in services {
        for fqn in *fqns {
            let simple = fqn.rsplit('.').next().unwrap_or(fqn);
            classes.push(class_unit(fqn, format!("class {simple} {{}}\n")));
            owner.insert(fqn.to_string(), service.to_string());
        }
    }
    finish(app, classes, |fqn| owner[fqn].clone())
}

const ROLES: [&str; 4] = ["Controller", "Service", "Repository", "Mapper"];

const DOMAINS: [[&str; 4]; 2] = [
    ["Cart", "Order", "Basket", "Checkout"],
    ["Invoice", "Payment", "Billing", "Refund"],
];

/// Two services whose classes share identical syntactic templates and differ
/// only in their domain words. Role words dominate the raw term counts, so
/// same-role classes of different services look alike to plain TF-IDF.
pub fn template_corpus(app: &str, per_service: usize, seed: u64) -> LabeledCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes = Vec::new();
    let mut owner = std::collections::HashMap::new();
    for (s, pool) in DOMAINS.iter().enumerate() {
        let mut combos: Vec<(&str, &str)> = pool
            .iter()
            .flat_map(|d| ROLES.iter().map(move |r| (*d, *r)))
            .collect();
        combos.shuffle(&mut rng);
        for (domain, role) in combos.into_iter().take(per_service.min(16)) {
            let name = format!("{domain}{role}");
            let lower = domain.to_ascii_lowercase();
            let source = format!(
                "class {name} {{\n    {role}Helper first;\n    {role}Helper second;\n    {role}Helper third;\n    String {lower}Key;\n}}\n"
            );
            let fqn = format!("app.{name}");
            owner.insert(fqn.clone(), format!("service{s}"));
            classes.push(class_unit(&fqn, source));
        }
    }
    finish(app, classes, |fqn| owner[fqn].clone())
}
