//! Mining microservice repositories into labelled corpora and sampling
//! contrastive triplets from them.

mod analyze;
mod discover;
mod mine;
mod sampler;

pub use analyze::{analyze_repo, find_service_roots, Rejection, RepoAnalysis, ServiceRoot};
pub use discover::{
    default_queries, discover_repos, repo_name_from_url, repo_pattern, FixtureSearchClient,
    GithubClient, RepoCandidate, SearchClient, SearchItem, SearchPage, DEFAULT_API_BASE,
    DEFAULT_MIN_STARS, REPO_PATTERN, TOKEN_ENV,
};
pub use mine::{fetch_repo, mine_repos, MineOutcome, RepoSource};
pub use sampler::{
    read_triplets, sample_triplets, write_triplets, SamplerConfig, Triplet, TRIPLETS_FORMAT,
};
