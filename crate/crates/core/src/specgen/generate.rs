use std::collections::HashSet;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SpecGenError;
use crate::pattern::Alphabet;
use crate::policy::Request;

/// S3 operations concrete requests are drawn from.
pub const S3_ACTIONS: [&str; 7] = [
    "s3:GetObject",
    "s3:PutObject",
    "s3:DeleteObject",
    "s3:ListBucket",
    "s3:GetObjectAcl",
    "s3:PutObjectAcl",
    "s3:GetObjectVersion",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub allowed_min: usize,
    pub allowed_max: usize,
    pub denied_min: usize,
    pub denied_max: usize,
    /// Number of directory segments between bucket and file name.
    pub depth_min: usize,
    pub depth_max: usize,
    pub principals: Vec<String>,
    pub buckets: Vec<String>,
    pub directories: Vec<String>,
    pub files: Vec<String>,
}

impl Default for GenParams {
    fn default() -> Self {
        let owned = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Self {
            allowed_min: 30,
            allowed_max: 150,
            denied_min: 5,
            denied_max: 20,
            depth_min: 1,
            depth_max: 4,
            principals: owned(&["alice", "bob", "carol", "dave", "erin", "frank"]),
            buckets: owned(&["mybucket", "public-bucket", "data-lake", "app-logs"]),
            directories: owned(&[
                "backups", "data", "images", "reports", "logs", "archive", "tmp", "uploads",
            ]),
            files: (0..20)
                .map(|i| format!("file{i}.txt"))
                .chain(["report.csv", "photo.jpg", "index.html", "config.json"].map(String::from))
                .collect(),
        }
    }
}

impl GenParams {
    pub fn with_depth(mut self, depth: RangeInclusive<usize>) -> Self {
        self.depth_min = *depth.start();
        self.depth_max = *depth.end();
        self
    }

    pub fn validate(&self) -> Result<(), SpecGenError> {
        let bad = |m: String| Err(SpecGenError::ParamOutOfRange(m));
        if self.allowed_min == 0 || self.allowed_min > self.allowed_max {
            return bad(format!(
                "allowed range {}..={} must be non-empty and start at 1 or more",
                self.allowed_min, self.allowed_max
            ));
        }
        if self.denied_min > self.denied_max {
            return bad(format!(
                "denied range {}..={} is empty",
                self.denied_min, self.denied_max
            ));
        }
        if self.depth_min == 0 || self.depth_min > self.depth_max {
            return bad(format!(
                "depth range {}..={} must be non-empty and start at 1 or more",
                self.depth_min, self.depth_max
            ));
        }
        let alphabet = Alphabet::iam_default();
        for (name, pool) in [
            ("principals", &self.principals),
            ("buckets", &self.buckets),
            ("directories", &self.directories),
            ("files", &self.files),
        ] {
            if pool.is_empty() {
                return bad(format!("{name} pool is empty"));
            }
            for item in pool {
                if item.is_empty()
                    || item.contains(['*', '?', '/'])
                    || alphabet.check_literals(item).is_err()
                {
                    return bad(format!(
                        "{name} entry {item:?} is not a plain name over the request alphabet"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Seeded concrete-request specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestSpec {
    pub seed: u64,
    pub params: GenParams,
    pub allowed: Vec<Request>,
    pub denied: Vec<Request>,
}

impl RequestSpec {
    pub fn id(&self) -> String {
        format!("spec-{}", self.seed)
    }

    pub fn total(&self) -> usize {
        self.allowed.len() + self.denied.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("request spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn draw(rng: &mut ChaCha8Rng, p: &GenParams) -> Request {
    let principal = p.principals.choose(rng).expect("non-empty pool").clone();
    let action = S3_ACTIONS.choose(rng).expect("non-empty list").to_string();
    let depth = rng.gen_range(p.depth_min..=p.depth_max);
    let mut resource = p.buckets.choose(rng).expect("non-empty pool").clone();
    for _ in 0..depth {
        resource.push('/');
        resource.push_str(p.directories.choose(rng).expect("non-empty pool"));
    }
    resource.push('/');
    resource.push_str(p.files.choose(rng).expect("non-empty pool"));
    Request {
        principal,
        action,
        resource,
    }
}

/// Deterministic for a given `(seed, params)`; ChaCha8 keeps the stream
/// identical across platforms. Duplicates and allowed/denied collisions are
/// resampled.
pub fn generate_request_spec(seed: u64, params: &GenParams) -> Result<RequestSpec, SpecGenError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_allowed = rng.gen_range(params.allowed_min..=params.allowed_max);
    let n_denied = rng.gen_range(params.denied_min..=params.denied_max);

    let budget = 100 * (n_allowed + n_denied) + 1000;
    let mut attempts = 0;
    let mut seen = HashSet::new();
    let mut allowed = Vec::with_capacity(n_allowed);
    let mut denied = Vec::with_capacity(n_denied);
    while allowed.len() < n_allowed || denied.len() < n_denied {
        attempts += 1;
        if attempts > budget {
            return Err(SpecGenError::ParamOutOfRange(format!(
                "pools too small to draw {n_allowed} allowed and {n_denied} denied distinct requests"
            )));
        }
        let r = draw(&mut rng, params);
        if !seen.insert(r.clone()) {
            continue;
        }
        if allowed.len() < n_allowed {
            allowed.push(r);
        } else {
            denied.push(r);
        }
    }
    Ok(RequestSpec {
        seed,
        params: params.clone(),
        allowed,
        denied,
    })
}
