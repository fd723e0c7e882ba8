//! Reproducible corpora of graph instances.
//!
//! Randomness comes from one ChaCha8 stream seeded with a single `u64`
//! (`ChaCha8Rng::seed_from_u64`), consumed in a fixed order: sizes
//! ascending, then edge probabilities in the given order, then samples,
//! then vertex pairs in lexicographic order.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json::{canonical, function_to_json};
use crate::triangle::{graph_domain, triangle_function, GraphInstance, GraphInstanceJson};

pub const GENERATOR: &str = "ChaCha8Rng::seed_from_u64";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub seed: u64,
    /// Every graph on `n` vertices is included for `n` up to this bound.
    pub exhaustive_max: usize,
    /// Vertex counts for the random `G(n,p)` samples.
    pub random_sizes: Vec<usize>,
    pub probabilities: Vec<f64>,
    /// Samples per `(n, p)`.
    pub samples: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            exhaustive_max: 4,
            random_sizes: (5..=10).collect(),
            probabilities: vec![0.3, 0.5],
            samples: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub graph: GraphInstance,
    /// Edge probability, for random samples.
    pub p: Option<f64>,
}

impl CorpusEntry {
    fn summary(&self) -> Value {
        json!({
            "name": self.name,
            "n": self.graph.n(),
            "m": self.graph.m(),
            "d2": self.graph.d2(),
            "p": self.p,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub config: CorpusConfig,
    pub entries: Vec<CorpusEntry>,
}

/// `count` samples of `G(n,p)` drawn from `rng`.
pub fn sample_gnp<R: Rng>(rng: &mut R, n: usize, p: f64, count: usize) -> Result<Vec<GraphInstance>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameters(format!(
            "edge probability {p} is outside [0, 1]"
        )));
    }
    (0..count)
        .map(|_| {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            GraphInstance::from_edges(n, &edges)
        })
        .collect()
}

pub fn generate(config: &CorpusConfig) -> Result<Corpus> {
    let mut entries = Vec::new();
    for n in 1..=config.exhaustive_max {
        for (k, z) in graph_domain(n)?.iter().enumerate() {
            entries.push(CorpusEntry {
                name: format!("all-n{n}-{k:04}"),
                graph: GraphInstance::from_bits(n, z)?,
                p: None,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sizes = config.random_sizes.clone();
    sizes.sort_unstable();
    for &n in &sizes {
        for &p in &config.probabilities {
            for (k, g) in sample_gnp(&mut rng, n, p, config.samples)?.into_iter().enumerate() {
                entries.push(CorpusEntry {
                    name: format!("gnp-n{n}-p{p}-{k:04}"),
                    graph: g,
                    p: Some(p),
                });
            }
        }
    }
    Ok(Corpus {
        config: config.clone(),
        entries,
    })
}

impl Corpus {
    pub fn manifest(&self) -> Value {
        json!({
            "generator": GENERATOR,
            "config": self.config,
            "entries": self.entries.iter().map(CorpusEntry::summary).collect::<Vec<_>>(),
        })
    }

    /// Writes `manifest.json`, one file per instance under `graphs/`, and
    /// the `Triangle` truth tables for `3 ≤ n ≤ exhaustive_max` under
    /// `functions/`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Malformed(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir.join("graphs")).map_err(io)?;
        fs::create_dir_all(dir.join("functions")).map_err(io)?;
        fs::write(dir.join("manifest.json"), canonical(&self.manifest())).map_err(io)?;
        for e in &self.entries {
            let v = serde_json::to_value(GraphInstanceJson::from_instance(&e.graph))?;
            fs::write(dir.join("graphs").join(format!("{}.json", e.name)), canonical(&v)).map_err(io)?;
        }
        for n in 3..=self.config.exhaustive_max.min(crate::triangle::MAX_EXPLICIT_N) {
            let f = function_to_json(&triangle_function(n)?);
            fs::write(dir.join("functions").join(format!("triangle-n{n}.json")), canonical(&f)).map_err(io)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_slice_sizes() {
        let c = generate(&CorpusConfig {
            random_sizes: vec![],
            ..Default::default()
        })
        .unwrap();
        let n4 = c.entries.iter().filter(|e| e.graph.n() == 4).count();
        assert_eq!(n4, 64);
        assert_eq!(c.entries.len(), 1 + 2 + 8 + 64);
    }

    #[test]
    fn same_seed_same_corpus() {
        let cfg = CorpusConfig::default();
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = generate(&CorpusConfig { seed: 1, ..cfg.clone() }).unwrap();
        assert_ne!(other, generate(&cfg).unwrap());
    }

    #[test]
    fn gnp_statistics_are_plausible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let gs = sample_gnp(&mut rng, 8, 0.3, 50).unwrap();
        assert_eq!(gs.len(), 50);
        let mean = gs.iter().map(|g| g.m() as f64).sum::<f64>() / 50.0;
        // 28 pairs × 0.3 = 8.4 expected edges; the sample mean has sd ≈ 0.34.
        assert!((mean - 8.4).abs() < 2.0, "mean edge count {mean}");
        assert!(sample_gnp(&mut rng, 3, 1.5, 1).is_err());
    }
}
