//! Random test instances: a shuffled cycle through every node (so the graph
//! can always survive one node loss) plus random chords up to the requested
//! average degree. Everything flows from one u64 seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Stamped into experiment artifacts so results name their randomness.
pub const PRNG_ALGORITHM: &str = "chacha12";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub n: usize,
    pub avg_degree: f64,
    /// Inclusive integer weight range; weights stay integers so cost
    /// comparisons in tests are exact.
    pub weight_range: (u64, u64),
    pub seed: u64,
}

impl GenConfig {
    pub fn new(n: usize, avg_degree: f64, seed: u64) -> Self {
        Self {
            n,
            avg_degree,
            weight_range: (100, 1000),
            seed,
        }
    }

    /// Edge count giving the requested average degree, rounded up.
    pub fn target_edges(&self) -> usize {
        ((self.n as f64 * self.avg_degree) / 2.0).ceil() as usize
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidConfig(format!(
                "need at least 3 nodes, requested {}",
                self.n
            )));
        }
        if !self.avg_degree.is_finite() || self.avg_degree < 2.0 {
            return Err(Error::InvalidConfig(format!(
                "average degree {} below 2, a single node loss could cut the graph",
                self.avg_degree
            )));
        }
        let (lo, hi) = self.weight_range;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidConfig(format!(
                "weight range [{lo}, {hi}] must be non-empty and positive"
            )));
        }
        let max = self.n * (self.n - 1) / 2;
        if self.target_edges() > max {
            return Err(Error::DegreeInfeasible {
                n: self.n,
                m: self.target_edges(),
                max,
            });
        }
        Ok(())
    }
}

/// Deterministic in the seed: same config, same graph, byte for byte.
pub fn generate(cfg: &GenConfig) -> Result<WeightedGraph> {
    cfg.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = cfg.weight_range;
    let n = cfg.n;

    let mut ring: Vec<usize> = (0..n).collect();
    ring.shuffle(&mut rng);
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(cfg.target_edges());
    for i in 0..n {
        let u = ring[i];
        let v = ring[(i + 1) % n];
        seen.insert((u.min(v), u.max(v)));
        edges.push((u, v, rng.gen_range(lo..=hi) as f64));
    }
    while edges.len() < cfg.target_edges() {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v || !seen.insert((u.min(v), u.max(v))) {
            continue;
        }
        edges.push((u, v, rng.gen_range(lo..=hi) as f64));
    }
    WeightedGraph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{is_biconnected, save_graph};

    #[test]
    fn same_seed_same_graph() {
        let cfg = GenConfig::new(40, 6.0, 9001);
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(save_graph(&a, 0), save_graph(&b, 0));
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate(&GenConfig::new(40, 6.0, 1)).unwrap();
        let b = generate(&GenConfig::new(40, 6.0, 2)).unwrap();
        assert_ne!(save_graph(&a, 0), save_graph(&b, 0));
    }

    #[test]
    fn hits_the_requested_size() {
        let cfg = GenConfig::new(101, 7.0, 3);
        let g = generate(&cfg).unwrap();
        assert_eq!(g.node_count(), 101);
        assert_eq!(g.edge_count(), cfg.target_edges());
        assert_eq!(g.edge_count(), 354); // ceil(101 * 7 / 2)
    }

    #[test]
    fn survives_any_single_loss() {
        for seed in 0..30 {
            let g = generate(&GenConfig::new(24, 3.0, seed)).unwrap();
            assert!(is_biconnected(&g).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn weights_stay_in_range_and_integral() {
        let cfg = GenConfig {
            weight_range: (5, 9),
            ..GenConfig::new(30, 4.0, 77)
        };
        let g = generate(&cfg).unwrap();
        for e in g.edges() {
            assert!(e.cost >= 5.0 && e.cost <= 9.0);
            assert_eq!(e.cost.fract(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(generate(&GenConfig::new(2, 2.0, 0)).is_err());
        assert!(generate(&GenConfig::new(10, 1.5, 0)).is_err());
        assert!(matches!(
            generate(&GenConfig::new(10, 20.0, 0)),
            Err(Error::DegreeInfeasible { .. })
        ));
        let zero_weight = GenConfig {
            weight_range: (0, 5),
            ..GenConfig::new(10, 3.0, 0)
        };
        assert!(generate(&zero_weight).is_err());
    }
}
