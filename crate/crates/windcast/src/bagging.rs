//! Bootstrap-aggregated BPNN ensemble: seeded resampling, independently
//! trained members, and mean-aggregation prediction.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::bpnn::{train, ModelArtifact, NetConfig, NeuralNet};
use crate::error::{Error, Result};
use crate::kv::{parse_kv, KvWriter};
use crate::preprocess::NormStats;
use crate::seeding::{derive_seed, rng_from_seed};

/// Ensemble hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaggingConfig {
    /// Number of member networks.
    pub ensemble_size: usize,
    /// Bootstrap sample size as a fraction of the training set (drawn with
    /// replacement); 1.0 is classic bagging.
    pub bootstrap_fraction: f64,
    pub base: NetConfig,
    pub master_seed: u64,
    /// Train members on a rayon pool. Results are identical either way:
    /// member `i` depends only on its derived seed, and aggregation uses a
    /// fixed ascending-member order.
    pub parallel: bool,
}

impl BaggingConfig {
    pub fn new(base: NetConfig, master_seed: u64) -> Self {
        Self {
            ensemble_size: 10,
            bootstrap_fraction: 1.0,
            base,
            master_seed,
            parallel: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(Error::InvalidConfig("ensemble_size must be >= 1".into()));
        }
        if !(self.bootstrap_fraction > 0.0 && self.bootstrap_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "bootstrap_fraction must be in (0, 1], got {}",
                self.bootstrap_fraction
            )));
        }
        Ok(())
    }
}

/// K trained members plus the seeds that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct BaggedEnsemble {
    pub members: Vec<NeuralNet>,
    pub member_seeds: Vec<u64>,
    pub config: BaggingConfig,
}

/// Draw `n` rows uniformly with replacement using the seeded generator.
pub fn bootstrap_sample(
    inputs: &[Vec<f64>],
    targets: &[f64],
    n: usize,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if inputs.is_empty() || targets.is_empty() {
        return Err(Error::EmptyInput);
    }
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let i = rng.random_range(0..inputs.len());
        xs.push(inputs[i].clone());
        ys.push(targets[i]);
    }
    Ok((xs, ys))
}

fn train_member(
    index: usize,
    config: &BaggingConfig,
    inputs: &[Vec<f64>],
    targets: &[f64],
) -> Result<(u64, NeuralNet)> {
    let member_seed = derive_seed(config.master_seed, index as u64);
    let sample_seed = derive_seed(member_seed, 0);
    let init_seed = derive_seed(member_seed, 1);
    let n = ((inputs.len() as f64 * config.bootstrap_fraction).ceil() as usize).max(1);
    let (xs, ys) = bootstrap_sample(inputs, targets, n, sample_seed)?;
    let net_config = NetConfig {
        seed: init_seed,
        ..config.base
    };
    let net = train(net_config, &xs, &ys).map_err(|e| Error::EnsembleMember {
        member: index,
        source: Box::new(e),
    })?;
    Ok((member_seed, net))
}

/// Train the ensemble. Member `i` is a pure function of
/// `(master_seed, i, base config, training set)`, so the result is
/// bit-identical whether members run sequentially or in parallel.
pub fn train_ensemble(
    config: &BaggingConfig,
    inputs: &[Vec<f64>],
    targets: &[f64],
) -> Result<BaggedEnsemble> {
    config.validate()?;
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let trained: Vec<(u64, NeuralNet)> = if config.parallel {
        (0..config.ensemble_size)
            .into_par_iter()
            .map(|i| train_member(i, config, inputs, targets))
            .collect::<Result<_>>()?
    } else {
        (0..config.ensemble_size)
            .map(|i| train_member(i, config, inputs, targets))
            .collect::<Result<_>>()?
    };
    let (member_seeds, members) = trained.into_iter().unzip();
    Ok(BaggedEnsemble {
        members,
        member_seeds,
        config: *config,
    })
}

/// Mean of the member outputs, summed in ascending member order so the
/// result does not depend on the execution schedule.
pub fn predict(ensemble: &BaggedEnsemble, x: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for net in &ensemble.members {
        let (u, _) = net.forward(x)?;
        sum += u;
    }
    Ok(sum / ensemble.members.len() as f64)
}

const MANIFEST_VERSION: u64 = 1;

/// Serializable description of a persisted ensemble: config, member seeds,
/// and member file names.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleManifest {
    pub version: u64,
    pub ensemble_size: usize,
    pub bootstrap_fraction: f64,
    pub master_seed: u64,
    pub member_seeds: Vec<u64>,
    pub member_files: Vec<String>,
}

impl EnsembleManifest {
    pub fn render(&self) -> String {
        let mut w = KvWriter::new();
        w.pair("ensemble.version", self.version);
        w.pair("ensemble.size", self.ensemble_size);
        w.pair("ensemble.bootstrap_fraction", self.bootstrap_fraction);
        w.pair("ensemble.master_seed", self.master_seed);
        for (i, seed) in self.member_seeds.iter().enumerate() {
            w.pair(&format!("seeds.member_{i}"), seed);
        }
        for (i, file) in self.member_files.iter().enumerate() {
            w.pair(&format!("files.member_{i}"), file);
        }
        w.finish()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let pairs = parse_kv(text).map_err(|e| Error::ManifestFormat(e.to_string()))?;
        let lookup = |key: &str| -> Result<&str> {
            pairs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::ManifestFormat(format!("missing key `{key}`")))
        };
        let parse_num = |key: &str| -> Result<u64> {
            lookup(key)?
                .parse::<u64>()
                .map_err(|_| Error::ManifestFormat(format!("key `{key}` is not an integer")))
        };
        let version = parse_num("ensemble.version")?;
        if version != MANIFEST_VERSION {
            return Err(Error::ManifestFormat(format!(
                "unsupported manifest version {version}"
            )));
        }
        let ensemble_size = parse_num("ensemble.size")? as usize;
        if ensemble_size == 0 || ensemble_size > 1 << 16 {
            return Err(Error::ManifestFormat(format!(
                "ensemble size {ensemble_size} out of range"
            )));
        }
        let bootstrap_fraction = lookup("ensemble.bootstrap_fraction")?
            .parse::<f64>()
            .map_err(|_| Error::ManifestFormat("bootstrap_fraction is not a number".into()))?;
        let master_seed = parse_num("ensemble.master_seed")?;
        let mut member_seeds = Vec::with_capacity(ensemble_size);
        let mut member_files = Vec::with_capacity(ensemble_size);
        for i in 0..ensemble_size {
            member_seeds.push(parse_num(&format!("seeds.member_{i}"))?);
            let file = lookup(&format!("files.member_{i}"))?;
            if file.contains(['/', '\\']) || file == ".." {
                return Err(Error::ManifestFormat(format!(
                    "member file `{file}` must be a bare file name"
                )));
            }
            member_files.push(file.to_string());
        }
        Ok(Self {
            version,
            ensemble_size,
            bootstrap_fraction,
            master_seed,
            member_seeds,
            member_files,
        })
    }
}

/// Write `manifest.txt` plus one model file per member into `dir`.
pub fn save_ensemble(
    dir: &Path,
    ensemble: &BaggedEnsemble,
    input_stats: &NormStats,
    target_stats: &NormStats,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let member_files: Vec<String> = (0..ensemble.members.len())
        .map(|i| format!("member_{i}.model"))
        .collect();
    for (net, file) in ensemble.members.iter().zip(&member_files) {
        let artifact = ModelArtifact {
            net: net.clone(),
            input_stats: input_stats.clone(),
            target_stats: target_stats.clone(),
        };
        artifact.save(&dir.join(file))?;
    }
    let manifest = EnsembleManifest {
        version: MANIFEST_VERSION,
        ensemble_size: ensemble.members.len(),
        bootstrap_fraction: ensemble.config.bootstrap_fraction,
        master_seed: ensemble.config.master_seed,
        member_seeds: ensemble.member_seeds.clone(),
        member_files,
    };
    let path = dir.join("manifest.txt");
    std::fs::write(&path, manifest.render()).map_err(|source| Error::Io { path, source })
}

/// Load a persisted ensemble, validating member count and shared input
/// dimension. Returns the members plus the stats stored with member 0.
pub fn load_ensemble(dir: &Path) -> Result<(BaggedEnsemble, NormStats, NormStats)> {
    let path = dir.join("manifest.txt");
    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io { path, source })?;
    let manifest = EnsembleManifest::parse(&text)?;
    let mut members = Vec::with_capacity(manifest.ensemble_size);
    let mut stats: Option<(NormStats, NormStats)> = None;
    for file in &manifest.member_files {
        let artifact = ModelArtifact::load(&dir.join(file))?;
        if let Some((input_stats, _)) = &stats {
            if artifact.net.config.input_dim != input_stats.n_features() {
                return Err(Error::ManifestFormat(format!(
                    "member `{file}` input dim {} disagrees with {}",
                    artifact.net.config.input_dim,
                    input_stats.n_features()
                )));
            }
        } else {
            stats = Some((artifact.input_stats.clone(), artifact.target_stats.clone()));
        }
        members.push(artifact.net);
    }
    let (input_stats, target_stats) = stats.expect("manifest has at least one member");
    let base = members[0].config;
    let ensemble = BaggedEnsemble {
        member_seeds: manifest.member_seeds.clone(),
        config: BaggingConfig {
            ensemble_size: manifest.ensemble_size,
            bootstrap_fraction: manifest.bootstrap_fraction,
            base,
            master_seed: manifest.master_seed,
            parallel: true,
        },
        members,
    };
    Ok((ensemble, input_stats, target_stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_set(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let inputs: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64]).collect();
        let targets: Vec<f64> = inputs.iter().map(|x| 0.15 + 0.7 * x[0]).collect();
        (inputs, targets)
    }

    fn quick_config(master_seed: u64) -> BaggingConfig {
        BaggingConfig {
            ensemble_size: 3,
            ..BaggingConfig::new(
                NetConfig {
                    max_epochs: 60,
                    ..NetConfig::for_input_dim(1)
                },
                master_seed,
            )
        }
    }

    #[test]
    fn single_row_bootstrap_repeats_that_row() {
        let (xs, ys) = bootstrap_sample(&[vec![1.0, 2.0]], &[0.5], 4, 9).unwrap();
        assert_eq!(xs, vec![vec![1.0, 2.0]; 4]);
        assert_eq!(ys, vec![0.5; 4]);
    }

    #[test]
    fn same_seed_draws_the_same_indices() {
        let (inputs, targets) = toy_set(20);
        let a = bootstrap_sample(&inputs, &targets, 20, 1234).unwrap();
        let b = bootstrap_sample(&inputs, &targets, 20, 1234).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bootstrap_coverage_matches_the_classic_identity() {
        // Expected distinct-row fraction for n = len = 100 draws with
        // replacement: 1 - (1 - 1/100)^100 = 0.63397.
        let (inputs, targets) = toy_set(100);
        let mut total = 0.0;
        let draws = 1000;
        for seed in 0..draws {
            let (xs, _) = bootstrap_sample(&inputs, &targets, 100, seed).unwrap();
            let mut seen: Vec<u64> = xs.iter().map(|x| x[0].to_bits()).collect();
            seen.sort_unstable();
            seen.dedup();
            total += seen.len() as f64 / 100.0;
        }
        let observed = total / draws as f64;
        let expected = 1.0 - (1.0 - 1.0 / 100.0_f64).powi(100);
        assert!(
            (observed - expected).abs() < 0.02,
            "observed {observed}, expected {expected}"
        );
    }

    #[test]
    fn degenerate_single_row_ensemble_equals_the_single_net() {
        // With a 1-row dataset every bootstrap draw is that row, so a K=1
        // ensemble is exactly the one member net.
        let inputs = vec![vec![0.4]];
        let targets = vec![0.6];
        let config = BaggingConfig {
            ensemble_size: 1,
            ..quick_config(5)
        };
        let ensemble = train_ensemble(&config, &inputs, &targets).unwrap();
        let (u, _) = ensemble.members[0].forward(&[0.4]).unwrap();
        assert_eq!(predict(&ensemble, &[0.4]).unwrap(), u);
    }

    #[test]
    fn same_master_seed_is_bit_identical_and_parallelism_neutral() {
        let (inputs, targets) = toy_set(16);
        let mut config = quick_config(42);
        let a = train_ensemble(&config, &inputs, &targets).unwrap();
        let b = train_ensemble(&config, &inputs, &targets).unwrap();
        assert_eq!(a, b);
        config.parallel = false;
        let c = train_ensemble(&config, &inputs, &targets).unwrap();
        assert_eq!(a.members, c.members);
        assert_eq!(a.member_seeds, c.member_seeds);
    }

    #[test]
    fn members_depend_only_on_their_own_seed() {
        let (inputs, targets) = toy_set(16);
        let config = quick_config(7);
        let ensemble = train_ensemble(&config, &inputs, &targets).unwrap();
        for i in 0..config.ensemble_size {
            let (seed, net) = train_member(i, &config, &inputs, &targets).unwrap();
            assert_eq!(seed, ensemble.member_seeds[i]);
            assert_eq!(net, ensemble.members[i]);
        }
    }

    #[test]
    fn predict_is_the_mean_of_member_forwards() {
        let (inputs, targets) = toy_set(16);
        let config = BaggingConfig {
            ensemble_size: 5,
            ..quick_config(11)
        };
        let ensemble = train_ensemble(&config, &inputs, &targets).unwrap();
        let probe = [0.37];
        let by_hand: f64 = ensemble
            .members
            .iter()
            .map(|m| m.forward(&probe).unwrap().0)
            .sum::<f64>()
            / 5.0;
        let got = predict(&ensemble, &probe).unwrap();
        assert!((got - by_hand).abs() < 1e-15);
    }

    #[test]
    fn predict_is_invariant_under_member_permutation() {
        let (inputs, targets) = toy_set(16);
        let ensemble = train_ensemble(&quick_config(3), &inputs, &targets).unwrap();
        let mut shuffled = ensemble.clone();
        shuffled.members.rotate_left(1);
        let probe = [0.7];
        let a = predict(&ensemble, &probe).unwrap();
        let b = predict(&shuffled, &probe).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let (inputs, targets) = toy_set(4);
        let mut config = quick_config(1);
        config.ensemble_size = 0;
        assert!(train_ensemble(&config, &inputs, &targets).is_err());
        let mut config = quick_config(1);
        config.bootstrap_fraction = 0.0;
        assert!(train_ensemble(&config, &inputs, &targets).is_err());
    }

    #[test]
    fn manifest_round_trips_and_validates() {
        let manifest = EnsembleManifest {
            version: 1,
            ensemble_size: 2,
            bootstrap_fraction: 1.0,
            master_seed: 77,
            member_seeds: vec![11, 22],
            member_files: vec!["member_0.model".into(), "member_1.model".into()],
        };
        let text = manifest.render();
        assert_eq!(EnsembleManifest::parse(&text).unwrap(), manifest);
        assert!(EnsembleManifest::parse("garbage").is_err());
        assert!(EnsembleManifest::parse("[ensemble]\nversion = 9\n").is_err());
    }

    #[test]
    fn ensemble_survives_a_disk_round_trip() {
        let (inputs, targets) = toy_set(12);
        let ensemble = train_ensemble(&quick_config(13), &inputs, &targets).unwrap();
        let input_stats = crate::preprocess::fit_norm(&inputs).unwrap();
        let target_stats = crate::preprocess::fit_norm_column(&targets, 0.1, 0.9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_ensemble(dir.path(), &ensemble, &input_stats, &target_stats).unwrap();
        let (loaded, in_stats, t_stats) = load_ensemble(dir.path()).unwrap();
        // Persistence drops the training curve; everything else survives.
        for (got, want) in loaded.members.iter().zip(&ensemble.members) {
            assert_eq!(got.w, want.w);
            assert_eq!(got.hidden_bias, want.hidden_bias);
            assert_eq!(got.v, want.v);
            assert_eq!(got.output_bias, want.output_bias);
            assert_eq!(got.config, want.config);
        }
        assert_eq!(loaded.member_seeds, ensemble.member_seeds);
        assert_eq!(in_stats, input_stats);
        assert_eq!(t_stats, target_stats);
        let probe = [0.3];
        assert_eq!(
            predict(&loaded, &probe).unwrap(),
            predict(&ensemble, &probe).unwrap()
        );
    }
}
