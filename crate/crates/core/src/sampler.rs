//! Seeded ancestral sampling.
//!
//! Record `i` is drawn from its own ChaCha20 stream: the generator is seeded
//! with `seed_from_u64(seed)` and switched to stream `i`. Variables are
//! visited in topological order (ties by declaration order); each draws one
//! uniform `f64` in [0, 1) and takes the first state whose cumulative
//! probability exceeds it. Output therefore depends only on the network,
//! the seed and the record index.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::learning::{export_csv, Column, ColumnKind, Dataset};
use crate::network::{Evidence, Network};

pub const GENERATOR: &str = "chacha20/seed_from_u64/stream-per-record";

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl SamplerError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ZeroCount => "ZeroCount",
            Self::UnknownColumn(_) => "UnknownColumn",
            Self::Io(_) => "IoError",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRequest {
    pub count: usize,
    pub seed: u64,
    /// Variables to emit, in order; all variables when `None`.
    #[serde(default)]
    pub columns: Option<Vec<String>>,
}

impl SampleRequest {
    pub fn new(count: usize, seed: u64) -> Self {
        Self { count, seed, columns: None }
    }
}

/// Sidecar written next to every exported sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator: String,
    pub network_sha256: String,
    pub seed: u64,
    pub count: usize,
    pub columns: Vec<String>,
}

/// SHA-256 of the network's canonical JSON document.
pub fn network_hash(network: &Network) -> String {
    hex::encode(Sha256::digest(network.to_json_pretty().as_bytes()))
}

/// States of every variable for record `index`.
pub fn draw_record(network: &Network, seed: u64, index: u64) -> Vec<usize> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut ev = Evidence::empty(network.len());
    for &v in network.topological_order() {
        let cpt = network.cpt(v);
        let row = cpt.row_for(&ev).expect("parents precede children");
        let u: f64 = rng.gen();
        let probs = cpt.row(row);
        let mut acc = 0.0;
        let mut state = probs.len() - 1;
        for (s, p) in probs.iter().enumerate() {
            acc += p;
            if acc > u {
                state = s;
                break;
            }
        }
        // rounding can leave the cumulative sum just short of 1
        while probs[state] == 0.0 && state > 0 {
            state -= 1;
        }
        ev.set(v, state);
    }
    (0..network.len()).map(|v| ev.get(v).expect("all sampled")).collect()
}

pub fn sample(network: &Network, req: &SampleRequest) -> Result<Dataset, SamplerError> {
    if req.count == 0 {
        return Err(SamplerError::ZeroCount);
    }
    let vars: Vec<usize> = match &req.columns {
        None => (0..network.len()).collect(),
        Some(cols) => cols
            .iter()
            .map(|c| network.index_of(c).ok_or_else(|| SamplerError::UnknownColumn(c.clone())))
            .collect::<Result<_, _>>()?,
    };
    let columns = vars
        .iter()
        .map(|&v| Column { name: network.variable(v).name.clone(), kind: ColumnKind::Categorical })
        .collect();
    let records = (0..req.count as u64)
        .map(|i| {
            let states = draw_record(network, req.seed, i);
            vars.iter().map(|&v| network.variable(v).states[states[v]].clone()).collect()
        })
        .collect();
    Ok(Dataset::new(columns, records))
}

pub fn manifest(network: &Network, req: &SampleRequest, data: &Dataset) -> Manifest {
    Manifest {
        generator: GENERATOR.to_string(),
        network_sha256: network_hash(network),
        seed: req.seed,
        count: req.count,
        columns: data.columns().iter().map(|c| c.name.clone()).collect(),
    }
}

/// Path of the manifest that accompanies `csv_path`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    csv_path.with_file_name(name)
}

/// Samples, writes the CSV to `path` and the manifest beside it.
pub fn export_sample(network: &Network, req: &SampleRequest, path: impl AsRef<Path>) -> Result<Manifest, SamplerError> {
    let path = path.as_ref();
    let data = sample(network, req)?;
    export_csv(&data, path).map_err(|e| SamplerError::Io(e.to_string()))?;
    let m = manifest(network, req, &data);
    let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    fs::write(manifest_path(path), text + "\n").map_err(|e| SamplerError::Io(e.to_string()))?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkDoc;

    fn coin(p: f64) -> Network {
        Network::from_doc(&NetworkDoc::new().variable("A", ["0", "1"]).cpt("A", &[&[1.0 - p, p]])).unwrap()
    }

    #[test]
    fn deterministic_cpt() {
        let d = sample(&coin(1.0), &SampleRequest::new(5, 0)).unwrap();
        assert!(d.records().iter().all(|r| r[0] == "1"));
        let d = sample(&coin(0.0), &SampleRequest::new(5, 0)).unwrap();
        assert!(d.records().iter().all(|r| r[0] == "0"));
    }

    #[test]
    fn same_seed_same_records() {
        let net = coin(0.3);
        let a = sample(&net, &SampleRequest::new(200, 9)).unwrap();
        let b = sample(&net, &SampleRequest::new(200, 9)).unwrap();
        let c = sample(&net, &SampleRequest::new(200, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.records(), c.records());
        // a longer run extends a shorter one
        let longer = sample(&net, &SampleRequest::new(300, 9)).unwrap();
        assert_eq!(&longer.records()[..200], a.records());
    }

    #[test]
    fn zero_count_is_rejected() {
        assert!(matches!(sample(&coin(0.5), &SampleRequest::new(0, 1)), Err(SamplerError::ZeroCount)));
    }

    #[test]
    fn export_writes_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let net = coin(0.5);
        let m = export_sample(&net, &SampleRequest::new(3, 4), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);
        let back: Manifest = serde_json::from_str(&std::fs::read_to_string(manifest_path(&path)).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.network_sha256.len(), 64);
    }
}
