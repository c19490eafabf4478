use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::mps::AmplitudeVector;
use crate::report::format_sig;

pub const MIN_QUBITS: usize = 2;
pub const MAX_QUBITS: usize = 20;

/// Lower end of the sparsity range drawn by the sparse corpus.
pub const SPARSE_CORPUS_MIN_SPARSITY: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetKind {
    /// Gaussian density on grid points `x_i = i + 1/2`.
    Normal { mean: f64, std: f64 },
    /// Log-normal density with shape `sigma` and scale `exp(mu)`.
    Lognormal { shape: f64, scale: f64 },
    /// Density `1 + sin(2 pi x p / 2^Q)` with `p` periods over the register.
    Sinusoidal { periods: f64 },
    /// `ceil((1 - sparsity) 2^Q)` non-zero entries at random positions with
    /// magnitudes uniform on `(0, 1]`.
    SparseRandom { sparsity: f64, seed: u64 },
    /// Every entry uniform on `(0, 1]`.
    DenseRandom { seed: u64 },
    /// Amplitudes read from a JSON file.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub num_qubits: usize,
    #[serde(flatten)]
    pub kind: TargetKind,
}

impl TargetSpec {
    /// Mean at the grid midpoint, standard deviation `2^Q / 6`.
    pub fn normal(num_qubits: usize) -> Self {
        let n = grid_len(num_qubits);
        Self {
            num_qubits,
            kind: TargetKind::Normal {
                mean: n / 2.0,
                std: n / 6.0,
            },
        }
    }

    /// Shape 0.5, scale `2^(Q-2)`.
    pub fn lognormal(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            kind: TargetKind::Lognormal {
                shape: 0.5,
                scale: grid_len(num_qubits) / 4.0,
            },
        }
    }

    /// Two periods over the register.
    pub fn sinusoidal(num_qubits: usize) -> Self {
        Self::sinusoidal_with(num_qubits, 2.0)
    }

    pub fn sinusoidal_with(num_qubits: usize, periods: f64) -> Self {
        Self {
            num_qubits,
            kind: TargetKind::Sinusoidal { periods },
        }
    }

    pub fn sparse_random(num_qubits: usize, sparsity: f64, seed: u64) -> Self {
        Self {
            num_qubits,
            kind: TargetKind::SparseRandom { sparsity, seed },
        }
    }

    pub fn dense_random(num_qubits: usize, seed: u64) -> Self {
        Self {
            num_qubits,
            kind: TargetKind::DenseRandom { seed },
        }
    }

    pub fn file(path: impl Into<PathBuf>, num_qubits: usize) -> Self {
        Self {
            num_qubits,
            kind: TargetKind::File { path: path.into() },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.num_qubits;
        if !matches!(self.kind, TargetKind::File { .. }) && !(MIN_QUBITS..=MAX_QUBITS).contains(&q) {
            return Err(Error::InvalidSpec(format!(
                "{q} qubits outside {MIN_QUBITS}..={MAX_QUBITS}"
            )));
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")))
            }
        };
        match &self.kind {
            TargetKind::Normal { mean, std } => {
                positive("std", *std)?;
                if !mean.is_finite() {
                    return Err(Error::InvalidSpec("mean must be finite".into()));
                }
            }
            TargetKind::Lognormal { shape, scale } => {
                positive("shape", *shape)?;
                positive("scale", *scale)?;
            }
            TargetKind::Sinusoidal { periods } => {
                if !periods.is_finite() || *periods < 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "periods must be non-negative, got {periods}"
                    )));
                }
            }
            TargetKind::SparseRandom { sparsity, .. } => {
                if !(0.0..1.0).contains(sparsity) {
                    return Err(Error::InvalidSpec(format!(
                        "sparsity must lie in [0, 1), got {sparsity}"
                    )));
                }
            }
            TargetKind::DenseRandom { .. } | TargetKind::File { .. } => {}
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            TargetKind::Normal { .. } => "normal",
            TargetKind::Lognormal { .. } => "lognormal",
            TargetKind::Sinusoidal { .. } => "sinusoidal",
            TargetKind::SparseRandom { .. } => "sparse_random",
            TargetKind::DenseRandom { .. } => "dense_random",
            TargetKind::File { .. } => "file",
        }
    }

    /// `key=value` pairs joined by `;`.
    pub fn params_string(&self) -> String {
        match &self.kind {
            TargetKind::Normal { mean, std } => {
                format!("mean={};std={}", format_sig(*mean), format_sig(*std))
            }
            TargetKind::Lognormal { shape, scale } => {
                format!("shape={};scale={}", format_sig(*shape), format_sig(*scale))
            }
            TargetKind::Sinusoidal { periods } => format!("periods={}", format_sig(*periods)),
            TargetKind::SparseRandom { sparsity, seed } => {
                format!("sparsity={};seed={seed}", format_sig(*sparsity))
            }
            TargetKind::DenseRandom { seed } => format!("seed={seed}"),
            TargetKind::File { path } => format!("path={}", path.display()),
        }
    }
}

fn grid_len(num_qubits: usize) -> f64 {
    (1u64 << num_qubits) as f64
}

fn from_density(density: Vec<f64>) -> Result<AmplitudeVector> {
    if density.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidSpec("density is negative or not finite".into()));
    }
    let amps: Vec<C64> = density.iter().map(|p| C64::new(p.sqrt(), 0.0)).collect();
    let v = AmplitudeVector::new(amps)?;
    if v.norm() == 0.0 {
        return Err(Error::InvalidSpec("density vanishes on the whole grid".into()));
    }
    v.normalized()
}

/// Builds the normalized target state for `spec`. Random kinds are
/// reproducible for a fixed seed.
pub fn generate(spec: &TargetSpec) -> Result<AmplitudeVector> {
    spec.validate()?;
    let q = spec.num_qubits;
    let len = 1usize << q.min(usize::BITS as usize - 1);
    let grid = || (0..len).map(|i| i as f64 + 0.5);
    match &spec.kind {
        TargetKind::Normal { mean, std } => from_density(
            grid()
                .map(|x| (-(x - mean).powi(2) / (2.0 * std * std)).exp())
                .collect(),
        ),
        TargetKind::Lognormal { shape, scale } => from_density(
            grid()
                .map(|x| (-(x / scale).ln().powi(2) / (2.0 * shape * shape)).exp() / x)
                .collect(),
        ),
        TargetKind::Sinusoidal { periods } => from_density(
            grid()
                .map(|x| (1.0 + (2.0 * PI * x * periods / len as f64).sin()).max(0.0))
                .collect(),
        ),
        TargetKind::SparseRandom { sparsity, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let nonzero = sparse_nonzero_count(*sparsity, len);
            let mut amps = vec![C64::new(0.0, 0.0); len];
            for pos in sample(&mut rng, len, nonzero) {
                amps[pos] = C64::new(1.0 - rng.random::<f64>(), 0.0);
            }
            AmplitudeVector::new(amps)?.normalized()
        }
        TargetKind::DenseRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let amps = (0..len)
                .map(|_| C64::new(1.0 - rng.random::<f64>(), 0.0))
                .collect();
            AmplitudeVector::new(amps)?.normalized()
        }
        TargetKind::File { path } => {
            let text = std::fs::read_to_string(path)?;
            let v = AmplitudeVector::from_json_str(&text)?;
            if v.num_qubits() != q {
                return Err(Error::InvalidSpec(format!(
                    "{} holds {} qubits, spec says {q}",
                    path.display(),
                    v.num_qubits()
                )));
            }
            v.normalized()
        }
    }
}

/// `ceil((1 - sparsity) len)`, at least one.
pub fn sparse_nonzero_count(sparsity: f64, len: usize) -> usize {
    // The small offset keeps products like (1 - 0.75) * 4 from rounding up.
    let raw = (1.0 - sparsity) * len as f64;
    ((raw - 1e-9).ceil() as usize).clamp(1, len)
}

/// Families of targets for batch benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corpus {
    /// Sparsity drawn uniformly from `[0.9, 1)`.
    Sparse,
    Dense,
    Normal,
    Lognormal,
    Sinusoidal,
    /// Cycles through normal, log-normal and sinusoidal targets.
    Smooth,
}

impl FromStr for Corpus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sparse" => Self::Sparse,
            "dense" => Self::Dense,
            "normal" => Self::Normal,
            "lognormal" => Self::Lognormal,
            "sinusoidal" => Self::Sinusoidal,
            "smooth" => Self::Smooth,
            other => return Err(Error::InvalidSpec(format!("unknown corpus {other:?}"))),
        })
    }
}

/// `count` target specs of one family. The first smooth target of each kind
/// uses the default parameters; the rest are drawn from `seed`.
pub fn corpus(kind: Corpus, num_qubits: usize, count: usize, seed: u64) -> Vec<TargetSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid_len(num_qubits);
    let normal = |rng: &mut ChaCha8Rng, first: bool| {
        if first {
            TargetSpec::normal(num_qubits)
        } else {
            TargetSpec {
                num_qubits,
                kind: TargetKind::Normal {
                    mean: n * (0.25 + 0.5 * rng.random::<f64>()),
                    std: n * (1.0 / 12.0 + rng.random::<f64>() / 6.0),
                },
            }
        }
    };
    let lognormal = |rng: &mut ChaCha8Rng, first: bool| {
        if first {
            TargetSpec::lognormal(num_qubits)
        } else {
            TargetSpec {
                num_qubits,
                kind: TargetKind::Lognormal {
                    shape: 0.25 + 0.75 * rng.random::<f64>(),
                    scale: n * (0.125 + 0.375 * rng.random::<f64>()),
                },
            }
        }
    };
    let sinusoidal = |rng: &mut ChaCha8Rng, first: bool| {
        if first {
            TargetSpec::sinusoidal(num_qubits)
        } else {
            TargetSpec::sinusoidal_with(num_qubits, rng.random_range(0..=4u32) as f64)
        }
    };
    (0..count)
        .map(|i| match kind {
            Corpus::Sparse => {
                let sparsity = SPARSE_CORPUS_MIN_SPARSITY
                    + (1.0 - SPARSE_CORPUS_MIN_SPARSITY) * rng.random::<f64>();
                TargetSpec::sparse_random(num_qubits, sparsity, rng.next_u64())
            }
            Corpus::Dense => TargetSpec::dense_random(num_qubits, rng.next_u64()),
            Corpus::Normal => normal(&mut rng, i == 0),
            Corpus::Lognormal => lognormal(&mut rng, i == 0),
            Corpus::Sinusoidal => sinusoidal(&mut rng, i == 0),
            Corpus::Smooth => match i % 3 {
                0 => normal(&mut rng, i == 0),
                1 => lognormal(&mut rng, i == 1),
                _ => sinusoidal(&mut rng, i == 2),
            },
        })
        .collect()
}
