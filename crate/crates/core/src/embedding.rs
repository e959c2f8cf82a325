//! Complete embedding maps: `m` random weight records, one invariant value
//! per record, plus a versioned on-disk key document.
//!
//! The cardinality rule is `m = 2 D + 1` for full orbit separation on a
//! `D`-dimensional data set and `m = D + 1` for generic separation. `D`
//! defaults to the ambient dimension `n * d` when the caller has no better
//! estimate. Weights are drawn i.i.d. standard normal, each record from its
//! own deterministic substream of the key seed, so keys are reproducible
//! and individual records could be regenerated independently.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{
    center, gl_invariant, indef_invariant, orth_invariant, perm_invariant, scale_normalize,
    sl_invariant, so_invariant, Psi,
};
use crate::groups::{GroupTag, QForm};
use crate::numerics::{numeric_rank, PointCloud, ToleranceConfig};
use crate::rng::SeededRng;

/// Version of the key document format this build reads and writes.
pub const KEY_FORMAT_VERSION: u32 = 1;

/// Full separation vs. generic (off a measure-zero singular set) separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    Generic,
}

/// Weight-free preprocessing applied before every invariant evaluation,
/// always centering first.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preprocess {
    /// Subtract the column mean (makes the embedding translation invariant).
    pub center: bool,
    /// Divide by the Frobenius norm (makes it scaling invariant; only
    /// admissible for permutation/orthogonal/rotation keys).
    pub scale_normalize: bool,
}

/// The sampled parameters of one invariant coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRecord {
    /// Permutation family: `w1` of length `d`, `w2` of length `n`.
    Perm { w1: Vec<f64>, w2: Vec<f64> },
    /// Orthogonal / Q-isometry family: `w` of length `n`.
    Vector { w: Vec<f64> },
    /// Rotation family: `w` of length `n` plus a row-major `n x d` matrix.
    VectorMatrix { w: Vec<f64>, mat: Vec<f64> },
    /// Determinant families (special/general linear): row-major `n x d`.
    Matrix { mat: Vec<f64> },
}

/// Number of invariants required for the given intrinsic dimension.
pub fn required_count(intrinsic_dim: usize, mode: Mode) -> usize {
    match mode {
        Mode::Full => 2 * intrinsic_dim + 1,
        Mode::Generic => intrinsic_dim + 1,
    }
}

/// Per-invariant weight dimension of each group's family.
pub fn weight_dim(group: GroupTag, d: usize, n: usize) -> Result<usize> {
    match group {
        GroupTag::Perm => Ok(d + n),
        GroupTag::Orth | GroupTag::IndefOrth { .. } => Ok(n),
        GroupTag::SpecialOrth => Ok(n + n * d),
        GroupTag::SpecialLinear | GroupTag::GeneralLinear => Ok(n * d),
        GroupTag::Translation | GroupTag::Scaling => Err(Error::InvalidArgument(
            "translation and scaling are preprocessing wrappers, not key groups".into(),
        )),
    }
}

/// A persisted embedding: group, shape, mode, seed and the sampled weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingKey {
    pub version: u32,
    pub group: GroupTag,
    /// Inner permutation-invariant map; present only for permutation keys.
    pub psi: Option<Psi>,
    /// Diagonal form signature (p, q); present only for Q-isometry keys.
    pub signature: Option<(usize, usize)>,
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub intrinsic_dim: usize,
    pub mode: Mode,
    pub seed: u64,
    pub preprocess: Preprocess,
    pub weights: Vec<WeightRecord>,
}

/// Options for [`generate_key`] beyond the required arguments.
#[derive(Debug, Clone, Default)]
pub struct KeyOptions {
    /// Inner map for permutation keys; defaults to sort.
    pub psi: Option<Psi>,
    /// Signature for Q-isometry keys; defaults to (d-1, 1).
    pub signature: Option<(usize, usize)>,
    /// Overrides the invariant count. More than required is always fine;
    /// fewer requires `allow_undersized`.
    pub m_override: Option<usize>,
    pub allow_undersized: bool,
    pub preprocess: Preprocess,
}

/// Samples a fresh key. Deterministic in `seed`.
pub fn generate_key(
    group: GroupTag,
    d: usize,
    n: usize,
    intrinsic_dim: usize,
    mode: Mode,
    seed: u64,
    options: &KeyOptions,
) -> Result<EmbeddingKey> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument("d and n must be positive".into()));
    }
    if group.is_matrix_group() && n < d {
        return Err(Error::InvalidArgument(format!(
            "{} keys require n >= d, got d = {d}, n = {n}",
            group.label()
        )));
    }
    weight_dim(group, d, n)?; // rejects translation/scaling
    if options.preprocess.scale_normalize
        && !matches!(group, GroupTag::Perm | GroupTag::Orth | GroupTag::SpecialOrth)
    {
        return Err(Error::InvalidArgument(
            "scale normalization is only equivariant for permutation/orthogonal/rotation keys"
                .into(),
        ));
    }
    if options.preprocess.center && group.oracle_requires_full_rank() && n < d + 1 {
        return Err(Error::InvalidArgument(
            "centering drops the rank by one, so full-rank key groups need n >= d + 1".into(),
        ));
    }
    let psi = match group {
        GroupTag::Perm => Some(options.psi.unwrap_or(Psi::Sort)),
        _ => {
            if options.psi.is_some() {
                return Err(Error::InvalidArgument(
                    "psi applies only to permutation keys".into(),
                ));
            }
            None
        }
    };
    let signature = match group {
        GroupTag::IndefOrth { .. } | GroupTag::Orth | GroupTag::SpecialOrth => None,
        _ => None,
    };
    // IndefOrth keys carry their signature from the tag itself.
    let (group, signature) = match group {
        GroupTag::IndefOrth { p, q } => {
            if p + q != d {
                return Err(Error::InvalidArgument(format!(
                    "signature ({p},{q}) does not match d = {d}"
                )));
            }
            (group, Some((p, q)))
        }
        _ => {
            if options.signature.is_some() {
                return Err(Error::InvalidArgument(
                    "signature applies only to indefinite-orthogonal keys".into(),
                ));
            }
            (group, signature)
        }
    };

    let required = required_count(intrinsic_dim, mode);
    let m = options.m_override.unwrap_or(required);
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if m < required && !options.allow_undersized {
        return Err(Error::InvalidArgument(format!(
            "m = {m} is below the required count {required}; pass the undersized override to \
             force it"
        )));
    }

    let weights = (0..m)
        .map(|i| {
            // one substream per invariant index
            let mut rng = SeededRng::new(seed, i as u64 + 1);
            sample_record(group, d, n, &mut rng)
        })
        .collect();

    Ok(EmbeddingKey {
        version: KEY_FORMAT_VERSION,
        group,
        psi,
        signature,
        d,
        n,
        m,
        intrinsic_dim,
        mode,
        seed,
        preprocess: options.preprocess,
        weights,
    })
}

fn sample_record(group: GroupTag, d: usize, n: usize, rng: &mut SeededRng) -> WeightRecord {
    match group {
        GroupTag::Perm => WeightRecord::Perm {
            w1: rng.normal_vec(d),
            w2: rng.normal_vec(n),
        },
        GroupTag::Orth | GroupTag::IndefOrth { .. } => WeightRecord::Vector {
            w: rng.normal_vec(n),
        },
        GroupTag::SpecialOrth => WeightRecord::VectorMatrix {
            w: rng.normal_vec(n),
            mat: rng.normal_vec(n * d),
        },
        GroupTag::SpecialLinear | GroupTag::GeneralLinear => WeightRecord::Matrix {
            mat: rng.normal_vec(n * d),
        },
        GroupTag::Translation | GroupTag::Scaling => unreachable!("rejected earlier"),
    }
}

/// One embedded cloud: the `m` invariant values plus the key fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub values: Vec<f64>,
    /// FNV-1a hash of the canonical key document.
    pub key_id: u64,
}

impl EmbeddingKey {
    /// Consistency check of counts, shapes and record kinds.
    pub fn validate(&self) -> Result<()> {
        if self.version != KEY_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: self.version,
                supported: KEY_FORMAT_VERSION,
            });
        }
        if self.m != self.weights.len() {
            return Err(Error::MalformedDocument(format!(
                "m = {} but {} weight records present",
                self.m,
                self.weights.len()
            )));
        }
        if self.m == 0 || self.d == 0 || self.n == 0 {
            return Err(Error::MalformedDocument("empty shape".into()));
        }
        weight_dim(self.group, self.d, self.n)
            .map_err(|_| Error::MalformedDocument("unsupported key group".into()))?;
        if matches!(self.group, GroupTag::IndefOrth { .. }) != self.signature.is_some() {
            return Err(Error::MalformedDocument(
                "signature must be present exactly for indefinite-orthogonal keys".into(),
            ));
        }
        if let (GroupTag::IndefOrth { p, q }, Some((sp, sq))) = (self.group, self.signature) {
            if (p, q) != (sp, sq) || p + q != self.d {
                return Err(Error::MalformedDocument("inconsistent signature".into()));
            }
        }
        if matches!(self.group, GroupTag::Perm) != self.psi.is_some() {
            return Err(Error::MalformedDocument(
                "psi must be present exactly for permutation keys".into(),
            ));
        }
        for (i, rec) in self.weights.iter().enumerate() {
            let ok = match (self.group, rec) {
                (GroupTag::Perm, WeightRecord::Perm { w1, w2 }) => {
                    w1.len() == self.d && w2.len() == self.n
                }
                (GroupTag::Orth | GroupTag::IndefOrth { .. }, WeightRecord::Vector { w }) => {
                    w.len() == self.n
                }
                (GroupTag::SpecialOrth, WeightRecord::VectorMatrix { w, mat }) => {
                    w.len() == self.n && mat.len() == self.n * self.d
                }
                (
                    GroupTag::SpecialLinear | GroupTag::GeneralLinear,
                    WeightRecord::Matrix { mat },
                ) => mat.len() == self.n * self.d,
                _ => false,
            };
            if !ok {
                return Err(Error::MalformedDocument(format!(
                    "weight record {i} does not match the key group and shape"
                )));
            }
            let finite = match rec {
                WeightRecord::Perm { w1, w2 } => {
                    w1.iter().chain(w2).all(|v| v.is_finite())
                }
                WeightRecord::Vector { w } => w.iter().all(|v| v.is_finite()),
                WeightRecord::VectorMatrix { w, mat } => {
                    w.iter().chain(mat).all(|v| v.is_finite())
                }
                WeightRecord::Matrix { mat } => mat.iter().all(|v| v.is_finite()),
            };
            if !finite {
                return Err(Error::MalformedDocument(format!(
                    "weight record {i} contains a non-finite value"
                )));
            }
        }
        Ok(())
    }

    /// Canonical single-line document; the content hash is taken over this.
    pub fn canonical_document(&self) -> String {
        serde_json::to_string(self).expect("key serialization cannot fail")
    }

    /// Human-oriented multi-line document (same data, pretty-printed).
    pub fn to_document(&self) -> String {
        let mut doc = serde_json::to_string_pretty(self).expect("key serialization cannot fail");
        doc.push('\n');
        doc
    }

    pub fn from_document(text: &str) -> Result<Self> {
        // surface a version mismatch even when the rest of the document
        // does not deserialize cleanly
        if let Ok(probe) = serde_json::from_str::<serde_json::Value>(text) {
            if let Some(v) = probe.get("version").and_then(|v| v.as_u64()) {
                if v != u64::from(KEY_FORMAT_VERSION) {
                    return Err(Error::VersionMismatch {
                        found: v as u32,
                        supported: KEY_FORMAT_VERSION,
                    });
                }
            }
        }
        let key: EmbeddingKey = serde_json::from_str(text)
            .map_err(|e| Error::MalformedDocument(e.to_string()))?;
        key.validate()?;
        Ok(key)
    }

    /// 64-bit FNV-1a over the canonical document.
    pub fn content_hash(&self) -> u64 {
        fnv1a64(self.canonical_document().as_bytes())
    }

    /// Weight dimension `D_w` of one invariant of this key.
    pub fn weight_dim(&self) -> usize {
        weight_dim(self.group, self.d, self.n).expect("validated at construction")
    }
}

pub fn save_key(key: &EmbeddingKey, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, key.to_document())?;
    Ok(())
}

pub fn load_key(path: &std::path::Path) -> Result<EmbeddingKey> {
    let text = std::fs::read_to_string(path)?;
    EmbeddingKey::from_document(&text)
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325_u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Applies the key's preprocessing (center first, then scale).
pub fn preprocess(key: &EmbeddingKey, x: &PointCloud, cfg: &ToleranceConfig) -> Result<PointCloud> {
    let mut out = x.clone();
    if key.preprocess.center {
        out = center(&out);
    }
    if key.preprocess.scale_normalize {
        out = scale_normalize(&out, cfg)?;
    }
    Ok(out)
}

/// Evaluates the key on one cloud.
pub fn embed(key: &EmbeddingKey, x: &PointCloud, cfg: &ToleranceConfig) -> Result<EmbeddingResult> {
    if x.d() != key.d || x.n() != key.n {
        return Err(Error::ShapeMismatch(format!(
            "cloud is {}x{} but key expects {}x{}",
            x.d(),
            x.n(),
            key.d,
            key.n
        )));
    }
    let pre = preprocess(key, x, cfg)?;
    if key.group.oracle_requires_full_rank() && numeric_rank(&pre, cfg) < key.d {
        return Err(Error::RankDeficient(format!(
            "{} embeddings require full-rank input",
            key.group.label()
        )));
    }
    let qform = key.signature.map(|(p, q)| QForm::from_signature(p, q));
    let mut values = Vec::with_capacity(key.m);
    for rec in &key.weights {
        let v = match (key.group, rec) {
            (GroupTag::Perm, WeightRecord::Perm { w1, w2 }) => {
                perm_invariant(&pre, w1, w2, key.psi.unwrap_or(Psi::Sort))?
            }
            (GroupTag::Orth, WeightRecord::Vector { w }) => orth_invariant(&pre, w)?,
            (GroupTag::IndefOrth { .. }, WeightRecord::Vector { w }) => {
                indef_invariant(&pre, w, qform.as_ref().expect("validated"))?
            }
            (GroupTag::SpecialOrth, WeightRecord::VectorMatrix { w, mat }) => {
                let big = DMatrix::from_row_slice(key.n, key.d, mat);
                so_invariant(&pre, w, &big)?
            }
            (GroupTag::SpecialLinear, WeightRecord::Matrix { mat }) => {
                let big = DMatrix::from_row_slice(key.n, key.d, mat);
                sl_invariant(&pre, &big)?
            }
            (GroupTag::GeneralLinear, WeightRecord::Matrix { mat }) => {
                let big = DMatrix::from_row_slice(key.n, key.d, mat);
                gl_invariant(&pre, &big, cfg)?
            }
            _ => {
                return Err(Error::MalformedDocument(
                    "weight record does not match key group".into(),
                ))
            }
        };
        if !v.is_finite() {
            return Err(Error::NonFinite("invariant value overflowed".into()));
        }
        values.push(v);
    }
    Ok(EmbeddingResult {
        values,
        key_id: key.content_hash(),
    })
}

/// Elementwise [`embed`], order preserved; the first failure is reported
/// with its index.
pub fn embed_batch(
    key: &EmbeddingKey,
    clouds: &[PointCloud],
    cfg: &ToleranceConfig,
) -> Result<Vec<EmbeddingResult>> {
    clouds
        .iter()
        .enumerate()
        .map(|(index, x)| {
            embed(key, x, cfg).map_err(|e| Error::BatchItem {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}
