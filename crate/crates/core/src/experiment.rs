//! A scaled-down two-class toy task: each class is a `D`-dimensional convex
//! set in the space of `3 x n` clouds, saturated by column permutations.
//! Points get embedded with a permutation key of `m` invariants and
//! classified by 1-nearest-neighbor — no training, so the classifier can
//! only succeed if the embedding actually separates the classes.

use crate::embedding::{embed_batch, generate_key, KeyOptions, Mode};
use crate::error::{Error, Result};
use crate::families::Psi;
use crate::groups::{apply, GroupElement, GroupTag};
use crate::numerics::PointCloud;
use crate::rng::SeededRng;
use crate::ToleranceConfig;

/// Point dimension of the toy clouds.
pub const AMBIENT_POINT_DIM: usize = 3;

/// Two labeled families of clouds plus train/test samples drawn from them.
#[derive(Debug, Clone)]
pub struct ToyDataset {
    pub intrinsic_dim: usize,
    pub n: usize,
    /// `anchors[c]` are the `D + 1` generators of class `c`'s convex set.
    pub anchors: [Vec<PointCloud>; 2],
    pub train: Vec<(PointCloud, usize)>,
    pub test: Vec<(PointCloud, usize)>,
    pub seed: u64,
}

/// Anchors i.i.d. standard normal in `R^{3 x n}`; each sample is a convex
/// combination of one class's anchors (uniform on the simplex) with a
/// uniformly random column permutation applied. Deterministic in `seed`.
pub fn generate_toy(
    intrinsic_dim: usize,
    n: usize,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<ToyDataset> {
    if intrinsic_dim == 0 {
        return Err(Error::InvalidArgument("intrinsic dimension must be >= 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 points per cloud".into()));
    }
    let root = SeededRng::new(seed, 0);
    let mut anchors: [Vec<PointCloud>; 2] = [Vec::new(), Vec::new()];
    for (c, class_anchors) in anchors.iter_mut().enumerate() {
        for a in 0..=intrinsic_dim {
            let mut rng = root.substream((c * (intrinsic_dim + 1) + a) as u64);
            class_anchors.push(PointCloud::random_gaussian(AMBIENT_POINT_DIM, n, &mut rng));
        }
    }
    let draw_split = |count: usize, offset: u64| -> Result<Vec<(PointCloud, usize)>> {
        (0..count)
            .map(|k| {
                let mut rng = root.substream(offset + k as u64);
                let label = rng.index(2);
                let cloud = sample_from_class(&anchors[label], intrinsic_dim, &mut rng)?;
                Ok((cloud, label))
            })
            .collect()
    };
    let train = draw_split(n_train, 1_000)?;
    let test = draw_split(n_test, 1_000_000)?;
    Ok(ToyDataset {
        intrinsic_dim,
        n,
        anchors,
        train,
        test,
        seed,
    })
}

fn sample_from_class(
    anchors: &[PointCloud],
    intrinsic_dim: usize,
    rng: &mut SeededRng,
) -> Result<PointCloud> {
    let t = simplex_uniform(intrinsic_dim + 1, rng);
    let n = anchors[0].n();
    let mut mat = anchors[0].matrix() * t[0];
    for (a, coeff) in t.iter().enumerate().skip(1) {
        mat += anchors[a].matrix() * *coeff;
    }
    let cloud = PointCloud::new(mat)?;
    let perm = GroupElement::Permutation(rng.permutation(n));
    apply(&perm, &cloud)
}

/// Uniform draw from the probability simplex (normalized exponentials).
fn simplex_uniform(len: usize, rng: &mut SeededRng) -> Vec<f64> {
    let mut t: Vec<f64> = (0..len)
        .map(|_| -rng.uniform(f64::MIN_POSITIVE, 1.0).ln())
        .collect();
    let total: f64 = t.iter().sum();
    t.iter_mut().for_each(|v| *v /= total);
    t
}

/// Outcome of one toy run.
#[derive(Debug, Clone)]
pub struct ToyReport {
    pub m: usize,
    pub psi: Psi,
    pub key_seed: u64,
    /// Leave-one-out nearest-neighbor accuracy on the training split.
    pub train_accuracy: f64,
    /// Nearest-training-neighbor accuracy on the test split.
    pub test_accuracy: f64,
    /// Smallest embedding distance between samples of different classes,
    /// over all train and test samples.
    pub min_cross_class_distance: f64,
    pub train_size: usize,
    pub test_size: usize,
    /// Embedded test set, one `(values, label)` row per sample.
    pub test_embeddings: Vec<(Vec<f64>, usize)>,
}

/// Embeds the dataset with a permutation key of `m` invariants and reports
/// 1-nearest-neighbor accuracy.
pub fn run_toy(dataset: &ToyDataset, m: usize, psi: Psi, key_seed: u64) -> Result<ToyReport> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let cfg = ToleranceConfig::default();
    let key = generate_key(
        GroupTag::Perm,
        AMBIENT_POINT_DIM,
        dataset.n,
        dataset.intrinsic_dim,
        Mode::Full,
        key_seed,
        &KeyOptions {
            psi: Some(psi),
            m_override: Some(m),
            allow_undersized: true,
            ..Default::default()
        },
    )?;

    let train_clouds: Vec<PointCloud> = dataset.train.iter().map(|(x, _)| x.clone()).collect();
    let test_clouds: Vec<PointCloud> = dataset.test.iter().map(|(x, _)| x.clone()).collect();
    let train_emb = embed_batch(&key, &train_clouds, &cfg)?;
    let test_emb = embed_batch(&key, &test_clouds, &cfg)?;
    let train_vals: Vec<&[f64]> = train_emb.iter().map(|r| r.values.as_slice()).collect();

    let mut train_hits = 0usize;
    for (i, (_, label)) in dataset.train.iter().enumerate() {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, other) in train_vals.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = sq_dist(train_vals[i], other);
            if d < best.0 {
                best = (d, j);
            }
        }
        if best.1 != usize::MAX && dataset.train[best.1].1 == *label {
            train_hits += 1;
        }
    }

    let mut test_hits = 0usize;
    for (i, (_, label)) in dataset.test.iter().enumerate() {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, other) in train_vals.iter().enumerate() {
            let d = sq_dist(&test_emb[i].values, other);
            if d < best.0 {
                best = (d, j);
            }
        }
        if dataset.train[best.1].1 == *label {
            test_hits += 1;
        }
    }

    // minimum embedding distance across class boundaries, all samples
    let mut all: Vec<(&[f64], usize)> = Vec::new();
    for (r, (_, l)) in train_emb.iter().zip(&dataset.train) {
        all.push((r.values.as_slice(), *l));
    }
    for (r, (_, l)) in test_emb.iter().zip(&dataset.test) {
        all.push((r.values.as_slice(), *l));
    }
    let mut min_cross = f64::INFINITY;
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            if all[i].1 != all[j].1 {
                min_cross = min_cross.min(sq_dist(all[i].0, all[j].0));
            }
        }
    }

    Ok(ToyReport {
        m,
        psi,
        key_seed,
        train_accuracy: train_hits as f64 / dataset.train.len().max(1) as f64,
        test_accuracy: test_hits as f64 / dataset.test.len().max(1) as f64,
        min_cross_class_distance: min_cross.sqrt(),
        train_size: dataset.train.len(),
        test_size: dataset.test.len(),
        test_embeddings: test_emb
            .into_iter()
            .zip(&dataset.test)
            .map(|(r, (_, l))| (r.values, *l))
            .collect(),
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed;
    use crate::groups::sample_element;
    use nalgebra::DMatrix;

    #[test]
    fn generated_shapes_and_determinism() {
        let ds = generate_toy(1, 10, 100, 100, 5).unwrap();
        assert_eq!(ds.train.len(), 100);
        assert_eq!(ds.test.len(), 100);
        assert!(ds
            .train
            .iter()
            .chain(&ds.test)
            .all(|(x, l)| x.d() == 3 && x.n() == 10 && *l < 2));
        assert_eq!(ds.anchors[0].len(), 2);

        let again = generate_toy(1, 10, 100, 100, 5).unwrap();
        for (a, b) in ds.train.iter().zip(&again.train) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1, b.1);
        }
    }

    /// Every sample is a convex combination of its class anchors up to a
    /// column permutation — checked by brute-force un-permuting and solving
    /// the small least-squares feasibility problem.
    #[test]
    fn samples_lie_in_permuted_anchor_hull() {
        let ds = generate_toy(2, 5, 12, 0, 9).unwrap();
        for (x, label) in &ds.train {
            assert!(
                feasible_up_to_permutation(x, &ds.anchors[*label]),
                "sample not in permuted hull"
            );
        }
    }

    fn feasible_up_to_permutation(x: &PointCloud, anchors: &[PointCloud]) -> bool {
        let n = x.n();
        let k = anchors.len();
        let dim = x.d() * n;
        let mut perms = Vec::new();
        let mut cur = Vec::new();
        let mut used = vec![false; n];
        collect_perms(&mut cur, &mut used, &mut perms);
        for sigma in &perms {
            // un-permute: candidate = X with columns re-ordered by sigma
            let unperm = apply(&GroupElement::Permutation(sigma.clone()), x).unwrap();
            // least squares for t: vec(unperm) = sum t_a vec(anchor_a)
            let a = DMatrix::from_fn(dim, k, |r, c| {
                let (i, j) = (r % x.d(), r / x.d());
                anchors[c].matrix()[(i, j)]
            });
            let b = DMatrix::from_fn(dim, 1, |r, _| {
                let (i, j) = (r % x.d(), r / x.d());
                unperm.matrix()[(i, j)]
            });
            let ata = a.transpose() * &a;
            let Some(inv) = ata.try_inverse() else { continue };
            let t = inv * a.transpose() * &b;
            let residual = (&a * &t - &b).norm();
            let sum: f64 = t.iter().sum();
            if residual <= 1e-8
                && (sum - 1.0).abs() <= 1e-8
                && t.iter().all(|&v| v >= -1e-9)
            {
                return true;
            }
        }
        false
    }

    fn collect_perms(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                collect_perms(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }

    #[test]
    fn easy_task_reaches_high_accuracy() {
        let ds = generate_toy(1, 16, 80, 80, 3).unwrap();
        let report = run_toy(&ds, 3, Psi::Sort, 11).unwrap();
        assert!(report.test_accuracy >= 0.95, "{}", report.test_accuracy);
        assert!(report.min_cross_class_distance > 0.0);
        assert_eq!(report.test_embeddings.len(), 80);
    }

    #[test]
    fn identical_anchor_classes_are_chance_level() {
        let mut ds = generate_toy(1, 12, 150, 150, 21).unwrap();
        // overwrite class 1 with class 0's anchors and resample both splits
        ds.anchors[1] = ds.anchors[0].clone();
        let root = SeededRng::new(99, 0);
        let resample = |count: usize, offset: u64, ds: &ToyDataset| -> Vec<(PointCloud, usize)> {
            (0..count)
                .map(|k| {
                    let mut rng = root.substream(offset + k as u64);
                    let label = rng.index(2);
                    let cloud =
                        sample_from_class(&ds.anchors[label], ds.intrinsic_dim, &mut rng).unwrap();
                    (cloud, label)
                })
                .collect()
        };
        ds.train = resample(150, 0, &ds);
        ds.test = resample(150, 500_000, &ds);
        let report = run_toy(&ds, 3, Psi::Sort, 13).unwrap();
        assert!(
            report.test_accuracy > 0.3 && report.test_accuracy < 0.7,
            "labels carry no signal, accuracy was {}",
            report.test_accuracy
        );
    }

    /// Median test accuracy over seeds is nondecreasing along an m grid.
    #[test]
    fn accuracy_nondecreasing_in_m() {
        let d_int = 2;
        let grid = [2 * d_int + 1, 4 * d_int, 8 * d_int];
        let mut medians = Vec::new();
        for &m in &grid {
            let mut accs: Vec<f64> = (0..5)
                .map(|seed| {
                    let ds = generate_toy(d_int, 12, 60, 60, 100 + seed).unwrap();
                    run_toy(&ds, m, Psi::Sort, 200 + seed).unwrap().test_accuracy
                })
                .collect();
            accs.sort_by(f64::total_cmp);
            medians.push(accs[2]);
        }
        assert!(medians[1] >= medians[0] - 1e-12, "{medians:?}");
        assert!(medians[2] >= medians[1] - 1e-12, "{medians:?}");
    }

    /// Dense samplings of the two anchor segments (D = 1) have disjoint
    /// images under the m = 3 embedding, for every seed tried.
    #[test]
    fn segment_images_do_not_intersect() {
        let cfg = ToleranceConfig::default();
        for seed in 0..5 {
            let ds = generate_toy(1, 10, 0, 0, 300 + seed).unwrap();
            let key = generate_key(
                GroupTag::Perm,
                AMBIENT_POINT_DIM,
                10,
                1,
                Mode::Full,
                400 + seed,
                &KeyOptions::default(),
            )
            .unwrap();
            assert_eq!(key.m, 3);
            let mut rng = SeededRng::new(500 + seed, 0);
            let mut images: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
            for (c, img) in images.iter_mut().enumerate() {
                let a0 = &ds.anchors[c][0];
                let a1 = &ds.anchors[c][1];
                for k in 0..=200 {
                    let t = k as f64 / 200.0;
                    let cloud =
                        PointCloud::new(a0.matrix() * (1.0 - t) + a1.matrix() * t).unwrap();
                    // a random permutation must not move the image
                    let g = sample_element(GroupTag::Perm, 3, 10, &mut rng);
                    let permuted = apply(&g, &cloud).unwrap();
                    img.push(embed(&key, &permuted, &cfg).unwrap().values);
                }
            }
            let mut min_cross: f64 = f64::INFINITY;
            for a in &images[0] {
                for b in &images[1] {
                    min_cross = min_cross.min(sq_dist(a, b).sqrt());
                }
            }
            assert!(
                min_cross > cfg.sep_margin,
                "seed {seed}: min cross distance {min_cross}"
            );
        }
    }
}
