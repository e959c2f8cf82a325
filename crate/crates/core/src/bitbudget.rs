//! Finite-precision analysis: the degree bound on the polynomial whose zero
//! set contains every non-separating weight tuple, and the bit count at
//! which uniformly drawn weights still separate with failure probability
//! below a target (the Schwartz–Zippel argument).
//!
//! Only the polynomial families are covered; the sort-based permutation
//! family and the rational general-linear family fall outside the bound and
//! report `Unsupported`.

use num_bigint::BigUint;

use crate::embedding::{EmbeddingKey, WeightRecord};
use crate::error::{Error, Result};
use crate::families::Psi;
use crate::groups::GroupTag;

/// Degree bound `(m*D_w - 1) * (2D + m*D_w - m) * r^m` for the bad-weight
/// polynomial of `m` invariants of family degree `r` on an ambient space of
/// dimension `D` with weight dimension `D_w`.
///
/// Requires `m >= 2D + 1`; exact arbitrary-precision arithmetic since `r^m`
/// overflows 64 bits almost immediately.
pub fn degree_bound(ambient_dim: u64, weight_dim: u64, m: u64, family_degree: u64) -> Result<BigUint> {
    if ambient_dim == 0 || weight_dim == 0 || m == 0 || family_degree == 0 {
        return Err(Error::InvalidArgument(
            "all degree-bound arguments must be positive".into(),
        ));
    }
    if m < 2 * ambient_dim + 1 {
        return Err(Error::HypothesisViolated(format!(
            "need m >= 2D + 1 = {}, got m = {m}",
            2 * ambient_dim + 1
        )));
    }
    let md_w = BigUint::from(m) * BigUint::from(weight_dim);
    let first = &md_w - 1_u32;
    let second = BigUint::from(2 * ambient_dim) + &md_w - BigUint::from(m);
    let power = BigUint::from(family_degree).pow(
        u32::try_from(m).map_err(|_| Error::InvalidArgument("m too large".into()))?,
    );
    Ok(first * second * power)
}

/// Smallest bit count `b` with `2^b >= R / eps`: drawing each weight
/// coordinate uniformly from an alphabet of `2^b` values keeps the
/// probability of landing in the degree-`R` bad set below `eps`.
///
/// The comparison is exact: `eps` is decomposed into its binary mantissa
/// and exponent rather than going through floating-point logarithms.
pub fn bits_needed(degree: &BigUint, eps: f64) -> Result<u32> {
    if degree < &BigUint::from(1_u32) {
        return Err(Error::InvalidArgument("degree bound must be >= 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be in (0, 1), got {eps}"
        )));
    }
    let (mant, exp) = decompose(eps);
    let mant = BigUint::from(mant);
    // condition(b): mant * 2^(b + exp) >= degree
    let holds = |b: u32| -> bool {
        let shift = i64::from(b) + exp;
        if shift >= 0 {
            &mant << (shift as u64) >= *degree
        } else {
            mant >= degree.clone() << ((-shift) as u64)
        }
    };
    let mut hi = 1u32;
    while !holds(hi) {
        hi = hi.checked_mul(2).expect("bit count stays well below u32::MAX");
    }
    let mut lo = 0u32;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Exact binary decomposition of a positive finite f64: `x = mant * 2^exp`.
fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1_u64 << 52) - 1);
    if exponent == 0 {
        (fraction, -1074)
    } else {
        (fraction | (1_u64 << 52), exponent - 1075)
    }
}

/// Degree in the weight variables of each polynomial family.
pub fn family_degree(group: GroupTag, psi: Option<Psi>, d: usize, n: usize) -> Result<u64> {
    match group {
        GroupTag::Orth | GroupTag::IndefOrth { .. } => Ok(2),
        GroupTag::SpecialOrth => Ok(2.max(d as u64)),
        GroupTag::SpecialLinear => Ok(d as u64),
        GroupTag::Perm => match psi.unwrap_or(Psi::Sort) {
            Psi::PowerSums => Ok(n as u64 + 1),
            Psi::Sort => Err(Error::Unsupported(
                "the sort-based family is semi-algebraic, not polynomial; no degree bound".into(),
            )),
        },
        GroupTag::GeneralLinear => Err(Error::Unsupported(
            "the general-linear family is rational; no polynomial degree bound".into(),
        )),
        GroupTag::Translation | GroupTag::Scaling => Err(Error::Unsupported(
            "translation/scaling are preprocessing wrappers without their own family".into(),
        )),
    }
}

/// Snaps every weight coordinate of a key onto the centered uniform grid of
/// `2^bits` values covering `[-range, range]`.
pub fn quantize_key(key: &EmbeddingKey, bits: u32, range: f64) -> EmbeddingKey {
    assert!(bits >= 1 && bits <= 62, "bits must be in 1..=62");
    assert!(range > 0.0);
    let levels = (1_u64 << bits) as f64;
    let step = 2.0 * range / levels;
    let snap = |w: f64| -> f64 {
        let idx = ((w + range) / step).round().clamp(0.0, levels - 1.0);
        -range + idx * step
    };
    let mut out = key.clone();
    for rec in &mut out.weights {
        match rec {
            WeightRecord::Perm { w1, w2 } => {
                w1.iter_mut().for_each(|v| *v = snap(*v));
                w2.iter_mut().for_each(|v| *v = snap(*v));
            }
            WeightRecord::Vector { w } => w.iter_mut().for_each(|v| *v = snap(*v)),
            WeightRecord::VectorMatrix { w, mat } => {
                w.iter_mut().for_each(|v| *v = snap(*v));
                mat.iter_mut().for_each(|v| *v = snap(*v));
            }
            WeightRecord::Matrix { mat } => mat.iter_mut().for_each(|v| *v = snap(*v)),
        }
    }
    out
}
