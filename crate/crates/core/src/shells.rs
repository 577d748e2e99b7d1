//! Shells of the hexagonal lattice around the deep hole.
//!
//! For the hexagonal basis `v, w` and deep hole `p = (v + w)/3`,
//!
//! ```text
//! |k v + l w - p|^2 = 2 n / (3 sqrt 3),   n = 3k^2 + 3kl + 3l^2 - 3k - 3l + 1,
//! ```
//!
//! so shells are keyed by the positive integer `n` (always `1 mod 3`) and
//! bucketing is exact. Rotation by `2 pi / 3` about `p` acts on indices as
//! `(k, l) -> (1 - k - l, k)` and has no fixed point in `Z^2`, so every shell
//! splits into orbits of size three.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moduli::{deep_hole, hex_lattice, norm, sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct IndexPair {
    pub k: i64,
    pub l: i64,
}

impl IndexPair {
    pub const fn new(k: i64, l: i64) -> Self {
        IndexPair { k, l }
    }

    pub fn rotate(self) -> Self {
        rotate_index(self.k, self.l)
    }

    /// `n(k, l)`, the integer shell key.
    pub fn shell_key(self) -> i64 {
        let (k, l) = (self.k, self.l);
        3 * (k * k + k * l + l * l - k - l) + 1
    }

    /// `k^2 + kl + l^2 - k - l`; equals `(n - 1)/3`.
    pub fn quadratic_form(self) -> i64 {
        let (k, l) = (self.k, self.l);
        k * k + k * l + l * l - k - l
    }

    /// Distance from the deep hole in the hexagonal lattice, computed from
    /// the exact key.
    pub fn hex_radius(self) -> f64 {
        radius_from_key(self.shell_key())
    }
}

impl From<(i64, i64)> for IndexPair {
    fn from((k, l): (i64, i64)) -> Self {
        IndexPair { k, l }
    }
}

/// `r = sqrt(2 n / (3 sqrt 3))`.
pub fn radius_from_key(n: i64) -> f64 {
    (2.0 * n as f64 / (3.0 * 3f64.sqrt())).sqrt()
}

pub fn rotate_index(k: i64, l: i64) -> IndexPair {
    IndexPair { k: 1 - k - l, l: k }
}

/// An orbit `a -> b -> c -> a` of the rotation about the deep hole, led by
/// its lexicographically smallest member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Triple {
    pub a: IndexPair,
    pub b: IndexPair,
    pub c: IndexPair,
}

impl Triple {
    /// The orbit of `q`, rotated so that the smallest member comes first.
    pub fn orbit_of(q: IndexPair) -> Self {
        let r1 = q.rotate();
        let r2 = r1.rotate();
        let lead = q.min(r1).min(r2);
        let b = lead.rotate();
        Triple { a: lead, b, c: b.rotate() }
    }

    pub fn members(&self) -> [IndexPair; 3] {
        [self.a, self.b, self.c]
    }

    pub fn contains(&self, q: IndexPair) -> bool {
        self.a == q || self.b == q || self.c == q
    }
}

/// The index set `B_r` for one radius, split into rotation triples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellIndexSet {
    pub radius: f64,
    /// Integer key `n` with `radius^2 = 2n / (3 sqrt 3)`.
    pub key: i64,
    pub triples: Vec<Triple>,
}

impl ShellIndexSet {
    pub fn len(&self) -> usize {
        3 * self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Members in triple order.
    pub fn members(&self) -> impl Iterator<Item = IndexPair> + '_ {
        self.triples.iter().flat_map(|t| t.members())
    }
}

/// Group `pairs` into rotation orbits.
///
/// Duplicates are ignored. Fails if some rotation image is missing from the
/// input.
pub fn partition_into_triples(pairs: &[IndexPair]) -> Result<Vec<Triple>> {
    let set: BTreeSet<IndexPair> = pairs.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &q in &set {
        if seen.contains(&q) {
            continue;
        }
        let t = Triple::orbit_of(q);
        for m in t.members() {
            if !set.contains(&m) {
                let pre = m.rotate().rotate();
                return Err(Error::Partition { k: pre.k, l: pre.l });
            }
            seen.insert(m);
        }
        out.push(t);
    }
    out.sort();
    Ok(out)
}

/// Half-width of the index box scanned for a given `r_max`.
pub fn scan_bound(r_max: f64) -> i64 {
    (r_max / 0.4).ceil() as i64 + 2
}

/// All shells of radius at most `r_max`, sorted by radius.
pub fn enumerate_shells(r_max: f64) -> Result<Vec<ShellIndexSet>> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::domain(format!("r_max must be positive and finite, got {r_max}")));
    }
    let b = scan_bound(r_max);
    let mut buckets: BTreeMap<i64, Vec<IndexPair>> = BTreeMap::new();
    for k in -b..=b {
        for l in -b..=b {
            let q = IndexPair::new(k, l);
            let n = q.shell_key();
            if radius_from_key(n) <= r_max {
                buckets.entry(n).or_default().push(q);
            }
        }
    }
    buckets
        .into_iter()
        .map(|(key, pairs)| {
            Ok(ShellIndexSet { radius: radius_from_key(key), key, triples: partition_into_triples(&pairs)? })
        })
        .collect()
}

/// Shells with radius in `(r_lo, r_hi]`.
pub fn enumerate_shells_between(r_lo: f64, r_hi: f64) -> Result<Vec<ShellIndexSet>> {
    Ok(enumerate_shells(r_hi)?.into_iter().filter(|s| s.radius > r_lo).collect())
}

/// Distance of `k v + l w` from the deep hole, computed geometrically.
pub fn hex_distance(q: IndexPair) -> f64 {
    let b = hex_lattice();
    norm(sub(b.point(q.k as f64, q.l as f64), deep_hole().p))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Radii and cardinalities of all shells with r <= 5, computed by a
    // 40-digit brute-force scan over |k|, |l| <= 20.
    const SHELLS_TO_5: [(f64, usize); 15] = [
        (0.62040323940139973, 3),
        (1.2408064788027995, 3),
        (1.6414326840349724, 6),
        (2.2368956911257075, 6),
        (2.4816129576055989, 3),
        (2.7042750247959729, 6),
        (3.1020161970069987, 3),
        (3.2828653680699448, 6),
        (3.4542590469234159, 6),
        (3.7737655783064704, 6),
        (4.0682561026524955, 6),
        (4.3428226758097981, 9),
        (4.473791382251415, 6),
        (4.8455041994662208, 6),
        (4.9632259152111979, 3),
    ];

    #[test]
    fn rotation_examples() {
        assert_eq!(rotate_index(0, 0), IndexPair::new(1, 0));
        assert_eq!(rotate_index(1, 0), IndexPair::new(0, 1));
        assert_eq!(rotate_index(2, -1), IndexPair::new(0, 2));
    }

    #[test]
    fn rotation_has_order_three() {
        for k in -1000..=1000i64 {
            for l in [-1000, -17, -1, 0, 1, 2, 333, 1000] {
                let q = IndexPair::new(k, l);
                let (r1, r2) = (q.rotate(), q.rotate().rotate());
                assert_eq!(r2.rotate(), q);
                assert!(q != r1 && r1 != r2 && q != r2);
                assert_eq!(q.shell_key(), r1.shell_key());
            }
        }
    }

    #[test]
    fn key_matches_geometry() {
        for k in -12..=12 {
            for l in -12..=12 {
                let q = IndexPair::new(k, l);
                assert!((q.hex_radius() - hex_distance(q)).abs() < 1e-12);
                assert_eq!(q.shell_key().rem_euclid(3), 1);
            }
        }
    }

    #[test]
    fn first_shell() {
        let s = enumerate_shells(0.7).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].radius - 0.620_403_239_401_399_7).abs() < 1e-15);
        let m: Vec<_> = s[0].members().collect();
        assert_eq!(m, vec![IndexPair::new(0, 0), IndexPair::new(1, 0), IndexPair::new(0, 1)]);
        assert!(enumerate_shells(0.5).unwrap().is_empty());
        assert!(matches!(enumerate_shells(0.0), Err(Error::Domain(_))));
        assert!(enumerate_shells(-1.0).is_err());
    }

    #[test]
    fn table_to_radius_five() {
        let s = enumerate_shells(5.0).unwrap();
        assert_eq!(s.len(), SHELLS_TO_5.len());
        for (shell, &(r, n)) in s.iter().zip(SHELLS_TO_5.iter()) {
            assert!((shell.radius - r).abs() < 1e-12, "{} vs {}", shell.radius, r);
            assert_eq!(shell.len(), n);
        }
    }

    #[test]
    fn partition_examples() {
        let t = partition_into_triples(&[(0, 1).into(), (1, 0).into(), (0, 0).into()]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].a, IndexPair::new(0, 0));
        assert!(partition_into_triples(&[]).unwrap().is_empty());
        let err = partition_into_triples(&[(0, 0).into(), (1, 0).into()]).unwrap_err();
        assert!(matches!(err, Error::Partition { k: 1, l: 0 }));
        let second: Vec<_> = enumerate_shells(1.3).unwrap()[1].members().collect();
        assert_eq!(partition_into_triples(&second).unwrap().len(), second.len() / 3);
    }

    #[test]
    fn members_are_at_shell_radius() {
        for s in enumerate_shells(10.0).unwrap() {
            for q in s.members() {
                assert!((hex_distance(q) - s.radius).abs() < 1e-9);
            }
        }
    }
}
