//! Unit-density lattices and their moduli.
//!
//! A lattice of area one is determined up to rotation by a point
//! `tau = x + iy` of the upper half plane: it is generated by
//! `y^(-1/2) (1, 0)` and `y^(-1/2) (x, y)`. Two points generate the same
//! lattice exactly when they lie in the same orbit of the modular group, and
//! every orbit meets the fundamental domain `|tau| >= 1, |Re tau| <= 1/2`.
//!
//! The hexagonal lattice sits at `(x, y) = (1/2, sqrt(3)/2)`, its deep hole
//! `p` is the circumcenter of the triangle `0, v, w`.

use serde::Serialize;

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

/// `(x, y)` of the hexagonal lattice.
pub const HEX_X: f64 = 0.5;
pub const HEX_Y: f64 = 0.866_025_403_784_438_6;

/// Slack used when testing membership in the fundamental domain.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Iteration cap for [`reduce_to_fundamental_domain`].
pub const MAX_REDUCTION_STEPS: usize = 10_000;

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(s: f64, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// A point `x + iy` of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfPlanePoint {
    pub x: f64,
    pub y: f64,
}

impl HalfPlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::domain(format!("non-finite half-plane point ({x}, {y})")));
        }
        if y <= 0.0 {
            return Err(Error::domain(format!("imaginary part must be positive, got {y}")));
        }
        Ok(HalfPlanePoint { x, y })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn abs(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn in_fundamental_domain(&self, tol: f64) -> bool {
        self.abs() >= 1.0 - tol && self.x.abs() <= 0.5 + tol
    }

    /// `-1 / tau`.
    fn inverted(&self) -> Self {
        let n = self.norm_sqr();
        HalfPlanePoint { x: -self.x / n, y: self.y / n }
    }
}

/// An integer matrix `[[a, b], [c, d]]` with determinant one, acting on the
/// half plane by `tau -> (a tau + b) / (c tau + d)`.
///
/// `M` and `-M` act identically; [`UnimodularMatrix::canonical`] picks the
/// representative with `c > 0`, or `c == 0` and `a > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct UnimodularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl UnimodularMatrix {
    pub const IDENTITY: UnimodularMatrix = UnimodularMatrix { a: 1, b: 0, c: 0, d: 1 };

    /// `tau -> -1/tau`.
    pub const INVERSION: UnimodularMatrix = UnimodularMatrix { a: 0, b: -1, c: 1, d: 0 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let m = UnimodularMatrix { a, b, c, d };
        if m.det() != 1 {
            return Err(Error::domain(format!("determinant of [[{a}, {b}], [{c}, {d}]] is {}", m.det())));
        }
        Ok(m)
    }

    /// `tau -> tau + n`.
    pub fn translation(n: i64) -> Self {
        UnimodularMatrix { a: 1, b: n, c: 0, d: 1 }
    }

    /// Exact determinant.
    pub fn det(&self) -> i128 {
        self.a as i128 * self.d as i128 - self.b as i128 * self.c as i128
    }

    pub fn checked_mul(&self, rhs: &UnimodularMatrix) -> Option<UnimodularMatrix> {
        let dot = |p: i64, q: i64, r: i64, s: i64| p.checked_mul(q)?.checked_add(r.checked_mul(s)?);
        Some(UnimodularMatrix {
            a: dot(self.a, rhs.a, self.b, rhs.c)?,
            b: dot(self.a, rhs.b, self.b, rhs.d)?,
            c: dot(self.c, rhs.a, self.d, rhs.c)?,
            d: dot(self.c, rhs.b, self.d, rhs.d)?,
        })
    }

    pub fn canonical(self) -> Self {
        if self.c < 0 || (self.c == 0 && self.a < 0) {
            UnimodularMatrix { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            self
        }
    }

    /// Fractional-linear action on the half plane.
    pub fn act(&self, tau: HalfPlanePoint) -> HalfPlanePoint {
        let (a, b, c, d) = (self.a as f64, self.b as f64, self.c as f64, self.d as f64);
        // (a tau + b) / (c tau + d)
        let (nr, ni) = (a * tau.x + b, a * tau.y);
        let (dr, di) = (c * tau.x + d, c * tau.y);
        let den = dr * dr + di * di;
        HalfPlanePoint {
            x: (nr * dr + ni * di) / den,
            y: (ni * dr - nr * di) / den,
        }
    }
}

impl Default for UnimodularMatrix {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Reduce `tau` into the fundamental domain.
///
/// Returns `(tau', B)` with `tau'` in the domain and `B tau' = tau`. On the
/// boundary the representative with `Re tau' = +1/2` (vertical edges) and
/// `Re tau' >= 0` (unit arc) is chosen.
pub fn reduce_to_fundamental_domain(tau: HalfPlanePoint) -> Result<(HalfPlanePoint, UnimodularMatrix)> {
    let tau = HalfPlanePoint::new(tau.x, tau.y)?;
    let failed = || Error::ReductionFailed { x: tau.x, y: tau.y, iterations: MAX_REDUCTION_STEPS };

    let mut z = tau;
    let mut m = UnimodularMatrix::IDENTITY;
    let mut reduced = false;
    for _ in 0..MAX_REDUCTION_STEPS {
        if z.x.abs() > 0.5 + DOMAIN_TOL {
            let n = z.x.round();
            if n.abs() > 1e15 {
                return Err(failed());
            }
            z.x -= n;
            m = m.checked_mul(&UnimodularMatrix::translation(n as i64)).ok_or_else(failed)?;
        } else if z.norm_sqr() < 1.0 - DOMAIN_TOL {
            z = z.inverted();
            // z_new = S z, so z = S^-1 z_new and S^-1 = -S acts like S.
            m = m.checked_mul(&UnimodularMatrix::INVERSION).ok_or_else(failed)?;
        } else {
            reduced = true;
            break;
        }
    }
    if !reduced {
        return Err(failed());
    }

    // Boundary ties.
    if (z.x + 0.5).abs() <= DOMAIN_TOL {
        z.x += 1.0;
        m = m.checked_mul(&UnimodularMatrix::translation(-1)).ok_or_else(failed)?;
    }
    if (z.norm_sqr() - 1.0).abs() <= DOMAIN_TOL && z.x < 0.0 {
        z = z.inverted();
        m = m.checked_mul(&UnimodularMatrix::INVERSION).ok_or_else(failed)?;
    }
    Ok((z, m.canonical()))
}

/// Generating vectors of a unit-density lattice in the `(x, y)` chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Basis {
    pub v1: Vec2,
    pub w1: Vec2,
    pub x: f64,
    pub y: f64,
}

impl Basis {
    pub fn from_params(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::domain(format!("non-finite lattice parameters ({x}, {y})")));
        }
        if y <= 0.0 {
            return Err(Error::domain(format!("lattice parameter y must be positive, got {y}")));
        }
        let s = 1.0 / y.sqrt();
        Ok(Basis { v1: [s, 0.0], w1: [s * x, s * y], x, y })
    }

    pub fn hexagonal() -> Self {
        Basis::from_params(HEX_X, HEX_Y).expect("hexagonal parameters are valid")
    }

    pub fn from_half_plane(tau: HalfPlanePoint) -> Result<Self> {
        Basis::from_params(tau.x, tau.y)
    }

    pub fn tau(&self) -> HalfPlanePoint {
        HalfPlanePoint { x: self.x, y: self.y }
    }

    /// `k v1 + l w1`.
    pub fn point(&self, k: f64, l: f64) -> Vec2 {
        [k * self.v1[0] + l * self.w1[0], k * self.v1[1] + l * self.w1[1]]
    }

    pub fn cell_area(&self) -> f64 {
        cross(self.v1, self.w1).abs()
    }

    /// Coordinates `(s, t)` with `z = s v1 + t w1`.
    pub fn cell_coords(&self, z: Vec2) -> (f64, f64) {
        let det = cross(self.v1, self.w1);
        (cross(z, self.w1) / det, cross(self.v1, z) / det)
    }

    /// All integer pairs `(k, l)` with `|k v1 + l w1 - center| <= radius`,
    /// in lexicographic order.
    pub fn points_within(&self, center: Vec2, radius: f64) -> Vec<(i64, i64, Vec2)> {
        let det = cross(self.v1, self.w1).abs();
        let (kc, lc) = self.cell_coords(center);
        let dk = radius * norm(self.w1) / det;
        let dl = radius * norm(self.v1) / det;
        let (k0, k1) = ((kc - dk).floor() as i64, (kc + dk).ceil() as i64);
        let (l0, l1) = ((lc - dl).floor() as i64, (lc + dl).ceil() as i64);
        let r2 = radius * radius;
        let mut out = Vec::new();
        for k in k0..=k1 {
            for l in l0..=l1 {
                let q = self.point(k as f64, l as f64);
                let e = sub(q, center);
                if e[0] * e[0] + e[1] * e[1] <= r2 {
                    out.push((k, l, q));
                }
            }
        }
        out
    }
}

/// The circumcenter of the fundamental triangle of the hexagonal lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeepHole {
    pub p: Vec2,
}

impl DeepHole {
    /// The other deep hole of the fundamental cell, `2(v + w)/3`.
    pub fn second(&self) -> Vec2 {
        scale(2.0, self.p)
    }
}

pub fn hex_lattice() -> Basis {
    Basis::hexagonal()
}

/// `p = (1 / (3^(1/4) sqrt 2), 1 / (3^(3/4) sqrt 2))`.
pub fn deep_hole() -> DeepHole {
    let q = 3f64.powf(0.25);
    let s2 = std::f64::consts::SQRT_2;
    DeepHole { p: [1.0 / (q * s2), 1.0 / (q * q * q * s2)] }
}

pub fn basis_from_params(x: f64, y: f64) -> Result<Basis> {
    Basis::from_params(x, y)
}

/// Euclidean distance of the concatenated basis vectors in R^4.
pub fn lattice_distance(b1: &Basis, b2: &Basis) -> f64 {
    let dv = sub(b1.v1, b2.v1);
    let dw = sub(b1.w1, b2.w1);
    (dv[0] * dv[0] + dv[1] * dv[1] + dw[0] * dw[0] + dw[1] * dw[1]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hex_constants() {
        assert_eq!(HEX_Y, 3f64.sqrt() / 2.0);
        let b = hex_lattice();
        assert!(close(b.v1[0], 1.074_569_931_823_541_9, 1e-15));
        assert!(close(b.v1[0], std::f64::consts::SQRT_2 / 3f64.powf(0.25), 1e-15));
        assert!(close(b.w1[0], 1.0 / (3f64.powf(0.25) * std::f64::consts::SQRT_2), 1e-15));
        assert!(close(b.w1[1], 3f64.powf(0.25) / std::f64::consts::SQRT_2, 1e-15));
        assert!(close(b.cell_area(), 1.0, 1e-15));
        let a = norm(b.v1);
        assert!(close(norm(b.w1), a, 1e-15));
        assert!(close(norm(sub(b.v1, b.w1)), a, 1e-15));
    }

    #[test]
    fn deep_hole_values() {
        let p = deep_hole().p;
        // 40-digit reference values.
        assert!(close(p[0], 0.537_284_965_911_770_96, 1e-15));
        assert!(close(p[1], 0.310_201_619_700_699_87, 1e-15));
        assert!(close(norm(p), 0.620_403_239_401_399_73, 1e-15));
        let b = hex_lattice();
        let c = scale(1.0 / 3.0, add(b.v1, b.w1));
        assert!(close(c[0], p[0], 1e-15) && close(c[1], p[1], 1e-15));
        assert!(close(norm(sub(p, b.v1)), norm(p), 1e-15));
        assert!(close(norm(sub(p, b.w1)), norm(p), 1e-15));
    }

    #[test]
    fn basis_examples() {
        let sq = basis_from_params(0.0, 1.0).unwrap();
        assert_eq!(sq.v1, [1.0, 0.0]);
        assert_eq!(sq.w1, [0.0, 1.0]);
        assert_eq!(basis_from_params(HEX_X, HEX_Y).unwrap(), hex_lattice());
        assert!(close(basis_from_params(0.51, 0.87).unwrap().cell_area(), 1.0, 1e-15));
        assert!(matches!(basis_from_params(0.3, 0.0), Err(Error::Domain(_))));
        assert!(matches!(basis_from_params(0.3, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn distance_examples() {
        let h = hex_lattice();
        assert_eq!(lattice_distance(&h, &h), 0.0);
        let a = basis_from_params(0.0, 1.0).unwrap();
        let b = basis_from_params(0.1, 1.0).unwrap();
        assert!(close(lattice_distance(&a, &b), 0.1, 1e-15));
        assert_eq!(lattice_distance(&a, &b), lattice_distance(&b, &a));
        // Theta(delta): the ratio d/delta settles as delta shrinks.
        let r: Vec<f64> = [1e-3, 1e-4, 1e-5]
            .iter()
            .map(|&e| lattice_distance(&h, &basis_from_params(HEX_X + e, HEX_Y).unwrap()) / e)
            .collect();
        assert!(close(r[0], r[2], 1e-3) && r[2] > 0.5);
    }

    #[test]
    fn reduction_examples() {
        let (t, m) = reduce_to_fundamental_domain(HalfPlanePoint::new(2.5, HEX_Y).unwrap()).unwrap();
        assert!(close(t.x, 0.5, 1e-15) && close(t.y, HEX_Y, 1e-15));
        assert_eq!(m, UnimodularMatrix::translation(2));

        let (t, m) = reduce_to_fundamental_domain(HalfPlanePoint::new(0.0, 0.5).unwrap()).unwrap();
        assert!(close(t.x, 0.0, 1e-15) && close(t.y, 2.0, 1e-15));
        assert_eq!(m, UnimodularMatrix::INVERSION);

        let tau = HalfPlanePoint::new(0.37, 0.09).unwrap();
        let (t, m) = reduce_to_fundamental_domain(tau).unwrap();
        assert!(t.in_fundamental_domain(DOMAIN_TOL));
        assert_eq!(m.det(), 1);
        let back = m.act(t);
        assert!(close(back.x, tau.x, 1e-12) && close(back.y, tau.y, 1e-12));
    }

    #[test]
    fn reduction_of_hex_point_is_identity() {
        let (t, m) = reduce_to_fundamental_domain(hex_lattice().tau()).unwrap();
        assert_eq!(m, UnimodularMatrix::IDENTITY);
        assert_eq!(t, hex_lattice().tau());
    }

    #[test]
    fn left_edge_moves_to_right_edge() {
        let (t, m) = reduce_to_fundamental_domain(HalfPlanePoint::new(-0.5, 2.0).unwrap()).unwrap();
        assert!(close(t.x, 0.5, 1e-15));
        assert_eq!(m, UnimodularMatrix::translation(-1));
        // arc with negative real part flips to positive
        let (t, m) = reduce_to_fundamental_domain(HalfPlanePoint::new(-0.4, 0.84f64.sqrt()).unwrap()).unwrap();
        assert!(t.x > 0.0);
        assert_eq!(m, UnimodularMatrix::INVERSION);
    }

    #[test]
    fn bad_inputs() {
        assert!(HalfPlanePoint::new(0.0, 0.0).is_err());
        assert!(HalfPlanePoint::new(f64::NAN, 1.0).is_err());
        assert!(UnimodularMatrix::new(1, 1, 1, 1).is_err());
        assert_eq!(UnimodularMatrix::new(2, 1, 1, 1).unwrap().det(), 1);
        assert!(matches!(
            reduce_to_fundamental_domain(HalfPlanePoint { x: 0.1, y: -1.0 }),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn canonical_sign() {
        let m = UnimodularMatrix { a: 0, b: 1, c: -1, d: 0 }.canonical();
        assert_eq!(m, UnimodularMatrix::INVERSION);
        let m = UnimodularMatrix { a: -1, b: -3, c: 0, d: -1 }.canonical();
        assert_eq!(m, UnimodularMatrix::translation(3));
    }

    #[test]
    fn points_within_matches_brute_force() {
        let b = basis_from_params(0.3, 0.4).unwrap();
        let c = [0.7, -0.2];
        let fast = b.points_within(c, 2.5);
        let mut slow = Vec::new();
        for k in -30..=30i64 {
            for l in -30..=30i64 {
                let q = b.point(k as f64, l as f64);
                if norm(sub(q, c)) <= 2.5 {
                    slow.push((k, l));
                }
            }
        }
        let fast: Vec<(i64, i64)> = fast.into_iter().map(|(k, l, _)| (k, l)).collect();
        assert_eq!(fast, slow);
    }
}
