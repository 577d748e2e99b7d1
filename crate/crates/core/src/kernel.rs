//! Piecewise radial kernels with analytic first and second derivatives.
//!
//! A kernel is a list of pieces on consecutive intervals `(lo, hi]` (the first
//! one closed at 0) and vanishes beyond the last `hi`, its support radius.
//! At a breakpoint the left piece is used, so at `r = support` the kernel
//! takes its left limit.
//!
//! Kernels are built from short textual specs, `name[:key=value,...]`:
//!
//! | name      | kernel                                                    | keys                       |
//! |-----------|-----------------------------------------------------------|----------------------------|
//! | `default` | `2.8 - 0.05 r` on `[0, 1.4]`, `(2.9 - r)^2` on `(1.4, 2.15]` | -                        |
//! | `linear`  | `a - b r` on `[0, support]`                               | `a=3`, `b=1`, `support=2`  |
//! | `gauss`   | `amp exp(-rate r^2)` on `[0, support]`                    | `amp=1`, `rate=1`, `support=2` |
//! | `poly`    | `sum coeffs[i] r^i` on `[0, support]`                     | `coeffs=a0/a1/...`, `support=inf` |
//! | `zero`    | identically 0                                             | `support=2`                |
//!
//! Every spec also accepts `c` and `nbhd`, the constant and neighborhood
//! half-width used when certifying admissibility.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Shape {
    /// `sum coeffs[i] r^i`.
    Poly(Vec<f64>),
    /// `amp exp(-rate r^2)`.
    Gauss { amp: f64, rate: f64 },
}

impl Shape {
    fn eval(&self, r: f64) -> [f64; 3] {
        match self {
            Shape::Poly(c) => {
                let (mut f, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for &a in c.iter().rev() {
                    d2 = d2 * r + 2.0 * d1;
                    d1 = d1 * r + f;
                    f = f * r + a;
                }
                [f, d1, d2]
            }
            Shape::Gauss { amp, rate } => {
                let e = amp * (-rate * r * r).exp();
                [e, -2.0 * rate * r * e, (4.0 * rate * rate * r * r - 2.0 * rate) * e]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialKernel {
    pub spec: String,
    pub pieces: Vec<Piece>,
    pub support_radius: f64,
    /// Admissibility constant in `r f''(r) <= -c f'(r)`.
    pub c: f64,
    /// Half-width of the neighborhoods of shell radii checked for admissibility.
    pub nbhd: f64,
}

impl RadialKernel {
    pub fn new(spec: impl Into<String>, pieces: Vec<Piece>, c: f64, nbhd: f64) -> Result<Self> {
        let spec = spec.into();
        if pieces.is_empty() {
            return Err(Error::KernelSpec(format!("{spec}: no pieces")));
        }
        if pieces[0].lo != 0.0 {
            return Err(Error::KernelSpec(format!("{spec}: first piece must start at 0")));
        }
        for w in pieces.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(Error::KernelSpec(format!("{spec}: pieces are not contiguous at {}", w[0].hi)));
            }
        }
        for p in &pieces {
            if !(p.hi > p.lo) {
                return Err(Error::KernelSpec(format!("{spec}: empty interval ({}, {}]", p.lo, p.hi)));
            }
        }
        if !(c > 0.0) || !(nbhd > 0.0) || !c.is_finite() || !nbhd.is_finite() {
            return Err(Error::KernelSpec(format!("{spec}: c and nbhd must be positive, got c = {c}, nbhd = {nbhd}")));
        }
        let support_radius = pieces.last().map(|p| p.hi).unwrap_or(0.0);
        Ok(RadialKernel { spec, pieces, support_radius, c, nbhd })
    }

    pub fn parse(spec: &str) -> Result<Self> {
        spec.parse()
    }

    pub fn is_compact(&self) -> bool {
        self.support_radius.is_finite()
    }

    /// Interior breakpoints and the support radius.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.hi).filter(|h| h.is_finite()).collect()
    }

    /// `[f, f', f'']` at `r >= 0`; zero beyond the support.
    pub fn eval_all(&self, r: f64) -> [f64; 3] {
        let r = r.abs();
        if r > self.support_radius {
            return [0.0; 3];
        }
        let piece = self.pieces.iter().find(|p| r <= p.hi).unwrap_or(&self.pieces[self.pieces.len() - 1]);
        piece.shape.eval(r)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval_all(r)[0]
    }

    pub fn d1(&self, r: f64) -> f64 {
        self.eval_all(r)[1]
    }

    pub fn d2(&self, r: f64) -> f64 {
        self.eval_all(r)[2]
    }

    /// Whether `[lo, hi]` avoids every breakpoint, so the kernel is smooth on it.
    pub fn smooth_on(&self, lo: f64, hi: f64) -> bool {
        self.breakpoints().iter().all(|&b| b < lo || b > hi)
    }
}

impl fmt::Display for RadialKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

fn parse_f64(spec: &str, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::KernelSpec(format!("{spec}: {key}={v} is not a number")))?;
    if x.is_nan() {
        return Err(Error::KernelSpec(format!("{spec}: {key} is NaN")));
    }
    Ok(x)
}

impl FromStr for RadialKernel {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut kv = std::collections::BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::KernelSpec(format!("{spec}: expected key=value, got {item}")))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::KernelSpec(format!("{spec}: duplicate key {k}")));
            }
        }
        let coeffs = kv.remove("coeffs");
        let mut take = |key: &str, default: f64| -> Result<f64> {
            match kv.remove(key) {
                Some(v) => parse_f64(spec, key, &v),
                None => Ok(default),
            }
        };

        let (pieces, c, nbhd) = match name {
            "default" => {
                let pieces = vec![
                    Piece { lo: 0.0, hi: 1.4, shape: Shape::Poly(vec![2.8, -0.05]) },
                    Piece { lo: 1.4, hi: 2.15, shape: Shape::Poly(vec![2.9 * 2.9, -5.8, 1.0]) },
                ];
                (pieces, take("c", 1.5)?, take("nbhd", 0.05)?)
            }
            "linear" => {
                let (a, b, s) = (take("a", 3.0)?, take("b", 1.0)?, take("support", 2.0)?);
                (vec![Piece { lo: 0.0, hi: s, shape: Shape::Poly(vec![a, -b]) }], take("c", 0.5)?, take("nbhd", 0.05)?)
            }
            "gauss" => {
                let (amp, rate, s) = (take("amp", 1.0)?, take("rate", 1.0)?, take("support", 2.0)?);
                if !(rate > 0.0) {
                    return Err(Error::KernelSpec(format!("{spec}: rate must be positive")));
                }
                (vec![Piece { lo: 0.0, hi: s, shape: Shape::Gauss { amp, rate } }], take("c", 1.5)?, take("nbhd", 0.05)?)
            }
            "zero" => {
                let s = take("support", 2.0)?;
                (vec![Piece { lo: 0.0, hi: s, shape: Shape::Poly(vec![]) }], take("c", 1.5)?, take("nbhd", 0.05)?)
            }
            "poly" => {
                let coeffs = match &coeffs {
                    Some(v) => v
                        .split('/')
                        .map(|t| parse_f64(spec, "coeffs", t.trim()))
                        .collect::<Result<Vec<f64>>>()?,
                    None => return Err(Error::KernelSpec(format!("{spec}: poly needs coeffs=a0/a1/..."))),
                };
                let s = take("support", f64::INFINITY)?;
                (vec![Piece { lo: 0.0, hi: s, shape: Shape::Poly(coeffs) }], take("c", 1.5)?, take("nbhd", 0.05)?)
            }
            other => return Err(Error::KernelSpec(format!("unknown kernel {other:?}"))),
        };
        if let Some(k) = kv.keys().next() {
            return Err(Error::KernelSpec(format!("{spec}: unknown key {k}")));
        }
        if coeffs.is_some() && name != "poly" {
            return Err(Error::KernelSpec(format!("{spec}: unknown key coeffs")));
        }
        RadialKernel::new(spec, pieces, c, nbhd)
    }
}

impl Default for RadialKernel {
    fn default() -> Self {
        "default".parse().expect("default kernel spec is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_kernel_values() {
        let k = RadialKernel::default();
        assert_eq!(k.support_radius, 2.15);
        assert!((k.value(0.0) - 2.8).abs() < 1e-15);
        assert!((k.value(1.4) - 2.73).abs() < 1e-14);
        assert!((k.value(1.5) - 1.96).abs() < 1e-14);
        assert!((k.value(2.15) - 0.5625).abs() < 1e-14);
        assert_eq!(k.value(2.150_000_001), 0.0);
        assert_eq!(k.d1(1.0), -0.05);
        assert!((k.d1(2.0) + 1.8).abs() < 1e-14);
        assert_eq!(k.d2(2.0), 2.0);
        assert_eq!((k.c, k.nbhd), (1.5, 0.05));
    }

    #[test]
    fn polynomial_derivatives() {
        let k: RadialKernel = "poly:coeffs=1/2/3/4".parse().unwrap();
        let r = 0.7;
        assert!((k.value(r) - (1.0 + 2.0 * r + 3.0 * r * r + 4.0 * r * r * r)).abs() < 1e-14);
        assert!((k.d1(r) - (2.0 + 6.0 * r + 12.0 * r * r)).abs() < 1e-14);
        assert!((k.d2(r) - (6.0 + 24.0 * r)).abs() < 1e-14);
        assert!(!k.is_compact());
    }

    #[test]
    fn gauss_derivatives() {
        let k: RadialKernel = "gauss:rate=2,amp=3".parse().unwrap();
        let h = 1e-5;
        let r = 0.9;
        let fd1 = (k.value(r + h) - k.value(r - h)) / (2.0 * h);
        let fd2 = (k.d1(r + h) - k.d1(r - h)) / (2.0 * h);
        assert!((fd1 - k.d1(r)).abs() < 1e-8);
        assert!((fd2 - k.d2(r)).abs() < 1e-8);
    }

    #[test]
    fn left_limit_at_support() {
        let k: RadialKernel = "linear".parse().unwrap();
        assert_eq!(k.value(2.0), 1.0);
        assert_eq!(k.value(2.0 + 1e-12), 0.0);
        assert_eq!(k.value(0.0), 3.0);
    }

    #[test]
    fn bad_specs() {
        for s in ["", "nope", "linear:a", "linear:a=x", "linear:q=1", "poly", "gauss:rate=-1", "linear:c=0", "linear:a=1,a=2", "linear:support=0"] {
            assert!(s.parse::<RadialKernel>().is_err(), "{s}");
        }
    }

    #[test]
    fn zero_kernel() {
        let k: RadialKernel = "zero".parse().unwrap();
        assert_eq!(k.eval_all(1.0), [0.0; 3]);
    }
}
