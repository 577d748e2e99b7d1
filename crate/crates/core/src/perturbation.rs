//! Per-triple energies, their derivatives at the hexagonal point, and the
//! shell-gap sweep.
//!
//! A rotation triple `(k, l), (1-k-l, k), (l, 1-k-l)` of lattice indices is
//! followed into the lattice with parameters `(x, y)`; its energy is the sum
//! of `phi(|gamma - p|)` over the three image points, with `p` the fixed
//! hexagonal deep hole. `phi` is the square, the identity, or a radial kernel.
//!
//! Energies for the square and identity profiles are evaluated in
//! double-double arithmetic so that central differences with small steps are
//! not swamped by cancellation.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::kernel::RadialKernel;
use crate::moduli::{basis_from_params, hex_lattice, lattice_distance, HEX_X, HEX_Y};
use crate::shells::{IndexPair, ShellIndexSet, Triple};

/// Default central-difference step for gradients.
pub const GRADIENT_STEP: f64 = 1e-7;
/// Default step for Hessian stencils.
pub const HESSIAN_STEP: f64 = 1e-4;
/// Steps below this are rejected.
pub const MIN_STEP: f64 = 1e-12;
/// Exclusion radius around the fixed point `(1/3, 1/3)` of the rotation.
pub const SINGULARITY_TOL: f64 = 1e-3;

/// `4/sqrt(3) - 2/3`, the smallest `lambda_min` of the squared energy.
pub const SQUARED_FLOOR: f64 = 1.642_734_410_091_836;
/// `(4 - 2 sqrt 3) / (3 sqrt 3)`.
pub const SQUARED_STRICT_BOUND: f64 = 0.103_133_692_252_834_4;
/// `(9 - sqrt 21) / (2^(3/2) 3^(3/4))`, the smallest `lambda_min` of the
/// linear energy over `|k|, |l| <= 100`.
pub const LINEAR_SCAN_MIN: f64 = 0.685_146_087_164_968_5;

struct DdConsts {
    p0: TwoFloat,
    p1: TwoFloat,
}

fn dd() -> &'static DdConsts {
    static C: OnceLock<DdConsts> = OnceLock::new();
    C.get_or_init(|| {
        let q = TwoFloat::from(3.0).sqrt().sqrt();
        let s2 = TwoFloat::from(2.0).sqrt();
        let one = TwoFloat::from(1.0);
        DdConsts { p0: one / (q * s2), p1: one / (q * q * q * s2) }
    })
}

/// Shape of `phi` in the triple energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Profile {
    Squared,
    Linear,
    Kernel(RadialKernel),
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Squared => "squared",
            Profile::Linear => "linear",
            Profile::Kernel(_) => "kernel",
        }
    }

    /// `phi(r)` in double-double where possible.
    fn phi_dd(&self, r2: TwoFloat) -> TwoFloat {
        match self {
            Profile::Squared => r2,
            Profile::Linear => r2.sqrt(),
            Profile::Kernel(k) => TwoFloat::from(k.value(r2.sqrt().hi())),
        }
    }
}

/// The energy of one rotation triple as a function of `(x, y)`.
///
/// `(k, l)` may be real; the triple is then `(k, l), (1-k-l, k), (l, 1-k-l)`
/// over the reals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleEnergy {
    pub profile: Profile,
    pub k: f64,
    pub l: f64,
}

impl TripleEnergy {
    pub fn new(profile: Profile, triple: &Triple) -> Self {
        TripleEnergy { profile, k: triple.a.k as f64, l: triple.a.l as f64 }
    }

    pub fn squared(triple: &Triple) -> Self {
        Self::new(Profile::Squared, triple)
    }

    pub fn linear(triple: &Triple) -> Self {
        Self::new(Profile::Linear, triple)
    }

    pub fn at_index(profile: Profile, q: IndexPair) -> Self {
        TripleEnergy { profile, k: q.k as f64, l: q.l as f64 }
    }

    /// Real-argument extension.
    pub fn at_real(profile: Profile, k: f64, l: f64) -> Result<Self> {
        if !k.is_finite() || !l.is_finite() {
            return Err(Error::domain(format!("non-finite index ({k}, {l})")));
        }
        Ok(TripleEnergy { profile, k, l })
    }

    fn members(&self) -> [(f64, f64); 3] {
        let m = 1.0 - self.k - self.l;
        [(self.k, self.l), (m, self.k), (self.l, m)]
    }

    pub fn eval_dd(&self, x: f64, y: f64) -> Result<TwoFloat> {
        check_params(x, y)?;
        let c = dd();
        let s = TwoFloat::from(y).sqrt();
        let mut total = TwoFloat::from(0.0);
        for (k, l) in self.members() {
            let gx = TwoFloat::from(k) + TwoFloat::new_mul(l, x) - s * c.p0;
            let gy = TwoFloat::new_mul(l, y) - s * c.p1;
            total += self.profile.phi_dd((gx * gx + gy * gy) / y);
        }
        Ok(total)
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.eval_dd(x, y)?.hi())
    }
}

fn check_params(x: f64, y: f64) -> Result<()> {
    if !x.is_finite() || !y.is_finite() || y <= 0.0 {
        return Err(Error::domain(format!("lattice parameters must satisfy y > 0, got ({x}, {y})")));
    }
    Ok(())
}

/// Direct sum of the three squared distances.
pub fn triple_energy_squared(triple: &Triple, x: f64, y: f64) -> Result<f64> {
    TripleEnergy::squared(triple).eval(x, y)
}

/// Direct sum of the three distances.
pub fn triple_energy_linear(triple: &Triple, x: f64, y: f64) -> Result<f64> {
    TripleEnergy::linear(triple).eval(x, y)
}

/// Closed form of the squared triple energy,
///
/// ```text
/// f = 2((x - 1/2)^2 + y^2 + 3/4) Q / y
///   + (3x^2 - 3^(3/4) sqrt2 x sqrt y + 3y^2 - 3^(1/4) sqrt2 y^(3/2)
///      + 2 sqrt3 y - 3^(3/4) sqrt2 sqrt y + 3) / (3y)
/// ```
///
/// with `Q = (k-1/3)^2 + (k-1/3)(l-1/3) + (l-1/3)^2 - 1/3`.
pub fn triple_energy_squared_closed_form(k: f64, l: f64, x: f64, y: f64) -> Result<f64> {
    check_params(x, y)?;
    let (a, b) = (k - 1.0 / 3.0, l - 1.0 / 3.0);
    let q = a * a + a * b + b * b - 1.0 / 3.0;
    let s2 = std::f64::consts::SQRT_2;
    let c34 = 3f64.powf(0.75) * s2;
    let c14 = 3f64.powf(0.25) * s2;
    let sy = y.sqrt();
    let dx = x - 0.5;
    let rest = 3.0 * x * x - c34 * x * sy + 3.0 * y * y - c14 * y * sy + 2.0 * 3f64.sqrt() * y - c34 * sy + 3.0;
    Ok(2.0 * (dx * dx + y * y + 0.75) / y * q + rest / (3.0 * y))
}

/// `(f1 + f2 + f3) / sqrt y` with
/// `f1 = sqrt((k + l x - a sqrt y)^2 + (l y - b sqrt y)^2)` and its two
/// rotations, `(a, b)` the deep hole.
pub fn triple_energy_linear_closed_form(k: f64, l: f64, x: f64, y: f64) -> Result<f64> {
    check_params(x, y)?;
    let q = 3f64.powf(0.25);
    let s2 = std::f64::consts::SQRT_2;
    let (a, b) = (1.0 / (q * s2), 1.0 / (q * q * q * s2));
    let sy = y.sqrt();
    let m = 1.0 - k - l;
    let f1 = (k + l * x - a * sy).hypot(l * y - b * sy);
    let f2 = (m + k * x - a * sy).hypot(k * y - b * sy);
    let f3 = (m * x + l - a * sy).hypot(m * y - b * sy);
    Ok((f1 + f2 + f3) / sy)
}

/// Entries and eigenvalues of a symmetric 2x2 Hessian `[[h1, h2], [h2, h3]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianRecord {
    pub k: i64,
    pub l: i64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl HessianRecord {
    pub fn from_entries(k: i64, l: i64, h1: f64, h2: f64, h3: f64) -> Self {
        let (lambda_min, lambda_max) = sym_eigenvalues(h1, h2, h3);
        HessianRecord { k, l, h1, h2, h3, lambda_min, lambda_max }
    }

    /// `|H - other|_F / |other|_F`.
    pub fn relative_error(&self, other: &HessianRecord) -> f64 {
        let d = (self.h1 - other.h1).powi(2) + 2.0 * (self.h2 - other.h2).powi(2) + (self.h3 - other.h3).powi(2);
        let n = other.h1.powi(2) + 2.0 * other.h2.powi(2) + other.h3.powi(2);
        (d / n).sqrt()
    }
}

/// Eigenvalues of `[[a, b], [b, c]]`, ascending.
pub fn sym_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let m = 0.5 * (a + c);
    let d = (0.5 * (a - c)).hypot(b);
    (m - d, m + d)
}

/// Exact closed-form Hessian of the squared energy at the hexagonal point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquaredHessian {
    pub record: HessianRecord,
    /// `Q(k, l) = k^2 + kl + l^2 - k - l`, an integer.
    pub q: i128,
}

impl SquaredHessian {
    /// `lambda_min >= 4/sqrt3 - 2/3`, i.e. `Q >= 0`.
    pub fn above_floor(&self) -> bool {
        self.q >= 0
    }

    /// `lambda_min == 4/sqrt3 - 2/3`, i.e. `Q == 0`.
    pub fn attains_floor(&self) -> bool {
        self.q == 0
    }

    /// `lambda_min > (4 - 2 sqrt3) / (3 sqrt3)`, i.e. `24 Q + 8 > 0`.
    pub fn above_strict_bound(&self) -> bool {
        24 * self.q + 8 > 0
    }
}

/// `h1 = h3 = (8 Q + 4)/sqrt3`, `h2 = -2/3`; `Q` is evaluated in integers.
pub fn closed_form_hessian_squared(k: i64, l: i64) -> SquaredHessian {
    let (k1, l1) = (k as i128, l as i128);
    let q = k1 * k1 + k1 * l1 + l1 * l1 - k1 - l1;
    let h1 = (8.0 * q as f64 + 4.0) / 3f64.sqrt();
    let h2 = -2.0 / 3.0;
    let record = HessianRecord { k, l, h1, h2, h3: h1, lambda_min: h1 - 2.0 / 3.0, lambda_max: h1 + 2.0 / 3.0 };
    SquaredHessian { record, q }
}

fn check_step(step: f64, y: f64, reach: f64) -> Result<()> {
    if !step.is_finite() || step < MIN_STEP {
        return Err(Error::domain(format!("finite-difference step must be at least {MIN_STEP}, got {step}")));
    }
    if y - reach * step <= 0.0 {
        return Err(Error::domain(format!("step {step} leaves the half plane at y = {y}")));
    }
    Ok(())
}

/// Central-difference gradient `((f+ - f-) / 2h)` in both coordinates.
///
/// The denominator is the step actually realised in floating point.
pub fn numeric_gradient(energy: &TripleEnergy, x: f64, y: f64, step: f64) -> Result<[f64; 2]> {
    check_params(x, y)?;
    check_step(step, y, 1.0)?;
    let (xp, xm) = (x + step, x - step);
    let (yp, ym) = (y + step, y - step);
    let gx = (energy.eval_dd(xp, y)? - energy.eval_dd(xm, y)?).hi() / (xp - xm);
    let gy = (energy.eval_dd(x, yp)? - energy.eval_dd(x, ym)?).hi() / (yp - ym);
    Ok([gx, gy])
}

/// Second-difference Hessian on the nine-point stencil.
///
/// The record carries `(k, l)` rounded to integers.
pub fn numeric_hessian(energy: &TripleEnergy, x: f64, y: f64, step: f64) -> Result<HessianRecord> {
    check_params(x, y)?;
    check_step(step, y, 2.0)?;
    let f = |a: f64, b: f64| energy.eval_dd(a, b);
    let (xp, xm, yp, ym) = (x + step, x - step, y + step, y - step);
    let (hxp, hxm, hyp, hym) = (xp - x, x - xm, yp - y, y - ym);
    let f0 = f(x, y)?;
    let second = |fp: TwoFloat, fm: TwoFloat, hp: f64, hm: f64| -> f64 {
        2.0 * ((fp - f0) / hp - (f0 - fm) / hm).hi() / (hp + hm)
    };
    let h1 = second(f(xp, y)?, f(xm, y)?, hxp, hxm);
    let h3 = second(f(x, yp)?, f(x, ym)?, hyp, hym);
    let h2 = ((f(xp, yp)? - f(xp, ym)?) - (f(xm, yp)? - f(xm, ym)?)).hi() / ((xp - xm) * (yp - ym));
    Ok(HessianRecord::from_entries(energy.k.round() as i64, energy.l.round() as i64, h1, h2, h3))
}

/// `lim h1/r = lim h3/r = (3^(3/4)/2) sqrt(2 + sin 2t)`.
pub fn linear_h1_limit(t: f64) -> f64 {
    3f64.powf(0.75) / 2.0 * (2.0 + (2.0 * t).sin()).sqrt()
}

/// `lim h2 = 3^(1/4) (3 cos t + cos 3t + 4 sin 3t) / (4 (2 + sin 2t)^(3/2))`.
pub fn linear_h2_limit(t: f64) -> f64 {
    3f64.powf(0.25) * (3.0 * t.cos() + (3.0 * t).cos() + 4.0 * (3.0 * t).sin())
        / (4.0 * (2.0 + (2.0 * t).sin()).powf(1.5))
}

/// `(h1/r, h2, h3/r)` of the linear energy at the real index
/// `(r cos t, r sin t)`, by finite differences.
pub fn asymptotic_linear_limits(t: f64, r: f64, step: f64) -> Result<(f64, f64, f64)> {
    if !(r > 0.0) || !r.is_finite() || !t.is_finite() {
        return Err(Error::domain(format!("need r > 0 and finite t, got r = {r}, t = {t}")));
    }
    let (k, l) = (r * t.cos(), r * t.sin());
    if (k - 1.0 / 3.0).hypot(l - 1.0 / 3.0) < SINGULARITY_TOL {
        return Err(Error::Singularity { k, l, tolerance: SINGULARITY_TOL });
    }
    let e = TripleEnergy::at_real(Profile::Linear, k, l)?;
    let h = numeric_hessian(&e, HEX_X, HEX_Y, step)?;
    Ok((h.h1 / r, h.h2, h.h3 / r))
}

/// `n` unit directions in the `(x, y)` chart at angles `2 pi i / n`.
pub fn unit_directions(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

/// Parameters `hex + s u` with `lattice_distance(hex, basis) = d`, by
/// bisection on `s`.
pub fn perturbed_params(direction: [f64; 2], d: f64) -> Result<(f64, f64)> {
    let n = direction[0].hypot(direction[1]);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::domain("perturbation direction must be a nonzero finite vector"));
    }
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("perturbation distance must be nonnegative, got {d}")));
    }
    let u = [direction[0] / n, direction[1] / n];
    if d == 0.0 {
        return Ok((HEX_X, HEX_Y));
    }
    let hex = hex_lattice();
    let at = |s: f64| -> Option<f64> {
        let y = HEX_Y + s * u[1];
        if y <= 0.0 {
            return None;
        }
        basis_from_params(HEX_X + s * u[0], y).ok().map(|b| lattice_distance(&hex, &b))
    };
    let mut hi = d;
    loop {
        match at(hi) {
            Some(v) if v >= d => break,
            Some(_) => hi *= 2.0,
            None => return Err(Error::domain(format!("distance {d} is not reachable along ({}, {})", u[0], u[1]))),
        }
        if hi > 1e6 {
            return Err(Error::domain(format!("distance {d} is not reachable along ({}, {})", u[0], u[1])));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid).is_some_and(|v| v < d) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    Ok((HEX_X + s * u[0], HEX_Y + s * u[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapResult {
    pub radius: f64,
    pub shell_size: usize,
    pub gap: f64,
    pub distance: f64,
}

/// `sum phi(|p - gamma|) - |A_r| phi(r)` over the shell's members in the
/// lattice `(x, y)`.
pub fn shell_gap(shell: &ShellIndexSet, x: f64, y: f64, profile: &Profile) -> Result<GapResult> {
    check_params(x, y)?;
    if (x, y) == (HEX_X, HEX_Y) {
        // C_r = A_r; skip the rounding of sqrt(3)/2.
        return Ok(GapResult { radius: shell.radius, shell_size: shell.len(), gap: 0.0, distance: 0.0 });
    }
    let mut total = TwoFloat::from(0.0);
    for t in &shell.triples {
        total += TripleEnergy::new(profile.clone(), t).eval_dd(x, y)?;
    }
    // r^2 = 2n / (3 sqrt 3), exactly keyed.
    let r2 = TwoFloat::from(2 * shell.key) / (TwoFloat::from(3.0) * TwoFloat::from(3.0).sqrt());
    let reference = profile.phi_dd(r2) * shell.len() as f64;
    let distance = lattice_distance(&hex_lattice(), &basis_from_params(x, y)?);
    Ok(GapResult { radius: shell.radius, shell_size: shell.len(), gap: (total - reference).hi(), distance })
}

/// One row of a gap sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRecord {
    pub shell: usize,
    pub radius: f64,
    pub shell_size: usize,
    pub direction: usize,
    pub d: f64,
    pub distance: f64,
    pub gap: f64,
}

/// Quadratic fit of one (shell, direction) series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRecord {
    pub shell: usize,
    pub radius: f64,
    pub shell_size: usize,
    pub direction: usize,
    /// Least-squares `kappa` in `gap = kappa d^2`.
    pub kappa: f64,
    /// `kappa / (r |A_r|)`.
    pub normalized: f64,
    /// Log-log slope of gap against distance; NaN when undefined.
    pub slope: f64,
    /// All gaps at positive distance were below 1e-15 in magnitude.
    pub floor_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellSummary {
    pub shell: usize,
    pub radius: f64,
    pub shell_size: usize,
    pub min_kappa: f64,
    pub min_normalized: f64,
    pub min_slope: f64,
    pub max_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub profile: String,
    pub records: Vec<GapRecord>,
    pub fits: Vec<FitRecord>,
    pub shells: Vec<ShellSummary>,
    pub min_kappa: f64,
    /// Every gap at positive distance is positive.
    pub all_gaps_positive: bool,
    pub floor_warning: bool,
}

impl PerturbationReport {
    /// Every fit with a defined slope has `|slope - 2| <= tol`; fits flagged
    /// with a floor warning are skipped.
    pub fn slopes_within(&self, tol: f64) -> bool {
        self.fits.iter().filter(|f| !f.floor_warning).all(|f| (f.slope - 2.0).abs() <= tol)
    }

    pub fn worst_slope_deviation(&self) -> f64 {
        self.fits
            .iter()
            .filter(|f| !f.floor_warning)
            .map(|f| (f.slope - 2.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Gap below which a series is treated as numerical noise.
pub const GAP_FLOOR: f64 = 1e-15;

fn fit_series(points: &[(f64, f64)]) -> (f64, f64, bool) {
    let pos: Vec<_> = points.iter().copied().filter(|&(d, _)| d > 0.0).collect();
    let floor = pos.iter().all(|&(_, g)| g.abs() < GAP_FLOOR);
    let num: f64 = pos.iter().map(|&(d, g)| g * d * d).sum();
    let den: f64 = pos.iter().map(|&(d, _)| d.powi(4)).sum();
    let kappa = if den > 0.0 { num / den } else { f64::NAN };
    let slope = if pos.len() >= 2 && pos.iter().all(|&(_, g)| g > 0.0) {
        let n = pos.len() as f64;
        let xs: Vec<f64> = pos.iter().map(|&(d, _)| d.ln()).collect();
        let ys: Vec<f64> = pos.iter().map(|&(_, g)| g.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    (kappa, slope, floor)
}

/// Sweep every shell along every direction over `d_values` and fit
/// `gap = kappa d^2` per series.
pub fn coercivity_fit(
    shells: &[ShellIndexSet],
    directions: &[[f64; 2]],
    d_values: &[f64],
    profile: &Profile,
) -> Result<PerturbationReport> {
    let params: Vec<Vec<(f64, f64)>> = directions
        .iter()
        .map(|&u| d_values.iter().map(|&d| perturbed_params(u, d)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> =
        (0..shells.len()).flat_map(|s| (0..directions.len()).map(move |j| (s, j))).collect();
    let results: Vec<(Vec<GapRecord>, FitRecord)> = jobs
        .par_iter()
        .map(|&(si, di)| -> Result<_> {
            let shell = &shells[si];
            let mut recs = Vec::with_capacity(d_values.len());
            for (&d, &(x, y)) in d_values.iter().zip(&params[di]) {
                let g = shell_gap(shell, x, y, profile)?;
                recs.push(GapRecord {
                    shell: si,
                    radius: shell.radius,
                    shell_size: shell.len(),
                    direction: di,
                    d,
                    distance: g.distance,
                    gap: g.gap,
                });
            }
            let pts: Vec<(f64, f64)> = recs.iter().map(|r| (r.distance, r.gap)).collect();
            let (kappa, slope, floor_warning) = fit_series(&pts);
            let fit = FitRecord {
                shell: si,
                radius: shell.radius,
                shell_size: shell.len(),
                direction: di,
                kappa,
                normalized: kappa / (shell.radius * shell.len() as f64),
                slope,
                floor_warning,
            };
            Ok((recs, fit))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut fits = Vec::new();
    for (r, f) in results {
        records.extend(r);
        fits.push(f);
    }
    let summaries = shells
        .iter()
        .enumerate()
        .map(|(si, s)| {
            let fs: Vec<&FitRecord> = fits.iter().filter(|f| f.shell == si).collect();
            ShellSummary {
                shell: si,
                radius: s.radius,
                shell_size: s.len(),
                min_kappa: fs.iter().map(|f| f.kappa).fold(f64::INFINITY, f64::min),
                min_normalized: fs.iter().map(|f| f.normalized).fold(f64::INFINITY, f64::min),
                min_slope: fs.iter().map(|f| f.slope).fold(f64::INFINITY, f64::min),
                max_slope: fs.iter().map(|f| f.slope).fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    Ok(PerturbationReport {
        profile: match profile {
            Profile::Kernel(k) => format!("kernel:{}", k.spec),
            p => p.name().to_string(),
        },
        all_gaps_positive: records.iter().filter(|r| r.d > 0.0).all(|r| r.gap > 0.0),
        floor_warning: fits.iter().any(|f| f.floor_warning),
        min_kappa: fits.iter().map(|f| f.kappa).fold(f64::INFINITY, f64::min),
        records,
        fits,
        shells: summaries,
    })
}

/// Whether `c phi'(r) + r phi''(r) >= 0` at every radius.
pub fn almost_convex(kernel: &RadialKernel, radii: &[f64], c: f64) -> bool {
    radii.iter().all(|&r| {
        let [_, d1, d2] = kernel.eval_all(r);
        c * d1 + r * d2 >= 0.0
    })
}
