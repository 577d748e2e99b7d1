//! Lattice sums of radial kernels and the local maximality scan.
//!
//! `g(z) = sum_gamma f(|z - gamma|)` is minimized over the fundamental cell
//! by a derivative-free grid search; the scan then compares `min g` of
//! perturbed lattices with that of the hexagonal lattice.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::RadialKernel;
use crate::moduli::{deep_hole, hex_lattice, norm, sub, Basis, Vec2, HEX_X, HEX_Y};
use crate::perturbation::{perturbed_params, unit_directions};
use crate::shells::{enumerate_shells, ShellIndexSet};

/// Default coarse grid size per side.
pub const COARSE_N: usize = 64;
/// Default number of refinement rounds.
pub const REFINE_ITERS: usize = 6;
/// Points per side of each refinement grid.
const REFINE_POINTS: usize = 9;
/// Samples per admissibility neighborhood.
const NBHD_SAMPLES: usize = 101;
/// Samples for the monotonicity check.
const MONOTONE_SAMPLES: usize = 4001;
/// Distance from a deep hole accepted by the precondition check.
pub const PRECONDITION_TOL: f64 = 1e-3;

fn require_compact(kernel: &RadialKernel) -> Result<()> {
    if !kernel.is_compact() {
        return Err(Error::KernelSpec(format!("{}: lattice sums need a compactly supported kernel", kernel.spec)));
    }
    Ok(())
}

/// `g(z)`, summed over all lattice points within the support of `z`.
pub fn lattice_sum(basis: &Basis, kernel: &RadialKernel, z: Vec2) -> Result<f64> {
    require_compact(kernel)?;
    Ok(lattice_sum_unchecked(basis, kernel, z))
}

fn lattice_sum_unchecked(basis: &Basis, kernel: &RadialKernel, z: Vec2) -> f64 {
    let reach = kernel.support_radius * (1.0 + 1e-12) + 1e-12;
    basis
        .points_within(z, reach)
        .into_iter()
        .map(|(_, _, q)| kernel.value(norm(sub(z, q))))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// 1: compact support, 2: monotone, 3: `r f'' <= -c f'`.
    pub condition: u8,
    pub r: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityCertificate {
    pub passed: bool,
    pub c: f64,
    pub nbhd: f64,
    /// Shell radii inside the support whose neighborhoods were checked.
    pub checked_radii: Vec<f64>,
    /// Largest `r f''(r) / (-f'(r))` seen on the neighborhoods (for `f' < 0`).
    pub max_ratio: f64,
    pub violation: Option<Violation>,
}

/// Check conditions (i)-(iii) on neighborhoods of the given shell radii.
pub fn check_admissible(kernel: &RadialKernel, shell_radii: &[f64], c: f64, nbhd: f64) -> Result<AdmissibilityCertificate> {
    if !(c > 0.0) || !(nbhd > 0.0) || !c.is_finite() || !nbhd.is_finite() {
        return Err(Error::domain(format!("c and nbhd must be positive, got c = {c}, nbhd = {nbhd}")));
    }
    let checked_radii: Vec<f64> =
        shell_radii.iter().copied().filter(|&r| r <= kernel.support_radius).collect();
    let mut cert = AdmissibilityCertificate { passed: false, c, nbhd, checked_radii, max_ratio: f64::NEG_INFINITY, violation: None };
    let fail = |mut cert: AdmissibilityCertificate, condition: u8, r: f64, detail: String| {
        cert.violation = Some(Violation { condition, r, detail });
        Ok(cert)
    };

    if !kernel.is_compact() || !(kernel.support_radius > 0.0) {
        return fail(cert, 1, kernel.support_radius, "support is not a bounded interval".into());
    }

    let s = kernel.support_radius;
    if s > 0.5 {
        let step = (s - 0.5) / (MONOTONE_SAMPLES - 1) as f64;
        for i in 0..MONOTONE_SAMPLES {
            let r = 0.5 + i as f64 * step;
            let d1 = kernel.d1(r);
            if d1 > 0.0 {
                return fail(cert, 2, r, format!("f'({r}) = {d1} > 0"));
            }
        }
        for b in kernel.breakpoints() {
            if b > 0.5 && b < s {
                let (left, right) = (kernel.value(b), kernel.value(b * (1.0 + 1e-12)));
                if right > left {
                    return fail(cert, 2, b, format!("jump up at {b}: {left} -> {right}"));
                }
            }
        }
    }

    for &ri in &cert.checked_radii.clone() {
        let (lo, hi) = (ri - nbhd, ri + nbhd);
        if !kernel.smooth_on(lo, hi) {
            let b = kernel.breakpoints().into_iter().find(|&b| b >= lo && b <= hi).unwrap_or(hi);
            return fail(cert, 3, b, format!("kernel is not smooth on [{lo}, {hi}] around shell radius {ri}"));
        }
        for i in 0..NBHD_SAMPLES {
            let r = lo + (hi - lo) * i as f64 / (NBHD_SAMPLES - 1) as f64;
            let [_, d1, d2] = kernel.eval_all(r);
            if d1 < 0.0 {
                cert.max_ratio = cert.max_ratio.max(r * d2 / -d1);
            }
            let slack = 1e-12 * (r * d2).abs().max((c * d1).abs());
            if r * d2 > -c * d1 + slack {
                return fail(cert, 3, r, format!("r f''(r) = {} > -c f'(r) = {}", r * d2, -c * d1));
            }
        }
    }
    cert.passed = true;
    Ok(cert)
}

/// Admissibility against the kernel's own `c`, `nbhd` and the hexagonal
/// shells inside its support.
pub fn check_admissible_default(kernel: &RadialKernel) -> Result<AdmissibilityCertificate> {
    require_compact(kernel)?;
    let radii: Vec<f64> = enumerate_shells(kernel.support_radius.max(0.7))?.iter().map(|s| s.radius).collect();
    check_admissible(kernel, &radii, kernel.c, kernel.nbhd)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeSumMinimum {
    pub argmin: Vec2,
    /// Argmin in cell coordinates.
    pub cell: (f64, f64),
    pub value: f64,
    /// Final half-width of the search window, in cell coordinates.
    pub grid_resolution: f64,
    /// Best value after the coarse grid and after each refinement round.
    pub history: Vec<f64>,
    /// Spread `max - min` over the coarse grid.
    pub coarse_spread: f64,
}

/// Coarse grid over the cell followed by `refine_iters` rounds of a 9x9
/// local grid whose window shrinks by 4 each round.
pub fn minimize_over_cell(basis: &Basis, kernel: &RadialKernel, coarse_n: usize, refine_iters: usize) -> Result<LatticeSumMinimum> {
    require_compact(kernel)?;
    if coarse_n < 16 {
        return Err(Error::domain(format!("coarse_n must be at least 16, got {coarse_n}")));
    }
    let g = |s: f64, t: f64| lattice_sum_unchecked(basis, kernel, basis.point(s, t));
    let n = coarse_n as f64;
    let values: Vec<f64> = (0..coarse_n * coarse_n)
        .into_par_iter()
        .map(|i| g((i / coarse_n) as f64 / n, (i % coarse_n) as f64 / n))
        .collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut cell = ((best / coarse_n) as f64 / n, (best % coarse_n) as f64 / n);
    let mut value = values[best];
    let coarse_spread = max - value;
    let mut history = vec![value];
    let mut h = 1.0 / n;
    let half = (REFINE_POINTS / 2) as f64;
    for _ in 0..refine_iters {
        let (s0, t0) = cell;
        let step = h / half;
        for i in 0..REFINE_POINTS {
            for j in 0..REFINE_POINTS {
                let s = s0 + (i as f64 - half) * step;
                let t = t0 + (j as f64 - half) * step;
                let v = g(s, t);
                if v < value {
                    value = v;
                    cell = (s, t);
                }
            }
        }
        history.push(value);
        h /= 4.0;
    }
    Ok(LatticeSumMinimum { argmin: basis.point(cell.0, cell.1), cell, value, grid_resolution: h, history, coarse_spread })
}

/// Distance from `z` to the nearest deep hole of the hexagonal lattice.
pub fn distance_to_deep_hole(z: Vec2) -> f64 {
    let b = hex_lattice();
    let p = deep_hole();
    let mut best = f64::INFINITY;
    for c in [p.p, p.second()] {
        let (s, t) = b.cell_coords(sub(z, c));
        let (s0, t0) = (s.round(), t.round());
        for ds in -1..=1 {
            for dt in -1..=1 {
                let q = b.point(s0 + ds as f64, t0 + dt as f64);
                best = best.min(norm(sub(sub(z, c), q)));
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreconditionReport {
    pub minimum: LatticeSumMinimum,
    /// `g(p)` for the hexagonal lattice.
    pub value_at_deep_hole: f64,
    pub deep_hole_distance: f64,
    /// `g` is constant on the coarse grid, so no point is singled out.
    pub degenerate: bool,
    pub holds: bool,
}

/// Check that `g` of the hexagonal lattice is minimized at a deep hole.
pub fn check_precondition(kernel: &RadialKernel, coarse_n: usize, refine_iters: usize) -> Result<PreconditionReport> {
    let hex = hex_lattice();
    let minimum = minimize_over_cell(&hex, kernel, coarse_n, refine_iters)?;
    let value_at_deep_hole = lattice_sum(&hex, kernel, deep_hole().p)?;
    let deep_hole_distance = distance_to_deep_hole(minimum.argmin);
    let degenerate = minimum.coarse_spread <= 1e-12 * minimum.value.abs().max(1.0);
    let holds = !degenerate && deep_hole_distance <= PRECONDITION_TOL;
    Ok(PreconditionReport { minimum, value_at_deep_hole, deep_hole_distance, degenerate, holds })
}

/// First- and second-order terms `f'(r) sum eps` and `f''(r) sum eps^2 / 2`
/// of the expansion of a shell's contribution to `g(p)`, with
/// `eps = |p - mu| - r` over the perturbed shell.
pub fn mechanism_terms(kernel: &RadialKernel, shell: &ShellIndexSet, x: f64, y: f64) -> Result<(f64, f64)> {
    let b = crate::moduli::basis_from_params(x, y)?;
    let p = deep_hole().p;
    let (mut s1, mut s2) = (0.0, 0.0);
    for q in shell.members() {
        let e = norm(sub(p, b.point(q.k as f64, q.l as f64))) - shell.radius;
        s1 += e;
        s2 += e * e;
    }
    let [_, d1, d2] = kernel.eval_all(shell.radius);
    Ok((d1 * s1, 0.5 * d2 * s2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridParams {
    pub coarse_n: usize,
    pub refine_iters: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams { coarse_n: COARSE_N, refine_iters: REFINE_ITERS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRecord {
    pub direction_index: usize,
    pub d: f64,
    pub min_value: f64,
    pub difference: f64,
}

/// `difference(d) / difference(d/2)` along one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalvingRatio {
    pub direction_index: usize,
    pub d: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub kernel: String,
    pub baseline: f64,
    pub admissibility: AdmissibilityCertificate,
    pub precondition: PreconditionReport,
    pub records: Vec<ScanRecord>,
    pub ratios: Vec<HalvingRatio>,
    /// Every difference at positive `d` is negative.
    pub all_negative: bool,
}

impl ScanReport {
    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        self.ratios.iter().all(|r| r.ratio >= lo && r.ratio <= hi)
    }

    pub fn max_difference(&self) -> f64 {
        self.records.iter().filter(|r| r.d > 0.0).map(|r| r.difference).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Compare `min g` over perturbed lattices with the hexagonal one.
///
/// Each positive `d` is paired with `d/2` for the halving ratios. Refuses to
/// run unless the kernel is admissible and the hexagonal minimum sits at a
/// deep hole.
pub fn local_max_scan(kernel: &RadialKernel, directions: usize, d_values: &[f64], grid: GridParams) -> Result<ScanReport> {
    let admissibility = check_admissible_default(kernel)?;
    if let Some(v) = &admissibility.violation {
        return Err(Error::Precondition(format!("kernel {} is not admissible: condition ({}) fails at r = {}: {}", kernel.spec, v.condition, v.r, v.detail)));
    }
    let precondition = check_precondition(kernel, grid.coarse_n, grid.refine_iters)?;
    if !precondition.holds {
        let m = &precondition.minimum;
        return Err(Error::Precondition(if precondition.degenerate {
            format!("lattice sum of kernel {} is constant, no deep-hole minimum", kernel.spec)
        } else {
            format!(
                "minimum of g is at cell ({}, {}) with value {}, {} from the nearest deep hole (g(p) = {})",
                m.cell.0, m.cell.1, m.value, precondition.deep_hole_distance, precondition.value_at_deep_hole
            )
        }));
    }
    run_scan(kernel, admissibility, precondition, directions, d_values, grid)
}

/// The scan itself, given certificates that have already passed.
pub fn run_scan(
    kernel: &RadialKernel,
    admissibility: AdmissibilityCertificate,
    precondition: PreconditionReport,
    directions: usize,
    d_values: &[f64],
    grid: GridParams,
) -> Result<ScanReport> {
    let baseline = precondition.minimum.value;
    let dirs = unit_directions(directions);

    let mut ds: Vec<f64> = Vec::new();
    for &d in d_values {
        for e in [d, d / 2.0] {
            if !ds.contains(&e) {
                ds.push(e);
            }
        }
    }
    let jobs: Vec<(usize, f64)> = (0..dirs.len()).flat_map(|i| ds.iter().map(move |&d| (i, d))).collect();
    let mut records: Vec<ScanRecord> = jobs
        .par_iter()
        .map(|&(i, d)| -> Result<ScanRecord> {
            let (x, y) = perturbed_params(dirs[i], d)?;
            let min_value = if (x, y) == (HEX_X, HEX_Y) {
                baseline
            } else {
                minimize_over_cell(&Basis::from_params(x, y)?, kernel, grid.coarse_n, grid.refine_iters)?.value
            };
            Ok(ScanRecord { direction_index: i, d, min_value, difference: min_value - baseline })
        })
        .collect::<Result<_>>()?;
    records.sort_by(|a, b| a.direction_index.cmp(&b.direction_index).then(b.d.total_cmp(&a.d)));

    let diff = |i: usize, d: f64| records.iter().find(|r| r.direction_index == i && r.d == d).map(|r| r.difference);
    let mut ratios = Vec::new();
    for i in 0..dirs.len() {
        for &d in d_values.iter().filter(|&&d| d > 0.0) {
            if let (Some(a), Some(b)) = (diff(i, d), diff(i, d / 2.0)) {
                ratios.push(HalvingRatio { direction_index: i, d, ratio: a / b });
            }
        }
    }
    Ok(ScanReport {
        kernel: kernel.spec.clone(),
        baseline,
        all_negative: records.iter().filter(|r| r.d > 0.0).all(|r| r.difference < 0.0),
        admissibility,
        precondition,
        records,
        ratios,
    })
}
