//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check
//! fails, 2 on invalid input.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{parse_list, ProfileChoice, RunConfig, PERTURB_D_GRID, VARIATIONAL_D_GRID};
use crate::error::{Error, Result};
use crate::perturbation::{
    asymptotic_linear_limits, closed_form_hessian_squared, coercivity_fit, linear_h1_limit, numeric_gradient,
    numeric_hessian, triple_energy_squared, triple_energy_squared_closed_form, unit_directions, HessianRecord,
    Profile, TripleEnergy, LINEAR_SCAN_MIN, SQUARED_FLOOR,
};
use crate::moduli::{HEX_X, HEX_Y};
use crate::report::{Cell, Report};
use crate::shells::{enumerate_shells, IndexPair, Triple};
use crate::variational::{check_admissible_default, check_precondition, run_scan, GridParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hexlat", version, about = "Deep-hole shells, perturbation energies and lattice sums of the hexagonal lattice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shells of lattice points around the deep hole, split into rotation triples.
    Shells,
    /// Hessians of the per-triple energies at the hexagonal point.
    VerifyHessian,
    /// Shell gaps under small lattice perturbations.
    Perturb,
    /// Admissibility, deep-hole precondition and local maximality scan for a kernel.
    Variational,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Shells => "shells",
            Command::VerifyHessian => "verify-hessian",
            Command::Perturb => "perturb",
            Command::Variational => "variational",
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct Opts {
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r_max: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kl_bound: Option<i64>,
    #[arg(long, global = true)]
    pub directions: Option<usize>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub d_grid: Option<String>,
    /// Kernel spec, e.g. `default`, `linear:a=3,b=1`, `gauss:rate=1`.
    #[arg(long, global = true)]
    pub kernel: Option<String>,
    /// `csv` or `json`.
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `squared`, `linear`, `both` or `kernel`.
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// Gradient and Hessian steps, `h_grad,h_hess`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub fd_steps: Option<String>,
    #[arg(long, global = true)]
    pub coarse_n: Option<usize>,
    #[arg(long, global = true)]
    pub refine_iters: Option<usize>,
}

impl Opts {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        if let Some(p) = &self.config {
            c.apply_file(p)?;
        }
        if let Some(v) = self.r_max {
            c.r_max = v;
        }
        if let Some(v) = self.kl_bound {
            c.kl_bound = v;
        }
        if let Some(v) = self.directions {
            c.directions = v;
        }
        if let Some(v) = &self.d_grid {
            c.d_grid = Some(parse_list("d_grid", v)?);
        }
        if let Some(v) = &self.kernel {
            c.kernel = v.clone();
        }
        if let Some(v) = &self.format {
            c.output_format = v.parse()?;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.profile {
            c.profile = v.parse()?;
        }
        if let Some(v) = &self.fd_steps {
            c.set("fd_steps", v)?;
        }
        if let Some(v) = self.coarse_n {
            c.coarse_n = v;
        }
        if let Some(v) = self.refine_iters {
            c.refine_iters = v;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Rendered table plus exit code and diagnostics for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct CmdOutput {
    pub code: i32,
    pub body: String,
    pub messages: Vec<String>,
}

pub fn cmd_shells(cfg: &RunConfig) -> Result<CmdOutput> {
    cfg.validate()?;
    let shells = enumerate_shells(cfg.r_max)?;
    let mut rep = Report::new(&["radius", "k", "l", "triple_id"]);
    let mut id = 0usize;
    for s in &shells {
        for t in &s.triples {
            for q in t.members() {
                rep.push(vec![s.radius.into(), q.k.into(), q.l.into(), id.into()]);
            }
            id += 1;
        }
    }
    rep.note("shells", shells.len());
    rep.note("triples", id);
    rep.note("members", 3 * id);
    Ok(CmdOutput { code: EXIT_OK, body: rep.render("shells", cfg)?, messages: vec![] })
}

fn hessian_row(profile: &str, h: &HessianRecord) -> Vec<Cell> {
    vec![
        profile.into(),
        h.k.into(),
        h.l.into(),
        h.h1.into(),
        h.h2.into(),
        h.h3.into(),
        h.lambda_min.into(),
        h.lambda_max.into(),
    ]
}

fn index_box(b: i64) -> Vec<IndexPair> {
    (-b..=b).flat_map(|k| (-b..=b).map(move |l| IndexPair::new(k, l))).collect()
}

fn max_gradient(profile: Profile, bound: i64, step: f64) -> Result<(f64, IndexPair)> {
    let pairs = index_box(bound);
    let norms: Vec<f64> = pairs
        .par_iter()
        .map(|&q| {
            let g = numeric_gradient(&TripleEnergy::at_index(profile.clone(), q), HEX_X, HEX_Y, step)?;
            Ok(g[0].hypot(g[1]))
        })
        .collect::<Result<_>>()?;
    let (i, &m) = norms.iter().enumerate().fold((0, &f64::NEG_INFINITY), |a, b| if *b.1 > *a.1 { b } else { a });
    Ok((m, pairs[i]))
}

fn pair_text(q: IndexPair) -> String {
    format!("({},{})", q.k, q.l)
}

/// Relative errors `|h/r - limit| / (h/r)` of `h1` and `h3` over a 64-point
/// `t` grid, maximized.
pub fn asymptotic_error(r: f64, step: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..64 {
        let t = std::f64::consts::TAU * (i as f64 + 0.5) / 64.0;
        let (a, _, c) = asymptotic_linear_limits(t, r, step)?;
        let lim = linear_h1_limit(t);
        worst = worst.max((a - lim).abs() / a).max((c - lim).abs() / c);
    }
    Ok(worst)
}

pub fn cmd_verify_hessian(cfg: &RunConfig) -> Result<CmdOutput> {
    cfg.validate()?;
    let (do_sq, do_lin) = match cfg.profile {
        ProfileChoice::Squared => (true, false),
        ProfileChoice::Linear => (false, true),
        ProfileChoice::Both => (true, true),
        ProfileChoice::Kernel => {
            return Err(Error::Config("verify-hessian supports the squared and linear profiles".into()))
        }
    };
    let (gstep, hstep) = cfg.fd_steps;
    let b = cfg.kl_bound;
    let pairs = index_box(b);
    let mut rep = Report::new(&["profile", "k", "l", "h1", "h2", "h3", "lambda_min", "lambda_max"]);
    let mut messages = Vec::new();
    let mut pass = true;

    if do_sq {
        let mut min = f64::INFINITY;
        let mut witness = IndexPair::new(0, 0);
        let mut equality = Vec::new();
        let mut floor_ok = true;
        let mut strict_ok = true;
        for &q in &pairs {
            let h = closed_form_hessian_squared(q.k, q.l);
            rep.push(hessian_row("squared", &h.record));
            if h.record.lambda_min < min {
                min = h.record.lambda_min;
                witness = q;
            }
            if h.attains_floor() {
                equality.push(q);
            }
            if !h.above_floor() {
                floor_ok = false;
                messages.push(format!("squared lambda_min below 4/sqrt3 - 2/3 at {}", pair_text(q)));
            }
            if !h.above_strict_bound() {
                strict_ok = false;
                messages.push(format!("squared lambda_min not above (4 - 2 sqrt3)/(3 sqrt3) at {}", pair_text(q)));
            }
        }
        equality.sort();
        let mut expected = Triple::orbit_of(IndexPair::new(0, 0)).members().to_vec();
        expected.sort();
        let equality_ok = equality == expected;
        if !equality_ok {
            messages.push(format!(
                "squared equality set is {}",
                equality.iter().map(|&q| pair_text(q)).collect::<Vec<_>>().join(";")
            ));
        }

        let fd_pairs = index_box(b.min(20));
        let fd_errs: Vec<(f64, IndexPair)> = fd_pairs
            .par_iter()
            .map(|&q| {
                let h = numeric_hessian(&TripleEnergy::at_index(Profile::Squared, q), HEX_X, HEX_Y, hstep)?;
                Ok((h.relative_error(&closed_form_hessian_squared(q.k, q.l).record), q))
            })
            .collect::<Result<_>>()?;
        let (fd_err, fd_w) = fd_errs.iter().copied().fold((0.0, IndexPair::new(0, 0)), |a, b| if b.0 > a.0 { b } else { a });
        let fd_ok = fd_err <= 1e-6;
        if !fd_ok {
            messages.push(format!("squared finite-difference Hessian off by {fd_err:e} at {}", pair_text(fd_w)));
        }

        let (gmax, gw) = max_gradient(Profile::Squared, b.min(50), gstep)?;
        let grad_ok = gmax <= 1e-8;
        if !grad_ok {
            messages.push(format!("squared gradient {gmax:e} at {}", pair_text(gw)));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut cf_err: f64 = 0.0;
        for _ in 0..1000 {
            let q = IndexPair::new(rng.random_range(-b..=b), rng.random_range(-b..=b));
            let (x, y) = (rng.random_range(-1.0..1.0), rng.random_range(0.2..3.0));
            let direct = triple_energy_squared(&Triple::orbit_of(q), x, y)?;
            let closed = triple_energy_squared_closed_form(q.k as f64, q.l as f64, x, y)?;
            cf_err = cf_err.max((closed - direct).abs() / direct.abs());
        }
        let cf_ok = cf_err <= 1e-12;
        if !cf_ok {
            messages.push(format!("squared closed form differs from direct sum by {cf_err:e}"));
        }

        rep.note("squared_min_lambda_min", min);
        rep.note("squared_min_witness", pair_text(witness));
        rep.note("squared_floor", SQUARED_FLOOR);
        rep.note("squared_equality_set", equality.iter().map(|&q| pair_text(q)).collect::<Vec<_>>().join(";"));
        rep.note("squared_floor_ok", floor_ok && equality_ok);
        rep.note("squared_strict_bound_ok", strict_ok);
        rep.note("squared_fd_max_rel_error", fd_err);
        rep.note("squared_max_gradient", gmax);
        rep.note("squared_closed_form_max_rel_error", cf_err);
        pass &= floor_ok && equality_ok && strict_ok && fd_ok && grad_ok && cf_ok;
    }

    if do_lin {
        let recs: Vec<HessianRecord> = pairs
            .par_iter()
            .map(|&q| numeric_hessian(&TripleEnergy::at_index(Profile::Linear, q), HEX_X, HEX_Y, hstep))
            .collect::<Result<_>>()?;
        let mut min = f64::INFINITY;
        let mut witness = IndexPair::new(0, 0);
        for h in &recs {
            rep.push(hessian_row("linear", h));
            if h.lambda_min < min {
                min = h.lambda_min;
                witness = IndexPair::new(h.k, h.l);
            }
        }
        let scan_ok = (min - LINEAR_SCAN_MIN).abs() <= 1e-4 && min >= LINEAR_SCAN_MIN - 1e-6;
        if !scan_ok {
            messages.push(format!("linear min lambda_min {min} at {} vs {LINEAR_SCAN_MIN}", pair_text(witness)));
        }
        let (gmax, gw) = max_gradient(Profile::Linear, b.min(50), gstep)?;
        let grad_ok = gmax <= 1e-8;
        if !grad_ok {
            messages.push(format!("linear gradient {gmax:e} at {}", pair_text(gw)));
        }
        let errs = [1e2, 1e3, 1e4].iter().map(|&r| asymptotic_error(r, hstep)).collect::<Result<Vec<f64>>>()?;
        let asym_ok = errs[1] <= 0.02 && errs[0] > errs[1] && errs[1] > errs[2];
        if !asym_ok {
            messages.push(format!("asymptotic errors {errs:?} are not decreasing below 0.02"));
        }
        rep.note("linear_min_lambda_min", min);
        rep.note("linear_min_witness", pair_text(witness));
        rep.note("linear_reference", LINEAR_SCAN_MIN);
        rep.note("linear_max_gradient", gmax);
        rep.note("asymptotic_error_r1e2", errs[0]);
        rep.note("asymptotic_error_r1e3", errs[1]);
        rep.note("asymptotic_error_r1e4", errs[2]);
        pass &= scan_ok && grad_ok && asym_ok;
    }
    rep.note("pass", pass);
    Ok(CmdOutput { code: if pass { EXIT_OK } else { EXIT_FAILED }, body: rep.render("verify-hessian", cfg)?, messages })
}

pub fn cmd_perturb(cfg: &RunConfig) -> Result<CmdOutput> {
    cfg.validate()?;
    let profiles = match cfg.profile {
        ProfileChoice::Squared => vec![Profile::Squared],
        ProfileChoice::Linear => vec![Profile::Linear],
        ProfileChoice::Both => vec![Profile::Squared, Profile::Linear],
        ProfileChoice::Kernel => vec![Profile::Kernel(cfg.parsed_kernel()?)],
    };
    let shells = enumerate_shells(cfg.r_max)?;
    let dirs = unit_directions(cfg.directions);
    let grid = cfg.d_grid_or(&PERTURB_D_GRID);
    let mut rep = Report::new(&[
        "profile", "shell", "radius", "shell_size", "direction", "d", "distance", "gap", "kappa", "kappa_normalized", "slope",
    ]);
    let mut messages = Vec::new();
    let mut pass = true;
    let mut warn = false;
    for p in &profiles {
        let r = coercivity_fit(&shells, &dirs, &grid, p)?;
        let name = p.name();
        for g in &r.records {
            let f = r.fits.iter().find(|f| f.shell == g.shell && f.direction == g.direction).expect("fit per series");
            rep.push(vec![
                name.into(),
                g.shell.into(),
                g.radius.into(),
                g.shell_size.into(),
                g.direction.into(),
                g.d.into(),
                g.distance.into(),
                g.gap.into(),
                f.kappa.into(),
                f.normalized.into(),
                f.slope.into(),
            ]);
        }
        let slopes_ok = r.slopes_within(0.1);
        if !r.all_gaps_positive {
            let w = r.records.iter().find(|g| g.d > 0.0 && g.gap <= 0.0).expect("witness");
            messages.push(format!(
                "{name}: gap {} at shell r = {}, direction {}, d = {}",
                g_fmt(w.gap),
                w.radius,
                w.direction,
                w.d
            ));
        }
        if !slopes_ok {
            messages.push(format!("{name}: log-log slope off 2 by {}", r.worst_slope_deviation()));
        }
        if r.floor_warning {
            messages.push(format!("warning: {name}: some gap series sit at the numerical floor (|gap| < 1e-15)"));
        }
        rep.note(format!("{name}_all_gaps_positive"), r.all_gaps_positive);
        rep.note(format!("{name}_worst_slope_deviation"), r.worst_slope_deviation());
        rep.note(format!("{name}_min_kappa"), r.min_kappa);
        rep.note(
            format!("{name}_min_kappa_normalized"),
            r.shells.iter().map(|s| s.min_normalized).fold(f64::INFINITY, f64::min),
        );
        rep.note(format!("{name}_floor_warning"), r.floor_warning);
        pass &= r.all_gaps_positive && slopes_ok;
        warn |= r.floor_warning;
    }
    rep.note("shells", shells.len());
    rep.note("warning", warn);
    rep.note("pass", pass);
    Ok(CmdOutput { code: if pass { EXIT_OK } else { EXIT_FAILED }, body: rep.render("perturb", cfg)?, messages })
}

fn g_fmt(x: f64) -> String {
    format!("{x:e}")
}

pub fn cmd_variational(cfg: &RunConfig) -> Result<CmdOutput> {
    cfg.validate()?;
    let kernel = cfg.parsed_kernel()?;
    let grid = GridParams { coarse_n: cfg.coarse_n, refine_iters: cfg.refine_iters };
    let mut rep = Report::new(&["direction_index", "d", "min_value", "difference"]);
    let mut messages = Vec::new();
    let fail = |mut rep: Report, messages: Vec<String>| -> Result<CmdOutput> {
        rep.note("pass", false);
        Ok(CmdOutput { code: EXIT_FAILED, body: rep.render("variational", cfg)?, messages })
    };

    let cert = check_admissible_default(&kernel)?;
    rep.note("admissible", cert.passed);
    rep.note("c", cert.c);
    rep.note("nbhd", cert.nbhd);
    if cert.max_ratio.is_finite() {
        rep.note("max_r_f2_over_neg_f1", cert.max_ratio);
    }
    if let Some(v) = &cert.violation {
        rep.note("violation_condition", v.condition as i64);
        rep.note("violation_r", v.r);
        messages.push(format!("kernel {} is not admissible: condition ({}) fails at r = {}: {}", kernel.spec, v.condition, v.r, v.detail));
        return fail(rep, messages);
    }

    let pre = check_precondition(&kernel, grid.coarse_n, grid.refine_iters)?;
    rep.note("precondition_holds", pre.holds);
    rep.note("degenerate", pre.degenerate);
    rep.note("argmin_s", pre.minimum.cell.0);
    rep.note("argmin_t", pre.minimum.cell.1);
    rep.note("min_value", pre.minimum.value);
    rep.note("value_at_deep_hole", pre.value_at_deep_hole);
    rep.note("deep_hole_distance", pre.deep_hole_distance);
    if !pre.holds {
        messages.push(if pre.degenerate {
            format!("lattice sum of kernel {} is constant; no point is singled out", kernel.spec)
        } else {
            format!(
                "precondition fails: min g = {} at cell coordinates ({}, {}), {} from the nearest deep hole; g(p) = {}",
                pre.minimum.value, pre.minimum.cell.0, pre.minimum.cell.1, pre.deep_hole_distance, pre.value_at_deep_hole
            )
        });
        return fail(rep, messages);
    }

    let grid_d = cfg.d_grid_or(&VARIATIONAL_D_GRID);
    let scan = run_scan(&kernel, cert, pre, cfg.directions, &grid_d, grid)?;
    for r in &scan.records {
        rep.push(vec![r.direction_index.into(), r.d.into(), r.min_value.into(), r.difference.into()]);
    }
    let rmin = scan.ratios.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let rmax = scan.ratios.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let ratios_ok = scan.ratios_within(3.5, 4.5);
    rep.note("all_negative", scan.all_negative);
    rep.note("max_difference", scan.max_difference());
    if !scan.ratios.is_empty() {
        rep.note("halving_ratio_min", rmin);
        rep.note("halving_ratio_max", rmax);
    }
    if !scan.all_negative {
        let w = scan.records.iter().find(|r| r.d > 0.0 && r.difference >= 0.0).expect("witness");
        messages.push(format!("min g not below the hexagonal value along direction {} at d = {}", w.direction_index, w.d));
    }
    if !ratios_ok {
        messages.push(format!("deficit ratios d/(d/2) span [{rmin}, {rmax}], outside [3.5, 4.5]"));
    }
    let pass = scan.all_negative && ratios_ok;
    rep.note("pass", pass);
    Ok(CmdOutput { code: if pass { EXIT_OK } else { EXIT_FAILED }, body: rep.render("variational", cfg)?, messages })
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<CmdOutput> {
    match command {
        Command::Shells => cmd_shells(cfg),
        Command::VerifyHessian => cmd_verify_hessian(cfg),
        Command::Perturb => cmd_perturb(cfg),
        Command::Variational => cmd_variational(cfg),
    }
}

fn thread_pool() -> std::result::Result<Option<rayon::ThreadPool>, String> {
    match std::env::var("HEXLAT_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| format!("HEXLAT_THREADS must be a positive integer, got {v:?}"))?;
            if n == 0 {
                return Err("HEXLAT_THREADS must be a positive integer".into());
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build().map(Some).map_err(|e| e.to_string())
        }
    }
}

/// Parse `args`, run the subcommand, and write the result to `--out` or
/// `out`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let name = cli.command.name();
    let cfg = match cli.opts.resolve() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "hexlat {name}: {e}");
            return EXIT_INVALID;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "hexlat: {e}");
            return EXIT_INVALID;
        }
    };
    let result = match &pool {
        Some(p) => p.install(|| dispatch(&cli.command, &cfg)),
        None => dispatch(&cli.command, &cfg),
    };
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "hexlat {name}: {e}");
            return EXIT_INVALID;
        }
    };
    for m in &output.messages {
        let _ = writeln!(err, "hexlat {name}: {m}");
    }
    let written = match &cli.opts.out {
        Some(path) => std::fs::write(path, &output.body).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out.write_all(output.body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "hexlat {name}: {e}");
        return EXIT_INVALID;
    }
    output.code
}
