//! One line per acceptance criterion; exits non-zero if any fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use hexlat::moduli::{reduce_to_fundamental_domain, HalfPlanePoint, UnimodularMatrix, DOMAIN_TOL, HEX_X, HEX_Y};
use hexlat::perturbation::{
    asymptotic_linear_limits, closed_form_hessian_squared, coercivity_fit, linear_h1_limit, numeric_gradient,
    numeric_hessian, triple_energy_squared, triple_energy_squared_closed_form, unit_directions, Profile, TripleEnergy,
    GRADIENT_STEP, HESSIAN_STEP,
};
use hexlat::config::{PERTURB_D_GRID, VARIATIONAL_D_GRID};
use hexlat::shells::{enumerate_shells, IndexPair, Triple};
use hexlat::variational::{local_max_scan, GridParams};
use hexlat::{moduli, RadialKernel};

struct Outcome {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn index_box(b: i64) -> Vec<IndexPair> {
    (-b..=b).flat_map(|k| (-b..=b).map(move |l| IndexPair::new(k, l))).collect()
}

fn q_exact(k: i64, l: i64) -> i128 {
    let (k, l) = (k as i128, l as i128);
    k * k + k * l + l * l - k - l
}

fn floor() -> Outcome {
    let t = Instant::now();
    let mut equality = Vec::new();
    let mut ok = true;
    let mut min = f64::INFINITY;
    for q in index_box(200) {
        let h = closed_form_hessian_squared(q.k, q.l);
        // lambda_min = (8Q + 4)/sqrt3 - 2/3 >= 4/sqrt3 - 2/3  <=>  Q >= 0
        let exact_ge = q_exact(q.k, q.l) >= 0;
        ok &= exact_ge && h.above_floor() && h.q == q_exact(q.k, q.l);
        if q_exact(q.k, q.l) == 0 {
            equality.push((q.k, q.l));
        }
        if h.attains_floor() != (q_exact(q.k, q.l) == 0) {
            ok = false;
        }
        min = min.min(h.record.lambda_min);
    }
    let secs = t.elapsed().as_secs_f64();
    equality.sort();
    let eq_ok = equality == vec![(0, 0), (0, 1), (1, 0)];
    let floor_f64 = 4.0 / 3f64.sqrt() - 2.0 / 3.0;
    Outcome {
        id: 1,
        name: "squared eigenvalue floor",
        pass: ok && eq_ok && (min - floor_f64).abs() < 1e-14 && secs < 1.0,
        detail: format!("min lambda_min = {min:.15}, equality set {equality:?}, {secs:.3} s"),
    }
}

fn strict() -> Outcome {
    let mut ok = true;
    let mut min = f64::INFINITY;
    for q in index_box(200) {
        let h = closed_form_hessian_squared(q.k, q.l);
        // lambda_min > (4 - 2 sqrt3)/(3 sqrt3)  <=>  24 Q + 8 > 0
        ok &= 24 * q_exact(q.k, q.l) + 8 > 0 && h.above_strict_bound();
        min = min.min(h.record.lambda_min);
    }
    let bound = (4.0 - 2.0 * 3f64.sqrt()) / (3.0 * 3f64.sqrt());
    Outcome {
        id: 2,
        name: "squared strict positivity",
        pass: ok && min > bound,
        detail: format!("min lambda_min = {min:.6} > {bound:.6}"),
    }
}

fn linear_scan() -> Outcome {
    let t = Instant::now();
    let reference = (9.0 - 21f64.sqrt()) / (2f64.powf(1.5) * 3f64.powf(0.75));
    let mins: Vec<(f64, i64, i64)> = index_box(100)
        .par_iter()
        .map(|&q| {
            let h = numeric_hessian(&TripleEnergy::at_index(Profile::Linear, q), HEX_X, HEX_Y, HESSIAN_STEP).unwrap();
            (h.lambda_min, q.k, q.l)
        })
        .collect();
    let (min, k, l) = mins.into_iter().fold((f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 { b } else { a });
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        id: 3,
        name: "linear finite-difference scan",
        pass: (min - reference).abs() <= 1e-4 && min >= reference - 1e-6 && secs < 60.0,
        detail: format!("min lambda_min = {min:.9} at ({k},{l}), reference {reference:.9}, {secs:.2} s"),
    }
}

fn critical_point() -> Outcome {
    let mut worst = [0.0f64; 2];
    for (i, p) in [Profile::Squared, Profile::Linear].into_iter().enumerate() {
        worst[i] = index_box(50)
            .par_iter()
            .map(|&q| {
                let g = numeric_gradient(&TripleEnergy::at_index(p.clone(), q), HEX_X, HEX_Y, GRADIENT_STEP).unwrap();
                g[0].hypot(g[1])
            })
            .reduce(|| 0.0, f64::max);
    }
    Outcome {
        id: 4,
        name: "critical point at the hexagonal lattice",
        pass: worst[0] <= 1e-8 && worst[1] <= 1e-8,
        detail: format!("max |grad| squared {:.2e}, linear {:.2e}", worst[0], worst[1]),
    }
}

fn oracle_equivalence() -> Outcome {
    let fd = index_box(20)
        .par_iter()
        .map(|&q| {
            let h = numeric_hessian(&TripleEnergy::at_index(Profile::Squared, q), HEX_X, HEX_Y, HESSIAN_STEP).unwrap();
            let c = closed_form_hessian_squared(q.k, q.l).record;
            let e = [h.h1 - c.h1, h.h2 - c.h2, h.h3 - c.h3];
            let n = [c.h1, c.h2, c.h3];
            let norm = |v: [f64; 3]| (v[0] * v[0] + 2.0 * v[1] * v[1] + v[2] * v[2]).sqrt();
            norm(e) / norm(n)
        })
        .reduce(|| 0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut energy: f64 = 0.0;
    for _ in 0..10_000 {
        let q = IndexPair::new(rng.random_range(-200..=200), rng.random_range(-200..=200));
        let (x, y) = (rng.random_range(-2.0..2.0), rng.random_range(0.1..4.0));
        let direct = triple_energy_squared(&Triple::orbit_of(q), x, y).unwrap();
        let closed = triple_energy_squared_closed_form(q.k as f64, q.l as f64, x, y).unwrap();
        energy = energy.max((closed - direct).abs() / direct.abs());
    }
    Outcome {
        id: 5,
        name: "oracle equivalence",
        pass: fd <= 1e-6 && energy <= 1e-12,
        detail: format!("Hessian rel err {fd:.2e}, energy rel err {energy:.2e}"),
    }
}

fn asymptotic_h1_error(r: f64) -> f64 {
    (0..64)
        .map(|i| {
            let t = std::f64::consts::TAU * (i as f64 + 0.5) / 64.0;
            let (h1, _, _) = asymptotic_linear_limits(t, r, HESSIAN_STEP).unwrap();
            (h1 - linear_h1_limit(t)).abs() / h1
        })
        .fold(0.0, f64::max)
}

fn asymptotics() -> Outcome {
    let e = [1e2, 1e3, 1e4].map(asymptotic_h1_error);
    Outcome {
        id: 6,
        name: "linear Hessian asymptotics",
        pass: e[1] <= 0.02 && e[0] > e[1] && e[1] > e[2],
        detail: format!("max rel err r=1e2 {:.3e}, r=1e3 {:.3e}, r=1e4 {:.3e}", e[0], e[1], e[2]),
    }
}

fn gap_positivity() -> Outcome {
    let t = Instant::now();
    let shells = enumerate_shells(8.0).unwrap();
    let dirs = unit_directions(16);
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [Profile::Squared, Profile::Linear] {
        let r = coercivity_fit(&shells, &dirs, &PERTURB_D_GRID, &p).unwrap();
        let min_gap = r.records.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min);
        ok &= r.all_gaps_positive && min_gap > 0.0 && r.slopes_within(0.1);
        parts.push(format!("{} min gap {min_gap:.2e} slope dev {:.1e}", p.name(), r.worst_slope_deviation()));
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        id: 7,
        name: "gap positivity and quadratic growth",
        pass: ok && secs < 120.0,
        detail: format!("{} shells, {}; {secs:.2} s", shells.len(), parts.join("; ")),
    }
}

fn triple_structure() -> Outcome {
    let shells = enumerate_shells(10.0).unwrap();
    let p = moduli::deep_hole().p;
    let hex = moduli::hex_lattice();
    let mut ok = true;
    let mut total = 0;
    for s in &shells {
        ok &= s.len() % 3 == 0;
        for t in &s.triples {
            let [a, b, c] = t.members();
            ok &= a != b && b != c && a != c;
            ok &= a.rotate() == b && b.rotate() == c && c.rotate() == a;
        }
        // Independent count of lattice points at this distance from p.
        let brute = hex
            .points_within(p, s.radius + 1e-9)
            .into_iter()
            .filter(|&(_, _, z)| (moduli::norm(moduli::sub(z, p)) - s.radius).abs() < 1e-9)
            .count();
        ok &= brute == s.len();
        total += s.len();
    }
    Outcome {
        id: 8,
        name: "rotation triple structure",
        pass: ok,
        detail: format!("{} shells, {total} points", shells.len()),
    }
}

fn moduli_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..10_000 {
        let tau = HalfPlanePoint::new(rng.random_range(-50.0..50.0), 10f64.powf(rng.random_range(-2.0..2.0))).unwrap();
        let (z, m) = reduce_to_fundamental_domain(tau).unwrap();
        ok &= z.in_fundamental_domain(DOMAIN_TOL) && m.det() == 1;
        let back = m.act(z);
        worst = worst.max(((back.x - tau.x).hypot(back.y - tau.y)) / tau.abs());
    }
    let (h, m) = reduce_to_fundamental_domain(HalfPlanePoint::new(HEX_X, HEX_Y).unwrap()).unwrap();
    let identity = m == UnimodularMatrix::IDENTITY && h.x == HEX_X && h.y == HEX_Y;
    Outcome {
        id: 9,
        name: "moduli round trip",
        pass: ok && worst <= 1e-10 && identity,
        detail: format!("max rel err {worst:.2e}, hexagonal point fixed: {identity}"),
    }
}

fn deep_hole_scan() -> Outcome {
    let kernel = RadialKernel::default();
    let r = match local_max_scan(&kernel, 16, &VARIATIONAL_D_GRID, GridParams::default()) {
        Ok(r) => r,
        Err(e) => return Outcome { id: 10, name: "deep-hole local maximality", pass: false, detail: e.to_string() },
    };
    let at = |d: f64| -> Vec<f64> {
        let mut v: Vec<_> = r.records.iter().filter(|x| x.d == d).collect();
        v.sort_by_key(|x| x.direction_index);
        v.into_iter().map(|x| x.difference).collect()
    };
    let (big, small) = (at(VARIATIONAL_D_GRID[0]), at(VARIATIONAL_D_GRID[1]));
    let negative = big.len() == 16 && small.len() == 16 && big.iter().chain(&small).all(|&x| x < 0.0);
    let ratios: Vec<f64> = big.iter().zip(&small).map(|(a, b)| a / b).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let halving = r.ratios.iter().map(|h| h.ratio).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    Outcome {
        id: 10,
        name: "deep-hole local maximality",
        pass: r.precondition.holds && negative && lo >= 3.5 && hi <= 4.5,
        detail: format!(
            "precondition at distance {:.1e}, all deficits negative: {negative}, deficit(1e-2)/deficit(1e-3) in [{lo:.2}, {hi:.2}], deficit(d)/deficit(d/2) in [{:.3}, {:.3}]",
            r.precondition.deep_hole_distance, halving.0, halving.1
        ),
    }
}

fn main() {
    let outcomes = [
        floor(),
        strict(),
        linear_scan(),
        critical_point(),
        oracle_equivalence(),
        asymptotics(),
        gap_positivity(),
        triple_structure(),
        moduli_round_trip(),
        deep_hole_scan(),
    ];
    for o in &outcomes {
        println!("[{}] {:2} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!("acceptance: {} of {} criteria pass", outcomes.len() - failed.len(), outcomes.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
