//! Seeded invariant suite shared by the `check` command and the test suites.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::families::tent;
use crate::norms::{
    ct_hs_norm, dyadic_norm_profile, energy_l2l1, l4_spacetime_norm, xsb_norm, ysb_norm,
    ysb_terms, zsb_norm, NormParams,
};
use crate::random::{random_near_paraboloid, rng};
use crate::spectral::{
    conjugate_reflect, free_evolution_data, is_lo, japanese_bracket, modulation, project_dyadic, project_modulation, spacetime_convolve, CutoffSpec,
    DyadicBlock, FrequencyGrid, Mode, Side, SpaceTimeField, SpatialField,
};
use crate::sweep::fit_power_law;

/// Outcome of one property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Number of random fields per property.
pub const SAMPLES: usize = 100;

fn grid() -> FrequencyGrid {
    FrequencyGrid::new(2, 8, 0.25).expect("valid grid")
}

fn fields(seed: u64, count: usize) -> Vec<SpaceTimeField> {
    let g = grid();
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let cols = r.random_range(1..=12);
            random_near_paraboloid(&g, &mut r, cols, 6.0)
        })
        .collect()
}

fn params() -> Vec<NormParams> {
    vec![
        NormParams::new(-0.6, 2.0 / 3.0).unwrap(),
        NormParams::new(0.3, 0.51).unwrap(),
        NormParams::new(-0.2, 0.9).unwrap(),
    ]
}

type NormFn = fn(&SpaceTimeField, &NormParams) -> f64;

fn named_norms() -> [(&'static str, NormFn); 4] {
    [
        ("X", xsb_norm),
        ("Y", ysb_norm),
        ("Z", zsb_norm),
        ("energy", |u, p| energy_l2l1(u, p.s)),
    ]
}

pub fn homogeneity(seed: u64) -> CheckOutcome {
    let mut r = rng(seed ^ 0x11);
    let mut worst = 0.0f64;
    for u in fields(seed, SAMPLES) {
        let a = Complex64::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let au = u.scale(a);
        for p in params() {
            for (_, f) in named_norms() {
                let lhs = f(&au, &p);
                let rhs = a.norm() * f(&u, &p);
                worst = worst.max((lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE));
            }
        }
    }
    outcome("norm homogeneity", worst <= 1e-12, format!("max relative error {worst:e}"))
}

pub fn triangle(seed: u64) -> CheckOutcome {
    let us = fields(seed, SAMPLES);
    let vs = fields(seed + 1, SAMPLES);
    let mut worst = f64::NEG_INFINITY;
    for (u, v) in us.iter().zip(&vs) {
        let w = u.add(v).unwrap();
        for p in params() {
            for (_, f) in named_norms() {
                let excess = (f(&w, &p) - f(u, &p) - f(v, &p)) / (f(u, &p) + f(v, &p));
                worst = worst.max(excess);
            }
        }
    }
    outcome("triangle inequality", worst <= 1e-12, format!("max relative excess {worst:e}"))
}

pub fn z_monotonicity(seed: u64) -> CheckOutcome {
    let mut r = rng(seed ^ 0x22);
    let mut worst = f64::NEG_INFINITY;
    for u in fields(seed, SAMPLES) {
        let masks: Vec<f64> = (0..u.columns().map(|(_, c)| c.len()).sum::<usize>())
            .map(|_| r.random_range(0.0..=1.0))
            .collect();
        let mut k = 0;
        let mut masked = SpaceTimeField::zeros(*u.grid());
        for (&n, c) in u.columns() {
            let vals = c.values.iter().map(|z| {
                k += 1;
                z * masks[k - 1]
            });
            masked.insert(n, c.start, vals.collect()).unwrap();
        }
        for p in params() {
            let z0 = zsb_norm(&u, &p);
            worst = worst.max((zsb_norm(&masked, &p) - z0) / z0);
        }
    }
    outcome("Z monotone under masks", worst <= 1e-12, format!("max relative excess {worst:e}"))
}

pub fn dyadic_pythagoras(seed: u64) -> CheckOutcome {
    let g = grid();
    let mut worst = 0.0f64;
    for u in fields(seed, SAMPLES) {
        for p in params() {
            let blocks = DyadicBlock::covering(&g);
            let parts: Vec<SpaceTimeField> =
                blocks.iter().map(|&b| project_dyadic(&u, b).unwrap()).collect();
            let x2: f64 = parts.iter().map(|q| xsb_norm(q, &p).powi(2)).sum();
            let y2: f64 = parts.iter().map(|q| ysb_terms(q, &p).1.powi(2)).sum();
            let xt = xsb_norm(&u, &p).powi(2);
            let yt = ysb_terms(&u, &p).1.powi(2);
            worst = worst.max((x2 - xt).abs() / xt).max((y2 - yt).abs() / yt);
        }
    }
    outcome("dyadic Pythagoras", worst <= 1e-12, format!("max relative error {worst:e}"))
}

pub fn lo_hi_partition(seed: u64) -> CheckOutcome {
    let mut ok = true;
    for u in fields(seed, SAMPLES) {
        let lo = project_modulation(&u, Side::Lo, crate::spectral::MOD_THRESHOLD);
        let hi = project_modulation(&u, Side::Hi, crate::spectral::MOD_THRESHOLD);
        ok &= lo.add(&hi).unwrap() == u;
        ok &= project_modulation(&lo, Side::Hi, crate::spectral::MOD_THRESHOLD).is_zero();
        let blocks = DyadicBlock::covering(u.grid());
        let mut sum = SpaceTimeField::zeros(*u.grid());
        for b in blocks {
            sum = sum.add(&project_dyadic(&u, b).unwrap()).unwrap();
        }
        ok &= sum == u;
    }
    outcome("lo/hi and dyadic partitions exact", ok, format!("{SAMPLES} fields"))
}

pub fn tent_convolution(seed: u64) -> CheckOutcome {
    let g = FrequencyGrid::new(2, 8, 0.25).unwrap();
    let mut r = rng(seed ^ 0x33);
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let pick = |r: &mut rand_chacha::ChaCha8Rng| Mode::new(r.random_range(-4..=4), r.random_range(-4..=4));
        let (a, b) = (pick(&mut r), pick(&mut r));
        let ca = r.random_range(-60..=60) as f64 * 0.5;
        let cb = r.random_range(-60..=60) as f64 * 0.5;
        let mut f = SpaceTimeField::zeros(g);
        f.insert_fn(a, ca - 1.0, ca + 1.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let mut h = SpaceTimeField::zeros(g);
        h.insert_fn(b, cb - 1.0, cb + 1.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let c = spacetime_convolve(&f, &h).unwrap().field;
        let col = c.column(a.add(b)).unwrap();
        for (i, z) in col.values.iter().enumerate() {
            let want = tent(g.tau(col.start + i), ca + cb);
            worst = worst.max((z.re - want).abs() / 2.0).max(z.im.abs());
        }
    }
    outcome("convolution matches tent", worst <= 1e-12, format!("max relative error {worst:e}"))
}

/// Largest `lhs / rhs` on a calibration set, then the same quotient on a disjoint set
/// must stay below twice that constant.
fn two_pass(
    name: &str,
    seed: u64,
    quotient: impl Fn(&SpaceTimeField, &NormParams) -> f64,
) -> CheckOutcome {
    let p = NormParams::default();
    let calib = fields(seed, SAMPLES / 2)
        .iter()
        .map(|u| quotient(u, &p))
        .fold(0.0, f64::max);
    let valid = fields(seed.wrapping_add(0x5eed), SAMPLES / 2)
        .iter()
        .map(|u| quotient(u, &p))
        .fold(0.0, f64::max);
    outcome(
        name,
        valid <= 2.0 * calib,
        format!("calibrated C = {calib:.4}, validation max {valid:.4}"),
    )
}

pub fn energy_embedding(seed: u64) -> CheckOutcome {
    two_pass("energy <= C Z (calibrated)", seed, |u, p| {
        energy_l2l1(u, p.s) / zsb_norm(u, p)
    })
}

pub fn z_embedding(seed: u64) -> CheckOutcome {
    two_pass("Z <= C X (calibrated)", seed, |u, p| zsb_norm(u, p) / xsb_norm(u, p))
}

/// `log2 N` slope of `||u_N||_{L^4} / ||u_N||_{X^{0, 0.38}}` for free dyadic data with random phases.
pub fn l4_slope(seed: u64, n_list: &[u64]) -> f64 {
    let c = CutoffSpec::new(0.25)
        .and_then(|c| c.with_profile_cut(32.0))
        .expect("valid cutoff");
    let p = NormParams::new(0.0, 0.38).unwrap();
    let mut r = rng(seed ^ 0x44);
    let mut ratios = Vec::new();
    for &n in n_list {
        let g = FrequencyGrid::new(2, n as i32, 0.5).unwrap();
        let b = DyadicBlock::new(n).unwrap();
        let mut phi = SpatialField::zeros(2, n as i32);
        let modes: Vec<Mode> = phi.modes().filter(|m| b.contains(*m)).collect();
        for m in modes {
            let th = r.random_range(0.0..std::f64::consts::TAU);
            phi.set(m, Complex64::from_polar(1.0, th)).unwrap();
        }
        let u = free_evolution_data(&phi, &c, &g).unwrap();
        let l4 = l4_spacetime_norm(&u, (-2.0, 2.0)).unwrap();
        ratios.push(l4 / xsb_norm(&u, &p));
    }
    let xs: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    fit_power_law(&xs, &ratios).slope
}

pub const L4_SLOPE_BOUND: f64 = 0.26 + 0.05;

pub fn l4_strichartz(seed: u64) -> CheckOutcome {
    let slope = l4_slope(seed, &[4, 8, 16, 32]);
    outcome(
        "L4 slope bound at b = 0.38",
        slope <= L4_SLOPE_BOUND,
        format!("fitted slope {slope:.4} (bound {L4_SLOPE_BOUND})"),
    )
}

pub fn dyadic_equivalence(seed: u64) -> CheckOutcome {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for u in fields(seed, SAMPLES) {
        let p = NormParams::default();
        let sum: f64 = dyadic_norm_profile(&u, &p).iter().map(|x| x.1 * x.1).sum();
        let z2 = zsb_norm(&u, &p).powi(2);
        lo = lo.min(z2 / sum);
        hi = hi.max(z2 / sum);
    }
    outcome(
        "dyadic Z equivalence",
        lo >= 1.0 / 3.0 && hi <= 3.0,
        format!("Z^2 / sum over blocks in [{lo:.4}, {hi:.4}]"),
    )
}

/// Reflection preserves the norms that do not see the paraboloid and is an involution.
/// X, Y and Z are reported but not asserted: conj(u) lives near tau = +|n|^2.
pub fn reflection_isometry(seed: u64) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut involution = true;
    let mut x_spread = (f64::INFINITY, 0.0f64);
    let rel = |a: f64, b: f64| (a - b).abs() / b.max(f64::MIN_POSITIVE);
    for u in fields(seed, SAMPLES / 10) {
        let r = conjugate_reflect(&u);
        involution &= conjugate_reflect(&r) == u;
        for s in [-0.6, 0.0, 0.4] {
            worst = worst.max(rel(energy_l2l1(&r, s), energy_l2l1(&u, s)));
            for t in [0.0, 0.7, -1.3] {
                let a = ct_hs_norm(&r, s, (t, t)).unwrap();
                worst = worst.max(rel(a, ct_hs_norm(&u, s, (t, t)).unwrap()));
            }
        }
        let w = (-1.0, 1.0);
        worst = worst.max(rel(
            l4_spacetime_norm(&r, w).unwrap(),
            l4_spacetime_norm(&u, w).unwrap(),
        ));
        let q = xsb_norm(&r, &NormParams::default()) / xsb_norm(&u, &NormParams::default());
        x_spread = (x_spread.0.min(q), x_spread.1.max(q));
    }
    outcome(
        "conjugate_reflect isometry (energy, C_tH^s, L4)",
        involution && worst <= 1e-10,
        format!(
            "max relative error {worst:e}, involution {involution}, X ratio in [{:.3}, {:.3}]",
            x_spread.0, x_spread.1
        ),
    )
}

/// `<sigma>^(s/2 + b) <= 2^(-5.25 s) <n>^s <sigma>^b` at every hi grid point when s <= 0.
pub fn hi_weight_ordering(_seed: u64) -> CheckOutcome {
    let g = FrequencyGrid::new(2, 16, 0.25).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for s in [-0.9, -0.6, -0.3, 0.0] {
        let b = 2.0 / 3.0;
        let c = 2f64.powf(-5.25 * s);
        for n in g.modes() {
            let jn = japanese_bracket(n.norm());
            for j in 0..g.samples() {
                let sigma = modulation(n, g.tau(j));
                if is_lo(n, sigma, crate::spectral::MOD_THRESHOLD) {
                    continue;
                }
                let js = japanese_bracket(sigma);
                let lhs = js.powf(s / 2.0 + b);
                let rhs = c * jn.powf(s) * js.powf(b);
                worst = worst.max(lhs / rhs);
            }
        }
    }
    outcome(
        "hi-region weight ordering Y <= C X",
        worst <= 1.0 + 1e-12,
        format!("max weight quotient {worst:.6}"),
    )
}

/// `energy <= sqrt(K) X` with K the trapezoid sum of `<sigma>^(-2b)` over the window.
pub fn energy_cauchy_schwarz(seed: u64) -> CheckOutcome {
    let g = grid();
    let mut worst = f64::NEG_INFINITY;
    for p in params() {
        let k = g
            .modes()
            .map(|n| {
                (0..g.samples())
                    .map(|j| g.tau_step() * japanese_bracket(modulation(n, g.tau(j))).powf(-2.0 * p.b))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        for u in fields(seed, SAMPLES) {
            worst = worst.max(energy_l2l1(&u, p.s) / (k.sqrt() * xsb_norm(&u, &p)));
        }
    }
    outcome(
        "energy <= sqrt(K) X",
        worst <= 1.0 + 1e-12,
        format!("max quotient {worst:.6}"),
    )
}

/// Zeroes both end samples of every column, so that padding to a wider segment
/// leaves the piecewise-linear profile unchanged.
fn pinned(u: &SpaceTimeField) -> SpaceTimeField {
    let mut out = SpaceTimeField::zeros(*u.grid());
    for (&n, c) in u.columns() {
        let mut v = c.values.clone();
        v[0] = Complex64::ZERO;
        let last = v.len() - 1;
        v[last] = Complex64::ZERO;
        out.insert(n, c.start, v).unwrap();
    }
    out
}

/// Bilinearity over fields whose columns vanish at their segment ends.
pub fn convolution_bilinear(seed: u64) -> CheckOutcome {
    let mut r = rng(seed ^ 0x55);
    let fs: Vec<_> = fields(seed, SAMPLES / 10).iter().map(pinned).collect();
    let gs: Vec<_> = fields(seed + 2, SAMPLES / 10).iter().map(pinned).collect();
    let hs = fields(seed + 3, SAMPLES / 10);
    let mut worst = 0.0f64;
    for ((f, g), h) in fs.iter().zip(&gs).zip(&hs) {
        let a = Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let conv = |x: &SpaceTimeField| spacetime_convolve(x, h).unwrap().field;
        let lhs = conv(&f.scale(a).add(g).unwrap());
        let rhs = conv(f).scale(a).add(&conv(g)).unwrap();
        let scale = lhs.columns().flat_map(|(_, c)| c.values.iter().map(|z| z.norm())).fold(0.0, f64::max);
        worst = worst.max(lhs.max_abs_diff(&rhs).unwrap() / scale.max(f64::MIN_POSITIVE));
    }
    outcome("convolution bilinear", worst <= 1e-12, format!("max relative error {worst:e}"))
}

/// Every property in a fixed order.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    vec![
        homogeneity(seed),
        triangle(seed),
        z_monotonicity(seed),
        dyadic_pythagoras(seed),
        lo_hi_partition(seed),
        tent_convolution(seed),
        convolution_bilinear(seed),
        reflection_isometry(seed),
        hi_weight_ordering(seed),
        energy_cauchy_schwarz(seed),
        energy_embedding(seed),
        z_embedding(seed),
        dyadic_equivalence(seed),
        l4_strichartz(seed),
    ]
}
