//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rnl_core::spectral::{bump, Mode, SpaceTimeField};

/// `u(n, t)` by a plain trapezoid sum with freshly evaluated exponentials.
pub fn synth(u: &SpaceTimeField, n: Mode, t: f64) -> Complex64 {
    let g = u.grid();
    let h = g.tau_step();
    let Some(c) = u.column(n) else {
        return Complex64::new(0.0, 0.0);
    };
    let len = c.values.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, z) in c.values.iter().enumerate() {
        let w = if len < 2 {
            0.0
        } else if i == 0 || i == len - 1 {
            h / 2.0
        } else {
            h
        };
        let tau = (c.start as f64 - g.half() as f64 + i as f64) * h;
        acc += z * w * Complex64::new(0.0, t * tau).exp();
    }
    acc
}

/// Adaptive Simpson for a vector-valued integrand.
pub fn simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Vec<Complex64>
where
    F: Fn(f64) -> Vec<Complex64>,
{
    fn rule(fa: &[Complex64], fm: &[Complex64], fb: &[Complex64], w: f64) -> Vec<Complex64> {
        fa.iter()
            .zip(fm)
            .zip(fb)
            .map(|((x, y), z)| (x + 4.0 * y + z) * (w / 6.0))
            .collect()
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> Vec<Complex64>>(
        f: &F,
        a: f64,
        b: f64,
        fa: Vec<Complex64>,
        fm: Vec<Complex64>,
        fb: Vec<Complex64>,
        whole: Vec<Complex64>,
        tol: f64,
        depth: u32,
    ) -> Vec<Complex64> {
        let m = 0.5 * (a + b);
        let lm = f(0.5 * (a + m));
        let rm = f(0.5 * (m + b));
        let left = rule(&fa, &lm, &fm, m - a);
        let right = rule(&fm, &rm, &fb, b - m);
        let err = left
            .iter()
            .zip(&right)
            .zip(&whole)
            .map(|((l, r), w)| (l + r - w).norm())
            .fold(0.0, f64::max);
        if depth == 0 || err <= 15.0 * tol {
            return left
                .iter()
                .zip(&right)
                .zip(&whole)
                .map(|((l, r), w)| l + r + (l + r - w) / 15.0)
                .collect();
        }
        let mut l = rec(f, a, m, fa, lm, fm.clone(), left, tol / 2.0, depth - 1);
        let r = rec(f, m, b, fm, rm, fb, right, tol / 2.0, depth - 1);
        for (x, y) in l.iter_mut().zip(r) {
            *x += y;
        }
        l
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = rule(&fa, &fm, &fb, b - a);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `-i int_0^t e^{-i (t - s) |n|^2} eta_2T(s)^2 conj(u)(s) conj(v)(s) ds` for every mode in `out`.
pub fn direct_duhamel(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    two_t: f64,
    out: &[Mode],
    t: f64,
) -> Vec<Complex64> {
    let su: Vec<Mode> = u.support();
    let sv: Vec<Mode> = v.support();
    let integrand = |s: f64| -> Vec<Complex64> {
        let uu: Vec<Complex64> = su.iter().map(|&m| synth(u, m, s).conj()).collect();
        let vv: Vec<Complex64> = sv.iter().map(|&m| synth(v, m, s).conj()).collect();
        let e = bump(s / two_t).powi(2);
        out.iter()
            .map(|&n| {
                let mut f = Complex64::new(0.0, 0.0);
                for (a, x) in su.iter().zip(&uu) {
                    for (b, y) in sv.iter().zip(&vv) {
                        if a.add(*b).neg() == n {
                            f += x * y;
                        }
                    }
                }
                let k = n.norm_sq() as f64;
                f * e * Complex64::new(0.0, -(t - s) * k).exp()
            })
            .collect()
    };
    simpson(&integrand, 0.0, t, 1e-13)
        .into_iter()
        .map(|z| z * Complex64::new(0.0, -1.0))
        .collect()
}
