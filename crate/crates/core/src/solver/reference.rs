use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{fast_len, fft_nd, Mode, SpatialField};

/// Step-doubling disagreement above which a trajectory is flagged unreliable.
pub const RELIABILITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nonlinearity {
    /// `i u_t + Laplacian u = conj(u)^2`.
    ConjSquare,
    /// Free Schrodinger flow.
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpatialField>,
    /// Largest coefficient difference between this run and one with twice the steps.
    pub discrepancy: f64,
    pub reliable: bool,
}

impl Trajectory {
    /// State at the step closest to `t`.
    pub fn at(&self, t: f64) -> &SpatialField {
        let k = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|x| x.0)
            .unwrap_or(0);
        &self.states[k]
    }
}

struct Squarer {
    d: usize,
    s: usize,
    modes: Vec<Mode>,
}

impl Squarer {
    fn slot(&self, m: Mode) -> usize {
        let s = self.s as i32;
        let a = m.0[0].rem_euclid(s) as usize;
        if self.d == 1 {
            a
        } else {
            a * self.s + m.0[1].rem_euclid(s) as usize
        }
    }

    /// Box-truncated Fourier coefficients of `conj(u)^2`, coefficient order of the box.
    fn conj_square(&self, u: &[Complex64]) -> Vec<Complex64> {
        let shape = vec![self.s; self.d];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.s.pow(self.d as u32)];
        for (m, z) in self.modes.iter().zip(u) {
            buf[self.slot(*m)] = *z;
        }
        fft_nd(&mut buf, &shape, true);
        for z in &mut buf {
            *z = z.conj() * z.conj();
        }
        fft_nd(&mut buf, &shape, false);
        let k = 1.0 / buf.len() as f64;
        self.modes.iter().map(|m| buf[self.slot(*m)] * k).collect()
    }
}

fn run(u0: &SpatialField, t_end: f64, steps: usize, nl: Nonlinearity) -> (Vec<f64>, Vec<SpatialField>) {
    let sq = Squarer {
        d: u0.dimension(),
        s: fast_len(4 * u0.n_max() as usize + 1),
        modes: u0.modes().collect(),
    };
    let freq: Vec<f64> = sq.modes.iter().map(|m| m.norm_sq() as f64).collect();
    let dt = t_end / steps as f64;
    let to_u = |w: &[Complex64], t: f64| -> Vec<Complex64> {
        w.iter()
            .zip(&freq)
            .map(|(z, f)| z * Complex64::from_polar(1.0, -t * f))
            .collect()
    };
    let rhs = |w: &[Complex64], t: f64| -> Vec<Complex64> {
        match nl {
            Nonlinearity::Off => vec![Complex64::new(0.0, 0.0); w.len()],
            Nonlinearity::ConjSquare => sq
                .conj_square(&to_u(w, t))
                .iter()
                .zip(&freq)
                .map(|(z, f)| Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, t * f) * z)
                .collect(),
        }
    };
    let axpy = |w: &[Complex64], k: &[Complex64], a: f64| -> Vec<Complex64> {
        w.iter().zip(k).map(|(x, y)| x + y * a).collect()
    };
    let mut w: Vec<Complex64> = u0.coeffs().to_vec();
    let mut times = vec![0.0];
    let mut states = vec![u0.clone()];
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = rhs(&w, t);
        let k2 = rhs(&axpy(&w, &k1, dt / 2.0), t + dt / 2.0);
        let k3 = rhs(&axpy(&w, &k2, dt / 2.0), t + dt / 2.0);
        let k4 = rhs(&axpy(&w, &k3, dt), t + dt);
        for i in 0..w.len() {
            w[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
        let t1 = (k + 1) as f64 * dt;
        times.push(t1);
        states.push(
            SpatialField::from_vec(u0.dimension(), u0.n_max(), to_u(&w, t1))
                .expect("shape is preserved"),
        );
    }
    (times, states)
}

/// Fourth-order integrating-factor Runge-Kutta trajectory on `[0, t_end]` (or `[t_end, 0]`).
pub fn reference_integrate(u0: &SpatialField, t_end: f64, steps: usize) -> Result<Trajectory> {
    reference_integrate_with(u0, t_end, steps, Nonlinearity::ConjSquare)
}

pub fn reference_integrate_with(
    u0: &SpatialField,
    t_end: f64,
    steps: usize,
    nl: Nonlinearity,
) -> Result<Trajectory> {
    if steps == 0 || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need finite t_end and steps >= 1, got {t_end} and {steps}"
        )));
    }
    let (times, states) = run(u0, t_end, steps, nl);
    let (_, fine) = run(u0, t_end, 2 * steps, nl);
    let last = states.last().unwrap();
    let discrepancy = last
        .coeffs()
        .iter()
        .zip(fine.last().unwrap().coeffs())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(Trajectory {
        times,
        states,
        discrepancy,
        reliable: discrepancy <= RELIABILITY_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_linear_flow() {
        let z = SpatialField::zeros(2, 3);
        let tr = reference_integrate(&z, 0.2, 10).unwrap();
        assert!(tr.states.iter().all(|s| s.coeffs().iter().all(|c| c.norm() == 0.0)));
        let u0 = crate::random::smooth_data(2, 3, 1.0, 1.0, 3);
        let tr = reference_integrate_with(&u0, -0.7, 40, Nonlinearity::Off).unwrap();
        for s in &tr.states {
            assert!((s.hs_norm(0.0) - 1.0).abs() < 1e-10);
        }
        assert!(tr.reliable);
        let m = Mode::new(2, -1);
        let want = u0.get(m) * Complex64::from_polar(1.0, 0.7 * 5.0);
        assert!((tr.states.last().unwrap().get(m) - want).norm() < 1e-13);
    }

    #[test]
    fn conj_square_of_single_mode() {
        let mut u0 = SpatialField::zeros(1, 4);
        u0.set(Mode::new(1, 0), Complex64::new(0.0, 2.0)).unwrap();
        let sq = Squarer {
            d: 1,
            s: fast_len(17),
            modes: u0.modes().collect(),
        };
        let out = sq.conj_square(u0.coeffs());
        let got = SpatialField::from_vec(1, 4, out).unwrap();
        assert!((got.get(Mode::new(-2, 0)) - Complex64::new(-4.0, 0.0)).norm() < 1e-13);
        assert!(got.get(Mode::new(2, 0)).norm() < 1e-13);
    }
}
