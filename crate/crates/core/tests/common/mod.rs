//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use fluxsense::circuit::CircuitParams;

/// Lowest `k` eigenvalues of the fluxonium Hamiltonian discretized on a
/// uniform phase grid, by Sturm-sequence bisection on the tridiagonal
/// matrix. Richardson-extrapolated from grids of `n` and `2n − 1` points.
pub fn fd_lowest_energies(p: &CircuitParams, phi_ext: f64, k: usize, n: usize, half_width: f64) -> Vec<f64> {
    let coarse = fd_grid(p, phi_ext, k, n, half_width);
    let fine = fd_grid(p, phi_ext, k, 2 * n - 1, half_width);
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

fn fd_grid(p: &CircuitParams, phi_ext: f64, k: usize, n: usize, half_width: f64) -> Vec<f64> {
    let h = 2.0 * half_width / (n - 1) as f64;
    let kinetic = 4.0 * p.e_c / (h * h);
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let phi = -half_width + i as f64 * h;
            2.0 * kinetic + 0.5 * p.e_l * phi * phi - p.e_j * (phi - phi_ext).cos()
        })
        .collect();
    let off = -kinetic;
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * off.abs();
    let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * off.abs();
    (0..k).map(|j| kth_eigenvalue(&diag, off, j, lo, hi)).collect()
}

/// Number of eigenvalues below `x` for a symmetric tridiagonal matrix with
/// constant off-diagonal.
fn count_below(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = d - x - if i == 0 { 0.0 } else { off * off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + off.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn kth_eigenvalue(diag: &[f64], off: f64, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * mid.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Classic fourth-order Runge–Kutta on the Bloch equations from the ground
/// state, sampled every `every` steps.
pub fn rk4_bloch(omega_r: f64, delta: f64, gamma: f64, t_end: f64, steps: usize, every: usize) -> Vec<(f64, [f64; 3])> {
    let f = |s: [f64; 3]| {
        let [x, y, z] = s;
        [
            -delta * y - 2.0 * gamma * x,
            delta * x - omega_r * z - 2.0 * gamma * y,
            omega_r * y - 2.0 * gamma * z,
        ]
    };
    let add = |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
    let dt = t_end / steps as f64;
    let mut s = [0.0, 0.0, -1.0];
    let mut out = vec![(0.0, s)];
    for i in 1..=steps {
        let k1 = f(s);
        let k2 = f(add(s, k1, dt / 2.0));
        let k3 = f(add(s, k2, dt / 2.0));
        let k4 = f(add(s, k3, dt));
        for c in 0..3 {
            s[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if i % every == 0 {
            out.push((i as f64 * dt, s));
        }
    }
    out
}
