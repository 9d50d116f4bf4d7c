//! Fixed-step RK4 integration of dρ/dt = D ρ, used as an independent check
//! of the stationary state.
//!
//! For a linear autonomous generator one RK4 step is the matrix polynomial
//! P(hD) = 1 + hD + (hD)²/2 + (hD)³/6 + (hD)⁴/24, so 2^k steps are taken by
//! squaring P k times. This is the same RK4 trajectory, just evaluated
//! without 10⁶ sequential matrix-vector products.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::liouvillian::Liouvillian;

/// One RK4 step as a matrix, P(hD).
pub fn rk4_step_matrix(d: &CMat, h: f64) -> CMat {
    let n = d.nrows();
    let hd = linalg::scale(d, h);
    let mut out = linalg::identity(n);
    let mut term = linalg::identity(n);
    for k in 1..=4 {
        term = linalg::scale(&(&term * &hd), 1.0 / k as f64);
        out += &term;
    }
    out
}

/// Restores 1ᵀ_tr P = 1ᵀ_tr, which RK4 of a trace-preserving generator
/// satisfies exactly; squaring otherwise lets rounding in the unit
/// eigenvalue grow like (1 + ε)^(2^k).
fn restore_trace_row(p: &mut CMat, n: usize) {
    let dim = p.nrows();
    let mut r = vec![linalg::ZERO; dim];
    for (c, rc) in r.iter_mut().enumerate() {
        let mut s = linalg::ZERO;
        for a in 0..n {
            s += p[(a * n + a, c)];
        }
        let target = if c % (n + 1) == 0 { linalg::ONE } else { linalg::ZERO };
        *rc = (s - target) / n as f64;
    }
    for (c, rc) in r.iter().enumerate() {
        for a in 0..n {
            p[(a * n + a, c)] -= *rc;
        }
    }
}

/// Applies `steps` explicit RK4 steps to `rho0` one at a time.
pub fn rk4_stepping(liou: &Liouvillian, rho0: &CMat, h: f64, steps: usize) -> CMat {
    let n = liou.dim();
    let d = liou.matrix();
    let mut y = linalg::vectorize(rho0);
    for _ in 0..steps {
        let k1 = d * &y;
        let k2 = d * (&y + linalg::scale(&k1, 0.5 * h));
        let k3 = d * (&y + linalg::scale(&k2, 0.5 * h));
        let k4 = d * (&y + linalg::scale(&k3, h));
        let sum = &k1 + linalg::scale(&k2, 2.0) + linalg::scale(&k3, 2.0) + &k4;
        y = &y + linalg::scale(&sum, h / 6.0);
    }
    linalg::unvectorize(&y, n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rk4Options {
    /// Step as a fraction of 1/‖D‖∞, which bounds 1/max|Γ_m|.
    pub step_fraction: f64,
    /// Initial horizon in units of 1/γ.
    pub horizon_gamma: f64,
    /// The horizon is doubled until successive states agree within `tol`.
    pub tol: f64,
    pub max_doublings: usize,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Self {
            step_fraction: 0.01,
            horizon_gamma: 20.0,
            tol: 1e-10,
            max_doublings: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub rho: CMat,
    pub step: f64,
    pub horizon: f64,
    pub steps: u128,
    /// max |ρ(T) − ρ(T/2)| at the final horizon.
    pub horizon_change: f64,
    /// max |ρ_h(T) − ρ_{h/2}(T)| from the step-halving check.
    pub step_change: f64,
}

/// Propagates `rho0` until stationary. The horizon starts at
/// `horizon_gamma/γ` and doubles until the state stops changing; the result
/// is then recomputed with half the step to confirm convergence in h.
pub fn relax_to_stationary(
    liou: &Liouvillian,
    rho0: &CMat,
    gamma: f64,
    opts: &Rk4Options,
) -> Result<Propagation> {
    if !(gamma > 0.0) {
        return Err(Error::Propagation(format!("needs gamma > 0, got {gamma}")));
    }
    let d = liou.matrix();
    let norm = linalg::inf_norm(d);
    let h_max = opts.step_fraction / norm;
    let horizon0 = opts.horizon_gamma / gamma;
    // h = horizon0 / 2^k ≤ h_max
    let k0 = (horizon0 / h_max).log2().ceil().max(0.0) as u32;
    let h = horizon0 / 2f64.powi(k0 as i32);

    let n = liou.dim();
    let run = |h: f64, k: u32| -> Result<(CMat, f64, u32)> {
        let mut p = rk4_step_matrix(d, h);
        restore_trace_row(&mut p, n);
        for _ in 0..k {
            p = &p * &p;
            restore_trace_row(&mut p, n);
        }
        let v0 = linalg::vectorize(rho0);
        let mut v = &p * &v0;
        let mut change = f64::INFINITY;
        let mut doublings = 0u32;
        while (doublings as usize) < opts.max_doublings {
            p = &p * &p;
            restore_trace_row(&mut p, n);
            let next = &p * &v0;
            change = linalg::max_abs_diff(&next, &v);
            v = next;
            doublings += 1;
            if !change.is_finite() {
                return Err(Error::Propagation("RK4 propagation diverged".into()));
            }
            if change < opts.tol {
                break;
            }
        }
        Ok((v, change, doublings))
    };

    let (v, horizon_change, doublings) = run(h, k0)?;
    if !(horizon_change < opts.tol) {
        return Err(Error::Propagation(format!(
            "not stationary after {} doublings of the horizon (change {horizon_change:e})",
            opts.max_doublings
        )));
    }
    let (v_half, _, _) = run(0.5 * h, k0 + 1)?;
    let step_change = linalg::max_abs_diff(&v, &v_half);
    let horizon = horizon0 * 2f64.powi(doublings as i32);
    Ok(Propagation {
        rho: linalg::unvectorize(&v, n),
        step: h,
        horizon,
        steps: 1u128 << (k0 + doublings),
        horizon_change,
        step_change,
    })
}
