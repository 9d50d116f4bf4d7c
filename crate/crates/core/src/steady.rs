//! Stationary state of the generator and the observables read from it.

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::Mat;

use crate::circuit::{ModelParams, QubitLevel};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, real, CMat, ONE, ZERO};
use crate::liouvillian::{FourierComponents, Liouvillian};

/// Smallest singular value of the bordered generator, relative to its
/// largest entry, below which the null space counts as degenerate. A
/// decoupled qubit gives ~1e-20; the slow qubit relaxation of a weakly
/// coupled qubit gives a value scaling as g² (3e-13 at g = 0.0012).
pub const DEGENERACY_TOLERANCE: f64 = 1e-16;

#[derive(Debug, Clone)]
pub struct SteadyState {
    /// ρ∞ in the quasienergy basis.
    pub rho: CMat,
    /// max |D vec(ρ∞)|
    pub residual: f64,
    /// 1 for a unique stationary state; 2 or more when degenerate.
    pub null_dim: usize,
    /// Estimated smallest singular value of the bordered generator,
    /// relative to its largest entry.
    pub conditioning: f64,
    pub min_eigenvalue: f64,
}

/// Generator with row 0 replaced by the trace functional.
fn bordered(liou: &Liouvillian) -> CMat {
    let n = liou.dim();
    let mut b = liou.matrix().clone();
    for c in 0..n * n {
        b[(0, c)] = ZERO;
    }
    for a in 0..n {
        b[(0, a * n + a)] = ONE;
    }
    b
}

/// σ_min(B)/max|B| by inverse iteration on B†B.
fn relative_min_singular(lu: &faer::linalg::solvers::PartialPivLu<c64>, b: &CMat) -> f64 {
    let dim = b.nrows();
    let mut x = Mat::from_fn(dim, 1, |i, _| {
        c64::new(1.0 + ((i * 7919) % 13) as f64 / 13.0, ((i * 104729) % 7) as f64 / 7.0)
    });
    let mut sigma = f64::INFINITY;
    for _ in 0..12 {
        let nx = norm(&x);
        x = linalg::scale(&x, 1.0 / nx);
        // y = (B†B)⁻¹ x = B⁻¹ B⁻† x
        let mut y = x.clone();
        lu.solve_adjoint_in_place(y.as_mut());
        let y = lu.solve(&y);
        let ny = norm(&y);
        if !ny.is_finite() || ny == 0.0 {
            return 0.0;
        }
        let s = (1.0 / ny).sqrt();
        let converged = (s - sigma).abs() <= 1e-3 * s;
        sigma = s;
        x = y;
        if converged {
            break;
        }
    }
    sigma / linalg::max_abs(b).max(f64::MIN_POSITIVE)
}

fn norm(x: &CMat) -> f64 {
    (0..x.nrows()).map(|i| x[(i, 0)].norm_sqr()).sum::<f64>().sqrt()
}

/// Relative smallest singular value of the generator bordered with the
/// trace condition; near machine precision when the null space is
/// degenerate.
pub fn bordered_conditioning(liou: &Liouvillian) -> f64 {
    let b = bordered(liou);
    relative_min_singular(&b.partial_piv_lu(), &b)
}

/// Stationary density matrix.
///
/// The null vector is found from the generator bordered with the trace
/// condition. When the null space is degenerate (a decoupled qubit), a
/// sector must be given; the state is then the least-squares solution of
/// D ρ = 0, Tr ρ = 1 with the opposite τz sector emptied.
pub fn steady_state(liou: &Liouvillian, sector: Option<QubitLevel>) -> Result<SteadyState> {
    let n = liou.dim();
    let b = bordered(liou);
    let lu = b.partial_piv_lu();
    let conditioning = relative_min_singular(&lu, &b);
    let degenerate = !(conditioning > DEGENERACY_TOLERANCE);
    log::debug!("bordered generator: relative sigma_min {conditioning:e}");

    let x = match (degenerate, sector) {
        (false, _) => {
            let mut rhs = linalg::zeros(n * n, 1);
            rhs[(0, 0)] = ONE;
            lu.solve(&rhs)
        }
        (true, None) => return Err(Error::DegenerateSteadyState { null_dim: 2 }),
        (true, Some(level)) => {
            let tau_z = liou.tau_z().ok_or(Error::NoQubit)?;
            sector_solution(liou, tau_z, level)
        }
    };
    let rho = linalg::hermitian_part(&linalg::unvectorize(&x, n));
    let tr = linalg::trace(&rho);
    if !(tr.norm() > 0.0) || !tr.re.is_finite() {
        return Err(Error::SteadyState(format!("null vector has trace {tr}")));
    }
    let rho = linalg::scale(&rho, 1.0 / tr.re);
    let residual = linalg::max_abs(&liou.apply(&rho));
    let min_eigenvalue = linalg::hermitian_eigenvalues(&rho)
        .and_then(|v| v.first().copied())
        .unwrap_or(f64::NAN);
    Ok(SteadyState {
        rho,
        residual,
        null_dim: if degenerate { 2 } else { 1 },
        conditioning,
        min_eigenvalue,
    })
}

fn sector_solution(liou: &Liouvillian, tau_z: &CMat, level: QubitLevel) -> CMat {
    let n = liou.dim();
    let n2 = n * n;
    // Projector onto the unwanted sector, (1 − s τz)/2.
    let s = level.tau_z();
    let other = Mat::from_fn(n, n, |a, b| {
        let id = if a == b { 0.5 } else { 0.0 };
        real(id) - tau_z[(a, b)] * (0.5 * s)
    });
    let d = liou.matrix();
    let scale = linalg::max_abs(d).max(1e-300);
    let mut m = linalg::zeros(n2 + 2, n2);
    for r in 0..n2 {
        for c in 0..n2 {
            m[(r, c)] = d[(r, c)] * real(1.0 / scale);
        }
    }
    // Tr ρ = Σ ρ_αα and Tr(P ρ) = Σ P_βα ρ_αβ
    for a in 0..n {
        m[(n2, a * n + a)] = ONE;
        for b in 0..n {
            m[(n2 + 1, a * n + b)] = other[(b, a)];
        }
    }
    let mut rhs = linalg::zeros(n2 + 2, 1);
    rhs[(n2, 0)] = ONE;
    m.qr().solve_lstsq(&rhs)
}

/// Signed response amplitude A = Tr ρ∞ (χ_{+1} + χ_{−1}), in units of χ0.
pub fn response_amplitude(ss: &SteadyState, fc: &FourierComponents) -> f64 {
    let chi = &fc.chi_plus + &fc.chi_minus;
    linalg::trace_product(&ss.rho, &chi).re
}

/// P∞ = cosθ ⟨τz⟩ + sinθ ⟨τx⟩.
pub fn population_difference(
    ss: &SteadyState,
    fc: &FourierComponents,
    p: &ModelParams,
) -> Result<f64> {
    let tz = fc.tau_z.as_ref().ok_or(Error::NoQubit)?;
    let tx = fc.tau_x().ok_or(Error::NoQubit)?;
    let (s, c) = p.theta().sin_cos();
    Ok(c * linalg::trace_product(&ss.rho, tz).re + s * linalg::trace_product(&ss.rho, &tx).re)
}

/// ⟨τz⟩ in the stationary state.
pub fn qubit_polarization(ss: &SteadyState, fc: &FourierComponents) -> Result<f64> {
    let tz = fc.tau_z.as_ref().ok_or(Error::NoQubit)?;
    Ok(linalg::trace_product(&ss.rho, tz).re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationPoint {
    pub omega_ex: f64,
    pub a_up: f64,
    pub a_down: f64,
    /// D = |A_up − A_down|
    pub d: f64,
}

/// Discrimination power from the detector responses with Ω → Ω ± g.
pub fn discrimination_power(
    p: &ModelParams,
    grid: &[f64],
    opts: &crate::pipeline::SolveOptions,
) -> Result<Vec<DiscriminationPoint>> {
    if !(p.g > 0.0) {
        return Err(Error::InvalidParameter {
            name: "g",
            reason: format!("discrimination needs g > 0, got {}", p.g),
        });
    }
    grid.iter()
        .map(|&w| {
            let q = p.with_omega_ex(w);
            let up = crate::pipeline::solve_detector(&q.shifted_detector(QubitLevel::Up), opts)?;
            let down =
                crate::pipeline::solve_detector(&q.shifted_detector(QubitLevel::Down), opts)?;
            let (a_up, a_down) = (up.amplitude(), down.amplitude());
            Ok(DiscriminationPoint {
                omega_ex: w,
                a_up,
                a_down,
                d: (a_up - a_down).abs(),
            })
        })
        .collect()
}
