//! Floquet-Markov generator in the quasienergy basis.
//!
//! Density matrices are vectorized row-major, `ρ[(α, β)] → v[α N + β]`,
//! so `vec(A ρ C) = (A ⊗ Cᵀ) vec(ρ)`.
//!
//! With Y_n = N(ε_α − ε_β − n ω_ex) χ_{αβ,n} (elementwise) the generator is
//!
//!   dρ/dt = −i[ε, ρ] + Σ_{n=±1} (Y_n ρ χ_n† + χ_n ρ Y_n† − χ_n† Y_n ρ − ρ Y_n† χ_n).
//!
//! Its gain part equals Σ_n (N_{αα',−n} + N_{ββ',−n}) χ_{αα',n} χ_{β'β,−n};
//! the loss parts are the δ-restricted sums that make it trace preserving.

use faer::Mat;

use crate::circuit::ModelParams;
use crate::error::{Error, Result};
use crate::hilbert::HilbertSpace;
use crate::linalg::{self, c64, real, CMat, ZERO};
use crate::rwa::QuasiSpectrum;

/// Matrix elements of the detector coordinate and of the qubit operators
/// between quasienergy states. Displacements are in units of χ0.
#[derive(Debug, Clone)]
pub struct FourierComponents {
    /// n = +1 component of χ+, a/√2.
    pub chi_plus: CMat,
    /// n = −1 component of χ+, a†/√2.
    pub chi_minus: CMat,
    /// Components of χ+² = (a + a†)²/2 for n = +2, 0, −2.
    pub chi2_plus2: CMat,
    pub chi2_zero: CMat,
    pub chi2_minus2: CMat,
    pub tau_z: Option<CMat>,
    pub tau_plus: Option<CMat>,
    pub tau_minus: Option<CMat>,
}

impl FourierComponents {
    pub fn dim(&self) -> usize {
        self.chi_plus.nrows()
    }

    /// n-th component of χ+; zero for n ∉ {−1, +1}.
    pub fn chi(&self, n: i32) -> CMat {
        match n {
            1 => self.chi_plus.clone(),
            -1 => self.chi_minus.clone(),
            _ => linalg::zeros(self.dim(), self.dim()),
        }
    }

    pub fn chi2(&self, n: i32) -> CMat {
        match n {
            2 => self.chi2_plus2.clone(),
            0 => self.chi2_zero.clone(),
            -2 => self.chi2_minus2.clone(),
            _ => linalg::zeros(self.dim(), self.dim()),
        }
    }

    /// τx = τ⁺ + τ⁻
    pub fn tau_x(&self) -> Option<CMat> {
        match (&self.tau_plus, &self.tau_minus) {
            (Some(p), Some(m)) => Some(p + m),
            _ => None,
        }
    }
}

pub fn fourier_components(qs: &QuasiSpectrum) -> FourierComponents {
    let space = qs.space;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = space.annihilation();
    let a2 = space.annihilation_squared();
    let chi_plus = linalg::scale(&qs.to_quasi(&a), s);
    let chi_minus = chi_plus.adjoint().to_owned();
    let chi2_plus2 = linalg::scale(&qs.to_quasi(&a2), 0.5);
    let chi2_minus2 = chi2_plus2.adjoint().to_owned();
    let chi2_zero = qs.to_quasi(&space.symmetric_number());
    FourierComponents {
        chi_plus,
        chi_minus,
        chi2_plus2,
        chi2_zero,
        chi2_minus2,
        tau_z: space.tau_z().map(|m| qs.to_quasi(&m)),
        tau_plus: space.tau_plus().map(|m| qs.to_quasi(&m)),
        tau_minus: space.tau_minus().map(|m| qs.to_quasi(&m)),
    }
}

/// N(ε) = γ ε [coth(ε/2T) − 1 + Θ(−ε)].
pub fn planck_weight(eps: f64, gamma: f64, temp: f64) -> f64 {
    if temp <= 0.0 {
        return if eps < 0.0 { -gamma * eps } else { 0.0 };
    }
    let x = eps / temp;
    if x.abs() < 1e-4 {
        let even = 2.0 * gamma * temp * (1.0 + x * x / 12.0);
        if eps > 0.0 { even - gamma * eps } else { even }
    } else if eps > 0.0 {
        2.0 * gamma * eps / x.exp_m1()
    } else {
        // ε coth(ε/2T) for ε < 0
        -gamma * eps * (1.0 + 2.0 / (-x).exp_m1())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanckWeight {
    pub gamma: f64,
    pub temp: f64,
}

impl PlanckWeight {
    pub fn eval(&self, eps: f64) -> f64 {
        planck_weight(eps, self.gamma, self.temp)
    }
}

/// Index placement in the gain term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateConvention {
    /// χ_{αα',n} χ_{β'β,−n}: trace and Hermiticity preserving.
    #[default]
    Consistent,
    /// χ_{αα',n} χ_{ββ',−n}, read literally. Violates trace preservation
    /// and is rejected by `build_rate_tensor`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dissipator {
    /// Planck weights at the transition quasienergies.
    #[default]
    FloquetMarkov,
    /// Planck weights at ∓n ω_ex only, ignoring the quasienergy spread.
    Lindblad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RateOptions {
    pub convention: RateConvention,
    pub dissipator: Dissipator,
}

/// Absolute tolerance of the trace-preservation check.
pub const TRACE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Liouvillian {
    matrix: CMat,
    n: usize,
    energies: Vec<f64>,
    tau_z: Option<CMat>,
    space: HilbertSpace,
}

pub fn build_rate_tensor(
    fc: &FourierComponents,
    qs: &QuasiSpectrum,
    p: &ModelParams,
) -> Result<Liouvillian> {
    build_rate_tensor_with(fc, qs, p, RateOptions::default())
}

pub fn build_rate_tensor_with(
    fc: &FourierComponents,
    qs: &QuasiSpectrum,
    p: &ModelParams,
    opts: RateOptions,
) -> Result<Liouvillian> {
    let n = qs.dim();
    assert_eq!(fc.dim(), n, "Fourier components and spectrum disagree in dimension");
    let e = &qs.energies;
    let weight = |x: f64| planck_weight(x, p.gamma, p.temp);

    let harmonics: [(i32, &CMat); 2] = [(1, &fc.chi_plus), (-1, &fc.chi_minus)];
    // Planck weights N_{αβ,−n} = N(ε_α − ε_β − n ω_ex) per harmonic.
    let weights: Vec<Vec<f64>> = harmonics
        .iter()
        .map(|&(h, _)| {
            let shift = -(h as f64) * p.omega_ex;
            (0..n * n)
                .map(|k| match opts.dissipator {
                    Dissipator::FloquetMarkov => weight(e[k / n] - e[k % n] + shift),
                    Dissipator::Lindblad => weight(shift),
                })
                .collect()
        })
        .collect();

    // K = Σ_n χ_n† Y_n with Y_n = N_{·,−n} ∘ χ_n
    let mut k = linalg::zeros(n, n);
    for ((_, chi), w) in harmonics.iter().zip(&weights) {
        let y = Mat::from_fn(n, n, |a, b| chi[(a, b)] * w[a * n + b]);
        k += chi.adjoint() * &y;
    }

    let mut d = linalg::zeros(n * n, n * n);
    for ((h, chi), w) in harmonics.iter().zip(&weights) {
        // Second χ factor of the gain term, indexed [β][β'].
        let second: CMat = match opts.convention {
            RateConvention::Consistent => Mat::from_fn(n, n, |b, bp| chi[(b, bp)].conj()),
            RateConvention::Literal => fc.chi(-h),
        };
        for a in 0..n {
            for ap in 0..n {
                let ca = chi[(a, ap)];
                if ca == ZERO {
                    continue;
                }
                let wa = w[a * n + ap];
                for b in 0..n {
                    let row = a * n + b;
                    for bp in 0..n {
                        let s = second[(b, bp)];
                        if s != ZERO {
                            d[(row, ap * n + bp)] += ca * s * (wa + w[b * n + bp]);
                        }
                    }
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            let row = a * n + b;
            d[(row, row)] += c64::new(0.0, -(e[a] - e[b]));
            for bp in 0..n {
                // −K ρ
                d[(row, bp * n + b)] -= k[(a, bp)];
                // −ρ K†
                d[(row, a * n + bp)] -= k[(b, bp)].conj();
            }
        }
    }

    let liou = Liouvillian {
        matrix: d,
        n,
        energies: e.clone(),
        tau_z: fc.tau_z.clone(),
        space: qs.space,
    };
    let (alpha, beta, violation) = liou.trace_violation();
    if violation > TRACE_TOLERANCE {
        return Err(Error::TraceViolation {
            alpha,
            beta,
            violation,
        });
    }
    Ok(liou)
}

impl Liouvillian {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Dimension of the underlying Hilbert space.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn quasienergies(&self) -> &[f64] {
        &self.energies
    }

    /// τz in the quasienergy basis, if the space has a qubit.
    pub fn tau_z(&self) -> Option<&CMat> {
        self.tau_z.as_ref()
    }

    pub fn index(&self, alpha: usize, beta: usize) -> usize {
        alpha * self.n + beta
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        linalg::unvectorize(&(&self.matrix * linalg::vectorize(rho)), self.n)
    }

    /// Column with the largest |Σ_α D_{αα, α'β'}|.
    pub fn trace_violation(&self) -> (usize, usize, f64) {
        let n = self.n;
        let mut worst = (0, 0, 0.0f64);
        for col in 0..n * n {
            let s: c64 = (0..n).map(|a| self.matrix[(a * n + a, col)]).sum();
            if s.norm() > worst.2 {
                worst = (col / n, col % n, s.norm());
            }
        }
        worst
    }

    pub fn eigendecompose(&self) -> Result<LiouvillianEigen> {
        LiouvillianEigen::new(self)
    }
}

/// Biorthonormal eigensystem D vᵐ = Γ_m vᵐ, v_m† D = Γ_m v_m†, sorted by
/// Re Γ_m descending. The stationary mode comes first with its right vector
/// scaled to unit trace, so its left vector is the identity.
#[derive(Debug, Clone)]
pub struct LiouvillianEigen {
    pub values: Vec<c64>,
    /// Right eigenvectors as columns.
    pub right: CMat,
    /// Left eigenvectors as rows, `left = right⁻¹`.
    pub left: CMat,
    pub biorthogonality_residual: f64,
    n: usize,
}

/// |Γ_m| (relative to max |D|) below which a mode counts as stationary.
pub const NULL_TOLERANCE: f64 = 1e-10;

/// Residual above which the eigenbasis is treated as defective.
pub const DEFECTIVE_TOLERANCE: f64 = 1e-6;

impl LiouvillianEigen {
    fn new(liou: &Liouvillian) -> Result<Self> {
        let n = liou.n;
        let n2 = n * n;
        let d = &liou.matrix;
        let (vals, vecs) = linalg::general_eigen(d).ok_or_else(|| Error::Eigensolver {
            dim: n2,
            context: "Liouvillian",
            max_abs: linalg::max_abs(d),
            hermiticity: f64::NAN,
        })?;
        let mut order: Vec<usize> = (0..n2).collect();
        order.sort_by(|&i, &j| {
            vals[j]
                .re
                .total_cmp(&vals[i].re)
                .then(vals[i].im.total_cmp(&vals[j].im))
        });
        // Stationary mode: among the (near-)null modes, the one with the
        // largest trace. Degenerate null spaces also hold traceless modes.
        let trace_of = |c: usize| -> f64 {
            let t: c64 = (0..n).map(|a| vecs[(a * n + a, c)]).sum();
            let norm: f64 = (0..n2).map(|r| vecs[(r, c)].norm_sqr()).sum::<f64>().sqrt();
            t.norm() / norm
        };
        let null_tol = NULL_TOLERANCE * linalg::max_abs(d).max(1.0);
        let stationary_pos = (0..n2)
            .filter(|&k| k == 0 || vals[order[k]].norm() < null_tol)
            .max_by(|&x, &y| trace_of(order[x]).total_cmp(&trace_of(order[y])))
            .unwrap_or(0);
        let first = order.remove(stationary_pos);
        order.insert(0, first);

        let values: Vec<c64> = order.iter().map(|&i| vals[i]).collect();
        let mut right = Mat::from_fn(n2, n2, |r, c| vecs[(r, order[c])]);

        let tr: c64 = (0..n).map(|a| right[(a * n + a, 0)]).sum();
        if tr.norm() < 1e-12 {
            return Err(Error::SteadyState(
                "no Liouvillian null mode carries trace; no stationary state found".into(),
            ));
        }
        let inv_tr = tr.inv();
        for r in 0..n2 {
            right[(r, 0)] *= inv_tr;
        }
        for c in 1..n2 {
            let norm: f64 = (0..n2).map(|r| right[(r, c)].norm_sqr()).sum::<f64>().sqrt();
            let s = real(1.0 / norm);
            for r in 0..n2 {
                right[(r, c)] *= s;
            }
        }
        let left = linalg::inverse(&right);
        let bi = linalg::max_abs_diff(&(&left * &right), &linalg::identity(n2));
        // Left-eigenvector residual of the rows of `left`, relative to ‖D‖.
        let wd = &left * d;
        let mut res = 0.0f64;
        for m in 0..n2 {
            let scale: f64 = (0..n2).map(|c| left[(m, c)].norm()).fold(0.0, f64::max);
            for c in 0..n2 {
                let r = (wd[(m, c)] - values[m] * left[(m, c)]).norm();
                res = res.max(r / scale.max(f64::MIN_POSITIVE));
            }
        }
        let residual = bi.max(res / linalg::max_abs(d).max(1e-300));
        log::debug!("Liouvillian eigenbasis residual {residual:e}");
        if !(residual <= DEFECTIVE_TOLERANCE) {
            return Err(Error::Defective { residual });
        }
        Ok(Self {
            values,
            right,
            left,
            biorthogonality_residual: residual,
            n,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Index of the stationary mode.
    pub fn stationary(&self) -> usize {
        0
    }

    /// Number of eigenvalues with |Γ_m| below `tol`.
    pub fn null_dim(&self, tol: f64) -> usize {
        self.values.iter().filter(|v| v.norm() < tol).count()
    }

    /// Right eigenvector m as a density-like matrix.
    pub fn right_matrix(&self, m: usize) -> CMat {
        let n = self.n;
        Mat::from_fn(n, n, |a, b| self.right[(a * n + b, m)])
    }

    /// Left eigenvector m as a matrix, such that the mode amplitude of X is
    /// Σ_{αβ} L[(α, β)] X[(α, β)].
    pub fn left_matrix(&self, m: usize) -> CMat {
        let n = self.n;
        Mat::from_fn(n, n, |a, b| self.left[(m, a * n + b)])
    }
}
