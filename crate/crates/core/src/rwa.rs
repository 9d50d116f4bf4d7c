//! Rotating-frame Hamiltonian of the driven Duffing oscillator coupled to
//! the qubit, its quasienergy spectrum, and multiphoton resonances.

use faer::Mat;

use crate::circuit::ModelParams;
use crate::error::{Error, Result};
use crate::hilbert::HilbertSpace;
use crate::linalg::{self, c64, real, CMat};

/// Which terms enter the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RwaTerms {
    /// The (g/2) sinθ (a†²τ⁻ + a²τ⁺) exchange term. Dropping it pins the
    /// qubit in its τz sectors.
    pub two_photon_exchange: bool,
}

impl Default for RwaTerms {
    fn default() -> Self {
        Self {
            two_photon_exchange: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RwaHamiltonian {
    pub matrix: CMat,
    pub space: HilbertSpace,
}

/// ℋ = ½δω_qb τz + g cosθ a†a τz + (g/2) sinθ (a†²τ⁻ + a²τ⁺)
///     + δΩ a†a − (α/2) a†a a a† + (f/2)(a + a†)
///
/// Without a qubit only the oscillator part is kept.
pub fn build_rwa_hamiltonian(p: &ModelParams, space: HilbertSpace) -> RwaHamiltonian {
    build_rwa_hamiltonian_with(p, space, RwaTerms::default())
}

pub fn build_rwa_hamiltonian_with(
    p: &ModelParams,
    space: HilbertSpace,
    terms: RwaTerms,
) -> RwaHamiltonian {
    let d = space.dim();
    let theta = p.theta();
    let (sin_t, cos_t) = theta.sin_cos();
    let mut h = Mat::<c64>::zeros(d, d);
    let nf = space.n_fock();
    let levels: &[Option<crate::circuit::QubitLevel>] = if space.has_qubit() {
        &[
            Some(crate::circuit::QubitLevel::Up),
            Some(crate::circuit::QubitLevel::Down),
        ]
    } else {
        &[None]
    };

    for &s in levels {
        let tz = s.map_or(0.0, |l| l.tau_z());
        for n in 0..nf {
            let nn = n as f64;
            let i = space.index(n, s);
            // a†a a a† |n⟩ = n (n + 1) |n⟩
            let mut diag = p.detuning() * nn - 0.5 * p.alpha * nn * (nn + 1.0);
            if s.is_some() {
                diag += 0.5 * p.qubit_detuning() * tz + p.g * cos_t * nn * tz;
            }
            h[(i, i)] = real(diag);
            if n + 1 < nf {
                let j = space.index(n + 1, s);
                let v = real(0.5 * p.f * (nn + 1.0).sqrt());
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
    }

    if space.has_qubit() && terms.two_photon_exchange && p.g != 0.0 {
        use crate::circuit::QubitLevel::{Down, Up};
        // a†² τ⁻ : |n, ↑⟩ → √((n+1)(n+2)) |n+2, ↓⟩, plus the conjugate.
        for n in 0..nf.saturating_sub(2) {
            let v = real(0.5 * p.g * sin_t * (((n + 1) * (n + 2)) as f64).sqrt());
            let from = space.index(n, Some(Up));
            let to = space.index(n + 2, Some(Down));
            h[(to, from)] += v;
            h[(from, to)] += v;
        }
    }
    RwaHamiltonian { matrix: h, space }
}

impl RwaHamiltonian {
    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.matrix)
    }
}

/// Quasienergies (ascending) and orthonormal quasienergy states.
#[derive(Debug, Clone)]
pub struct QuasiSpectrum {
    pub energies: Vec<f64>,
    /// Columns are the states |φ_α⟩ in the product basis.
    pub states: CMat,
    pub space: HilbertSpace,
}

pub fn quasienergy_spectrum(h: &RwaHamiltonian) -> Result<QuasiSpectrum> {
    let (energies, states) =
        linalg::hermitian_eigen(&h.matrix).ok_or_else(|| Error::Eigensolver {
            dim: h.matrix.nrows(),
            context: "RWA Hamiltonian",
            max_abs: linalg::max_abs(&h.matrix),
            hermiticity: h.hermiticity_error(),
        })?;
    Ok(QuasiSpectrum {
        energies,
        states,
        space: h.space,
    })
}

impl QuasiSpectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Operator given in the product basis, expressed in the quasienergy basis.
    pub fn to_quasi(&self, op: &CMat) -> CMat {
        linalg::to_basis(&self.states, op)
    }

    /// Matrix given in the quasienergy basis, expressed in the product basis.
    pub fn to_product(&self, m: &CMat) -> CMat {
        linalg::from_basis(&self.states, m)
    }

    /// max_α ‖ℋ φ_α − ε_α φ_α‖.
    pub fn residual(&self, h: &RwaHamiltonian) -> f64 {
        let hv = &h.matrix * &self.states;
        let mut out = 0.0f64;
        for a in 0..self.dim() {
            let r: f64 = (0..self.dim())
                .map(|i| (hv[(i, a)] - self.states[(i, a)] * self.energies[a]).norm_sqr())
                .sum();
            out = out.max(r.sqrt());
        }
        out
    }

    pub fn orthonormality_error(&self) -> f64 {
        let g = self.states.adjoint() * &self.states;
        linalg::max_abs_diff(&g, &linalg::identity(self.dim()))
    }

    /// |⟨i|φ_α⟩|² for product-basis index `i`.
    pub fn weight(&self, i: usize, alpha: usize) -> f64 {
        self.states[(i, alpha)].norm_sqr()
    }
}

/// Assignment of the states of `next` to the branches of `prev`.
#[derive(Debug, Clone)]
pub struct BranchMatch {
    /// `perm[b]` is the index in `next` continuing branch `b`.
    pub perm: Vec<usize>,
    /// |⟨prev_b|next_perm[b]⟩|²
    pub overlaps: Vec<f64>,
}

/// Greedy maximal-overlap assignment; ties go to the pair closest in
/// energy ordering.
pub fn match_branches(prev: &QuasiSpectrum, next: &QuasiSpectrum) -> BranchMatch {
    let d = prev.dim();
    let o = prev.states.adjoint() * &next.states;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            pairs.push((o[(i, j)].norm_sqr(), i, j));
        }
    }
    pairs.sort_by(|x, y| {
        y.0.total_cmp(&x.0)
            .then_with(|| x.1.abs_diff(x.2).cmp(&y.1.abs_diff(y.2)))
            .then_with(|| (x.1, x.2).cmp(&(y.1, y.2)))
    });
    let mut perm = vec![usize::MAX; d];
    let mut overlaps = vec![0.0; d];
    let mut taken = vec![false; d];
    let mut left = d;
    for (w, i, j) in pairs {
        if left == 0 {
            break;
        }
        if perm[i] == usize::MAX && !taken[j] {
            perm[i] = j;
            overlaps[i] = w;
            taken[j] = true;
            left -= 1;
        }
    }
    BranchMatch { perm, overlaps }
}

/// Quasienergy branches followed continuously over a drive-frequency grid.
#[derive(Debug, Clone)]
pub struct TrackedSpectrum {
    pub omega_ex: Vec<f64>,
    /// `branches[b][k]` is the quasienergy of branch `b` at grid point `k`.
    pub branches: Vec<Vec<f64>>,
    /// Smallest overlap used to continue any branch at each grid point.
    pub min_overlap: Vec<f64>,
}

/// Branches are labelled by energy order at the first grid point.
pub fn track_quasienergies(
    p: &ModelParams,
    space: HilbertSpace,
    grid: &[f64],
) -> Result<TrackedSpectrum> {
    let d = space.dim();
    let mut branches = vec![Vec::with_capacity(grid.len()); d];
    let mut min_overlap = Vec::with_capacity(grid.len());
    let mut prev: Option<(QuasiSpectrum, Vec<usize>)> = None;
    for &w in grid {
        let qs = quasienergy_spectrum(&build_rwa_hamiltonian(&p.with_omega_ex(w), space))?;
        let labels: Vec<usize> = match &prev {
            None => {
                min_overlap.push(1.0);
                (0..d).collect()
            }
            Some((last, last_labels)) => {
                let m = match_branches(last, &qs);
                min_overlap.push(m.overlaps.iter().copied().fold(1.0, f64::min));
                last_labels.iter().map(|&k| m.perm[k]).collect()
            }
        };
        for (b, &k) in labels.iter().enumerate() {
            branches[b].push(qs.energies[k]);
        }
        // Store labels relative to this spectrum: branch b now lives at labels[b].
        prev = Some((qs, labels));
    }
    Ok(TrackedSpectrum {
        omega_ex: grid.to_vec(),
        branches,
        min_overlap,
    })
}

/// Perturbative gap at the (0, N) avoided crossing,
/// Ω_{N,0} = f (2f/3α)^{N−1} √(N!) / ((N−1)!)².
pub fn rabi_gap_formula(f: f64, alpha: f64, n: usize) -> f64 {
    assert!(n >= 1);
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    f * (2.0 * f / (3.0 * alpha)).powi(n as i32 - 1) * fact(n).sqrt() / fact(n - 1).powi(2)
}

/// δΩ = α(N+1)/2, i.e. ω_ex = Ω − α(N+1)/2.
pub fn resonance_center(p: &ModelParams, n: usize) -> f64 {
    p.omega - 0.5 * p.alpha * (n as f64 + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub photons: usize,
    /// Undriven crossing position Ω − α(N+1)/2.
    pub center: f64,
    /// Position of the minimal gap.
    pub omega_ex: f64,
    pub gap: f64,
    pub gap_formula: f64,
    /// |⟨0|φ_a⟩|² + |⟨N|φ_b⟩|² for the pair defining the gap (at most 2).
    pub branch_weight: f64,
    pub resolved: bool,
}

/// Pair overlapping most with |0⟩ and |N⟩ (a ≠ b); returns (gap, weight).
fn crossing_gap(p: &ModelParams, space: HilbertSpace, n: usize, omega_ex: f64) -> Result<(f64, f64)> {
    let qs = quasienergy_spectrum(&build_rwa_hamiltonian(&p.with_omega_ex(omega_ex), space))?;
    let i0 = 0;
    let i_n = n;
    let d = qs.dim();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for a in 0..d {
        let wa = qs.weight(i0, a);
        for b in 0..d {
            if a == b {
                continue;
            }
            let w = wa + qs.weight(i_n, b);
            if w > best.0 {
                best = (w, (qs.energies[a] - qs.energies[b]).abs());
            }
        }
    }
    Ok((best.1, best.0))
}

/// Locates the minimal quasienergy gap between the branches connected to
/// |0⟩ and |N⟩ for N = 1..=n_max, using the oscillator alone.
pub fn locate_multiphoton_resonances(
    p: &ModelParams,
    n_fock: usize,
    n_max: usize,
) -> Result<Vec<Resonance>> {
    if n_max < 1 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: "must be >= 1".into(),
        });
    }
    if !(p.f > 0.0) {
        return Err(Error::InvalidParameter {
            name: "f",
            reason: format!("resonance search needs a drive, got f = {}", p.f),
        });
    }
    if p.alpha <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("resonance search needs alpha > 0, got {}", p.alpha),
        });
    }
    if n_fock < n_max + 2 {
        return Err(Error::InvalidParameter {
            name: "n_fock",
            reason: format!("must exceed n_max + 1 = {}", n_max + 1),
        });
    }
    let space = HilbertSpace::detector(n_fock)?;
    let half = 0.25 * p.alpha;
    let coarse = 201;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let center = resonance_center(p, n);
        let gap_at = |w: f64| crossing_gap(p, space, n, w).map(|g| g.0);
        let grid = crate::circuit::linspace(center - half, center + half, coarse);
        let mut k_best = 0;
        let mut g_best = f64::INFINITY;
        for (k, &w) in grid.iter().enumerate() {
            let g = gap_at(w)?;
            if g < g_best {
                g_best = g;
                k_best = k;
            }
        }
        let step = grid[1] - grid[0];
        let (mut lo, mut hi) = (grid[k_best] - step, grid[k_best] + step);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut g1 = gap_at(x1)?;
        let mut g2 = gap_at(x2)?;
        while hi - lo > 1e-13 {
            if g1 < g2 {
                hi = x2;
                x2 = x1;
                g2 = g1;
                x1 = hi - phi * (hi - lo);
                g1 = gap_at(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                g1 = g2;
                x2 = lo + phi * (hi - lo);
                g2 = gap_at(x2)?;
            }
        }
        let w = 0.5 * (lo + hi);
        let (gap, weight) = crossing_gap(p, space, n, w)?;
        let gap = gap.min(g_best);
        let resolved = weight >= 0.5;
        if !resolved {
            log::warn!("N = {n} resonance unresolved: branch weight {weight:.3}");
        }
        out.push(Resonance {
            photons: n,
            center,
            omega_ex: w,
            gap,
            gap_formula: rabi_gap_formula(p.f, p.alpha, n),
            branch_weight: weight,
            resolved,
        });
    }
    Ok(out)
}
