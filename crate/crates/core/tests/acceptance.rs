//! Acceptance checks at desk scale (n_fock = 20). Prints one PASS/FAIL line
//! per criterion and fails if any criterion fails.

use duffing_core::linalg::{self, c64, CMat};
use duffing_core::metrics::{metrics_point, MetricsRow, SpectrumModel};
use duffing_core::pipeline::{solve_coupled, solve_detector, solve_pinned, SolveOptions};
use duffing_core::propagate::Rk4Options;
use duffing_core::rwa::{locate_multiphoton_resonances, Resonance};
use duffing_core::spectra::{harmonic_estimates, measurement_time, Operator, PairSpectrum};
use duffing_core::sweep::{oracle_compare, run_sweep, SweepConfig};
use duffing_core::*;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

const N_FOCK: usize = 20;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn fig1() -> ModelParams {
    circuit::parameter_set("fig1-detector-only").unwrap()
}

fn fig2() -> ModelParams {
    circuit::parameter_set("fig2-coupled").unwrap()
}

fn opts() -> SolveOptions {
    SolveOptions::with_n_fock(N_FOCK)
}

/// Interior local extrema of a sampled curve.
fn extrema(x: &[f64], y: &[f64]) -> Vec<(f64, bool)> {
    (1..y.len() - 1)
        .filter_map(|k| {
            if y[k] > y[k - 1] && y[k] >= y[k + 1] {
                Some((x[k], true))
            } else if y[k] < y[k - 1] && y[k] <= y[k + 1] {
                Some((x[k], false))
            } else {
                None
            }
        })
        .collect()
}

fn resonance_positions() -> Outcome {
    let mut cfg = SweepConfig::new(fig1(), 0.96, 1.005, 800);
    cfg.solve = opts();
    let out = run_sweep(&cfg).unwrap();
    let x: Vec<f64> = out.rows.iter().map(|r| r.omega_ex).collect();
    let y: Vec<f64> = out.rows.iter().map(|r| r.a_abs).collect();
    let ext = extrema(&x, &y);
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=5 {
        let target = 1.0 - 0.005 * (n as f64 + 1.0);
        let (pos, _) = ext
            .iter()
            .copied()
            .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
            .unwrap();
        let off = pos - target;
        let ok = off.abs() <= 5e-4;
        pass &= ok;
        parts.push(format!("N={n}: {pos:.5} ({off:+.1e}{})", if ok { "" } else { " out" }));
    }
    Outcome {
        name: "resonance positions",
        pass,
        detail: parts.join(", "),
    }
}

fn rabi_gap_law() -> Outcome {
    let drives = [0.006, 0.005, 0.004, 0.003];
    let table: Vec<Vec<Resonance>> = drives
        .iter()
        .map(|&f| locate_multiphoton_resonances(&fig1().with_drive(f), N_FOCK, 3).unwrap())
        .collect();
    let err = |r: &Resonance| (r.gap / r.gap_formula - 1.0).abs();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 0..3 {
        let errs: Vec<f64> = table.iter().map(|row| err(&row[n])).collect();
        let within = errs[0] < 0.25;
        let improving = errs.windows(2).all(|w| w[1] < w[0]);
        pass &= within && improving;
        parts.push(format!(
            "N={}: ratio {:.3} at f=0.006, {:.3} at f=0.003{}{}",
            n + 1,
            table[0][n].gap / table[0][n].gap_formula,
            table[3][n].gap / table[3][n].gap_formula,
            if within { "" } else { " (>25%)" },
            if improving { "" } else { " (not improving)" }
        ));
    }
    Outcome {
        name: "Rabi-gap law",
        pass,
        detail: parts.join("; "),
    }
}

fn qubit_state_shift() -> Outcome {
    let p = fig2();
    let grid = circuit::linspace(0.96, 1.005, 800);
    let pairs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&w| {
            let up = solve_pinned(&p.with_omega_ex(w), circuit::QubitLevel::Up, &opts()).unwrap();
            let down =
                solve_pinned(&p.with_omega_ex(w - 2.0 * p.g), circuit::QubitLevel::Down, &opts()).unwrap();
            (up.amplitude(), down.amplitude())
        })
        .collect();
    let peak = pairs.iter().map(|q| q.0.abs().max(q.1.abs())).fold(0.0, f64::max);
    let resid = pairs.iter().map(|q| (q.0 - q.1).abs()).fold(0.0, f64::max);
    Outcome {
        name: "qubit-state shift",
        pass: resid < 0.01 * peak,
        detail: format!("max |A_up(w) - A_down(w - 2g)| = {resid:.3e}, peak |A| = {peak:.3}, ratio {:.2e}", resid / peak),
    }
}

fn back_action() -> Outcome {
    let p = fig2();
    let drives = [0.004, 0.006];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut depth = vec![[0.0; 5]; drives.len()];
    for (i, &f) in drives.iter().enumerate() {
        let q = p.with_drive(f);
        let res = locate_multiphoton_resonances(&q, N_FOCK, 8).unwrap();
        let window = |w: f64| {
            res.iter()
                .any(|r| (w - r.omega_ex).abs() < p.g + r.gap.max(5e-4))
        };
        let coarse: Vec<f64> = circuit::linspace(0.96, 1.005, 46)
            .into_iter()
            .filter(|&w| !window(w))
            .collect();
        let fine: Vec<(usize, f64)> = (0..5)
            .flat_map(|n| {
                let c = res[n].omega_ex;
                circuit::linspace(c - 2e-3, c + 2e-3, 21).into_iter().map(move |w| (n, w))
            })
            .collect();
        let dev = |w: f64| (solve_coupled(&q.with_omega_ex(w), &opts()).unwrap().population_difference().unwrap() + 1.0).abs();
        let off: Vec<f64> = coarse.par_iter().map(|&w| dev(w)).collect();
        let on: Vec<(usize, f64)> = fine.par_iter().map(|&(n, w)| (n, dev(w))).collect();
        let off_max = off.iter().copied().fold(0.0, f64::max);
        let mut sorted = off.clone();
        sorted.sort_by(f64::total_cmp);
        let baseline = sorted[sorted.len() / 2];
        for (n, d) in &on {
            depth[i][*n] = f64::max(depth[i][*n], *d);
        }
        // dips stand out of the off-resonance baseline (1 − cosθ for a
        // thermal qubit) and the deepest deviation sits on a resonance
        let on_max = on.iter().map(|q| q.1).fold(0.0, f64::max);
        let aligned = on_max > off_max && depth[i].iter().all(|&d| d > baseline);
        pass &= off_max < 0.02 && aligned;
        parts.push(format!(
            "f={f}: off-resonance max |P+1| = {off_max:.2e}, baseline {baseline:.2e} over {} points, dips {}",
            off.len(),
            depth[i].iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join("/")
        ));
    }
    let deepen = (0..5).all(|n| depth[1][n] > depth[0][n]);
    pass &= deepen;
    parts.push(format!("dips deepen with f: {deepen}"));
    Outcome {
        name: "back action",
        pass,
        detail: parts.join("; "),
    }
}

fn metrics_scan(grid: &[f64]) -> Vec<MetricsRow> {
    let p = fig2();
    grid.par_iter()
        .map(|&w| metrics_point(&p.with_omega_ex(w), &opts(), SpectrumModel::Detector).unwrap())
        .collect()
}

fn relaxation_scale(rows: &[MetricsRow]) -> Outcome {
    let p = fig2();
    let res = locate_multiphoton_resonances(&p, N_FOCK, 8).unwrap();
    let x: Vec<f64> = rows.iter().map(|r| r.omega_ex).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.gamma / p.gamma).collect();
    let peaks: Vec<f64> = extrema(&x, &y).into_iter().filter(|e| e.1).map(|e| e.0).collect();
    let stray: Vec<f64> = peaks
        .iter()
        .copied()
        .filter(|&w| !res.iter().any(|r| (w - r.omega_ex).abs() < r.gap.max(1e-3)))
        .collect();
    let peak = y.iter().copied().fold(0.0, f64::max);
    let in_range = (1e-7..=1e-5).contains(&peak);
    Outcome {
        name: "relaxation-rate scale",
        pass: in_range && stray.is_empty(),
        detail: format!(
            "peak Gamma/gamma = {peak:.3e} (window [1e-7, 1e-5]), {} peaks, {} away from located resonances",
            peaks.len(),
            stray.len()
        ),
    }
}

fn measurement_time_check(rows: &[MetricsRow], fine: &[MetricsRow]) -> Outcome {
    let t_min = fine.iter().map(|r| r.t_meas).fold(f64::INFINITY, f64::min);
    let within = (1e-2 / 3.0..=3e-2).contains(&t_min);
    // divergence at D = 0: bracket sign changes of A_up − A_down and refine
    let p = fig2();
    let diff = |w: f64| {
        let q = p.with_omega_ex(w);
        let up = solve_pinned(&q, circuit::QubitLevel::Up, &opts()).unwrap().amplitude();
        let down = solve_pinned(&q, circuit::QubitLevel::Down, &opts()).unwrap().amplitude();
        up - down
    };
    let signed: Vec<f64> = rows.iter().map(|r| r.a_up - r.a_down).collect();
    let mut crossings = 0;
    let mut diverges = true;
    for k in 0..rows.len() - 1 {
        if signed[k].signum() == signed[k + 1].signum() {
            continue;
        }
        crossings += 1;
        let (mut lo, mut hi, mut flo) = (rows[k].omega_ex, rows[k + 1].omega_ex, signed[k]);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let fm = diff(mid);
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let d = diff(0.5 * (lo + hi)).abs();
        let t = measurement_time(d, rows[k].s_chi_zero);
        diverges &= t > 1e6 * t_min;
        // the sampled T_meas peaks next to the crossing
        let t_here = rows[k].t_meas.max(rows[k + 1].t_meas);
        let left = if k > 0 { rows[k - 1].t_meas } else { 0.0 };
        let right = rows.get(k + 2).map_or(0.0, |r| r.t_meas);
        diverges &= t_here > left && t_here > right;
    }
    diverges &= measurement_time(0.0, 1e-4).is_infinite();
    Outcome {
        name: "measurement time",
        pass: within && diverges && crossings > 0,
        detail: format!(
            "min T_meas near 3-photon resonance = {t_min:.3e} x 2pi/Omega (target 1e-2 within x3); {crossings} D=0 crossings, divergence {}",
            if diverges { "confirmed" } else { "not confirmed" }
        ),
    }
}

fn oracle_equivalence() -> Outcome {
    let omegas = [0.965, 0.97, 0.98, 0.99, 1.0];
    let reports = oracle_compare(&fig1(), QubitMode::DetectorOnly, &omegas, N_FOCK, None, &Rk4Options::default());
    let worst = reports.iter().map(|r| r.max_diff).fold(0.0, f64::max);
    Outcome {
        name: "oracle equivalence",
        pass: reports.iter().all(|r| r.pass),
        detail: format!("max |rho_null - rho_rk4| = {worst:.2e} over {} points incl. 0.98 (N=3)", reports.len()),
    }
}

fn random_hermitian(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> CMat {
    let m = CMat::from_fn(n, n, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    linalg::hermitian_part(&m)
}

fn structural_invariants() -> Outcome {
    let tol = 1e-10;
    let mut failures = Vec::new();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let generic = ModelParams {
        g: 0.02,
        delta: 0.5,
        ..fig2()
    };
    let cases = [
        ("fig1", solve_detector(&fig1(), &opts()).unwrap()),
        ("fig2", solve_coupled(&fig2(), &SolveOptions::with_n_fock(10)).unwrap()),
        ("generic", solve_coupled(&generic, &SolveOptions::with_n_fock(8)).unwrap()),
    ];
    for (name, sol) in &cases {
        let n = sol.liouvillian.dim();
        for _ in 0..4 {
            let rho = random_hermitian(n, &mut rng);
            let out = sol.liouvillian.apply(&rho);
            if linalg::trace(&out).norm() > tol {
                failures.push(format!("{name}: trace"));
            }
            if linalg::hermiticity_error(&out) > tol {
                failures.push(format!("{name}: hermiticity"));
            }
        }
        if sol.steady.min_eigenvalue < -tol {
            failures.push(format!("{name}: positivity {}", sol.steady.min_eigenvalue));
        }
        let eig = sol.liouvillian.eigendecompose().unwrap();
        let max_re = eig.values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
        if max_re > tol {
            failures.push(format!("{name}: Re Gamma = {max_re:e}"));
        }
        if *name == "generic" && eig.null_dim(tol) != 1 {
            failures.push(format!("generic: {} null eigenvalues", eig.null_dim(tol)));
        }
    }
    if cases[1].1.steady.null_dim != 1 {
        failures.push("fig2: null space not unique".into());
    }
    // closed-form spectrum at f = g = 0
    let p = ModelParams { f: 0.0, g: 0.0, ..fig2() };
    let space = HilbertSpace::with_qubit(N_FOCK).unwrap();
    let qs = quasienergy_spectrum(&build_rwa_hamiltonian(&p, space)).unwrap();
    let mut expected: Vec<f64> = (0..N_FOCK)
        .flat_map(|n| {
            let n = n as f64;
            let osc = p.detuning() * n - 0.5 * p.alpha * n * (n + 1.0);
            [osc + 0.5 * p.qubit_detuning(), osc - 0.5 * p.qubit_detuning()]
        })
        .collect();
    expected.sort_by(f64::total_cmp);
    let spec_err = qs.energies.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if spec_err > tol {
        failures.push(format!("closed-form spectrum {spec_err:e}"));
    }
    let (g, t) = (fig1().gamma, fig1().temp);
    if (planck_weight(0.0, g, t) - 2.0 * g * t).abs() > tol * g * t {
        failures.push("N(0)".into());
    }
    for temp in [0.0, 1e-6] {
        if (planck_weight(-0.01, g, temp) - 0.01 * g).abs() > tol * 0.01 * g {
            failures.push(format!("N(-0.01) at T={temp}"));
        }
    }
    Outcome {
        name: "structural invariants",
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("trace, hermiticity, positivity, Re Gamma <= 0, unique null vector, closed-form spectrum ({spec_err:.1e}), Planck limits at {tol:e}")
        } else {
            failures.join(", ")
        },
    }
}

fn linear_detector_line() -> Outcome {
    let p = ModelParams {
        alpha: 0.0,
        f: 0.0,
        temp: 0.0,
        ..fig1()
    };
    let g = p.gamma;
    let sol = solve_detector(&p, &SolveOptions::with_n_fock(8)).unwrap();
    let eig = sol.liouvillian.eigendecompose().unwrap();
    let s = PairSpectrum::new(&eig, &sol.components, &sol.steady, Operator::Chi, Operator::Chi, p.omega_ex).unwrap();
    // centre by golden section
    let (mut a, mut b) = (1.0 - 5.0 * g, 1.0 + 5.0 * g);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if s.eval(c) > s.eval(d) { b = d } else { a = c }
    }
    let center = 0.5 * (a + b);
    let peak = s.eval(center);
    // half width by bisection on the upper flank
    let (mut lo, mut hi) = (center, center + 10.0 * g);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if s.eval(mid) > 0.5 * peak { lo = mid } else { hi = mid }
    }
    let hwhm = lo - center;
    let (wlo, whi, n) = (1.0 - 2000.0 * g, 1.0 + 2000.0 * g, 400_001);
    let h = (whi - wlo) / (n - 1) as f64;
    let weight = h * (0..n)
        .map(|k| if k == 0 || k == n - 1 { 0.5 } else { 1.0 } * s.eval(wlo + k as f64 * h))
        .sum::<f64>();
    let expected_weight = 0.5 * std::f64::consts::PI * (2.0 / std::f64::consts::PI) * 4000f64.atan();
    let c_ok = (center - 1.0).abs() < 0.01 * 0.5 * g;
    let w_ok = (hwhm / (0.5 * g) - 1.0).abs() < 0.01;
    let a_ok = (weight / expected_weight - 1.0).abs() < 0.01;
    Outcome {
        name: "linear-detector line",
        pass: c_ok && w_ok && a_ok,
        detail: format!(
            "centre {:+.2e} gamma from Omega, HWHM/(gamma/2) = {:.4}, weight/(pi/2) = {:.4}",
            (center - 1.0) / g,
            hwhm / (0.5 * g),
            weight / (0.5 * std::f64::consts::PI)
        ),
    }
}

fn harmonic_limit() -> Outcome {
    let h = harmonic_estimates(&fig2());
    let ratio = h.gamma_harm_quoted / 1e-13;
    Outcome {
        name: "harmonic estimates",
        pass: (0.5..=2.0).contains(&ratio) && h.kappa_discrepancy,
        detail: format!(
            "Gamma_harm(kappa=1e-10) = {:.3e}; kappa_eff formula = {:.3e}, discrepancy flagged: {}",
            h.gamma_harm_quoted, h.kappa_eff, h.kappa_discrepancy
        ),
    }
}

/// `ACCEPTANCE_ONLY=<substring>` restricts the run to matching criteria.
#[test]
fn acceptance_criteria() {
    let only = std::env::var("ACCEPTANCE_ONLY").ok();
    let selected = |name: &str| only.as_deref().is_none_or(|o| name.contains(o));
    let metrics = std::sync::OnceLock::new();
    let scans = || {
        metrics.get_or_init(|| {
            (
                metrics_scan(&circuit::linspace(0.96, 1.005, 181)),
                metrics_scan(&circuit::linspace(0.9775, 0.9825, 101)),
            )
        })
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("resonance positions", Box::new(resonance_positions)),
        ("Rabi-gap law", Box::new(rabi_gap_law)),
        ("qubit-state shift", Box::new(qubit_state_shift)),
        ("back action", Box::new(back_action)),
        ("relaxation-rate scale", Box::new(|| relaxation_scale(&scans().0))),
        ("measurement time", Box::new(|| measurement_time_check(&scans().0, &scans().1))),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("structural invariants", Box::new(structural_invariants)),
        ("linear-detector line", Box::new(linear_detector_line)),
        ("harmonic estimates", Box::new(harmonic_limit)),
    ];
    let outcomes: Vec<Outcome> = criteria
        .iter()
        .filter(|(name, _)| selected(name))
        .map(|(_, run)| run())
        .collect();
    for o in &outcomes {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.name).collect();
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
