use super::*;
use crate::grid::Stencil;
use crate::system::GridSpec;

fn species(label: &str, count: usize, mass: f64, statistics: Statistics) -> SpeciesSpec {
    SpeciesSpec { label: label.into(), count, mass, statistics }
}

fn grid(x: f64, n: usize) -> GridSpec {
    GridSpec { x_min: -x, x_max: x, n, stencil: Stencil::Five }
}

pub(crate) fn chain_template() -> SystemSpec {
    SystemSpec {
        species: [species("heavy", 2, 1.0, Statistics::Boson), species("light", 1, 1.0, Statistics::Fermion)],
        u11: PotentialSpec::Harmonic { k: 1.0 },
        u12: PotentialSpec::Harmonic { k: 1.0 },
        grid: grid(8.0, 121),
        ..Default::default()
    }
}

pub(crate) fn coupling_template() -> SystemSpec {
    SystemSpec {
        species: [species("heavy", 2, 100.0, Statistics::Boson), species("light", 1, 1.0, Statistics::Fermion)],
        u11: PotentialSpec::Harmonic { k: 1.0 },
        u12: PotentialSpec::Gaussian { amplitude: -1.0, range: 1.0 },
        v_int: [InternalPotentialSpec::None, InternalPotentialSpec::HarmonicTrap { k: 1.0 }],
        grid: grid(8.0, 121),
        ..Default::default()
    }
}

pub(crate) fn pair_template() -> SystemSpec {
    SystemSpec {
        species: [species("heavy", 2, 1.0, Statistics::Boson), species("none", 0, 1.0, Statistics::Fermion)],
        u11: PotentialSpec::Harmonic { k: 1.0 },
        grid: grid(10.0, 401),
        ..Default::default()
    }
}

pub(crate) fn diatomic_template() -> SystemSpec {
    SystemSpec {
        species: [species("nucleus", 2, 1000.0, Statistics::Boson), species("electron", 1, 1.0, Statistics::Fermion)],
        u11: PotentialSpec::SoftCoulomb { amplitude: 1.0, softening: 1.0 },
        u12: PotentialSpec::SoftCoulomb { amplitude: -1.0, softening: 1.0 },
        grid: grid(20.0, 161),
        ..Default::default()
    }
}

fn small_chain() -> SystemSpec {
    SystemSpec { grid: grid(8.0, 61), ..chain_template() }
}

#[test]
fn loglog_fit_recovers_power() {
    let x = [1.0, 10.0, 100.0, 1000.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
    assert!((fit_loglog(&x, &y).unwrap() + 1.5).abs() < 1e-12);
    // Only the last three points count.
    let mut y2 = y.clone();
    y2[0] = 1e6;
    assert!((fit_loglog(&x, &y2).unwrap() + 1.5).abs() < 1e-12);
    assert!(fit_loglog(&[1.0], &[1.0]).is_none());
}

#[test]
fn observable_trend_and_rate() {
    let x = [1.0, 2.0, 4.0];
    let o = Observable::new("a", &x, vec![1.0, 0.5, 0.25], Trend::Decreasing, Some((-1.2, -0.8)), 0);
    assert!(o.monotone && o.pass);
    let o = Observable::new("b", &x, vec![1.0, 0.5, 0.6], Trend::Decreasing, None, 0);
    assert!(!o.monotone && !o.pass);
    // The first point is outside the trend window.
    let o = Observable::new("c", &x, vec![0.1, 0.5, 0.25], Trend::Decreasing, None, 1);
    assert!(o.pass);
    let o = Observable::new("d", &x, vec![1.0, f64::NAN, 0.25], Trend::Free, None, 0);
    assert!(!o.pass);
}

#[test]
fn sweeps_must_increase() {
    assert!(matches!(mass_ratio_sweep(&small_chain(), &[10.0, 10.0]), Err(Error::Validation { .. })));
    assert!(matches!(mass_ratio_sweep(&small_chain(), &[0.5, 10.0]), Err(Error::Validation { .. })));
    assert!(matches!(classical_limit_sweep(&pair_template(), &[]), Err(Error::Validation { .. })));
}

#[test]
fn infinite_ratio_proxy_has_no_map_difference() {
    let full = build_jacobi_map((2, 1), (1.0, 1e-300)).unwrap();
    let heavy = heavy_mass_map((2, 1), (1.0, 1e-300)).unwrap();
    assert!(forward_difference(&full, &heavy) < 1e-15);
}

#[test]
fn mass_sweep_starts_trend_at_second_point() {
    let r = mass_ratio_sweep(&small_chain(), &[1.0, 10.0, 100.0]).unwrap();
    assert_eq!(r.trend_start, 1);
    let fd = r.observable("forward_matrix_difference").unwrap();
    // Equal masses: O(1) difference, reported only.
    assert!(fd.values[0] > 0.1);
    for name in ["forward_matrix_difference", "light_density_l1", "light_kinetic_relative_difference"] {
        assert!(r.observable(name).unwrap().monotone, "{name}");
    }
    // Forward difference is 1/(2r + 1) here.
    for (v, ratio) in fd.values.iter().zip(&r.values) {
        assert!((v - 1.0 / (2.0 * ratio + 1.0)).abs() < 1e-14);
    }
    let csv = r.to_csv();
    assert!(csv.starts_with("param,forward_matrix_difference,light_density_l1"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn light_potential_matches_one_kind_assembly() {
    let spec = SystemSpec { grid: grid(8.0, 61), ..coupling_template() };
    let f = FunctionalSpec { species: [Channel::Sic, Channel::Hartree], coupling: Channel::Hartree, oracle: None };
    let state = scf_solve(&spec, &f, &ScfOptions::from_spec(&spec)).unwrap();
    assert!(light_potential_deviation(&spec, &f, &state).unwrap() <= 1e-12);
}

#[test]
fn clamped_single_oscillator() {
    let spec = SystemSpec {
        species: [species("heavy", 1, 1000.0, Statistics::Boson), species("light", 1, 1.0, Statistics::Fermion)],
        u12: PotentialSpec::Harmonic { k: 1.0 },
        grid: GridSpec { stencil: Stencil::Five, ..grid(10.0, 201) },
        ..Default::default()
    };
    let p = clamped_nuclei_solve(&spec, &[0.0]).unwrap();
    assert!((p.light_energy - 0.5).abs() < 1e-6, "{}", p.light_energy);
    assert_eq!(p.heavy_pair, 0.0);
    assert!((p.energy - 0.5).abs() < 1e-6);
}

#[test]
fn clamped_constraint_violation() {
    let spec = diatomic_template();
    assert!(matches!(clamped_nuclei_solve(&spec, &[-1.0, 1.5]), Err(Error::ConstraintViolation(_))));
    assert!(matches!(clamped_nuclei_solve(&spec, &[0.0]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn clamped_scan_matches_exact_peak_spacing() {
    let spec = diatomic_template();
    let ds: Vec<f64> = (0..41).map(|i| 1.0 + 0.1 * i as f64).collect();
    let scan = clamped_scan(&spec, &ds).unwrap();
    assert_eq!(count_minima(&scan), 1);
    let d_clamped = parabolic_min(&scan).unwrap();
    let heavy = Grid1D::new(-6.0, 6.0, 161).unwrap();
    let (d_exact, rho) = exact_heavy_peak_spacing(&spec, heavy, Grid1D::new(-20.0, 20.0, 161).unwrap()).unwrap();
    assert!((rho.integrate() - 2.0).abs() < 1e-8);
    assert!((d_clamped - d_exact).abs() < heavy.spacing, "clamped {d_clamped}, exact {d_exact}");
}

#[test]
fn classical_identity_for_point_like_pair() {
    // Two particles sitting on single bins at ±d.
    let g = Grid1D::new(-2.0, 2.0, 17).unwrap();
    let (a, b) = (4, 12);
    let h = g.spacing;
    let mut rho = GridFunction::zeros(g);
    rho.values[a] = 1.0 / h;
    rho.values[b] = 1.0 / h;
    let mut gamma = Table2D::zeros(g);
    gamma.values[a * 17 + b] = 1.0 / (h * h);
    gamma.values[b * 17 + a] = 1.0 / (h * h);
    let cl = classical_pair_density(&rho, &localized_halves(&rho, 0.0));
    assert_eq!(gamma.l1_distance(&cl), 0.0);
}

#[test]
fn localized_halves_share_the_center() {
    let g = Grid1D::new(-1.0, 1.0, 21).unwrap();
    let rho = GridFunction::from_fn(g, |r| (-r * r).exp());
    let [l, r] = localized_halves(&rho, 0.0);
    for i in 0..21 {
        assert!((l.values[i] + r.values[i] - rho.values[i]).abs() < 1e-15);
    }
    assert!((l.integrate() - r.integrate()).abs() < 1e-14);
}

#[test]
fn classical_point_matches_harmonic_decomposition() {
    // Two equal-mass bosons on a spring: T_int = ω/4, T_KS = ω, so the
    // kinetic correlation is −3ω/4 with ω = √(2k/m).
    let spec = pair_template();
    for k in [1.0, 10.0] {
        let p = classical_point(&spec, k, Grid1D::new(-5.0, 5.0, CLASSICAL_BINS).unwrap()).unwrap();
        let omega = (2.0 * k / p.mass).sqrt();
        assert!((p.kinetic_interacting - omega / 4.0).abs() < 1e-6 * omega, "{k}");
        assert!((p.kinetic_ks - omega).abs() < 1e-5 * omega, "{k}");
        assert!((p.kinetic_correlation() + 0.75 * omega).abs() < 1e-5 * omega, "{k}");
    }
}

#[test]
fn classical_sweep_trends() {
    let r = classical_limit_sweep(&pair_template(), &[1.0, 10.0, 100.0]).unwrap();
    assert!(r.pass);
    assert!(r.observable("kinetic_correlation").unwrap().monotone);
    assert!(r.observable("gamma_classical_l1").unwrap().monotone);
}

#[test]
fn classical_sweep_needs_spring() {
    let spec = SystemSpec { u11: PotentialSpec::Gaussian { amplitude: -1.0, range: 1.0 }, ..pair_template() };
    assert!(matches!(classical_limit_sweep(&spec, &[1.0]), Err(Error::Validation { .. })));
}
