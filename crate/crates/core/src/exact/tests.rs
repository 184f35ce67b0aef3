use super::*;
use crate::grid::{GridFunction, Stencil};
use crate::jacobi::build_jacobi_map;
use crate::system::{InternalPotentialSpec, PotentialSpec, SpeciesSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec(n1: usize, n2: usize, stats: [Statistics; 2], grid: (f64, usize), stencil: Stencil) -> SystemSpec {
    let mut s = SystemSpec::default();
    s.species[0] = SpeciesSpec { label: "a".into(), count: n1, mass: 1.0, statistics: stats[0] };
    s.species[1] = SpeciesSpec { label: "b".into(), count: n2, mass: 1.0, statistics: stats[1] };
    s.grid.x_min = -grid.0;
    s.grid.x_max = grid.0;
    s.grid.n = grid.1;
    s.grid.stencil = stencil;
    s
}

fn solve(s: &SystemSpec) -> (InternalHamiltonian, InternalWavefunction) {
    let map = build_jacobi_map(s.counts(), s.masses()).unwrap();
    let h = build_internal_hamiltonian(s, &map).unwrap();
    let psi = solve_ground(&h, &SolveOptions::default()).unwrap();
    (h, psi)
}

fn diatomic(stats: Statistics, n: usize) -> SystemSpec {
    let mut s = spec(2, 0, [stats, stats], (10.0, n), Stencil::Five);
    s.u11 = PotentialSpec::Harmonic { k: 1.0 };
    s
}

fn mixed_three() -> SystemSpec {
    let mut s = spec(2, 1, [Statistics::Fermion, Statistics::Boson], (8.0, 81), Stencil::Five);
    s.species[1].mass = 2.0;
    s.u11 = PotentialSpec::SoftCoulomb { amplitude: 0.5, softening: 1.0 };
    s.u12 = PotentialSpec::Harmonic { k: 1.0 };
    s.v_int[0] = InternalPotentialSpec::HarmonicTrap { k: 0.3 };
    s
}

#[test]
fn harmonic_diatomic_ground_energy() {
    let (_, psi) = solve(&diatomic(Statistics::Boson, 401));
    assert!((psi.energy - 0.5f64.sqrt()).abs() < 1e-6, "{}", psi.energy);
    assert!(psi.residual < 1e-8);
    let norm: f64 = psi.amplitudes.iter().map(|a| a * a).sum::<f64>() * psi.grid.cell_volume();
    assert!((norm - 1.0).abs() < 1e-10);
}

#[test]
fn identical_fermions_take_first_odd_state() {
    let (_, psi) = solve(&diatomic(Statistics::Fermion, 401));
    assert!((psi.energy - 1.5 * 2f64.sqrt()).abs() < 1e-5, "{}", psi.energy);
    // Odd in ξ.
    let n = psi.amplitudes.len();
    for i in 0..n {
        assert!((psi.amplitudes[i] + psi.amplitudes[n - 1 - i]).abs() < 1e-8);
    }
}

#[test]
fn operator_is_hermitian_for_three_particles() {
    let s = mixed_three();
    let map = build_jacobi_map(s.counts(), s.masses()).unwrap();
    let h = build_internal_hamiltonian(&s, &map).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut x: Vec<f64> = (0..h.op.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut y: Vec<f64> = (0..h.op.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    h.op.grid.mask(&mut x);
    h.op.grid.mask(&mut y);
    let (mut hx, mut hy) = (vec![0.0; x.len()], vec![0.0; x.len()]);
    h.op.apply(&x, &mut hx);
    h.op.apply(&y, &mut hy);
    let a = h.dot(&y, &hx);
    let b = h.dot(&x, &hy);
    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
}

#[test]
fn size_limit_is_enforced() {
    let s = spec(3, 2, [Statistics::Boson; 2], (5.0, 21), Stencil::Three);
    let map = build_jacobi_map(s.counts(), s.masses()).unwrap();
    assert_eq!(build_internal_hamiltonian(&s, &map).unwrap_err(), Error::SizeExceeded(5));
}

#[test]
fn two_particle_projection_is_even_or_odd_part() {
    let s = diatomic(Statistics::Boson, 41);
    let map = build_jacobi_map(s.counts(), s.masses()).unwrap();
    let h = build_internal_hamiltonian(&s, &map).unwrap();
    let g = &h.op.grid;
    let f: Vec<f64> = (0..g.len).map(|p| {
        let x = g.axes[0].x(p);
        (-(x - 1.0).powi(2)).exp()
    }).collect();
    let even = symmetry_project(&f, [Statistics::Boson; 2], &map, g);
    let odd = symmetry_project(&f, [Statistics::Fermion; 2], &map, g);
    for p in 0..g.len {
        let q = g.len - 1 - p;
        assert!((even[p] - 0.5 * (f[p] + f[q])).abs() < 1e-14);
        assert!((odd[p] - 0.5 * (f[p] - f[q])).abs() < 1e-14);
    }
    let again = symmetry_project(&even, [Statistics::Boson; 2], &map, g);
    assert!(again.iter().zip(&even).all(|(a, b)| (a - b).abs() < 1e-14));
    let killed = symmetry_project(&even, [Statistics::Fermion; 2], &map, g);
    assert!(killed.iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn exact_permutations_are_detected() {
    // Swapping the first two particles flips ξ₁ only; the full group of
    // three identical particles also has elements that mix the axes.
    let s = spec(3, 0, [Statistics::Boson; 2], (6.0, 25), Stencil::Three);
    let map = build_jacobi_map(s.counts(), s.masses()).unwrap();
    let g = TensorGrid::new(vec![s.grid(); 2]);
    let group = SymmetryGroup::new(&map, [Statistics::Boson; 2], &g);
    assert_eq!(group.order(), 6);
    assert_eq!(group.elements.iter().filter(|e| e.index_map.is_some()).count(), 2);
    assert!(!group.all_exact());
}

#[test]
fn three_particle_densities_are_normalized() {
    let s = mixed_three();
    let (_, psi) = solve(&s);
    let r1 = internal_density(&psi, 0);
    let r2 = internal_density(&psi, 1);
    assert!((r1.integrate() - 2.0).abs() < 1e-8, "{}", r1.integrate());
    assert!((r2.integrate() - 1.0).abs() < 1e-8);
    let g1 = pair_density(&psi, 0).unwrap();
    let g12 = coupling_pair_density(&psi).unwrap();
    assert!((g1.integrate() - 2.0).abs() < 1e-6);
    assert!((g12.integrate() - 2.0).abs() < 1e-6);
    assert!(g1.l1_distance(&g1.transpose()) < 1e-10);
    assert!(g1.min() >= -1e-12 && g12.min() >= -1e-12);
    // Marginals.
    let m1 = g1.marginal();
    assert!(m1.l1_distance(&r1) < 1e-6);
    let m12 = g12.marginal();
    assert!(m12.l1_distance(&r1) < 1e-6);
    let m21 = g12.transpose().marginal();
    let two_r2 = GridFunction { grid: r2.grid, values: r2.values.iter().map(|v| 2.0 * v).collect() };
    assert!(m21.l1_distance(&two_r2) < 1e-6);
    assert_eq!(pair_density(&psi, 1).unwrap_err(), Error::TooFewParticles { species: 2, count: 1 });
}

#[test]
fn fermion_pair_density_vanishes_on_diagonal() {
    let (_, psi) = solve(&diatomic(Statistics::Fermion, 201));
    let g = pair_density(&psi, 0).unwrap();
    let n = g.grid.n_points;
    let max = g.max();
    for i in 0..n {
        assert!(g.at(i, i) <= 1e-6 * max);
    }
}

#[test]
fn coupling_density_needs_both_species() {
    let (_, psi) = solve(&diatomic(Statistics::Boson, 101));
    assert_eq!(coupling_pair_density(&psi).unwrap_err(), Error::MissingSpecies);
}

#[test]
fn diatomic_density_matches_pushforward() {
    let (_, psi) = solve(&diatomic(Statistics::Boson, 401));
    let rho = internal_density(&psi, 0);
    // ξ = x₂ − x₁, r − R = ±ξ/2, |χ₀(ξ)|² with ω = √2, μ = 1/2.
    let a = 0.5 * 2f64.sqrt();
    let exact = GridFunction::from_fn(rho.grid, |r| {
        let xi = 2.0 * r;
        2.0 * 2.0 * (a / std::f64::consts::PI).sqrt() * (-a * xi * xi).exp()
    });
    assert!(rho.l1_distance(&exact) < 1e-6, "{}", rho.l1_distance(&exact));
    let mirrored = GridFunction { grid: rho.grid, values: rho.values.iter().rev().cloned().collect() };
    assert!(rho.l1_distance(&mirrored) < 1e-8);
}

#[test]
fn kinetic_evaluations_agree() {
    let (h, psi) = solve(&diatomic(Statistics::Boson, 1201));
    let t = interacting_kinetic(&h, &psi);
    assert!((t - 0.5 * psi.energy).abs() < 1e-6, "virial {t}");
    let ts = spectral_kinetic(&psi);
    assert!((t - ts).abs() < 1e-8, "{t} {ts}");
    let m = momentum_density(&psi, 0);
    assert!((m.density.integrate() - 2.0).abs() < 1e-6);
    assert!(m.mean.abs() < 1e-8);
    assert!((m.kinetic - ts).abs() < 1e-10);
}

#[test]
fn species_kinetic_sums_to_total_for_three_particles() {
    let s = mixed_three();
    let (h, psi) = solve(&s);
    let t = interacting_kinetic(&h, &psi);
    let split = species_kinetic(&h, &psi, 0) + species_kinetic(&h, &psi, 1);
    assert!((t - split).abs() < 1e-12 * t.abs());
    let m: f64 = (0..2).map(|l| momentum_density(&psi, l).kinetic).sum();
    assert!((m - spectral_kinetic(&psi)).abs() < 1e-10);
}

#[test]
fn energy_breakdown_closes() {
    let s = mixed_three();
    let (h, psi) = solve(&s);
    let r = [internal_density(&psi, 0), internal_density(&psi, 1)];
    let e = energy_breakdown_exact(&h, &psi, [Some(&r[0]), Some(&r[1])], None);
    assert!(!e.kinetic_ks_available);
    assert!(((e.total - psi.energy) / psi.energy).abs() < 1e-10, "{} {}", e.total, psi.energy);
    assert!(e.c12 != 0.0);
}

#[test]
fn no_coupling_means_no_coupling_correlation() {
    let mut s = mixed_three();
    s.u12 = PotentialSpec::None;
    s.v_int = [InternalPotentialSpec::HarmonicTrap { k: 1.0 }; 2];
    let (h, psi) = solve(&s);
    let r = [internal_density(&psi, 0), internal_density(&psi, 1)];
    let e = energy_breakdown_exact(&h, &psi, [Some(&r[0]), Some(&r[1])], None);
    assert_eq!(e.c12, 0.0);
    assert_eq!(e.hartree_12, 0.0);
}

#[test]
fn internal_potential_from_density_matches_direct_value() {
    let mut s = diatomic(Statistics::Boson, 401);
    s.v_int[0] = InternalPotentialSpec::HarmonicTrap { k: 0.5 };
    let (h, psi) = solve(&s);
    let rho = internal_density(&psi, 0);
    let f: Vec<f64> = rho.grid.points().iter().zip(&rho.values).map(|(r, p)| s.v_int[0].eval(*r) * p).collect();
    let via_rho = crate::grid::integrate(&rho.grid, &f);
    let direct = h.expectation(&psi.amplitudes, &h.terms.internal[0]);
    assert!((via_rho - direct).abs() < 1e-8, "{via_rho} {direct}");
}

#[test]
fn convolution_limits_and_normalization() {
    let (_, psi) = solve(&diatomic(Statistics::Boson, 201));
    let rho = internal_density(&psi, 0);
    let narrow = lab_density_convolve(&rho, &CMWavepacket::new(0.0, 1e-4, 0.0).unwrap());
    assert!(narrow.l1_distance(&rho) < 1e-12);
    let wide = lab_density_convolve(&rho, &CMWavepacket::new(0.0, 0.7, 0.0).unwrap());
    assert!((wide.integrate() - 2.0).abs() < 1e-8);
    let mid = lab_density_convolve(&rho, &CMWavepacket::new(0.0, 0.2, 0.0).unwrap());
    assert!(mid.l1_distance(&rho) < wide.l1_distance(&rho));
}

#[test]
fn packet_is_normalized() {
    let g = CMWavepacket::new(0.3, 0.8, 1.2).unwrap();
    let grid = crate::grid::Grid1D::new(-12.0, 12.0, 2001).unwrap();
    let f = GridFunction::from_fn(grid, |r| g.probability(r));
    assert!((f.integrate() - 1.0).abs() < 1e-10);
}

#[test]
fn solver_is_deterministic() {
    let s = mixed_three();
    let (_, a) = solve(&s);
    let (_, b) = solve(&s);
    assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    assert_eq!(a.amplitudes, b.amplitudes);
}
