use super::*;
use crate::exact::{build_internal_hamiltonian, internal_density, solve_ground, SolveOptions};
use crate::jacobi::build_jacobi_map;
use crate::system::SpeciesSpec;

fn base(n1: usize, n2: usize, stats: Statistics) -> SystemSpec {
    let mut s = SystemSpec::default();
    s.species[0] = SpeciesSpec { label: "a".into(), count: n1, mass: 1.0, statistics: stats };
    s.species[1] = SpeciesSpec { label: "b".into(), count: n2, mass: 1.0, statistics: stats };
    s.grid.stencil = Stencil::Five;
    s
}

fn opts() -> ScfOptions {
    ScfOptions { tol: 1e-10, mix: 0.3, max_iter: 500 }
}

#[test]
fn trapped_bosons_occupy_oscillator_ground_state() {
    let mut s = base(2, 0, Statistics::Boson);
    s.v_int[0] = InternalPotentialSpec::HarmonicTrap { k: 1.0 };
    let st = scf_solve(&s, &FunctionalSpec::uniform(Channel::Hartree), &opts()).unwrap();
    let sp = st.species[0].as_ref().unwrap();
    assert_eq!(sp.occupations, vec![2.0]);
    assert!((sp.eigenvalues[0] - 0.5).abs() < 1e-7, "{}", sp.eigenvalues[0]);
    assert!((sp.density.integrate() - 2.0).abs() < 1e-8);
    let e = ks_energy(&st, &FunctionalSpec::uniform(Channel::Hartree), &s).unwrap();
    assert!((e.total - 2.0 * sp.eigenvalues[0]).abs() < 1e-10);
    assert!((e.total - e.sum_of_parts()).abs() <= 1e-12 * e.total.abs());
}

#[test]
fn ks_potential_without_interactions_is_the_trap() {
    let mut s = base(1, 0, Statistics::Fermion);
    s.v_int[0] = InternalPotentialSpec::HarmonicTrap { k: 2.0 };
    let f = FunctionalSpec::uniform(Channel::Hartree);
    let st = scf_solve(&s, &f, &opts()).unwrap();
    let v = ks_potential(0, 0, &st, &s, &f).unwrap();
    for (r, x) in st.grid.points().iter().zip(&v.values) {
        assert_eq!(*x, s.v_int[0].eval(*r));
    }
}

#[test]
fn fermion_orbitals_are_orthonormal() {
    let mut s = base(3, 0, Statistics::Fermion);
    s.u11 = PotentialSpec::SoftCoulomb { amplitude: 1.0, softening: 1.0 };
    s.v_int[0] = InternalPotentialSpec::HarmonicTrap { k: 1.0 };
    for c in [Channel::Hartree, Channel::Sic] {
        let st = scf_solve(&s, &FunctionalSpec::uniform(c), &opts()).unwrap();
        let sp = st.species[0].as_ref().unwrap();
        let h = st.grid.spacing;
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = sp.orbitals[i].values.iter().zip(&sp.orbitals[j].values).map(|(a, b)| a * b).sum::<f64>() * h;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-8, "{c:?} {i} {j} {d}");
            }
        }
        assert!((sp.density.integrate() - 3.0).abs() < 1e-8);
    }
}

#[test]
fn hartree_coupling_term_follows_the_other_density() {
    let mut s = base(1, 1, Statistics::Fermion);
    s.species[1].mass = 3.0;
    s.u12 = PotentialSpec::Gaussian { amplitude: -1.0, range: 1.0 };
    s.v_int = [InternalPotentialSpec::HarmonicTrap { k: 1.0 }; 2];
    let f = FunctionalSpec::uniform(Channel::Hartree);
    let mut st = scf_solve(&s, &f, &opts()).unwrap();
    let full = ks_potential(0, 0, &st, &s, &f).unwrap();
    let trap: Vec<f64> = st.grid.points().iter().map(|&r| s.v_int[0].eval(r)).collect();
    assert!(full.values.iter().zip(&trap).any(|(a, b)| (a - b).abs() > 1e-3));
    let sp = st.species[1].as_mut().unwrap();
    sp.density.values.iter_mut().for_each(|v| *v = 0.0);
    let zeroed = ks_potential(0, 0, &st, &s, &f).unwrap();
    assert_eq!(zeroed.values, trap);
}

#[test]
fn symmetric_system_has_equal_potentials() {
    let mut s = base(2, 2, Statistics::Fermion);
    s.u11 = PotentialSpec::SoftCoulomb { amplitude: 1.0, softening: 1.0 };
    s.u22 = s.u11;
    s.u12 = PotentialSpec::Gaussian { amplitude: -0.5, range: 1.0 };
    s.v_int = [InternalPotentialSpec::HarmonicTrap { k: 0.5 }; 2];
    let f = FunctionalSpec::uniform(Channel::Sic);
    let st = scf_solve(&s, &f, &opts()).unwrap();
    for i in 0..2 {
        let a = ks_potential(0, i, &st, &s, &f).unwrap();
        let b = ks_potential(1, i, &st, &s, &f).unwrap();
        let d = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 1e-10);
    }
}

#[test]
fn sic_removes_single_particle_self_interaction() {
    let mut s = base(1, 0, Statistics::Fermion);
    s.u11 = PotentialSpec::SoftCoulomb { amplitude: 1.0, softening: 1.0 };
    s.v_int[0] = InternalPotentialSpec::HarmonicTrap { k: 1.0 };
    let f = FunctionalSpec::uniform(Channel::Sic);
    let st = scf_solve(&s, &f, &opts()).unwrap();
    let e = ks_energy(&st, &f, &s).unwrap();
    assert_eq!(e.hartree[0] + e.xc[0].interaction, 0.0);
    let free = scf_solve(&s, &FunctionalSpec::uniform(Channel::None), &opts()).unwrap();
    let d = st.density(0).unwrap().l1_distance(free.density(0).unwrap());
    assert!(d < 1e-8, "{d}");
    // The orbital potential is minus the orbital's Hartree field.
    let sp = st.species[0].as_ref().unwrap();
    let u = xc_potential(&f, &s, sp, 0, 0).unwrap();
    let vh = hartree_potential(&sp.orbital_density(0), &s.u11);
    assert!(u.values.iter().zip(&vh.values).all(|(a, b)| (a + b).abs() < 1e-10));
}

#[test]
fn sic_energy_is_stationary_at_the_solution() {
    let mut s = base(2, 0, Statistics::Boson);
    s.u11 = PotentialSpec::Gaussian { amplitude: 1.0, range: 1.0 };
    s.v_int[0] = InternalPotentialSpec::HarmonicTrap { k: 1.0 };
    let f = FunctionalSpec::uniform(Channel::Sic);
    let st = scf_solve(&s, &f, &opts()).unwrap();
    let sp = st.species[0].as_ref().unwrap();
    let g = st.grid;
    let eta: Vec<f64> = g.points().iter().map(|&r| r * (-(r * r)).exp()).collect();
    let energy = |d: f64| {
        let mut o: Vec<f64> = sp.orbitals[0].values.iter().zip(&eta).map(|(a, b)| a + d * b).collect();
        let n = (o.iter().map(|x| x * x).sum::<f64>() * g.spacing).sqrt();
        o.iter_mut().for_each(|x| *x /= n);
        let s2 = SpeciesState::from_orbitals(1.0, 2, Statistics::Boson, st.stencil, vec![GridFunction { grid: g, values: o }], vec![0.0]);
        let mut t = st.clone();
        t.species[0] = Some(s2);
        ks_energy(&t, &f, &s).unwrap().total
    };
    let d = 1e-3;
    let slope = (energy(d) - energy(-d)) / (2.0 * d);
    assert!(slope.abs() < 1e-5, "{slope}");
    assert!(energy(d) > energy(0.0));
}

#[test]
fn oracle_channels_have_no_potential() {
    let mut s = base(2, 0, Statistics::Boson);
    s.u11 = PotentialSpec::Harmonic { k: 1.0 };
    let f = FunctionalSpec::uniform(Channel::ExactOracle);
    assert_eq!(scf_solve(&s, &f, &opts()).unwrap_err(), Error::MissingOracle);
    let map = build_jacobi_map(s.counts(), s.masses()).unwrap();
    let h = build_internal_hamiltonian(&s, &map).unwrap();
    let psi = solve_ground(&h, &SolveOptions::default()).unwrap();
    let f = f.with_oracle(ExactOracle::from_exact(&h, &psi));
    assert_eq!(scf_solve(&s, &f, &opts()).unwrap_err(), Error::NotDifferentiable);
    let st = scf_solve(&s, &FunctionalSpec::uniform(Channel::None), &opts()).unwrap();
    assert_eq!(xc_potential(&f, &s, st.species[0].as_ref().unwrap(), 0, 0).unwrap_err(), Error::NotDifferentiable);
    let (xc, c12) = xc_energy(&FunctionalSpec::uniform(Channel::None), &st, &s).unwrap();
    assert_eq!(xc, [XcParts::default(); 2]);
    assert_eq!(c12, 0.0);
}

#[test]
fn mean_field_misses_correlation_energy() {
    let mut s = base(1, 1, Statistics::Fermion);
    s.u12 = PotentialSpec::Harmonic { k: 1.0 };
    let map = build_jacobi_map(s.counts(), s.masses()).unwrap();
    let h = build_internal_hamiltonian(&s, &map).unwrap();
    let exact = solve_ground(&h, &SolveOptions::default()).unwrap();
    let f = FunctionalSpec::uniform(Channel::Hartree);
    let st = scf_solve(&s, &f, &opts()).unwrap();
    let e = ks_energy(&st, &f, &s).unwrap();
    assert!(e.total >= exact.energy, "{} {}", e.total, exact.energy);
}

#[test]
fn inversion_of_oscillator_density() {
    let g = Grid1D::new(-8.0, 8.0, 1281).unwrap();
    let (m, w) = (1.0, 1.0);
    let rho = GridFunction::from_fn(g, |r| 2.0 * (m * w / std::f64::consts::PI).sqrt() * (-m * w * r * r).exp());
    let per = GridFunction { grid: g, values: rho.values.iter().map(|v| v / 2.0).collect() };
    let inv = invert_ks_single_orbital(&per, m, Stencil::Five).unwrap();
    let v = &inv.potential;
    // Compare up to a constant.
    let mid = v.grid.n_points / 2;
    let c = v.values[mid] - 0.5 * m * w * w * v.grid.x(mid).powi(2);
    let err = (1..v.grid.n_points - 1)
        .map(|i| (v.values[i] - c - 0.5 * m * w * w * v.grid.x(i).powi(2)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
    let (_, orb) = resolve_inversion(&inv, &g).unwrap();
    let back = GridFunction { grid: g, values: orb.values.iter().map(|x| 2.0 * x * x).collect() };
    assert!(back.l1_distance(&rho) < 1e-6);
}

#[test]
fn inversion_rejects_interior_zeros() {
    let g = Grid1D::new(-6.0, 6.0, 241).unwrap();
    let rho = GridFunction::from_fn(g, |r| r * r * (-r * r).exp());
    assert!(matches!(invert_ks_single_orbital(&rho, 1.0, Stencil::Three), Err(Error::UnstableInversion(_))));
}

#[test]
fn exact_two_boson_density_is_v_representable() {
    let mut s = base(2, 0, Statistics::Boson);
    s.u11 = PotentialSpec::Harmonic { k: 1.0 };
    let map = build_jacobi_map(s.counts(), s.masses()).unwrap();
    let h = build_internal_hamiltonian(&s, &map).unwrap();
    let psi = solve_ground(&h, &SolveOptions::default()).unwrap();
    let rho = internal_density(&psi, 0);
    let st = state_from_inversion(&s, [Some(&rho), None]).unwrap();
    assert!(st.density(0).unwrap().l1_distance(&rho) < 1e-5);
    let f = FunctionalSpec::uniform(Channel::ExactOracle).with_oracle(ExactOracle::from_exact(&h, &psi));
    let e = ks_energy(&st, &f, &s).unwrap();
    assert!((e.total - psi.energy).abs() < 1e-8, "{} {}", e.total, psi.energy);
}

#[test]
fn aufbau_tie_is_reported() {
    // Two decoupled identical wells: the lowest pair is degenerate to
    // machine precision.
    let g = Grid1D::new(-20.0, 20.0, 401).unwrap();
    let v: Vec<f64> = g.points().iter().map(|&r| if r.abs() > 2.0 && r.abs() < 18.0 { -50.0 * (-(r.abs() - 10.0).powi(2)).exp() } else { 0.0 }).collect();
    let err = occupy(0, 1, Statistics::Fermion, 1.0, &g, Stencil::Three, &v, None, &mut Vec::new()).unwrap_err();
    assert!(matches!(err, Error::DegenerateFermiLevel { species: 1, .. }));
}
