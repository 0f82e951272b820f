use tenfold::lattice::{self, BoundaryCondition, DisorderConfig, LatticeModel};
use tenfold::symmetry::{self, SymmetryClass};

fn torus_h(m: &LatticeModel, seed: Option<u64>) -> tenfold::linalg::CMat {
    let dims: Vec<usize> = if m.d == 1 { vec![8] } else { vec![4, 4] };
    let dis = match seed {
        None => DisorderConfig::clean(&dims, m.disorder_dim()),
        Some(s) => DisorderConfig::sample(&dims, m.disorder_dim(), 0.3 * m.gap_estimate(), s),
    };
    lattice::assemble(m, &dis, BoundaryCondition::PeriodicTorus).m
}

#[test]
fn zoo_models_classify_in_declared_class() {
    let cases = [
        (lattice::kitaev_chain(1.0, 1.0, 0.5), SymmetryClass::D),
        (lattice::ssh(1.0, 2.0), SymmetryClass::AIII),
        (lattice::ssh(1.0, 2.0).with_spin(), SymmetryClass::BDI),
        (lattice::qwz(1.0), SymmetryClass::A),
        (lattice::p_ip(1.0, 1.0, 2.0), SymmetryClass::D),
    ];
    for (m, class) in cases {
        assert_eq!(m.class, class, "{}", m.name);
        let phys = symmetry::build_physical(m.n_v(), class).unwrap();
        for seed in [None, Some(1), Some(2)] {
            let h = torus_h(&m, seed);
            let c = symmetry::classify(&h, &phys, class, 1e-8).unwrap();
            assert!(c.commutes_with_symmetries && c.j_anticommutes_with_pseudosyms, "{} {seed:?}: {c:?}", m.name);
            assert!(symmetry::srfl_agrees(&h, &phys, class).unwrap(), "{} {seed:?}", m.name);
        }
    }
}

#[test]
fn ssh_closes_at_v_equal_w() {
    assert!(lattice::ssh(1.3, 1.3).clean_gap(512) < 1e-12);
    assert!((lattice::ssh(1.0, 1.3).clean_gap(512) - 0.3).abs() < 1e-12);
}
