use equiweyl::group_rep::{build_group, character_table, GroupFamily};
use equiweyl::isotypic_solver::{full_spectrum, isotypic_spectrum, SolverOptions, SymmetryAction};
use equiweyl::lattice_domain::{discretize_with, group_permutations, Centering, DomainSpec, InteriorIndex};
use equiweyl::operator_disc::{assemble, Coefficient, OperatorSpec};
use equiweyl::oracle::{cube_laplacian_oracle, ModeSpectrum};

fn action(domain: &DomainSpec, h: f64, family: GroupFamily, k: usize) -> (InteriorIndex, SymmetryAction) {
    let g = build_group(family, k, domain.dim()).unwrap();
    // odd point counts per axis on the cube
    let grid = discretize_with(domain, h, Centering::Vertex).unwrap();
    let perms = group_permutations(&grid, &g).unwrap();
    (grid, SymmetryAction::new(character_table(&g).unwrap(), perms).unwrap())
}

#[test]
fn cube_blocks_match_the_discrete_oracle_in_three_dimensions() {
    let cube = DomainSpec::cube(3, 0.5).unwrap();
    let m = 9;
    let (grid, act) = action(&cube, 1.0 / (m as f64 + 1.0), GroupFamily::Product, 4);
    assert_eq!(grid.len(), m * m * m);
    let l = assemble(&OperatorSpec::laplacian(), &grid).unwrap();
    let spec = isotypic_spectrum(&l, &act, &SolverOptions::default()).unwrap();
    let oracle = cube_laplacian_oracle(
        &cube,
        &build_group(GroupFamily::Product, 4, 3).unwrap(),
        act.table(),
        ModeSpectrum::Discrete { m },
        1e9,
    )
    .unwrap();
    for block in &spec.blocks {
        let expected = oracle.values(block.chi);
        assert_eq!(block.values.len(), expected.len(), "character {}", block.label);
        for (a, b) in block.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9 * b, "{}: {a} vs {b}", block.label);
        }
    }
}

#[test]
fn iterative_path_agrees_with_dense_below_the_cutoff() {
    let square = DomainSpec::square(0.5).unwrap();
    let (grid, act) = action(&square, 1.0 / 40.0, GroupFamily::Cyclic, 4);
    let l = assemble(&OperatorSpec::laplacian(), &grid).unwrap();
    let dense = isotypic_spectrum(&l, &act, &SolverOptions::default()).unwrap();
    let cutoff = 1500.0;
    let opts = SolverOptions { cutoff: Some(cutoff), lanczos_min_dim: 100, ..SolverOptions::default() };
    let iterative = isotypic_spectrum(&l, &act, &opts).unwrap();
    for (d, it) in dense.blocks.iter().zip(&iterative.blocks) {
        assert_eq!(it.complete_below, cutoff);
        let want: Vec<f64> = d.values.iter().copied().filter(|&v| v < cutoff).collect();
        let got: Vec<f64> = it.values.iter().copied().filter(|&v| v < cutoff).collect();
        assert_eq!(got.len(), want.len(), "character {}", d.label);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8 * b);
        }
        assert!(it.count(cutoff + 1.0).is_err());
    }
}

#[test]
fn annulus_blocks_partition_the_full_spectrum() {
    let annulus = DomainSpec::annulus(2, 0.15, 0.5).unwrap();
    let (grid, act) = action(&annulus, 1.0 / 24.0, GroupFamily::Dihedral, 4);
    let l = assemble(&OperatorSpec::div_a_grad(Coefficient::Bump { beta: 1.5, width: 0.3 }), &grid).unwrap();
    let spec = isotypic_spectrum(&l, &act, &SolverOptions::default()).unwrap();
    let full = full_spectrum(&l).unwrap();
    let union = spec.union();
    assert_eq!(union.len(), full.len());
    for (a, b) in union.iter().zip(&full) {
        assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
    }
}

#[test]
fn bilaplacian_blocks_are_squares_of_laplacian_blocks_on_the_square() {
    let square = DomainSpec::square(0.5).unwrap();
    let (grid, act) = action(&square, 1.0 / 16.0, GroupFamily::Dihedral, 4);
    let lap = isotypic_spectrum(&assemble(&OperatorSpec::laplacian(), &grid).unwrap(), &act, &SolverOptions::default())
        .unwrap();
    let bi =
        isotypic_spectrum(&assemble(&OperatorSpec::bilaplacian(), &grid).unwrap(), &act, &SolverOptions::default())
            .unwrap();
    for (a, b) in lap.blocks.iter().zip(&bi.blocks) {
        assert_eq!(a.values.len(), b.values.len());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x * x - y).abs() < 1e-8 * y);
        }
    }
}
