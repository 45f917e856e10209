//! Fixed workloads shared by the benchmarks.

use realization_core::generate::{companion_minimal, duplicated_nonminimal, rng_from_seed};
use realization_core::numeric::CMatrix;
use realization_core::{JordanGroup, JordanSpec, Realization, RowSpec};

/// Minimal system of the given shape from a fixed seed.
pub fn minimal_system(n: usize, m: usize, p: usize) -> Realization {
    companion_minimal(n, m, p, &mut rng_from_seed(0xbe7c_0001 + n as u64))
}

/// Non-minimal system with `2·half` states.
pub fn nonminimal_system(half: usize, m: usize, p: usize) -> Realization {
    duplicated_nonminimal(half, m, p, &mut rng_from_seed(0xbe7c_0002 + half as u64))
}

/// Seventeen-state Jordan structure with three eigenvalues.
pub fn seventeen_state_spec() -> JordanSpec {
    let g = |eig: f64, blocks: &[usize]| JordanGroup {
        eig: realization_core::c(eig, 0.0),
        blocks: blocks.to_vec(),
    };
    JordanSpec::new(vec![
        g(1.0, &[2, 2, 2]),
        g(2.0, &[3, 1]),
        g(3.0, &[4, 1, 1, 1]),
    ])
    .expect("valid spec")
}

/// Row spec of [`seventeen_state_spec`] and a conforming `17×8` matrix.
pub fn seventeen_state_rows() -> (RowSpec, CMatrix) {
    let spec = seventeen_state_spec();
    let tol = realization_core::Tolerances::default();
    let b = realization_core::echelon::sample_controllable_b(&spec, 8, 17, &tol).expect("sample");
    (realization_core::echelon::jordan_row_spec(&spec), b)
}
