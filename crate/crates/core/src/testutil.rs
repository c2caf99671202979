use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::ComplexMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(r: &mut impl Rng, d: usize) -> ComplexMatrix {
    DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(r: &mut impl Rng, d: usize) -> ComplexMatrix {
    let a = random_matrix(r, d);
    (&a + a.adjoint()).scale(0.5)
}

pub fn random_density(r: &mut impl Rng, d: usize) -> ComplexMatrix {
    let a = random_matrix(r, d);
    let p = &a * a.adjoint();
    let tr = p.trace();
    p / tr
}

pub fn hermitian_strategy(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d).prop_map(move |v| {
        let a = DMatrix::from_fn(d, d, |i, j| {
            let (re, im) = v[i * d + j];
            Complex64::new(re, im)
        });
        (&a + a.adjoint()).scale(0.5)
    })
}

pub fn density_strategy(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    any::<u64>().prop_map(move |seed| random_density(&mut rng(seed), d))
}
