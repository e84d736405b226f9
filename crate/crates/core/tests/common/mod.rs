#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use rand::Rng;
use refram::field::{Elem, Layer};
use refram::padic::{teichmuller_lift, FqElem};
use refram::tower::{construct, ExtensionSpec, Tower};

/// (p, m, b, t) covering MRR, NMRR and ordinary towers at both primes.
pub const SPECS: [(u64, usize, usize, usize); 6] =
    [(2, 1, 1, 0), (2, 3, 5, 3), (3, 1, 2, 0), (3, 1, 2, 1), (3, 2, 4, 2), (3, 2, 5, 4)];

pub fn towers() -> &'static [Tower] {
    static TOWERS: OnceLock<Vec<Tower>> = OnceLock::new();
    TOWERS.get_or_init(|| {
        SPECS
            .iter()
            .map(|&(p, m, b, t)| construct(&ExtensionSpec::new(p, 2, m, b, t)).expect("tower builds"))
            .collect()
    })
}

pub fn random_elem<R: Rng>(layer: &Arc<Layer>, rng: &mut R) -> Elem {
    let modulus = layer.ctx().modulus();
    let coords = (0..layer.n() * layer.ctx().f()).map(|_| rng.gen_range(0..modulus)).collect();
    Elem::from_coords(layer, coords, layer.digits())
}

/// `[c] + Pi * (random)` with `c` a random nonzero residue.
pub fn random_unit<R: Rng>(layer: &Arc<Layer>, rng: &mut R) -> Elem {
    let units: Vec<FqElem> = FqElem::all(layer.ctx()).into_iter().filter(|x| !x.is_zero()).collect();
    let c = teichmuller_lift(&units[rng.gen_range(0..units.len())]).unwrap();
    let tail = &Elem::uniformizer(layer) * &random_elem(layer, rng);
    &Elem::from_witt(layer, &c) + &tail
}

/// A random element of exact valuation `v`.
pub fn random_of_valuation<R: Rng>(layer: &Arc<Layer>, v: usize, rng: &mut R) -> Elem {
    &Elem::uniformizer(layer).pow(v as u64) * &random_unit(layer, rng)
}
