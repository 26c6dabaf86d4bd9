//! Canonical form of a three-qubit state hidden behind random local unitaries.

use gmnl::quantum::canonical::{canonical_sample, random_unitary};
use gmnl::quantum::canonicalize;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gmnl::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let st = canonical_sample(&mut rng, true);
    let us: Vec<_> = (0..3).map(|_| random_unitary(&mut rng, 2)).collect();
    let hidden = st.state().apply_local_unitaries(&us)?;

    let direct = canonicalize(&st.state())?;
    let recovered = canonicalize(&hidden)?;
    println!("sampled   {:.6?} phi {:.6}", st.coefficients(), st.phi);
    println!("canonical {:.6?} phi {:.6}", direct.canonical.coefficients(), direct.canonical.phi);
    println!("recovered {:.6?} phi {:.6}", recovered.canonical.coefficients(), recovered.canonical.phi);
    println!("party order {:?}, residual {:.1e}", recovered.permutation, recovered.residual);
    println!("b > c > d: {}", recovered.canonical.is_nonsymmetric(1e-6));
    Ok(())
}
