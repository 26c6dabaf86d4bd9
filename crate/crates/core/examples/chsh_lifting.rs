//! Lifts the CHSH seed to three parties and composes the star family into
//! the improved inequality.

use gmnl::compose::{common_negative_term, compose_gmnl, gamma_exact, star_chsh_family};
use gmnl::seeds::chsh_seed;

fn main() -> gmnl::error::Result<()> {
    let seed = chsh_seed();
    println!("seed:   {seed}");
    let lifted = seed.lift(3, &[0, 1], &[(0, 0)])?;
    println!("lifted: {lifted}");

    let fam = star_chsh_family(3)?;
    for (parties, member) in fam.members() {
        println!("member {parties:?}: {member}");
    }
    println!("I+ = {}", fam.shared_positive_part()?);
    println!("T  = {}", common_negative_term(&fam)?);
    println!("gamma = {}", gamma_exact(&fam, 2)?);

    let ineq = compose_gmnl(&fam)?;
    println!("{ineq}");
    println!("as one expression: {} <= 0", ineq.as_expression());
    Ok(())
}
