//! Shrinking a certificate towards the origin keeps it valid.

use szlenk_lab::szlenk::{certify, radial_scale, validate_certificate, CertifyOptions};
use szlenk_lab::{orlicz::OrliczParams, Space, SparseVec};

fn main() -> szlenk_lab::Result<()> {
    let x0 = SparseVec::unit(1).scale(&0.5);
    for space in [
        Space::Tsirelson,
        Space::Schlumprecht,
        Space::Baernstein,
        Space::Orlicz(OrliczParams::new(1.0, 1.0)?),
    ] {
        let cert = certify(space, &x0, 0.8, &CertifyOptions::default())?;
        let mut line = format!("{:13} base {}", space.tag(), validate_certificate(&cert)?);
        for theta in [0.25, 0.5, 0.9] {
            line += &format!("  θ={theta}: {}", validate_certificate(&radial_scale(&cert, theta)?)?);
        }
        println!("{line}");
    }
    Ok(())
}
