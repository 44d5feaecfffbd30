//! Radius curves of all four spaces, written as CSV to stdout.

use szlenk_lab::report::{emit_curve, OutputFormat};
use szlenk_lab::szlenk::{build_curve, parse_eps_grid, CurveBudget};
use szlenk_lab::{orlicz::OrliczParams, Space};

fn main() -> szlenk_lab::Result<()> {
    let grid = parse_eps_grid("0.25:1.75:0.5")?;
    let budget = CurveBudget {
        constructions: 8,
        ..CurveBudget::default()
    };
    for space in [
        Space::Tsirelson,
        Space::Schlumprecht,
        Space::Baernstein,
        Space::Orlicz(OrliczParams::from_reduced(3.0)),
    ] {
        println!("# {space}");
        let curve = build_curve(space, &grid, &budget)?;
        emit_curve(&curve, OutputFormat::Csv, &mut std::io::stdout())?;
    }
    Ok(())
}
