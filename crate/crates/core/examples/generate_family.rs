//! Draw an admissible family, check it exactly and show what a violation looks like.

use nhcz::geometry::{check_disjointness, generate_family, BoundingBox, Disjointness, GeneratorConfig, SquareFamily};

fn main() -> nhcz::Result<()> {
    let cfg = GeneratorConfig::new(7, 24, 1.2, 4.0)
        .generations(0, 3)
        .bounding_box(BoundingBox::square(16.0));
    let gen = generate_family(&cfg)?;
    let fam = &gen.family;
    println!(
        "{} squares after {} draws (complete: {})",
        fam.len(),
        gen.attempts,
        gen.complete
    );
    println!("packing constant {:.4} attained on {}", fam.packing_constant(), fam.packing_witness());
    println!("disjointness: {:?}", check_disjointness(fam.squares()));

    // Put a copy of square 1 right next to square 0.
    let mut squares = fam.squares().to_vec();
    let q = squares[0];
    squares[1] = nhcz::geometry::DyadicSquare::new(q.k, q.i + 2, q.j);
    match check_disjointness(&squares) {
        Disjointness::Violation(a, b) => println!("mutated family: 4-dilates of {a} and {b} meet"),
        Disjointness::Ok => println!("mutated family unexpectedly passed"),
    }
    assert!(SquareFamily::new(squares, 1.2, 4.0).is_err());

    println!("\n{}", fam.to_file().to_json());
    Ok(())
}
