//! The measure with density l^-d on each square, its quadrature cloud and
//! the ball-based constants.

use nhcz::geometry::{DyadicSquare, SquareFamily};
use nhcz::measure::{
    a2_constant, a2_ratio, ball_mass, borderline_exponent, build_measure, build_quadrature, growth_constant,
    BallQuery, BallSample,
};
use num_complex::Complex64;

fn main() -> nhcz::Result<()> {
    let squares = vec![DyadicSquare::new(0, 0, 0), DyadicSquare::new(2, 16, 2), DyadicSquare::new(1, 2, 12)];
    let measure = build_measure(SquareFamily::new(squares, 1.2, 4.0)?);
    for m in 0..measure.family().len() {
        println!("square {m}: density {:.4}, mass {:.4}", measure.densities()[m], measure.square_mass(m));
    }
    println!("total mass {:.6}", measure.total_mass());

    let cloud = build_quadrature(&measure, 8)?;
    println!("{} nodes, quadrature mass {:.6}", cloud.len(), cloud.total_mu());

    let ball = BallQuery::new(Complex64::new(0.5, 0.5), 0.25)?;
    println!("mu(B((0.5,0.5), 0.25)) = {:.5} (disc area {:.5})", ball_mass(&cloud, &ball), ball.area());
    println!("A2 ratio of that disc: {:.5}", a2_ratio(&cloud, &ball));

    let sample = BallSample::default_for(&cloud);
    let g = growth_constant(&cloud, &sample);
    let a = a2_constant(&cloud, &sample);
    println!("C_growth = {:.4} at {:?}", g.constant, g.witness);
    println!("C_3      = {:.4} at {:?}", a.constant, a.witness);
    println!("sample: {}", g.sample);

    for k in [1.0, 2.0, 4.0] {
        println!("t = 1, K = {k}: t' = {:.6}", borderline_exponent(1.0, k)?);
    }
    Ok(())
}
