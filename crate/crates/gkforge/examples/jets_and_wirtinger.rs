//! Taylor jets of a parsed expression and the Wirtinger derivatives built from them.

use gkforge::charts::{Chart, Coord, Role};
use gkforge::expr::{Slot, WirtingerTable};

fn main() -> gkforge::Result<()> {
    let chart = Chart::new("line", vec![Coord::new("z", Role::Z)])?;
    let k = chart.parse("log(1 + abs2(z))")?;
    let x = [0.5, -0.25];

    let jet = k.eval_jet(&x, 3)?;
    println!("K        = {:.12}", jet.value());
    println!("dK/dx    = {:.12}", jet.partial(&[1, 0])?);
    println!("d2K/dxdy = {:.12}", jet.partial(&[1, 1])?);
    println!("d3K/dx3  = {:.12}", jet.partial(&[3, 0])?);

    // ∂z∂z̄ log(1 + |z|²) = 1 / (1 + |z|²)²
    let table = WirtingerTable::new(&jet, &chart.pairs());
    let mixed = table.get(&[Slot::holo(0), Slot::anti(0)])?;
    let r2 = x[0] * x[0] + x[1] * x[1];
    println!("K_zz̄     = {:.12} (closed form {:.12})", mixed.re, 1.0 / (1.0 + r2).powi(2));

    let f = chart.parse("z*z*z")?;
    let c = f.eval_complex(&x)?;
    println!("z³       = {:.6} + {:.6}i", c.re, c.im);
    Ok(())
}
