use std::time::Instant;

use ipconv::evolution::InitialCondition;
use ipconv::spectral::Transform3;
use ipconv::Grid;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let grid = Grid::cube(n, 1.0).unwrap();
    let f = InitialCondition::Random { seed: 1, k0: 1.0, amplitude: 1.0 }.build(&grid).unwrap();
    let mut t = Transform3::product(&grid);
    let mut buf = Vec::new();
    let reps = 50;
    let s = Instant::now();
    for _ in 0..reps {
        t.inverse_pair(f.coeffs(), f.coeffs(), &mut buf);
    }
    println!("inverse {:.2} ms", s.elapsed().as_secs_f64() * 1e3 / reps as f64);
    let mut out = vec![Default::default(); grid.len()];
    let s = Instant::now();
    for _ in 0..reps {
        t.forward_real(&mut buf, &mut out, 1.0);
    }
    println!("forward {:.2} ms", s.elapsed().as_secs_f64() * 1e3 / reps as f64);
}
