use std::time::Instant;

use ipconv::evolution::InitialCondition;
use ipconv::{Grid, PhysParams, SimState, Stepper, StepperConfig};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let grid = Grid::cube(n, 1.0).unwrap();
    let params = PhysParams::new(1.0, 1.0).unwrap();
    let theta = InitialCondition::Random { seed: 1, k0: 1.0, amplitude: 1.0 }.build(&grid).unwrap();
    let mut state = SimState::new(theta, params).unwrap();
    let mut stepper = Stepper::new(&grid, &params, StepperConfig::rk4(1e-3).unwrap());
    let t = Instant::now();
    let steps = 20;
    for _ in 0..steps {
        stepper.step(&mut state).unwrap();
    }
    println!("{n}^3: {:.2} ms/step", t.elapsed().as_secs_f64() * 1e3 / steps as f64);
}
