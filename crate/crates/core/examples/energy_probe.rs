use std::time::Instant;

use ipconv::evolution::InitialCondition;
use ipconv::verification::{energy_audit, Recorder};
use ipconv::{Grid, PhysParams, SimState, Stepper, StepperConfig};

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|s| s.parse().unwrap()).collect();
    let (n, dt, t_end, k0) = (args[0] as usize, args[1], args[2], args[3]);
    let grid = Grid::cube(n, 1.0).unwrap();
    let params = PhysParams::new(1.0, 1.0).unwrap();
    let theta = InitialCondition::Random { seed: 1, k0, amplitude: 1.0 }.build(&grid).unwrap();
    let state = SimState::new(theta, params).unwrap();
    let mut rec = Recorder::new(&grid, &params);
    let t = Instant::now();
    let out = Stepper::new(&grid, &params, StepperConfig::rk4(dt).unwrap())
        .run(state, t_end, Some(dt), &mut [&mut rec])
        .unwrap();
    let audit = energy_audit(rec.rows(), 1.0).unwrap();
    let r0 = rec.rows()[0];
    let rl = rec.rows().last().unwrap();
    println!(
        "n={n} dt={dt} steps={} time={:.1}s trapz={:.3e} integrator={:.3e} theta0={:.4e} thetaT={:.4e} grad0={:.3e} mean0={:.3e}",
        out.steps,
        t.elapsed().as_secs_f64(),
        audit.max,
        rec.integrator_residual(),
        r0.theta_l2sq,
        rl.theta_l2sq,
        r0.grad_h_theta_l2sq,
        r0.mean_grad_l2sq
    );
}
