//! Libration points and a short orbit near L4, with Jacobi drift.

use torusforge::cr3bp::{integrate, jacobi_constant, libration_points, MassParameter, State6};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = MassParameter::new(0.01215)?;
    for p in libration_points(mu)? {
        println!("{:?}: position {:?}, C = {:.12}", p.label, p.position, p.jacobi);
    }

    let l4 = libration_points(mu)?[3];
    let start = State6::new([l4.position[0] + 0.01, l4.position[1], 0.0], [0.0, 0.005, 0.0]);
    let traj = integrate(&start, mu, 20.0, 1e-12)?;
    let (t, end) = traj.last().expect("nonempty");
    println!("t = {t}: {:?}", end.to_array());
    println!("C(0) = {:.14}", jacobi_constant(&start, mu)?);
    println!("max |dC| = {:.3e} over {} steps", traj.jacobi_drift(mu)?, traj.samples.len());
    Ok(())
}
