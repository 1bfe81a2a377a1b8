//! Tabulates the double-slit transfer function and the spectrum weight.

use subfringe::{DoubleSlit, GaussianSpectrum};

fn main() {
    let slit = DoubleSlit::default();
    let spectrum = GaussianSpectrum::from_normalized(0.52, &slit).unwrap();
    let zero = std::f64::consts::PI / slit.separation();
    println!("first zero of T at q = pi/d = {zero:.1} rad/m");
    println!("{:>14} {:>14} {:>14}", "q (rad/m)", "T(q)", "S(q)");
    for i in 0..=20 {
        let q = i as f64 * 0.25 * zero;
        println!("{q:14.1} {:14.6e} {:14.6e}", slit.transfer(q), spectrum.density(q));
    }
}
