use magyari::direct::*;
use magyari::model::{ParityChannel, QuasiExactModel, WkbTail};
use magyari::system::build_system;
fn main() {
    let f0: f64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let model = QuasiExactModel::new(WkbTail::new(vec![f0, 1.0]).unwrap(), 9, ParityChannel::even());
    let closed = solve_sextic(f0, 9, ParityChannel::even()).unwrap().solutions;
    let rep = solve_newton(&build_system(&model), &NewtonOptions::with_starts(256, 0));
    for s in &rep.solutions { println!("{:.12} res {:.1e} sing {} maxh {:.2e} h0 {:.6e}", s.plet.values()[0], s.residual_norm, s.singular_jacobian, s.wave.coeffs().iter().fold(0.0f64,|a,h|a.max(h.abs())), s.wave.coeffs()[0]); }
    println!("closed {:?}", closed.iter().map(|s| s.plet.values()[0]).collect::<Vec<_>>());
}
