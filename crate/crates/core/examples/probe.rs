use tor_core::bvp::*;
use tor_core::normalize::*;
fn main() {
    for (speed, alpha) in [(3.0, 0.25 * std::f64::consts::PI), (2.0, 1.9), (5.0, 1.0)] {
        let p = CanonicalProblem::new(speed, alpha).unwrap();
        let (d, _) = dualize(&p).unwrap();
        let a = *solve(&p, &SolverConfig::default()).unwrap().planar().unwrap();
        println!("dual residual at primal (mu,sigma): {:?}", residuals(a.mu, a.sigma, &d).unwrap());
        println!("primal residual at primal: {:?}", residuals(a.mu, a.sigma, &p).unwrap());
    }
}
