use switchlab::backlog::*;

fn main() {
    // Max zero-divergence gamma per scheme at f_weak = 0.7, Fig-13 params.
    for scheme in [Scheme::Naive, Scheme::Sliding, Scheme::DoubleWindow] {
        let mut max_zero = 0.0f64;
        let mut gamma = 1e-5;
        while gamma <= 0.2 {
            let mut p = SchedulerParams::standard(scheme, 0.7, gamma);
            p.n_gate = 10_000;
            let rep = divergence_report(&p, 200, 42);
            if rep.divergence_probability == 0.0 {
                max_zero = gamma;
            }
            gamma *= 10f64.powf(0.25);
        }
        println!("{scheme}: max zero-divergence gamma ~ {max_zero:.2e}");
    }
    let bound = theorem1_bounds(&SchedulerParams::standard(Scheme::DoubleWindow, 0.7, 0.0)).unwrap();
    println!("double-window theorem bound: {:.3e}", bound.gamma_bound_exact);
}
