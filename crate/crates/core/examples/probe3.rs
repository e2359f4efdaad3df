// Truncation sensitivity of each observable between [4,4] and [5,5].
use pqed::entangle::LogBase;
use pqed::model::{default_emitter, table1_antenna};
use pqed::observables::{find_optimum, solve_pipeline};

fn main() {
    let antenna = table1_antenna("dl0").unwrap();
    let emitter = default_emitter(antenna.omega_midpoint(), 90.0, 1e8);
    let wopt = find_optimum(&antenna, &emitter, [4, 4], LogBase::Two)
        .unwrap()
        .omega_qe_opt;
    let rel = |a: f64, b: f64| {
        let m = a.abs().max(b.abs());
        if m < 1e-30 {
            0.0
        } else {
            (a - b).abs() / m
        }
    };
    let mut worst: Vec<(String, f64)> = Vec::new();
    for theta in [0.0_f64, 10.0, 30.0, 44.0, 45.0, 60.0, 90.0, 120.0, 135.0, 170.0] {
        let mut e = default_emitter(wopt, theta, 1e8);
        e.theta_deg = theta;
        let a = solve_pipeline(&antenna, &e, [4, 4], LogBase::Two).unwrap();
        let b = solve_pipeline(&antenna, &e, [5, 5], LogBase::Two).unwrap();
        let pairs = vec![
            ("e_n", a.e_n, b.e_n),
            ("p_bell", a.p_bell, b.p_bell),
            ("p_10", a.p_10, b.p_10),
            ("p_01", a.p_01, b.p_01),
            ("r", a.r_total, b.r_total),
            ("n1", a.n_mode[0], b.n_mode[0]),
            ("n2", a.n_mode[1], b.n_mode[1]),
            ("p0", a.p_total[0], b.p_total[0]),
            ("p1", a.p_total[1], b.p_total[1]),
            ("p2", a.p_total[2], b.p_total[2]),
            ("p_e", a.p_e, b.p_e),
            ("p_g", a.p_g, b.p_g),
        ];
        for (name, x, y) in pairs {
            let r = rel(x, y);
            match worst.iter_mut().find(|(n, _)| n == name) {
                Some((_, w)) => *w = w.max(r),
                None => worst.push((name.to_string(), r)),
            }
        }
    }
    for (name, w) in worst {
        println!("{name:8} worst rel change = {w:.3e}");
    }
}
