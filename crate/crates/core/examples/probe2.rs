// Second-stage probe: criterion-level numbers at the golden-section optimum.
use pqed::entangle::LogBase;
use pqed::model::{default_emitter, table1};
use pqed::observables::{antenna_for_dipole, find_optimum, solve_pipeline};
use pqed::qspace::SpaceDescriptor;
use pqed::steady::{build_liouvillian, evolve_rk4, solve_steady};
use pqed::{build_collapse_channels, build_hamiltonian};
use std::time::Instant;

fn main() {
    let antennas = table1();
    let tp = 2.0 * std::f64::consts::PI * 1e12;

    println!("== golden-section optima per antenna (theta=90, P=1 GHz) ==");
    let mut opt = Vec::new();
    for a in &antennas {
        let emitter = default_emitter(a.omega_midpoint(), 90.0, 1e9);
        let t0 = Instant::now();
        let rep = find_optimum(a, &emitter, [4, 4], LogBase::Two).unwrap();
        let w1 = a.modes[0].omega;
        let w2 = a.modes[1].omega;
        let t = (rep.omega_qe_opt - w1) / (w2 - w1);
        let mut e = emitter;
        e.omega_qe = rep.omega_qe_opt;
        let row = solve_pipeline(a, &e, [4, 4], LogBase::Two).unwrap();
        println!(
            "{:6}: opt/2pi={:7.2} THz (t={:+.4})  E_N={:.6}  r={:.4e}  [{:?}]",
            a.label,
            rep.omega_qe_opt / tp,
            t,
            rep.e_n_max,
            row.r_total,
            t0.elapsed()
        );
        opt.push((a.label.clone(), rep.omega_qe_opt, row.r_total));
    }
    let rmax = opt.iter().map(|x| x.2).fold(0.0, f64::max);
    for (l, _, r) in &opt {
        println!("   {l}: {:.1}% below max", 100.0 * (1.0 - r / rmax));
    }

    // criterion 5: 181-point theta grid at dl0 golden optimum, P=0.1 GHz
    println!("\n== theta grid at dl0 optimum ==");
    let dl0 = &antennas[0];
    let wopt = opt[0].1;
    let mut rows = Vec::new();
    for i in 0..=180 {
        let theta = i as f64;
        let e = default_emitter(wopt, theta, 1e8);
        let row = solve_pipeline(dl0, &e, [4, 4], LogBase::Two).unwrap();
        rows.push((theta, row));
    }
    let lower_max = rows
        .iter()
        .filter(|(t, _)| *t <= 45.0)
        .max_by(|a, b| a.1.e_n.total_cmp(&b.1.e_n))
        .unwrap();
    let mid_max = rows
        .iter()
        .filter(|(t, _)| *t > 45.0 && *t < 135.0)
        .max_by(|a, b| a.1.e_n.total_cmp(&b.1.e_n))
        .unwrap();
    println!(
        "max in [0,45]: theta={} E_N={:.8}; max in (45,135): theta={} E_N={:.8}",
        lower_max.0, lower_max.1.e_n, mid_max.0, mid_max.1.e_n
    );
    let at = |t: f64| rows.iter().find(|(x, _)| *x == t).unwrap();
    println!(
        "E_N(45)={:.2e}  E_N(135)={:.2e}  p01(45)={:.6}  p_bell(45)={:.9}  p_bell(90)={:.6}",
        at(45.0).1.e_n,
        at(135.0).1.e_n,
        at(45.0).1.p_01,
        at(45.0).1.p_bell,
        at(90.0).1.p_bell
    );

    // criterion 8: monotone legs from opt to each band edge (41 points)
    println!("\n== legs from opt to band edges (dl0) ==");
    for (edge_name, edge) in [("w1", dl0.modes[0].omega), ("w2", dl0.modes[1].omega)] {
        let mut vals = Vec::new();
        for i in 0..41 {
            let w = wopt + (edge - wopt) * i as f64 / 40.0;
            let e = default_emitter(w, 90.0, 1e8);
            let row = solve_pipeline(dl0, &e, [4, 4], LogBase::Two).unwrap();
            vals.push(row.e_n);
        }
        let mut worst: f64 = 0.0;
        for w in vals.windows(2) {
            worst = worst.max(w[1] - w[0]);
        }
        println!(
            "{edge_name}: start {:.6} end {:.6} worst_uptick {:+.3e}",
            vals[0],
            vals[40],
            worst
        );
    }
    // P-robustness at opt
    let mut ens = Vec::new();
    for p in [1e7, 3.16e7, 1e8, 3.16e8, 1e9, 3.16e9, 1e10] {
        let e = default_emitter(wopt, 90.0, p);
        ens.push(solve_pipeline(dl0, &e, [4, 4], LogBase::Two).unwrap().e_n);
    }
    let emin = ens.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let emax = ens.iter().fold(0.0f64, |a, &b| a.max(b));
    println!("E_N over P: spread = {:.4}% of mean", 200.0 * (emax - emin) / (emax + emin));

    // criterion 9: slopes at the dl0 golden optimum
    println!("\n== r(d) decade slopes at dl0 optimum, P=1 GHz, theta=90 ==");
    let dgrid: Vec<f64> = (0..=24)
        .map(|i| 1e-30 * (3e-28f64 / 1e-30).powf(i as f64 / 24.0))
        .collect();
    let mut pts = Vec::new();
    for &d in &dgrid {
        let a = antenna_for_dipole(dl0, d);
        let mut e = default_emitter(wopt, 90.0, 1e9);
        e.dipole_d = d;
        let row = solve_pipeline(&a, &e, [4, 4], LogBase::Two).unwrap();
        pts.push((d, row.r_total, row.e_n));
    }
    let slope = |lo: f64, hi: f64| -> f64 {
        let sel: Vec<&(f64, f64, f64)> = pts
            .iter()
            .filter(|(d, _, _)| *d >= lo * 0.999 && *d <= hi * 1.001)
            .collect();
        let n = sel.len() as f64;
        let sx: f64 = sel.iter().map(|p| p.0.ln()).sum();
        let sy: f64 = sel.iter().map(|p| p.1.ln()).sum();
        let sxx: f64 = sel.iter().map(|p| p.0.ln().powi(2)).sum();
        let sxy: f64 = sel.iter().map(|p| p.0.ln() * p.1.ln()).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    println!("lowest decade LS slope: {:.4}", slope(1e-30, 1e-29));
    println!("top decade LS slope:    {:.4}", slope(3e-29, 3e-28));
    let en_min = pts.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let en_max = pts.iter().map(|p| p.2).fold(0.0f64, f64::max);
    println!("E_N spread over d: {:.4}%", 200.0 * (en_max - en_min) / (en_max + en_min));

    // criterion 2: RK4 oracle timing + agreement at one orientation
    println!("\n== RK4 oracle vs steady (dl0, P=1 GHz, theta=90) ==");
    let space = SpaceDescriptor::new([4, 4]).unwrap();
    let e = default_emitter(wopt, 90.0, 1e9);
    let h = build_hamiltonian(&space, dl0, &e).unwrap();
    let ch = build_collapse_channels(&space, dl0, &e).unwrap();
    let l = build_liouvillian(&h, &ch).unwrap();
    let steady = solve_steady(&l).unwrap();
    let min_rate = ch.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let t_final = 50.0 / min_rate;
    let dt = 0.02 / l.max_rate();
    println!("t_final={:.3e}s dt={:.3e}s steps~{:.2e}", t_final, dt, t_final / dt);
    let vac = {
        use ndarray::Array2;
        use num_complex::Complex64;
        let ddim = space.dim();
        let mut m = Array2::zeros((ddim, ddim));
        m[(0, 0)] = Complex64::ONE;
        pqed::qspace::DensityMatrix::new(
            pqed::qspace::Operator::new(m, pqed::qspace::Space::Full(space)).unwrap(),
        )
        .unwrap()
    };
    let t0 = Instant::now();
    let evolved = evolve_rk4(&h, &ch, &vac, t_final, dt).unwrap();
    let elapsed = t0.elapsed();
    let diff = (evolved.entries() - steady.rho.entries())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    println!("RK4 run: {:?}; max |rk4 - steady| = {:.3e}", elapsed, diff);
}
