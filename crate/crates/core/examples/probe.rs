// Scratch physics probe used during development.
use pqed::entangle::{bell_overlap, far_field_transform, log_negativity, project_out_vacuum, LogBase};
use pqed::model::{build_collapse_channels, build_hamiltonian, default_emitter, table1};
use pqed::qspace::{partial_trace_emitter, SpaceDescriptor};
use pqed::steady::{build_liouvillian, emission_rate, photon_statistics, solve_steady};
use std::time::Instant;

fn en_at(
    antenna: &pqed::model::AntennaModel,
    omega_qe: f64,
    theta: f64,
    pump: f64,
    levels: usize,
) -> (f64, f64, f64, f64) {
    let space = SpaceDescriptor::new([levels, levels]).unwrap();
    let emitter = default_emitter(omega_qe, theta, pump);
    let h = build_hamiltonian(&space, antenna, &emitter).unwrap();
    let ch = build_collapse_channels(&space, antenna, &emitter).unwrap();
    let l = build_liouvillian(&h, &ch).unwrap();
    let res = solve_steady(&l).unwrap();
    let r = emission_rate(&res, antenna).unwrap();
    let ph = partial_trace_emitter(&res.rho).unwrap();
    let proj = project_out_vacuum(&ph).unwrap();
    let eta = [antenna.modes[0].efficiency(), antenna.modes[1].efficiency()];
    let ff = far_field_transform(&proj, eta).unwrap();
    let en = log_negativity(&ff, LogBase::Two);
    let b = bell_overlap(&ff);
    (en, r.total, b.p_bell, b.p_01)
}

fn main() {
    let antennas = table1();
    let dl0 = &antennas[0];
    let w1 = dl0.modes[0].omega;
    let w2 = dl0.modes[1].omega;
    let wspan = w2 - w1;

    println!("== timing: one [4,4] solve ==");
    let t0 = Instant::now();
    let _ = en_at(dl0, 0.5 * (w1 + w2), 90.0, 1e9, 4);
    println!("solve [4,4]: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let _ = en_at(dl0, 0.5 * (w1 + w2), 90.0, 1e9, 5);
    println!("solve [5,5]: {:?}", t0.elapsed());

    println!("\n== E_N vs omega_qe at theta=90, P=0.1 GHz, dl0 ==");
    let gmax = dl0.gamma_max();
    for i in 0..=24 {
        let t = -2.2 + 5.4 * i as f64 / 24.0;
        let w = w1 + t * wspan;
        if w < w1 - gmax || w > w2 + gmax {
            continue;
        }
        let (en, r, pb, _) = en_at(dl0, w, 90.0, 1e8, 4);
        println!("t={t:+.3}  w/2pi={:7.2} THz  E_N={en:.6}  r={r:.4e}  p_bell={pb:.6}", w / (2.0 * std::f64::consts::PI * 1e12));
    }

    println!("\n== statistics at midpoint, theta=90, P=1 GHz ==");
    {
        let space = SpaceDescriptor::new([4, 4]).unwrap();
        let emitter = default_emitter(0.5 * (w1 + w2), 90.0, 1e9);
        let h = build_hamiltonian(&space, dl0, &emitter).unwrap();
        let ch = build_collapse_channels(&space, dl0, &emitter).unwrap();
        let l = build_liouvillian(&h, &ch).unwrap();
        let res = solve_steady(&l).unwrap();
        let stats = photon_statistics(&res).unwrap();
        println!("n = {:?}", stats.n_mean);
        println!("p = {:?}", &stats.p_total[..4]);
        println!(
            "log10 p2/p1 = {:.2}",
            (stats.p_total[2] / stats.p_total[1]).log10()
        );
        println!("p_e = {:.4}  residual = {:.3e}", res.observables["p_e"], res.residual);
    }

    println!("\n== E_N(theta) at P=0.1 GHz, dl0, omega at balance-scan ==");
    // First find optimum over the wide bracket by scan.
    let mut best = (0.0, 0.0);
    for i in 0..=120 {
        let w = (w1 - gmax) + (wspan + 2.0 * gmax) * i as f64 / 120.0;
        let (en, _, _, _) = en_at(dl0, w, 90.0, 1e8, 4);
        if en > best.0 {
            best = (en, w);
        }
    }
    println!(
        "scan argmax: w/2pi = {:.2} THz (t = {:.3}), E_N = {:.6}",
        best.1 / (2.0 * std::f64::consts::PI * 1e12),
        (best.1 - w1) / wspan,
        best.0
    );
    let wopt = best.1;
    for theta in [0.0, 10.0, 45.0, 80.0, 85.0, 89.0, 90.0, 91.0, 95.0, 135.0] {
        let (en, r, pb, p01) = en_at(dl0, wopt, theta, 1e8, 4);
        println!("theta={theta:5.1}  E_N={en:.8}  r={r:.4e}  p_bell={pb:.6}  p_01={p01:.6}");
    }

    println!("\n== six antennas at omega_opt (scan), P=1 GHz, theta=90 ==");
    let mut rates = Vec::new();
    for a in &antennas {
        let aw1 = a.modes[0].omega;
        let aw2 = a.modes[1].omega;
        let agmax = a.gamma_max();
        let mut abest = (0.0, 0.0);
        for i in 0..=100 {
            let w = (aw1 - agmax) + (aw2 - aw1 + 2.0 * agmax) * i as f64 / 100.0;
            let (en, _, _, _) = en_at(a, w, 90.0, 1e9, 4);
            if en > abest.0 {
                abest = (en, w);
            }
        }
        let (en, r, _, _) = en_at(a, abest.1, 90.0, 1e9, 4);
        println!(
            "{}: omega_opt t={:+.3}, E_N={:.5}, r={:.4e}",
            a.label,
            (abest.1 - aw1) / (aw2 - aw1),
            en,
            r
        );
        rates.push((a.label.clone(), r));
    }
    let max_r = rates.iter().map(|x| x.1).fold(0.0, f64::max);
    for (l, r) in &rates {
        println!("  {l}: r = {r:.4e}  ({:.1}% below max)", 100.0 * (1.0 - r / max_r));
    }

    println!("\n== r(d) slopes at P=1 GHz, theta=90, dl0, omega_opt ==");
    let mut pts = Vec::new();
    for i in 0..=24 {
        let d = 1e-30 * (3e-28f64 / 1e-30).powf(i as f64 / 24.0);
        let space = SpaceDescriptor::new([4, 4]).unwrap();
        let mut emitter = default_emitter(wopt, 90.0, 1e9);
        emitter.dipole_d = d;
        // kappa scales with d
        let mut a = dl0.clone();
        let scale = d / 6e-29;
        a.modes[0].kappa_max *= scale;
        a.modes[1].kappa_max *= scale;
        let h = build_hamiltonian(&space, &a, &emitter).unwrap();
        let ch = build_collapse_channels(&space, &a, &emitter).unwrap();
        let l = build_liouvillian(&h, &ch).unwrap();
        let res = solve_steady(&l).unwrap();
        let r = emission_rate(&res, &a).unwrap();
        pts.push((d, r.total));
    }
    for w in pts.windows(2) {
        let slope = (w[1].1.ln() - w[0].1.ln()) / (w[1].0.ln() - w[0].0.ln());
        println!("d={:.3e}  r={:.4e}  local slope={:.3}", w[0].0, w[0].1, slope);
    }
}
