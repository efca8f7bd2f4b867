// SPDX-License-Identifier: MIT OR Apache-2.0

// Performance probe: worst-case acceptance instances.
use cpfit_core::backend::{self, Backend, SolveOptions};
use cpfit_core::bounds;
use cpfit_core::formulations::{build_model, AssignmentKind, ContinuityMode, FitSpec, Loss};
use cpfit_core::synth::{generate_univariate, SynthConfig};

fn main() {
    let exe = std::env::args().nth(1).expect("solver path");
    let backend = Backend::reference(exe);
    for (len, k, sigma) in [(15usize, 2usize, 0.5), (20, 3, 0.5), (25, 4, 0.5), (25, 4, 2.0)] {
        let cfg = SynthConfig { segments: k, len, noise_sigma: sigma, seed: 11, ..Default::default() };
        let (series, _) = generate_univariate(&cfg);
        let space = bounds::parameter_space(&series);
        let bigm = bounds::big_m_values(&series, &space);
        for loss in [Loss::L1, Loss::L2] {
            for assignment in [AssignmentKind::Basic, AssignmentKind::Alternate, AssignmentKind::Extended] {
                let spec = FitSpec::new(k, loss, ContinuityMode::None, assignment);
                let (model, _) = build_model(&series, &spec, &space, &bigm).unwrap();
                let t0 = std::time::Instant::now();
                let sol = backend::solve(&model, &SolveOptions::default(), &backend).unwrap();
                println!(
                    "T={len} K={k} sigma={sigma} {loss} {assignment}: {:?} obj={:.4} wall={:.2}s",
                    sol.status, sol.objective, t0.elapsed().as_secs_f64()
                );
            }
        }
    }
    // Continuity probe: alternate-linear continuity at acceptance scale.
    for (len, k) in [(15usize, 2usize), (20, 3)] {
        let cfg = SynthConfig { segments: k, len, noise_sigma: 0.5, seed: 11, ..Default::default() };
        let (series, _) = generate_univariate(&cfg);
        let space = bounds::parameter_space(&series);
        let bigm = bounds::big_m_values(&series, &space);
        for assignment in [AssignmentKind::Alternate, AssignmentKind::Extended] {
            let spec = FitSpec::new(k, Loss::L1, ContinuityMode::AlternateLinear, assignment);
            let (model, _) = build_model(&series, &spec, &space, &bigm).unwrap();
            let t0 = std::time::Instant::now();
            let sol = backend::solve(&model, &SolveOptions::default(), &backend).unwrap();
            println!(
                "continuity T={len} K={k} l1 {assignment}: {:?} obj={:.4} wall={:.2}s",
                sol.status, sol.objective, t0.elapsed().as_secs_f64()
            );
        }
    }
}
