use std::time::Instant;

use c2u_core::normalize::normalize;
use c2u_core::synth::{synthetic_ir, SynthSpec};
use c2u_core::view::generate_view;
use c2u_core::DiagramType;

fn main() {
    let ir = normalize(synthetic_ir(&SynthSpec::with_elements(5000), 42));
    for dt in DiagramType::ALL {
        let mut times: Vec<f64> = (0..100)
            .map(|_| {
                let t = Instant::now();
                generate_view(&ir, dt).unwrap();
                t.elapsed().as_secs_f64() * 1e3
            })
            .collect();
        times.sort_by(f64::total_cmp);
        println!("{:<15} median {:>7.2} ms  p90 {:>7.2} ms", dt.as_str(), times[50], times[90]);
    }
}
