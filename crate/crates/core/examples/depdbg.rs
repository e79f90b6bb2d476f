use rayflow::depletion::*;
use rayflow::evolution::InitialData;
use rayflow::profile::{build_profile, ProfileSpec};

fn main() {
    let p = build_profile(&ProfileSpec::builtin_jet(), 30.0).unwrap();
    let data = InitialData::gaussian(1.0, 30.0, 0.7, 0.25).unwrap();
    let grid = depletion_grid(&p, 60);
    println!("{} grid nodes", grid.len());
    let t0 = std::time::Instant::now();
    let dep = compute_omega_inf(&p, &data, &grid, &DepletionOptions::default()).unwrap();
    println!("computed in {:?}", t0.elapsed());
    let max = dep.omega_inf.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    println!("max|omega_inf| = {max:.4e}");
    for d in &dep.diagnostics {
        println!("layer y={}: abs_at={:.4e} (rel {:.3e}) exponent={:.3} r2={:.4}",
            d.y_extr, d.abs_at_extr, d.abs_at_extr / max, d.fit_exponent, d.fit_r2);
    }
    // profile near the layer
    for (i, &y) in dep.ygrid.iter().enumerate() {
        if (y - 1.0).abs() < 0.28 {
            println!("y={y:.4} |w_inf|={:.4e} |zeta_b|={:.4e}", dep.omega_inf[i].norm(), dep.zeta_b[i].norm());
        }
    }
}
