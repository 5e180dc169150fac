use gravinst::asymptotics::*;
use gravinst::chart::Orientation;
use gravinst::zoo::{FamilyConfig, MetricFamily};

fn main() {
    let fam = MetricFamily::Kerr { m: 1.0, a: 0.3 };
    let spec = fam.instantiate().unwrap();
    let radii = [20.0, 40.0, 80.0, 160.0];
    let t0 = std::time::Instant::now();
    let opts = FluxOptions { nodes: NodeCounts::default(), convergence_check: false };
    let rep = boundary_integrals(&spec, Orientation::Plus, [1.0, 0.0, 0.0], &radii, &opts).unwrap();
    println!("flux time {:?}", t0.elapsed());
    for row in &rep.rows {
        println!(
            "rho {:6.1}  vol_g {:12.6e}  wplus {:12.6e}  s_int {:12.6e}  omega_flux {:13.6e}",
            row.radius, row.vol_g, row.wplus_int, row.s_int, row.omega_flux
        );
    }
    println!("vol slope {:.3} ± {:.3}", rep.vol_fit.slope, rep.vol_fit.stderr);
    println!("wplus slope {:.3} ± {:.3}", rep.wplus_fit.slope, rep.wplus_fit.stderr);
    println!("s slope {:.3} ± {:.3}", rep.s_fit.slope, rep.s_fit.stderr);

    // falloff
    let t0 = std::time::Instant::now();
    let ladder: Vec<f64> = (0..8).map(|i| 20.0 * (8.0f64).powf(i as f64 / 7.0)).collect();
    for q in [FalloffQuantity::WPlus, FalloffQuantity::AlphaG, FalloffQuantity::AlphaH, FalloffQuantity::GradAlphaG] {
        let rep = falloff_fit(&spec, Orientation::Plus, q, &ladder, NodeCounts { polar: 12, azimuth: 2, fiber: 2 }, 0.25).unwrap();
        let fit = rep.fit.unwrap();
        println!("{:?} slope {:.4} ± {:.4} (r2 {:.6})", q, fit.slope, fit.stderr, fit.r_squared);
    }
    println!("falloff time {:?}", t0.elapsed());

    // killing asymptote on kerr + taub-bolt
    for fam in [MetricFamily::Kerr { m: 1.0, a: 0.3 }, MetricFamily::TaubBolt { n: 1.0 }] {
        let spec = fam.instantiate().unwrap();
        let alf = fam.alf_structure(&FamilyConfig::default()).unwrap();
        let t0 = std::time::Instant::now();
        let radii: Vec<f64> = (0..5).map(|i| 20.0 * 2.0f64.powf(i as f64)).collect();
        let rep = killing_asymptote(&spec, Orientation::Plus, &radii, NodeCounts { polar: 8, azimuth: 2, fiber: 2 }, &alf).unwrap();
        println!("{}: c = {:+.6e}, time {:?}", spec.name, rep.c, t0.elapsed());
        for (r, d) in rep.radii.iter().zip(&rep.deviation_sups) {
            println!("   rho {:6.1} sup|xi/c - T| = {:.6e}", r, d);
        }
        if let Some(f) = rep.fit {
            println!("   deviation slope {:.3} ± {:.3}", f.slope, f.stderr);
        }
        // annulus energy vs 3*flux at 40
        let energy = annulus_energy(&spec, Orientation::Plus, [1.0,0.0,0.0], 20.0, 40.0, 8, NodeCounts { polar: 8, azimuth: 2, fiber: 2 }).unwrap();
        println!("   annulus energy [20,40] = {:.3e}", energy);
    }
}
