use gravinst::chart::Orientation;
use gravinst::identities::inequality_battery;
use gravinst::zoo::MetricFamily;

fn main() {
    for fam in [MetricFamily::Kerr { m: 1.0, a: 0.3 }, MetricFamily::TaubBolt { n: 1.0 }] {
        let mut spec = fam.instantiate().unwrap();
        // widen the sample box to include far field
        let mut b = spec.sample_box;
        b[1].1 = 60.0;
        spec = spec.with_sample_box(b);
        let mut worst: std::collections::HashMap<String, (f64, f64)> = Default::default();
        for p in gravinst::sampling::sample_points(&spec, 40, 31) {
            let reports = inequality_battery(&spec, &p, Orientation::Plus, [1.0, 0.0, 0.0]).unwrap();
            for r in reports {
                let e = worst.entry(r.name.clone()).or_insert((f64::NEG_INFINITY, 0.0));
                if -r.margin > e.0 {
                    *e = (-r.margin, r.scale);
                }
            }
        }
        println!("== {}", spec.name);
        let mut keys: Vec<_> = worst.keys().cloned().collect();
        keys.sort();
        for k in keys {
            let (v, s) = worst[&k];
            println!("  {k:32} worst violation {v:12.3e}  (scale {s:10.3e})");
        }
    }
}
