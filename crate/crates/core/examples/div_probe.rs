use gravinst::chart::Orientation;
use gravinst::jet::Jet;
use gravinst::tensor::*;
use gravinst::wu::rescaled_jets;
use gravinst::zoo::MetricFamily;

fn main() {
    let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
    let p = [0.1, 4.0, 1.2, 0.6];
    let rj = rescaled_jets(&spec, &p, 3, Orientation::Plus).unwrap();
    let sg = &rj.stack_g;
    let f = rj.alpha_h.powf(-1.0 / 3.0);
    let wp = sg.weyl_half_tensor(1.0);

    // all-lower route with various f powers
    for k in [-1.0f64, 0.0, 1.0, 2.0] {
        let phi = rj.alpha_h.powf(-k / 3.0); // f^k
        let a = JetTensor::from_fn(vec![Variance::Down; 4], |i| {
            &phi * &wp[i[0]][i[1]][i[2]][i[3]]
        });
        let grad = cov_deriv(&a, &sg.gamma);
        let ginv = sg.ginv_value();
        let mut norm2 = 0.0;
        let frame = sg.frame_value();
        let div = JetTensor::from_fn(vec![Variance::Down; 3], |i| {
            let mut s = 0.0;
            for e in 0..4 {
                for a0 in 0..4 {
                    s -= ginv[e][a0] * grad.get(&[e, a0, i[0], i[1], i[2]]).value();
                }
            }
            Jet::constant(s, 0)
        });
        norm2 = norm_sq_value(&div, &frame);
        let scale = norm_sq_value(&grad, &frame).sqrt();
        println!("all-lower f^{k}: |div| = {:.6e}  (scale {:.3e})", norm2.sqrt(), scale);
    }

    // mixed-index route: V^a_{bcd} = g^{ae} W_{ebcd}, divergence on first (up) index
    let wp_mixed = j4(|a, b, c, d| sum1(|e| &sg.ginv[a][e] * &wp[e][b][c][d]));
    for k in [0.0f64, 1.0, 2.0, 3.0] {
        let phi = rj.alpha_h.powf(-k / 3.0);
        let a = JetTensor::from_fn(vec![Variance::Up, Variance::Down, Variance::Down, Variance::Down].to_vec(), |i| {
            &phi * &wp_mixed[i[0]][i[1]][i[2]][i[3]]
        });
        let grad = cov_deriv(&a, &sg.gamma);
        let frame = sg.frame_value();
        let div = JetTensor::from_fn(vec![Variance::Down; 3], |i| {
            let mut s = 0.0;
            for a0 in 0..4 {
                s -= grad.get(&[a0, a0, i[0], i[1], i[2]]).value();
            }
            Jet::constant(s, 0)
        });
        let norm = norm_sq_value(&div, &frame).sqrt();
        println!("mixed f^{k}: |div| = {:.6e}", norm);
    }
    let _ = f;
}
