//! Temporary probe: dispersive sup-kernel envelope timings.

use folddecay::dispersive::*;

#[test]
#[ignore]
fn sup_envelope_probe() {
    for sym in [symbol_cubic_fold(), symbol_parabola()] {
        let start = std::time::Instant::now();
        let mut products = vec![];
        for i in 0..9 {
            let t = 100.0 * 10f64.powf(i as f64 / 4.0);
            let s = std::time::Instant::now();
            let sup = kernel_sup(&sym, t, 16, 8).unwrap();
            let prod = (1.0 + t).powf(0.75) * sup;
            println!(
                "{} t={:9.1} sup={:.4e} (1+t)^0.75*sup={:.4} t*sup={:.4}  [{:.1?}]",
                sym.name,
                t,
                sup,
                prod,
                t * sup,
                s.elapsed()
            );
            products.push(prod);
        }
        let lo = products.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = products.iter().cloned().fold(0.0f64, f64::max);
        println!(
            "{}: band ratio {:.2} total {:.1?}",
            sym.name,
            hi / lo,
            start.elapsed()
        );
    }
}

#[test]
#[ignore]
fn scaling_probe() {
    for sym in [symbol_parabola(), symbol_cubic_fold()] {
        let mu = sym.homogeneity.unwrap();
        for n in [2.0f64, 4.0, 8.0] {
            let t = 0.8 / n.powf(mu);
            let s = std::time::Instant::now();
            let err = scaling_identity_check(&sym, n, t, [0.3, -0.2]).unwrap();
            println!("{} N={} t={:.4}: err={:.3e} [{:.1?}]", sym.name, n, t, err, s.elapsed());
        }
    }
}
