use fraclab_core::catalog::CatalogEntry;
use fraclab_core::fracderiv::{FracIntegralEvaluator, LineFunction};
use fraclab_core::function::SampledFunction1D;
use fraclab_core::grid::Grid1D;
use fraclab_core::quad::QuadratureSpec;
use fraclab_core::special::FracOrder;

fn main() {
    let grid = Grid1D::new(-4.0, 4.0, 33).unwrap();
    let f = SampledFunction1D::sample(&CatalogEntry::parse("bump").unwrap(), &grid).unwrap();
    let alpha = FracOrder::new(0.5).unwrap();
    let spec = QuadratureSpec::default();
    let ev = FracIntegralEvaluator::new(&f, &alpha, &spec).unwrap();
    let d1 = ev.d1(2.0);
    println!("g'(2) = {d1:.10}");
    for exp in 3..=8 {
        let tau = 10f64.powi(-exp);
        let d = ev.diff_back(2.0, tau);
        println!(
            "tau=1e-{exp}: diff={:.8e}  -tau*g'={:.8e}  ratio={:.4}",
            d,
            -tau * d1,
            d / (-tau * d1)
        );
    }
}
