use fraclab_core::catalog::CatalogEntry;
use fraclab_core::fracderiv::ftfc_compose;
use fraclab_core::function::SampledFunction1D;
use fraclab_core::grid::Grid1D;
use fraclab_core::quad::QuadratureSpec;
use fraclab_core::special::FracOrder;

fn main() {
    let grid = Grid1D::new(-4.0, 4.0, 33).unwrap();
    for name in ["bump", "gaussian"] {
        let f = SampledFunction1D::sample(&CatalogEntry::parse(name).unwrap(), &grid).unwrap();
        for a in [0.25, 0.5, 0.75] {
            let alpha = FracOrder::new(a).unwrap();
            let spec = QuadratureSpec::default();
            let t0 = std::time::Instant::now();
            let base = ftfc_compose(&f, &alpha, &spec).unwrap();
            let doubled = ftfc_compose(&f, &alpha, &spec.doubled()).unwrap();
            println!(
                "{name:8} alpha={a}: sup={:.3e} doubled={:.3e} ratio={:.2} ({} ms)",
                base.sup_distance,
                doubled.sup_distance,
                base.sup_distance / doubled.sup_distance,
                t0.elapsed().as_millis()
            );
        }
    }
}
