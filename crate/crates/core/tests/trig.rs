use qlab_core::jet::Jet;
use qlab_core::trig::*;
use qlab_core::jet::JetSpace;

#[test]
fn jet_agrees_with_closed_form_partials() {
    let p = TrigPoly::new(
        3,
        vec![
            TrigTerm { amplitude: 0.3, freq: vec![1, -2, 0], phase: 0.4 },
            TrigTerm { amplitude: -0.2, freq: vec![0, 1, 3], phase: 1.1 },
        ],
    );
    let x0 = [0.2, 1.3, -0.7];
    let s = JetSpace::new(3, 4);
    let j = p.jet(&Jet::coordinates(&s, 4, &x0));
    for e in [[0u8, 0, 0], [1, 0, 0], [0, 2, 1], [1, 1, 2], [0, 0, 4]] {
        assert!((j.partial(&e) - p.eval_partial(&x0, &e)).abs() < 1e-12);
    }
}
