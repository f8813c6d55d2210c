//! Property tests over the tensor algebra and the flow-rule regularization.

use proptest::prelude::*;
use thermoplast::plastic::{phi, project_k, truncate, yosida, YieldSurface, YosidaParam};
use thermoplast::tensor::{deviator, inner, ElasticityTensor, SymTensor};

fn sym_tensor() -> impl Strategy<Value = SymTensor> {
    let c = -4.0..4.0f64;
    (c.clone(), c.clone(), c.clone(), c.clone(), c.clone(), c)
        .prop_map(|(a, b, cc, d, e, f)| SymTensor::new(a, b, cc, d, e, f))
}

proptest! {
    #[test]
    fn deviator_is_idempotent_and_orthogonal(t in sym_tensor()) {
        let d = deviator(&t);
        prop_assert!(d.trace().abs() <= 1e-14);
        prop_assert!(deviator(&d).sub(&d).norm() <= 1e-14);
        prop_assert!(inner(&d, &SymTensor::identity()).abs() <= 1e-13);
    }

    #[test]
    fn elasticity_operator_symmetric_positive(a in sym_tensor(), b in sym_tensor()) {
        let d = ElasticityTensor::new(0.9, 1.2).unwrap();
        let lhs = inner(&d.apply(&a), &b);
        let rhs = inner(&a, &d.apply(&b));
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        prop_assert!(inner(&d.apply(&a), &a) >= d.coercivity() * inner(&a, &a) - 1e-12);
        prop_assert!(d.apply_inv(&d.apply(&a)).sub(&a).norm() <= 1e-12);
    }

    #[test]
    fn yosida_resolvent_identity_holds(t in sym_tensor(), lambda in 0.01..2.0f64) {
        let ys = YieldSurface::new(1.0).unwrap();
        let yp = YosidaParam::new(lambda).unwrap();
        let y = yosida(&t, &ys, &yp);
        let alt = t.sub(&project_k(&t, &ys)).scale(1.0 / (2.0 * lambda));
        prop_assert!(y.sub(&alt).norm() <= 1e-11);
        prop_assert!(inner(&y, &t) >= -1e-12);
    }

    #[test]
    fn projection_lands_in_k_and_is_nonexpansive(a in sym_tensor(), b in sym_tensor()) {
        let ys = YieldSurface::new(0.8).unwrap();
        let pa = project_k(&a, &ys);
        prop_assert!(deviator(&pa).norm() <= ys.k() * (1.0 + 1e-12));
        prop_assert!(
            pa.sub(&project_k(&b, &ys)).norm() <= a.sub(&b).norm() + 1e-12
        );
    }

    #[test]
    fn truncation_and_antiderivative(r in -20.0..20.0f64, s in -20.0..20.0f64) {
        let k = 3.0;
        prop_assert!(truncate(r, k).abs() <= k);
        prop_assert!((truncate(r, k) - truncate(s, k)).abs() <= (r - s).abs() + 1e-15);
        if r >= s {
            prop_assert!(truncate(r, k) >= truncate(s, k));
        }
        prop_assert!((phi(r, k) - phi(-r, k)).abs() <= 1e-12);
        // convexity along random chords
        let mid = 0.5 * (r + s);
        prop_assert!(phi(mid, k) <= 0.5 * phi(r, k) + 0.5 * phi(s, k) + 1e-12);
    }
}
