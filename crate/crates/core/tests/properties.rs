use nalgebra::{Vector3, Vector6};
use proptest::prelude::*;
use se3_fiber::flow::{flow_endpoint, hamiltonian};
use se3_fiber::metric::log_norm;
use se3_fiber::se3::{exp_se3, log_se3};
use se3_fiber::sections::{fiber_element, project, section_sigma_rho};
use se3_fiber::{AlgebraVector, CosetPoint, MetricParams};

fn algebra() -> impl Strategy<Value = AlgebraVector> {
    (prop::array::uniform3(-2.0..2.0f64), prop::array::uniform3(-1.7..1.7f64)).prop_map(|(x, w)| {
        AlgebraVector::from_parts(Vector3::from(x), Vector3::from(w))
    })
}

fn coset() -> impl Strategy<Value = CosetPoint> {
    (prop::array::uniform3(-2.0..2.0f64), prop::array::uniform3(-1.0..1.0f64))
        .prop_filter("usable normal", |(_, n)| {
            let v = Vector3::from(*n);
            v.norm() > 0.2 && v.z / v.norm() > -0.9
        })
        .prop_map(|(x, n)| CosetPoint::new(Vector3::from(x), Vector3::from(n).normalize()).unwrap())
}

fn metric() -> impl Strategy<Value = MetricParams> {
    prop::array::uniform4(0.1..3.0f64).prop_map(|[a, b, c, d]| MetricParams::riemannian(a, b, c, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_inverts_exp(c in algebra()) {
        let back = log_se3(&exp_se3(&c)).unwrap();
        prop_assert!((back - c).norm() < 1e-10);
    }

    #[test]
    fn fiber_stays_in_coset(p in coset(), alpha in -3.1..3.1f64) {
        let q = project(&fiber_element(&p, alpha));
        prop_assert!((q.x - p.x).norm() < 1e-12);
        prop_assert!((q.n - p.n).norm() < 1e-12);
    }

    #[test]
    fn sigma_rho_is_no_worse_than_samples(p in coset(), m in metric(), alpha in -3.0..3.0f64) {
        let best = section_sigma_rho(&p, &m).unwrap();
        if let Ok(r) = log_norm(&fiber_element(&p, alpha), &m) {
            prop_assert!(best.value <= r + 1e-9);
        }
    }

    #[test]
    fn energy_is_conserved(l in prop::array::uniform6(-1.0..1.0f64), m in metric()) {
        let lam0 = Vector6::from(l);
        let end = flow_endpoint(&lam0, &m, 1.0, 1000).unwrap();
        let h0 = hamiltonian(&lam0, &m);
        prop_assert!((hamiltonian(&end.lam, &m) - h0).abs() <= 1e-8 * h0.max(1.0));
        prop_assert!((end.lam[5] - lam0[5]).abs() <= 1e-12);
    }
}
