//! Randomized invariants of the kinematics, spin and operator layers.

use nalgebra::{DMatrix, Matrix4, Vector3};
use proptest::prelude::*;
use relcurrent::lorentz::{wigner_rotation, FourVector, LorentzTransform, Rapidity, SpinorMap};
use relcurrent::operators::{
    candidate_j0_kernel, candidate_j_spatial_kernel, dirac_current_kernel, kernel_expectation,
    trace_excess_kernel, trace_kernel, CommutatorEngine,
};
use relcurrent::spin::{dirac_u, gamma, gordon_residual, slash, spin_matrices, wigner_d, Spin};
use relcurrent::wavepacket::{
    inner_product, rotate, translate, Amplitude, GaussianPacket, MomentumAmplitude,
};
use relcurrent::C64;

fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vector3<f64>> {
    vec3(1.0)
        .prop_filter("not too short", |v| v.norm() > 0.1)
        .prop_map(|v| v.normalize())
}

fn velocity() -> impl Strategy<Value = Vector3<f64>> {
    (unit(), 0.0..0.95f64).prop_map(|(n, b)| n * b)
}

fn spinor_map() -> impl Strategy<Value = SpinorMap> {
    (vec3(1.5), unit(), -6.0..6.0f64).prop_map(|(zeta, axis, angle)| {
        SpinorMap::from_rapidity(&Rapidity(zeta)) * SpinorMap::rotation(&axis, angle)
    })
}

fn rotation() -> impl Strategy<Value = SpinorMap> {
    (unit(), -6.0..6.0f64).prop_map(|(axis, angle)| SpinorMap::rotation(&axis, angle))
}

fn spin() -> impl Strategy<Value = Spin> {
    (0u32..=4).prop_map(Spin::from_twice)
}

fn packet(spin: Spin) -> impl Strategy<Value = GaussianPacket> {
    let d = spin.dim();
    (
        vec3(0.3),
        (0.4..0.6f64, 0.4..0.6f64, 0.4..0.6f64),
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d),
        vec3(0.8),
    )
        .prop_filter_map("nonzero weights", move |(c, (a, b, e), w, x0)| {
            let weights: Vec<C64> = w.iter().map(|(re, im)| C64::new(*re, *im)).collect();
            if weights.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-2 {
                return None;
            }
            GaussianPacket::new(spin, c, Vector3::new(a, b, e), &weights, x0).ok()
        })
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_abs4(m: &Matrix4<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn boosts_preserve_the_minkowski_square(beta in velocity(), p in vec3(3.0), e in 0.0..5.0f64) {
        let lambda = LorentzTransform::boost_from_velocity(&beta).unwrap();
        let v = FourVector::new(e, p.x, p.y, p.z);
        let moved = lambda.apply(&v);
        prop_assert!((moved.square() - v.square()).abs() <= 1e-12 * (1.0 + v.0.norm_squared() * 20.0));
        prop_assert!(lambda.metric_defect() < 1e-12 * 100.0);
        prop_assert!(lambda.is_proper_orthochronous());
    }

    #[test]
    fn rapidity_velocity_is_subluminal(zeta in vec3(8.0)) {
        prop_assert!(Rapidity(zeta).velocity().norm() < 1.0);
    }

    #[test]
    fn covering_map_is_a_homomorphism(a in spinor_map(), b in spinor_map()) {
        prop_assert!((a.determinant() - C64::from(1.0)).norm() < 1e-12);
        let la = a.covering_to_lorentz().unwrap();
        let lb = b.covering_to_lorentz().unwrap();
        let lab = (a * b).covering_to_lorentz().unwrap();
        let scale = la.0.abs().max() * lb.0.abs().max();
        prop_assert!(((la * lb).0 - lab.0).abs().max() < 1e-12 * scale.max(1.0) * 10.0);
    }

    #[test]
    fn wigner_rotations_compose(a1 in spinor_map(), a2 in spinor_map(), p in vec3(2.0)) {
        let p = FourVector::on_shell(p);
        let w1 = wigner_rotation(&a1, &p);
        let w2 = wigner_rotation(&a2, &a1.apply(&p));
        let w = wigner_rotation(&(a2 * a1), &p);
        prop_assert!((w2 * w1).distance(&w) < 1e-10);
        prop_assert!(w.unitarity_defect() < 1e-10);
        prop_assert!((w.determinant() - C64::from(1.0)).norm() < 1e-10);
    }

    #[test]
    fn collinear_boosts_have_no_wigner_rotation(n in unit(), zeta in -2.0..2.0f64, r in -2.0..2.0f64) {
        let a = SpinorMap::from_rapidity(&Rapidity(n * zeta));
        let w = wigner_rotation(&a, &FourVector::on_shell(n * r));
        prop_assert!(w.distance(&SpinorMap::identity()) < 1e-10);
    }

    #[test]
    fn wigner_d_is_a_unitary_representation(s in spin(), r1 in rotation(), r2 in rotation()) {
        let d1 = wigner_d(s, &r1).unwrap();
        let d2 = wigner_d(s, &r2).unwrap();
        let d12 = wigner_d(s, &(r1 * r2)).unwrap();
        let id = DMatrix::<C64>::identity(s.dim(), s.dim());
        prop_assert!(max_abs(&(&d1 * &d2 - d12)) < 1e-10);
        prop_assert!(max_abs(&(d1.adjoint() * &d1 - id)) < 1e-10);
    }

    #[test]
    fn dirac_spinor_identities(pa in vec3(1.15), pb in vec3(1.15), ma in 0usize..2, mb in 0usize..2, mu in 0usize..4) {
        let (fa, fb) = (FourVector::on_shell(pa), FourVector::on_shell(pb));
        let (ua, ub) = (dirac_u(&fa, ma), dirac_u(&fb, mb));
        let id = Matrix4::<C64>::identity();
        prop_assert!(((slash(&fa) - id) * ua.0).norm() < 1e-10);
        let delta = if ma == mb { 1.0 } else { 0.0 };
        prop_assert!((ua.sandwich(&id, &dirac_u(&fa, mb)) - C64::from(delta)).norm() < 1e-10);
        prop_assert!(gordon_residual(&fa, ma, &fb, mb, mu).norm() < 1e-10);
        let q = fa.0 - fb.0;
        let mut div = C64::from(0.0);
        for nu in 0..4 {
            let lowered = if nu == 0 { q[0] } else { -q[nu] };
            div += ua.sandwich(&gamma(nu), &ub) * lowered;
        }
        prop_assert!(div.norm() < 1e-10);
    }

    #[test]
    fn spin_matrices_satisfy_the_algebra(s in spin()) {
        let rep = spin_matrices(s);
        let j = &rep.j;
        let i = C64::new(0.0, 1.0);
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let comm = &j[a] * &j[b] - &j[b] * &j[a];
            prop_assert!(max_abs(&(comm - &j[c] * i)) < 1e-12);
        }
        let casimir = &j[0] * &j[0] + &j[1] * &j[1] + &j[2] * &j[2];
        let expected = DMatrix::<C64>::identity(s.dim(), s.dim()) * C64::from(s.value() * (s.value() + 1.0));
        prop_assert!(max_abs(&(casimir - expected)) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_are_hermitian(s in 0u32..=3, pa in vec3(2.0), pb in vec3(2.0), x in vec3(1.0), axis in 0usize..3) {
        let s = Spin::from_twice(s);
        let x = FourVector::new(0.3, x.x, x.y, x.z);
        let mut kernels = vec![
            candidate_j0_kernel(s),
            candidate_j_spatial_kernel(s, axis),
            trace_kernel(s),
        ];
        if s == Spin::HALF {
            kernels.push(dirac_current_kernel(&x, axis + 1));
        }
        for k in kernels {
            prop_assert!(k.hermiticity_defect(&pa, &pb) < 1e-12);
            prop_assert!(k.factorization_defect(&pa, &pb).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rotations_compose_pointwise(s in spin(), r1 in rotation(), r2 in rotation(), p in vec3(1.5)) {
        let weights: Vec<C64> = (0..s.dim()).map(|k| C64::new(1.0, 0.3 * k as f64)).collect();
        let psi: Amplitude = GaussianPacket::new(
            s,
            Vector3::new(0.2, -0.1, 0.3),
            Vector3::new(0.4, 0.5, 0.6),
            &weights,
            Vector3::new(0.5, 0.0, -0.2),
        )
        .unwrap()
        .into_amplitude();
        let twice = rotate(&rotate(&psi, &r1).unwrap(), &r2).unwrap();
        let once = rotate(&psi, &(r2 * r1)).unwrap();
        let diff = (twice.eval(&p) - once.eval(&p)).norm();
        prop_assert!(diff < 1e-8);
    }

    #[test]
    fn gamma_matrices_anticommute(mu in 0usize..4, nu in 0usize..4) {
        let g = |m: usize, n: usize| if m != n { 0.0 } else if m == 0 { 1.0 } else { -1.0 };
        let anti = gamma(mu) * gamma(nu) + gamma(nu) * gamma(mu);
        prop_assert!(max_abs4(&(anti - Matrix4::identity() * C64::from(2.0 * g(mu, nu)))) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn packets_are_normalized(p in (0u32..=3).prop_flat_map(|s| packet(Spin::from_twice(s)))) {
        let rule = p.quadrature(24).unwrap();
        let n = inner_product(&p, &p, &rule).unwrap().re;
        prop_assert!((n - 1.0).abs() < 1e-8, "{n}");
    }

    #[test]
    fn translations_preserve_inner_products(
        a in packet(Spin::HALF),
        b in packet(Spin::HALF),
        shift in vec3(2.0),
        t in -2.0..2.0f64,
    ) {
        let rule = a.quadrature(24).unwrap();
        let reference = inner_product(&a, &b, &rule).unwrap();
        let shift = FourVector::new(t, shift.x, shift.y, shift.z);
        let ta = translate(&a.into_amplitude(), &shift);
        let tb = translate(&b.into_amplitude(), &shift);
        let moved = inner_product(ta.as_ref(), tb.as_ref(), &rule).unwrap();
        prop_assert!((moved - reference).norm() < 1e-6);
    }

    /// The engine's trace of `i[K_i, J_i]` equals the full trace kernel, and a rotated packet
    /// on the rotated rule gives the same value.
    #[test]
    fn trace_of_commutators_is_rotation_invariant(
        p in (0u32..=2).prop_flat_map(|s| packet(Spin::from_twice(s))),
        r in rotation(),
    ) {
        let s = p.spin();
        let rule = p.quadrature(32).unwrap();
        let moved_rule = rule.transported(&r.covering_to_lorentz().unwrap());
        let psi = p.into_amplitude();
        let rotated = rotate(&psi, &r).unwrap();
        let trace = |amp: &Amplitude, rule| {
            let engine = CommutatorEngine::new(amp.as_ref(), rule, false).unwrap();
            (0..3)
                .map(|i| engine.commutator(i, &candidate_j_spatial_kernel(s, i)).unwrap())
                .sum::<f64>()
        };
        let (before, after) = (trace(&psi, &rule), trace(&rotated, &moved_rule));
        prop_assert!((before - after).abs() < 1e-6 * before.abs(), "{before} vs {after}");
        let full = kernel_expectation(&trace_kernel(s), psi.as_ref(), &rule).unwrap().re;
        prop_assert!((before - full).abs() < 1e-6 * full.abs(), "{before} vs {full}");
    }

    #[test]
    fn deficit_is_negative_for_spread_packets(
        p in (0u32..=3).prop_flat_map(|s| packet(Spin::from_twice(s))),
    ) {
        let rule = p.quadrature(24).unwrap();
        let deficit = kernel_expectation(&trace_excess_kernel(p.spin()), &p, &rule).unwrap().re;
        prop_assert!(deficit < 0.0, "{deficit}");
    }
}
