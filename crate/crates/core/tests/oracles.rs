use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use otlab_core::discrimination::{am_bound, srm_povm, srm_success_from_povm};
use otlab_core::metrics::{family_closed_form, metrics_for_overlaps, QUBIT_LINE_INTERCEPT};
use otlab_core::{
    build_states, failure_by_measurement, failure_probability, family_metrics, general_bounds,
    named_family, receiver_cheat, srm_success_symmetric, FamilyKind, NamedFamily, OverlapPair,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_pair(rng: &mut ChaCha8Rng) -> OverlapPair {
    let g: f64 = rng.random_range(-1.0..=1.0);
    let re = rng.random_range(-1.0..=1.0) * (1.0 + g) / 2.0;
    let im = rng.random_range(-1.0..=1.0) * (1.0 - g) / 2.0;
    OverlapPair::from_parts(re, im, g).unwrap()
}

#[test]
fn closed_forms_agree_with_explicit_measurements() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let ov = random_pair(&mut rng);
        let p_f = failure_probability(&ov);
        let (p0, p1) = failure_by_measurement(&ov);
        assert!((p_f - p0).abs() < 1e-9, "{ov:?}");
        assert!((p_f - p1).abs() < 1e-9, "{ov:?}");
        let fam = build_states(&ov);
        let direct = srm_success_from_povm(&fam, &srm_povm(&fam));
        assert!((receiver_cheat(&ov) - direct).abs() < 1e-9, "{ov:?}");
    }
}

#[test]
fn metrics_row_is_self_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    for _ in 0..300 {
        let m = metrics_for_overlaps(&random_pair(&mut rng));
        assert!((m.p_f - 0.5 * (m.p_f0 + m.p_f1)).abs() < 1e-9);
        assert!(m.p_r <= 1.0 - m.p_f + 1e-12);
        assert!((1..=4).contains(&m.span_dim));
        assert_eq!(m.p_s, 0.5);
    }
}

#[test]
fn reference_family_values() {
    let w = family_metrics(&NamedFamily::wiesner());
    assert!((w.p_f - (2.0 - SQRT_2) / 4.0).abs() < 1e-12);
    assert!((w.p_f0 - w.p_f).abs() < 1e-12 && (w.p_f1 - w.p_f).abs() < 1e-12);

    let t = family_metrics(&NamedFamily::new(FamilyKind::Qutrit, FRAC_1_SQRT_2).unwrap());
    assert!((t.p_r - 0.72855339).abs() < 1e-8);
    let q = family_metrics(&NamedFamily::new(FamilyKind::Qubit, FRAC_1_SQRT_2).unwrap());
    assert!((t.p_f - q.p_f).abs() < 1e-12);
}

#[test]
fn named_family_identities() {
    for i in 0..100 {
        let a = (i as f64 + 0.5) / 100.0;
        let (pf, pr) = family_closed_form(&NamedFamily::new(FamilyKind::Qubit, a).unwrap());
        assert!((pr + pf / SQRT_2 - QUBIT_LINE_INTERCEPT).abs() < 1e-10);
        let (pf, pr) = family_closed_form(&NamedFamily::new(FamilyKind::Ququart, a).unwrap());
        assert!(((1.0 - 2.0 * pf).powi(2) - pr * pr - (1.0 - pr).powi(2)).abs() < 1e-10);
    }
}

#[test]
fn qutrit_dominates_qubit() {
    for i in 0..=200 {
        let a = i as f64 / 200.0;
        let q = family_metrics(&NamedFamily::new(FamilyKind::Qubit, a).unwrap());
        let t = family_metrics(&NamedFamily::new(FamilyKind::Qutrit, a).unwrap());
        assert!(t.p_r >= q.p_r - 1e-15);
        assert!((t.p_f - q.p_f).abs() < 1e-12);
    }
}

#[test]
fn bound_suite_on_random_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    for _ in 0..1000 {
        let ov = random_pair(&mut rng);
        let fam = build_states(&ov);
        let p_f = failure_probability(&ov);
        let r = general_bounds(&fam, p_f).unwrap();
        assert!(r.p_r >= r.pbfg_lower - 1e-9);
        assert!(r.p_r >= r.pure_lower - 1e-9);
        assert!(p_f >= 0.5 * (1.0 - (1.0 - ov.g() * ov.g()).sqrt()) - 1e-9);
        assert!(r.p_r <= 1.0 - p_f + 1e-9);
        assert!(r.tradeoff_lhs >= r.tradeoff_rhs - 1e-9);
        let opt_err = 1.0 - srm_success_symmetric(fam.spectrum());
        assert!(am_bound(&fam, [0.25; 4]).unwrap() >= opt_err - 1e-9);
    }
}

#[test]
fn named_families_reject_out_of_range_parameters() {
    for kind in [FamilyKind::Qubit, FamilyKind::Ququart, FamilyKind::Qutrit] {
        assert!(NamedFamily::new(kind, 1.0 + 1e-9).is_err());
        assert!(NamedFamily::new(kind, -1e-9).is_err());
        assert!(NamedFamily::new(kind, f64::NAN).is_err());
    }
}

proptest! {
    #[test]
    fn closed_form_matches_generic_path(a in 0.0f64..=1.0) {
        for kind in [FamilyKind::Qubit, FamilyKind::Ququart, FamilyKind::Qutrit] {
            let nf = NamedFamily::new(kind, a).unwrap();
            let ov = named_family(&nf);
            let (pf, pr) = family_closed_form(&nf);
            prop_assert!((pf - failure_probability(&ov)).abs() < 1e-10);
            prop_assert!((pr - receiver_cheat(&ov)).abs() < 1e-10);
        }
    }
}
