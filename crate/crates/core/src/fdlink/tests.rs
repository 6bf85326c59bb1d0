use super::*;
use crate::beamforming::{ca_project, Constraint};
use crate::channel::{sparse_channel, ChannelKind};
use crate::geometry::SteeringAngle;
use crate::seed::trial_seed;
use crate::{CMatrix, C64};
use proptest::prelude::*;

fn scalar(g: f64) -> ChannelMatrix {
    ChannelMatrix::raw(
        CMatrix::from_element(1, 1, C64::new(g, 0.0)),
        ChannelKind::Communication,
    )
}

fn scalar_link(budget: LinkBudget) -> FdLink {
    FdLink::new(scalar(1.0), scalar(1.0), scalar(1.0), scalar(1.0), budget).unwrap()
}

fn one() -> Awv {
    Awv::unconstrained(crate::CVector::from_element(1, C64::new(1.0, 0.0))).unwrap()
}

fn ones() -> BeamformerSet {
    BeamformerSet {
        f1: one(),
        w1: one(),
        f2: one(),
        w2: one(),
    }
}

#[test]
fn scalar_link_without_si() {
    let budget = LinkBudget::new(10.0, f64::NEG_INFINITY).unwrap();
    let m = link_metrics(&scalar_link(budget), &ones()).unwrap();
    assert!((m.sinr1 - 10.0).abs() < 1e-12 && (m.sinr2 - 10.0).abs() < 1e-12);
    assert!((m.asr - 2.0 * 11f64.log2()).abs() < 1e-12);
    let ub = upper_bound(&scalar_link(budget));
    assert!((ub.asr - 2.0 * 11f64.log2()).abs() < 1e-12);
}

#[test]
fn orthogonal_receiver_gets_nothing() {
    let budget = LinkBudget::new(10.0, 25.0).unwrap();
    let h = ChannelMatrix::raw(
        CMatrix::from_row_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
        ChannelKind::Communication,
    );
    let link = FdLink::new(h.clone(), h.clone(), h.clone(), h, budget).unwrap();
    let w = Awv::unconstrained(crate::CVector::from_vec(vec![
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
    ]))
    .unwrap();
    let bf = BeamformerSet {
        f1: one(),
        w1: w.clone(),
        f2: one(),
        w2: w,
    };
    let m = link_metrics(&link, &bf).unwrap();
    assert_eq!(m.sinr1, 0.0);
    assert_eq!(m.asr, 0.0);
}

#[test]
fn metrics_reject_bad_awvs() {
    let budget = LinkBudget::new(0.0, 0.0).unwrap();
    let link = scalar_link(budget);
    let mut bf = ones();
    bf.f1 = Awv::unconstrained(crate::CVector::from_element(2, C64::new(1.0, 0.0))).unwrap();
    assert!(matches!(
        link_metrics(&link, &bf),
        Err(Error::DimensionMismatch { .. })
    ));
    let mut bf = ones();
    bf.w2 = ca_project(&crate::CVector::from_element(1, C64::new(0.0, 0.0))).rotated(0.0);
    assert!(link_metrics(&link, &bf).is_ok());
}

#[test]
fn budget_validation() {
    assert!(LinkBudget::new(f64::NAN, 0.0).is_err());
    assert!(LinkBudget::new(0.0, f64::INFINITY).is_err());
    assert!(LinkBudget::new(0.0, f64::NAN).is_err());
    let b = LinkBudget::new(20.0, f64::NEG_INFINITY).unwrap();
    assert_eq!(b.si_power(), 0.0);
    let b = LinkBudget::new(20.0, 25.0).unwrap();
    assert!((b.si_power() / b.signal_power() - 10f64.powf(2.5)).abs() < 1e-9);
}

#[test]
fn link_dimension_checks() {
    let b = LinkBudget::new(0.0, 0.0).unwrap();
    let wide = ChannelMatrix::raw(CMatrix::zeros(1, 2), ChannelKind::LosSi);
    assert!(FdLink::new(scalar(1.0), scalar(1.0), wide, scalar(1.0), b).is_err());
}

#[test]
fn rank_one_upper_bound() {
    let p = crate::channel::PathComponent {
        coeff: C64::new(0.3, -0.8),
        aod: SteeringAngle::new(0.1).unwrap(),
        aoa: SteeringAngle::new(-0.7).unwrap(),
    };
    let h = sparse_channel(16, 8, &[p]).unwrap();
    let budget = LinkBudget::new(5.0, 25.0).unwrap();
    let link = FdLink::new(h.clone(), h.clone(), h.zeroed(), h.zeroed(), budget).unwrap();
    let ub = upper_bound(&link);
    assert!((ub.sinr1 - budget.signal_power() * 128.0).abs() < 1e-9 * ub.sinr1);
}

#[test]
fn build_link_shapes_and_determinism() {
    let b = LinkBudget::new(10.0, 25.0).unwrap();
    let cfg = LinkConfig::fig4_left();
    let a = build_link(&cfg, b, 9).unwrap();
    assert_eq!(a, build_link(&cfg, b, 9).unwrap());
    assert_ne!(a, build_link(&cfg, b, 10).unwrap());
    assert_eq!((a.h12().n_rx(), a.h12().n_tx()), (8, 16));
    assert_eq!((a.hsi1().n_rx(), a.hsi1().n_tx()), (8, 16));
    assert_eq!(a.paths12().len(), 4);
    let c = LinkConfig::fig4_right(0.3);
    let l = build_link(&c, b, 1).unwrap();
    assert_eq!(
        (l.h21().n_rx(), l.h21().n_tx(), l.hsi2().n_rx()),
        (16, 16, 16)
    );
    let mut bad = cfg;
    bad.n_paths = 0;
    assert!(build_link(&bad, b, 1).is_err());
}

#[test]
fn build_link_with_nlos_si() {
    let mut cfg = LinkConfig::fig4_left();
    cfg.nlos_epsilon = 0.01;
    let b = LinkBudget::new(10.0, 25.0).unwrap();
    let l = build_link(&cfg, b, 3).unwrap();
    assert_eq!(l.hsi1().kind(), ChannelKind::CompositeSi);
    assert_ne!(
        l.hsi1(),
        build_link(&LinkConfig::fig4_left(), b, 3).unwrap().hsi1()
    );
}

#[test]
fn upper_bound_dominates_every_scheme() {
    let b = LinkBudget::new(10.0, 25.0).unwrap();
    let cfg = LinkConfig::fig4_left();
    for t in 0..1000 {
        let link = build_link(&cfg, b, trial_seed(5, t)).unwrap();
        let ub = upper_bound(&link).asr;
        for s in [Scheme::BeamSteering, Scheme::ZfMfCa, Scheme::ZfMfNoCa] {
            let m = evaluate(&link, s, cfg.search).unwrap().asr;
            assert!(m <= ub + 1e-9, "trial {t} {s}: {m} > {ub}");
        }
        if t < 50 {
            assert!(
                evaluate(&link, Scheme::AngleSearch, cfg.search)
                    .unwrap()
                    .asr
                    <= ub + 1e-9
            );
        }
    }
}

#[test]
fn upper_bound_ignores_si_level() {
    let cfg = LinkConfig::fig4_left();
    let link = build_link(&cfg, LinkBudget::new(10.0, 25.0).unwrap(), 2).unwrap();
    let other = link.with_budget(LinkBudget::new(10.0, -10.0).unwrap());
    assert_eq!(upper_bound(&link), upper_bound(&other));
}

#[test]
fn si_monotonicity() {
    let cfg = LinkConfig::fig4_left();
    let link = build_link(&cfg, LinkBudget::new(10.0, 0.0).unwrap(), 6).unwrap();
    let bf = crate::beamforming::beam_steering(&link).unwrap();
    let mut last = f64::INFINITY;
    for si in [-10.0, 0.0, 10.0, 25.0, 40.0] {
        let asr = link_metrics(&link.with_budget(LinkBudget::new(10.0, si).unwrap()), &bf)
            .unwrap()
            .asr;
        assert!(asr < last);
        last = asr;
    }
}

#[test]
fn scheme_names_round_trip() {
    for s in Scheme::ALL {
        assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
    }
    assert!(matches!(
        "nope".parse::<Scheme>(),
        Err(Error::UnknownScheme(_))
    ));
}

#[test]
fn sweep_snr_properties() {
    let cfg = LinkConfig::fig4_left();
    let snrs = [-10.0, 0.0, 10.0, 20.0];
    let ub = sweep_snr(&cfg, Scheme::UpperBound, &snrs, 1, 42).unwrap();
    let means: Vec<f64> = ub.rows.iter().map(|r| r.mean_asr).collect();
    assert!(means.windows(2).all(|w| w[0] <= w[1]));
    assert!(ub.rows.iter().all(|r| r.std_asr == 0.0 && r.trials == 1));
    let zf = sweep_snr(&cfg, Scheme::ZfMfNoCa, &snrs, 20, 42).unwrap();
    let ub = sweep_snr(&cfg, Scheme::UpperBound, &snrs, 20, 42).unwrap();
    for (a, b) in zf.rows.iter().zip(&ub.rows) {
        assert!(a.mean_asr <= b.mean_asr);
    }
    assert!(sweep_snr(&cfg, Scheme::UpperBound, &snrs, 0, 42).is_err());
}

#[test]
fn sweep_omega_consistency_and_periodicity() {
    let cfg = LinkConfig::fig4_right(0.0);
    let w = 0.7;
    let om = sweep_omega(
        &cfg,
        Scheme::ZfMfCa,
        &[w, w + std::f64::consts::TAU],
        10.0,
        6,
        3,
    )
    .unwrap();
    assert!((om.rows[0].mean_asr - om.rows[1].mean_asr).abs() < 1e-9);
    let sn = sweep_snr(&cfg.with_omega(w).unwrap(), Scheme::ZfMfCa, &[10.0], 6, 3).unwrap();
    assert_eq!(om.rows[0].samples, sn.rows[0].samples);
}

#[test]
fn sweeps_are_thread_count_independent() {
    let cfg = LinkConfig::fig4_left();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sweep_snr_schemes(&cfg, &Scheme::ALL, &[0.0, 10.0], 8, 17).unwrap())
    };
    let a = run(1).to_csv(&[]);
    let b = run(4).to_csv(&[]);
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn asr_is_sum_of_direction_rates_and_phase_invariant(seed in 0u64..1000, phi in -3.0f64..3.0) {
        let cfg = LinkConfig::fig4_left();
        let link = build_link(&cfg, LinkBudget::new(10.0, 25.0).unwrap(), seed).unwrap();
        let bf = crate::beamforming::zf_mf(&link, true).unwrap();
        let m = link_metrics(&link, &bf).unwrap();
        let r1 = (1.0 + direction_sinr(link.budget(), &bf.w1, link.h21(), &bf.f2, link.hsi1(), &bf.f1)).log2();
        let r2 = (1.0 + direction_sinr(link.budget(), &bf.w2, link.h12(), &bf.f1, link.hsi2(), &bf.f2)).log2();
        prop_assert!((m.asr - (r1 + r2)).abs() < 1e-12);
        let rot = BeamformerSet { f1: bf.f1.rotated(phi), w1: bf.w1.rotated(-phi), f2: bf.f2.rotated(2.0 * phi), w2: bf.w2.rotated(0.5) };
        let m2 = link_metrics(&link, &rot).unwrap();
        prop_assert!((m.asr - m2.asr).abs() < 1e-9 * m.asr.max(1.0));
        prop_assert!(matches!(bf.f1.constraint(), Constraint::ConstantAmplitude));
    }
}
