use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use limtomo::filters::{make_window, FilterKind, FilterSpec, WindowProfile};
use limtomo::geometry::{AngularSet, Covector, DataCovector, Direction, VecN};
use limtomo::microlocal::*;
use limtomo::phantoms::{analytic_wavefront, analytic_wavefront_aligned, Phantom, Primitive, WeightField};
use limtomo::transform::{Cutoff, Grid};
use limtomo::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::pixels(2.0 / 128.0)
}

fn cv(x: VecN, xi: VecN) -> Covector {
    Covector::new(x, xi).unwrap()
}

fn sampling() -> Sampling {
    Sampling::for_grid(&Grid::centered(2, 128, 1.5).unwrap())
}

fn disk_wf(a: &AngularSet) -> WavefrontSet {
    let dirs = a.boundary_directions(16);
    let wf = analytic_wavefront_aligned(&Phantom::disk(1.0), 128, &dirs).unwrap();
    WavefrontSet::new(wf.covectors(), tol())
}

fn square() -> Phantom {
    Phantom::new(
        2,
        vec![Primitive::polygon(
            vec![VecN::xy(-0.5, -0.5), VecN::xy(0.5, -0.5), VecN::xy(0.5, 0.5), VecN::xy(-0.5, 0.5)],
            1.0,
        )
        .unwrap()],
    )
    .unwrap()
}

#[test]
fn compose_c_examples() {
    let wf = WavefrontSet::new(vec![cv(VecN::xy(0.0, 0.0), VecN::xy(1.0, 0.0))], tol());
    let d = compose_c(&wf).unwrap();
    assert_eq!(d.len(), 2);
    let (l0, l1) = (d.samples[0], d.samples[1]);
    assert_eq!(l0.omega.vector(), VecN::xy(1.0, 0.0));
    assert_eq!((l0.s, l0.alpha()), (0.0, 1.0));
    assert_eq!(l0.z().unwrap().norm(), 0.0);
    assert_eq!(l1.omega.vector(), VecN::xy(-1.0, 0.0));
    assert_eq!(l1.alpha(), -1.0);
    assert_eq!(l1.s.abs(), 0.0);

    let wf = WavefrontSet::new(vec![cv(VecN::xy(0.0, 1.0), VecN::xy(1.0, 0.0))], tol());
    let l0 = compose_c(&wf).unwrap().samples[0];
    assert!((l0.dphi() - -1.0).abs() < 1e-15);
}

#[test]
fn compose_ct_examples() {
    let w = Direction::from_angle(FRAC_PI_2);
    let d = DataCovector::from_alpha_z(w, 2.0, 1.0, w.perp() * 3.0).unwrap();
    let back = compose_ct(&DataWavefrontSet::new(vec![d], tol()));
    let x = back.wf.samples[0].x;
    assert!(x.distance(&VecN::xy(-3.0, 2.0)) < 1e-12, "{x:?}");
    let again = compose_c(&back.wf).unwrap().samples[0];
    assert!((again.s - 2.0).abs() < 1e-12 && (again.dphi() - d.dphi()).abs() < 1e-12);

    let pure = DataCovector::pure_domega(w, 0.3, w.perp()).unwrap();
    let out = compose_ct(&DataWavefrontSet::new(vec![pure, d], tol()));
    assert_eq!((out.wf.len(), out.dropped), (1, 1));
}

#[test]
fn compose_c_rejects_zero_codirection() {
    let mut c = cv(VecN::xy(0.0, 0.0), VecN::xy(1.0, 0.0));
    c.magnitude = 0.0;
    assert!(matches!(compose_c(&WavefrontSet::new(vec![c], tol())), Err(Error::ZeroCovector)));
}

#[test]
fn wf_chi_examples() {
    let s = sampling();
    let a = AngularSet::arcs(&[(0.5, 2.0)]).unwrap();
    let chi = wf_chi_axr(&a, &s, tol()).unwrap();
    assert_eq!(chi.len(), 2 * 2 * s.s_samples.len());
    for d in chi.iter() {
        assert_eq!(d.eta_s, 0.0);
        let phi = d.omega.angle().unwrap();
        assert!((phi - 0.5).abs() < 1e-12 || (phi - 2.0).abs() < 1e-12);
        assert!((d.dphi().abs() - 1.0).abs() < 1e-12);
    }
    assert!(wf_chi_axr(&AngularSet::full(2), &s, tol()).unwrap().is_empty());

    let caps = AngularSet::caps(&[(VecN::xyz(0.0, 0.0, 1.0), 0.5), (VecN::xyz(0.0, 0.6f64.sin(), 0.6f64.cos()), 0.5)]).unwrap();
    let s3 = Sampling::for_grid(&Grid::centered(3, 16, 1.0).unwrap());
    let chi = wf_chi_axr(&caps, &s3, tol()).unwrap();
    assert!(chi.iter().any(|d| d.full_fiber));
    assert!(chi.iter().any(|d| !d.full_fiber));
}

#[test]
fn product_q_examples() {
    let s = sampling();
    let a = AngularSet::arcs(&[(FRAC_PI_4, 3.0 * FRAC_PI_4)]).unwrap();
    let w = compose_c(&disk_wf(&a)).unwrap();
    let full = product_q(&AngularSet::full(2), &w, &s).unwrap();
    assert_eq!(full.samples, w.samples);
    let empty = DataWavefrontSet::new(vec![], tol());
    assert_eq!(product_q(&a, &empty, &s).unwrap().samples, wf_chi_axr(&a, &s, tol()).unwrap().samples);

    // A single covector at ω = θ(a) with x = θ(a): the third part consists of
    // (ω, 1, α[−(π_ω(x) + t y) dω + ds]) and composes back onto the tangent line.
    let c = cv(Direction::from_angle(FRAC_PI_4).vector(), Direction::from_angle(FRAC_PI_4).vector());
    let w1 = compose_c(&WavefrontSet::new(vec![c], tol())).unwrap();
    let q = product_q(&a, &w1, &s).unwrap();
    let third: Vec<_> = q.iter().filter(|d| d.eta_s != 0.0 && d.z().unwrap().norm() > 1e-9).collect();
    assert!(!third.is_empty());
    for d in &third {
        assert!((d.s - 1.0).abs() < 1e-12 && d.alpha() == 1.0);
        let x = compose_ct(&DataWavefrontSet::new(vec![**d], tol())).wf.samples[0].x;
        assert!((x.dot(&c.omega.vector()) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn non_cancellation_violation_is_reported() {
    let a = AngularSet::arcs(&[(0.5, 2.0)]).unwrap();
    let w = Direction::from_angle(0.5);
    let bad = DataCovector::pure_domega(w, 0.0, -w.perp()).unwrap();
    let r = product_q(&a, &DataWavefrontSet::new(vec![bad], tol()), &sampling());
    assert!(matches!(r, Err(Error::NonCancellation(_))));
}

#[test]
fn visible_set_examples() {
    let full = AngularSet::full(2);
    let wf = disk_wf(&AngularSet::arcs(&[(FRAC_PI_4, 3.0 * FRAC_PI_4)]).unwrap());
    assert_eq!(visible_set(&wf, &full, false), wf);

    let a = AngularSet::arcs(&[(FRAC_PI_4, 3.0 * FRAC_PI_4)]).unwrap();
    let vis = visible_set(&wf, &a, false);
    assert!(!vis.is_empty() && vis.len() < wf.len());
    for c in vis.iter() {
        let normal = Direction::new(c.x).unwrap().angle().unwrap();
        let inside = |lo: f64, hi: f64| normal >= lo - 1e-9 && normal <= hi + 1e-9;
        assert!(inside(FRAC_PI_4, 3.0 * FRAC_PI_4) || inside(PI + FRAC_PI_4, PI + 3.0 * FRAC_PI_4));
    }
    let both_signs = vis.iter().filter(|c| c.omega.vector().dot(&c.x) < 0.0).count();
    assert_eq!(2 * both_signs, vis.len());

    let edge = cv(VecN::xy(0.0, 0.0), Direction::from_angle(FRAC_PI_4).vector());
    let set = WavefrontSet::new(vec![edge], tol());
    assert_eq!(visible_set(&set, &a, false).len(), 1);
    assert!(visible_set(&set, &a, true).is_empty());
}

#[test]
fn disk_has_four_tangent_artifact_lines() {
    let (lo, hi) = (0.4, 1.9);
    let a = AngularSet::arcs(&[(lo, hi)]).unwrap();
    let lines = predict_artifacts(&disk_wf(&a), &a, &sampling()).unwrap();
    assert_eq!(lines.len(), 4);
    for l in &lines {
        let phi = l.boundary_direction.angle().unwrap();
        assert!((phi - lo).abs() < 1e-12 || (phi - hi).abs() < 1e-12);
        assert!((l.offset().abs() - 1.0).abs() < 1e-12, "tangent line at distance 1");
        assert_eq!(l.alphas.len(), 2);
        assert!(l.spread.dot(&l.boundary_direction.vector()).abs() < 1e-15);
        assert!(!l.points.is_empty());
    }
}

#[test]
fn no_boundary_covector_means_no_artifacts() {
    let a = AngularSet::arcs(&[(0.4, 1.9)]).unwrap();
    let c = cv(VecN::xy(0.2, 0.1), Direction::from_angle(1.0).vector());
    assert!(predict_artifacts(&WavefrontSet::new(vec![c], tol()), &a, &sampling()).unwrap().is_empty());
}

#[test]
fn square_corner_generates_perpendicular_line() {
    let a = AngularSet::arcs(&[(FRAC_PI_4, 3.0 * FRAC_PI_4)]).unwrap();
    let dirs = a.boundary_directions(16);
    let wf = analytic_wavefront_aligned(&square(), 64, &dirs).unwrap();
    let lines = predict_artifacts(&WavefrontSet::new(wf.covectors(), tol()), &a, &sampling()).unwrap();
    let corner = VecN::xy(0.5, 0.5);
    let hit = lines.iter().find(|l| l.generator.x.distance(&corner) < 1e-12).expect("line through the corner");
    assert!(hit.spread.dot(&Direction::from_angle(FRAC_PI_4).vector()).abs() < 1e-12);
}

#[test]
fn artifact_points_are_coplanar() {
    let a = AngularSet::arcs(&[(0.3, 2.2), (3.5, 4.0)]).unwrap();
    let p = Phantom::new(
        2,
        vec![
            Primitive::ellipse(VecN::xy(0.1, -0.2), VecN::xy(0.5, 0.3), 0.4, 1.0).unwrap(),
            Primitive::polygon(vec![VecN::xy(-0.6, 0.1), VecN::xy(-0.2, 0.2), VecN::xy(-0.4, 0.6)], 0.5).unwrap(),
        ],
    )
    .unwrap();
    let wf = analytic_wavefront_aligned(&p, 64, &a.boundary_directions(16)).unwrap();
    let lines = predict_artifacts(&WavefrontSet::new(wf.covectors(), tol()), &a, &sampling()).unwrap();
    assert!(lines.len() >= 8);
    for l in &lines {
        let w = l.boundary_direction.vector();
        for p in &l.points {
            assert!((p.dot(&w) - l.generator.x.dot(&w)).abs() < 1e-10);
        }
    }
}

fn check_oracle(phantom: &Phantom, a: &AngularSet, s: &Sampling) -> Characterization {
    let wf = analytic_wavefront_aligned(phantom, 96, &a.boundary_directions(s.rim_samples)).unwrap();
    let set = WavefrontSet::new(wf.covectors(), Tolerance::pixels(s.t_step));
    characterization_upper_bound(&set, a, s).unwrap()
}

#[test]
fn characterization_examples() {
    let s = sampling();
    let full = check_oracle(&Phantom::disk(1.0), &AngularSet::full(2), &s);
    assert!(full.artifacts.is_empty());
    assert_eq!(full.upper_bound.len(), analytic_wavefront(&Phantom::disk(1.0), 96).unwrap().len());

    let a = AngularSet::arcs(&[(FRAC_PI_4, 3.0 * FRAC_PI_4)]).unwrap();
    let c = check_oracle(&Phantom::disk(1.0), &a, &s);
    assert_eq!(c.artifacts.len(), 4);
    assert!(c.dropped > 0);
    assert_eq!(c.upper_bound.len(), c.visible.len() + artifact_set(&c.artifacts, c.visible.tol).len());

    check_oracle(&square(), &a, &s);
    let s3 = Sampling { rim_samples: 24, ..Sampling::for_grid(&Grid::centered(3, 20, 1.0).unwrap()) };
    let ball = Phantom::new(3, vec![Primitive::disk(VecN::xyz(0.0, 0.0, 0.0), 0.6, 1.0).unwrap()]).unwrap();
    let caps = AngularSet::caps(&[(VecN::xyz(0.0, 0.0, 1.0), 0.5), (VecN::xyz(0.0, 0.6f64.sin(), 0.6f64.cos()), 0.5)]).unwrap();
    let c3 = check_oracle(&ball, &caps, &s3);
    assert!(c3.artifacts.iter().any(|l| l.full_hyperplane));
}

#[test]
fn oracle_detects_a_tampered_bound() {
    let s = sampling();
    let a = AngularSet::arcs(&[(FRAC_PI_4, 3.0 * FRAC_PI_4)]).unwrap();
    let wf = disk_wf(&a);
    let mut c = characterization_upper_bound(&wf, &a, &s).unwrap();
    c.upper_bound.samples.truncate(c.upper_bound.len() / 2);
    assert!(!c.upper_bound.compare(&c.oracle).is_equal());
}

#[test]
fn symbol_examples() {
    let one = WeightField::one();
    let x = VecN::xy(0.3, -0.2);
    for k in [1.0, 7.5, 40.0] {
        let xi = Direction::from_angle(0.7).vector() * k;
        let lam = symbol_l_phi(&x, &xi, &one, &one, &FilterSpec::lambda(2), &Cutoff::None).unwrap();
        assert!((lam - Complex64::new(k, 0.0)).norm() < 1e-12 * k);
        let fbp = symbol_l_phi(&x, &xi, &one, &one, &FilterSpec::fbp(2), &Cutoff::None).unwrap();
        assert!((fbp - 1.0).norm() < 1e-12);
        let zero = symbol_l_phi(&x, &xi, &one, &one, &FilterSpec::neg_i_derivative(2), &Cutoff::None).unwrap();
        assert!(zero.norm() < 1e-12);
    }
    assert!(matches!(
        symbol_l_phi(&x, &VecN::xy(0.0, 0.0), &one, &one, &FilterSpec::fbp(2), &Cutoff::None),
        Err(Error::ZeroCovector)
    ));

    // ν = 1/μ: the weight drops out.
    let mu = WeightField::exponential(0.8);
    let nu = WeightField::reciprocal(mu.clone());
    let a = AngularSet::arcs(&[(0.2, 2.0)]).unwrap();
    let w = Cutoff::Smooth(make_window(&a, 0.3, WindowProfile::Bump, false).unwrap());
    for phi in [0.1, 0.9, 1.7, 3.0, 4.4] {
        let xi = Direction::from_angle(phi).vector() * 5.0;
        let p = FilterSpec::lambda(2);
        let with = symbol_l_phi(&x, &xi, &mu, &nu, &p, &w).unwrap();
        let without = symbol_l_phi(&x, &xi, &one, &one, &p, &w).unwrap();
        assert!((with - without).norm() < 1e-12 * (1.0 + without.norm()));
    }
}

#[test]
fn three_dimensional_symbol_normalisation() {
    let one = WeightField::one();
    let xi = VecN::xyz(1.0, 2.0, -2.0);
    let fbp = symbol_l_phi(&VecN::xyz(0.1, 0.0, 0.0), &xi, &one, &one, &FilterSpec::fbp(3), &Cutoff::None).unwrap();
    assert!((fbp - 1.0).norm() < 1e-12);
}

#[test]
fn ellipticity_examples() {
    let one = WeightField::one();
    let opts = EllipticityOptions::default();
    let a = AngularSet::arcs(&[(0.3, 0.3 + 2.5)]).unwrap();
    let r = check_ellipticity(&one, &one, &FilterSpec::derivative(2), &a, &Cutoff::Hard(a.clone()), &opts).unwrap();
    assert!(r.elliptic && r.condition == Condition::NonSymmetric && r.witness.is_none(), "{r:?}");

    for p in [FilterSpec::fbp(2), FilterSpec::lambda(2)] {
        for set in [AngularSet::full(2), a.clone(), AngularSet::arcs(&[(0.0, 4.0)]).unwrap()] {
            let r = check_ellipticity(&one, &one, &p, &set, &Cutoff::None, &opts).unwrap();
            assert!(r.elliptic && r.condition == Condition::SameSign && r.margin > 0.1, "{r:?}");
        }
    }

    let full = AngularSet::full(2);
    let r = check_ellipticity(&one, &one, &FilterSpec::neg_i_derivative(2), &full, &Cutoff::None, &opts).unwrap();
    assert!(!r.elliptic && r.condition == Condition::None);
    assert!(r.p_nonvanishing);
    assert!(r.witness.unwrap().value.norm() < 1e-12);

    let bad = WeightField::Polynomial { c0: -1.0, linear: vec![0.0, 0.0], quadratic: 0.0, modulation: 0.0 };
    assert!(matches!(
        check_ellipticity(&bad, &one, &FilterSpec::fbp(2), &full, &Cutoff::None, &opts),
        Err(Error::NonPositiveWeight { .. })
    ));

    let vanishing = FilterSpec::custom(2, "alpha*s", 1.0, true, |_, s, a| Complex64::new(a * s, 0.0));
    let r = check_ellipticity(&one, &one, &vanishing, &a, &Cutoff::None, &opts).unwrap();
    assert!(!r.p_nonvanishing && !r.elliptic && r.witness.is_some());
    assert!(matches!(vanishing.kind(), FilterKind::Custom { .. }));
}

proptest! {
    #[test]
    fn compose_round_trip(
        pts in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, 0.0..TAU, 0.1..50.0f64), 1..40)
    ) {
        let samples: Vec<Covector> = pts
            .iter()
            .map(|&(x, y, phi, m)| Covector::from_direction(VecN::xy(x, y), Direction::from_angle(phi), m).unwrap())
            .collect();
        let wf = WavefrontSet::new(samples.clone(), tol());
        let data = compose_c(&wf).unwrap();
        let back = compose_ct(&data);
        prop_assert_eq!(back.dropped, 0);
        prop_assert_eq!(back.wf.len(), 2 * samples.len());
        for (k, c) in back.wf.iter().enumerate() {
            let orig = samples[k / 2];
            prop_assert!(c.x.distance(&orig.x) < 1e-12 * (1.0 + orig.x.norm()));
            prop_assert!(c.omega.vector().distance(&orig.omega.vector()) < 1e-15);
            prop_assert!((c.magnitude - orig.magnitude).abs() < 1e-12 * orig.magnitude);
        }
        // Antipodal pairing: λ₁ is the antipode of λ₀.
        for pair in data.samples.chunks(2) {
            prop_assert_eq!(pair[0].antipodal(), pair[1]);
        }
    }

    #[test]
    fn compose_round_trip_3d(x in prop::array::uniform3(-2.0..2.0f64), xi in prop::array::uniform3(-5.0..5.0f64)) {
        prop_assume!(VecN::xyz(xi[0], xi[1], xi[2]).norm() > 1e-3);
        let c = cv(VecN::xyz(x[0], x[1], x[2]), VecN::xyz(xi[0], xi[1], xi[2]));
        let back = compose_ct(&compose_c(&WavefrontSet::new(vec![c], tol())).unwrap());
        for b in back.wf.iter() {
            prop_assert!(b.x.distance(&c.x) < 1e-12 * (1.0 + c.x.norm()));
            prop_assert!(b.xi().distance(&c.xi()) < 1e-12 * c.magnitude);
        }
    }

    #[test]
    fn zero_operator_symbol(x in -2.0..2.0f64, y in -2.0..2.0f64, phi in 0.0..TAU, m in 0.1..100.0f64, tau in 0.05..0.5f64) {
        let one = WeightField::one();
        let a = AngularSet::arcs(&[(0.3, 1.7), (0.3 + PI, 1.7 + PI)]).unwrap();
        let even = Cutoff::Smooth(make_window(&a, tau, WindowProfile::RaisedCosine, true).unwrap());
        let xi = Direction::from_angle(phi).vector() * m;
        for w in [Cutoff::None, even] {
            let v = symbol_l_phi(&VecN::xy(x, y), &xi, &one, &one, &FilterSpec::neg_i_derivative(2), &w).unwrap();
            prop_assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn symbol_vanishes_off_the_window_support(phi in 0.0..TAU, x in -1.0..1.0f64) {
        let a = AngularSet::arcs(&[(0.4, 1.4)]).unwrap();
        let w = Cutoff::Smooth(make_window(&a, 0.2, WindowProfile::Bump, false).unwrap());
        let d = Direction::from_angle(phi);
        prop_assume!(!a.contains(&d) && !a.contains(&d.opposite()));
        let mu = WeightField::exponential(0.5);
        let v = symbol_l_phi(&VecN::xy(x, 0.3), &(d.vector() * 3.0), &mu, &mu, &FilterSpec::lambda(2), &w).unwrap();
        prop_assert_eq!(v, Complex64::new(0.0, 0.0));
    }
}

#[test]
fn artifacts_csv_round_trip() {
    let a = AngularSet::arcs(&[(FRAC_PI_4, 3.0 * FRAC_PI_4)]).unwrap();
    let lines = predict_artifacts(&disk_wf(&a), &a, &sampling()).unwrap();
    let mut buf = Vec::new();
    write_artifacts_csv(&lines, &mut buf).unwrap();
    let back = read_artifacts_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), lines.len());
    for (l, b) in lines.iter().zip(&back) {
        assert_eq!(l.points, b.points);
        assert_eq!(l.alphas, b.alphas);
        assert_eq!(l.spread, b.spread);
        assert_eq!(l.boundary_direction.vector(), b.boundary_direction.vector());
        assert_eq!(l.generator.x, b.generator.x);
    }
}
