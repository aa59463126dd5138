use limtomo::geometry::{Covector, Direction, VecN};
use limtomo::microlocal::{predict_artifacts, Sampling, Tolerance, WavefrontSet};
use limtomo::phantoms::{analytic_wavefront, rasterize, Phantom};
use limtomo::transform::{Grid, Image};
use limtomo::wfdetect::*;
use limtomo::Error;
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::centered(2, 128, 1.0).unwrap()
}

fn tol(g: &Grid) -> Tolerance {
    Tolerance::pixels(g.min_spacing())
}

#[test]
fn vertical_edge() {
    let g = grid();
    let h = g.min_spacing();
    let img = Image::from_fn(&g, |p| if p[0] >= 0.0 { 1.0 } else { 0.0 });
    let wf = detect(&img, &DetectorConfig::default(), tol(&g)).unwrap();
    assert!(!wf.is_empty());
    let e = Direction::from_angle(0.0);
    for c in wf.iter() {
        assert!(c.x[0].abs() <= h, "detection off the edge at {:?}", c.x);
        assert!(axial_angle_deg(&c.omega, &e) < 2.0);
    }
    let rows: std::collections::BTreeSet<i64> = wf.iter().map(|c| (c.x[1] / h).floor() as i64).collect();
    assert_eq!(rows.len(), 128);
}

#[test]
fn constant_image_has_no_detections() {
    let g = grid();
    let cfg = DetectorConfig::default();
    assert!(detect(&Image::from_fn(&g, |_| 3.5), &cfg, tol(&g)).unwrap().is_empty());
    assert!(detect(&Image::zeros(&g), &cfg, tol(&g)).unwrap().is_empty());
}

#[test]
fn disk_boundary_is_detected_radially() {
    let g = grid();
    let h = g.min_spacing();
    let img = rasterize(&Phantom::disk(0.5), &g, true).unwrap();
    let wf = detect(&img, &DetectorConfig::default(), tol(&g)).unwrap();
    assert!(wf.len() > 100);
    let near = wf.iter().filter(|c| (c.x.norm() - 0.5).abs() <= h).count();
    assert!(near as f64 >= 0.95 * wf.len() as f64, "{near} of {}", wf.len());
    let reference = WavefrontSet::new(analytic_wavefront(&Phantom::disk(0.5), 256).unwrap().covectors(), tol(&g));
    let r = match_sets(&wf, &reference);
    assert!(r.stats.tp_rate > 0.95 && r.stats.spurious_rate < 0.05, "{:?}", r.stats);
    assert!(r.stats.mean_angle_error_deg < 2.0);
}

fn rotate90(img: &Image<f64>) -> Image<f64> {
    let n = img.grid.dims()[0];
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            // (x, y) -> (−y, x)
            out[i * n + (n - 1 - j)] = img.values[j * n + i];
        }
    }
    Image::from_values(&img.grid, out).unwrap()
}

#[test]
fn rotation_equivariance() {
    let g = grid();
    let p = Phantom::from_toml_str(
        "dim = 2\n[[ellipse]]\ncenter = [0.1, -0.2]\naxes = [0.5, 0.25]\nrotation = 0.4\n[[polygon]]\nvertices = [[-0.7, 0.2], [-0.2, 0.3], [-0.5, 0.7]]\ndensity = 0.7\n",
    )
    .unwrap();
    let img = rasterize(&p, &g, true).unwrap();
    let cfg = DetectorConfig::default();
    let a = detect(&img, &cfg, tol(&g)).unwrap();
    let b = detect(&rotate90(&img), &cfg, tol(&g)).unwrap();
    let rotated: Vec<Covector> = a
        .iter()
        .map(|c| {
            let x = VecN::xy(-c.x[1], c.x[0]);
            let w = c.omega.vector();
            Covector::from_direction(x, Direction::new(VecN::xy(-w[1], w[0])).unwrap(), c.magnitude).unwrap()
        })
        .collect();
    let ra = WavefrontSet::new(rotated, tol(&g));
    let r1 = match_sets(&b, &ra);
    let r2 = match_sets(&ra, &b);
    assert!(r1.stats.tp_rate >= 0.9 && r2.stats.tp_rate >= 0.9, "{:?} {:?}", r1.stats, r2.stats);
}

#[test]
fn match_examples() {
    let t = Tolerance::new(0.05, 5.0);
    let set: Vec<Covector> = (0..20)
        .map(|k| Covector::from_direction(VecN::xy(k as f64 * 0.1, 0.0), Direction::from_angle(0.3 * k as f64), 1.0).unwrap())
        .collect();
    let a = WavefrontSet::new(set.clone(), t);
    let r = match_sets(&a, &a);
    assert_eq!((r.stats.tp_rate, r.stats.spurious_rate, r.stats.mean_angle_error_deg), (1.0, 0.0, 0.0));

    let turned: Vec<Covector> = set
        .iter()
        .map(|c| Covector::from_direction(c.x, Direction::from_angle(c.omega.angle().unwrap() + 3f64.to_radians()), 1.0).unwrap())
        .collect();
    let r = match_sets(&WavefrontSet::new(turned, t), &a);
    assert_eq!(r.stats.tp_rate, 1.0);
    assert!((r.stats.mean_angle_error_deg - 3.0).abs() < 1e-9);

    let far: Vec<Covector> = set.iter().map(|c| Covector { x: c.x + VecN::xy(0.0, 5.0), ..*c }).collect();
    let r = match_sets(&WavefrontSet::new(far, t), &a);
    assert_eq!((r.stats.tp_rate, r.stats.spurious_rate), (0.0, 1.0));

    let flipped: Vec<Covector> = set.iter().map(|c| c.negated()).collect();
    assert_eq!(match_sets(&WavefrontSet::new(flipped, t), &a).stats.tp_rate, 1.0);

    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 21);
}

#[test]
fn artifact_energy_examples() {
    let g = grid();
    let h = g.min_spacing();
    let img = rasterize(&Phantom::disk(0.5), &g, true).unwrap();
    let a = limtomo::geometry::AngularSet::arcs(&[(0.5, 2.0)]).unwrap();
    let wf = WavefrontSet::new(
        limtomo::phantoms::analytic_wavefront_aligned(&Phantom::disk(0.5), 64, &a.boundary_directions(4)).unwrap().covectors(),
        tol(&g),
    );
    let lines = predict_artifacts(&wf, &a, &Sampling::for_grid(&g)).unwrap();
    assert_eq!(lines.len(), 4);
    let e = artifact_energy(&img, &img, &lines, 2.0, 1.5).unwrap();
    assert_eq!((e.in_band, e.out_band), (0.0, 0.0));

    let on_line = Image::from_fn(&g, |p| if lines[0].distance(p) <= 0.5 * h { 1.0 } else { 0.0 });
    let e = band_energy(&on_line, &lines[..1], 2.0).unwrap();
    assert!(e.in_band > 0.0 && e.out_band == 0.0);
    assert_eq!(e.in_fraction(), 1.0);

    let other = Grid::centered(2, 64, 1.0).unwrap();
    assert!(matches!(
        artifact_energy(&img, &Image::zeros(&other), &lines, 2.0, 1.5),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn detector_config_validation() {
    assert!(DetectorConfig::default().validate().is_ok());
    for bad in [
        DetectorConfig { sigma_g: 3.0, sigma_t: 3.0, ..Default::default() },
        DetectorConfig { rho: 1.0, ..Default::default() },
        DetectorConfig { rho: 0.0, ..Default::default() },
        DetectorConfig { nms_radius: 0, ..Default::default() },
    ] {
        assert!(matches!(bad.validate(), Err(Error::InvalidDetector(_))));
    }
}

#[test]
fn blur_preserves_constants_and_mass() {
    let g = Grid::centered(2, 32, 1.0).unwrap();
    let c = gaussian_blur(&Image::from_fn(&g, |_| 2.0), 2.0).unwrap();
    assert!(c.values.iter().all(|v| (v - 2.0).abs() < 1e-12));
    let spike = Image::from_fn(&g, |p| if p.norm() < g.min_spacing() { 1.0 } else { 0.0 });
    let b = gaussian_blur(&spike, 1.5).unwrap();
    let (s0, s1): (f64, f64) = (spike.values.iter().sum(), b.values.iter().sum());
    assert!((s0 - s1).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn raising_rho_never_adds_detections(r1 in 0.02..0.9f64, dr in 0.0..0.09f64, cx in -0.2..0.2f64) {
        let g = Grid::centered(2, 64, 1.0).unwrap();
        let img = rasterize(&Phantom::new(2, vec![limtomo::phantoms::Primitive::disk(VecN::xy(cx, 0.1), 0.4, 1.0).unwrap()]).unwrap(), &g, true).unwrap();
        let lo = DetectorConfig { rho: r1, ..Default::default() };
        let hi = DetectorConfig { rho: (r1 + dr).min(0.99), ..Default::default() };
        let (a, b) = (detect(&img, &lo, tol(&g)).unwrap(), detect(&img, &hi, tol(&g)).unwrap());
        prop_assert!(b.len() <= a.len());
    }

    #[test]
    fn match_is_symmetric_on_equal_sets(n in 1usize..30, seed in 0.0..1.0f64) {
        let t = Tolerance::new(0.05, 5.0);
        let set: Vec<Covector> = (0..n)
            .map(|k| Covector::from_direction(VecN::xy((k as f64 + seed).sin(), (k as f64 * 1.7).cos()), Direction::from_angle(k as f64 + seed), 1.0).unwrap())
            .collect();
        let a = WavefrontSet::new(set, t);
        let b = a.clone();
        prop_assert_eq!(match_sets(&a, &b).stats.tp_rate, match_sets(&b, &a).stats.tp_rate);
        prop_assert_eq!(match_sets(&a, &b).stats.tp_rate, 1.0);
    }
}
