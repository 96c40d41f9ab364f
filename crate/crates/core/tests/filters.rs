mod common;

use common::*;
use proptest::prelude::*;
use texsup_core::cartoon::{edge_mask, palette};
use texsup_core::metrics::{edge_preservation, total_variation};
use texsup_core::smoothing::gaussian_blur;
use texsup_core::{
    adaptive_threshold, bilateral, cartoonize, diffuse, diffuse_step, median_filter, BilateralSpec,
    CartoonSpec, ConductionFn, ConductionKind, DiffusionSpec, Exec, GaussianSpec, PlaneImage,
};

fn spec(kind: ConductionKind, k: f64, iters: u32, lambda: f64) -> DiffusionSpec {
    DiffusionSpec::new(ConductionFn::new(kind, k).unwrap(), iters, lambda).unwrap()
}

#[test]
fn diffusion_matches_reference_loop_on_scene() {
    let img = textured_scene(48, 40, 3, 11);
    for kind in ConductionKind::ALL {
        let out = diffuse(&img, &spec(kind, 20.0, 20, 0.1));
        let oracle = naive_diffuse(&img, kind, 20.0, 20, 0.1);
        assert!(max_abs_diff(out.data(), &oracle) <= 1e-9, "{kind}");
    }
}

#[test]
fn diffusion_reduces_tv_and_keeps_strong_edges() {
    let img = textured_scene(64, 64, 1, 5);
    let out = diffuse(&img, &DiffusionSpec::default());
    assert!(total_variation(&out) < total_variation(&img));
    // strong edges: gradient above 3K
    assert!(edge_preservation(&img, &out, 60.0).unwrap() >= 0.9);
}

#[test]
fn tv_never_increases_across_iterations() {
    for seed in 0..4 {
        let img = textured_scene(40, 32, 3, seed);
        for kind in ConductionKind::ALL {
            let s = spec(kind, 20.0, 1, 0.2);
            let mut cur = img.clone();
            let mut tv = total_variation(&cur);
            for _ in 0..25 {
                cur = diffuse_step(&cur, &s);
                let next = total_variation(&cur);
                assert!(next <= tv + 1e-9, "{kind}: {next} > {tv}");
                tv = next;
            }
        }
    }
}

#[test]
fn linear_limit_converges_to_mean() {
    // K far beyond any gradient makes g == 1: the discrete heat equation
    let img = random_image(64, 64, 1, 3);
    let mean = img.channel_sum(0) / img.area() as f64;
    let s = spec(ConductionKind::PeronaMalikExp, 1e12, 1, 0.25);

    // brute-force linear reference for the first few steps
    let heat = naive_diffuse(&img, ConductionKind::PeronaMalikExp, f64::INFINITY, 5, 0.25);
    let mut cur = img.clone();
    for _ in 0..5 {
        cur = diffuse_step(&cur, &s);
    }
    assert!(max_abs_diff(cur.data(), &heat) <= 1e-9);

    let mut span = {
        let (lo, hi) = cur.min_max(0);
        hi - lo
    };
    for _ in 0..20_000 {
        cur = diffuse_step(&cur, &s);
        let (lo, hi) = cur.min_max(0);
        assert!(hi - lo <= span + 1e-12);
        span = hi - lo;
    }
    assert!(span < 1e-3, "span {span}");
    let (lo, hi) = cur.min_max(0);
    assert!(lo <= mean + 1e-6 && hi >= mean - 1e-6);
    assert!((cur.channel_sum(0) / cur.area() as f64 - mean).abs() < 1e-9);
}

#[test]
fn diffusion_commutes_with_dihedral_maps() {
    let img = random_image(23, 17, 3, 8);
    let s = spec(ConductionKind::TukeyBiweight, 40.0, 7, 0.2);
    let out = diffuse(&img, &s);
    assert!(bit_identical(&diffuse(&img.flip_horizontal(), &s), &out.flip_horizontal()));
    assert!(bit_identical(&diffuse(&img.flip_vertical(), &s), &out.flip_vertical()));
    assert!(bit_identical(&diffuse(&img.rotate90(), &s), &out.rotate90()));
}

#[test]
fn gaussian_semigroup_on_interior() {
    // wide windows so truncation is far below the tolerance
    let img = random_image(80, 80, 1, 21);
    let (s1, s2) = (1.5f64, 2.0f64);
    let g1 = GaussianSpec::new(12, s1).unwrap();
    let g2 = GaussianSpec::new(16, s2).unwrap();
    let g12 = GaussianSpec::new(20, s1.hypot(s2)).unwrap();
    let twice = gaussian_blur(&gaussian_blur(&img, &g1), &g2);
    let once = gaussian_blur(&img, &g12);

    // dense 2-D oracle for the single blur
    let dense = naive_gaussian(&img, 20, s1.hypot(s2));
    assert!(max_abs_diff(once.data(), &dense) <= 1e-9);

    for y in 28..52 {
        for x in 28..52 {
            let (a, b) = (twice.get(0, x, y), once.get(0, x, y));
            assert!((a - b).abs() <= 1e-6, "({x},{y}): {a} vs {b}");
        }
    }
}

#[test]
fn gaussian_conserves_mass_with_flat_border() {
    // content kept `radius` pixels away from the border: every non-zero
    // pixel receives total weight exactly one
    let r = 6;
    let noise = random_image(60, 50, 1, 4);
    let img = PlaneImage::from_fn(60, 50, 1, |_, x, y| {
        let inside = x >= r && x < 60 - r && y >= r && y < 50 - r;
        if inside {
            noise.get(0, x, y)
        } else {
            0.0
        }
    })
    .unwrap();
    let out = gaussian_blur(&img, &GaussianSpec::from_radius(r).unwrap());
    let (a, b) = (img.channel_sum(0), out.channel_sum(0));
    assert!((a - b).abs() <= 1e-6 * a, "{a} vs {b}");
}

#[test]
fn bilateral_with_huge_range_sigma_is_gaussian() {
    let img = random_image(48, 48, 3, 17);
    let spec = BilateralSpec::new(2.5, 1e9).unwrap();
    let bil = bilateral(&img, &spec);
    let gau = gaussian_blur(&img, &spec.spatial_gaussian());
    let r = spec.window_radius();
    for c in 0..3 {
        for y in r..48 - r {
            for x in r..48 - r {
                assert!((bil.get(c, x, y) - gau.get(c, x, y)).abs() <= 1e-6);
            }
        }
    }
}

#[test]
fn bilateral_step_edge_does_not_cross_midpoint() {
    let img = PlaneImage::from_fn(32, 12, 1, |_, x, _| if x < 16 { 0.0 } else { 255.0 }).unwrap();
    let out = bilateral(&img, &BilateralSpec::new(5.0, 10.0).unwrap());
    let oracle = naive_bilateral(&img, 5.0, 10.0);
    assert!(max_abs_diff(out.data(), &oracle) <= 1e-9);
    for y in 0..12 {
        for x in 0..32 {
            let v = out.get(0, x, y);
            assert_eq!(v < 127.5, x < 16, "({x},{y}) = {v}");
        }
    }
}

#[test]
fn median_matches_full_sort_on_5x5() {
    for seed in 0..5 {
        let img = random_image(5, 5, 1, 100 + seed);
        for r in 1..=2 {
            let out = median_filter(&img, r).unwrap();
            assert_eq!(out.data(), &naive_median(&img, r)[..]);
        }
    }
}

#[test]
fn median_is_idempotent_on_flat_regions() {
    let img = PlaneImage::from_fn(30, 30, 1, |_, x, _| if x < 15 { 40.0 } else { 190.0 }).unwrap();
    let once = median_filter(&img, 2).unwrap();
    let twice = median_filter(&once, 2).unwrap();
    assert_eq!(once, twice);
}

#[test]
fn threshold_step_band_matches_oracle() {
    let img = PlaneImage::from_fn(16, 16, 1, |_, x, _| if x < 8 { 30.0 } else { 220.0 }).unwrap();
    let r = 4;
    let mask = adaptive_threshold(&img, r, 2.0).unwrap();
    assert_eq!(mask.data(), &naive_threshold(&img, r, 2.0)[..]);
    for y in 0..16 {
        let zeros: Vec<usize> = (0..16).filter(|&x| mask.get(0, x, y) == 0.0).collect();
        assert!(zeros.iter().all(|&x| x < 8));
        assert!(!zeros.is_empty() && zeros.len() <= r);
        assert_eq!(*zeros.last().unwrap(), 7);
    }
}

fn small_cartoon() -> CartoonSpec {
    CartoonSpec {
        bilateral: BilateralSpec::new(2.0, 30.0).unwrap(),
        bilateral_passes: 2,
        ..CartoonSpec::default()
    }
}

#[test]
fn cartoon_is_masked_palette() {
    let img = textured_scene(40, 36, 3, 9);
    let spec = small_cartoon();
    let out = cartoonize(&img, &spec).unwrap();
    let mask = edge_mask(&img, &spec, Exec::Sequential).unwrap();
    let color = palette(&img, &spec, Exec::Sequential);
    assert!(mask.data().iter().all(|&m| m == 0.0 || m == 255.0));
    for c in 0..3 {
        for y in 0..36 {
            for x in 0..40 {
                let want = mask.get(0, x, y) / 255.0 * color.get(c, x, y);
                assert_eq!(out.get(c, x, y), want);
            }
        }
        assert!(out.min_max(c).1 <= img.min_max(c).1 + 1e-9);
    }
}

#[test]
fn cartoon_two_region_card() {
    let img = PlaneImage::from_fn(32, 32, 3, |_, x, _| if x < 16 { 200.0 } else { 60.0 }).unwrap();
    let spec = small_cartoon();
    let out = cartoonize(&img, &spec).unwrap();
    let color = palette(&img, &spec, Exec::default());
    for y in 0..32 {
        // interiors keep their smoothed color
        for x in (0..8).chain(24..32) {
            for c in 0..3 {
                assert_eq!(out.get(c, x, y), color.get(c, x, y));
            }
        }
        // a black contour runs along the dark side of the boundary
        assert!((16..20).any(|x| out.get(0, x, y) == 0.0), "row {y}");
    }
    assert!((out.get(0, 2, 2) - 200.0).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn smoothing_filters_obey_max_principle(seed in 0u64..1000, sigma in 0.6..3.0f64, range in 5.0..200.0f64) {
        let img = random_image(14, 11, 1, seed);
        let (lo, hi) = img.min_max(0);
        let outputs = [
            gaussian_blur(&img, &GaussianSpec::new(3, sigma).unwrap()),
            bilateral(&img, &BilateralSpec::new(sigma, range).unwrap()),
            median_filter(&img, 1).unwrap(),
        ];
        for out in outputs {
            let (a, b) = out.min_max(0);
            prop_assert!(a >= lo - 1e-9 && b <= hi + 1e-9);
        }
    }

    #[test]
    fn threshold_output_is_binary(seed in 0u64..1000, r in 0usize..4, offset in -20.0..20.0f64) {
        let img = random_image(9, 13, 1, seed);
        let mask = adaptive_threshold(&img, r, offset).unwrap();
        prop_assert!(mask.data().iter().all(|&v| v == 0.0 || v == 255.0));
    }

    #[test]
    fn diffusion_conserves_channel_sums(seed in 0u64..1000, k in 2.0..60.0f64, iters in 0u32..8) {
        let img = random_image(12, 10, 3, seed);
        let out = diffuse(&img, &spec(ConductionKind::PeronaMalikExp, k, iters, 0.25));
        for c in 0..3 {
            let (a, b) = (img.channel_sum(c), out.channel_sum(c));
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }
    }
}
