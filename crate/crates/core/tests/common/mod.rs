//! Fixtures and naive reference implementations shared by the integration
//! tests. The references are plain per-pixel loops written without the
//! library's kernels so they can serve as independent oracles.
#![allow(dead_code)]

use texsup_core::rng::{SeededRng, UniformSource};
use texsup_core::{ConductionKind, PlaneImage};

pub fn random_image(w: usize, h: usize, c: usize, seed: u64) -> PlaneImage {
    let mut rng = SeededRng::new(seed);
    PlaneImage::from_fn(w, h, c, |_, _, _| rng.unit() * 255.0).unwrap()
}

/// Piecewise-flat regions with strong contrast plus fine texture: a stand-in
/// for a natural photo.
pub fn textured_scene(w: usize, h: usize, c: usize, seed: u64) -> PlaneImage {
    let mut rng = SeededRng::new(seed);
    let (cx, cy, rad) = (w as f64 * 0.6, h as f64 * 0.45, w.min(h) as f64 * 0.25);
    PlaneImage::from_fn(w, h, c, |ch, x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let mut base = if x < w / 3 { 60.0 } else { 150.0 } + 10.0 * ch as f64;
        if (xf - cx).hypot(yf - cy) < rad {
            base = 225.0 - 20.0 * ch as f64;
        }
        let texture = 6.0 * (xf * 1.7).sin() * (yf * 1.3).cos();
        let noise = (rng.unit() - 0.5) * 12.0;
        (base + texture + noise).clamp(0.0, 255.0)
    })
    .unwrap()
}

/// Vertical step edge (`low` left of `edge_x`, `high` from it on) with
/// uniform noise of amplitude `±noise` on top.
pub fn noisy_step(w: usize, h: usize, edge_x: usize, low: f64, high: f64, noise: f64, seed: u64) -> PlaneImage {
    let mut rng = SeededRng::new(seed);
    PlaneImage::from_fn(w, h, 1, |_, x, _| {
        let base = if x < edge_x { low } else { high };
        base + (rng.unit() * 2.0 - 1.0) * noise
    })
    .unwrap()
}

fn clamp(v: isize, len: usize) -> usize {
    if v < 0 {
        0
    } else if v as usize >= len {
        len - 1
    } else {
        v as usize
    }
}

fn at(img: &PlaneImage, c: usize, x: isize, y: isize) -> f64 {
    img.get(c, clamp(x, img.width()), clamp(y, img.height()))
}

/// Returns raw (unclamped) per-pixel values in planar order.
fn build_raw(img: &PlaneImage, mut f: impl FnMut(usize, usize, usize) -> f64) -> Vec<f64> {
    let mut vals = Vec::new();
    for c in 0..img.channels() {
        for y in 0..img.height() {
            for x in 0..img.width() {
                vals.push(f(c, x, y));
            }
        }
    }
    vals
}

pub fn naive_conduction(kind: ConductionKind, scale: f64, grad: f64) -> f64 {
    match kind {
        ConductionKind::PeronaMalikExp => (-(grad / scale).powi(2)).exp(),
        ConductionKind::PeronaMalikRational => 1.0 / (1.0 + (grad / scale).powi(2)),
        ConductionKind::TukeyBiweight => {
            if grad <= scale {
                (1.0 - (grad / scale).powi(2)).powi(2)
            } else {
                0.0
            }
        }
    }
}

pub fn naive_diffuse(img: &PlaneImage, kind: ConductionKind, scale: f64, iters: u32, lambda: f64) -> Vec<f64> {
    let (w, h, ch) = img.shape();
    let mut cur: Vec<f64> = img.data().to_vec();
    for _ in 0..iters {
        let mut next = cur.clone();
        for c in 0..ch {
            for y in 0..h as isize {
                for x in 0..w as isize {
                    let get = |xx: isize, yy: isize| cur[c * w * h + clamp(yy, h) * w + clamp(xx, w)];
                    let center = get(x, y);
                    let mut sum = 0.0;
                    for (dx, dy) in [(0, -1), (0, 1), (1, 0), (-1, 0)] {
                        let d = get(x + dx, y + dy) - center;
                        sum += naive_conduction(kind, scale, d.abs()) * d;
                    }
                    next[c * w * h + y as usize * w + x as usize] = center + lambda * sum;
                }
            }
        }
        cur = next;
    }
    cur
}

/// Dense 2-D Gaussian convolution with weights `exp(-(dx²+dy²)/2σ²)` over a
/// square window, normalized by the total weight.
pub fn naive_gaussian(img: &PlaneImage, radius: usize, sigma: f64) -> Vec<f64> {
    let r = radius as isize;
    build_raw(img, |c, x, y| {
        let (mut acc, mut norm) = (0.0, 0.0);
        for dy in -r..=r {
            for dx in -r..=r {
                let wgt = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                acc += wgt * at(img, c, x as isize + dx, y as isize + dy);
                norm += wgt;
            }
        }
        acc / norm
    })
}

pub fn naive_bilateral(img: &PlaneImage, sigma_s: f64, sigma_r: f64) -> Vec<f64> {
    let r = (3.0 * sigma_s).ceil() as isize;
    build_raw(img, |c, x, y| {
        let center = img.get(c, x, y);
        let (mut acc, mut norm) = (0.0, 0.0);
        for dy in -r..=r {
            for dx in -r..=r {
                let v = at(img, c, x as isize + dx, y as isize + dy);
                let ws = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma_s * sigma_s)).exp();
                let wr = (-(v - center).powi(2) / (2.0 * sigma_r * sigma_r)).exp();
                acc += ws * wr * v;
                norm += ws * wr;
            }
        }
        acc / norm
    })
}

pub fn naive_median(img: &PlaneImage, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    build_raw(img, |c, x, y| {
        let mut window = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                window.push(at(img, c, x as isize + dx, y as isize + dy));
            }
        }
        window.sort_by(|a, b| a.partial_cmp(b).unwrap());
        window[window.len() / 2]
    })
}

pub fn naive_threshold(img: &PlaneImage, radius: usize, offset: f64) -> Vec<f64> {
    let r = radius as isize;
    build_raw(img, |c, x, y| {
        let mut sum = 0.0;
        let mut n = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                sum += at(img, c, x as isize + dx, y as isize + dy);
                n += 1.0;
            }
        }
        if img.get(c, x, y) > sum / n - offset {
            255.0
        } else {
            0.0
        }
    })
}

pub fn naive_tv(img: &PlaneImage) -> f64 {
    let mut tv = 0.0;
    for c in 0..img.channels() {
        for y in 0..img.height() {
            for x in 0..img.width() {
                if x + 1 < img.width() {
                    tv += (img.get(c, x + 1, y) - img.get(c, x, y)).abs();
                }
                if y + 1 < img.height() {
                    tv += (img.get(c, x, y + 1) - img.get(c, x, y)).abs();
                }
            }
        }
    }
    tv
}

/// Total variation restricted to the window `[x0, x1) × [y0, y1)` of channel 0.
pub fn region_tv(img: &PlaneImage, x0: usize, x1: usize, y0: usize, y1: usize) -> f64 {
    let mut tv = 0.0;
    for y in y0..y1 {
        for x in x0..x1 {
            if x + 1 < x1 {
                tv += (img.get(0, x + 1, y) - img.get(0, x, y)).abs();
            }
            if y + 1 < y1 {
                tv += (img.get(0, x, y + 1) - img.get(0, x, y)).abs();
            }
        }
    }
    tv
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn bit_identical(a: &PlaneImage, b: &PlaneImage) -> bool {
    a.shape() == b.shape()
        && a.data()
            .iter()
            .zip(b.data())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Writes `count` small PNG fixtures into `dir`, some under a subdirectory.
pub fn write_png_corpus(dir: &std::path::Path, count: usize, size: usize, seed: u64) {
    use texsup_core::codec::{save, OutputFormat};
    for i in 0..count {
        let img = if i % 4 == 3 {
            random_image(size, size, 1, seed + i as u64)
        } else {
            textured_scene(size, size, 3, seed + i as u64)
        };
        let rel = if i % 5 == 0 {
            format!("sub/img{i:04}.png")
        } else {
            format!("img{i:04}.png")
        };
        let path = dir.join(rel);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        save(&img, &path, OutputFormat::Png).unwrap();
    }
}
