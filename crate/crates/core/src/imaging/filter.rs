use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::{Field, GrayImage};

/// Normalized square convolution kernel, `(2r+1)²` row-major weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    radius: usize,
    sigma: f64,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at signed offset `(dx, dy)` from the center.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        self.weights[((dy + r) as usize) * self.side() + (dx + r) as usize]
    }
}

/// G(x, y) = exp(−(x² + y²)/(2σ²)) / (2πσ²).
pub fn gaussian_value(x: f64, y: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    (-(x * x + y * y) / (2.0 * s2)).exp() / (2.0 * PI * s2)
}

/// Samples G at integer offsets in `[−radius, radius]²` and normalizes to unit sum.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Result<Kernel> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    if radius < 1 {
        return Err(Error::invalid("kernel radius must be at least 1"));
    }
    let r = radius as isize;
    let mut weights = Vec::with_capacity((2 * radius + 1).pow(2));
    for dy in -r..=r {
        for dx in -r..=r {
            weights.push(gaussian_value(dx as f64, dy as f64, sigma));
        }
    }
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    Ok(Kernel { radius, sigma, weights })
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Direct 2-D convolution with clamp-to-edge borders; output clipped to [0, 1].
pub fn convolve(img: &GrayImage, k: &Kernel) -> Result<GrayImage> {
    if img.is_empty() {
        return Err(Error::invalid("cannot convolve an empty image"));
    }
    let (w, h) = (img.width(), img.height());
    let r = k.radius as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for dy in -r..=r {
                let row = clamp_index(y + dy, h) * w;
                for dx in -r..=r {
                    acc += k.at(dx, dy) * img.data()[row + clamp_index(x + dx, w)];
                }
            }
            out.push(acc);
        }
    }
    Ok(GrayImage::from_clamped(w, h, out))
}

/// Gaussian blur with radius ⌈3σ⌉.
///
/// The normalized 2-D Gaussian is the outer product of the normalized 1-D
/// one, so this runs as two 1-D passes with the same clamp-to-edge borders.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if img.is_empty() {
        return Err(Error::invalid("cannot blur an empty image"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil().max(1.0) as usize;
    let r = radius as isize;
    let mut taps: Vec<f64> = (-r..=r)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);

    let (w, h) = (img.width(), img.height());
    let src = img.data();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (t, d) in taps.iter().zip(-r..=r) {
                acc += t * row[clamp_index(x as isize + d, w)];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for (t, d) in taps.iter().zip(-r..=r) {
            let src_row = &tmp[clamp_index(y as isize + d, h) * w..][..w];
            let dst = &mut out[y * w..(y + 1) * w];
            for (o, s) in dst.iter_mut().zip(src_row) {
                *o += t * s;
            }
        }
    }
    Ok(GrayImage::from_clamped(w, h, out))
}

/// Spatial derivatives: central differences inside, one-sided on the border.
pub fn gradients(img: &GrayImage) -> Result<(Field, Field)> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::invalid("gradients need an image of at least 3×3"));
    }
    let d = img.data();
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        let row = y * w;
        gx[row] = d[row + 1] - d[row];
        gx[row + w - 1] = d[row + w - 1] - d[row + w - 2];
        for x in 1..w - 1 {
            gx[row + x] = 0.5 * (d[row + x + 1] - d[row + x - 1]);
        }
    }
    for x in 0..w {
        gy[x] = d[w + x] - d[x];
        gy[(h - 1) * w + x] = d[(h - 1) * w + x] - d[(h - 2) * w + x];
    }
    for y in 1..h - 1 {
        for x in 0..w {
            gy[y * w + x] = 0.5 * (d[(y + 1) * w + x] - d[(y - 1) * w + x]);
        }
    }
    Ok((
        Field {
            width: w,
            height: h,
            data: gx,
        },
        Field {
            width: w,
            height: h,
            data: gy,
        },
    ))
}
