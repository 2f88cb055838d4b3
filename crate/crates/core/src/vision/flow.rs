use crate::error::{Error, Result};
use crate::imaging::{gradients, BinaryImage, GrayImage};

/// Displacement `(u, v)` in pixels/frame observed at pixel `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowVector {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

impl FlowVector {
    pub fn magnitude(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

/// Regular sample grid with the given stride, offset by half a stride.
pub fn grid_points(width: usize, height: usize, stride: usize) -> Vec<(usize, usize)> {
    let stride = stride.max(1);
    let mut pts = Vec::new();
    let mut y = stride / 2;
    while y < height {
        let mut x = stride / 2;
        while x < width {
            pts.push((x, y));
            x += stride;
        }
        y += stride;
    }
    pts
}

/// Single-level Lucas-Kanade: per point, least squares over a
/// `window × window` neighbourhood of the brightness-constancy equations
/// `Ix·u + Iy·v + It = 0`. Points whose window-averaged structure tensor has
/// smaller eigenvalue below `min_eigen` are dropped.
pub fn lucas_kanade(
    prev: &GrayImage,
    curr: &GrayImage,
    points: &[(usize, usize)],
    window: usize,
    min_eigen: f64,
) -> Result<Vec<FlowVector>> {
    if prev.width() != curr.width() || prev.height() != curr.height() {
        return Err(Error::DimensionMismatch {
            expected: prev.data().len(),
            actual: curr.data().len(),
        });
    }
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::invalid("LK window must be odd and at least 3"));
    }
    let (w, h) = (prev.width(), prev.height());
    let (gxp, gyp) = gradients(prev)?;
    let (gxc, gyc) = gradients(curr)?;
    let half = window / 2;
    let mut flows = Vec::new();
    for &(px, py) in points {
        if px >= w || py >= h {
            return Err(Error::invalid(format!("sample point ({px}, {py}) outside the image")));
        }
        let (x0, x1) = (px.saturating_sub(half), (px + half + 1).min(w));
        let (y0, y1) = (py.saturating_sub(half), (py + half + 1).min(h));
        let (mut sxx, mut sxy, mut syy, mut sxt, mut syt) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for y in y0..y1 {
            for x in x0..x1 {
                let i = y * w + x;
                let ix = 0.5 * (gxp.data[i] + gxc.data[i]);
                let iy = 0.5 * (gyp.data[i] + gyc.data[i]);
                let it = curr.data()[i] - prev.data()[i];
                sxx += ix * ix;
                sxy += ix * iy;
                syy += iy * iy;
                sxt += ix * it;
                syt += iy * it;
            }
        }
        let n = ((x1 - x0) * (y1 - y0)) as f64;
        let (a, b, c) = (sxx / n, sxy / n, syy / n);
        let lambda_min = 0.5 * (a + c) - ((0.5 * (a - c)).powi(2) + b * b).sqrt();
        if !(lambda_min >= min_eigen) || lambda_min <= 0.0 {
            continue;
        }
        let det = a * c - b * b;
        let (bx, by) = (-sxt / n, -syt / n);
        let u = (c * bx - b * by) / det;
        let v = (a * by - b * bx) / det;
        flows.push(FlowVector {
            x: px as f64,
            y: py as f64,
            u,
            v,
        });
    }
    Ok(flows)
}

/// Mean position of the flow points moving at least `magnitude_threshold`.
pub fn reflection_centroid(flows: &[FlowVector], magnitude_threshold: f64) -> Option<(f64, f64)> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for f in flows.iter().filter(|f| f.magnitude() >= magnitude_threshold) {
        sx += f.x;
        sy += f.y;
        n += 1;
    }
    (n > 0).then(|| (sx / n as f64, sy / n as f64))
}

/// Disk suppressing the glint region, in pixel-index coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectionMask {
    pub center: (f64, f64),
    pub radius: f64,
}

impl ReflectionMask {
    pub fn new(center: (f64, f64), radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("mask radius must be positive"));
        }
        Ok(Self { center, radius })
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let dx = x as f64 - self.center.0;
        let dy = y as f64 - self.center.1;
        dx * dx + dy * dy <= self.radius * self.radius
    }

    pub fn to_binary(&self, width: usize, height: usize) -> BinaryImage {
        BinaryImage::from_fn(width, height, |x, y| self.contains(x, y))
    }
}

/// Replaces pixels inside the mask disk by the mean luminance outside it.
pub fn apply_mask(img: &GrayImage, mask: &ReflectionMask) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let (mut sum, mut n) = (0.0, 0usize);
    for y in 0..h {
        for x in 0..w {
            if !mask.contains(x, y) {
                sum += img.get(x, y);
                n += 1;
            }
        }
    }
    if n == 0 {
        return img.clone();
    }
    let fill = sum / n as f64;
    let mut out = img.clone();
    let r = mask.radius.ceil() as isize;
    let (cx, cy) = (mask.center.0.round() as isize, mask.center.1.round() as isize);
    for y in (cy - r - 1).max(0)..(cy + r + 2).min(h as isize) {
        for x in (cx - r - 1).max(0)..(cx + r + 2).min(w as isize) {
            if mask.contains(x as usize, y as usize) {
                out.set(x as usize, y as usize, fill);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::gaussian_blur;

    fn texture(shift: f64) -> GrayImage {
        GrayImage::from_fn(64, 64, |x, y| {
            let (x, y) = (x as f64 - shift, y as f64);
            0.5 + 0.2 * (x * 0.31).sin() * (y * 0.27).cos() + 0.15 * (0.17 * x + 0.23 * y).sin()
        })
    }

    #[test]
    fn recovers_one_pixel_shift() {
        let prev = texture(0.0);
        let curr = texture(1.0);
        let pts = grid_points(64, 64, 8)
            .into_iter()
            .filter(|&(x, y)| (8..56).contains(&x) && (8..56).contains(&y))
            .collect::<Vec<_>>();
        let flows = lucas_kanade(&prev, &curr, &pts, 9, 1e-5).unwrap();
        assert!(flows.len() > pts.len() / 2);
        for f in &flows {
            assert!((f.u - 1.0).abs() <= 0.3 && f.v.abs() <= 0.3, "{f:?}");
        }
    }

    #[test]
    fn identical_frames_have_zero_flow() {
        let img = texture(0.0);
        let flows = lucas_kanade(&img, &img, &grid_points(64, 64, 8), 9, 1e-6).unwrap();
        assert!(!flows.is_empty());
        assert!(flows.iter().all(|f| f.u == 0.0 && f.v == 0.0));
    }

    #[test]
    fn textureless_frames_are_rejected() {
        let a = GrayImage::filled(32, 32, 0.4).unwrap();
        let b = GrayImage::filled(32, 32, 0.6).unwrap();
        assert!(lucas_kanade(&a, &b, &grid_points(32, 32, 4), 5, 1e-9)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn lk_argument_errors() {
        let a = GrayImage::filled(32, 32, 0.4).unwrap();
        let b = GrayImage::filled(16, 32, 0.4).unwrap();
        assert!(lucas_kanade(&a, &b, &[], 5, 0.0).is_err());
        assert!(lucas_kanade(&a, &a, &[], 4, 0.0).is_err());
        assert!(lucas_kanade(&a, &a, &[], 1, 0.0).is_err());
        assert!(lucas_kanade(&a, &a, &[(40, 1)], 5, 0.0).is_err());
    }

    #[test]
    fn centroid_of_qualifying_points() {
        let flows = [
            FlowVector {
                x: 10.0,
                y: 10.0,
                u: 2.0,
                v: 0.0,
            },
            FlowVector {
                x: 30.0,
                y: 30.0,
                u: 0.0,
                v: -1.5,
            },
            FlowVector {
                x: 90.0,
                y: 5.0,
                u: 0.1,
                v: 0.0,
            },
        ];
        assert_eq!(reflection_centroid(&flows, 1.0), Some((20.0, 20.0)));
        assert_eq!(reflection_centroid(&flows, 5.0), None);
        assert_eq!(reflection_centroid(&[], 0.0), None);
    }

    #[test]
    fn mask_fills_with_outside_mean() {
        let mut img = GrayImage::filled(40, 40, 0.3).unwrap();
        for y in 18..23 {
            for x in 18..23 {
                img.set(x, y, 0.95);
            }
        }
        let mask = ReflectionMask::new((20.0, 20.0), 5.0).unwrap();
        let out = apply_mask(&img, &mask);
        for y in 18..23 {
            for x in 18..23 {
                assert!((out.get(x, y) - 0.3).abs() < 1e-12);
            }
        }
        assert_eq!(out.get(0, 0), 0.3);
        assert!(ReflectionMask::new((1.0, 1.0), 0.0).is_err());
        assert_eq!(
            mask.to_binary(40, 40).count_ones(),
            (0..40 * 40).filter(|i| mask.contains(i % 40, i / 40)).count()
        );
    }

    #[test]
    fn blurred_shift_still_detected() {
        // Same texture after the pipeline's blur.
        let prev = gaussian_blur(&texture(0.0), 2.0).unwrap();
        let curr = gaussian_blur(&texture(1.0), 2.0).unwrap();
        let flows = lucas_kanade(&prev, &curr, &[(32, 32)], 9, 1e-6).unwrap();
        assert_eq!(flows.len(), 1);
        assert!((flows[0].u - 1.0).abs() < 0.3);
    }
}
