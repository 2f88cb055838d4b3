//! Binary morphology with a square `(2r+1)²` structuring element.
//!
//! Pixels outside the image never contribute to a dilation and never block
//! an erosion, which keeps closing extensive right up to the border.

use crate::error::{Error, Result};

use super::BinaryImage;

pub fn dilate(img: &BinaryImage, radius: usize) -> Result<BinaryImage> {
    if radius < 1 {
        return Err(Error::invalid("structuring element radius must be at least 1"));
    }
    Ok(sweep(img, radius, true))
}

pub fn erode(img: &BinaryImage, radius: usize) -> Result<BinaryImage> {
    if radius < 1 {
        return Err(Error::invalid("structuring element radius must be at least 1"));
    }
    Ok(sweep(img, radius, false))
}

/// Dilation followed by erosion. Radius 0 returns the input unchanged.
pub fn close(img: &BinaryImage, radius: usize) -> BinaryImage {
    if radius == 0 {
        return img.clone();
    }
    sweep(&sweep(img, radius, true), radius, false)
}

/// Separable running max (dilate) or min (erode) over the in-bounds part of
/// each window, rows first then columns.
fn sweep(img: &BinaryImage, radius: usize, dilating: bool) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let src = img.data();
    let hit = |count: usize, span: usize| if dilating { count > 0 } else { count == span };

    let mut tmp = vec![0u8; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let mut prefix = vec![0usize; w + 1];
        for x in 0..w {
            prefix[x + 1] = prefix[x] + row[x] as usize;
        }
        for x in 0..w {
            let lo = x.saturating_sub(radius);
            let hi = (x + radius + 1).min(w);
            tmp[y * w + x] = hit(prefix[hi] - prefix[lo], hi - lo) as u8;
        }
    }
    let mut out = vec![0u8; w * h];
    let mut prefix = vec![0usize; h + 1];
    for x in 0..w {
        for y in 0..h {
            prefix[y + 1] = prefix[y] + tmp[y * w + x] as usize;
        }
        for y in 0..h {
            let lo = y.saturating_sub(radius);
            let hi = (y + radius + 1).min(h);
            out[y * w + x] = hit(prefix[hi] - prefix[lo], hi - lo) as u8;
        }
    }
    BinaryImage::new(w, h, out).expect("sweep preserves shape and range")
}
