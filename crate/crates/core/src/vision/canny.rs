use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::imaging::{gradients, BinaryImage, GrayImage};

/// Canny edges: central-difference gradient magnitude, non-maximum
/// suppression along the gradient direction quantized to 4 orientations, and
/// hysteresis keeping weak pixels (≥ `low`) 8-connected to strong ones (≥ `high`).
pub fn canny(img: &GrayImage, low: f64, high: f64) -> Result<BinaryImage> {
    if !(low > 0.0 && low < high) {
        return Err(Error::invalid(format!(
            "need 0 < low < high, got low={low}, high={high}"
        )));
    }
    let (gx, gy) = gradients(img)?;
    let (w, h) = (img.width(), img.height());
    let mag: Vec<f64> = gx.data.iter().zip(&gy.data).map(|(a, b)| a.hypot(*b)).collect();
    let at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    // 0 = below low, 1 = weak, 2 = strong
    let mut class = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m < low {
                continue;
            }
            let (dx, dy) = direction(gx.data[i], gy.data[i]);
            let (xi, yi) = (x as isize, y as isize);
            // Strict on one side, inclusive on the other: a plateau of two
            // equal maxima keeps exactly one pixel.
            if m > at(xi + dx, yi + dy) && m >= at(xi - dx, yi - dy) {
                class[i] = if m >= high { 2 } else { 1 };
            }
        }
    }

    let mut edges = vec![0u8; w * h];
    let mut queue: VecDeque<usize> = (0..w * h).filter(|&i| class[i] == 2).collect();
    for &i in &queue {
        edges[i] = 1;
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for ny in y - 1..=y + 1 {
            for nx in x - 1..=x + 1 {
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if edges[j] == 0 && class[j] == 1 {
                    edges[j] = 1;
                    queue.push_back(j);
                }
            }
        }
    }
    BinaryImage::new(w, h, edges)
}

/// Neighbour step along the gradient, quantized to 0°, 45°, 90° or 135°.
fn direction(gx: f64, gy: f64) -> (isize, isize) {
    let mut deg = gy.atan2(gx).to_degrees();
    if deg < 0.0 {
        deg += 180.0;
    }
    if !(22.5..157.5).contains(&deg) {
        (1, 0)
    } else if deg < 67.5 {
        (1, 1)
    } else if deg < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}
