use crate::imaging::{close, BinaryImage};

/// Outer boundary of one 8-connected component together with the region it
/// encloses (the component plus its holes).
#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    /// Boundary pixels in tracing order; consecutive entries, and the last
    /// and first, are 8-adjacent.
    pub boundary: Vec<(usize, usize)>,
    /// Enclosed pixels in raster order.
    pub region: Vec<(usize, usize)>,
}

impl Contour {
    /// Enclosed pixel count.
    pub fn area(&self) -> usize {
        self.region.len()
    }
}

/// Mean pixel coordinate of the enclosed region.
pub fn contour_center(c: &Contour) -> (f64, f64) {
    let n = c.region.len() as f64;
    let (sx, sy) = c
        .region
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x as f64, sy + y as f64));
    (sx / n, sy / n)
}

/// Closes `edges` with a square element of `close_radius` (0 skips closing),
/// labels 8-connected components and returns the contour enclosing the most
/// pixels. Ties go to the component whose first pixel comes first in raster
/// order.
pub fn largest_contour(edges: &BinaryImage, close_radius: usize) -> Option<Contour> {
    let closed = close(edges, close_radius);
    let (w, h) = (closed.width(), closed.height());
    let mut label = vec![0u32; w * h];
    let mut best: Option<(usize, u32, Bbox)> = None;
    let mut next = 0u32;
    let mut stack = Vec::new();

    for start in 0..w * h {
        if closed.data()[start] == 0 || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        stack.push(start);
        let mut bb = Bbox::at(start % w, start / w);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            bb.grow(x, y);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if closed.data()[j] != 0 && label[j] == 0 {
                        label[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
        // The enclosed area cannot exceed the bounding box.
        if best.as_ref().is_some_and(|(area, _, _)| bb.area() <= *area) {
            continue;
        }
        let area = enclosed(&label, w, next, &bb).len();
        if best.as_ref().is_none_or(|(a, _, _)| area > *a) {
            best = Some((area, next, bb));
        }
    }

    let (_, id, bb) = best?;
    let region = enclosed(&label, w, id, &bb);
    let first = region
        .iter()
        .copied()
        .find(|&(x, y)| label[y * w + x] == id)
        .expect("component has at least one pixel");
    let boundary = trace(first, |x, y| {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && label[y as usize * w + x as usize] == id
    });
    Some(Contour { boundary, region })
}

#[derive(Clone, Copy, Debug)]
struct Bbox {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

impl Bbox {
    fn at(x: usize, y: usize) -> Self {
        Self {
            x0: x,
            y0: y,
            x1: x,
            y1: y,
        }
    }

    fn grow(&mut self, x: usize, y: usize) {
        self.x0 = self.x0.min(x);
        self.y0 = self.y0.min(y);
        self.x1 = self.x1.max(x);
        self.y1 = self.y1.max(y);
    }

    fn area(&self) -> usize {
        (self.x1 - self.x0 + 1) * (self.y1 - self.y0 + 1)
    }
}

/// Pixels of component `id` plus everything it encloses: flood the
/// complement 4-connectedly from a one-pixel frame around the bounding box;
/// whatever the flood cannot reach is enclosed.
fn enclosed(label: &[u32], w: usize, id: u32, bb: &Bbox) -> Vec<(usize, usize)> {
    // Local grid with a one-pixel margin on every side.
    let lw = bb.x1 - bb.x0 + 3;
    let lh = bb.y1 - bb.y0 + 3;
    let is_member = |lx: usize, ly: usize| {
        if lx == 0 || ly == 0 || lx == lw - 1 || ly == lh - 1 {
            return false;
        }
        let (x, y) = (bb.x0 + lx - 1, bb.y0 + ly - 1);
        label[y * w + x] == id
    };
    let mut outside = vec![false; lw * lh];
    let mut stack = vec![0usize];
    outside[0] = true;
    while let Some(i) = stack.pop() {
        let (x, y) = (i % lw, i / lw);
        let mut visit = |nx: usize, ny: usize| {
            let j = ny * lw + nx;
            if !outside[j] && !is_member(nx, ny) {
                outside[j] = true;
                stack.push(j);
            }
        };
        if x > 0 {
            visit(x - 1, y);
        }
        if x + 1 < lw {
            visit(x + 1, y);
        }
        if y > 0 {
            visit(x, y - 1);
        }
        if y + 1 < lh {
            visit(x, y + 1);
        }
    }
    let mut region = Vec::new();
    for ly in 1..lh - 1 {
        for lx in 1..lw - 1 {
            if !outside[ly * lw + lx] {
                region.push((bb.x0 + lx - 1, bb.y0 + ly - 1));
            }
        }
    }
    region
}

/// Clockwise neighbour offsets starting west (y grows downwards).
const RING: [(isize, isize); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

fn ring_index(dx: isize, dy: isize) -> usize {
    RING.iter().position(|&d| d == (dx, dy)).expect("unit neighbour offset")
}

/// Moore-neighbour tracing of the outer boundary, starting from the
/// component's first pixel in raster order.
fn trace(start: (usize, usize), member: impl Fn(isize, isize) -> bool) -> Vec<(usize, usize)> {
    let s = (start.0 as isize, start.1 as isize);
    let mut out = vec![start];
    let mut cur = s;
    // Entered from the west: that neighbour is background for a raster-first pixel.
    let mut back = 0usize;
    let mut guard = 0usize;
    loop {
        let mut found = None;
        for k in 1..=8 {
            let d = (back + k) % 8;
            let p = (cur.0 + RING[d].0, cur.1 + RING[d].1);
            if member(p.0, p.1) {
                found = Some((p, d));
                break;
            }
        }
        let Some((p, d)) = found else {
            return out; // isolated pixel
        };
        let prev_checked = (cur.0 + RING[(d + 7) % 8].0, cur.1 + RING[(d + 7) % 8].1);
        back = ring_index(prev_checked.0 - p.0, prev_checked.1 - p.1);
        if cur == s && out.len() > 1 && (p.0 as usize, p.1 as usize) == out[1] {
            out.pop();
            return out;
        }
        out.push((p.0 as usize, p.1 as usize));
        cur = p;
        guard += 1;
        if guard > 1 << 24 {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rects(w: usize, h: usize, rs: &[(usize, usize, usize, usize)]) -> BinaryImage {
        BinaryImage::from_fn(w, h, |x, y| {
            rs.iter()
                .any(|&(x0, y0, rw, rh)| x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh)
        })
    }

    fn adjacent(a: (usize, usize), b: (usize, usize)) -> bool {
        let dx = a.0 as isize - b.0 as isize;
        let dy = a.1 as isize - b.1 as isize;
        dx.abs() <= 1 && dy.abs() <= 1
    }

    #[test]
    fn empty_map_has_no_contour() {
        assert!(largest_contour(&BinaryImage::zeros(10, 10), 2).is_none());
    }

    #[test]
    fn picks_larger_rectangle() {
        let img = rects(40, 30, &[(2, 2, 5, 5), (20, 10, 10, 10)]);
        let c = largest_contour(&img, 0).unwrap();
        assert_eq!(c.area(), 100);
        assert_eq!(contour_center(&c), (24.5, 14.5));
    }

    #[test]
    fn ring_encloses_its_interior() {
        // 1-px outline of a 12×8 box.
        let img = BinaryImage::from_fn(30, 30, |x, y| {
            let inx = (5..17).contains(&x);
            let iny = (5..13).contains(&y);
            inx && iny && (x == 5 || x == 16 || y == 5 || y == 12)
        });
        let c = largest_contour(&img, 0).unwrap();
        assert_eq!(c.area(), 96);
        assert_eq!(c.boundary.len(), 2 * 12 + 2 * 8 - 4);
    }

    #[test]
    fn boundary_is_closed_chain() {
        let img = rects(30, 30, &[(3, 4, 9, 6), (8, 9, 4, 12)]);
        let c = largest_contour(&img, 0).unwrap();
        assert!(!c.boundary.is_empty());
        for pair in c.boundary.windows(2) {
            assert!(adjacent(pair[0], pair[1]), "{pair:?}");
        }
        assert!(adjacent(c.boundary[0], *c.boundary.last().unwrap()));
        for &(x, y) in &c.boundary {
            assert!(img.get(x, y));
        }
    }

    #[test]
    fn single_pixel_contour() {
        let mut img = BinaryImage::zeros(12, 12);
        img.set(7, 9, true);
        let c = largest_contour(&img, 0).unwrap();
        assert_eq!(c.boundary, vec![(7, 9)]);
        assert_eq!(c.area(), 1);
        assert_eq!(contour_center(&c), (7.0, 9.0));
    }

    #[test]
    fn filled_square_center() {
        let img = rects(32, 32, &[(10, 10, 11, 11)]);
        let c = largest_contour(&img, 0).unwrap();
        assert_eq!(contour_center(&c), (15.0, 15.0));
    }

    #[test]
    fn equal_areas_prefer_raster_first() {
        let img = rects(40, 40, &[(25, 3, 4, 4), (2, 20, 4, 4), (10, 3, 4, 4)]);
        let c = largest_contour(&img, 0).unwrap();
        assert_eq!(c.region[0], (10, 3));
    }

    #[test]
    fn closing_bridges_gaps() {
        // Box outline with a 1-px break, closed by radius 1.
        let img = BinaryImage::from_fn(30, 30, |x, y| {
            let on = (5..17).contains(&x) && (5..13).contains(&y) && (x == 5 || x == 16 || y == 5 || y == 12);
            on && !(x == 10 && y == 5)
        });
        assert!(largest_contour(&img, 0).unwrap().area() < 50);
        assert!(largest_contour(&img, 1).unwrap().area() >= 96);
    }
}
