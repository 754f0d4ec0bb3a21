//! Marching-squares iso-contours.
//!
//! The field is sampled on grid nodes `(i, j)`, `i < width`, `j < height`,
//! stored row-major by `j`. Each crossing point sits on a grid edge, so
//! segments are stitched by edge identity rather than by comparing floats.
//! When every boundary node is at or below the level, every contour is a
//! closed loop enclosing the region where the field exceeds the level.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// A grid edge: `(horizontal, i, j)` names the edge from node `(i, j)` to
/// `(i+1, j)` when horizontal, to `(i, j+1)` otherwise.
type EdgeKey = (bool, usize, usize);

/// Polyline in grid coordinates. Closed loops repeat their first point at the
/// end.
pub type Polyline = Vec<(f64, f64)>;

pub fn contour(field: &[f64], width: usize, height: usize, level: f64) -> Vec<Polyline> {
    assert_eq!(field.len(), width * height, "field size does not match its shape");
    let at = |i: usize, j: usize| field[j * width + i];
    let above = |i: usize, j: usize| at(i, j) > level;

    let point = |e: EdgeKey| -> (f64, f64) {
        let (h, i, j) = e;
        let (i2, j2) = if h { (i + 1, j) } else { (i, j + 1) };
        let (a, b) = (at(i, j), at(i2, j2));
        let t = if a == b { 0.5 } else { ((level - a) / (b - a)).clamp(0.0, 1.0) };
        let t = if t.is_nan() { 0.5 } else { t };
        (i as f64 + t * (i2 - i) as f64, j as f64 + t * (j2 - j) as f64)
    };

    // adjacency between crossed edges, two neighbours per edge at most
    let mut links: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    let mut link = |a: EdgeKey, b: EdgeKey| {
        links.entry(a).or_default().push(b);
        links.entry(b).or_default().push(a);
    };

    for j in 0..height.saturating_sub(1) {
        for i in 0..width.saturating_sub(1) {
            let bottom = (true, i, j);
            let top = (true, i, j + 1);
            let left = (false, i, j);
            let right = (false, i + 1, j);
            let code = (above(i, j) as u8)
                | (above(i + 1, j) as u8) << 1
                | (above(i + 1, j + 1) as u8) << 2
                | (above(i, j + 1) as u8) << 3;
            match code {
                0 | 15 => {}
                1 | 14 => link(left, bottom),
                2 | 13 => link(bottom, right),
                3 | 12 => link(left, right),
                4 | 11 => link(right, top),
                6 | 9 => link(bottom, top),
                7 | 8 => link(left, top),
                5 | 10 => {
                    let center = 0.25 * (at(i, j) + at(i + 1, j) + at(i + 1, j + 1) + at(i, j + 1));
                    // keep the diagonal of the corners that agree with the center
                    let joined = (center > level) == (code == 5);
                    if joined {
                        link(left, top);
                        link(bottom, right);
                    } else {
                        link(left, bottom);
                        link(right, top);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let mut visited: BTreeMap<EdgeKey, ()> = BTreeMap::new();
    let mut lines = Vec::new();
    // open chains first, starting at their degree-one ends
    let mut starts: Vec<EdgeKey> = links.iter().filter(|(_, n)| n.len() == 1).map(|(k, _)| *k).collect();
    starts.extend(links.keys().copied());
    for start in starts {
        if visited.contains_key(&start) {
            continue;
        }
        let mut line = Vec::new();
        let mut prev: Option<EdgeKey> = None;
        let mut cur = start;
        loop {
            visited.insert(cur, ());
            line.push(point(cur));
            let next = links[&cur]
                .iter()
                .copied()
                .find(|n| Some(*n) != prev && !visited.contains_key(n));
            match next {
                Some(n) => {
                    prev = Some(cur);
                    cur = n;
                }
                None => {
                    if links[&cur].contains(&start) && line.len() > 2 {
                        line.push(point(start));
                    }
                    break;
                }
            }
        }
        lines.push(line);
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn is_closed(l: &Polyline) -> bool {
        l.len() > 3 && l.first() == l.last()
    }

    #[test]
    fn single_peak_gives_one_loop() {
        let mut f = vec![0.0; 25];
        f[12] = 1.0;
        let lines = contour(&f, 5, 5, 0.5);
        assert_eq!(lines.len(), 1);
        assert!(is_closed(&lines[0]));
        assert_eq!(lines[0].len(), 5);
        for &(x, y) in &lines[0] {
            assert!(((x - 2.0).abs() - 0.5).abs() < 1e-12 || ((y - 2.0).abs() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_contour_tracks_circle() {
        let n = 41;
        let f: Vec<f64> = (0..n * n)
            .map(|k| {
                let (x, y) = ((k % n) as f64 - 20.0, (k / n) as f64 - 20.0);
                (-(x * x + y * y) / 200.0f64).exp()
            })
            .collect();
        let level = (-0.5f64).exp(); // radius 10
        let lines = contour(&f, n, n, level);
        assert_eq!(lines.len(), 1);
        assert!(is_closed(&lines[0]));
        for &(x, y) in &lines[0] {
            let r = ((x - 20.0).powi(2) + (y - 20.0).powi(2)).sqrt();
            assert!((r - 10.0).abs() < 0.1, "r = {r}");
        }
    }

    #[test]
    fn separate_blobs_and_saddle() {
        let f = vec![
            0.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 0.0,
        ];
        let lines = contour(&f, 4, 4, 0.6);
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().all(is_closed));
        let lines = contour(&f, 4, 4, 0.2);
        assert_eq!(lines.len(), 1);
        assert!(is_closed(&lines[0]));
    }

    #[test]
    fn empty_and_open_cases() {
        assert!(contour(&[0.0; 9], 3, 3, 0.5).is_empty());
        let f = [1.0, 1.0, 0.0, 0.0];
        let lines = contour(&f, 2, 2, 0.5);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 2);
    }
}
