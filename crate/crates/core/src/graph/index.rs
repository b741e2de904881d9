use super::VertexId;
use crate::geometry::{Point2, Rect};

/// Uniform bucket grid over the workspace bounds.
#[derive(Debug, Clone)]
pub(crate) struct GridIndex {
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<VertexId>>,
}

impl GridIndex {
    pub fn new(bounds: Rect, expected_points: usize) -> Self {
        let n = expected_points.max(16) as f64;
        let cell = (bounds.area() / n).sqrt() * 2.0;
        let nx = ((bounds.width() / cell).ceil() as usize).clamp(1, 4096);
        let ny = ((bounds.height() / cell).ceil() as usize).clamp(1, 4096);
        let cell = (bounds.width() / nx as f64).max(bounds.height() / ny as f64);
        Self { origin: bounds.min, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] }
    }

    fn cell_of(&self, p: Point2) -> (usize, usize) {
        let ix = ((p.x - self.origin.x) / self.cell).floor().max(0.0) as usize;
        let iy = ((p.y - self.origin.y) / self.cell).floor().max(0.0) as usize;
        (ix.min(self.nx - 1), iy.min(self.ny - 1))
    }

    pub fn insert(&mut self, p: Point2, id: VertexId) {
        let (ix, iy) = self.cell_of(p);
        self.buckets[iy * self.nx + ix].push(id);
    }

    /// Every id in cells overlapping the disk of radius `r` around `p`
    /// (a superset of the disk members), unsorted.
    pub fn candidates_within(&self, p: Point2, r: f64, out: &mut Vec<VertexId>) {
        let lo = self.cell_of(Point2::new(p.x - r, p.y - r));
        let hi = self.cell_of(Point2::new(p.x + r, p.y + r));
        for iy in lo.1..=hi.1 {
            for ix in lo.0..=hi.0 {
                out.extend_from_slice(&self.buckets[iy * self.nx + ix]);
            }
        }
    }

    /// Visits cells in rings of growing Chebyshev distance around `p`. The
    /// callback receives each id and returns the current best bound; the
    /// search stops once a ring cannot contain anything closer than it.
    pub fn ring_search(&self, p: Point2, mut visit: impl FnMut(VertexId) -> f64) {
        let (cx, cy) = self.cell_of(p);
        let max_ring = self.nx.max(self.ny);
        let mut best = f64::INFINITY;
        for ring in 0..=max_ring {
            if ring >= 1 && (ring as f64 - 1.0) * self.cell > best {
                break;
            }
            let (x0, x1) = (cx as i64 - ring as i64, cx as i64 + ring as i64);
            let (y0, y1) = (cy as i64 - ring as i64, cy as i64 + ring as i64);
            for iy in y0..=y1 {
                if iy < 0 || iy >= self.ny as i64 {
                    continue;
                }
                for ix in x0..=x1 {
                    if ix < 0 || ix >= self.nx as i64 {
                        continue;
                    }
                    if iy != y0 && iy != y1 && ix != x0 && ix != x1 {
                        continue;
                    }
                    for &id in &self.buckets[iy as usize * self.nx + ix as usize] {
                        best = best.min(visit(id));
                    }
                }
            }
        }
    }
}
