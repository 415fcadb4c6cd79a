//! PPM (P6) rendering of coverage grids.
//!
//! A value v maps linearly to t = (v − min)/(max − min), clamped to [0, 1],
//! and t is interpolated piecewise-linearly between the palette's evenly
//! spaced stops; channels are rounded to the nearest integer. Cells without
//! coverage are black. Row 0 of the image is the grid's top row (largest
//! cell_y).

use super::CoverageGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Palette {
    Viridis,
    Gray,
}

impl Palette {
    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "viridis" => Some(Palette::Viridis),
            "gray" | "grey" => Some(Palette::Gray),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Palette::Viridis => "viridis",
            Palette::Gray => "gray",
        }
    }

    fn stops(self) -> &'static [[u8; 3]] {
        match self {
            Palette::Viridis => &[
                [68, 1, 84],
                [72, 40, 120],
                [62, 73, 137],
                [49, 104, 142],
                [38, 130, 142],
                [31, 158, 137],
                [53, 183, 121],
                [110, 206, 88],
                [181, 222, 43],
                [253, 231, 37],
            ],
            Palette::Gray => &[[0, 0, 0], [255, 255, 255]],
        }
    }

    /// Colour for t ∈ [0, 1].
    pub fn color(self, t: f64) -> [u8; 3] {
        let stops = self.stops();
        let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
        let x = t * (stops.len() - 1) as f64;
        let i = (x.floor() as usize).min(stops.len() - 2);
        let f = x - i as f64;
        let mut out = [0u8; 3];
        for c in 0..3 {
            let a = stops[i][c] as f64;
            let b = stops[i + 1][c] as f64;
            out[c] = (a + (b - a) * f).round() as u8;
        }
        out
    }
}

/// Renders the grid as a binary PPM. Requires `db_range.0 < db_range.1`;
/// an inverted or empty range renders every covered cell at the low colour.
pub fn rasterize(grid: &CoverageGrid, palette: Palette, db_range: (f64, f64)) -> Vec<u8> {
    let (lo, hi) = db_range;
    let mut out = format!("P6\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    out.reserve(grid.nx * grid.ny * 3);
    for row in 0..grid.ny {
        let iy = grid.ny - 1 - row;
        for ix in 0..grid.nx {
            let rgb = match grid.get(ix, iy) {
                None => [0, 0, 0],
                Some(v) => {
                    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
                    palette.color(t)
                }
            };
            out.extend_from_slice(&rgb);
        }
    }
    out
}
