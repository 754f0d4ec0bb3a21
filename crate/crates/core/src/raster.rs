//! Derivative-magnitude rasters over the unit square.
//!
//! Cell `(i, j)` is sampled at its center `((i+½)/res, (j+½)/res)`, with `i`
//! along x and `j` along y, and stored row-major by `j`. A cell's class is the
//! number of thresholds its magnitude exceeds. Cells where the derivative is
//! singular hold `+∞` and take the top class.

use alloc::format;
use alloc::vec::Vec;

use crate::sensitivity::{bt_partial, pl_partials, PlConstants};
use crate::{Error, Result};

pub const DEFAULT_THRESHOLDS: [f64; 5] = [1.01, 2.0, 3.0, 5.0, 10.0];
pub const DEFAULT_RESOLUTION: usize = 512;
pub const MIN_RESOLUTION: usize = 64;

/// Which partial derivative of the Bradley-Terry composition to sample.
/// Axes are `x = p_ik`, `y = p_kj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtDerivative {
    Pik,
    Pkj,
}

/// Which partial derivative of the Plackett-Luce probability to sample.
/// Axes are `x = p_uv`, `y = p_vu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlDerivative {
    Uv,
    Vu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    resolution: usize,
    values: Vec<f64>,
    thresholds: Vec<f64>,
    classes: Vec<usize>,
}

impl RasterGrid {
    /// Classifies precomputed magnitudes. `values` is row-major with
    /// `resolution²` non-negative entries; `thresholds` must be strictly
    /// increasing and positive.
    pub fn from_values(resolution: usize, values: Vec<f64>, thresholds: Vec<f64>) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::validation("resolution must be positive"));
        }
        if values.len() != resolution * resolution {
            return Err(Error::validation(format!(
                "expected {} values, got {}",
                resolution * resolution,
                values.len()
            )));
        }
        check_thresholds(&thresholds)?;
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::validation(format!("magnitude {v} is not a non-negative number")));
        }
        let classes = values.iter().map(|&v| classify(v, &thresholds)).collect();
        Ok(RasterGrid { resolution, values, thresholds, classes })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.resolution + i]
    }

    pub fn class(&self, i: usize, j: usize) -> usize {
        self.classes[j * self.resolution + i]
    }

    pub fn is_singular(&self, i: usize, j: usize) -> bool {
        self.value(i, j).is_infinite()
    }

    /// Coordinate of the center of cell index `i` on either axis.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.resolution as f64
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    /// Cells in output order: `(x, y, value, class)` row by row.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64, usize)> + '_ {
        let res = self.resolution;
        (0..res * res).map(move |k| {
            let (i, j) = (k % res, k / res);
            (self.center(i), self.center(j), self.values[k], self.classes[k])
        })
    }
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::validation("at least one threshold is required"));
    }
    if thresholds.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::validation("thresholds must be positive and finite"));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation("thresholds must be strictly increasing"));
    }
    Ok(())
}

/// Number of thresholds strictly below `value`.
pub fn classify(value: f64, thresholds: &[f64]) -> usize {
    thresholds.iter().take_while(|&&t| value > t).count()
}

fn rasterize<F>(thresholds: &[f64], resolution: usize, f: F) -> Result<RasterGrid>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    if resolution < MIN_RESOLUTION {
        return Err(Error::validation(format!(
            "resolution {resolution} is below the minimum of {MIN_RESOLUTION}"
        )));
    }
    let mut values = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        let y = (j as f64 + 0.5) / resolution as f64;
        for i in 0..resolution {
            let x = (i as f64 + 0.5) / resolution as f64;
            values.push(match f(x, y) {
                Ok(d) => d.abs(),
                Err(Error::Singularity { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            });
        }
    }
    RasterGrid::from_values(resolution, values, thresholds.to_vec())
}

pub fn raster_bt(which: BtDerivative, thresholds: &[f64], resolution: usize) -> Result<RasterGrid> {
    rasterize(thresholds, resolution, |x, y| match which {
        BtDerivative::Pik => bt_partial(x, y),
        BtDerivative::Pkj => bt_partial(y, x),
    })
}

pub fn raster_pl(
    which: PlDerivative,
    constants: &PlConstants,
    thresholds: &[f64],
    resolution: usize,
) -> Result<RasterGrid> {
    rasterize(thresholds, resolution, |x, y| {
        let (first, second) = pl_partials(x, y, constants)?;
        Ok(match which {
            PlDerivative::Uv => first,
            PlDerivative::Vu => second,
        })
    })
}
