//! Frequency-domain demonstration clean-up filters.
//!
//! Each Cartesian column is transformed with a 1-D DFT, modified, and
//! transformed back. Three variants:
//!
//! - scale: divide every bin of a column by that column's maximum bin
//!   magnitude (suppresses broadband noise, shrinks the signal);
//! - gain control: divide bins whose magnitude is at most gamma by gamma
//!   (attenuates low-amplitude noise bins, keeps dominant shape bins);
//! - back-stitched gain control: close an open curve by appending its
//!   reversal, gain-filter the doubled sequence, keep the first half.
//!
//! Filtering can drift the endpoints, which downstream imitation needs
//! pinned, so the pipeline re-anchors outputs to the input endpoints via a
//! linear ramp correction by default.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::trajectory::CartesianPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Scale,
    GainControl,
    BackstitchGainControl,
}

impl FilterKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "scale" => Ok(FilterKind::Scale),
            "gain" => Ok(FilterKind::GainControl),
            "backstitch" => Ok(FilterKind::BackstitchGainControl),
            other => Err(Error::Config(format!(
                "unknown filter {other:?}; expected scale, gain or backstitch"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Gain threshold; bins with magnitude <= gamma are divided by gamma.
    pub gamma: f64,
    /// Restore the input endpoints with a linear ramp correction.
    pub anchor: bool,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            kind: FilterKind::GainControl,
            gamma: 20.0,
            anchor: true,
        }
    }
}

fn column_spectrum(path: &CartesianPath, axis: usize) -> Vec<Complex64> {
    let col: Vec<f64> = (0..path.len()).map(|i| path.points()[(i, axis)]).collect();
    fft::forward_real(&col)
}

/// Inverse-transforms three per-column spectra back to a path, checking that
/// the imaginary residue of the real-signal round trip stays below 1e-9.
fn inverse_columns(spectra: [Vec<Complex64>; 3]) -> Result<CartesianPath> {
    let n = spectra[0].len();
    let mut m = DMatrix::zeros(n, 3);
    for (axis, spec) in spectra.iter().enumerate() {
        let time = fft::inverse(spec);
        for (i, v) in time.iter().enumerate() {
            if v.im.abs() >= 1e-9 {
                return Err(Error::Numeric(format!(
                    "imaginary residue {:.3e} after inverse transform",
                    v.im
                )));
            }
            m[(i, axis)] = v.re;
        }
    }
    CartesianPath::new(m)
}

/// Full-spectrum scaling: every bin of column k is divided by max |F_k|.
pub fn filter_scale(path: &CartesianPath) -> Result<CartesianPath> {
    if path.is_empty() {
        return Err(Error::InvalidSize("cannot filter an empty path".into()));
    }
    let mut spectra = [
        column_spectrum(path, 0),
        column_spectrum(path, 1),
        column_spectrum(path, 2),
    ];
    for spec in spectra.iter_mut() {
        let max = spec.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if max == 0.0 {
            return Err(Error::DegenerateInput(
                "column spectrum is identically zero".into(),
            ));
        }
        for bin in spec.iter_mut() {
            *bin /= max;
        }
    }
    inverse_columns(spectra)
}

/// Gain control: bins with magnitude <= gamma are divided by gamma.
pub fn filter_gain(path: &CartesianPath, gamma: f64) -> Result<CartesianPath> {
    if path.is_empty() {
        return Err(Error::InvalidSize("cannot filter an empty path".into()));
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Config(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let mut spectra = [
        column_spectrum(path, 0),
        column_spectrum(path, 1),
        column_spectrum(path, 2),
    ];
    for spec in spectra.iter_mut() {
        for bin in spec.iter_mut() {
            if bin.norm() <= gamma {
                *bin /= gamma;
            }
        }
    }
    inverse_columns(spectra)
}

/// Back-stitched gain control for non-closed curves: the path is doubled
/// with its own reversal so the sequence closes smoothly, the doubled curve
/// is gain-filtered, and the first half is kept so the output length equals
/// the input length.
pub fn filter_backstitch(path: &CartesianPath, gamma: f64) -> Result<CartesianPath> {
    if path.len() < 2 {
        return Err(Error::InvalidSize(
            "back-stitching needs at least 2 points".into(),
        ));
    }
    let n = path.len();
    let mut doubled = DMatrix::zeros(2 * n, 3);
    for i in 0..n {
        for c in 0..3 {
            doubled[(i, c)] = path.points()[(i, c)];
            doubled[(n + i, c)] = path.points()[(n - 1 - i, c)];
        }
    }
    let filtered = filter_gain(&CartesianPath::new(doubled)?, gamma)?;
    let mut out = DMatrix::zeros(n, 3);
    out.copy_from(&filtered.points().view((0, 0), (n, 3)));
    CartesianPath::new(out)
}

/// Restores the original endpoints: the filtered path is shifted by the
/// linear interpolation of its endpoint drift so the first and last rows
/// match `original` exactly.
pub fn anchor_endpoints(
    filtered: &CartesianPath,
    original: &CartesianPath,
) -> Result<CartesianPath> {
    if filtered.len() != original.len() {
        return Err(Error::DimensionMismatch(format!(
            "anchoring needs equal lengths, got {} and {}",
            filtered.len(),
            original.len()
        )));
    }
    let n = filtered.len();
    if n == 0 {
        return Err(Error::InvalidSize("cannot anchor an empty path".into()));
    }
    let mut m = filtered.points().clone();
    let start_drift = [
        filtered.points()[(0, 0)] - original.points()[(0, 0)],
        filtered.points()[(0, 1)] - original.points()[(0, 1)],
        filtered.points()[(0, 2)] - original.points()[(0, 2)],
    ];
    let end_drift = [
        filtered.points()[(n - 1, 0)] - original.points()[(n - 1, 0)],
        filtered.points()[(n - 1, 1)] - original.points()[(n - 1, 1)],
        filtered.points()[(n - 1, 2)] - original.points()[(n - 1, 2)],
    ];
    for i in 0..n {
        let t = if n == 1 {
            0.0
        } else {
            i as f64 / (n - 1) as f64
        };
        for c in 0..3 {
            m[(i, c)] -= (1.0 - t) * start_drift[c] + t * end_drift[c];
        }
    }
    // pin the endpoint rows exactly
    for c in 0..3 {
        m[(0, c)] = original.points()[(0, c)];
        m[(n - 1, c)] = original.points()[(n - 1, c)];
    }
    CartesianPath::new(m)
}

/// Applies the selected filter, re-anchoring endpoints unless disabled.
pub fn apply_filter(path: &CartesianPath, spec: &FilterSpec) -> Result<CartesianPath> {
    let filtered = match spec.kind {
        FilterKind::Scale => filter_scale(path)?,
        FilterKind::GainControl => filter_gain(path, spec.gamma)?,
        FilterKind::BackstitchGainControl => filter_backstitch(path, spec.gamma)?,
    };
    if spec.anchor {
        anchor_endpoints(&filtered, path)
    } else {
        Ok(filtered)
    }
}
