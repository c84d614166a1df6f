//! Canonical path representations on a window `[t_min, t_max]`.
//!
//! The canonical window is `[-T, 0]`: "now" sits at the right endpoint. A
//! path may carry a separate `present` value that differs from the limit of
//! the continuous part at 0, modelling bounded functions that are continuous
//! on `[-T, 0[` with a possible jump at 0. Outside the window paths are
//! extended constantly: by the left endpoint value to the left and by the
//! present value to the right.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite()) || t_min >= t_max {
            return Err(Error::invalid(format!(
                "grid endpoints must be finite with t_min < t_max (got {t_min}, {t_max})"
            )));
        }
        if n_points < 2 {
            return Err(Error::invalid("grid needs at least 2 points"));
        }
        Ok(Grid { t_min, t_max, n_points })
    }

    /// Canonical window `[-T, 0]`.
    pub fn window(horizon: f64, n_points: usize) -> Result<Self> {
        Grid::new(-horizon, 0.0, n_points)
    }

    /// Grid spacing Δ.
    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    /// Length of the window.
    pub fn length(&self) -> f64 {
        self.t_max - self.t_min
    }

    /// i-th grid point.
    pub fn point(&self, i: usize) -> f64 {
        self.t_min + self.spacing() * i as f64
    }

    /// All grid points.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }
}

/// A path sampled on a uniform grid, piecewise-linear between nodes, with an
/// optional separate present value (jump at the right endpoint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub present: Option<f64>,
}

impl SampledPath {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::invalid(format!(
                "value vector length {} does not match grid size {}",
                values.len(),
                grid.n_points
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("path values must be finite"));
        }
        Ok(SampledPath { grid, values, present: None })
    }

    /// Attach a (possibly jumping) present value.
    pub fn with_present(mut self, a: f64) -> Self {
        self.present = Some(a);
        self
    }

    /// Sample a closure on the grid.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().map(f).collect();
        SampledPath::new(grid, values)
    }

    /// Path value at `x` with the extension conventions: piecewise-linear on
    /// the window, constant (left endpoint value) left of it, and the present
    /// value at and right of the right endpoint.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::invalid("value_at query must be finite"));
        }
        Ok(self.value_at_unchecked(x))
    }

    #[inline]
    pub(crate) fn value_at_unchecked(&self, x: f64) -> f64 {
        if x >= self.grid.t_max {
            return self.present_value();
        }
        self.continuous_value(x)
    }

    /// Value of the continuous representative (ignores any jump at the right
    /// endpoint): piecewise-linear on the window, constant outside.
    #[inline]
    pub fn continuous_value(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g.t_min {
            return self.values[0];
        }
        if x >= g.t_max {
            return *self.values.last().unwrap();
        }
        let s = (x - g.t_min) / g.spacing();
        // Snap to nodes so that grid points evaluate exactly despite fp
        // rounding in the affine map above.
        let r = s.round();
        if (s - r).abs() < 1e-9 {
            return self.values[(r as usize).min(g.n_points - 1)];
        }
        let i = (s.floor() as usize).min(g.n_points - 2);
        let w = s - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// The present value: the stored jump value if set, else the right
    /// endpoint of the continuous part.
    #[inline]
    pub fn present_value(&self) -> f64 {
        self.present.unwrap_or_else(|| *self.values.last().unwrap())
    }

    /// Sup norm over the window (including the present value).
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .chain(self.present.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// The horizontally shifted path `x ↦ p(x - eps)` on the window interior,
    /// extended constantly by the left endpoint value; the present value is
    /// preserved.
    pub fn shift_past(&self, eps: f64) -> Result<SampledPath> {
        if !(eps >= 0.0) {
            return Err(Error::invalid("shift_past needs eps >= 0"));
        }
        let values: Vec<f64> =
            self.grid.points().map(|x| self.continuous_value(x - eps)).collect();
        Ok(SampledPath {
            grid: self.grid,
            values,
            present: Some(self.present_value()),
        })
    }

    /// Forward shift `x ↦ p(x + eps)` of the continuous part (diagnostic
    /// counterpart of [`SampledPath::shift_past`]); clamps at the right
    /// endpoint of the continuous representative.
    pub fn shift_future(&self, eps: f64) -> Result<SampledPath> {
        if !(eps >= 0.0) {
            return Err(Error::invalid("shift_future needs eps >= 0"));
        }
        let values: Vec<f64> =
            self.grid.points().map(|x| self.continuous_value(x + eps)).collect();
        Ok(SampledPath {
            grid: self.grid,
            values,
            present: Some(self.present_value()),
        })
    }

    /// Split into (past continuous part, present scalar).
    pub fn split(&self) -> (SampledPath, f64) {
        let past = SampledPath {
            grid: self.grid,
            values: self.values.clone(),
            present: None,
        };
        (past, self.present_value())
    }

    /// Reassemble a path from a past part and a present scalar.
    pub fn join(past: &SampledPath, a: f64) -> Result<SampledPath> {
        if past.present.is_some() {
            return Err(Error::invalid("join expects a past part without a present value"));
        }
        Ok(past.clone().with_present(a))
    }

    /// Load a two-column CSV (`x,value`, optional header) as a path; the x
    /// column must be uniformly spaced and increasing.
    pub fn from_csv(text: &str) -> Result<SampledPath> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let (c0, c1) = match (cols.next(), cols.next()) {
                (Some(a), Some(b)) => (a.trim(), b.trim()),
                _ => {
                    return Err(Error::Config(format!(
                        "csv line {}: expected two columns",
                        lineno + 1
                    )))
                }
            };
            match (c0.parse::<f64>(), c1.parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    vs.push(v);
                }
                _ if lineno == 0 => continue, // header row
                _ => {
                    return Err(Error::Config(format!(
                        "csv line {}: could not parse numbers",
                        lineno + 1
                    )))
                }
            }
        }
        if xs.len() < 2 {
            return Err(Error::Config("csv path needs at least two rows".into()));
        }
        let grid = Grid::new(xs[0], *xs.last().unwrap(), xs.len())?;
        let d = grid.spacing();
        for (i, w) in xs.windows(2).enumerate() {
            if ((w[1] - w[0]) - d).abs() > 1e-9 * d.max(1.0) {
                return Err(Error::Config(format!(
                    "csv x column not uniformly spaced near row {}",
                    i + 1
                )));
            }
        }
        SampledPath::new(grid, vs)
    }

    /// Serialize to a two-column CSV with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.grid.points().zip(&self.values) {
            out.push_str(&format!("{x:.17e},{v:.17e}\n"));
        }
        out
    }
}

/// A simulated trajectory on `[0, T']`, piecewise-linear, with constant
/// extension on both sides (`X_t = X_0` for `t ≤ 0`, `X_t = X_{T'}` for
/// `t ≥ T'`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::invalid("trajectory needs matching times/values of length >= 2"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("trajectory times must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("trajectory values must be finite"));
        }
        Ok(Trajectory { times, values })
    }

    /// Uniform-grid trajectory on `[0, horizon]`.
    pub fn uniform(horizon: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::invalid("trajectory needs at least 2 values"));
        }
        let times = (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect();
        Trajectory::new(times, values)
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Piecewise-linear value with two-sided constant extension.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.last_time() {
            return *self.values.last().unwrap();
        }
        // Fast path for uniform grids, bisection otherwise.
        let n = self.times.len();
        let d = (self.last_time() - self.times[0]) / (n - 1) as f64;
        let guess = ((t - self.times[0]) / d) as usize;
        let i = if guess + 1 < n && self.times[guess] <= t && t <= self.times[guess + 1] {
            guess
        } else {
            match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
                Ok(i) => return self.values[i],
                Err(i) => i - 1,
            }
        };
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// The window of length `horizon` ending at time `t`, sampled on `grid`
    /// (which must be a `[-horizon, 0]` grid): `x ↦ X_{t+x}` with the
    /// constant extension below time 0.
    pub fn window_at(&self, t: f64, horizon: f64, grid: Grid) -> Result<SampledPath> {
        if !(t >= 0.0) {
            return Err(Error::invalid("window_at needs t >= 0"));
        }
        if (grid.t_min + horizon).abs() > 1e-12 * horizon.max(1.0) || grid.t_max.abs() > 1e-12 {
            return Err(Error::invalid("window grid must span [-horizon, 0]"));
        }
        let values = grid.points().map(|x| self.value_at(t + x)).collect();
        SampledPath::new(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn identity_path() -> SampledPath {
        SampledPath::from_fn(Grid::window(1.0, 101).unwrap(), |x| x).unwrap()
    }

    #[test]
    fn value_at_interpolates_and_extends() {
        let p = identity_path();
        assert_relative_eq!(p.value_at(-0.5).unwrap(), -0.5, epsilon = 1e-14);
        // Off-grid point on a linear path is exact under linear interpolation.
        assert_relative_eq!(p.value_at(-0.123_456).unwrap(), -0.123_456, epsilon = 1e-14);
        // Left-constant extension.
        assert_relative_eq!(p.value_at(-2.0).unwrap(), -1.0, epsilon = 1e-14);
        // Right extension is the present value.
        assert_relative_eq!(p.value_at(0.7).unwrap(), 0.0, epsilon = 1e-14);
        assert!(p.value_at(f64::NAN).is_err());
    }

    #[test]
    fn present_jump_is_respected() {
        let p = identity_path().with_present(3.0);
        assert_relative_eq!(p.value_at(0.0).unwrap(), 3.0);
        // The continuous representative ignores the jump.
        assert_relative_eq!(p.continuous_value(0.0), 0.0);
        assert_relative_eq!(p.value_at(-0.25).unwrap(), -0.25, epsilon = 1e-14);
    }

    #[test]
    fn split_join_round_trip() {
        let p = identity_path().with_present(5.0);
        let (past, a) = p.split();
        assert_eq!(a, 5.0);
        let q = SampledPath::join(&past, a).unwrap();
        assert_eq!(p, q);

        // join(γ≡0, 5) is zero on the past with present 5.
        let zero = SampledPath::from_fn(p.grid, |_| 0.0).unwrap();
        let j = SampledPath::join(&zero, 5.0).unwrap();
        assert_eq!(j.present_value(), 5.0);
        assert_eq!(j.continuous_value(-0.3), 0.0);
    }

    #[test]
    fn shift_past_matches_pointwise_evaluation() {
        let p = identity_path();
        let s = p.shift_past(0.25).unwrap();
        for x in [-1.0_f64, -0.9, -0.5, -0.2, -0.01] {
            let expect = (x - 0.25).max(-1.0);
            assert_relative_eq!(s.continuous_value(x), expect, epsilon = 1e-13);
        }
        assert_eq!(s.present_value(), 0.0);

        // Identity shift and constant paths.
        let s0 = p.shift_past(0.0).unwrap();
        assert_eq!(s0.values, p.values);
        let c = SampledPath::from_fn(p.grid, |_| 2.5).unwrap();
        let sc = c.shift_past(0.7).unwrap();
        assert!(sc.values.iter().all(|&v| (v - 2.5).abs() < 1e-15));
        assert!(p.shift_past(-0.1).is_err());
    }

    #[test]
    fn shift_past_is_sup_norm_contraction() {
        let grid = Grid::window(1.0, 64).unwrap();
        let p = SampledPath::from_fn(grid, |x| (7.0 * x).sin() + 0.3 * x).unwrap();
        for eps in [0.0, 0.01, 0.3, 1.5] {
            assert!(p.shift_past(eps).unwrap().sup_norm() <= p.sup_norm() + 1e-15);
        }
    }

    #[test]
    fn window_extraction() {
        // tr(s) = s on [0,2].
        let tr = Trajectory::uniform(2.0, (0..=200).map(|i| i as f64 / 100.0).collect()).unwrap();
        let grid = Grid::window(1.0, 51).unwrap();

        let w1 = tr.window_at(1.0, 1.0, grid).unwrap();
        for x in [-1.0, -0.5, 0.0] {
            assert_relative_eq!(w1.value_at(x).unwrap(), 1.0 + x, epsilon = 1e-12);
        }

        // Window reaching below time 0 uses the constant extension.
        let w2 = tr.window_at(0.5, 1.0, grid).unwrap();
        for x in [-1.0, -0.75, -0.5, -0.2, 0.0] {
            assert_relative_eq!(w2.value_at(x).unwrap(), (0.5 + x).max(0.0), epsilon = 1e-12);
        }

        // Window at time 0 is constant at X_0.
        let w0 = tr.window_at(0.0, 1.0, grid).unwrap();
        assert!(w0.values.iter().all(|&v| v.abs() < 1e-15));

        // Right endpoint of a window equals the trajectory value.
        assert_relative_eq!(w1.value_at(0.0).unwrap(), tr.value_at(1.0), epsilon = 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let p = identity_path();
        let q = SampledPath::from_csv(&p.to_csv()).unwrap();
        assert_eq!(p.grid.n_points, q.grid.n_points);
        for (a, b) in p.values.iter().zip(&q.values) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
        assert!(SampledPath::from_csv("x,value\n0,1\n").is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 0.0, 10).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(f64::INFINITY, 1.0, 4).is_err());
        assert!(SampledPath::new(Grid::window(1.0, 4).unwrap(), vec![0.0; 3]).is_err());
    }
}
