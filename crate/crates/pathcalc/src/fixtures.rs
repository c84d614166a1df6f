//! Named path fixtures used by tests, property checks, and config files.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::paths::{Grid, SampledPath};

/// Constant path.
pub fn constant(grid: Grid, c: f64) -> SampledPath {
    SampledPath::from_fn(grid, |_| c).expect("constant path construction cannot fail")
}

/// Linear path `x ↦ intercept + slope·x`.
pub fn linear(grid: Grid, slope: f64, intercept: f64) -> SampledPath {
    SampledPath::from_fn(grid, |x| intercept + slope * x).expect("finite values")
}

/// Sine path `x ↦ amp·sin(freq·x)`.
pub fn sine(grid: Grid, freq: f64, amp: f64) -> SampledPath {
    SampledPath::from_fn(grid, |x| amp * (freq * x).sin()).expect("finite values")
}

/// A Brownian sample path on the grid, started at 0 at the left endpoint,
/// deterministic in the seed.
pub fn brownian(grid: Grid, seed: u64) -> SampledPath {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let sd = grid.spacing().sqrt();
    let mut values = Vec::with_capacity(grid.n_points);
    let mut w = 0.0;
    values.push(w);
    for _ in 1..grid.n_points {
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
        values.push(w);
    }
    SampledPath::new(grid, values).expect("brownian values are finite")
}

/// Resolve a fixture by name: `constant`, `constant(c)`, `linear`,
/// `linear(slope,intercept)`, `sine`, `sine(freq,amp)`, `brownian(seed)`.
pub fn by_name(name: &str, grid: Grid) -> Result<SampledPath> {
    let name = name.trim();
    let (head, args) = match name.find('(') {
        Some(i) if name.ends_with(')') => {
            let inner = &name[i + 1..name.len() - 1];
            let args: Vec<f64> = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Config(format!("bad fixture argument in `{name}`")))
                    })
                    .collect::<Result<_>>()?
            };
            (&name[..i], args)
        }
        Some(_) => return Err(Error::Config(format!("unbalanced parentheses in `{name}`"))),
        None => (name, Vec::new()),
    };
    match head {
        "constant" => Ok(constant(grid, args.first().copied().unwrap_or(1.0))),
        "linear" => Ok(linear(
            grid,
            args.first().copied().unwrap_or(1.0),
            args.get(1).copied().unwrap_or(0.0),
        )),
        "sine" => Ok(sine(
            grid,
            args.first().copied().unwrap_or(std::f64::consts::PI),
            args.get(1).copied().unwrap_or(1.0),
        )),
        "brownian" => Ok(brownian(grid, args.first().copied().unwrap_or(0.0) as u64)),
        _ => Err(Error::Config(format!("unknown fixture `{head}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_fixtures_parse() {
        let grid = Grid::window(1.0, 33).unwrap();
        assert_eq!(by_name("constant(2.5)", grid).unwrap().values[0], 2.5);
        let lin = by_name("linear(2, 1)", grid).unwrap();
        assert!((lin.continuous_value(-0.5) - 0.0).abs() < 1e-12);
        assert!(by_name("sine", grid).is_ok());
        assert!(by_name("brownian(7)", grid).is_ok());
        assert!(by_name("unknown", grid).is_err());
        assert!(by_name("sine(a)", grid).is_err());
    }

    #[test]
    fn brownian_is_seed_deterministic() {
        let grid = Grid::window(1.0, 129).unwrap();
        let a = brownian(grid, 42);
        let b = brownian(grid, 42);
        let c = brownian(grid, 43);
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }
}
