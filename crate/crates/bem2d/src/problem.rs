//! Scattering problems and their boundary data.
//!
//! Both integral equations take a right-hand side sampled pointwise on the
//! curve.  The stock data come from an incident plane wave
//! `exp(i k d . x)`: the sound-soft (Dirichlet) datum is its negated trace,
//! the sound-hard (Neumann) datum its negated normal derivative.  Custom
//! data can be supplied as a closure of the point and the unit normal.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Error;
use crate::geometry::Point2;

/// Which integral equation is being solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquationKind {
    /// Single-layer equation on piecewise constants (Dirichlet problem).
    WeaklySingular,
    /// Hypersingular equation on nodal linears (Neumann problem).
    Hypersingular,
}

/// Boundary datum as a function of point and unit normal.
pub type DataFn = Arc<dyn Fn(Point2, Point2) -> Complex64 + Send + Sync>;

/// A concrete problem instance: equation, wave number and datum.
#[derive(Clone)]
pub struct Problem {
    pub equation: EquationKind,
    pub k: f64,
    pub data: DataFn,
}

fn unit_direction(direction: (f64, f64)) -> Result<Point2, Error> {
    let d = Point2::new(direction.0, direction.1);
    let n = d.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidParameter(
            "plane-wave direction must be a nonzero finite vector".into(),
        ));
    }
    Ok(d * (1.0 / n))
}

fn check_k(k: f64) -> Result<(), Error> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "wave number must be finite and nonnegative, got {k}"
        )));
    }
    Ok(())
}

impl Problem {
    /// Sound-soft scattering: solve the single-layer equation with datum
    /// `-exp(i k d . x)` (which degenerates to the constant `-1` at `k = 0`).
    pub fn sound_soft_plane_wave(k: f64, direction: (f64, f64)) -> Result<Problem, Error> {
        check_k(k)?;
        let d = unit_direction(direction)?;
        let data: DataFn = Arc::new(move |x: Point2, _n: Point2| {
            -(Complex64::new(0.0, k * d.dot(x))).exp()
        });
        Ok(Problem {
            equation: EquationKind::WeaklySingular,
            k,
            data,
        })
    }

    /// Sound-hard scattering: solve the hypersingular equation with datum
    /// `-i k (d . n) exp(i k d . x)`.
    pub fn sound_hard_plane_wave(k: f64, direction: (f64, f64)) -> Result<Problem, Error> {
        check_k(k)?;
        let d = unit_direction(direction)?;
        let data: DataFn = Arc::new(move |x: Point2, n: Point2| {
            let phase = (Complex64::new(0.0, k * d.dot(x))).exp();
            -Complex64::new(0.0, k * d.dot(n)) * phase
        });
        Ok(Problem {
            equation: EquationKind::Hypersingular,
            k,
            data,
        })
    }

    /// A problem with a caller-supplied datum.
    pub fn custom(equation: EquationKind, k: f64, data: DataFn) -> Result<Problem, Error> {
        check_k(k)?;
        Ok(Problem { equation, k, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sound_soft_datum_values() {
        let p = Problem::sound_soft_plane_wave(2.0, (1.0, 0.0)).unwrap();
        let x = Point2::new(0.25, 0.0);
        let got = (p.data)(x, Point2::new(0.0, 1.0));
        // -exp(i * 2 * 0.25) = -(cos 0.5 + i sin 0.5)
        assert_relative_eq!(got.re, -(0.5f64.cos()), max_relative = 1e-15);
        assert_relative_eq!(got.im, -(0.5f64.sin()), max_relative = 1e-15);
    }

    #[test]
    fn sound_soft_zero_k_is_minus_one() {
        let p = Problem::sound_soft_plane_wave(0.0, (-1.0, 1.0)).unwrap();
        let got = (p.data)(Point2::new(0.3, -0.1), Point2::new(1.0, 0.0));
        assert_relative_eq!(got.re, -1.0, max_relative = 1e-15);
        assert_eq!(got.im, 0.0);
    }

    #[test]
    fn sound_hard_datum_values() {
        let p = Problem::sound_hard_plane_wave(1.0, (0.0, 1.0)).unwrap();
        let x = Point2::new(0.0, 0.5);
        let n = Point2::new(0.0, 1.0);
        let got = (p.data)(x, n);
        // -i * 1 * 1 * exp(i 0.5)
        let want = -Complex64::new(0.0, 1.0) * Complex64::new(0.0, 0.5).exp();
        assert_relative_eq!(got.re, want.re, max_relative = 1e-15);
        assert_relative_eq!(got.im, want.im, max_relative = 1e-15);
    }

    #[test]
    fn direction_is_normalized() {
        let p = Problem::sound_soft_plane_wave(1.0, (3.0, 4.0)).unwrap();
        let q = Problem::sound_soft_plane_wave(1.0, (0.6, 0.8)).unwrap();
        let x = Point2::new(0.1, 0.2);
        let n = Point2::new(1.0, 0.0);
        let a = (p.data)(x, n);
        let b = (q.data)(x, n);
        assert_relative_eq!(a.re, b.re, max_relative = 1e-15);
        assert_relative_eq!(a.im, b.im, max_relative = 1e-15);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(Problem::sound_soft_plane_wave(-1.0, (1.0, 0.0)).is_err());
        assert!(Problem::sound_soft_plane_wave(1.0, (0.0, 0.0)).is_err());
        assert!(Problem::sound_hard_plane_wave(f64::NAN, (1.0, 0.0)).is_err());
    }
}
