//! Bessel functions of order zero and one, and the 2D Helmholtz kernel.
//!
//! The solver needs `J0`, `Y0`, `J1`, `Y1` on the positive axis, the
//! fundamental solution built from them, and a split of the kernel into a
//! logarithmic part and a smooth remainder (the quadrature plans integrate
//! the two parts with different rules).  Everything here is self-contained:
//! truncated ascending series below `x = 13` and Hankel asymptotic
//! expansions beyond.  The switch point is where the optimal truncation
//! error of the asymptotic series (roughly `exp(-2x)`) drops below the
//! round-off floor of the alternating ascending series; both sides agree to
//! about `1e-12` absolute there.  Coefficients follow the classical
//! recurrences, so no tabulated constants are needed.

use num_complex::Complex64;

use crate::error::Error;

const EULER_GAMMA: f64 = 0.5772156649015328606;
const SERIES_ASYMPTOTIC_SWITCH: f64 = 13.0;
const FRAC_1_2PI: f64 = 1.0 / (2.0 * std::f64::consts::PI);

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_ASYMPTOTIC_SWITCH {
        j0_series(x)
    } else {
        asymptotic(0, x).0
    }
}

/// Bessel function of the second kind, order zero (`x > 0`).
pub fn bessel_y0(x: f64) -> f64 {
    debug_assert!(x > 0.0, "Y0 needs a positive argument");
    if x <= SERIES_ASYMPTOTIC_SWITCH {
        let j0 = j0_series(x);
        2.0 / std::f64::consts::PI * (((x / 2.0).ln() + EULER_GAMMA) * j0) + y0_entire_series(x)
    } else {
        asymptotic(0, x).1
    }
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_ASYMPTOTIC_SWITCH {
        j1_series(ax)
    } else {
        asymptotic(1, ax).0
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Bessel function of the second kind, order one (`x > 0`).
pub fn bessel_y1(x: f64) -> f64 {
    debug_assert!(x > 0.0, "Y1 needs a positive argument");
    if x <= SERIES_ASYMPTOTIC_SWITCH {
        let j1 = j1_series(x);
        let mut sum = 0.0;
        let mut term = 1.0f64; // (x^2/4)^m / (m! (m+1)!)
        let q = x * x / 4.0;
        let mut h_m = 0.0; // H_m
        let mut h_m1 = 1.0; // H_{m+1}
        let mut m = 0u32;
        loop {
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            let contrib = sign * (h_m + h_m1) * term;
            sum += contrib;
            m += 1;
            term *= q / (m as f64 * (m as f64 + 1.0));
            h_m += 1.0 / m as f64;
            h_m1 += 1.0 / (m as f64 + 1.0);
            if term * (h_m + h_m1) < 1e-18 * sum.abs().max(1.0) || m > 60 {
                break;
            }
        }
        2.0 / std::f64::consts::PI * (((x / 2.0).ln() + EULER_GAMMA) * j1)
            - 2.0 / (std::f64::consts::PI * x)
            - x / (2.0 * std::f64::consts::PI) * sum
    } else {
        asymptotic(1, x).1
    }
}

/// Entire part of `Y0`: `Y0(x) - (2/pi)(ln(x/2) + gamma) J0(x)`.
///
/// This is the piece of the kernel that stays analytic through `x = 0`; the
/// kernel splitting evaluates it directly to avoid the cancellation of
/// forming the difference at small arguments.
pub fn y0_entire_part(x: f64) -> f64 {
    if x <= SERIES_ASYMPTOTIC_SWITCH {
        y0_entire_series(x)
    } else {
        bessel_y0(x) - 2.0 / std::f64::consts::PI * (((x / 2.0).ln() + EULER_GAMMA) * bessel_j0(x))
    }
}

fn j0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut sum = 1.0;
    let mut term = 1.0f64;
    let mut m = 0u32;
    loop {
        m += 1;
        term *= -q / ((m as f64) * (m as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1.0) || m > 60 {
            return sum;
        }
    }
}

fn j1_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut sum = 1.0;
    let mut term = 1.0f64; // (x^2/4)^m / (m! (m+1)!)
    let mut m = 0u32;
    loop {
        m += 1;
        term *= -q / (m as f64 * (m as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1.0) || m > 60 {
            return x / 2.0 * sum;
        }
    }
}

/// `(2/pi) * sum_{m>=1} (-1)^{m+1} H_m (x^2/4)^m / (m!)^2`.
fn y0_entire_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut sum = 0.0;
    let mut term = 1.0f64; // (x^2/4)^m / (m!)^2
    let mut h = 0.0f64;
    let mut m = 0u32;
    loop {
        m += 1;
        term *= q / ((m as f64) * (m as f64));
        h += 1.0 / m as f64;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * h * term;
        if h * term < 1e-18 * sum.abs().max(1.0) || m > 60 {
            return 2.0 / std::f64::consts::PI * sum;
        }
    }
}

/// `(J_nu, Y_nu)` for `nu` in `{0, 1}` by the Hankel asymptotic expansion,
/// truncated at the smallest term.
fn asymptotic(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    // c_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k); P picks even k with
    // alternating sign, Q odd k with alternating sign.
    let mut p = 0.0f64;
    let mut q = 0.0f64;
    let mut c = 1.0f64;
    let mut scale = 1.0f64; // x^{-k}
    let mut last = f64::INFINITY;
    for k in 0..40u32 {
        if k > 0 {
            let j = (2 * k - 1) as f64;
            c *= (mu - j * j) / (8.0 * k as f64);
            scale /= x;
        }
        let term = c * scale;
        if term.abs() > last {
            break; // asymptotic series started diverging
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let omega = x - (2.0 * nu as f64 + 1.0) * std::f64::consts::FRAC_PI_4;
    let amp = (2.0 / (std::f64::consts::PI * x)).sqrt();
    let (s, cth) = omega.sin_cos();
    (amp * (cth * p - s * q), amp * (s * p + cth * q))
}

/// First positive zero of `J0`, by Newton iteration on the series.
pub fn first_j0_zero() -> f64 {
    let mut x = 2.405f64;
    for _ in 0..20 {
        let dx = bessel_j0(x) / bessel_j1(x); // J0' = -J1
        x += dx;
        if dx.abs() < 1e-15 {
            break;
        }
    }
    x
}

// --------------------------------------------------------------------------
// Helmholtz kernel

/// Kernel value together with its logarithmic coefficient: the fundamental
/// solution satisfies `G(r) = log_part * ln(r) + smooth(r)` with `smooth`
/// analytic in `r^2`.
#[derive(Clone, Copy, Debug)]
pub struct KernelValue {
    pub value: Complex64,
    pub log_part: f64,
}

/// Fundamental solution of the 2D Helmholtz operator at distance `r`:
/// `(i/4) H0^(1)(k r)` for `k > 0`, and `-(1/2pi) ln r` for `k = 0`.
pub fn helmholtz_kernel(k: f64, r: f64) -> Result<KernelValue, Error> {
    if k < 0.0 || !k.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "wavenumber must be nonnegative and finite, got {k}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel distance must be positive, got {r} (use the log/smooth split on the diagonal)"
        )));
    }
    let kern = Kernel::new(k);
    Ok(KernelValue {
        value: kern.value(r),
        log_part: kern.log_coeff(r),
    })
}

/// Gradient of the kernel with respect to `x`, where `r = |x - y|`:
/// `dG/dr * (x - y)/r`.
pub fn helmholtz_kernel_grad(k: f64, dx: f64, dy: f64) -> Result<(Complex64, Complex64), Error> {
    let r = dx.hypot(dy);
    if k < 0.0 || !k.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "wavenumber must be nonnegative and finite, got {k}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(
            "kernel gradient needs a positive distance".into(),
        ));
    }
    let dgdr = Kernel::new(k).radial_derivative(r);
    Ok((dgdr * (dx / r), dgdr * (dy / r)))
}

/// Prevalidated kernel evaluator; the constant `ln(k/2) + gamma` is folded
/// in once so the per-point work is the two Bessel series.
#[derive(Clone, Copy, Debug)]
pub struct Kernel {
    k: f64,
    /// `ln(k/2) + gamma` for `k > 0`; unused for the Laplace kernel.
    log_half_k_gamma: f64,
}

impl Kernel {
    pub fn new(k: f64) -> Self {
        assert!(k >= 0.0 && k.is_finite(), "wavenumber must be nonnegative");
        Kernel {
            k,
            log_half_k_gamma: if k > 0.0 {
                (k / 2.0).ln() + EULER_GAMMA
            } else {
                0.0
            },
        }
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    /// Kernel value at distance `r > 0`.
    pub fn value(&self, r: f64) -> Complex64 {
        if self.k == 0.0 {
            Complex64::new(-FRAC_1_2PI * r.ln(), 0.0)
        } else {
            let z = self.k * r;
            let j0 = bessel_j0(z);
            let y0 = bessel_y0(z);
            Complex64::new(-0.25 * y0, 0.25 * j0)
        }
    }

    /// Coefficient of `ln r` in the kernel at distance `r`.
    pub fn log_coeff(&self, r: f64) -> f64 {
        if self.k == 0.0 {
            -FRAC_1_2PI
        } else {
            -FRAC_1_2PI * bessel_j0(self.k * r)
        }
    }

    /// Smooth remainder `value - log_coeff * ln r`, analytic in `r^2` and
    /// well-defined at `r = 0`.
    pub fn smooth(&self, r: f64) -> Complex64 {
        if self.k == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let z = self.k * r;
        let j0 = bessel_j0(z);
        let y0t = y0_entire_part(z);
        Complex64::new(
            -FRAC_1_2PI * self.log_half_k_gamma * j0 - 0.25 * y0t,
            0.25 * j0,
        )
    }

    /// `dG/dr` at distance `r > 0`.
    pub fn radial_derivative(&self, r: f64) -> Complex64 {
        if self.k == 0.0 {
            Complex64::new(-FRAC_1_2PI / r, 0.0)
        } else {
            let z = self.k * r;
            let j1 = bessel_j1(z);
            let y1 = bessel_y1(z);
            // -(i k / 4) (J1 + i Y1)
            Complex64::new(0.25 * self.k * y1, -0.25 * self.k * j1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values computed with mpmath at 50 digits.
    const TABLE: &[(f64, f64, f64, f64, f64)] = &[
        // x, J0, Y0, J1, Y1
        (0.1, 0.99750156206604003, -1.5342386513503668, 0.049937526036241998, -6.4589510947020270),
        (0.5, 0.93846980724081290, -0.44451873350670656, 0.24226845767487389, -1.4714723926702431),
        (1.0, 0.76519768655796655, 0.088256964215676958, 0.44005058574493352, -0.78121282130028872),
        (2.0, 0.22389077914123567, 0.51037567264974512, 0.57672480775687339, -0.10703243154093755),
        (3.5, -0.38012773998726338, 0.18902194392082651, 0.13737752736232719, 0.41018841788751188),
        (5.0, -0.17759677131433830, -0.30851762524903378, -0.32757913759146522, 0.14786314339122684),
        (7.5, 0.26633965788037840, 0.11731328614820863, 0.13524842757970551, -0.25912851048611625),
        (8.0, 0.17165080713755391, 0.22352148938756622, 0.23463634685391462, -0.15806046173124749),
        (9.0, -0.090333611182876134, 0.24993669828502468, 0.24531178657332527, 0.10431457519671589),
        (10.0, -0.24593576445134834, 0.055671167283599391, 0.043472746168861437, 0.24901542420695388),
        (12.0, 0.047689310796833537, -0.22523731263436143, -0.22344710449062761, -0.057099218260896521),
        (15.0, -0.014224472826780773, 0.20546429603891826, 0.20510403861352276, 0.021073628036873512),
        (20.0, 0.16702466434058315, 0.062640596809383831, 0.066833124175850046, -0.16551161436252130),
        (50.0, 0.055812327669251815, -0.098064995470077079, -0.097511828125175138, -0.056795668562014768),
        (100.0, 0.019985850304223122, -0.077244313365083152, -0.077145352014112158, -0.020372312002759793),
    ];

    #[test]
    fn bessel_reference_table() {
        for &(x, j0, y0, j1, y1) in TABLE {
            // Small arguments carry an absolute tolerance; past the
            // series/asymptotic switch the requirement is relative.
            if x <= 8.0 {
                assert!((bessel_j0(x) - j0).abs() <= 1e-12, "J0({x})");
                assert!((bessel_y0(x) - y0).abs() <= 1e-12, "Y0({x})");
                assert!((bessel_j1(x) - j1).abs() <= 1e-12, "J1({x})");
                assert!((bessel_y1(x) - y1).abs() <= 1e-12, "Y1({x})");
            } else {
                assert_relative_eq!(bessel_j0(x), j0, max_relative = 1e-10);
                assert_relative_eq!(bessel_y0(x), y0, max_relative = 1e-10);
                assert_relative_eq!(bessel_j1(x), j1, max_relative = 1e-10);
                assert_relative_eq!(bessel_y1(x), y1, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn bessel_special_points() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert_relative_eq!(bessel_j0(1.0), 0.7651976865579666, max_relative = 1e-13);
        assert_relative_eq!(bessel_y0(1.0), 0.08825696421567696, max_relative = 1e-12);
        assert_eq!(bessel_j1(0.0), 0.0);
        // J0 is even, J1 odd
        assert_eq!(bessel_j0(-2.5), bessel_j0(2.5));
        assert_eq!(bessel_j1(-2.5), -bessel_j1(2.5));
    }

    #[test]
    fn wronskian_identity() {
        // J0 Y1' style identity: J0(x) Y1(x) - J1(x) Y0(x) = -2/(pi x)
        for &x in &[0.2, 0.9, 2.3, 4.8, 7.7, 9.4, 12.9, 13.1, 17.0, 33.0, 80.0] {
            let w = bessel_j0(x) * bessel_y1(x) - bessel_j1(x) * bessel_y0(x);
            assert_relative_eq!(w, -2.0 / (std::f64::consts::PI * x), max_relative = 1e-10);
        }
    }

    #[test]
    fn series_asymptotic_agree_at_switch() {
        // Continuity across the representation switch.
        for f in [bessel_j0 as fn(f64) -> f64, bessel_y0, bessel_j1, bessel_y1] {
            let below = f(12.999999999);
            let above = f(13.000000001);
            assert!((below - above).abs() < 1e-8, "mismatch at switch: {below} vs {above}");
        }
    }

    #[test]
    fn first_zero_of_j0() {
        let z = first_j0_zero();
        assert_relative_eq!(z, 2.4048255576957728, max_relative = 1e-14);
        assert!(bessel_j0(z).abs() < 1e-14);
    }

    #[test]
    fn y0_entire_part_reference() {
        assert_relative_eq!(y0_entire_part(0.5), 0.038864067388927236, max_relative = 1e-12);
        assert_relative_eq!(y0_entire_part(1.0), 0.14473184009088587, max_relative = 1e-12);
        assert_relative_eq!(y0_entire_part(3.0), 0.53953695529432370, max_relative = 1e-12);
        // it vanishes at 0 (the whole log structure sits in the other term)
        assert!(y0_entire_part(1e-8).abs() < 1e-15);
    }

    #[test]
    fn kernel_values() {
        // k=1, r=1: (i/4) H0(1)
        let kv = helmholtz_kernel(1.0, 1.0).unwrap();
        assert_relative_eq!(kv.value.re, -0.022064241053919239, max_relative = 1e-12);
        assert_relative_eq!(kv.value.im, 0.19129942163949164, max_relative = 1e-12);
        assert_relative_eq!(kv.log_part, -bessel_j0(1.0) / (2.0 * std::f64::consts::PI), max_relative = 1e-14);

        let kv = helmholtz_kernel(4.0, 0.3).unwrap();
        assert_relative_eq!(kv.value.re, -0.057020875806799213, max_relative = 1e-12);
        assert_relative_eq!(kv.value.im, 0.16778318606609067, max_relative = 1e-12);

        // Laplace kernel
        let kv = helmholtz_kernel(0.0, 0.5).unwrap();
        assert_relative_eq!(kv.value.re, 0.11031780007632580, max_relative = 1e-13);
        assert_eq!(kv.value.im, 0.0);
        assert_relative_eq!(kv.log_part, -1.0 / (2.0 * std::f64::consts::PI), max_relative = 1e-15);
    }

    #[test]
    fn kernel_rejects_bad_input() {
        assert!(helmholtz_kernel(-1.0, 0.5).is_err());
        assert!(helmholtz_kernel(1.0, 0.0).is_err());
        assert!(helmholtz_kernel(1.0, -0.1).is_err());
        assert!(helmholtz_kernel_grad(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn kernel_split_consistency() {
        // value == log_part * ln r + smooth for a spread of k, r.
        for &k in &[0.0, 0.5, 1.0, 4.0, 16.0] {
            let kern = Kernel::new(k);
            for &r in &[1e-6, 1e-3, 0.05, 0.3, 0.49] {
                let v = kern.value(r);
                let split = kern.smooth(r) + Complex64::new(kern.log_coeff(r) * r.ln(), 0.0);
                assert!(
                    (v - split).norm() <= 1e-13 * v.norm().max(1.0),
                    "split mismatch k={k} r={r}: {v} vs {split}"
                );
            }
        }
    }

    #[test]
    fn kernel_smooth_limit() {
        // smooth(0) = i/4 - (ln(k/2)+gamma)/(2 pi): frozen for k=1 and k=4.
        let s = Kernel::new(1.0).smooth(0.0);
        assert_relative_eq!(s.re, 0.018451073777171806, max_relative = 1e-12);
        assert_relative_eq!(s.im, 0.25, max_relative = 1e-14);
        let s = Kernel::new(4.0).smooth(0.0);
        assert_relative_eq!(s.re, -0.20218452637547979, max_relative = 1e-12);
        assert_relative_eq!(s.im, 0.25, max_relative = 1e-14);
    }

    #[test]
    fn kernel_gradient_reference() {
        // k=1, r=0.7 along x: dG/dr = -(i/4) H1(0.7)
        let (gx, gy) = helmholtz_kernel_grad(1.0, 0.7, 0.0).unwrap();
        assert_relative_eq!(gx.re, -0.27581246797690834, max_relative = 1e-12);
        assert_relative_eq!(gx.im, -0.082248935385014737, max_relative = 1e-12);
        assert_eq!(gy, Complex64::new(0.0, 0.0));
        // Laplace radial derivative
        let (gx, _) = helmholtz_kernel_grad(0.0, 0.7, 0.0).unwrap();
        assert_relative_eq!(gx.re, -0.22736420441699334, max_relative = 1e-13);
    }
}
