//! Matrix exponential by scaling and squaring with Pade approximants
//! (orders 3, 5, 7, 9, 13 selected from the 1-norm).

use super::{ensure_square, CMatrix, C64};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Pade numerator/denominator pieces U (odd part) and V (even part).
fn pade_low(a: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let a2 = a * a;
    let mut u_inner = CMatrix::identity(n, n) * c(b[1]);
    let mut v = CMatrix::identity(n, n) * c(b[0]);
    let mut pow = CMatrix::identity(n, n);
    let mut k = 2;
    while k < b.len() {
        pow = &pow * &a2;
        v += &pow * c(b[k]);
        if k + 1 < b.len() {
            u_inner += &pow * c(b[k + 1]);
        }
        k += 2;
    }
    (a * u_inner, v)
}

fn pade_13(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let u_hi = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
    let u_inner = &a6 * u_hi + &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &id * c(b[1]);
    let v_hi = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
    let v = &a6 * v_hi + &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &id * c(b[0]);
    (a * u_inner, v)
}

fn solve_pade(u: CMatrix, v: CMatrix) -> CMatrix {
    let p = &v + &u;
    let q = &v - &u;
    // q is well conditioned for the norm bounds used above
    q.lu().solve(&p).expect("Pade denominator is nonsingular")
}

/// Matrix exponential of a square matrix.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let nrm = norm1(m);
    for (order, theta) in THETA {
        if nrm <= theta {
            let b: &[f64] = match order {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(m, b);
            return Ok(solve_pade(u, v));
        }
    }
    let s = if nrm > THETA_13 {
        (nrm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = m * c(2f64.powi(-s));
    let (u, v) = pade_13(&scaled);
    let mut x = solve_pade(u, v);
    for _ in 0..s {
        x = &x * &x;
    }
    Ok(x)
}

/// Returns `(exp(M h), integral_0^h exp(M t) dt)` from one augmented
/// exponential, so both blocks come from the same computation.
pub fn expm_with_integral(m: &CMatrix, h: f64) -> Result<(CMatrix, CMatrix)> {
    let n = ensure_square(m)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::NonPositivePeriod(h));
    }
    // exp([[M h, h I], [0, 0]]) = [[exp(M h), int_0^h exp(M t) dt], [0, I]]
    let mut aug = CMatrix::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(&(m * c(h)));
    aug.view_mut((0, n), (n, n))
        .copy_from(&(CMatrix::identity(n, n) * c(h)));
    let e = expm(&aug)?;
    let phi = e.view((0, 0), (n, n)).into_owned();
    let gamma = e.view((0, n), (n, n)).into_owned();
    Ok((phi, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{max_abs_diff, real_matrix};

    #[test]
    fn exp_of_zero_is_identity() {
        let e = expm(&CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(e, CMatrix::identity(2, 2));
    }

    #[test]
    fn exp_of_diagonal_and_nilpotent() {
        let d = real_matrix(2, 2, &[1.0, 0.0, 0.0, -3.0]);
        let e = expm(&d).unwrap();
        let want = real_matrix(2, 2, &[1f64.exp(), 0.0, 0.0, (-3f64).exp()]);
        assert!(max_abs_diff(&e, &want) < 1e-13);

        let nil = real_matrix(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let e = expm(&(nil * c(7.0))).unwrap();
        let want = real_matrix(3, 3, &[1.0, 7.0, 24.5, 0.0, 1.0, 7.0, 0.0, 0.0, 1.0]);
        assert!(max_abs_diff(&e, &want) < 1e-11);
    }

    #[test]
    fn node_exponential_values() {
        let a = real_matrix(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let e = expm(&(a * c(0.1))).unwrap();
        let want = real_matrix(2, 2, &[1.1052, 0.0, 0.1105, 1.1052]);
        assert!(max_abs_diff(&e, &want) < 5e-4);

        let a = real_matrix(2, 2, &[1.0, 1.0, -1.0, 1.0]);
        let e = expm(&(a * c(std::f64::consts::PI))).unwrap();
        let want = real_matrix(2, 2, &[-23.1407, 0.0, 0.0, -23.1407]);
        assert!(max_abs_diff(&e, &want) < 5e-4);
    }

    #[test]
    fn rotation_generator_exponential() {
        let w = 2.5;
        let a = real_matrix(2, 2, &[0.0, w, -w, 0.0]);
        let e = expm(&a).unwrap();
        let want = real_matrix(2, 2, &[w.cos(), w.sin(), -w.sin(), w.cos()]);
        assert!(max_abs_diff(&e, &want) < 1e-13);
    }

    #[test]
    fn integral_of_zero_generator() {
        let (e, j) = expm_with_integral(&CMatrix::zeros(3, 3), 0.7).unwrap();
        assert!(max_abs_diff(&e, &CMatrix::identity(3, 3)) < 1e-15);
        assert!(max_abs_diff(&j, &(CMatrix::identity(3, 3) * c(0.7))) < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            expm(&CMatrix::zeros(2, 3)),
            Err(Error::NonSquare { .. })
        ));
        assert!(matches!(
            expm_with_integral(&CMatrix::zeros(2, 2), 0.0),
            Err(Error::NonPositivePeriod(_))
        ));
        assert!(matches!(
            expm_with_integral(&CMatrix::zeros(2, 2), f64::NAN),
            Err(Error::NonPositivePeriod(_))
        ));
    }
}
