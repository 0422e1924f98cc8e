//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Kronrod abscissae on [-1, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-12,
            max_subdivisions: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64, max_subdivisions: usize) -> Self {
        Quadrature {
            abs_tol,
            max_subdivisions,
        }
    }

    /// Integral of `f` over `[lo, hi]`. Interior points where `f` is known to
    /// be non-smooth can be passed as `breaks`; each piece is refined separately.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64, breaks: &[f64]) -> Result<f64> {
        if lo == hi {
            return Ok(0.0);
        }
        if hi < lo {
            return self.integrate(f, hi, lo, breaks).map(|v| -v);
        }
        let mut edges = vec![lo];
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
        inner.sort_by(f64::total_cmp);
        edges.extend(inner);
        edges.push(hi);

        let mut segs: Vec<Segment> = edges.windows(2).map(|w| kronrod(&f, w[0], w[1])).collect();
        loop {
            let error: f64 = segs.iter().map(|s| s.error).sum();
            if error <= self.abs_tol {
                break;
            }
            if segs.len() >= self.max_subdivisions {
                return Err(Error::Quadrature { lo, hi, error });
            }
            let (worst, _) = segs
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .expect("at least one segment");
            let s = segs.swap_remove(worst);
            let mid = 0.5 * (s.lo + s.hi);
            if mid <= s.lo || mid >= s.hi {
                // cannot split further in double precision
                return Err(Error::Quadrature { lo, hi, error });
            }
            segs.push(kronrod(&f, s.lo, mid));
            segs.push(kronrod(&f, mid, s.hi));
        }
        segs.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        Ok(segs.iter().map(|s| s.value).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let v = q.integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, &[]).unwrap();
        let exact = (64.0 / 6.0 - 1.0 / 6.0) - (8.0 + 1.0) + 3.0;
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn logarithmic_endpoint() {
        // int_0^1 ln x dx = -1
        let q = Quadrature::default();
        let v = q.integrate(|x| if x > 0.0 { x.ln() } else { 0.0 }, 0.0, 1.0, &[]).unwrap();
        assert!((v + 1.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn kinks_at_breaks() {
        let q = Quadrature::default();
        let v = q.integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3]).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
        let r = q.integrate(|x: f64| x, 1.0, 0.0, &[]).unwrap();
        assert!((r + 0.5).abs() < 1e-15);
    }

    #[test]
    fn reports_nonconvergence() {
        let q = Quadrature::new(1e-14, 8);
        assert!(q.integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &[]).is_err());
    }
}
