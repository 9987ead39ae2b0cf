//! Periodised orthonormal discrete wavelet transform.
//!
//! Coefficient layout: `[a_L | d_L | d_{L-1} | ... | d_1]`, coarsest first.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveletFamily {
    Haar,
    /// Eight-tap Daubechies filter with four vanishing moments.
    Daubechies4,
}

impl WaveletFamily {
    fn lowpass(self) -> &'static [f64] {
        match self {
            WaveletFamily::Haar => &[
                std::f64::consts::FRAC_1_SQRT_2,
                std::f64::consts::FRAC_1_SQRT_2,
            ],
            WaveletFamily::Daubechies4 => &[
                0.230_377_813_308_855_23,
                0.714_846_570_552_541_5,
                0.630_880_767_929_590_4,
                -0.027_983_769_416_983_85,
                -0.187_034_811_718_881_14,
                0.030_841_381_835_986_965,
                0.032_883_011_666_982_945,
                -0.010_597_401_784_997_278,
            ],
        }
    }
}

impl std::str::FromStr for WaveletFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(Self::Haar),
            "daubechies4" | "db4" => Ok(Self::Daubechies4),
            other => Err(Error::invalid("wavelet", format!("unknown family `{other}`"))),
        }
    }
}

impl std::fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Haar => "haar",
            Self::Daubechies4 => "daubechies4",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBasis<T> {
    pub family: WaveletFamily,
    pub levels: usize,
    pub n: usize,
    lo: Vec<T>,
    hi: Vec<T>,
}

impl<T: Real> WaveletBasis<T> {
    pub fn new(family: WaveletFamily, levels: usize, n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::invalid(
                "n",
                format!("{n} is not a power of two; zero-pad the frame"),
            ));
        }
        let max_levels = n.trailing_zeros() as usize;
        if levels == 0 || levels > max_levels {
            return Err(Error::invalid(
                "levels",
                format!("{levels} levels for n = {n} (max {max_levels})"),
            ));
        }
        let lo: Vec<T> = family.lowpass().iter().map(|&v| T::lit(v)).collect();
        let k = lo.len();
        let hi = (0..k)
            .map(|j| {
                let v = lo[k - 1 - j];
                if j % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        Ok(Self {
            family,
            levels,
            n,
            lo,
            hi,
        })
    }

    /// Smallest power of two holding `len` samples.
    pub fn padded_len(len: usize) -> usize {
        len.next_power_of_two().max(2)
    }

    /// Analysis: coefficients `Wᵀ·x`.
    pub fn dwt(&self, x: &[T]) -> Result<Vec<T>> {
        self.check(x.len())?;
        let mut out = x.to_vec();
        let mut len = self.n;
        let mut tmp = vec![T::zero(); self.n];
        for _ in 0..self.levels {
            let half = len / 2;
            for k in 0..half {
                let (mut a, mut d) = (T::zero(), T::zero());
                for (j, (&h, &g)) in self.lo.iter().zip(&self.hi).enumerate() {
                    let v = out[(2 * k + j) % len];
                    a += h * v;
                    d += g * v;
                }
                tmp[k] = a;
                tmp[half + k] = d;
            }
            out[..len].copy_from_slice(&tmp[..len]);
            len = half;
        }
        Ok(out)
    }

    /// Synthesis: signal `W·c`.
    pub fn idwt(&self, c: &[T]) -> Result<Vec<T>> {
        self.check(c.len())?;
        let mut out = c.to_vec();
        let mut len = self.n >> self.levels;
        let mut tmp = vec![T::zero(); self.n];
        for _ in 0..self.levels {
            let full = len * 2;
            tmp[..full].iter_mut().for_each(|v| *v = T::zero());
            for k in 0..len {
                let (a, d) = (out[k], out[len + k]);
                for (j, (&h, &g)) in self.lo.iter().zip(&self.hi).enumerate() {
                    tmp[(2 * k + j) % full] += h * a + g * d;
                }
            }
            out[..full].copy_from_slice(&tmp[..full]);
            len = full;
        }
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Dimension(format!(
                "vector of length {len} against {}-point wavelet basis",
                self.n
            )));
        }
        Ok(())
    }
}

/// Orthonormal synthesis matrix `W` (`n × n`); column `j` is the basis
/// function of coefficient `j`.
pub fn dwt_matrix<T: Real>(basis: &WaveletBasis<T>) -> Matrix<T> {
    let n = basis.n;
    let mut w = Matrix::zeros(n, n);
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e[j] = T::one();
        let col = basis.idwt(&e).expect("length checked");
        e[j] = T::zero();
        for (i, v) in col.into_iter().enumerate() {
            w[(i, j)] = v;
        }
    }
    w
}
