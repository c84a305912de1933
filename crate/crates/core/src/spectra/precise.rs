//! Extended-precision eigenvalues of the atom-slow model.
//!
//! Deep in the double-well regime the two lowest levels of the atom-slow model
//! are split by far less than one ulp of the ground energy, so the gap cannot be
//! resolved in `f64`. The unrotated Hamiltonian commutes with `(−1)^{S_z+A/2}`
//! and each parity block is tridiagonal (couplings change `m` by 0 or ±2), so
//! Sturm-sequence bisection in binary fixed-point arithmetic reaches any
//! required accuracy. The rotated model is unitarily equivalent and has the
//! same spectrum.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::effective::ModelSpec;
use crate::error::{invalid, Error, Result};

/// Fractional bits of the fixed-point representation.
pub const FRACTION_BITS: usize = 512;

/// Bisection steps; each halves the bracket.
const BISECTION_STEPS: usize = 400;

/// A real number `n / 2^FRACTION_BITS`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn from_int(v: i64) -> Self {
        Fixed(BigInt::from(v) << FRACTION_BITS)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(invalid(format!("cannot convert {v} to fixed point")));
        }
        if v == 0.0 {
            return Ok(Self::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if exp_bits == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp_bits - 1075) };
        let shift = exp + FRACTION_BITS as i64;
        let m = BigInt::from(mantissa) * sign;
        let n = if shift >= 0 { m << shift as usize } else { m >> (-shift) as usize };
        Ok(Fixed(n))
    }

    pub fn to_f64(&self) -> f64 {
        // Keep 64 significant bits before the float conversion to avoid overflow.
        let bits = self.0.bits() as i64;
        let drop = (bits - 64).max(0);
        let head = (&self.0 >> drop as usize).to_f64().unwrap_or(f64::NAN);
        head * 2f64.powi((drop - FRACTION_BITS as i64) as i32)
    }

    pub fn div(&self, other: &Fixed) -> Fixed {
        Fixed((&self.0 << FRACTION_BITS) / &other.0)
    }

    pub fn sqrt(&self) -> Fixed {
        assert!(!self.0.is_negative(), "square root of a negative number");
        Fixed((&self.0 << FRACTION_BITS).sqrt())
    }

    pub fn abs(&self) -> Fixed {
        Fixed(self.0.abs())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn half(&self) -> Fixed {
        Fixed(&self.0 >> 1usize)
    }

    pub fn scale_int(&self, k: i64) -> Fixed {
        Fixed(&self.0 * k)
    }

    /// One unit in the last place.
    pub fn ulp() -> Fixed {
        Fixed(BigInt::from(1))
    }
}

impl Add for &Fixed {
    type Output = Fixed;
    fn add(self, rhs: &Fixed) -> Fixed {
        Fixed(&self.0 + &rhs.0)
    }
}

impl Sub for &Fixed {
    type Output = Fixed;
    fn sub(self, rhs: &Fixed) -> Fixed {
        Fixed(&self.0 - &rhs.0)
    }
}

impl Mul for &Fixed {
    type Output = Fixed;
    fn mul(self, rhs: &Fixed) -> Fixed {
        Fixed((&self.0 * &rhs.0) >> FRACTION_BITS)
    }
}

impl Neg for &Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-&self.0)
    }
}

/// A symmetric tridiagonal matrix: `diag[i]` and `off[i] = H[i+1][i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<Fixed>,
    pub off: Vec<Fixed>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<Fixed>, off: Vec<Fixed>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(invalid("tridiagonal needs n diagonal and n-1 off-diagonal entries"));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: &Fixed) -> usize {
        let tiny = Fixed::ulp();
        let mut count = 0;
        let mut q = &self.diag[0] - sigma;
        for i in 0..self.dim() {
            if i > 0 {
                let e2 = &self.off[i - 1] * &self.off[i - 1];
                q = &(&self.diag[i] - sigma) - &e2.div(&q);
            }
            if q.is_zero_value() {
                q = -&tiny;
            }
            if q.is_negative() {
                count += 1;
            }
        }
        count
    }

    fn bounds(&self) -> (Fixed, Fixed) {
        let n = self.dim();
        let mut lo: Option<Fixed> = None;
        let mut hi: Option<Fixed> = None;
        for i in 0..n {
            let mut r = Fixed::zero();
            if i > 0 {
                r = &r + &self.off[i - 1].abs();
            }
            if i + 1 < n {
                r = &r + &self.off[i].abs();
            }
            let l = &self.diag[i] - &r;
            let h = &self.diag[i] + &r;
            lo = Some(match lo {
                Some(x) if x <= l => x,
                _ => l,
            });
            hi = Some(match hi {
                Some(x) if x >= h => x,
                _ => h,
            });
        }
        let pad = Fixed::from_int(1);
        (&lo.unwrap() - &pad, &hi.unwrap() + &pad)
    }

    /// The `k`-th smallest eigenvalue (`k = 0` is the lowest), bracketed to
    /// about `2^-(BISECTION_STEPS)` of the spectral span.
    pub fn eigenvalue(&self, k: usize) -> Result<Fixed> {
        if k >= self.dim() {
            return Err(invalid(format!("eigenvalue index {k} out of range for dimension {}", self.dim())));
        }
        let (mut lo, mut hi) = self.bounds();
        for _ in 0..BISECTION_STEPS {
            let mid = (&lo + &hi).half();
            if mid == lo || mid == hi {
                break;
            }
            if self.count_below(&mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((&lo + &hi).half())
    }
}

impl Fixed {
    fn is_zero_value(&self) -> bool {
        self.0.is_zero()
    }
}

/// The two parity blocks of the unrotated atom-slow model, even `m + A/2` first.
pub fn atom_slow_blocks(a: usize, spec: &ModelSpec) -> Result<[Tridiagonal; 2]> {
    spec.validate()?;
    if a < 1 {
        return Err(invalid(format!("spin size A must be >= 1, got {a}")));
    }
    let w1 = Fixed::from_f64(spec.omega1)?;
    let w2 = Fixed::from_f64(spec.omega2)?;
    let g = Fixed::from_f64(spec.g)?;
    let d = g.div(&w2);
    let d2 = &d * &d;
    let d3 = &d2 * &d;
    let gd = &g * &d;
    let gd3 = &g * &d3;
    // ω̃₁ = ω₁ − 2ω₂δ² − 16gδ³
    let w = &(&w1 - &(&w2 * &d2).scale_int(2)) - &gd3.scale_int(16);
    let c_sx2 = gd.scale_int(-4);
    let c_sz2 = (&w2 * &d2).scale_int(2);
    let c_anti = gd3.scale_int(16);
    let sixteenth = Fixed::from_int(1).div(&Fixed::from_int(16));
    let a = a as i64;
    // Work with M = 2m ∈ {−A, −A+2, …, A}.
    let diag_entry = |mm: i64| {
        let sx2 = &Fixed::from_int((a + mm) * (a - mm + 2) + (a - mm) * (a + mm + 2)) * &sixteenth;
        let m = Fixed::from_int(mm).half();
        let sz2 = &m * &m;
        // {S_x², S_z} on the diagonal is 2m·(S_x²)_{mm}.
        let anti = &sx2.scale_int(mm);
        let sum = &(&(&w * &m) + &(&c_sx2 * &sx2)) + &(&c_sz2 * &sz2);
        &sum + &(&c_anti * anti)
    };
    let off_entry = |mm: i64| {
        // ⟨m+2|·|m⟩ with (S_x²)_{m+2,m} = √((a−M)(a+M+2)(a−M−2)(a+M+4))/16.
        let prod = (a - mm) * (a + mm + 2) * (a - mm - 2) * (a + mm + 4);
        let sx2 = &Fixed::from_int(prod).sqrt() * &sixteenth;
        // (m + 2) + m = (M + 2)·1, i.e. (2M + 4)/2.
        let anti = sx2.scale_int(mm + 2);
        &(&c_sx2 * &sx2) + &(&c_anti * &anti)
    };
    let block = |start: i64| -> Result<Tridiagonal> {
        let levels: Vec<i64> = (0..)
            .map(|k| -a + 2 * start + 4 * k)
            .take_while(|&mm| mm <= a)
            .collect();
        let diag = levels.iter().map(|&mm| diag_entry(mm)).collect();
        let off = levels.iter().take(levels.len().saturating_sub(1)).map(|&mm| off_entry(mm)).collect();
        Tridiagonal::new(diag, off)
    };
    Ok([block(0)?, block(1)?])
}

/// The lowest `count` eigenvalues of the atom-slow model, ascending.
pub fn atom_slow_lowest(a: usize, spec: &ModelSpec, count: usize) -> Result<Vec<Fixed>> {
    let blocks = atom_slow_blocks(a, spec)?;
    let mut all = Vec::new();
    for b in &blocks {
        for k in 0..count.min(b.dim()) {
            all.push(b.eigenvalue(k)?);
        }
    }
    all.sort();
    if all.len() < count {
        return Err(Error::ContractViolation(format!("model has fewer than {count} levels")));
    }
    all.truncate(count);
    Ok(all)
}

/// `E₁ − E₀` of the atom-slow model (rotated or not), accurate far below `f64`
/// resolution of the energies themselves.
pub fn atom_slow_gap(a: usize, spec: &ModelSpec) -> Result<f64> {
    let low = atom_slow_lowest(a, spec, 2)?;
    let gap = &low[1] - &low[0];
    match gap.cmp(&Fixed::zero()) {
        Ordering::Less => Err(Error::ContractViolation("eigenvalues out of order".into())),
        _ => Ok(gap.to_f64()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{coupling_for_xi, dicke_atom_slow};
    use crate::spectra::eig_sym;

    #[test]
    fn fixed_round_trip() {
        for v in [0.0, 1.0, -2.5, 0.05, 1e-120, 123456.789, -1e10] {
            assert_eq!(Fixed::from_f64(v).unwrap().to_f64(), v);
        }
        let two = Fixed::from_int(2);
        assert!((two.sqrt().to_f64() - 2f64.sqrt()).abs() < 1e-16);
        let third = Fixed::from_int(1).div(&Fixed::from_int(3));
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn second_difference_spectrum() {
        let n = 12;
        let t = Tridiagonal::new(vec![Fixed::from_int(2); n], vec![Fixed::from_int(-1); n - 1]).unwrap();
        for k in 0..n {
            let expect = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k).unwrap().to_f64() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_dense_spectrum() {
        let spec = ModelSpec::new(0.01, 1.0, 0.03).unwrap();
        let dense = eig_sym(&dicke_atom_slow(10, &spec, true).unwrap(), false).unwrap();
        let low = atom_slow_lowest(10, &spec, 11).unwrap();
        for (f, e) in low.iter().zip(&dense.eigenvalues) {
            assert!((f.to_f64() - e).abs() < 1e-14);
        }
    }

    #[test]
    fn gap_matches_dense_where_resolvable() {
        let g = coupling_for_xi(20.0, 2.0, 0.01, 1.0).unwrap();
        let spec = ModelSpec::new(0.01, 1.0, g).unwrap();
        let dense = eig_sym(&dicke_atom_slow(20, &spec, true).unwrap(), false).unwrap();
        let gap = atom_slow_gap(20, &spec).unwrap();
        assert!((gap - dense.gap.unwrap()).abs() < 1e-14, "{gap} vs {:?}", dense.gap);
    }
}
