//! Minimal double-double (compensated) arithmetic for complex dot products.
//!
//! Used to evaluate eigenvalue Rayleigh-quotient corrections whose leading
//! digits cancel; plain f64 accumulation would leave a noise floor of order
//! eps * ||W|| on every eigenvalue, which is too coarse for one-sided
//! derivative estimates of nearly flat spectral curves.

use num_complex::Complex64 as C64;

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Error-free sum of two doubles (Knuth two-sum).
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Error-free product via FMA.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = f64::mul_add(a, b, -p);
    (p, err)
}

#[inline]
pub fn dd_add(a: Dd, b: Dd) -> Dd {
    let (s, e) = two_sum(a.hi, b.hi);
    let e = e + a.lo + b.lo;
    let (hi, lo) = two_sum(s, e);
    Dd { hi, lo }
}

#[inline]
pub fn dd_mul_f64(a: f64, b: f64) -> Dd {
    let (hi, lo) = two_prod(a, b);
    Dd { hi, lo }
}

#[inline]
pub fn dd_mul(a: Dd, b: Dd) -> Dd {
    let (p, e) = two_prod(a.hi, b.hi);
    let e = e + a.hi * b.lo + a.lo * b.hi;
    let (hi, lo) = two_sum(p, e);
    Dd { hi, lo }
}

#[inline]
pub fn dd_neg(a: Dd) -> Dd {
    Dd { hi: -a.hi, lo: -a.lo }
}

/// Quotient a/b computed as f64 quotient plus one Newton correction.
#[inline]
pub fn dd_div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi / b.hi;
    let r = dd_add(a, dd_neg(dd_mul(Dd::from_f64(q1), b)));
    let q2 = r.value() / b.hi;
    let (hi, lo) = two_sum(q1, q2);
    Dd { hi, lo }
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub const ZERO: CDd = CDd { re: Dd::ZERO, im: Dd::ZERO };

    pub fn from_c64(z: C64) -> CDd {
        CDd {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    pub fn value(self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

#[inline]
pub fn cdd_add(a: CDd, b: CDd) -> CDd {
    CDd {
        re: dd_add(a.re, b.re),
        im: dd_add(a.im, b.im),
    }
}

/// Product of two f64 complex numbers, accumulated exactly.
#[inline]
pub fn cdd_prod(a: C64, b: C64) -> CDd {
    // (a.re + i a.im)(b.re + i b.im)
    let rr = dd_mul_f64(a.re, b.re);
    let ii = dd_mul_f64(a.im, b.im);
    let ri = dd_mul_f64(a.re, b.im);
    let ir = dd_mul_f64(a.im, b.re);
    CDd {
        re: dd_add(rr, dd_neg(ii)),
        im: dd_add(ri, ir),
    }
}

#[inline]
pub fn cdd_mul(a: CDd, b: CDd) -> CDd {
    CDd {
        re: dd_add(dd_mul(a.re, b.re), dd_neg(dd_mul(a.im, b.im))),
        im: dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re)),
    }
}

#[inline]
pub fn cdd_neg(a: CDd) -> CDd {
    CDd {
        re: dd_neg(a.re),
        im: dd_neg(a.im),
    }
}

/// a / b for double-double complex values.
#[inline]
pub fn cdd_div(a: CDd, b: CDd) -> CDd {
    // a * conj(b) / |b|^2
    let bconj = CDd {
        re: b.re,
        im: dd_neg(b.im),
    };
    let num = cdd_mul(a, bconj);
    let den = dd_add(dd_mul(b.re, b.re), dd_mul(b.im, b.im));
    CDd {
        re: dd_div(num.re, den),
        im: dd_div(num.im, den),
    }
}

/// Compensated dot product conj(x) . y.
pub fn cdd_dot(x: &[C64], y: &[C64]) -> CDd {
    let mut acc = CDd::ZERO;
    for (xi, yi) in x.iter().zip(y.iter()) {
        acc = cdd_add(acc, cdd_prod(xi.conj(), *yi));
    }
    acc
}
