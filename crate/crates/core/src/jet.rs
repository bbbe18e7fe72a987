//! Truncated Taylor series in one complex variable. Coefficient k of a jet
//! built from `Jet::var(z0, n)` is f^{(k)}(z0)/k!, which is exactly the
//! normalized derivative used for iterated resolvents.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub c: Vec<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Jet {
    /// Constant jet with `n` coefficients.
    pub fn constant(v: Complex64, n: usize) -> Jet {
        let mut c = vec![zero(); n.max(1)];
        c[0] = v;
        Jet { c }
    }

    pub fn real(v: f64, n: usize) -> Jet {
        Jet::constant(Complex64::new(v, 0.0), n)
    }

    /// The independent variable expanded at `z0`.
    pub fn var(z0: Complex64, n: usize) -> Jet {
        let mut j = Jet::constant(z0, n);
        if n > 1 {
            j.c[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    /// f^{(k)}(z0)/k!
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.c.get(k).copied().unwrap_or_else(zero)
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_const(&self, s: Complex64) -> Jet {
        let mut j = self.clone();
        j.c[0] += s;
        j
    }

    pub fn recip(&self) -> Jet {
        let n = self.len();
        let a = &self.c;
        let mut b = vec![zero(); n];
        b[0] = a[0].inv();
        for k in 1..n {
            let mut s = zero();
            for j in 1..=k {
                s += a[j] * b[k - j];
            }
            b[k] = -s * b[0];
        }
        Jet { c: b }
    }

    pub fn sqrt(&self) -> Jet {
        let n = self.len();
        let a = &self.c;
        let mut b = vec![zero(); n];
        b[0] = a[0].sqrt();
        for k in 1..n {
            let mut s = a[k];
            for j in 1..k {
                s -= b[j] * b[k - j];
            }
            b[k] = s / (b[0] * 2.0);
        }
        Jet { c: b }
    }

    pub fn exp(&self) -> Jet {
        let n = self.len();
        let a = &self.c;
        let mut b = vec![zero(); n];
        b[0] = a[0].exp();
        for k in 1..n {
            let mut s = zero();
            for j in 1..=k {
                s += a[j] * b[k - j] * j as f64;
            }
            b[k] = s / k as f64;
        }
        Jet { c: b }
    }

    pub fn ln(&self) -> Jet {
        let n = self.len();
        let a = &self.c;
        let mut b = vec![zero(); n];
        b[0] = a[0].ln();
        for k in 1..n {
            let mut s = a[k] * k as f64;
            for j in 1..k {
                s -= b[j] * a[k - j] * j as f64;
            }
            b[k] = s / (a[0] * k as f64);
        }
        Jet { c: b }
    }

    pub fn powi(&self, p: i32) -> Jet {
        if p < 0 {
            return self.recip().powi(-p);
        }
        let mut out = Jet::real(1.0, self.len());
        let mut base = self.clone();
        let mut e = p as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        out
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let n = self.len().min(o.len());
        let mut c = vec![zero(); n];
        for i in 0..n {
            if self.c[i] == zero() {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

impl Div for &Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &Jet) -> Jet {
        self * &o.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            c: self.c.iter().map(|a| -a).collect(),
        }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet {
                (&self).$f(&o)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $f(self, o: &Jet) -> Jet {
                (&self).$f(o)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet {
                self.$f(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}
