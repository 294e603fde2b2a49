//! Truncated multivariate Taylor arithmetic (up to order 5 in x, y, z).
//!
//! A [`Jet`] carries the value of a smooth function together with its
//! partial derivatives up to a chosen total order at one point. Arithmetic
//! on jets propagates derivatives exactly (to rounding), which is how the
//! built-in problems supply closed-form coefficient derivatives and
//! manufactured sources without symbolic differentiation.
//!
//! The truncation order is a runtime property: value-only evaluation runs
//! on order-0 jets while the truncation-error diagnostic uses order 5.

use std::sync::OnceLock;

pub const MAX_ORDER: usize = 5;
/// Number of multi-indices (mx, my, mz) with mx+my+mz <= 5.
pub const LEN: usize = 56;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    /// Taylor coefficients c[alpha] = d^alpha f / alpha!.
    c: [f64; LEN],
    /// Coefficients with total degree above this are not meaningful.
    order: u8,
}

struct Tables {
    monomials: [(u8, u8, u8); LEN],
    /// position[mx][my][mz]
    position: [[[u16; 6]; 6]; 6],
    /// (lhs, rhs, target) triples, sorted by target degree.
    products: Vec<(u16, u16, u16)>,
    /// products[..prefix[k]] covers every target of degree <= k.
    prefix: [usize; MAX_ORDER + 1],
    factorial_product: [f64; LEN],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut monomials = [(0u8, 0u8, 0u8); LEN];
        let mut position = [[[u16::MAX; 6]; 6]; 6];
        let mut degree = [0u8; LEN];
        let mut n = 0;
        for d in 0..=MAX_ORDER {
            for mz in 0..=d {
                for my in 0..=(d - mz) {
                    let mx = d - mz - my;
                    monomials[n] = (mx as u8, my as u8, mz as u8);
                    position[mx][my][mz] = n as u16;
                    degree[n] = d as u8;
                    n += 1;
                }
            }
        }
        assert_eq!(n, LEN);

        let mut products = Vec::new();
        for (p, &(ax, ay, az)) in monomials.iter().enumerate() {
            let da = (ax + ay + az) as usize;
            for (q, &(bx, by, bz)) in monomials.iter().enumerate() {
                let db = (bx + by + bz) as usize;
                if da + db <= MAX_ORDER {
                    let t = position[(ax + bx) as usize][(ay + by) as usize][(az + bz) as usize];
                    products.push((p as u16, q as u16, t));
                }
            }
        }
        products.sort_by_key(|&(_, _, t)| degree[t as usize]);
        let mut prefix = [0usize; MAX_ORDER + 1];
        for k in 0..=MAX_ORDER {
            prefix[k] = products
                .iter()
                .take_while(|&&(_, _, t)| degree[t as usize] <= k as u8)
                .count();
        }

        let fact = |m: u8| -> f64 { (1..=m as u64).product::<u64>().max(1) as f64 };
        let mut factorial_product = [1.0; LEN];
        for (p, &(mx, my, mz)) in monomials.iter().enumerate() {
            factorial_product[p] = fact(mx) * fact(my) * fact(mz);
        }

        Tables { monomials, position, products, prefix, factorial_product }
    })
}

impl Jet {
    pub fn constant(v: f64) -> Jet {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet { c, order: MAX_ORDER as u8 }
    }

    /// A constant carrying no derivative information beyond `order`;
    /// useful for cheap value-only evaluation through jet closures.
    pub fn constant_ord(v: f64, order: usize) -> Jet {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet { c, order: order.min(MAX_ORDER) as u8 }
    }

    /// The coordinate function of `axis` (0 = x, 1 = y, 2 = z) at `value`,
    /// truncated to `order`.
    pub fn variable(axis: usize, value: f64, order: usize) -> Jet {
        let t = tables();
        let mut c = [0.0; LEN];
        c[0] = value;
        let pos = match axis {
            0 => t.position[1][0][0],
            1 => t.position[0][1][0],
            _ => t.position[0][0][1],
        };
        c[pos as usize] = 1.0;
        Jet { c, order: order.min(MAX_ORDER) as u8 }
    }

    /// Jets of (x, y, z) at a point, at full order.
    pub fn coords(p: [f64; 3]) -> (Jet, Jet, Jet) {
        Self::coords_ord(p, MAX_ORDER)
    }

    /// Jets of (x, y, z) at a point, truncated to `order`.
    pub fn coords_ord(p: [f64; 3], order: usize) -> (Jet, Jet, Jet) {
        (
            Jet::variable(0, p[0], order),
            Jet::variable(1, p[1], order),
            Jet::variable(2, p[2], order),
        )
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// The partial derivative d^(mx+my+mz) f / dx^mx dy^my dz^mz.
    pub fn deriv(&self, mx: usize, my: usize, mz: usize) -> f64 {
        debug_assert!(
            mx + my + mz <= self.order as usize,
            "jet truncated at order {}, asked for {}",
            self.order,
            mx + my + mz
        );
        let t = tables();
        let pos = t.position[mx][my][mz] as usize;
        self.c[pos] * t.factorial_product[pos]
    }

    pub fn dx(&self) -> f64 {
        self.deriv(1, 0, 0)
    }
    pub fn dy(&self) -> f64 {
        self.deriv(0, 1, 0)
    }
    pub fn dz(&self) -> f64 {
        self.deriv(0, 0, 1)
    }

    /// The partial-derivative jet along `axis`; one order lower than self.
    pub fn deriv_jet(&self, axis: usize) -> Jet {
        let t = tables();
        let mut c = [0.0; LEN];
        for (p, &(mx, my, mz)) in t.monomials.iter().enumerate() {
            let (mx, my, mz) = (mx as usize, my as usize, mz as usize);
            if mx + my + mz >= MAX_ORDER {
                continue;
            }
            let (src, mult) = match axis {
                0 => (t.position[mx + 1][my][mz], (mx + 1) as f64),
                1 => (t.position[mx][my + 1][mz], (my + 1) as f64),
                _ => (t.position[mx][my][mz + 1], (mz + 1) as f64),
            };
            c[p] = self.c[src as usize] * mult;
        }
        Jet { c, order: self.order.saturating_sub(1) }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let t = tables();
        let order = self.order.min(other.order);
        let mut c = [0.0; LEN];
        for &(p, q, r) in &t.products[..t.prefix[order as usize]] {
            c[r as usize] += self.c[p as usize] * other.c[q as usize];
        }
        Jet { c, order }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut c = self.c;
        for v in &mut c {
            *v *= s;
        }
        Jet { c, order: self.order }
    }

    /// Compose a univariate function: `derivs[k]` must hold F^(k) at
    /// `self.value()`. Exact to the truncation order.
    pub fn compose(&self, derivs: [f64; MAX_ORDER + 1]) -> Jet {
        let mut w = *self;
        w.c[0] = 0.0;
        // Horner evaluation of sum_k derivs[k]/k! w^k.
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];
        let ord = self.order as usize;
        let mut r = Jet::constant(derivs[ord] / fact[ord]);
        r.order = self.order;
        for k in (0..ord).rev() {
            r = r.mul(&w);
            r.c[0] += derivs[k] / fact[k];
        }
        r
    }

    pub fn recip(&self) -> Jet {
        let g = self.value();
        let mut d = [0.0; MAX_ORDER + 1];
        let mut v = 1.0 / g;
        let mut factk = 1.0;
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = v * factk;
            v /= -g;
            factk *= (k + 1) as f64;
        }
        self.compose(d)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose([e; MAX_ORDER + 1])
    }

    pub fn ln(&self) -> Jet {
        let g = self.value();
        let mut d = [0.0; MAX_ORDER + 1];
        d[0] = g.ln();
        // F^(k) = (-1)^(k-1) (k-1)! / g^k
        let mut sign = 1.0;
        let mut fkm1 = 1.0;
        let mut gk = g;
        for k in 1..=MAX_ORDER {
            d[k] = sign * fkm1 / gk;
            sign = -sign;
            fkm1 *= k as f64;
            gk *= g;
        }
        self.compose(d)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c, s, c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s, c, -s])
    }

    pub fn tan(&self) -> Jet {
        self.sin().mul(&self.cos().recip())
    }

    pub fn sqrt(&self) -> Jet {
        let g = self.value();
        let mut d = [0.0; MAX_ORDER + 1];
        let mut coeff = 1.0;
        let mut expo = 0.5;
        let mut v = g.sqrt();
        for slot in d.iter_mut() {
            *slot = coeff * v;
            coeff *= expo;
            expo -= 1.0;
            v /= g;
        }
        self.compose(d)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n == 0 {
            return Jet::constant(1.0);
        }
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut r = *self;
        for _ in 1..n {
            r = r.mul(self);
        }
        r
    }

    pub fn powf(&self, y: f64) -> Jet {
        if y == y.round() && y.abs() <= 64.0 {
            return self.powi(y as i32);
        }
        self.ln().scale(y).exp()
    }

    pub fn abs(&self) -> Jet {
        if self.value() >= 0.0 {
            *self
        } else {
            self.neg()
        }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        Jet { c, order: self.order.min(rhs.order) }
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        Jet { c, order: self.order.min(rhs.order) }
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        Jet::mul(&self, &rhs)
    }
}

impl std::ops::Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.mul(&rhs.recip())
    }
}

impl std::ops::Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut c = self.c;
        c[0] += rhs;
        Jet { c, order: self.order }
    }
}

impl std::ops::Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        let mut c = self.c;
        c[0] -= rhs;
        Jet { c, order: self.order }
    }
}

impl std::ops::Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        let scale = 1.0f64.max(a.abs()).max(b.abs());
        assert!((a - b).abs() <= tol * scale, "{a} vs {b}");
    }

    #[test]
    fn polynomial_partials_exact() {
        // f = x^2 y + 3 x z^3
        let (x, y, z) = Jet::coords([2.0, -1.0, 0.5]);
        let f = x * x * y + x * z.powi(3) * 3.0;
        close(f.value(), 4.0 * -1.0 + 3.0 * 2.0 * 0.125, 1e-15);
        close(f.deriv(1, 0, 0), 2.0 * 2.0 * -1.0 + 3.0 * 0.125, 1e-15);
        close(f.deriv(2, 1, 0), 2.0, 1e-15);
        close(f.deriv(1, 0, 3), 18.0, 1e-15);
        close(f.deriv(0, 0, 2), 3.0 * 2.0 * 6.0 * 0.5, 1e-15);
        close(f.deriv(2, 2, 0), 0.0, 1e-15);
    }

    #[test]
    fn transcendental_partials() {
        // f = exp(x^2 - y^2) sin(z) at (0.3, 0.2, 0.5)
        let (xv, yv, zv) = (0.3, 0.2, 0.5);
        let (x, y, z) = Jet::coords([xv, yv, zv]);
        let f = (x * x - y * y).exp() * z.sin();
        let e = (xv * xv - yv * yv).exp();
        close(f.value(), e * zv.sin(), 1e-14);
        close(f.dx(), 2.0 * xv * e * zv.sin(), 1e-14);
        close(f.dy(), -2.0 * yv * e * zv.sin(), 1e-14);
        close(f.dz(), e * zv.cos(), 1e-14);
        close(f.deriv(2, 0, 0), (2.0 + 4.0 * xv * xv) * e * zv.sin(), 1e-13);
        close(f.deriv(1, 1, 1), -4.0 * xv * yv * e * zv.cos(), 1e-13);
        close(f.deriv(0, 0, 5), e * zv.cos(), 1e-13);
    }

    #[test]
    fn truncated_orders_match_full(){
        // The low-order fast path must agree with full-order evaluation.
        let p = [0.31, -0.44, 0.9];
        let full = {
            let (x, y, z) = Jet::coords(p);
            ((x * 2.0 - y + z).exp() + (x * y).sin()).recip()
        };
        for ord in 0..=3usize {
            let (x, y, z) = Jet::coords_ord(p, ord);
            let t = ((x * 2.0 - y + z).exp() + (x * y).sin()).recip();
            assert_eq!(t.order(), ord);
            close(t.value(), full.value(), 1e-15);
            if ord >= 1 {
                close(t.dx(), full.dx(), 1e-15);
                close(t.dz(), full.dz(), 1e-15);
            }
            if ord >= 2 {
                close(t.deriv(1, 1, 0), full.deriv(1, 1, 0), 1e-15);
                close(t.deriv(0, 0, 2), full.deriv(0, 0, 2), 1e-15);
            }
        }
    }

    #[test]
    fn reciprocal_of_composite() {
        // kappa = 1/(3 + sin(4x)cos(4y)) from a built-in problem
        let (xv, yv) = (0.7, 0.4);
        let (x, y, _) = Jet::coords([xv, yv, 0.0]);
        let k = ((x * 4.0).sin() * (y * 4.0).cos() + 3.0).recip();
        let denom = 3.0 + (4.0 * xv).sin() * (4.0 * yv).cos();
        close(k.value(), 1.0 / denom, 1e-14);
        let ddx = -(4.0 * (4.0 * xv).cos() * (4.0 * yv).cos()) / (denom * denom);
        close(k.dx(), ddx, 1e-13);
    }

    #[test]
    fn quotient_rule_against_product() {
        let (x, y, _) = Jet::coords([1.2, -0.3, 0.0]);
        let num = x * y + 2.0;
        let den = x * x + y * y + 1.0;
        let q = num / den;
        let back = q * den;
        for (mx, my, mz) in [(0, 0, 0), (1, 0, 0), (0, 2, 0), (2, 1, 0), (3, 2, 0)] {
            close(back.deriv(mx, my, mz), num.deriv(mx, my, mz), 1e-12);
        }
    }

    #[test]
    fn deriv_jet_chain_rule() {
        // d/dx of exp(x*y) is y*exp(x*y); compare jets up to order 3.
        let (x, y, _) = Jet::coords([0.4, -0.7, 0.0]);
        let f = (x * y).exp();
        let g = f.deriv_jet(0);
        let expect = y * (x * y).exp();
        for (mx, my) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (2, 1)] {
            close(g.deriv(mx, my, 0), expect.deriv(mx, my, 0), 1e-13);
        }
    }

    #[test]
    fn sqrt_ln_tan_values() {
        let (x, _, _) = Jet::coords([2.0, 0.0, 0.0]);
        close(x.sqrt().value(), 2.0f64.sqrt(), 1e-15);
        close(x.sqrt().dx(), 0.5 / 2.0f64.sqrt(), 1e-15);
        close(x.ln().dx(), 0.5, 1e-15);
        close(x.ln().deriv(2, 0, 0), -0.25, 1e-15);
        let t = Jet::variable(0, 0.3, MAX_ORDER).tan();
        close(t.value(), 0.3f64.tan(), 1e-14);
        close(t.dx(), 1.0 / 0.3f64.cos().powi(2), 1e-13);
    }
}
