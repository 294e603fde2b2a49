//! Transcription probes: the printed stencil formulas expanded into raw
//! monomial data, typed independently of the shared-subexpression
//! evaluation, with a probe harness that switches on each monomial's
//! support set and compares against the exact rational sum. Used by both
//! the unit tests and the acceptance suite.

pub mod two_d {
    use crate::stencil2d::{stencil_at, StencilInput2};

    /// Identify the 18 scalar inputs by name for the probe harness.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum In {
        A,
        Ax,
        Ay,
        Axx,
        Ayy,
        B,
        Bx,
        By,
        Bxx,
        Byy,
        D,
        Dx,
        Dy,
        Dxx,
        Dyy,
    }

    pub fn input_with(values: &[(In, f64)]) -> StencilInput2 {
        let mut s = StencilInput2::default();
        for &(which, v) in values {
            match which {
                In::A => s.a.v = v,
                In::Ax => s.a.x = v,
                In::Ay => s.a.y = v,
                In::Axx => s.a.xx = v,
                In::Ayy => s.a.yy = v,
                In::B => s.b.v = v,
                In::Bx => s.b.x = v,
                In::By => s.b.y = v,
                In::Bxx => s.b.xx = v,
                In::Byy => s.b.yy = v,
                In::D => s.d.v = v,
                In::Dx => s.d.x = v,
                In::Dy => s.d.y = v,
                In::Dxx => s.d.xx = v,
                In::Dyy => s.d.yy = v,
            }
        }
        s
    }

    /// One printed monomial: h-power, exact rational coefficient, factors.
    struct Monomial {
        pow: u32,
        num: i64,
        den: i64,
        factors: &'static [In],
    }

    /// The full printed polynomial of one stencil coefficient.
    struct CoeffPoly {
        r: i32,
        l: i32,
        base_num: i64,
        base_den: i64,
        monomials: &'static [Monomial],
    }

    macro_rules! mono {
        ($p:expr, $n:expr, $d:expr, [$($f:expr),*]) => {
            Monomial { pow: $p, num: $n, den: $d, factors: &[$($f),*] }
        };
    }

    use In::*;

    /// Transcription of the printed formulas as raw monomial data,
    /// independent of the shared-subexpression evaluation in `stencil_at`.
    fn printed_table() -> Vec<CoeffPoly> {
        vec![
            CoeffPoly {
                r: -1,
                l: -1,
                base_num: 1,
                base_den: 6,
                monomials: &[mono!(1, -1, 12, [A]), mono!(1, -1, 12, [B])],
            },
            CoeffPoly {
                r: -1,
                l: 0,
                base_num: 2,
                base_den: 3,
                monomials: &[
                    mono!(1, -1, 3, [A]),
                    mono!(2, 1, 12, [A, A]),
                    mono!(2, 1, 12, [A, B]),
                    mono!(2, 1, 12, [D]),
                    mono!(2, 2, 12, [Ax]),
                    mono!(2, 1, 12, [Ay]),
                    mono!(2, 1, 12, [Bx]),
                    mono!(3, -1, 24, [A, Ax]),
                    mono!(3, -1, 24, [A, D]),
                    mono!(3, -1, 24, [B, Ay]),
                    mono!(3, -2, 24, [Dx]),
                    mono!(3, -1, 24, [Axx]),
                    mono!(3, -1, 24, [Ayy]),
                ],
            },
            CoeffPoly {
                r: -1,
                l: 1,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, -1, 12, [A]),
                    mono!(1, 1, 12, [B]),
                    mono!(2, -1, 12, [A, B]),
                    mono!(2, -1, 12, [Ay]),
                    mono!(2, -1, 12, [Bx]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: -1,
                base_num: 2,
                base_den: 3,
                monomials: &[
                    mono!(1, -1, 3, [B]),
                    mono!(2, 1, 12, [B, B]),
                    mono!(2, 1, 12, [A, B]),
                    mono!(2, 1, 12, [Ay]),
                    mono!(2, 1, 12, [Bx]),
                    mono!(2, 2, 12, [By]),
                    mono!(2, 1, 12, [D]),
                    mono!(3, -1, 24, [A, Bx]),
                    mono!(3, -1, 24, [B, By]),
                    mono!(3, -1, 24, [B, D]),
                    mono!(3, -2, 24, [Dy]),
                    mono!(3, -1, 24, [Bxx]),
                    mono!(3, -1, 24, [Byy]),
                    mono!(4, 1, 12, [B, Dy]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: 0,
                base_num: -10,
                base_den: 3,
                monomials: &[
                    mono!(2, -1, 6, [A, A]),
                    mono!(2, -1, 6, [A, B]),
                    mono!(2, -1, 6, [B, B]),
                    mono!(2, 4, 6, [D]),
                    mono!(2, -2, 6, [Ax]),
                    mono!(2, -1, 6, [Ay]),
                    mono!(2, -1, 6, [Bx]),
                    mono!(2, -2, 6, [By]),
                    mono!(4, 1, 12, [A, Dx]),
                    mono!(4, 1, 12, [Dxx]),
                    mono!(4, 1, 12, [Dyy]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: 1,
                base_num: 2,
                base_den: 3,
                monomials: &[
                    mono!(1, 1, 3, [B]),
                    mono!(2, 1, 12, [A, B]),
                    mono!(2, 1, 12, [B, B]),
                    mono!(2, 1, 12, [D]),
                    mono!(2, 1, 12, [Ay]),
                    mono!(2, 1, 12, [Bx]),
                    mono!(2, 2, 12, [By]),
                    mono!(3, 1, 24, [A, Bx]),
                    mono!(3, 1, 24, [B, By]),
                    mono!(3, 1, 24, [B, D]),
                    mono!(3, 2, 24, [Dy]),
                    mono!(3, 1, 24, [Bxx]),
                    mono!(3, 1, 24, [Byy]),
                ],
            },
            CoeffPoly {
                r: 1,
                l: -1,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, 1, 12, [A]),
                    mono!(1, -1, 12, [B]),
                    mono!(2, -1, 12, [A, B]),
                    mono!(2, -1, 12, [Ay]),
                    mono!(2, -1, 12, [Bx]),
                    mono!(4, -1, 12, [B, Dy]),
                ],
            },
            CoeffPoly {
                r: 1,
                l: 0,
                base_num: 2,
                base_den: 3,
                monomials: &[
                    mono!(1, 1, 3, [A]),
                    mono!(2, 1, 12, [A, A]),
                    mono!(2, 1, 12, [A, B]),
                    mono!(2, 1, 12, [D]),
                    mono!(2, 2, 12, [Ax]),
                    mono!(2, 1, 12, [Ay]),
                    mono!(2, 1, 12, [Bx]),
                    mono!(3, 1, 24, [A, Ax]),
                    mono!(3, 1, 24, [A, D]),
                    mono!(3, 1, 24, [B, Ay]),
                    mono!(3, 2, 24, [Dx]),
                    mono!(3, 1, 24, [Axx]),
                    mono!(3, 1, 24, [Ayy]),
                    mono!(4, 1, 12, [B, Dy]),
                ],
            },
            CoeffPoly {
                r: 1,
                l: 1,
                base_num: 1,
                base_den: 6,
                monomials: &[mono!(1, 1, 12, [A]), mono!(1, 1, 12, [B])],
            },
        ]
    }
    /// Run every probe; returns human-readable mismatches (empty = pass).
    pub fn check() -> Vec<String> {
        let h = 0.5;
        let mut mismatches = Vec::new();
        for poly in &printed_table() {
            let mut probes: Vec<Vec<In>> = Vec::new();
            for m in poly.monomials {
                let mut support: Vec<In> = m.factors.to_vec();
                support.dedup();
                if !probes.contains(&support) {
                    probes.push(support);
                }
                for &f in m.factors {
                    let single = vec![f];
                    if !probes.contains(&single) {
                        probes.push(single);
                    }
                }
            }
            probes.push(vec![]);
            for probe in &probes {
                let on: Vec<(In, f64)> = probe.iter().map(|&w| (w, 1.0)).collect();
                let input = input_with(&on);
                let got = stencil_at(&input, h).at(poly.r, poly.l);
                let mut num: i128 = 0;
                let den: i128 = 24 * 16;
                num += poly.base_num as i128 * (den / poly.base_den as i128);
                for m in poly.monomials {
                    if m.factors.iter().all(|f| probe.contains(f)) {
                        let hscale = 1i128 << m.pow;
                        num += m.num as i128 * (den / (m.den as i128 * hscale));
                    }
                }
                let expect = num as f64 / den as f64;
                if (got - expect).abs() > 1e-14 * expect.abs().max(1.0) {
                    mismatches.push(format!(
                        "C[{},{}] probe {:?}: got {got}, printed {expect}",
                        poly.r, poly.l, probe
                    ));
                }
            }
        }
        mismatches
    }
}

pub mod three_d {
    use crate::stencil3d::{stencil_at, StencilInput3};

    // Input identifiers for the probe harness: (coefficient, partial).
    // Coefficients: 0=a, 1=b, 2=c, 3=d.
    // Partials: 0=v, 1=x, 2=y, 3=z, 4=xx, 5=xy, 6=xz, 7=yy, 8=yz, 9=zz.
    pub type In = (usize, usize);
    pub const A: In = (0, 0);
    pub const AX: In = (0, 1);
    pub const AY: In = (0, 2);
    pub const AZ: In = (0, 3);
    pub const AXX: In = (0, 4);
    pub const AYY: In = (0, 7);
    pub const AZZ: In = (0, 9);
    pub const B: In = (1, 0);
    pub const BX: In = (1, 1);
    pub const BY: In = (1, 2);
    pub const BZ: In = (1, 3);
    pub const BXX: In = (1, 4);
    pub const BYY: In = (1, 7);
    pub const BZZ: In = (1, 9);
    pub const C: In = (2, 0);
    pub const CX: In = (2, 1);
    pub const CY: In = (2, 2);
    pub const CZ: In = (2, 3);
    pub const CXX: In = (2, 4);
    pub const CYY: In = (2, 7);
    pub const CZZ: In = (2, 9);
    pub const D: In = (3, 0);
    pub const DX: In = (3, 1);
    pub const DY: In = (3, 2);
    pub const DZ: In = (3, 3);
    pub const DXX: In = (3, 4);
    pub const DYY: In = (3, 7);
    pub const DZZ: In = (3, 9);

    pub fn input_with(values: &[(In, f64)]) -> StencilInput3 {
        let mut s = StencilInput3::default();
        for &((coeff, part), v) in values {
            let slice = match coeff {
                0 => &mut s.a,
                1 => &mut s.b,
                2 => &mut s.c,
                _ => &mut s.d,
            };
            match part {
                0 => slice.v = v,
                1 => slice.x = v,
                2 => slice.y = v,
                3 => slice.z = v,
                4 => slice.xx = v,
                5 => slice.xy = v,
                6 => slice.xz = v,
                7 => slice.yy = v,
                8 => slice.yz = v,
                _ => slice.zz = v,
            }
        }
        s
    }

    struct Monomial {
        pow: u32,
        num: i64,
        den: i64,
        factors: &'static [In],
    }

    struct CoeffPoly {
        r: i32,
        l: i32,
        s: i32,
        base_num: i64,
        base_den: i64,
        monomials: &'static [Monomial],
    }

    macro_rules! mono {
        ($p:expr, $n:expr, $d:expr, [$($f:expr),*]) => {
            Monomial { pow: $p, num: $n, den: $d, factors: &[$($f),*] }
        };
    }

    /// The printed formulas expanded into raw monomials (all phi helpers
    /// unfolded), typed independently from the shared-subexpression
    /// evaluation in `stencil_at`.
    fn printed_table() -> Vec<CoeffPoly> {
        vec![
            CoeffPoly {
                r: -1,
                l: -1,
                s: 0,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, -1, 12, [A]),
                    mono!(1, -1, 12, [B]),
                    mono!(3, -1, 24, [A, AX]),
                    mono!(4, -1, 12, [A, DX]),
                    mono!(4, -1, 12, [C, DZ]),
                ],
            },
            CoeffPoly {
                r: -1,
                l: 0,
                s: -1,
                base_num: 1,
                base_den: 6,
                monomials: &[mono!(1, -1, 12, [A]), mono!(1, -1, 12, [C])],
            },
            CoeffPoly {
                r: -1,
                l: 0,
                s: 0,
                base_num: 1,
                base_den: 3,
                monomials: &[
                    mono!(1, -1, 6, [A]),
                    mono!(2, 1, 12, [A, A]),
                    mono!(2, 1, 12, [A, B]),
                    mono!(2, 1, 12, [A, C]),
                    mono!(2, 1, 12, [D]),
                    mono!(2, 2, 12, [AX]),
                    mono!(2, 1, 12, [BX]),
                    mono!(2, 1, 12, [CX]),
                    mono!(2, 1, 12, [AY]),
                    mono!(2, 1, 12, [AZ]),
                    mono!(3, -1, 12, [D, A]),
                    mono!(3, -1, 12, [D, B]),
                    mono!(3, -1, 12, [B, AY]),
                    mono!(3, -1, 12, [B, BY]),
                    mono!(3, -1, 12, [B, CY]),
                    mono!(4, 1, 12, [C, DZ]),
                ],
            },
            CoeffPoly {
                r: -1,
                l: 0,
                s: 1,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, -1, 12, [A]),
                    mono!(1, 1, 12, [C]),
                    mono!(2, -1, 12, [A, C]),
                    mono!(2, -1, 12, [AZ]),
                    mono!(2, -1, 12, [CX]),
                    mono!(3, 1, 24, [A, D]),
                    mono!(3, 1, 24, [B, AY]),
                    mono!(3, 1, 24, [B, BY]),
                    mono!(3, 2, 24, [B, CY]),
                    mono!(3, 1, 24, [B, D]),
                    mono!(3, -1, 24, [AZ, C]),
                    mono!(3, -2, 24, [DX]),
                    mono!(3, -1, 24, [AXX]),
                    mono!(3, -1, 24, [AYY]),
                    mono!(3, -1, 24, [AZZ]),
                ],
            },
            CoeffPoly {
                r: -1,
                l: 1,
                s: 0,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, -1, 12, [A]),
                    mono!(1, 1, 12, [B]),
                    mono!(2, -1, 12, [A, B]),
                    mono!(2, -1, 12, [AY]),
                    mono!(2, -1, 12, [BX]),
                    mono!(3, 1, 24, [B, BY]),
                    mono!(3, 1, 24, [B, D]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: -1,
                s: -1,
                base_num: 1,
                base_den: 6,
                monomials: &[mono!(1, -1, 12, [B]), mono!(1, -1, 12, [C])],
            },
            CoeffPoly {
                r: 0,
                l: -1,
                s: 0,
                base_num: 1,
                base_den: 3,
                monomials: &[
                    mono!(1, -1, 6, [B]),
                    mono!(2, 1, 12, [A, B]),
                    mono!(2, 1, 12, [B, B]),
                    mono!(2, 1, 12, [B, C]),
                    mono!(2, 1, 12, [D]),
                    mono!(2, 1, 12, [AY]),
                    mono!(2, 2, 12, [BY]),
                    mono!(2, 1, 12, [CY]),
                    mono!(2, 1, 12, [BX]),
                    mono!(2, 1, 12, [BZ]),
                    mono!(3, -2, 12, [DX]),
                    mono!(3, -2, 12, [DY]),
                    mono!(3, -2, 12, [DZ]),
                    mono!(3, -1, 12, [BXX]),
                    mono!(3, -1, 12, [BYY]),
                    mono!(3, -1, 12, [AXX]),
                    mono!(3, -1, 12, [AYY]),
                    mono!(3, -1, 12, [AZZ]),
                    mono!(3, -1, 12, [CXX]),
                    mono!(3, -1, 12, [CYY]),
                    mono!(3, -1, 12, [CZZ]),
                    mono!(4, 2, 12, [A, DX]),
                    mono!(4, 1, 12, [B, DY]),
                    mono!(4, 1, 12, [C, DZ]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: -1,
                s: 1,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, -1, 12, [B]),
                    mono!(1, 1, 12, [C]),
                    mono!(2, -1, 12, [B, C]),
                    mono!(2, -1, 12, [BZ]),
                    mono!(2, -1, 12, [CY]),
                    mono!(3, 2, 24, [A, AX]),
                    mono!(3, -1, 24, [A, BX]),
                    mono!(3, -1, 24, [C, BZ]),
                    mono!(3, 4, 24, [DX]),
                    mono!(3, 2, 24, [DY]),
                    mono!(3, 4, 24, [DZ]),
                    mono!(3, -1, 24, [BZZ]),
                    mono!(3, 1, 24, [BXX]),
                    mono!(3, 1, 24, [BYY]),
                    mono!(3, 2, 24, [AXX]),
                    mono!(3, 2, 24, [AYY]),
                    mono!(3, 2, 24, [AZZ]),
                    mono!(3, 2, 24, [CXX]),
                    mono!(3, 2, 24, [CYY]),
                    mono!(3, 2, 24, [CZZ]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: 0,
                s: -1,
                base_num: 1,
                base_den: 3,
                monomials: &[
                    mono!(1, -1, 6, [C]),
                    mono!(2, 1, 12, [A, C]),
                    mono!(2, 1, 12, [B, C]),
                    mono!(2, 1, 12, [C, C]),
                    mono!(2, 1, 12, [D]),
                    mono!(2, 1, 12, [AZ]),
                    mono!(2, 1, 12, [BZ]),
                    mono!(2, 2, 12, [CZ]),
                    mono!(2, 1, 12, [CX]),
                    mono!(2, 1, 12, [CY]),
                    mono!(4, -1, 12, [B, DY]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: 0,
                s: 0,
                base_num: -4,
                base_den: 1,
                monomials: &[
                    mono!(2, -1, 6, [A, A]),
                    mono!(2, -1, 6, [A, B]),
                    mono!(2, -1, 6, [A, C]),
                    mono!(2, -1, 6, [B, B]),
                    mono!(2, -1, 6, [B, C]),
                    mono!(2, -1, 6, [C, C]),
                    mono!(2, 3, 6, [D]),
                    mono!(2, -2, 6, [AX]),
                    mono!(2, -1, 6, [AY]),
                    mono!(2, -1, 6, [AZ]),
                    mono!(2, -1, 6, [BX]),
                    mono!(2, -2, 6, [BY]),
                    mono!(2, -1, 6, [BZ]),
                    mono!(2, -1, 6, [CX]),
                    mono!(2, -1, 6, [CY]),
                    mono!(2, -2, 6, [CZ]),
                    mono!(3, 1, 12, [A, AX]),
                    mono!(3, -1, 12, [A, BX]),
                    mono!(3, -1, 12, [A, CX]),
                    mono!(3, 1, 12, [B, AY]),
                    mono!(3, 1, 12, [B, BY]),
                    mono!(3, 1, 12, [B, CY]),
                    mono!(3, -1, 12, [C, AZ]),
                    mono!(3, -1, 12, [C, BZ]),
                    mono!(3, -1, 12, [C, CZ]),
                    mono!(3, 1, 12, [D, A]),
                    mono!(3, 1, 12, [D, B]),
                    mono!(3, -1, 12, [D, C]),
                    mono!(3, -1, 12, [BZZ]),
                    mono!(3, 2, 12, [DX]),
                    mono!(3, 2, 12, [DY]),
                    mono!(3, 2, 12, [DZ]),
                    mono!(3, 1, 12, [BXX]),
                    mono!(3, 1, 12, [BYY]),
                    mono!(3, 1, 12, [AXX]),
                    mono!(3, 1, 12, [AYY]),
                    mono!(3, 1, 12, [AZZ]),
                    mono!(3, 1, 12, [CXX]),
                    mono!(3, 1, 12, [CYY]),
                    mono!(3, 1, 12, [CZZ]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: 0,
                s: 1,
                base_num: 1,
                base_den: 3,
                monomials: &[
                    mono!(1, 1, 6, [C]),
                    mono!(2, 1, 12, [A, C]),
                    mono!(2, 1, 12, [B, C]),
                    mono!(2, 1, 12, [C, C]),
                    mono!(2, 1, 12, [D]),
                    mono!(2, 1, 12, [AZ]),
                    mono!(2, 1, 12, [BZ]),
                    mono!(2, 2, 12, [CZ]),
                    mono!(2, 1, 12, [CX]),
                    mono!(2, 1, 12, [CY]),
                    mono!(3, 1, 12, [C, AZ]),
                    mono!(3, 1, 12, [C, BZ]),
                    mono!(3, 1, 12, [C, CZ]),
                    mono!(3, -2, 12, [A, AX]),
                    mono!(3, 1, 12, [A, BX]),
                    mono!(3, 1, 12, [A, CX]),
                    mono!(3, -1, 12, [B, AY]),
                    mono!(3, -1, 12, [B, BY]),
                    mono!(3, -1, 12, [B, CY]),
                    mono!(3, -1, 12, [D, A]),
                    mono!(3, -1, 12, [D, B]),
                    mono!(3, 1, 12, [D, C]),
                    mono!(3, 1, 12, [BZZ]),
                    mono!(3, -2, 12, [DX]),
                    mono!(3, -2, 12, [DY]),
                    mono!(3, -2, 12, [DZ]),
                    mono!(3, -1, 12, [BXX]),
                    mono!(3, -1, 12, [BYY]),
                    mono!(3, -1, 12, [AXX]),
                    mono!(3, -1, 12, [AYY]),
                    mono!(3, -1, 12, [AZZ]),
                    mono!(3, -1, 12, [CXX]),
                    mono!(3, -1, 12, [CYY]),
                    mono!(3, -1, 12, [CZZ]),
                    mono!(4, 1, 12, [DXX]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: 1,
                s: -1,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, 1, 12, [B]),
                    mono!(1, -1, 12, [C]),
                    mono!(2, -1, 12, [B, C]),
                    mono!(2, -1, 12, [BZ]),
                    mono!(2, -1, 12, [CY]),
                    mono!(3, -1, 24, [C, AZ]),
                    mono!(3, -1, 24, [C, CZ]),
                    mono!(3, -1, 24, [C, D]),
                    mono!(3, -1, 24, [A, CX]),
                    mono!(3, -2, 24, [DX]),
                    mono!(3, -2, 24, [DZ]),
                    mono!(3, 1, 24, [BZZ]),
                    mono!(3, -1, 24, [AXX]),
                    mono!(3, -1, 24, [AYY]),
                    mono!(3, -1, 24, [AZZ]),
                    mono!(3, -1, 24, [CXX]),
                    mono!(3, -1, 24, [CYY]),
                    mono!(3, -1, 24, [CZZ]),
                    mono!(4, 1, 12, [A, DX]),
                    mono!(4, 1, 12, [B, DY]),
                    mono!(4, 1, 12, [DXX]),
                    mono!(4, 1, 12, [DYY]),
                    mono!(4, 1, 12, [DZZ]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: 1,
                s: 0,
                base_num: 1,
                base_den: 3,
                monomials: &[
                    mono!(1, 1, 6, [B]),
                    mono!(2, 1, 12, [A, B]),
                    mono!(2, 1, 12, [B, B]),
                    mono!(2, 1, 12, [B, C]),
                    mono!(2, 1, 12, [D]),
                    mono!(2, 1, 12, [AY]),
                    mono!(2, 2, 12, [BY]),
                    mono!(2, 1, 12, [CY]),
                    mono!(2, 1, 12, [BX]),
                    mono!(2, 1, 12, [BZ]),
                    mono!(3, 1, 12, [C, AZ]),
                    mono!(3, 1, 12, [C, BZ]),
                    mono!(3, 1, 12, [C, CZ]),
                    mono!(3, 1, 12, [C, D]),
                    mono!(3, -1, 12, [A, AX]),
                    mono!(3, 1, 12, [A, BX]),
                    mono!(3, 1, 12, [A, CX]),
                    mono!(4, -1, 12, [DXX]),
                ],
            },
            CoeffPoly {
                r: 0,
                l: 1,
                s: 1,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, 1, 12, [B]),
                    mono!(1, 1, 12, [C]),
                    mono!(3, -1, 24, [C, AZ]),
                    mono!(3, -1, 24, [C, BZ]),
                    mono!(3, -1, 24, [C, CZ]),
                    mono!(3, -1, 24, [C, D]),
                    mono!(3, 2, 24, [A, AX]),
                    mono!(3, -1, 24, [A, BX]),
                    mono!(3, -1, 24, [A, CX]),
                    mono!(3, 2, 24, [DX]),
                    mono!(3, 2, 24, [DY]),
                    mono!(3, 2, 24, [DZ]),
                    mono!(3, 1, 24, [BXX]),
                    mono!(3, 1, 24, [BYY]),
                    mono!(3, 1, 24, [AXX]),
                    mono!(3, 1, 24, [AYY]),
                    mono!(3, 1, 24, [AZZ]),
                    mono!(3, 1, 24, [CXX]),
                    mono!(3, 1, 24, [CYY]),
                    mono!(3, 1, 24, [CZZ]),
                ],
            },
            CoeffPoly {
                r: 1,
                l: -1,
                s: 0,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, 1, 12, [A]),
                    mono!(1, -1, 12, [B]),
                    mono!(2, -1, 12, [A, B]),
                    mono!(2, -1, 12, [AY]),
                    mono!(2, -1, 12, [BX]),
                    mono!(3, -1, 24, [AX, A]),
                    mono!(3, -1, 24, [B, BY]),
                    mono!(3, -1, 24, [B, D]),
                    mono!(4, 1, 12, [DYY]),
                    mono!(4, 1, 12, [DZZ]),
                ],
            },
            CoeffPoly {
                r: 1,
                l: 0,
                s: -1,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, 1, 12, [A]),
                    mono!(1, -1, 12, [C]),
                    mono!(2, -1, 12, [A, C]),
                    mono!(2, -1, 12, [AZ]),
                    mono!(2, -1, 12, [CX]),
                    mono!(3, 1, 24, [AZ, C]),
                    mono!(3, -1, 24, [B, CY]),
                    mono!(3, 2, 24, [DX]),
                    mono!(3, -1, 24, [BZZ]),
                    mono!(3, 1, 24, [AXX]),
                    mono!(3, 1, 24, [AYY]),
                    mono!(3, 1, 24, [AZZ]),
                    mono!(4, -1, 12, [A, DX]),
                    mono!(4, -1, 12, [DYY]),
                    mono!(4, -1, 12, [DZZ]),
                ],
            },
            CoeffPoly {
                r: 1,
                l: 0,
                s: 0,
                base_num: 1,
                base_den: 3,
                monomials: &[
                    mono!(1, 1, 6, [A]),
                    mono!(2, 1, 12, [A, A]),
                    mono!(2, 1, 12, [A, B]),
                    mono!(2, 1, 12, [A, C]),
                    mono!(2, 1, 12, [D]),
                    mono!(2, 2, 12, [AX]),
                    mono!(2, 1, 12, [BX]),
                    mono!(2, 1, 12, [CX]),
                    mono!(2, 1, 12, [AY]),
                    mono!(2, 1, 12, [AZ]),
                    mono!(3, 1, 12, [A, AX]),
                    mono!(3, 1, 12, [BZZ]),
                ],
            },
            CoeffPoly {
                r: 1,
                l: 0,
                s: 1,
                base_num: 1,
                base_den: 6,
                monomials: &[
                    mono!(1, 1, 12, [A]),
                    mono!(1, 1, 12, [C]),
                    mono!(3, 1, 24, [D, A]),
                    mono!(3, 1, 24, [D, B]),
                    mono!(3, 1, 24, [B, AY]),
                    mono!(3, 1, 24, [B, BY]),
                    mono!(3, 1, 24, [B, CY]),
                    mono!(3, -1, 24, [BZZ]),
                ],
            },
            CoeffPoly {
                r: 1,
                l: 1,
                s: 0,
                base_num: 1,
                base_den: 6,
                monomials: &[mono!(1, 1, 12, [A]), mono!(1, 1, 12, [B])],
            },
        ]
    }
    /// Run every probe; returns human-readable mismatches (empty = pass).
    pub fn check() -> Vec<String> {
        let h = 0.5;
        let mut mismatches = Vec::new();
        for poly in &printed_table() {
            let mut probes: Vec<Vec<In>> = Vec::new();
            for m in poly.monomials {
                let mut support: Vec<In> = m.factors.to_vec();
                support.dedup();
                if !probes.contains(&support) {
                    probes.push(support);
                }
                for &f in m.factors {
                    let single = vec![f];
                    if !probes.contains(&single) {
                        probes.push(single);
                    }
                }
            }
            probes.push(vec![]);
            for probe in &probes {
                let on: Vec<(In, f64)> = probe.iter().map(|&w| (w, 1.0)).collect();
                let input = input_with(&on);
                let got = stencil_at(&input, h).at(poly.r, poly.l, poly.s);
                let mut num: i128 = 0;
                let den: i128 = 24 * 16;
                num += poly.base_num as i128 * (den / poly.base_den as i128);
                for m in poly.monomials {
                    if m.factors.iter().all(|f| probe.contains(f)) {
                        let hscale = 1i128 << m.pow;
                        num += m.num as i128 * (den / (m.den as i128 * hscale));
                    }
                }
                let expect = num as f64 / den as f64;
                if (got - expect).abs() > 1e-14 * expect.abs().max(1.0) {
                    mismatches.push(format!(
                        "C[{},{},{}] probe {:?}: got {got}, printed {expect}",
                        poly.r, poly.l, poly.s, probe
                    ));
                }
            }
        }
        mismatches
    }
}

pub fn check_2d_monomials() -> Vec<String> {
    two_d::check()
}

pub fn check_3d_monomials() -> Vec<String> {
    three_d::check()
}
