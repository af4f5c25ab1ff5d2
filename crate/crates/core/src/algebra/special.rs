//! Standard normal CDF, density and quantile in double precision.
//!
//! The CDF follows Cody's rational Chebyshev approximations (the same scheme
//! R's `pnorm` uses), with the exp(-x^2/2) factor split so the tail keeps full
//! relative accuracy. The quantile is Wichura's AS241.

#![allow(clippy::excessive_precision, clippy::unreadable_literal)]

use std::f64::consts::PI;

const FRAC_1_SQRT_2PI: f64 = 0.398942280401432677939946059934;
const SQRT_32: f64 = 5.656854249492380195206754896838;

pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    cdf_both(x).0
}

/// Upper tail `1 - Phi(x)`, accurate for large positive `x`.
pub fn norm_sf(x: f64) -> f64 {
    cdf_both(x).1
}

fn cdf_both(x: f64) -> (f64, f64) {
    const A: [f64; 5] = [
        2.2352520354606839287,
        161.02823106855587881,
        1067.6894854603709582,
        18154.981253343561249,
        0.065682337918207449113,
    ];
    const B: [f64; 4] = [47.20258190468824187, 976.09855173777669322, 10260.932208618978205, 45507.789335026729956];
    const C: [f64; 9] = [
        0.39894151208813466764,
        8.8831497943883759412,
        93.506656132177855979,
        597.27027639480026226,
        2494.5375852903726711,
        6848.1904505362823326,
        11602.651437647350124,
        9842.7148383839780218,
        1.0765576773720192317e-8,
    ];
    const D: [f64; 8] = [
        22.266688044328115691,
        235.38790178262499861,
        1519.377599407554805,
        6485.558298266760755,
        18615.571640885098091,
        34900.952721145977266,
        38912.003286093271411,
        19685.429676859990727,
    ];
    const P: [f64; 6] = [
        0.21589853405795699,
        0.1274011611602473639,
        0.022235277870649807,
        0.001421619193227893466,
        2.9112874951168792e-5,
        0.02307344176494017303,
    ];
    const Q: [f64; 5] = [
        1.28426009614491121,
        0.468238212480865118,
        0.0659881378689285515,
        0.00378239633202758244,
        7.29751555083966205e-5,
    ];

    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    let y = x.abs();
    if y <= 0.67448975 {
        let (mut xnum, mut xden) = (0.0, 0.0);
        if y > f64::EPSILON * 0.5 {
            let xsq = x * x;
            xnum = A[4] * xsq;
            xden = xsq;
            for i in 0..3 {
                xnum = (xnum + A[i]) * xsq;
                xden = (xden + B[i]) * xsq;
            }
        }
        let temp = x * (xnum + A[3]) / (xden + B[3]);
        return (0.5 + temp, 0.5 - temp);
    }
    // tail mass at -|x|, scaled by exp(-x^2/2) computed in two pieces
    let split = |temp: f64| {
        let xsq = (y * 16.0).trunc() / 16.0;
        let del = (y - xsq) * (y + xsq);
        (-xsq * xsq * 0.5).exp() * (-del * 0.5).exp() * temp
    };
    let lower_tail = if y <= SQRT_32 {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        split((xnum + C[7]) / (xden + D[7]))
    } else if y < 37.5193 {
        let xsq = 1.0 / (x * x);
        let mut xnum = P[5] * xsq;
        let mut xden = xsq;
        for i in 0..4 {
            xnum = (xnum + P[i]) * xsq;
            xden = (xden + Q[i]) * xsq;
        }
        let temp = xsq * (xnum + P[4]) / (xden + Q[4]);
        split((FRAC_1_SQRT_2PI - temp) / y)
    } else {
        0.0
    };
    if x > 0.0 {
        (1.0 - lower_tail, lower_tail)
    } else {
        (lower_tail, 1.0 - lower_tail)
    }
}

/// Standard normal quantile; `p` outside `(0, 1)` maps to `±inf` or NaN.
pub fn norm_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r
                + 45921.953931549871457)
                * r
                + 13731.693765509461125)
                * r
                + 1971.5909503065514427)
                * r
                + 133.14166789178437745)
                * r
                + 3.387132872796366608)
            / (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r
                + 21213.794301586595867)
                * r
                + 5394.1960214247511077)
                * r
                + 687.1870074920579083)
                * r
                + 42.313330701600911252)
                * r
                + 1.0);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r
            + 1.27045825245236838258)
            * r
            + 3.64784832476320460504)
            * r
            + 5.7694972214606914055)
            * r
            + 4.6303378461565452959)
            * r
            + 1.42343711074968357734)
            / (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966)
                * r
                + 0.14810397642748007459)
                * r
                + 0.68976733498510000455)
                * r
                + 1.6763848301838038494)
                * r
                + 2.05319162663775882187)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r
            + 0.026532189526576123093)
            * r
            + 0.29656057182850489123)
            * r
            + 1.7848265399172913358)
            * r
            + 5.4637849111641143699)
            * r
            + 6.6579046435011037772)
            / (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5)
                * r
                + 7.868691311456132591e-4)
                * r
                + 0.0148753612908506148525)
                * r
                + 0.13692988092273580531)
                * r
                + 0.59983220655588793769)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// `sqrt(2*pi)`, the normal density normalizer.
pub fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // 40-digit references
    const CDF: [(f64, f64); 17] = [
        (-37.0, 5.7255712225245768227e-300),
        (-20.0, 2.7536241186062336951e-89),
        (-10.0, 7.619853024160526066e-24),
        (-8.0, 6.2209605742717841235e-16),
        (-5.5, 1.8989562465887719384e-8),
        (-3.0, 0.0013498980316300945267),
        (-1.5, 0.066807201268858066004),
        (-1.0, 0.15865525393145705141),
        (-0.5, 0.30853753872598689636),
        (-0.1, 0.46017216272297101633),
        (0.0, 0.5),
        (0.3, 0.61791142218895263307),
        (0.6744, 0.74997147862705938531),
        (1.0, 0.84134474606854294859),
        (2.0, 0.9772498680518207928),
        (5.0, 0.99999971334842812081),
        (8.0, 0.9999999999999993779),
    ];

    #[test]
    fn cdf_relative_error_below_1e15() {
        for (x, want) in CDF {
            let got = norm_cdf(x);
            let rel = ((got - want) / want).abs();
            assert!(rel <= 1e-15, "Phi({x}) = {got:e}, want {want:e}, rel {rel:e}");
        }
    }

    #[test]
    fn pdf_at_zero() {
        assert_eq!(norm_pdf(0.0), 0.3989422804014327);
        assert_eq!(norm_cdf(0.0), 0.5);
    }

    #[test]
    fn quantile_matches_references() {
        let refs = [
            (1e-300, -37.047096299361199237),
            (1e-20, -9.2623400897984075737),
            (1e-10, -6.3613409024040562047),
            (0.001, -3.0902323061678135415),
            (0.025, -1.9599639845400542355),
            (0.3, -0.52440051270804078404),
            (0.5, 0.0),
            (0.975, 1.9599639845400542355),
            // the double nearest 0.999999, not the decimal
            (0.999999, 4.7534243088170877657),
        ];
        for (p, want) in refs {
            let got = norm_quantile(p);
            assert!((got - want).abs() <= 1e-14 * want.abs().max(1.0), "q({p}) = {got}, want {want}");
        }
        assert!(norm_quantile(1.5).is_nan());
        assert_eq!(norm_quantile(0.0), f64::NEG_INFINITY);
    }
}
