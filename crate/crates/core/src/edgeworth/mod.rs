//! Normalized statistics, cumulant coefficients and the acceleration constant.
//!
//! A statistic is `g(x1..xd)` evaluated at the sample power means. The
//! plain form is `A0 = (g - g(mu)) / h(mu)`; the studentized form divides by
//! the plug-in `h(x1..x2d)` instead, where
//! `h^2 = sum_{i,j<=d} g_i g_j (x_{i+j} - x_i x_j)`.

mod polys;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::algebra::{fold_expr, AlgebraError, Scalar};
use crate::expr::{rat, Expr};
use crate::moments::{MomentError, MomentSpec};

pub use polys::{cdf_eval, cornish_fisher_polys, edgeworth_polys, quantile_eval, scale_adjust, Poly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EdgeworthError {
    #[error("asymptotic variance h(mu)^2 is zero")]
    ZeroVariance,
    #[error("insufficient moment order: need {need}, have {have}")]
    InsufficientMoments { need: usize, have: usize },
    #[error("statistic has no variables")]
    NoVariables,
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Moment(MomentError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl From<MomentError> for EdgeworthError {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::OrderExceeded { order, max } => EdgeworthError::InsufficientMoments { need: order, have: max },
            MomentError::Algebra(a) => EdgeworthError::Algebra(a),
            other => EdgeworthError::Moment(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Plain,
    Studentized,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Plain => "plain",
            Mode::Studentized => "studentized",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "plain" | "nonstudentized" | "non-studentized" => Ok(Mode::Plain),
            "studentized" => Ok(Mode::Studentized),
            other => Err(format!("unknown mode `{other}` (expected plain or studentized)")),
        }
    }
}

/// A statistic definition: `g`, its normalization and fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Statistic {
    pub name: String,
    pub g: Expr,
    pub mode: Mode,
    /// Number of power means; defaults to the arity of `g`.
    pub dim: Option<usize>,
    pub params: BTreeMap<String, BigRational>,
}

impl Statistic {
    pub fn new(name: &str, g: Expr, mode: Mode) -> Self {
        Statistic { name: name.to_string(), g, mode, dim: None, params: BTreeMap::new() }
    }

    pub fn with_param(mut self, name: &str, v: BigRational) -> Self {
        self.params.insert(name.to_string(), v);
        self
    }

    pub fn with_dim(mut self, d: usize) -> Self {
        self.dim = Some(d);
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn d(&self) -> usize {
        self.dim.unwrap_or(self.g.arity() as usize).max(self.g.arity() as usize)
    }

    /// Variables the normalized statistic depends on.
    pub fn dims(&self) -> usize {
        match self.mode {
            Mode::Plain => self.d(),
            Mode::Studentized => 2 * self.d(),
        }
    }

    /// `h^2` over `x1..x2d`.
    pub fn h2_expr(&self) -> Expr {
        let d = self.d() as u32;
        let grads: Vec<Expr> = (1..=d).map(|i| self.g.differentiate(i)).collect();
        let mut terms = Vec::new();
        for i in 1..=d {
            for j in 1..=d {
                let (gi, gj) = (&grads[i as usize - 1], &grads[j as usize - 1]);
                if gi.is_zero() || gj.is_zero() {
                    continue;
                }
                let cov = Expr::var(i + j) - Expr::var(i) * Expr::var(j);
                terms.push(Expr::mul(vec![gi.clone(), gj.clone(), cov]));
            }
        }
        Expr::add(terms)
    }
}

/// Dense symmetric table of derivatives at the moment point.
#[derive(Debug, Clone)]
pub struct DerivTable<S> {
    dims: usize,
    a1: Vec<S>,
    a2: Vec<S>,
    a3: Vec<S>,
}

impl<S: Scalar> DerivTable<S> {
    fn new(dims: usize) -> Self {
        DerivTable { dims, a1: vec![S::zero(); dims], a2: vec![S::zero(); dims * dims], a3: vec![S::zero(); dims * dims * dims] }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// 0-based indices.
    pub fn a1(&self, i: usize) -> &S {
        &self.a1[i]
    }

    pub fn a2(&self, i: usize, j: usize) -> &S {
        &self.a2[i * self.dims + j]
    }

    pub fn a3(&self, i: usize, j: usize, k: usize) -> &S {
        &self.a3[(i * self.dims + j) * self.dims + k]
    }

    /// Value for a sorted or unsorted 1-based index tuple.
    pub fn get(&self, idx: &[usize]) -> Option<&S> {
        match idx {
            [i] => Some(self.a1(i - 1)),
            [i, j] => Some(self.a2(i - 1, j - 1)),
            [i, j, k] => Some(self.a3(i - 1, j - 1, k - 1)),
            _ => None,
        }
    }

    fn set(&mut self, idx: &[usize], v: S) {
        let n = self.dims;
        match *idx {
            [i] => self.a1[i] = v,
            [i, j] => {
                self.a2[i * n + j] = v.clone();
                self.a2[j * n + i] = v;
            }
            [i, j, k] => {
                for (p, q, r) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    self.a3[(p * n + q) * n + r] = v.clone();
                }
            }
            _ => unreachable!("derivative order above 3"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StatModel<S> {
    pub stat: Statistic,
    pub d: usize,
    pub dims: usize,
    pub mode: Mode,
    pub h2_expr: Expr,
    /// `g(mu)`, when the backend can represent it.
    pub g0: Option<S>,
    /// `h(mu)`, the asymptotic standard deviation of `g`.
    pub sigma_a: S,
    pub deriv: DerivTable<S>,
}

fn sorted_tuples(dims: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(start: usize, dims: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..dims {
            cur.push(i);
            rec(i, dims, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(0, dims, order, &mut Vec::new(), &mut out);
    out
}

/// Evaluates `e` at the moment point with the statistic's parameters.
pub fn eval_at_point<S: Scalar>(e: &Expr, point: &[S], params: &BTreeMap<String, BigRational>) -> Result<S, AlgebraError> {
    fold_expr(e, &mut |leaf| match leaf {
        Expr::Var(i) => point.get(*i as usize - 1).cloned().ok_or(AlgebraError::UnboundVariable(*i)),
        Expr::Sym(s) => match params.get(s.name()) {
            Some(v) => Ok(S::from_rational(v)),
            None => S::symbol(s.name()).ok_or_else(|| AlgebraError::UnboundSymbol(s.name().to_string())),
        },
        _ => unreachable!("leaves are variables or symbols"),
    })
}

/// Builds the normalized statistic and its derivative table at the moment point.
pub fn build_model<S: Scalar>(stat: &Statistic, spec: &MomentSpec<S>) -> Result<StatModel<S>, EdgeworthError> {
    let d = stat.d();
    if d == 0 {
        return Err(EdgeworthError::NoVariables);
    }
    let dims = stat.dims();
    let need = dims.max(2 * d);
    if spec.max_order() < need {
        return Err(EdgeworthError::InsufficientMoments { need, have: spec.max_order() });
    }
    let point: Vec<S> = (1..=dims).map(|i| spec.raw_moment(i)).collect::<Result<_, _>>()?;
    let at = |e: &Expr| eval_at_point(e, &point, &stat.params);

    // partials of g, 0-based sorted tuples over 0..d
    let mut g_der: BTreeMap<Vec<usize>, S> = BTreeMap::new();
    for order in 1..=3 {
        for t in sorted_tuples(d, order) {
            let vars: Vec<u32> = t.iter().map(|&i| i as u32 + 1).collect();
            let e = stat.g.partial(&vars);
            g_der.insert(t, if e.is_zero() { S::zero() } else { at(&e)? });
        }
    }
    let g_at = |t: &[usize]| -> S {
        if t.iter().any(|&i| i >= d) {
            return S::zero();
        }
        let mut k = t.to_vec();
        k.sort_unstable();
        g_der[&k].clone()
    };

    let mut h2 = S::zero();
    for i in 0..d {
        for j in 0..d {
            let (gi, gj) = (g_at(&[i]), g_at(&[j]));
            if gi.is_zero() || gj.is_zero() {
                continue;
            }
            h2 = h2.add(&gi.mul(&gj).mul(&spec.cross_moment(&[i + 1, j + 1])?));
        }
    }
    if h2.is_zero() {
        return Err(EdgeworthError::ZeroVariance);
    }
    let sigma_a = h2.sqrt()?;
    let h2_expr = stat.h2_expr();

    let mut deriv = DerivTable::new(dims);
    match stat.mode {
        Mode::Plain => {
            let inv = S::one().div(&sigma_a)?;
            for order in 1..=3 {
                for t in sorted_tuples(dims, order) {
                    deriv.set(&t, g_at(&t).mul(&inv));
                }
            }
        }
        Mode::Studentized => {
            // H = u^(-1/2) with u = h^2(x); Leibniz over the factors (g - g0) and H
            let u0 = at(&h2_expr)?;
            if u0.is_zero() {
                return Err(EdgeworthError::ZeroVariance);
            }
            let mut u1 = vec![S::zero(); dims];
            let mut u2 = vec![S::zero(); dims * dims];
            for i in 0..dims {
                let ui = h2_expr.differentiate(i as u32 + 1);
                if ui.is_zero() {
                    continue;
                }
                u1[i] = at(&ui)?;
                for j in i..dims {
                    let uij = ui.differentiate(j as u32 + 1);
                    if !uij.is_zero() {
                        let v = at(&uij)?;
                        u2[i * dims + j] = v.clone();
                        u2[j * dims + i] = v;
                    }
                }
            }
            let h0 = u0.powr(&rat(-1, 2))?;
            let f1 = u0.powr(&rat(-3, 2))?.scale(&rat(-1, 2));
            let f2 = u0.powr(&rat(-5, 2))?.scale(&rat(3, 4));
            let h_at = |t: &[usize]| -> S {
                match *t {
                    [] => h0.clone(),
                    [j] => f1.mul(&u1[j]),
                    [j, k] => f2.mul(&u1[j]).mul(&u1[k]).add(&f1.mul(&u2[j * dims + k])),
                    _ => unreachable!("H is needed to order 2"),
                }
            };
            for order in 1..=3usize {
                for t in sorted_tuples(dims, order) {
                    let mut acc = S::zero();
                    for mask in 1u32..(1 << order) {
                        let (mut gi, mut hi) = (Vec::new(), Vec::new());
                        for (p, &ix) in t.iter().enumerate() {
                            if mask & (1 << p) != 0 {
                                gi.push(ix);
                            } else {
                                hi.push(ix);
                            }
                        }
                        let gv = g_at(&gi);
                        if gv.is_zero() {
                            continue;
                        }
                        let hv = h_at(&hi);
                        if hv.is_zero() {
                            continue;
                        }
                        acc = acc.add(&gv.mul(&hv));
                    }
                    deriv.set(&t, acc);
                }
            }
        }
    }
    let g0 = at(&stat.g).ok();
    Ok(StatModel { stat: stat.clone(), d, dims, mode: stat.mode, h2_expr, g0, sigma_a, deriv })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CumulantCoeffs<S> {
    pub k12: S,
    pub k22: S,
    pub k31: S,
    pub k41: S,
}

impl<S: Scalar> CumulantCoeffs<S> {
    pub fn map<T>(&self, mut f: impl FnMut(&S) -> T) -> CumulantCoeffs<T> {
        CumulantCoeffs { k12: f(&self.k12), k22: f(&self.k22), k31: f(&self.k31), k41: f(&self.k41) }
    }

    pub fn zero() -> Self {
        CumulantCoeffs { k12: S::zero(), k22: S::zero(), k31: S::zero(), k41: S::zero() }
    }
}

/// Moments restricted to the support of the derivative table, fetched once.
struct MomentCache<'a, S: Scalar> {
    spec: &'a MomentSpec<S>,
}

impl<S: Scalar> MomentCache<'_, S> {
    fn mu(&self, idx: &[usize]) -> Result<S, EdgeworthError> {
        let one_based: Vec<usize> = idx.iter().map(|i| i + 1).collect();
        Ok(self.spec.cross_moment(&one_based)?)
    }
}

fn sum<S: Scalar>(terms: impl IntoIterator<Item = S>) -> S {
    terms.into_iter().fold(S::zero(), |acc, t| acc.add(&t))
}

/// The four cumulant coefficients through contracted intermediate tensors.
pub fn cumulant_coeffs<S: Scalar>(m: &StatModel<S>, spec: &MomentSpec<S>) -> Result<CumulantCoeffs<S>, EdgeworthError> {
    let n = m.dims;
    let t = &m.deriv;
    let mc = MomentCache { spec };
    let s1: Vec<usize> = (0..n).filter(|&i| !t.a1(i).is_zero()).collect();
    let s2: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| !t.a2(i, j).is_zero()).collect();
    let rows2: Vec<usize> = {
        let mut r: Vec<usize> = s2.iter().map(|p| p.0).collect();
        r.dedup();
        r
    };

    let mut mu2 = vec![S::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let needed = (s1.contains(&i) || rows2.contains(&i)) && (s1.contains(&j) || rows2.contains(&j));
            let has3 = (0..n).any(|k| !t.a3(i, j, k).is_zero());
            if needed || has3 || s1.contains(&i) || s1.contains(&j) {
                let v = mc.mu(&[i, j])?;
                mu2[i * n + j] = v.clone();
                mu2[j * n + i] = v;
            }
        }
    }
    let mu2 = |i: usize, j: usize| &mu2[i * n + j];

    // v_i = sum_j mu_ij a_j
    let v: Vec<S> = (0..n).map(|i| sum(s1.iter().map(|&j| mu2(i, j).mul(t.a1(j))))).collect();
    let sigma2 = sum(s1.iter().map(|&i| t.a1(i).mul(&v[i])));

    // M_jk = sum_i a_i mu_ijk
    let mut mm = vec![S::zero(); n * n];
    for j in 0..n {
        for k in j..n {
            let val = sum(s1.iter().map(|&i| Ok::<S, EdgeworthError>(t.a1(i).mul(&mc.mu(&[i, j, k])?))).collect::<Result<Vec<_>, _>>()?);
            mm[j * n + k] = val.clone();
            mm[k * n + j] = val;
        }
    }
    let big_m = |j: usize, k: usize| &mm[j * n + k];

    let k12 = sum(s2.iter().map(|&(i, j)| t.a2(i, j).mul(mu2(i, j)))).scale(&rat(1, 2));

    // P = a2 * mu
    let mut p = vec![S::zero(); n * n];
    for &j in &rows2 {
        for k in 0..n {
            p[j * n + k] = sum(s2.iter().filter(|e| e.0 == j).map(|&(_, i)| t.a2(j, i).mul(mu2(i, k))));
        }
    }
    let term_a = sum(s2.iter().map(|&(j, k)| t.a2(j, k).mul(big_m(j, k))));
    let term_b = sum((0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| p[j * n + k].mul(&p[k * n + j]))).scale(&rat(1, 2));
    let mut term_c = S::zero();
    for j in 0..n {
        if v[j].is_zero() {
            continue;
        }
        let mut inner = S::zero();
        for k in 0..n {
            for l in 0..n {
                let a = t.a3(j, k, l);
                if !a.is_zero() {
                    inner = inner.add(&a.mul(mu2(k, l)));
                }
            }
        }
        term_c = term_c.add(&v[j].mul(&inner));
    }
    let k22 = term_a.add(&term_b).add(&term_c);

    let big_a = sum(s1.iter().flat_map(|&j| s1.iter().map(move |&k| (j, k))).map(|(j, k)| t.a1(j).mul(t.a1(k)).mul(big_m(j, k))));
    let k31 = big_a.add(&sum(s2.iter().map(|&(k, l)| t.a2(k, l).mul(&v[k]).mul(&v[l]))).scale(&rat(3, 1)));

    // Q_kl = sum_ij a_i a_j mu_ijkl, only needed on the support of a1
    let mut first = S::zero();
    for &k in &s1 {
        for &l in &s1 {
            let mut q = S::zero();
            for &i in &s1 {
                for &j in &s1 {
                    q = q.add(&t.a1(i).mul(t.a1(j)).mul(&mc.mu(&[i, j, k, l])?));
                }
            }
            first = first.add(&t.a1(k).mul(t.a1(l)).mul(&q));
        }
    }
    let first = first.sub(&sigma2.mul(&sigma2).scale(&rat(3, 1)));
    // N_m = sum_j a_j M_jm, w_l = sum_k v_k a_kl
    let nvec: Vec<S> = (0..n).map(|mi| sum(s1.iter().map(|&j| t.a1(j).mul(big_m(j, mi))))).collect();
    let w: Vec<S> = (0..n).map(|l| sum((0..n).filter(|&k| !v[k].is_zero()).map(|k| v[k].mul(t.a2(k, l))))).collect();
    let second = sum(s2.iter().map(|&(l, mi)| v[l].mul(t.a2(l, mi)).mul(&nvec[mi]))).scale(&rat(12, 1));
    let third = sum((0..n).flat_map(|l| (0..n).map(move |o| (l, o))).filter(|&(l, o)| !w[l].is_zero() && !w[o].is_zero()).map(|(l, o)| w[l].mul(&w[o]).mul(mu2(l, o))))
        .scale(&rat(12, 1));
    let mut fourth = S::zero();
    for l in 0..n {
        for mi in 0..n {
            for o in 0..n {
                let a = t.a3(l, mi, o);
                if a.is_zero() || v[l].is_zero() || v[mi].is_zero() || v[o].is_zero() {
                    continue;
                }
                fourth = fourth.add(&a.mul(&v[l]).mul(&v[mi]).mul(&v[o]));
            }
        }
    }
    let k41 = first.add(&second).add(&third).add(&fourth.scale(&rat(4, 1)));
    Ok(CumulantCoeffs { k12, k22, k31, k41 })
}

/// Direct transcription of the nested sums, kept as an oracle for
/// [`cumulant_coeffs`]. Zero derivative factors short-circuit, nothing else.
pub fn cumulant_coeffs_naive<S: Scalar>(m: &StatModel<S>, spec: &MomentSpec<S>) -> Result<CumulantCoeffs<S>, EdgeworthError> {
    let n = m.dims;
    let t = &m.deriv;
    let mu = |idx: &[usize]| -> Result<S, EdgeworthError> {
        let one: Vec<usize> = idx.iter().map(|i| i + 1).collect();
        Ok(spec.cross_moment(&one)?)
    };
    let mut k12 = S::zero();
    for i in 0..n {
        for j in 0..n {
            if !t.a2(i, j).is_zero() {
                k12 = k12.add(&t.a2(i, j).mul(&mu(&[i, j])?));
            }
        }
    }
    let k12 = k12.scale(&rat(1, 2));

    let mut k22 = S::zero();
    let mut k31 = S::zero();
    let mut k41 = S::zero();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let a = t.a1(i).mul(t.a2(j, k));
                if !a.is_zero() {
                    k22 = k22.add(&a.mul(&mu(&[i, j, k])?));
                }
                let b = t.a1(i).mul(t.a1(j)).mul(t.a1(k));
                if !b.is_zero() {
                    k31 = k31.add(&b.mul(&mu(&[i, j, k])?));
                }
                for l in 0..n {
                    let c = t.a2(i, j).mul(t.a2(k, l));
                    if !c.is_zero() {
                        k22 = k22.add(&c.mul(&mu(&[i, k])?).mul(&mu(&[j, l])?).scale(&rat(1, 2)));
                    }
                    let d = t.a1(i).mul(t.a3(j, k, l));
                    if !d.is_zero() {
                        k22 = k22.add(&d.mul(&mu(&[i, j])?).mul(&mu(&[k, l])?));
                    }
                    let e = t.a1(i).mul(t.a1(j)).mul(t.a2(k, l));
                    if !e.is_zero() {
                        k31 = k31.add(&e.mul(&mu(&[i, k])?).mul(&mu(&[j, l])?).scale(&rat(3, 1)));
                    }
                    let f = t.a1(i).mul(t.a1(j)).mul(t.a1(k)).mul(t.a1(l));
                    if !f.is_zero() {
                        let cum = mu(&[i, j, k, l])?.sub(&mu(&[i, j])?.mul(&mu(&[k, l])?).scale(&rat(3, 1)));
                        k41 = k41.add(&f.mul(&cum));
                    }
                    for mi in 0..n {
                        let g = t.a1(i).mul(t.a1(j)).mul(t.a1(k)).mul(t.a2(l, mi));
                        if !g.is_zero() {
                            k41 = k41.add(&g.mul(&mu(&[i, l])?).mul(&mu(&[j, k, mi])?).scale(&rat(12, 1)));
                        }
                        for o in 0..n {
                            let h = t.a1(i).mul(t.a1(j)).mul(t.a2(k, l)).mul(t.a2(mi, o));
                            if !h.is_zero() {
                                let p = mu(&[i, k])?.mul(&mu(&[j, mi])?).mul(&mu(&[l, o])?);
                                k41 = k41.add(&h.mul(&p).scale(&rat(12, 1)));
                            }
                            let q = t.a1(i).mul(t.a1(j)).mul(t.a1(k)).mul(t.a3(l, mi, o));
                            if !q.is_zero() {
                                let p = mu(&[i, l])?.mul(&mu(&[j, mi])?).mul(&mu(&[k, o])?);
                                k41 = k41.add(&q.mul(&p).scale(&rat(4, 1)));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(CumulantCoeffs { k12, k22, k31, k41 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccelResult<S> {
    /// `A = sum a_i a_j a_k mu_ijk`.
    pub a_value: S,
    /// `sigma^3` with `sigma^2 = sum a_i a_j mu_ij` over the same derivatives.
    pub sigma3: S,
    /// `A / (6 sigma^3)`; divide by `sqrt(n)` for the BCA constant.
    pub a_over_sqrtn: S,
}

/// Acceleration constant from the first-order derivatives of the model.
pub fn accel_constant<S: Scalar>(m: &StatModel<S>, spec: &MomentSpec<S>) -> Result<AccelResult<S>, EdgeworthError> {
    let t = &m.deriv;
    let s1: Vec<usize> = (0..m.dims).filter(|&i| !t.a1(i).is_zero()).collect();
    let mut a = S::zero();
    let mut s2 = S::zero();
    for &i in &s1 {
        for &j in &s1 {
            let aij = t.a1(i).mul(t.a1(j));
            s2 = s2.add(&aij.mul(&spec.cross_moment(&[i + 1, j + 1])?));
            for &k in &s1 {
                a = a.add(&aij.mul(t.a1(k)).mul(&spec.cross_moment(&[i + 1, j + 1, k + 1])?));
            }
        }
    }
    if s2.is_zero() {
        return Err(EdgeworthError::ZeroVariance);
    }
    let sigma3 = s2.powr(&rat(3, 2))?;
    let a_over_sqrtn = a.div(&sigma3.scale(&rat(6, 1)))?;
    Ok(AccelResult { a_value: a, sigma3, a_over_sqrtn })
}

/// Everything derived for one statistic and moment specification.
#[derive(Debug, Clone)]
pub struct Expansion<S> {
    pub model: StatModel<S>,
    pub coeffs: CumulantCoeffs<S>,
    pub p1: Poly<S>,
    pub p2: Poly<S>,
    pub p11: Poly<S>,
    pub p21: Poly<S>,
    pub accel: AccelResult<S>,
}

pub fn expand<S: Scalar>(stat: &Statistic, spec: &MomentSpec<S>) -> Result<Expansion<S>, EdgeworthError> {
    let model = build_model(stat, spec)?;
    let coeffs = cumulant_coeffs(&model, spec)?;
    let (p1, p2) = edgeworth_polys(&coeffs);
    let (p11, p21) = cornish_fisher_polys(&p1, &p2);
    let accel = accel_constant(&model, spec)?;
    Ok(Expansion { model, coeffs, p1, p2, p11, p21, accel })
}
