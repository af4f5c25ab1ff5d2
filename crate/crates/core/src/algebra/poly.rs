//! Sparse multivariate polynomials with exact rational coefficients over
//! variables, symbols and adjoined square-root kernels.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::expr::{Expr, Symbol};

/// Polynomial indeterminates. The derived order (variables, then symbols,
/// then kernels) is the atom order used by the monomial ordering.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Var(u32),
    Sym(Symbol),
    /// `sqrt(radicand)`, reduced by `s^2 -> radicand` on multiplication.
    Kernel(Arc<Poly>),
}

impl Atom {
    pub fn is_positive(&self) -> bool {
        match self {
            Atom::Var(_) => false,
            Atom::Sym(s) => s.is_positive(),
            Atom::Kernel(_) => true,
        }
    }

    pub fn is_kernel(&self) -> bool {
        matches!(self, Atom::Kernel(_))
    }

    /// Kernel nesting depth: 0 for plain atoms.
    pub fn depth(&self) -> usize {
        match self {
            Atom::Kernel(r) => 1 + r.atoms().iter().map(Atom::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Atom::Var(i) => Expr::Var(*i),
            Atom::Sym(s) => Expr::Sym(s.clone()),
            Atom::Kernel(r) => Expr::sqrt(r.to_expr()),
        }
    }
}

/// Product of atom powers, sorted by atom, exponents positive.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn exponent(&self, a: &Atom) -> u32 {
        self.0.iter().find(|(b, _)| b == a).map_or(0, |(_, e)| *e)
    }

    fn from_map(m: BTreeMap<Atom, u32>) -> Self {
        Monomial(m.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    fn to_map(&self) -> BTreeMap<Atom, u32> {
        self.0.iter().cloned().collect()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut m = self.to_map();
        for (a, e) in &o.0 {
            *m.entry(a.clone()).or_insert(0) += e;
        }
        Monomial::from_map(m)
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        self.0.iter().all(|(a, e)| o.exponent(a) >= *e)
    }

    /// `self / d`, assuming `d` divides `self`.
    pub fn div(&self, d: &Monomial) -> Monomial {
        let mut m = self.to_map();
        for (a, e) in &d.0 {
            let slot = m.get_mut(a).expect("monomial does not divide");
            *slot -= e;
        }
        Monomial::from_map(m)
    }

    pub fn gcd(&self, o: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(a, e)| {
                    let f = o.exponent(a);
                    (f > 0).then(|| (a.clone(), (*e).min(f)))
                })
                .collect(),
        )
    }

    fn without(&self, a: &Atom) -> (Monomial, u32) {
        let e = self.exponent(a);
        (Monomial(self.0.iter().filter(|(b, _)| b != a).cloned().collect()), e)
    }

    fn split_kernels(&self) -> (Monomial, Monomial) {
        let (k, plain): (Vec<_>, Vec<_>) = self.0.iter().cloned().partition(|(a, _)| a.is_kernel());
        (Monomial(plain), Monomial(k))
    }
}

/// Graded lexicographic: total degree first, then the exponent of the
/// smallest atom where the two differ.
impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        match self.degree().cmp(&o.degree()) {
            Ordering::Equal => {}
            other => return other,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), o.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((a, e)), Some((b, f))) => match a.cmp(b) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match e.cmp(f) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        other => return other,
                    },
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn atom(a: Atom) -> Self {
        Poly::term(Monomial::atom(a, 1), BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn lead(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(a, _)| a.clone())).collect()
    }

    pub fn has_kernels(&self) -> bool {
        self.terms.keys().any(|m| m.0.iter().any(|(a, _)| a.is_kernel()))
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, k: &BigRational) -> Poly {
        let mut out = Poly::zero();
        for (n, c) in &self.terms {
            out.accumulate_product(&n.mul(m), c * k);
        }
        out
    }

    /// Adds `c * m` after rewriting kernel squares.
    fn accumulate_product(&mut self, m: &Monomial, c: BigRational) {
        if !m.0.iter().any(|(a, e)| a.is_kernel() && *e >= 2) {
            self.add_term(m.clone(), c);
            return;
        }
        let mut keep = Vec::with_capacity(m.0.len());
        let mut extra = Poly::constant(c);
        for (a, e) in &m.0 {
            match a {
                Atom::Kernel(r) if *e >= 2 => {
                    extra = extra.mul(&r.pow(e / 2));
                    if e % 2 == 1 {
                        keep.push((a.clone(), 1));
                    }
                }
                _ => keep.push((a.clone(), *e)),
            }
        }
        let base = Monomial(keep);
        for (n, d) in extra.terms {
            self.accumulate_product(&n.mul(&base), d);
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (n, d) in &o.terms {
                out.accumulate_product(&m.mul(n), c * d);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Exact quotient, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.lead()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut q = Poly::zero();
        let mut r = self.clone();
        while let Some((rm, rc)) = r.lead() {
            if !dm.divides(rm) {
                return None;
            }
            let tm = rm.div(&dm);
            let tc = rc / &dc;
            r = r.sub(&d.mul_monomial(&tm, &tc));
            q.add_term(tm, tc);
        }
        Some(q)
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return Monomial::one() };
        it.fold(first.clone(), |g, m| g.gcd(m))
    }

    /// Positive rational `c` with `self / c` integral, coprime and with a
    /// positive leading coefficient; the sign goes into the returned value.
    pub fn rational_content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return BigRational::one();
        }
        let c = BigRational::new(num, den);
        match self.lead() {
            Some((_, lc)) if lc.is_negative() => -c,
            _ => c,
        }
    }

    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.rational_content().recip())
    }

    /// Scaled so the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.lead() {
            Some((_, lc)) => self.scale(&lc.recip()),
            None => Poly::zero(),
        }
    }

    /// Groups by the kernel part of each monomial; coefficients are kernel-free.
    pub fn kernel_components(&self) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (plain, k) = m.split_kernels();
            out.entry(k).or_default().add_term(plain, c.clone());
        }
        out
    }

    /// Coefficients with respect to `a`, indexed by power.
    pub fn coefficients_in(&self, a: &Atom) -> Vec<Poly> {
        let mut out: Vec<Poly> = Vec::new();
        for (m, c) in &self.terms {
            let (rest, e) = m.without(a);
            let e = e as usize;
            if out.len() <= e {
                out.resize(e + 1, Poly::zero());
            }
            out[e].add_term(rest, c.clone());
        }
        out
    }

    fn from_coefficients(cs: &[Poly], a: &Atom) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in cs.iter().enumerate() {
            let m = Monomial::atom(a.clone(), e as u32);
            for (n, k) in &c.terms {
                out.add_term(n.mul(&m), k.clone());
            }
        }
        out
    }

    /// Splits `self = a + b*s` for a kernel `s`, valid once `s^2` is reduced.
    pub fn split_linear(&self, s: &Atom) -> (Poly, Poly) {
        let mut cs = self.coefficients_in(s);
        cs.resize(2, Poly::zero());
        (cs[0].clone(), cs[1].clone())
    }

    pub fn eval(&self, atom: &mut dyn FnMut(&Atom) -> Result<f64, super::AlgebraError>) -> Result<f64, super::AlgebraError> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = super::scalar::rational_to_f64(c);
            for (a, e) in &m.0 {
                t *= atom(a)?.powi(*e as i32);
            }
            total += t;
        }
        Ok(total)
    }

    /// Largest-first sum of products.
    pub fn to_expr(&self) -> Expr {
        Expr::add(
            self.terms
                .iter()
                .rev()
                .map(|(m, c)| {
                    let mut fs = vec![Expr::Const(c.clone())];
                    for (a, e) in &m.0 {
                        fs.push(Expr::powi(a.to_expr(), i64::from(*e)));
                    }
                    Expr::mul(fs)
                })
                .collect(),
        )
    }
}

/// Greatest common divisor of kernel-free polynomials, monic.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.len() == 1 && b.len() == 1 {
        let m = a.lead().unwrap().0.gcd(b.lead().unwrap().0);
        return Poly::term(m, BigRational::one());
    }
    if a == b {
        return a.monic();
    }
    // pull the shared monomial content out first; it is cheap and common
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    if !ma.is_one() || !mb.is_one() {
        let m = ma.gcd(&mb);
        let pa = a.div_exact(&Poly::term(ma, BigRational::one())).unwrap();
        let pb = b.div_exact(&Poly::term(mb, BigRational::one())).unwrap();
        let g = gcd(&pa, &pb);
        return g.mul_monomial(&m, &BigRational::one()).monic();
    }
    let atoms_a = a.atoms();
    let atoms_b = b.atoms();
    let v = atoms_a.iter().chain(atoms_b.iter()).max().unwrap().clone();
    if !atoms_a.contains(&v) {
        return gcd_with_coefficients(a, &b.coefficients_in(&v));
    }
    if !atoms_b.contains(&v) {
        return gcd_with_coefficients(b, &a.coefficients_in(&v));
    }
    let ua = a.coefficients_in(&v);
    let ub = b.coefficients_in(&v);
    let ca = content(&ua);
    let cb = content(&ub);
    let c = gcd(&ca, &cb);
    let mut pa = divide_all(&ua, &ca);
    let mut pb = divide_all(&ub, &cb);
    if pa.len() < pb.len() {
        std::mem::swap(&mut pa, &mut pb);
    }
    let g = loop {
        let r = prem(&pa, &pb);
        if r.is_empty() {
            break pb;
        }
        if r.len() == 1 {
            break vec![Poly::one()];
        }
        pa = pb;
        let cr = content(&r);
        let r = divide_all(&r, &cr);
        let k = Poly::from_coefficients(&r, &v).rational_content().recip();
        pb = r.iter().map(|p| p.scale(&k)).collect();
    };
    let cg = content(&g);
    let g = divide_all(&g, &cg);
    Poly::from_coefficients(&g, &v).mul(&c).monic()
}

fn gcd_with_coefficients(a: &Poly, cs: &[Poly]) -> Poly {
    let mut g = a.clone();
    for c in cs.iter().filter(|c| !c.is_zero()) {
        g = gcd(&g, c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g.monic()
}

fn content(cs: &[Poly]) -> Poly {
    let mut g = Poly::zero();
    for c in cs.iter().filter(|c| !c.is_zero()) {
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    if g.is_zero() {
        Poly::one()
    } else {
        g
    }
}

fn divide_all(cs: &[Poly], d: &Poly) -> Vec<Poly> {
    cs.iter().map(|c| c.div_exact(d).expect("content divides coefficient")).collect()
}

fn trim(mut p: Vec<Poly>) -> Vec<Poly> {
    while p.last().is_some_and(Poly::is_zero) {
        p.pop();
    }
    p
}

/// Pseudo-remainder of univariate polynomials with polynomial coefficients.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = trim(a.to_vec());
    while r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        let mut next: Vec<Poly> = r.iter().map(|c| c.mul(lb)).collect();
        for (k, c) in b.iter().enumerate() {
            next[k + shift] = next[k + shift].sub(&c.mul(&lr));
        }
        r = trim(next);
    }
    r
}

/// Writes a positive integer as `s^2 * f` with `f` squarefree as far as
/// trial division (and a final perfect-square test) can tell.
pub fn square_part(n: &BigInt) -> (BigInt, BigInt) {
    let mut n = n.clone();
    let mut s = BigInt::one();
    let mut f = BigInt::one();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(100_000u32);
    while &p * &p <= n && p <= limit {
        let mut e = 0u32;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= &p;
        }
        if e % 2 == 1 {
            f *= &p;
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    let r = n.sqrt();
    if &r * &r == n {
        s *= r;
    } else {
        f *= n;
    }
    (s, f)
}
