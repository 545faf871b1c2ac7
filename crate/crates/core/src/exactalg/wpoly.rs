use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::gaussian::GaussianRational;
use super::vars::VariableTable;
use super::ExactError;

/// Exponent vector over a [`VariableTable`], ordered graded-by-weight then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    weight: u32,
    exps: Box<[u16]>,
}

impl Monomial {
    pub fn one(table: &VariableTable) -> Self {
        Self { weight: 0, exps: vec![0; table.len()].into_boxed_slice() }
    }

    pub fn from_exps(table: &VariableTable, exps: Vec<u16>) -> Self {
        assert_eq!(exps.len(), table.len());
        let weight = exps.iter().enumerate().map(|(i, &e)| e as u32 * table.weight(i)).sum();
        Self { weight, exps: exps.into_boxed_slice() }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn exps(&self) -> &[u16] {
        &self.exps
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, o: &Monomial) -> Monomial {
        let exps: Vec<u16> = self.exps.iter().zip(o.exps.iter()).map(|(a, b)| a + b).collect();
        Monomial { weight: self.weight + o.weight, exps: exps.into_boxed_slice() }
    }

    fn divides(&self, o: &Monomial) -> bool {
        self.exps.iter().zip(o.exps.iter()).all(|(a, b)| a <= b)
    }

    fn div(&self, o: &Monomial) -> Monomial {
        let exps: Vec<u16> = self.exps.iter().zip(o.exps.iter()).map(|(a, b)| a - b).collect();
        Monomial { weight: self.weight - o.weight, exps: exps.into_boxed_slice() }
    }

    fn conj(&self, table: &VariableTable) -> Monomial {
        let mut exps = vec![0u16; self.exps.len()];
        for (i, &e) in self.exps.iter().enumerate() {
            exps[table.conj_index(i)] = e;
        }
        Monomial { weight: self.weight, exps: exps.into_boxed_slice() }
    }
}

/// Weight class of a polynomial. The zero polynomial is homogeneous of every weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightClass {
    Any,
    Exact(u32),
    Inhomogeneous,
}

/// Sparse polynomial over Gaussian rationals in the variables of a shared table.
#[derive(Clone)]
pub struct WPoly {
    table: Arc<VariableTable>,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl PartialEq for WPoly {
    fn eq(&self, o: &Self) -> bool {
        self.terms == o.terms
    }
}
impl Eq for WPoly {}

impl WPoly {
    pub fn zero(table: &Arc<VariableTable>) -> Self {
        Self { table: table.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(table: &Arc<VariableTable>, c: GaussianRational) -> Self {
        let mut p = Self::zero(table);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(table), c);
        }
        p
    }

    pub fn one(table: &Arc<VariableTable>) -> Self {
        Self::constant(table, GaussianRational::one())
    }

    pub fn var(table: &Arc<VariableTable>, i: usize) -> Self {
        let mut exps = vec![0u16; table.len()];
        exps[i] = 1;
        Self::from_term(table, Monomial::from_exps(table, exps), GaussianRational::one())
    }

    pub fn from_term(table: &Arc<VariableTable>, m: Monomial, c: GaussianRational) -> Self {
        let mut p = Self::zero(table);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn table(&self) -> &Arc<VariableTable> {
        &self.table
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn constant_term(&self) -> GaussianRational {
        self.coeff(&Monomial::one(&self.table))
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &GaussianRational)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_table(&self, o: &WPoly) {
        debug_assert!(Arc::ptr_eq(&self.table, &o.table) || *self.table == *o.table, "mismatched variable tables");
    }

    pub fn scale(&self, c: &GaussianRational) -> WPoly {
        if c.is_zero() {
            return WPoly::zero(&self.table);
        }
        let terms = self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect();
        WPoly { table: self.table.clone(), terms }
    }

    pub fn weight(&self) -> WeightClass {
        let mut it = self.terms.keys().map(|m| m.weight);
        match it.next() {
            None => WeightClass::Any,
            Some(w) => {
                if it.all(|x| x == w) {
                    WeightClass::Exact(w)
                } else {
                    WeightClass::Inhomogeneous
                }
            }
        }
    }

    pub fn is_homogeneous_of(&self, w: u32) -> bool {
        self.terms.keys().all(|m| m.weight == w)
    }

    pub fn conj(&self) -> WPoly {
        let terms = self.terms.iter().map(|(m, c)| (m.conj(&self.table), c.conj())).collect();
        WPoly { table: self.table.clone(), terms }
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    pub fn derivative(&self, i: usize) -> WPoly {
        let mut out = WPoly::zero(&self.table);
        for (m, c) in &self.terms {
            let e = m.exps[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps.to_vec();
            exps[i] -= 1;
            let nm = Monomial { weight: m.weight - self.table.weight(i), exps: exps.into_boxed_slice() };
            out.add_term(nm, c * &GaussianRational::from_int(e as i64));
        }
        out
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.exps[i] > 0)
    }

    pub fn pow(&self, e: u32) -> WPoly {
        let mut acc = WPoly::one(&self.table);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Simultaneous substitution `x_i ↦ bindings[i]`; unbound variables map to the
    /// variable of the same name in `target`, and must exist there.
    pub fn substitute(
        &self,
        bindings: &HashMap<usize, WPoly>,
        target: &Arc<VariableTable>,
    ) -> Result<WPoly, ExactError> {
        for b in bindings.values() {
            if !(Arc::ptr_eq(b.table(), target) || **b.table() == **target) {
                return Err(ExactError::TableMismatch);
            }
        }
        let mut images: Vec<Option<WPoly>> = Vec::with_capacity(self.table.len());
        for i in 0..self.table.len() {
            images.push(bindings.get(&i).cloned());
        }
        let mut powers: HashMap<(usize, u16), WPoly> = HashMap::new();
        let mut out = WPoly::zero(target);
        for (m, c) in &self.terms {
            let mut term = WPoly::constant(target, c.clone());
            for (i, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let key = (i, e);
                if !powers.contains_key(&key) {
                    let base = match &images[i] {
                        Some(p) => p.clone(),
                        None => {
                            let name = &self.table.var(i).name;
                            let j = target
                                .index_of(name)
                                .ok_or_else(|| ExactError::UnboundVariable(name.clone()))?;
                            WPoly::var(target, j)
                        }
                    };
                    powers.insert(key, base.pow(e as u32));
                }
                term = &term * &powers[&key];
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Re-express over a table that extends the current one.
    pub fn embed(&self, target: &Arc<VariableTable>) -> WPoly {
        assert!(self.table.is_prefix_of(target), "embedding requires a prefix table");
        let n = target.len();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut exps = m.exps.to_vec();
                exps.resize(n, 0);
                (Monomial { weight: m.weight, exps: exps.into_boxed_slice() }, c.clone())
            })
            .collect();
        WPoly { table: target.clone(), terms }
    }

    /// Exact quotient when `d` divides `self`; `None` otherwise.
    pub fn div_exact(&self, d: &WPoly) -> Option<WPoly> {
        let (dm, dc) = d.leading()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.inv()));
        }
        let mut rem = self.clone();
        let mut q = WPoly::zero(&self.table);
        while let Some((rm, rc)) = rem.leading() {
            if !dm.divides(rm) {
                return None;
            }
            let qm = rm.div(&dm);
            let qc = rc / &dc;
            let t = WPoly::from_term(&self.table, qm, qc);
            rem = &rem - &(&t * d);
            q = &q + &t;
        }
        Some(q)
    }

    /// Deterministic rendering, highest monomial first, e.g. `2*i*z^2*zb - u1`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = m
                .exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    let n = &self.table.var(i).name;
                    if e == 1 {
                        n.clone()
                    } else {
                        format!("{n}^{e}")
                    }
                })
                .collect();
            let cs = c.to_string();
            let (neg, body) = if c.is_real() || c.is_imaginary() {
                match cs.strip_prefix('-') {
                    Some(rest) => (true, rest.to_string()),
                    None => (false, cs.clone()),
                }
            } else {
                (false, format!("({cs})"))
            };
            let piece = if mono.is_empty() {
                body
            } else if body == "1" {
                mono.join("*")
            } else {
                format!("{}*{}", body, mono.join("*"))
            };
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&piece);
        }
        out
    }
}

impl fmt::Display for WPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Debug for WPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WPoly({})", self.render())
    }
}

impl<'a> Add<&'a WPoly> for &'a WPoly {
    type Output = WPoly;
    fn add(self, o: &WPoly) -> WPoly {
        self.check_table(o);
        let (big, small) = if self.terms.len() >= o.terms.len() { (self, o) } else { (o, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a WPoly> for &'a WPoly {
    type Output = WPoly;
    fn sub(self, o: &WPoly) -> WPoly {
        self.check_table(o);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a WPoly> for &'a WPoly {
    type Output = WPoly;
    fn mul(self, o: &WPoly) -> WPoly {
        self.check_table(o);
        let mut out = WPoly::zero(&self.table);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl<'a> Neg for &'a WPoly {
    type Output = WPoly;
    fn neg(self) -> WPoly {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect();
        WPoly { table: self.table.clone(), terms }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for WPoly {
            type Output = WPoly;
            fn $m(self, o: WPoly) -> WPoly {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
