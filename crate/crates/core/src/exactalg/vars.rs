use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Z,
    ZBar,
    W,
    WBar,
    U,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    /// 1-based for `w`, `w̄`, `u`; 0 for `z`, `z̄`.
    pub index: usize,
    pub weight: u32,
}

/// Ordered coordinates `z, zb, w1, wb1, u1, w2, wb2, u2, …`.
///
/// Tables built from a prefix of the same weight list are prefixes of each other,
/// which is what lets partial models embed into the final one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableTable {
    vars: Vec<Variable>,
    conj: Vec<usize>,
}

impl VariableTable {
    /// `weights[j-1]` is the weight of `w_j`.
    pub fn new(weights: &[u32]) -> Self {
        assert!(weights.windows(2).all(|p| p[0] <= p[1]), "weights must be nondecreasing");
        let mut vars = vec![
            Variable { name: "z".into(), kind: VarKind::Z, index: 0, weight: 1 },
            Variable { name: "zb".into(), kind: VarKind::ZBar, index: 0, weight: 1 },
        ];
        let mut conj = vec![1, 0];
        for (j, &w) in weights.iter().enumerate() {
            let j1 = j + 1;
            let base = vars.len();
            vars.push(Variable { name: format!("w{j1}"), kind: VarKind::W, index: j1, weight: w });
            vars.push(Variable { name: format!("wb{j1}"), kind: VarKind::WBar, index: j1, weight: w });
            vars.push(Variable { name: format!("u{j1}"), kind: VarKind::U, index: j1, weight: w });
            conj.extend([base + 1, base, base + 2]);
        }
        Self { vars, conj }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var(&self, i: usize) -> &Variable {
        &self.vars[i]
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.vars[i].weight
    }

    pub fn conj_index(&self, i: usize) -> usize {
        self.conj[i]
    }

    pub fn n_w(&self) -> usize {
        (self.vars.len() - 2) / 3
    }

    pub fn z(&self) -> usize {
        0
    }

    pub fn zbar(&self) -> usize {
        1
    }

    pub fn w(&self, j: usize) -> usize {
        assert!(j >= 1 && j <= self.n_w(), "w{j} not in table");
        2 + 3 * (j - 1)
    }

    pub fn wbar(&self, j: usize) -> usize {
        self.w(j) + 1
    }

    pub fn u(&self, j: usize) -> usize {
        self.w(j) + 2
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn kind(&self, i: usize) -> VarKind {
        self.vars[i].kind
    }

    /// True when `self` is a prefix of `other` (same names, kinds, weights).
    pub fn is_prefix_of(&self, other: &VariableTable) -> bool {
        self.vars.len() <= other.vars.len() && self.vars.iter().zip(&other.vars).all(|(a, b)| a == b)
    }

    pub fn weights_of_w(&self) -> Vec<u32> {
        (1..=self.n_w()).map(|j| self.weight(self.w(j))).collect()
    }
}

impl fmt::Display for VariableTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vars.iter().map(|v| format!("{}:{}", v.name, v.weight)).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}
