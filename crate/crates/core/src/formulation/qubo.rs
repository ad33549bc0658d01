use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::bits::BitVector;
use crate::code::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Role of a QUBO variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarTag {
    /// Code bit `i` in codeword order.
    CodeBit(usize),
    /// Auxiliary variable `index` of the integer attached to `check`.
    Aux { check: usize, index: usize },
}

/// How the free integer `L_j` of each check is spelled in binary variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuxEncoding {
    /// `L_j = sum_k y_{j,k}` over `floor(d/2) + 1` variables.
    Unary,
    /// `L_j = sum_k 2^k y_{j,k}` over `floor(log2(d/2)) + 1` variables.
    Binary,
}

impl AuxEncoding {
    /// Weights of the auxiliary variables for a check of degree `d`.
    ///
    /// Binary encoding of a check with `d < 2` has no valid logarithm; it gets
    /// one weight-1 variable that the penalty drives to zero.
    pub fn weights(self, d: usize) -> Vec<u64> {
        match self {
            AuxEncoding::Unary => vec![1; d / 2 + 1],
            AuxEncoding::Binary => {
                let count = if d < 2 { 1 } else { d.ilog2() as usize };
                (0..count).map(|k| 1u64 << k).collect()
            }
        }
    }
}

impl FromStr for AuxEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unary" => Ok(AuxEncoding::Unary),
            "binary" => Ok(AuxEncoding::Binary),
            other => Err(Error::Parameter(format!("unknown encoding '{other}'"))),
        }
    }
}

/// `F(x) = sum_i a_i x_i + sum_{i<j} q_ij x_i x_j + c` over `x` in `{0,1}^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    var_map: Vec<VarTag>,
}

impl QuadraticModel {
    /// Assembles a model, dropping zero couplings and rejecting keys that are
    /// not `i < j < num_vars`.
    pub fn from_parts(
        linear: Vec<f64>,
        quadratic: BTreeMap<(usize, usize), f64>,
        offset: f64,
        var_map: Vec<VarTag>,
    ) -> Result<Self> {
        Error::check_len(linear.len(), var_map.len())?;
        let n = linear.len();
        for &(i, j) in quadratic.keys() {
            if i >= j || j >= n {
                return Err(Error::Integrity(format!(
                    "quadratic key ({i}, {j}) must satisfy i < j < {n}"
                )));
            }
        }
        let quadratic = quadratic.into_iter().filter(|&(_, v)| v != 0.0).collect();
        Ok(QuadraticModel {
            linear,
            quadratic,
            offset,
            var_map,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn num_code_bits(&self) -> usize {
        self.var_map
            .iter()
            .filter(|t| matches!(t, VarTag::CodeBit(_)))
            .count()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn var_map(&self) -> &[VarTag] {
        &self.var_map
    }

    pub fn energy(&self, x: &BitVector) -> Result<f64> {
        Error::check_len(self.num_vars(), x.len())?;
        let mut e = self.offset;
        for (i, &a) in self.linear.iter().enumerate() {
            if x.get(i) {
                e += a;
            }
        }
        for (&(i, j), &q) in &self.quadratic {
            if x.get(i) && x.get(j) {
                e += q;
            }
        }
        Ok(e)
    }

    /// Code bits of an assignment, in codeword order. Auxiliary variables are
    /// dropped.
    pub fn project(&self, x: &BitVector) -> Result<BitVector> {
        Error::check_len(self.num_vars(), x.len())?;
        let n = self.num_code_bits();
        let mut out = BitVector::zeros(n);
        for (v, tag) in self.var_map.iter().enumerate() {
            if let VarTag::CodeBit(i) = *tag {
                out.set(i, x.get(v));
            }
        }
        Ok(out)
    }

    /// Plain-text triplets: `vars offset`, then `i j coeff` with `i == j` for
    /// linear terms. Zero linear terms are omitted.
    pub fn to_triplets(&self) -> String {
        let mut out = format!("{} {}\n", self.num_vars(), self.offset);
        for (i, &a) in self.linear.iter().enumerate() {
            if a != 0.0 {
                let _ = writeln!(out, "{i} {i} {a}");
            }
        }
        for (&(i, j), &q) in &self.quadratic {
            let _ = writeln!(out, "{i} {j} {q}");
        }
        out
    }
}

/// Parses the triplet format. Variable roles are not part of the format, so
/// every variable comes back tagged as a code bit.
pub fn read_qubo_triplets(text: &str) -> Result<QuadraticModel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (no, head) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing 'vars offset' header"))?;
    let mut it = head.split_whitespace();
    let n: usize = parse_field(no, it.next(), "vars")?;
    let offset: f64 = parse_field(no, it.next(), "offset")?;
    let mut linear = vec![0.0; n];
    let mut quadratic = BTreeMap::new();
    for (no, line) in lines {
        let mut it = line.split_whitespace();
        let i: usize = parse_field(no, it.next(), "i")?;
        let j: usize = parse_field(no, it.next(), "j")?;
        let v: f64 = parse_field(no, it.next(), "coeff")?;
        if it.next().is_some() {
            return Err(Error::parse(no, "trailing fields"));
        }
        if i >= n || j >= n {
            return Err(Error::parse(no, format!("index out of range for {n} vars")));
        }
        if i == j {
            linear[i] += v;
        } else {
            *quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
    }
    QuadraticModel::from_parts(linear, quadratic, offset, (0..n).map(VarTag::CodeBit).collect())
}

fn parse_field<T: FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("bad {what} '{tok}'")))
}

/// Expands `sum_i (R_i - (1 - 2x_i))^2 + alpha * sum_j (H_j x - 2 L_j)^2`.
///
/// With `x^2 = x` the channel term is `4 R_i x_i + (R_i - 1)^2`. Each check
/// contributes the square of the linear form `sum x_i - 2 sum_k w_k y_k`.
pub fn build_qubo(
    h: &ParityCheckMatrix,
    r: &[f64],
    alpha: f64,
    encoding: AuxEncoding,
) -> Result<QuadraticModel> {
    Error::check_len(h.n(), r.len())?;
    if !(alpha > 0.0) {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    let n = h.n();
    let mut linear: Vec<f64> = r.iter().map(|&ri| 4.0 * ri).collect();
    let offset: f64 = r.iter().map(|&ri| (ri - 1.0).powi(2)).sum();
    let mut var_map: Vec<VarTag> = (0..n).map(VarTag::CodeBit).collect();
    let mut quadratic = BTreeMap::new();

    let mut terms: Vec<(usize, f64)> = Vec::new();
    for (j, row) in h.rows().enumerate() {
        terms.clear();
        terms.extend(row.iter().map(|&i| (i, 1.0)));
        for (k, w) in encoding.weights(row.len()).into_iter().enumerate() {
            terms.push((linear.len(), -2.0 * w as f64));
            linear.push(0.0);
            var_map.push(VarTag::Aux { check: j, index: k });
        }
        for (a, &(va, ca)) in terms.iter().enumerate() {
            linear[va] += alpha * ca * ca;
            for &(vb, cb) in &terms[a + 1..] {
                let key = (va.min(vb), va.max(vb));
                *quadratic.entry(key).or_insert(0.0) += 2.0 * alpha * ca * cb;
            }
        }
    }
    QuadraticModel::from_parts(linear, quadratic, offset, var_map)
}
