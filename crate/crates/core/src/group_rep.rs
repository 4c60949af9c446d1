//! Finite point groups realised by signed permutation matrices, with their
//! closed-form character tables and fixed-point geometry.
//!
//! Restricting to signed permutations means every group element maps an
//! origin-centred lattice onto itself exactly, so the induced action on grid
//! functions is a permutation with no interpolation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An orthogonal map `x ↦ M x` where `M` is a signed permutation matrix.
///
/// Stored as `(gx)_i = signs[i] * x[perm[i]]`, i.e. `M[i][perm[i]] = signs[i]`
/// and every other entry is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrthogonalElement {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl OrthogonalElement {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), signs: vec![1; n] }
    }

    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = perm.len();
        if signs.len() != n {
            return Err(Error::InvalidElement("perm and signs differ in length".into()));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidElement(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidElement(format!("signs {signs:?} must be ±1")));
        }
        Ok(Self { perm, signs })
    }

    /// Build from a dense integer matrix; fails unless it is a signed permutation.
    pub fn from_matrix(m: &[Vec<i8>]) -> Result<Self> {
        let n = m.len();
        let mut perm = Vec::with_capacity(n);
        let mut signs = Vec::with_capacity(n);
        for row in m {
            if row.len() != n {
                return Err(Error::InvalidElement("matrix is not square".into()));
            }
            let nz: Vec<usize> = (0..n).filter(|&j| row[j] != 0).collect();
            if nz.len() != 1 {
                return Err(Error::InvalidElement(format!("row {row:?} has {} nonzeros", nz.len())));
            }
            perm.push(nz[0]);
            signs.push(row[nz[0]]);
        }
        Self::new(perm, signs)
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn matrix(&self) -> Vec<Vec<i8>> {
        let n = self.dim();
        let mut m = vec![vec![0i8; n]; n];
        for i in 0..n {
            m[i][self.perm[i]] = self.signs[i];
        }
        m
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| p == i) && self.signs.iter().all(|&s| s == 1)
    }

    /// `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.dim();
        let mut perm = vec![0; n];
        let mut signs = vec![0; n];
        for i in 0..n {
            let j = self.perm[i];
            perm[i] = other.perm[j];
            signs[i] = self.signs[i] * other.signs[j];
        }
        Self { perm, signs }
    }

    pub fn inverse(&self) -> Self {
        let n = self.dim();
        let mut perm = vec![0; n];
        let mut signs = vec![0; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        Self { perm, signs }
    }

    pub fn determinant(&self) -> i8 {
        let n = self.dim();
        let mut visited = vec![false; n];
        let mut parity = 1i8;
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                parity = -parity;
            }
        }
        parity * self.signs.iter().product::<i8>()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|i| f64::from(self.signs[i]) * x[self.perm[i]]).collect()
    }

    /// Action on integer lattice indices. With `cell_centered` the index `p`
    /// stands for the coordinate `p + 1/2`, so a sign flip maps `p` to `-p - 1`.
    pub fn apply_index(&self, p: &[i64], cell_centered: bool) -> Vec<i64> {
        (0..self.dim())
            .map(|i| {
                let q = p[self.perm[i]];
                match (self.signs[i], cell_centered) {
                    (1, _) => q,
                    (_, true) => -q - 1,
                    (_, false) => -q,
                }
            })
            .collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| if self.perm[i] == j { f64::from(self.signs[i]) } else { 0.0 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupFamily {
    Cyclic,
    Dihedral,
    Product,
}

impl FromStr for GroupFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cyclic" | "c" => Ok(Self::Cyclic),
            "dihedral" | "d" => Ok(Self::Dihedral),
            "product" | "p" => Ok(Self::Product),
            other => Err(Error::UnsupportedGroup(format!("unknown family {other:?}"))),
        }
    }
}

impl fmt::Display for GroupFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cyclic => "cyclic",
            Self::Dihedral => "dihedral",
            Self::Product => "product",
        })
    }
}

/// How an element was generated: `r^rotation ∘ s^reflected ∘ z^z_flip`.
/// The character formulas are written against this word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Word {
    rotation: usize,
    reflected: bool,
    z_flip: bool,
}

#[derive(Clone, Debug)]
pub struct FiniteGroup {
    family: GroupFamily,
    k: usize,
    n: usize,
    elements: Vec<OrthogonalElement>,
    words: Vec<Word>,
    mul_table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

/// Quarter-turn rotation in the (x, y) plane: `(x, y) ↦ (-y, x)`.
fn quarter_turn(n: usize) -> OrthogonalElement {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut signs = vec![1i8; n];
    perm[0] = 1;
    perm[1] = 0;
    signs[0] = -1;
    OrthogonalElement { perm, signs }
}

fn rotation_generator(k: usize, n: usize) -> OrthogonalElement {
    match k {
        1 => OrthogonalElement::identity(n),
        2 => {
            let q = quarter_turn(n);
            q.compose(&q)
        }
        _ => quarter_turn(n),
    }
}

/// Reflection across the x axis: `(x, y) ↦ (x, -y)`.
fn mirror(n: usize) -> OrthogonalElement {
    let mut e = OrthogonalElement::identity(n);
    e.signs[1] = -1;
    e
}

fn z_flip(n: usize) -> OrthogonalElement {
    let mut e = OrthogonalElement::identity(n);
    e.signs[n - 1] = -1;
    e
}

/// Build one of the lattice-compatible point groups.
///
/// `cyclic`/`dihedral` act on the first two coordinates (leaving z fixed in
/// 3D); `product` is `dihedral(k) × {1, z ↦ -z}` and needs `n = 3`. Only
/// `k ∈ {1, 2, 4}` is realisable by signed permutations.
pub fn build_group(family: GroupFamily, k: usize, n: usize) -> Result<FiniteGroup> {
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedGroup(format!("dimension {n} (only 2 and 3)")));
    }
    if !matches!(k, 1 | 2 | 4) {
        return Err(Error::UnsupportedGroup(format!("{family}({k}) is not realisable by signed permutation matrices")));
    }
    if family == GroupFamily::Product && n != 3 {
        return Err(Error::UnsupportedGroup("product family needs n = 3".into()));
    }

    let r = rotation_generator(k, n);
    let mut rotations = vec![OrthogonalElement::identity(n)];
    for j in 1..k {
        rotations.push(r.compose(&rotations[j - 1]));
    }

    let mut elements = Vec::new();
    let mut words = Vec::new();
    let reflections: &[bool] = match family {
        GroupFamily::Cyclic => &[false],
        _ => &[false, true],
    };
    let flips: &[bool] = match family {
        GroupFamily::Product => &[false, true],
        _ => &[false],
    };
    for &z in flips {
        for &reflected in reflections {
            for (j, rot) in rotations.iter().enumerate() {
                let mut e = rot.clone();
                if reflected {
                    e = e.compose(&mirror(n));
                }
                if z {
                    e = e.compose(&z_flip(n));
                }
                elements.push(e);
                words.push(Word { rotation: j, reflected, z_flip: z });
            }
        }
    }

    let index: HashMap<OrthogonalElement, usize> = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    if index.len() != elements.len() {
        return Err(Error::UnsupportedGroup(format!("{family}({k}) generated repeated elements")));
    }
    let order = elements.len();
    let mut mul_table = vec![vec![0; order]; order];
    for a in 0..order {
        for b in 0..order {
            let ab = elements[a].compose(&elements[b]);
            mul_table[a][b] =
                *index.get(&ab).ok_or_else(|| Error::UnsupportedGroup(format!("{family}({k}) is not closed")))?;
        }
    }
    let inverse = elements
        .iter()
        .map(|e| index.get(&e.inverse()).copied())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::UnsupportedGroup("missing inverse".into()))?;

    Ok(FiniteGroup { family, k, n, elements, words, mul_table, inverse })
}

impl FiniteGroup {
    pub fn trivial(n: usize) -> Self {
        build_group(GroupFamily::Cyclic, 1, n).expect("trivial group always builds")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> GroupFamily {
        self.family
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn name(&self) -> String {
        let base = match (self.family, self.k) {
            (GroupFamily::Cyclic, k) => format!("C{k}"),
            (GroupFamily::Dihedral, k) => format!("D{k}"),
            (GroupFamily::Product, k) => format!("D{k}xZ2"),
        };
        format!("{base}[n={}]", self.n)
    }

    pub fn elements(&self) -> &[OrthogonalElement] {
        &self.elements
    }

    pub fn element(&self, g: usize) -> &OrthogonalElement {
        &self.elements[g]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul_table[a][b]
    }

    pub fn mul_table(&self) -> &[Vec<usize>] {
        &self.mul_table
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    /// Conjugacy classes as sorted element-index lists, ordered by their
    /// smallest member (so class 0 is `{e}`).
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let order = self.order();
        let mut assigned = vec![false; order];
        let mut classes = Vec::new();
        for a in 0..order {
            if assigned[a] {
                continue;
            }
            let mut class: Vec<usize> = (0..order).map(|g| self.mul(self.mul(g, a), self.inverse(g))).collect();
            class.sort_unstable();
            class.dedup();
            for &c in &class {
                assigned[c] = true;
            }
            classes.push(class);
        }
        classes
    }
}

/// Irreducible characters of a [`FiniteGroup`], one value per conjugacy class.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    group_order: usize,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    characters: Vec<Vec<Complex64>>,
    dims: Vec<usize>,
    labels: Vec<String>,
}

/// `i^q`, exact.
fn i_pow(q: usize) -> Complex64 {
    match q % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `exp(2πi·num/den)` for `den | 4`, exact.
fn root_of_unity(num: usize, den: usize) -> Complex64 {
    i_pow(num * (4 / den))
}

fn sign(b: bool) -> f64 {
    if b {
        -1.0
    } else {
        1.0
    }
}

type CharFn = Box<dyn Fn(Word) -> Complex64>;

fn dihedral_characters(k: usize) -> Vec<(String, usize, CharFn)> {
    let mut out: Vec<(String, usize, CharFn)> = vec![
        ("A1".into(), 1, Box::new(|_| Complex64::new(1.0, 0.0))),
        ("A2".into(), 1, Box::new(|w: Word| Complex64::new(sign(w.reflected), 0.0))),
    ];
    if k.is_multiple_of(2) {
        out.push(("B1".into(), 1, Box::new(|w: Word| Complex64::new(sign(w.rotation % 2 == 1), 0.0))));
        out.push((
            "B2".into(),
            1,
            Box::new(|w: Word| Complex64::new(sign(w.rotation % 2 == 1) * sign(w.reflected), 0.0)),
        ));
    }
    for h in 1..k.div_ceil(2) {
        out.push((
            format!("E{h}"),
            2,
            Box::new(move |w: Word| {
                if w.reflected {
                    Complex64::new(0.0, 0.0)
                } else {
                    root_of_unity(h * w.rotation % k, k) + root_of_unity((k - h * w.rotation % k) % k, k)
                }
            }),
        ));
    }
    out
}

fn cyclic_characters(k: usize) -> Vec<(String, usize, CharFn)> {
    (0..k)
        .map(|a| {
            let label = match a {
                0 => "A".to_string(),
                a if 2 * a == k => "B".to_string(),
                a => format!("E{a}"),
            };
            let f: CharFn = Box::new(move |w: Word| root_of_unity(a * w.rotation % k, k));
            (label, 1, f)
        })
        .collect()
}

/// Closed-form character table of a supported group.
pub fn character_table(group: &FiniteGroup) -> Result<CharacterTable> {
    let irreps: Vec<(String, usize, CharFn)> = match group.family {
        GroupFamily::Cyclic => cyclic_characters(group.k),
        GroupFamily::Dihedral => dihedral_characters(group.k),
        GroupFamily::Product => {
            let mut out: Vec<(String, usize, CharFn)> = Vec::new();
            for parity in [false, true] {
                for (label, d, f) in dihedral_characters(group.k) {
                    let suffix = if parity { "u" } else { "g" };
                    out.push((format!("{label}{suffix}"), d, Box::new(move |w: Word| f(w) * sign(parity && w.z_flip))));
                }
            }
            out
        }
    };

    let classes = group.conjugacy_classes();
    let mut class_of = vec![0; group.order()];
    for (c, class) in classes.iter().enumerate() {
        for &g in class {
            class_of[g] = c;
        }
    }
    if irreps.len() != classes.len() {
        return Err(Error::UnsupportedGroup(format!(
            "{}: {} irreps for {} classes",
            group.name(),
            irreps.len(),
            classes.len()
        )));
    }

    let mut characters = Vec::with_capacity(irreps.len());
    let mut dims = Vec::with_capacity(irreps.len());
    let mut labels = Vec::with_capacity(irreps.len());
    for (label, d, f) in irreps {
        let row: Vec<Complex64> = classes.iter().map(|class| f(group.words[class[0]])).collect();
        for (c, class) in classes.iter().enumerate() {
            if class.iter().any(|&g| f(group.words[g]) != row[c]) {
                return Err(Error::UnsupportedGroup(format!(
                    "{}: character {label} is not a class function",
                    group.name()
                )));
            }
        }
        if row[0] != Complex64::new(d as f64, 0.0) {
            return Err(Error::UnsupportedGroup(format!("{label}: χ(e) ≠ {d}")));
        }
        characters.push(row);
        dims.push(d);
        labels.push(label);
    }

    Ok(CharacterTable { group_order: group.order(), classes, class_of, characters, dims, labels })
}

impl CharacterTable {
    pub fn num_irreps(&self) -> usize {
        self.characters.len()
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, chi: usize) -> usize {
        self.dims[chi]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, chi: usize) -> &str {
        &self.labels[chi]
    }

    /// Values of character `chi`, one per class.
    pub fn row(&self, chi: usize) -> &[Complex64] {
        &self.characters[chi]
    }

    /// `χ(g)` for a group element index.
    pub fn value(&self, chi: usize, g: usize) -> Complex64 {
        self.characters[chi][self.class_of[g]]
    }

    pub fn is_real(&self) -> bool {
        self.characters.iter().flatten().all(|z| z.im == 0.0)
    }

    /// `max |Σ_g χ_i(g) conj χ_j(g) − |G| δ_ij|`.
    pub fn row_orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.num_irreps() {
            for j in 0..self.num_irreps() {
                let s: Complex64 = self
                    .classes
                    .iter()
                    .enumerate()
                    .map(|(c, cl)| self.characters[i][c] * self.characters[j][c].conj() * cl.len() as f64)
                    .sum();
                let target = if i == j { self.group_order as f64 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    /// `max |Σ_χ χ(C_a) conj χ(C_b) − (|G|/|C_a|) δ_ab|`.
    pub fn column_orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.classes.len() {
            for b in 0..self.classes.len() {
                let s: Complex64 = self.characters.iter().map(|row| row[a] * row[b].conj()).sum();
                let target = if a == b { (self.group_order / self.classes[a].len()) as f64 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    /// Whether `χ(g⁻¹) = conj χ(g)` for every element and character.
    pub fn inverse_conjugation_holds(&self, group: &FiniteGroup) -> bool {
        (0..self.num_irreps())
            .all(|chi| (0..group.order()).all(|g| self.value(chi, group.inverse(g)) == self.value(chi, g).conj()))
    }

    pub fn sum_of_squared_dims(&self) -> usize {
        self.dims.iter().map(|d| d * d).sum()
    }

    /// CSV with one row per irrep and one column per class; complex values as `a+bi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("irrep,dim");
        for class in &self.classes {
            let names: Vec<String> = class.iter().map(|g| format!("g{g}")).collect();
            out.push_str(&format!(",{}", names.join(" ")));
        }
        out.push('\n');
        for chi in 0..self.num_irreps() {
            out.push_str(&format!("{},{}", self.labels[chi], self.dims[chi]));
            for z in &self.characters[chi] {
                out.push(',');
                out.push_str(&format_complex(*z));
            }
            out.push('\n');
        }
        out
    }
}

pub fn format_complex(z: Complex64) -> String {
    // normalise -0.0 so that tables print stably
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    if im < 0.0 {
        format!("{re}-{}i", -im)
    } else {
        format!("{re}+{im}i")
    }
}

/// Fixed subspace `Σ_g = ker(g − I)` and the separation constant
/// `κ = min |gX − X|` over unit `X ⟂ Σ_g`.
#[derive(Clone, Debug)]
pub struct FixedPointData {
    pub element: usize,
    /// Orthonormal basis of `Σ_g`, one vector per entry.
    pub fixed_subspace: Vec<Vec<f64>>,
    pub kappa: f64,
}

const SINGULAR_TOL: f64 = 1e-12;

pub fn fixed_point_data(group: &FiniteGroup, g: usize) -> Result<FixedPointData> {
    let e = group.element(g);
    if e.is_identity() {
        return Err(Error::IdentityElement(g));
    }
    let n = e.dim();
    let a = e.to_dmatrix() - DMatrix::<f64>::identity(n, n);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut kernel = Vec::new();
    let mut kappa = f64::INFINITY;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= SINGULAR_TOL {
            kernel.push(v_t.row(i).iter().copied().collect::<Vec<f64>>());
        } else {
            kappa = kappa.min(s);
        }
    }
    // The SVD only returns min(rows, cols) = n singular triplets, so this is complete.
    Ok(FixedPointData { element: g, fixed_subspace: kernel, kappa })
}

impl FixedPointData {
    /// Euclidean distance from `x` to `Σ_g`.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let mut r = DVector::from_column_slice(x);
        for b in &self.fixed_subspace {
            let bv = DVector::from_column_slice(b);
            let c = bv.dot(&r);
            r -= bv * c;
        }
        r.norm()
    }
}

/// Fixed-point data for every non-identity element.
pub fn all_fixed_point_data(group: &FiniteGroup) -> Vec<FixedPointData> {
    (0..group.order())
        .filter(|&g| !group.element(g).is_identity())
        .map(|g| fixed_point_data(group, g).expect("non-identity element"))
        .collect()
}
