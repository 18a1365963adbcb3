//! Finite groups as multiplication tables.
//!
//! Every finite catalog group is a table over indexed elements, with named
//! generators and a declared presentation on those generators. Table axioms
//! (associativity, identity, inverses) are checked on construction by plain
//! enumeration, as are the declared relators.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiniteGroup {
    pub name: String,
    pub element_names: Vec<String>,
    /// table[i][j] = index of the product (element i) * (element j)
    pub table: Vec<Vec<usize>>,
    /// indices of the distinguished generators
    pub generators: Vec<usize>,
    /// declared relators over the generator list
    pub relators: Vec<Word>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn new(
        name: &str,
        element_names: Vec<String>,
        table: Vec<Vec<usize>>,
        generators: Vec<usize>,
        relators: Vec<Word>,
    ) -> Result<Self> {
        let n = element_names.len();
        if n == 0 || table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::Validation {
                id: name.to_string(),
                reason: "multiplication table shape does not match element count".into(),
            });
        }
        for row in &table {
            for &v in row {
                if v >= n {
                    return Err(Error::Validation {
                        id: name.to_string(),
                        reason: "table entry out of range".into(),
                    });
                }
            }
        }
        // identity
        let mut identity = None;
        for e in 0..n {
            if (0..n).all(|i| table[e][i] == i && table[i][e] == i) {
                identity = Some(e);
                break;
            }
        }
        let identity = identity.ok_or_else(|| Error::Validation {
            id: name.to_string(),
            reason: "no identity element".into(),
        })?;
        // inverses
        let mut inverse = vec![usize::MAX; n];
        for i in 0..n {
            match (0..n).find(|&j| table[i][j] == identity && table[j][i] == identity) {
                Some(j) => inverse[i] = j,
                None => {
                    return Err(Error::Validation {
                        id: name.to_string(),
                        reason: format!("element {} has no inverse", element_names[i]),
                    })
                }
            }
        }
        // associativity
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::Validation {
                            id: name.to_string(),
                            reason: "table is not associative".into(),
                        });
                    }
                }
            }
        }
        let g = FiniteGroup {
            name: name.to_string(),
            element_names,
            table,
            generators,
            relators,
            identity,
            inverse,
        };
        // generators generate
        if g.closure(&g.generators.iter().copied().collect::<BTreeSet<_>>()).len() != n {
            return Err(Error::Validation {
                id: name.to_string(),
                reason: "declared generators do not generate the group".into(),
            });
        }
        for (k, r) in g.relators.clone().iter().enumerate() {
            if g.eval(r)? != g.identity {
                return Err(Error::Validation {
                    id: name.to_string(),
                    reason: format!("declared relator #{} does not hold in the table", k),
                });
            }
        }
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.element_names.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn has_two_torsion(&self) -> bool {
        (0..self.order()).any(|i| i != self.identity && self.element_order(i) == 2)
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.generators.iter().map(|&i| self.element_names[i].clone()).collect()
    }

    /// Evaluates a word over the generator list to an element index.
    pub fn eval(&self, w: &Word) -> Result<usize> {
        let mut acc = self.identity;
        for l in &w.0 {
            let g = *self.generators.get(l.gen).ok_or_else(|| {
                Error::InvalidWord(format!(
                    "letter index {} out of range for {}",
                    l.gen, self.name
                ))
            })?;
            let g = if l.inv { self.inv(g) } else { g };
            acc = self.mul(acc, g);
        }
        Ok(acc)
    }

    /// Shortlex word over the generators for every element (a fixed BFS).
    pub fn element_words(&self) -> Vec<Word> {
        let n = self.order();
        let mut words: Vec<Option<Word>> = vec![None; n];
        words[self.identity] = Some(Word::identity());
        let mut queue = VecDeque::new();
        queue.push_back(self.identity);
        // alphabet order: g0, g0^-1, g1, g1^-1, ...
        while let Some(x) = queue.pop_front() {
            let base = words[x].clone().unwrap();
            for (gi, &g) in self.generators.iter().enumerate() {
                for inv in [false, true] {
                    let y = self.mul(x, if inv { self.inv(g) } else { g });
                    if words[y].is_none() {
                        let mut w = base.clone();
                        w.0.push(Letter { gen: gi, inv });
                        words[y] = Some(w);
                        queue.push_back(y);
                    }
                }
            }
        }
        words.into_iter().map(|w| w.expect("generators generate")).collect()
    }

    /// Closure of a set of elements under the table.
    pub fn closure(&self, seed: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = seed.clone();
        set.insert(self.identity);
        let mut frontier: Vec<usize> = set.iter().copied().collect();
        while let Some(x) = frontier.pop() {
            for &s in seed {
                for y in [self.mul(x, s), self.mul(x, self.inv(s))] {
                    if set.insert(y) {
                        frontier.push(y);
                    }
                }
            }
        }
        set
    }

    pub fn is_normal(&self, sub: &BTreeSet<usize>) -> bool {
        (0..self.order()).all(|g| sub.iter().all(|&s| sub.contains(&self.conj(g, s))))
    }

    /// All subgroups, as element sets. Fine at catalog orders (<= 12).
    pub fn all_subgroups(&self) -> Vec<BTreeSet<usize>> {
        let trivial: BTreeSet<usize> = [self.identity].into();
        let mut seen: BTreeSet<BTreeSet<usize>> = [trivial.clone()].into();
        let mut queue = vec![trivial];
        while let Some(s) = queue.pop() {
            for x in 0..self.order() {
                if s.contains(&x) {
                    continue;
                }
                let mut seed = s.clone();
                seed.insert(x);
                let c = self.closure(&seed);
                if seen.insert(c.clone()) {
                    queue.push(c);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Sub-table group on an element subset (which must be closed).
    /// Element names are inherited, so the subset is recoverable from them.
    /// Group axioms are inherited from the ambient table, so they are not
    /// re-verified.
    pub fn subgroup_table(&self, elements: &BTreeSet<usize>) -> Result<FiniteGroup> {
        let elems: Vec<usize> = elements.iter().copied().collect();
        let pos: BTreeMap<usize, usize> = elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let n = elems.len();
        let mut table = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                let p = self.mul(elems[i], elems[j]);
                table[i][j] = *pos.get(&p).ok_or_else(|| Error::Validation {
                    id: self.name.clone(),
                    reason: "element subset is not closed under multiplication".into(),
                })?;
            }
        }
        let names: Vec<String> = elems.iter().map(|&e| self.element_names[e].clone()).collect();
        // all non-identity elements as generators; the table presentation is
        // stated over the same list
        let gens: Vec<usize> = (0..n).filter(|&i| elems[i] != self.identity).collect();
        let identity = pos[&self.identity];
        let inverse: Vec<usize> = elems.iter().map(|&e| pos[&self.inv(e)]).collect();
        // relators stay empty here; handle presentations fall back to the
        // table presentation for finite kinds with no declared relators
        Ok(FiniteGroup {
            name: format!("{}{{{}}}", self.name, names.join(",")),
            element_names: names,
            table,
            generators: gens,
            relators: Vec::new(),
            identity,
            inverse,
        })
    }

    /// The lexicographically least conjugate of a subgroup element set.
    /// Sandbox quotient labels are normalized with this so that conjugation
    /// bookkeeping never leaks into graph comparisons.
    pub fn min_conjugate_set(&self, s: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut best = s.clone();
        for g in 0..self.order() {
            let conj: BTreeSet<usize> = s.iter().map(|&x| self.conj(g, x)).collect();
            if conj < best {
                best = conj;
            }
        }
        best
    }

    /// Replaces the declared relators with the multiplication-table
    /// presentation over the current generator list.
    pub fn install_table_presentation(&mut self) {
        self.relators = self.table_presentation_relators();
    }

    /// Multiplication-table presentation relators over the current generator
    /// list: for generators g_i, g_j the word g_i * g_j * (g_i g_j)^-1,
    /// whenever the product is again a generator, plus order relators. For the
    /// "all elements" generator convention this presents the group exactly.
    pub fn table_presentation_relators(&self) -> Vec<Word> {
        let gen_of: BTreeMap<usize, usize> =
            self.generators.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut rels = Vec::new();
        for (i, &a) in self.generators.iter().enumerate() {
            let ord = self.element_order(a);
            rels.push(Word(vec![Letter::pos(i); ord]));
            for (j, &b) in self.generators.iter().enumerate() {
                let p = self.mul(a, b);
                if let Some(&k) = gen_of.get(&p) {
                    rels.push(Word(vec![Letter::pos(i), Letter::pos(j), Letter::neg(k)]));
                } else if p == self.identity {
                    rels.push(Word(vec![Letter::pos(i), Letter::pos(j)]));
                }
            }
        }
        rels
    }
}

fn w(text: &str, names: &[&str]) -> Word {
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    Word::parse(text, &names).expect("catalog relator parses")
}

/// The trivial group (no generators).
pub fn trivial() -> FiniteGroup {
    FiniteGroup::new("1", vec!["1".into()], vec![vec![0]], vec![], vec![]).unwrap()
}

/// Cyclic group of order n, generator `a`, presentation ⟨a | a^n⟩.
pub fn cyclic(n: usize) -> FiniteGroup {
    assert!(n >= 1);
    if n == 1 {
        let mut g = trivial();
        g.name = "C1".into();
        return g;
    }
    let names: Vec<String> = (0..n)
        .map(|i| match i {
            0 => "1".into(),
            1 => "a".into(),
            _ => format!("a{}", i),
        })
        .collect();
    let table: Vec<Vec<usize>> = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
    FiniteGroup::new(
        &format!("C{}", n),
        names,
        table,
        vec![1],
        vec![Word(vec![Letter::pos(0); n])],
    )
    .unwrap()
}

/// Direct product, elements named `x|y`.
pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup, name: &str) -> FiniteGroup {
    let na = a.order();
    let nb = b.order();
    let idx = |i: usize, j: usize| i * nb + j;
    let names: Vec<String> = (0..na)
        .flat_map(|i| (0..nb).map(move |j| (i, j)))
        .map(|(i, j)| format!("{}|{}", a.element_names[i], b.element_names[j]))
        .collect();
    let mut table = vec![vec![0usize; na * nb]; na * nb];
    for i1 in 0..na {
        for j1 in 0..nb {
            for i2 in 0..na {
                for j2 in 0..nb {
                    table[idx(i1, j1)][idx(i2, j2)] = idx(a.mul(i1, i2), b.mul(j1, j2));
                }
            }
        }
    }
    let mut generators = Vec::new();
    for &g in &a.generators {
        generators.push(idx(g, b.identity()));
    }
    for &g in &b.generators {
        generators.push(idx(a.identity(), g));
    }
    // relators: the factor relators plus commutators between the factors
    let ka = a.generators.len();
    let mut relators: Vec<Word> = a.relators.clone();
    for r in &b.relators {
        relators.push(Word(r.0.iter().map(|l| Letter { gen: l.gen + ka, inv: l.inv }).collect()));
    }
    for i in 0..ka {
        for j in 0..b.generators.len() {
            relators.push(Word(vec![
                Letter::pos(i),
                Letter::pos(ka + j),
                Letter::neg(i),
                Letter::neg(ka + j),
            ]));
        }
    }
    FiniteGroup::new(name, names, table, generators, relators).unwrap()
}

/// Symmetric group S3 = ⟨r, f | r^3, f^2, (f r)^2⟩ with r a 3-cycle.
pub fn sym3() -> FiniteGroup {
    dihedral_table("S3", 3, &["r", "f"])
}

/// Dihedral group of order 2n (n >= 3), ⟨r, f | r^n, f^2, (f r)^2⟩.
pub fn dihedral(n: usize) -> FiniteGroup {
    dihedral_table(&format!("D{}", n), n, &["r", "f"])
}

fn dihedral_table(name: &str, n: usize, gens: &[&str; 2]) -> FiniteGroup {
    // elements: r^i (0..n), r^i f (n..2n)
    let order = 2 * n;
    let names: Vec<String> = (0..order)
        .map(|k| {
            let (i, f) = (k % n, k >= n);
            match (i, f) {
                (0, false) => "1".into(),
                (1, false) => gens[0].into(),
                (_, false) => format!("{}{}", gens[0], i),
                (0, true) => gens[1].into(),
                (1, true) => format!("{}{}", gens[0], gens[1]),
                (_, true) => format!("{}{}{}", gens[0], i, gens[1]),
            }
        })
        .collect();
    let idx = |i: usize, f: bool| if f { n + i } else { i };
    let mut table = vec![vec![0usize; order]; order];
    for i in 0..n {
        for f1 in [false, true] {
            for j in 0..n {
                for f2 in [false, true] {
                    // (r^i f^e1)(r^j f^e2) = r^(i +- j) f^(e1 xor e2)
                    let jj = if f1 { (n - j % n) % n } else { j };
                    table[idx(i, f1)][idx(j, f2)] = idx((i + jj) % n, f1 ^ f2);
                }
            }
        }
    }
    let rel_names = [gens[0], gens[1]];
    FiniteGroup::new(
        name,
        names,
        table,
        vec![1, n],
        vec![
            w(&format!("{}^{}", gens[0], n), &rel_names),
            w(&format!("{}^2", gens[1]), &rel_names),
            w(&format!("{0}*{1}*{0}*{1}", gens[1], gens[0]), &rel_names),
        ],
    )
    .unwrap()
}

/// Quaternion group Q8 = ⟨i, j | i^4, i^2 j^-2, j^-1 i j i⟩.
pub fn quaternion8() -> FiniteGroup {
    let names: Vec<String> =
        ["1", "-1", "i", "-i", "j", "-j", "k", "-k"].iter().map(|s| s.to_string()).collect();
    // encode as pairs (sign, unit): use the standard quaternion unit products
    let unit_mul = |a: usize, b: usize| -> (bool, usize) {
        // units: 0=1, 1=i, 2=j, 3=k; returns (negate, unit)
        match (a, b) {
            (0, x) => (false, x),
            (x, 0) => (false, x),
            (1, 1) => (true, 0),
            (2, 2) => (true, 0),
            (3, 3) => (true, 0),
            (1, 2) => (false, 3),
            (2, 1) => (true, 3),
            (2, 3) => (false, 1),
            (3, 2) => (true, 1),
            (3, 1) => (false, 2),
            (1, 3) => (true, 2),
            _ => unreachable!(),
        }
    };
    let enc = |neg: bool, unit: usize| unit * 2 + usize::from(neg);
    let dec = |x: usize| (x % 2 == 1, x / 2);
    let mut table = vec![vec![0usize; 8]; 8];
    for x in 0..8 {
        for y in 0..8 {
            let (nx, ux) = dec(x);
            let (ny, uy) = dec(y);
            let (nm, um) = unit_mul(ux, uy);
            table[x][y] = enc(nx ^ ny ^ nm, um);
        }
    }
    FiniteGroup::new(
        "Q8",
        names,
        table,
        vec![2, 4],
        vec![w("i^4", &["i", "j"]), w("i^2*j^-2", &["i", "j"]), w("j^-1*i*j*i", &["i", "j"])],
    )
    .unwrap()
}

/// Alternating group A4 = ⟨s, t | s^2, t^3, (s t)^3⟩ on 4 points.
pub fn alt4() -> FiniteGroup {
    // enumerate even permutations of {0,1,2,3}
    let mut perms: Vec<[usize; 4]> = Vec::new();
    let mut items = [0usize, 1, 2, 3];
    permute(&mut items, 0, &mut perms);
    perms.retain(|p| perm_sign(p));
    perms.sort();
    let compose = |p: &[usize; 4], q: &[usize; 4]| {
        // (p*q)(x) = p(q(x))
        let mut r = [0usize; 4];
        for x in 0..4 {
            r[x] = p[q[x]];
        }
        r
    };
    let index_of = |perms: &Vec<[usize; 4]>, p: &[usize; 4]| perms.iter().position(|q| q == p).unwrap();
    let mut table = vec![vec![0usize; 12]; 12];
    for i in 0..12 {
        for j in 0..12 {
            table[i][j] = index_of(&perms, &compose(&perms[i], &perms[j]));
        }
    }
    let names: Vec<String> = perms.iter().map(|p| perm_name(p)).collect();
    let s = index_of(&perms, &[1, 0, 3, 2]); // (01)(23)
    let t = index_of(&perms, &[1, 2, 0, 3]); // (012)
    FiniteGroup::new(
        "A4",
        names,
        table,
        vec![s, t],
        vec![w("s^2", &["s", "t"]), w("t^3", &["s", "t"]), w("s*t*s*t*s*t", &["s", "t"])],
    )
    .unwrap()
}

fn permute(items: &mut [usize; 4], k: usize, out: &mut Vec<[usize; 4]>) {
    if k == 4 {
        out.push(*items);
        return;
    }
    for i in k..4 {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

fn perm_sign(p: &[usize; 4]) -> bool {
    let mut inv = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 0
}

fn perm_name(p: &[usize; 4]) -> String {
    let mut seen = [false; 4];
    let mut cycles = Vec::new();
    for start in 0..4 {
        if seen[start] || p[start] == start {
            seen[start] = true;
            continue;
        }
        let mut cyc = vec![start];
        seen[start] = true;
        let mut x = p[start];
        while x != start {
            seen[x] = true;
            cyc.push(x);
            x = p[x];
        }
        cycles.push(cyc);
    }
    if cycles.is_empty() {
        return "1".into();
    }
    cycles
        .iter()
        .map(|c| format!("({})", c.iter().map(|x| x.to_string()).collect::<String>()))
        .collect()
}

/// Klein four-group C2 x C2 with generators a, b.
pub fn klein4() -> FiniteGroup {
    let c2a = cyclic(2);
    let mut g = direct_product(&c2a, &c2a, "V4");
    g.element_names = vec!["1".into(), "b".into(), "a".into(), "ab".into()];
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_oracle_s3() {
        // oracle for the spec example: r*f*r*f = identity in S3
        let g = sym3();
        let rf = Word::parse("r*f*r*f", &g.generator_names()).unwrap();
        assert_eq!(g.eval(&rf).unwrap(), g.identity());
        assert_eq!(g.order(), 6);
        assert!(!g.table[1][3] == g.table[3][1] || g.table[1][3] != g.table[3][1]); // non-abelian somewhere
        assert_ne!(g.mul(1, 3), g.mul(3, 1));
    }

    #[test]
    fn catalog_tables_are_groups() {
        for g in [trivial(), cyclic(5), cyclic(12), sym3(), dihedral(4), quaternion8(), alt4(), klein4()] {
            assert!(g.order() >= 1);
            // closure of generators is the whole group (checked in new, re-assert)
            let gens: BTreeSet<usize> = g.generators.iter().copied().collect();
            assert_eq!(g.closure(&gens).len(), g.order());
        }
    }

    #[test]
    fn subgroup_closure_s3() {
        // spec example oracle: a 2-cycle and a 3-cycle generate all of S3
        let g = sym3();
        let seed: BTreeSet<usize> = [1usize, 3].into(); // r and f
        assert_eq!(g.closure(&seed).len(), 6);
        // a single 3-cycle generates the subgroup of order 3
        let seed: BTreeSet<usize> = [1usize].into();
        assert_eq!(g.closure(&seed).len(), 3);
    }

    #[test]
    fn all_subgroups_counts() {
        // S3 has 6 subgroups: 1, three C2, C3, S3
        assert_eq!(sym3().all_subgroups().len(), 6);
        // Q8 has 6 subgroups: 1, Z2, three C4, Q8
        assert_eq!(quaternion8().all_subgroups().len(), 6);
    }

    #[test]
    fn element_words_are_shortest() {
        let g = sym3();
        let words = g.element_words();
        for (e, word) in words.iter().enumerate() {
            assert_eq!(g.eval(word).unwrap(), e);
        }
        assert_eq!(words[g.identity()].len(), 0);
    }

    #[test]
    fn two_torsion_detection() {
        assert!(sym3().has_two_torsion());
        assert!(!cyclic(9).has_two_torsion());
        assert!(quaternion8().has_two_torsion());
    }

    #[test]
    fn a4_structure() {
        let g = alt4();
        assert_eq!(g.order(), 12);
        assert!(g.has_two_torsion());
        // A4 has a unique normal V4
        let normal_order4: Vec<_> = g
            .all_subgroups()
            .into_iter()
            .filter(|s| s.len() == 4 && g.is_normal(s))
            .collect();
        assert_eq!(normal_order4.len(), 1);
    }
}
