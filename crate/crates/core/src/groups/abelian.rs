//! Finite presentations, Smith normal form, and abelian invariants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::Word;

/// A finite presentation: named generators and relator words over them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub gens: Vec<String>,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new(gens: Vec<String>, relators: Vec<Word>) -> Self {
        Presentation { gens, relators }
    }

    /// Exponent-sum matrix, one row per relator.
    pub fn exponent_matrix(&self) -> Vec<Vec<i128>> {
        self.relators
            .iter()
            .map(|r| {
                let mut row = vec![0i128; self.gens.len()];
                for l in &r.0 {
                    row[l.gen] += if l.inv { -1 } else { 1 };
                }
                row
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let rels: Vec<String> = self.relators.iter().map(|r| r.render(&self.gens)).collect();
        format!("< {} | {} >", self.gens.join(", "), rels.join(", "))
    }
}

/// Abelian invariants in divisibility-chain form: ℤ^rank ⊕ ℤ/d₁ ⊕ … ⊕ ℤ/dₖ
/// with d₁ | d₂ | … and every dᵢ ≥ 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianInvariants {
    pub rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianInvariants {
    pub fn is_finite(&self) -> bool {
        self.rank == 0
    }

    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        if self.rank > 0 {
            parts.push(if self.rank == 1 { "Z".to_string() } else { format!("Z^{}", self.rank) });
        }
        for d in &self.torsion {
            parts.push(format!("Z/{}", d));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

/// Smith normal form invariants of the relator exponent-sum matrix.
pub fn abelianization(p: &Presentation) -> Result<AbelianInvariants> {
    for r in &p.relators {
        r.check_letters(p.gens.len())?;
    }
    let mat = p.exponent_matrix();
    let diag = smith_diagonal(mat)?;
    let nonzero: Vec<i128> = diag.into_iter().filter(|&d| d != 0).collect();
    let rank = p.gens.len() - nonzero.len();
    let torsion: Vec<u64> = nonzero
        .into_iter()
        .filter(|&d| d > 1)
        .map(|d| {
            u64::try_from(d).map_err(|_| Error::Overflow("torsion coefficient".into()))
        })
        .collect::<Result<_>>()?;
    Ok(AbelianInvariants { rank, torsion })
}

/// Diagonal of the Smith normal form, as non-negative integers forming a
/// divisibility chain (zeros last).
pub fn smith_diagonal(mut m: Vec<Vec<i128>>) -> Result<Vec<i128>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut diag = Vec::new();
    let mut top = 0usize;
    let mut left = 0usize;
    while top < rows && left < cols {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut pivot: Option<(usize, usize)> = None;
        for i in top..rows {
            for j in left..cols {
                if m[i][j] != 0
                    && pivot.map_or(true, |(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(top, pi);
        for row in m.iter_mut() {
            row.swap(left, pj);
        }
        // eliminate with Euclid-style updates until the row and column clear
        loop {
            let mut done = true;
            for i in top + 1..rows {
                if m[i][left] != 0 {
                    let q = m[i][left] / m[top][left];
                    for j in left..cols {
                        let delta = q
                            .checked_mul(m[top][j])
                            .ok_or_else(|| Error::Overflow("smith".into()))?;
                        m[i][j] = m[i][j]
                            .checked_sub(delta)
                            .ok_or_else(|| Error::Overflow("smith".into()))?;
                    }
                    if m[i][left] != 0 {
                        m.swap(top, i);
                        done = false;
                    }
                }
            }
            for j in left + 1..cols {
                if m[top][j] != 0 {
                    let q = m[top][j] / m[top][left];
                    for row in m.iter_mut().take(rows).skip(top) {
                        let delta = q
                            .checked_mul(row[left])
                            .ok_or_else(|| Error::Overflow("smith".into()))?;
                        row[j] = row[j]
                            .checked_sub(delta)
                            .ok_or_else(|| Error::Overflow("smith".into()))?;
                    }
                    if m[top][j] != 0 {
                        for row in m.iter_mut() {
                            row.swap(left, j);
                        }
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        diag.push(m[top][left].abs());
        top += 1;
        left += 1;
    }
    // enforce the divisibility chain d1 | d2 | ...
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            let (a, b) = (diag[i], diag[j]);
            if a != 0 && b % a != 0 {
                let g = gcd(a, b);
                let l = a / g * b;
                diag[i] = g;
                diag[j] = l;
            }
        }
    }
    diag.sort();
    Ok(diag)
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pres(gens: &[&str], rels: &[&str]) -> Presentation {
        let gens: Vec<String> = gens.iter().map(|s| s.to_string()).collect();
        let rels = rels.iter().map(|r| Word::parse(r, &gens).unwrap()).collect();
        Presentation::new(gens, rels)
    }

    #[test]
    fn free_rank_two() {
        let inv = abelianization(&pres(&["a", "b"], &[])).unwrap();
        assert_eq!(inv, AbelianInvariants { rank: 2, torsion: vec![] });
    }

    #[test]
    fn bs12_abelianization() {
        // <x,t | t^-1 x t x^-2>: exponent matrix (-1, 0) in (x, t)
        let p = pres(&["x", "t"], &["t^-1*x*t*x^-2"]);
        assert_eq!(p.exponent_matrix(), vec![vec![-1, 0]]);
        let inv = abelianization(&p).unwrap();
        assert_eq!(inv, AbelianInvariants { rank: 1, torsion: vec![] });
    }

    #[test]
    fn infinite_dihedral() {
        let inv = abelianization(&pres(&["a", "b"], &["a^2", "b^2"])).unwrap();
        assert_eq!(inv, AbelianInvariants { rank: 0, torsion: vec![2, 2] });
    }

    #[test]
    fn coprime_torsion_merges() {
        // C3 * C5 abelianized: Z/15 in chain form
        let inv = abelianization(&pres(&["a", "b"], &["a^3", "b^5"])).unwrap();
        assert_eq!(inv, AbelianInvariants { rank: 0, torsion: vec![15] });
    }

    #[test]
    fn divisibility_chain_normalized() {
        // C4 x C6 = Z/2 + Z/12 in chain form
        let inv = abelianization(&pres(&["a", "b"], &["a^4", "b^6"])).unwrap();
        assert_eq!(inv, AbelianInvariants { rank: 0, torsion: vec![2, 12] });
    }

    #[test]
    fn tietze_invariance() {
        // base: C3 * C5
        let base = abelianization(&pres(&["a", "b"], &["a^3", "b^5"])).unwrap();
        // add a redundant generator c = a*b
        let with_gen =
            abelianization(&pres(&["a", "b", "c"], &["a^3", "b^5", "c^-1*a*b"])).unwrap();
        assert_eq!(base, with_gen);
        // add a consequence relator a^6
        let with_rel = abelianization(&pres(&["a", "b"], &["a^3", "b^5", "a^6"])).unwrap();
        assert_eq!(base, with_rel);
    }

    #[test]
    fn smith_of_known_matrix() {
        // diag(3,5) has SNF diag(1,15)
        let d = smith_diagonal(vec![vec![3, 0], vec![0, 5]]).unwrap();
        assert_eq!(d, vec![1, 15]);
        let d = smith_diagonal(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]).unwrap();
        // known SNF: 2, 2, 156
        assert_eq!(d, vec![2, 2, 156]);
    }
}
