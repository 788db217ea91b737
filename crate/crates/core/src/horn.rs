//! Horn triple sets `T_r^n` and the additive / multiplicative inequality
//! systems they index.
//!
//! `(I, J, K)` with `|I| = |J| = |K| = r` belongs to `T_r^n` when
//! `sum I + sum J = sum K + r(r+1)/2` and, for every `p < r` and every
//! `(F, G, H)` in `T_p^r`,
//! `sum_{f in F} i_f + sum_{g in G} j_g <= sum_{h in H} k_h + p(p+1)/2`.
//! Indices are 1-based throughout.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Largest `n` for which triple sets are generated.
pub const MAX_N: usize = 16;
/// Relative slack applied to every inequality (absolute in the log domain).
pub const SLACK: f64 = 1e-9;
/// Values at or below this fraction of their sequence's maximum count as zero.
pub const ZERO_FRACTION: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexTriple {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub k: Vec<usize>,
}

impl IndexTriple {
    pub fn r(&self) -> usize {
        self.i.len()
    }
}

fn fmt_set(f: &mut fmt::Formatter<'_>, v: &[usize]) -> fmt::Result {
    write!(f, "{{")?;
    for (n, x) in v.iter().enumerate() {
        if n > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, "}}")
}

impl fmt::Display for IndexTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} I:", self.r())?;
        fmt_set(f, &self.i)?;
        write!(f, " J:")?;
        fmt_set(f, &self.j)?;
        write!(f, " K:")?;
        fmt_set(f, &self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTripleError(pub String);

impl fmt::Display for ParseTripleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed triple line: {}", self.0)
    }
}

impl std::error::Error for ParseTripleError {}

impl FromStr for IndexTriple {
    type Err = ParseTripleError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let bad = || ParseTripleError(s.to_string());
        let mut parts = s.split_whitespace();
        let r: usize = parts.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
        let mut set = |tag: &str| -> std::result::Result<Vec<usize>, ParseTripleError> {
            let body = parts
                .next()
                .and_then(|x| x.strip_prefix(tag))
                .and_then(|x| x.strip_prefix('{'))
                .and_then(|x| x.strip_suffix('}'))
                .ok_or_else(bad)?;
            body.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
        };
        let (i, j, k) = (set("I:")?, set("J:")?, set("K:")?);
        if parts.next().is_some() || i.len() != r || j.len() != r || k.len() != r {
            return Err(bad());
        }
        Ok(IndexTriple { i, j, k })
    }
}

/// `F(I) = (i_r - r, ..., i_1 - 1)`.
pub fn partition_of(set: &[usize]) -> Vec<usize> {
    set.iter().enumerate().rev().map(|(pos, &x)| x - (pos + 1)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSet {
    pub n: usize,
    pub r: usize,
    pub triples: Vec<IndexTriple>,
}

impl TripleSet {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, t: &IndexTriple) -> bool {
        self.triples.binary_search(t).is_ok()
    }

    /// One `r I:{..} J:{..} K:{..}` line per triple.
    pub fn to_text(&self) -> String {
        self.triples.iter().map(|t| format!("{t}\n")).collect()
    }
}

fn memo() -> &'static RwLock<HashMap<(usize, usize), Arc<TripleSet>>> {
    static MEMO: OnceLock<RwLock<HashMap<(usize, usize), Arc<TripleSet>>>> = OnceLock::new();
    MEMO.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Strictly increasing `r`-subsets of `1..=n` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        let remaining = r - cur.len();
        for x in start..=(n + 1 - remaining) {
            cur.push(x);
            rec(x + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, r, &mut Vec::with_capacity(r), &mut out);
    out
}

fn check_bounds(n: usize, r: usize) -> Result<()> {
    if n > MAX_N {
        return Err(Error::TripleCapExceeded { n, cap: MAX_N });
    }
    if r == 0 || r >= n {
        return Err(Error::BadCardinality { n, r });
    }
    Ok(())
}

/// Whether `(I, J, K)` satisfies the sum condition and every inequality
/// inherited from `T_p^r`, `p < r`.
pub fn is_admissible(t: &IndexTriple, n: usize) -> Result<bool> {
    let r = t.r();
    check_bounds(n, r)?;
    let valid = |v: &[usize]| v.len() == r && v.windows(2).all(|w| w[0] < w[1]) && v[0] >= 1 && v[r - 1] <= n;
    if !valid(&t.i) || !valid(&t.j) || !valid(&t.k) {
        return Ok(false);
    }
    let lhs: usize = t.i.iter().sum::<usize>() + t.j.iter().sum::<usize>();
    if lhs != t.k.iter().sum::<usize>() + r * (r + 1) / 2 {
        return Ok(false);
    }
    inherited_hold(&t.i, &t.j, &t.k)
}

fn inherited_hold(i: &[usize], j: &[usize], k: &[usize]) -> Result<bool> {
    let r = i.len();
    for p in 1..r {
        let lower = triple_set(r, p)?;
        for ft in &lower.triples {
            let a: usize = ft.i.iter().map(|&f| i[f - 1]).sum::<usize>() + ft.j.iter().map(|&g| j[g - 1]).sum::<usize>();
            let b: usize = ft.k.iter().map(|&h| k[h - 1]).sum::<usize>() + p * (p + 1) / 2;
            if a > b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn enumerate(n: usize, r: usize) -> Result<TripleSet> {
    let subs = subsets(n, r);
    let base = r * (r + 1) / 2;
    let mut triples = Vec::new();
    for i in &subs {
        let si: usize = i.iter().sum();
        for j in &subs {
            let sj: usize = j.iter().sum();
            if si + sj < base {
                continue;
            }
            let target = si + sj - base;
            // Weyl-type bounds k_h >= i_f + j_g - 1 for f + g = h + 1
            let lb: Vec<usize> = (0..r)
                .map(|h| (0..=h).map(|f| i[f] + j[h - f] - 1).max().unwrap_or(1))
                .collect();
            let mut k = Vec::with_capacity(r);
            search_k(n, &lb, target, 1, &mut k, &mut |k| {
                if inherited_hold(i, j, k)? {
                    triples.push(IndexTriple { i: i.clone(), j: j.clone(), k: k.to_vec() });
                }
                Ok(())
            })?;
        }
    }
    Ok(TripleSet { n, r, triples })
}

fn search_k(
    n: usize,
    lb: &[usize],
    remaining: usize,
    start: usize,
    k: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let h = k.len();
    let r = lb.len();
    if h == r {
        if remaining == 0 {
            visit(k)?;
        }
        return Ok(());
    }
    let left = r - h;
    let from = start.max(lb[h]);
    for x in from..=n {
        if x + left - 1 > n {
            break;
        }
        // smallest completion x, x+1, ..., x+left-1
        let min_sum = left * x + left * (left - 1) / 2;
        if min_sum > remaining {
            break;
        }
        // largest completion ends at n
        let max_sum = left * n - left * (left - 1) / 2;
        if max_sum < remaining {
            return Ok(());
        }
        k.push(x);
        search_k(n, lb, remaining - x, x + 1, k, visit)?;
        k.pop();
    }
    Ok(())
}

/// `T_r^n`, memoized.
pub fn triple_set(n: usize, r: usize) -> Result<Arc<TripleSet>> {
    check_bounds(n, r)?;
    if let Some(t) = memo().read().expect("triple memo poisoned").get(&(n, r)) {
        return Ok(t.clone());
    }
    let computed = Arc::new(enumerate(n, r)?);
    let mut guard = memo().write().expect("triple memo poisoned");
    Ok(guard.entry((n, r)).or_insert(computed).clone())
}

/// `T_r^n` for `r = 1..n-1`.
pub fn all_triples(n: usize) -> Result<Vec<Arc<TripleSet>>> {
    if n < 2 {
        return Err(Error::BadCardinality { n, r: 1 });
    }
    (1..n).map(|r| triple_set(n, r)).collect()
}

/// Outcome of evaluating one inequality family.
#[derive(Debug, Clone, PartialEq)]
pub struct HornReport {
    /// No inequality violated beyond the slack.
    pub feasible: bool,
    /// Smallest `rhs - lhs` over all inequalities with a finite value;
    /// `-inf` when a positive left side meets a zero right side.
    pub worst_margin: f64,
    pub violated: Vec<IndexTriple>,
    pub inequalities: usize,
    pub determinant: DeterminantCheck,
}

/// The `r = L` relation: equality of full products (sums in the additive
/// case) when every value is positive, only the upper bound otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantCheck {
    pub all_positive: bool,
    /// `log prod(alpha beta) - log prod(tau)`, or `rhs - lhs` additively.
    pub gap: f64,
    pub holds: bool,
}

fn validate(tau: &[f64], alpha: &[f64], beta: &[f64], nonneg: bool) -> Result<()> {
    if tau.len() != alpha.len() || tau.len() != beta.len() || tau.is_empty() {
        return Err(Error::LengthMismatch);
    }
    for s in [tau, alpha, beta] {
        if s.iter().any(|x| !x.is_finite() || (nonneg && *x < 0.0)) {
            return Err(Error::NotSorted);
        }
        let scale = s.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if s.windows(2).any(|w| w[1] > w[0] + 1e-12 * scale.max(1.0)) {
            return Err(Error::NotSorted);
        }
    }
    Ok(())
}

fn logs(s: &[f64]) -> Vec<f64> {
    let max = s.iter().cloned().fold(0.0f64, f64::max);
    s.iter()
        .map(|&x| if x <= ZERO_FRACTION * max || x == 0.0 { f64::NEG_INFINITY } else { x.ln() })
        .collect()
}

fn sum_at(v: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&x| v[x - 1]).sum()
}

/// `sum_K c <= sum_I a + sum_J b` over every triple of `T_r^L`, `r < L`.
/// `-inf` entries follow the convention `-inf <= anything`.
fn evaluate(c: &[f64], a: &[f64], b: &[f64], slack: f64) -> Result<HornReport> {
    let l = c.len();
    let mut worst = f64::INFINITY;
    let mut violated = Vec::new();
    let mut count = 0;
    if l >= 2 {
        for set in all_triples(l)? {
            for t in &set.triples {
                count += 1;
                let lhs = sum_at(c, &t.k);
                let rhs = sum_at(a, &t.i) + sum_at(b, &t.j);
                let margin = if lhs == f64::NEG_INFINITY {
                    continue;
                } else {
                    rhs - lhs
                };
                worst = worst.min(margin);
                if margin < -slack {
                    violated.push(t.clone());
                }
            }
        }
    }
    let lhs: f64 = c.iter().sum();
    let rhs: f64 = a.iter().sum::<f64>() + b.iter().sum::<f64>();
    let all_positive = lhs.is_finite() && rhs.is_finite();
    let determinant = if all_positive {
        let gap = rhs - lhs;
        DeterminantCheck { all_positive, gap, holds: gap.abs() <= slack }
    } else if lhs == f64::NEG_INFINITY {
        DeterminantCheck { all_positive, gap: f64::INFINITY, holds: true }
    } else {
        DeterminantCheck { all_positive, gap: f64::NEG_INFINITY, holds: false }
    };
    Ok(HornReport { feasible: violated.is_empty(), worst_margin: worst, violated, inequalities: count, determinant })
}

/// `prod_K tau <= prod_I alpha prod_J beta` for all `(I, J, K)` in `T_r^L`,
/// `r < L`, evaluated in the log domain.
pub fn check_product_inequalities(tau: &[f64], alpha: &[f64], beta: &[f64]) -> Result<HornReport> {
    check_product_inequalities_with(tau, alpha, beta, SLACK)
}

pub fn check_product_inequalities_with(tau: &[f64], alpha: &[f64], beta: &[f64], slack: f64) -> Result<HornReport> {
    validate(tau, alpha, beta, true)?;
    evaluate(&logs(tau), &logs(alpha), &logs(beta), slack)
}

/// `sum_K gamma <= sum_I alpha + sum_J beta` for eigenvalues of `A`, `B`,
/// `A + B`; the determinant field carries the trace identity.
pub fn check_additive_inequalities(gamma: &[f64], alpha: &[f64], beta: &[f64]) -> Result<HornReport> {
    check_additive_inequalities_with(gamma, alpha, beta, SLACK)
}

pub fn check_additive_inequalities_with(gamma: &[f64], alpha: &[f64], beta: &[f64], slack: f64) -> Result<HornReport> {
    validate(gamma, alpha, beta, false)?;
    evaluate(gamma, alpha, beta, slack)
}

/// Whether some orthogonal `Q` can give `D_alpha Q D_beta` the singular
/// values `tau`.
pub fn theorem2_feasible(tau: &[f64], alpha: &[f64], beta: &[f64]) -> Result<bool> {
    let report = check_product_inequalities(tau, alpha, beta)?;
    Ok(report.feasible && report.determinant.holds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: &[usize], j: &[usize], k: &[usize]) -> IndexTriple {
        IndexTriple { i: i.to_vec(), j: j.to_vec(), k: k.to_vec() }
    }

    /// Direct transcription of the definition over all subset triples.
    fn brute(n: usize, r: usize) -> Vec<IndexTriple> {
        let subs = subsets(n, r);
        let mut out = Vec::new();
        for i in &subs {
            for j in &subs {
                for k in &subs {
                    let cand = t(i, j, k);
                    if is_admissible(&cand, n).unwrap() {
                        out.push(cand);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn partitions() {
        assert_eq!(partition_of(&[1, 2, 3]), vec![0, 0, 0]);
        assert_eq!(partition_of(&[2, 4]), vec![2, 1]);
        assert_eq!(partition_of(&[3]), vec![2]);
    }

    #[test]
    fn t_1_2() {
        let s = triple_set(2, 1).unwrap();
        assert_eq!(s.triples, vec![t(&[1], &[1], &[1]), t(&[1], &[2], &[2]), t(&[2], &[1], &[2])]);
    }

    #[test]
    fn t_1_3() {
        let s = triple_set(3, 1).unwrap();
        assert_eq!(s.len(), 6);
        assert!(s.contains(&t(&[2], &[2], &[3])));
        for x in &s.triples {
            assert_eq!(x.i[0] + x.j[0], x.k[0] + 1);
        }
    }

    #[test]
    fn cardinalities() {
        let expect: [(usize, &[usize]); 5] =
            [(2, &[3]), (3, &[6, 6]), (4, &[10, 21, 10]), (5, &[15, 56, 56, 15]), (6, &[21, 126, 228, 126, 21])];
        for (n, counts) in expect {
            let got: Vec<usize> = all_triples(n).unwrap().iter().map(|s| s.len()).collect();
            assert_eq!(got, counts, "n={n}");
        }
    }

    #[test]
    fn pruned_enumeration_matches_definition() {
        for n in 2..=5 {
            for r in 1..n {
                assert_eq!(triple_set(n, r).unwrap().triples, brute(n, r), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn bad_arguments() {
        assert_eq!(triple_set(3, 3).unwrap_err(), Error::BadCardinality { n: 3, r: 3 });
        assert_eq!(triple_set(3, 0).unwrap_err(), Error::BadCardinality { n: 3, r: 0 });
        assert_eq!(triple_set(17, 1).unwrap_err(), Error::TripleCapExceeded { n: 17, cap: 16 });
    }

    #[test]
    fn text_round_trip() {
        for s in all_triples(4).unwrap() {
            for x in &s.triples {
                assert_eq!(x.to_string().parse::<IndexTriple>().unwrap(), *x);
            }
        }
        assert_eq!(t(&[1, 3], &[2, 3], &[3, 4]).to_string(), "2 I:{1,3} J:{2,3} K:{3,4}");
        assert!("2 I:{1} J:{1} K:{1}".parse::<IndexTriple>().is_err());
        assert_eq!(triple_set(2, 1).unwrap().to_text().lines().count(), 3);
    }

    #[test]
    fn product_examples() {
        let r = check_product_inequalities(&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(r.feasible && r.worst_margin == 0.0 && r.determinant.holds);
        let r = check_product_inequalities(&[1.0; 3], &[1.0; 3], &[1.0; 3]).unwrap();
        assert!(r.feasible);
        assert!(theorem2_feasible(&[1.0, 0.0], &[1.0, 1.0], &[1.0, 0.0]).unwrap());
        assert!(!theorem2_feasible(&[2.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]).unwrap());
        let r = check_product_inequalities(&[2.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(r.violated.contains(&t(&[1], &[1], &[1])));
        let third = 1.0 / 3.0;
        let a = 1.0 / 3f64.sqrt();
        assert!(theorem2_feasible(&[third; 3], &[a; 3], &[a; 3]).unwrap());
    }

    #[test]
    fn zero_conventions() {
        // positive tau against a zero alpha is an infinite violation
        let r = check_product_inequalities(&[1.0, 0.5], &[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.worst_margin, f64::NEG_INFINITY);
        assert!(!r.determinant.all_positive && !r.determinant.holds);
        let r = check_product_inequalities(&[1.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(r.feasible && r.determinant.holds);
    }

    #[test]
    fn input_validation() {
        assert_eq!(check_product_inequalities(&[1.0], &[1.0, 0.5], &[1.0]).unwrap_err(), Error::LengthMismatch);
        assert_eq!(check_product_inequalities(&[0.5, 1.0], &[1.0, 1.0], &[1.0, 1.0]).unwrap_err(), Error::NotSorted);
        assert_eq!(check_product_inequalities(&[1.0, -0.5], &[1.0, 1.0], &[1.0, 1.0]).unwrap_err(), Error::NotSorted);
    }

    #[test]
    fn dropping_an_inequality_never_breaks_feasibility() {
        // feasibility is a conjunction: any subset of a feasible report's
        // inequalities is still satisfied
        let tau = [0.9, 0.4, 0.1];
        let a = [1.0, 0.6, 0.3];
        let b = [1.0, 0.7, 0.4];
        let r = check_product_inequalities(&tau, &a, &b).unwrap();
        let la: Vec<f64> = a.iter().map(|x: &f64| x.ln()).collect();
        let lb: Vec<f64> = b.iter().map(|x: &f64| x.ln()).collect();
        let lt: Vec<f64> = tau.iter().map(|x: &f64| x.ln()).collect();
        let mut violations = 0;
        for set in all_triples(3).unwrap() {
            for (skip, _) in set.triples.iter().enumerate() {
                for (idx, x) in set.triples.iter().enumerate() {
                    if idx != skip && sum_at(&lt, &x.k) > sum_at(&la, &x.i) + sum_at(&lb, &x.j) + SLACK {
                        violations += 1;
                    }
                }
            }
        }
        assert_eq!(r.feasible, violations == 0);
    }
}
