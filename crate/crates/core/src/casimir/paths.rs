//! Periodic paths on the directed-bond graph of `S`.
//!
//! A periodic path of period `n` is a sequence of directed bonds
//! `(a_1, ..., a_n)` with every transition `a_j -> a_{j+1}` and the closing
//! transition `a_n -> a_1` allowed by `S`. Rotations count as distinct
//! sequences. Its amplitude is `S[a_1,a_n] S[a_n,a_{n-1}] ... S[a_2,a_1]`.
//!
//! Besides a plain depth-first enumerator there is a walk over length
//! classes: paths that use each distinct bond length the same number of
//! times have the same metric length, so their amplitudes can be summed
//! step by step without listing the paths. The work then grows
//! polynomially in `n` rather than exponentially.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::scattering::BondScatteringMatrix;
use crate::spectrum::directed_lengths;
use crate::sum::Neumaier;
use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

/// Amplitudes below this are treated as forbidden transitions.
pub const ZERO_AMPLITUDE: f64 = 1e-14;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPath {
    pub bonds: Vec<usize>,
    pub amplitude: C64,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct PathEnumeration {
    pub n: usize,
    pub count: u64,
    /// `sum_p A_p / (l_p n)`
    pub sigma: C64,
    pub paths: Vec<PeriodicPath>,
}

pub(crate) fn successors(s: &CMatrix) -> Vec<Vec<(usize, C64)>> {
    let n = s.nrows();
    (0..n)
        .map(|from| {
            (0..n)
                .filter_map(|to| {
                    let a = s[(to, from)];
                    (a.norm() > ZERO_AMPLITUDE).then_some((to, a))
                })
                .collect()
        })
        .collect()
}

/// Depth-first walk over every periodic path of period `n`, calling
/// `visit(bonds, amplitude, length)` on each. Fails once more than
/// `budget` partial paths have been expanded.
pub fn visit_periodic_paths<F>(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    n: usize,
    budget: u64,
    mut visit: F,
) -> Result<u64>
where
    F: FnMut(&[usize], C64, f64),
{
    if n == 0 {
        return Err(Error::arg("period must be at least 1"));
    }
    let dl = directed_lengths(s, lengths)?;
    let succ = successors(s.matrix());
    let mut path = Vec::with_capacity(n);
    let mut work = 0u64;
    let mut found = 0u64;
    for start in 0..s.dim() {
        path.clear();
        path.push(start);
        dfs(
            s.matrix(),
            &succ,
            &dl,
            n,
            &mut path,
            C64::new(1.0, 0.0),
            dl[start],
            &mut work,
            budget,
            &mut found,
            &mut visit,
        )?;
    }
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn dfs<F: FnMut(&[usize], C64, f64)>(
    s: &CMatrix,
    succ: &[Vec<(usize, C64)>],
    dl: &[f64],
    n: usize,
    path: &mut Vec<usize>,
    amp: C64,
    len: f64,
    work: &mut u64,
    budget: u64,
    found: &mut u64,
    visit: &mut F,
) -> Result<()> {
    *work += 1;
    if *work > budget {
        return Err(Error::BudgetExceeded { n, work: *work });
    }
    let last = *path.last().unwrap();
    if path.len() == n {
        let close = s[(path[0], last)];
        if close.norm() > ZERO_AMPLITUDE {
            *found += 1;
            visit(path, amp * close, len);
        }
        return Ok(());
    }
    for &(next, a) in &succ[last] {
        path.push(next);
        dfs(
            s,
            succ,
            dl,
            n,
            path,
            amp * a,
            len + dl[next],
            work,
            budget,
            found,
            visit,
        )?;
        path.pop();
    }
    Ok(())
}

/// Enumerate and keep every periodic path of period `n`.
pub fn enumerate_periodic_paths(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    n: usize,
    budget: u64,
) -> Result<PathEnumeration> {
    let mut paths = Vec::new();
    let mut sigma = crate::sum::ComplexNeumaier::new();
    let count = visit_periodic_paths(s, lengths, n, budget, |bonds, amplitude, length| {
        sigma.add(amplitude / (length * n as f64));
        paths.push(PeriodicPath {
            bonds: bonds.to_vec(),
            amplitude,
            length,
        });
    })?;
    Ok(PathEnumeration {
        n,
        count,
        sigma: sigma.value(),
        paths,
    })
}

/// FxHash: fast and, unlike the std default, identical from run to run,
/// so summation order and hence results are reproducible.
#[derive(Default, Clone, Copy)]
pub(crate) struct FxHasher(u64);

impl Hasher for FxHasher {
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.add(b as u64);
        }
    }
    fn write_u32(&mut self, x: u32) {
        self.add(x as u64);
    }
    fn write_u64(&mut self, x: u64) {
        self.add(x);
    }
    fn write_u128(&mut self, x: u128) {
        self.add(x as u64);
        self.add((x >> 64) as u64);
    }
    fn write_usize(&mut self, x: usize) {
        self.add(x as u64);
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

impl FxHasher {
    fn add(&mut self, x: u64) {
        self.0 = (self.0.rotate_left(5) ^ x).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    }
}

type FxMap<K, V> = HashMap<K, V, BuildHasherDefault<FxHasher>>;

/// Amplitude summed over all paths sharing a metric length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthClass {
    /// The bond the walk was tagged with (its start, or the bounce bond).
    pub tag: usize,
    pub length: f64,
    pub amplitude: C64,
}

/// Transfer walk over `(key, tag, current bond)` where `key` counts how
/// often each distinct length has been used.
pub(crate) struct ClassWalk<'a> {
    s: &'a CMatrix,
    succ: Vec<Vec<(usize, C64)>>,
    weight: Vec<u128>,
    radix: u128,
    atom_len: Vec<f64>,
    states: FxMap<(u128, u32, u32), C64>,
    pub work: u64,
    budget: u64,
}

impl<'a> ClassWalk<'a> {
    /// `max_uses` bounds how many times any one length can be used.
    pub fn new(
        s: &'a BondScatteringMatrix,
        lengths: &[f64],
        max_uses: usize,
        budget: u64,
    ) -> Result<Self> {
        let dl = directed_lengths(s, lengths)?;
        let mut atom_len: Vec<f64> = Vec::new();
        let mut atom_of = Vec::with_capacity(dl.len());
        for &l in &dl {
            let found = atom_len.iter().position(|&a| (a - l).abs() <= 1e-14 * l);
            let idx = found.unwrap_or_else(|| {
                atom_len.push(l);
                atom_len.len() - 1
            });
            atom_of.push(idx);
        }
        let radix = max_uses as u128 + 1;
        let bits = (atom_len.len() as f64) * (radix as f64).log2();
        if bits > 126.0 {
            return Err(Error::arg(format!(
                "{} distinct lengths up to {} uses do not fit the class key; \
                 lower n_max or use path enumeration",
                atom_len.len(),
                max_uses
            )));
        }
        let weight = atom_of.iter().map(|&a| radix.pow(a as u32)).collect();
        Ok(ClassWalk {
            s: s.matrix(),
            succ: successors(s.matrix()),
            weight,
            radix,
            atom_len,
            states: FxMap::default(),
            work: 0,
            budget,
        })
    }

    /// Start one walk on every directed bond, tagged by that bond.
    pub fn start_periodic(&mut self) {
        self.states.clear();
        for a in 0..self.s.nrows() {
            self.states
                .insert((self.weight[a], a as u32, a as u32), C64::new(1.0, 0.0));
        }
    }

    /// Start on the reversal of every bond `a`, tagged by `a`, with the
    /// reversed bond's length not counted.
    pub fn start_bounce(&mut self) {
        self.states.clear();
        let nb = self.s.nrows() / 2;
        for a in 0..self.s.nrows() {
            let rev = if a < nb { a + nb } else { a - nb };
            self.states
                .insert((0, a as u32, rev as u32), C64::new(1.0, 0.0));
        }
    }

    pub fn step(&mut self, period: usize) -> Result<()> {
        let mut next: FxMap<(u128, u32, u32), C64> = FxMap::default();
        next.reserve(self.states.len() * 2);
        for (&(key, tag, cur), &amp) in &self.states {
            for &(to, a) in &self.succ[cur as usize] {
                *next
                    .entry((key + self.weight[to], tag, to as u32))
                    .or_insert(C64::new(0.0, 0.0)) += amp * a;
            }
            self.work += self.succ[cur as usize].len() as u64;
        }
        if self.work > self.budget {
            return Err(Error::BudgetExceeded {
                n: period,
                work: self.work,
            });
        }
        self.states = next;
        Ok(())
    }

    fn key_length(&self, mut key: u128) -> f64 {
        let mut acc = Neumaier::new();
        for &l in &self.atom_len {
            acc.add((key % self.radix) as f64 * l);
            key /= self.radix;
        }
        acc.value()
    }

    /// Close every walk back onto its tag bond. With `by_tag` false the
    /// tags are summed over. Classes come out sorted by key and tag.
    pub fn close(&self, by_tag: bool) -> Vec<LengthClass> {
        let mut acc: FxMap<(u128, u32), C64> = FxMap::default();
        for (&(key, tag, cur), &amp) in &self.states {
            let a = self.s[(tag as usize, cur as usize)];
            if a.norm() > ZERO_AMPLITUDE {
                let t = if by_tag { tag } else { 0 };
                *acc.entry((key, t)).or_insert(C64::new(0.0, 0.0)) += amp * a;
            }
        }
        let mut keys: Vec<_> = acc.into_iter().collect();
        keys.sort_by_key(|x| x.0);
        keys.into_iter()
            .map(|((key, tag), amplitude)| LengthClass {
                tag: tag as usize,
                length: self.key_length(key),
                amplitude,
            })
            .collect()
    }
}

/// Length classes of periodic paths for every period `1..=n_max`, handed
/// to `on_period(n, classes)`. Returns the last completed period, which is
/// below `n_max` only when the work budget ran out first.
pub fn periodic_length_classes<F>(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    n_max: usize,
    budget: u64,
    mut on_period: F,
) -> Result<usize>
where
    F: FnMut(usize, &[LengthClass]),
{
    let mut walk = ClassWalk::new(s, lengths, n_max, budget)?;
    walk.start_periodic();
    for n in 1..=n_max {
        if n > 1 {
            match walk.step(n) {
                Ok(()) => {}
                Err(Error::BudgetExceeded { .. }) => return Ok(n - 1),
                Err(e) => return Err(e),
            }
        }
        on_period(n, &walk.close(false));
    }
    Ok(n_max)
}

/// `sigma_n = sum_p A_p / (l_p n)` from the length classes.
pub fn sigma_from_classes(n: usize, classes: &[LengthClass]) -> C64 {
    let mut acc = crate::sum::ComplexNeumaier::new();
    for c in classes {
        acc.add(c.amplitude / (c.length * n as f64));
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_star;
    use crate::scattering::bond_scattering_matrix;

    #[test]
    fn interval_paths_alternate() {
        let g = make_star(1, &[1.0]).unwrap();
        let s = bond_scattering_matrix(&g).unwrap();
        let e = enumerate_periodic_paths(&s, &g.lengths(), 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(e.count, 2);
        assert!((e.sigma.re - 1.0 / 8.0).abs() < 1e-15);
        let odd = enumerate_periodic_paths(&s, &g.lengths(), 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(odd.count, 0);
    }

    #[test]
    fn budget_is_enforced() {
        let g = make_star(4, &[1.0, 1.1, 1.2, 1.3]).unwrap();
        let s = bond_scattering_matrix(&g).unwrap();
        let r = enumerate_periodic_paths(&s, &g.lengths(), 12, 1000);
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn classes_match_enumeration() {
        let lengths = [1.0, 2f64.sqrt(), 1.0];
        let g = make_star(3, &lengths).unwrap();
        let s = bond_scattering_matrix(&g).unwrap();
        let mut from_classes = Vec::new();
        periodic_length_classes(&s, &lengths, 7, DEFAULT_BUDGET, |n, cl| {
            from_classes.push(sigma_from_classes(n, cl));
        })
        .unwrap();
        for n in 1..=7 {
            let e = enumerate_periodic_paths(&s, &lengths, n, DEFAULT_BUDGET).unwrap();
            assert!((e.sigma - from_classes[n - 1]).norm() < 1e-14, "n={n}");
        }
    }
}
