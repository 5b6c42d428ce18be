use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{IdealFamily, PrincipalWitness};
use crate::forest::{PrimeId, SpectralForest};
use crate::ordgroups::{Cut, ValueVector};

/// Seeded generator of elements and modules over one forest.
///
/// Cuts are drawn top-down along each tree: a node either keeps its parent's
/// cut or, when that cut is closed at the parent's full level, refines it
/// with a fresh component. Compatibility then holds by construction.
pub struct IdealSampler {
    forest: Arc<SpectralForest>,
    rng: ChaCha8Rng,
    bound: i64,
    structured: Vec<IdealFamily>,
    drawn: usize,
}

impl IdealSampler {
    pub fn new(forest: Arc<SpectralForest>, seed: u64) -> Self {
        let structured = structured_ideals(&forest);
        IdealSampler { forest, rng: ChaCha8Rng::seed_from_u64(seed), bound: 3, structured, drawn: 0 }
    }

    pub fn with_bound(mut self, bound: i64) -> Self {
        self.bound = bound;
        self
    }

    pub fn forest(&self) -> &Arc<SpectralForest> {
        &self.forest
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn witness(&mut self) -> PrincipalWitness {
        let values = self.forest.primes().map(|p| self.forest.group(p).sample(&mut self.rng, self.bound)).collect();
        PrincipalWitness::new(self.forest.clone(), values).expect("sampled inside each group")
    }

    /// A random fractional ideal.
    pub fn random(&mut self) -> IdealFamily {
        let f = self.forest.clone();
        let mut cuts = vec![Cut::Full; f.leaves().len()];
        for &r in f.roots() {
            let g = f.group(r).clone();
            let x = g.sample(&mut self.rng, self.bound);
            let closed = !g.is_dense() || self.rng.gen_bool(0.5);
            let c = Cut::Bounded { pivot: ValueVector(vec![x]), closed }.canonical(f.value_group(r));
            self.descend(r, c, &mut cuts);
        }
        IdealFamily::assemble(&f, cuts).expect("top-down sampling is compatible")
    }

    fn descend(&mut self, p: PrimeId, cut: Cut, out: &mut [Cut]) {
        let f = self.forest.clone();
        if let Some(i) = f.leaf_index(p) {
            out[i] = cut;
            return;
        }
        for &c in &f.node(p).children {
            let refinable = cut.is_closed() && cut.level() == Some(f.depth(p));
            let next = if refinable && self.rng.gen_bool(2.0 / 3.0) {
                let g = f.group(c).clone();
                let mut pivot = cut.pivot().expect("bounded").clone();
                pivot.0.push(g.sample(&mut self.rng, self.bound));
                let closed = !g.is_dense() || self.rng.gen_bool(0.5);
                Cut::Bounded { pivot, closed }.canonical(f.value_group(c))
            } else {
                cut.clone()
            };
            self.descend(c, next, out);
        }
    }

    /// A random module; each tree is all of K with probability 1/8.
    pub fn module(&mut self) -> IdealFamily {
        let base = self.random();
        let f = self.forest.clone();
        let mut cuts = base.cuts().to_vec();
        for &r in f.roots() {
            if self.rng.gen_bool(0.125) {
                for l in f.leaves_above(r) {
                    cuts[f.leaf_index(l).expect("leaf")] = Cut::Full;
                }
            }
        }
        IdealFamily::assemble(&f, cuts).expect("whole trees replaced")
    }

    /// A random ideal contained in R.
    pub fn integral(&mut self) -> IdealFamily {
        let i = self.random();
        let d = i.is_fractional().expect("sampled ideals are fractional");
        let extra = self.witness();
        let extra = PrincipalWitness::new(
            self.forest.clone(),
            self.forest.primes().map(|p| extra.node_value(p).abs()).collect(),
        )
        .expect("absolute values stay in the group");
        i.scale(&d).scale(&extra)
    }

    /// Mixes random ideals with rescaled structured ones (primes, localizations,
    /// branch-cut modules), which are where most closure phenomena live.
    pub fn ideal(&mut self) -> IdealFamily {
        self.drawn += 1;
        if !self.structured.is_empty() && self.drawn.is_multiple_of(3) {
            let k = self.rng.gen_range(0..self.structured.len());
            let base = self.structured[k].clone();
            return if self.rng.gen_bool(0.5) { base.scale(&self.witness()) } else { base };
        }
        self.random()
    }

    pub fn ideals(&mut self, n: usize) -> Vec<IdealFamily> {
        (0..n).map(|_| self.ideal()).collect()
    }
}

/// R, every prime, every localization at a non-maximal prime (glued with R on
/// other trees), and for each branching prime Q and child c the module equal
/// to R above c and to R_Q on the other maximal ideals above Q.
pub fn structured_ideals(forest: &Arc<SpectralForest>) -> Vec<IdealFamily> {
    let f = forest;
    let mut out = vec![IdealFamily::unit(f)];
    for p in f.primes() {
        out.push(IdealFamily::prime(f, p));
        if !f.is_leaf(p) {
            // R_P on p's tree, R elsewhere, so the module stays fractional
            let cuts = f
                .leaves()
                .iter()
                .map(|&l| match f.meet(p, l) {
                    Some(m) => Cut::unit(f.depth(m)),
                    None => Cut::unit(f.depth(l)),
                })
                .collect();
            out.push(IdealFamily::assemble(f, cuts).expect("compatible at p"));
        }
    }
    for q in f.primes() {
        let children = &f.node(q).children;
        if children.len() < 2 {
            continue;
        }
        for &c in children {
            let cuts = f
                .leaves()
                .iter()
                .map(|&l| {
                    if f.is_below(q, l) && !f.is_below(c, l) {
                        Cut::unit(f.depth(q))
                    } else {
                        Cut::unit(f.depth(l))
                    }
                })
                .collect();
            out.push(IdealFamily::assemble(f, cuts).expect("compatible at q"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_compatible_and_replayable() {
        let f = Arc::new(SpectralForest::build(&[
            ("P", None, "Z"),
            ("Q", Some("P"), "Q"),
            ("M1", Some("Q"), "Z[1/3]"),
            ("M2", Some("Q"), "Z"),
            ("M3", Some("P"), "Z+Z*sqrt(2)"),
            ("N", None, "Q"),
        ]));
        let a: Vec<IdealFamily> = IdealSampler::new(f.clone(), 7).ideals(60);
        let b: Vec<IdealFamily> = IdealSampler::new(f.clone(), 7).ideals(60);
        assert_eq!(a, b);
        for i in &a {
            assert!(i.is_fractional().is_some());
            assert_eq!(IdealFamily::new(f.clone(), i.cuts().to_vec()).unwrap(), *i);
        }
        let mut s = IdealSampler::new(f, 1);
        for _ in 0..30 {
            assert!(s.integral().is_integral());
            assert!(s.module().forest().len() == 6);
        }
    }
}
