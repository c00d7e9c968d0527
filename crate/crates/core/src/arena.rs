//! Interned group elements as a trie of syllables, so convolution powers can be dense arrays.

use rustc_hash::FxHashMap;

use crate::group::{GroupElement, Syllable, MAX_RANK};

pub type NodeId = u32;
pub const ROOT: NodeId = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Key {
    parent: NodeId,
    factor: u16,
    v: [i16; MAX_RANK],
}

/// Node `id` is the element `element(parent) · (factor, v)` in normal form.
#[derive(Clone, Debug)]
pub struct Arena {
    nodes: Vec<Key>,
    ranks: Vec<u8>,
    index: FxHashMap<Key, NodeId>,
}

impl Default for Arena {
    fn default() -> Self {
        Self::new()
    }
}

impl Arena {
    pub fn new() -> Self {
        let root = Key { parent: NodeId::MAX, factor: u16::MAX, v: [0; MAX_RANK] };
        Self { nodes: vec![root], ranks: vec![0], index: FxHashMap::default() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn intern(&mut self, key: Key, rank: usize) -> NodeId {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = NodeId::try_from(self.nodes.len()).expect("arena exceeds u32 ids");
        self.nodes.push(key);
        self.ranks.push(rank as u8);
        self.index.insert(key, id);
        id
    }

    fn pack(v: &[i32]) -> [i16; MAX_RANK] {
        let mut out = [0i16; MAX_RANK];
        for (o, &c) in out.iter_mut().zip(v) {
            *o = i16::try_from(c).expect("syllable coordinate exceeds the arena range");
        }
        out
    }

    /// Node of `element(id) · (factor, v)`.
    pub fn mul_syllable(&mut self, id: NodeId, factor: usize, v: &[i32]) -> NodeId {
        let node = self.nodes[id as usize];
        if id != ROOT && node.factor as usize == factor {
            let mut sum = node.v;
            for (s, &c) in sum.iter_mut().zip(v) {
                *s = s.checked_add(i16::try_from(c).expect("coordinate range")).expect("coordinate overflow");
            }
            if sum.iter().all(|&c| c == 0) {
                return node.parent;
            }
            return self.intern(Key { parent: node.parent, factor: node.factor, v: sum }, v.len());
        }
        self.intern(Key { parent: id, factor: factor as u16, v: Self::pack(v) }, v.len())
    }

    /// For every node `z`, the node of `w · z` if it is interned.
    pub fn left_translates(&self, w: &GroupElement) -> Vec<Option<NodeId>> {
        #[derive(Clone, Copy)]
        enum State {
            Known(NodeId),
            /// `q · (factor, v)` with the last syllable not interned
            Pending(NodeId, u16, [i16; MAX_RANK]),
            Dead,
        }
        let step = |q: NodeId, factor: u16, v: [i16; MAX_RANK]| -> State {
            let key = Key { parent: q, factor, v };
            match self.index.get(&key) {
                Some(&id) => State::Known(id),
                None => State::Pending(q, factor, v),
            }
        };
        let add = |a: [i16; MAX_RANK], b: [i16; MAX_RANK]| -> Option<[i16; MAX_RANK]> {
            let mut out = a;
            for (o, c) in out.iter_mut().zip(b) {
                *o = o.checked_add(c)?;
            }
            Some(out)
        };
        let apply = |st: State, factor: u16, v: [i16; MAX_RANK]| -> State {
            match st {
                State::Dead => State::Dead,
                State::Known(q) => {
                    let node = self.nodes[q as usize];
                    if q != ROOT && node.factor == factor {
                        match add(node.v, v) {
                            Some(sum) if sum.iter().all(|&c| c == 0) => State::Known(node.parent),
                            Some(sum) => step(node.parent, factor, sum),
                            None => State::Dead,
                        }
                    } else {
                        step(q, factor, v)
                    }
                }
                State::Pending(q, f, t) if f == factor => match add(t, v) {
                    Some(sum) if sum.iter().all(|&c| c == 0) => State::Known(q),
                    Some(sum) => step(q, f, sum),
                    None => State::Dead,
                },
                State::Pending(..) => State::Dead,
            }
        };
        let mut start = State::Known(ROOT);
        for syl in w.syllables() {
            match syl.vector.iter().map(|&c| i16::try_from(c).ok()).collect::<Option<Vec<_>>>() {
                Some(c) => {
                    let mut v = [0i16; MAX_RANK];
                    v[..c.len()].copy_from_slice(&c);
                    start = apply(start, syl.factor as u16, v);
                }
                None => start = State::Dead,
            }
        }
        let mut states = Vec::with_capacity(self.nodes.len());
        states.push(start);
        for k in &self.nodes[1..] {
            let st = apply(states[k.parent as usize], k.factor, k.v);
            states.push(st);
        }
        states.into_iter().map(|s| if let State::Known(id) = s { Some(id) } else { None }).collect()
    }

    /// Node of `g`, if it was ever interned.
    pub fn find(&self, g: &GroupElement) -> Option<NodeId> {
        let mut id = ROOT;
        for s in g.syllables() {
            let v = s.vector.iter().map(|&c| i16::try_from(c).ok()).collect::<Option<Vec<_>>>()?;
            let mut packed = [0i16; MAX_RANK];
            packed[..v.len()].copy_from_slice(&v);
            id = *self.index.get(&Key { parent: id, factor: s.factor as u16, v: packed })?;
        }
        Some(id)
    }

    pub fn element(&self, mut id: NodeId) -> GroupElement {
        let mut syl = Vec::new();
        while id != ROOT {
            let k = self.nodes[id as usize];
            let rank = self.ranks[id as usize] as usize;
            syl.push(Syllable { factor: k.factor as usize, vector: k.v[..rank].iter().map(|&c| c as i32).collect() });
            id = k.parent;
        }
        syl.reverse();
        GroupElement::from_syllables(syl)
    }

    /// Flat encoding `(parent, factor, rank, v[..MAX_RANK])` per node, root excluded.
    pub fn encode(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.nodes.len() * (3 + MAX_RANK));
        for (k, &r) in self.nodes.iter().zip(&self.ranks).skip(1) {
            out.push(k.parent as i64);
            out.push(k.factor as i64);
            out.push(r as i64);
            out.extend(k.v.iter().map(|&c| c as i64));
        }
        out
    }

    pub fn decode(flat: &[i64]) -> Option<Self> {
        let mut a = Self::new();
        for chunk in flat.chunks(3 + MAX_RANK) {
            if chunk.len() != 3 + MAX_RANK {
                return None;
            }
            let mut v = [0i16; MAX_RANK];
            for (o, &c) in v.iter_mut().zip(&chunk[3..]) {
                *o = i16::try_from(c).ok()?;
            }
            let parent = NodeId::try_from(chunk[0]).ok()?;
            if parent as usize >= a.nodes.len() {
                return None;
            }
            let key = Key { parent, factor: u16::try_from(chunk[1]).ok()?, v };
            let before = a.len();
            a.intern(key, usize::try_from(chunk[2]).ok()?);
            if a.len() == before {
                return None;
            }
        }
        Some(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_follows_normal_form() {
        let mut a = Arena::new();
        let x = a.mul_syllable(ROOT, 0, &[1]);
        let y = a.mul_syllable(x, 1, &[2]);
        let back = a.mul_syllable(y, 1, &[-2]);
        assert_eq!(back, x);
        let merged = a.mul_syllable(x, 0, &[3]);
        assert_eq!(a.element(merged), "f1:(4)".parse().unwrap());
        assert_eq!(a.find(&"f1:(1).f2:(2)".parse().unwrap()), Some(y));
        assert_eq!(a.find(&"f2:(1)".parse().unwrap()), None);
        assert_eq!(a.mul_syllable(x, 0, &[-1]), ROOT);
    }

    #[test]
    fn encode_round_trip() {
        let mut a = Arena::new();
        let x = a.mul_syllable(ROOT, 0, &[1, -2]);
        let _ = a.mul_syllable(x, 1, &[2]);
        let b = Arena::decode(&a.encode()).unwrap();
        assert_eq!(b.len(), a.len());
        for id in 0..a.len() as NodeId {
            assert_eq!(a.element(id), b.element(id));
        }
    }

    #[test]
    fn left_translates_match_lookup() {
        use crate::group::{enumerate_ball, FreeProductSpec, Metric};
        let spec = FreeProductSpec::from_ranks(&[2, 1]).unwrap();
        let mut a = Arena::new();
        for g in enumerate_ball(&spec, 3, Metric::Word, 100_000).unwrap() {
            let mut id = ROOT;
            for s in g.syllables() {
                id = a.mul_syllable(id, s.factor, &s.vector);
            }
        }
        for w in ["e", "f1:(1,0)", "f2:(-1).f1:(0,1)", "f1:(2,0).f2:(1)", "f2:(5)"] {
            let w: GroupElement = w.parse().unwrap();
            let t = a.left_translates(&w);
            for id in 0..a.len() as NodeId {
                assert_eq!(t[id as usize], a.find(&w.multiply(&a.element(id))), "{w} {}", a.element(id));
            }
        }
    }
}
