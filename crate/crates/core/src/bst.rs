//! Red-black tree searched by noisy comparisons.
//!
//! Every node carries links to its lower and upper ancestor bounds: `lo` is
//! the lowest ancestor whose right subtree holds the node, `hi` the lowest
//! ancestor whose left subtree holds it, `None` standing for -inf / +inf.
//! A node lies on the search path of `q` exactly when `lo.key < q < hi.key`,
//! which lets the walk oracle test membership with two comparisons.
//!
//! Nodes live in an arena and are addressed by [`NodeId`] handles, so deletion
//! and neighbor stepping never need comparisons.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::noise::{NoisyContext, RepetitionPlan};
use crate::params::Params;
use crate::walk::{run_walk_with_retries, SearchDag, Transition, TransitionOracle, WalkOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Exact three-way order of a query against a stored key. Noise is applied
/// by the tree, never by the implementor.
pub trait KeyOrder<Q: ?Sized, K> {
    fn order(&self, q: &Q, key: &K) -> Result<Ordering>;
}

impl<Q: ?Sized, K, F> KeyOrder<Q, K> for F
where
    F: Fn(&Q, &K) -> Result<Ordering>,
{
    fn order(&self, q: &Q, key: &K) -> Result<Ordering> {
        self(q, key)
    }
}

/// Natural order of `Ord` keys.
pub fn natural<T: Ord>(a: &T, b: &T) -> Result<Ordering> {
    Ok(a.cmp(b))
}

#[derive(Debug, Clone)]
struct Node<K> {
    key: K,
    left: Option<NodeId>,
    right: Option<NodeId>,
    parent: Option<NodeId>,
    red: bool,
    lo: Option<NodeId>,
    hi: Option<NodeId>,
    live: bool,
}

/// Outcome of a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Located {
    Found(NodeId),
    /// The empty child slot where the query would be inserted; `parent` is
    /// `None` only for an empty tree.
    Vacant { parent: Option<NodeId>, side: Side },
}

/// Vertices of the search tree as seen by the walk: a virtual root above the
/// real one (so the start is never the target), real nodes, and empty slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Top,
    Node(NodeId),
    Slot(Option<NodeId>, Side),
}

#[derive(Debug, Clone)]
pub struct OrderedTree<K> {
    nodes: Vec<Node<K>>,
    free: Vec<u32>,
    root: Option<NodeId>,
    min: Option<NodeId>,
    len: usize,
    scale: usize,
}

impl<K> Default for OrderedTree<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K> OrderedTree<K> {
    pub fn new() -> Self {
        Self::with_scale(0)
    }

    /// A tree whose searches succeed with high probability in `scale`, the
    /// size of the enclosing problem, rather than only in the tree size.
    pub fn with_scale(scale: usize) -> Self {
        OrderedTree { nodes: Vec::new(), free: Vec::new(), root: None, min: None, len: 0, scale }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    fn n(&self, id: NodeId) -> &Node<K> {
        &self.nodes[id.index()]
    }

    fn nm(&mut self, id: NodeId) -> &mut Node<K> {
        &mut self.nodes[id.index()]
    }

    pub fn contains_handle(&self, id: NodeId) -> bool {
        self.nodes.get(id.index()).is_some_and(|n| n.live)
    }

    fn check(&self, id: NodeId) -> Result<()> {
        if self.contains_handle(id) {
            Ok(())
        } else {
            Err(Error::InvalidHandle(id.index()))
        }
    }

    pub fn key(&self, id: NodeId) -> &K {
        &self.n(id).key
    }

    pub fn get(&self, id: NodeId) -> Result<&K> {
        self.check(id)?;
        Ok(&self.n(id).key)
    }

    pub fn child(&self, id: NodeId, side: Side) -> Option<NodeId> {
        match side {
            Side::Left => self.n(id).left,
            Side::Right => self.n(id).right,
        }
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.n(id).parent
    }

    pub fn bounds(&self, id: NodeId) -> (Option<NodeId>, Option<NodeId>) {
        let n = self.n(id);
        (n.lo, n.hi)
    }

    pub fn height(&self) -> usize {
        fn h<K>(t: &OrderedTree<K>, v: Option<NodeId>) -> usize {
            v.map_or(0, |v| 1 + h(t, t.n(v).left).max(h(t, t.n(v).right)))
        }
        h(self, self.root)
    }

    /// Upper bound on the walk path from the virtual root to a slot.
    pub fn path_hint(&self) -> u64 {
        (2.0 * ((self.len + 1) as f64).log2()).ceil() as u64 + 3
    }

    fn leftmost(&self, mut v: NodeId) -> NodeId {
        while let Some(l) = self.n(v).left {
            v = l;
        }
        v
    }

    fn rightmost(&self, mut v: NodeId) -> NodeId {
        while let Some(r) = self.n(v).right {
            v = r;
        }
        v
    }

    /// In-order successor, structural.
    pub fn successor(&self, v: NodeId) -> Option<NodeId> {
        if let Some(r) = self.n(v).right {
            return Some(self.leftmost(r));
        }
        let mut c = v;
        let mut p = self.n(v).parent;
        while let Some(pp) = p {
            if self.n(pp).left == Some(c) {
                return Some(pp);
            }
            c = pp;
            p = self.n(pp).parent;
        }
        None
    }

    /// In-order predecessor, structural.
    pub fn predecessor(&self, v: NodeId) -> Option<NodeId> {
        if let Some(l) = self.n(v).left {
            return Some(self.rightmost(l));
        }
        let mut c = v;
        let mut p = self.n(v).parent;
        while let Some(pp) = p {
            if self.n(pp).right == Some(c) {
                return Some(pp);
            }
            c = pp;
            p = self.n(pp).parent;
        }
        None
    }

    pub fn first(&self) -> Option<NodeId> {
        self.min
    }

    pub fn last(&self) -> Option<NodeId> {
        self.root.map(|r| self.rightmost(r))
    }

    pub fn in_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.len);
        let mut cur = self.min;
        while let Some(v) = cur {
            out.push(v);
            cur = self.successor(v);
        }
        out
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> + '_ {
        self.in_order().into_iter().map(move |v| &self.n(v).key)
    }

    /// Neighbors of a located position: the nodes just below and above it.
    pub fn neighbors(&self, at: Located) -> (Option<NodeId>, Option<NodeId>) {
        match at {
            Located::Found(v) => (self.predecessor(v), self.successor(v)),
            Located::Vacant { parent: None, .. } => (None, None),
            Located::Vacant { parent: Some(p), side: Side::Left } => (self.predecessor(p), Some(p)),
            Located::Vacant { parent: Some(p), side: Side::Right } => (Some(p), self.successor(p)),
        }
    }

    /// Exchanges the keys held by two nodes. Used when two stored items swap
    /// order (a crossing in a sweep); bounds refer to nodes and stay valid.
    pub fn swap_keys(&mut self, a: NodeId, b: NodeId) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a != b {
            let (i, j) = (a.index().min(b.index()), a.index().max(b.index()));
            let (x, y) = self.nodes.split_at_mut(j);
            std::mem::swap(&mut x[i].key, &mut y[0].key);
        }
        Ok(())
    }

    pub fn pq_min(&self) -> Result<NodeId> {
        self.min.ok_or(Error::EmptyStructure)
    }

    pub fn pq_extract_min(&mut self) -> Result<K>
    where
        K: Clone,
    {
        let m = self.pq_min()?;
        self.delete(m)
    }

    // ---- structure ----

    fn alloc(&mut self, key: K, parent: Option<NodeId>, lo: Option<NodeId>, hi: Option<NodeId>) -> NodeId {
        let node = Node { key, left: None, right: None, parent, red: true, lo, hi, live: true };
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                NodeId(i)
            }
            None => {
                self.nodes.push(node);
                NodeId(self.nodes.len() as u32 - 1)
            }
        }
    }

    fn set_child(&mut self, parent: Option<NodeId>, old: NodeId, new: Option<NodeId>) {
        match parent {
            None => self.root = new,
            Some(p) => {
                if self.n(p).left == Some(old) {
                    self.nm(p).left = new;
                } else {
                    self.nm(p).right = new;
                }
            }
        }
        if let Some(c) = new {
            self.nm(c).parent = parent;
        }
    }

    fn rotate_left(&mut self, x: NodeId) {
        let y = self.n(x).right.expect("rotate_left needs a right child");
        let b = self.n(y).left;
        self.nm(x).right = b;
        if let Some(b) = b {
            self.nm(b).parent = Some(x);
        }
        let xp = self.n(x).parent;
        self.set_child(xp, x, Some(y));
        self.nm(y).left = Some(x);
        self.nm(x).parent = Some(y);
        let (lo, hi) = (self.n(x).lo, self.n(x).hi);
        self.nm(y).lo = lo;
        self.nm(y).hi = hi;
        self.nm(x).hi = Some(y);
    }

    fn rotate_right(&mut self, x: NodeId) {
        let y = self.n(x).left.expect("rotate_right needs a left child");
        let b = self.n(y).right;
        self.nm(x).left = b;
        if let Some(b) = b {
            self.nm(b).parent = Some(x);
        }
        let xp = self.n(x).parent;
        self.set_child(xp, x, Some(y));
        self.nm(y).right = Some(x);
        self.nm(x).parent = Some(y);
        let (lo, hi) = (self.n(x).lo, self.n(x).hi);
        self.nm(y).lo = lo;
        self.nm(y).hi = hi;
        self.nm(x).lo = Some(y);
    }

    fn is_red(&self, v: Option<NodeId>) -> bool {
        v.is_some_and(|v| self.n(v).red)
    }

    /// Inserts `key` at a vacant slot found by a search. No comparisons.
    pub fn insert_at(&mut self, key: K, at: Located) -> Result<NodeId> {
        let (parent, side) = match at {
            Located::Found(v) => {
                return Err(Error::StructuralError(format!("slot already holds node {}", v.index())))
            }
            Located::Vacant { parent, side } => (parent, side),
        };
        let z = match parent {
            None => {
                if self.root.is_some() {
                    return Err(Error::StructuralError("root slot is occupied".into()));
                }
                let z = self.alloc(key, None, None, None);
                self.root = Some(z);
                z
            }
            Some(p) => {
                self.check(p)?;
                if self.child(p, side).is_some() {
                    return Err(Error::StructuralError(format!("slot under {} is occupied", p.index())));
                }
                let (lo, hi) = match side {
                    Side::Left => (self.n(p).lo, Some(p)),
                    Side::Right => (Some(p), self.n(p).hi),
                };
                let z = self.alloc(key, Some(p), lo, hi);
                match side {
                    Side::Left => self.nm(p).left = Some(z),
                    Side::Right => self.nm(p).right = Some(z),
                }
                z
            }
        };
        if self.min.is_none() || (parent == self.min && side == Side::Left) {
            self.min = Some(z);
        }
        self.len += 1;
        self.insert_fixup(z);
        Ok(z)
    }

    fn insert_fixup(&mut self, mut z: NodeId) {
        while let Some(p) = self.n(z).parent.filter(|&p| self.n(p).red) {
            let g = self.n(p).parent.expect("red node has a parent");
            if self.n(g).left == Some(p) {
                let u = self.n(g).right;
                if self.is_red(u) {
                    self.nm(p).red = false;
                    self.nm(u.unwrap()).red = false;
                    self.nm(g).red = true;
                    z = g;
                } else {
                    if self.n(p).right == Some(z) {
                        z = p;
                        self.rotate_left(z);
                    }
                    let p = self.n(z).parent.unwrap();
                    self.nm(p).red = false;
                    self.nm(g).red = true;
                    self.rotate_right(g);
                }
            } else {
                let u = self.n(g).left;
                if self.is_red(u) {
                    self.nm(p).red = false;
                    self.nm(u.unwrap()).red = false;
                    self.nm(g).red = true;
                    z = g;
                } else {
                    if self.n(p).left == Some(z) {
                        z = p;
                        self.rotate_right(z);
                    }
                    let p = self.n(z).parent.unwrap();
                    self.nm(p).red = false;
                    self.nm(g).red = true;
                    self.rotate_left(g);
                }
            }
        }
        let r = self.root.unwrap();
        self.nm(r).red = false;
    }

    fn set_spine(&mut self, start: Option<NodeId>, follow: Side, bound: Side, value: Option<NodeId>) {
        let mut cur = start;
        while let Some(v) = cur {
            match bound {
                Side::Left => self.nm(v).lo = value,
                Side::Right => self.nm(v).hi = value,
            }
            cur = self.child(v, follow);
        }
    }

    /// Removes a node by handle and returns its key. No comparisons.
    pub fn delete(&mut self, z: NodeId) -> Result<K>
    where
        K: Clone,
    {
        self.check(z)?;
        if self.min == Some(z) {
            self.min = self.successor(z);
        }
        let (zl, zr, zp) = (self.n(z).left, self.n(z).right, self.n(z).parent);
        let (zlo, zhi) = (self.n(z).lo, self.n(z).hi);
        let removed_black;
        let x;
        let x_parent;
        match (zl, zr) {
            (None, _) => {
                removed_black = !self.n(z).red;
                x = zr;
                x_parent = zp;
                self.set_child(zp, z, zr);
                // left spine of the right subtree was bounded below by z
                self.set_spine(zr, Side::Left, Side::Left, zlo);
            }
            (Some(l), None) => {
                removed_black = !self.n(z).red;
                x = Some(l);
                x_parent = zp;
                self.set_child(zp, z, Some(l));
                self.set_spine(Some(l), Side::Right, Side::Right, zhi);
            }
            (Some(l), Some(r)) => {
                let y = self.leftmost(r);
                removed_black = !self.n(y).red;
                x = self.n(y).right;
                if y == r {
                    x_parent = Some(y);
                } else {
                    x_parent = self.n(y).parent;
                    let yp = self.n(y).parent;
                    self.set_child(yp, y, x);
                    self.nm(y).right = Some(r);
                    self.nm(r).parent = Some(y);
                }
                self.set_child(zp, z, Some(y));
                self.nm(y).left = Some(l);
                self.nm(l).parent = Some(y);
                let zred = self.n(z).red;
                self.nm(y).red = zred;
                self.nm(y).lo = zlo;
                self.nm(y).hi = zhi;
                self.set_spine(Some(l), Side::Right, Side::Right, Some(y));
                let yr = self.n(y).right;
                self.set_spine(yr, Side::Left, Side::Left, Some(y));
            }
        }
        if removed_black {
            self.delete_fixup(x, x_parent);
        }
        self.nm(z).live = false;
        self.free.push(z.0);
        self.len -= 1;
        Ok(self.n(z).key.clone())
    }

    fn delete_fixup(&mut self, mut x: Option<NodeId>, mut parent: Option<NodeId>) {
        while x != self.root && !self.is_red(x) {
            let p = match parent {
                Some(p) => p,
                None => break,
            };
            if self.n(p).left == x {
                let mut w = self.n(p).right.expect("sibling exists");
                if self.n(w).red {
                    self.nm(w).red = false;
                    self.nm(p).red = true;
                    self.rotate_left(p);
                    w = self.n(p).right.unwrap();
                }
                if !self.is_red(self.n(w).left) && !self.is_red(self.n(w).right) {
                    self.nm(w).red = true;
                    x = Some(p);
                    parent = self.n(p).parent;
                } else {
                    if !self.is_red(self.n(w).right) {
                        let wl = self.n(w).left.unwrap();
                        self.nm(wl).red = false;
                        self.nm(w).red = true;
                        self.rotate_right(w);
                        w = self.n(p).right.unwrap();
                    }
                    let pred = self.n(p).red;
                    self.nm(w).red = pred;
                    self.nm(p).red = false;
                    let wr = self.n(w).right.unwrap();
                    self.nm(wr).red = false;
                    self.rotate_left(p);
                    x = self.root;
                    parent = None;
                }
            } else {
                let mut w = self.n(p).left.expect("sibling exists");
                if self.n(w).red {
                    self.nm(w).red = false;
                    self.nm(p).red = true;
                    self.rotate_right(p);
                    w = self.n(p).left.unwrap();
                }
                if !self.is_red(self.n(w).left) && !self.is_red(self.n(w).right) {
                    self.nm(w).red = true;
                    x = Some(p);
                    parent = self.n(p).parent;
                } else {
                    if !self.is_red(self.n(w).left) {
                        let wr = self.n(w).right.unwrap();
                        self.nm(wr).red = false;
                        self.nm(w).red = true;
                        self.rotate_left(w);
                        w = self.n(p).left.unwrap();
                    }
                    let pred = self.n(p).red;
                    self.nm(w).red = pred;
                    self.nm(p).red = false;
                    let wl = self.n(w).left.unwrap();
                    self.nm(wl).red = false;
                    self.rotate_right(p);
                    x = self.root;
                    parent = None;
                }
            }
        }
        if let Some(x) = x {
            self.nm(x).red = false;
        }
    }

    // ---- noisy search ----

    fn root_position(&self) -> Position {
        match self.root {
            Some(r) => Position::Node(r),
            None => Position::Slot(None, Side::Left),
        }
    }

    fn child_position(&self, v: NodeId, side: Side) -> Position {
        match self.child(v, side) {
            Some(c) => Position::Node(c),
            None => Position::Slot(Some(v), side),
        }
    }

    /// Runs the noisy walk for `q` and returns the full walk record.
    pub fn search_walk<Q: ?Sized, O: KeyOrder<Q, K>>(
        &self,
        q: &Q,
        order: &O,
        ctx: &mut NoisyContext,
        params: &Params,
    ) -> Result<WalkOutcome<Position>> {
        let cfg = params.walk_config(self.scale.max(self.len), self.path_hint());
        let mut oracle = BoundOracle { tree: self, q, order };
        run_walk_with_retries(self, &mut oracle, Position::Top, &cfg, ctx, params.max_retries)
    }

    pub fn search<Q: ?Sized, O: KeyOrder<Q, K>>(
        &self,
        q: &Q,
        order: &O,
        ctx: &mut NoisyContext,
        params: &Params,
    ) -> Result<Located> {
        let out = self.search_walk(q, order, ctx, params)?;
        match out.target {
            Position::Node(v) => Ok(Located::Found(v)),
            Position::Slot(parent, side) => Ok(Located::Vacant { parent, side }),
            Position::Top => Err(Error::StructuralError("walk stopped at the virtual root".into())),
        }
    }

    /// Noisy insertion: search for the slot, then attach structurally.
    pub fn insert<O: KeyOrder<K, K>>(
        &mut self,
        key: K,
        order: &O,
        ctx: &mut NoisyContext,
        params: &Params,
    ) -> Result<NodeId> {
        let at = self.search(&key, order, ctx, params)?;
        match at {
            // a lying walk may claim equality; the caller guarantees distinct
            // keys, so fall back to a neighbouring slot of the reported node
            Located::Found(v) => {
                let at = match self.n(v).left {
                    None => Located::Vacant { parent: Some(v), side: Side::Left },
                    Some(l) => Located::Vacant { parent: Some(self.rightmost(l)), side: Side::Right },
                };
                self.insert_at(key, at)
            }
            vacant => self.insert_at(key, vacant),
        }
    }

    /// Exact search without noise; used by oracles and tests.
    pub fn exact_locate<Q: ?Sized, O: KeyOrder<Q, K>>(&self, q: &Q, order: &O) -> Result<Located> {
        let mut cur = match self.root {
            None => return Ok(Located::Vacant { parent: None, side: Side::Left }),
            Some(r) => r,
        };
        loop {
            let side = match order.order(q, &self.n(cur).key)? {
                Ordering::Equal => return Ok(Located::Found(cur)),
                Ordering::Less => Side::Left,
                Ordering::Greater => Side::Right,
            };
            match self.child(cur, side) {
                Some(c) => cur = c,
                None => return Ok(Located::Vacant { parent: Some(cur), side }),
            }
        }
    }

    /// Full consistency check: red-black shape, parent links, bound links,
    /// min link and exact key order.
    pub fn check_invariants<O: KeyOrder<K, K>>(&self, order: &O) -> std::result::Result<(), String> {
        fn walk<K, O: KeyOrder<K, K>>(
            t: &OrderedTree<K>,
            v: Option<NodeId>,
            parent: Option<NodeId>,
            lo: Option<NodeId>,
            hi: Option<NodeId>,
            order: &O,
            count: &mut usize,
        ) -> std::result::Result<usize, String> {
            let Some(v) = v else { return Ok(1) };
            let n = t.n(v);
            *count += 1;
            if !n.live {
                return Err(format!("dead node {} reachable", v.0));
            }
            if n.parent != parent {
                return Err(format!("bad parent link at {}", v.0));
            }
            if n.lo != lo || n.hi != hi {
                return Err(format!("bad bounds at {}: {:?}/{:?} vs {:?}/{:?}", v.0, n.lo, n.hi, lo, hi));
            }
            if parent.is_some() && n.lo != parent && n.hi != parent {
                return Err(format!("neither bound of {} is its parent", v.0));
            }
            if let Some(l) = lo {
                if order.order(&t.n(l).key, &n.key).map_err(|e| e.to_string())? != Ordering::Less {
                    return Err(format!("order violated below {}", v.0));
                }
            }
            if let Some(h) = hi {
                if order.order(&n.key, &t.n(h).key).map_err(|e| e.to_string())? != Ordering::Less {
                    return Err(format!("order violated above {}", v.0));
                }
            }
            if n.red && (t.is_red(n.left) || t.is_red(n.right)) {
                return Err(format!("red node {} has a red child", v.0));
            }
            let bl = walk(t, n.left, Some(v), lo, Some(v), order, count)?;
            let br = walk(t, n.right, Some(v), Some(v), hi, order, count)?;
            if bl != br {
                return Err(format!("black height mismatch at {}", v.0));
            }
            Ok(bl + usize::from(!n.red))
        }
        if self.is_red(self.root) {
            return Err("red root".into());
        }
        let mut count = 0;
        walk(self, self.root, None, None, None, order, &mut count)?;
        if count != self.len {
            return Err(format!("size {} but {} reachable nodes", self.len, count));
        }
        let expect_min = self.root.map(|r| self.leftmost(r));
        if expect_min != self.min {
            return Err("stale min link".into());
        }
        Ok(())
    }
}

impl<K> SearchDag for OrderedTree<K> {
    type Vertex = Position;

    fn contains(&self, v: Position) -> bool {
        match v {
            Position::Top => true,
            Position::Node(id) => self.contains_handle(id),
            Position::Slot(None, _) => self.root.is_none(),
            Position::Slot(Some(p), side) => self.contains_handle(p) && self.child(p, side).is_none(),
        }
    }

    fn has_edge(&self, from: Position, to: Position) -> bool {
        match from {
            Position::Top => to == self.root_position(),
            Position::Node(v) => {
                to == self.child_position(v, Side::Left) || to == self.child_position(v, Side::Right)
            }
            Position::Slot(..) => false,
        }
    }

    fn is_sink(&self, v: Position) -> bool {
        matches!(v, Position::Slot(..))
    }
}

/// Transition oracle built from ancestor bounds.
struct BoundOracle<'a, K, Q: ?Sized, O> {
    tree: &'a OrderedTree<K>,
    q: &'a Q,
    order: &'a O,
}

impl<K, Q: ?Sized, O: KeyOrder<Q, K>> BoundOracle<'_, K, Q, O> {
    fn greater(&self, k: NodeId, ctx: &mut NoisyContext, plan: RepetitionPlan) -> Result<bool> {
        let o = self.order.order(self.q, &self.tree.n(k).key)?;
        Ok(ctx.vote(o == Ordering::Greater, plan))
    }

    fn less(&self, k: NodeId, ctx: &mut NoisyContext, plan: RepetitionPlan) -> Result<bool> {
        let o = self.order.order(self.q, &self.tree.n(k).key)?;
        Ok(ctx.vote(o == Ordering::Less, plan))
    }

    fn within(
        &self,
        lo: Option<NodeId>,
        hi: Option<NodeId>,
        ctx: &mut NoisyContext,
        plan: RepetitionPlan,
    ) -> Result<bool> {
        if let Some(l) = lo {
            if !self.greater(l, ctx, plan)? {
                return Ok(false);
            }
        }
        if let Some(h) = hi {
            if !self.less(h, ctx, plan)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl<K, Q: ?Sized, O: KeyOrder<Q, K>> TransitionOracle<Position> for BoundOracle<'_, K, Q, O> {
    fn tests_per_consultation(&self) -> u32 {
        4
    }

    fn consult(&mut self, v: Position, ctx: &mut NoisyContext, plan: RepetitionPlan) -> Result<Transition<Position>> {
        let t = self.tree;
        match v {
            Position::Top => Ok(Transition::Next(t.root_position())),
            Position::Node(id) => {
                let (lo, hi) = t.bounds(id);
                if !self.within(lo, hi, ctx, plan)? {
                    return Ok(Transition::OffPath);
                }
                if self.less(id, ctx, plan)? {
                    Ok(Transition::Next(t.child_position(id, Side::Left)))
                } else if self.greater(id, ctx, plan)? {
                    Ok(Transition::Next(t.child_position(id, Side::Right)))
                } else {
                    Ok(Transition::Next(v))
                }
            }
            Position::Slot(None, _) => Ok(Transition::Next(v)),
            Position::Slot(Some(p), side) => {
                let (lo, hi) = match side {
                    Side::Left => (t.n(p).lo, Some(p)),
                    Side::Right => (Some(p), t.n(p).hi),
                };
                if self.within(lo, hi, ctx, plan)? {
                    Ok(Transition::Next(v))
                } else {
                    Ok(Transition::OffPath)
                }
            }
        }
    }
}

/// Sorts by inserting every item into a noisy tree and reading it in order.
pub fn noisy_sort<T: Clone, O: KeyOrder<T, T>>(
    items: &[T],
    order: &O,
    ctx: &mut NoisyContext,
    params: &Params,
) -> Result<Vec<T>> {
    let mut tree = OrderedTree::with_scale(items.len());
    for it in items {
        tree.insert(it.clone(), order, ctx, params)?;
    }
    Ok(tree.keys().cloned().collect())
}

/// Baseline: merge sort where every comparison is amplified by repetition
/// to error `n^-(c+1)`. Costs a `log n` factor more than [`noisy_sort`].
pub fn repetition_sort<T: Clone, O: KeyOrder<T, T>>(
    items: &[T],
    order: &O,
    ctx: &mut NoisyContext,
    params: &Params,
) -> Result<Vec<T>> {
    let plan = params.amplify(ctx.p(), items.len())?;
    let mut v = items.to_vec();
    let mut buf = Vec::with_capacity(v.len());
    let mut width = 1;
    while width < v.len() {
        buf.clear();
        let mut lo = 0;
        while lo < v.len() {
            let mid = (lo + width).min(v.len());
            let hi = (lo + 2 * width).min(v.len());
            let (mut i, mut j) = (lo, mid);
            while i < mid && j < hi {
                let less = order.order(&v[j], &v[i])? == Ordering::Less;
                if ctx.vote(less, plan) {
                    buf.push(v[j].clone());
                    j += 1;
                } else {
                    buf.push(v[i].clone());
                    i += 1;
                }
            }
            buf.extend_from_slice(&v[i..mid]);
            buf.extend_from_slice(&v[j..hi]);
            lo = hi;
        }
        std::mem::swap(&mut v, &mut buf);
        width *= 2;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_tree(keys: &[i64]) -> OrderedTree<i64> {
        let mut t = OrderedTree::new();
        let mut ctx = NoisyContext::exact();
        for &k in keys {
            t.insert(k, &natural, &mut ctx, &Params::default()).unwrap();
        }
        t
    }

    #[test]
    fn empty_search_is_root_slot() {
        let t: OrderedTree<i64> = OrderedTree::new();
        let at = t.search(&5, &natural, &mut NoisyContext::exact(), &Params::default()).unwrap();
        assert_eq!(at, Located::Vacant { parent: None, side: Side::Left });
    }

    #[test]
    fn single_insert_has_infinite_bounds() {
        let t = exact_tree(&[9]);
        let r = t.root().unwrap();
        assert_eq!(t.bounds(r), (None, None));
        assert_eq!(t.pq_min().unwrap(), r);
    }

    #[test]
    fn exact_search_consultations() {
        let t = exact_tree(&[4, 2, 6, 1, 3, 5, 7]);
        t.check_invariants(&natural).unwrap();
        let params = Params::default();
        let out = t.search_walk(&5, &natural, &mut NoisyContext::exact(), &params).unwrap();
        let v = match out.target {
            Position::Node(v) => v,
            other => panic!("{other:?}"),
        };
        assert_eq!(*t.key(v), 5);
        let depth = out.path().len() as u64 - 1;
        let pushes = params.walk_config(7, t.path_hint()).threshold() as u64;
        assert_eq!(out.consultations, depth + pushes);
    }

    #[test]
    fn ascending_inserts_stay_balanced() {
        let keys: Vec<i64> = (1..=1000).collect();
        let t = exact_tree(&keys);
        t.check_invariants(&natural).unwrap();
        assert_eq!(t.keys().copied().collect::<Vec<_>>(), keys);
        assert!(t.height() as f64 <= 2.0 * 1001f64.log2());
    }

    #[test]
    fn pq_order() {
        let mut t = exact_tree(&[3, 1, 2]);
        assert_eq!(*t.key(t.pq_min().unwrap()), 1);
        let out: Vec<i64> = (0..3).map(|_| t.pq_extract_min().unwrap()).collect();
        assert_eq!(out, vec![1, 2, 3]);
        assert_eq!(t.pq_extract_min(), Err(Error::EmptyStructure));
    }

    #[test]
    fn delete_by_handle() {
        let mut t = exact_tree(&[1]);
        let r = t.root().unwrap();
        assert_eq!(t.delete(r).unwrap(), 1);
        assert!(t.is_empty());
        assert_eq!(t.delete(r), Err(Error::InvalidHandle(r.index())));
    }

    #[test]
    fn neighbors_of_vacant_slot() {
        let t = exact_tree(&[10, 20, 30]);
        let at = t.exact_locate(&25, &natural).unwrap();
        let (a, b) = t.neighbors(at);
        assert_eq!((a.map(|v| *t.key(v)), b.map(|v| *t.key(v))), (Some(20), Some(30)));
    }

    #[test]
    fn sort_examples() {
        let mut ctx = NoisyContext::exact();
        let p = Params::default();
        assert!(noisy_sort::<i64, _>(&[], &natural, &mut ctx, &p).unwrap().is_empty());
        assert_eq!(noisy_sort(&[5, 1, 4, 2, 3], &natural, &mut ctx, &p).unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(repetition_sort(&[5, 1, 4, 2, 3], &natural, &mut ctx, &p).unwrap(), vec![1, 2, 3, 4, 5]);
    }
}
