//! Finite balls of the Cayley tree.
//!
//! Every vertex of the tree of order `k` lies on `k + 1` edges. A ball
//! `V_n` around the root `x⁰` is partitioned into shells
//! `W_m = { x : d(x, x⁰) = m }`, `0 ≤ m ≤ n`.
//!
//! Vertices are numbered breadth-first. The successors of a vertex are
//! contiguous and ordered by the generator label appended to its address,
//! so the vertices of `V_m` are exactly the indices `0..|V_m|` of any larger
//! ball with the same `k`. The measures module relies on that prefix
//! property for marginalization.
//!
//! Addresses are reduced words over `a_1, …, a_{k+1}`, the generators of the
//! free product of `k + 1` copies of `Z/2`. The root is the empty word; the
//! successors of a vertex with word `w` are `w a_t` for every letter `a_t`
//! different from the last letter of `w`.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Hard ceiling on ball size so a typo in `n` cannot exhaust memory.
pub const MAX_BALL_VERTICES: usize = 1 << 26;

/// Index of a vertex in breadth-first order. The root is `Vertex(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub usize);

impl Vertex {
    pub const ROOT: Vertex = Vertex(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Reduced word over the generators `a_1..a_{k+1}`; letters are stored as
/// their 1-based labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when no two adjacent letters coincide.
    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }
}

impl fmt::Display for Word {
    /// `a1a3a2`; the root prints as the empty string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for letter in &self.0 {
            write!(f, "a{letter}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let bad = || Error::InvalidWord(s.to_string());
        let rest = s.strip_prefix('a').ok_or_else(bad)?;
        let letters = rest
            .split('a')
            .map(|t| t.parse::<usize>().ok().filter(|&l| l >= 1).ok_or_else(bad))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word(letters))
    }
}

/// The ball `V_n` of the Cayley tree `Γ^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    k: usize,
    radius: usize,
    parent: Vec<Option<Vertex>>,
    depth: Vec<usize>,
    last_letter: Vec<usize>,
    children: Vec<Range<usize>>,
    shell_start: Vec<usize>,
    edges: Vec<(Vertex, Vertex)>,
}

impl Ball {
    pub fn new(k: usize, radius: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidTreeOrder(k));
        }
        let too_large = Error::BallTooLarge { k, radius, limit: MAX_BALL_VERTICES };
        let mut total = 1usize;
        let mut shell = 1usize;
        for m in 1..=radius {
            shell = if m == 1 { k + 1 } else { shell.checked_mul(k).ok_or(too_large.clone())? };
            total = total.checked_add(shell).ok_or(too_large.clone())?;
            if total > MAX_BALL_VERTICES {
                return Err(too_large);
            }
        }

        let mut parent = Vec::with_capacity(total);
        let mut depth = Vec::with_capacity(total);
        let mut last_letter = Vec::with_capacity(total);
        let mut children = Vec::with_capacity(total);
        let mut edges = Vec::with_capacity(total.saturating_sub(1));
        let mut shell_start = vec![0, 1];

        parent.push(None);
        depth.push(0);
        last_letter.push(0);

        let mut frontier = 0..1;
        for m in 1..=radius {
            let start = parent.len();
            for x in frontier.clone() {
                let first = parent.len();
                for letter in 1..=k + 1 {
                    if letter == last_letter[x] {
                        continue;
                    }
                    let y = parent.len();
                    parent.push(Some(Vertex(x)));
                    depth.push(m);
                    last_letter.push(letter);
                    edges.push((Vertex(x), Vertex(y)));
                }
                children.push(first..parent.len());
            }
            frontier = start..parent.len();
            shell_start.push(parent.len());
        }
        // Outer shell: no successors inside the ball.
        children.resize(parent.len(), 0..0);

        Ok(Ball { k, radius, parent, depth, last_letter, children, shell_start, edges })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> Vertex {
        Vertex::ROOT
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.len()).map(Vertex)
    }

    pub fn contains(&self, x: Vertex) -> bool {
        x.0 < self.len()
    }

    /// Index range of shell `W_m`.
    pub fn shell_range(&self, m: usize) -> Range<usize> {
        assert!(m <= self.radius, "shell {m} outside ball of radius {}", self.radius);
        self.shell_start[m]..self.shell_start[m + 1]
    }

    pub fn shell(&self, m: usize) -> impl Iterator<Item = Vertex> {
        self.shell_range(m).map(Vertex)
    }

    pub fn shell_len(&self, m: usize) -> usize {
        self.shell_range(m).len()
    }

    /// Number of vertices in `V_m`.
    pub fn inner_len(&self, m: usize) -> usize {
        self.shell_start[m + 1]
    }

    /// Edges `L_n`, each oriented from parent to child.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn parent(&self, x: Vertex) -> Option<Vertex> {
        self.parent[x.0]
    }

    /// `|x| = d(x, x⁰)`.
    pub fn depth(&self, x: Vertex) -> usize {
        self.depth[x.0]
    }

    /// Position of `x` inside its shell.
    pub fn shell_position(&self, x: Vertex) -> usize {
        x.0 - self.shell_start[self.depth[x.0]]
    }

    /// Direct successors `S(x)`; `k + 1` of them at the root, `k` elsewhere.
    pub fn successors(&self, x: Vertex) -> Result<impl Iterator<Item = Vertex>> {
        self.check(x)?;
        if self.depth[x.0] == self.radius {
            return Err(Error::LeafVertex(x.0));
        }
        Ok(self.children[x.0].clone().map(Vertex))
    }

    /// Successor positions of an outer-shell vertex inside `W_{n+1}` of the
    /// ball one radius larger.
    pub fn outer_successor_positions(&self, x: Vertex) -> Range<usize> {
        debug_assert_eq!(self.depth[x.0], self.radius);
        if self.radius == 0 {
            0..self.k + 1
        } else {
            let p = self.shell_position(x);
            p * self.k..(p + 1) * self.k
        }
    }

    /// Size of `W_{n+1}` for the ball one radius larger.
    pub fn outer_shell_len(&self) -> usize {
        if self.radius == 0 {
            self.k + 1
        } else {
            self.shell_len(self.radius) * self.k
        }
    }

    /// Graph distance, through the lowest common ancestor.
    pub fn distance(&self, x: Vertex, y: Vertex) -> Result<usize> {
        self.check(x)?;
        self.check(y)?;
        let (mut a, mut b) = (x, y);
        let mut steps = 0;
        while self.depth[a.0] > self.depth[b.0] {
            a = self.parent[a.0].expect("non-root has a parent");
            steps += 1;
        }
        while self.depth[b.0] > self.depth[a.0] {
            b = self.parent[b.0].expect("non-root has a parent");
            steps += 1;
        }
        while a != b {
            a = self.parent[a.0].expect("non-root has a parent");
            b = self.parent[b.0].expect("non-root has a parent");
            steps += 2;
        }
        Ok(steps)
    }

    pub fn word(&self, x: Vertex) -> Result<Word> {
        self.check(x)?;
        let mut letters = Vec::with_capacity(self.depth[x.0]);
        let mut v = x;
        while let Some(p) = self.parent[v.0] {
            letters.push(self.last_letter[v.0]);
            v = p;
        }
        letters.reverse();
        Ok(Word(letters))
    }

    /// Inverse of [`Ball::word`]; `None` for words that are not reduced,
    /// use letters above `k + 1`, or are longer than the radius.
    pub fn vertex_of_word(&self, word: &Word) -> Option<Vertex> {
        if word.len() > self.radius || !word.is_reduced() {
            return None;
        }
        let mut v = Vertex::ROOT;
        for &letter in word.letters() {
            if letter == 0 || letter > self.k + 1 {
                return None;
            }
            v = self.children[v.0].clone().map(Vertex).find(|c| self.last_letter[c.0] == letter)?;
        }
        Some(v)
    }

    fn check(&self, x: Vertex) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(x.0))
        }
    }
}
