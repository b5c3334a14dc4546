//! Balls in Cayley graphs and their lex-min geodesic spanning trees.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::cayley::group::{Element, GroupModel};
use crate::error::{Error, Result};
use crate::game::Arena;
use crate::tree_model::{ExplicitSpec, TreeSpec, VertexId};

const OUTSIDE: VertexId = VertexId::MAX;

/// The ball `B(R)` around the identity.
///
/// Vertices are numbered layer by layer, and within a layer in lexicographic
/// order of their lex-min geodesic words. Vertex 0 is the identity.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    model: GroupModel,
    radius: u32,
    elements: Vec<Element>,
    distance: Vec<u32>,
    /// `(parent, generator)`: the lex-min word of `v` is that of the parent
    /// followed by the generator.
    parent: Vec<(VertexId, u16)>,
    adjacency: Vec<VertexId>,
    layer_start: Vec<usize>,
}

impl CayleyBall {
    /// Breadth-first search from the identity. Each layer is scanned in word
    /// order and generators in their fixed order, so the first discovery of
    /// an element is through its lex-min geodesic word.
    pub fn build(model: &GroupModel, radius: u32, cap: usize) -> Result<Self> {
        let gens = model.generator_count();
        let mut index: HashMap<Element, VertexId> = HashMap::new();
        let mut elements = vec![model.identity()];
        index.insert(model.identity(), 0);
        let mut distance = vec![0];
        let mut parent = vec![(OUTSIDE, 0u16)];
        let mut layer_start = vec![0, 1];
        for r in 1..=radius {
            let prev = layer_start[r as usize - 1]..layer_start[r as usize];
            for u in prev {
                for g in 0..gens {
                    let y = model.mul_gen(&elements[u], g);
                    if index.contains_key(&y) {
                        continue;
                    }
                    if elements.len() >= cap {
                        return Err(Error::VertexCap { cap });
                    }
                    index.insert(y.clone(), elements.len());
                    elements.push(y);
                    distance.push(r);
                    parent.push((u, g as u16));
                }
            }
            layer_start.push(elements.len());
        }
        let mut adjacency = vec![OUTSIDE; elements.len() * gens];
        for (v, x) in elements.iter().enumerate() {
            for g in 0..gens {
                if let Some(&w) = index.get(&model.mul_gen(x, g)) {
                    adjacency[v * gens + g] = w;
                }
            }
        }
        Ok(CayleyBall { model: model.clone(), radius, elements, distance, parent, adjacency, layer_start })
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, v: VertexId) -> &Element {
        &self.elements[v]
    }

    pub fn sphere(&self, n: u32) -> std::ops::Range<VertexId> {
        self.layer_start[n as usize]..self.layer_start[n as usize + 1]
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        self.layer_start.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Neighbour of `v` along generator `g`, if inside the ball.
    pub fn neighbour(&self, v: VertexId, g: usize) -> Option<VertexId> {
        let w = self.adjacency[v * self.model.generator_count() + g];
        (w != OUTSIDE).then_some(w)
    }

    /// The lex-min geodesic word of `v` as generator indices.
    pub fn word(&self, v: VertexId) -> Vec<usize> {
        let mut word = vec![];
        let mut u = v;
        while u != 0 {
            let (p, g) = self.parent[u];
            word.push(g as usize);
            u = p;
        }
        word.reverse();
        word
    }

    pub fn word_string(&self, v: VertexId) -> String {
        let names = self.model.generator_names();
        let w: Vec<&str> = self.word(v).into_iter().map(|g| names[g].as_str()).collect();
        if w.is_empty() {
            "id".into()
        } else {
            w.join(" ")
        }
    }

    /// The spanning tree joining each vertex to the vertex whose word is its
    /// own minus the last letter. Vertex `i` of the returned spec is ball
    /// vertex `i`; leaves inside the ball are closed.
    pub fn lex_min_tree(&self) -> TreeSpec {
        let parents: Vec<usize> = self.parent[1..].iter().map(|&(p, _)| p).collect();
        let mut has_child = vec![false; self.len()];
        parents.iter().for_each(|&p| has_child[p] = true);
        let closed = (1..self.len()).filter(|&v| !has_child[v] && self.distance[v] < self.radius);
        TreeSpec::Explicit(ExplicitSpec::new(parents, closed).expect("BFS parents form a tree"))
    }
}

impl Arena for CayleyBall {
    fn vertex_count(&self) -> usize {
        self.len()
    }

    fn for_each_neighbor(&self, v: VertexId, f: &mut dyn FnMut(VertexId)) {
        let gens = self.model.generator_count();
        self.adjacency[v * gens..(v + 1) * gens].iter().filter(|&&w| w != OUTSIDE).for_each(|&w| f(w));
    }

    fn distance(&self, v: VertexId) -> u32 {
        self.distance[v]
    }

    /// The ball's outer sphere stands for the rest of the group.
    fn is_escape(&self, v: VertexId) -> bool {
        self.distance[v] == self.radius
    }
}

/// `|S(0)|, …, |S(R)|`, keeping only two layers in memory.
pub fn sphere_sizes(model: &GroupModel, radius: u32, cap: usize) -> Result<Vec<u64>> {
    let mut sizes = vec![1u64];
    let mut prev: HashSet<Element> = HashSet::new();
    let mut cur: HashSet<Element> = HashSet::from([model.identity()]);
    for _ in 1..=radius {
        let mut next = HashSet::new();
        for x in &cur {
            for g in 0..model.generator_count() {
                let y = model.mul_gen(x, g);
                if !cur.contains(&y) && !prev.contains(&y) {
                    next.insert(y);
                }
            }
        }
        if next.len() > cap {
            return Err(Error::VertexCap { cap });
        }
        sizes.push(next.len() as u64);
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(sizes)
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthEstimates {
    pub spheres: Vec<u64>,
    pub balls: Vec<u64>,
    /// `|B(r)|^{1/r}` for `r = 1..=R`.
    pub ball_root: Vec<f64>,
    /// `|S(r)| / |S(r-1)|` for `r = 1..=R`.
    pub sphere_ratio: Vec<f64>,
}

impl GrowthEstimates {
    pub fn last_ball_root(&self) -> f64 {
        self.ball_root.last().copied().unwrap_or(1.0)
    }

    pub fn last_sphere_ratio(&self) -> f64 {
        self.sphere_ratio.last().copied().unwrap_or(1.0)
    }
}

/// Growth readings up to radius `R`.
pub fn growth_rate_estimate(model: &GroupModel, radius: u32, cap: usize) -> Result<GrowthEstimates> {
    if radius < 2 {
        return Err(Error::Spec("growth estimates need R ≥ 2".into()));
    }
    let spheres = sphere_sizes(model, radius, cap)?;
    let balls: Vec<u64> = spheres.iter().scan(0, |acc, s| {
        *acc += s;
        Some(*acc)
    }).collect();
    let ball_root = (1..=radius as usize).map(|r| (balls[r] as f64).powf(1.0 / r as f64)).collect();
    let sphere_ratio = (1..=radius as usize).map(|r| spheres[r] as f64 / spheres[r - 1] as f64).collect();
    Ok(GrowthEstimates { spheres, balls, ball_root, sphere_ratio })
}
