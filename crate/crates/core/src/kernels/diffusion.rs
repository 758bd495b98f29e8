use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};

use super::{GramMatrix, KernelError};

/// Undirected weighted graph over example ids.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    /// `(a, b, weight)` with `a < b`, sorted and deduplicated.
    edges: Vec<(usize, usize, f64)>,
}

impl InteractionGraph {
    /// Builds a graph. Self-loops and edges to unknown vertices are rejected;
    /// a repeated edge keeps its first weight.
    pub fn new(
        vertices: Vec<String>,
        edges: impl IntoIterator<Item = (String, String, f64)>,
    ) -> Result<Self, KernelError> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(KernelError::DuplicateId(v.clone()));
            }
        }
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (a, b, w) in edges {
            let ia = *index
                .get(&a)
                .ok_or_else(|| KernelError::UnknownVertex(a.clone()))?;
            let ib = *index
                .get(&b)
                .ok_or_else(|| KernelError::UnknownVertex(b.clone()))?;
            if ia == ib {
                return Err(KernelError::SelfLoop(a));
            }
            map.entry((ia.min(ib), ia.max(ib))).or_insert(w);
        }
        Ok(InteractionGraph {
            vertices,
            index,
            edges: map.into_iter().map(|((a, b), w)| (a, b, w)).collect(),
        })
    }

    /// Keeps only edges whose endpoints are both in `vertices`; other edges are dropped.
    pub fn induced(
        vertices: Vec<String>,
        edges: impl IntoIterator<Item = (String, String, f64)>,
    ) -> Result<Self, KernelError> {
        let known: std::collections::HashSet<String> = vertices.iter().cloned().collect();
        let kept: Vec<_> = edges
            .into_iter()
            .filter(|(a, b, _)| a != b && known.contains(a) && known.contains(b))
            .collect();
        Self::new(vertices, kept)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b, _) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }
}

/// Diffusion kernel `exp(beta * H)` with `H = A - D` the negated graph Laplacian.
///
/// Computed per connected component through a symmetric eigendecomposition,
/// so entries across components are exactly zero.
pub fn diffusion_kernel(graph: &InteractionGraph, beta: f64) -> Result<GramMatrix, KernelError> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(KernelError::BadParameter(format!(
            "beta must be >= 0, got {beta}"
        )));
    }
    let n = graph.vertices.len();
    if beta == 0.0 {
        return GramMatrix::new(graph.vertices.clone(), DMatrix::identity(n, n));
    }
    let mut k = DMatrix::zeros(n, n);
    let mut local = vec![usize::MAX; n];
    for comp in graph.components() {
        if comp.len() == 1 {
            k[(comp[0], comp[0])] = 1.0;
            continue;
        }
        for (li, &v) in comp.iter().enumerate() {
            local[v] = li;
        }
        let m = comp.len();
        let mut h = DMatrix::<f64>::zeros(m, m);
        for &(a, b, w) in &graph.edges {
            if local[a] == usize::MAX || local[b] == usize::MAX {
                continue;
            }
            let (la, lb) = (local[a], local[b]);
            h[(la, lb)] += w;
            h[(lb, la)] += w;
            h[(la, la)] -= w;
            h[(lb, lb)] -= w;
        }
        let eig = SymmetricEigen::new(h);
        let exp_vals = eig.eigenvalues.map(|l: f64| (beta * l).exp());
        let q = &eig.eigenvectors;
        let block: DMatrix<f64> = q * DMatrix::from_diagonal(&exp_vals) * q.transpose();
        for (li, &a) in comp.iter().enumerate() {
            for (lj, &b) in comp.iter().enumerate().skip(li) {
                // mirror the upper triangle so the result is exactly symmetric
                let v = block[(li, lj)];
                k[(a, b)] = v;
                k[(b, a)] = v;
            }
        }
        for &v in &comp {
            local[v] = usize::MAX;
        }
    }
    GramMatrix::new(graph.vertices.clone(), k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> InteractionGraph {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let e = edges
            .iter()
            .map(|&(a, b)| (names[a].clone(), names[b].clone(), 1.0))
            .collect::<Vec<_>>();
        InteractionGraph::new(names, e).unwrap()
    }

    #[test]
    fn beta_zero_is_identity() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let k = diffusion_kernel(&g, 0.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((k.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_vertex_closed_form() {
        let g = graph(2, &[(0, 1)]);
        let beta = std::f64::consts::LN_2 / 2.0;
        let k = diffusion_kernel(&g, beta).unwrap();
        assert!((k.get(0, 0) - 0.75).abs() < 1e-10);
        assert!((k.get(1, 1) - 0.75).abs() < 1e-10);
        assert!((k.get(0, 1) - 0.25).abs() < 1e-10);
    }

    #[test]
    fn components_are_block_diagonal() {
        let g = graph(5, &[(0, 1), (2, 3), (3, 4)]);
        let k = diffusion_kernel(&g, 1.3).unwrap();
        for a in 0..2 {
            for b in 2..5 {
                assert_eq!(k.get(a, b), 0.0);
            }
        }
        assert!(k.get(2, 4) > 0.0);
    }

    #[test]
    fn graph_validation() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(matches!(
            InteractionGraph::new(names.clone(), vec![("a".into(), "a".into(), 1.0)]),
            Err(KernelError::SelfLoop(_))
        ));
        assert!(matches!(
            InteractionGraph::new(names.clone(), vec![("a".into(), "z".into(), 1.0)]),
            Err(KernelError::UnknownVertex(_))
        ));
        let g = InteractionGraph::induced(
            names,
            vec![("a".into(), "z".into(), 1.0), ("b".into(), "a".into(), 1.0)],
        )
        .unwrap();
        assert_eq!(g.edges(), &[(0, 1, 1.0)]);
        assert!(diffusion_kernel(&g, -1.0).is_err());
    }
}
