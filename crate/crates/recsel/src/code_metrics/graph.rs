//! Undirected simple-graph statistics over a rooted tree (or an externally
//! supplied node/children structure).

/// Graph metrics of a tree viewed as an undirected simple graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphMetrics {
    pub node_count: usize,
    pub edge_count: usize,
    pub avg_degree: f64,
    pub max_degree: usize,
    pub transitivity: f64,
    pub avg_clustering: f64,
    pub depth: usize,
}

/// Computes metrics from a children-list representation rooted at node 0.
pub fn tree_metrics(children: &[Vec<usize>]) -> GraphMetrics {
    let n = children.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut edges = 0usize;
    for (parent, kids) in children.iter().enumerate() {
        for &child in kids {
            adjacency[parent].push(child);
            adjacency[child].push(parent);
            edges += 1;
        }
    }
    let degrees: Vec<usize> = adjacency.iter().map(|a| a.len()).collect();
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let avg_degree = if n > 0 { 2.0 * edges as f64 / n as f64 } else { 0.0 };

    // Triangles and connected triples. A triple is a node with two distinct
    // neighbors; a triangle is counted once per corner and divided out.
    let mut triples = 0usize;
    let mut triangle_corners = 0usize;
    let mut clustering_sum = 0.0;
    for v in 0..n {
        let d = degrees[v];
        if d < 2 {
            continue; // contributes 0 clustering
        }
        triples += d * (d - 1) / 2;
        let mut links_between_neighbors = 0usize;
        for (ai, &a) in adjacency[v].iter().enumerate() {
            for &b in &adjacency[v][ai + 1..] {
                if adjacency[a].contains(&b) {
                    links_between_neighbors += 1;
                }
            }
        }
        triangle_corners += links_between_neighbors;
        clustering_sum += links_between_neighbors as f64 / (d * (d - 1) / 2) as f64;
    }
    let transitivity = if triples > 0 {
        // triangle_corners already counts each triangle at all three corners
        triangle_corners as f64 / triples as f64
    } else {
        0.0
    };
    let avg_clustering = if n > 0 { clustering_sum / n as f64 } else { 0.0 };

    // Longest root-to-leaf edge count via BFS from node 0.
    let mut depth = 0usize;
    if n > 0 {
        let mut level = vec![0usize; n];
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    level[w] = level[v] + 1;
                    depth = depth.max(level[w]);
                    queue.push_back(w);
                }
            }
        }
    }

    GraphMetrics {
        node_count: n,
        edge_count: edges,
        avg_degree,
        max_degree,
        transitivity,
        avg_clustering,
        depth,
    }
}
