//! Graded 1-D meshes for the radial solvers.

/// Nodes of a mesh on `[a, b]` with `cells` intervals, clustered toward both
/// endpoints by a two-sided tanh map of the given `strength` (0 = uniform).
///
/// Endpoint nodes are exact (`nodes[0] == a`, `nodes[cells] == b`).
pub fn graded_nodes(a: f64, b: f64, cells: usize, strength: f64) -> Vec<f64> {
    let n = cells.max(1);
    let mut nodes = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let xi = i as f64 / n as f64;
        let s = if strength <= 0.0 {
            xi
        } else {
            0.5 * (1.0 + (strength * (xi - 0.5)).tanh() / (0.5 * strength).tanh())
        };
        nodes.push(a + (b - a) * s);
    }
    nodes[0] = a;
    nodes[n] = b;
    nodes
}

/// Face positions (midpoints between adjacent nodes).
pub fn faces(nodes: &[f64]) -> Vec<f64> {
    nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}
