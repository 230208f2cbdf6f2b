//! Shared test helpers: an independent primal transportation solver used to
//! cross-validate the crate's min-cost flow path on small instances.
//!
//! The solver is the classic dense transportation simplex (northwest-corner
//! start, dual/MODI pricing, cycle pivots).  It shares no code with the
//! library's solver, so agreement between the two is meaningful evidence.

use fracsmooth::measures::EmpiricalMeasure;

/// One vertex of the bipartite basis tree: a supply row or a demand column.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Node {
    Row(usize),
    Col(usize),
}

/// Exact optimal cost of the balanced transportation problem
/// `min sum c[i][j] x[i][j]` with row sums `supply` and column sums `demand`.
///
/// Panics on malformed input or failure to converge; this is a test oracle
/// for instances with at most a few dozen cells.
pub fn transportation_simplex(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let m = supply.len();
    let n = demand.len();
    assert!(m > 0 && n > 0, "empty transportation instance");
    assert_eq!(cost.len(), m, "cost matrix row count");
    for row in cost {
        assert_eq!(row.len(), n, "cost matrix column count");
    }
    let total_supply: f64 = supply.iter().sum();
    let total_demand: f64 = demand.iter().sum();
    assert!(
        (total_supply - total_demand).abs() <= 1e-9 * (1.0 + total_supply.abs()),
        "unbalanced instance: supply {total_supply}, demand {total_demand}"
    );

    // Northwest-corner start: exactly m + n - 1 basic cells, zero-flow
    // basics included when a row and a column are exhausted together.
    let mut flow = vec![vec![0.0_f64; n]; m];
    let mut basic = vec![vec![false; n]; m];
    let mut left = supply.to_vec();
    let mut need = demand.to_vec();
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let q = left[i].min(need[j]);
        flow[i][j] = q;
        basic[i][j] = true;
        left[i] -= q;
        need[j] -= q;
        if i == m - 1 && j == n - 1 {
            break;
        }
        // Advance along whichever axis is exhausted; on ties prefer the row
        // unless it is the last one, so the basis stays a spanning tree.
        if left[i] <= need[j] && i < m - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }

    let scale = cost
        .iter()
        .flatten()
        .fold(1.0_f64, |acc, &c| acc.max(c.abs()));
    let tol = 1e-10 * scale;

    for _pivot in 0..100_000 {
        // Duals from the basis tree: u[i] + v[j] = c[i][j] on basic cells.
        let mut u = vec![f64::NAN; m];
        let mut v = vec![f64::NAN; n];
        u[0] = 0.0;
        let mut stack = vec![Node::Row(0)];
        while let Some(node) = stack.pop() {
            match node {
                Node::Row(r) => {
                    for c in 0..n {
                        if basic[r][c] && v[c].is_nan() {
                            v[c] = cost[r][c] - u[r];
                            stack.push(Node::Col(c));
                        }
                    }
                }
                Node::Col(c) => {
                    for r in 0..m {
                        if basic[r][c] && u[r].is_nan() {
                            u[r] = cost[r][c] - v[c];
                            stack.push(Node::Row(r));
                        }
                    }
                }
            }
        }
        assert!(
            u.iter().all(|x| !x.is_nan()) && v.iter().all(|x| !x.is_nan()),
            "basis is not a spanning tree"
        );

        // Most negative reduced cost enters the basis.
        let mut enter: Option<(usize, usize)> = None;
        let mut best = -tol;
        for r in 0..m {
            for c in 0..n {
                if !basic[r][c] {
                    let red = cost[r][c] - u[r] - v[c];
                    if red < best {
                        best = red;
                        enter = Some((r, c));
                    }
                }
            }
        }
        let Some((ei, ej)) = enter else {
            return flow
                .iter()
                .zip(cost)
                .map(|(fr, cr)| fr.iter().zip(cr).map(|(f, c)| f * c).sum::<f64>())
                .sum();
        };

        // Unique basis-tree path from Row(ei) to Col(ej); with the entering
        // cell it closes the pivot cycle.
        let path = tree_path(&basic, m, n, Node::Row(ei), Node::Col(ej));
        let mut cycle: Vec<(usize, usize)> = vec![(ei, ej)];
        for window in path.windows(2) {
            let cell = match (window[0], window[1]) {
                (Node::Row(r), Node::Col(c)) | (Node::Col(c), Node::Row(r)) => (r, c),
                _ => unreachable!("bipartite path alternates rows and columns"),
            };
            cycle.push(cell);
        }
        // Odd positions lose flow, even positions (incl. the entering cell)
        // gain it.
        let mut theta = f64::INFINITY;
        let mut leave = None;
        for (pos, &(r, c)) in cycle.iter().enumerate().skip(1).step_by(2) {
            if flow[r][c] < theta {
                theta = flow[r][c];
                leave = Some((pos, r, c));
            }
        }
        let (_, lr, lc) = leave.expect("pivot cycle has a leaving cell");
        for (pos, &(r, c)) in cycle.iter().enumerate() {
            if pos % 2 == 0 {
                flow[r][c] += theta;
            } else {
                flow[r][c] -= theta;
            }
        }
        basic[ei][ej] = true;
        basic[lr][lc] = false;
        flow[lr][lc] = 0.0;
    }
    panic!("transportation simplex did not converge");
}

/// Unique path between two vertices of the basis tree, as a vertex list.
fn tree_path(basic: &[Vec<bool>], m: usize, n: usize, from: Node, to: Node) -> Vec<Node> {
    // Depth-first search with explicit parent links; the basis has m + n - 1
    // cells, so the graph is a tree and the path is unique.
    let idx = |node: Node| match node {
        Node::Row(r) => r,
        Node::Col(c) => m + c,
    };
    let mut parent: Vec<Option<Node>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    seen[idx(from)] = true;
    let mut stack = vec![from];
    while let Some(node) = stack.pop() {
        if node == to {
            break;
        }
        match node {
            Node::Row(r) => {
                for c in 0..n {
                    if basic[r][c] && !seen[idx(Node::Col(c))] {
                        seen[idx(Node::Col(c))] = true;
                        parent[idx(Node::Col(c))] = Some(node);
                        stack.push(Node::Col(c));
                    }
                }
            }
            Node::Col(c) => {
                for r in 0..m {
                    if basic[r][c] && !seen[idx(Node::Row(r))] {
                        seen[idx(Node::Row(r))] = true;
                        parent[idx(Node::Row(r))] = Some(node);
                        stack.push(Node::Row(r));
                    }
                }
            }
        }
    }
    assert!(seen[idx(to)], "basis tree is disconnected");
    let mut path = vec![to];
    while let Some(p) = parent[idx(*path.last().unwrap())] {
        path.push(p);
    }
    path.reverse();
    assert_eq!(path[0], from);
    path
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Splits a signed measure into positive and negative parts.
fn signed_parts(omega: &EmpiricalMeasure) -> (Vec<(Vec<f64>, f64)>, Vec<(Vec<f64>, f64)>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in 0..omega.len() {
        let w = omega.weight(i);
        if w > 0.0 {
            pos.push((omega.point(i).to_vec(), w));
        } else if w < 0.0 {
            neg.push((omega.point(i).to_vec(), -w));
        }
    }
    (pos, neg)
}

/// Primal oracle for the bounded-Lipschitz (KR) norm: optimal partial
/// transport where each unit of surplus mass may be created or destroyed at
/// unit cost, matching the dual constraint `|phi| <= 1`.
pub fn kr_primal_oracle(omega: &EmpiricalMeasure) -> f64 {
    let (pos, neg) = signed_parts(omega);
    if pos.is_empty() || neg.is_empty() {
        return omega.total_abs_mass();
    }
    let m = pos.len();
    let n = neg.len();
    let s_pos: f64 = pos.iter().map(|(_, w)| w).sum();
    let s_neg: f64 = neg.iter().map(|(_, w)| w).sum();
    // Extra row/column absorb destroyed and created mass at unit cost.
    let mut supply: Vec<f64> = pos.iter().map(|(_, w)| *w).collect();
    supply.push(s_neg);
    let mut demand: Vec<f64> = neg.iter().map(|(_, w)| *w).collect();
    demand.push(s_pos);
    let mut cost = vec![vec![0.0; n + 1]; m + 1];
    for (r, (p, _)) in pos.iter().enumerate() {
        for (c, (q, _)) in neg.iter().enumerate() {
            cost[r][c] = euclid(p, q);
        }
        cost[r][n] = 1.0;
    }
    for c in 0..n {
        cost[m][c] = 1.0;
    }
    transportation_simplex(&supply, &demand, &cost)
}

/// Primal oracle for the Kantorovich norm of a balanced signed measure:
/// plain optimal transport between the positive and negative parts.
pub fn kantorovich_primal_oracle(omega: &EmpiricalMeasure) -> f64 {
    let (pos, neg) = signed_parts(omega);
    assert!(
        !pos.is_empty() && !neg.is_empty(),
        "balanced measure needs both signs"
    );
    let supply: Vec<f64> = pos.iter().map(|(_, w)| *w).collect();
    let demand: Vec<f64> = neg.iter().map(|(_, w)| *w).collect();
    let cost: Vec<Vec<f64>> = pos
        .iter()
        .map(|(p, _)| neg.iter().map(|(q, _)| euclid(p, q)).collect())
        .collect();
    transportation_simplex(&supply, &demand, &cost)
}
