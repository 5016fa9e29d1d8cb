#![allow(dead_code)]

use nctoric::toricfan::{validate_fan, Fan, RawFan};

pub fn fan(rank: usize, rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>) -> Fan {
    validate_fan(&RawFan {
        rank,
        rays,
        max_cones: cones,
        certificates: vec![],
    })
    .expect("valid fan")
}

pub fn p1() -> Fan {
    fan(1, vec![vec![1], vec![-1]], vec![vec![0], vec![1]])
}

pub fn p2() -> Fan {
    fan(
        2,
        vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
        vec![vec![0, 1], vec![1, 2], vec![0, 2]],
    )
}

pub fn p1xp1() -> Fan {
    fan(
        2,
        vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]],
        vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
    )
}

pub fn hirzebruch1() -> Fan {
    fan(
        2,
        vec![vec![1, 0], vec![0, 1], vec![-1, 1], vec![0, -1]],
        vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
    )
}

/// The positive orthant in rank `n`, one maximal cone.
pub fn affine(n: usize) -> Fan {
    let rays = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    fan(n, rays, vec![(0..n).collect()])
}

/// Lattice points of `{u : <u, v_i> >= -a_i}` inside a box, by brute force.
pub fn brute_lattice_points(fan: &Fan, a: &[i64], radius: i64) -> Vec<Vec<i64>> {
    let n = fan.rank();
    let mut pts = vec![vec![]];
    for _ in 0..n {
        pts = pts
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (-radius..=radius).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    pts.retain(|u| {
        fan.rays()
            .iter()
            .zip(a)
            .all(|(v, &ai)| u.iter().zip(v).map(|(x, y)| x * y).sum::<i64>() >= -ai)
    });
    pts
}
