#![allow(dead_code)]

use portnet::net::{generate, petersen, Configuration, GraphKind, Network, NodeId};

pub fn config(n: usize, edges: &[(u32, u32)], leader: u32) -> Configuration {
    Configuration::new(Network::from_edges(n, edges).unwrap(), NodeId(leader)).unwrap()
}

/// Triangle 1-2-3 with pendant 4 on 3.
pub fn triangle_pendant() -> Configuration {
    config(4, &[(1, 2), (1, 3), (2, 3), (3, 4)], 1)
}

/// Small hand-picked graphs plus every generator family at a few sizes.
pub fn corpus() -> Vec<(String, Configuration)> {
    let mut out = vec![
        ("single".to_string(), config(1, &[], 1)),
        ("triangle+pendant".to_string(), triangle_pendant()),
        ("4-cycle".to_string(), config(4, &[(1, 2), (2, 3), (3, 4), (1, 4)], 1)),
        ("petersen".to_string(), petersen()),
        ("path-mid-leader".to_string(), config(6, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)], 3)),
        (
            "two-triangles".to_string(),
            config(6, &[(1, 2), (2, 3), (1, 3), (3, 4), (4, 5), (5, 6), (4, 6)], 5),
        ),
    ];
    for kind in GraphKind::ALL {
        for n in [2usize, 3, 5, 8, 13, 21, 40] {
            if kind == GraphKind::Cycle && n < 3 {
                continue;
            }
            let extra = if kind == GraphKind::RandomConnected { n.min(n * (n - 1) / 2 - (n - 1)) } else { 0 };
            out.push((format!("{kind}-{n}"), generate(kind, n, extra, n as u64).unwrap()));
        }
    }
    out
}
