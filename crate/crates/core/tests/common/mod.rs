#![allow(dead_code)]

use proptest::prelude::*;
use qgvac::{build_graph, GraphDescription, MetricGraph, VertexCondition};

/// Connected Kirchhoff graph: a random tree on `v` vertices plus extra
/// bonds (loops and parallel bonds allowed), lengths in [0.5, 2].
pub fn kirchhoff_graph(max_bonds: usize) -> impl Strategy<Value = MetricGraph> {
    (2..=(max_bonds + 1).min(4))
        .prop_flat_map(move |v| {
            let extra = max_bonds.saturating_sub(v - 1);
            (
                Just(v),
                proptest::collection::vec(0..1000usize, v - 1),
                proptest::collection::vec((0..v, 0..v), 0..=extra),
            )
        })
        .prop_flat_map(|(v, parents, extra)| {
            let nb = v - 1 + extra.len();
            (
                Just((v, parents, extra)),
                proptest::collection::vec(0.5f64..2.0, nb),
            )
        })
        .prop_map(|((v, parents, extra), lengths)| {
            let mut d = GraphDescription::new();
            for i in 0..v {
                d = d.vertex(&format!("v{i}"), VertexCondition::Kirchhoff);
            }
            let mut ends: Vec<(usize, usize)> = parents
                .iter()
                .enumerate()
                .map(|(i, p)| (p % (i + 1), i + 1))
                .collect();
            ends.extend(extra);
            for (i, ((a, b), l)) in ends.iter().zip(&lengths).enumerate() {
                d = d.bond(&format!("e{i}"), &format!("v{a}"), &format!("v{b}"), *l);
            }
            build_graph(&d).unwrap()
        })
}
