//! Graphs bundled with the crate.

use crate::fatgraph::FatGraph;

const TORUS: &str = include_str!("../data/graphs/torus.json");
const SPHERE3: &str = include_str!("../data/graphs/sphere3.json");
const SPHERE4: &str = include_str!("../data/graphs/sphere4.json");
const GENUS2: &str = include_str!("../data/graphs/genus2.json");

fn load(s: &str) -> FatGraph {
    FatGraph::from_json(s).expect("bundled graph is valid")
}

/// Once-punctured torus, the theta graph with one face.
pub fn torus() -> FatGraph {
    load(TORUS)
}

/// Thrice-punctured sphere, the planar theta graph.
pub fn sphere3() -> FatGraph {
    load(SPHERE3)
}

/// Four-punctured sphere, the tetrahedron.
pub fn sphere4() -> FatGraph {
    load(SPHERE4)
}

/// Once-punctured genus-2 surface.
pub fn genus2() -> FatGraph {
    load(GENUS2)
}

pub fn by_name(name: &str) -> Option<FatGraph> {
    match name {
        "torus" => Some(torus()),
        "sphere3" => Some(sphere3()),
        "sphere4" => Some(sphere4()),
        "genus2" => Some(genus2()),
        _ => None,
    }
}

pub fn all() -> Vec<(&'static str, FatGraph)> {
    vec![("torus", torus()), ("sphere3", sphere3()), ("sphere4", sphere4()), ("genus2", genus2())]
}
