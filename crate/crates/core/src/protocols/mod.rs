//! Uniform protocols for leader networks.
//!
//! * [`echo`]: broadcast of `1` with `0` acknowledgements converging back
//!   to the leader; builds a spanning tree as a side effect.
//! * [`height_search`]: echo followed by a `2` wave; every node learns the
//!   height `D` and all halt in the same round.
//! * [`sync_wrap`]: runs any locally terminating protocol and then makes
//!   all nodes halt together.
//! * [`pipeline`] and its prefixes [`numerate`], [`exchange_numbers`],
//!   [`find_bridges`]: BFS tree numeration, neighbour numbers, bridge
//!   detection and distribution of the bridge certificate.
//!
//! Round numbers here follow the engine: a symbol written in round `t` is
//! read in round `t + 1`, and the leader starts in round 0. Under this
//! convention every schedule sits exactly [`TIMING_SHIFT`] rounds earlier
//! than the classical `2D + 3` / `3D + 4` counts.

mod bridges;
mod echo;
mod exchange;
mod height;
mod pipeline;
mod sync;
mod tree;

pub use bridges::{BridgeFlags, BridgeSearch};
pub use echo::{echo, Echo, EchoNode, EchoOutput};
pub use exchange::{exchange_width, Exchange};
pub use height::{height_search, HeightNode, HeightOutput, HeightSearch};
pub use pipeline::{
    distribute_bridges, distributed_bridges, exchange_numbers, flagged_bridges, find_bridges, numerate, pipeline, Pipeline, PipelineNode,
    PipelineOutput, Stage,
};
pub use sync::{sync_wrap, SyncWrap, Synced};
pub use tree::TreeStreams;

/// Rounds by which echo completion and height-search halting precede the
/// classical `2D + 3` and `3D + 4`.
pub const TIMING_SHIFT: u64 = 2;

/// Round at which the leader's echo completes: `2D + 3 - TIMING_SHIFT`.
pub fn echo_completion_round(d: u64) -> u64 {
    (2 * d + 3 - TIMING_SHIFT) * u64::from(d > 0)
}

/// Round at which every node halts in the height search:
/// `3D + 4 - TIMING_SHIFT`.
pub fn height_halt_round(d: u64) -> u64 {
    (3 * d + 4 - TIMING_SHIFT) * u64::from(d > 0)
}

/// Control symbols shared by echo and the height search.
pub(crate) mod signal {
    use crate::engine::Symbol;

    pub const ZERO: Symbol = Symbol(1);
    pub const ONE: Symbol = Symbol(2);
    pub const TWO: Symbol = Symbol(3);
    /// Sent on the chosen parent port when a node joins the tree.
    pub const PARENT: Symbol = Symbol(4);
    /// Depth probe of a delayed height search.
    pub const PROBE: Symbol = Symbol(5);

    pub const ALPHABET: u16 = 6;
}

/// Certificate symbols on the wire: `0`, `1`, `2` as 1, 2, 3.
pub(crate) mod wire {
    use crate::certify::{ONE, TWO, ZERO};
    use crate::engine::Symbol;

    pub const ALPHABET: u16 = 4;

    pub fn encode(c: u8) -> Symbol {
        match c {
            ZERO => Symbol(1),
            ONE => Symbol(2),
            TWO => Symbol(3),
            other => panic!("not a certificate symbol: {other}"),
        }
    }

    pub fn decode(s: Symbol) -> Option<u8> {
        match s.0 {
            1 => Some(ZERO),
            2 => Some(ONE),
            3 => Some(TWO),
            _ => None,
        }
    }
}
