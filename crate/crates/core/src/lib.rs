//! Round-synchronous simulation of anonymous port-numbered networks with a
//! leader, and protocols for BFS tree numeration and bridge finding.

pub mod certify;
pub mod engine;
pub mod net;
pub mod oracle;
pub mod protocols;
