//! Conformance checking for time Petri nets.
//!
//! Given a net whose transitions carry static firing intervals and a
//! recorded timed word, this crate answers two questions: is the word a
//! behaviour of the net, and if not, which valid behaviour is closest?
//! Closeness is measured either on absolute timestamps (the *stamp*
//! metric, solved by a convex piecewise-linear sweep) or on the delays
//! events wait after becoming enabled (the *delay* metric, solved greedily
//! on extended-free-choice nets). A grid-enumeration oracle provides an
//! independent reference implementation for both, and a small edit-based
//! search extends alignment to words whose action sequence itself needs
//! repair.

pub mod causal;
pub mod cli;
pub mod delay;
pub mod fixtures;
pub mod general;
pub mod io;
pub mod oracle;
pub mod plf;
pub mod stamp;
pub mod synth;
pub mod time;
pub mod tpn;
