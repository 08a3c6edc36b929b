//! Live bridge between a running simulation and websocket clients.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{Ack, Command, Envelope, Hello, MessageKind, Nack, StateFrame};
pub use server::{serve, BridgeConfig};
pub use session::LiveSession;
