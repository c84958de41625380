//! Teacher telemetry path: frame codec, link impairments, transports and
//! control-rate resampling.

pub mod frame;
pub mod link;
pub mod resample;
pub mod transport;

pub use frame::{decode_frame, encode_frame, AngleFrame, DecodeError, FRAME_LEN};
pub use link::{Link, LinkModel, SOURCE_RATE};
pub use resample::{FrameBuffer, Resampled, STALE_AFTER};
pub use transport::{FrameTransport, Loopback, UdpTransport};
