pub mod analysis;
pub mod codec;
pub mod crypto;
pub mod group;
pub mod perm;
pub mod protocol;
pub mod sdpinst;
pub mod session;
