//! Byte transports carrying encoded frames: an in-process channel and UDP
//! datagrams (one frame per datagram).

use std::net::{SocketAddr, UdpSocket};
use std::sync::mpsc::{self, Receiver, Sender, TryRecvError};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::stream::frame::{decode_frame, encode_frame, AngleFrame, FRAME_LEN};

pub trait FrameTransport {
    fn send(&mut self, frame: &AngleFrame) -> Result<()>;
    /// Everything delivered since the last call, in delivery order.
    fn receive(&mut self) -> Result<Vec<AngleFrame>>;
}

pub struct LoopbackSender(Sender<[u8; FRAME_LEN]>);
pub struct LoopbackReceiver(Receiver<[u8; FRAME_LEN]>);

/// Single-producer, single-consumer in-memory channel of encoded frames.
pub fn loopback() -> (LoopbackSender, LoopbackReceiver) {
    let (tx, rx) = mpsc::channel();
    (LoopbackSender(tx), LoopbackReceiver(rx))
}

impl LoopbackSender {
    pub fn send(&self, frame: &AngleFrame) -> Result<()> {
        self.0
            .send(encode_frame(frame))
            .map_err(|_| Error::Io(std::io::Error::new(std::io::ErrorKind::BrokenPipe, "loopback receiver dropped")))
    }
}

impl LoopbackReceiver {
    pub fn try_receive(&self) -> Result<Vec<AngleFrame>> {
        let mut out = Vec::new();
        loop {
            match self.0.try_recv() {
                Ok(bytes) => out.push(decode_frame(&bytes)?),
                Err(TryRecvError::Empty | TryRecvError::Disconnected) => return Ok(out),
            }
        }
    }

    pub fn recv_blocking(&self) -> Option<Result<AngleFrame>> {
        self.0.recv().ok().map(|b| decode_frame(&b).map_err(Error::from))
    }
}

pub struct Loopback {
    tx: LoopbackSender,
    rx: LoopbackReceiver,
}

impl Loopback {
    pub fn new() -> Self {
        let (tx, rx) = loopback();
        Loopback { tx, rx }
    }
}

impl Default for Loopback {
    fn default() -> Self {
        Loopback::new()
    }
}

impl FrameTransport for Loopback {
    fn send(&mut self, frame: &AngleFrame) -> Result<()> {
        self.tx.send(frame)
    }

    fn receive(&mut self) -> Result<Vec<AngleFrame>> {
        self.rx.try_receive()
    }
}

/// Sender and receiver sockets on the local host.
pub struct UdpTransport {
    tx: UdpSocket,
    rx: UdpSocket,
    dest: SocketAddr,
    outstanding: usize,
}

impl UdpTransport {
    pub fn bind_local() -> Result<Self> {
        let rx = UdpSocket::bind("127.0.0.1:0")?;
        rx.set_read_timeout(Some(Duration::from_secs(2)))?;
        let tx = UdpSocket::bind("127.0.0.1:0")?;
        let dest = rx.local_addr()?;
        Ok(UdpTransport {
            tx,
            rx,
            dest,
            outstanding: 0,
        })
    }
}

impl FrameTransport for UdpTransport {
    fn send(&mut self, frame: &AngleFrame) -> Result<()> {
        self.tx.send_to(&encode_frame(frame), self.dest)?;
        self.outstanding += 1;
        Ok(())
    }

    /// Blocks until every datagram sent so far has been read.
    fn receive(&mut self) -> Result<Vec<AngleFrame>> {
        let mut out = Vec::with_capacity(self.outstanding);
        let mut buf = [0u8; 64];
        while self.outstanding > 0 {
            let n = self.rx.recv(&mut buf)?;
            self.outstanding -= 1;
            out.push(decode_frame(&buf[..n])?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joint::JointVector;

    fn sample(k: u32) -> AngleFrame {
        AngleFrame::new(k, k as f64 * 0.005, &JointVector::from_fn(|i| (k as f64 + i as f64) * 0.01))
    }

    #[test]
    fn loopback_and_udp_agree() {
        let mut lo = Loopback::new();
        let mut udp = UdpTransport::bind_local().unwrap();
        for k in 0..20 {
            lo.send(&sample(k)).unwrap();
            udp.send(&sample(k)).unwrap();
        }
        let a = lo.receive().unwrap();
        let mut b = udp.receive().unwrap();
        b.sort_by_key(|f| f.sequence);
        assert_eq!(a, b);
    }

    #[test]
    fn loopback_across_threads() {
        let (tx, rx) = loopback();
        let producer = std::thread::spawn(move || {
            for k in 0..100 {
                tx.send(&sample(k)).unwrap();
            }
        });
        let mut seen = Vec::new();
        while let Some(f) = rx.recv_blocking() {
            seen.push(f.unwrap().sequence);
        }
        producer.join().unwrap();
        assert_eq!(seen, (0..100).collect::<Vec<_>>());
    }
}
