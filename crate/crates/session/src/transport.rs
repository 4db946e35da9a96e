use std::io::{BufReader, BufWriter, Write};
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use lockstep_protocol::{read_frame, write_frame, Frame, FrameError, MAX_FRAME_LEN};

/// A bidirectional, ordered frame channel to the relay.
pub trait Transport {
    fn send(&mut self, frame: &Frame) -> Result<(), FrameError>;

    /// Wait up to `timeout` for the next frame. `Ok(None)` means nothing
    /// arrived in time; a closed connection is [`FrameError::Closed`].
    fn recv(&mut self, timeout: Duration) -> Result<Option<Frame>, FrameError>;
}

/// Blocking TCP transport. A background thread reads frames so that
/// `recv` can poll with a timeout.
pub struct TcpTransport {
    writer: BufWriter<TcpStream>,
    incoming: Receiver<Result<Frame, FrameError>>,
    closed: bool,
}

impl TcpTransport {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self, FrameError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let read_half = stream.try_clone()?;
        let (tx, incoming) = mpsc::channel();
        thread::Builder::new().name("relay-reader".into()).spawn(move || {
            let mut reader = BufReader::new(read_half);
            loop {
                let result = read_frame(&mut reader, MAX_FRAME_LEN);
                let stop = result.is_err();
                if tx.send(result).is_err() || stop {
                    break;
                }
            }
        })?;
        Ok(TcpTransport { writer: BufWriter::new(stream), incoming, closed: false })
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, frame: &Frame) -> Result<(), FrameError> {
        write_frame(&mut self.writer, frame)?;
        self.writer.flush()?;
        Ok(())
    }

    fn recv(&mut self, timeout: Duration) -> Result<Option<Frame>, FrameError> {
        if self.closed {
            return Err(FrameError::Closed);
        }
        match self.incoming.recv_timeout(timeout) {
            Ok(Ok(frame)) => Ok(Some(frame)),
            Ok(Err(e)) => {
                self.closed = true;
                Err(e)
            }
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => {
                self.closed = true;
                Err(FrameError::Closed)
            }
        }
    }
}

impl Drop for TcpTransport {
    fn drop(&mut self) {
        let _ = self.writer.flush();
        let _ = self.writer.get_ref().shutdown(Shutdown::Both);
    }
}
