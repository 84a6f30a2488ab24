//! Master node: splits a job into tiles and farms them out to workers.

use std::collections::{BTreeSet, VecDeque};
use std::io::{self, Write};
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use wavefuse_core::fusion::working_ms;
use wavefuse_core::tiling::{merge, split};
use wavefuse_core::wire::{
    encode_message, ErrorPayload, MessageType, ResultPayload, SampleEncoding, TaskPayload,
    WireMessage,
};
use wavefuse_core::{FusionMethod, MultibandImage, Plane, TileGrid};

use super::net::{read_message, write_message, ReadError};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MasterConfig {
    /// A worker holding tiles that stays silent this long is dropped.
    pub task_timeout: Duration,
    pub connect_timeout: Duration,
    /// Reassignments allowed per tile before the job fails.
    pub max_retries: u32,
    /// Tasks outstanding per worker.
    pub in_flight: usize,
    pub encoding: SampleEncoding,
    /// Raised to abandon the job.
    pub stop: Option<Arc<AtomicBool>>,
}

impl Default for MasterConfig {
    fn default() -> Self {
        MasterConfig {
            task_timeout: Duration::from_secs(30),
            connect_timeout: Duration::from_secs(5),
            max_retries: 2,
            in_flight: 2,
            encoding: SampleEncoding::Byte,
            stop: None,
        }
    }
}

type Frame = Arc<Vec<u8>>;

enum Event {
    Ready(usize, TcpStream),
    Done(usize, usize, MultibandImage),
    Failed(usize, usize, String),
    Down(usize, String),
}

#[derive(PartialEq)]
enum State {
    Connecting,
    Ready,
    Down,
}

struct Slot {
    endpoint: String,
    state: State,
    tasks: Option<Sender<Frame>>,
    stream: Option<TcpStream>,
    held: BTreeSet<usize>,
    outstanding: Arc<AtomicUsize>,
}

impl Slot {
    fn close(&mut self) {
        self.tasks = None;
        if let Some(s) = self.stream.take() {
            let _ = s.shutdown(Shutdown::Both);
        }
    }
}

/// Runs a tiled job on `endpoints`. Tiles go out round-robin to connected
/// workers, are reassigned when a worker errors, disconnects or times out,
/// and are merged by grid position.
pub fn run_master(
    pan: &Plane,
    ms: &MultibandImage,
    method: FusionMethod,
    grid: &TileGrid,
    endpoints: &[String],
    cfg: &MasterConfig,
) -> Result<MultibandImage> {
    crate::pool::check_inputs(pan, ms, &method)?;
    let (w, h) = pan.dims();
    let tiles = split(pan, &working_ms(ms, &method, w, h), grid)?;
    let frames = tiles
        .iter()
        .map(|t| {
            let payload = TaskPayload {
                tile: t.index,
                method,
                pan: t.pan.clone(),
                ms: t.ms.clone(),
            }
            .encode(cfg.encoding)?;
            Ok(Arc::new(encode_message(&WireMessage::new(
                cfg.encoding.task_type(),
                payload,
            ))))
        })
        .collect::<Result<Vec<Frame>>>()?;
    drop(tiles);
    if endpoints.is_empty() {
        return Err(Error::NoWorkers);
    }

    let (ev_tx, ev_rx) = mpsc::channel();
    let mut slots = Vec::new();
    let mut links = Vec::new();
    for (id, endpoint) in endpoints.iter().enumerate() {
        let (tx, rx) = mpsc::channel();
        let outstanding = Arc::new(AtomicUsize::new(0));
        let link = Link {
            id,
            endpoint: endpoint.clone(),
            cfg: cfg.clone(),
            grid: *grid,
            outstanding: outstanding.clone(),
            events: ev_tx.clone(),
        };
        links.push(thread::spawn(move || link.run(rx)));
        slots.push(Slot {
            endpoint: endpoint.clone(),
            state: State::Connecting,
            tasks: Some(tx),
            stream: None,
            held: BTreeSet::new(),
            outstanding,
        });
    }
    drop(ev_tx);

    let mut job = Job {
        frames,
        grid: *grid,
        cfg,
        slots,
        pending: (0..grid.tile_count()).collect(),
        owner: vec![None; grid.tile_count()],
        done: vec![None; grid.tile_count()],
        failures: vec![0; grid.tile_count()],
        cursor: 0,
        ever_ready: false,
    };
    let out = job.drive(&ev_rx);
    for slot in &mut job.slots {
        slot.close();
    }
    drop(job);
    for link in links {
        let _ = link.join();
    }
    out
}

struct Job<'a> {
    frames: Vec<Frame>,
    grid: TileGrid,
    cfg: &'a MasterConfig,
    slots: Vec<Slot>,
    pending: VecDeque<usize>,
    owner: Vec<Option<usize>>,
    done: Vec<Option<MultibandImage>>,
    failures: Vec<u32>,
    cursor: usize,
    ever_ready: bool,
}

impl Job<'_> {
    fn drive(&mut self, events: &Receiver<Event>) -> Result<MultibandImage> {
        loop {
            if self.done.iter().all(Option::is_some) {
                let done = std::mem::take(&mut self.done);
                let fused = done
                    .into_iter()
                    .enumerate()
                    .map(|(ord, img)| (self.grid.index_of(ord), img.expect("all done")));
                return Ok(merge(fused, &self.grid)?);
            }
            self.dispatch();
            if self.slots.iter().all(|s| s.state == State::Down) {
                return Err(Error::NoWorkers);
            }
            let event = match events.recv_timeout(Duration::from_millis(100)) {
                Ok(e) => e,
                Err(RecvTimeoutError::Timeout) => {
                    if self.cfg.stop.as_ref().is_some_and(|s| s.load(Ordering::SeqCst)) {
                        return Err(Error::Interrupted);
                    }
                    continue;
                }
                Err(RecvTimeoutError::Disconnected) => return Err(Error::NoWorkers),
            };
            self.handle(event)?;
        }
    }

    fn dispatch(&mut self) {
        let n = self.slots.len();
        while let Some(&tile) = self.pending.front() {
            let Some(w) = (0..n)
                .map(|k| (self.cursor + k) % n)
                .find(|&w| {
                    let s = &self.slots[w];
                    s.state == State::Ready && s.held.len() < self.cfg.in_flight.max(1)
                })
            else {
                return;
            };
            self.cursor = (w + 1) % n;
            let slot = &mut self.slots[w];
            let sent = slot
                .tasks
                .as_ref()
                .is_some_and(|tx| tx.send(self.frames[tile].clone()).is_ok());
            if !sent {
                slot.state = State::Down;
                slot.close();
                continue;
            }
            self.pending.pop_front();
            slot.outstanding.fetch_add(1, Ordering::SeqCst);
            slot.held.insert(tile);
            self.owner[tile] = Some(w);
            let index = self.grid.index_of(tile);
            debug!("tile ({}, {}) -> {}", index.row, index.col, slot.endpoint);
        }
    }

    fn handle(&mut self, event: Event) -> Result<()> {
        match event {
            Event::Ready(w, stream) => {
                info!("worker {} ready", self.slots[w].endpoint);
                let slot = &mut self.slots[w];
                if slot.state == State::Connecting {
                    slot.state = State::Ready;
                    slot.stream = Some(stream);
                    self.ever_ready = true;
                } else {
                    let _ = stream.shutdown(Shutdown::Both);
                }
            }
            Event::Done(w, tile, image) => {
                if self.owner[tile] == Some(w) {
                    self.owner[tile] = None;
                    self.slots[w].held.remove(&tile);
                    self.done[tile] = Some(image);
                }
            }
            Event::Failed(w, tile, reason) => {
                if self.owner[tile] == Some(w) {
                    warn!("worker {} failed a tile: {reason}", self.slots[w].endpoint);
                    self.owner[tile] = None;
                    self.slots[w].held.remove(&tile);
                    self.retry(tile, reason)?;
                }
            }
            Event::Down(w, reason) => {
                let slot = &mut self.slots[w];
                if slot.state == State::Down {
                    return Ok(());
                }
                warn!("worker {} lost: {reason}", slot.endpoint);
                slot.state = State::Down;
                slot.close();
                let held = std::mem::take(&mut slot.held);
                for tile in held {
                    self.owner[tile] = None;
                    self.retry(tile, format!("worker {} lost: {reason}", self.slots[w].endpoint))?;
                }
            }
        }
        Ok(())
    }

    fn retry(&mut self, tile: usize, reason: String) -> Result<()> {
        self.failures[tile] += 1;
        if self.failures[tile] > self.cfg.max_retries {
            let index = self.grid.index_of(tile);
            return Err(Error::JobFailed {
                row: index.row,
                col: index.col,
                attempts: self.failures[tile],
                reason,
            });
        }
        self.pending.push_front(tile);
        Ok(())
    }
}

/// Connection to one worker: the handshake, then a reader on this thread
/// and a writer on its own.
struct Link {
    id: usize,
    endpoint: String,
    cfg: MasterConfig,
    grid: TileGrid,
    outstanding: Arc<AtomicUsize>,
    events: Sender<Event>,
}

impl Link {
    fn run(self, tasks: Receiver<Frame>) {
        let stream = match self.connect() {
            Ok(s) => s,
            Err(e) => {
                let _ = self.events.send(Event::Down(self.id, e.to_string()));
                return;
            }
        };
        let (mut reader, mut writer, handle) = match (stream.try_clone(), stream.try_clone()) {
            (Ok(r), Ok(w)) => (r, w, stream),
            (Err(e), _) | (_, Err(e)) => {
                let _ = self.events.send(Event::Down(self.id, e.to_string()));
                return;
            }
        };
        if self.events.send(Event::Ready(self.id, handle)).is_err() {
            return;
        }
        let events = self.events.clone();
        let id = self.id;
        let writer: JoinHandle<()> = thread::spawn(move || {
            for frame in tasks {
                if let Err(e) = writer.write_all(&frame).and_then(|_| writer.flush()) {
                    let _ = events.send(Event::Down(id, e.to_string()));
                    return;
                }
            }
            let _ = writer.shutdown(Shutdown::Write);
        });
        let why = self.read_loop(&mut reader);
        let _ = self.events.send(Event::Down(self.id, why));
        let _ = writer.join();
    }

    fn connect(&self) -> io::Result<TcpStream> {
        let mut last = io::Error::new(io::ErrorKind::NotFound, "address did not resolve");
        for addr in self.endpoint.to_socket_addrs()? {
            match TcpStream::connect_timeout(&addr, self.cfg.connect_timeout) {
                Ok(mut s) => {
                    s.set_nodelay(true)?;
                    s.set_read_timeout(Some(self.cfg.connect_timeout))?;
                    write_message(&mut s, &WireMessage::empty(MessageType::Hello))?;
                    let reply = read_message(&mut s, None, &mut super::net::no_idle)
                        .map_err(|e| io::Error::other(format!("handshake: {e}")))?;
                    if reply.msg_type != MessageType::Hello {
                        return Err(io::Error::other("handshake: peer did not answer HELLO"));
                    }
                    s.set_read_timeout(Some(Duration::from_millis(100)))?;
                    return Ok(s);
                }
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    /// Forwards replies until the connection ends; returns why it ended.
    fn read_loop(&self, stream: &mut TcpStream) -> String {
        let mut since = Instant::now();
        let outstanding = self.outstanding.clone();
        let timeout = self.cfg.task_timeout;
        let (w, h) = (self.grid.pan_tile_w, self.grid.pan_tile_h);
        loop {
            let mut idle = || {
                if outstanding.load(Ordering::SeqCst) == 0 {
                    since = Instant::now();
                } else if since.elapsed() > timeout {
                    return Err(io::Error::new(io::ErrorKind::TimedOut, "task timed out"));
                }
                Ok(())
            };
            let msg = match read_message(stream, None, &mut idle) {
                Ok(m) => m,
                Err(ReadError::Closed) => return "connection closed".into(),
                Err(e) => return e.to_string(),
            };
            since = Instant::now();
            let event = match msg.msg_type {
                t if t == self.cfg.encoding.result_type() => {
                    match ResultPayload::decode(&msg.payload, self.cfg.encoding, w, h)
                        .and_then(|r| Ok((self.grid.ordinal(r.tile)?, r.bands)))
                    {
                        Ok((tile, bands)) => Event::Done(self.id, tile, bands),
                        Err(e) => return format!("bad result: {e}"),
                    }
                }
                MessageType::Error => match ErrorPayload::decode(&msg.payload) {
                    Ok(ErrorPayload { tile: Some(t), reason }) => match self.grid.ordinal(t) {
                        Ok(tile) => Event::Failed(self.id, tile, reason),
                        Err(e) => return format!("bad error frame: {e}"),
                    },
                    Ok(ErrorPayload { tile: None, reason }) => return reason,
                    Err(e) => return format!("bad error frame: {e}"),
                },
                other => return format!("unexpected {other:?} frame"),
            };
            let _ = self
                .outstanding
                .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1));
            if self.events.send(event).is_err() {
                return "job finished".into();
            }
        }
    }
}

/// Asks the worker at `endpoint` to exit.
pub fn shutdown_worker(endpoint: &str, timeout: Duration) -> Result<()> {
    let mut last = None;
    for addr in endpoint.to_socket_addrs()? {
        match TcpStream::connect_timeout(&addr, timeout) {
            Ok(mut s) => {
                write_message(&mut s, &WireMessage::empty(MessageType::Shutdown))?;
                return Ok(());
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last
        .unwrap_or_else(|| io::Error::new(io::ErrorKind::NotFound, "address did not resolve"))
        .into())
}
