#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use wavefuse::cluster::{run_worker, WorkerExit};
use wavefuse_core::wire::{decode_message, encode_message, MessageType, WireMessage, HEADER_LEN};
use wavefuse_core::{MultibandImage, Plane};

/// Random 8-bit-valued PAN of `w x h` and `bands` MS bands at half size.
pub fn random_scene(w: usize, h: usize, bands: usize, seed: u64) -> (Plane, MultibandImage) {
    let mut rng = StdRng::seed_from_u64(seed);
    let pan = Plane::from_fn(w, h, |_, _| rng.random_range(0..=255u8) as f32);
    let ms = (0..bands)
        .map(|_| Plane::from_fn(w / 2, h / 2, |_, _| rng.random_range(0..=255u8) as f32))
        .collect();
    (pan, MultibandImage::new(ms).unwrap())
}

pub struct Worker {
    pub addr: String,
    pub stop: Arc<AtomicBool>,
    pub handle: JoinHandle<wavefuse::Result<WorkerExit>>,
}

pub fn spawn_worker() -> Worker {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let stop = Arc::new(AtomicBool::new(false));
    let flag = stop.clone();
    let handle = thread::spawn(move || run_worker(listener, &flag));
    Worker { addr, stop, handle }
}

pub fn read_frame(s: &mut TcpStream) -> Option<WireMessage> {
    let mut head = [0u8; HEADER_LEN];
    s.read_exact(&mut head).ok()?;
    let len = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let mut buf = head.to_vec();
    buf.resize(HEADER_LEN + len, 0);
    s.read_exact(&mut buf[HEADER_LEN..]).ok()?;
    Some(decode_message(&buf).ok()?.0)
}

pub fn send(s: &mut TcpStream, msg: &WireMessage) {
    s.write_all(&encode_message(msg)).unwrap();
}

/// What a scripted worker does with each TASK it receives.
#[derive(Clone, Copy)]
pub enum Script {
    /// Drop the connection on the first task.
    DieOnFirstTask,
    /// Answer every task with an ERROR frame.
    AlwaysError,
    /// Handshake, then never answer.
    Silent,
}

/// A misbehaving worker on a background thread. Serves one connection.
pub fn spawn_scripted(script: Script) -> (String, JoinHandle<usize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let handle = thread::spawn(move || {
        let (mut s, _) = listener.accept().unwrap();
        let mut tasks = 0;
        while let Some(msg) = read_frame(&mut s) {
            match msg.msg_type {
                MessageType::Hello => send(&mut s, &msg),
                MessageType::Task | MessageType::TaskExact => {
                    tasks += 1;
                    match script {
                        Script::DieOnFirstTask => {
                            let _ = s.shutdown(Shutdown::Both);
                            return tasks;
                        }
                        Script::AlwaysError => {
                            let tile = wavefuse_core::wire::TaskPayload::peek_tile(&msg.payload);
                            let payload = wavefuse_core::wire::ErrorPayload {
                                tile,
                                reason: "Injected: scripted failure".into(),
                            }
                            .encode();
                            send(&mut s, &WireMessage::new(MessageType::Error, payload));
                        }
                        Script::Silent => {}
                    }
                }
                _ => break,
            }
        }
        tasks
    });
    (addr, handle)
}
