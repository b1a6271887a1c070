//! TCP endpoints for the interactive protocol.

use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sdzkp::analysis::{CheatTarget, CheatingProver};
use sdzkp::protocol::{HonestProver, RoundProver};
use sdzkp::sdpinst::{SdpInstance, Witness};
use sdzkp::session::{run_prover_session, run_verifier_session};

use crate::{emit, Verdict};

pub enum ProverKind {
    Honest(Witness),
    Cheating(CheatTarget),
}

fn configure(stream: &TcpStream, timeout_ms: u64) -> Result<()> {
    let timeout = (timeout_ms > 0).then(|| Duration::from_millis(timeout_ms));
    stream.set_read_timeout(timeout)?;
    stream.set_write_timeout(timeout)?;
    stream.set_nodelay(true)?;
    Ok(())
}

pub fn run_prover(
    inst: &SdpInstance,
    kind: ProverKind,
    endpoint: &str,
    rounds: usize,
    timeout_ms: u64,
    rng: ChaCha20Rng,
) -> Result<Verdict> {
    if rounds == 0 {
        return Err(anyhow!("--rounds must be at least 1"));
    }
    // Refuse to start before touching the network.
    let mut prover: Box<dyn RoundProver + '_> = match &kind {
        ProverKind::Honest(wit) => {
            Box::new(HonestProver::new(inst, wit, rng).context("witness does not fit instance")?)
        }
        ProverKind::Cheating(target) => Box::new(CheatingProver::new(inst, *target, rng)),
    };
    let addr = endpoint
        .to_socket_addrs()
        .with_context(|| format!("resolving {endpoint}"))?
        .next()
        .ok_or_else(|| anyhow!("no address for {endpoint}"))?;
    let stream = match timeout_ms {
        0 => TcpStream::connect(addr),
        ms => TcpStream::connect_timeout(&addr, Duration::from_millis(ms)),
    }
    .with_context(|| format!("connecting to {addr}"))?;
    configure(&stream, timeout_ms)?;
    let mut stream = stream;
    match run_prover_session(prover.as_mut(), rounds, &mut stream) {
        Ok(v) => Ok(Verdict::from_bool(v)),
        Err(e) => {
            eprintln!("session error: {e}");
            Ok(Verdict::Reject)
        }
    }
}

fn verifier_session(
    inst: &SdpInstance,
    stream: TcpStream,
    rounds: usize,
    timeout_ms: u64,
    rng: &mut ChaCha20Rng,
) -> bool {
    let peer = stream
        .peer_addr()
        .map(|a| a.to_string())
        .unwrap_or_else(|_| "?".into());
    if let Err(e) = configure(&stream, timeout_ms) {
        eprintln!("{peer}: {e}");
        return false;
    }
    let mut stream = stream;
    match run_verifier_session(inst, rounds, &mut stream, rng) {
        Ok(v) => {
            log::info!("{peer}: {}", if v { "accepted" } else { "rejected" });
            v
        }
        Err(e) => {
            eprintln!("{peer}: session error: {e}");
            false
        }
    }
}

/// Serves `sessions` connections (0 = unbounded), one thread each. The
/// verdict is Accept iff every session accepted.
pub fn serve_verifier(
    inst: SdpInstance,
    listen: &str,
    rounds: usize,
    timeout_ms: u64,
    sessions: usize,
    seed: Option<u64>,
) -> Result<Verdict> {
    if rounds == 0 {
        return Err(anyhow!("--rounds must be at least 1"));
    }
    let listener = TcpListener::bind(listen).with_context(|| format!("binding {listen}"))?;
    emit(&format!("LISTENING {}", listener.local_addr()?))?;
    let inst = Arc::new(inst);
    let mut handles = Vec::new();
    for (i, conn) in listener.incoming().enumerate() {
        let stream = match conn {
            Ok(s) => s,
            Err(e) => {
                eprintln!("accept failed: {e}");
                continue;
            }
        };
        let inst = Arc::clone(&inst);
        let mut rng = match seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s.wrapping_add(i as u64)),
            None => ChaCha20Rng::from_entropy(),
        };
        let handle = thread::spawn(move || {
            let ok = verifier_session(&inst, stream, rounds, timeout_ms, &mut rng);
            let _ = emit(if ok { "ACCEPT" } else { "REJECT" });
            ok
        });
        if sessions == 0 {
            continue;
        }
        handles.push(handle);
        if handles.len() >= sessions {
            break;
        }
    }
    let mut all = true;
    for h in handles {
        all &= h.join().unwrap_or(false);
    }
    Ok(Verdict::from_bool(all))
}
