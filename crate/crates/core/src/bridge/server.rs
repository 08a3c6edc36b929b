//! Websocket server at `/ws`.
//!
//! A single simulation task ticks at the control rate, applies queued
//! commands at tick boundaries and hands each serialized frame to every
//! client's bounded outbound queue. A client whose queue is full is dropped;
//! the tick loop never waits on the network.

use std::future::Future;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::serve::ListenerExt;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use log::{debug, info, warn};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot, Notify};
use tokio::time::MissedTickBehavior;

use super::protocol::{parse_command, Command, Envelope, MessageKind, Nack};
use super::session::LiveSession;

#[derive(Debug, Clone)]
pub struct BridgeConfig {
    /// Frames buffered per client before it is dropped.
    pub client_backlog: usize,
    /// Kernel send buffer per connection (bytes); keeps stalled clients from
    /// hiding behind large socket buffers.
    pub send_buffer: Option<usize>,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        BridgeConfig {
            client_backlog: 50,
            send_buffer: Some(16 * 1024),
        }
    }
}

struct Client {
    id: u64,
    frames: mpsc::Sender<Utf8Bytes>,
    kill: Arc<Notify>,
}

struct PendingCommand {
    seq: u64,
    cmd: Command,
    reply: oneshot::Sender<Utf8Bytes>,
}

struct Hub {
    clients: Mutex<Vec<Client>>,
    next_id: Mutex<u64>,
    hello: Mutex<Utf8Bytes>,
    commands: mpsc::UnboundedSender<PendingCommand>,
    backlog: usize,
}

impl Hub {
    /// Hands `frame` to every client; clients with a full queue are dropped.
    fn broadcast(&self, frame: Utf8Bytes) {
        let mut clients = self.clients.lock().expect("client list lock");
        clients.retain(|c| match c.frames.try_send(frame.clone()) {
            Ok(()) => true,
            Err(mpsc::error::TrySendError::Full(_)) => {
                warn!("client {} fell {} frames behind, dropping it", c.id, self.backlog);
                c.kill.notify_one();
                false
            }
            Err(mpsc::error::TrySendError::Closed(_)) => false,
        });
    }

    fn client_count(&self) -> usize {
        self.clients.lock().expect("client list lock").len()
    }
}

/// Serves `session` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    session: LiveSession,
    config: BridgeConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let (cmd_tx, cmd_rx) = mpsc::unbounded_channel();
    let hub = Arc::new(Hub {
        clients: Mutex::new(Vec::new()),
        next_id: Mutex::new(0),
        hello: Mutex::new(hello_message(&session)),
        commands: cmd_tx,
        backlog: config.client_backlog,
    });

    let sim_task = tokio::spawn(run_session(session, hub.clone(), cmd_rx));

    let app = Router::new().route("/ws", get(ws_handler)).with_state(hub);
    let send_buffer = config.send_buffer;
    let listener = listener.tap_io(move |tcp| {
        let _ = tcp.set_nodelay(true);
        if let Some(size) = send_buffer {
            if let Err(e) = socket2::SockRef::from(&*tcp).set_send_buffer_size(size) {
                debug!("could not shrink send buffer: {e}");
            }
        }
    });
    let result = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;
    sim_task.abort();
    info!("bridge stopped");
    result
}

fn hello_message(session: &LiveSession) -> Utf8Bytes {
    Envelope::new(MessageKind::Hello, 0, &session.hello()).to_json().into()
}

async fn run_session(mut session: LiveSession, hub: Arc<Hub>, mut commands: mpsc::UnboundedReceiver<PendingCommand>) {
    let dt = session.simulation().params().dt;
    let mut interval = tokio::time::interval(Duration::from_secs_f64(dt));
    interval.set_missed_tick_behavior(MissedTickBehavior::Skip);
    loop {
        interval.tick().await;
        let mut hello_stale = false;
        while let Ok(pending) = commands.try_recv() {
            let reply = match session.apply(&pending.cmd) {
                Ok(ack) => {
                    hello_stale = true;
                    Envelope::new(MessageKind::Ack, pending.seq, &ack)
                }
                Err(reason) => Envelope::new(
                    MessageKind::Nack,
                    pending.seq,
                    &Nack {
                        cmd: Some(pending.cmd.name().to_string()),
                        reason,
                    },
                ),
            };
            let _ = pending.reply.send(reply.to_json().into());
        }
        if hello_stale {
            *hub.hello.lock().expect("hello lock") = hello_message(&session);
        }
        if let Some(frame) = session.tick() {
            let text: Utf8Bytes = Envelope::new(MessageKind::Frame, frame.tick, &frame).to_json().into();
            hub.broadcast(text);
        }
    }
}

async fn ws_handler(ws: WebSocketUpgrade, State(hub): State<Arc<Hub>>) -> Response {
    ws.on_upgrade(move |socket| handle_client(socket, hub))
}

async fn handle_client(socket: WebSocket, hub: Arc<Hub>) {
    let id = {
        let mut next = hub.next_id.lock().expect("id lock");
        *next += 1;
        *next
    };
    let (frame_tx, mut frame_rx) = mpsc::channel::<Utf8Bytes>(hub.backlog);
    let (reply_tx, mut reply_rx) = mpsc::unbounded_channel::<Utf8Bytes>();
    let kill = Arc::new(Notify::new());
    let hello = hub.hello.lock().expect("hello lock").clone();
    hub.clients.lock().expect("client list lock").push(Client {
        id,
        frames: frame_tx,
        kill: kill.clone(),
    });
    info!("client {id} connected ({} total)", hub.client_count());

    let (mut sink, mut stream) = socket.split();

    let writer = async move {
        if sink.send(Message::Text(hello)).await.is_err() {
            return;
        }
        loop {
            let text = tokio::select! {
                biased;
                Some(reply) = reply_rx.recv() => reply,
                Some(frame) = frame_rx.recv() => frame,
                else => break,
            };
            if sink.send(Message::Text(text)).await.is_err() {
                break;
            }
        }
    };

    let commands = hub.commands.clone();
    let reader = async move {
        while let Some(Ok(msg)) = stream.next().await {
            let text = match msg {
                Message::Text(text) => text,
                Message::Close(_) => break,
                _ => continue,
            };
            let reply = match parse_command(&text) {
                Ok((seq, cmd)) => {
                    let (tx, rx) = oneshot::channel();
                    if commands.send(PendingCommand { seq, cmd, reply: tx }).is_err() {
                        break;
                    }
                    match rx.await {
                        Ok(reply) => reply,
                        Err(_) => break,
                    }
                }
                Err((seq, reason)) => Envelope::new(MessageKind::Nack, seq, &Nack { cmd: None, reason })
                    .to_json()
                    .into(),
            };
            if reply_tx.send(reply).is_err() {
                break;
            }
        }
    };

    tokio::select! {
        _ = writer => {}
        _ = reader => {}
        _ = kill.notified() => {}
    }
    hub.clients.lock().expect("client list lock").retain(|c| c.id != id);
    info!("client {id} disconnected");
}
