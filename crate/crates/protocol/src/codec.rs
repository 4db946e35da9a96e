//! Length-prefixed JSON framing.
//!
//! A frame on the wire is a 4-byte big-endian payload length followed by a
//! UTF-8 JSON object with a `"type"` tag. Object keys are emitted in
//! alphabetical order, so equal frames always encode to equal bytes. Floats
//! never appear in the JSON: timestamps and coordinates are sent as the
//! decimal rendering of their 64-bit patterns.

use std::io::{self, Read, Write};

use lockstep_core::{InputEvent, MouseButton, PlayerId, Point};
use serde_json::{Map, Value};

use crate::frame::{Frame, FRAME_TYPES};
use crate::FrameError;

/// Largest payload accepted or produced by default: 1 MiB.
pub const MAX_FRAME_LEN: usize = 1 << 20;

pub const LEN_PREFIX: usize = 4;

type Object = Map<String, Value>;

fn obj<const N: usize>(fields: [(&str, Value); N]) -> Object {
    fields.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

fn button_name(b: MouseButton) -> &'static str {
    match b {
        MouseButton::Left => "Left",
        MouseButton::Middle => "Middle",
        MouseButton::Right => "Right",
    }
}

fn event_value(e: &InputEvent) -> Value {
    let point = |kind: &str, at: &Point, button: Option<MouseButton>| {
        let mut o = obj([("type", kind.into()), ("x_bits", at.x.to_bits().into()), ("y_bits", at.y.to_bits().into())]);
        if let Some(b) = button {
            o.insert("button".into(), button_name(b).into());
        }
        o
    };
    let o = match e {
        InputEvent::KeyPress { key } => obj([("type", "KeyPress".into()), ("text", key.as_str().into())]),
        InputEvent::KeyRelease { key } => obj([("type", "KeyRelease".into()), ("text", key.as_str().into())]),
        InputEvent::MousePress { button, at } => point("MousePress", at, Some(*button)),
        InputEvent::MouseRelease { button, at } => point("MouseRelease", at, Some(*button)),
        InputEvent::MouseMovement { at } => point("MouseMovement", at, None),
    };
    Value::Object(o)
}

fn frame_value(f: &Frame) -> Value {
    let mut o = match f {
        Frame::ClientHello { proto_version, game_hash } => {
            obj([("proto_version", (*proto_version).into()), ("game_hash", game_hash.as_str().into())])
        }
        Frame::CreateGame { num_players } => obj([("num_players", (*num_players).into())]),
        Frame::GameCreated { code } | Frame::JoinGame { code } => obj([("code", code.as_str().into())]),
        Frame::Joined { player, joined, total } => {
            obj([("player", player.0.into()), ("joined", (*joined).into()), ("total", (*total).into())])
        }
        Frame::GameStarted { player, num_players, seed } => {
            obj([("player", player.0.into()), ("num_players", (*num_players).into()), ("seed", (*seed).into())])
        }
        Frame::Input { t_bits, event } => obj([("t_bits", (*t_bits).into()), ("event", event_value(event))]),
        Frame::Ping { t_bits } => obj([("t_bits", (*t_bits).into())]),
        Frame::Relayed { t_bits, player, event } => {
            obj([("t_bits", (*t_bits).into()), ("player", player.0.into()), ("event", event_value(event))])
        }
        Frame::RelayedPing { t_bits, player } => obj([("t_bits", (*t_bits).into()), ("player", player.0.into())]),
        Frame::Error { code, detail } => obj([("code", code.as_str().into()), ("detail", detail.as_str().into())]),
    };
    o.insert("type".into(), f.type_name().into());
    Value::Object(o)
}

fn validate(f: &Frame) -> Result<(), FrameError> {
    let event = match f {
        Frame::Input { event, .. } | Frame::Relayed { event, .. } => event,
        _ => return Ok(()),
    };
    if event.is_valid() {
        Ok(())
    } else {
        Err(FrameError::Schema(format!("invalid event {event:?}")))
    }
}

/// The JSON body of a frame, without the length prefix.
pub fn encode_payload(f: &Frame) -> Result<Vec<u8>, FrameError> {
    validate(f)?;
    let bytes = serde_json::to_vec(&frame_value(f)).expect("JSON values always serialize");
    if bytes.len() > MAX_FRAME_LEN {
        return Err(FrameError::TooLarge { len: bytes.len(), cap: MAX_FRAME_LEN });
    }
    Ok(bytes)
}

pub fn encode_frame(f: &Frame) -> Result<Vec<u8>, FrameError> {
    let payload = encode_payload(f)?;
    let mut out = Vec::with_capacity(LEN_PREFIX + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Decode exactly one complete length-prefixed frame.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, FrameError> {
    decode_frame_capped(bytes, MAX_FRAME_LEN)
}

pub fn decode_frame_capped(bytes: &[u8], cap: usize) -> Result<Frame, FrameError> {
    let Some(prefix) = bytes.get(..LEN_PREFIX) else {
        return Err(FrameError::Truncated { expected: LEN_PREFIX, got: bytes.len() });
    };
    let len = u32::from_be_bytes(prefix.try_into().unwrap()) as usize;
    if len > cap {
        return Err(FrameError::TooLarge { len, cap });
    }
    let body = &bytes[LEN_PREFIX..];
    if body.len() < len {
        return Err(FrameError::Truncated { expected: len, got: body.len() });
    }
    if body.len() > len {
        return Err(FrameError::TrailingBytes(body.len() - len));
    }
    decode_payload(body)
}

pub fn decode_payload(payload: &[u8]) -> Result<Frame, FrameError> {
    let text = std::str::from_utf8(payload).map_err(|_| FrameError::Utf8)?;
    let value: Value = serde_json::from_str(text).map_err(|e| FrameError::Json(e.to_string()))?;
    let Value::Object(mut o) = value else {
        return Err(FrameError::Schema("frame is not an object".into()));
    };
    let tag = take_str(&mut o, "type")?;
    if !FRAME_TYPES.contains(&tag.as_str()) {
        return Err(FrameError::UnknownType(tag));
    }
    let frame = match tag.as_str() {
        "ClientHello" => Frame::ClientHello {
            proto_version: take_uint(&mut o, "proto_version")?,
            game_hash: take_str(&mut o, "game_hash")?.parse()?,
        },
        "CreateGame" => Frame::CreateGame { num_players: take_uint(&mut o, "num_players")? },
        "GameCreated" => Frame::GameCreated { code: take_str(&mut o, "code")?.parse()? },
        "JoinGame" => Frame::JoinGame { code: take_str(&mut o, "code")?.parse()? },
        "Joined" => Frame::Joined {
            player: PlayerId(take_uint(&mut o, "player")?),
            joined: take_uint(&mut o, "joined")?,
            total: take_uint(&mut o, "total")?,
        },
        "GameStarted" => Frame::GameStarted {
            player: PlayerId(take_uint(&mut o, "player")?),
            num_players: take_uint(&mut o, "num_players")?,
            seed: take_uint(&mut o, "seed")?,
        },
        "Input" => Frame::Input { t_bits: take_uint(&mut o, "t_bits")?, event: take_event(&mut o)? },
        "Ping" => Frame::Ping { t_bits: take_uint(&mut o, "t_bits")? },
        "Relayed" => Frame::Relayed {
            t_bits: take_uint(&mut o, "t_bits")?,
            player: PlayerId(take_uint(&mut o, "player")?),
            event: take_event(&mut o)?,
        },
        "RelayedPing" => {
            Frame::RelayedPing { t_bits: take_uint(&mut o, "t_bits")?, player: PlayerId(take_uint(&mut o, "player")?) }
        }
        "Error" => Frame::Error { code: take_str(&mut o, "code")?.parse()?, detail: take_str(&mut o, "detail")? },
        _ => unreachable!("tag checked against FRAME_TYPES"),
    };
    no_extra_fields(&o, &tag)?;
    validate(&frame)?;
    Ok(frame)
}

fn no_extra_fields(o: &Object, ctx: &str) -> Result<(), FrameError> {
    match o.keys().next() {
        Some(k) => Err(FrameError::Schema(format!("unexpected field {k:?} in {ctx}"))),
        None => Ok(()),
    }
}

fn take(o: &mut Object, key: &str) -> Result<Value, FrameError> {
    o.remove(key).ok_or_else(|| FrameError::Schema(format!("missing field {key:?}")))
}

fn take_str(o: &mut Object, key: &str) -> Result<String, FrameError> {
    match take(o, key)? {
        Value::String(s) => Ok(s),
        v => Err(FrameError::Schema(format!("field {key:?} must be a string, got {v}"))),
    }
}

fn take_uint<T: TryFrom<u64>>(o: &mut Object, key: &str) -> Result<T, FrameError> {
    let v = take(o, key)?;
    v.as_u64()
        .and_then(|n| T::try_from(n).ok())
        .ok_or_else(|| FrameError::Schema(format!("field {key:?} out of range: {v}")))
}

fn take_event(o: &mut Object) -> Result<InputEvent, FrameError> {
    let Value::Object(mut e) = take(o, "event")? else {
        return Err(FrameError::Schema("event must be an object".into()));
    };
    let kind = take_str(&mut e, "type")?;
    let point = |e: &mut Object| -> Result<Point, FrameError> {
        Ok(Point::new(f64::from_bits(take_uint(e, "x_bits")?), f64::from_bits(take_uint(e, "y_bits")?)))
    };
    let button = |e: &mut Object| -> Result<MouseButton, FrameError> {
        match take_str(e, "button")?.as_str() {
            "Left" => Ok(MouseButton::Left),
            "Middle" => Ok(MouseButton::Middle),
            "Right" => Ok(MouseButton::Right),
            other => Err(FrameError::Schema(format!("unknown button {other:?}"))),
        }
    };
    let event = match kind.as_str() {
        "KeyPress" => InputEvent::KeyPress { key: take_str(&mut e, "text")? },
        "KeyRelease" => InputEvent::KeyRelease { key: take_str(&mut e, "text")? },
        "MousePress" => InputEvent::MousePress { button: button(&mut e)?, at: point(&mut e)? },
        "MouseRelease" => InputEvent::MouseRelease { button: button(&mut e)?, at: point(&mut e)? },
        "MouseMovement" => InputEvent::MouseMovement { at: point(&mut e)? },
        other => return Err(FrameError::Schema(format!("unknown event type {other:?}"))),
    };
    no_extra_fields(&e, "event")?;
    Ok(event)
}

/// Blocking read of one frame from a byte stream.
pub fn read_frame<R: Read>(r: &mut R, cap: usize) -> Result<Frame, FrameError> {
    let mut prefix = [0u8; LEN_PREFIX];
    r.read_exact(&mut prefix)?;
    let len = u32::from_be_bytes(prefix) as usize;
    if len > cap {
        return Err(FrameError::TooLarge { len, cap });
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)?;
    decode_payload(&body)
}

pub fn write_frame<W: Write>(w: &mut W, f: &Frame) -> Result<(), FrameError> {
    let bytes = encode_frame(f)?;
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

impl From<io::Error> for FrameError {
    fn from(e: io::Error) -> Self {
        match e.kind() {
            io::ErrorKind::UnexpectedEof => FrameError::Closed,
            _ => FrameError::Io(e.to_string()),
        }
    }
}
