"""Minimal RFC 6455 WebSocket support for browser clients.

The game server speaks newline-delimited JSON over raw TCP; browsers cannot
open raw sockets, so the same listener also accepts an HTTP upgrade and then
carries one JSON document per text frame. Only what the web client needs is
implemented: text/close/ping frames, client-masked payloads, no extensions.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def parse_http_request(raw: bytes) -> tuple[str, str, dict[str, str]]:
    """(method, path, lower-cased headers) of an HTTP/1.1 request head."""
    head = raw.split(b"\r\n\r\n", 1)[0].decode("latin-1")
    lines = head.split("\r\n")
    method, path, _ = lines[0].split(" ", 2)
    headers: dict[str, str] = {}
    for line in lines[1:]:
        if ":" in line:
            name, value = line.split(":", 1)
            headers[name.strip().lower()] = value.strip()
    return method, path, headers


def handshake_response(headers: dict[str, str]) -> bytes:
    key = headers.get("sec-websocket-key", "")
    return (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept_key(key)}\r\n"
        "\r\n"
    ).encode("ascii")


def encode_frame(opcode: int, payload: bytes) -> bytes:
    header = bytearray([0x80 | opcode])
    n = len(payload)
    if n < 126:
        header.append(n)
    elif n < 1 << 16:
        header.append(126)
        header += n.to_bytes(2, "big")
    else:
        header.append(127)
        header += n.to_bytes(8, "big")
    return bytes(header) + payload


def encode_text(text: str) -> bytes:
    return encode_frame(OP_TEXT, text.encode("utf-8"))


async def read_frame(reader: asyncio.StreamReader) -> tuple[int, bytes]:
    """One frame as (opcode, unmasked payload); EOF raises IncompleteReadError."""
    first = await reader.readexactly(2)
    opcode = first[0] & 0x0F
    masked = bool(first[1] & 0x80)
    length = first[1] & 0x7F
    if length == 126:
        length = int.from_bytes(await reader.readexactly(2), "big")
    elif length == 127:
        length = int.from_bytes(await reader.readexactly(8), "big")
    mask = await reader.readexactly(4) if masked else b""
    payload = await reader.readexactly(length) if length else b""
    if masked and payload:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return opcode, payload


async def read_text_message(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> str | None:
    """Next text message, answering pings; None once the peer closes."""
    while True:
        try:
            opcode, payload = await read_frame(reader)
        except (asyncio.IncompleteReadError, ConnectionError):
            return None
        if opcode == OP_TEXT:
            return payload.decode("utf-8")
        if opcode == OP_PING:
            writer.write(encode_frame(OP_PONG, payload))
        elif opcode == OP_CLOSE:
            try:
                writer.write(encode_frame(OP_CLOSE, b""))
            except ConnectionError:
                pass
            return None
        # Other opcodes (pong, continuation) are ignored.
