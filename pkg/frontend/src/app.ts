/**
 * Browser entry point: WebSocket wiring, canvas blitting, HUD.
 *
 * Configuration comes from URL query parameters:
 *   ?server=ws://localhost:7777&name=alice&scale=2
 * With no server parameter the page connects back to its own origin (the
 * game server can host this page directly via --static-dir).
 */

import { actionFromKeys, KeyTracker } from "./input.js";
import { Minimap, Sighting } from "./minimap.js";
import { Banner, ClientSession, JoinedMessage, TickMessage } from "./protocol.js";
import { PixelBuffer, renderView } from "./renderer.js";

function requireElement<T extends Element>(selector: string): T {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as T;
}

function blit(canvas: HTMLCanvasElement, buffer: PixelBuffer, scale: number): void {
  canvas.width = buffer.width;
  canvas.height = buffer.height;
  canvas.style.width = `${buffer.width * scale}px`;
  canvas.style.height = `${buffer.height * scale}px`;
  const ctx = canvas.getContext("2d")!;
  const image = ctx.createImageData(buffer.width, buffer.height);
  for (let i = 0, j = 0; i < buffer.data.length; i += 3, j += 4) {
    image.data[j] = buffer.data[i];
    image.data[j + 1] = buffer.data[i + 1];
    image.data[j + 2] = buffer.data[i + 2];
    image.data[j + 3] = 255;
  }
  ctx.putImageData(image, 0, 0);
}

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const defaultWs = `${window.location.protocol === "https:" ? "wss" : "ws"}://${window.location.host}`;
  const serverUrl = params.get("server") ?? defaultWs;
  const name = params.get("name") ?? "player";
  const scale = Number(params.get("scale") ?? "2");

  const viewCanvas = requireElement<HTMLCanvasElement>("#view");
  const mapCanvas = requireElement<HTMLCanvasElement>("#minimap");
  const bannerEl = requireElement<HTMLDivElement>("#banner");
  const overlayEl = requireElement<HTMLDivElement>("#overlay");
  const feedEl = requireElement<HTMLUListElement>("#killfeed");
  const statusEl = requireElement<HTMLDivElement>("#status");

  const keys = new KeyTracker();
  window.addEventListener("keydown", (e) => {
    keys.down(e.code);
    if (["ArrowLeft", "ArrowRight", "Space"].includes(e.code)) e.preventDefault();
  });
  window.addEventListener("keyup", (e) => keys.up(e.code));
  window.addEventListener("blur", () => keys.clear());

  const socket = new WebSocket(serverUrl);
  let joined: JoinedMessage | null = null;
  let minimap: Minimap | null = null;
  const sightings = new Map<string, Sighting>();
  const feed: string[] = [];

  function showBanner(banner: Banner): void {
    const text = {
      none: "",
      connecting: "connecting…",
      full: "server full",
      version: "protocol version mismatch",
      error: "error",
      closed: "disconnected",
    }[banner.kind];
    const detail = "detail" in banner ? `: ${banner.detail}` : "";
    bannerEl.textContent = text + detail;
    bannerEl.style.display = banner.kind === "none" ? "none" : "block";
  }

  function onTick(msg: TickMessage): void {
    if (!joined || !minimap) return;
    if (msg.status === "active") {
      overlayEl.style.display = "none";
      blit(viewCanvas, renderView(msg, joined.view, joined.view.width, joined.view.height), scale);
    } else {
      const remaining = msg.respawn_tick === null ? 0 : msg.respawn_tick - msg.tick;
      overlayEl.textContent = `you died — respawn in ${(remaining / joined.tick_rate).toFixed(1)}s`;
      overlayEl.style.display = "flex";
    }
    for (const sprite of msg.sprites) {
      // Rough world-position memory for the minimap: project the sighting
      // along the bearing at its reported distance.
      const bearing = joined.view.fov * (0.5 - sprite.screen_column / joined.view.columns);
      const ang = msg.pose.theta + bearing;
      sightings.set(sprite.player_id, {
        playerId: sprite.player_id,
        x: msg.pose.x + sprite.distance * Math.cos(ang),
        y: msg.pose.y + sprite.distance * Math.sin(ang),
        tick: msg.tick,
      });
    }
    for (const [pid, sighting] of [...sightings]) {
      if (msg.tick - sighting.tick > 5 * joined.tick_rate) sightings.delete(pid);
    }
    blit(mapCanvas, minimap.render(session.playerId, msg, [...sightings.values()]), 1);
    statusEl.textContent = `${session.playerId} | tick ${msg.tick} | ${msg.snapshot_hash}`;
  }

  const session = new ClientSession(
    (doc) => socket.send(JSON.stringify(doc)),
    () => actionFromKeys(keys.snapshot()),
    {
      onBanner: showBanner,
      onJoined: (msg) => {
        joined = msg;
        minimap = new Minimap(msg.map);
      },
      onTick,
      onEvent: (event, tick) => {
        if (event.event === "killed") {
          feed.unshift(`tick ${tick}: ${event.killer} killed ${event.victim}`);
          feed.splice(6);
          feedEl.innerHTML = feed.map((line) => `<li>${line}</li>`).join("");
        }
      },
    },
  );
  showBanner(session.banner);

  socket.addEventListener("open", () => session.join(name));
  socket.addEventListener("message", (event) => session.handleMessage(String(event.data)));
  socket.addEventListener("close", () => session.handleDisconnect());
  socket.addEventListener("error", () => session.handleDisconnect());
}

main();
