/** Entry point: join the session named in the URL, or show a create form. */

import { SessionApi } from "./api.js";
import { LabelerApp } from "./app.js";

function bootstrap(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? "";
  const sessionId = params.get("session");

  if (!sessionId) {
    renderCreateForm(root, server);
    return;
  }
  const api = new SessionApi(server);
  const app = new LabelerApp({ root, api, sessionId, storage: window.localStorage });
  void app.start().catch((failure) => {
    root.innerHTML = `<div id="error-banner">cannot join session: ${String(failure)}</div>`;
  });
}

function renderCreateForm(root: HTMLElement, server: string): void {
  root.innerHTML = `
    <h1>Start a labeling session</h1>
    <p>Paste a session config (the same JSON document <code>al run</code> takes,
       with one strategy and one seed) and submit.</p>
    <label>server base URL <input id="server-url" value="${server}" placeholder="http://127.0.0.1:8765"></label>
    <textarea id="config-input" rows="16" cols="80" placeholder='{"dataset": {...}, "strategy": {"name": "bt"}, "loop": {...}}'></textarea>
    <button id="create-button">create session</button>
    <div id="error-banner" hidden></div>
  `;
  const button = root.querySelector<HTMLButtonElement>("#create-button");
  button?.addEventListener("click", () => {
    const serverUrl = root.querySelector<HTMLInputElement>("#server-url")?.value ?? "";
    const banner = root.querySelector<HTMLElement>("#error-banner");
    try {
      const config = JSON.parse(
        root.querySelector<HTMLTextAreaElement>("#config-input")?.value ?? "",
      );
      const api = new SessionApi(serverUrl);
      void api
        .createSession(config)
        .then(({ session_id }) => {
          const params = new URLSearchParams({ server: serverUrl, session: session_id });
          window.location.search = params.toString();
        })
        .catch((failure) => {
          if (banner) {
            banner.hidden = false;
            banner.textContent = String(failure);
          }
        });
    } catch (failure) {
      if (banner) {
        banner.hidden = false;
        banner.textContent = `config is not valid JSON: ${String(failure)}`;
      }
    }
  });
}

bootstrap();
