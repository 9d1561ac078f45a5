/** Bootstrap: wire the API client, controller, widgets, and hash router. */

import { ApiClient, CreateSessionRequest, MindMode, RoleName, TaskKind, resolveApiBase } from "./api.js";
import { GameController } from "./controller.js";
import { DealBuilder } from "./deal.js";
import { RatingForm } from "./rating.js";
import { parseHash, sessionHash } from "./router.js";
import { SelectionForm } from "./selection.js";
import { Handlers, UiWidgets, render } from "./ui.js";

const STORAGE_KEY = "commonground.api";

function apiBase(): string {
  let stored: string | null = null;
  try {
    stored = localStorage.getItem(STORAGE_KEY);
  } catch {
    // storage can be unavailable (private mode); fall through
  }
  const base = resolveApiBase({
    query: location.search,
    injected: (window as unknown as Record<string, unknown>)["COMMONGROUND_API"],
    stored,
    origin: location.origin,
  });
  try {
    const fromQuery = new URLSearchParams(location.search).get("api");
    if (fromQuery) localStorage.setItem(STORAGE_KEY, base);
  } catch {
    // best effort only
  }
  return base;
}

function main(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");

  const client = new ApiClient(apiBase());
  const controller = new GameController(client);
  const widgets: UiWidgets = {
    chatDraft: "",
    selection: null,
    deal: new DealBuilder(),
    rating: null,
  };

  let widgetSession: string | null = null;
  const syncWidgets = () => {
    const view = controller.state.view;
    if (!view) {
      widgetSession = null;
      widgets.selection = null;
      widgets.rating = null;
      widgets.chatDraft = "";
      widgets.deal = new DealBuilder();
      return;
    }
    if (view.session_id !== widgetSession) {
      widgetSession = view.session_id;
      widgets.chatDraft = "";
      widgets.deal = new DealBuilder();
      widgets.selection = view.schema ? new SelectionForm(view.schema) : null;
      widgets.rating = new RatingForm(view.rating_dimensions);
    } else if (view.schema && !widgets.selection) {
      widgets.selection = new SelectionForm(view.schema);
    }
  };

  const syncHash = () => {
    const view = controller.state.view;
    const wanted = view && controller.state.screen === "session"
      ? sessionHash(view.session_id)
      : "";
    if (location.hash !== wanted) {
      history.replaceState(null, "", location.pathname + location.search + wanted);
    }
  };

  const handlers: Handlers = {
    startGame(form: HTMLFormElement) {
      const data = new FormData(form);
      const req: CreateSessionRequest = {
        task: String(data.get("task")) as TaskKind,
        mind_mode: String(data.get("mind_mode")) as MindMode,
        human_role: String(data.get("human_role")) as RoleName,
      };
      const seed = String(data.get("scenario_seed") ?? "").trim();
      if (seed !== "") req.scenario_seed = Number(seed);
      void controller.create(req);
    },
    sendChat() {
      const text = widgets.chatDraft;
      widgets.chatDraft = "";
      void controller.send(text);
    },
    setChatDraft(text: string) {
      widgets.chatDraft = text;
      rerender();
    },
    submitSelection() {
      if (widgets.selection?.isComplete()) {
        void controller.select(widgets.selection.toValues());
      }
    },
    submitProposal() {
      void controller.propose(widgets.deal.toPayload());
    },
    submitDecision(accept: boolean) {
      void controller.decide(accept);
    },
    submitRating() {
      if (widgets.rating) void controller.rate(widgets.rating.toPayload());
    },
    newGame() {
      controller.toLobby();
    },
    rerender() {
      rerender();
    },
  };

  const rerender = () => {
    syncWidgets();
    render(root, controller, widgets, handlers);
  };

  controller.onChange(() => {
    syncHash();
    rerender();
  });

  const route = () => {
    const { sessionId } = parseHash(location.hash);
    const current = controller.state.view?.session_id ?? null;
    if (sessionId && sessionId !== current) {
      void controller.resume(sessionId);
    } else if (!sessionId && controller.state.screen !== "lobby") {
      controller.toLobby();
    } else {
      rerender();
    }
  };

  window.addEventListener("hashchange", route);
  route();
}

main();
