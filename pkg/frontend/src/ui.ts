/** DOM layer: renders the whole app from controller state on every change.
 *
 * Widget models (chat draft, selection, deal split, ratings) live in UiWidgets
 * owned by main.ts so their values survive rerenders. All rule checks the
 * widgets perform are conveniences; the service re-validates everything.
 */

import { FriendsKnowledge, Knowledge, SessionView, ValuesKnowledge } from "./api.js";
import { GameController } from "./controller.js";
import { DealBuilder, ITEM_TOTAL, ITEMS } from "./deal.js";
import { agentName, outcomeSummary, phaseHint, taskTitle } from "./format.js";
import { RATING_MAX, RATING_MIN, RatingForm } from "./rating.js";
import { optionsForColumn, SelectionForm } from "./selection.js";

export interface UiWidgets {
  chatDraft: string;
  selection: SelectionForm | null;
  deal: DealBuilder;
  rating: RatingForm | null;
}

export interface Handlers {
  startGame(form: HTMLFormElement): void;
  sendChat(): void;
  setChatDraft(text: string): void;
  submitSelection(): void;
  submitProposal(): void;
  submitDecision(accept: boolean): void;
  submitRating(): void;
  newGame(): void;
  rerender(): void;
}

type Child = Node | string | null | undefined;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | boolean | ((event: Event) => void)> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key, value);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
      (node as unknown as Record<string, unknown>)[key] = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(child);
  }
  return node;
}

function knowledgePanel(knowledge: Knowledge, title: string): HTMLElement {
  const panel = el("section", { class: "panel knowledge" }, el("h2", {}, title));
  if (knowledge.kind === "friends") {
    panel.append(friendsTable(knowledge));
  } else {
    panel.append(valuesTable(knowledge));
  }
  return panel;
}

function friendsTable(knowledge: FriendsKnowledge): HTMLElement {
  const head = el("tr", {}, ...knowledge.schema.map((name) => el("th", {}, name)));
  const body = knowledge.rows.map((row) =>
    el("tr", {}, ...row.map((value) => el("td", {}, value))),
  );
  return el("table", { class: "cards" }, el("thead", {}, head), el("tbody", {}, ...body));
}

function valuesTable(knowledge: ValuesKnowledge): HTMLElement {
  const head = el(
    "tr",
    {},
    el("th", {}, "item"),
    el("th", {}, "priority"),
    el("th", {}, "why"),
  );
  const body = knowledge.rows.map((row) =>
    el(
      "tr",
      {},
      el("td", {}, row.item),
      el("td", { class: `level-${row.level}` }, row.level),
      el("td", {}, row.reason),
    ),
  );
  return el("table", { class: "cards" }, el("thead", {}, head), el("tbody", {}, ...body));
}

function transcriptPanel(
  view: SessionView,
  waiting: boolean,
): HTMLElement {
  const entries = view.transcript.map((entry) => {
    const mine = entry.speaker === view.human_role;
    const name = mine ? "You" : view.display_names[entry.speaker] ?? entry.speaker;
    return el(
      "div",
      { class: mine ? "utterance mine" : "utterance" },
      el("span", { class: "speaker" }, name),
      el("span", { class: "text" }, entry.text),
    );
  });
  const log = el("div", { class: "log" }, ...entries);
  if (waiting || view.pending_reply) {
    log.append(el("div", { class: "utterance typing" }, `${agentName(view)} is typing...`));
  }
  return log;
}

function chatForm(
  controller: GameController,
  widgets: UiWidgets,
  handlers: Handlers,
): HTMLElement {
  const input = el("input", {
    type: "text",
    id: "chat-input",
    placeholder: "Say something...",
    value: "",
    autocomplete: "off",
    input: (event) => handlers.setChatDraft((event.target as HTMLInputElement).value),
  });
  input.value = widgets.chatDraft;
  input.disabled = !controller.canChat();
  const send = el(
    "button",
    {
      type: "submit",
      class: "primary",
    },
    "Send",
  );
  send.disabled = !controller.canChat() || widgets.chatDraft.trim() === "";
  return el(
    "form",
    {
      class: "chat-form",
      submit: (event) => {
        event.preventDefault();
        handlers.sendChat();
      },
    },
    input,
    send,
  );
}

function selectionPanel(
  controller: GameController,
  view: SessionView,
  widgets: UiWidgets,
  handlers: Handlers,
): HTMLElement {
  const form = widgets.selection;
  const panel = el(
    "section",
    { class: "panel action" },
    el("h2", {}, "Commit: who is the mutual friend?"),
  );
  if (!form) return panel;
  const rows = view.your_knowledge.kind === "friends" ? view.your_knowledge.rows : [];
  const fields = form.schema.map((attr, column) => {
    const listId = `options-${attr}`;
    const options = optionsForColumn(rows, column);
    const datalist = el(
      "datalist",
      { id: listId },
      ...options.map((value) => el("option", { value })),
    );
    const input = el("input", {
      type: "text",
      list: listId,
      id: `select-${attr}`,
      placeholder: attr,
      autocomplete: "off",
      input: (event) => {
        form.set(attr, (event.target as HTMLInputElement).value);
        handlers.rerender();
      },
    });
    input.value = form.value(attr);
    input.disabled = !controller.canSelect();
    return el("label", { class: "field" }, attr, input, datalist);
  });
  const submit = el(
    "button",
    {
      type: "button",
      class: "primary",
      id: "commit-selection",
      click: () => handlers.submitSelection(),
    },
    "Commit guess",
  );
  submit.disabled = !controller.canSelect() || !form.isComplete();
  panel.append(
    el("p", { class: "hint" }, "Every attribute is required; there is no way to answer \"unknown\"."),
    el("div", { class: "fields" }, ...fields),
    submit,
  );
  return panel;
}

function stepper(
  controller: GameController,
  widgets: UiWidgets,
  handlers: Handlers,
  item: (typeof ITEMS)[number],
): HTMLElement {
  const deal = widgets.deal;
  const minus = el(
    "button",
    { type: "button", class: "step", click: () => { deal.decrement(item); handlers.rerender(); } },
    "-",
  );
  minus.disabled = !controller.canPropose() || deal.yours(item) === 0;
  const plus = el(
    "button",
    { type: "button", class: "step", click: () => { deal.increment(item); handlers.rerender(); } },
    "+",
  );
  plus.disabled = !controller.canPropose() || deal.yours(item) === ITEM_TOTAL;
  return el(
    "div",
    { class: "stepper-row" },
    el("span", { class: "item" }, item),
    minus,
    el("span", { class: "count", id: `deal-${item}` }, String(deal.yours(item))),
    plus,
    el("span", { class: "theirs" }, `they get ${deal.theirs(item)}`),
  );
}

function proposalPanel(
  controller: GameController,
  widgets: UiWidgets,
  handlers: Handlers,
): HTMLElement {
  const submit = el(
    "button",
    {
      type: "button",
      class: "primary",
      id: "send-proposal",
      click: () => handlers.submitProposal(),
    },
    "Propose this split",
  );
  submit.disabled = !controller.canPropose() || !widgets.deal.isComplete();
  return el(
    "section",
    { class: "panel action" },
    el("h2", {}, "Offer a final split"),
    el(
      "p",
      { class: "hint" },
      `Each item has exactly ${ITEM_TOTAL} units; whatever you keep, the other side gets.`,
    ),
    ...ITEMS.map((item) => stepper(controller, widgets, handlers, item)),
    el(
      "p",
      { class: "totals" },
      `You keep ${widgets.deal.yourTotal()} units; they get ${widgets.deal.theirTotal()}.`,
    ),
    submit,
  );
}

function decisionPanel(
  controller: GameController,
  view: SessionView,
  handlers: Handlers,
): HTMLElement {
  const proposal = view.pending_proposal;
  const panel = el(
    "section",
    { class: "panel action" },
    el("h2", {}, `${agentName(view)}'s offer`),
  );
  if (!proposal) return panel;
  const rows = ITEMS.map((item, index) =>
    el(
      "tr",
      {},
      el("td", {}, item),
      el("td", {}, String(proposal.your_counts[index] ?? 0)),
      el("td", {}, String(proposal.their_counts[index] ?? 0)),
    ),
  );
  const accept = el(
    "button",
    { type: "button", class: "primary", id: "accept-offer", click: () => handlers.submitDecision(true) },
    "Accept",
  );
  const reject = el(
    "button",
    { type: "button", class: "danger", id: "reject-offer", click: () => handlers.submitDecision(false) },
    "Reject",
  );
  accept.disabled = reject.disabled = !controller.canDecide();
  panel.append(
    el(
      "table",
      { class: "cards" },
      el(
        "thead",
        {},
        el("tr", {}, el("th", {}, "item"), el("th", {}, "you get"), el("th", {}, "they get")),
      ),
      el("tbody", {}, ...rows),
    ),
    el("div", { class: "decision-buttons" }, accept, reject),
  );
  return panel;
}

function ratingPanel(
  controller: GameController,
  widgets: UiWidgets,
  handlers: Handlers,
): HTMLElement {
  const form = widgets.rating;
  const panel = el(
    "section",
    { class: "panel action" },
    el("h2", {}, "Rate the conversation"),
  );
  if (!form) return panel;
  const sliders = form.dimensions.map((dim) => {
    const slider = el("input", {
      type: "range",
      min: String(RATING_MIN),
      max: String(RATING_MAX),
      step: "1",
      id: `rating-${dim}`,
      input: (event) => {
        form.set(dim, Number((event.target as HTMLInputElement).value));
        handlers.rerender();
      },
    });
    slider.value = String(form.value(dim));
    slider.disabled = !controller.canRate();
    return el(
      "label",
      { class: "field" },
      `${dim}: ${form.value(dim)}`,
      slider,
    );
  });
  const submit = el(
    "button",
    { type: "button", class: "primary", id: "submit-rating", click: () => handlers.submitRating() },
    "Finish",
  );
  submit.disabled = !controller.canRate();
  panel.append(...sliders, submit);
  return panel;
}

function summaryPanel(view: SessionView, handlers: Handlers): HTMLElement {
  const lines = outcomeSummary(view).map((line) => el("p", { class: "outcome-line" }, line));
  const panel = el(
    "section",
    { class: "panel summary" },
    el("h2", {}, "Result"),
    ...lines,
  );
  if (view.revealed) {
    panel.append(
      el("h3", {}, `What ${agentName(view)} could see`),
      view.revealed.agent_knowledge.kind === "friends"
        ? friendsTable(view.revealed.agent_knowledge)
        : valuesTable(view.revealed.agent_knowledge),
    );
    if (view.revealed.beliefs.length > 0) {
      panel.append(
        el(
          "p",
          { class: "hint" },
          `${agentName(view)} logged ${view.revealed.beliefs.length} belief snapshot(s) while playing.`,
        ),
      );
    }
  }
  panel.append(
    el("button", { type: "button", class: "primary", click: () => handlers.newGame() }, "New game"),
  );
  return panel;
}

function lobby(controller: GameController, handlers: Handlers): HTMLElement {
  const busy = controller.state.busy;
  const field = (label: string, input: HTMLElement) =>
    el("label", { class: "field" }, label, input);
  const task = el(
    "select",
    { name: "task" },
    el("option", { value: "alignment" }, "Find the mutual friend"),
    el("option", { value: "negotiation" }, "Split the supplies"),
  );
  const mode = el(
    "select",
    { name: "mind_mode" },
    ...["none", "first", "second", "both"].map((value) =>
      el("option", { value }, value),
    ),
  );
  const seat = el(
    "select",
    { name: "human_role" },
    el("option", { value: "B" }, "B (the agent opens)"),
    el("option", { value: "A" }, "A (you open)"),
  );
  const seed = el("input", {
    type: "number",
    name: "scenario_seed",
    placeholder: "random",
  });
  const start = el("button", { type: "submit", class: "primary" }, "Start game");
  start.disabled = busy;
  return el(
    "section",
    { class: "panel lobby" },
    el("h2", {}, "New session"),
    el(
      "form",
      {
        submit: (event) => {
          event.preventDefault();
          handlers.startGame(event.target as HTMLFormElement);
        },
      },
      field("game", task),
      field("agent belief tracking", mode),
      field("your seat", seat),
      field("scenario seed (optional)", seed),
      start,
    ),
  );
}

function sessionScreen(
  controller: GameController,
  widgets: UiWidgets,
  handlers: Handlers,
): HTMLElement {
  const view = controller.state.view;
  if (!view) return el("section", { class: "panel" }, "No session.");
  const header = el(
    "header",
    { class: "session-header" },
    el("h1", {}, taskTitle(view.task)),
    el(
      "p",
      { class: "meta" },
      `session ${view.session_id} | seat ${view.human_role} | agent minds: ${view.mind_mode} | turns ${view.turns_used}/${view.max_turns}`,
    ),
    el("p", { class: "hint", id: "phase-hint" }, phaseHint(view)),
  );
  const chat = el(
    "section",
    { class: "panel chat" },
    el("h2", {}, "Conversation"),
    transcriptPanel(view, controller.state.waitingForAgent),
    chatForm(controller, widgets, handlers),
  );
  let action: HTMLElement | null = null;
  if (view.phase === "closed") {
    action = summaryPanel(view, handlers);
  } else if (view.phase === "rating") {
    action = ratingPanel(controller, widgets, handlers);
  } else if (view.phase === "awaiting_decision") {
    action = decisionPanel(controller, view, handlers);
  } else if (view.task === "alignment") {
    action = selectionPanel(controller, view, widgets, handlers);
  } else {
    action = proposalPanel(controller, widgets, handlers);
  }
  const error = controller.state.actionError
    ? el("p", { class: "action-error", id: "action-error" }, controller.state.actionError)
    : null;
  return el(
    "div",
    { class: "session" },
    header,
    el(
      "div",
      { class: "columns" },
      knowledgePanel(view.your_knowledge, "What you can see"),
      chat,
    ),
    error,
    action,
  );
}

export function render(
  root: HTMLElement,
  controller: GameController,
  widgets: UiWidgets,
  handlers: Handlers,
): void {
  const state = controller.state;
  root.replaceChildren();
  if (state.banner) {
    root.append(el("div", { class: "banner", id: "banner", role: "status" }, state.banner));
  }
  if (state.screen === "lobby") {
    root.append(el("h1", {}, "Common Ground"), lobby(controller, handlers));
  } else {
    root.append(sessionScreen(controller, widgets, handlers));
  }
  const input = root.querySelector<HTMLInputElement>("#chat-input");
  if (input && document.activeElement === document.body && controller.canChat()) {
    input.focus();
    input.setSelectionRange(input.value.length, input.value.length);
  }
}
