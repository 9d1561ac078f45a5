import { describe, expect, it } from "vitest";

import { ApiError, ServiceUnreachable } from "../src/api.js";
import { GameController, describeApiError } from "../src/controller.js";
import { PollPlan } from "../src/polling.js";
import { FakePlayApi, instantSleep, makeView } from "./helpers.js";

const PLAN: PollPlan = { initialDelayMs: 1, maxDelayMs: 2, growth: 1.5, maxUnreachable: 2 };

function makeController(api: FakePlayApi): GameController {
  return new GameController(api, PLAN, { sleep: instantSleep });
}

describe("GameController.create", () => {
  it("adopts the created view and polls the opening reply to completion", async () => {
    const created = {
      ...makeView({ your_turn: false, pending_reply: "h1" }),
      opening_handle: "h1",
    };
    const after = makeView({
      your_turn: true,
      transcript: [{ speaker: "A" as const, text: "Do you know anyone who likes Surfing?", turn: 0 }],
      turns_used: 1,
    });
    const api = new FakePlayApi()
      .on("createSession", () => created)
      .on("getReply", () => ({ status: "pending" as const }))
      .on("getReply", () => ({ status: "done" as const, reply: after.transcript[0]!.text, session: after }));
    const controller = makeController(api);

    const sawWaiting: boolean[] = [];
    controller.onChange((state) => sawWaiting.push(state.waitingForAgent));

    expect(await controller.create({ task: "alignment", human_role: "B" })).toBe(true);
    expect(controller.state.screen).toBe("session");
    expect(controller.state.view?.transcript).toHaveLength(1);
    expect(controller.state.busy).toBe(false);
    expect(controller.state.waitingForAgent).toBe(false);
    expect(sawWaiting).toContain(true);
    expect(controller.canChat()).toBe(true);
  });

  it("shows a banner and stays in the lobby when the service is down", async () => {
    const api = new FakePlayApi().on("createSession", () => {
      throw new ServiceUnreachable("down");
    });
    const controller = makeController(api);
    expect(await controller.create({ task: "alignment" })).toBe(false);
    expect(controller.state.screen).toBe("lobby");
    expect(controller.state.banner).toMatch(/cannot reach/i);
  });
});

describe("GameController.send", () => {
  it("echoes the player's line, then adopts the server view from the poll", async () => {
    const start = makeView();
    const after = makeView({
      transcript: [
        { speaker: "B", text: "Hi there", turn: 0 },
        { speaker: "A", text: "Hello!", turn: 1 },
      ],
      turns_used: 2,
    });
    const api = new FakePlayApi()
      .on("createSession", () => ({ ...start, opening_handle: null }))
      .on("sendMessage", () => ({ handle: "h2" }))
      .on("getReply", () => ({ status: "done" as const, reply: "Hello!", session: after }));
    const controller = makeController(api);
    await controller.create({ task: "alignment", human_role: "B" });

    const echoes: number[] = [];
    controller.onChange((state) => echoes.push(state.view?.transcript.length ?? 0));

    expect(await controller.send("  Hi there  ")).toBe(true);
    expect(api.callsTo("sendMessage")).toEqual([["s-1", "Hi there"]]);
    // the optimistic echo appeared before the server view replaced it
    expect(echoes).toContain(1);
    expect(controller.state.view?.transcript).toHaveLength(2);
  });

  it("refuses blank input without calling the server", async () => {
    const api = new FakePlayApi().on("createSession", () => ({
      ...makeView(),
      opening_handle: null,
    }));
    const controller = makeController(api);
    await controller.create({ task: "alignment" });
    expect(await controller.send("   ")).toBe(false);
    expect(api.callsTo("sendMessage")).toHaveLength(0);
  });

  it("locks while a call is in flight", async () => {
    const api = new FakePlayApi()
      .on("createSession", () => ({ ...makeView(), opening_handle: null }))
      .on("sendMessage", () => new Promise<never>(() => {}));
    const controller = makeController(api);
    await controller.create({ task: "alignment" });
    const first = controller.send("one");
    expect(controller.state.busy).toBe(true);
    expect(await controller.send("two")).toBe(false);
    expect(api.callsTo("sendMessage")).toHaveLength(1);
    void first;
  });

  it("turns an agent failure into an abort banner with the final view", async () => {
    const aborted = makeView({ phase: "closed", aborted: "BackendError: boom" });
    const api = new FakePlayApi()
      .on("createSession", () => ({ ...makeView(), opening_handle: null }))
      .on("sendMessage", () => ({ handle: "h3" }))
      .on("getReply", () => ({
        status: "error" as const,
        error: { type: "BackendError" },
        session: aborted,
      }));
    const controller = makeController(api);
    await controller.create({ task: "alignment" });
    await controller.send("hello?");
    expect(controller.state.banner).toMatch(/aborted/);
    expect(controller.state.view?.phase).toBe("closed");
  });
});

describe("rejected actions", () => {
  it("shows the server's message inline and resyncs the view", async () => {
    const fresh = makeView({ turns_used: 4 });
    const api = new FakePlayApi()
      .on("createSession", () => ({ ...makeView(), opening_handle: null }))
      .on("select", () => {
        throw new ApiError(400, "InvalidAction", "selection must be fully specified");
      })
      .on("getSession", () => fresh);
    const controller = makeController(api);
    await controller.create({ task: "alignment", human_role: "B" });
    expect(await controller.select(["Chess", "Albert", "unknown"])).toBe(false);
    expect(controller.state.actionError).toContain("fully specified");
    expect(controller.state.view?.turns_used).toBe(4);
    expect(controller.state.banner).toBeNull();
  });

  it("blocks bad splits before they reach the wire", async () => {
    const api = new FakePlayApi().on("createSession", () => ({
      ...makeView({ task: "negotiation" }),
      opening_handle: null,
    }));
    const controller = makeController(api);
    await controller.create({ task: "negotiation", human_role: "A" });
    const result = await controller.propose({
      water: [2, 2],
      firewood: [0, 3],
      food: [3, 0],
    });
    expect(result).toBe(false);
    expect(controller.state.actionError).toContain("water");
    expect(api.callsTo("propose")).toHaveLength(0);
  });

  it("formats the server's sum violation detail", () => {
    const err = new ApiError(400, "InvalidAction", "water split 2/2 does not use exactly 3", {
      error: "SumViolation",
      item: "water",
    });
    expect(describeApiError(err)).toBe(
      "Each item must split into exactly 3 units; fix water.",
    );
    const plain = new ApiError(409, "WrongPhase", "cannot chat in phase rating");
    expect(describeApiError(plain)).toBe("cannot chat in phase rating");
  });
});

describe("happy-path actions", () => {
  it("delivers a valid proposal and adopts the outcome view", async () => {
    const closedView = makeView({
      task: "negotiation",
      phase: "rating",
      outcome: {
        task: "negotiation",
        deal: { kind: "deal", a_counts: [3, 3, 0], b_counts: [0, 0, 3] },
        proposer: "A",
        decision: "accepted",
        points_a: 27,
        points_b: 15,
      },
    });
    const api = new FakePlayApi()
      .on("createSession", () => ({
        ...makeView({ task: "negotiation", human_role: "A" }),
        opening_handle: null,
      }))
      .on("propose", () => closedView);
    const controller = makeController(api);
    await controller.create({ task: "negotiation", human_role: "A" });
    expect(
      await controller.propose({ water: [3, 0], firewood: [3, 0], food: [0, 3] }),
    ).toBe(true);
    expect(api.callsTo("propose")).toEqual([
      ["s-1", { water: [3, 0], firewood: [3, 0], food: [0, 3] }],
    ]);
    expect(controller.state.view?.phase).toBe("rating");
    expect(controller.canRate()).toBe(true);
  });

  it("passes decisions through and rates to the closed view plus archive", async () => {
    const deciding = makeView({
      task: "negotiation",
      human_role: "A",
      phase: "awaiting_decision",
      pending_proposal: { proposer: "B", your_counts: [3, 0, 0], their_counts: [0, 3, 3] },
    });
    const rating = makeView({ task: "negotiation", human_role: "A", phase: "rating" });
    const closed = makeView({ task: "negotiation", human_role: "A", phase: "closed" });
    const record = {
      schema_version: 1,
      session_id: "s-1",
      seed: null,
      scenario: {},
      transcript: [],
      beliefs: [],
      outcome: null,
      aborted: null,
      ratings: { skillful: 5, satisfied: 5, enjoyment: 5 },
    };
    const api = new FakePlayApi()
      .on("createSession", () => ({ ...deciding, opening_handle: null }))
      .on("decide", () => rating)
      .on("rate", () => closed)
      .on("transcript", () => record);
    const controller = makeController(api);
    await controller.create({ task: "negotiation", human_role: "A" });
    expect(controller.canDecide()).toBe(true);
    expect(await controller.decide(true)).toBe(true);
    expect(api.callsTo("decide")).toEqual([["s-1", true]]);
    expect(await controller.rate({ skillful: 5, satisfied: 5, enjoyment: 5 })).toBe(true);
    expect(controller.state.view?.phase).toBe("closed");
    expect(controller.state.transcriptRecord?.session_id).toBe("s-1");
  });
});

describe("GameController.resume", () => {
  it("restores the view and picks up a pending reply", async () => {
    const mid = makeView({ pending_reply: "h7", your_turn: false, turns_used: 3 });
    const after = makeView({ turns_used: 4 });
    const api = new FakePlayApi()
      .on("getSession", () => mid)
      .on("getReply", () => ({ status: "done" as const, reply: "hi", session: after }));
    const controller = makeController(api);
    expect(await controller.resume("s-1")).toBe(true);
    expect(api.callsTo("getReply")).toEqual([["s-1", "h7"]]);
    expect(controller.state.view?.turns_used).toBe(4);
    expect(controller.state.screen).toBe("session");
  });

  it("loads the archived record when resuming a closed session", async () => {
    const closed = makeView({ phase: "closed" });
    const record = {
      schema_version: 1,
      session_id: "s-1",
      seed: null,
      scenario: {},
      transcript: [],
      beliefs: [],
      outcome: null,
      aborted: null,
      ratings: {},
    };
    const api = new FakePlayApi()
      .on("getSession", () => closed)
      .on("transcript", () => record);
    const controller = makeController(api);
    await controller.resume("s-1");
    expect(controller.state.transcriptRecord).not.toBeNull();
  });
});

describe("control gates", () => {
  it("keeps every control locked while a reply is pending", async () => {
    const waiting = makeView({
      your_turn: false,
      pending_reply: "h1",
      phase: "chatting",
    });
    const api = new FakePlayApi().on("createSession", () => ({
      ...waiting,
      opening_handle: null,
    }));
    const controller = makeController(api);
    await controller.create({ task: "alignment" });
    expect(controller.canChat()).toBe(false);
    expect(controller.canSelect()).toBe(false);
    expect(controller.canPropose()).toBe(false);
  });

  it("matches each gate to its phase and task", async () => {
    const api = new FakePlayApi().on("createSession", () => ({
      ...makeView({ phase: "awaiting_action" }),
      opening_handle: null,
    }));
    const controller = makeController(api);
    await controller.create({ task: "alignment" });
    expect(controller.canChat()).toBe(false);
    expect(controller.canSelect()).toBe(true);
    expect(controller.canPropose()).toBe(false);
    expect(controller.canDecide()).toBe(false);
    expect(controller.canRate()).toBe(false);
  });
});
