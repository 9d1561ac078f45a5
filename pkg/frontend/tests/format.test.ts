import { describe, expect, it } from "vitest";

import { AlignmentOutcome, NegotiationOutcome } from "../src/api.js";
import { agentName, outcomeSummary, phaseHint, taskTitle } from "../src/format.js";
import { makeView } from "./helpers.js";

describe("labels", () => {
  it("names the agent from the opposite seat", () => {
    expect(agentName(makeView({ human_role: "B" }))).toBe("Avery");
    expect(agentName(makeView({ human_role: "A" }))).toBe("Blake");
  });

  it("titles both games", () => {
    expect(taskTitle("alignment")).toMatch(/mutual friend/);
    expect(taskTitle("negotiation")).toMatch(/supplies/i);
  });
});

describe("phaseHint", () => {
  it("tells the player when it is their move", () => {
    expect(phaseHint(makeView({ your_turn: true }))).toMatch(/your turn/i);
  });

  it("shows a typing indicator while a reply is pending", () => {
    expect(
      phaseHint(makeView({ your_turn: false, pending_reply: "h1" })),
    ).toMatch(/typing/);
  });

  it("covers the commit, decision, and rating phases", () => {
    expect(phaseHint(makeView({ phase: "awaiting_action" }))).toMatch(/name the friend/i);
    expect(phaseHint(makeView({ phase: "awaiting_decision" }))).toMatch(/offer/);
    expect(phaseHint(makeView({ phase: "rating" }))).toMatch(/rate/i);
    expect(phaseHint(makeView({ phase: "closed" }))).toMatch(/closed/);
  });
});

describe("outcomeSummary", () => {
  const success: AlignmentOutcome = {
    task: "alignment",
    selection_a: { kind: "friend", schema: ["hobby", "name", "location"], values: ["Chess", "Albert", "Indoor"] },
    selection_b: { kind: "friend", schema: ["hobby", "name", "location"], values: ["Chess", "Albert", "Indoor"] },
    success: true,
  };

  it("celebrates a successful alignment with the shared friend", () => {
    const lines = outcomeSummary(makeView({ phase: "closed", outcome: success }));
    expect(lines[0]).toMatch(/same friend/);
    expect(lines[1]).toContain("Chess / Albert / Indoor");
  });

  it("shows both picks when alignment failed", () => {
    const failed: AlignmentOutcome = {
      ...success,
      selection_a: { kind: "friend", schema: ["hobby", "name", "location"], values: ["Surfing", "Jane", "Outdoor"] },
      success: false,
    };
    const lines = outcomeSummary(
      makeView({ phase: "closed", outcome: failed, human_role: "B" }),
    );
    expect(lines[0]).toMatch(/no agreement/i);
    expect(lines[1]).toContain("Chess / Albert / Indoor");
    expect(lines[2]).toContain("Avery");
    expect(lines[2]).toContain("Surfing / Jane / Outdoor");
  });

  it("reports an accepted deal from the human's perspective", () => {
    const accepted: NegotiationOutcome = {
      task: "negotiation",
      deal: { kind: "deal", a_counts: [3, 3, 0], b_counts: [0, 0, 3] },
      proposer: "A",
      decision: "accepted",
      points_a: 27,
      points_b: 15,
    };
    const lines = outcomeSummary(
      makeView({ task: "negotiation", phase: "closed", outcome: accepted, human_role: "A" }),
    );
    expect(lines[0]).toContain("proposed by you");
    expect(lines[1]).toContain("You scored 27");
    expect(lines[1]).toContain("Blake scored 15");
    expect(lines[2]).toContain("water 3, firewood 3, food 0");
  });

  it("explains fallback points for rejected and timed-out games", () => {
    const rejected: NegotiationOutcome = {
      task: "negotiation",
      deal: { kind: "deal", a_counts: [3, 3, 0], b_counts: [0, 0, 3] },
      proposer: "B",
      decision: "rejected",
      points_a: 5,
      points_b: 5,
    };
    const lines = outcomeSummary(
      makeView({ task: "negotiation", phase: "closed", outcome: rejected, human_role: "A" }),
    );
    expect(lines[0]).toMatch(/rejected/i);
    expect(lines[0]).toMatch(/fallback/);
    const timeout = outcomeSummary(
      makeView({
        task: "negotiation",
        phase: "closed",
        outcome: { ...rejected, decision: "timeout" },
      }),
    );
    expect(timeout[0]).toMatch(/out of turns/i);
  });

  it("leads with the abort reason when the session died", () => {
    const lines = outcomeSummary(
      makeView({ phase: "closed", aborted: "BackendError: boom" }),
    );
    expect(lines[0]).toContain("BackendError: boom");
  });
});
