/** Human-readable labels for views and outcomes, kept out of the DOM layer
 * so they can be unit tested. */

import {
  AlignmentOutcome,
  NegotiationOutcome,
  RoleName,
  SessionView,
} from "./api.js";

export function agentRole(view: SessionView): RoleName {
  return view.human_role === "A" ? "B" : "A";
}

export function agentName(view: SessionView): string {
  return view.display_names[agentRole(view)] ?? agentRole(view);
}

export function taskTitle(task: SessionView["task"]): string {
  return task === "alignment" ? "Find the mutual friend" : "Split the supplies";
}

export function phaseHint(view: SessionView): string {
  switch (view.phase) {
    case "chatting":
      if (view.pending_reply) return `${agentName(view)} is typing...`;
      return view.your_turn
        ? "Your turn. Send a message, or commit when you are ready."
        : `Waiting for ${agentName(view)}.`;
    case "awaiting_action":
      return "The chat is over. Name the friend you think you share.";
    case "awaiting_decision":
      return `${agentName(view)} made an offer. Accept or reject it.`;
    case "rating":
      return "Game over. Rate the conversation to finish.";
    case "closed":
      return "Session closed.";
  }
}

function friendLine(values: string[] | undefined): string {
  return values && values.length > 0 ? values.join(" / ") : "no selection";
}

function alignmentSummary(view: SessionView, outcome: AlignmentOutcome): string[] {
  const mine = view.human_role === "A" ? outcome.selection_a : outcome.selection_b;
  const theirs = view.human_role === "A" ? outcome.selection_b : outcome.selection_a;
  if (outcome.success) {
    return [
      "You both named the same friend.",
      `Shared friend: ${friendLine(mine?.values)}`,
    ];
  }
  return [
    "No agreement on a shared friend.",
    `Your pick: ${friendLine(mine?.values)}`,
    `${agentName(view)}'s pick: ${friendLine(theirs?.values)}`,
  ];
}

function negotiationSummary(view: SessionView, outcome: NegotiationOutcome): string[] {
  const yourPoints = view.human_role === "A" ? outcome.points_a : outcome.points_b;
  const theirPoints = view.human_role === "A" ? outcome.points_b : outcome.points_a;
  const scoreLine = `You scored ${yourPoints} points; ${agentName(view)} scored ${theirPoints}.`;
  if (outcome.decision === "accepted") {
    const who =
      outcome.proposer === view.human_role ? "you" : agentName(view);
    const lines = [`Deal accepted (proposed by ${who}).`, scoreLine];
    const counts =
      view.human_role === "A" ? outcome.deal?.a_counts : outcome.deal?.b_counts;
    if (counts) {
      lines.push(`You keep: water ${counts[0]}, firewood ${counts[1]}, food ${counts[2]}.`);
    }
    return lines;
  }
  const reason =
    outcome.decision === "rejected"
      ? "Deal rejected."
      : outcome.decision === "timeout"
        ? "Out of turns with no deal."
        : "The proposal was invalid.";
  return [`${reason} Both sides keep their fallback points.`, scoreLine];
}

export function outcomeSummary(view: SessionView): string[] {
  if (view.aborted) {
    return [`Session aborted: ${view.aborted}`];
  }
  const outcome = view.outcome;
  if (!outcome) return ["No outcome recorded."];
  return outcome.task === "alignment"
    ? alignmentSummary(view, outcome)
    : negotiationSummary(view, outcome);
}
