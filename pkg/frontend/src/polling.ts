/** Reply polling: 1s base interval with capped exponential backoff.
 *
 * Transient transport failures keep the poll alive (the UI shows a banner and
 * play resumes when the service answers again); real API errors such as an
 * unknown handle stop it immediately.
 */

import { PlayApi, ServiceUnreachable, SessionView } from "./api.js";

export interface PollPlan {
  initialDelayMs: number;
  maxDelayMs: number;
  growth: number;
  /** consecutive transport failures tolerated before giving up */
  maxUnreachable: number;
}

export const DEFAULT_PLAN: PollPlan = {
  initialDelayMs: 1000,
  maxDelayMs: 5000,
  growth: 1.5,
  maxUnreachable: 10,
};

export function nextDelay(previous: number | null, plan: PollPlan = DEFAULT_PLAN): number {
  if (previous === null) return plan.initialDelayMs;
  return Math.min(Math.round(previous * plan.growth), plan.maxDelayMs);
}

export class PollAborted extends Error {
  constructor() {
    super("polling aborted");
    this.name = "PollAborted";
  }
}

export interface PollCallbacks {
  sleep?: (ms: number) => Promise<void>;
  onWaiting?: (info: { attempt: number; delayMs: number; unreachable: boolean }) => void;
  signal?: AbortSignal;
}

export type ReplyOutcome =
  | { kind: "done"; reply: string | null; session: SessionView }
  | { kind: "error"; error: unknown; session: SessionView };

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function pollReply(
  client: Pick<PlayApi, "getReply">,
  sessionId: string,
  handle: string,
  plan: PollPlan = DEFAULT_PLAN,
  callbacks: PollCallbacks = {},
): Promise<ReplyOutcome> {
  const sleep = callbacks.sleep ?? defaultSleep;
  let delay: number | null = null;
  let attempt = 0;
  let unreachable = 0;
  for (;;) {
    if (callbacks.signal?.aborted) throw new PollAborted();
    attempt += 1;
    let wasUnreachable = false;
    try {
      const poll = await client.getReply(sessionId, handle);
      unreachable = 0;
      if (poll.status === "done") {
        return { kind: "done", reply: poll.reply, session: poll.session };
      }
      if (poll.status === "error") {
        return { kind: "error", error: poll.error, session: poll.session };
      }
    } catch (err) {
      if (!(err instanceof ServiceUnreachable)) throw err;
      unreachable += 1;
      if (unreachable > plan.maxUnreachable) throw err;
      wasUnreachable = true;
    }
    delay = nextDelay(delay, plan);
    callbacks.onWaiting?.({ attempt, delayMs: delay, unreachable: wasUnreachable });
    await sleep(delay);
  }
}
