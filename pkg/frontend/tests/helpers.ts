/** Shared fixtures: a view factory and a scripted PlayApi fake. */

import {
  CreateSessionRequest,
  CreatedSession,
  PlayApi,
  ReplyPoll,
  SessionView,
  TranscriptRecord,
} from "../src/api.js";

export function makeView(partial: Partial<SessionView> = {}): SessionView {
  return {
    session_id: "s-1",
    task: "alignment",
    phase: "chatting",
    human_role: "B",
    display_names: { A: "Avery", B: "Blake" },
    mind_mode: "none",
    max_turns: 20,
    turns_used: 0,
    your_turn: true,
    pending_reply: null,
    transcript: [],
    your_knowledge: {
      kind: "friends",
      schema: ["hobby", "name", "location"],
      rows: [
        ["Swimming", "Ryan", "Indoor"],
        ["Chess", "Albert", "Indoor"],
      ],
      table: "",
    },
    rating_dimensions: ["cooperativeness", "informativeness", "enjoyment"],
    aborted: null,
    schema: ["hobby", "name", "location"],
    ...partial,
  };
}

type Producer = () => unknown;

/** Each API method pops the next scripted producer; producers may throw. */
export class FakePlayApi implements PlayApi {
  readonly calls: Array<{ method: string; args: unknown[] }> = [];
  private readonly queues = new Map<string, Producer[]>();

  on(method: keyof PlayApi, ...producers: Producer[]): this {
    const queue = this.queues.get(method) ?? [];
    queue.push(...producers);
    this.queues.set(method, queue);
    return this;
  }

  private next<T>(method: string, args: unknown[]): Promise<T> {
    this.calls.push({ method, args });
    const queue = this.queues.get(method);
    const producer = queue?.shift();
    if (!producer) {
      return Promise.reject(new Error(`unexpected API call: ${method}`));
    }
    return Promise.resolve().then(() => producer() as T);
  }

  callsTo(method: string): Array<unknown[]> {
    return this.calls.filter((c) => c.method === method).map((c) => c.args);
  }

  health(): Promise<{ status: string; sessions: number }> {
    return this.next("health", []);
  }

  createSession(req: CreateSessionRequest): Promise<CreatedSession> {
    return this.next("createSession", [req]);
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.next("getSession", [sessionId]);
  }

  sendMessage(sessionId: string, text: string): Promise<{ handle: string }> {
    return this.next("sendMessage", [sessionId, text]);
  }

  getReply(sessionId: string, handle: string): Promise<ReplyPoll> {
    return this.next("getReply", [sessionId, handle]);
  }

  select(sessionId: string, values: string[]): Promise<SessionView> {
    return this.next("select", [sessionId, values]);
  }

  propose(
    sessionId: string,
    deal: Record<string, [number, number]>,
  ): Promise<SessionView> {
    return this.next("propose", [sessionId, deal]);
  }

  decide(sessionId: string, accept: boolean): Promise<SessionView> {
    return this.next("decide", [sessionId, accept]);
  }

  rate(sessionId: string, ratings: Record<string, number>): Promise<SessionView> {
    return this.next("rate", [sessionId, ratings]);
  }

  transcript(sessionId: string): Promise<TranscriptRecord> {
    return this.next("transcript", [sessionId]);
  }
}

/** Poll instantly in unit tests. */
export const instantSleep = async (_ms: number): Promise<void> => {};
