/** Typed client for the play service JSON API.
 *
 * Every method maps to one endpoint and returns the parsed JSON body.
 * HTTP-level failures become ApiError (the service's {code, message, detail}
 * shape); transport failures become ServiceUnreachable so callers can show a
 * non-blocking banner instead of treating them as game errors.
 */

export type TaskKind = "alignment" | "negotiation";
export type MindMode = "none" | "first" | "second" | "both";
export type RoleName = "A" | "B";
export type Phase =
  | "chatting"
  | "awaiting_action"
  | "awaiting_decision"
  | "rating"
  | "closed";

export interface TranscriptEntry {
  speaker: RoleName;
  text: string;
  turn: number;
}

export interface FriendsKnowledge {
  kind: "friends";
  schema: string[];
  rows: string[][];
  table: string;
}

export interface ValueRow {
  item: string;
  level: "high" | "medium" | "low";
  reason: string;
}

export interface ValuesKnowledge {
  kind: "values";
  rows: ValueRow[];
  table: string;
}

export type Knowledge = FriendsKnowledge | ValuesKnowledge;

export interface PendingProposal {
  proposer: RoleName | null;
  your_counts: number[];
  their_counts: number[];
}

export interface FriendSelection {
  kind: "friend";
  schema: string[];
  values: string[];
}

export interface DealCounts {
  kind: "deal";
  a_counts: number[] | null;
  b_counts: number[] | null;
}

export interface AlignmentOutcome {
  task: "alignment";
  selection_a: FriendSelection | null;
  selection_b: FriendSelection | null;
  success: boolean;
}

export interface NegotiationOutcome {
  task: "negotiation";
  deal: DealCounts | null;
  proposer: RoleName | null;
  decision: "accepted" | "rejected" | "timeout" | "invalid_proposal";
  points_a: number;
  points_b: number;
}

export type Outcome = AlignmentOutcome | NegotiationOutcome;

export interface RevealedInfo {
  agent_knowledge: Knowledge;
  scenario: Record<string, unknown>;
  beliefs: Array<Record<string, unknown>>;
}

export interface SessionView {
  session_id: string;
  task: TaskKind;
  phase: Phase;
  human_role: RoleName;
  display_names: Record<RoleName, string>;
  mind_mode: MindMode;
  max_turns: number;
  turns_used: number;
  your_turn: boolean;
  pending_reply: string | null;
  transcript: TranscriptEntry[];
  your_knowledge: Knowledge;
  rating_dimensions: string[];
  aborted: string | null;
  schema?: string[];
  pending_proposal?: PendingProposal;
  outcome?: Outcome | null;
  revealed?: RevealedInfo;
}

/** POST /sessions response: the view plus the handle of the opening reply. */
export interface CreatedSession extends SessionView {
  opening_handle: string | null;
}

export interface CreateSessionRequest {
  task: TaskKind;
  mind_mode?: MindMode;
  human_role?: RoleName;
  generator_backend?: string;
  mind_backend?: string;
  scenario?: Record<string, unknown>;
  scenario_seed?: number;
}

export type ReplyPoll =
  | { status: "pending" }
  | { status: "done"; reply: string | null; session: SessionView }
  | {
      status: "error";
      error: Record<string, unknown> | string | null;
      session: SessionView;
    };

/** Archived session record as served by GET /sessions/{id}/transcript. */
export interface TranscriptRecord {
  schema_version: number;
  session_id: string;
  seed: number | null;
  scenario: Record<string, unknown>;
  transcript: TranscriptEntry[];
  beliefs: Array<Record<string, unknown>>;
  outcome: Outcome | null;
  aborted: string | null;
  ratings: Record<string, number>;
  [key: string]: unknown;
}

export interface ErrorBody {
  code: string;
  message: string;
  detail: unknown;
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, code: string, message: string, detail: unknown = null) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.detail = detail;
  }
}

/** Transport failure: the service never answered (down, DNS, CORS, ...). */
export class ServiceUnreachable extends Error {
  readonly reason: unknown;

  constructor(message: string, reason?: unknown) {
    super(message);
    this.name = "ServiceUnreachable";
    this.reason = reason;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** The full client surface; lets tests substitute a scripted implementation. */
export interface PlayApi {
  health(): Promise<{ status: string; sessions: number }>;
  createSession(req: CreateSessionRequest): Promise<CreatedSession>;
  getSession(sessionId: string): Promise<SessionView>;
  sendMessage(sessionId: string, text: string): Promise<{ handle: string }>;
  getReply(sessionId: string, handle: string): Promise<ReplyPoll>;
  select(sessionId: string, values: string[]): Promise<SessionView>;
  propose(
    sessionId: string,
    deal: Record<string, [number, number]>,
  ): Promise<SessionView>;
  decide(sessionId: string, accept: boolean): Promise<SessionView>;
  rate(sessionId: string, ratings: Record<string, number>): Promise<SessionView>;
  transcript(sessionId: string): Promise<TranscriptRecord>;
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = `http_${response.status}`;
  let message = response.statusText || code;
  let detail: unknown = null;
  try {
    const data = (await response.json()) as Partial<ErrorBody>;
    if (typeof data.code === "string") code = data.code;
    if (typeof data.message === "string") message = data.message;
    detail = data.detail ?? null;
  } catch {
    // non-JSON error body; keep the HTTP status fallback
  }
  return new ApiError(response.status, code, message, detail);
}

export class ApiClient implements PlayApi {
  readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { accept: "application/json" };
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["content-type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (reason) {
      throw new ServiceUnreachable(
        `cannot reach the play service at ${this.baseUrl}`,
        reason,
      );
    }
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; sessions: number }> {
    return this.request("GET", "/healthz");
  }

  createSession(req: CreateSessionRequest): Promise<CreatedSession> {
    return this.request("POST", "/sessions", req);
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}`);
  }

  sendMessage(sessionId: string, text: string): Promise<{ handle: string }> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/message`, {
      text,
    });
  }

  getReply(sessionId: string, handle: string): Promise<ReplyPoll> {
    return this.request(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/reply/${encodeURIComponent(handle)}`,
    );
  }

  select(sessionId: string, values: string[]): Promise<SessionView> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/action`, {
      kind: "select",
      values,
    });
  }

  propose(
    sessionId: string,
    deal: Record<string, [number, number]>,
  ): Promise<SessionView> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/action`, {
      kind: "propose",
      deal,
    });
  }

  decide(sessionId: string, accept: boolean): Promise<SessionView> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/action`, {
      kind: "decide",
      accept,
    });
  }

  rate(sessionId: string, ratings: Record<string, number>): Promise<SessionView> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/rating`,
      ratings,
    );
  }

  transcript(sessionId: string): Promise<TranscriptRecord> {
    return this.request(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/transcript`,
    );
  }
}

/** Pick the API base URL: ?api= query > injected global > saved value > page origin. */
export function resolveApiBase(options: {
  query?: string | null;
  injected?: unknown;
  stored?: string | null;
  origin: string;
}): string {
  const fromQuery = new URLSearchParams(options.query ?? "").get("api");
  if (fromQuery) return fromQuery.replace(/\/+$/, "");
  if (typeof options.injected === "string" && options.injected) {
    return options.injected.replace(/\/+$/, "");
  }
  if (options.stored) return options.stored.replace(/\/+$/, "");
  return options.origin.replace(/\/+$/, "");
}
