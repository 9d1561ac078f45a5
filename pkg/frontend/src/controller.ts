/** Session flow driver: owns the current view, serializes server calls, and
 * turns transport/validation failures into banner or inline-error state.
 *
 * The server stays the authority on every rule. This class never advances the
 * game locally; it only posts what the player did and adopts the view the
 * service returns. Controls stay locked (busy/waitingForAgent) until the
 * server has confirmed the previous step.
 */

import {
  ApiError,
  CreateSessionRequest,
  PlayApi,
  ServiceUnreachable,
  SessionView,
  TranscriptRecord,
} from "./api.js";
import { DealPayload, ITEM_TOTAL, payloadViolation } from "./deal.js";
import {
  DEFAULT_PLAN,
  PollAborted,
  PollCallbacks,
  PollPlan,
  pollReply,
} from "./polling.js";

export interface ControllerState {
  screen: "lobby" | "session";
  view: SessionView | null;
  /** a request is in flight; all controls stay locked */
  busy: boolean;
  /** an agent reply handle is being polled */
  waitingForAgent: boolean;
  /** transport trouble; shown as a dismissable banner, play is not blocked */
  banner: string | null;
  /** rejected input; shown inline next to the widget that produced it */
  actionError: string | null;
  transcriptRecord: TranscriptRecord | null;
}

export type Listener = (state: ControllerState) => void;

const UNREACHABLE_BANNER =
  "Cannot reach the play service. It may be down; retrying.";

export function describeApiError(err: ApiError): string {
  const detail = err.detail as { error?: string; item?: string } | null;
  if (detail && detail.error === "SumViolation" && detail.item) {
    return `Each item must split into exactly ${ITEM_TOTAL} units; fix ${detail.item}.`;
  }
  return err.message;
}

export class GameController {
  readonly state: ControllerState = {
    screen: "lobby",
    view: null,
    busy: false,
    waitingForAgent: false,
    banner: null,
    actionError: null,
    transcriptRecord: null,
  };

  private readonly listeners = new Set<Listener>();

  constructor(
    private readonly client: PlayApi,
    private readonly plan: PollPlan = DEFAULT_PLAN,
    private readonly pollCallbacks: PollCallbacks = {},
  ) {}

  onChange(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  // -- derived control gates ----------------------------------------------------

  private get unlocked(): boolean {
    return !this.state.busy && !this.state.waitingForAgent;
  }

  canChat(): boolean {
    const view = this.state.view;
    return (
      !!view &&
      view.phase === "chatting" &&
      view.your_turn &&
      !view.pending_reply &&
      this.unlocked
    );
  }

  canSelect(): boolean {
    const view = this.state.view;
    return (
      !!view &&
      view.task === "alignment" &&
      (view.phase === "chatting" || view.phase === "awaiting_action") &&
      !view.pending_reply &&
      this.unlocked
    );
  }

  canPropose(): boolean {
    const view = this.state.view;
    return (
      !!view &&
      view.task === "negotiation" &&
      view.phase === "chatting" &&
      !view.pending_reply &&
      this.unlocked
    );
  }

  canDecide(): boolean {
    const view = this.state.view;
    return !!view && view.phase === "awaiting_decision" && this.unlocked;
  }

  canRate(): boolean {
    const view = this.state.view;
    return !!view && view.phase === "rating" && this.unlocked;
  }

  // -- operations -----------------------------------------------------------------

  async create(req: CreateSessionRequest): Promise<boolean> {
    return this.run(async () => {
      const created = await this.client.createSession(req);
      this.state.view = created;
      this.state.screen = "session";
      this.state.transcriptRecord = null;
      this.emit();
      if (created.opening_handle) {
        await this.awaitReply(created.session_id, created.opening_handle);
      }
    });
  }

  /** Restore a session by id (page refresh, shared link). Picks polling back
   * up if an agent reply was pending when the page went away. */
  async resume(sessionId: string): Promise<boolean> {
    return this.run(async () => {
      const view = await this.client.getSession(sessionId);
      this.state.view = view;
      this.state.screen = "session";
      this.state.transcriptRecord = null;
      this.emit();
      if (view.pending_reply) {
        await this.awaitReply(view.session_id, view.pending_reply);
      }
      if (this.state.view?.phase === "closed") {
        await this.fetchTranscript();
      }
    });
  }

  toLobby(): void {
    this.state.screen = "lobby";
    this.state.view = null;
    this.state.transcriptRecord = null;
    this.state.actionError = null;
    this.emit();
  }

  async send(text: string): Promise<boolean> {
    const trimmed = text.trim();
    const view = this.state.view;
    if (!trimmed || !view) return false;
    return this.run(async () => {
      const { handle } = await this.client.sendMessage(view.session_id, trimmed);
      // echo the player's line right away; the reply poll brings the real view
      this.state.view = {
        ...view,
        your_turn: false,
        pending_reply: handle,
        turns_used: view.turns_used + 1,
        transcript: [
          ...view.transcript,
          { speaker: view.human_role, text: trimmed, turn: view.transcript.length },
        ],
      };
      this.emit();
      await this.awaitReply(view.session_id, handle);
    });
  }

  async select(values: string[]): Promise<boolean> {
    const view = this.state.view;
    if (!view) return false;
    return this.run(async () => {
      this.state.view = await this.client.select(view.session_id, values);
    });
  }

  async propose(deal: DealPayload): Promise<boolean> {
    const view = this.state.view;
    if (!view) return false;
    const violation = payloadViolation(deal);
    if (violation !== null) {
      this.state.actionError = `Each item must split into exactly ${ITEM_TOTAL} units; fix ${violation}.`;
      this.emit();
      return false;
    }
    return this.run(async () => {
      this.state.view = await this.client.propose(view.session_id, deal);
    });
  }

  async decide(accept: boolean): Promise<boolean> {
    const view = this.state.view;
    if (!view) return false;
    return this.run(async () => {
      this.state.view = await this.client.decide(view.session_id, accept);
    });
  }

  async rate(ratings: Record<string, number>): Promise<boolean> {
    const view = this.state.view;
    if (!view) return false;
    return this.run(async () => {
      this.state.view = await this.client.rate(view.session_id, ratings);
      if (this.state.view.phase === "closed") {
        await this.fetchTranscript();
      }
    });
  }

  async refresh(): Promise<boolean> {
    const view = this.state.view;
    if (!view) return false;
    return this.run(async () => {
      this.state.view = await this.client.getSession(view.session_id);
    });
  }

  async loadTranscript(): Promise<boolean> {
    const view = this.state.view;
    if (!view) return false;
    return this.run(() => this.fetchTranscript());
  }

  // -- internals --------------------------------------------------------------------

  private async run(op: () => Promise<void>): Promise<boolean> {
    if (this.state.busy) return false;
    this.state.busy = true;
    this.state.actionError = null;
    this.state.banner = null;
    this.emit();
    try {
      await op();
      return true;
    } catch (err) {
      await this.absorb(err);
      return false;
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  private async absorb(err: unknown): Promise<void> {
    if (err instanceof PollAborted) return;
    if (err instanceof ServiceUnreachable) {
      this.state.banner = UNREACHABLE_BANNER;
      return;
    }
    if (err instanceof ApiError) {
      this.state.actionError = describeApiError(err);
      await this.refreshQuietly();
      return;
    }
    this.state.banner = `Unexpected error: ${String(err)}`;
  }

  /** Pull the authoritative view after a rejected action; never throws. */
  private async refreshQuietly(): Promise<void> {
    const view = this.state.view;
    if (!view) return;
    try {
      this.state.view = await this.client.getSession(view.session_id);
    } catch {
      // keep the stale view; the next action will surface the problem
    }
  }

  private async fetchTranscript(): Promise<void> {
    const view = this.state.view;
    if (!view) return;
    this.state.transcriptRecord = await this.client.transcript(view.session_id);
  }

  private async awaitReply(sessionId: string, handle: string): Promise<void> {
    this.state.waitingForAgent = true;
    this.emit();
    try {
      const outcome = await pollReply(this.client, sessionId, handle, this.plan, {
        ...this.pollCallbacks,
        onWaiting: (info) => {
          this.state.banner = info.unreachable ? UNREACHABLE_BANNER : null;
          this.emit();
          this.pollCallbacks.onWaiting?.(info);
        },
      });
      this.state.view = outcome.session;
      this.state.banner =
        outcome.kind === "error"
          ? "The agent backend failed; the session was aborted."
          : null;
    } finally {
      this.state.waitingForAgent = false;
      this.emit();
    }
  }
}
