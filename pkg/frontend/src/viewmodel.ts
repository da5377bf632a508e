/** Chat view model: all client state and event-to-view mapping, DOM-free.
 *
 * Every system bubble's text comes verbatim from a server payload; the view
 * model never invents dialogue text. Labels around notices and cards are
 * chrome supplied by the rendering layer.
 */

import { ApiError, type DialogueService } from "./client.js";
import {
  asNotGivenRecords,
  asString,
  asStringArray,
  type DialogueEvent,
} from "./types.js";

export type Author = "user" | "system";

export interface Bubble {
  sort: "bubble";
  author: Author;
  kind: string;
  text: string;
}

export interface NotGivenView {
  replyText: string;
  attackerFacts: string[];
  reason: string;
}

export interface ExplanationCard {
  sort: "explanation";
  because: string[];
  notGiven: NotGivenView[];
}

export interface Notice {
  sort: "notice";
  kind: string;
  text: string;
}

export type ChatItem = Bubble | ExplanationCard | Notice;

export type Listener = () => void;

/** The literal utterances the dedicated controls send. */
export const EXPLAIN_UTTERANCE = "why?";
export const STOP_UTTERANCE = "bye";

export class ChatViewModel {
  sessionId: string | null = null;
  items: ChatItem[] = [];
  phase = "awaiting_input";
  activated: string[] = [];
  lastReply: string | null = null;
  inFlight = false;
  /** Utterance that failed to reach the service, kept for one-click retry. */
  retryText: string | null = null;
  /** Set when the server refused a message because the session ended. */
  endedBannerVisible = false;
  startFailed = false;

  private listeners: Listener[] = [];

  constructor(private readonly client: DialogueService) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  get terminated(): boolean {
    return this.phase === "terminated";
  }

  /** Utterances are accepted only between turns of a live session. */
  get canSend(): boolean {
    return this.sessionId !== null && !this.inFlight && !this.terminated;
  }

  /** The explanation control is available exactly when a reply stands. */
  get whyAvailable(): boolean {
    return this.lastReply !== null;
  }

  async start(): Promise<boolean> {
    this.startFailed = false;
    this.emit();
    try {
      const created = await this.client.createSession();
      this.sessionId = created.session_id;
      this.items.push({
        sort: "bubble",
        author: "system",
        kind: "GREETING",
        text: created.greeting,
      });
      await this.refreshSnapshot();
    } catch {
      this.startFailed = true;
      this.emit();
      return false;
    }
    this.emit();
    return true;
  }

  /** Map one batch of server events onto the conversation view. */
  renderEvents(events: DialogueEvent[]): void {
    for (const event of events) {
      const payload = event.payload ?? {};
      switch (event.kind) {
        case "PROMPT":
        case "REPLY_GIVEN":
          this.items.push({
            sort: "bubble",
            author: "system",
            kind: event.kind,
            text: asString(payload["text"]),
          });
          break;
        case "EXPLANATION":
          this.items.push({
            sort: "explanation",
            because: asStringArray(payload["supporter_facts"]),
            notGiven: asNotGivenRecords(payload["not_given"]).map((record) => ({
              replyText: record.reply_text,
              attackerFacts: record.attacker_facts,
              reason: record.reason,
            })),
          });
          break;
        case "NO_MATCH":
        case "NO_REPLY_POSSIBLE":
          this.items.push({
            sort: "notice",
            kind: event.kind,
            text: asString(payload["message"]),
          });
          break;
        case "CONFLICT_DROPPED":
          this.items.push({
            sort: "notice",
            kind: event.kind,
            text: asStringArray(payload["dropped"]).join(", "),
          });
          break;
        case "TERMINATED":
          this.items.push({ sort: "notice", kind: event.kind, text: "" });
          this.phase = "terminated";
          break;
        default:
          // Forward compatibility: surface unknown kinds rather than drop them.
          this.items.push({
            sort: "notice",
            kind: event.kind,
            text: JSON.stringify(payload),
          });
      }
    }
    this.emit();
  }

  /**
   * Send one utterance. Returns true when the service accepted it, so the
   * rendering layer knows whether to clear the composer. On a network
   * failure the text is preserved in retryText; on a refused message the
   * failure is surfaced in place.
   */
  async sendUtterance(text: string): Promise<boolean> {
    const trimmed = text.trim();
    if (trimmed === "" || this.sessionId === null || this.inFlight) {
      return false;
    }
    this.inFlight = true;
    this.retryText = null;
    this.emit();
    try {
      const response = await this.client.sendMessage(this.sessionId, trimmed);
      this.items.push({
        sort: "bubble",
        author: "user",
        kind: "UTTERANCE",
        text: trimmed,
      });
      this.renderEvents(response.events);
      this.phase = response.phase;
      this.lastReply = response.last_reply;
      await this.refreshSnapshot();
      return true;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.endedBannerVisible = true;
        this.phase = "terminated";
      } else if (error instanceof ApiError) {
        this.items.push({
          sort: "notice",
          kind: "CLIENT_ERROR",
          text: error.message,
        });
      } else {
        this.retryText = trimmed;
      }
      return false;
    } finally {
      this.inFlight = false;
      this.emit();
    }
  }

  /** Re-send the utterance preserved by a failed send. */
  async retry(): Promise<boolean> {
    if (this.retryText === null) return false;
    const text = this.retryText;
    this.retryText = null;
    return this.sendUtterance(text);
  }

  requestExplanation(): Promise<boolean> {
    return this.sendUtterance(EXPLAIN_UTTERANCE);
  }

  endSession(): Promise<boolean> {
    return this.sendUtterance(STOP_UTTERANCE);
  }

  /** Pull the authoritative state; the facts panel mirrors it exactly. */
  async refreshSnapshot(): Promise<void> {
    if (this.sessionId === null) return;
    try {
      const snapshot = await this.client.getSnapshot(this.sessionId);
      this.activated = snapshot.activated;
      this.phase = snapshot.phase;
      this.lastReply = snapshot.last_reply;
    } catch {
      // The send already succeeded; a failed poll just leaves the panel
      // one exchange behind until the next refresh.
    }
    this.emit();
  }
}
