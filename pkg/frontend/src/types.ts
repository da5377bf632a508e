/** Wire types for the dialogue service API. */

export interface DialogueEvent {
  kind: string;
  payload: Record<string, unknown>;
}

export interface HealthResponse {
  status: string;
  kb_title: string | null;
}

export interface SessionCreated {
  session_id: string;
  greeting: string;
}

export interface MessageResponse {
  events: DialogueEvent[];
  phase: string;
  last_reply: string | null;
}

export type TranscriptEntry =
  | { direction: "user"; text: string }
  | { direction: "system"; event: DialogueEvent };

export interface SessionSnapshot {
  phase: string;
  activated: string[];
  last_reply: string | null;
  transcript: TranscriptEntry[];
}

export interface NotGivenRecord {
  reply_id: string;
  reply_text: string;
  attackers: string[];
  attacker_facts: string[];
  reason: string;
}

/** Payload fields are untyped on the wire; these helpers narrow them. */

export function asString(value: unknown): string {
  return typeof value === "string" ? value : "";
}

export function asStringArray(value: unknown): string[] {
  if (!Array.isArray(value)) return [];
  return value.filter((item): item is string => typeof item === "string");
}

export function asNotGivenRecords(value: unknown): NotGivenRecord[] {
  if (!Array.isArray(value)) return [];
  return value.map((raw) => {
    const record = (raw ?? {}) as Record<string, unknown>;
    return {
      reply_id: asString(record["reply_id"]),
      reply_text: asString(record["reply_text"]),
      attackers: asStringArray(record["attackers"]),
      attacker_facts: asStringArray(record["attacker_facts"]),
      reason: asString(record["reason"]),
    };
  });
}
