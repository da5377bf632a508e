import { describe, expect, it } from "vitest";

import type { DialogueService } from "../src/client.js";
import type { MessageResponse } from "../src/types.js";
import {
  ChatViewModel,
  EXPLAIN_UTTERANCE,
  STOP_UTTERANCE,
  type Bubble,
  type ExplanationCard,
  type Notice,
} from "../src/viewmodel.js";
import { FakeService, prompt, reply } from "./fakes.js";

async function startedViewModel(fake: FakeService) {
  const vm = new ChatViewModel(fake);
  expect(await vm.start()).toBe(true);
  return vm;
}

function bubbles(vm: ChatViewModel): Bubble[] {
  return vm.items.filter((item): item is Bubble => item.sort === "bubble");
}

function notices(vm: ChatViewModel): Notice[] {
  return vm.items.filter((item): item is Notice => item.sort === "notice");
}

describe("session start", () => {
  it("shows the server greeting as a system bubble", async () => {
    const fake = new FakeService();
    const vm = await startedViewModel(fake);
    expect(vm.sessionId).toBe("fake-session");
    expect(vm.items).toEqual([
      {
        sort: "bubble",
        author: "system",
        kind: "GREETING",
        text: "Hello! Tell me about your situation.",
      },
    ]);
    expect(vm.whyAvailable).toBe(false);
    expect(vm.canSend).toBe(true);
  });

  it("flags a failed start and recovers on the next attempt", async () => {
    const fake = new FakeService();
    fake.failCreate = true;
    const vm = new ChatViewModel(fake);
    expect(await vm.start()).toBe(false);
    expect(vm.startFailed).toBe(true);
    expect(vm.sessionId).toBeNull();
    fake.failCreate = false;
    expect(await vm.start()).toBe(true);
    expect(vm.startFailed).toBe(false);
    expect(vm.sessionId).toBe("fake-session");
  });
});

describe("renderEvents", () => {
  it("maps prompts and replies to system bubbles", () => {
    const vm = new ChatViewModel(new FakeService());
    vm.renderEvents([
      prompt("N7", "Do you suffer from bronchial asthma?"),
      reply("R2", "You can get vaccinated."),
    ]);
    expect(vm.items).toEqual([
      {
        sort: "bubble",
        author: "system",
        kind: "PROMPT",
        text: "Do you suffer from bronchial asthma?",
      },
      {
        sort: "bubble",
        author: "system",
        kind: "REPLY_GIVEN",
        text: "You can get vaccinated.",
      },
    ]);
  });

  it("maps an explanation to a structured card", () => {
    const vm = new ChatViewModel(new FakeService());
    vm.renderEvents([
      {
        kind: "EXPLANATION",
        payload: {
          supporters: ["N8"],
          supporter_facts: ["I suffer from bronchial asthma"],
          not_given: [
            {
              reply_id: "R2",
              reply_text: "You can get vaccinated.",
              attackers: ["N8"],
              attacker_facts: ["I suffer from bronchial asthma"],
              reason: "attacked_by_activated",
            },
          ],
        },
      },
    ]);
    expect(vm.items).toEqual([
      {
        sort: "explanation",
        because: ["I suffer from bronchial asthma"],
        notGiven: [
          {
            replyText: "You can get vaccinated.",
            attackerFacts: ["I suffer from bronchial asthma"],
            reason: "attacked_by_activated",
          },
        ],
      },
    ]);
  });

  it("maps refusals and conflicts to notices with server text", () => {
    const vm = new ChatViewModel(new FakeService());
    vm.renderEvents([
      { kind: "NO_MATCH", payload: { message: "Sorry, no idea." } },
      { kind: "CONFLICT_DROPPED", payload: { dropped: ["N8", "N9"] } },
      { kind: "NO_REPLY_POSSIBLE", payload: { message: "Ask a professional." } },
    ]);
    expect(notices(vm).map((notice) => [notice.kind, notice.text])).toEqual([
      ["NO_MATCH", "Sorry, no idea."],
      ["CONFLICT_DROPPED", "N8, N9"],
      ["NO_REPLY_POSSIBLE", "Ask a professional."],
    ]);
  });

  it("termination adds a notice and blocks further input", () => {
    const vm = new ChatViewModel(new FakeService());
    vm.renderEvents([{ kind: "TERMINATED", payload: {} }]);
    expect(vm.phase).toBe("terminated");
    expect(vm.canSend).toBe(false);
    expect(notices(vm)).toEqual([{ sort: "notice", kind: "TERMINATED", text: "" }]);
  });

  it("renders unknown event kinds as raw notices", () => {
    const vm = new ChatViewModel(new FakeService());
    vm.renderEvents([{ kind: "SOMETHING_NEW", payload: { x: 1 } }]);
    expect(notices(vm)).toEqual([
      { sort: "notice", kind: "SOMETHING_NEW", text: '{"x":1}' },
    ]);
  });

  it("does nothing for an empty event list", () => {
    const vm = new ChatViewModel(new FakeService());
    vm.renderEvents([]);
    expect(vm.items).toEqual([]);
  });
});

describe("sending utterances", () => {
  it("appends the user bubble and the server events in order", async () => {
    const fake = new FakeService();
    fake.queue({
      events: [prompt("N7", "Do you suffer from bronchial asthma?")],
      phase: "eliciting",
      last_reply: null,
      activated: ["N11"],
    });
    const vm = await startedViewModel(fake);
    expect(await vm.sendUtterance("I have latex allergy")).toBe(true);
    expect(bubbles(vm).map((bubble) => [bubble.author, bubble.text])).toEqual([
      ["system", "Hello! Tell me about your situation."],
      ["user", "I have latex allergy"],
      ["system", "Do you suffer from bronchial asthma?"],
    ]);
    expect(vm.phase).toBe("eliciting");
    expect(vm.activated).toEqual(["N11"]);
    expect(vm.whyAvailable).toBe(false);
  });

  it("tracks the last reply so the explanation control unlocks", async () => {
    const fake = new FakeService();
    fake.queue({
      events: [reply("R2", "You can get vaccinated.")],
      phase: "awaiting_input",
      last_reply: "R2",
      activated: ["N11", "N7", "N16"],
    });
    const vm = await startedViewModel(fake);
    await vm.sendUtterance("never had anaphylaxis");
    expect(vm.lastReply).toBe("R2");
    expect(vm.whyAvailable).toBe(true);
    expect(vm.activated).toEqual(["N11", "N7", "N16"]);
  });

  it("rejects blank input without calling the service", async () => {
    const fake = new FakeService();
    const vm = await startedViewModel(fake);
    expect(await vm.sendUtterance("   ")).toBe(false);
    expect(fake.sent).toEqual([]);
  });

  it("allows only one in-flight message", async () => {
    let release!: (value: MessageResponse) => void;
    const slow: DialogueService = {
      health: async () => ({ status: "ok", kb_title: null }),
      createSession: async () => ({ session_id: "s", greeting: "hi" }),
      sendMessage: () => new Promise<MessageResponse>((resolve) => {
        release = resolve;
      }),
      getSnapshot: async () => ({
        phase: "awaiting_input",
        activated: [],
        last_reply: null,
        transcript: [],
      }),
    };
    const vm = new ChatViewModel(slow);
    await vm.start();
    const first = vm.sendUtterance("first");
    expect(vm.inFlight).toBe(true);
    expect(await vm.sendUtterance("second")).toBe(false);
    release({ events: [], phase: "awaiting_input", last_reply: null });
    expect(await first).toBe(true);
    expect(vm.inFlight).toBe(false);
  });

  it("message order equals the server transcript order", async () => {
    const fake = new FakeService();
    fake.queue({
      events: [prompt("N7", "Asthma?")],
      phase: "eliciting",
      last_reply: null,
    });
    fake.queue({
      events: [prompt("N16", "Anaphylaxis?")],
      phase: "eliciting",
      last_reply: null,
    });
    fake.queue({
      events: [reply("R2", "Yes you can.")],
      phase: "awaiting_input",
      last_reply: "R2",
    });
    const vm = await startedViewModel(fake);
    await vm.sendUtterance("latex allergy");
    await vm.sendUtterance("no asthma");
    await vm.sendUtterance("no anaphylaxis");

    const expected = fake.transcript.map((entry) =>
      entry.direction === "user"
        ? ["user", entry.text]
        : ["system", String(entry.event.payload["text"])],
    );
    // Skip the greeting, which predates the transcript.
    const got = bubbles(vm)
      .slice(1)
      .map((bubble) => [bubble.author, bubble.text]);
    expect(got).toEqual(expected);
  });

  it("never fabricates system text", async () => {
    const fake = new FakeService();
    fake.queue({
      events: [prompt("N7", "Asthma?"), reply("R9", "Some reply.")],
      phase: "awaiting_input",
      last_reply: "R9",
    });
    const vm = await startedViewModel(fake);
    await vm.sendUtterance("hello there");
    const serverTexts = new Set<string>([fake.greeting]);
    for (const entry of fake.transcript) {
      if (entry.direction === "system") {
        serverTexts.add(String(entry.event.payload["text"]));
      }
    }
    for (const bubble of bubbles(vm)) {
      if (bubble.author === "system") {
        expect(serverTexts.has(bubble.text)).toBe(true);
      }
    }
  });
});

describe("failure handling", () => {
  it("keeps the utterance for retry after a network failure", async () => {
    const fake = new FakeService();
    fake.failNextSend = "network";
    fake.queue({
      events: [prompt("N7", "Asthma?")],
      phase: "eliciting",
      last_reply: null,
    });
    const vm = await startedViewModel(fake);
    expect(await vm.sendUtterance("I have latex allergy")).toBe(false);
    expect(vm.retryText).toBe("I have latex allergy");
    // The failed attempt leaves no trace in the conversation.
    expect(bubbles(vm)).toHaveLength(1);

    expect(await vm.retry()).toBe(true);
    expect(vm.retryText).toBeNull();
    expect(fake.sent).toEqual(["I have latex allergy"]);
    expect(bubbles(vm).map((bubble) => bubble.text)).toContain("Asthma?");
  });

  it("retry with nothing pending is a no-op", async () => {
    const vm = await startedViewModel(new FakeService());
    expect(await vm.retry()).toBe(false);
  });

  it("surfaces a refused message on an ended session as a banner", async () => {
    const fake = new FakeService();
    fake.failNextSend = 409;
    const vm = await startedViewModel(fake);
    expect(await vm.sendUtterance("anything")).toBe(false);
    expect(vm.endedBannerVisible).toBe(true);
    expect(vm.phase).toBe("terminated");
    expect(vm.retryText).toBeNull();
  });

  it("surfaces other refusals as inline notices", async () => {
    const fake = new FakeService();
    fake.failNextSend = 429;
    const vm = await startedViewModel(fake);
    expect(await vm.sendUtterance("anything")).toBe(false);
    expect(notices(vm)).toEqual([
      { sort: "notice", kind: "CLIENT_ERROR", text: "message refused" },
    ]);
    expect(vm.retryText).toBeNull();
  });
});

describe("dedicated controls", () => {
  it("the explanation control posts the literal question", async () => {
    const fake = new FakeService();
    fake.queue({
      events: [
        {
          kind: "EXPLANATION",
          payload: { supporters: [], supporter_facts: ["f"], not_given: [] },
        },
      ],
      phase: "awaiting_input",
      last_reply: "R3",
    });
    const vm = await startedViewModel(fake);
    await vm.requestExplanation();
    expect(fake.sent).toEqual([EXPLAIN_UTTERANCE]);
    const card = vm.items.find(
      (item): item is ExplanationCard => item.sort === "explanation",
    );
    expect(card?.because).toEqual(["f"]);
  });

  it("ending the session posts a stop phrase", async () => {
    const fake = new FakeService();
    fake.queue({
      events: [{ kind: "TERMINATED", payload: {} }],
      phase: "terminated",
      last_reply: null,
    });
    const vm = await startedViewModel(fake);
    await vm.endSession();
    expect(fake.sent).toEqual([STOP_UTTERANCE]);
    expect(vm.terminated).toBe(true);
    expect(vm.canSend).toBe(false);
  });
});
